//! File formats shared by the subcommands: newline-delimited JSON documents,
//! the person registry, and the CSV interchange files between stages.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use memdecay_core::corpus::{DailyMentionCounts, Document, Medium, PersonId, PersonRecord};
use memdecay_core::features::CurveFeatures;
use memdecay_core::series::{MentionSeries, SeriesKind, DAY_MAX, DAY_MIN, SERIES_LEN};

/// Outcome of reading a JSONL document stream.
pub struct DocumentStream {
    pub documents: Vec<Document>,
    pub malformed: u64,
    pub total_lines: u64,
}

/// Read a `.jsonl` document stream; malformed lines are counted and skipped.
/// A news document with an empty body violates the document contract and
/// counts as malformed.
pub fn read_documents(path: &Path) -> Result<DocumentStream> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("opening documents file {}", path.display()))?;
    let reader = BufReader::new(file);
    let mut documents = Vec::new();
    let mut malformed = 0;
    let mut total_lines = 0;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        total_lines += 1;
        match serde_json::from_str::<Document>(&line) {
            Ok(doc) => {
                if doc.medium == Medium::News && doc.body.is_empty() {
                    malformed += 1;
                } else {
                    documents.push(doc);
                }
            }
            Err(_) => malformed += 1,
        }
    }
    Ok(DocumentStream {
        documents,
        malformed,
        total_lines,
    })
}

pub fn write_documents(path: &Path, documents: &[Document]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for doc in documents {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_registry(path: &Path) -> Result<Vec<PersonRecord>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading registry {}", path.display()))?;
    let registry: Vec<PersonRecord> =
        serde_json::from_str(&text).context("parsing person registry JSON")?;
    Ok(registry)
}

pub fn write_registry(path: &Path, registry: &[PersonRecord]) -> Result<()> {
    write_json(path, registry)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Counts CSVs: `person_id,medium,day,mention_docs` and
/// `medium,day,total_docs`.
pub fn write_counts(
    mention_path: &Path,
    total_path: &Path,
    counts: &DailyMentionCounts,
) -> Result<()> {
    let mut mentions = csv::Writer::from_path(mention_path)?;
    mentions.write_record(["person_id", "medium", "day", "mention_docs"])?;
    for (person, medium, day, n) in counts.mentions() {
        mentions.write_record([
            person.as_str(),
            medium.as_str(),
            &day.to_string(),
            &n.to_string(),
        ])?;
    }
    mentions.flush()?;

    let mut totals = csv::Writer::from_path(total_path)?;
    totals.write_record(["medium", "day", "total_docs"])?;
    for (medium, day, n) in counts.totals() {
        totals.write_record([medium.as_str(), &day.to_string(), &n.to_string()])?;
    }
    totals.flush()?;
    Ok(())
}

fn parse_medium(s: &str) -> Result<Medium> {
    match s {
        "news" => Ok(Medium::News),
        "twitter" => Ok(Medium::Twitter),
        other => bail!("unknown medium '{other}'"),
    }
}

pub fn read_counts(mention_path: &Path, total_path: &Path) -> Result<DailyMentionCounts> {
    let mut counts = DailyMentionCounts::new();
    let mut totals = csv::Reader::from_path(total_path)
        .with_context(|| format!("opening {}", total_path.display()))?;
    for record in totals.records() {
        let record = record?;
        counts.set_total(
            parse_medium(&record[0])?,
            record[1].parse()?,
            record[2].parse()?,
        );
    }
    let mut mentions = csv::Reader::from_path(mention_path)
        .with_context(|| format!("opening {}", mention_path.display()))?;
    for record in mentions.records() {
        let record = record?;
        counts.set_mention(
            PersonId::new(&record[0]),
            parse_medium(&record[1])?,
            record[2].parse()?,
            record[3].parse()?,
        );
    }
    Ok(counts)
}

/// Series CSV: `person_id,medium,t,value,kind,interpolated`.
pub fn write_series(path: &Path, series: &[MentionSeries]) -> Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["person_id", "medium", "t", "value", "kind", "interpolated"])?;
    for s in series {
        let kind = match s.kind {
            SeriesKind::Raw => "raw",
            SeriesKind::Smoothed => "smoothed",
        };
        for t in DAY_MIN..=DAY_MAX {
            out.write_record([
                s.person_id.as_str(),
                s.medium.as_str(),
                &t.to_string(),
                &s.value(t).to_string(),
                kind,
                if s.interpolated.contains(&t) { "true" } else { "false" },
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_series(path: &Path) -> Result<Vec<MentionSeries>> {
    use std::collections::BTreeMap;
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut by_key: BTreeMap<(String, Medium, SeriesKind), (Vec<f64>, BTreeSet<i32>)> =
        BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let kind = match &record[4] {
            "raw" => SeriesKind::Raw,
            "smoothed" => SeriesKind::Smoothed,
            other => bail!("unknown series kind '{other}'"),
        };
        let key = (record[0].to_owned(), parse_medium(&record[1])?, kind);
        let entry = by_key
            .entry(key)
            .or_insert_with(|| (vec![f64::NAN; SERIES_LEN], BTreeSet::new()));
        let t: i32 = record[2].parse()?;
        if !(DAY_MIN..=DAY_MAX).contains(&t) {
            bail!("day offset {t} outside the series domain");
        }
        entry.0[(t - DAY_MIN) as usize] = record[3].parse()?;
        if &record[5] == "true" {
            entry.1.insert(t);
        }
    }
    let mut series = Vec::new();
    for ((person, medium, kind), (values, interpolated)) in by_key {
        if values.iter().any(|v| v.is_nan()) {
            bail!("series for {person} in {medium} does not cover the full domain");
        }
        series.push(MentionSeries {
            person_id: PersonId::new(person),
            medium,
            kind,
            epsilon: 0.0,
            values,
            interpolated,
            passthrough_warning: false,
        });
    }
    Ok(series)
}

/// Features CSV:
/// `person_id,medium,pre_mean,short_boost,long_boost,halving_time`.
pub fn write_features(path: &Path, features: &[CurveFeatures]) -> Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record([
        "person_id",
        "medium",
        "pre_mean",
        "short_boost",
        "long_boost",
        "halving_time",
    ])?;
    for f in features {
        out.write_record([
            f.person_id.as_str(),
            f.medium.as_str(),
            &f.pre_mean.to_string(),
            &f.short_boost.to_string(),
            &f.long_boost.to_string(),
            &f.halving_time.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_features(path: &Path) -> Result<Vec<CurveFeatures>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut features = Vec::new();
    for record in reader.records() {
        let record = record?;
        features.push(CurveFeatures {
            person_id: PersonId::new(&record[0]),
            medium: parse_medium(&record[1])?,
            pre_mean: record[2].parse()?,
            short_boost: record[3].parse()?,
            long_boost: record[4].parse()?,
            halving_time: record[5].parse()?,
        });
    }
    Ok(features)
}
