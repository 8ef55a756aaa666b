//! Seeded generators for corpora, series, and feature populations with known
//! ground truth, so every pipeline stage has a closed-loop test.
//!
//! All randomness flows from the spec seed through per-person derived seeds;
//! the same spec yields bit-identical output.

use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    AliasEntry, AliasKind, CorpusWindow, DailyMentionCounts, Document, Medium, PersonId,
    PersonRecord,
};
use crate::model::ShiftedPowerLawParams;
use crate::series::{MentionSeries, SeriesKind, DAY_MAX, DAY_MIN, SERIES_LEN};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("target fraction {fraction} > 1 for person {person} in {medium} at t = {t}")]
    FractionAboveOne {
        person: PersonId,
        medium: Medium,
        t: i32,
        fraction: f64,
    },
    #[error("{medium} on {day}: {needed} mention documents exceed the {capacity} docs/day budget")]
    CapacityExceeded {
        medium: Medium,
        day: NaiveDate,
        needed: u64,
        capacity: u64,
    },
    #[error("archetype shares sum to {0}, expected 1")]
    SharesDontSumToOne(f64),
    #[error("at least one archetype is required")]
    NoArchetypes,
}

fn derived_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Synthetic raw series: baseline level with log-scale noise before death,
/// the decay curve with the same noise from day 1 on. Day 0 carries the
/// baseline (the fit range starts at day 1).
pub fn generate_series(
    params: &ShiftedPowerLawParams,
    medium: Medium,
    sigma: f64,
    seed: u64,
) -> MentionSeries {
    let mut rng = derived_rng(seed, 1);
    let noise = Normal::new(0.0, sigma.max(0.0)).expect("sigma >= 0");
    let mut values = Vec::with_capacity(SERIES_LEN);
    for t in DAY_MIN..=DAY_MAX {
        let level = if t >= 1 {
            params.communicative(t as f64) + params.cultural()
        } else {
            params.cultural()
        };
        let eps = if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
        values.push(level.log10() + eps);
    }
    MentionSeries {
        person_id: PersonId::new(format!("synth-{seed}")),
        medium,
        kind: SeriesKind::Raw,
        epsilon: 0.0,
        values,
        interpolated: BTreeSet::new(),
        passthrough_warning: false,
    }
}

/// One planted curve-shape class in feature space
/// (pre_mean, short_boost, long_boost, halving_time).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Archetype {
    pub share: f64,
    pub centroid: [f64; 4],
}

/// The four qualitative shapes: a short blip, a death that passes quietly, a
/// lasting rise, and a fading giant.
pub fn default_archetypes() -> Vec<Archetype> {
    vec![
        Archetype {
            share: 0.62,
            centroid: [-6.0, 2.0, 0.0, 5.0],
        },
        Archetype {
            share: 0.28,
            centroid: [-6.0, 0.5, 0.0, 150.0],
        },
        Archetype {
            share: 0.07,
            centroid: [-4.5, 2.5, 0.8, 120.0],
        },
        Archetype {
            share: 0.03,
            centroid: [-3.5, 2.2, -0.5, 10.0],
        },
    ]
}

#[derive(Debug, Clone)]
pub struct SynthPopulation {
    /// Feature rows per person and medium, in person order.
    pub news_features: Vec<[f64; 4]>,
    pub twitter_features: Vec<[f64; 4]>,
    /// Planted archetype index per person and medium.
    pub news_labels: Vec<usize>,
    pub twitter_labels: Vec<usize>,
    /// Planted per-archetype person counts (news side).
    pub planted_sizes: Vec<usize>,
}

/// Largest-remainder apportionment of `n` over `shares` (which must sum
/// to 1).
fn apportion(shares: &[f64], n: usize) -> Result<Vec<usize>, SynthError> {
    if shares.is_empty() {
        return Err(SynthError::NoArchetypes);
    }
    let share_sum: f64 = shares.iter().sum();
    if (share_sum - 1.0).abs() > 1e-9 {
        return Err(SynthError::SharesDontSumToOne(share_sum));
    }
    let mut sizes: Vec<usize> = shares.iter().map(|s| (s * n as f64).floor() as usize).collect();
    let mut remainders: Vec<(usize, f64)> = shares
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s * n as f64 - sizes[i] as f64))
        .collect();
    remainders.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
    let mut missing = n - sizes.iter().sum::<usize>();
    for (idx, _) in remainders {
        if missing == 0 {
            break;
        }
        sizes[idx] += 1;
        missing -= 1;
    }
    Ok(sizes)
}

/// Gaussian blobs around the archetype centroids, with the Twitter label
/// redrawn uniformly at random with probability `mismatch_rate`.
pub fn generate_population(
    archetypes: &[Archetype],
    n: usize,
    blob_sigma: f64,
    mismatch_rate: f64,
    seed: u64,
) -> Result<SynthPopulation, SynthError> {
    let shares: Vec<f64> = archetypes.iter().map(|a| a.share).collect();
    let sizes = apportion(&shares, n)?;

    let mut news_labels = Vec::with_capacity(n);
    for (idx, &size) in sizes.iter().enumerate() {
        news_labels.extend(std::iter::repeat(idx).take(size));
    }

    let k = archetypes.len();
    let rows: Vec<([f64; 4], [f64; 4], usize)> = news_labels
        .par_iter()
        .enumerate()
        .map(|(person, &label)| {
            let mut rng = derived_rng(seed, person as u64 + 10);
            let noise = Normal::new(0.0, blob_sigma.max(0.0)).expect("sigma >= 0");
            let sample = |centroid: &[f64; 4], rng: &mut ChaCha8Rng| {
                let mut row = [0.0; 4];
                for (slot, c) in row.iter_mut().zip(centroid) {
                    *slot = c + noise.sample(rng);
                }
                row
            };
            let news = sample(&archetypes[label].centroid, &mut rng);
            let twitter_label = if rng.gen::<f64>() < mismatch_rate {
                rng.gen_range(0..k)
            } else {
                label
            };
            let twitter = sample(&archetypes[twitter_label].centroid, &mut rng);
            (news, twitter, twitter_label)
        })
        .collect();

    Ok(SynthPopulation {
        news_features: rows.iter().map(|r| r.0).collect(),
        twitter_features: rows.iter().map(|r| r.1).collect(),
        news_labels,
        twitter_labels: rows.iter().map(|r| r.2).collect(),
        planted_sizes: sizes,
    })
}

/// Per-person curve-shape class for corpus generation, as multiplicative
/// scales on the medium's decay parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShapeClass {
    pub share: f64,
    /// Scales the pre-mortem baseline level.
    pub baseline_scale: f64,
    /// Scales the post-mortem spike amplitude.
    pub amplitude_scale: f64,
    /// Scales the post-mortem tail level relative to the pre-mortem one.
    pub long_term_scale: f64,
}

/// Shape mixture mirroring the four feature archetypes: a plain blip, a
/// quiet passing, a popular figure who keeps rising, and a fading giant.
pub fn default_shape_classes() -> Vec<ShapeClass> {
    vec![
        ShapeClass {
            share: 0.62,
            baseline_scale: 1.0,
            amplitude_scale: 1.0,
            long_term_scale: 1.0,
        },
        ShapeClass {
            share: 0.28,
            baseline_scale: 1.0,
            amplitude_scale: 0.15,
            long_term_scale: 1.0,
        },
        ShapeClass {
            share: 0.07,
            baseline_scale: 3.0,
            amplitude_scale: 1.2,
            long_term_scale: 2.5,
        },
        ShapeClass {
            share: 0.03,
            baseline_scale: 6.0,
            amplitude_scale: 1.1,
            long_term_scale: 0.5,
        },
    ]
}

const IDENTITY_SHAPE: ShapeClass = ShapeClass {
    share: 1.0,
    baseline_scale: 1.0,
    amplitude_scale: 1.0,
    long_term_scale: 1.0,
};

/// Corpus generation spec. Fractions here are desk-scale, not the tiny
/// real-corpus magnitudes, so integer counts can realize them exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_persons: usize,
    /// Documents per day and medium.
    pub docs_per_day: u64,
    /// Log10-scale noise applied to the planted fractions.
    pub noise_sigma: f64,
    /// Decay parameters per medium, at corpus scale.
    pub news_params: ShiftedPowerLawParams,
    pub twitter_params: ShiftedPowerLawParams,
    /// Deaths are staggered over this many days.
    pub death_spread_days: u32,
    /// Emit news mention documents with a single full name only; their
    /// ground-truth news counts are zero under the second-mention rule.
    pub news_single_mention: bool,
    pub first_death: NaiveDate,
    /// Per-person shape mixture; empty means every person shares the plain
    /// medium curve.
    #[serde(default)]
    pub shape_classes: Vec<ShapeClass>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 42,
            n_persons: 12,
            docs_per_day: 64,
            noise_sigma: 0.0,
            news_params: ShiftedPowerLawParams::new(0.20, 1.34, 0.012),
            twitter_params: ShiftedPowerLawParams::new(0.30, 1.54, 0.018),
            death_spread_days: 30,
            news_single_mention: false,
            first_death: NaiveDate::from_ymd_opt(2012, 6, 1).unwrap(),
            shape_classes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub documents: Vec<Document>,
    pub registry: Vec<PersonRecord>,
    pub ground_truth: DailyMentionCounts,
    pub window: CorpusWindow,
}

const GIVEN_NAMES: [&str; 10] = [
    "Avery", "Blake", "Casey", "Devon", "Emery", "Finley", "Harper", "Jordan", "Morgan", "Rowan",
];
const FAMILY_STEMS: [&str; 8] = [
    "Marlowe", "Kestrel", "Veyron", "Ashford", "Linden", "Oakhart", "Sorrel", "Winslow",
];
const FILLER: [&str; 24] = [
    "the", "daily", "report", "covered", "local", "markets", "and", "weather", "updates",
    "from", "around", "region", "with", "notes", "on", "traffic", "culture", "events",
    "science", "policy", "sport", "results", "music", "festivals",
];

const GENDERS: [&str; 2] = ["male", "female"];
const MANNERS: [&str; 2] = ["natural", "unnatural"];
const NOTABILITIES: [&str; 6] = [
    "arts",
    "sports",
    "leadership",
    "known_for_death",
    "general_fame",
    "academia_engineering",
];
const LANGUAGES: [&str; 3] = ["anglophone", "non_anglophone", "unknown"];

fn synth_person(spec: &SynthSpec, idx: usize) -> PersonRecord {
    let mut rng = derived_rng(spec.seed, 1000 + idx as u64);
    let given = GIVEN_NAMES[idx % GIVEN_NAMES.len()];
    let family = format!("{}{:04}", FAMILY_STEMS[idx % FAMILY_STEMS.len()], idx);
    // Stride 7 keeps any two death-day spikes a few days apart.
    let death = spec.first_death
        + Duration::days((idx as u32 * 7 % spec.death_spread_days.max(1)) as i64);
    PersonRecord {
        id: PersonId::new(format!("p{idx:04}")),
        names: vec![
            AliasEntry {
                surface: format!("{given} {family}"),
                share: 1.0,
                kind: AliasKind::FullName,
            },
            AliasEntry {
                surface: family,
                share: 1.0,
                kind: AliasKind::Suffix,
            },
        ],
        death_date: Some(death),
        age_at_death: Some(rng.gen_range(20..100)),
        gender: Some(GENDERS[rng.gen_range(0..GENDERS.len())].to_owned()),
        manner_of_death: Some(MANNERS[rng.gen_range(0..MANNERS.len())].to_owned()),
        notability_type: Some(NOTABILITIES[rng.gen_range(0..NOTABILITIES.len())].to_owned()),
        language_group: Some(LANGUAGES[rng.gen_range(0..LANGUAGES.len())].to_owned()),
    }
}

fn planted_fraction(params: &ShiftedPowerLawParams, shape: &ShapeClass, t: i64) -> f64 {
    let post_tail = params.baseline * shape.baseline_scale * shape.long_term_scale;
    if t >= 1 {
        params.communicative(t as f64) * shape.amplitude_scale + post_tail
    } else if t == 0 {
        // The death-day spike is already up; shape it like day 1.
        params.amplitude * shape.amplitude_scale + post_tail
    } else {
        params.baseline * shape.baseline_scale
    }
}

/// Emit a document stream with planted mention counts plus the ground-truth
/// daily counts the scanner must reproduce.
pub fn generate_corpus(spec: &SynthSpec) -> Result<SynthCorpus, SynthError> {
    let registry: Vec<PersonRecord> = (0..spec.n_persons).map(|i| synth_person(spec, i)).collect();
    let deaths: Vec<NaiveDate> = registry.iter().map(|p| p.death_date.unwrap()).collect();
    let person_shapes: Vec<ShapeClass> = if spec.shape_classes.is_empty() {
        vec![IDENTITY_SHAPE; spec.n_persons]
    } else {
        let shares: Vec<f64> = spec.shape_classes.iter().map(|c| c.share).collect();
        let sizes = apportion(&shares, spec.n_persons)?;
        let mut shapes = Vec::with_capacity(spec.n_persons);
        for (class, &size) in spec.shape_classes.iter().zip(&sizes) {
            shapes.extend(std::iter::repeat(*class).take(size));
        }
        shapes
    };
    let window = CorpusWindow::new(
        *deaths.iter().min().unwrap() - Duration::days(360),
        *deaths.iter().max().unwrap() + Duration::days(400),
    );

    // Per-person planted integer counts, derived in parallel.
    let schedules: Vec<Vec<(Medium, NaiveDate, u64)>> = registry
        .par_iter()
        .enumerate()
        .map(|(idx, person)| {
            let death = deaths[idx];
            let mut rng = derived_rng(spec.seed, 2000 + idx as u64);
            let noise = Normal::new(0.0, spec.noise_sigma.max(0.0)).expect("sigma >= 0");
            let mut schedule = Vec::new();
            for (medium, params) in [
                (Medium::News, &spec.news_params),
                (Medium::Twitter, &spec.twitter_params),
            ] {
                let mut day = window.start;
                while day <= window.end {
                    let t = (day - death).num_days();
                    let mut fraction = planted_fraction(params, &person_shapes[idx], t);
                    if spec.noise_sigma > 0.0 {
                        fraction *= 10f64.powf(noise.sample(&mut rng));
                    }
                    if fraction > 1.0 {
                        return Err(SynthError::FractionAboveOne {
                            person: person.id.clone(),
                            medium,
                            t: t as i32,
                            fraction,
                        });
                    }
                    let count = (fraction * spec.docs_per_day as f64).round() as u64;
                    if count > 0 {
                        schedule.push((medium, day, count));
                    }
                    day += Duration::days(1);
                }
            }
            Ok(schedule)
        })
        .collect::<Result<_, _>>()?;

    // Ground truth: totals are the fixed budget; news mentions vanish when
    // the generator only plants single mentions.
    let mut ground_truth = DailyMentionCounts::new();
    {
        let mut day = window.start;
        while day <= window.end {
            for medium in Medium::ALL {
                ground_truth.set_total(medium, day, spec.docs_per_day);
            }
            day += Duration::days(1);
        }
    }
    for (idx, schedule) in schedules.iter().enumerate() {
        for &(medium, day, count) in schedule {
            if medium == Medium::News && spec.news_single_mention {
                continue;
            }
            ground_truth.set_mention(registry[idx].id.clone(), medium, day, count);
        }
    }

    // Documents: mention docs per person per day, filler up to the budget.
    let mut per_day: std::collections::BTreeMap<(Medium, NaiveDate), Vec<(usize, u64)>> =
        std::collections::BTreeMap::new();
    for (idx, schedule) in schedules.iter().enumerate() {
        for &(medium, day, count) in schedule {
            per_day.entry((medium, day)).or_default().push((idx, count));
        }
    }

    let mut documents = Vec::new();
    let mut day = window.start;
    while day <= window.end {
        for medium in Medium::ALL {
            let mut rng = derived_rng(
                spec.seed,
                3000 + (day - window.start).num_days() as u64 * 2
                    + if medium == Medium::News { 0 } else { 1 },
            );
            let mentioners = per_day.get(&(medium, day)).cloned().unwrap_or_default();
            let needed: u64 = mentioners.iter().map(|(_, c)| c).sum();
            if needed > spec.docs_per_day {
                return Err(SynthError::CapacityExceeded {
                    medium,
                    day,
                    needed,
                    capacity: spec.docs_per_day,
                });
            }
            let mut serial = 0u64;
            for (person_idx, count) in mentioners {
                let person = &registry[person_idx];
                let full_name = &person.names[0].surface;
                let family = &person.names[1].surface;
                for _ in 0..count {
                    let body = match (medium, spec.news_single_mention) {
                        (Medium::News, false) => format!(
                            "{} {} while {} noted that {} {}",
                            full_name,
                            filler_words(&mut rng, 5),
                            filler_words(&mut rng, 3),
                            family,
                            filler_words(&mut rng, 4),
                        ),
                        (Medium::News, true) => {
                            format!("{} {}", full_name, filler_words(&mut rng, 9))
                        }
                        (Medium::Twitter, _) => format!(
                            "{} {} {}",
                            filler_words(&mut rng, 2),
                            full_name,
                            filler_words(&mut rng, 3)
                        ),
                    };
                    documents.push(Document {
                        id: format!("{}-{}-{:05}", medium.as_str(), day, serial),
                        date: day,
                        medium,
                        title: format!("{} digest {}", medium.as_str(), day),
                        body,
                        domain: Some(format!("{}.example.org", medium.as_str())),
                    });
                    serial += 1;
                }
            }
            for filler_serial in serial..spec.docs_per_day {
                documents.push(Document {
                    id: format!("{}-{}-{:05}", medium.as_str(), day, filler_serial),
                    date: day,
                    medium,
                    title: format!("{} digest {}", medium.as_str(), day),
                    body: filler_words(&mut rng, 10),
                    domain: Some(format!("{}.example.org", medium.as_str())),
                });
            }
        }
        day += Duration::days(1);
    }

    Ok(SynthCorpus {
        documents,
        registry,
        ground_truth,
        window,
    })
}

fn filler_words(rng: &mut ChaCha8Rng, n: usize) -> String {
    let mut out = String::new();
    for i in 0..n {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(FILLER[rng.gen_range(0..FILLER.len())]);
    }
    out
}
