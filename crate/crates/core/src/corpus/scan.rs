//! Per-document mention detection and daily count aggregation.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tokens::JoinedTokens;
use super::{AliasIndex, AliasKind, CorpusWindow, Document, Medium, PersonId};

/// A single alias hit inside a document, as a token span within one section
/// (0 = title, 1 = body). Matching never crosses the title/body boundary.
#[derive(Debug, Clone, Copy)]
struct Hit {
    person: u32,
    kind: AliasKind,
    section: u8,
    start: u32,
    end: u32,
}

impl Hit {
    fn overlaps(&self, other: &Hit) -> bool {
        self.section == other.section && self.start < other.end && other.start < self.end
    }
}

fn section_hits(index: &AliasIndex, text: &str, section: u8, out: &mut Vec<Hit>) {
    let joined = JoinedTokens::from_text(text);
    if joined.text.is_empty() {
        return;
    }
    for m in index.matcher().find_overlapping_iter(&joined.text) {
        if !joined.on_token_boundary(m.start(), m.end()) {
            continue;
        }
        let (person, kind, token_len) = index.pattern(m.pattern().as_usize());
        let start = joined.token_at(m.start()) as u32;
        out.push(Hit {
            person,
            kind,
            section,
            start,
            end: start + token_len,
        });
    }
}

fn mentioned_person_indices(doc: &Document, index: &AliasIndex) -> Vec<u32> {
    let mut hits = Vec::new();
    section_hits(index, &doc.title, 0, &mut hits);
    section_hits(index, &doc.body, 1, &mut hits);
    if hits.is_empty() {
        return Vec::new();
    }
    hits.sort_by_key(|h| (h.person, h.section, h.start));

    let mut mentioned = Vec::new();
    let mut lo = 0;
    while lo < hits.len() {
        let mut hi = lo;
        while hi < hits.len() && hits[hi].person == hits[lo].person {
            hi += 1;
        }
        let person_hits = &hits[lo..hi];
        let included = match doc.medium {
            // A tweet mentions a person if it contains at least one full name.
            Medium::Twitter => person_hits.iter().any(|h| h.kind == AliasKind::FullName),
            // A news document additionally needs a second reference (full
            // name, prefix, or suffix) at a distinct, non-overlapping span.
            Medium::News => person_hits
                .iter()
                .filter(|h| h.kind == AliasKind::FullName)
                .any(|full| person_hits.iter().any(|other| !other.overlaps(full))),
        };
        if included {
            mentioned.push(hits[lo].person);
        }
        lo = hi;
    }
    mentioned
}

/// Persons mentioned by one document under the medium's rule.
///
/// Pure function of `(doc, index)`; empty text yields the empty set.
pub fn scan_document(doc: &Document, index: &AliasIndex) -> BTreeSet<PersonId> {
    mentioned_person_indices(doc, index)
        .into_iter()
        .map(|idx| index.person_id(idx as usize).clone())
        .collect()
}

/// Daily document totals and per-person mention-document counts.
///
/// Counts are at document granularity: a document counts once per mentioned
/// person no matter how often the person occurs in it. Documents dated
/// outside the corpus window go to a quarantine tally instead of the totals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyMentionCounts {
    totals: BTreeMap<(Medium, NaiveDate), u64>,
    mentions: BTreeMap<(PersonId, Medium, NaiveDate), u64>,
    quarantined: BTreeMap<Medium, u64>,
}

impl DailyMentionCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total_docs(&self, medium: Medium, day: NaiveDate) -> u64 {
        self.totals.get(&(medium, day)).copied().unwrap_or(0)
    }

    pub fn mention_docs(&self, person: &PersonId, medium: Medium, day: NaiveDate) -> u64 {
        self.mentions
            .get(&(person.clone(), medium, day))
            .copied()
            .unwrap_or(0)
    }

    pub fn quarantined(&self, medium: Medium) -> u64 {
        self.quarantined.get(&medium).copied().unwrap_or(0)
    }

    pub fn totals(&self) -> impl Iterator<Item = (Medium, NaiveDate, u64)> + '_ {
        self.totals.iter().map(|(&(m, d), &n)| (m, d, n))
    }

    pub fn mentions(&self) -> impl Iterator<Item = (&PersonId, Medium, NaiveDate, u64)> + '_ {
        self.mentions.iter().map(|((p, m, d), &n)| (p, *m, *d, n))
    }

    /// Distinct days in `[from, to]` on which the person was mentioned.
    pub fn mention_day_count(
        &self,
        person: &PersonId,
        medium: Medium,
        from: NaiveDate,
        to: NaiveDate,
    ) -> u32 {
        self.mentions
            .range((person.clone(), medium, from)..=(person.clone(), medium, to))
            .filter(|(_, &n)| n > 0)
            .count() as u32
    }

    pub fn record_total(&mut self, medium: Medium, day: NaiveDate) {
        *self.totals.entry((medium, day)).or_insert(0) += 1;
    }

    pub fn record_mention(&mut self, person: PersonId, medium: Medium, day: NaiveDate) {
        *self.mentions.entry((person, medium, day)).or_insert(0) += 1;
    }

    pub fn record_quarantined(&mut self, medium: Medium) {
        *self.quarantined.entry(medium).or_insert(0) += 1;
    }

    pub fn set_total(&mut self, medium: Medium, day: NaiveDate, n: u64) {
        if n > 0 {
            self.totals.insert((medium, day), n);
        }
    }

    pub fn set_mention(&mut self, person: PersonId, medium: Medium, day: NaiveDate, n: u64) {
        if n > 0 {
            self.mentions.insert((person, medium, day), n);
        }
    }

    /// Merge shard counts into `self`. Aggregation over any partition of the
    /// stream merged this way equals aggregation over the whole stream.
    pub fn merge(&mut self, other: DailyMentionCounts) {
        for (key, n) in other.totals {
            *self.totals.entry(key).or_insert(0) += n;
        }
        for (key, n) in other.mentions {
            *self.mentions.entry(key).or_insert(0) += n;
        }
        for (key, n) in other.quarantined {
            *self.quarantined.entry(key).or_insert(0) += n;
        }
    }

    fn record_document(&mut self, doc: &Document, index: &AliasIndex, window: &CorpusWindow) {
        if !window.contains(doc.date) {
            self.record_quarantined(doc.medium);
            return;
        }
        self.record_total(doc.medium, doc.date);
        for person_idx in mentioned_person_indices(doc, index) {
            self.record_mention(
                index.person_id(person_idx as usize).clone(),
                doc.medium,
                doc.date,
            );
        }
    }
}

/// Aggregate a document stream into daily counts.
///
/// Output is independent of stream order.
pub fn aggregate_counts<'a, I>(
    docs: I,
    index: &AliasIndex,
    window: &CorpusWindow,
) -> DailyMentionCounts
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut counts = DailyMentionCounts::new();
    for doc in docs {
        counts.record_document(doc, index, window);
    }
    counts
}

/// Parallel aggregation: per-shard counters combined by a deterministic
/// merge. Equal to [`aggregate_counts`] on the same stream.
pub fn aggregate_counts_par(
    docs: &[Document],
    index: &AliasIndex,
    window: &CorpusWindow,
) -> DailyMentionCounts {
    docs.par_chunks(4096)
        .map(|chunk| aggregate_counts(chunk, index, window))
        .reduce(DailyMentionCounts::new, |mut acc, shard| {
            acc.merge(shard);
            acc
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_alias_index, AliasEntry, PersonRecord};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn day(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn houston_index() -> AliasIndex {
        let persons = vec![PersonRecord {
            id: PersonId::new("houston"),
            names: vec![
                AliasEntry {
                    surface: "Whitney Houston".into(),
                    share: 0.99,
                    kind: AliasKind::FullName,
                },
                AliasEntry {
                    surface: "Houston".into(),
                    share: 0.93,
                    kind: AliasKind::Suffix,
                },
            ],
            death_date: Some(day("2012-02-11")),
            age_at_death: Some(48),
            gender: None,
            manner_of_death: None,
            notability_type: None,
            language_group: None,
        }];
        build_alias_index(&persons, 0.9).unwrap()
    }

    fn doc(medium: Medium, title: &str, body: &str) -> Document {
        Document {
            id: "d1".into(),
            date: day("2012-02-12"),
            medium,
            title: title.into(),
            body: body.into(),
            domain: None,
        }
    }

    #[test]
    fn tweet_needs_one_full_name() {
        let index = houston_index();
        let hit = scan_document(&doc(Medium::Twitter, "", "RIP Whitney Houston"), &index);
        assert_eq!(hit.len(), 1);
        assert!(hit.contains(&PersonId::new("houston")));
    }

    #[test]
    fn tweet_suffix_alone_is_not_a_mention() {
        let index = houston_index();
        let hit = scan_document(&doc(Medium::Twitter, "", "Houston was a great singer"), &index);
        assert!(hit.is_empty());
    }

    #[test]
    fn news_single_full_name_is_spurious() {
        let index = houston_index();
        let hit = scan_document(
            &doc(Medium::News, "", "Whitney Houston appeared in a link list"),
            &index,
        );
        assert!(hit.is_empty());
    }

    #[test]
    fn news_full_name_plus_suffix_counts() {
        let index = houston_index();
        let hit = scan_document(
            &doc(
                Medium::News,
                "",
                "Whitney Houston died on Saturday. Houston was 48.",
            ),
            &index,
        );
        assert_eq!(hit.len(), 1);
    }

    #[test]
    fn overlapping_suffix_inside_full_name_does_not_count_twice() {
        // The lone "Houston" suffix hit sits inside the full-name span.
        let index = houston_index();
        let hit = scan_document(&doc(Medium::News, "Whitney Houston", ""), &index);
        assert!(hit.is_empty());
    }

    #[test]
    fn title_and_body_matches_pool_without_crossing_the_boundary() {
        let index = houston_index();
        // Full name in the title, suffix in the body: two distinct references.
        let hit = scan_document(
            &doc(Medium::News, "Whitney Houston dead", "Houston was 48."),
            &index,
        );
        assert_eq!(hit.len(), 1);
        // A name split across the boundary must not match.
        let split = scan_document(&doc(Medium::Twitter, "thanks Whitney", "Houston!"), &index);
        assert!(split.is_empty());
    }

    #[test]
    fn empty_text_yields_empty_set() {
        let index = houston_index();
        assert!(scan_document(&doc(Medium::Twitter, "", ""), &index).is_empty());
    }

    #[test]
    fn news_rule_is_stricter_than_twitter_rule() {
        let index = houston_index();
        let bodies = [
            "",
            "Houston",
            "Whitney Houston",
            "Whitney Houston and Houston",
            "Whitney Houston met Whitney Houston",
        ];
        for body in bodies {
            let as_news = scan_document(&doc(Medium::News, "t", body), &index);
            let mut tweet = doc(Medium::Twitter, "t", body);
            tweet.medium = Medium::Twitter;
            let as_tweet = scan_document(&tweet, &index);
            assert!(
                as_news.is_subset(&as_tweet),
                "news mentions must be a subset of twitter mentions for {body:?}"
            );
        }
    }

    #[test]
    fn counting_is_binary_per_document() {
        let index = houston_index();
        let window = CorpusWindow::new(day("2012-01-01"), day("2012-12-31"));
        let docs = vec![doc(
            Medium::News,
            "Whitney Houston",
            "Whitney Houston, yes, Whitney Houston herself",
        )];
        let counts = aggregate_counts(&docs, &index, &window);
        assert_eq!(
            counts.mention_docs(&PersonId::new("houston"), Medium::News, day("2012-02-12")),
            1
        );
    }

    #[test]
    fn totals_count_every_document_once() {
        let index = houston_index();
        let window = CorpusWindow::new(day("2012-01-01"), day("2012-12-31"));
        let docs = vec![
            doc(Medium::Twitter, "", "RIP Whitney Houston"),
            doc(Medium::Twitter, "", "RIP Whitney Houston again"),
            doc(Medium::Twitter, "", "nothing to see"),
        ];
        let counts = aggregate_counts(&docs, &index, &window);
        assert_eq!(counts.total_docs(Medium::Twitter, day("2012-02-12")), 3);
        assert_eq!(
            counts.mention_docs(&PersonId::new("houston"), Medium::Twitter, day("2012-02-12")),
            2
        );
    }

    #[test]
    fn out_of_window_documents_are_quarantined() {
        let index = houston_index();
        let window = CorpusWindow::new(day("2013-01-01"), day("2013-12-31"));
        let docs = vec![doc(Medium::Twitter, "", "RIP Whitney Houston")];
        let counts = aggregate_counts(&docs, &index, &window);
        assert_eq!(counts.quarantined(Medium::Twitter), 1);
        assert_eq!(counts.total_docs(Medium::Twitter, day("2012-02-12")), 0);
    }

    #[test]
    fn aggregation_is_order_independent_and_shard_mergeable() {
        let index = houston_index();
        let window = CorpusWindow::new(day("2012-01-01"), day("2012-12-31"));
        let mut docs = Vec::new();
        for i in 0..200 {
            let body = match i % 4 {
                0 => "RIP Whitney Houston".to_owned(),
                1 => "Whitney Houston tribute. Houston forever.".to_owned(),
                2 => "weather report".to_owned(),
                _ => format!("post number {i}"),
            };
            docs.push(Document {
                id: format!("d{i}"),
                date: day("2012-02-12") + chrono::Duration::days(i % 7),
                medium: if i % 2 == 0 { Medium::Twitter } else { Medium::News },
                title: "daily".into(),
                body,
                domain: None,
            });
        }
        let baseline = aggregate_counts(&docs, &index, &window);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            docs.shuffle(&mut rng);
            assert_eq!(aggregate_counts(&docs, &index, &window), baseline);
            assert_eq!(aggregate_counts_par(&docs, &index, &window), baseline);
            // Any partition point merges back to the whole.
            let cut = docs.len() / 3;
            let mut left = aggregate_counts(&docs[..cut], &index, &window);
            left.merge(aggregate_counts(&docs[cut..], &index, &window));
            assert_eq!(left, baseline);
        }
    }

    #[test]
    fn mention_docs_never_exceed_total_docs() {
        let index = houston_index();
        let window = CorpusWindow::new(day("2012-01-01"), day("2012-12-31"));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phrases = [
            "RIP Whitney Houston",
            "Whitney Houston sang. Houston was loved.",
            "nothing here",
            "Houston alone",
        ];
        let docs: Vec<Document> = (0..300)
            .map(|i| Document {
                id: format!("d{i}"),
                date: day("2012-02-01") + chrono::Duration::days(i % 20),
                medium: if i % 3 == 0 { Medium::News } else { Medium::Twitter },
                title: String::new(),
                body: phrases.choose(&mut rng).unwrap().to_string(),
                domain: None,
            })
            .collect();
        let counts = aggregate_counts(&docs, &index, &window);
        for (person, medium, date, n) in counts.mentions() {
            assert!(n <= counts.total_docs(medium, date), "{person} {medium} {date}");
        }
    }
}
