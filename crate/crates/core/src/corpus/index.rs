//! Alias index construction.
//!
//! Only surfaces whose ambiguity share clears the threshold are admitted; a
//! surface that would map to two different persons after thresholding signals
//! dirty input and is rejected outright. Persons left without any admitted
//! full name are reported as excluded and contribute no patterns at all (both
//! scan rules require a full-name match, so their prefixes and suffixes could
//! never fire).

use std::collections::BTreeMap;

use aho_corasick::AhoCorasick;

use super::tokens::normalize_surface;
use super::{AliasKind, CorpusError, PersonId, PersonRecord};

/// Why a surface was dropped during index construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    /// After thresholding the surface still maps to more than one person.
    AmbiguousAcrossPersons(Vec<PersonId>),
    /// A prefix/suffix entry is not a contiguous token prefix/suffix of any of
    /// the person's registered full names.
    NotAffixOfFullName,
    /// The surface normalizes to an empty token sequence.
    EmptySurface,
}

#[derive(Debug, Clone)]
pub struct RejectedSurface {
    pub surface: String,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Copy)]
struct PatternMeta {
    person: u32,
    kind: AliasKind,
    token_len: u32,
}

/// Immutable multi-pattern matcher over all admitted alias surfaces.
///
/// Shareable across scan workers; all lookups are read-only.
pub struct AliasIndex {
    matcher: AhoCorasick,
    patterns: Vec<PatternMeta>,
    persons: Vec<PersonId>,
    pub threshold: f64,
    /// Persons with no admitted full-name surface.
    pub excluded_persons: Vec<PersonId>,
    pub rejected: Vec<RejectedSurface>,
}

impl AliasIndex {
    pub fn person_count(&self) -> usize {
        self.persons.len()
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    pub fn persons(&self) -> &[PersonId] {
        &self.persons
    }

    pub fn person_id(&self, idx: usize) -> &PersonId {
        &self.persons[idx]
    }

    pub(crate) fn matcher(&self) -> &AhoCorasick {
        &self.matcher
    }

    pub(crate) fn pattern(&self, id: usize) -> (u32, AliasKind, u32) {
        let meta = self.patterns[id];
        (meta.person, meta.kind, meta.token_len)
    }

    /// Kind under which a normalized surface was admitted, if any.
    pub fn lookup(&self, surface: &str) -> Option<(&PersonId, AliasKind)> {
        let needle = normalize_surface(surface).join(" ");
        self.matcher
            .find_iter(&needle)
            .find(|m| m.start() == 0 && m.end() == needle.len())
            .map(|m| {
                let meta = self.patterns[m.pattern().as_usize()];
                (&self.persons[meta.person as usize], meta.kind)
            })
    }
}

/// Build the alias index from the registry.
///
/// Admits exactly the aliases with `share >= threshold`; duplicate surfaces
/// and invalid prefix/suffix entries land in [`AliasIndex::rejected`], persons
/// without an admitted full name in [`AliasIndex::excluded_persons`].
pub fn build_alias_index(
    persons: &[PersonRecord],
    threshold: f64,
) -> Result<AliasIndex, CorpusError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(CorpusError::InvalidThreshold(threshold));
    }

    let mut rejected = Vec::new();
    // Normalized surface -> per-person strongest kind, in registry order.
    let mut candidates: BTreeMap<String, Vec<(usize, AliasKind, u32)>> = BTreeMap::new();

    for (person_idx, person) in persons.iter().enumerate() {
        let full_names: Vec<Vec<String>> = person
            .names
            .iter()
            .filter(|a| a.kind == AliasKind::FullName)
            .map(|a| normalize_surface(&a.surface))
            .collect();

        for alias in &person.names {
            if !(0.0..=1.0).contains(&alias.share) {
                return Err(CorpusError::InvalidShare {
                    person: person.id.clone(),
                    surface: alias.surface.clone(),
                    share: alias.share,
                });
            }
            if alias.share < threshold {
                continue;
            }
            let tokens = normalize_surface(&alias.surface);
            if tokens.is_empty() {
                rejected.push(RejectedSurface {
                    surface: alias.surface.clone(),
                    reason: RejectReason::EmptySurface,
                });
                continue;
            }
            match alias.kind {
                AliasKind::FullName => {}
                AliasKind::Prefix => {
                    if !full_names.iter().any(|f| f.starts_with(&tokens[..])) {
                        rejected.push(RejectedSurface {
                            surface: alias.surface.clone(),
                            reason: RejectReason::NotAffixOfFullName,
                        });
                        continue;
                    }
                }
                AliasKind::Suffix => {
                    if !full_names.iter().any(|f| f.ends_with(&tokens[..])) {
                        rejected.push(RejectedSurface {
                            surface: alias.surface.clone(),
                            reason: RejectReason::NotAffixOfFullName,
                        });
                        continue;
                    }
                }
            }
            let key = tokens.join(" ");
            let entry = candidates.entry(key).or_default();
            match entry.iter_mut().find(|(idx, _, _)| *idx == person_idx) {
                Some(slot) => {
                    // Same surface registered twice for one person: a full
                    // name outranks a prefix/suffix of itself.
                    if slot.1 != AliasKind::FullName && alias.kind == AliasKind::FullName {
                        slot.1 = AliasKind::FullName;
                    }
                }
                None => entry.push((person_idx, alias.kind, tokens.len() as u32)),
            }
        }
    }

    // Resolve cross-person duplicates, then drop persons without a full name.
    let mut admitted: BTreeMap<String, (usize, AliasKind, u32)> = BTreeMap::new();
    for (surface, owners) in candidates {
        if owners.len() > 1 {
            rejected.push(RejectedSurface {
                surface,
                reason: RejectReason::AmbiguousAcrossPersons(
                    owners
                        .iter()
                        .map(|(idx, _, _)| persons[*idx].id.clone())
                        .collect(),
                ),
            });
            continue;
        }
        let (person_idx, kind, len) = owners[0];
        admitted.insert(surface, (person_idx, kind, len));
    }

    let mut has_full_name = vec![false; persons.len()];
    for (person_idx, kind, _) in admitted.values() {
        if *kind == AliasKind::FullName {
            has_full_name[*person_idx] = true;
        }
    }

    let mut excluded_persons = Vec::new();
    let mut person_slot = vec![u32::MAX; persons.len()];
    let mut kept_persons = Vec::new();
    for (idx, person) in persons.iter().enumerate() {
        if has_full_name[idx] {
            person_slot[idx] = kept_persons.len() as u32;
            kept_persons.push(person.id.clone());
        } else {
            excluded_persons.push(person.id.clone());
        }
    }

    let mut surfaces = Vec::new();
    let mut patterns = Vec::new();
    for (surface, (person_idx, kind, token_len)) in admitted {
        if !has_full_name[person_idx] {
            continue;
        }
        surfaces.push(surface);
        patterns.push(PatternMeta {
            person: person_slot[person_idx],
            kind,
            token_len,
        });
    }

    let matcher = AhoCorasick::new(&surfaces).expect("alias surfaces form a valid pattern set");

    Ok(AliasIndex {
        matcher,
        patterns,
        persons: kept_persons,
        threshold,
        excluded_persons,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AliasEntry;

    fn person(id: &str, names: &[(&str, f64, AliasKind)]) -> PersonRecord {
        PersonRecord {
            id: PersonId::new(id),
            names: names
                .iter()
                .map(|(surface, share, kind)| AliasEntry {
                    surface: (*surface).to_owned(),
                    share: *share,
                    kind: *kind,
                })
                .collect(),
            death_date: None,
            age_at_death: None,
            gender: None,
            manner_of_death: None,
            notability_type: None,
            language_group: None,
        }
    }

    #[test]
    fn admits_unambiguous_full_name() {
        let persons = vec![person(
            "houston",
            &[
                ("Whitney Houston", 0.99, AliasKind::FullName),
                ("Houston", 0.30, AliasKind::Suffix),
            ],
        )];
        let index = build_alias_index(&persons, 0.9).unwrap();
        assert_eq!(
            index.lookup("Whitney Houston").map(|(p, k)| (p.as_str(), k)),
            Some(("houston", AliasKind::FullName))
        );
        assert!(index.lookup("Houston").is_none());
        assert!(index.excluded_persons.is_empty());
    }

    #[test]
    fn person_without_unambiguous_full_name_is_excluded() {
        let persons = vec![person("smith", &[("John Smith", 0.5, AliasKind::FullName)])];
        let index = build_alias_index(&persons, 0.9).unwrap();
        assert_eq!(index.excluded_persons, vec![PersonId::new("smith")]);
        assert_eq!(index.pattern_count(), 0);
    }

    #[test]
    fn duplicate_surface_after_thresholding_is_rejected() {
        let persons = vec![
            person("a", &[("George Michael", 0.95, AliasKind::FullName)]),
            person(
                "b",
                &[
                    ("Billy Bragg", 0.97, AliasKind::FullName),
                    ("George Michael", 0.92, AliasKind::FullName),
                ],
            ),
        ];
        let index = build_alias_index(&persons, 0.9).unwrap();
        assert!(index
            .rejected
            .iter()
            .any(|r| r.surface == "george michael"
                && matches!(r.reason, RejectReason::AmbiguousAcrossPersons(_))));
        // Person a lost its only full name and is excluded; b keeps the other.
        assert_eq!(index.excluded_persons, vec![PersonId::new("a")]);
        assert!(index.lookup("Billy Bragg").is_some());
    }

    #[test]
    fn affix_must_belong_to_a_full_name() {
        let persons = vec![person(
            "h",
            &[
                ("Whitney Houston", 0.99, AliasKind::FullName),
                ("Whitney", 0.95, AliasKind::Prefix),
                ("Nippy", 0.95, AliasKind::Suffix),
            ],
        )];
        let index = build_alias_index(&persons, 0.9).unwrap();
        assert_eq!(
            index.lookup("whitney").map(|(_, k)| k),
            Some(AliasKind::Prefix)
        );
        assert!(index
            .rejected
            .iter()
            .any(|r| r.surface == "Nippy" && r.reason == RejectReason::NotAffixOfFullName));
    }

    #[test]
    fn invalid_threshold_rejected() {
        assert!(matches!(
            build_alias_index(&[], 0.0),
            Err(CorpusError::InvalidThreshold(_))
        ));
        assert!(matches!(
            build_alias_index(&[], 1.5),
            Err(CorpusError::InvalidThreshold(_))
        ));
    }

    #[test]
    fn invalid_share_is_an_error() {
        let persons = vec![person("x", &[("Some Name", 1.5, AliasKind::FullName)])];
        assert!(matches!(
            build_alias_index(&persons, 0.9),
            Err(CorpusError::InvalidShare { .. })
        ));
    }
}
