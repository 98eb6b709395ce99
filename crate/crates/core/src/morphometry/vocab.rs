//! Anatomy vocabulary and name search.
//!
//! File format: UTF-8, one entry per line, `id<TAB>name<TAB>syn1,syn2`.
//! Blank lines and `#` comments are skipped; a `# version: <v>` comment
//! records the table version.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../data/anatomy_vocabulary.tsv");

/// Maximum number of matches returned by [`search_anatomy_names`].
pub const MAX_RESULTS: usize = 10;
/// Largest edit distance accepted as a fuzzy match.
pub const MAX_FUZZY_DISTANCE: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnatomyEntry {
    pub id: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    pub version: Option<String>,
    pub entries: Vec<AnatomyEntry>,
}

impl Vocabulary {
    pub fn parse(text: &str) -> Result<Self> {
        let mut vocab = Vocabulary::default();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    vocab.version = Some(v.trim().to_string());
                }
                continue;
            }
            let mut fields = line.split('\t');
            let id = fields
                .next()
                .and_then(|f| f.trim().parse::<u32>().ok())
                .ok_or_else(|| Error::Vocabulary { line: line_no, message: "bad id".into() })?;
            let name = fields
                .next()
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::Vocabulary { line: line_no, message: "missing name".into() })?
                .to_string();
            let synonyms = fields
                .next()
                .map(|s| {
                    s.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                })
                .unwrap_or_default();
            if fields.next().is_some() {
                return Err(Error::Vocabulary { line: line_no, message: "too many fields".into() });
            }
            if vocab.entries.iter().any(|e| e.id == id) {
                return Err(Error::Vocabulary { line: line_no, message: format!("duplicate id {id}") });
            }
            vocab.entries.push(AnatomyEntry { id, name, synonyms });
        }
        Ok(vocab)
    }

    /// The table bundled with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled vocabulary is well formed")
    }

    pub fn get(&self, id: u32) -> Option<&AnatomyEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnatomyMatch {
    pub name: String,
    pub id: u32,
    /// 0 exact, 1 prefix, 2 substring, 3 fuzzy.
    pub rank: u8,
}

/// Match tier of `query` against one term (both already lowercased).
pub fn rank_term(query: &str, term: &str) -> Option<u8> {
    if term == query {
        Some(0)
    } else if term.starts_with(query) {
        Some(1)
    } else if term.contains(query) {
        Some(2)
    } else if strsim::levenshtein(query, term) <= MAX_FUZZY_DISTANCE {
        Some(3)
    } else {
        None
    }
}

/// Ranks vocabulary entries against `query`, case-insensitively, over each
/// entry's name and synonyms. Ordered by tier then name; at most
/// [`MAX_RESULTS`] entries.
pub fn search_anatomy_names(query: &str, entries: &[AnatomyEntry]) -> Result<Vec<AnatomyMatch>> {
    let q = query.trim().to_lowercase();
    if q.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let mut matches: Vec<AnatomyMatch> = entries
        .iter()
        .filter_map(|e| {
            std::iter::once(&e.name)
                .chain(&e.synonyms)
                .filter_map(|t| rank_term(&q, &t.to_lowercase()))
                .min()
                .map(|rank| AnatomyMatch { name: e.name.clone(), id: e.id, rank })
        })
        .collect();
    matches.sort_by(|a, b| a.rank.cmp(&b.rank).then_with(|| a.name.cmp(&b.name)));
    matches.truncate(MAX_RESULTS);
    Ok(matches)
}

/// The `k` names closest to `query`: search tier first, then edit distance,
/// then alphabetical. Always returns `min(k, names.len())` names.
pub fn closest_names<'a>(query: &str, names: impl IntoIterator<Item = &'a str>, k: usize) -> Vec<String> {
    let q = query.trim().to_lowercase();
    let mut scored: Vec<(u8, usize, &str)> = names
        .into_iter()
        .map(|n| {
            let lower = n.to_lowercase();
            let tier = if q.is_empty() { None } else { rank_term(&q, &lower) };
            (tier.unwrap_or(4), strsim::levenshtein(&q, &lower), n)
        })
        .collect();
    scored.sort();
    scored.into_iter().take(k).map(|(_, _, n)| n.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vec<AnatomyEntry> {
        Vocabulary::parse("1\tliver\n2\taorta\taortic arch\n3\tkidney_left\tleft kidney\n4\tkidney_right\n")
            .unwrap()
            .entries
    }

    #[test]
    fn exact_first() {
        let m = search_anatomy_names("LIVER", &vocab()).unwrap();
        assert_eq!(m[0], AnatomyMatch { name: "liver".into(), id: 1, rank: 0 });
    }

    #[test]
    fn prefix_rank() {
        let m = search_anatomy_names("aort", &vocab()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].name.as_str(), m[0].rank), ("aorta", 1));
    }

    #[test]
    fn substring_ties_alphabetical() {
        let m = search_anatomy_names("kidney", &vocab()).unwrap();
        let names: Vec<_> = m.iter().map(|m| (m.name.as_str(), m.rank)).collect();
        assert_eq!(names, [("kidney_left", 1), ("kidney_right", 1)]);
        let m = search_anatomy_names("left", &vocab()).unwrap();
        assert_eq!((m[0].name.as_str(), m[0].rank), ("kidney_left", 1));
    }

    #[test]
    fn fuzzy_and_miss() {
        let m = search_anatomy_names("livr", &vocab()).unwrap();
        assert_eq!((m[0].name.as_str(), m[0].rank), ("liver", 3));
        assert!(search_anatomy_names("zzzz", &vocab()).unwrap().is_empty());
        assert_eq!(search_anatomy_names("  ", &vocab()).unwrap_err(), Error::EmptyQuery);
    }

    #[test]
    fn capped_at_ten() {
        let entries: Vec<_> = (0..20)
            .map(|n| AnatomyEntry { id: n, name: format!("rib_{n:02}"), synonyms: vec![] })
            .collect();
        let m = search_anatomy_names("rib", &entries).unwrap();
        assert_eq!(m.len(), 10);
        assert_eq!(m[0].name, "rib_00");
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = Vocabulary::parse("# version: 3\n1\tliver\nx\tspleen\n").unwrap_err();
        assert_eq!(err, Error::Vocabulary { line: 3, message: "bad id".into() });
        let v = Vocabulary::parse("# version: 3\n1\tliver\n").unwrap();
        assert_eq!(v.version.as_deref(), Some("3"));
    }

    #[test]
    fn builtin_parses() {
        let v = Vocabulary::builtin();
        assert!(v.version.is_some());
        assert!(v.entries.iter().any(|e| e.name == "liver"));
        assert!(v.entries.iter().any(|e| e.name == "aorta"));
    }

    #[test]
    fn closest_names_for_typo() {
        let names = ["view_slice", "view_ortho", "view_mip", "load_data", "view_montage"];
        let got = closest_names("view_slcie", names, 3);
        assert_eq!(got[0], "view_slice");
        assert_eq!(got.len(), 3);
    }
}
