//! Ranked `(docid, score)` lists and the ordering rule every stage shares:
//! score descending, then docid ascending.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// Which retriever produced a [`ScoredList`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    #[cfg_attr(feature = "serde", serde(rename = "bm25"))]
    Bm25,
    #[cfg_attr(feature = "serde", serde(rename = "tfidf"))]
    TfIdf,
    #[cfg_attr(feature = "serde", serde(rename = "st_codebase"))]
    StCodebase,
    #[cfg_attr(feature = "serde", serde(rename = "st_history"))]
    StHistory,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bm25 => "bm25",
            Method::TfIdf => "tfidf",
            Method::StCodebase => "st_codebase",
            Method::StHistory => "st_history",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredDoc {
    pub docid: String,
    pub score: f64,
}

/// Compares two `(docid, score)` pairs under the shared ranking rule.
pub fn rank_order(a_id: &str, a_score: f64, b_id: &str, b_score: f64) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_id.cmp(b_id))
}

/// A ranked list. Entries are sorted by score descending with ties broken by
/// docid ascending, and docids are unique.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredList {
    pub method: Method,
    entries: Vec<ScoredDoc>,
}

impl ScoredList {
    pub fn empty(method: Method) -> Self {
        ScoredList {
            method,
            entries: Vec::new(),
        }
    }

    /// Ranks unique `(docid, score)` pairs. When a docid repeats, its highest
    /// score is kept.
    pub fn rank<I, S>(method: Method, scores: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut best: BTreeMap<String, f64> = BTreeMap::new();
        for (id, score) in scores {
            let id = id.into();
            match best.get_mut(&id) {
                Some(s) if score.total_cmp(s).is_gt() => *s = score,
                Some(_) => {}
                None => {
                    best.insert(id, score);
                }
            }
        }
        let mut entries: Vec<ScoredDoc> = best
            .into_iter()
            .map(|(docid, score)| ScoredDoc { docid, score })
            .collect();
        entries.sort_by(|a, b| rank_order(&a.docid, a.score, &b.docid, b.score));
        ScoredList { method, entries }
    }

    /// Keeps only the first `k` entries.
    pub fn truncate(&mut self, k: usize) {
        self.entries.truncate(k);
    }

    pub fn entries(&self) -> &[ScoredDoc] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn docids(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|e| e.docid.as_str())
    }

    pub fn score_of(&self, docid: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.docid == docid)
            .map(|e| e.score)
    }

    /// Replaces every score with `f(score)` without reordering. Used by
    /// monotone rescalings whose output order must match the input order.
    pub(crate) fn map_scores_in_place(&mut self, mut f: impl FnMut(f64) -> f64) {
        for e in &mut self.entries {
            e.score = f(e.score);
        }
    }
}
