//! Inverted index over a repository snapshot with Okapi BM25 and TF-IDF
//! cosine retrieval.
//!
//! Both retrievers score only documents sharing at least one query term; a
//! document with no overlap is absent from the result rather than present
//! with a zero score.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::RepoSnapshot;
use crate::ranking::{Method, ScoredList};
use crate::textproc::{tokenize, TokenizerConfig};
use crate::ArgumentError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SparseError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error(transparent)]
    Argument(#[from] ArgumentError),
    #[error("inconsistent index: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Term statistics for a fixed document collection.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    config: TokenizerConfig,
    doc_ids: Vec<String>,
    postings: BTreeMap<String, Vec<Posting>>,
    doc_len: Vec<u32>,
    avgdl: f64,
    df: BTreeMap<String, u32>,
    tfidf_norms: Vec<f64>,
}

/// BM25 free parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self, ArgumentError> {
        let p = Bm25Params { k1, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ArgumentError> {
        if !(self.k1 >= 0.0 && self.k1.is_finite()) {
            return Err(ArgumentError::new(
                "bm25 k1 must be a finite non-negative number",
            ));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(ArgumentError::new("bm25 b must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// BM25 inverse document frequency, `ln(1 + (N - df + 0.5) / (df + 0.5))`.
/// Strictly positive for `df <= N`.
pub fn bm25_idf(n_docs: usize, df: u32) -> f64 {
    let n = n_docs as f64;
    let df = f64::from(df);
    libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
}

/// TF-IDF inverse document frequency, `1 + ln(N / df)`.
pub fn tfidf_idf(n_docs: usize, df: u32) -> f64 {
    1.0 + libm::log(n_docs as f64 / f64::from(df))
}

/// Sublinear term-frequency weight, `1 + ln tf`.
pub fn tfidf_tf(tf: u32) -> f64 {
    1.0 + libm::log(f64::from(tf))
}

/// Indexes every file of a snapshot.
pub fn build_index(
    snapshot: &RepoSnapshot,
    config: &TokenizerConfig,
) -> Result<InvertedIndex, SparseError> {
    InvertedIndex::from_documents(
        config,
        snapshot
            .files()
            .iter()
            .map(|(p, t)| (p.as_str(), t.as_str())),
    )
}

impl InvertedIndex {
    /// Indexes `(docid, text)` pairs in the given order. Docids must be unique.
    pub fn from_documents<'a, I>(config: &TokenizerConfig, docs: I) -> Result<Self, SparseError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        config.validate()?;
        let mut doc_ids = Vec::new();
        let mut doc_len = Vec::new();
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        for (ordinal, (id, text)) in docs.into_iter().enumerate() {
            let ordinal = u32::try_from(ordinal)
                .map_err(|_| SparseError::Inconsistent(String::from("too many documents")))?;
            let tokens = tokenize(text, config);
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for t in tokens.iter() {
                *counts.entry(t.clone()).or_insert(0) += 1;
            }
            doc_len.push(tokens.len() as u32);
            doc_ids.push(String::from(id));
            for (term, tf) in counts {
                postings
                    .entry(term)
                    .or_default()
                    .push(Posting { doc: ordinal, tf });
            }
        }
        if doc_ids.is_empty() {
            return Err(SparseError::EmptyCorpus);
        }
        Self::from_parts(config.clone(), doc_ids, postings, doc_len)
    }

    /// Reassembles an index from stored parts, recomputing and checking the
    /// derived statistics.
    pub fn from_parts(
        config: TokenizerConfig,
        doc_ids: Vec<String>,
        postings: BTreeMap<String, Vec<Posting>>,
        doc_len: Vec<u32>,
    ) -> Result<Self, SparseError> {
        config.validate()?;
        let n = doc_ids.len();
        if n == 0 {
            return Err(SparseError::EmptyCorpus);
        }
        if doc_len.len() != n {
            return Err(SparseError::Inconsistent(String::from(
                "doc_len length differs from document count",
            )));
        }
        let mut sorted_ids: Vec<&String> = doc_ids.iter().collect();
        sorted_ids.sort();
        if sorted_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(SparseError::Inconsistent(String::from("duplicate docid")));
        }

        let mut df = BTreeMap::new();
        let mut tf_totals = alloc::vec![0u64; n];
        for (term, list) in &postings {
            if list.is_empty() {
                return Err(SparseError::Inconsistent(alloc::format!(
                    "empty posting list for {term}"
                )));
            }
            for w in list.windows(2) {
                if w[0].doc >= w[1].doc {
                    return Err(SparseError::Inconsistent(alloc::format!(
                        "postings for {term} not strictly sorted"
                    )));
                }
            }
            for p in list {
                let d = p.doc as usize;
                if d >= n || p.tf == 0 {
                    return Err(SparseError::Inconsistent(alloc::format!(
                        "bad posting for {term}"
                    )));
                }
                tf_totals[d] += u64::from(p.tf);
            }
            df.insert(term.clone(), list.len() as u32);
        }
        if tf_totals
            .iter()
            .zip(&doc_len)
            .any(|(&total, &len)| total != u64::from(len))
        {
            return Err(SparseError::Inconsistent(String::from(
                "doc_len disagrees with posting term frequencies",
            )));
        }

        let total: u64 = doc_len.iter().map(|&l| u64::from(l)).sum();
        let avgdl = total as f64 / n as f64;

        let mut sq = alloc::vec![0.0f64; n];
        for (term, list) in &postings {
            let idf = tfidf_idf(n, df[term]);
            for p in list {
                let w = tfidf_tf(p.tf) * idf;
                sq[p.doc as usize] += w * w;
            }
        }
        let tfidf_norms = sq.into_iter().map(libm::sqrt).collect();

        Ok(InvertedIndex {
            config,
            doc_ids,
            postings,
            doc_len,
            avgdl,
            df,
            tfidf_norms,
        })
    }

    pub fn config(&self) -> &TokenizerConfig {
        &self.config
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn postings(&self) -> &BTreeMap<String, Vec<Posting>> {
        &self.postings
    }

    pub fn doc_len(&self) -> &[u32] {
        &self.doc_len
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn df(&self, term: &str) -> u32 {
        self.df.get(term).copied().unwrap_or(0)
    }

    pub fn document_frequencies(&self) -> &BTreeMap<String, u32> {
        &self.df
    }

    /// Query terms with their multiplicities, tokenized under the index's
    /// query configuration.
    fn query_terms(&self, query: &str) -> BTreeMap<String, u32> {
        let mut counts = BTreeMap::new();
        for t in tokenize(query, &self.config.for_queries()) {
            *counts.entry(t).or_insert(0) += 1;
        }
        counts
    }
}

fn check_k(k: usize) -> Result<(), SparseError> {
    if k < 1 {
        return Err(ArgumentError::new("k must be at least 1").into());
    }
    Ok(())
}

/// Okapi BM25 over the index. A query term repeated `n` times contributes `n`
/// times its per-term score.
pub fn bm25_retrieve(
    index: &InvertedIndex,
    query: &str,
    k: usize,
    params: &Bm25Params,
) -> Result<ScoredList, SparseError> {
    check_k(k)?;
    params.validate()?;
    let n = index.n_docs();
    let mut scores = alloc::vec![0.0f64; n];
    let mut touched = alloc::vec![false; n];
    for (term, qtf) in index.query_terms(query) {
        let Some(list) = index.postings.get(&term) else {
            continue;
        };
        let idf = bm25_idf(n, list.len() as u32);
        for p in list {
            let d = p.doc as usize;
            let tf = f64::from(p.tf);
            let len_ratio = if index.avgdl > 0.0 {
                f64::from(index.doc_len[d]) / index.avgdl
            } else {
                0.0
            };
            let denom = tf + params.k1 * (1.0 - params.b + params.b * len_ratio);
            scores[d] += f64::from(qtf) * idf * tf * (params.k1 + 1.0) / denom;
            touched[d] = true;
        }
    }
    Ok(collect_top(index, Method::Bm25, &scores, &touched, k))
}

/// Cosine similarity between `(1 + ln tf) * (1 + ln(N / df))` weighted
/// vectors. Query terms outside the index vocabulary carry no weight.
pub fn tfidf_retrieve(
    index: &InvertedIndex,
    query: &str,
    k: usize,
) -> Result<ScoredList, SparseError> {
    check_k(k)?;
    let n = index.n_docs();
    let mut dots = alloc::vec![0.0f64; n];
    let mut touched = alloc::vec![false; n];
    let mut q_sq = 0.0;
    for (term, qtf) in index.query_terms(query) {
        let Some(list) = index.postings.get(&term) else {
            continue;
        };
        let idf = tfidf_idf(n, list.len() as u32);
        let wq = tfidf_tf(qtf) * idf;
        q_sq += wq * wq;
        for p in list {
            let d = p.doc as usize;
            dots[d] += wq * tfidf_tf(p.tf) * idf;
            touched[d] = true;
        }
    }
    let q_norm = libm::sqrt(q_sq);
    if q_norm > 0.0 {
        for (d, dot) in dots.iter_mut().enumerate() {
            if touched[d] {
                *dot /= q_norm * index.tfidf_norms[d];
            }
        }
    }
    Ok(collect_top(index, Method::TfIdf, &dots, &touched, k))
}

fn collect_top(
    index: &InvertedIndex,
    method: Method,
    scores: &[f64],
    touched: &[bool],
    k: usize,
) -> ScoredList {
    let mut list = ScoredList::rank(
        method,
        index
            .doc_ids
            .iter()
            .zip(scores.iter().zip(touched))
            .filter(|(_, (_, &t))| t)
            .map(|(id, (&s, _))| (id.as_str(), s)),
    );
    list.truncate(k);
    list
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn index_of(docs: &[(&str, &str)]) -> InvertedIndex {
        InvertedIndex::from_documents(&TokenizerConfig::default(), docs.iter().copied()).unwrap()
    }

    #[test]
    fn two_doc_statistics() {
        let cfg = TokenizerConfig {
            min_token_len: 1,
            ..TokenizerConfig::default()
        };
        let idx = InvertedIndex::from_documents(&cfg, [("a", "x y"), ("b", "x")]).unwrap();
        assert_eq!(idx.n_docs(), 2);
        assert_eq!(idx.df("x"), 2);
        assert_eq!(idx.df("y"), 1);
        assert_eq!(idx.avgdl(), 1.5);
    }

    #[test]
    fn single_empty_doc() {
        let idx = index_of(&[("empty.py", "")]);
        assert_eq!(idx.n_docs(), 1);
        assert_eq!(idx.doc_len(), &[0]);
        assert_eq!(idx.avgdl(), 0.0);
        let hits = bm25_retrieve(&idx, "anything", 3, &Bm25Params::default()).unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn empty_snapshot_is_error() {
        let snap = RepoSnapshot::new("o/r", "c");
        assert_eq!(
            build_index(&snap, &TokenizerConfig::default()),
            Err(SparseError::EmptyCorpus)
        );
    }

    #[test]
    fn no_overlap_gives_empty_list() {
        let idx = index_of(&[("a", "alpha beta"), ("b", "gamma")]);
        assert!(bm25_retrieve(&idx, "zeta", 5, &Bm25Params::default())
            .unwrap()
            .is_empty());
        assert!(tfidf_retrieve(&idx, "zeta", 5).unwrap().is_empty());
    }

    #[test]
    fn apple_ranking() {
        let idx = index_of(&[
            ("d1", "apple banana"),
            ("d2", "apple apple"),
            ("d3", "cherry"),
        ]);
        let hits = bm25_retrieve(&idx, "apple", 3, &Bm25Params::default()).unwrap();
        let ids: Vec<&str> = hits.docids().collect();
        assert_eq!(ids, vec!["d2", "d1"]);

        // Hand evaluation: N=3, df=2, avgdl=5/3, every doc_len/avgdl = 1.2
        // except d3 (0.6). idf = ln(1 + 1.5/2.5) = ln 1.6.
        let idf = libm::log(1.6);
        let norm = 1.0 - 0.75 + 0.75 * 1.2;
        let d2 = idf * 2.0 * 2.2 / (2.0 + 1.2 * norm);
        let d1 = idf * 1.0 * 2.2 / (1.0 + 1.2 * norm);
        assert!((hits.entries()[0].score - d2).abs() < 1e-12);
        assert!((hits.entries()[1].score - d1).abs() < 1e-12);
    }

    #[test]
    fn k_validation() {
        let idx = index_of(&[("a", "alpha")]);
        assert!(matches!(
            bm25_retrieve(&idx, "alpha", 0, &Bm25Params::default()),
            Err(SparseError::Argument(_))
        ));
        assert!(matches!(
            tfidf_retrieve(&idx, "alpha", 0),
            Err(SparseError::Argument(_))
        ));
        assert!(Bm25Params::new(-1.0, 0.5).is_err());
        assert!(Bm25Params::new(1.0, 1.5).is_err());
    }

    #[test]
    fn tfidf_identical_single_doc() {
        let text = "resolve the queryset ordering bug in admin";
        let idx = index_of(&[("only.py", text)]);
        let hits = tfidf_retrieve(&idx, text, 1).unwrap();
        assert_eq!(hits.len(), 1);
        assert!((hits.entries()[0].score - 1.0).abs() < 1e-9);
    }

    #[test]
    fn from_parts_rejects_inconsistent_stats() {
        let idx = index_of(&[("a", "xx yy"), ("b", "xx")]);
        let mut bad_len = idx.doc_len().to_vec();
        bad_len[0] = 7;
        assert!(matches!(
            InvertedIndex::from_parts(
                idx.config().clone(),
                idx.doc_ids().to_vec(),
                idx.postings().clone(),
                bad_len,
            ),
            Err(SparseError::Inconsistent(_))
        ));
        let rebuilt = InvertedIndex::from_parts(
            idx.config().clone(),
            idx.doc_ids().to_vec(),
            idx.postings().clone(),
            idx.doc_len().to_vec(),
        )
        .unwrap();
        assert_eq!(rebuilt, idx);
    }
}
