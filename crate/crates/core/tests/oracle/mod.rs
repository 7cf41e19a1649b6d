//! Brute-force reference implementations written straight from the scoring
//! formulas, with no indexes and no shared code paths.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

/// A document as a docid and its already-tokenized text.
pub type Doc = (String, Vec<String>);

pub fn count(tokens: &[String], term: &str) -> usize {
    tokens.iter().filter(|t| *t == term).count()
}

pub fn df(docs: &[Doc], term: &str) -> usize {
    docs.iter()
        .filter(|(_, toks)| toks.iter().any(|t| t == term))
        .count()
}

/// Document frequency of every term, counted one document at a time.
pub fn df_table(docs: &[Doc]) -> BTreeMap<String, usize> {
    let mut table = BTreeMap::new();
    for (_, toks) in docs {
        let distinct: BTreeSet<&String> = toks.iter().collect();
        for t in distinct {
            *table.entry(t.clone()).or_insert(0) += 1;
        }
    }
    table
}

/// Sort by score descending, then docid ascending.
pub fn ranked(mut scores: Vec<(String, f64)>) -> Vec<(String, f64)> {
    scores.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scores
}

/// Docs sharing at least one query term, scored by Okapi BM25.
pub fn bm25(docs: &[Doc], query: &[String], k1: f64, b: f64) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|(_, t)| t.len() as f64).sum::<f64>() / n;
    let dfs = df_table(docs);
    let mut out = Vec::new();
    for (id, toks) in docs {
        if !query.iter().any(|q| toks.contains(q)) {
            continue;
        }
        let mut s = 0.0;
        // Every query occurrence contributes, so repeated terms weigh more.
        for q in query {
            let tf = count(toks, q) as f64;
            if tf == 0.0 {
                continue;
            }
            let d = dfs[q] as f64;
            let idf = (1.0 + (n - d + 0.5) / (d + 0.5)).ln();
            let norm = if avgdl > 0.0 {
                toks.len() as f64 / avgdl
            } else {
                0.0
            };
            s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
        }
        out.push((id.clone(), s));
    }
    ranked(out)
}

fn tfidf_vector(
    n_docs: usize,
    dfs: &BTreeMap<String, usize>,
    tokens: &[String],
    vocab_only: bool,
) -> BTreeMap<String, f64> {
    let n = n_docs as f64;
    let mut v = BTreeMap::new();
    let distinct: BTreeSet<&String> = tokens.iter().collect();
    for t in distinct {
        let d = dfs.get(t).copied().unwrap_or(0) as f64;
        if d == 0.0 {
            assert!(vocab_only, "document term missing from corpus");
            continue;
        }
        let w = (1.0 + (count(tokens, t) as f64).ln()) * (1.0 + (n / d).ln());
        v.insert(t.clone(), w);
    }
    v
}

/// Cosine between sublinear-tf, `1 + ln(N/df)` weighted vectors.
pub fn tfidf(docs: &[Doc], query: &[String]) -> Vec<(String, f64)> {
    let dfs = df_table(docs);
    let qv = tfidf_vector(docs.len(), &dfs, query, true);
    let qn = qv.values().map(|w| w * w).sum::<f64>().sqrt();
    let mut out = Vec::new();
    for (id, toks) in docs {
        if !qv.keys().any(|q| toks.contains(q)) {
            continue;
        }
        let dv = tfidf_vector(docs.len(), &dfs, toks, false);
        let dn = dv.values().map(|w| w * w).sum::<f64>().sqrt();
        let dot: f64 = qv
            .iter()
            .map(|(t, w)| w * dv.get(t).copied().unwrap_or(0.0))
            .sum();
        out.push((id.clone(), dot / (qn * dn)));
    }
    ranked(out)
}

pub fn minmax(scores: &[(String, f64)], eps: f64) -> Vec<(String, f64)> {
    if scores.is_empty() {
        return Vec::new();
    }
    let lo = scores.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let hi = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .map(|(d, s)| (d.clone(), (s - lo) / (hi - lo + eps)))
        .collect()
}

/// Hybrid ranking over the union of both streams; absent means 0.
pub fn fuse(
    st: &[(String, f64)],
    bm: &[(String, f64)],
    alpha: f64,
    eps: f64,
) -> Vec<(String, f64)> {
    let st = minmax(st, eps);
    let bm = minmax(bm, eps);
    let get = |l: &[(String, f64)], d: &str| l.iter().find(|x| x.0 == d).map_or(0.0, |x| x.1);
    let ids: BTreeSet<String> = st.iter().chain(&bm).map(|x| x.0.clone()).collect();
    ranked(
        ids.into_iter()
            .map(|d| {
                let h = alpha * get(&st, &d) + (1.0 - alpha) * get(&bm, &d);
                (d, h)
            })
            .collect(),
    )
}

pub fn recall(ranking: &[String], gold: &BTreeSet<String>, k: usize) -> f64 {
    let mut hits = 0;
    for g in gold {
        if ranking.iter().take(k).any(|r| r == g) {
            hits += 1;
        }
    }
    hits as f64 / gold.len() as f64
}

pub fn cosine_unit(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Character windows of `window` starting every `window - overlap`.
pub fn char_windows(text: &str, window: usize, overlap: usize) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let end = (start + window).min(chars.len());
        out.push(chars[start..end].iter().collect());
        if end == chars.len() {
            break;
        }
        start += window - overlap;
    }
    out
}
