//! Min-max normalization of each retrieval stream and alpha-weighted hybrid
//! re-ranking of the union of their candidates.
//!
//! A stream's scores are rescaled as `(s - min) / (max - min + eps)` using
//! that stream's own extremes for the current query only. The hybrid score of
//! a file is `alpha * st + (1 - alpha) * bm25` over the normalized scores,
//! where a file absent from a stream scores 0 in it.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ranking::{rank_order, ScoredList};
use crate::ArgumentError;

pub const DEFAULT_EPSILON: f64 = 1e-8;

/// What a single-entry list normalizes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SingletonMode {
    /// `min == max`, so the formula yields 0.
    #[default]
    Zero,
    /// Ablation: a lone candidate maps to 1.
    One,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FusionConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub k: usize,
    pub singleton: SingletonMode,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            alpha: 0.5,
            epsilon: DEFAULT_EPSILON,
            k: 10,
            singleton: SingletonMode::Zero,
        }
    }
}

impl FusionConfig {
    pub fn new(alpha: f64, k: usize) -> Result<Self, ArgumentError> {
        let c = FusionConfig {
            alpha,
            k,
            ..FusionConfig::default()
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self, ArgumentError> {
        let c = FusionConfig { alpha, ..*self };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ArgumentError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ArgumentError::new("alpha must lie in [0, 1]"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(ArgumentError::new("epsilon must be positive"));
        }
        if self.k < 1 {
            return Err(ArgumentError::new("k must be at least 1"));
        }
        Ok(())
    }
}

/// A fused candidate with both normalized stream scores and its hybrid score.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HybridCandidate {
    pub docid: String,
    pub s_st_norm: f64,
    pub s_bm25_norm: f64,
    pub h: f64,
}

/// Rescales scores to `[0, 1)` using the list's own extremes; entry order is
/// unchanged.
pub fn minmax_normalize(list: &ScoredList, epsilon: f64) -> ScoredList {
    normalize_with(list, epsilon, SingletonMode::Zero)
}

pub fn normalize_with(list: &ScoredList, epsilon: f64, singleton: SingletonMode) -> ScoredList {
    let mut out = list.clone();
    if list.is_empty() {
        return out;
    }
    if list.len() == 1 && singleton == SingletonMode::One {
        out.map_scores_in_place(|_| 1.0);
        return out;
    }
    let (min, max) = list
        .entries()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
            (lo.min(e.score), hi.max(e.score))
        });
    let denom = max - min + epsilon;
    out.map_scores_in_place(|s| (s - min) / denom);
    out
}

/// Weighted combination, kept inside the interval spanned by its inputs.
fn convex(alpha: f64, st: f64, bm25: f64) -> f64 {
    let h = alpha * st + (1.0 - alpha) * bm25;
    h.clamp(st.min(bm25), st.max(bm25))
}

/// Normalizes both raw streams and ranks the union of their docids by hybrid
/// score, ties broken by docid ascending.
pub fn fuse(
    st_list: &ScoredList,
    bm25_list: &ScoredList,
    config: &FusionConfig,
) -> Vec<HybridCandidate> {
    let st = normalize_with(st_list, config.epsilon, config.singleton);
    let bm = normalize_with(bm25_list, config.epsilon, config.singleton);
    let mut union: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for e in st.entries() {
        union.entry(&e.docid).or_insert((0.0, 0.0)).0 = e.score;
    }
    for e in bm.entries() {
        union.entry(&e.docid).or_insert((0.0, 0.0)).1 = e.score;
    }
    let mut out: Vec<HybridCandidate> = union
        .into_iter()
        .map(|(docid, (s_st, s_bm))| HybridCandidate {
            docid: String::from(docid),
            s_st_norm: s_st,
            s_bm25_norm: s_bm,
            h: convex(config.alpha, s_st, s_bm),
        })
        .collect();
    out.sort_by(|a, b| rank_order(&a.docid, a.h, &b.docid, b.h));
    out
}

/// The first `min(k, len)` candidates.
pub fn top_k(
    candidates: &[HybridCandidate],
    k: usize,
) -> Result<&[HybridCandidate], ArgumentError> {
    if k < 1 {
        return Err(ArgumentError::new("k must be at least 1"));
    }
    Ok(&candidates[..k.min(candidates.len())])
}
