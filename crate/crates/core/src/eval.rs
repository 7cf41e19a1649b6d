//! Recall@k, per-method evaluation, the alpha-by-k fusion sweep, patch-size
//! statistics and figure-level sanity flags.
//!
//! Recall is per-instance set recall `|top-k ∩ gold| / |gold|`, macro-averaged
//! over instances. Averages are always reduced in instance-id order so the
//! result does not depend on the order instances were evaluated in.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::InstanceExample;
use crate::fusion::{fuse, FusionConfig};
use crate::ranking::ScoredList;
use crate::ArgumentError;

/// Fraction of instances that may be skipped before an evaluation is fatal.
pub const MAX_SKIP_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Argument(#[from] ArgumentError),
    #[error("{skipped} of {total} instances skipped, above the {max_pct}% budget")]
    TooManySkips {
        skipped: usize,
        total: usize,
        max_pct: u32,
    },
    #[error("retrieval failed for {instance_id}: {message}")]
    Retrieval {
        instance_id: String,
        message: String,
    },
    #[error("no instances to evaluate")]
    NoInstances,
}

/// `|first-k(retrieved) ∩ gold| / |gold|`.
pub fn recall_at_k<S: AsRef<str>>(
    retrieved: &[S],
    gold: &BTreeSet<String>,
    k: usize,
) -> Result<f64, ArgumentError> {
    Ok(hits_at_k(retrieved, gold, k)? as f64 / gold.len() as f64)
}

/// Whether every gold file is within the first `k` retrieved.
pub fn complete_hit_at_k<S: AsRef<str>>(
    retrieved: &[S],
    gold: &BTreeSet<String>,
    k: usize,
) -> Result<bool, ArgumentError> {
    Ok(hits_at_k(retrieved, gold, k)? == gold.len())
}

fn hits_at_k<S: AsRef<str>>(
    retrieved: &[S],
    gold: &BTreeSet<String>,
    k: usize,
) -> Result<usize, ArgumentError> {
    if gold.is_empty() {
        return Err(ArgumentError::new("gold set must be non-empty"));
    }
    if k < 1 {
        return Err(ArgumentError::new("k must be at least 1"));
    }
    let prefix: BTreeSet<&str> = retrieved.iter().take(k).map(AsRef::as_ref).collect();
    Ok(prefix.iter().filter(|d| gold.contains(**d)).count())
}

/// One instance scored at one cutoff.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalInstanceResult {
    pub instance_id: String,
    pub method: String,
    pub k: usize,
    pub retrieved: Vec<String>,
    pub gold: BTreeSet<String>,
    pub recall: f64,
    pub complete_hit: bool,
}

/// Why a retriever produced no ranking for an instance.
#[derive(Debug, Clone, PartialEq)]
pub enum RetrievalFailure {
    /// Missing inputs (e.g. no snapshot); the instance is skipped.
    Unresolvable(String),
    /// Anything else aborts the evaluation.
    Fatal(String),
}

/// A named retrieval procedure returning docids in rank order.
pub trait Retriever {
    fn name(&self) -> &str;

    /// Returns at least the first `depth` docids when that many exist.
    fn retrieve(
        &self,
        instance: &InstanceExample,
        depth: usize,
    ) -> Result<Vec<String>, RetrievalFailure>;
}

/// What happened to one instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<T> {
    Done {
        instance_id: String,
        gold: BTreeSet<String>,
        value: T,
    },
    Skipped {
        instance_id: String,
        reason: String,
    },
}

impl<T> Outcome<T> {
    pub fn instance_id(&self) -> &str {
        match self {
            Outcome::Done { instance_id, .. } | Outcome::Skipped { instance_id, .. } => instance_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkippedInstance {
    pub instance_id: String,
    pub reason: String,
}

/// Macro recall per cutoff for one method.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MethodReport {
    pub method: String,
    pub ks: Vec<usize>,
    pub recall: Vec<f64>,
    pub complete_hit_rate: Vec<f64>,
    pub instance_count: usize,
    pub per_instance: Vec<EvalInstanceResult>,
    pub skipped: Vec<SkippedInstance>,
}

fn validate_ks(ks: &[usize]) -> Result<(), ArgumentError> {
    if ks.is_empty() {
        return Err(ArgumentError::new("ks must be non-empty"));
    }
    if ks.contains(&0) {
        return Err(ArgumentError::new("every k must be at least 1"));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ArgumentError::new("ks must be strictly ascending"));
    }
    Ok(())
}

fn validate_alphas(alphas: &[f64]) -> Result<(), ArgumentError> {
    if alphas.is_empty() {
        return Err(ArgumentError::new("alphas must be non-empty"));
    }
    if alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(ArgumentError::new("every alpha must lie in [0, 1]"));
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ArgumentError::new("alphas must be strictly ascending"));
    }
    Ok(())
}

/// Fails when more than [`MAX_SKIP_FRACTION`] of `total` instances were
/// skipped or nothing is left to average.
pub fn check_skip_budget(skipped: usize, total: usize) -> Result<(), EvalError> {
    if total == 0 {
        return Err(EvalError::NoInstances);
    }
    if skipped as f64 > MAX_SKIP_FRACTION * total as f64 {
        return Err(EvalError::TooManySkips {
            skipped,
            total,
            max_pct: (MAX_SKIP_FRACTION * 100.0) as u32,
        });
    }
    if skipped == total {
        return Err(EvalError::NoInstances);
    }
    Ok(())
}

/// A completed instance: id, gold files and the computed value.
pub type Completed<T> = (String, BTreeSet<String>, T);

/// Splits outcomes into completed values (sorted by instance id, stable) and
/// skip records, enforcing the skip budget.
pub fn partition_outcomes<T>(
    outcomes: Vec<Outcome<T>>,
) -> Result<(Vec<Completed<T>>, Vec<SkippedInstance>), EvalError> {
    let total = outcomes.len();
    let mut done = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Done {
                instance_id,
                gold,
                value,
            } => done.push((instance_id, gold, value)),
            Outcome::Skipped {
                instance_id,
                reason,
            } => skipped.push(SkippedInstance {
                instance_id,
                reason,
            }),
        }
    }
    check_skip_budget(skipped.len(), total)?;
    done.sort_by(|a, b| a.0.cmp(&b.0));
    skipped.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    Ok((done, skipped))
}

fn mean_in_order(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Aggregates per-instance rankings into macro recall at every cutoff.
pub fn evaluate_rankings(
    method: &str,
    outcomes: Vec<Outcome<Vec<String>>>,
    ks: &[usize],
) -> Result<MethodReport, EvalError> {
    validate_ks(ks)?;
    let (done, skipped) = partition_outcomes(outcomes)?;
    let mut per_instance = Vec::with_capacity(done.len() * ks.len());
    let mut recall = Vec::with_capacity(ks.len());
    let mut complete = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut rs = Vec::with_capacity(done.len());
        let mut cs = Vec::with_capacity(done.len());
        for (id, gold, ranking) in &done {
            let r = recall_at_k(ranking, gold, k)?;
            let c = complete_hit_at_k(ranking, gold, k)?;
            rs.push(r);
            cs.push(if c { 1.0 } else { 0.0 });
            per_instance.push(EvalInstanceResult {
                instance_id: id.clone(),
                method: String::from(method),
                k,
                retrieved: ranking.iter().take(k).cloned().collect(),
                gold: gold.clone(),
                recall: r,
                complete_hit: c,
            });
        }
        recall.push(mean_in_order(rs.into_iter()));
        complete.push(mean_in_order(cs.into_iter()));
    }
    Ok(MethodReport {
        method: String::from(method),
        ks: ks.to_vec(),
        recall,
        complete_hit_rate: complete,
        instance_count: done.len(),
        per_instance,
        skipped,
    })
}

/// Runs `retriever` over every instance once at the deepest cutoff and
/// reports macro recall at each `k` in `ks`.
pub fn evaluate_method<R: Retriever + ?Sized>(
    instances: &[InstanceExample],
    retriever: &R,
    ks: &[usize],
) -> Result<MethodReport, EvalError> {
    validate_ks(ks)?;
    let depth = *ks.last().expect("validated non-empty");
    let mut outcomes = Vec::with_capacity(instances.len());
    for inst in instances {
        outcomes.push(match retriever.retrieve(inst, depth) {
            Ok(ranking) => Outcome::Done {
                instance_id: String::from(inst.id()),
                gold: inst.gold_files().clone(),
                value: ranking,
            },
            Err(RetrievalFailure::Unresolvable(reason)) => Outcome::Skipped {
                instance_id: String::from(inst.id()),
                reason,
            },
            Err(RetrievalFailure::Fatal(message)) => {
                return Err(EvalError::Retrieval {
                    instance_id: String::from(inst.id()),
                    message,
                })
            }
        });
    }
    evaluate_rankings(retriever.name(), outcomes, ks)
}

/// The two raw streams of one instance, computed once and re-fused per alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceStreams {
    pub st: ScoredList,
    pub bm25: ScoredList,
}

/// Macro recall over an alpha-by-k grid. `recall[i][j]` is the recall at
/// `alphas[i]` and `ks[j]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepGrid {
    pub alphas: Vec<f64>,
    pub ks: Vec<usize>,
    pub recall: Vec<Vec<f64>>,
    pub instance_count: usize,
    pub skipped: Vec<SkippedInstance>,
}

impl SweepGrid {
    pub fn cell(&self, alpha_idx: usize, k_idx: usize) -> f64 {
        self.recall[alpha_idx][k_idx]
    }

    /// Mean over cutoffs of each alpha's row.
    pub fn row_means(&self) -> Vec<f64> {
        self.recall
            .iter()
            .map(|row| mean_in_order(row.iter().copied()))
            .collect()
    }
}

/// Fuses every instance's streams at each alpha and records macro recall of
/// the fused ranking at each cutoff. `base` supplies epsilon and singleton
/// handling; its alpha and k are ignored.
pub fn sweep(
    outcomes: Vec<Outcome<InstanceStreams>>,
    alphas: &[f64],
    ks: &[usize],
    base: &FusionConfig,
) -> Result<SweepGrid, EvalError> {
    validate_alphas(alphas)?;
    validate_ks(ks)?;
    base.validate()?;
    let (done, skipped) = partition_outcomes(outcomes)?;
    let depth = *ks.last().expect("validated non-empty");
    let mut recall = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let cfg = base.with_alpha(alpha)?;
        let mut per_k: Vec<Vec<f64>> = alloc::vec![Vec::with_capacity(done.len()); ks.len()];
        for (_, gold, streams) in &done {
            let fused = fuse(&streams.st, &streams.bm25, &cfg);
            let ranking: Vec<&str> = fused.iter().take(depth).map(|c| c.docid.as_str()).collect();
            for (j, &k) in ks.iter().enumerate() {
                per_k[j].push(recall_at_k(&ranking, gold, k)?);
            }
        }
        recall.push(
            per_k
                .into_iter()
                .map(|v| mean_in_order(v.into_iter()))
                .collect(),
        );
    }
    Ok(SweepGrid {
        alphas: alphas.to_vec(),
        ks: ks.to_vec(),
        recall,
        instance_count: done.len(),
        skipped,
    })
}

/// Count of instances by number of gold files.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatchSizeHistogram {
    pub buckets: BTreeMap<usize, usize>,
    pub total: usize,
}

impl PatchSizeHistogram {
    pub fn single_file_fraction(&self) -> f64 {
        self.buckets.get(&1).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// Largest files-per-patch value observed.
    pub fn max_files(&self) -> usize {
        self.buckets.keys().next_back().copied().unwrap_or(0)
    }
}

pub fn patch_size_stats(
    instances: &[InstanceExample],
) -> Result<PatchSizeHistogram, ArgumentError> {
    if instances.is_empty() {
        return Err(ArgumentError::new("no instances"));
    }
    let mut buckets = BTreeMap::new();
    for inst in instances {
        *buckets.entry(inst.gold_files().len()).or_insert(0) += 1;
    }
    Ok(PatchSizeHistogram {
        buckets,
        total: instances.len(),
    })
}

/// The alpha band in which the mean-over-k recall is expected to peak.
pub const ALPHA_BAND: (f64, f64) = (0.4, 0.6);

/// Inputs to [`qualitative_checks`]: the three baseline curves over the same
/// cutoffs and a sweep grid.
#[derive(Debug, Clone, Copy)]
pub struct QualitativeInput<'a> {
    pub dense: Option<&'a [f64]>,
    pub bm25: Option<&'a [f64]>,
    pub tfidf: Option<&'a [f64]>,
    pub grid: Option<&'a SweepGrid>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QualitativeFlags {
    /// Dense >= BM25 >= TF-IDF at every cutoff.
    pub baseline_ordering: bool,
    /// Every alpha attaining the best mean-over-k recall lies in [0.4, 0.6].
    pub alpha_peak_in_band: bool,
    /// Every baseline curve and grid row is non-decreasing in k.
    pub curves_monotone: bool,
    /// The alphas attaining the best mean-over-k recall.
    pub argmax_alphas: Vec<f64>,
}

/// Ties within this margin count as the same mean recall.
const ARGMAX_TIE: f64 = 1e-12;

pub fn qualitative_checks(input: &QualitativeInput<'_>) -> Result<QualitativeFlags, ArgumentError> {
    let missing = |name: &str| ArgumentError::new(format!("missing {name} curve"));
    let dense = input.dense.ok_or_else(|| missing("dense"))?;
    let bm25 = input.bm25.ok_or_else(|| missing("bm25"))?;
    let tfidf = input.tfidf.ok_or_else(|| missing("tfidf"))?;
    let grid = input.grid.ok_or_else(|| missing("sweep grid"))?;
    if dense.len() != bm25.len() || bm25.len() != tfidf.len() {
        return Err(ArgumentError::new("baseline curves have different lengths"));
    }

    let baseline_ordering = dense
        .iter()
        .zip(bm25)
        .zip(tfidf)
        .all(|((d, b), t)| d >= b && b >= t);

    let means = grid.row_means();
    let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax_alphas: Vec<f64> = grid
        .alphas
        .iter()
        .zip(&means)
        .filter(|(_, &m)| m >= best - ARGMAX_TIE)
        .map(|(&a, _)| a)
        .collect();
    let alpha_peak_in_band = !argmax_alphas.is_empty()
        && argmax_alphas
            .iter()
            .all(|&a| (ALPHA_BAND.0 - 1e-9..=ALPHA_BAND.1 + 1e-9).contains(&a));

    let monotone = |c: &[f64]| c.windows(2).all(|w| w[0] <= w[1]);
    let curves_monotone = monotone(dense)
        && monotone(bm25)
        && monotone(tfidf)
        && grid.recall.iter().all(|row| monotone(row));

    Ok(QualitativeFlags {
        baseline_ordering,
        alpha_peak_in_band,
        curves_monotone,
        argmax_alphas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{IssueRecord, Split};
    use crate::ranking::Method;
    use alloc::vec;

    fn gold(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| String::from(*s)).collect()
    }

    #[test]
    fn recall_examples() {
        assert_eq!(
            recall_at_k(&["a", "b", "c"], &gold(&["a"]), 1).unwrap(),
            1.0
        );
        assert_eq!(
            recall_at_k(&["x", "y"], &gold(&["a", "b"]), 2).unwrap(),
            0.0
        );
        assert_eq!(
            recall_at_k(&["a", "x", "b"], &gold(&["a", "b"]), 2).unwrap(),
            0.5
        );
        assert!(recall_at_k(&["a"], &BTreeSet::new(), 1).is_err());
        assert!(recall_at_k(&["a"], &gold(&["a"]), 0).is_err());
    }

    #[test]
    fn duplicates_in_ranking_count_once() {
        assert_eq!(
            recall_at_k(&["a", "a"], &gold(&["a", "b"]), 2).unwrap(),
            0.5
        );
    }

    fn done(id: &str, g: &[&str], ranking: &[&str]) -> Outcome<Vec<String>> {
        Outcome::Done {
            instance_id: String::from(id),
            gold: gold(g),
            value: ranking.iter().map(|s| String::from(*s)).collect(),
        }
    }

    #[test]
    fn macro_mean_of_two() {
        let report = evaluate_rankings(
            "bm25",
            vec![done("i1", &["a"], &["a"]), done("i2", &["a"], &["x"])],
            &[3],
        )
        .unwrap();
        assert_eq!(report.recall, vec![0.5]);
        assert_eq!(report.per_instance.len(), 2);
    }

    #[test]
    fn duplicated_instance_mean() {
        let outcomes = (0..5)
            .map(|_| done("i", &["a", "b"], &["a", "x"]))
            .collect();
        let report = evaluate_rankings("m", outcomes, &[1, 2]).unwrap();
        assert_eq!(report.recall, vec![0.5, 0.5]);
        assert_eq!(report.complete_hit_rate, vec![0.0, 0.0]);
    }

    #[test]
    fn skip_budget() {
        let mut outcomes: Vec<Outcome<Vec<String>>> = (0..9)
            .map(|i| done(&format!("i{i}"), &["a"], &["a"]))
            .collect();
        outcomes.push(Outcome::Skipped {
            instance_id: String::from("s"),
            reason: String::from("no snapshot"),
        });
        let report = evaluate_rankings("m", outcomes.clone(), &[1]).unwrap();
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.instance_count, 9);
        assert_eq!(report.recall, vec![1.0]);

        outcomes.push(Outcome::Skipped {
            instance_id: String::from("t"),
            reason: String::from("no snapshot"),
        });
        assert!(matches!(
            evaluate_rankings("m", outcomes, &[1]),
            Err(EvalError::TooManySkips {
                skipped: 2,
                total: 11,
                ..
            })
        ));
    }

    #[test]
    fn ks_must_be_ascending() {
        assert!(evaluate_rankings("m", vec![done("i", &["a"], &["a"])], &[3, 2]).is_err());
        assert!(evaluate_rankings("m", vec![done("i", &["a"], &["a"])], &[]).is_err());
    }

    fn instance(id: &str, files: &[&str]) -> InstanceExample {
        InstanceExample::new(
            IssueRecord::new(id, "o/r", "c", "text").unwrap(),
            gold(files),
            Split::Verified,
        )
        .unwrap()
    }

    #[test]
    fn patch_sizes() {
        let h = patch_size_stats(&[
            instance("a", &["x"]),
            instance("b", &["x"]),
            instance("c", &["x", "y"]),
        ])
        .unwrap();
        assert_eq!(h.buckets, BTreeMap::from([(1, 2), (2, 1)]));
        assert_eq!(h.total, 3);
        assert!((h.single_file_fraction() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(h.max_files(), 2);
        assert!(!h.buckets.contains_key(&0));
        assert!(patch_size_stats(&[]).is_err());
    }

    struct Fixed;
    impl Retriever for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn retrieve(
            &self,
            instance: &InstanceExample,
            _depth: usize,
        ) -> Result<Vec<String>, RetrievalFailure> {
            match instance.id() {
                "missing" => Err(RetrievalFailure::Unresolvable(String::from("no snapshot"))),
                "broken" => Err(RetrievalFailure::Fatal(String::from("boom"))),
                _ => Ok(vec![String::from("x"), String::from("a")]),
            }
        }
    }

    #[test]
    fn evaluate_method_with_retriever() {
        let mut insts: Vec<InstanceExample> = (0..10)
            .map(|i| instance(&format!("i{i}"), &["a"]))
            .collect();
        let r = evaluate_method(&insts, &Fixed, &[1, 2]).unwrap();
        assert_eq!(r.recall, vec![0.0, 1.0]);
        insts.push(instance("missing", &["a"]));
        let r = evaluate_method(&insts, &Fixed, &[1, 2]).unwrap();
        assert_eq!(r.skipped[0].instance_id, "missing");
        insts.push(instance("broken", &["a"]));
        assert!(matches!(
            evaluate_method(&insts, &Fixed, &[1]),
            Err(EvalError::Retrieval { .. })
        ));
    }

    fn grid(alphas: &[f64], rows: &[&[f64]]) -> SweepGrid {
        SweepGrid {
            alphas: alphas.to_vec(),
            ks: (1..=rows[0].len()).collect(),
            recall: rows.iter().map(|r| r.to_vec()).collect(),
            instance_count: 1,
            skipped: Vec::new(),
        }
    }

    #[test]
    fn qualitative_flags() {
        let g = grid(&[0.0, 0.5, 1.0], &[&[0.2, 0.4], &[0.5, 0.8], &[0.3, 0.4]]);
        let dense = [0.5, 0.7];
        let bm25 = [0.4, 0.6];
        let tfidf = [0.3, 0.5];
        let input = QualitativeInput {
            dense: Some(&dense),
            bm25: Some(&bm25),
            tfidf: Some(&tfidf),
            grid: Some(&g),
        };
        let flags = qualitative_checks(&input).unwrap();
        assert!(flags.baseline_ordering && flags.alpha_peak_in_band && flags.curves_monotone);
        assert_eq!(flags.argmax_alphas, vec![0.5]);

        let dipping = [0.5, 0.6, 0.7, 0.65];
        let g4 = grid(&[0.5], &[&[0.1, 0.2, 0.3, 0.4]]);
        let flat = [0.1, 0.1, 0.1, 0.1];
        let flags = qualitative_checks(&QualitativeInput {
            dense: Some(&dipping),
            bm25: Some(&flat),
            tfidf: Some(&flat),
            grid: Some(&g4),
        })
        .unwrap();
        assert!(!flags.curves_monotone);

        let g9 = grid(&[0.5, 0.9], &[&[0.2, 0.4], &[0.6, 0.8]]);
        let flags = qualitative_checks(&QualitativeInput {
            grid: Some(&g9),
            ..input
        })
        .unwrap();
        assert!(!flags.alpha_peak_in_band);
        assert_eq!(flags.argmax_alphas, vec![0.9]);

        assert!(qualitative_checks(&QualitativeInput {
            tfidf: None,
            ..input
        })
        .is_err());
    }

    #[test]
    fn sweep_grid_shape_and_endpoints() {
        let st = ScoredList::rank(
            Method::StHistory,
            vec![("g2", 2.0), ("h", 1.0), ("h0", 0.5)],
        );
        let bm = ScoredList::rank(Method::Bm25, vec![("g1", 5.0), ("b", 4.0), ("b0", 1.0)]);
        let outcomes = vec![Outcome::Done {
            instance_id: String::from("i"),
            gold: gold(&["g1", "g2"]),
            value: InstanceStreams { st, bm25: bm },
        }];
        let alphas: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
        let ks: Vec<usize> = (1..=10).collect();
        let g = sweep(outcomes, &alphas, &ks, &FusionConfig::default()).unwrap();
        assert_eq!(g.recall.len(), 11);
        assert!(g.recall.iter().all(|r| r.len() == 10));
        // alpha = 0 ranks g1, b first; g2 comes after every positive bm25 doc.
        assert_eq!(g.cell(0, 0), 0.5);
        assert_eq!(g.cell(0, 1), 0.5);
        assert_eq!(g.cell(5, 1), 1.0);
        assert!(sweep(Vec::new(), &[0.5, 0.4], &ks, &FusionConfig::default()).is_err());
    }
}
