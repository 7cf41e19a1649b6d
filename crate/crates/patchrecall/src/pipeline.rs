//! The retrieval pipeline over a loaded dataset and the commands built on it.
//!
//! Instances are grouped by snapshot so each checkout is read, indexed and
//! embedded once; groups run on a bounded worker pool and the results are
//! reduced in instance-id order, so outputs never depend on scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use patchrecall_core::corpus::{InstanceExample, RepoSnapshot, Split};
use patchrecall_core::dense::{
    embed, history_retrieve, prune_to_snapshot, CodebaseIndex, DenseError, EmbedItem, HistoryPool,
};
use patchrecall_core::eval::{
    evaluate_rankings, patch_size_stats, qualitative_checks, sweep, InstanceStreams, MethodReport,
    Outcome, PatchSizeHistogram, QualitativeFlags, QualitativeInput, SweepGrid,
};
use patchrecall_core::fusion::{fuse, top_k, HybridCandidate};
use patchrecall_core::ranking::{Method, ScoredList};
use patchrecall_core::sparse::{bm25_retrieve, build_index, tfidf_retrieve, InvertedIndex};
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::dataset::{load_instances, load_verified_ids};
use crate::embeddings::{provider_from_spec, DynEmbedder};
use crate::error::{Error, Result};
use crate::index_file::{read_index, write_index, StoredIndex};
use crate::report;
use crate::snapshot::{snapshot_repository, SnapshotSource};

/// Retrieval methods addressable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MethodName {
    Bm25,
    Tfidf,
    /// File contents embedded in chunks, ranked against the issue.
    Dense,
    /// Files of the most similar past issues.
    History,
    /// History and BM25 streams fused.
    Hybrid,
}

impl MethodName {
    pub const ALL: [MethodName; 5] = [
        MethodName::Bm25,
        MethodName::Tfidf,
        MethodName::Dense,
        MethodName::History,
        MethodName::Hybrid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::Bm25 => "bm25",
            MethodName::Tfidf => "tfidf",
            MethodName::Dense => "dense",
            MethodName::History => "history",
            MethodName::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method {s:?} (expected one of bm25, tfidf, dense, history, hybrid)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Needs {
    sparse: bool,
    codebase: bool,
    history: bool,
}

impl Needs {
    fn of(methods: &[MethodName]) -> Self {
        let mut n = Needs::default();
        for m in methods {
            match m {
                MethodName::Bm25 | MethodName::Tfidf => n.sparse = true,
                MethodName::Dense => n.codebase = true,
                MethodName::History => n.history = true,
                MethodName::Hybrid => {
                    n.sparse = true;
                    n.history = true;
                }
            }
        }
        n
    }
}

/// One loaded snapshot with whichever indexes the run needs.
pub struct SnapshotContext {
    pub snapshot: RepoSnapshot,
    sparse: Option<InvertedIndex>,
    codebase: Option<CodebaseIndex>,
}

impl SnapshotContext {
    fn sparse(&self) -> &InvertedIndex {
        self.sparse.as_ref().expect("sparse index requested")
    }
}

/// Whether a missing history pool is an error or an empty stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PoolPolicy {
    Strict,
    EmptyStream,
}

/// A dataset loaded under one run configuration.
pub struct Engine {
    config: RunConfig,
    instances: Vec<InstanceExample>,
    source: Option<SnapshotSource>,
    embedder: DynEmbedder,
    pool: OnceLock<HistoryPool>,
    workers: rayon::ThreadPool,
}

impl Engine {
    /// Validates `config` and loads the dataset, the snapshot source and the
    /// embedding provider.
    pub fn open(config: RunConfig, needs_snapshots: bool) -> Result<Self> {
        config.validate(needs_snapshots)?;
        let dataset = config.dataset.clone().expect("validated");
        let verified = match &config.verified_ids {
            Some(p) => Some(load_verified_ids(p)?),
            None => None,
        };
        let instances = load_instances(&dataset, None, verified.as_ref())?;
        log::info!(
            "loaded {} instances from {}",
            instances.len(),
            dataset.display()
        );
        let source = match &config.snapshots {
            Some(p) => Some(SnapshotSource::open(p)?),
            None => None,
        };
        let embedder = provider_from_spec(&config.provider.to_spec()?)?;
        let workers = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", config.jobs)))?;
        Ok(Engine {
            config,
            instances,
            source,
            embedder,
            pool: OnceLock::new(),
            workers,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn instances(&self) -> &[InstanceExample] {
        &self.instances
    }

    /// Instances of the configured evaluation split, in file order.
    pub fn eval_instances(&self) -> Result<Vec<&InstanceExample>> {
        let v: Vec<_> = self
            .instances
            .iter()
            .filter(|i| i.split == self.config.split)
            .collect();
        if v.is_empty() {
            return Err(Error::Format {
                path: self.config.dataset.clone().unwrap_or_default(),
                message: format!("no {} instances", self.config.split),
            });
        }
        Ok(v)
    }

    pub fn instance(&self, id: &str) -> Result<&InstanceExample> {
        self.instances
            .iter()
            .find(|i| i.id() == id)
            .ok_or_else(|| Error::UnknownInstance(id.to_string()))
    }

    /// The history pool over every unverified instance, built on first use.
    pub fn pool(&self) -> Result<&HistoryPool> {
        if let Some(p) = self.pool.get() {
            return Ok(p);
        }
        let unverified: Vec<InstanceExample> = self
            .instances
            .iter()
            .filter(|i| i.split == Split::Unverified)
            .cloned()
            .collect();
        let pool = HistoryPool::build(&unverified, self.embedder.as_ref())?;
        Ok(self.pool.get_or_init(|| pool))
    }

    fn source(&self) -> Result<&SnapshotSource> {
        self.source
            .as_ref()
            .ok_or_else(|| Error::Config(String::from("no snapshots path given")))
    }

    fn snapshot_dir(&self, inst: &InstanceExample) -> Result<PathBuf> {
        self.source()?
            .resolve(inst.id())
            .map_err(|reason| Error::Unresolvable {
                instance: inst.id().to_string(),
                reason,
            })
    }

    fn load_context(
        &self,
        dir: &Path,
        inst: &InstanceExample,
        needs: Needs,
    ) -> Result<SnapshotContext> {
        let (snapshot, rep) = snapshot_repository(
            dir,
            &inst.issue.repo_id,
            &inst.issue.base_commit,
            &self.config.snapshot,
        )?;
        if rep.warnings() > 0 {
            log::warn!(
                "{}: skipped {} binary and {} oversized files",
                dir.display(),
                rep.skipped_binary,
                rep.skipped_large
            );
        }
        let sparse = if needs.sparse {
            Some(build_index(&snapshot, &self.config.tokenizer)?)
        } else {
            None
        };
        let codebase = if needs.codebase {
            Some(CodebaseIndex::build(
                &snapshot,
                self.embedder.as_ref(),
                &self.config.chunking,
            )?)
        } else {
            None
        };
        Ok(SnapshotContext {
            snapshot,
            sparse,
            codebase,
        })
    }

    fn bm25(
        &self,
        ctx: &SnapshotContext,
        inst: &InstanceExample,
        depth: usize,
    ) -> Result<ScoredList> {
        Ok(bm25_retrieve(
            ctx.sparse(),
            &inst.issue.text,
            depth,
            &self.config.bm25,
        )?)
    }

    fn tfidf(
        &self,
        ctx: &SnapshotContext,
        inst: &InstanceExample,
        depth: usize,
    ) -> Result<ScoredList> {
        Ok(tfidf_retrieve(ctx.sparse(), &inst.issue.text, depth)?)
    }

    fn dense(
        &self,
        ctx: &SnapshotContext,
        inst: &InstanceExample,
        depth: usize,
    ) -> Result<ScoredList> {
        let index = ctx.codebase.as_ref().expect("codebase index requested");
        let query = embed(
            self.embedder.as_ref(),
            &[EmbedItem {
                id: &inst.issue.instance_id,
                text: &inst.issue.text,
            }],
        )?
        .remove(0);
        Ok(index.retrieve(&query, depth)?)
    }

    fn history(
        &self,
        ctx: &SnapshotContext,
        inst: &InstanceExample,
        depth: usize,
        policy: PoolPolicy,
    ) -> Result<ScoredList> {
        let opts = self.config.history_options();
        let mut list =
            match history_retrieve(self.pool()?, &inst.issue, self.embedder.as_ref(), &opts) {
                Ok(l) => l,
                Err(DenseError::EmptyPool) if policy == PoolPolicy::EmptyStream => {
                    log::warn!(
                        "{}: no past issues to draw on, history stream is empty",
                        inst.id()
                    );
                    ScoredList::empty(Method::StHistory)
                }
                Err(e) => return Err(e.into()),
            };
        if !opts.same_repo_only && self.config.prune_history {
            list = prune_to_snapshot(&list, &ctx.snapshot);
        }
        list.truncate(depth);
        Ok(list)
    }

    fn streams(&self, ctx: &SnapshotContext, inst: &InstanceExample) -> Result<InstanceStreams> {
        let depth = self.config.stream_depth();
        Ok(InstanceStreams {
            st: self.history(ctx, inst, depth, PoolPolicy::EmptyStream)?,
            bm25: self.bm25(ctx, inst, depth)?,
        })
    }

    /// Ranked docids of one method, at least `depth` long when possible.
    fn ranking(
        &self,
        ctx: &SnapshotContext,
        inst: &InstanceExample,
        method: MethodName,
        depth: usize,
    ) -> Result<Vec<String>> {
        let list = match method {
            MethodName::Bm25 => self.bm25(ctx, inst, depth)?,
            MethodName::Tfidf => self.tfidf(ctx, inst, depth)?,
            MethodName::Dense => self.dense(ctx, inst, depth)?,
            MethodName::History => self.history(ctx, inst, depth, PoolPolicy::EmptyStream)?,
            MethodName::Hybrid => {
                let s = self.streams(ctx, inst)?;
                let fused = fuse(&s.st, &s.bm25, &self.config.fusion);
                return Ok(fused.into_iter().take(depth).map(|c| c.docid).collect());
            }
        };
        Ok(list.docids().map(String::from).collect())
    }

    /// Applies `f` to every instance with its snapshot loaded. Instances
    /// without a snapshot, or whose snapshot has no matching files, are
    /// skipped; any other failure aborts.
    fn run<T, F>(
        &self,
        instances: &[&InstanceExample],
        needs: Needs,
        f: F,
    ) -> Result<Vec<Outcome<T>>>
    where
        T: Send,
        F: Fn(&SnapshotContext, &InstanceExample) -> Result<T> + Sync,
    {
        if needs.history {
            self.pool()?;
        }
        let mut outcomes = Vec::with_capacity(instances.len());
        let mut groups: BTreeMap<(PathBuf, &str, &str), Vec<&InstanceExample>> = BTreeMap::new();
        for &inst in instances {
            match self.snapshot_dir(inst) {
                Ok(dir) => groups
                    .entry((dir, &inst.issue.repo_id, &inst.issue.base_commit))
                    .or_default()
                    .push(inst),
                Err(Error::Unresolvable { instance, reason }) => {
                    log::warn!("skipping {instance}: {reason}");
                    outcomes.push(Outcome::Skipped {
                        instance_id: instance,
                        reason,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        let groups: Vec<_> = groups.into_iter().collect();
        log::info!(
            "{} instances over {} snapshots on {} workers",
            instances.len(),
            groups.len(),
            self.workers.current_num_threads()
        );
        let per_group: Vec<Result<Vec<Outcome<T>>>> = self.workers.install(|| {
            groups
                .par_iter()
                .map(|((dir, _, _), members)| {
                    let ctx = match self.load_context(dir, members[0], needs) {
                        Ok(c) => c,
                        Err(e @ Error::EmptyCorpus(_)) => {
                            let reason = e.to_string();
                            return Ok(members
                                .iter()
                                .map(|m| Outcome::Skipped {
                                    instance_id: m.id().to_string(),
                                    reason: reason.clone(),
                                })
                                .collect());
                        }
                        Err(e) => return Err(e),
                    };
                    members
                        .iter()
                        .map(|m| {
                            Ok(Outcome::Done {
                                instance_id: m.id().to_string(),
                                gold: m.gold_files().clone(),
                                value: f(&ctx, m)?,
                            })
                        })
                        .collect()
                })
                .collect()
        });
        for g in per_group {
            outcomes.extend(g?);
        }
        outcomes.sort_by(|a, b| a.instance_id().cmp(b.instance_id()));
        Ok(outcomes)
    }

    fn output_dir(&self) -> Result<&Path> {
        let dir = self.config.output_dir.as_path();
        report::ensure_dir(dir)?;
        self.config.write_echo(dir)?;
        Ok(dir)
    }

    fn patch_sizes(&self) -> Result<PatchSizeHistogram> {
        let owned: Vec<InstanceExample> = self.eval_instances()?.into_iter().cloned().collect();
        Ok(patch_size_stats(&owned)?)
    }

    fn config_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.config).expect("run configuration serializes")
    }
}

/// Histogram of files per patch over the evaluation split.
pub fn cmd_stats(engine: &Engine) -> Result<PatchSizeHistogram> {
    let hist = engine.patch_sizes()?;
    let dir = engine.output_dir()?;
    report::write_histogram(dir, &hist, engine.config.split.as_str())?;
    Ok(hist)
}

fn index_file_name(repo: &str, commit: &str) -> String {
    let clean: String = format!("{repo}@{commit}")
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "@.-_".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{clean}.idx")
}

/// Writes one sparse index per distinct snapshot of the selected instances
/// (all evaluation instances when `only` is empty) and returns the paths.
pub fn cmd_index(engine: &Engine, only: Option<&str>) -> Result<Vec<PathBuf>> {
    let targets: Vec<&InstanceExample> = match only {
        Some(id) => vec![engine.instance(id)?],
        None => engine.eval_instances()?,
    };
    let needs = Needs {
        sparse: true,
        ..Needs::default()
    };
    let out = engine.output_dir()?.join("indexes");
    report::ensure_dir(&out)?;
    let outcomes = engine.run(&targets, needs, |ctx, inst| {
        let path = out.join(index_file_name(
            &inst.issue.repo_id,
            &inst.issue.base_commit,
        ));
        write_index(
            &path,
            &StoredIndex {
                repo_id: ctx.snapshot.repo_id.clone(),
                commit: ctx.snapshot.commit.clone(),
                index: ctx.sparse().clone(),
            },
        )?;
        Ok(path)
    })?;
    let mut manifest = serde_json::Map::new();
    let mut paths = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Done {
                instance_id, value, ..
            } => {
                let name = value.file_name().unwrap().to_string_lossy().into_owned();
                manifest.insert(instance_id, json!(name));
                if !paths.contains(&value) {
                    paths.push(value);
                }
            }
            Outcome::Skipped {
                instance_id,
                reason,
            } => {
                if only.is_some() {
                    return Err(Error::Unresolvable {
                        instance: instance_id,
                        reason,
                    });
                }
            }
        }
    }
    report::write_json(
        &out.join("index_manifest.json"),
        &json!({ "schema_version": report::SCHEMA_VERSION, "indexes": manifest }),
    )?;
    paths.sort();
    Ok(paths)
}

/// One retrieved file as printed by `retrieve`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedLine {
    pub rank: usize,
    pub docid: String,
    pub score: f64,
}

impl fmt::Display for RankedLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.rank, self.docid, self.score)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrieveOutput {
    pub lines: Vec<RankedLine>,
    /// Fused candidates with their normalized stream scores, hybrid only.
    pub audit: Option<Vec<HybridCandidate>>,
}

/// Top-`k` files of one instance under one method. `index` optionally
/// supplies a prebuilt sparse index for the instance's snapshot.
pub fn cmd_retrieve(
    engine: &Engine,
    instance_id: &str,
    method: MethodName,
    k: usize,
    index: Option<&Path>,
) -> Result<RetrieveOutput> {
    if k < 1 {
        return Err(Error::Config(String::from("k must be at least 1")));
    }
    let inst = engine.instance(instance_id)?;
    let dir = engine.snapshot_dir(inst)?;
    let mut needs = Needs::of(&[method]);
    let prebuilt = match index {
        Some(p) if needs.sparse => {
            let stored = read_index(p, Some(&engine.config.tokenizer))?;
            if stored.repo_id != inst.issue.repo_id || stored.commit != inst.issue.base_commit {
                return Err(Error::Config(format!(
                    "{} indexes {}@{}, instance {} is at {}@{}",
                    p.display(),
                    stored.repo_id,
                    stored.commit,
                    inst.id(),
                    inst.issue.repo_id,
                    inst.issue.base_commit
                )));
            }
            needs.sparse = false;
            Some(stored.index)
        }
        _ => None,
    };
    let mut ctx = engine.load_context(&dir, inst, needs)?;
    if prebuilt.is_some() {
        ctx.sparse = prebuilt;
    }
    let list = match method {
        MethodName::Bm25 => engine.bm25(&ctx, inst, k)?,
        MethodName::Tfidf => engine.tfidf(&ctx, inst, k)?,
        MethodName::Dense => engine.dense(&ctx, inst, k)?,
        MethodName::History => engine.history(&ctx, inst, k, PoolPolicy::Strict)?,
        MethodName::Hybrid => {
            let s = engine.streams(&ctx, inst)?;
            let fused = fuse(&s.st, &s.bm25, &engine.config.fusion);
            let top = top_k(&fused, k)?.to_vec();
            let dir = engine.output_dir()?;
            report::write_audit(dir, inst.id(), &fused)?;
            return Ok(RetrieveOutput {
                lines: top
                    .iter()
                    .enumerate()
                    .map(|(i, c)| RankedLine {
                        rank: i + 1,
                        docid: c.docid.clone(),
                        score: c.h,
                    })
                    .collect(),
                audit: Some(fused),
            });
        }
    };
    Ok(RetrieveOutput {
        lines: list
            .entries()
            .iter()
            .enumerate()
            .map(|(i, e)| RankedLine {
                rank: i + 1,
                docid: e.docid.clone(),
                score: e.score,
            })
            .collect(),
        audit: None,
    })
}

fn split_outcomes<T: Clone>(outcomes: &[Outcome<Vec<T>>], j: usize) -> Vec<Outcome<T>> {
    outcomes
        .iter()
        .map(|o| match o {
            Outcome::Done {
                instance_id,
                gold,
                value,
            } => Outcome::Done {
                instance_id: instance_id.clone(),
                gold: gold.clone(),
                value: value[j].clone(),
            },
            Outcome::Skipped {
                instance_id,
                reason,
            } => Outcome::Skipped {
                instance_id: instance_id.clone(),
                reason: reason.clone(),
            },
        })
        .collect()
}

fn evaluate_methods(engine: &Engine, methods: &[MethodName]) -> Result<Vec<MethodReport>> {
    let instances = engine.eval_instances()?;
    let depth = *engine.config.ks.last().expect("validated");
    let outcomes = engine.run(&instances, Needs::of(methods), |ctx, inst| {
        methods
            .iter()
            .map(|&m| engine.ranking(ctx, inst, m, depth))
            .collect::<Result<Vec<_>>>()
    })?;
    methods
        .iter()
        .enumerate()
        .map(|(j, m)| {
            Ok(evaluate_rankings(
                m.as_str(),
                split_outcomes(&outcomes, j),
                &engine.config.ks,
            )?)
        })
        .collect()
}

/// Recall of each method over the evaluation split at every configured k.
pub fn cmd_eval(engine: &Engine, methods: &[MethodName]) -> Result<Vec<MethodReport>> {
    if methods.is_empty() {
        return Err(Error::Config(String::from("no methods given")));
    }
    let mut methods = methods.to_vec();
    methods.dedup();
    let reports = evaluate_methods(engine, &methods)?;
    let hist = engine.patch_sizes()?;
    let dir = engine.output_dir()?;
    report::write_method_csv(dir, &reports)?;
    report::write_per_instance(dir, &reports)?;
    report::write_json(
        &dir.join(report::SUMMARY),
        &json!({
            "schema_version": report::SCHEMA_VERSION,
            "command": "eval",
            "methods": reports.iter().map(report::method_summary).collect::<Vec<_>>(),
            "patch_sizes": report::histogram_json(&hist, engine.config.split.as_str()),
            "config": engine.config_json(),
        }),
    )?;
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub grid: SweepGrid,
    /// BM25, TF-IDF and history recall over the same instances.
    pub baselines: Vec<MethodReport>,
    pub flags: QualitativeFlags,
}

/// Recall of the fused ranking over the alpha-by-k grid, with the single
/// stream baselines and the qualitative checks.
pub fn cmd_sweep(engine: &Engine) -> Result<SweepOutput> {
    let instances = engine.eval_instances()?;
    let cfg = &engine.config;
    let depth = *cfg.ks.last().expect("validated");
    let needs = Needs::of(&[MethodName::Hybrid]);
    let outcomes = engine.run(&instances, needs, |ctx, inst| {
        let streams = engine.streams(ctx, inst)?;
        let tfidf = engine.tfidf(ctx, inst, depth)?;
        Ok((streams, tfidf))
    })?;

    let baseline =
        |name: MethodName, pick: &dyn Fn(&(InstanceStreams, ScoredList)) -> Vec<String>| {
            let rankings: Vec<Outcome<Vec<String>>> = outcomes
                .iter()
                .map(|o| match o {
                    Outcome::Done {
                        instance_id,
                        gold,
                        value,
                    } => Outcome::Done {
                        instance_id: instance_id.clone(),
                        gold: gold.clone(),
                        value: pick(value),
                    },
                    Outcome::Skipped {
                        instance_id,
                        reason,
                    } => Outcome::Skipped {
                        instance_id: instance_id.clone(),
                        reason: reason.clone(),
                    },
                })
                .collect();
            evaluate_rankings(name.as_str(), rankings, &cfg.ks)
        };
    let docids = |l: &ScoredList| l.docids().map(String::from).collect::<Vec<_>>();
    let bm25 = baseline(MethodName::Bm25, &|v| docids(&v.0.bm25))?;
    let tfidf = baseline(MethodName::Tfidf, &|v| docids(&v.1))?;
    let history = baseline(MethodName::History, &|v| docids(&v.0.st))?;

    let stream_outcomes: Vec<Outcome<InstanceStreams>> = outcomes
        .into_iter()
        .map(|o| match o {
            Outcome::Done {
                instance_id,
                gold,
                value,
            } => Outcome::Done {
                instance_id,
                gold,
                value: value.0,
            },
            Outcome::Skipped {
                instance_id,
                reason,
            } => Outcome::Skipped {
                instance_id,
                reason,
            },
        })
        .collect();
    let grid = sweep(stream_outcomes, &cfg.alphas, &cfg.ks, &cfg.fusion)?;
    let flags = qualitative_checks(&QualitativeInput {
        dense: Some(&history.recall),
        bm25: Some(&bm25.recall),
        tfidf: Some(&tfidf.recall),
        grid: Some(&grid),
    })?;
    let baselines = vec![bm25, tfidf, history];

    let hist = engine.patch_sizes()?;
    let dir = engine.output_dir()?;
    report::write_grid_csv(dir, &grid)?;
    report::write_method_csv(dir, &baselines)?;
    report::write_json(
        &dir.join(report::SUMMARY),
        &json!({
            "schema_version": report::SCHEMA_VERSION,
            "command": "sweep",
            "grid": grid,
            "row_means": grid.row_means(),
            "baselines": baselines.iter().map(report::method_summary).collect::<Vec<_>>(),
            "flags": flags,
            "patch_sizes": report::histogram_json(&hist, cfg.split.as_str()),
            "config": engine.config_json(),
        }),
    )?;
    Ok(SweepOutput {
        grid,
        baselines,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names() {
        for m in MethodName::ALL {
            assert_eq!(m.as_str().parse::<MethodName>().unwrap(), m);
        }
        assert_eq!("bm42".parse::<MethodName>().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn index_names_are_file_safe() {
        assert_eq!(index_file_name("org/repo", "ab12"), "org_repo@ab12.idx");
    }
}
