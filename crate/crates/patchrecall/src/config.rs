//! Run configuration.
//!
//! Values are resolved in three layers, later layers winning: built-in
//! defaults, then an optional TOML file, then command-line flags. Every key
//! is a flat dotted path (`fusion.alpha`, `tokenizer.min_token_len`, ...),
//! which TOML accepts either as dotted keys or as `[section]` tables.

use std::fs;
use std::path::{Path, PathBuf};

use patchrecall_core::corpus::Split;
use patchrecall_core::dense::{
    ChunkingConfig, EmbeddingProviderSpec, HistoryOptions, ProviderKind, DEFAULT_HASHING_DIM,
    DEFAULT_MODEL_ID,
};
use patchrecall_core::fusion::FusionConfig;
use patchrecall_core::sparse::Bm25Params;
use patchrecall_core::textproc::TokenizerConfig;
use serde::{Deserialize, Serialize};

use crate::embeddings::ENDPOINT_ENV;
use crate::error::{Error, Result};
use crate::snapshot::SnapshotOptions;

/// Name of the resolved configuration written into every output directory.
pub const CONFIG_ECHO_FILE: &str = "run_config.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderChoice {
    Fallback,
    Precomputed,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderSection {
    pub kind: ProviderChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// 0 means: take the width from the provider.
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embeddings_file: Option<PathBuf>,
}

impl Default for ProviderSection {
    fn default() -> Self {
        ProviderSection {
            kind: ProviderChoice::Fallback,
            model: None,
            dim: 0,
            endpoint: None,
            embeddings_file: None,
        }
    }
}

impl ProviderSection {
    pub fn to_spec(&self) -> Result<EmbeddingProviderSpec> {
        let spec = match self.kind {
            ProviderChoice::Fallback => EmbeddingProviderSpec {
                kind: ProviderKind::HashingFallback,
                model_id: String::from("hashing-fallback"),
                dim: if self.dim == 0 {
                    DEFAULT_HASHING_DIM
                } else {
                    self.dim
                },
                endpoint_or_path: String::new(),
            },
            ProviderChoice::Precomputed => {
                let path = self.embeddings_file.as_ref().ok_or_else(|| {
                    Error::Config(String::from(
                        "--provider precomputed needs --embeddings-file",
                    ))
                })?;
                EmbeddingProviderSpec {
                    kind: ProviderKind::PrecomputedFile,
                    model_id: self
                        .model
                        .clone()
                        .unwrap_or_else(|| String::from("precomputed")),
                    dim: self.dim,
                    endpoint_or_path: path.to_string_lossy().into_owned(),
                }
            }
            ProviderChoice::Remote => {
                let endpoint = self.endpoint.clone().ok_or_else(|| {
                    Error::Config(format!(
                        "--provider remote needs --endpoint or {ENDPOINT_ENV}"
                    ))
                })?;
                EmbeddingProviderSpec {
                    kind: ProviderKind::RemoteHttp,
                    model_id: self
                        .model
                        .clone()
                        .unwrap_or_else(|| DEFAULT_MODEL_ID.to_string()),
                    dim: self.dim,
                    endpoint_or_path: endpoint,
                }
            }
        };
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    /// Snapshot manifest file, or a directory with one checkout per instance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified_ids: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Instances evaluated; the unverified split always forms the history pool.
    pub split: Split,
    pub alphas: Vec<f64>,
    pub ks: Vec<usize>,
    pub n_issues: usize,
    pub same_repo_only: bool,
    /// Drop history candidates that are not files of the target snapshot.
    pub prune_history: bool,
    /// Candidates kept per stream before fusion; 0 means the largest k.
    pub depth: usize,
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
    /// Used only by fixture generation; nothing in a run is random.
    pub seed: u64,
    pub provider: ProviderSection,
    pub tokenizer: TokenizerConfig,
    pub bm25: Bm25Params,
    pub fusion: FusionConfig,
    pub chunking: ChunkingConfig,
    pub snapshot: SnapshotOptions,
}

/// The default alpha grid, 0.0 to 1.0 in steps of 0.1.
pub fn default_alphas() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        let history = HistoryOptions::default();
        RunConfig {
            dataset: None,
            snapshots: None,
            verified_ids: None,
            output_dir: PathBuf::from("patchrecall-out"),
            split: Split::Verified,
            alphas: default_alphas(),
            ks: (1..=10).collect(),
            n_issues: history.n_issues,
            same_repo_only: history.same_repo_only,
            prune_history: true,
            depth: 0,
            jobs: 0,
            seed: 0,
            provider: ProviderSection::default(),
            tokenizer: TokenizerConfig::default(),
            bm25: Bm25Params::default(),
            fusion: FusionConfig::default(),
            chunking: ChunkingConfig::default(),
            snapshot: SnapshotOptions::default(),
        }
    }
}

/// Values given on the command line. `None` leaves the lower layers alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub snapshots: Option<PathBuf>,
    pub verified_ids: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub split: Option<Split>,
    pub provider: Option<ProviderChoice>,
    pub endpoint: Option<String>,
    pub embeddings_file: Option<PathBuf>,
    pub model: Option<String>,
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub alphas: Option<Vec<f64>>,
    pub ks: Option<Vec<usize>>,
    pub n_issues: Option<usize>,
    pub same_repo_only: Option<bool>,
    pub depth: Option<usize>,
    pub jobs: Option<usize>,
    pub include: Option<Vec<String>>,
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Defaults overlaid with `path` when given.
    pub fn from_file(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *slot = v.clone();
            }
        }
        fn set_opt<T: Clone>(slot: &mut Option<T>, v: &Option<T>) {
            if v.is_some() {
                slot.clone_from(v);
            }
        }
        set_opt(&mut self.dataset, &o.dataset);
        set_opt(&mut self.snapshots, &o.snapshots);
        set_opt(&mut self.verified_ids, &o.verified_ids);
        set(&mut self.output_dir, &o.output_dir);
        set(&mut self.split, &o.split);
        set(&mut self.provider.kind, &o.provider);
        set_opt(&mut self.provider.endpoint, &o.endpoint);
        set_opt(&mut self.provider.embeddings_file, &o.embeddings_file);
        set_opt(&mut self.provider.model, &o.model);
        set(&mut self.fusion.alpha, &o.alpha);
        set(&mut self.fusion.k, &o.k);
        set(&mut self.alphas, &o.alphas);
        set(&mut self.ks, &o.ks);
        set(&mut self.n_issues, &o.n_issues);
        set(&mut self.same_repo_only, &o.same_repo_only);
        set(&mut self.depth, &o.depth);
        set(&mut self.jobs, &o.jobs);
        set(&mut self.snapshot.include, &o.include);
        set(&mut self.seed, &o.seed);
    }

    /// Falls back to the endpoint environment variable when no endpoint was
    /// configured.
    pub fn apply_env(&mut self) {
        if self.provider.endpoint.is_none() {
            if let Ok(v) = std::env::var(ENDPOINT_ENV) {
                if !v.is_empty() {
                    self.provider.endpoint = Some(v);
                }
            }
        }
    }

    /// Checks every parameter and that referenced input files exist.
    /// `needs_snapshots` is false for commands that only read the dataset.
    pub fn validate(&self, needs_snapshots: bool) -> Result<()> {
        let exists = |what: &str, p: &Option<PathBuf>, required: bool| -> Result<()> {
            match p {
                Some(p) if !p.exists() => Err(Error::Config(format!(
                    "{what} path {} does not exist",
                    p.display()
                ))),
                None if required => Err(Error::Config(format!("no {what} path given"))),
                _ => Ok(()),
            }
        };
        exists("dataset", &self.dataset, true)?;
        exists("snapshots", &self.snapshots, needs_snapshots)?;
        exists("verified-ids", &self.verified_ids, false)?;
        if self.provider.kind == ProviderChoice::Precomputed {
            exists("embeddings", &self.provider.embeddings_file, true)?;
        }
        self.tokenizer.validate()?;
        self.bm25.validate()?;
        self.fusion.validate()?;
        self.chunking.validate()?;
        if self.n_issues < 1 {
            return Err(Error::Config(String::from("n_issues must be at least 1")));
        }
        if self.ks.is_empty() || self.ks.windows(2).any(|w| w[0] >= w[1]) || self.ks[0] == 0 {
            return Err(Error::Config(String::from(
                "ks must be a non-empty, strictly ascending list of positive integers",
            )));
        }
        if self.alphas.is_empty()
            || self.alphas.windows(2).any(|w| w[0] >= w[1])
            || self.alphas.iter().any(|a| !(0.0..=1.0).contains(a))
        {
            return Err(Error::Config(String::from(
                "alphas must be a non-empty, strictly ascending list within [0, 1]",
            )));
        }
        self.provider.to_spec()?;
        Ok(())
    }

    pub fn history_options(&self) -> HistoryOptions {
        HistoryOptions {
            n_issues: self.n_issues,
            same_repo_only: self.same_repo_only,
        }
    }

    /// Stream depth for fusion.
    pub fn stream_depth(&self) -> usize {
        if self.depth > 0 {
            self.depth
        } else {
            self.ks
                .last()
                .copied()
                .unwrap_or(self.fusion.k)
                .max(self.fusion.k)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    /// Writes the resolved configuration into `dir`.
    pub fn write_echo(&self, dir: &Path) -> Result<()> {
        let path = dir.join(CONFIG_ECHO_FILE);
        fs::write(&path, self.to_toml()).map_err(|e| Error::io(path, e))
    }
}

/// Parses a comma-separated list such as `0,0.5,1`.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("cannot parse {t:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_defaults_file_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "ks = [1, 5]\nn_issues = 4\nfusion.alpha = 0.3\ntokenizer.min_token_len = 3\n\n[provider]\nkind = \"precomputed\"\n",
        )
        .unwrap();
        let mut cfg = RunConfig::from_file(Some(&path)).unwrap();
        assert_eq!(cfg.ks, vec![1, 5]);
        assert_eq!(cfg.n_issues, 4);
        assert_eq!(cfg.fusion.alpha, 0.3);
        assert_eq!(cfg.fusion.k, 10);
        assert_eq!(cfg.tokenizer.min_token_len, 3);
        assert_eq!(cfg.provider.kind, ProviderChoice::Precomputed);
        assert_eq!(cfg.alphas, default_alphas());

        cfg.apply(&Overrides {
            alpha: Some(0.7),
            n_issues: Some(2),
            ..Overrides::default()
        });
        assert_eq!(cfg.fusion.alpha, 0.7);
        assert_eq!(cfg.n_issues, 2);
        assert_eq!(cfg.ks, vec![1, 5]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "fusion.alpah = 0.3\n").unwrap();
        let err = RunConfig::from_file(Some(&path)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig {
            dataset: Some(PathBuf::from("data.jsonl")),
            ..RunConfig::default()
        };
        cfg.provider.endpoint = Some("http://localhost:1".into());
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn validation() {
        let dir = tempfile::tempdir().unwrap();
        let ds = dir.path().join("d.jsonl");
        fs::write(&ds, "").unwrap();
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.validate(false).unwrap_err().exit_code(), 2);
        cfg.dataset = Some(ds);
        cfg.validate(false).unwrap();
        assert!(cfg.validate(true).is_err());
        cfg.ks = vec![5, 1];
        assert!(cfg.validate(false).is_err());
        cfg.ks = vec![1];
        cfg.alphas = vec![0.4];
        cfg.validate(false).unwrap();
        cfg.provider.kind = ProviderChoice::Remote;
        assert!(cfg.validate(false).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<f64>("0, 0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_list::<usize>("1,x").is_err());
    }
}
