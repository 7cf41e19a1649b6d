//! Synthetic benchmark suites written to disk in the regular input formats.
//!
//! The complementary-streams suite is built so BM25 and history retrieval
//! each find exactly one of the two gold files of every instance and bury
//! the other under near-miss distractors:
//!
//! * `g1` shares every issue term; distractors `d1..dm` share nested,
//!   shrinking prefixes of them, so BM25 ranks `g1, d1, d2, ...`.
//! * `g2` shares no term. Past issue `u0` has exactly the instance's issue
//!   text and touched `g2`; past issues `uj` hold shrinking prefixes of it
//!   and touched `hj`, so history ranks `g2, h1, h2, ...`.
//!
//! Fused near alpha = 0.5 both gold files lead; at either endpoint one of
//! them falls below the distractors of the stream that is kept.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use patchrecall_core::dense::{EmbeddingVector, HashingEmbedder};
use patchrecall_core::textproc::{is_stopword, tokenize, TokenizerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::embeddings::write_precomputed;
use crate::error::{Error, Result};
use crate::snapshot::write_manifest;

/// Paths of a generated suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureLayout {
    pub dataset: PathBuf,
    pub snapshots: PathBuf,
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HybridFixtureSpec {
    pub instances: usize,
    pub query_terms: usize,
    /// Distractors per stream; the deepest shares `query_terms - distractors`
    /// terms with the issue.
    pub distractors: usize,
    /// Tokens per file.
    pub file_len: usize,
    pub seed: u64,
}

impl Default for HybridFixtureSpec {
    fn default() -> Self {
        HybridFixtureSpec {
            instances: 20,
            query_terms: 12,
            distractors: 9,
            file_len: 40,
            seed: 7,
        }
    }
}

pub const HYBRID_REPO: &str = "fixture/hybrid";
pub const HYBRID_COMMIT: &str = "f0f0f0";

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn diff_for(files: &[String]) -> String {
    files
        .iter()
        .map(|f| format!("diff --git a/{f} b/{f}\n--- a/{f}\n+++ b/{f}\n@@ -1 +1 @@\n-old\n+new\n"))
        .collect()
}

fn record(id: &str, repo: &str, commit: &str, text: &str, gold: &[String], split: &str) -> String {
    json!({
        "instance_id": id,
        "repo": repo,
        "base_commit": commit,
        "problem_statement": text,
        "patch": diff_for(gold),
        "split": split,
    })
    .to_string()
}

/// Unique random lowercase words that tokenize to themselves.
struct Words {
    rng: ChaCha8Rng,
    used: BTreeSet<String>,
    tokenizer: TokenizerConfig,
}

impl Words {
    fn new(seed: u64) -> Self {
        Words {
            rng: ChaCha8Rng::seed_from_u64(seed),
            used: BTreeSet::new(),
            tokenizer: TokenizerConfig::default(),
        }
    }

    fn fresh(&mut self) -> String {
        loop {
            let len = self.rng.random_range(6..=9);
            let w: String = (0..len)
                .map(|_| (b'a' + self.rng.random_range(0..26u8)) as char)
                .collect();
            if !is_stopword(&w)
                && tokenize(&w, &self.tokenizer) == [w.clone()]
                && self.used.insert(w.clone())
            {
                return w;
            }
        }
    }

    /// `n` fresh words landing in distinct buckets of the default hashing
    /// embedder, so cosines between subsets are exact set ratios.
    fn distinct_buckets(&mut self, n: usize) -> Vec<String> {
        let embedder = HashingEmbedder::default();
        let mut buckets = BTreeSet::new();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let w = self.fresh();
            let v = embedder.embed_text(&w);
            let bucket = v
                .values()
                .iter()
                .position(|&x| x > 0.0)
                .expect("one-token text sets one bucket");
            if buckets.insert(bucket) {
                out.push(w);
            }
        }
        out
    }

    fn filler(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.fresh()).collect()
    }
}

fn write_file(root: &Path, rel: &str, text: &str) -> Result<()> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io(parent))?;
    }
    fs::write(&path, text).map_err(io(&path))
}

fn lines(records: &[String]) -> String {
    let mut s = records.join("\n");
    s.push('\n');
    s
}

/// Writes the complementary-streams suite under `dir`: `dataset.jsonl`, one
/// shared checkout under `repo/` and a manifest `snapshots.json` pointing
/// every verified instance at it.
pub fn write_hybrid_fixture(dir: &Path, spec: &HybridFixtureSpec) -> Result<FixtureLayout> {
    if spec.distractors >= spec.query_terms
        || spec.file_len < spec.query_terms
        || spec.instances == 0
    {
        return Err(Error::Config(String::from(
            "fixture needs instances > 0 and distractors < query_terms <= file_len",
        )));
    }
    let mut words = Words::new(spec.seed);
    let repo_dir = dir.join("repo");
    let mut records = Vec::new();
    let mut manifest = BTreeMap::new();
    for i in 0..spec.instances {
        let id = format!("hybrid-{i:03}");
        let q = words.distinct_buckets(spec.query_terms);
        let pad = |words: &mut Words, shared: &[String]| {
            let mut toks = shared.to_vec();
            toks.extend(words.filler(spec.file_len - shared.len()));
            toks.join(" ") + "\n"
        };
        let g1 = format!("pkg{i:03}/lexical_target.py");
        let g2 = format!("pkg{i:03}/semantic_target.py");
        write_file(&repo_dir, &g1, &pad(&mut words, &q))?;
        write_file(&repo_dir, &g2, &pad(&mut words, &[]))?;
        for j in 1..=spec.distractors {
            let shared = &q[..spec.query_terms - j];
            write_file(
                &repo_dir,
                &format!("pkg{i:03}/lexical_near_{j}.py"),
                &pad(&mut words, shared),
            )?;
            write_file(
                &repo_dir,
                &format!("pkg{i:03}/history_near_{j}.py"),
                &pad(&mut words, &[]),
            )?;
        }
        records.push(record(
            &id,
            HYBRID_REPO,
            HYBRID_COMMIT,
            &q.join(" "),
            &[g1.clone(), g2.clone()],
            "verified",
        ));
        manifest.insert(id.clone(), PathBuf::from("repo"));
        for j in 0..=spec.distractors {
            let touched = if j == 0 {
                g2.clone()
            } else {
                format!("pkg{i:03}/history_near_{j}.py")
            };
            records.push(record(
                &format!("{id}-past-{j}"),
                HYBRID_REPO,
                HYBRID_COMMIT,
                &q[..spec.query_terms - j].join(" "),
                &[touched],
                "unverified",
            ));
        }
    }
    let dataset = dir.join("dataset.jsonl");
    fs::write(&dataset, lines(&records)).map_err(io(&dataset))?;
    let snapshots = dir.join("snapshots.json");
    write_manifest(&snapshots, &manifest)?;
    Ok(FixtureLayout {
        dataset,
        snapshots,
        embeddings: None,
    })
}

/// Writes a suite whose gold files share no term with their issue but whose
/// precomputed embeddings match it exactly, while a decoy file repeats the
/// issue's words. Each instance has its own repository under `repos/`.
pub fn write_semantic_fixture(dir: &Path, instances: usize, seed: u64) -> Result<FixtureLayout> {
    if instances == 0 {
        return Err(Error::Config(String::from(
            "fixture needs at least one instance",
        )));
    }
    let mut words = Words::new(seed);
    let dim = instances + 1;
    let basis = |i: usize| {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        EmbeddingVector::new(v).expect("basis vectors are unit")
    };
    let mut records = Vec::new();
    let mut manifest = BTreeMap::new();
    let mut vectors: Vec<(String, EmbeddingVector)> = Vec::new();
    for i in 0..instances {
        let id = format!("semantic-{i:03}");
        let repo = format!("fixture/semantic{i}");
        let commit = format!("c{i}");
        let repo_dir = dir.join("repos").join(&id);
        let issue_words = words.filler(8);
        let gold = "core/handler.py";
        write_file(&repo_dir, gold, &(words.filler(20).join(" ") + "\n"))?;
        write_file(&repo_dir, "docs/notes.py", &(issue_words.join(" ") + "\n"))?;
        write_file(
            &repo_dir,
            "util/misc.py",
            &(words.filler(20).join(" ") + "\n"),
        )?;
        records.push(record(
            &id,
            &repo,
            &commit,
            &issue_words.join(" "),
            &[gold.to_string()],
            "verified",
        ));
        manifest.insert(id.clone(), PathBuf::from("repos").join(&id));
        vectors.push((id.clone(), basis(i)));
        vectors.push((format!("{repo}@{commit}:{gold}#0"), basis(i)));
        vectors.push((format!("{repo}@{commit}:docs/notes.py#0"), basis(instances)));
        vectors.push((format!("{repo}@{commit}:util/misc.py#0"), basis(instances)));
    }
    let dataset = dir.join("dataset.jsonl");
    fs::write(&dataset, lines(&records)).map_err(io(&dataset))?;
    let snapshots = dir.join("snapshots.json");
    write_manifest(&snapshots, &manifest)?;
    let embeddings = dir.join("embeddings.jsonl");
    write_precomputed(&embeddings, vectors.iter().map(|(id, v)| (id.as_str(), v)))?;
    Ok(FixtureLayout {
        dataset,
        snapshots,
        embeddings: Some(embeddings),
    })
}
