//! Dense retrieval: the embedding provider contract, a deterministic hashing
//! embedder, exact cosine search, history-based file scoring over past
//! issue/patch pairs, and chunked codebase retrieval.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{InstanceExample, IssueRecord, RepoSnapshot, Split};
use crate::ranking::{Method, ScoredList};
use crate::textproc::{tokenize, TokenizerConfig};
use crate::ArgumentError;

/// Allowed deviation of a provider vector's L2 norm from 1.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// Default hashing embedder width.
pub const DEFAULT_HASHING_DIM: usize = 256;

/// Default hashing seed.
pub const DEFAULT_HASHING_SEED: u64 = 0x7061_7463_6872_6563;

/// Default model identifier recorded for remote providers.
pub const DEFAULT_MODEL_ID: &str = "all-mpnet-base-v2";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DenseError {
    #[error("history pool is empty after filtering")]
    EmptyPool,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("embedding provider contract violation: {0}")]
    ProviderContractViolation(String),
    #[error(transparent)]
    Argument(#[from] ArgumentError),
    #[error("history pool item {0} is not from the unverified split")]
    VerifiedInPool(String),
}

/// A unit-length embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    /// Accepts `values` whose norm is within [`UNIT_NORM_TOLERANCE`] of 1.
    pub fn new(values: Vec<f64>) -> Result<Self, DenseError> {
        if values.is_empty() {
            return Err(DenseError::ProviderContractViolation(String::from(
                "zero-dimensional vector",
            )));
        }
        let norm = l2_norm(&values);
        if norm.is_nan() || (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(DenseError::ProviderContractViolation(format!(
                "vector norm {norm} is not 1 within {UNIT_NORM_TOLERANCE}"
            )));
        }
        Ok(EmbeddingVector { values })
    }

    /// Rescales `values` to unit length. Fails on zero or non-finite input.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self, DenseError> {
        let norm = l2_norm(&values);
        if values.is_empty() || !(norm > 0.0 && norm.is_finite()) {
            return Err(DenseError::ProviderContractViolation(String::from(
                "cannot normalize a zero or non-finite vector",
            )));
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(EmbeddingVector { values })
    }

    /// Renormalizes when the norm is within `tolerance` of 1, otherwise
    /// rejects the vector.
    pub fn renormalized_within(values: Vec<f64>, tolerance: f64) -> Result<Self, DenseError> {
        let norm = l2_norm(&values);
        if norm.is_nan() || (norm - 1.0).abs() > tolerance {
            return Err(DenseError::ProviderContractViolation(format!(
                "vector norm {norm} is not 1 within {tolerance}"
            )));
        }
        Self::normalized(values)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        dot(&self.values, &other.values)
    }
}

fn l2_norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProviderKind {
    RemoteHttp,
    PrecomputedFile,
    HashingFallback,
}

/// Where embeddings come from.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmbeddingProviderSpec {
    pub kind: ProviderKind,
    pub model_id: String,
    pub dim: usize,
    /// Endpoint URL for remote providers, file path for precomputed ones,
    /// empty for the hashing fallback.
    pub endpoint_or_path: String,
}

impl Default for EmbeddingProviderSpec {
    fn default() -> Self {
        EmbeddingProviderSpec {
            kind: ProviderKind::HashingFallback,
            model_id: String::from("hashing-fallback"),
            dim: DEFAULT_HASHING_DIM,
            endpoint_or_path: String::new(),
        }
    }
}

/// A text to embed. `id` identifies the item for providers that look
/// vectors up instead of computing them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedItem<'a> {
    pub id: &'a str,
    pub text: &'a str,
}

/// An embedding provider. Implementations return one unit vector of width
/// [`Embedder::dim`] per item, in order.
pub trait Embedder {
    fn dim(&self) -> usize;

    fn embed_raw(&self, items: &[EmbedItem<'_>]) -> Result<Vec<EmbeddingVector>, DenseError>;
}

/// Embeds `items` and checks the provider contract: one vector per item,
/// every vector of the provider's width.
pub fn embed<E: Embedder + ?Sized>(
    embedder: &E,
    items: &[EmbedItem<'_>],
) -> Result<Vec<EmbeddingVector>, DenseError> {
    if items.is_empty() {
        return Err(ArgumentError::new("nothing to embed").into());
    }
    let vectors = embedder.embed_raw(items)?;
    if vectors.len() != items.len() {
        return Err(DenseError::ProviderContractViolation(format!(
            "expected {} vectors, got {}",
            items.len(),
            vectors.len()
        )));
    }
    let dim = embedder.dim();
    if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(DenseError::ProviderContractViolation(format!(
            "expected dimension {dim}, got {}",
            v.dim()
        )));
    }
    Ok(vectors)
}

/// Feature-hashing embedder: tokens are hashed into `dim` buckets with a
/// fixed seed, counted, and the count vector is L2-normalized. Text with no
/// surviving tokens is hashed whole as a single token.
#[derive(Debug, Clone, PartialEq)]
pub struct HashingEmbedder {
    dim: usize,
    seed: u64,
    tokenizer: TokenizerConfig,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder {
            dim: DEFAULT_HASHING_DIM,
            seed: DEFAULT_HASHING_SEED,
            tokenizer: TokenizerConfig::default(),
        }
    }
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Result<Self, ArgumentError> {
        if dim == 0 {
            return Err(ArgumentError::new("embedding dimension must be positive"));
        }
        Ok(HashingEmbedder {
            dim,
            ..HashingEmbedder::default()
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn embed_text(&self, text: &str) -> EmbeddingVector {
        let mut counts = alloc::vec![0.0f64; self.dim];
        let tokens = tokenize(text, &self.tokenizer);
        if tokens.is_empty() {
            counts[self.bucket(text.trim())] += 1.0;
        } else {
            for t in &tokens {
                counts[self.bucket(t)] += 1.0;
            }
        }
        EmbeddingVector::normalized(counts).expect("hashing embedder sets at least one bucket")
    }

    fn bucket(&self, token: &str) -> usize {
        (xxhash_rust::xxh64::xxh64(token.as_bytes(), self.seed) % self.dim as u64) as usize
    }
}

impl Embedder for HashingEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_raw(&self, items: &[EmbedItem<'_>]) -> Result<Vec<EmbeddingVector>, DenseError> {
        Ok(items.iter().map(|it| self.embed_text(it.text)).collect())
    }
}

/// Row-major store of unit vectors with exhaustive cosine search.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    ids: Vec<String>,
    dim: usize,
    matrix: Vec<f64>,
}

impl VectorIndex {
    pub fn new(dim: usize) -> Result<Self, ArgumentError> {
        if dim == 0 {
            return Err(ArgumentError::new("index dimension must be positive"));
        }
        Ok(VectorIndex {
            ids: Vec::new(),
            dim,
            matrix: Vec::new(),
        })
    }

    pub fn from_rows<I>(dim: usize, rows: I) -> Result<Self, ArgumentError>
    where
        I: IntoIterator<Item = (String, EmbeddingVector)>,
    {
        let mut index = VectorIndex::new(dim)?;
        let mut seen = BTreeSet::new();
        for (id, v) in rows {
            if !seen.insert(id.clone()) {
                return Err(ArgumentError::new(format!("duplicate vector id {id}")));
            }
            index.push(id, &v)?;
        }
        Ok(index)
    }

    fn push(&mut self, id: String, v: &EmbeddingVector) -> Result<(), ArgumentError> {
        if v.dim() != self.dim {
            return Err(ArgumentError::new(format!(
                "vector for {id} has dimension {}, index has {}",
                v.dim(),
                self.dim
            )));
        }
        self.ids.push(id);
        self.matrix.extend_from_slice(v.values());
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine similarity of `query` against every row.
    pub fn similarities(&self, query: &EmbeddingVector) -> Result<Vec<f64>, ArgumentError> {
        if query.dim() != self.dim {
            return Err(ArgumentError::new(format!(
                "query dimension {} does not match index dimension {}",
                query.dim(),
                self.dim
            )));
        }
        Ok((0..self.len())
            .map(|i| dot(self.row(i), query.values()))
            .collect())
    }

    /// Top-`n` rows by cosine, ties broken by id ascending.
    pub fn nearest(
        &self,
        query: &EmbeddingVector,
        n: usize,
        method: Method,
    ) -> Result<ScoredList, ArgumentError> {
        self.nearest_where(query, n, method, |_| true)
    }

    /// [`VectorIndex::nearest`] restricted to rows whose ordinal satisfies
    /// `keep`.
    pub fn nearest_where(
        &self,
        query: &EmbeddingVector,
        n: usize,
        method: Method,
        keep: impl Fn(usize) -> bool,
    ) -> Result<ScoredList, ArgumentError> {
        if n < 1 {
            return Err(ArgumentError::new("n must be at least 1"));
        }
        let sims = self.similarities(query)?;
        let mut list = ScoredList::rank(
            method,
            sims.into_iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(i, s)| (self.ids[i].as_str(), s)),
        );
        list.truncate(n);
        Ok(list)
    }
}

/// A past issue and the files its patch modified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryItem {
    pub issue: IssueRecord,
    pub modified_files: BTreeSet<String>,
}

/// Past issue/patch pairs from the unverified split with an index over their
/// issue texts. Index ids are the items' instance ids, in item order.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryPool {
    items: Vec<HistoryItem>,
    index: VectorIndex,
}

impl HistoryPool {
    /// Embeds every instance's issue text. All instances must be unverified.
    pub fn build<E: Embedder + ?Sized>(
        instances: &[InstanceExample],
        embedder: &E,
    ) -> Result<Self, DenseError> {
        let items = Self::items_from(instances)?;
        let index = if items.is_empty() {
            VectorIndex::new(embedder.dim())?
        } else {
            let embed_items: Vec<EmbedItem<'_>> = items
                .iter()
                .map(|it| EmbedItem {
                    id: &it.issue.instance_id,
                    text: &it.issue.text,
                })
                .collect();
            let vectors = embed(embedder, &embed_items)?;
            VectorIndex::from_rows(
                embedder.dim(),
                items
                    .iter()
                    .map(|it| it.issue.instance_id.clone())
                    .zip(vectors),
            )?
        };
        Ok(HistoryPool { items, index })
    }

    fn items_from(instances: &[InstanceExample]) -> Result<Vec<HistoryItem>, DenseError> {
        instances
            .iter()
            .map(|inst| {
                if inst.split != Split::Unverified {
                    return Err(DenseError::VerifiedInPool(String::from(inst.id())));
                }
                Ok(HistoryItem {
                    issue: inst.issue.clone(),
                    modified_files: inst.gold_files().clone(),
                })
            })
            .collect()
    }

    pub fn items(&self) -> &[HistoryItem] {
        &self.items
    }

    pub fn index(&self) -> &VectorIndex {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HistoryOptions {
    /// Number of nearest past issues to draw files from; clamped to the pool.
    pub n_issues: usize,
    /// Only consult past issues of the query's repository.
    pub same_repo_only: bool,
}

impl Default for HistoryOptions {
    fn default() -> Self {
        HistoryOptions {
            n_issues: 10,
            same_repo_only: true,
        }
    }
}

/// The nearest past issues for `issue`, excluding the issue itself.
pub fn nearest_issues<E: Embedder + ?Sized>(
    pool: &HistoryPool,
    issue: &IssueRecord,
    embedder: &E,
    options: &HistoryOptions,
) -> Result<ScoredList, DenseError> {
    if options.n_issues < 1 {
        return Err(ArgumentError::new("n_issues must be at least 1").into());
    }
    let eligible = |i: usize| {
        let item = &pool.items[i].issue;
        item.instance_id != issue.instance_id
            && (!options.same_repo_only || item.repo_id == issue.repo_id)
    };
    if !(0..pool.len()).any(eligible) {
        return Err(DenseError::EmptyPool);
    }
    let query = embed(
        embedder,
        &[EmbedItem {
            id: &issue.instance_id,
            text: &issue.text,
        }],
    )?
    .remove(0);
    Ok(pool
        .index
        .nearest_where(&query, options.n_issues, Method::StHistory, eligible)?)
}

/// History-based file scores: each file touched by one of the nearest past
/// issues scores the sum of those issues' cosine similarities to the query.
pub fn history_retrieve<E: Embedder + ?Sized>(
    pool: &HistoryPool,
    issue: &IssueRecord,
    embedder: &E,
    options: &HistoryOptions,
) -> Result<ScoredList, DenseError> {
    let neighbors = nearest_issues(pool, issue, embedder, options)?;
    let by_id: BTreeMap<&str, &HistoryItem> = pool
        .items
        .iter()
        .map(|it| (it.issue.instance_id.as_str(), it))
        .collect();
    let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
    for hit in neighbors.entries() {
        for f in &by_id[hit.docid.as_str()].modified_files {
            *scores.entry(f.as_str()).or_insert(0.0) += hit.score;
        }
    }
    Ok(ScoredList::rank(Method::StHistory, scores))
}

/// Drops entries whose docid is not a file of `snapshot`.
pub fn prune_to_snapshot(list: &ScoredList, snapshot: &RepoSnapshot) -> ScoredList {
    ScoredList::rank(
        list.method,
        list.entries()
            .iter()
            .filter(|e| snapshot.contains(&e.docid))
            .map(|e| (e.docid.as_str(), e.score)),
    )
}

/// Fixed-size character windows for embedding whole files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ChunkingConfig {
    pub window: usize,
    pub overlap: usize,
}

impl Default for ChunkingConfig {
    fn default() -> Self {
        ChunkingConfig {
            window: 2000,
            overlap: 200,
        }
    }
}

impl ChunkingConfig {
    pub fn validate(&self) -> Result<(), ArgumentError> {
        if self.window == 0 || self.overlap >= self.window {
            return Err(ArgumentError::new(
                "chunk window must be positive and larger than the overlap",
            ));
        }
        Ok(())
    }

    /// Splits `text` into windows of `window` characters starting every
    /// `window - overlap` characters; the last window ends at the text end.
    /// Empty text has no chunks.
    pub fn chunks<'a>(&self, text: &'a str) -> Vec<&'a str> {
        let bounds: Vec<usize> = text
            .char_indices()
            .map(|(i, _)| i)
            .chain(core::iter::once(text.len()))
            .collect();
        let n_chars = bounds.len() - 1;
        if n_chars == 0 {
            return Vec::new();
        }
        let step = self.window - self.overlap;
        let mut out = Vec::new();
        let mut start = 0;
        loop {
            let end = (start + self.window).min(n_chars);
            out.push(&text[bounds[start]..bounds[end]]);
            if end == n_chars {
                break;
            }
            start += step;
        }
        out
    }
}

/// Chunk embeddings of one snapshot; a file scores its best chunk's cosine.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebaseIndex {
    files: Vec<String>,
    chunk_owner: Vec<usize>,
    index: VectorIndex,
}

/// Identifier used for a file chunk when asking an id-keyed provider.
pub fn chunk_id(snapshot: &RepoSnapshot, path: &str, chunk: usize) -> String {
    format!(
        "{}@{}:{}#{}",
        snapshot.repo_id, snapshot.commit, path, chunk
    )
}

impl CodebaseIndex {
    pub fn build<E: Embedder + ?Sized>(
        snapshot: &RepoSnapshot,
        embedder: &E,
        chunking: &ChunkingConfig,
    ) -> Result<Self, DenseError> {
        chunking.validate()?;
        if snapshot.is_empty() {
            return Err(DenseError::EmptyCorpus);
        }
        let mut files = Vec::new();
        let mut chunk_owner = Vec::new();
        let mut ids = Vec::new();
        let mut texts = Vec::new();
        for (path, content) in snapshot.files() {
            let chunks = chunking.chunks(content);
            if chunks.is_empty() {
                continue;
            }
            let owner = files.len();
            files.push(path.clone());
            for (i, c) in chunks.into_iter().enumerate() {
                chunk_owner.push(owner);
                ids.push(chunk_id(snapshot, path, i));
                texts.push(c);
            }
        }
        let index = if ids.is_empty() {
            VectorIndex::new(embedder.dim())?
        } else {
            let items: Vec<EmbedItem<'_>> = ids
                .iter()
                .zip(&texts)
                .map(|(id, text)| EmbedItem { id, text })
                .collect();
            let vectors = embed(embedder, &items)?;
            VectorIndex::from_rows(embedder.dim(), ids.into_iter().zip(vectors))?
        };
        Ok(CodebaseIndex {
            files,
            chunk_owner,
            index,
        })
    }

    pub fn chunk_count(&self) -> usize {
        self.index.len()
    }

    /// Files ranked by their maximum chunk cosine with `query`.
    pub fn retrieve(&self, query: &EmbeddingVector, k: usize) -> Result<ScoredList, DenseError> {
        if k < 1 {
            return Err(ArgumentError::new("k must be at least 1").into());
        }
        let sims = self.index.similarities(query)?;
        let mut best: Vec<Option<f64>> = alloc::vec![None; self.files.len()];
        for (chunk, s) in sims.into_iter().enumerate() {
            let slot = &mut best[self.chunk_owner[chunk]];
            *slot = Some(slot.map_or(s, |b: f64| b.max(s)));
        }
        let mut list = ScoredList::rank(
            Method::StCodebase,
            self.files
                .iter()
                .zip(best)
                .filter_map(|(f, s)| s.map(|s| (f.as_str(), s))),
        );
        list.truncate(k);
        Ok(list)
    }
}

/// Embeds the snapshot in chunks and ranks files against the issue text.
pub fn dense_codebase_retrieve<E: Embedder + ?Sized>(
    snapshot: &RepoSnapshot,
    issue: &IssueRecord,
    embedder: &E,
    k: usize,
    chunking: &ChunkingConfig,
) -> Result<ScoredList, DenseError> {
    if k < 1 {
        return Err(ArgumentError::new("k must be at least 1").into());
    }
    let index = CodebaseIndex::build(snapshot, embedder, chunking)?;
    let query = embed(
        embedder,
        &[EmbedItem {
            id: &issue.instance_id,
            text: &issue.text,
        }],
    )?
    .remove(0);
    index.retrieve(&query, k)
}
