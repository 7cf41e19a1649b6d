//! Embedding providers backed by files and by the HTTP embedding service.
//!
//! Wire format (JSON over HTTP/1.1):
//!
//! * `POST {endpoint}/embed` with `{"model": ..., "texts": [...]}` answers
//!   `{"model": ..., "dim": n, "vectors": [[...], ...]}`, one unit vector per
//!   text in request order.
//! * `GET {endpoint}/health` answers `{"status": "ok", "model": ..., "dim": n}`.
//!
//! The precomputed-embeddings file holds one `{"id": ..., "vector": [...]}`
//! object per line.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use patchrecall_core::dense::{
    DenseError, EmbedItem, Embedder, EmbeddingProviderSpec, EmbeddingVector, HashingEmbedder,
    ProviderKind, DEFAULT_MODEL_ID,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable consulted for the remote endpoint.
pub const ENDPOINT_ENV: &str = "PATCHRECALL_ENDPOINT";

/// Texts per `/embed` request; the service rejects larger batches.
pub const DEFAULT_BATCH_CAP: usize = 64;

/// Tolerance within which file vectors are silently renormalized.
pub const FILE_RENORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedRequest {
    #[serde(default = "default_model")]
    pub model: String,
    pub texts: Vec<String>,
}

fn default_model() -> String {
    DEFAULT_MODEL_ID.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub model: String,
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub model: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecomputedRecord {
    pub id: String,
    pub vector: Vec<f64>,
}

/// Checks a decoded `/embed` response against the request that produced it
/// and converts the vectors.
pub fn validate_response(
    response: EmbedResponse,
    expected_model: &str,
    expected_dim: usize,
    n_texts: usize,
) -> std::result::Result<Vec<EmbeddingVector>, DenseError> {
    let violation = |m: String| DenseError::ProviderContractViolation(m);
    if response.model != expected_model {
        return Err(violation(format!(
            "service answered with model {:?}, expected {expected_model:?}",
            response.model
        )));
    }
    if response.dim != expected_dim {
        return Err(violation(format!(
            "service reported dim {}, expected {expected_dim}",
            response.dim
        )));
    }
    if response.vectors.len() != n_texts {
        return Err(violation(format!(
            "sent {n_texts} texts, received {} vectors",
            response.vectors.len()
        )));
    }
    response
        .vectors
        .into_iter()
        .map(|v| {
            if v.len() != expected_dim {
                return Err(violation(format!(
                    "vector of length {} in a dim {expected_dim} response",
                    v.len()
                )));
            }
            EmbeddingVector::new(v)
        })
        .collect()
}

/// Client for the embedding service.
#[derive(Debug)]
pub struct RemoteEmbedder {
    agent: ureq::Agent,
    base: String,
    model: String,
    dim: usize,
    batch_cap: usize,
    retries: usize,
}

fn unavailable(e: impl std::fmt::Display) -> DenseError {
    DenseError::ProviderUnavailable(e.to_string())
}

impl RemoteEmbedder {
    /// Probes `/health` and fixes the dimension the service declares there.
    pub fn connect(endpoint: &str, model: &str) -> std::result::Result<Self, DenseError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        let base = endpoint.trim_end_matches('/').to_string();
        let health: HealthResponse = agent
            .get(format!("{base}/health"))
            .call()
            .map_err(unavailable)?
            .body_mut()
            .read_json()
            .map_err(|e| DenseError::ProviderContractViolation(format!("bad /health body: {e}")))?;
        if health.status != "ok" {
            return Err(unavailable(format!("service status {:?}", health.status)));
        }
        if health.model != model {
            return Err(DenseError::ProviderContractViolation(format!(
                "service serves {:?}, configured model is {model:?}",
                health.model
            )));
        }
        if health.dim == 0 {
            return Err(DenseError::ProviderContractViolation(String::from(
                "service declared dim 0",
            )));
        }
        Ok(RemoteEmbedder {
            agent,
            base,
            model: model.to_string(),
            dim: health.dim,
            batch_cap: DEFAULT_BATCH_CAP,
            retries: 2,
        })
    }

    pub fn with_batch_cap(mut self, cap: usize) -> Self {
        self.batch_cap = cap.max(1);
        self
    }

    fn embed_batch(&self, texts: &[&str]) -> std::result::Result<Vec<EmbeddingVector>, DenseError> {
        let request = EmbedRequest {
            model: self.model.clone(),
            texts: texts.iter().map(|t| t.to_string()).collect(),
        };
        let mut attempt = 0;
        let response: EmbedResponse = loop {
            let sent = self
                .agent
                .post(format!("{}/embed", self.base))
                .send_json(&request);
            match sent {
                Ok(mut r) => {
                    break r.body_mut().read_json().map_err(|e| {
                        DenseError::ProviderContractViolation(format!("bad /embed body: {e}"))
                    })?
                }
                Err(ureq::Error::StatusCode(503)) | Err(ureq::Error::Io(_))
                    if attempt < self.retries =>
                {
                    attempt += 1;
                    log::warn!("embedding request failed, retry {attempt}/{}", self.retries);
                    std::thread::sleep(Duration::from_millis(200 * attempt as u64));
                }
                Err(e) => return Err(unavailable(e)),
            }
        };
        validate_response(response, &self.model, self.dim, texts.len())
    }
}

impl Embedder for RemoteEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_raw(
        &self,
        items: &[EmbedItem<'_>],
    ) -> std::result::Result<Vec<EmbeddingVector>, DenseError> {
        let mut out = Vec::with_capacity(items.len());
        for batch in items.chunks(self.batch_cap) {
            let texts: Vec<&str> = batch.iter().map(|it| it.text).collect();
            out.extend(self.embed_batch(&texts)?);
        }
        Ok(out)
    }
}

/// Vectors looked up by item id from a precomputed-embeddings file.
#[derive(Debug, Clone)]
pub struct PrecomputedEmbedder {
    dim: usize,
    vectors: HashMap<String, EmbeddingVector>,
}

impl PrecomputedEmbedder {
    /// Loads `path`. Every vector must have width `dim` (or, when `dim` is 0,
    /// the width of the first record) and a norm within 1e-3 of 1.
    pub fn load(path: &Path, dim: usize) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut dim = dim;
        let mut vectors = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::Record {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let rec: PrecomputedRecord =
                serde_json::from_str(line).map_err(|e| bad(format!("invalid record: {e}")))?;
            if dim == 0 {
                dim = rec.vector.len();
            }
            if rec.vector.len() != dim {
                return Err(bad(format!(
                    "vector for {} has length {}, expected {dim}",
                    rec.id,
                    rec.vector.len()
                )));
            }
            let v = EmbeddingVector::renormalized_within(rec.vector, FILE_RENORM_TOLERANCE)
                .map_err(|e| bad(e.to_string()))?;
            if vectors.insert(rec.id.clone(), v).is_some() {
                return Err(bad(format!("duplicate id {}", rec.id)));
            }
        }
        if vectors.is_empty() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: String::from("no embeddings in file"),
            });
        }
        Ok(PrecomputedEmbedder { dim, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl Embedder for PrecomputedEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_raw(
        &self,
        items: &[EmbedItem<'_>],
    ) -> std::result::Result<Vec<EmbeddingVector>, DenseError> {
        items
            .iter()
            .map(|it| {
                self.vectors
                    .get(it.id)
                    .cloned()
                    .ok_or_else(|| unavailable(format!("no precomputed vector for {}", it.id)))
            })
            .collect()
    }
}

/// Writes vectors in the precomputed-embeddings format, in the given order.
pub fn write_precomputed<'a, I>(path: &Path, records: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, &'a EmbeddingVector)>,
{
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (id, v) in records {
        let rec = PrecomputedRecord {
            id: id.to_string(),
            vector: v.values().to_vec(),
        };
        let line = serde_json::to_string(&rec).expect("finite vectors serialize");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A boxed provider usable from worker threads.
pub type DynEmbedder = Box<dyn Embedder + Send + Sync>;

/// Instantiates the provider described by `spec`. Remote providers are
/// probed immediately so a dead endpoint fails before any work starts.
pub fn provider_from_spec(spec: &EmbeddingProviderSpec) -> Result<DynEmbedder> {
    match spec.kind {
        ProviderKind::HashingFallback => Ok(Box::new(HashingEmbedder::new(spec.dim)?)),
        ProviderKind::PrecomputedFile => {
            if spec.endpoint_or_path.is_empty() {
                return Err(Error::Config(String::from(
                    "the precomputed provider needs an embeddings file",
                )));
            }
            let path = PathBuf::from(&spec.endpoint_or_path);
            Ok(Box::new(PrecomputedEmbedder::load(&path, spec.dim)?))
        }
        ProviderKind::RemoteHttp => {
            if spec.endpoint_or_path.is_empty() {
                return Err(Error::Config(format!(
                    "the remote provider needs --endpoint or {ENDPOINT_ENV}"
                )));
            }
            let remote = RemoteEmbedder::connect(&spec.endpoint_or_path, &spec.model_id)?;
            if spec.dim != 0 && remote.dim() != spec.dim {
                return Err(DenseError::ProviderContractViolation(format!(
                    "service dim {} differs from configured dim {}",
                    remote.dim(),
                    spec.dim
                ))
                .into());
            }
            Ok(Box::new(remote))
        }
    }
}
