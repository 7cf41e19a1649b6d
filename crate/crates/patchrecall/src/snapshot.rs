//! Reading repository checkouts into [`RepoSnapshot`]s and resolving which
//! checkout belongs to which instance.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use patchrecall_core::corpus::RepoSnapshot;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_FILE_BYTES: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnapshotOptions {
    pub include: Vec<String>,
    pub max_file_bytes: u64,
    /// Replace invalid UTF-8 instead of skipping the file.
    pub lossy: bool,
}

impl Default for SnapshotOptions {
    fn default() -> Self {
        SnapshotOptions {
            include: vec![String::from("**/*.py")],
            max_file_bytes: DEFAULT_MAX_FILE_BYTES,
            lossy: false,
        }
    }
}

/// Files left out of a snapshot, by reason.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SnapshotReport {
    pub skipped_binary: usize,
    pub skipped_large: usize,
}

impl SnapshotReport {
    pub fn warnings(&self) -> usize {
        self.skipped_binary + self.skipped_large
    }
}

fn glob_set(patterns: &[String]) -> Result<GlobSet> {
    if patterns.is_empty() {
        return Err(Error::Config(String::from(
            "include globs must be non-empty",
        )));
    }
    let mut builder = GlobSetBuilder::new();
    for p in patterns {
        let glob = Glob::new(p).map_err(|e| Error::Config(format!("bad glob {p:?}: {e}")))?;
        builder.add(glob);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("bad include globs: {e}")))
}

/// Walks `root` and collects every regular file matching `options.include`
/// whose content is text. `.git` directories are not entered and symlinks are
/// not followed. Paths are taken relative to `root`.
pub fn snapshot_repository(
    root: &Path,
    repo_id: &str,
    commit: &str,
    options: &SnapshotOptions,
) -> Result<(RepoSnapshot, SnapshotReport)> {
    let meta = fs::metadata(root).map_err(|e| Error::io(root, e))?;
    if !meta.is_dir() {
        return Err(Error::Unresolvable {
            instance: repo_id.to_string(),
            reason: format!("{} is not a directory", root.display()),
        });
    }
    let globs = glob_set(&options.include)?;
    let mut snapshot = RepoSnapshot::new(repo_id, commit);
    let mut report = SnapshotReport::default();

    let walker = WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || e.file_name() != ".git");
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e
                .path()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| root.to_path_buf());
            Error::io(path, e.into())
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walkdir yields paths under its root");
        let Some(rel_str) = rel.to_str() else {
            report.skipped_binary += 1;
            continue;
        };
        let rel_str = rel_str.replace(std::path::MAIN_SEPARATOR, "/");
        if !globs.is_match(&rel_str) {
            continue;
        }
        let len = entry
            .metadata()
            .map_err(|e| Error::io(entry.path(), e.into()))?
            .len();
        if len > options.max_file_bytes {
            log::warn!("skipping {rel_str}: {len} bytes exceeds the size cap");
            report.skipped_large += 1;
            continue;
        }
        let bytes = fs::read(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
        let text = match String::from_utf8(bytes) {
            Ok(t) if !t.contains('\0') => t,
            Ok(_) => {
                log::warn!("skipping {rel_str}: contains NUL bytes");
                report.skipped_binary += 1;
                continue;
            }
            Err(e) if options.lossy => String::from_utf8_lossy(e.as_bytes()).into_owned(),
            Err(_) => {
                log::warn!("skipping {rel_str}: not valid UTF-8");
                report.skipped_binary += 1;
                continue;
            }
        };
        snapshot.insert(&rel_str, text).map_err(|e| Error::Format {
            path: entry.path().to_path_buf(),
            message: e.to_string(),
        })?;
    }
    if snapshot.is_empty() {
        return Err(Error::EmptyCorpus(root.to_path_buf()));
    }
    Ok((snapshot, report))
}

/// Where instance checkouts live: either a manifest file mapping instance
/// ids to directories (relative entries resolve against the manifest's
/// directory) or a directory holding one subdirectory per instance id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SnapshotSource {
    Manifest(BTreeMap<String, PathBuf>),
    PerInstanceDir(PathBuf),
}

impl SnapshotSource {
    pub fn open(path: &Path) -> Result<Self> {
        let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
        if meta.is_dir() {
            return Ok(SnapshotSource::PerInstanceDir(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: BTreeMap<String, PathBuf> =
            serde_json::from_str(&text).map_err(|e| Error::Format {
                path: path.to_path_buf(),
                message: format!("snapshot manifest must map instance ids to paths: {e}"),
            })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(SnapshotSource::Manifest(
            raw.into_iter()
                .map(|(id, p)| {
                    let p = if p.is_absolute() { p } else { base.join(p) };
                    (id, p)
                })
                .collect(),
        ))
    }

    /// The checkout directory for `instance_id`, if one is configured and
    /// exists.
    pub fn resolve(&self, instance_id: &str) -> std::result::Result<PathBuf, String> {
        let dir = match self {
            SnapshotSource::Manifest(map) => map
                .get(instance_id)
                .cloned()
                .ok_or_else(|| String::from("no manifest entry"))?,
            SnapshotSource::PerInstanceDir(root) => root.join(instance_id),
        };
        if dir.is_dir() {
            Ok(dir)
        } else {
            Err(format!("{} does not exist", dir.display()))
        }
    }
}

/// Writes a manifest mapping instance ids to directories.
pub fn write_manifest(path: &Path, entries: &BTreeMap<String, PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(entries).expect("paths serialize");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
