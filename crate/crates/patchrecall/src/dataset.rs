//! Line-delimited benchmark records.
//!
//! Each non-blank line is a JSON object with string fields `instance_id`,
//! `repo`, `base_commit`, `problem_statement` and `patch`, and optionally
//! `split` (`"verified"` or `"unverified"`). A sidecar file listing one
//! verified instance id per line may define the split instead; when given it
//! takes precedence over the per-record field.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use patchrecall_core::corpus::{InstanceExample, IssueRecord, PatchRecord, Split};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Reads a verified-ids sidecar: one id per line, blank lines and `#`
/// comments ignored.
pub fn load_verified_ids(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

fn required<'a>(obj: &'a Map<String, Value>, field: &str) -> std::result::Result<&'a str, String> {
    match obj.get(field) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(format!("field {field} must be a string")),
        None => Err(format!("missing required field {field}")),
    }
}

fn parse_record(
    line: &str,
    verified_ids: Option<&BTreeSet<String>>,
) -> std::result::Result<InstanceExample, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("record is not a JSON object")?;
    let id = required(obj, "instance_id")?;
    let repo = required(obj, "repo")?;
    let commit = required(obj, "base_commit")?;
    let text = required(obj, "problem_statement")?;
    let diff = required(obj, "patch")?;

    let split = match verified_ids {
        Some(ids) => {
            if ids.contains(id) {
                Split::Verified
            } else {
                Split::Unverified
            }
        }
        None => match obj.get("split") {
            Some(Value::String(s)) => {
                Split::parse(s).ok_or_else(|| format!("unknown split {s:?}"))?
            }
            Some(_) => return Err(String::from("field split must be a string")),
            None => {
                return Err(String::from(
                    "missing split field and no verified-ids sidecar given",
                ))
            }
        },
    };

    let issue = IssueRecord::new(id, repo, commit, text).map_err(|e| e.to_string())?;
    let patch = PatchRecord::parse(id, diff).map_err(|e| e.to_string())?;
    Ok(InstanceExample::from_patch(issue, &patch, split))
}

/// Loads every record passing `split_filter`, in file order, with gold files
/// parsed from each record's patch. The first malformed record aborts the
/// load with its line number.
pub fn load_instances(
    dataset_path: &Path,
    split_filter: Option<Split>,
    verified_ids: Option<&BTreeSet<String>>,
) -> Result<Vec<InstanceExample>> {
    let text = fs::read_to_string(dataset_path).map_err(|e| Error::io(dataset_path, e))?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record_error = |message: String| Error::Record {
            path: dataset_path.to_path_buf(),
            line: i + 1,
            message,
        };
        let inst = parse_record(line, verified_ids).map_err(record_error)?;
        if !seen.insert(inst.id().to_string()) {
            return Err(record_error(format!("duplicate instance_id {}", inst.id())));
        }
        if split_filter.is_none_or(|s| s == inst.split) {
            out.push(inst);
        }
    }
    Ok(out)
}
