//! Output files. Every file carries a `schema_version`: JSON documents as a
//! top-level field, JSONL files on every record, CSV files as a trailing
//! column.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use patchrecall_core::eval::{EvalInstanceResult, MethodReport, PatchSizeHistogram, SweepGrid};
use patchrecall_core::fusion::HybridCandidate;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const GRID_CSV: &str = "sweep_grid.csv";
pub const METHOD_CSV: &str = "method_recall.csv";
pub const PER_INSTANCE: &str = "per_instance.jsonl";
pub const SUMMARY: &str = "summary.json";
pub const PATCH_SIZES_JSON: &str = "patch_sizes.json";
pub const PATCH_SIZES_CSV: &str = "patch_sizes.csv";
pub const HYBRID_AUDIT: &str = "hybrid_audit.jsonl";

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Pretty JSON with a trailing newline. Object keys come out sorted.
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    write(path, &text)
}

fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(&r).expect("records serialize"));
        text.push('\n');
    }
    write(path, &text)
}

pub fn grid_csv(grid: &SweepGrid) -> String {
    let mut out = String::from("alpha,k,recall,schema_version\n");
    for (i, alpha) in grid.alphas.iter().enumerate() {
        for (j, k) in grid.ks.iter().enumerate() {
            writeln!(out, "{alpha},{k},{},{SCHEMA_VERSION}", grid.cell(i, j)).unwrap();
        }
    }
    out
}

pub fn method_csv(reports: &[MethodReport]) -> String {
    let mut out = String::from("method,k,recall,schema_version\n");
    for r in reports {
        for (k, recall) in r.ks.iter().zip(&r.recall) {
            writeln!(out, "{},{k},{recall},{SCHEMA_VERSION}", r.method).unwrap();
        }
    }
    out
}

pub fn write_grid_csv(dir: &Path, grid: &SweepGrid) -> Result<()> {
    write(&dir.join(GRID_CSV), &grid_csv(grid))
}

pub fn write_method_csv(dir: &Path, reports: &[MethodReport]) -> Result<()> {
    write(&dir.join(METHOD_CSV), &method_csv(reports))
}

#[derive(Serialize)]
struct Versioned<'a, T> {
    schema_version: u32,
    #[serde(flatten)]
    record: &'a T,
}

pub fn write_per_instance(dir: &Path, reports: &[MethodReport]) -> Result<()> {
    let records =
        reports
            .iter()
            .flat_map(|r| r.per_instance.iter())
            .map(|record: &EvalInstanceResult| Versioned {
                schema_version: SCHEMA_VERSION,
                record,
            });
    write_jsonl(&dir.join(PER_INSTANCE), records)
}

#[derive(Serialize)]
struct AuditRecord<'a> {
    schema_version: u32,
    instance_id: &'a str,
    rank: usize,
    #[serde(flatten)]
    candidate: &'a HybridCandidate,
}

pub fn write_audit(dir: &Path, instance_id: &str, candidates: &[HybridCandidate]) -> Result<()> {
    write_jsonl(
        &dir.join(HYBRID_AUDIT),
        candidates
            .iter()
            .enumerate()
            .map(|(i, candidate)| AuditRecord {
                schema_version: SCHEMA_VERSION,
                instance_id,
                rank: i + 1,
                candidate,
            }),
    )
}

pub fn histogram_json(hist: &PatchSizeHistogram, split: &str) -> Value {
    let buckets: serde_json::Map<String, Value> = hist
        .buckets
        .iter()
        .map(|(files, count)| (files.to_string(), json!(count)))
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "split": split,
        "total": hist.total,
        "buckets": buckets,
        "single_file_fraction": hist.single_file_fraction(),
        "max_files": hist.max_files(),
    })
}

pub fn histogram_csv(hist: &PatchSizeHistogram) -> String {
    let mut out = String::from("files,count,schema_version\n");
    for (files, count) in &hist.buckets {
        writeln!(out, "{files},{count},{SCHEMA_VERSION}").unwrap();
    }
    out
}

pub fn write_histogram(dir: &Path, hist: &PatchSizeHistogram, split: &str) -> Result<()> {
    write_json(&dir.join(PATCH_SIZES_JSON), &histogram_json(hist, split))?;
    write(&dir.join(PATCH_SIZES_CSV), &histogram_csv(hist))
}

/// A method report without its per-instance records.
pub fn method_summary(r: &MethodReport) -> Value {
    json!({
        "method": r.method,
        "ks": r.ks,
        "recall": r.recall,
        "complete_hit_rate": r.complete_hit_rate,
        "instance_count": r.instance_count,
        "skipped": r.skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn grid_rows_in_order() {
        let grid = SweepGrid {
            alphas: vec![0.0, 0.5],
            ks: vec![1, 2],
            recall: vec![vec![0.25, 0.5], vec![1.0, 1.0]],
            instance_count: 2,
            skipped: vec![],
        };
        assert_eq!(
            grid_csv(&grid),
            "alpha,k,recall,schema_version\n0,1,0.25,1\n0,2,0.5,1\n0.5,1,1,1\n0.5,2,1,1\n"
        );
    }

    #[test]
    fn histogram_output() {
        let hist = PatchSizeHistogram {
            buckets: BTreeMap::from([(1, 2), (3, 1)]),
            total: 3,
        };
        assert_eq!(
            histogram_csv(&hist),
            "files,count,schema_version\n1,2,1\n3,1,1\n"
        );
        let v = histogram_json(&hist, "verified");
        assert_eq!(v["total"], 3);
        assert_eq!(v["buckets"]["1"], 2);
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
    }
}
