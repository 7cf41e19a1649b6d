//! Line-based on-disk format for inverted indexes.
//!
//! ```text
//! PATCHRECALL-INDEX 1
//! snapshot <json repo> <json commit>
//! tokenizer <json TokenizerConfig>
//! docs <n>
//! <json docid> <length>            (n lines, in ordinal order)
//! terms <m>
//! <json term> <doc>:<tf> ...       (m lines, terms ascending)
//! ```
//!
//! Derived statistics are recomputed on load, so a tampered file either
//! fails validation or yields exactly the index its postings describe.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use patchrecall_core::sparse::{InvertedIndex, Posting};
use patchrecall_core::textproc::TokenizerConfig;

use crate::error::{Error, Result};

pub const MAGIC: &str = "PATCHRECALL-INDEX 1";

/// A persisted index together with the snapshot it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredIndex {
    pub repo_id: String,
    pub commit: String,
    pub index: InvertedIndex,
}

fn json<T: serde::Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("index fields serialize")
}

pub fn write_index(path: &Path, stored: &StoredIndex) -> Result<()> {
    let io = |e| Error::io(path, e);
    let file = fs::File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    let idx = &stored.index;
    writeln!(w, "{MAGIC}").map_err(io)?;
    writeln!(
        w,
        "snapshot {} {}",
        json(&stored.repo_id),
        json(&stored.commit)
    )
    .map_err(io)?;
    writeln!(w, "tokenizer {}", json(idx.config())).map_err(io)?;
    writeln!(w, "docs {}", idx.n_docs()).map_err(io)?;
    for (id, len) in idx.doc_ids().iter().zip(idx.doc_len()) {
        writeln!(w, "{} {len}", json(id)).map_err(io)?;
    }
    writeln!(w, "terms {}", idx.postings().len()).map_err(io)?;
    for (term, list) in idx.postings() {
        write!(w, "{}", json(term)).map_err(io)?;
        for p in list {
            write!(w, " {}:{}", p.doc, p.tf).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Record {
            path: self.path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => {
                self.line += 1;
                Err(self.err("unexpected end of index file"))
            }
        }
    }

    fn keyword(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected `{key}` line")))
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let rest = self.keyword(key)?;
        rest.parse()
            .map_err(|_| self.err(format!("bad {key} count")))
    }
}

/// Splits a line starting with a JSON string into the string and the rest.
fn leading_json_string(line: &str) -> Option<(String, &str)> {
    let mut stream = serde_json::Deserializer::from_str(line).into_iter::<String>();
    let s = stream.next()?.ok()?;
    let rest = &line[stream.byte_offset()..];
    Some((s, rest))
}

/// Reads an index file. When `expected` is given the stored tokenizer
/// configuration must equal it, so queries are never tokenized differently
/// from the indexed documents.
pub fn read_index(path: &Path, expected: Option<&TokenizerConfig>) -> Result<StoredIndex> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Lines {
        path,
        inner: text.lines().enumerate(),
        line: 0,
    };
    if lines.next()? != MAGIC {
        return Err(lines.err(format!("not an index file (expected `{MAGIC}`)")));
    }
    let snap = lines.keyword("snapshot")?;
    let (repo_id, rest) = leading_json_string(snap).ok_or_else(|| lines.err("bad repo"))?;
    let commit: String = serde_json::from_str(rest.trim()).map_err(|_| lines.err("bad commit"))?;
    let cfg_text = lines.keyword("tokenizer")?;
    let config: TokenizerConfig = serde_json::from_str(cfg_text)
        .map_err(|e| lines.err(format!("bad tokenizer config: {e}")))?;
    if let Some(exp) = expected {
        if exp != &config {
            return Err(Error::Config(format!(
                "{} was built with tokenizer {}, the run uses {}",
                path.display(),
                json(&config),
                json(exp)
            )));
        }
    }

    let n_docs = lines.count("docs")?;
    let mut doc_ids = Vec::with_capacity(n_docs);
    let mut doc_len = Vec::with_capacity(n_docs);
    for _ in 0..n_docs {
        let line = lines.next()?;
        let (id, rest) = leading_json_string(line).ok_or_else(|| lines.err("bad docid"))?;
        let len = rest
            .trim()
            .parse()
            .map_err(|_| lines.err("bad document length"))?;
        doc_ids.push(id);
        doc_len.push(len);
    }

    let n_terms = lines.count("terms")?;
    let mut postings = BTreeMap::new();
    for _ in 0..n_terms {
        let line = lines.next()?;
        let (term, rest) = leading_json_string(line).ok_or_else(|| lines.err("bad term"))?;
        let list = rest
            .split_ascii_whitespace()
            .map(|p| {
                let (d, tf) = p.split_once(':')?;
                Some(Posting {
                    doc: d.parse().ok()?,
                    tf: tf.parse().ok()?,
                })
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| lines.err("bad posting"))?;
        if postings.insert(term, list).is_some() {
            return Err(lines.err("duplicate term"));
        }
    }
    if lines.inner.any(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: String::from("trailing content after the last term"),
        });
    }
    let index = InvertedIndex::from_parts(config, doc_ids, postings, doc_len).map_err(|e| {
        Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    })?;
    Ok(StoredIndex {
        repo_id,
        commit,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use patchrecall_core::corpus::RepoSnapshot;
    use patchrecall_core::sparse::{bm25_retrieve, build_index, Bm25Params};

    fn sample() -> StoredIndex {
        let snap = RepoSnapshot::with_files(
            "o/r",
            "c0",
            [
                ("src/a b.py", "def parse_config(): pass"),
                ("src/\"q\".py", "ConfigParser reads config"),
                ("empty.py", ""),
            ],
        )
        .unwrap();
        StoredIndex {
            repo_id: "o/r".into(),
            commit: "c0".into(),
            index: build_index(&snap, &TokenizerConfig::default()).unwrap(),
        }
    }

    #[test]
    fn round_trip_preserves_rankings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.txt");
        let stored = sample();
        write_index(&path, &stored).unwrap();
        let loaded = read_index(&path, Some(&TokenizerConfig::default())).unwrap();
        assert_eq!(loaded, stored);
        let p = Bm25Params::default();
        assert_eq!(
            bm25_retrieve(&loaded.index, "config parser", 10, &p).unwrap(),
            bm25_retrieve(&stored.index, "config parser", 10, &p).unwrap()
        );
    }

    #[test]
    fn tokenizer_mismatch_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.txt");
        write_index(&path, &sample()).unwrap();
        let other = TokenizerConfig {
            split_identifiers: false,
            ..TokenizerConfig::default()
        };
        let err = read_index(&path, Some(&other)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn corrupt_files_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.txt");
        write_index(&path, &sample()).unwrap();
        let good = fs::read_to_string(&path).unwrap();

        fs::write(&path, good.replacen(MAGIC, "PATCHRECALL-INDEX 2", 1)).unwrap();
        assert!(matches!(
            read_index(&path, None),
            Err(Error::Record { line: 1, .. })
        ));

        let truncated: String = good.lines().take(6).map(|l| format!("{l}\n")).collect();
        fs::write(&path, truncated).unwrap();
        assert!(read_index(&path, None).is_err());

        // A posting whose tf disagrees with the stored document length.
        let tampered = good.replace(" 1:1", " 1:7");
        assert_ne!(tampered, good);
        fs::write(&path, tampered).unwrap();
        assert!(matches!(read_index(&path, None), Err(Error::Format { .. })));
    }
}
