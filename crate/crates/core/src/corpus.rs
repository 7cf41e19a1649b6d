//! Benchmark records, gold-file extraction from unified diffs, and in-memory
//! repository snapshots.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("empty path")]
    Empty,
    #[error("path escapes the repository root: {0}")]
    EscapesRoot(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatchParseError {
    #[error("empty diff")]
    EmptyDiff,
    #[error("no recognizable file header in diff")]
    NoFileHeaders,
    #[error("invalid path in diff header: {0}")]
    InvalidPath(#[from] PathError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("instance_id must be non-empty")]
    EmptyInstanceId,
    #[error("issue text for {0} must be non-empty")]
    EmptyText(String),
    #[error("gold file set for {0} is empty")]
    EmptyGold(String),
    #[error("patch for {id}: {source}")]
    Patch { id: String, source: PatchParseError },
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("duplicate path in snapshot: {0}")]
    DuplicatePath(String),
}

/// Normalizes a repository-relative path: `/` separators, no empty, `.` or
/// `..` segments, no leading slash. Normalizing a normalized path is a no-op.
pub fn normalize_path(path: &str) -> Result<String, PathError> {
    let mut segments: Vec<&str> = Vec::new();
    for seg in path.split(['/', '\\']) {
        match seg {
            "" | "." => {}
            ".." => {
                if segments.pop().is_none() {
                    return Err(PathError::EscapesRoot(path.to_string()));
                }
            }
            s => segments.push(s),
        }
    }
    if segments.is_empty() {
        return Err(PathError::Empty);
    }
    Ok(segments.join("/"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Split {
    Verified,
    Unverified,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Verified => "verified",
            Split::Unverified => "unverified",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s {
            "verified" => Some(Split::Verified),
            "unverified" => Some(Split::Unverified),
            _ => None,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An issue report; `text` is title and body joined and serves as the query.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IssueRecord {
    pub instance_id: String,
    pub repo_id: String,
    pub base_commit: String,
    pub text: String,
}

impl IssueRecord {
    pub fn new(
        instance_id: impl Into<String>,
        repo_id: impl Into<String>,
        base_commit: impl Into<String>,
        text: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let issue = IssueRecord {
            instance_id: instance_id.into(),
            repo_id: repo_id.into(),
            base_commit: base_commit.into(),
            text: text.into(),
        };
        if issue.instance_id.is_empty() {
            return Err(CorpusError::EmptyInstanceId);
        }
        if issue.text.trim().is_empty() {
            return Err(CorpusError::EmptyText(issue.instance_id));
        }
        Ok(issue)
    }
}

/// A resolving patch together with the files it modifies.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatchRecord {
    pub instance_id: String,
    pub diff_text: String,
    modified_files: BTreeSet<String>,
}

impl PatchRecord {
    pub fn parse(
        instance_id: impl Into<String>,
        diff_text: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let instance_id = instance_id.into();
        let diff_text = diff_text.into();
        let modified_files =
            parse_patch_files(&diff_text).map_err(|source| CorpusError::Patch {
                id: instance_id.clone(),
                source,
            })?;
        Ok(PatchRecord {
            instance_id,
            diff_text,
            modified_files,
        })
    }

    pub fn modified_files(&self) -> &BTreeSet<String> {
        &self.modified_files
    }
}

/// One benchmark item.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InstanceExample {
    pub issue: IssueRecord,
    gold_files: BTreeSet<String>,
    pub split: Split,
}

impl InstanceExample {
    pub fn new(
        issue: IssueRecord,
        gold_files: BTreeSet<String>,
        split: Split,
    ) -> Result<Self, CorpusError> {
        if gold_files.is_empty() {
            return Err(CorpusError::EmptyGold(issue.instance_id));
        }
        Ok(InstanceExample {
            issue,
            gold_files,
            split,
        })
    }

    /// Builds the instance from its own resolving patch.
    pub fn from_patch(issue: IssueRecord, patch: &PatchRecord, split: Split) -> Self {
        InstanceExample {
            issue,
            gold_files: patch.modified_files.clone(),
            split,
        }
    }

    pub fn id(&self) -> &str {
        &self.issue.instance_id
    }

    pub fn gold_files(&self) -> &BTreeSet<String> {
        &self.gold_files
    }
}

/// The text files of one repository at one commit, keyed by normalized path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepoSnapshot {
    pub repo_id: String,
    pub commit: String,
    files: BTreeMap<String, String>,
}

impl RepoSnapshot {
    pub fn new(repo_id: impl Into<String>, commit: impl Into<String>) -> Self {
        RepoSnapshot {
            repo_id: repo_id.into(),
            commit: commit.into(),
            files: BTreeMap::new(),
        }
    }

    /// Adds a file, normalizing its path. Duplicate paths are rejected.
    pub fn insert(&mut self, path: &str, content: impl Into<String>) -> Result<(), CorpusError> {
        let path = normalize_path(path)?;
        if self.files.contains_key(&path) {
            return Err(CorpusError::DuplicatePath(path));
        }
        self.files.insert(path, content.into());
        Ok(())
    }

    pub fn with_files<'a, I>(
        repo_id: impl Into<String>,
        commit: impl Into<String>,
        files: I,
    ) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut snap = RepoSnapshot::new(repo_id, commit);
        for (path, content) in files {
            snap.insert(path, content)?;
        }
        Ok(snap)
    }

    pub fn files(&self) -> &BTreeMap<String, String> {
        &self.files
    }

    pub fn contains(&self, path: &str) -> bool {
        self.files.contains_key(path)
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

/// Extracts the set of files touched by a unified diff.
///
/// A block introduced by `diff --git a/P b/Q` contributes `P` and `Q` (plus
/// `rename from`/`rename to` paths); its `---`/`+++` lines are ignored.
/// Blocks without a git header contribute the `+++` target, or the `---`
/// source when the target is `/dev/null`. Hunk bodies are skipped using
/// their line counts, so removed lines that look like headers are not
/// mistaken for them.
pub fn parse_patch_files(diff_text: &str) -> Result<BTreeSet<String>, PatchParseError> {
    if diff_text.is_empty() {
        return Err(PatchParseError::EmptyDiff);
    }
    let mut files = BTreeSet::new();
    let mut in_git_block = false;
    let mut git_seen_hunk = false;
    let mut pending_minus: Option<Option<String>> = None;
    let mut old_left: u64 = 0;
    let mut new_left: u64 = 0;

    for raw in diff_text.split('\n') {
        let line = raw.strip_suffix('\r').unwrap_or(raw);

        if old_left > 0 || new_left > 0 {
            let consumed = match line.as_bytes().first() {
                None | Some(b' ') => {
                    old_left = old_left.saturating_sub(1);
                    new_left = new_left.saturating_sub(1);
                    true
                }
                Some(b'-') => {
                    old_left = old_left.saturating_sub(1);
                    true
                }
                Some(b'+') => {
                    new_left = new_left.saturating_sub(1);
                    true
                }
                Some(b'\\') => true,
                _ => {
                    old_left = 0;
                    new_left = 0;
                    false
                }
            };
            if consumed {
                continue;
            }
        }

        if let Some(rest) = line.strip_prefix("diff --git ") {
            in_git_block = true;
            git_seen_hunk = false;
            pending_minus = None;
            if let Some((a, b)) = split_git_header(rest) {
                files.insert(normalize_path(&a)?);
                files.insert(normalize_path(&b)?);
            }
            continue;
        }

        if line.starts_with("@@ ") {
            if let Some((o, n)) = parse_hunk_counts(line) {
                old_left = o;
                new_left = n;
            }
            if in_git_block {
                git_seen_hunk = true;
            }
            pending_minus = None;
            continue;
        }

        if in_git_block && !git_seen_hunk {
            for prefix in ["rename from ", "rename to ", "copy to "] {
                if let Some(p) = line.strip_prefix(prefix) {
                    files.insert(normalize_path(&unquote(p))?);
                }
            }
            continue;
        }

        if let Some(rest) = line.strip_prefix("--- ") {
            in_git_block = false;
            pending_minus = Some(header_path(rest));
        } else if let Some(rest) = line.strip_prefix("+++ ") {
            if let Some(minus) = pending_minus.take() {
                if let Some(target) = header_path(rest).or(minus) {
                    files.insert(normalize_path(&target)?);
                }
            }
        }
    }

    if files.is_empty() {
        return Err(PatchParseError::NoFileHeaders);
    }
    Ok(files)
}

fn strip_side_prefix(path: &str) -> &str {
    path.strip_prefix("a/")
        .or_else(|| path.strip_prefix("b/"))
        .unwrap_or(path)
}

/// Path from a `---`/`+++` header; `None` for `/dev/null`.
fn header_path(rest: &str) -> Option<String> {
    let rest = rest.split('\t').next().unwrap_or(rest).trim_end();
    let path = unquote(rest);
    if path == "/dev/null" {
        return None;
    }
    Some(String::from(strip_side_prefix(&path)))
}

fn split_git_header(rest: &str) -> Option<(String, String)> {
    let rest = rest.trim_end();
    if rest.starts_with('"') {
        let (a, tail) = take_quoted(rest)?;
        let tail = tail.trim_start();
        let b = if tail.starts_with('"') {
            take_quoted(tail)?.0
        } else {
            String::from(tail)
        };
        return Some((
            String::from(strip_side_prefix(&a)),
            String::from(strip_side_prefix(&b)),
        ));
    }
    // Paths may contain spaces; prefer the split whose two sides agree.
    let mut first_prefixed = None;
    for (i, _) in rest.match_indices(' ') {
        let (left, right) = (&rest[..i], &rest[i + 1..]);
        let l = left.strip_prefix("a/").unwrap_or(left);
        let r = right.strip_prefix("b/").unwrap_or(right);
        if l == r && !l.is_empty() {
            return Some((String::from(l), String::from(r)));
        }
        if first_prefixed.is_none() && left.starts_with("a/") && right.starts_with("b/") {
            first_prefixed = Some((String::from(l), String::from(r)));
        }
    }
    first_prefixed
}

fn parse_hunk_counts(line: &str) -> Option<(u64, u64)> {
    let body = line.strip_prefix("@@ ")?;
    let end = body.find(" @@")?;
    let mut parts = body[..end].split(' ');
    let old = parts.next()?.strip_prefix('-')?;
    let new = parts.next()?.strip_prefix('+')?;
    let count = |range: &str| -> Option<u64> {
        match range.split_once(',') {
            Some((_, n)) => n.parse().ok(),
            None => range.parse::<u64>().ok().map(|_| 1),
        }
    };
    Some((count(old)?, count(new)?))
}

/// Undoes git's C-style quoting when the path is quoted; otherwise returns it.
fn unquote(s: &str) -> String {
    if s.starts_with('"') {
        if let Some((q, _)) = take_quoted(s) {
            return q;
        }
    }
    String::from(s)
}

fn take_quoted(s: &str) -> Option<(String, &str)> {
    let bytes = s.as_bytes();
    if bytes.first() != Some(&b'"') {
        return None;
    }
    let mut out: Vec<u8> = Vec::new();
    let mut i = 1;
    while i < bytes.len() {
        match bytes[i] {
            b'"' => {
                return Some((String::from_utf8_lossy(&out).into_owned(), &s[i + 1..]));
            }
            b'\\' if i + 1 < bytes.len() => {
                let c = bytes[i + 1];
                match c {
                    b'0'..=b'7' => {
                        let mut v: u32 = 0;
                        let mut j = i + 1;
                        while j < bytes.len() && j < i + 4 && (b'0'..=b'7').contains(&bytes[j]) {
                            v = v * 8 + u32::from(bytes[j] - b'0');
                            j += 1;
                        }
                        out.push(v as u8);
                        i = j;
                        continue;
                    }
                    b'n' => out.push(b'\n'),
                    b't' => out.push(b'\t'),
                    other => out.push(other),
                }
                i += 2;
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| String::from(*s)).collect()
    }

    const SINGLE: &str = "--- a/x.py\n+++ b/x.py\n@@ -1 +1 @@\n-a\n+b\n";

    #[test]
    fn single_header_pair() {
        assert_eq!(parse_patch_files(SINGLE).unwrap(), set(&["x.py"]));
    }

    #[test]
    fn two_git_files() {
        let diff = "diff --git a/src/a.py b/src/a.py\nindex 1..2 100644\n--- a/src/a.py\n+++ b/src/a.py\n@@ -1,2 +1,2 @@\n ctx\n-old\n+new\ndiff --git a/src/b.py b/src/b.py\n--- a/src/b.py\n+++ b/src/b.py\n@@ -3 +3 @@\n-x\n+y\n";
        assert_eq!(
            parse_patch_files(diff).unwrap(),
            set(&["src/a.py", "src/b.py"])
        );
    }

    #[test]
    fn empty_is_error() {
        assert_eq!(parse_patch_files(""), Err(PatchParseError::EmptyDiff));
        assert_eq!(
            parse_patch_files("just some text\n"),
            Err(PatchParseError::NoFileHeaders)
        );
    }

    #[test]
    fn deleted_and_new_files() {
        let plain = "--- a/gone.py\n+++ /dev/null\n@@ -1 +0,0 @@\n-x\n--- /dev/null\n+++ b/new.py\n@@ -0,0 +1 @@\n+y\n";
        assert_eq!(
            parse_patch_files(plain).unwrap(),
            set(&["gone.py", "new.py"])
        );

        let git = "diff --git a/gone.py b/gone.py\ndeleted file mode 100644\n--- a/gone.py\n+++ /dev/null\n@@ -1 +0,0 @@\n-x\n";
        assert_eq!(parse_patch_files(git).unwrap(), set(&["gone.py"]));
    }

    #[test]
    fn rename_contributes_both_paths() {
        let diff = "diff --git a/old/m.py b/new/m.py\nsimilarity index 90%\nrename from old/m.py\nrename to new/m.py\n";
        assert_eq!(
            parse_patch_files(diff).unwrap(),
            set(&["new/m.py", "old/m.py"])
        );
    }

    #[test]
    fn removed_line_resembling_header_is_hunk_content() {
        let diff = "--- a/x.py\n+++ b/x.py\n@@ -1,2 +1,1 @@\n--- a/fake.py\n-+++ b/fake.py\n+z\n";
        assert_eq!(parse_patch_files(diff).unwrap(), set(&["x.py"]));
    }

    #[test]
    fn git_header_with_spaces_and_quotes() {
        let diff = "diff --git a/dir one/f.py b/dir one/f.py\n";
        assert_eq!(parse_patch_files(diff).unwrap(), set(&["dir one/f.py"]));
        let quoted = "diff --git \"a/caf\\303\\251.py\" \"b/caf\\303\\251.py\"\n";
        assert_eq!(parse_patch_files(quoted).unwrap(), set(&["café.py"]));
    }

    #[test]
    fn timestamps_are_stripped() {
        let diff = "--- a/x.py\t2020-01-01 00:00:00\n+++ b/x.py\t2020-01-02 00:00:00\n@@ -1 +1 @@\n-a\n+b\n";
        assert_eq!(parse_patch_files(diff).unwrap(), set(&["x.py"]));
    }

    #[test]
    fn crlf_line_endings() {
        let diff = SINGLE.replace('\n', "\r\n");
        assert_eq!(parse_patch_files(&diff).unwrap(), set(&["x.py"]));
    }

    #[test]
    fn plain_block_after_git_block() {
        let diff = "diff --git a/a.py b/a.py\n--- a/a.py\n+++ b/a.py\n@@ -1 +1 @@\n-a\n+b\n--- a/b.py\n+++ b/b.py\n@@ -1 +1 @@\n-a\n+b\n";
        assert_eq!(parse_patch_files(diff).unwrap(), set(&["a.py", "b.py"]));
    }

    #[test]
    fn normalize_paths() {
        assert_eq!(normalize_path("./src//a/../b.py").unwrap(), "src/b.py");
        assert_eq!(normalize_path("src\\win.py").unwrap(), "src/win.py");
        assert_eq!(normalize_path("/abs/x").unwrap(), "abs/x");
        assert!(matches!(
            normalize_path("../x"),
            Err(PathError::EscapesRoot(_))
        ));
        assert_eq!(normalize_path("./"), Err(PathError::Empty));
    }

    #[test]
    fn records_validate() {
        assert!(IssueRecord::new("", "o/r", "c", "t").is_err());
        assert!(IssueRecord::new("i", "o/r", "c", "  ").is_err());
        let issue = IssueRecord::new("i", "o/r", "c", "text").unwrap();
        assert!(InstanceExample::new(issue.clone(), BTreeSet::new(), Split::Verified).is_err());
        let patch = PatchRecord::parse("i", SINGLE).unwrap();
        let inst = InstanceExample::from_patch(issue, &patch, Split::Verified);
        assert_eq!(inst.gold_files(), patch.modified_files());
        assert!(PatchRecord::parse("i", "").is_err());
    }

    #[test]
    fn snapshot_rejects_duplicates_after_normalization() {
        let mut snap = RepoSnapshot::new("o/r", "c");
        snap.insert("a/b.py", "x").unwrap();
        assert!(matches!(
            snap.insert("./a//b.py", "y"),
            Err(CorpusError::DuplicatePath(_))
        ));
        assert_eq!(snap.files().keys().collect::<Vec<_>>(), vec!["a/b.py"]);
    }
}
