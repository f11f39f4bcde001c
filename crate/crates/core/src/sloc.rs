//! Classification of source lines into code, comment and blank.
//!
//! A line is blank when it holds only whitespace, comment when everything
//! else on it lies inside comments, and code otherwise; a line mixing code
//! and a trailing comment is code. Block comments carry over line breaks
//! and do not nest. String literals end at their closing delimiter or at
//! the end of the line, and comment openers inside them are inert.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::ops::AddAssign;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::facts::{FactKey, SizeRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageSyntax {
    pub name: String,
    pub extensions: Vec<String>,
    #[serde(default)]
    pub line_comment: Vec<String>,
    #[serde(default)]
    pub block_comment: Vec<(String, String)>,
    #[serde(default)]
    pub string_delims: Vec<String>,
}

impl LanguageSyntax {
    fn validate(&self) -> Result<(), String> {
        if self.extensions.is_empty() {
            return Err(format!("language `{}` has no extensions", self.name));
        }
        let delims = self
            .line_comment
            .iter()
            .chain(self.block_comment.iter().flat_map(|(o, c)| [o, c]))
            .chain(&self.string_delims);
        if delims.chain(&self.extensions).any(|d| d.is_empty()) {
            return Err(format!("language `{}` has an empty delimiter or extension", self.name));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SlocError {
    #[error("cannot read registry {path}: {source}")]
    RegistryIo {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid registry {path}: {reason}")]
    RegistryFormat { path: PathBuf, reason: String },
    #[error("{0} does not exist or is not a directory")]
    NoSuchRoot(PathBuf),
    #[error("snapshot ({year}, {month}) does not follow ({prev_year}, {prev_month})")]
    SnapshotOrder {
        year: i32,
        month: u8,
        prev_year: i32,
        prev_month: u8,
    },
    #[error("snapshot month {0} outside 1-12")]
    SnapshotMonth(u8),
}

/// Languages keyed by file extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    languages: Vec<LanguageSyntax>,
}

#[derive(Deserialize)]
struct RegistryFile {
    languages: Vec<LanguageSyntax>,
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl Registry {
    pub fn new(languages: Vec<LanguageSyntax>) -> Result<Self, String> {
        for l in &languages {
            l.validate()?;
        }
        Ok(Registry { languages })
    }

    /// C-family, hash-comment scripting, and plain text.
    pub fn builtin() -> Self {
        Registry {
            languages: vec![
                LanguageSyntax {
                    name: "C".into(),
                    extensions: strs(&["c", "h", "cc", "cpp", "cxx", "hpp", "java", "js", "ts", "cs", "go", "scala", "kt", "swift"]),
                    line_comment: strs(&["//"]),
                    block_comment: vec![("/*".into(), "*/".into())],
                    string_delims: strs(&["\"", "'"]),
                },
                LanguageSyntax {
                    // Only `"` delimits strings: `'` starts lifetimes too.
                    name: "Rust".into(),
                    extensions: strs(&["rs"]),
                    line_comment: strs(&["//"]),
                    block_comment: vec![("/*".into(), "*/".into())],
                    string_delims: strs(&["\""]),
                },
                LanguageSyntax {
                    name: "Script".into(),
                    extensions: strs(&["sh", "bash", "py", "rb", "pl", "pm", "r", "tcl", "awk", "mk", "cmake", "yml", "yaml", "toml"]),
                    line_comment: strs(&["#"]),
                    block_comment: vec![],
                    string_delims: strs(&["\"", "'"]),
                },
                LanguageSyntax {
                    name: "Text".into(),
                    extensions: strs(&["txt"]),
                    line_comment: vec![],
                    block_comment: vec![],
                    string_delims: vec![],
                },
            ],
        }
    }

    /// Loads `{"languages": [...]}` from a JSON file.
    pub fn from_json_file(path: &Path) -> Result<Self, SlocError> {
        let text = fs::read_to_string(path).map_err(|source| SlocError::RegistryIo {
            path: path.to_path_buf(),
            source,
        })?;
        let format = |reason: String| SlocError::RegistryFormat {
            path: path.to_path_buf(),
            reason,
        };
        let file: RegistryFile = serde_json::from_str(&text).map_err(|e| format(e.to_string()))?;
        Registry::new(file.languages).map_err(format)
    }

    pub fn languages(&self) -> &[LanguageSyntax] {
        &self.languages
    }

    /// First language listing the file's extension (ASCII case-insensitive).
    pub fn for_path(&self, path: &Path) -> Option<&LanguageSyntax> {
        let ext = path.extension()?.to_str()?;
        self.languages
            .iter()
            .find(|l| l.extensions.iter().any(|e| e.eq_ignore_ascii_case(ext)))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LineCounts {
    pub code: u64,
    pub comment: u64,
    pub blank: u64,
}

impl LineCounts {
    pub fn new(code: u64, comment: u64, blank: u64) -> Self {
        LineCounts { code, comment, blank }
    }

    pub fn total(&self) -> u64 {
        self.code + self.comment + self.blank
    }
}

impl AddAssign for LineCounts {
    fn add_assign(&mut self, o: Self) {
        self.code += o.code;
        self.comment += o.comment;
        self.blank += o.blank;
    }
}

enum Token<'a> {
    Line,
    Block(&'a str),
    Str(&'a str),
}

/// Longest delimiter starting at the head of `rest`; on equal length a line
/// comment beats a block comment beats a string.
fn token_at<'a>(rest: &str, syntax: &'a LanguageSyntax) -> Option<(usize, Token<'a>)> {
    let at = |d: &String| rest.starts_with(d.as_str());
    let lines = syntax.line_comment.iter().filter(|o| at(o)).map(|o| (o.len(), Token::Line));
    let blocks = syntax
        .block_comment
        .iter()
        .filter(|(o, _)| at(o))
        .map(|(o, c)| (o.len(), Token::Block(c.as_str())));
    let strings = syntax
        .string_delims
        .iter()
        .filter(|d| at(d))
        .map(|d| (d.len(), Token::Str(d.as_str())));
    lines.chain(blocks).chain(strings).fold(None, |best, cand| match best {
        Some((len, _)) if len >= cand.0 => best,
        _ => Some(cand),
    })
}

/// Classifies every physical line of `text`. A final line without a
/// trailing newline still counts as a line.
pub fn classify_lines(text: &str, syntax: &LanguageSyntax) -> LineCounts {
    let mut counts = LineCounts::default();
    let mut open_block: Option<&str> = None;

    for line in text.lines() {
        let mut has_code = false;
        let mut has_comment = false;
        let mut rest = line;

        'scan: while !rest.is_empty() {
            if let Some(close) = open_block {
                match rest.find(close) {
                    Some(at) => {
                        has_comment = true;
                        rest = &rest[at + close.len()..];
                        open_block = None;
                    }
                    None => {
                        has_comment |= !rest.trim().is_empty();
                        break 'scan;
                    }
                }
                continue;
            }

            let c = rest.chars().next().expect("non-empty");
            if c.is_whitespace() {
                rest = &rest[c.len_utf8()..];
                continue;
            }
            match token_at(rest, syntax) {
                Some((_, Token::Line)) => {
                    has_comment = true;
                    break 'scan;
                }
                Some((len, Token::Block(close))) => {
                    has_comment = true;
                    open_block = Some(close);
                    rest = &rest[len..];
                }
                Some((len, Token::Str(delim))) => {
                    has_code = true;
                    rest = skip_string(&rest[len..], delim);
                }
                None => {
                    has_code = true;
                    rest = &rest[c.len_utf8()..];
                }
            }
        }

        if has_code {
            counts.code += 1;
        } else if has_comment {
            counts.comment += 1;
        } else {
            counts.blank += 1;
        }
    }
    counts
}

/// Remainder after the closing `delim`, honouring backslash escapes; empty
/// if the string runs to the end of the line.
fn skip_string<'a>(mut rest: &'a str, delim: &str) -> &'a str {
    while let Some(c) = rest.chars().next() {
        if c == '\\' {
            rest = &rest[1..];
            if let Some(escaped) = rest.chars().next() {
                rest = &rest[escaped.len_utf8()..];
            }
        } else if let Some(after) = rest.strip_prefix(delim) {
            return after;
        } else {
            rest = &rest[c.len_utf8()..];
        }
    }
    rest
}

/// Decodes bytes as UTF-8, substituting U+FFFD for invalid sequences.
pub fn classify_bytes(bytes: &[u8], syntax: &LanguageSyntax) -> LineCounts {
    classify_lines(&String::from_utf8_lossy(bytes), syntax)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileCount {
    pub path: PathBuf,
    pub language: String,
    pub counts: LineCounts,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TreeCount {
    pub files: Vec<FileCount>,
    pub by_language: BTreeMap<String, LineCounts>,
    pub total: LineCounts,
    pub skipped: usize,
    pub diagnostics: Vec<String>,
}

/// Counts every file under `root` whose extension the registry knows.
/// Files are reported relative to `root`, in path order.
pub fn count_tree(root: &Path, registry: &Registry) -> Result<TreeCount, SlocError> {
    if !root.is_dir() {
        return Err(SlocError::NoSuchRoot(root.to_path_buf()));
    }
    let mut tree = TreeCount::default();
    let mut candidates = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        match entry {
            Ok(e) if e.file_type().is_file() => match registry.for_path(e.path()) {
                Some(lang) => candidates.push((e.into_path(), lang)),
                None => tree.skipped += 1,
            },
            Ok(_) => {}
            Err(e) => tree.diagnostics.push(format!("skipped: {e}")),
        }
    }

    let results: Vec<Result<FileCount, String>> = candidates
        .par_iter()
        .map(|(path, lang)| {
            let bytes = fs::read(path).map_err(|e| format!("skipped {}: {e}", path.display()))?;
            Ok(FileCount {
                path: path.strip_prefix(root).unwrap_or(path).to_path_buf(),
                language: lang.name.clone(),
                counts: classify_bytes(&bytes, lang),
            })
        })
        .collect();

    for r in results {
        match r {
            Ok(fc) => {
                *tree.by_language.entry(fc.language.clone()).or_default() += fc.counts;
                tree.total += fc.counts;
                tree.files.push(fc);
            }
            Err(diag) => {
                tree.skipped += 1;
                tree.diagnostics.push(diag);
            }
        }
    }
    Ok(tree)
}

/// Size record per source snapshot. Snapshots must be strictly increasing
/// in (year, month).
pub fn snapshot_to_size_facts(
    project: &str,
    snapshots: &[(i32, u8, PathBuf)],
    registry: &Registry,
) -> Result<Vec<SizeRecord>, SlocError> {
    if let Some((_, m, _)) = snapshots.iter().find(|(_, m, _)| !(1..=12).contains(m)) {
        return Err(SlocError::SnapshotMonth(*m));
    }
    for w in snapshots.windows(2) {
        if (w[1].0, w[1].1) <= (w[0].0, w[0].1) {
            return Err(SlocError::SnapshotOrder {
                year: w[1].0,
                month: w[1].1,
                prev_year: w[0].0,
                prev_month: w[0].1,
            });
        }
    }
    snapshots
        .iter()
        .map(|(year, month, dir)| {
            let t = count_tree(dir, registry)?.total;
            Ok(SizeRecord {
                key: FactKey::new(project, *year, *month),
                loc: t.code as i64,
                comments: t.comment as i64,
                blanks: t.blank as i64,
            })
        })
        .collect()
}

/// Per-file, per-language and total rows:
/// `kind,path,language,code,comment,blank`.
pub fn write_tree_csv<W: io::Write>(out: W, tree: &TreeCount) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "path", "language", "code", "comment", "blank"])?;
    let mut row = |kind: &str, path: &str, lang: &str, c: &LineCounts| {
        w.write_record([
            kind,
            path,
            lang,
            &c.code.to_string(),
            &c.comment.to_string(),
            &c.blank.to_string(),
        ])
    };
    for f in &tree.files {
        let path = f.path.to_string_lossy().replace('\\', "/");
        row("file", &path, &f.language, &f.counts)?;
    }
    for (lang, c) in &tree.by_language {
        row("language", "", lang, c)?;
    }
    row("total", "", "", &tree.total)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c_like() -> LanguageSyntax {
        Registry::builtin().languages()[0].clone()
    }

    fn hash() -> LanguageSyntax {
        Registry::builtin().languages()[2].clone()
    }

    #[test]
    fn basic_mix() {
        assert_eq!(classify_lines("x = 1\n\n// note\n", &c_like()), LineCounts::new(1, 1, 1));
        assert_eq!(classify_lines("", &c_like()), LineCounts::default());
        assert_eq!(classify_lines("x = 1; // trailing\n", &c_like()), LineCounts::new(1, 0, 0));
    }

    #[test]
    fn trailing_newline_is_irrelevant() {
        let s = c_like();
        assert_eq!(classify_lines("a\n// b", &s), classify_lines("a\n// b\n", &s));
        assert_eq!(classify_lines("a\r\n\r\n", &s), LineCounts::new(1, 0, 1));
    }

    #[test]
    fn block_comments_span_lines() {
        let text = "/* one\n\n   two */\nint x; /* a */\n/* a */ /* b */\n/* a */ y\n";
        assert_eq!(classify_lines(text, &c_like()), LineCounts::new(2, 3, 1));
    }

    #[test]
    fn blocks_do_not_nest() {
        let text = "/* outer /* inner */\ncode();\n*/\n";
        // the first `*/` closes, so the last line is code
        assert_eq!(classify_lines(text, &c_like()), LineCounts::new(2, 1, 0));
    }

    #[test]
    fn openers_inside_strings_are_inert() {
        let text = "s = \"// not a comment\";\nt = \"/* nor this\";\nu = 1;\nc = '\"'; // q\n";
        assert_eq!(classify_lines(text, &c_like()), LineCounts::new(4, 0, 0));
        let esc = "s = \"a \\\" /* b\";\n";
        assert_eq!(classify_lines(esc, &c_like()), LineCounts::new(1, 0, 0));
    }

    #[test]
    fn hash_comments() {
        let text = "#!/bin/sh\necho '#not'\n   # indented\n\t\n";
        assert_eq!(classify_lines(text, &hash()), LineCounts::new(1, 2, 1));
    }

    #[test]
    fn longest_opener_wins() {
        let lang = LanguageSyntax {
            name: "L".into(),
            extensions: vec!["l".into()],
            line_comment: vec!["-".into()],
            block_comment: vec![("-[".into(), "]-".into())],
            string_delims: vec![],
        };
        assert_eq!(classify_lines("-[ a\nb ]- c\n", &lang), LineCounts::new(1, 1, 0));
    }

    #[test]
    fn invalid_utf8_is_replaced() {
        let bytes = b"x\xff = 1\n// \xfe\n";
        assert_eq!(classify_bytes(bytes, &c_like()), LineCounts::new(1, 1, 0));
    }

    #[test]
    fn registry_validation() {
        let mut l = c_like();
        l.extensions.clear();
        assert!(Registry::new(vec![l]).is_err());
        let mut l = c_like();
        l.line_comment.push(String::new());
        assert!(Registry::new(vec![l]).is_err());
        let r = Registry::builtin();
        assert_eq!(r.for_path(Path::new("a/b.C")).unwrap().name, "C");
        assert!(r.for_path(Path::new("Makefile")).is_none());
    }
}
