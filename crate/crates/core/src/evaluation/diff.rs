use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HunkLine {
    Context,
    Delete,
    Insert,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    pub old_start: u32,
    pub old_len: u32,
    pub new_start: u32,
    pub new_len: u32,
    pub lines: Vec<HunkLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FilePatch {
    /// Pre-image path, `None` for newly created files.
    pub old_path: Option<String>,
    /// Post-image path, `None` for deleted files.
    pub new_path: Option<String>,
    pub hunks: Vec<Hunk>,
}

impl FilePatch {
    pub fn is_rename(&self) -> bool {
        matches!((&self.old_path, &self.new_path), (Some(a), Some(b)) if a != b)
    }
}

/// Parses git-style or plain unified diffs. Errors carry the 1-based line
/// number of the offending diff line.
pub fn parse_unified_diff(text: &str) -> Result<Vec<FilePatch>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut files: Vec<FilePatch> = Vec::new();
    let mut i = 0;
    // whether the current file section came from a `diff --git` header
    let mut in_git_section = false;

    while i < lines.len() {
        let line = lines[i];
        if let Some(rest) = line.strip_prefix("diff --git ") {
            let (a, b) = split_git_header(rest);
            files.push(FilePatch {
                old_path: a,
                new_path: b,
                hunks: Vec::new(),
            });
            in_git_section = true;
            i += 1;
        } else if let Some(from) = line.strip_prefix("rename from ") {
            current(&mut files, i)?.old_path = Some(from.to_string());
            i += 1;
        } else if let Some(to) = line.strip_prefix("rename to ") {
            current(&mut files, i)?.new_path = Some(to.to_string());
            i += 1;
        } else if line.starts_with("--- ")
            && lines.get(i + 1).is_some_and(|l| l.starts_with("+++ "))
        {
            let old = header_path(&line[4..], "a/");
            let new = header_path(&lines[i + 1][4..], "b/");
            let starts_new_file =
                !in_git_section || files.last().is_some_and(|f| !f.hunks.is_empty());
            if starts_new_file {
                files.push(FilePatch::default());
            }
            let file = current(&mut files, i)?;
            file.old_path = old;
            file.new_path = new;
            in_git_section = false;
            i += 2;
        } else if line.starts_with("@@") {
            let (mut hunk, mut old_left, mut new_left) = parse_hunk_header(line, i + 1)?;
            let file = current(&mut files, i)?;
            i += 1;
            while old_left > 0 || new_left > 0 {
                let Some(body) = lines.get(i) else {
                    return Err(Error::format(i, "hunk body ends early"));
                };
                let kind = match body.as_bytes().first() {
                    Some(b' ') | None => HunkLine::Context,
                    Some(b'-') => HunkLine::Delete,
                    Some(b'+') => HunkLine::Insert,
                    Some(b'\\') => {
                        i += 1;
                        continue;
                    }
                    _ => {
                        return Err(Error::format(
                            i + 1,
                            format!("unexpected hunk line `{body}`"),
                        ))
                    }
                };
                let (o, n) = match kind {
                    HunkLine::Context => (1, 1),
                    HunkLine::Delete => (1, 0),
                    HunkLine::Insert => (0, 1),
                };
                if o > old_left || n > new_left {
                    return Err(Error::format(
                        i + 1,
                        "hunk has more lines than its header declares",
                    ));
                }
                old_left -= o;
                new_left -= n;
                hunk.lines.push(kind);
                i += 1;
            }
            file.hunks.push(hunk);
        } else {
            // index lines, mode changes, "Binary files ... differ", commit
            // preamble and trailers carry nothing we need
            i += 1;
        }
    }

    if files.is_empty() && !text.trim().is_empty() {
        return Err(Error::format(1, "no file sections found in patch"));
    }
    Ok(files)
}

fn current(files: &mut [FilePatch], line: usize) -> Result<&mut FilePatch> {
    files
        .last_mut()
        .ok_or_else(|| Error::format(line + 1, "hunk or header outside of a file section"))
}

fn split_git_header(rest: &str) -> (Option<String>, Option<String>) {
    // `a/x b/x`; paths with spaces are ambiguous here and get fixed up by
    // the `---`/`+++` lines that follow when there are hunks
    match rest.find(" b/") {
        Some(pos) => (
            Some(rest[..pos].trim_start_matches("a/").to_string()),
            Some(rest[pos + 3..].to_string()),
        ),
        None => (None, None),
    }
}

fn header_path(raw: &str, prefix: &str) -> Option<String> {
    let raw = raw.split('\t').next().unwrap_or("").trim_end();
    if raw == "/dev/null" {
        return None;
    }
    Some(raw.strip_prefix(prefix).unwrap_or(raw).to_string())
}

fn parse_hunk_header(line: &str, lineno: usize) -> Result<(Hunk, u32, u32)> {
    let bad = || Error::format(lineno, format!("malformed hunk header `{line}`"));
    let inner = line
        .strip_prefix("@@ ")
        .and_then(|r| r.split(" @@").next())
        .ok_or_else(bad)?;
    let mut parts = inner.split_whitespace();
    let old = parts
        .next()
        .and_then(|p| p.strip_prefix('-'))
        .ok_or_else(bad)?;
    let new = parts
        .next()
        .and_then(|p| p.strip_prefix('+'))
        .ok_or_else(bad)?;
    let range = |r: &str| -> Option<(u32, u32)> {
        match r.split_once(',') {
            Some((s, l)) => Some((s.parse().ok()?, l.parse().ok()?)),
            None => Some((r.parse().ok()?, 1)),
        }
    };
    let (old_start, old_len) = range(old).ok_or_else(bad)?;
    let (new_start, new_len) = range(new).ok_or_else(bad)?;
    Ok((
        Hunk {
            old_start,
            old_len,
            new_start,
            new_len,
            lines: Vec::new(),
        },
        old_len,
        new_len,
    ))
}

/// Pre-image lines a hunk touches. A run of changed lines touches the lines
/// it deletes; a run that only inserts touches the pre-image line it follows
/// (line 1 for insertions at the top of a file).
pub fn touched_lines(hunk: &Hunk) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    if hunk.old_len == 0 {
        if hunk.lines.iter().any(|l| *l != HunkLine::Context) {
            out.insert(hunk.old_start.max(1));
        }
        return out;
    }
    let mut old_line = hunk.old_start;
    let mut block_deleted = false;
    let mut block_open = false;
    let mut block_anchor = old_line;
    for kind in &hunk.lines {
        match kind {
            HunkLine::Context => {
                if block_open && !block_deleted {
                    out.insert(block_anchor);
                }
                block_open = false;
                block_deleted = false;
                old_line += 1;
            }
            HunkLine::Delete => {
                block_open = true;
                block_deleted = true;
                out.insert(old_line);
                old_line += 1;
            }
            HunkLine::Insert => {
                if !block_open {
                    block_open = true;
                    block_anchor = old_line.saturating_sub(1).max(1);
                }
            }
        }
    }
    if block_open && !block_deleted {
        out.insert(block_anchor);
    }
    out
}
