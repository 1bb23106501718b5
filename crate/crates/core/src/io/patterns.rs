//! Text grids: one row per line, `#`/`1` on, `.`/`0` off, blank lines
//! between patterns.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::Pattern;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    pub rows: usize,
    pub cols: usize,
    /// Flattened row-major.
    pub patterns: Vec<Pattern>,
}

pub fn load_patterns(path: impl AsRef<Path>) -> Result<Vec<Pattern>> {
    load_pattern_set(path).map(|s| s.patterns)
}

pub fn load_pattern_set(path: impl AsRef<Path>) -> Result<PatternSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_patterns(&text, &path.display().to_string())
}

/// `source` names the input in error messages.
pub fn parse_patterns(text: &str, source: &str) -> Result<PatternSet> {
    let err = |line: usize, reason: String| Error::Parse {
        path: source.to_string(),
        line,
        reason,
    };
    let mut shape: Option<(usize, usize)> = None;
    let mut patterns = Vec::new();
    let mut block: Vec<i8> = Vec::new();
    let mut block_rows = 0usize;
    let mut block_start = 0usize;
    let mut width: Option<usize> = None;

    let mut finish = |block: &mut Vec<i8>, rows: &mut usize, width: &mut Option<usize>, start: usize| -> Result<()> {
        let Some(w) = width.take() else { return Ok(()) };
        match shape {
            None => shape = Some((*rows, w)),
            Some((r, c)) if (r, c) != (*rows, w) => {
                return Err(err(start, format!("pattern is {}x{w}, earlier patterns are {r}x{c}", *rows)));
            }
            Some(_) => {}
        }
        patterns.push(Pattern::new(std::mem::take(block)).expect("grid cells are bipolar"));
        *rows = 0;
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            finish(&mut block, &mut block_rows, &mut width, block_start)?;
            continue;
        }
        if width.is_none() {
            block_start = lineno;
        }
        let mut count = 0usize;
        for (col, ch) in line.chars().enumerate() {
            block.push(match ch {
                '#' | '1' => 1,
                '.' | '0' => -1,
                other => return Err(err(lineno, format!("illegal character {other:?} at column {}", col + 1))),
            });
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(err(lineno, format!("row has {count} cells, expected {w}")));
            }
            Some(_) => {}
        }
        block_rows += 1;
    }
    finish(&mut block, &mut block_rows, &mut width, block_start)?;

    let (rows, cols) = shape.ok_or(Error::NoPatterns)?;
    Ok(PatternSet { rows, cols, patterns })
}

/// Canonical text: `#`/`.` cells, one blank line between patterns.
pub fn serialize_patterns(set: &PatternSet) -> String {
    let mut out = String::new();
    for (k, p) in set.patterns.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        out.push_str(&render_grid(p, set.cols));
    }
    out
}

/// One pattern as `#`/`.` rows of width `cols`, newline-terminated.
pub fn render_grid(p: &Pattern, cols: usize) -> String {
    let mut out = String::with_capacity(p.len() + p.len() / cols.max(1) + 1);
    for row in p.values().chunks(cols.max(1)) {
        out.extend(row.iter().map(|&v| if v > 0 { '#' } else { '.' }));
        out.push('\n');
    }
    out
}
