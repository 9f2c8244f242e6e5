use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseGraphEntry {
    pub row: usize,
    pub col: usize,
    pub shift: u32,
}

/// Protograph of a quasi-cyclic code: every entry becomes a circulant
/// permutation block when lifted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseGraph {
    pub rows: usize,
    pub cols: usize,
    pub lifting_set_id: u32,
    pub entries: Vec<BaseGraphEntry>,
}

impl BaseGraph {
    pub fn new(
        rows: usize,
        cols: usize,
        lifting_set_id: u32,
        entries: Vec<BaseGraphEntry>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if e.row >= rows || e.col >= cols {
                return Err(Error::Validation(format!(
                    "entry ({}, {}) outside {}x{} base graph",
                    e.row, e.col, rows, cols
                )));
            }
            if !seen.insert((e.row, e.col)) {
                return Err(Error::Validation(format!(
                    "duplicate entry at ({}, {})",
                    e.row, e.col
                )));
            }
        }
        Ok(BaseGraph {
            rows,
            cols,
            lifting_set_id,
            entries,
        })
    }
}

/// Parses the base-graph CSV format: a `rows,cols,lifting_set_id` line
/// followed by one `row,col,shift` triple per line (0-based). Blank lines and
/// lines starting with `#` are ignored.
pub fn parse_base_graph(text: &str) -> Result<BaseGraph> {
    let mut header: Option<(usize, usize, u32)> = None;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::ParseLine {
                line: line_no,
                msg: format!("expected 3 comma-separated fields, got {}", fields.len()),
            });
        }
        let num = |s: &str| -> Result<u64> {
            s.parse::<u64>().map_err(|_| Error::ParseLine {
                line: line_no,
                msg: format!("not a non-negative integer: {s:?}"),
            })
        };
        let (a, b, c) = (num(fields[0])?, num(fields[1])?, num(fields[2])?);
        match header {
            None => header = Some((a as usize, b as usize, c as u32)),
            Some((rows, cols, _)) => {
                if a as usize >= rows || b as usize >= cols {
                    return Err(Error::ParseLine {
                        line: line_no,
                        msg: format!("entry ({a}, {b}) outside {rows}x{cols}"),
                    });
                }
                let shift = u32::try_from(c).map_err(|_| Error::ParseLine {
                    line: line_no,
                    msg: format!("shift {c} too large"),
                })?;
                entries.push(BaseGraphEntry {
                    row: a as usize,
                    col: b as usize,
                    shift,
                });
            }
        }
    }
    let (rows, cols, set) = header.ok_or_else(|| Error::Parse("missing header line".into()))?;
    BaseGraph::new(rows, cols, set, entries)
}

pub fn load_base_graph(path: impl AsRef<Path>) -> Result<BaseGraph> {
    parse_base_graph(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_one_by_one() {
        let bg = parse_base_graph("1,1,0\n").unwrap();
        assert_eq!((bg.rows, bg.cols), (1, 1));
        assert!(bg.entries.is_empty());
    }

    #[test]
    fn column_out_of_range() {
        let err = parse_base_graph("2,3,0\n0,3,1\n").unwrap_err();
        assert!(matches!(err, Error::ParseLine { line: 2, .. }), "{err}");
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = parse_base_graph("# c\n2,3,0\n0,1,1\n0,x,1\n").unwrap_err();
        assert!(matches!(err, Error::ParseLine { line: 4, .. }), "{err}");
    }

    #[test]
    fn duplicate_entry() {
        let err = parse_base_graph("2,3,0\n0,1,1\n0,1,2\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }
}
