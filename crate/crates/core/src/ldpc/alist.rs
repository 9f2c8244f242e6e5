//! MacKay alist reader and writer (1-based indices, zero padded lists).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::parity::ParityCheck;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_numbers(&mut self) -> Result<(usize, Vec<usize>)> {
        for (idx, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::ParseLine {
                        line: idx + 1,
                        msg: format!("not an integer: {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((idx + 1, nums));
        }
        Err(Error::Parse("unexpected end of alist".into()))
    }
}

fn expect_len(line: usize, nums: &[usize], want: usize, what: &str) -> Result<()> {
    if nums.len() != want {
        return Err(Error::ParseLine {
            line,
            msg: format!("{what}: expected {want} values, found {}", nums.len()),
        });
    }
    Ok(())
}

pub fn parse_alist(text: &str) -> Result<ParityCheck> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (ln, dims) = lines.next_numbers()?;
    expect_len(ln, &dims, 2, "dimensions")?;
    let (n, m) = (dims[0], dims[1]);
    let (ln, maxes) = lines.next_numbers()?;
    expect_len(ln, &maxes, 2, "max degrees")?;
    let (max_col, max_row) = (maxes[0], maxes[1]);
    let (ln, col_deg) = lines.next_numbers()?;
    expect_len(ln, &col_deg, n, "column degrees")?;
    let (ln, row_deg) = lines.next_numbers()?;
    expect_len(ln, &row_deg, m, "row degrees")?;

    let read_lists = |lines: &mut Lines, count: usize, degs: &[usize], max: usize, bound: usize| {
        let mut out = Vec::with_capacity(count);
        for (i, &deg) in degs.iter().enumerate().take(count) {
            let (ln, nums) = lines.next_numbers()?;
            if deg > max {
                return Err(Error::ParseLine {
                    line: ln,
                    msg: format!("degree {deg} of list {} exceeds declared maximum {max}", i + 1),
                });
            }
            let entries: Vec<usize> = nums.iter().copied().filter(|&x| x != 0).collect();
            if entries.len() != deg {
                return Err(Error::ParseLine {
                    line: ln,
                    msg: format!("list {} declares degree {deg} but has {} entries", i + 1, entries.len()),
                });
            }
            if nums.len() > max.max(deg) {
                return Err(Error::ParseLine {
                    line: ln,
                    msg: format!("list {} longer than declared maximum {max}", i + 1),
                });
            }
            if let Some(&bad) = entries.iter().find(|&&x| x > bound) {
                return Err(Error::ParseLine {
                    line: ln,
                    msg: format!("index {bad} out of range 1..={bound}"),
                });
            }
            out.push(entries.into_iter().map(|x| x - 1).collect::<Vec<_>>());
        }
        Ok(out)
    };
    let cols = read_lists(&mut lines, n, &col_deg, max_col, m)?;
    let rows = read_lists(&mut lines, m, &row_deg, max_row, n)?;

    let h = ParityCheck::from_rows(n, rows)?;
    for (v, list) in cols.into_iter().enumerate() {
        let mut list = list;
        list.sort_unstable();
        if list != h.col(v) {
            return Err(Error::Parse(format!(
                "column list {} disagrees with row lists",
                v + 1
            )));
        }
    }
    Ok(h)
}

pub fn write_alist(h: &ParityCheck) -> String {
    let mut s = String::new();
    let (max_col, max_row) = (h.max_col_degree(), h.max_row_degree());
    let _ = writeln!(s, "{} {}", h.n(), h.r());
    let _ = writeln!(s, "{max_col} {max_row}");
    let join = |it: &mut dyn Iterator<Item = usize>| {
        it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(s, "{}", join(&mut h.cols().iter().map(Vec::len)));
    let _ = writeln!(s, "{}", join(&mut h.rows().iter().map(Vec::len)));
    for col in h.cols() {
        let mut it = col.iter().map(|c| c + 1).chain(std::iter::repeat(0)).take(max_col);
        let _ = writeln!(s, "{}", join(&mut it));
    }
    for row in h.rows() {
        let mut it = row.iter().map(|v| v + 1).chain(std::iter::repeat(0)).take(max_row);
        let _ = writeln!(s, "{}", join(&mut it));
    }
    s
}

pub fn load_alist(path: impl AsRef<Path>) -> Result<ParityCheck> {
    parse_alist(&std::fs::read_to_string(path)?)
}

pub fn save_alist(h: &ParityCheck, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_alist(h))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Hamming(7,4): H = [1 1 0 1 1 0 0; 1 0 1 1 0 1 0; 0 1 1 1 0 0 1]
    const HAMMING: &str = "7 3
3 4
2 2 2 3 1 1 1
4 4 4
1 2 0
1 3 0
2 3 0
1 2 3
1 0 0
2 0 0
3 0 0
1 2 4 5
1 3 4 6
2 3 4 7
";

    #[test]
    fn hand_written_hamming() {
        let h = parse_alist(HAMMING).unwrap();
        assert_eq!((h.n(), h.r()), (7, 3));
        assert_eq!(h.edge_count(), 12);
        assert_eq!(h.row(1), &[0, 2, 3, 5]);
    }

    #[test]
    fn round_trip() {
        let h = parse_alist(HAMMING).unwrap();
        assert_eq!(parse_alist(&write_alist(&h)).unwrap(), h);
        assert_eq!(write_alist(&h), HAMMING);
    }

    #[test]
    fn declared_max_too_small() {
        let bad = HAMMING.replacen("3 4\n", "3 3\n", 1);
        assert!(parse_alist(&bad).is_err());
    }

    #[test]
    fn inconsistent_lists() {
        let bad = HAMMING.replacen("1 2 0\n", "1 3 0\n", 1);
        assert!(parse_alist(&bad).is_err());
    }
}
