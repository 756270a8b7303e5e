//! Reader and writer for the alist sparse-matrix format.
//!
//! Layout, one record per line:
//!
//! ```text
//! n m
//! max_col_degree max_row_degree
//! <n column degrees>
//! <m row degrees>
//! <n lines: 1-based row indices of each column, zero padded>
//! <m lines: 1-based column indices of each row, zero padded>
//! ```
//!
//! Zero padding is optional on input. Output is always padded, so
//! `write_alist(load_alist(s))` reproduces a canonically formatted `s`
//! byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-blank line as parsed integers, with its 1-based line number.
    fn next_record(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (idx, line) in self.inner.by_ref() {
            let line_no = idx + 1;
            self.last = line_no;
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| {
                        Error::parse(line_no, format!("invalid integer '{tok}' in {what}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((line_no, values));
        }
        Err(Error::parse(
            self.last + 1,
            format!("unexpected end of input, expected {what}"),
        ))
    }
}

fn expect_len(line: usize, values: &[usize], len: usize, what: &str) -> Result<()> {
    if values.len() != len {
        return Err(Error::parse(
            line,
            format!("{what}: expected {len} values, found {}", values.len()),
        ));
    }
    Ok(())
}

/// Reads one neighbour list: `degree` 1-based indices in `1..=bound`, then
/// optional zero padding up to `max_degree`.
fn neighbour_list(
    line: usize,
    values: &[usize],
    degree: usize,
    max_degree: usize,
    bound: usize,
    what: &str,
) -> Result<Vec<usize>> {
    if values.len() < degree || values.len() > max_degree.max(degree) {
        return Err(Error::parse(
            line,
            format!(
                "{what}: expected {degree} entries (padded to at most {max_degree}), found {}",
                values.len()
            ),
        ));
    }
    let (entries, padding) = values.split_at(degree);
    if padding.iter().any(|&v| v != 0) {
        return Err(Error::parse(
            line,
            format!("{what}: more nonzero entries than its degree {degree}"),
        ));
    }
    let mut out = Vec::with_capacity(degree);
    for &v in entries {
        if v == 0 || v > bound {
            return Err(Error::parse(
                line,
                format!("{what}: index {v} out of range 1..={bound}"),
            ));
        }
        if out.contains(&(v - 1)) {
            return Err(Error::parse(line, format!("{what}: duplicate index {v}")));
        }
        out.push(v - 1);
    }
    Ok(out)
}

pub fn load_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut lines = Lines::new(text);

    let (line, header) = lines.next_record("header 'n m'")?;
    expect_len(line, &header, 2, "header")?;
    let (n, m) = (header[0], header[1]);
    if n == 0 || m == 0 {
        return Err(Error::parse(line, "matrix dimensions must be positive"));
    }

    let (line, maxima) = lines.next_record("maximum degrees")?;
    expect_len(line, &maxima, 2, "maximum degrees")?;
    let (max_col, max_row) = (maxima[0], maxima[1]);

    let (line, col_degrees) = lines.next_record("column degrees")?;
    expect_len(line, &col_degrees, n, "column degrees")?;
    if col_degrees.iter().any(|&d| d > max_col) {
        return Err(Error::parse(line, "column degree exceeds declared maximum"));
    }
    let (line, row_degrees) = lines.next_record("row degrees")?;
    expect_len(line, &row_degrees, m, "row degrees")?;
    if row_degrees.iter().any(|&d| d > max_row) {
        return Err(Error::parse(line, "row degree exceeds declared maximum"));
    }

    let mut cols = Vec::with_capacity(n);
    for (i, &degree) in col_degrees.iter().enumerate() {
        let what = format!("column {}", i + 1);
        let (line, values) = lines.next_record(&what)?;
        cols.push(neighbour_list(line, &values, degree, max_col, m, &what)?);
    }
    let mut rows = Vec::with_capacity(m);
    let mut row_lines = Vec::with_capacity(m);
    for (j, &degree) in row_degrees.iter().enumerate() {
        let what = format!("row {}", j + 1);
        let (line, values) = lines.next_record(&what)?;
        rows.push(neighbour_list(line, &values, degree, max_row, n, &what)?);
        row_lines.push(line);
    }

    // Column lists must describe exactly the same edges as the row lists.
    for (j, row) in rows.iter().enumerate() {
        for &c in row {
            if !cols[c].contains(&j) {
                return Err(Error::parse(
                    row_lines[j],
                    format!(
                        "row {} lists column {} but that column does not list the row",
                        j + 1,
                        c + 1
                    ),
                ));
            }
        }
    }
    let col_total: usize = col_degrees.iter().sum();
    let row_total: usize = row_degrees.iter().sum();
    if col_total != row_total {
        return Err(Error::parse(
            lines.last,
            format!("column degrees sum to {col_total} but row degrees sum to {row_total}"),
        ));
    }

    ParityCheckMatrix::from_rows(n, &rows).map_err(|e| Error::parse(lines.last, e.to_string()))
}

fn write_list(out: &mut String, values: impl Iterator<Item = usize>, pad_to: usize) {
    for (k, v) in values.chain(std::iter::repeat(0)).take(pad_to).enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

pub fn write_alist(h: &ParityCheckMatrix) -> String {
    let (n, m) = (h.n(), h.m());
    let max_col = (0..n).map(|i| h.col_degree(i)).max().unwrap_or(0);
    let max_row = (0..m).map(|j| h.row_degree(j)).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(out, "{max_col} {max_row}");
    write_list(&mut out, (0..n).map(|i| h.col_degree(i)), n);
    write_list(&mut out, (0..m).map(|j| h.row_degree(j)), m);
    for i in 0..n {
        let mut rows: Vec<usize> = h.col(i).map(|r| r as usize + 1).collect();
        rows.sort_unstable();
        write_list(&mut out, rows.into_iter(), max_col);
    }
    for j in 0..m {
        write_list(&mut out, h.row(j).iter().map(|&c| c as usize + 1), max_row);
    }
    out
}

pub fn read_alist_file(path: impl AsRef<Path>) -> Result<ParityCheckMatrix> {
    load_alist(&std::fs::read_to_string(path)?)
}

pub fn write_alist_file(h: &ParityCheckMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_alist(h))?;
    Ok(())
}
