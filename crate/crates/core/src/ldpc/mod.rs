//! Binary LDPC machinery for syndrome-based reconciliation.

mod alist;
mod decoder;
mod generate;

pub use alist::{load_alist, read_alist_file, write_alist, write_alist_file};
pub use decoder::{decode_syndrome, CheckRule, DecodeResult, SyndromeDecoder, MIN_SUM_SCALE};
pub use generate::{degrees_for_rate, generate_regular_code};

use crate::error::{Error, Result};
use crate::quantizer::Frame;

/// Sparse binary parity-check matrix stored as its Tanner graph.
///
/// Edges are numbered in row-major order; `row_ptr`/`edge_col` give each
/// check's neighbours and `col_ptr`/`col_edges` index the same edges by
/// variable node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    edge_col: Vec<u32>,
    edge_row: Vec<u32>,
    col_ptr: Vec<usize>,
    col_edges: Vec<u32>,
}

/// Syndrome bits, one per check.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Syndrome(pub Vec<u8>);

impl Syndrome {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }
}

impl ParityCheckMatrix {
    /// Builds a matrix with `n` columns from 0-based row supports.
    ///
    /// Rows are stored sorted. Duplicate entries in a row, out-of-range
    /// column indices and empty columns are rejected.
    pub fn from_rows(n: usize, rows: &[Vec<usize>]) -> Result<Self> {
        if n == 0 || rows.is_empty() {
            return Err(Error::invalid(
                "parity-check matrix must have at least one row and column",
            ));
        }
        if n > u32::MAX as usize || rows.len() > u32::MAX as usize {
            return Err(Error::invalid("parity-check matrix too large"));
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut edge_col = Vec::new();
        let mut edge_row = Vec::new();
        row_ptr.push(0);
        for (j, row) in rows.iter().enumerate() {
            let mut sorted = row.clone();
            sorted.sort_unstable();
            if let Some(&bad) = sorted.iter().find(|&&c| c >= n) {
                return Err(Error::invalid(format!(
                    "row {j}: column {bad} out of range 0..{n}"
                )));
            }
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("row {j}: duplicate entry")));
            }
            edge_col.extend(sorted.iter().map(|&c| c as u32));
            edge_row.extend(std::iter::repeat_n(j as u32, sorted.len()));
            row_ptr.push(edge_col.len());
        }

        let mut degree = vec![0usize; n];
        for &c in &edge_col {
            degree[c as usize] += 1;
        }
        if let Some(empty) = degree.iter().position(|&d| d == 0) {
            return Err(Error::invalid(format!("column {empty} has no entries")));
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        for d in &degree {
            col_ptr.push(col_ptr.last().unwrap() + d);
        }
        let mut fill = col_ptr[..n].to_vec();
        let mut col_edges = vec![0u32; edge_col.len()];
        for (e, &c) in edge_col.iter().enumerate() {
            col_edges[fill[c as usize]] = e as u32;
            fill[c as usize] += 1;
        }
        Ok(ParityCheckMatrix {
            n,
            row_ptr,
            edge_col,
            edge_row,
            col_ptr,
            col_edges,
        })
    }

    /// Number of columns (frame length).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rows (syndrome length).
    pub fn m(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edge_col.len()
    }

    /// `(n - m) / n`.
    pub fn design_rate(&self) -> f64 {
        (self.n as f64 - self.m() as f64) / self.n as f64
    }

    /// Columns in the support of row `j`, ascending.
    pub fn row(&self, j: usize) -> &[u32] {
        &self.edge_col[self.row_ptr[j]..self.row_ptr[j + 1]]
    }

    /// Rows in the support of column `i`, ascending.
    pub fn col(&self, i: usize) -> impl Iterator<Item = u32> + '_ {
        self.col_edges[self.col_ptr[i]..self.col_ptr[i + 1]]
            .iter()
            .map(|&e| self.edge_row[e as usize])
    }

    pub fn row_degree(&self, j: usize) -> usize {
        self.row_ptr[j + 1] - self.row_ptr[j]
    }

    pub fn col_degree(&self, i: usize) -> usize {
        self.col_ptr[i + 1] - self.col_ptr[i]
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.m())
            .map(|j| self.row(j).iter().map(|&c| c as usize).collect())
            .collect()
    }

    pub(crate) fn row_range(&self, j: usize) -> std::ops::Range<usize> {
        self.row_ptr[j]..self.row_ptr[j + 1]
    }

    pub(crate) fn col_edge_ids(&self, i: usize) -> &[u32] {
        &self.col_edges[self.col_ptr[i]..self.col_ptr[i + 1]]
    }

    pub(crate) fn edge_cols(&self) -> &[u32] {
        &self.edge_col
    }

    /// `H b` over GF(2).
    pub fn syndrome(&self, frame: &Frame) -> Result<Syndrome> {
        self.syndrome_of(frame.bits())
    }

    pub fn syndrome_of(&self, bits: &[u8]) -> Result<Syndrome> {
        if bits.len() != self.n {
            return Err(Error::invalid(format!(
                "frame length {} does not match code length {}",
                bits.len(),
                self.n
            )));
        }
        Ok(Syndrome(
            (0..self.m())
                .map(|j| {
                    self.row(j)
                        .iter()
                        .fold(0u8, |acc, &c| acc ^ (bits[c as usize] & 1))
                })
                .collect(),
        ))
    }

    /// True when `bits` has syndrome `target`. Lengths are assumed to match.
    pub(crate) fn satisfies(&self, bits: &[u8], target: &[u8]) -> bool {
        (0..self.m()).all(|j| {
            self.row(j)
                .iter()
                .fold(0u8, |acc, &c| acc ^ bits[c as usize])
                == target[j]
        })
    }
}
