//! Compressed sparse row matrices, just enough for operator assembly.

use std::collections::BTreeMap;
use std::io::Write;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nrows];
        for (r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidArgument(format!(
                    "entry ({r}, {c}) outside a {nrows}x{ncols} matrix"
                )));
            }
            *rows[r].entry(c).or_insert(0.0) += v;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Build column by column from dense column vectors.
    pub fn from_columns(nrows: usize, columns: impl IntoIterator<Item = Vec<f64>>) -> Result<Self> {
        let mut triplets = Vec::new();
        let mut ncols = 0;
        for (c, col) in columns.into_iter().enumerate() {
            if col.len() != nrows {
                return Err(Error::InvalidArgument(format!("column {c} has {} rows, expected {nrows}", col.len())));
            }
            triplets.extend(col.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(r, v)| (r, c, *v)));
            ncols = c + 1;
        }
        SparseMatrix::from_triplets(nrows, ncols, triplets)
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0))).expect("in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[row.clone()].binary_search(&c) {
            Ok(k) => self.values[row.start + k],
            Err(_) => 0.0,
        }
    }

    /// Nonzeros of row `r` as (column, value).
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn transpose(&self) -> Self {
        SparseMatrix::from_triplets(self.ncols, self.nrows, self.triplets().map(|(r, c, v)| (c, r, v))).expect("in range")
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        SparseMatrix::from_triplets(self.nrows, self.ncols, self.triplets().chain(other.triplets()))
    }

    pub fn matmul(&self, other: &SparseMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::InvalidArgument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut triplets = Vec::new();
        for r in 0..self.nrows {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    *acc.entry(c).or_insert(0.0) += a * b;
                }
            }
            triplets.extend(acc.into_iter().map(|(c, v)| (r, c, v)));
        }
        SparseMatrix::from_triplets(self.nrows, other.ncols, triplets)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::InvalidArgument(format!("vector of length {} for {} columns", x.len(), self.ncols)));
        }
        Ok((0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect())
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .add(&other.scaled(-1.0))?
            .values
            .iter()
            .fold(0.0, |m, v| m.max(v.abs())))
    }

    /// `max |a_pq - a_qp|`.
    pub fn symmetry_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.transpose()).expect("square")
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }

    /// `P A Pᵀ` for the permutation sending index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.nrows || self.nrows != self.ncols {
            return Err(Error::InvalidArgument("permutation length must match a square matrix".into()));
        }
        SparseMatrix::from_triplets(self.nrows, self.ncols, self.triplets().map(|(r, c, v)| (perm[r], perm[c], v)))
    }

    /// Coordinate text format: a `rows cols nnz` header then one
    /// `row col value` line per nonzero.
    pub fn write_coo<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r} {c} {v:e}")?;
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &SparseMatrix) -> Result<()> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::InvalidArgument(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        Ok(())
    }
}
