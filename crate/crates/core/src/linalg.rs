//! Column-major sparse storage and the two kernels coordinate descent needs:
//! a sparse column dot product against a dense vector, and a sparse axpy.
//!
//! Every kernel call is tallied in an [`OpCounter`] so that the cost of a run
//! can be audited in units of column touches.

use crate::error::{Error, Result};

/// Tally of column-level work.
///
/// One column op is a single pass over the nonzeros of one column; `nnz` keeps
/// the number of scalar entries those passes touched.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    column_ops: u64,
    nnz: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn record_column(&mut self, nnz: usize) {
        self.column_ops += 1;
        self.nnz += nnz as u64;
    }

    /// Number of column passes (the vector-operation count).
    pub fn column_ops(&self) -> u64 {
        self.column_ops
    }

    /// Number of scalar entries read or written by those passes.
    pub fn nnz_touched(&self) -> u64 {
        self.nnz
    }

    pub fn merged(&self, other: &OpCounter) -> OpCounter {
        OpCounter {
            column_ops: self.column_ops + other.column_ops,
            nnz: self.nnz + other.nnz,
        }
    }
}

/// Borrowed view of one sparse column.
#[derive(Debug, Clone, Copy)]
pub struct ColumnView<'a> {
    pub rows: &'a [usize],
    pub values: &'a [f64],
}

impl<'a> ColumnView<'a> {
    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.rows.iter().copied().zip(self.values.iter().copied())
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// A `d x n` matrix stored as `n` sparse columns (compressed sparse column layout).
///
/// Row indices inside a column are strictly increasing, every stored value is
/// finite and nonzero, and Euclidean column norms are cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumnMatrix {
    n_rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    norms: Vec<f64>,
}

impl SparseColumnMatrix {
    /// Builds a matrix from per-column `(row, value)` lists.
    ///
    /// Explicit zeros are dropped. Rows must be strictly increasing within a
    /// column and lie in `[0, n_rows)`.
    pub fn from_columns(n_rows: usize, columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let nnz_hint = columns.iter().map(Vec::len).sum();
        let mut col_ptr = Vec::with_capacity(columns.len() + 1);
        let mut row_idx = Vec::with_capacity(nnz_hint);
        let mut values = Vec::with_capacity(nnz_hint);
        col_ptr.push(0);
        for (j, col) in columns.into_iter().enumerate() {
            let mut prev: Option<usize> = None;
            for (r, v) in col {
                if r >= n_rows {
                    return Err(Error::InvalidArgument(format!(
                        "column {j}: row index {r} out of range for {n_rows} rows"
                    )));
                }
                if let Some(p) = prev {
                    if r <= p {
                        return Err(Error::InvalidArgument(format!(
                            "column {j}: row indices not strictly increasing ({p} then {r})"
                        )));
                    }
                }
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "column {j}: non-finite value at row {r}"
                    )));
                }
                prev = Some(r);
                if v != 0.0 {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(Self::from_raw_parts(n_rows, col_ptr, row_idx, values))
    }

    /// Builds a matrix from dense column-major storage, skipping zeros.
    pub fn from_dense(n_rows: usize, n_cols: usize, column_major: &[f64]) -> Result<Self> {
        if column_major.len() != n_rows * n_cols {
            return Err(Error::InvalidArgument(format!(
                "dense buffer has {} entries, expected {}",
                column_major.len(),
                n_rows * n_cols
            )));
        }
        let columns = (0..n_cols)
            .map(|j| {
                column_major[j * n_rows..(j + 1) * n_rows]
                    .iter()
                    .copied()
                    .enumerate()
                    .collect()
            })
            .collect();
        Self::from_columns(n_rows, columns)
    }

    fn from_raw_parts(
        n_rows: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        let norms = col_ptr
            .windows(2)
            .map(|w| values[w[0]..w[1]].iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        Self {
            n_rows,
            col_ptr,
            row_idx,
            values,
            norms,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Fraction of stored entries, `nnz / (d n)`.
    pub fn density(&self) -> f64 {
        let cells = self.n_rows * self.n_cols();
        if cells == 0 {
            0.0
        } else {
            self.nnz() as f64 / cells as f64
        }
    }

    /// # Panics
    /// If `i >= n_cols()`.
    #[inline]
    pub fn column(&self, i: usize) -> ColumnView<'_> {
        assert!(
            i < self.n_cols(),
            "column index {i} out of range ({} columns)",
            self.n_cols()
        );
        let (s, e) = (self.col_ptr[i], self.col_ptr[i + 1]);
        ColumnView {
            rows: &self.row_idx[s..e],
            values: &self.values[s..e],
        }
    }

    pub fn columns(&self) -> impl Iterator<Item = ColumnView<'_>> {
        (0..self.n_cols()).map(move |i| self.column(i))
    }

    #[inline]
    pub fn column_norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn column_norms(&self) -> &[f64] {
        &self.norms
    }

    /// `a_i^T v` over the nonzeros of column `i`; one column op.
    ///
    /// # Panics
    /// If `i` is out of range or `v` is shorter than `n_rows()`.
    #[inline]
    pub fn column_dot(&self, i: usize, v: &[f64], ops: &mut OpCounter) -> f64 {
        assert_eq!(
            v.len(),
            self.n_rows,
            "vector length must equal the row count"
        );
        let col = self.column(i);
        ops.record_column(col.nnz());
        col.iter().map(|(r, a)| a * v[r]).sum()
    }

    /// `v += c a_i`; one column op.
    ///
    /// # Panics
    /// If `i` is out of range or `v` is shorter than `n_rows()`.
    #[inline]
    pub fn add_scaled_column(&self, i: usize, c: f64, v: &mut [f64], ops: &mut OpCounter) {
        assert_eq!(
            v.len(),
            self.n_rows,
            "vector length must equal the row count"
        );
        let col = self.column(i);
        ops.record_column(col.nnz());
        for (r, a) in col.iter() {
            v[r] += c * a;
        }
    }

    /// `A x`, computed as `n` column passes.
    pub fn mat_vec(&self, x: &[f64], ops: &mut OpCounter) -> Vec<f64> {
        assert_eq!(
            x.len(),
            self.n_cols(),
            "vector length must equal the column count"
        );
        let mut out = vec![0.0; self.n_rows];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                self.add_scaled_column(i, xi, &mut out, ops);
            }
        }
        out
    }

    /// `A^T v`, one column dot per column.
    pub fn transpose_mat_vec(&self, v: &[f64], ops: &mut OpCounter) -> Vec<f64> {
        (0..self.n_cols())
            .map(|i| self.column_dot(i, v, ops))
            .collect()
    }

    pub fn transpose(&self) -> SparseColumnMatrix {
        let mut counts = vec![0usize; self.n_rows + 1];
        for &r in &self.row_idx {
            counts[r + 1] += 1;
        }
        for r in 0..self.n_rows {
            counts[r + 1] += counts[r];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // Visiting source columns in order keeps the new row indices sorted.
        for j in 0..self.n_cols() {
            for (r, v) in self.column(j).iter() {
                let slot = next[r];
                row_idx[slot] = j;
                values[slot] = v;
                next[r] += 1;
            }
        }
        Self::from_raw_parts(self.n_cols(), col_ptr, row_idx, values)
    }

    /// Submatrix on the given rows and columns, both strictly increasing.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<SparseColumnMatrix> {
        let mut new_row = vec![usize::MAX; self.n_rows];
        for (k, &r) in rows.iter().enumerate() {
            if r >= self.n_rows {
                return Err(Error::InvalidArgument(format!("row {r} out of range")));
            }
            new_row[r] = k;
        }
        let mut columns = Vec::with_capacity(cols.len());
        for &c in cols {
            if c >= self.n_cols() {
                return Err(Error::InvalidArgument(format!("column {c} out of range")));
            }
            columns.push(
                self.column(c)
                    .iter()
                    .filter(|&(r, _)| new_row[r] != usize::MAX)
                    .map(|(r, v)| (new_row[r], v))
                    .collect(),
            );
        }
        Self::from_columns(rows.len(), columns)
    }

    /// Multiplies column `i` by `factors[i]`.
    pub fn scale_columns(&self, factors: &[f64]) -> SparseColumnMatrix {
        assert_eq!(factors.len(), self.n_cols());
        let mut values = self.values.clone();
        for (i, f) in factors.iter().enumerate() {
            for v in &mut values[self.col_ptr[i]..self.col_ptr[i + 1]] {
                *v *= f;
            }
        }
        Self::from_raw_parts(
            self.n_rows,
            self.col_ptr.clone(),
            self.row_idx.clone(),
            values,
        )
    }

    /// Number of stored entries in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_rows];
        for &r in &self.row_idx {
            counts[r] += 1;
        }
        counts
    }

    pub fn to_dense_column_major(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows * self.n_cols()];
        for j in 0..self.n_cols() {
            for (r, v) in self.column(j).iter() {
                out[j * self.n_rows + r] = v;
            }
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}
