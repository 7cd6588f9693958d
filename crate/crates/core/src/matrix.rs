//! Dense symmetric dissimilarity matrix shared by every graph builder.

use crate::error::{Error, Result};

/// Square, symmetric, zero-diagonal matrix of non-negative finite values,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SymMatrix {
    /// Validates and wraps a row-major `n × n` buffer.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "buffer of length {} is not {n}x{n}",
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("non-zero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let a = values[i * n + j];
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i},{j}) = {a} is not a finite non-negative value"
                    )));
                }
                if a != values[j * n + i] {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { n, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::InvalidMatrix(format!("row {i} has length {}", r.len())));
            }
            values.extend_from_slice(r);
        }
        Self::new(n, values)
    }

    /// Builds a matrix from the strict upper triangle produced by `f(i, j)`, `i < j`.
    pub(crate) fn from_upper(n: usize, upper: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = upper(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self { n, values }
    }

    /// Builds a matrix from fully computed upper-triangular rows (`rows[i][j - i - 1]`).
    pub(crate) fn from_upper_rows(n: usize, rows: Vec<Vec<f64>>) -> Self {
        let mut values = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self { n, values }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Entrywise map, kept only when the result is still a valid matrix.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &v)| if idx / self.n == idx % self.n { 0.0 } else { f(v) })
            .collect();
        Self::new(self.n, values)
    }

    /// Rows and columns reordered so that entry `(i, j)` of the result is `(perm[i], perm[j])`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        assert_eq!(perm.len(), n);
        Self::from_upper(n, |i, j| self.get(perm[i], perm[j]))
    }
}
