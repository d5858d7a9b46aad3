use std::ops::{AddAssign, Mul};

use num_traits::Zero;

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<V> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<V>,
}

impl<V: Copy + Zero + AddAssign> CsrMatrix<V> {
    /// Builds from `(row, col, value)` triplets, summing duplicates in
    /// their input order.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, V)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<V> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().expect("nonempty") += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
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

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[V]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> V {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(V::zero(), |k| vals[k])
    }

    /// `y = A x` for any vector type the entries can scale.
    pub fn mul_vec<X>(&self, x: &[X], y: &mut [X])
    where
        X: Copy + Zero + AddAssign + Mul<V, Output = X>,
    {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            let mut acc = X::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                acc += x[c] * v;
            }
            *out = acc;
        }
    }

    /// Submatrix with the given rows and columns; `col_map[c]` is the new
    /// column of old column `c` or `usize::MAX` to drop it.
    pub fn select(&self, rows: &[usize], col_map: &[usize], ncols: usize) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut buf: Vec<(usize, V)> = Vec::new();
        for &r in rows {
            let (cols, vals) = self.row(r);
            buf.clear();
            buf.extend(
                cols.iter()
                    .zip(vals)
                    .filter(|(&c, _)| col_map[c] != usize::MAX)
                    .map(|(&c, &v)| (col_map[c], v)),
            );
            buf.sort_unstable_by_key(|&(c, _)| c);
            for &(c, v) in &buf {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows: rows.len(),
            ncols,
            indptr,
            indices,
            values,
        }
    }
}

impl<V: Copy + Zero + AddAssign + PartialEq> CsrMatrix<V> {
    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).all(|(&c, &v)| self.get(c, r) == v)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_sort() {
        let a = CsrMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 1, 2.0), (1, 2, 0.5), (1, 0, 3.0)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 2), 1.5);
        assert_eq!(a.get(0, 0), 0.0);
        let mut y = [0.0; 2];
        a.mul_vec(&[1.0, 1.0, 2.0], &mut y);
        assert_eq!(y, [2.0, 6.0]);
        let sub = a.select(&[1], &[usize::MAX, usize::MAX, 0], 1);
        assert_eq!(sub.get(0, 0), 1.5);
        assert_eq!(sub.nnz(), 1);
    }
}
