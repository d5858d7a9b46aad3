//! Sparse `L D L^T` factorization of real symmetric (possibly indefinite)
//! matrices: geometric nested-dissection ordering, elimination tree, and an
//! up-looking numeric phase that builds `L` one row at a time.

use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::{Real, C};

const NONE: usize = usize::MAX;
/// Subgraphs at or below this size are not dissected further.
const LEAF_SIZE: usize = 64;

/// Relative pivot threshold below which the matrix is reported singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Geometric nested dissection: split along the longer bounding-box axis at
/// the median, move left nodes adjacent to the right half into the
/// separator, order `left, right, separator` recursively.
pub fn nested_dissection<T: Real>(a: &CsrMatrix<T>, coords: &[Point<T>]) -> Vec<usize> {
    let n = a.nrows();
    assert_eq!(coords.len(), n);
    let mut order = Vec::with_capacity(n);
    let mut stamp = vec![0u32; n];
    let mut counter = 0u32;
    let mut nodes: Vec<usize> = (0..n).collect();
    dissect(a, coords, &mut nodes, &mut order, &mut stamp, &mut counter);
    order
}

fn dissect<T: Real>(
    a: &CsrMatrix<T>,
    coords: &[Point<T>],
    nodes: &mut [usize],
    order: &mut Vec<usize>,
    stamp: &mut [u32],
    counter: &mut u32,
) {
    if nodes.len() <= LEAF_SIZE {
        order.extend_from_slice(nodes);
        return;
    }
    let (mut lo, mut hi) = ([T::infinity(); 2], [T::neg_infinity(); 2]);
    for &v in nodes.iter() {
        for c in 0..2 {
            lo[c] = lo[c].min(coords[v][c]);
            hi[c] = hi[c].max(coords[v][c]);
        }
    }
    let axis = usize::from(hi[1] - lo[1] > hi[0] - lo[0]);
    let mid = nodes.len() / 2;
    nodes.select_nth_unstable_by(mid, |&p, &q| {
        coords[p][axis]
            .partial_cmp(&coords[q][axis])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(p.cmp(&q))
    });
    *counter += 1;
    let right_mark = *counter;
    for &v in &nodes[mid..] {
        stamp[v] = right_mark;
    }
    let (left, right) = nodes.split_at_mut(mid);
    let mut interior = Vec::with_capacity(left.len());
    let mut separator = Vec::new();
    for &v in left.iter() {
        let (cols, _) = a.row(v);
        if cols.iter().any(|&c| c != v && stamp[c] == right_mark) {
            separator.push(v);
        } else {
            interior.push(v);
        }
    }
    dissect(a, coords, &mut interior, order, stamp, counter);
    dissect(a, coords, right, order, stamp, counter);
    order.extend_from_slice(&separator);
}

/// Factorization `P A P^T = L D L^T` with unit lower-triangular `L`.
#[derive(Debug, Clone)]
pub struct SparseLdlt<T> {
    n: usize,
    /// `perm[k]` is the original index eliminated at step `k`.
    perm: Vec<usize>,
    /// Strictly lower part of `L`, column-compressed.
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<T>,
    dinv: Vec<T>,
}

impl<T: Real> SparseLdlt<T> {
    /// Factorizes a symmetric matrix; only the pattern and values of the
    /// full matrix are read. `coords` drive the ordering (natural order
    /// without them).
    pub fn factor(a: &CsrMatrix<T>, coords: Option<&[Point<T>]>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: a.ncols(),
            });
        }
        let perm = match coords {
            Some(c) => nested_dissection(a, c),
            None => (0..n).collect(),
        };
        let mut pinv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }
        // Upper triangle of the permuted matrix, column-compressed.
        let (ap, ai, ax) = permuted_upper(a, &perm, &pinv);

        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &i0 in &ai[ap[j]..ap[j + 1]] {
                let mut i = i0;
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let total = lp[n];
        let mut li = vec![0usize; total];
        let mut lx = vec![T::zero(); total];
        let mut dinv = vec![T::zero(); n];

        let scale = (0..n)
            .map(|i| a.get(i, i).abs())
            .fold(T::zero(), T::max);
        let threshold = T::lit(PIVOT_THRESHOLD) * scale;

        let mut next = lp[..n].to_vec();
        let mut y = vec![T::zero(); n];
        let mut used = vec![false; n];
        let mut stack: Vec<usize> = Vec::with_capacity(n);
        let mut path: Vec<usize> = Vec::with_capacity(n);
        for k in 0..n {
            stack.clear();
            let mut d = T::zero();
            for p in ap[k]..ap[k + 1] {
                let b = ai[p];
                if b == k {
                    d = ax[p];
                    continue;
                }
                y[b] = ax[p];
                if used[b] {
                    continue;
                }
                used[b] = true;
                path.clear();
                path.push(b);
                let mut m = etree[b];
                while m != NONE && m < k && !used[m] {
                    used[m] = true;
                    path.push(m);
                    m = etree[m];
                }
                stack.extend(path.iter().rev());
            }
            for &c in stack.iter().rev() {
                let yc = y[c];
                for q in lp[c]..next[c] {
                    y[li[q]] -= lx[q] * yc;
                }
                let l = yc * dinv[c];
                li[next[c]] = k;
                lx[next[c]] = l;
                next[c] += 1;
                d -= yc * l;
                y[c] = T::zero();
                used[c] = false;
            }
            if !(d.abs() > threshold) {
                return Err(Error::Resonance {
                    row: perm[k],
                    pivot: (d.abs() / scale.max(T::min_positive_value())).as_f64(),
                    threshold: PIVOT_THRESHOLD,
                });
            }
            dinv[k] = T::one() / d;
        }
        Ok(SparseLdlt {
            n,
            perm,
            lp,
            li,
            lx,
            dinv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal entries of `L`.
    pub fn factor_nnz(&self) -> usize {
        self.li.len()
    }

    /// Solves `A x = b` in place for a complex right-hand side.
    pub fn solve_in_place(&self, b: &mut [C<T>]) {
        assert_eq!(b.len(), self.n);
        let mut x: Vec<C<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..self.n {
            let xi = x[i];
            for q in self.lp[i]..self.lp[i + 1] {
                x[self.li[q]] -= xi * self.lx[q];
            }
        }
        for (xi, &d) in x.iter_mut().zip(&self.dinv) {
            *xi = *xi * d;
        }
        for i in (0..self.n).rev() {
            let mut xi = x[i];
            for q in self.lp[i]..self.lp[i + 1] {
                xi -= x[self.li[q]] * self.lx[q];
            }
            x[i] = xi;
        }
        for (k, &p) in self.perm.iter().enumerate() {
            b[p] = x[k];
        }
    }
}

type Csc<T> = (Vec<usize>, Vec<usize>, Vec<T>);

fn permuted_upper<T: Real>(a: &CsrMatrix<T>, perm: &[usize], pinv: &[usize]) -> Csc<T> {
    let n = perm.len();
    // Column j of the permuted upper triangle is row perm[j] of A restricted
    // to entries whose permuted index is <= j (A is symmetric).
    let mut ap = vec![0usize; n + 1];
    let mut ai = Vec::with_capacity(a.nnz() / 2 + n);
    let mut ax = Vec::with_capacity(a.nnz() / 2 + n);
    let mut buf: Vec<(usize, T)> = Vec::new();
    for j in 0..n {
        let (cols, vals) = a.row(perm[j]);
        buf.clear();
        buf.extend(
            cols.iter()
                .zip(vals)
                .map(|(&c, &v)| (pinv[c], v))
                .filter(|&(i, _)| i <= j),
        );
        buf.sort_unstable_by_key(|&(i, _)| i);
        for &(i, v) in &buf {
            ai.push(i);
            ax.push(v);
        }
        ap[j + 1] = ai.len();
    }
    (ap, ai, ax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{octagon_fan, LagrangeSpace};
    use crate::scalar::{cplx, norm_inf};

    fn laplace_like(space: &LagrangeSpace<f64>, shift: f64) -> CsrMatrix<f64> {
        // Graph Laplacian of the DoF adjacency plus a diagonal shift; an
        // indefinite matrix for negative shifts.
        let mut trip = Vec::new();
        for t in 0..space.mesh().num_triangles() {
            let dofs = space.cell_dofs(t);
            for &i in dofs {
                for &j in dofs {
                    if i != j {
                        trip.push((i, j, -1.0));
                        trip.push((i, i, 1.0));
                    }
                }
            }
        }
        for i in 0..space.num_dofs() {
            trip.push((i, i, shift + 0.01 * i as f64));
        }
        CsrMatrix::from_triplets(space.num_dofs(), space.num_dofs(), trip)
    }

    #[test]
    fn solves_indefinite_system() {
        let space = LagrangeSpace::new(octagon_fan(3.0, 6), 2).unwrap();
        for shift in [0.5, -3.3] {
            let a = laplace_like(&space, shift);
            let f = SparseLdlt::factor(&a, Some(space.nodes())).unwrap();
            let xs: Vec<C<f64>> = (0..a.nrows())
                .map(|i| cplx((i as f64).sin(), (i as f64 * 0.3).cos()))
                .collect();
            let mut b = vec![cplx(0.0, 0.0); a.nrows()];
            a.mul_vec(&xs, &mut b);
            f.solve_in_place(&mut b);
            let err: Vec<C<f64>> = b.iter().zip(&xs).map(|(p, q)| p - q).collect();
            assert!(norm_inf(&err) < 1e-9, "shift {shift}: {}", norm_inf(&err));
        }
    }

    #[test]
    fn dissection_is_a_permutation_and_reduces_fill() {
        let space = LagrangeSpace::new(octagon_fan(3.0, 10), 2).unwrap();
        let a = laplace_like(&space, 1.0);
        let mut order = nested_dissection(&a, space.nodes());
        let nd = SparseLdlt::factor(&a, Some(space.nodes())).unwrap().factor_nnz();
        let natural = SparseLdlt::factor(&a, None).unwrap().factor_nnz();
        order.sort_unstable();
        assert_eq!(order, (0..a.nrows()).collect::<Vec<_>>());
        assert!(nd < natural, "nd {nd} vs natural {natural}");
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 2, 2.0)],
        );
        assert!(matches!(SparseLdlt::factor(&a, None), Err(Error::Resonance { .. })));
    }
}
