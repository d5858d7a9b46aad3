//! Full (non-restarted) GMRES with modified Gram–Schmidt and complex
//! Givens rotations, driven by a matrix-free operator.

use crate::error::{Error, Result};
use crate::scalar::{czero, norm2, Real, C};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    /// Relative residual target `||b - A x|| <= tol ||b||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            tol: 1e-9,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome<T> {
    pub x: Vec<C<T>>,
    pub iterations: usize,
    /// Final relative residual estimate from the Hessenberg least-squares problem.
    pub residual: f64,
    /// Relative residual estimate after each iteration (entry 0 is 1).
    pub history: Vec<f64>,
}

/// Solves `A x = b` from `x0 = 0`. `apply(v, out)` writes `A v` into `out`.
pub fn gmres<T, F>(mut apply: F, b: &[C<T>], opts: GmresOptions) -> Result<GmresOutcome<T>>
where
    T: Real,
    F: FnMut(&[C<T>], &mut [C<T>]) -> Result<()>,
{
    let n = b.len();
    let beta = norm2(b);
    if beta == T::zero() {
        return Ok(GmresOutcome {
            x: vec![czero(); n],
            iterations: 0,
            residual: 0.0,
            history: vec![0.0],
        });
    }
    let tol = T::lit(opts.tol);
    let m = opts.max_iter.min(n.max(1));
    let mut basis: Vec<Vec<C<T>>> = Vec::with_capacity(m + 1);
    basis.push(b.iter().map(|z| z / beta).collect());
    // Column j of the Hessenberg matrix, already rotated.
    let mut h: Vec<Vec<C<T>>> = Vec::with_capacity(m);
    let mut cs: Vec<T> = Vec::with_capacity(m);
    let mut sn: Vec<C<T>> = Vec::with_capacity(m);
    let mut g = vec![C::new(beta, T::zero())];
    let mut history = vec![1.0];
    let mut w = vec![czero(); n];
    let mut k = 0;
    let mut rel = T::one();
    while k < opts.max_iter && rel > tol {
        if k == m {
            break;
        }
        apply(&basis[k], &mut w)?;
        let mut col = vec![czero(); k + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij: C<T> = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            col[i] = hij;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= hij * vi;
            }
        }
        let hnext = norm2(&w);
        col[k + 1] = C::new(hnext, T::zero());
        for i in 0..k {
            let (c, s) = (cs[i], sn[i]);
            let t = col[i] * c + s * col[i + 1];
            col[i + 1] = col[i + 1] * c - s.conj() * col[i];
            col[i] = t;
        }
        let (c, s, r) = givens(col[k], col[k + 1]);
        col[k] = r;
        col[k + 1] = czero();
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = gk * c;
        g.push(-s.conj() * gk);
        h.push(col);
        k += 1;
        rel = g[k].norm() / beta;
        history.push(rel.as_f64());
        if hnext > T::zero() && rel > tol {
            basis.push(w.iter().map(|z| z / hnext).collect());
        } else {
            break;
        }
    }
    // Back substitution for the k x k upper-triangular system.
    let mut y = vec![czero(); k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= h[j][i] * y[j];
        }
        y[i] = s / h[i][i];
    }
    let mut x = vec![czero(); n];
    for (v, &yj) in basis.iter().zip(&y) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += vi * yj;
        }
    }
    if rel > tol {
        return Err(Error::Convergence {
            iterations: k,
            residual: rel.as_f64(),
            history,
        });
    }
    Ok(GmresOutcome {
        x,
        iterations: k,
        residual: rel.as_f64(),
        history,
    })
}

/// Rotation with real cosine `c` and complex sine `s` such that
/// `[c s; -conj(s) c] [a; b] = [r; 0]`.
fn givens<T: Real>(a: C<T>, b: C<T>) -> (T, C<T>, C<T>) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == T::zero() {
        return (T::one(), czero(), a);
    }
    if na == T::zero() {
        return (T::zero(), b.conj() / nb, C::new(nb, T::zero()));
    }
    let norm = na.hypot(nb);
    let phase = a / na;
    let c = na / norm;
    let s = phase * b.conj() / norm;
    (c, s, phase * norm)
}
