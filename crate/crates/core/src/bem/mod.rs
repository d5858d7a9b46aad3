//! Nyström discretization of the exterior Dirichlet problem with the
//! Brakhage–Werner ansatz `u = (DL - ik SL) phi` on the smooth curve Γ.
//!
//! Layer operators use the parameter measure `dt`: `|x'|` is absorbed into
//! the density for the single layer and into the normal `nu = (x2', -x1')`
//! for the double layer. Kernels are split as `A log sin^2((s-t)/2) + B`;
//! logarithmic parts are integrated exactly against the trigonometric
//! interpolant, smooth parts by the trapezoidal rule.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dot, norm, sub, to_f64, CurvePoint, ParametricCurve, Point};
use crate::linalg::{DenseLu, DenseMatrix};
use crate::postproc::FarFieldTable;
use crate::scalar::{cis, cplx, czero, Real, C, EULER_GAMMA};
use crate::specfun::bessel01;

/// Default evaluation margin: potentials are only evaluated outside `1.1 Γ`.
pub const DEFAULT_MARGIN: f64 = 1.1;

/// Circulant weights `R_ij = int L_j(t) log sin^2((t_i - t)/2) dt`, stored
/// by the offset `(j - i) mod 2N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeights<T> {
    n: usize,
    row: Vec<T>,
}

impl<T: Real> LogWeights<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        let m = 2 * self.n;
        self.row[(j + m - i % m) % m]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// `R_ij = -(pi/N) [log 4 + sum_{m=1}^{N-1} (2/m) cos(m (t_i - t_j)) + (1/N) cos(N (t_i - t_j))]`.
pub fn log_weights<T: Real>(n: usize) -> LogWeights<T> {
    assert!(n >= 2, "log_weights needs N >= 2");
    let nf = T::from_usize_lossy(n);
    let row = (0..2 * n)
        .map(|j| {
            // Evaluate at the folded offset so the row is exactly even.
            let tau = T::PI() * T::from_usize_lossy(j.min(2 * n - j)) / nf;
            let mut s = T::lit(4.0).ln();
            for m in 1..n {
                let mf = T::from_usize_lossy(m);
                s += T::lit(2.0) / mf * (mf * tau).cos();
            }
            // cos(N t_j) = (-1)^j exactly.
            let alt = if j % 2 == 0 { T::one() } else { -T::one() };
            s += alt / nf;
            -T::PI() / nf * s
        })
        .collect();
    LogWeights { n, row }
}

/// Values of the four kernel parts at one `(s, t)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSplit<T> {
    pub a: C<T>,
    pub b: C<T>,
    pub c: C<T>,
    pub d: C<T>,
}

/// Splitting of the single-layer kernel `Phi(x(s) - x(t))` and of the
/// double-layer kernel `grad_y Phi(x(s) - y) . nu(t)` into
/// `A log sin^2((s-t)/2) + B` and `C log sin^2((s-t)/2) + D`.
pub fn kernel_split<T: Real>(curve: &ParametricCurve<T>, k: T, s: T, t: T) -> KernelSplit<T> {
    split_at(&curve.eval(s), &curve.eval(t), s - t, k)
}

fn split_at<T: Real>(ps: &CurvePoint<T>, pt: &CurvePoint<T>, h: T, k: T) -> KernelSplit<T> {
    let four_pi = T::lit(4.0) * T::PI();
    let diff = sub(ps.x, pt.x);
    let r = norm(diff);
    let half_sin = (h / T::lit(2.0)).sin();
    // Coincident parameters modulo 2π take the analytic diagonal limits.
    if r == T::zero() || half_sin.abs() < T::lit(1e-14) {
        let speed = ps.speed();
        let b = cplx(
            -(T::lit(EULER_GAMMA) + (k * speed).ln()) / T::TAU(),
            T::lit(0.25),
        );
        let dd = dot(ps.normal(), ps.d2) / (four_pi * speed * speed);
        return KernelSplit {
            a: cplx(-T::one() / four_pi, T::zero()),
            b,
            c: czero(),
            d: cplx(dd, T::zero()),
        };
    }
    let [j0, j1, y0, y1] = bessel01(k * r);
    let ls = (half_sin * half_sin).ln();
    let phi = cplx(-y0 / T::lit(4.0), j0 / T::lit(4.0));
    let a = cplx(-j0 / four_pi, T::zero());
    let q = dot(diff, pt.normal()) / r;
    let dl = cplx(-k * y1 / T::lit(4.0), k * j1 / T::lit(4.0)) * q;
    let c = cplx(-k / four_pi * j1 * q, T::zero());
    KernelSplit {
        a,
        b: phi - a * ls,
        c,
        d: dl - c * ls,
    }
}

/// Factorized Nyström system on Γ.
#[derive(Debug, Clone)]
pub struct BemDiscretization<T> {
    curve: ParametricCurve<T>,
    k: T,
    n: usize,
    params: Vec<T>,
    samples: Vec<CurvePoint<T>>,
    v: DenseMatrix<T>,
    kmat: DenseMatrix<T>,
    system: DenseMatrix<T>,
    lu: DenseLu<T>,
    margin: T,
}

/// Point values `phi(t_j)` of a boundary density.
pub type Density<T> = Vec<C<T>>;

/// Builds `V_k^N`, `K_k^N` and factorizes `I/2 + K - ik V`.
pub fn assemble_bem<T: Real>(curve: &ParametricCurve<T>, k: T, n: usize) -> Result<BemDiscretization<T>> {
    if n < 8 {
        return Err(Error::Domain(format!("BEM needs N >= 8, got {n}")));
    }
    if !(k > T::zero() && k.is_finite()) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let m = 2 * n;
    let nf = T::from_usize_lossy(n);
    let params: Vec<T> = (0..m)
        .map(|j| T::PI() * T::from_usize_lossy(j) / nf)
        .collect();
    let samples: Vec<CurvePoint<T>> = params.iter().map(|&t| curve.eval(t)).collect();
    let rw = log_weights::<T>(n);
    let trap = T::PI() / nf;
    let mut v = DenseMatrix::zeros(m, m);
    let mut kmat = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let h = T::PI() * T::from_usize_lossy(i) / nf - T::PI() * T::from_usize_lossy(j) / nf;
            let ks = split_at(&samples[i], &samples[j], h, k);
            let r = rw.get(i, j);
            *v.at_mut(i, j) = ks.a * r + ks.b * trap;
            *kmat.at_mut(i, j) = ks.c * r + ks.d * trap;
        }
    }
    let ik = cplx(T::zero(), k);
    let mut system = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut s = kmat.at(i, j) - ik * v.at(i, j);
            if i == j {
                s += cplx(T::lit(0.5), T::zero());
            }
            *system.at_mut(i, j) = s;
        }
    }
    let lu = DenseLu::factor(system.clone())?;
    Ok(BemDiscretization {
        curve: curve.clone(),
        k,
        n,
        params,
        samples,
        v,
        kmat,
        system,
        lu,
        margin: T::lit(DEFAULT_MARGIN),
    })
}

impl<T: Real> BemDiscretization<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes `2N`.
    pub fn len(&self) -> usize {
        2 * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn wavenumber(&self) -> T {
        self.k
    }

    pub fn curve(&self) -> &ParametricCurve<T> {
        &self.curve
    }

    /// Nodes `t_j = j pi / N`.
    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn samples(&self) -> &[CurvePoint<T>] {
        &self.samples
    }

    pub fn single_layer(&self) -> &DenseMatrix<T> {
        &self.v
    }

    pub fn double_layer(&self) -> &DenseMatrix<T> {
        &self.kmat
    }

    /// The Brakhage–Werner matrix `I/2 + K - ik V`.
    pub fn system(&self) -> &DenseMatrix<T> {
        &self.system
    }

    pub fn margin(&self) -> T {
        self.margin
    }

    /// Changes the evaluation margin (potentials are evaluated only
    /// outside `margin * Γ`).
    pub fn with_margin(mut self, margin: T) -> Self {
        self.margin = margin;
        self
    }

    /// Density solving `(I/2 + K - ik V) phi = f`.
    pub fn bw_solve(&self, f: &[C<T>]) -> Result<Density<T>> {
        self.check_len(f.len())?;
        let mut x = self.lu.solve(f)?;
        // One refinement sweep pushes the residual to rounding level.
        let mut r = vec![czero(); f.len()];
        self.system.mul_vec(&x, &mut r);
        for (ri, fi) in r.iter_mut().zip(f) {
            *ri = fi - *ri;
        }
        let dx = self.lu.solve(&r)?;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        Ok(x)
    }

    /// Smooth potential kernel row: contribution of node `j` to
    /// `(DL - ik SL) phi` at `z`, including the trapezoid weight.
    fn potential_row(&self, z: Point<T>, out: &mut [C<T>]) {
        let trap = T::PI() / T::from_usize_lossy(self.n);
        let k = self.k;
        for (o, s) in out.iter_mut().zip(&self.samples) {
            let diff = sub(z, s.x);
            let r = norm(diff);
            let [j0, j1, y0, y1] = bessel01(k * r);
            let phi = cplx(-y0 / T::lit(4.0), j0 / T::lit(4.0));
            let q = dot(diff, s.normal()) / r;
            let dl = cplx(-k * y1 / T::lit(4.0), k * j1 / T::lit(4.0)) * q;
            *o = (dl - cplx(T::zero(), k) * phi) * trap;
        }
    }

    fn check_point(&self, z: Point<T>) -> Result<()> {
        if !(z[0].is_finite() && z[1].is_finite()) || !self.curve.outside_scaled(z, self.margin) {
            return Err(Error::Proximity { x: to_f64(z) });
        }
        Ok(())
    }

    /// `(DL^N - ik SL^N) phi` at exterior points.
    pub fn potential_eval(&self, phi: &[C<T>], points: &[Point<T>]) -> Result<Vec<C<T>>> {
        self.check_len(phi.len())?;
        points
            .par_iter()
            .map_init(
                || vec![czero(); self.len()],
                |row, &z| {
                    self.check_point(z)?;
                    self.potential_row(z, row);
                    Ok(row.iter().zip(phi).map(|(a, b)| a * b).sum())
                },
            )
            .collect()
    }

    /// Matrix mapping densities to potential values at `points`
    /// (column `j` is the response to the `j`-th cardinal density).
    pub fn potential_matrix(&self, points: &[Point<T>]) -> Result<DenseMatrix<T>> {
        let m = self.len();
        let mut mat = DenseMatrix::zeros(points.len(), m);
        if m > 0 {
            mat.data
                .par_chunks_mut(m)
                .zip(points.par_iter())
                .try_for_each(|(row, &z)| {
                    self.check_point(z)?;
                    self.potential_row(z, row);
                    Ok::<(), Error>(())
                })?;
        }
        Ok(mat)
    }

    /// Far-field values `F_N phi` at the angles.
    pub fn far_field_values(&self, phi: &[C<T>], angles: &[T]) -> Result<Vec<C<T>>> {
        self.check_len(phi.len())?;
        let k = self.k;
        let trap = T::PI() / T::from_usize_lossy(self.n);
        let pref = cis(-T::FRAC_PI_4()) * (k / (T::lit(8.0) * T::PI())).sqrt() * trap;
        Ok(angles
            .iter()
            .map(|&theta| {
                let zhat = [theta.cos(), theta.sin()];
                let sum: C<T> = self
                    .samples
                    .iter()
                    .zip(phi)
                    .map(|(s, &f)| cis(-k * dot(zhat, s.x)) * (dot(zhat, s.normal()) + T::one()) * f)
                    .sum();
                pref * sum
            })
            .collect())
    }

    /// Far field on a uniform angle grid.
    pub fn far_field(&self, phi: &[C<T>], angles: &[T]) -> Result<FarFieldTable<T>> {
        let values = self.far_field_values(phi, angles)?;
        FarFieldTable::new(angles.to_vec(), values, self.k, None)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }
}

/// Radiating fundamental solution `Phi_k(x - z0)`.
pub fn point_source<T: Real>(k: T, z0: Point<T>, x: Point<T>) -> C<T> {
    let r = norm(sub(x, z0));
    let [j0, _, y0, _] = bessel01(k * r);
    cplx(-y0 / T::lit(4.0), j0 / T::lit(4.0))
}

/// Gradient of `Phi_k(x - z0)` with respect to `x`.
pub fn point_source_gradient<T: Real>(k: T, z0: Point<T>, x: Point<T>) -> [C<T>; 2] {
    let diff = sub(x, z0);
    let r = norm(diff);
    let [_, j1, _, y1] = bessel01(k * r);
    // d/dr (i/4) H0(kr) = -(ik/4) H1(kr).
    let dr = cplx(k * y1 / T::lit(4.0), -k * j1 / T::lit(4.0));
    [dr * (diff[0] / r), dr * (diff[1] / r)]
}

/// Far field of `Phi_k(. - z0)`: `e^{i pi/4} / sqrt(8 pi k) e^{-ik zhat.z0}`.
pub fn point_source_far_field<T: Real>(k: T, z0: Point<T>, theta: T) -> C<T> {
    let zhat = [theta.cos(), theta.sin()];
    cis(T::FRAC_PI_4()) / (T::lit(8.0) * T::PI() * k).sqrt() * cis(-k * dot(zhat, z0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::norm_inf;
    use crate::specfun::{bessel_j, hankel1};
    use std::f64::consts::PI;

    #[test]
    fn log_weight_identities() {
        for n in [4usize, 16, 33] {
            let r = log_weights::<f64>(n);
            let m = 2 * n;
            let row: f64 = (0..m).map(|j| r.get(0, j)).sum();
            assert!((row + 2.0 * PI * 4f64.ln()).abs() < 1e-12);
            for p in 1..n {
                let f: f64 = (0..m)
                    .map(|j| r.get(0, j) * (p as f64 * j as f64 * PI / n as f64).cos())
                    .sum();
                assert!((f + 2.0 * PI / p as f64).abs() < 1e-10, "n={n} p={p}");
            }
            for i in 0..m {
                for j in 0..m {
                    assert_eq!(r.get(i, j), r.get((i + 1) % m, (j + 1) % m));
                    assert!((r.get(i, j) - r.get(j, i)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn split_reproduces_kernels_off_diagonal() {
        let curve = ParametricCurve::circle(1.0f64);
        let (s, t) = (1.0f64, 2.0f64);
        let ks = kernel_split(&curve, 1.0, s, t);
        let ls = ((s - t) / 2.0).sin().powi(2).ln();
        let r = norm(sub(curve.eval(s).x, curve.eval(t).x));
        let direct = hankel1(0, r).unwrap() * cplx(0.0, 0.25);
        assert!((ks.a * ls + ks.b - direct).norm() < 1e-13);
        let diag = kernel_split(&curve, 1.0, 0.7, 0.7);
        assert!((diag.a.re + 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert_eq!(diag.c, czero());
        assert!((diag.d.re + 1.0 / (4.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn diagonal_limits_are_continuous() {
        // B and D are smooth: their diagonal values match nearby off-diagonal ones.
        let curve = ParametricCurve::rounded_square();
        for s in [0.3f64, 1.1, 2.9] {
            let diag = kernel_split(&curve, 5.0, s, s);
            let near = kernel_split(&curve, 5.0, s, s + 1e-5);
            assert!((diag.b - near.b).norm() < 1e-4);
            assert!((diag.d - near.d).norm() < 1e-4);
        }
    }

    #[test]
    fn circle_single_layer_oracle() {
        let curve = ParametricCurve::circle(1.0f64);
        let bem = assemble_bem(&curve, 1.0, 32).unwrap();
        let ones = vec![cplx(1.0, 0.0); bem.len()];
        let mut out = vec![czero(); bem.len()];
        bem.single_layer().mul_vec(&ones, &mut out);
        let exact = cplx(0.0, PI / 2.0) * bessel_j(0, 1.0).unwrap() * hankel1(0, 1.0).unwrap();
        assert!((exact - cplx(-0.10609, 0.91974)).norm() < 1e-4);
        for v in out {
            assert!((v - exact).norm() < 1e-10);
        }
        let v = bem.single_layer();
        for i in 0..v.rows {
            for j in 0..v.cols {
                assert!((v.at(i, j) - v.at(j, i)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn laplace_gauss_identity() {
        let curve = ParametricCurve::circle(1.0f64);
        let bem = assemble_bem(&curve, 1e-6, 32).unwrap();
        let ones = vec![cplx(1.0, 0.0); bem.len()];
        let mut out = vec![czero(); bem.len()];
        bem.double_layer().mul_vec(&ones, &mut out);
        for v in out {
            assert!((v - cplx(-0.5, 0.0)).norm() < 1e-6);
        }
    }

    fn exterior_points(curve: &ParametricCurve<f64>, count: usize) -> Vec<Point<f64>> {
        (0..count)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / count as f64 + 0.1;
                let rho = 1.2 + 0.8 * ((i * 7 % 11) as f64 / 10.0);
                let p = curve.eval(t).x;
                [rho * p[0], rho * p[1]]
            })
            .collect()
    }

    #[test]
    fn fundamental_solution_oracle() {
        let curve = ParametricCurve::rounded_square();
        let k = 5.0;
        let z0 = [0.3, -0.2];
        let pts = exterior_points(&curve, 50);
        let exact: Vec<C<f64>> = pts.iter().map(|&p| point_source(k, z0, p)).collect();
        let angles: Vec<f64> = (0..64).map(|i| 2.0 * PI * i as f64 / 64.0).collect();
        let mut errs = Vec::new();
        for n in [16usize, 32, 64] {
            let bem = assemble_bem(&curve, k, n).unwrap();
            let f: Vec<C<f64>> = bem.samples().iter().map(|s| point_source(k, z0, s.x)).collect();
            let phi = bem.bw_solve(&f).unwrap();
            let u = bem.potential_eval(&phi, &pts).unwrap();
            let e: Vec<C<f64>> = u.iter().zip(&exact).map(|(a, b)| a - b).collect();
            errs.push(norm_inf(&e));
            if n == 64 {
                let ff = bem.far_field_values(&phi, &angles).unwrap();
                for (v, &th) in ff.iter().zip(&angles) {
                    let ex = point_source_far_field(k, z0, th);
                    assert!((v - ex).norm() / ex.norm() < 1e-8);
                }
                // Linearity and residual of the dense solve.
                let alpha = cplx(0.3, -1.7);
                let scaled: Vec<C<f64>> = f.iter().map(|v| v * alpha).collect();
                let phi2 = bem.bw_solve(&scaled).unwrap();
                for (a, b) in phi2.iter().zip(&phi) {
                    assert!((a - b * alpha).norm() < 1e-13 * (1.0 + b.norm()));
                }
                let mut r = vec![czero(); bem.len()];
                bem.system().mul_vec(&phi, &mut r);
                let res: Vec<C<f64>> = r.iter().zip(&f).map(|(a, b)| a - b).collect();
                assert!(norm_inf(&res) <= 1e-12 * norm_inf(&f));
            }
        }
        assert!(errs[2] < 1e-8, "{errs:?}");
        assert!(errs[1] < errs[0] / 10.0 && errs[2] < errs[1] / 10.0, "{errs:?}");
    }

    #[test]
    fn far_field_matches_large_radius_asymptotics() {
        let curve = ParametricCurve::circle(1.0f64);
        let k = 3.0;
        let z0 = [0.2, 0.1];
        let bem = assemble_bem(&curve, k, 32).unwrap();
        let f: Vec<C<f64>> = bem.samples().iter().map(|s| point_source(k, z0, s.x)).collect();
        let phi = bem.bw_solve(&f).unwrap();
        let theta = 0.8f64;
        let rad = 50.0;
        let p = [rad * theta.cos(), rad * theta.sin()];
        let u = bem.potential_eval(&phi, &[p]).unwrap()[0];
        let approx = u * rad.sqrt() * cis(-k * rad);
        let ff = bem.far_field_values(&phi, &[theta]).unwrap()[0];
        assert!((approx - ff).norm() / ff.norm() < 0.02);
    }

    #[test]
    fn rotation_covariance_on_circle() {
        let curve = ParametricCurve::circle(1.0f64);
        let k = 2.0;
        let bem = assemble_bem(&curve, k, 32).unwrap();
        let n = 64;
        let angles: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let shift = 5;
        let delta = 2.0 * PI * shift as f64 / n as f64;
        let z0 = [0.4, 0.1];
        let z1 = [z0[0] * delta.cos() - z0[1] * delta.sin(), z0[0] * delta.sin() + z0[1] * delta.cos()];
        let solve = |z: Point<f64>| {
            let f: Vec<C<f64>> = bem.samples().iter().map(|s| point_source(k, z, s.x)).collect();
            bem.far_field_values(&bem.bw_solve(&f).unwrap(), &angles).unwrap()
        };
        let (a, b) = (solve(z0), solve(z1));
        for i in 0..n {
            assert!((b[(i + shift) % n] - a[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_density_and_proximity() {
        let curve = ParametricCurve::rounded_square();
        let bem = assemble_bem(&curve, 5.0, 16).unwrap();
        let zero = vec![czero(); bem.len()];
        assert!(bem.bw_solve(&zero).unwrap().iter().all(|z| *z == czero()));
        let u = bem.potential_eval(&zero, &[[3.0, 0.0]]).unwrap();
        assert_eq!(u[0], czero());
        let ff = bem.far_field_values(&zero, &[0.0, 1.0]).unwrap();
        assert!(ff.iter().all(|z| *z == czero()));
        assert!(matches!(
            bem.potential_eval(&zero, &[[1.2, 0.0]]),
            Err(Error::Proximity { .. })
        ));
        assert!(bem.potential_eval(&zero[1..], &[[3.0, 0.0]]).is_err());
        assert!(assemble_bem(&curve, 5.0, 4).is_err());
    }

    #[test]
    fn point_source_gradient_matches_difference() {
        let (k, z0, x) = (5.0f64, [0.1, 0.2], [1.3, -0.4]);
        let g = point_source_gradient(k, z0, x);
        let h = 1e-6;
        for c in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let fd = (point_source(k, z0, xp) - point_source(k, z0, xm)) / (2.0 * h);
            assert!((fd - g[c]).norm() < 1e-7);
        }
    }
}
