//! Series solution for a plane wave `exp(ik d.x)`, `d = (cos phi, sin phi)`,
//! scattered by a homogeneous disk of radius `a` and refractive index
//! `n_c` centred at the origin.
//!
//! With `psi = theta - phi` the fields are
//! `u_s = sum_m i^m s_m H_m(kr) e^{im psi}` outside and
//! `u = sum_m i^m t_m J_m(n_c k r) e^{im psi}` inside, where `s_m, t_m`
//! enforce continuity of `u` and `du/dr` at `r = a`.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::postproc::FarFieldTable;
use crate::scalar::{cis, cplx, czero, Real, C};
use crate::specfun::bessel_jy_upto;

/// Extra modes beyond `ceil(k a max(1, n_c))`.
const TAIL_MODES: usize = 20;
/// Below this `n_c k r` the interior series is replaced by its linearization.
const SMALL_ARGUMENT: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct MieDisk<T> {
    radius: T,
    n_c: T,
    k: T,
    order: usize,
    /// Scattering coefficients `s_0..s_M` (`s_{-m} = s_m`).
    s: Vec<C<T>>,
    /// Interior coefficients `t_0..t_M`.
    t: Vec<C<T>>,
}

/// `J_m, J_m'` at `x` for `m = 0..=mmax`.
fn j_and_derivative<T: Real>(mmax: usize, x: T) -> Result<(Vec<T>, Vec<T>, Vec<T>, Vec<T>)> {
    let (j, y) = bessel_jy_upto(mmax + 1, x)?;
    let deriv = |f: &[T]| -> Vec<T> {
        (0..=mmax)
            .map(|m| {
                if m == 0 {
                    -f[1]
                } else {
                    f[m - 1] - T::from_usize_lossy(m) / x * f[m]
                }
            })
            .collect()
    };
    let (dj, dy) = (deriv(&j), deriv(&y));
    Ok((j, dj, y, dy))
}

impl<T: Real> MieDisk<T> {
    /// Disk with the default truncation `ceil(k a max(1, n_c)) + 20`.
    pub fn new(radius: T, n_c: T, k: T) -> Result<Self> {
        if !(radius > T::zero() && n_c > T::zero() && k > T::zero()) {
            return Err(Error::Domain(format!(
                "Mie disk needs a, n_c, k > 0 (got {radius}, {n_c}, {k})"
            )));
        }
        let order = (k * radius * n_c.max(T::one())).ceil().as_f64() as usize + TAIL_MODES;
        Self::with_order(radius, n_c, k, order)
    }

    /// Disk with an explicit truncation order `M_t >= ceil(k a) + 20`.
    pub fn with_order(radius: T, n_c: T, k: T, order: usize) -> Result<Self> {
        if !(radius > T::zero() && n_c > T::zero() && k > T::zero()) {
            return Err(Error::Domain(format!(
                "Mie disk needs a, n_c, k > 0 (got {radius}, {n_c}, {k})"
            )));
        }
        let min = (k * radius).ceil().as_f64() as usize + TAIL_MODES;
        if order < min {
            return Err(Error::Domain(format!("truncation order {order} below {min}")));
        }
        let (j, dj, y, dy) = j_and_derivative(order, k * radius)?;
        let (ji, dji, _, _) = j_and_derivative(order, n_c * k * radius)?;
        let mut s = Vec::with_capacity(order + 1);
        let mut t = Vec::with_capacity(order + 1);
        for m in 0..=order {
            let h = cplx(j[m], y[m]);
            let dh = cplx(dj[m], dy[m]);
            if !h.norm().is_finite() || j[m] == T::zero() {
                s.push(czero());
                t.push(czero());
                continue;
            }
            // Scale the interior pair so the ratio is insensitive to under/overflow.
            let scale = ji[m].abs().max(dji[m].abs());
            let (p, q) = (n_c * dji[m] / scale, ji[m] / scale);
            let dj_ratio = dj[m] / j[m];
            let dh_ratio = dh / h;
            let den = dh_ratio * q - cplx(p, T::zero());
            if den.norm() == T::zero() || !den.norm().is_finite() {
                return Err(Error::Numerical(format!("singular Mie mode system at m = {m}")));
            }
            let sm = (cplx(p - q * dj_ratio, T::zero()) / den) * (cplx(j[m], T::zero()) / h);
            let tm = if ji[m].abs() >= (n_c * dji[m]).abs() {
                (h * sm + cplx(j[m], T::zero())) / ji[m]
            } else {
                (dh * sm + cplx(dj[m], T::zero())) / (n_c * dji[m])
            };
            s.push(sm);
            t.push(tm);
        }
        Ok(MieDisk {
            radius,
            n_c,
            k,
            order,
            s,
            t,
        })
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn index(&self) -> T {
        self.n_c
    }

    pub fn wavenumber(&self) -> T {
        self.k
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn scattering_coefficients(&self) -> &[C<T>] {
        &self.s
    }

    /// Far field `sqrt(2/(pi k)) e^{-i pi/4} sum_m s_m e^{im(theta - phi)}`.
    pub fn far_field_at(&self, theta: T, phi: T) -> C<T> {
        let psi = theta - phi;
        let mut sum = self.s[0];
        for m in 1..=self.order {
            sum += self.s[m] * (T::lit(2.0) * (T::from_usize_lossy(m) * psi).cos());
        }
        sum * cis(-T::FRAC_PI_4()) * (T::lit(2.0) / (T::PI() * self.k)).sqrt()
    }

    /// Total field value and gradient.
    pub fn near_field_and_gradient(&self, p: Point<T>, phi: T) -> Result<(C<T>, [C<T>; 2])> {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let theta = p[1].atan2(p[0]);
        let inside = r < self.radius;
        let (kk, coeff) = if inside {
            (self.n_c * self.k, &self.t)
        } else {
            (self.k, &self.s)
        };
        let mut value = czero();
        let mut grad = [czero(); 2];
        let x = kk * r;
        if inside && x < T::lit(SMALL_ARGUMENT) {
            // Only m = 0 and m = +-1 contribute to first order in r.
            let d = [phi.cos(), phi.sin()];
            let g = cplx(T::zero(), kk) * coeff[1];
            return Ok((coeff[0] + g * (d[0] * p[0] + d[1] * p[1]), [g * d[0], g * d[1]]));
        }
        let (j, dj, y, dy) = j_and_derivative(self.order, x)?;
        let psi = theta - phi;
        let (st, ct) = theta.sin_cos();
        for m in 0..=self.order {
            let (rad, drad) = if inside {
                (cplx(j[m], T::zero()), cplx(dj[m], T::zero()))
            } else {
                (cplx(j[m], y[m]), cplx(dj[m], dy[m]))
            };
            if coeff[m] == czero() {
                continue;
            }
            let mf = T::from_usize_lossy(m);
            // i^m s_m (e^{im psi} + e^{-im psi}) for the pair +-m.
            let (ang, dang) = if m == 0 {
                (cplx(T::one(), T::zero()), czero())
            } else {
                let c = (mf * psi).cos();
                let s = (mf * psi).sin();
                (cplx(T::lit(2.0) * c, T::zero()), cplx(-T::lit(2.0) * mf * s, T::zero()))
            };
            let im = cis(T::FRAC_PI_2() * mf) * coeff[m];
            value += im * rad * ang;
            let dr = im * drad * ang * kk;
            let dth = im * rad * dang / r;
            grad[0] += dr * ct - dth * st;
            grad[1] += dr * st + dth * ct;
        }
        if !inside {
            let d = [phi.cos(), phi.sin()];
            let inc = cis(self.k * (d[0] * p[0] + d[1] * p[1]));
            let ik = cplx(T::zero(), self.k);
            value += inc;
            grad[0] += ik * d[0] * inc;
            grad[1] += ik * d[1] * inc;
        }
        Ok((value, grad))
    }
}

/// Far-field table of the disk for incidence angle `phi`.
pub fn mie_far_field<T: Real>(d: &MieDisk<T>, angles: &[T], phi: T) -> Result<FarFieldTable<T>> {
    let values = angles.iter().map(|&th| d.far_field_at(th, phi)).collect();
    FarFieldTable::new(angles.to_vec(), values, d.k, Some(phi))
}

/// Total field at the points for incidence angle `phi`.
pub fn mie_near_field<T: Real>(d: &MieDisk<T>, points: &[Point<T>], phi: T) -> Result<Vec<C<T>>> {
    points
        .iter()
        .map(|&p| d.near_field_and_gradient(p, phi).map(|v| v.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postproc::uniform_angles;
    use std::f64::consts::PI;

    #[test]
    fn free_space_disk_does_not_scatter() {
        let d = MieDisk::new(1.0f64, 1.0, 5.0).unwrap();
        assert!(d.scattering_coefficients().iter().all(|s| s.norm() < 1e-15));
        for p in [[0.3, 0.2], [1.7, -0.4], [0.0, 0.0]] {
            let u = mie_near_field(&d, &[p], 0.7).unwrap()[0];
            let exact = cis(5.0 * (0.7f64.cos() * p[0] + 0.7f64.sin() * p[1]));
            assert!((u - exact).norm() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn far_field_depends_on_relative_angle() {
        let d = MieDisk::new(1.0f64, 1.5, 5.0).unwrap();
        for (th, phi) in [(0.3, 1.1), (2.0, -0.5)] {
            let a = d.far_field_at(th, phi);
            let b = d.far_field_at(th + 0.9, phi + 0.9);
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn truncation_tail_is_negligible() {
        let d = MieDisk::new(1.0f64, 1.5, 5.0).unwrap();
        let d2 = MieDisk::with_order(1.0, 1.5, 5.0, 2 * d.order()).unwrap();
        for th in uniform_angles::<f64>(16) {
            assert!((d.far_field_at(th, 0.2) - d2.far_field_at(th, 0.2)).norm() < 1e-13);
        }
        assert!(MieDisk::with_order(1.0f64, 1.5, 5.0, 10).is_err());
    }

    #[test]
    fn field_and_normal_derivative_are_continuous() {
        let d = MieDisk::new(1.0f64, 1.5, 5.0).unwrap();
        for th in [0.0f64, 1.0, 2.5, 4.0] {
            let dir = [th.cos(), th.sin()];
            let eps = 1e-8;
            let pin = [(1.0 - eps) * dir[0], (1.0 - eps) * dir[1]];
            let pout = [(1.0 + eps) * dir[0], (1.0 + eps) * dir[1]];
            let (ui, gi) = d.near_field_and_gradient(pin, 0.3).unwrap();
            let (uo, go) = d.near_field_and_gradient(pout, 0.3).unwrap();
            assert!((ui - uo).norm() < 1e-6);
            let dn = |g: [C<f64>; 2]| g[0] * dir[0] + g[1] * dir[1];
            assert!((dn(gi) - dn(go)).norm() < 1e-5);
        }
        let (u0, _) = d.near_field_and_gradient([0.0, 0.0], 0.3).unwrap();
        assert!(u0.norm().is_finite());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = MieDisk::new(1.0f64, 1.5, 5.0).unwrap();
        for p in [[0.3, -0.2], [1.4, 0.6], [1e-9, 0.0]] {
            let (_, g) = d.near_field_and_gradient(p, 0.4).unwrap();
            let h = 1e-6;
            for c in 0..2 {
                let mut a = p;
                let mut b = p;
                a[c] += h;
                b[c] -= h;
                let fd = (d.near_field_and_gradient(a, 0.4).unwrap().0
                    - d.near_field_and_gradient(b, 0.4).unwrap().0)
                    / (2.0 * h);
                assert!((fd - g[c]).norm() < 1e-6 * (1.0 + g[c].norm()), "{p:?} {c}");
            }
        }
        let (_, g0) = d.near_field_and_gradient([0.0, 0.0], 0.4).unwrap();
        let (_, g1) = d.near_field_and_gradient([1e-9, 1e-9], 0.4).unwrap();
        assert!((g0[0] - g1[0]).norm() < 1e-6 && (g0[1] - g1[1]).norm() < 1e-6);
    }

    #[test]
    fn far_field_matches_scattered_field_asymptotics() {
        let d = MieDisk::new(1.0f64, 1.5, 5.0).unwrap();
        let (th, phi, r) = (0.9f64, 0.2f64, 1900.0f64);
        let p = [r * th.cos(), r * th.sin()];
        let total = d.near_field_and_gradient(p, phi).unwrap().0;
        let inc = cis(5.0 * r * (th - phi).cos());
        let approx = (total - inc) * r.sqrt() * cis(-5.0 * r);
        let ff = d.far_field_at(th, phi);
        let rel = (approx - ff).norm() / ff.norm();
        assert!(rel < 5e-3, "{rel}");
    }

    #[test]
    fn optical_theorem() {
        for (n_c, k) in [(1.5f64, 5.0f64), (1.2, 2.0), (2.0, 7.0)] {
            let d = MieDisk::new(1.0, n_c, k).unwrap();
            let phi = 0.6;
            let ff = mie_far_field(&d, &uniform_angles(512), phi).unwrap();
            let energy = ff.l2_norm().powi(2);
            let forward = d.far_field_at(phi, phi);
            let rhs = -(8.0 * PI / k).sqrt() * (cis(PI / 4.0) * forward).re;
            assert!((energy - rhs).abs() < 1e-10 * energy, "{energy} {rhs}");
        }
    }
}
