//! Bessel functions of the first and second kind and Hankel functions of the
//! first kind, integer order, real positive argument.
//!
//! Three regimes, switched at fixed crossovers:
//!
//! * `x <= SERIES_MAX`: ascending power series (J_m directly, Y_0 and Y_1 via
//!   the logarithmic series, Y_m by forward recurrence).
//! * `SERIES_MAX < x < ASYMPTOTIC_MIN`: Miller's downward recurrence for J_m,
//!   normalised with `J_0 + 2 sum J_2k = 1`; Y_0 and Y_1 from the Neumann
//!   series in even/odd J; Y_m by forward recurrence.
//! * `x >= ASYMPTOTIC_MIN`: Hankel asymptotic expansions for orders 0 and 1,
//!   Miller recurrence for J_m with m >= 2, forward recurrence for Y_m.

use crate::error::{Error, Result};
use crate::scalar::{cplx, Real, C, EULER_GAMMA};

/// Upper end of the ascending-series regime.
pub const SERIES_MAX: f64 = 2.0;
/// Lower end of the Hankel asymptotic regime (orders 0 and 1).
pub const ASYMPTOTIC_MIN: f64 = 25.0;
/// Smallest positive argument accepted by the checked entry points.
pub const X_MIN: f64 = 1e-8;
/// Largest argument accepted by the checked entry points.
pub const X_MAX: f64 = 1e4;
/// Largest order accepted by the checked entry points.
pub const ORDER_MAX: usize = 200;

/// Values of `J_m(x)` and `Y_m(x)` for one order and argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPair<T> {
    pub order: usize,
    pub x: T,
    pub j: T,
    pub y: T,
}

impl<T: Real> BesselPair<T> {
    pub fn hankel1(&self) -> C<T> {
        cplx(self.j, self.y)
    }
}

fn check_order(m: usize) -> Result<()> {
    if m > ORDER_MAX {
        return Err(Error::Domain(format!("order {m} exceeds {ORDER_MAX}")));
    }
    Ok(())
}

fn check_arg<T: Real>(x: T, allow_zero: bool) -> Result<()> {
    let xf = x.as_f64();
    if !xf.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {xf}")));
    }
    if allow_zero && xf == 0.0 {
        return Ok(());
    }
    if xf == 0.0 {
        return Err(Error::Domain("Y_m is singular at x = 0".into()));
    }
    if !(X_MIN..=X_MAX).contains(&xf) {
        return Err(Error::Domain(format!(
            "argument {xf} outside supported range [{X_MIN}, {X_MAX}]"
        )));
    }
    Ok(())
}

/// `J_m(x)` for `x = 0` or `x` in `[X_MIN, X_MAX]`.
pub fn bessel_j<T: Real>(m: usize, x: T) -> Result<T> {
    check_order(m)?;
    check_arg(x, true)?;
    if x == T::zero() {
        return Ok(if m == 0 { T::one() } else { T::zero() });
    }
    Ok(j_unchecked(m, x))
}

/// `Y_m(x)` for `x` in `[X_MIN, X_MAX]`.
pub fn bessel_y<T: Real>(m: usize, x: T) -> Result<T> {
    check_order(m)?;
    check_arg(x, false)?;
    let y = y_upto(m, x)[m];
    if !y.is_finite() {
        return Err(Error::Domain(format!(
            "Y_{m}({}) overflows the floating-point range",
            x
        )));
    }
    Ok(y)
}

/// `H^(1)_m(x) = J_m(x) + i Y_m(x)`.
pub fn hankel1<T: Real>(m: usize, x: T) -> Result<C<T>> {
    Ok(cplx(bessel_j(m, x)?, bessel_y(m, x)?))
}

pub fn bessel_pair<T: Real>(m: usize, x: T) -> Result<BesselPair<T>> {
    Ok(BesselPair {
        order: m,
        x,
        j: bessel_j(m, x)?,
        y: bessel_y(m, x)?,
    })
}

/// `J_0(x), ..., J_mmax(x)` and `Y_0(x), ..., Y_mmax(x)` in one pass.
///
/// `mmax` may exceed [`ORDER_MAX`]; the Mie oracle uses this for truncation
/// orders beyond the checked range. Entries of `Y` may be infinite for very
/// high orders at small arguments.
pub fn bessel_jy_upto<T: Real>(mmax: usize, x: T) -> Result<(Vec<T>, Vec<T>)> {
    check_arg(x, false)?;
    Ok((j_upto(mmax, x), y_upto(mmax, x)))
}

/// Orders 0 and 1 of J and Y: `[J0, J1, Y0, Y1]`. No argument checks; `x > 0`.
pub(crate) fn bessel01<T: Real>(x: T) -> [T; 4] {
    if x <= T::lit(SERIES_MAX) {
        let j0 = series_j(0, x);
        let j1 = series_j(1, x);
        let (y0, y1) = series_y01(x, j0, j1);
        [j0, j1, y0, y1]
    } else if x < T::lit(ASYMPTOTIC_MIN) {
        let js = miller(1, x);
        let (y0, y1) = neumann_y01(x, &js);
        [js[0], js[1], y0, y1]
    } else {
        let (j0, y0) = hankel_asymptotic(0, x);
        let (j1, y1) = hankel_asymptotic(1, x);
        [j0, j1, y0, y1]
    }
}

fn j_unchecked<T: Real>(m: usize, x: T) -> T {
    if x <= T::lit(SERIES_MAX) {
        series_j(m, x)
    } else if m <= 1 && x >= T::lit(ASYMPTOTIC_MIN) {
        hankel_asymptotic(m, x).0
    } else {
        miller(m, x)[m]
    }
}

fn j_upto<T: Real>(mmax: usize, x: T) -> Vec<T> {
    if x <= T::lit(SERIES_MAX) {
        (0..=mmax).map(|m| series_j(m, x)).collect()
    } else {
        let mut js = miller(mmax, x);
        js.truncate(mmax + 1);
        if x >= T::lit(ASYMPTOTIC_MIN) {
            js[0] = hankel_asymptotic(0, x).0;
            if mmax >= 1 {
                js[1] = hankel_asymptotic(1, x).0;
            }
        }
        js
    }
}

fn y_upto<T: Real>(mmax: usize, x: T) -> Vec<T> {
    let [_, _, y0, y1] = bessel01(x);
    let mut ys = Vec::with_capacity(mmax + 1);
    ys.push(y0);
    if mmax >= 1 {
        ys.push(y1);
    }
    let two = T::lit(2.0);
    for k in 1..mmax {
        let next = two * T::from_usize_lossy(k) / x * ys[k] - ys[k - 1];
        ys.push(next);
    }
    ys
}

/// Ascending series `sum (-1)^k (x/2)^(2k+m) / (k! (k+m)!)`.
fn series_j<T: Real>(m: usize, x: T) -> T {
    let half = x / T::lit(2.0);
    let mut term = T::one();
    for i in 1..=m {
        term *= half / T::from_usize_lossy(i);
    }
    if term == T::zero() {
        return term;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (T::from_usize_lossy(k) * T::from_usize_lossy(k + m));
        sum += term;
        if term.abs() <= T::epsilon() * sum.abs() * T::lit(0.25) {
            break;
        }
    }
    sum
}

/// Logarithmic ascending series for Y_0 and Y_1 (A&S 9.1.13, 9.1.11).
fn series_y01<T: Real>(x: T, j0: T, j1: T) -> (T, T) {
    let pi = T::PI();
    let gamma = T::lit(EULER_GAMMA);
    let two = T::lit(2.0);
    let half = x / two;
    let lg = half.ln();
    let q = half * half;

    // Y0 = (2/pi)(ln(x/2)+gamma) J0 + (2/pi) sum_{k>=1} (-1)^{k+1} H_k q^k/(k!)^2
    let mut term = T::one();
    let mut harmonic = T::zero();
    let mut acc0 = T::zero();
    for k in 1..200 {
        let kf = T::from_usize_lossy(k);
        term *= -q / (kf * kf);
        harmonic += T::one() / kf;
        let contrib = -term * harmonic;
        acc0 += contrib;
        if contrib.abs() <= T::epsilon() * acc0.abs() * T::lit(0.25) {
            break;
        }
    }
    let y0 = two / pi * ((lg + gamma) * j0 + acc0);

    // Y1 = -2/(pi x) + (2/pi) ln(x/2) J1
    //      - (1/pi) sum_{k>=0} (psi(k+1)+psi(k+2)) (-q)^k (x/2) / (k!(k+1)!)
    // with psi(n+1) = H_n - gamma.
    let mut term = half;
    let mut hk = T::zero();
    let mut acc1 = (-gamma + (T::one() - gamma)) * term;
    for k in 1..200 {
        let kf = T::from_usize_lossy(k);
        term *= -q / (kf * (kf + T::one()));
        hk += T::one() / kf;
        let hk1 = hk + T::one() / (kf + T::one());
        let contrib = (hk + hk1 - two * gamma) * term;
        acc1 += contrib;
        if contrib.abs() <= T::epsilon() * acc1.abs() * T::lit(0.25) {
            break;
        }
    }
    let y1 = -two / (pi * x) + two / pi * lg * j1 - acc1 / pi;
    (y0, y1)
}

/// Miller's backward recurrence. Returns `J_0..J_top` for some `top >= mmax`,
/// normalised by `J_0 + 2 sum_{k>=1} J_2k = 1`.
fn miller<T: Real>(mmax: usize, x: T) -> Vec<T> {
    let xf = x.as_f64();
    let base = mmax.max(xf.ceil() as usize);
    let mut start = base + 20 + (50.0 * base as f64).sqrt() as usize;
    start += start % 2;
    let two = T::lit(2.0);
    let big = T::max_value().sqrt();
    let mut js = vec![T::zero(); start + 2];
    js[start] = T::min_positive_value().sqrt();
    for k in (1..=start).rev() {
        let v = two * T::from_usize_lossy(k) / x * js[k] - js[k + 1];
        js[k - 1] = v;
        if v.abs() > big {
            let s = T::one() / big;
            for jj in js[k - 1..].iter_mut() {
                *jj *= s;
            }
        }
    }
    let mut norm = js[0];
    let mut k = 2;
    while k <= start {
        norm += two * js[k];
        k += 2;
    }
    for jj in js.iter_mut() {
        *jj /= norm;
    }
    js.truncate(start + 1);
    js
}

/// Neumann series for Y_0 and Y_1 in terms of J_k:
/// `Y0 = (2/pi)(ln(x/2)+gamma) J0 - (4/pi) sum (-1)^k J_2k / k`, and `Y1 = -Y0'`.
fn neumann_y01<T: Real>(x: T, js: &[T]) -> (T, T) {
    let pi = T::PI();
    let two = T::lit(2.0);
    let c = (x / two).ln() + T::lit(EULER_GAMMA);
    let mut s0 = T::zero();
    let mut s1 = T::zero();
    let mut k = 1;
    while 2 * k + 1 < js.len() {
        let kf = T::from_usize_lossy(k);
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        s0 += sign * js[2 * k] / kf;
        s1 += sign * (js[2 * k - 1] - js[2 * k + 1]) / kf;
        k += 1;
    }
    let y0 = two / pi * c * js[0] - T::lit(4.0) / pi * s0;
    let y1 = two / pi * (c * js[1] - js[0] / x) + two / pi * s1;
    (y0, y1)
}

/// Hankel's asymptotic expansion for order `nu` in {0, 1}; returns `(J, Y)`.
fn hankel_asymptotic<T: Real>(nu: usize, x: T) -> (T, T) {
    let mu = T::lit(4.0 * (nu * nu) as f64);
    let eight_x = T::lit(8.0) * x;
    let mut p = T::one();
    let mut q = T::zero();
    let mut term = T::one();
    let mut prev = T::infinity();
    for k in 1..200usize {
        let odd = T::lit(((2 * k - 1) * (2 * k - 1)) as f64);
        term *= (mu - odd) / (T::from_usize_lossy(k) * eight_x);
        let mag = term.abs();
        if mag >= prev {
            break;
        }
        prev = mag;
        // k = 1, 2, 3, 4, ... -> +Q, -P, -Q, +P, ...
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < T::epsilon() * T::lit(1e-3) {
            break;
        }
    }
    let phase = (T::lit(nu as f64) / T::lit(2.0) + T::lit(0.25)) * T::PI();
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    let amp = (T::lit(2.0) / (T::PI() * x)).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}
