//! Quantities of interest: far-field tables, DSCS, OA-DSCS, convergence
//! studies and field export.

mod export;
mod scene;
mod study;

pub use export::{export_fields, GridSpec};
pub use scene::{MeshLadder, Scene};
pub use study::{convergence_study, ConvergenceCell, ConvergenceTable};

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::coupling::{Incident, SolveContext};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Far-field samples on a uniform angle grid over `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldTable<T> {
    angles: Vec<T>,
    values: Vec<C<T>>,
    k: T,
    incident: Option<T>,
}

/// Minimum number of angles in a far-field table.
pub const MIN_ANGLES: usize = 8;

/// Default angle count of far-field and DSCS outputs.
pub const DEFAULT_ANGLES: usize = 1440;

/// `theta_i = 2 pi i / n`.
pub fn uniform_angles<T: Real>(n: usize) -> Vec<T> {
    let nf = T::from_usize_lossy(n);
    (0..n).map(|i| T::TAU() * T::from_usize_lossy(i) / nf).collect()
}

impl<T: Real> FarFieldTable<T> {
    pub fn new(angles: Vec<T>, values: Vec<C<T>>, k: T, incident: Option<T>) -> Result<Self> {
        let n = angles.len();
        if n < MIN_ANGLES {
            return Err(Error::Domain(format!(
                "far-field table needs at least {MIN_ANGLES} angles, got {n}"
            )));
        }
        if values.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: values.len(),
            });
        }
        let grid = uniform_angles::<T>(n);
        let tol = T::lit(1e-9);
        if angles.iter().zip(&grid).any(|(a, g)| (*a - *g).abs() > tol) {
            return Err(Error::Domain("far-field angles must be the uniform grid 2 pi i / n".into()));
        }
        Ok(FarFieldTable {
            angles,
            values,
            k,
            incident,
        })
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn values(&self) -> &[C<T>] {
        &self.values
    }

    pub fn wavenumber(&self) -> T {
        self.k
    }

    /// Incident direction, when the table belongs to a plane-wave solve.
    pub fn incident(&self) -> Option<T> {
        self.incident
    }

    pub fn with_incident(mut self, phi: T) -> Self {
        self.incident = Some(phi);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rectangle-rule `L2(0, 2 pi)` norm.
    pub fn l2_norm(&self) -> T {
        let w = T::TAU() / T::from_usize_lossy(self.len());
        (self.values.iter().map(|v| v.norm_sqr()).sum::<T>() * w).sqrt()
    }

    /// Relative `L2` distance to another table on the same grid.
    pub fn relative_l2_error(&self, reference: &Self) -> Result<T> {
        if reference.len() != self.len() {
            return Err(Error::Dimension {
                expected: reference.len(),
                got: self.len(),
            });
        }
        let num: T = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: T = reference.values.iter().map(|b| b.norm_sqr()).sum();
        Ok((num / den).sqrt())
    }
}

/// Differential scattering cross section `|u_inf|^2`.
pub fn dscs<T: Real>(ff: &FarFieldTable<T>) -> Vec<T> {
    ff.values.iter().map(|v| v.norm_sqr()).collect()
}

/// Orientation-averaged DSCS: rectangle-rule mean of `|u_inf(theta; phi_j)|^2`
/// over `phi_j = 2 pi j / n_dir`.
///
/// Directions are solved concurrently on the shared context; the reduction
/// runs in direction order, so the result does not depend on scheduling.
pub fn oa_dscs<T: Real>(ctx: &SolveContext<T>, n_dir: usize, angles: &[T]) -> Result<Vec<T>> {
    if n_dir < MIN_ANGLES {
        return Err(Error::Domain(format!("OA-DSCS needs at least {MIN_ANGLES} directions, got {n_dir}")));
    }
    let dirs = uniform_angles::<T>(n_dir);
    let tables: Vec<Vec<T>> = dirs
        .par_iter()
        .map(|&phi| {
            let inc = Incident::plane(phi);
            ctx.solve(&inc)
                .and_then(|(sol, _)| ctx.far_field(&sol, angles))
                .map(|ff| dscs(&ff))
                .map_err(|e| Error::Direction {
                    phi: phi.as_f64(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![T::zero(); angles.len()];
    for t in &tables {
        for (a, v) in acc.iter_mut().zip(t) {
            *a += *v;
        }
    }
    let w = T::from_usize_lossy(n_dir);
    Ok(acc.into_iter().map(|a| a / w).collect())
}

/// `theta,re,im,abs,dscs` rows with 17 significant digits.
pub fn far_field_csv<T: Real>(ff: &FarFieldTable<T>) -> String {
    let mut out = String::from("theta,re,im,abs,dscs\n");
    for (th, v) in ff.angles.iter().zip(&ff.values) {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            th.as_f64(),
            v.re.as_f64(),
            v.im.as_f64(),
            v.norm().as_f64(),
            v.norm_sqr().as_f64()
        );
    }
    out
}

/// Two-column `theta,<name>` CSV.
pub fn series_csv<T: Real>(name: &str, angles: &[T], values: &[T]) -> String {
    let mut out = format!("theta,{name}\n");
    for (th, v) in angles.iter().zip(values) {
        let _ = writeln!(out, "{:.16e},{:.16e}", th.as_f64(), v.as_f64());
    }
    out
}

#[cfg(test)]
mod tests;
