use std::fmt::Write as _;

use log::info;

use super::Scene;
use crate::error::{Error, Result};
use crate::fem::h1_error_nested;
use crate::geometry::Point;
use crate::scalar::Real;

/// Errors of one `(N, level)` discretization against the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceCell<T> {
    /// `||u_h - u_ref||_{H^1(Ω₂)}`.
    pub fem_h1: T,
    /// `sup |omega_N - omega_ref|` over the reference nodes in `D`.
    pub bem_sup: T,
    /// Root-mean-square of the same differences.
    pub bem_rms: T,
    pub iterations: usize,
}

/// Reference-solution error table: rows by `N`, columns by refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable<T> {
    pub ns: Vec<usize>,
    pub levels: Vec<usize>,
    /// FEM degrees of freedom per level.
    pub dofs: Vec<usize>,
    /// `cells[i][j]` belongs to `ns[i]` and `levels[j]`.
    pub cells: Vec<Vec<ConvergenceCell<T>>>,
    pub reference_level: usize,
    pub reference_n: usize,
    pub reference_dofs: usize,
    /// Number of sample points in `D`.
    pub samples: usize,
}

impl<T: Real> ConvergenceTable<T> {
    pub fn cell(&self, n: usize, level: usize) -> Option<&ConvergenceCell<T>> {
        let i = self.ns.iter().position(|&v| v == n)?;
        let j = self.levels.iter().position(|&v| v == level)?;
        Some(&self.cells[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,level,dofs,fem_h1,bem_sup,bem_rms,iterations\n");
        for (i, &n) in self.ns.iter().enumerate() {
            for (j, &l) in self.levels.iter().enumerate() {
                let c = &self.cells[i][j];
                let _ = writeln!(
                    out,
                    "{n},{l},{},{:.16e},{:.16e},{:.16e},{}",
                    self.dofs[j],
                    c.fem_h1.as_f64(),
                    c.bem_sup.as_f64(),
                    c.bem_rms.as_f64(),
                    c.iterations
                );
            }
        }
        out
    }
}

/// Errors of levels `0..depth` and the given `N` against the reference
/// pair (level `depth`, `2 max N`). BEM errors are sampled at the
/// reference Lagrange nodes in `D = Ext(margin Γ) ∩ Ω₂`.
pub fn convergence_study<T: Real>(scene: &Scene<T>, depth: usize, ns: &[usize]) -> Result<ConvergenceTable<T>> {
    if depth < 1 || ns.is_empty() {
        return Err(Error::Domain("convergence study needs depth >= 1 and at least one N".into()));
    }
    if !scene.ladder.is_nested() {
        return Err(Error::Domain(
            "convergence study needs a nested (uniformly refined) mesh ladder".into(),
        ));
    }
    let reference_n = 2 * ns.iter().copied().max().unwrap_or(0);
    let ref_fem = scene.fem(depth)?;
    let ref_ctx = scene.context_with(&ref_fem, reference_n)?;
    let (ref_sol, _) = ref_ctx.solve(&scene.incident)?;
    let samples: Vec<Point<T>> = {
        let space = ref_ctx.space();
        let margin = ref_ctx.bem().margin();
        space
            .nodes()
            .iter()
            .copied()
            .filter(|&p| scene.curve.outside_scaled(p, margin))
            .collect()
    };
    let omega_ref = ref_ctx.scattered(&ref_sol, &samples)?;
    info!(
        "reference: level {depth}, N = {reference_n}, {} DoF, {} samples in D",
        ref_fem.num_dofs(),
        samples.len()
    );
    let mut cells = vec![Vec::with_capacity(depth); ns.len()];
    let mut dofs = Vec::with_capacity(depth);
    for level in 0..depth {
        let fem = scene.fem(level)?;
        dofs.push(fem.num_dofs());
        for (i, &n) in ns.iter().enumerate() {
            let ctx = scene.context_with(&fem, n)?;
            let (sol, iface) = ctx.solve(&scene.incident)?;
            let fem_h1 = h1_error_nested(&sol.fem, &ref_sol.fem)?;
            let omega = ctx.scattered(&sol, &samples)?;
            let mut sup = T::zero();
            let mut sq = T::zero();
            for (a, b) in omega.iter().zip(&omega_ref) {
                let d = (a - b).norm();
                sup = sup.max(d);
                sq += d * d;
            }
            let rms = (sq / T::from_usize_lossy(samples.len().max(1))).sqrt();
            info!("level {level}, N = {n}: H1 {fem_h1:.3e}, sup {sup:.3e}, {} iterations", iface.iterations);
            cells[i].push(ConvergenceCell {
                fem_h1,
                bem_sup: sup,
                bem_rms: rms,
                iterations: iface.iterations,
            });
        }
    }
    Ok(ConvergenceTable {
        ns: ns.to_vec(),
        levels: (0..depth).collect(),
        dofs,
        cells,
        reference_level: depth,
        reference_n,
        reference_dofs: ref_fem.num_dofs(),
        samples: samples.len(),
    })
}
