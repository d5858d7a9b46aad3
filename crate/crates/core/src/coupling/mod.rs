//! Overlapped FEM–BEM coupling.
//!
//! The unknowns are the nodal values `f_sigma` of the total field on the
//! polygon Σ and the point values `f_per` of the scattered field at the
//! Nyström nodes on Γ. They satisfy
//!
//! ```text
//! f_sigma - E phi(f_per)  =  u_inc on Σ
//! f_per   - T u(f_sigma)  = -u_inc on Γ
//! ```
//!
//! where `u(g)` is the interior FEM solution with Σ-data `g`, `T` its trace
//! at `x(t_j)`, `phi(f)` the Brakhage–Werner density for Γ-data `f` and `E`
//! the potential evaluated at the Σ nodes.

mod incident;

pub use incident::Incident;

use std::sync::Arc;

use log::debug;

use crate::bem::{assemble_bem, BemDiscretization, Density, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::fem::{assemble, FemSolution, FemSystem};
use crate::geometry::{to_f64, ParametricCurve, Point, RefractiveIndexField, RegionShape};
use crate::linalg::{gmres, CsrMatrix, DenseMatrix, GmresOptions};
use crate::mesh::LagrangeSpace;
use crate::postproc::FarFieldTable;
use crate::scalar::{czero, norm2, Real, C};

/// Samples per side used when checking that material regions lie inside Γ.
const NESTING_SAMPLES: usize = 256;

/// Build options of a [`SolveContext`].
#[derive(Debug, Clone, Copy)]
pub struct ContextOptions {
    /// Potentials are only evaluated outside `margin * Γ`.
    pub margin: f64,
    pub gmres: GmresOptions,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            margin: DEFAULT_MARGIN,
            gmres: GmresOptions::default(),
        }
    }
}

/// Incident-independent precomputation shared by every solve.
#[derive(Debug)]
pub struct SolveContext<T> {
    fem: Arc<FemSystem<T>>,
    bem: BemDiscretization<T>,
    index: RefractiveIndexField<T>,
    /// `2N x L` FEM trace at the Nyström nodes.
    trace: CsrMatrix<T>,
    /// `M x 2N` potential responses at the Σ nodes.
    sigma_eval: DenseMatrix<T>,
    sigma_nodes: Vec<Point<T>>,
    options: ContextOptions,
}

/// Interface unknowns `(f_sigma, f_per)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceState<T> {
    pub sigma: Vec<C<T>>,
    pub gamma: Vec<C<T>>,
}

impl<T: Real> InterfaceState<T> {
    pub fn zeros(m: usize, two_n: usize) -> Self {
        InterfaceState {
            sigma: vec![czero(); m],
            gamma: vec![czero(); two_n],
        }
    }

    pub fn to_vec(&self) -> Vec<C<T>> {
        let mut v = self.sigma.clone();
        v.extend_from_slice(&self.gamma);
        v
    }

    pub fn from_slice(v: &[C<T>], m: usize) -> Self {
        InterfaceState {
            sigma: v[..m].to_vec(),
            gamma: v[m..].to_vec(),
        }
    }

    pub fn norm(&self) -> T {
        (norm2(&self.sigma).powi(2) + norm2(&self.gamma).powi(2)).sqrt()
    }
}

/// Result of [`SolveContext::solve_interface`].
#[derive(Debug, Clone)]
pub struct InterfaceSolution<T> {
    pub state: InterfaceState<T>,
    pub iterations: usize,
    /// Relative residual reported by GMRES.
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Reconstructed fields: total wave on Ω₂ and the density of the
/// scattered wave outside Γ.
#[derive(Debug, Clone)]
pub struct ScatterSolution<T> {
    pub fem: FemSolution<T>,
    pub density: Density<T>,
    pub incident: Incident<T>,
}

/// Pointwise disagreement of the two representations in the overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch<T> {
    pub sup: T,
    pub rms: T,
    pub samples: usize,
}

/// Builds the context with default options.
pub fn build_context<T: Real>(
    space: Arc<LagrangeSpace<T>>,
    index: &RefractiveIndexField<T>,
    curve: &ParametricCurve<T>,
    k: T,
    n: usize,
) -> Result<SolveContext<T>> {
    SolveContext::build(space, index, curve, k, n, ContextOptions::default())
}

impl<T: Real> SolveContext<T> {
    pub fn build(
        space: Arc<LagrangeSpace<T>>,
        index: &RefractiveIndexField<T>,
        curve: &ParametricCurve<T>,
        k: T,
        n: usize,
        options: ContextOptions,
    ) -> Result<Self> {
        check_nesting(&space, index, curve, n, T::lit(options.margin))?;
        let fem = Arc::new(assemble(space, k, index)?);
        Self::with_fem(fem, index, curve, n, options)
    }

    /// Context reusing an assembled interior system (for example across
    /// several values of `N`). `index` must be the field `fem` was built with.
    pub fn with_fem(
        fem: Arc<FemSystem<T>>,
        index: &RefractiveIndexField<T>,
        curve: &ParametricCurve<T>,
        n: usize,
        options: ContextOptions,
    ) -> Result<Self> {
        let space = Arc::clone(fem.space());
        let k = fem.wavenumber();
        let margin = T::lit(options.margin);
        check_nesting(&space, index, curve, n, margin)?;
        let bem = assemble_bem(curve, k, n)?.with_margin(margin);
        let trace = crate::fem::gamma_trace_operator(&space, fem.locator(), curve, bem.params())?;
        let sigma_nodes: Vec<Point<T>> = space
            .boundary_dofs()
            .iter()
            .map(|&i| space.nodes()[i])
            .collect();
        let sigma_eval = bem.potential_matrix(&sigma_nodes).map_err(|e| match e {
            Error::Proximity { x } => Error::Geometry(format!(
                "polygon node {x:?} lies within the evaluation margin of the BEM curve"
            )),
            other => other,
        })?;
        debug!(
            "context: L = {}, M = {}, 2N = {}",
            space.num_dofs(),
            sigma_nodes.len(),
            bem.len()
        );
        Ok(SolveContext {
            fem,
            bem,
            index: index.clone(),
            trace,
            sigma_eval,
            sigma_nodes,
            options,
        })
    }

    pub fn fem(&self) -> &Arc<FemSystem<T>> {
        &self.fem
    }

    pub fn bem(&self) -> &BemDiscretization<T> {
        &self.bem
    }

    pub fn space(&self) -> &Arc<LagrangeSpace<T>> {
        self.fem.space()
    }

    pub fn index(&self) -> &RefractiveIndexField<T> {
        &self.index
    }

    pub fn curve(&self) -> &ParametricCurve<T> {
        self.bem.curve()
    }

    pub fn wavenumber(&self) -> T {
        self.bem.wavenumber()
    }

    pub fn options(&self) -> &ContextOptions {
        &self.options
    }

    pub fn trace_operator(&self) -> &CsrMatrix<T> {
        &self.trace
    }

    pub fn sigma_eval(&self) -> &DenseMatrix<T> {
        &self.sigma_eval
    }

    /// Σ nodes in the order of the `sigma` block.
    pub fn sigma_nodes(&self) -> &[Point<T>] {
        &self.sigma_nodes
    }

    /// `(M, 2N)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.sigma_nodes.len(), self.bem.len())
    }

    /// `(I - K) s`.
    pub fn apply_interface(&self, s: &InterfaceState<T>) -> Result<InterfaceState<T>> {
        let (m, two_n) = self.dims();
        if s.sigma.len() != m || s.gamma.len() != two_n {
            return Err(Error::Dimension {
                expected: m + two_n,
                got: s.sigma.len() + s.gamma.len(),
            });
        }
        let u = self.fem.interior_solve(&s.sigma)?;
        let mut gamma = vec![czero(); two_n];
        self.trace.mul_vec(&u.coeffs, &mut gamma);
        for (g, si) in gamma.iter_mut().zip(&s.gamma) {
            *g = si - *g;
        }
        let phi = self.bem.bw_solve(&s.gamma)?;
        let mut sigma = vec![czero(); m];
        self.sigma_eval.mul_vec(&phi, &mut sigma);
        for (g, si) in sigma.iter_mut().zip(&s.sigma) {
            *g = si - *g;
        }
        Ok(InterfaceState { sigma, gamma })
    }

    /// Right-hand side `(u_inc on Σ, -u_inc on Γ)`.
    pub fn rhs(&self, incident: &Incident<T>) -> InterfaceState<T> {
        let k = self.wavenumber();
        InterfaceState {
            sigma: self.sigma_nodes.iter().map(|&p| incident.value(k, p)).collect(),
            gamma: self
                .bem
                .samples()
                .iter()
                .map(|s| -incident.value(k, s.x))
                .collect(),
        }
    }

    /// GMRES solve of the interface system.
    pub fn solve_interface(&self, incident: &Incident<T>) -> Result<InterfaceSolution<T>> {
        let (m, _) = self.dims();
        let b = self.rhs(incident).to_vec();
        let out = gmres(
            |v, w| {
                let r = self.apply_interface(&InterfaceState::from_slice(v, m))?;
                w[..m].copy_from_slice(&r.sigma);
                w[m..].copy_from_slice(&r.gamma);
                Ok(())
            },
            &b,
            self.options.gmres,
        )?;
        debug!(
            "interface solve: {} iterations, residual {:e}",
            out.iterations, out.residual
        );
        Ok(InterfaceSolution {
            state: InterfaceState::from_slice(&out.x, m),
            iterations: out.iterations,
            residual: out.residual,
            history: out.history,
        })
    }

    /// Interior FEM field from `f_sigma` and BEM density from `f_per`.
    pub fn reconstruct(&self, state: &InterfaceState<T>, incident: &Incident<T>) -> Result<ScatterSolution<T>> {
        Ok(ScatterSolution {
            fem: self.fem.interior_solve(&state.sigma)?,
            density: self.bem.bw_solve(&state.gamma)?,
            incident: incident.clone(),
        })
    }

    /// Interface solve followed by reconstruction.
    pub fn solve(&self, incident: &Incident<T>) -> Result<(ScatterSolution<T>, InterfaceSolution<T>)> {
        let iface = self.solve_interface(incident)?;
        let sol = self.reconstruct(&iface.state, incident)?;
        Ok((sol, iface))
    }

    /// Scattered field `omega_N` at points outside `margin * Γ`.
    pub fn scattered(&self, sol: &ScatterSolution<T>, points: &[Point<T>]) -> Result<Vec<C<T>>> {
        self.bem.potential_eval(&sol.density, points)
    }

    /// Total field `omega_N + u_inc` at points outside `margin * Γ`.
    pub fn exterior_total(&self, sol: &ScatterSolution<T>, points: &[Point<T>]) -> Result<Vec<C<T>>> {
        let k = self.wavenumber();
        let mut u = self.scattered(sol, points)?;
        for (v, &p) in u.iter_mut().zip(points) {
            *v += sol.incident.value(k, p);
        }
        Ok(u)
    }

    /// Total field `u_h` at points of Ω₂.
    pub fn interior_total(&self, sol: &ScatterSolution<T>, points: &[Point<T>]) -> Result<Vec<C<T>>> {
        self.fem.evaluate(&sol.fem, points)
    }

    /// Far field of the scattered wave.
    pub fn far_field(&self, sol: &ScatterSolution<T>, angles: &[T]) -> Result<FarFieldTable<T>> {
        let ff = self.bem.far_field(&sol.density, angles)?;
        Ok(match sol.incident {
            Incident::PlaneWave { angle, .. } => ff.with_incident(angle),
            _ => ff,
        })
    }

    /// True if `p` lies in the closed FEM domain and outside `margin * Γ`.
    pub fn in_overlap(&self, p: Point<T>) -> bool {
        self.space().mesh().boundary_polygon().contains(p)
            && self.curve().outside_scaled(p, self.bem.margin())
    }

    /// Lagrange nodes of the FEM space in the admissible overlap region,
    /// excluding the Σ nodes themselves.
    pub fn overlap_samples(&self) -> Vec<Point<T>> {
        let space = self.space();
        let curve = self.curve();
        let margin = self.bem.margin();
        (0..space.num_dofs())
            .filter(|&i| !space.is_boundary(i))
            .map(|i| space.nodes()[i])
            .filter(|&p| curve.outside_scaled(p, margin))
            .collect()
    }

    /// `sup` and root-mean-square of `|u_h - (omega_N + u_inc)|` over samples.
    pub fn overlap_mismatch(&self, sol: &ScatterSolution<T>, samples: &[Point<T>]) -> Result<Mismatch<T>> {
        let sigma = self.space().mesh().boundary_polygon();
        if let Some(p) = samples.iter().find(|&&p| !sigma.contains(p)) {
            return Err(Error::Geometry(format!(
                "overlap sample {:?} lies outside the FEM domain",
                to_f64(*p)
            )));
        }
        let inner = self.interior_total(sol, samples)?;
        let outer = self.exterior_total(sol, samples)?;
        let mut sup = T::zero();
        let mut sq = T::zero();
        for (a, b) in inner.iter().zip(&outer) {
            let d = (a - b).norm();
            sup = sup.max(d);
            sq += d * d;
        }
        let rms = if samples.is_empty() {
            T::zero()
        } else {
            (sq / T::from_usize_lossy(samples.len())).sqrt()
        };
        Ok(Mismatch {
            sup,
            rms,
            samples: samples.len(),
        })
    }
}

/// Checks `Ω₀ ⊂ Ω₁ ⊂ Ω₂` by sampling: material regions inside Γ, Γ strictly
/// inside Σ and the Σ polygon outside `margin * Γ`.
fn check_nesting<T: Real>(
    space: &LagrangeSpace<T>,
    index: &RefractiveIndexField<T>,
    curve: &ParametricCurve<T>,
    n: usize,
    margin: T,
) -> Result<()> {
    let mesh = space.mesh();
    let sigma = mesh.boundary_polygon();
    let count = (8 * n).max(NESTING_SAMPLES);
    for i in 0..count {
        let t = T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(count);
        let x = curve.eval(t).x;
        if !sigma.contains_strict(x) || sigma.boundary_distance(x) <= T::lit(1e-12) {
            return Err(Error::Geometry(format!(
                "BEM curve point {:?} is not strictly inside the polygon Σ",
                to_f64(x)
            )));
        }
    }
    for region in index.regions() {
        if let Some(tag) = region.tag {
            // Tagged regions act through their mesh cells only.
            for (t, &r) in mesh.regions().iter().enumerate() {
                if r != tag {
                    continue;
                }
                if let Some(p) = mesh.triangle_points(t).iter().find(|&&p| !curve.encloses(p)) {
                    return Err(Error::Geometry(format!(
                        "triangle {t} of material tag {tag} reaches {:?}, outside the BEM curve",
                        to_f64(*p)
                    )));
                }
            }
            continue;
        }
        let pts: Vec<Point<T>> = match &region.shape {
            RegionShape::Disk { center, radius } => (0..NESTING_SAMPLES)
                .map(|i| {
                    let a = T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(NESTING_SAMPLES);
                    [center[0] + *radius * a.cos(), center[1] + *radius * a.sin()]
                })
                .collect(),
            RegionShape::Polygon(poly) => poly.vertices.clone(),
        };
        if let Some(p) = pts.iter().find(|&&p| !curve.encloses(p)) {
            return Err(Error::Geometry(format!(
                "material region reaches {:?}, outside the BEM curve",
                to_f64(*p)
            )));
        }
    }
    for &v in &sigma.vertices {
        if !curve.outside_scaled(v, margin) {
            return Err(Error::Geometry(format!(
                "polygon vertex {:?} lies within the evaluation margin of the BEM curve",
                to_f64(v)
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
