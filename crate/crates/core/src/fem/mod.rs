//! Interior Dirichlet Helmholtz solver on the polygonal domain.
//!
//! Assembles `b(u, v) = (grad u, grad v) - k^2 (n^2 u, v)` for a Lagrange
//! space, eliminates the Σ-nodes and factorizes the interior block once.
//! Every later solve (one per GMRES step and incident direction) reuses the
//! factorization.

mod basis;
mod quadrature;

pub use basis::{map_point, shape, ElementGeometry};
pub use quadrature::TriangleRule;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{to_f64, ParametricCurve, Point, RefractiveIndexField};
use crate::linalg::{CsrMatrix, SparseLdlt};
use crate::mesh::{LagrangeSpace, Locator};
use crate::scalar::{czero, norm_inf, Real, C};

/// Maximum number of iterative-refinement sweeps after the direct solve.
const REFINEMENT_STEPS: usize = 4;
/// Backward-error target of the refined interior solve.
const RESIDUAL_TARGET: f64 = 1e-12;

/// Assembled and factorized interior problem.
#[derive(Debug)]
pub struct FemSystem<T> {
    space: Arc<LagrangeSpace<T>>,
    k: T,
    matrix: CsrMatrix<T>,
    interior: Vec<usize>,
    a_ii: CsrMatrix<T>,
    a_ib: CsrMatrix<T>,
    a_ii_norm: T,
    factor: SparseLdlt<T>,
    locator: Locator<T>,
}

/// Nodal coefficients of a discrete field over the whole space.
#[derive(Debug, Clone)]
pub struct FemSolution<T> {
    pub space: Arc<LagrangeSpace<T>>,
    pub coeffs: Vec<C<T>>,
}

/// Assembles the Helmholtz matrix and factorizes its interior block.
pub fn assemble<T: Real>(
    space: Arc<LagrangeSpace<T>>,
    k: T,
    index: &RefractiveIndexField<T>,
) -> Result<FemSystem<T>> {
    if !(k >= T::zero() && k.is_finite()) {
        return Err(Error::Domain(format!("wavenumber must be finite and >= 0, got {k}")));
    }
    let matrix = assemble_matrix(&space, k, index);
    let n = space.num_dofs();
    let interior: Vec<usize> = (0..n).filter(|&i| !space.is_boundary(i)).collect();
    let boundary = space.boundary_dofs();
    let mut imap = vec![usize::MAX; n];
    for (r, &i) in interior.iter().enumerate() {
        imap[i] = r;
    }
    let mut bmap = vec![usize::MAX; n];
    for (r, &i) in boundary.iter().enumerate() {
        bmap[i] = r;
    }
    let a_ii = matrix.select(&interior, &imap, interior.len());
    let a_ib = matrix.select(&interior, &bmap, boundary.len());
    let a_ii_norm = row_sum_norm(&a_ii);
    let coords: Vec<Point<T>> = interior.iter().map(|&i| space.nodes()[i]).collect();
    let factor = SparseLdlt::factor(&a_ii, Some(&coords)).map_err(|e| match e {
        Error::Resonance {
            row,
            pivot,
            threshold,
        } => Error::Resonance {
            row: interior[row],
            pivot,
            threshold,
        },
        other => other,
    })?;
    log::debug!(
        "fem: {} dofs ({} on Σ), factor nnz {}",
        n,
        boundary.len(),
        factor.factor_nnz()
    );
    let locator = Locator::new(space.mesh());
    Ok(FemSystem {
        space,
        k,
        matrix,
        interior,
        a_ii,
        a_ib,
        a_ii_norm,
        factor,
        locator,
    })
}

fn row_sum_norm<T: Real>(a: &CsrMatrix<T>) -> T {
    (0..a.nrows())
        .map(|r| a.row(r).1.iter().map(|v| v.abs()).sum::<T>())
        .fold(T::zero(), T::max)
}

/// Full (unconstrained) matrix of `b(phi_j, phi_i)`.
pub fn assemble_matrix<T: Real>(
    space: &LagrangeSpace<T>,
    k: T,
    index: &RefractiveIndexField<T>,
) -> CsrMatrix<T> {
    let d = space.degree();
    let rule = TriangleRule::<T>::for_degree(d);
    let local = space.local_nodes();
    let nloc = local.len();
    // Basis values and barycentric derivatives at the quadrature points.
    let tab: Vec<Vec<(T, [T; 3])>> = rule
        .points
        .iter()
        .map(|lam| local.iter().map(|a| shape(a, d, lam)).collect())
        .collect();
    let mesh = space.mesh();
    let k2 = k * k;
    let mut triplets = Vec::with_capacity(mesh.num_triangles() * nloc * nloc);
    let mut elem = vec![T::zero(); nloc * nloc];
    let mut grads = vec![[T::zero(); 2]; nloc];
    for t in 0..mesh.num_triangles() {
        let p = mesh.triangle_points(t);
        let geo = ElementGeometry::new(&p);
        let tag = mesh.regions()[t];
        elem.iter_mut().for_each(|e| *e = T::zero());
        for (q, lam) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * geo.area;
            let n2 = index.eval_in_cell(map_point(&p, lam), tag);
            for (g, (_, dl)) in grads.iter_mut().zip(&tab[q]) {
                *g = geo.gradient(dl);
            }
            let wm = w * k2 * n2;
            for i in 0..nloc {
                let (vi, gi) = (tab[q][i].0, grads[i]);
                for j in i..nloc {
                    let gj = grads[j];
                    elem[i * nloc + j] += w * (gi[0] * gj[0] + gi[1] * gj[1]) - wm * (vi * tab[q][j].0);
                }
            }
        }
        for i in 0..nloc {
            for j in 0..i {
                elem[i * nloc + j] = elem[j * nloc + i];
            }
        }
        let dofs = space.cell_dofs(t);
        for i in 0..nloc {
            for j in 0..nloc {
                triplets.push((dofs[i], dofs[j], elem[i * nloc + j]));
            }
        }
    }
    let n = space.num_dofs();
    CsrMatrix::from_triplets(n, n, triplets)
}

impl<T: Real> FemSystem<T> {
    pub fn space(&self) -> &Arc<LagrangeSpace<T>> {
        &self.space
    }

    pub fn wavenumber(&self) -> T {
        self.k
    }

    /// Full assembled matrix (before elimination).
    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn num_dofs(&self) -> usize {
        self.space.num_dofs()
    }

    /// Number `M` of Dirichlet-constrained nodes on Σ.
    pub fn num_boundary(&self) -> usize {
        self.space.boundary_dofs().len()
    }

    pub fn locator(&self) -> &Locator<T> {
        &self.locator
    }

    /// Discrete solution with the given nodal values on Σ (in the order of
    /// [`LagrangeSpace::boundary_dofs`]).
    pub fn interior_solve(&self, g: &[C<T>]) -> Result<FemSolution<T>> {
        let m = self.num_boundary();
        if g.len() != m {
            return Err(Error::Dimension {
                expected: m,
                got: g.len(),
            });
        }
        let ni = self.interior.len();
        let mut rhs = vec![czero(); ni];
        self.a_ib.mul_vec(g, &mut rhs);
        rhs.iter_mut().for_each(|v| *v = -*v);
        let mut x = rhs.clone();
        self.factor.solve_in_place(&mut x);
        let mut r = vec![czero(); ni];
        let target = T::lit(RESIDUAL_TARGET);
        for _ in 0..REFINEMENT_STEPS {
            self.a_ii.mul_vec(&x, &mut r);
            for (ri, bi) in r.iter_mut().zip(&rhs) {
                *ri = bi - *ri;
            }
            let scale = self.a_ii_norm * norm_inf(&x) + norm_inf(&rhs);
            if norm_inf(&r) <= target * scale {
                break;
            }
            self.factor.solve_in_place(&mut r);
            for (xi, di) in x.iter_mut().zip(&r) {
                *xi += di;
            }
        }
        let mut coeffs = vec![czero(); self.num_dofs()];
        for (&i, &v) in self.interior.iter().zip(&x) {
            coeffs[i] = v;
        }
        for (&i, &v) in self.space.boundary_dofs().iter().zip(g) {
            coeffs[i] = v;
        }
        Ok(FemSolution {
            space: Arc::clone(&self.space),
            coeffs,
        })
    }

    /// Max-norm of the interior equations `b(u, phi_i)` over interior `i`.
    pub fn interior_residual(&self, sol: &FemSolution<T>) -> T {
        let mut r = vec![czero(); self.num_dofs()];
        self.matrix.mul_vec(&sol.coeffs, &mut r);
        self.interior
            .iter()
            .map(|&i| r[i].norm())
            .fold(T::zero(), T::max)
    }

    /// Max-row-sum norm of the full matrix.
    pub fn matrix_norm(&self) -> T {
        row_sum_norm(&self.matrix)
    }

    /// Values of a solution at arbitrary points of Ω₂.
    pub fn evaluate(&self, sol: &FemSolution<T>, points: &[Point<T>]) -> Result<Vec<C<T>>> {
        points
            .iter()
            .map(|&p| {
                let (t, lam) = self.locator.locate(self.space.mesh(), p)?;
                Ok(eval_in_cell(&self.space, &sol.coeffs, t, &lam).0)
            })
            .collect()
    }
}

/// Value and gradient of a coefficient vector inside triangle `t`.
pub fn eval_in_cell<T: Real>(
    space: &LagrangeSpace<T>,
    coeffs: &[C<T>],
    t: usize,
    lam: &[T; 3],
) -> (C<T>, [C<T>; 2]) {
    let d = space.degree();
    let geo = ElementGeometry::new(&space.mesh().triangle_points(t));
    let mut v = czero();
    let mut g = [czero(); 2];
    for (a, &dof) in space.local_nodes().iter().zip(space.cell_dofs(t)) {
        let (phi, dl) = shape(a, d, lam);
        let grad = geo.gradient(&dl);
        let c = coeffs[dof];
        v += c * phi;
        g[0] += c * grad[0];
        g[1] += c * grad[1];
    }
    (v, g)
}

/// Sparse `2N x L` evaluation operator of the FEM trace at `x(t_j)`.
pub fn gamma_trace_operator<T: Real>(
    space: &LagrangeSpace<T>,
    locator: &Locator<T>,
    curve: &ParametricCurve<T>,
    params: &[T],
) -> Result<CsrMatrix<T>> {
    let d = space.degree();
    let mesh = space.mesh();
    let sigma = mesh.boundary_polygon();
    let mut triplets = Vec::with_capacity(params.len() * space.dofs_per_cell());
    for (j, &t) in params.iter().enumerate() {
        let x = curve.eval(t).x;
        if !sigma.contains_strict(x) {
            return Err(Error::Geometry(format!(
                "curve point {:?} (t = {}) is not strictly inside the FEM domain",
                to_f64(x),
                t
            )));
        }
        let (cell, lam) = locator.locate(mesh, x).map_err(|_| {
            Error::Geometry(format!("curve point {:?} is outside the mesh", to_f64(x)))
        })?;
        for (a, &dof) in space.local_nodes().iter().zip(space.cell_dofs(cell)) {
            let (phi, _) = shape(a, d, &lam);
            if phi != T::zero() {
                triplets.push((j, dof, phi));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(params.len(), space.num_dofs(), triplets))
}

/// `||u||_{H^1}` of a discrete field.
pub fn h1_norm<T: Real>(sol: &FemSolution<T>) -> T {
    let space = &sol.space;
    let rule = TriangleRule::<T>::degree6();
    let mut total = T::zero();
    for t in 0..space.mesh().num_triangles() {
        let area = space.mesh().area(t);
        for (lam, &w) in rule.points.iter().zip(&rule.weights) {
            let (v, g) = eval_in_cell(space, &sol.coeffs, t, lam);
            total += w * area * (v.norm_sqr() + g[0].norm_sqr() + g[1].norm_sqr());
        }
    }
    total.sqrt()
}

/// `||u_h - u||_{H^1}` against an analytic field returning value and gradient.
pub fn h1_error_exact<T: Real>(
    sol: &FemSolution<T>,
    exact: impl Fn(Point<T>) -> (C<T>, [C<T>; 2]),
) -> T {
    let space = &sol.space;
    let rule = TriangleRule::<T>::degree6();
    let mut total = T::zero();
    for t in 0..space.mesh().num_triangles() {
        let p = space.mesh().triangle_points(t);
        let area = space.mesh().area(t);
        for (lam, &w) in rule.points.iter().zip(&rule.weights) {
            let (v, g) = eval_in_cell(space, &sol.coeffs, t, lam);
            let (ve, ge) = exact(map_point(&p, lam));
            total += w
                * area
                * ((v - ve).norm_sqr() + (g[0] - ge[0]).norm_sqr() + (g[1] - ge[1]).norm_sqr());
        }
    }
    total.sqrt()
}

/// `||u_c - u_f||_{H^1}` where the fine space comes from uniform refinements
/// of the coarse mesh; the coarse field is evaluated exactly in its parent
/// triangle at the fine quadrature points.
pub fn h1_error_nested<T: Real>(coarse: &FemSolution<T>, fine: &FemSolution<T>) -> Result<T> {
    let (cs, fs) = (&coarse.space, &fine.space);
    let (cm, fm) = (cs.mesh(), fs.mesh());
    let ratio = fm.num_triangles() / cm.num_triangles();
    let levels = (0..12).find(|&l| 1usize << (2 * l) == ratio);
    let levels = match levels {
        Some(l) if fm.num_triangles() == ratio * cm.num_triangles() && cm.is_refined_by(fm, l) => l,
        _ => {
            return Err(Error::Geometry(
                "fine mesh is not a uniform refinement of the coarse mesh".into(),
            ))
        }
    };
    if fs.degree() < cs.degree() {
        return Err(Error::Geometry("reference space has lower degree than the trial space".into()));
    }
    let factor = 1usize << (2 * levels);
    let rule = TriangleRule::<T>::degree6();
    let mut total = T::zero();
    for t in 0..fm.num_triangles() {
        let p = fm.triangle_points(t);
        let parent = t / factor;
        let pp = cm.triangle_points(parent);
        let area = fm.area(t);
        for (lam, &w) in rule.points.iter().zip(&rule.weights) {
            let (vf, gf) = eval_in_cell(fs, &fine.coeffs, t, lam);
            let lc = if levels == 0 {
                *lam
            } else {
                crate::mesh::barycentric(&pp, map_point(&p, lam))
            };
            let (vc, gc) = eval_in_cell(cs, &coarse.coeffs, parent, &lc);
            total += w
                * area
                * ((vf - vc).norm_sqr() + (gf[0] - gc[0]).norm_sqr() + (gf[1] - gc[1]).norm_sqr());
        }
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{octagon_fan, rectangle, TriMesh};
    use crate::scalar::{cis, cplx};
    use std::collections::HashMap;

    fn square_space(d: usize) -> Arc<LagrangeSpace<f64>> {
        Arc::new(LagrangeSpace::new(rectangle([0.0, 0.0], [1.0, 1.0], 1, 1).unwrap(), d).unwrap())
    }

    #[test]
    fn reference_triangle_stiffness() {
        let mesh = TriMesh::new(
            vec![[0.0f64, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![0],
            &HashMap::new(),
        )
        .unwrap();
        let space = LagrangeSpace::new(mesh, 1).unwrap();
        let a = assemble_matrix(&space, 0.0, &RefractiveIndexField::free_space());
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            let row: f64 = (0..3).map(|j| a.get(i, j)).sum();
            assert!(row.abs() < 1e-15);
            for j in 0..3 {
                assert!((a.get(i, j) - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn square_mass_matrix() {
        // k = 1, n = 1: A = K - M with the consistent P1 mass matrix whose
        // per-triangle entries are area/6 (diagonal) and area/12.
        let space = square_space(1);
        let k0 = assemble_matrix(&space, 0.0, &RefractiveIndexField::free_space());
        let k1 = assemble_matrix(&space, 1.0, &RefractiveIndexField::free_space());
        let mesh = space.mesh();
        let mut mass = [[0.0f64; 4]; 4];
        for t in 0..mesh.num_triangles() {
            let area = mesh.area(t);
            for &i in &mesh.triangles()[t] {
                for &j in &mesh.triangles()[t] {
                    mass[i][j] += if i == j { area / 6.0 } else { area / 12.0 };
                }
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                assert!((k0.get(i, j) - k1.get(i, j) - mass[i][j]).abs() < 1e-15);
            }
        }
        assert!(k1.is_symmetric());
    }

    #[test]
    fn laplace_reproduces_constants_and_zero() {
        for d in 1..=3 {
            let space = Arc::new(LagrangeSpace::new(octagon_fan(3.0, 3), d).unwrap());
            let sys = assemble(space, 0.0, &RefractiveIndexField::free_space()).unwrap();
            let m = sys.num_boundary();
            let zero = sys.interior_solve(&vec![czero(); m]).unwrap();
            assert!(zero.coeffs.iter().all(|c| *c == czero()));
            let c = cplx(2.5, -1.0);
            let sol = sys.interior_solve(&vec![c; m]).unwrap();
            for v in &sol.coeffs {
                assert!((v - c).norm() < 1e-12);
            }
            assert!(sys.interior_solve(&vec![c; m + 1]).is_err());
        }
    }

    #[test]
    fn galerkin_residual_is_small() {
        let space = Arc::new(LagrangeSpace::new(octagon_fan(3.0, 6), 2).unwrap());
        let index = RefractiveIndexField::gaussian(1.5, 40.0, 2.0).unwrap();
        let sys = assemble(space.clone(), 5.0, &index).unwrap();
        let g: Vec<C<f64>> = space
            .boundary_dofs()
            .iter()
            .map(|&i| cis(5.0 * space.nodes()[i][0]))
            .collect();
        let sol = sys.interior_solve(&g).unwrap();
        let bound = 1e-10 * norm_inf(&g) * sys.matrix_norm();
        assert!(sys.interior_residual(&sol) <= bound);
        for (&i, gi) in space.boundary_dofs().iter().zip(&g) {
            assert_eq!(sol.coeffs[i], *gi);
        }
        assert!(sys.matrix().is_symmetric());
    }

    #[test]
    fn trace_operator_reproduces_affine_fields() {
        let space = LagrangeSpace::new(octagon_fan(3.0, 8), 2).unwrap();
        let loc = Locator::new(space.mesh());
        let curve = ParametricCurve::rounded_square();
        let params: Vec<f64> = (0..40).map(|j| j as f64 * std::f64::consts::PI / 20.0).collect();
        let op = gamma_trace_operator(&space, &loc, &curve, &params).unwrap();
        let ones = vec![cplx(1.0, 0.0); space.num_dofs()];
        let x1: Vec<C<f64>> = space.interpolate(|p| cplx(p[0], 0.0));
        let mut out = vec![czero(); params.len()];
        op.mul_vec(&ones, &mut out);
        assert!(out.iter().all(|v| (v - cplx(1.0, 0.0)).norm() < 1e-12));
        op.mul_vec(&x1, &mut out);
        for (v, &t) in out.iter().zip(&params) {
            assert!((v.re - curve.eval(t).x[0]).abs() < 1e-12);
        }
        let big = ParametricCurve::circle(2.9);
        assert!(matches!(
            gamma_trace_operator(&space, &loc, &big, &params),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn h1_norms_on_unit_square() {
        let space = square_space(2);
        let one = FemSolution {
            space: space.clone(),
            coeffs: vec![cplx(1.0, 0.0); space.num_dofs()],
        };
        assert!((h1_norm(&one) - 1.0).abs() < 1e-14);
        let x1 = FemSolution {
            space: space.clone(),
            coeffs: space.interpolate(|p| cplx(p[0], 0.0)),
        };
        // int x^2 + int 1 = 1/3 + 1.
        assert!((h1_norm(&x1) - (4.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert_eq!(h1_error_nested(&x1, &x1).unwrap(), 0.0);
    }

    #[test]
    fn nested_error_matches_interpolation_of_refined_field() {
        let coarse = Arc::new(LagrangeSpace::new(octagon_fan(3.0, 2), 2).unwrap());
        let fine = Arc::new(LagrangeSpace::new(coarse.mesh().refined(2), 3).unwrap());
        let f = |p: Point<f64>| cplx(p[0] * p[1], p[0] - p[1] * p[1]);
        let uc = FemSolution {
            space: coarse.clone(),
            coeffs: coarse.interpolate(f),
        };
        let uf = FemSolution {
            space: fine.clone(),
            coeffs: fine.interpolate(f),
        };
        // Quadratics are reproduced exactly by both spaces.
        assert!(h1_error_nested(&uc, &uf).unwrap() < 1e-12);
        let other = Arc::new(LagrangeSpace::new(octagon_fan(3.0, 3), 2).unwrap());
        let uo = FemSolution {
            space: other.clone(),
            coeffs: other.interpolate(f),
        };
        assert!(h1_error_nested(&uc, &uo).is_err());
    }
}
