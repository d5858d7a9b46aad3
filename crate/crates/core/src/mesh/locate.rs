use super::{barycentric, TriMesh};
use crate::error::{Error, Result};
use crate::geometry::{to_f64, Point};
use crate::scalar::Real;

/// Barycentric slack accepted when locating a point.
pub const LOCATE_TOLERANCE: f64 = 1e-10;

/// Uniform background bucket grid over the mesh bounding box. Each bucket
/// lists (in increasing order) the triangles whose expanded bounding box
/// meets it, so a query scans a single bucket.
#[derive(Debug, Clone)]
pub struct Locator<T> {
    origin: Point<T>,
    cell: T,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<T: Real> Locator<T> {
    pub fn new(mesh: &TriMesh<T>) -> Self {
        let tol = T::lit(LOCATE_TOLERANCE);
        let (mut lo, mut hi) = ([T::infinity(); 2], [T::neg_infinity(); 2]);
        for v in mesh.vertices() {
            for c in 0..2 {
                lo[c] = lo[c].min(v[c]);
                hi[c] = hi[c].max(v[c]);
            }
        }
        let cell = T::lit(2.0) * mesh.max_diameter();
        let count = |c: usize| ((hi[c] - lo[c]) / cell).floor().to_usize().unwrap_or(0) + 1;
        let (nx, ny) = (count(0), count(1));
        let mut buckets = vec![Vec::new(); nx * ny];
        for t in 0..mesh.num_triangles() {
            let p = mesh.triangle_points(t);
            let mut blo = [T::infinity(); 2];
            let mut bhi = [T::neg_infinity(); 2];
            for q in &p {
                for c in 0..2 {
                    blo[c] = blo[c].min(q[c] - tol);
                    bhi[c] = bhi[c].max(q[c] + tol);
                }
            }
            let (i0, j0) = Self::clamp_cell(lo, cell, nx, ny, blo);
            let (i1, j1) = Self::clamp_cell(lo, cell, nx, ny, bhi);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(t);
                }
            }
        }
        Locator {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn clamp_cell(origin: Point<T>, cell: T, nx: usize, ny: usize, p: Point<T>) -> (usize, usize) {
        let idx = |c: usize, n: usize| {
            let f = ((p[c] - origin[c]) / cell).floor();
            if f <= T::zero() {
                0
            } else {
                f.to_usize().unwrap_or(n - 1).min(n - 1)
            }
        };
        (idx(0, nx), idx(1, ny))
    }

    /// Containing triangle and barycentric coordinates of `p`. Points on
    /// shared edges or vertices resolve to the lowest triangle index.
    pub fn locate(&self, mesh: &TriMesh<T>, p: Point<T>) -> Result<(usize, [T; 3])> {
        let outside = || Error::Location { x: to_f64(p) };
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(outside());
        }
        let tol = T::lit(LOCATE_TOLERANCE);
        for c in 0..2 {
            let n = if c == 0 { self.nx } else { self.ny };
            let extent = self.cell * T::from_usize_lossy(n);
            if p[c] < self.origin[c] - tol || p[c] > self.origin[c] + extent + tol {
                return Err(outside());
            }
        }
        let (i, j) = Self::clamp_cell(self.origin, self.cell, self.nx, self.ny, p);
        for &t in &self.buckets[j * self.nx + i] {
            let lam = barycentric(&mesh.triangle_points(t), p);
            if lam.iter().all(|&l| l >= -tol && l <= T::one() + tol) {
                return Ok((t, lam));
            }
        }
        Err(outside())
    }
}

impl<T: Real> TriMesh<T> {
    /// One-off point location; build a [`Locator`] for repeated queries.
    pub fn locate_point(&self, p: Point<T>) -> Result<(usize, [T; 3])> {
        Locator::new(self).locate(self, p)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{centroid, octagon_fan, unit_square};
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn centroid_is_found() {
        let mesh = octagon_fan(3.0f64, 4);
        let loc = Locator::new(&mesh);
        for t in 0..mesh.num_triangles() {
            let (found, lam) = loc.locate(&mesh, centroid(&mesh.triangle_points(t))).unwrap();
            assert_eq!(found, t);
            for l in lam {
                assert!((l - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vertex_resolves_to_lowest_triangle() {
        let mesh = unit_square::<f64>();
        // Vertex 0 and vertex 2 are shared by both triangles.
        let (t, lam) = mesh.locate_point([0.0, 0.0]).unwrap();
        assert_eq!(t, 0);
        assert!((lam[0] - 1.0).abs() < 1e-15);
        let (t, _) = mesh.locate_point([1.0, 1.0]).unwrap();
        assert_eq!(t, 0);
        let (t, _) = mesh.locate_point([0.0, 1.0]).unwrap();
        assert_eq!(t, 1);
    }

    #[test]
    fn outside_is_an_error() {
        let mesh = unit_square::<f64>();
        assert!(matches!(mesh.locate_point([2.0, 0.5]), Err(Error::Location { .. })));
        assert!(matches!(mesh.locate_point([0.5, -1e-6]), Err(Error::Location { .. })));
        assert!(mesh.locate_point([0.5, -1e-11]).is_ok());
        let oct = octagon_fan(3.0f64, 3);
        assert!(oct.locate_point([2.9, 2.9]).is_err());
    }

    proptest! {
        #[test]
        fn barycentric_reproduces_point(r in 0.0f64..2.7, a in 0.0f64..std::f64::consts::TAU) {
            let mesh = octagon_fan(3.0f64, 5).refine_uniform();
            let p = [r * a.cos(), r * a.sin()];
            let (t, lam) = mesh.locate_point(p).unwrap();
            let q = mesh.triangle_points(t);
            let sum: f64 = lam.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            for c in 0..2 {
                let x = lam[0] * q[0][c] + lam[1] * q[1][c] + lam[2] * q[2][c];
                prop_assert!((x - p[c]).abs() < 1e-12);
            }
        }
    }
}
