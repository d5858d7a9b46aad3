//! Conforming triangular meshes of the FEM domain.

mod generate;
mod locate;
mod msh;
mod space;

pub use generate::{octagon_fan, rectangle, RingMeshBuilder, RingSpec};
pub use locate::Locator;
pub use msh::parse_msh;
pub use space::{dof_count_after_refinement, LagrangeSpace, LocalNode};
pub use locate::LOCATE_TOLERANCE;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{cross, sub, Point, Polygon};
use crate::scalar::Real;

/// Conforming triangulation with counterclockwise triangles.
#[derive(Debug, Clone)]
pub struct TriMesh<T> {
    vertices: Vec<Point<T>>,
    triangles: Vec<[usize; 3]>,
    /// Material region id per triangle.
    regions: Vec<u32>,
    /// Boundary edges `(a, b)` oriented counterclockwise along Σ, with boundary tag.
    boundary: Vec<([usize; 2], u32)>,
}

impl<T: Real> TriMesh<T> {
    /// Builds and validates a mesh. Clockwise triangles are reoriented.
    /// Boundary edges are derived from the topology; `boundary_tags` maps
    /// unordered vertex pairs to tags (missing pairs get tag 0).
    pub fn new(
        vertices: Vec<Point<T>>,
        mut triangles: Vec<[usize; 3]>,
        regions: Vec<u32>,
        boundary_tags: &HashMap<[usize; 2], u32>,
    ) -> Result<Self> {
        if regions.len() != triangles.len() {
            return Err(Error::Mesh(format!(
                "{} region tags for {} triangles",
                regions.len(),
                triangles.len()
            )));
        }
        if triangles.is_empty() {
            return Err(Error::Mesh("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Mesh(format!("triangle {t} references a missing vertex")));
            }
            let area = signed_area2(&vertices, tri);
            if area == T::zero() || !area.is_finite() {
                return Err(Error::Mesh(format!("triangle {t} is degenerate")));
            }
            if area < T::zero() {
                tri.swap(1, 2);
            }
        }
        let mut directed: HashMap<[usize; 2], usize> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let key = [tri[e], tri[(e + 1) % 3]];
                if directed.insert(key, t).is_some() {
                    return Err(Error::Mesh(format!(
                        "non-conforming mesh: edge {key:?} used twice with the same orientation"
                    )));
                }
            }
        }
        let mut boundary: Vec<([usize; 2], u32)> = directed
            .keys()
            .filter(|&&[a, b]| !directed.contains_key(&[b, a]))
            .map(|&[a, b]| {
                let key = [a.min(b), a.max(b)];
                ([a, b], boundary_tags.get(&key).copied().unwrap_or(0))
            })
            .collect();
        boundary.sort_unstable();
        let mesh = TriMesh {
            vertices,
            triangles,
            regions,
            boundary,
        };
        mesh.boundary_loop()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn regions(&self) -> &[u32] {
        &self.regions
    }

    pub fn boundary_edges(&self) -> &[([usize; 2], u32)] {
        &self.boundary
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point<T>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> T {
        signed_area2(&self.vertices, &self.triangles[t]) / T::lit(2.0)
    }

    pub fn total_area(&self) -> T {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Longest edge over all triangles.
    pub fn max_diameter(&self) -> T {
        (0..self.triangles.len())
            .map(|t| self.diameter(t))
            .fold(T::zero(), T::max)
    }

    pub fn diameter(&self, t: usize) -> T {
        let p = self.triangle_points(t);
        (0..3)
            .map(|e| crate::geometry::norm(sub(p[(e + 1) % 3], p[e])))
            .fold(T::zero(), T::max)
    }

    /// Sorted unique undirected edges `(min, max)`.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut edges: Vec<[usize; 2]> = self
            .triangles
            .iter()
            .flat_map(|tri| (0..3).map(move |e| sorted_pair(tri[e], tri[(e + 1) % 3])))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Ordered counterclockwise vertex loop of the boundary Σ.
    pub fn boundary_loop(&self) -> Result<Vec<usize>> {
        let mut next: HashMap<usize, usize> = HashMap::with_capacity(self.boundary.len());
        for &([a, b], _) in &self.boundary {
            if next.insert(a, b).is_some() {
                return Err(Error::Mesh(format!(
                    "boundary is not a simple closed polygon (vertex {a} repeats)"
                )));
            }
        }
        let start = self
            .boundary
            .first()
            .ok_or_else(|| Error::Mesh("mesh has no boundary".into()))?
            .0[0];
        let mut loop_ = vec![start];
        let mut cur = next[&start];
        while cur != start {
            loop_.push(cur);
            cur = *next
                .get(&cur)
                .ok_or_else(|| Error::Mesh("open boundary chain".into()))?;
            if loop_.len() > self.boundary.len() {
                return Err(Error::Mesh("boundary chain does not close".into()));
            }
        }
        if loop_.len() != self.boundary.len() {
            return Err(Error::Mesh(
                "boundary consists of more than one closed polygon".into(),
            ));
        }
        Ok(loop_)
    }

    /// The boundary Σ as a polygon.
    pub fn boundary_polygon(&self) -> Polygon<T> {
        let loop_ = self.boundary_loop().expect("validated at construction");
        Polygon {
            vertices: loop_.into_iter().map(|v| self.vertices[v]).collect(),
        }
    }

    /// Uniform refinement: every triangle splits into four through its edge
    /// midpoints. Parent vertices keep their indices; midpoints follow in
    /// sorted edge order; children of triangle `t` are `4t..4t+4`.
    pub fn refine_uniform(&self) -> TriMesh<T> {
        let edges = self.edges();
        let nv = self.vertices.len();
        let index: HashMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, nv + i)).collect();
        let mut vertices = self.vertices.clone();
        let half = T::lit(0.5);
        vertices.extend(edges.iter().map(|&[a, b]| {
            let (p, q) = (self.vertices[a], self.vertices[b]);
            [half * (p[0] + q[0]), half * (p[1] + q[1])]
        }));
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut regions = Vec::with_capacity(4 * self.triangles.len());
        for (tri, &reg) in self.triangles.iter().zip(&self.regions) {
            let [a, b, c] = *tri;
            let ab = index[&sorted_pair(a, b)];
            let bc = index[&sorted_pair(b, c)];
            let ca = index[&sorted_pair(c, a)];
            triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            regions.extend([reg; 4]);
        }
        let mut boundary = Vec::with_capacity(2 * self.boundary.len());
        for &([a, b], tag) in &self.boundary {
            let m = index[&sorted_pair(a, b)];
            boundary.push(([a, m], tag));
            boundary.push(([m, b], tag));
        }
        boundary.sort_unstable();
        TriMesh {
            vertices,
            triangles,
            regions,
            boundary,
        }
    }

    /// `levels` successive uniform refinements.
    pub fn refined(&self, levels: usize) -> TriMesh<T> {
        let mut mesh = self.clone();
        for _ in 0..levels {
            mesh = mesh.refine_uniform();
        }
        mesh
    }

    /// Checks that `fine` was produced from `self` by `levels` uniform
    /// refinements (children of triangle `t` are `t * 4^levels ..`).
    pub fn is_refined_by(&self, fine: &TriMesh<T>, levels: usize) -> bool {
        let factor = 1usize << (2 * levels);
        if fine.triangles.len() != factor * self.triangles.len()
            || fine.vertices.len() < self.vertices.len()
        {
            return false;
        }
        if self.vertices[..] != fine.vertices[..self.vertices.len()] {
            return false;
        }
        let tol = T::lit(1e-10);
        (0..fine.triangles.len()).all(|t| {
            let c = centroid(&fine.triangle_points(t));
            let lam = barycentric(&self.triangle_points(t / factor), c);
            lam.iter().all(|&l| l >= -tol)
        })
    }
}

pub(crate) fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

fn signed_area2<T: Real>(vertices: &[Point<T>], tri: &[usize; 3]) -> T {
    let [a, b, c] = *tri;
    cross(sub(vertices[b], vertices[a]), sub(vertices[c], vertices[a]))
}

pub(crate) fn centroid<T: Real>(p: &[Point<T>; 3]) -> Point<T> {
    let three = T::lit(3.0);
    [
        (p[0][0] + p[1][0] + p[2][0]) / three,
        (p[0][1] + p[1][1] + p[2][1]) / three,
    ]
}

/// Barycentric coordinates of `x` with respect to triangle `p`.
pub fn barycentric<T: Real>(p: &[Point<T>; 3], x: Point<T>) -> [T; 3] {
    let det = cross(sub(p[1], p[0]), sub(p[2], p[0]));
    let l1 = cross(sub(x, p[0]), sub(p[2], p[0])) / det;
    let l2 = cross(sub(p[1], p[0]), sub(x, p[0])) / det;
    [T::one() - l1 - l2, l1, l2]
}

#[cfg(test)]
pub(crate) fn unit_square<T: Real>() -> TriMesh<T> {
    let o = T::zero();
    let l = T::one();
    TriMesh::new(
        vec![[o, o], [l, o], [l, l], [o, l]],
        vec![[0, 1, 2], [0, 2, 3]],
        vec![0, 0],
        &HashMap::new(),
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_conforming(m: &TriMesh<f64>) {
        let mut count: HashMap<[usize; 2], usize> = HashMap::new();
        for tri in m.triangles() {
            for e in 0..3 {
                *count.entry(sorted_pair(tri[e], tri[(e + 1) % 3])).or_default() += 1;
            }
        }
        let boundary: std::collections::HashSet<[usize; 2]> = m
            .boundary_edges()
            .iter()
            .map(|&([a, b], _)| sorted_pair(a, b))
            .collect();
        for (e, c) in count {
            assert_eq!(c, if boundary.contains(&e) { 1 } else { 2 }, "edge {e:?}");
        }
        for t in 0..m.num_triangles() {
            assert!(m.area(t) > 0.0);
        }
        m.boundary_loop().unwrap();
    }

    #[test]
    fn unit_square_counts() {
        let m = unit_square::<f64>();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.edges().len(), 5);
    }

    #[test]
    fn refine_square() {
        let m = unit_square::<f64>().refine_uniform();
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.boundary_edges().len(), 8);
        check_conforming(&m);
        assert!(unit_square::<f64>().is_refined_by(&m, 1));
        assert!(unit_square::<f64>().is_refined_by(&m.refine_uniform(), 2));
        assert!(!unit_square::<f64>().is_refined_by(&m, 2));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = TriMesh::new(
            vec![[0.0f64, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 2, 1]],
            vec![0],
            &HashMap::new(),
        )
        .unwrap();
        assert!(m.area(0) > 0.0);
    }

    #[test]
    fn rejects_non_manifold() {
        // Two triangles overlapping on the same directed edge.
        let r = TriMesh::new(
            vec![[0.0f64, 0.0], [1.0, 0.0], [0.0, 1.0], [0.2, 0.2]],
            vec![[0, 1, 2], [0, 1, 3]],
            vec![0, 0],
            &HashMap::new(),
        );
        assert!(matches!(r, Err(Error::Mesh(_))));
    }

    #[test]
    fn boundary_polygon_is_ccw() {
        let m = octagon_fan(3.0f64, 3);
        let poly = m.boundary_polygon();
        assert!(poly.signed_area() > 0.0);
        assert!((poly.signed_area() - m.total_area()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn refinement_preserves_area_and_conformity(m in 1usize..5, levels in 1usize..3) {
            let coarse = octagon_fan(3.0f64, m);
            let fine = coarse.refined(levels);
            let (a0, a1) = (coarse.total_area(), fine.total_area());
            prop_assert!((a0 - a1).abs() <= 1e-12 * a0);
            check_conforming(&fine);
            prop_assert_eq!(fine.num_triangles(), coarse.num_triangles() << (2 * levels));
            prop_assert!(coarse.is_refined_by(&fine, levels));
        }
    }
}
