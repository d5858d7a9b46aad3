use std::collections::HashMap;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Real;

/// Lattice position of a local node: barycentric multi-index `alpha` with
/// `alpha[0] + alpha[1] + alpha[2] = degree`.
pub type LocalNode = [usize; 3];

/// Local node order: the three vertices, then the nodes of edges
/// `(v0,v1)`, `(v1,v2)`, `(v2,v0)` walking from the first vertex, then
/// interior nodes in lexicographic order.
pub(crate) fn local_nodes(d: usize) -> Vec<LocalNode> {
    let mut nodes = vec![[d, 0, 0], [0, d, 0], [0, 0, d]];
    for s in 1..d {
        nodes.push([d - s, s, 0]);
    }
    for s in 1..d {
        nodes.push([0, d - s, s]);
    }
    for s in 1..d {
        nodes.push([s, 0, d - s]);
    }
    for a in 1..d {
        for b in 1..d {
            if a + b < d {
                nodes.push([a, b, d - a - b]);
            }
        }
    }
    nodes
}

/// Continuous piecewise-polynomial Lagrange space of degree `d` on a mesh.
#[derive(Debug, Clone)]
pub struct LagrangeSpace<T> {
    degree: usize,
    mesh: TriMesh<T>,
    nodes: Vec<Point<T>>,
    local: Vec<LocalNode>,
    /// Row-major `num_triangles x local.len()` local-to-global map.
    cell_dofs: Vec<usize>,
    boundary: Vec<usize>,
    on_boundary: Vec<bool>,
}

impl<T: Real> LagrangeSpace<T> {
    /// Global numbering: vertices first, then the `d - 1` nodes of every edge
    /// (edges in sorted `(min, max)` order, nodes running from the lower
    /// vertex index), then the interior nodes of each triangle.
    pub fn new(mesh: TriMesh<T>, degree: usize) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return Err(Error::Config(vec![format!(
                "unsupported degree {degree} (expected 1, 2 or 3)"
            )]));
        }
        let d = degree;
        let local = local_nodes(d);
        let edges = mesh.edges();
        let edge_id: HashMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let nv = mesh.num_vertices();
        let ne = edges.len();
        let interior = (d - 1) * d.saturating_sub(2) / 2;
        let total = nv + ne * (d - 1) + mesh.num_triangles() * interior;

        let mut nodes = Vec::with_capacity(total);
        nodes.extend_from_slice(mesh.vertices());
        let df = T::from_usize_lossy(d);
        for &[a, b] in &edges {
            let (p, q) = (mesh.vertices()[a], mesh.vertices()[b]);
            for s in 1..d {
                let w = T::from_usize_lossy(s) / df;
                nodes.push([p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])]);
            }
        }
        let nloc = local.len();
        let mut cell_dofs = Vec::with_capacity(mesh.num_triangles() * nloc);
        for (t, tri) in mesh.triangles().iter().enumerate() {
            cell_dofs.extend_from_slice(tri);
            for e in 0..3 {
                let (va, vb) = (tri[e], tri[(e + 1) % 3]);
                let id = edge_id[&super::sorted_pair(va, vb)];
                for s in 1..d {
                    let s_global = if va < vb { s } else { d - s };
                    cell_dofs.push(nv + id * (d - 1) + s_global - 1);
                }
            }
            let p = mesh.triangle_points(t);
            for (r, alpha) in local[3 + 3 * (d - 1)..].iter().enumerate() {
                cell_dofs.push(nodes.len());
                debug_assert_eq!(nodes.len(), nv + ne * (d - 1) + t * interior + r);
                let w = alpha.map(|a| T::from_usize_lossy(a) / df);
                nodes.push([
                    w[0] * p[0][0] + w[1] * p[1][0] + w[2] * p[2][0],
                    w[0] * p[0][1] + w[1] * p[1][1] + w[2] * p[2][1],
                ]);
            }
        }
        debug_assert_eq!(nodes.len(), total);

        let mut on_boundary = vec![false; total];
        for &([a, b], _) in mesh.boundary_edges() {
            on_boundary[a] = true;
            on_boundary[b] = true;
            let id = edge_id[&super::sorted_pair(a, b)];
            for s in 0..d - 1 {
                on_boundary[nv + id * (d - 1) + s] = true;
            }
        }
        let boundary = (0..total).filter(|&i| on_boundary[i]).collect();
        Ok(LagrangeSpace {
            degree,
            mesh,
            nodes,
            local,
            cell_dofs,
            boundary,
            on_boundary,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mesh(&self) -> &TriMesh<T> {
        &self.mesh
    }

    /// Global node coordinates.
    pub fn nodes(&self) -> &[Point<T>] {
        &self.nodes
    }

    pub fn num_dofs(&self) -> usize {
        self.nodes.len()
    }

    pub fn local_nodes(&self) -> &[LocalNode] {
        &self.local
    }

    pub fn dofs_per_cell(&self) -> usize {
        self.local.len()
    }

    /// Global indices of the local nodes of triangle `t`.
    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        let n = self.local.len();
        &self.cell_dofs[t * n..(t + 1) * n]
    }

    /// Sorted indices of the Dirichlet-constrained nodes on Σ.
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.on_boundary[dof]
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate<S>(&self, f: impl Fn(Point<T>) -> S) -> Vec<S> {
        self.nodes.iter().map(|&p| f(p)).collect()
    }
}

/// Degree-`d` node count after `levels` uniform refinements of a mesh with
/// `v` vertices, `e` edges and `t` triangles, from the refinement recurrence
/// `V' = V + E`, `E' = 2E + 3T`, `T' = 4T`.
pub fn dof_count_after_refinement(v: usize, e: usize, t: usize, levels: usize, d: usize) -> usize {
    let (mut v, mut e, mut t) = (v, e, t);
    for _ in 0..levels {
        (v, e, t) = (v + e, 2 * e + 3 * t, 4 * t);
    }
    v + e * (d - 1) + t * (d - 1) * d.saturating_sub(2) / 2
}
