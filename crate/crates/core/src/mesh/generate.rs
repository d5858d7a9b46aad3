//! Built-in structured generators: octagon fan, rectangle grid and graded
//! polar ring meshes whose interface rings carry material tags.

use std::collections::HashMap;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Real;

/// Regular octagon with vertices at polar angles `j*pi/4`, split into 8 fan
/// sectors each subdivided into `m^2` congruent triangles.
pub fn octagon_fan<T: Real>(circumradius: T, m: usize) -> TriMesh<T> {
    assert!(m >= 1, "octagon_fan needs m >= 1");
    let corners: Vec<Point<T>> = (0..8)
        .map(|k| {
            let a = T::FRAC_PI_4() * T::from_usize_lossy(k);
            [circumradius * a.cos(), circumradius * a.sin()]
        })
        .collect();
    let mf = T::from_usize_lossy(m);
    // Ring i (an octagon scaled by i/m) holds 8i vertices, numbered from the
    // +x axis counterclockwise; ring 0 is the centre.
    let mut vertices = vec![[T::zero(), T::zero()]];
    let mut ring_start = vec![0usize];
    for i in 1..=m {
        ring_start.push(vertices.len());
        for k in 0..8 {
            let (p, q) = (corners[k], corners[(k + 1) % 8]);
            for j in 0..i {
                let a = T::from_usize_lossy(i - j) / mf;
                let b = T::from_usize_lossy(j) / mf;
                vertices.push([a * p[0] + b * q[0], a * p[1] + b * q[1]]);
            }
        }
    }
    let at = |i: usize, q: usize| -> usize {
        if i == 0 {
            0
        } else {
            ring_start[i] + q % (8 * i)
        }
    };
    let mut triangles = Vec::with_capacity(8 * m * m);
    for k in 0..8 {
        for i in 1..=m {
            let (inner, outer) = (k * (i - 1), k * i);
            for j in 0..i {
                triangles.push([at(i - 1, inner + j), at(i, outer + j), at(i, outer + j + 1)]);
                if j + 1 < i {
                    triangles.push([
                        at(i - 1, inner + j),
                        at(i, outer + j + 1),
                        at(i - 1, inner + j + 1),
                    ]);
                }
            }
        }
    }
    let regions = vec![0; triangles.len()];
    TriMesh::new(vertices, triangles, regions, &HashMap::new())
        .expect("octagon fan is a valid mesh")
}

/// Axis-aligned rectangle `[x0,x1] x [y0,y1]` on an `nx x ny` grid of cells,
/// each split along its rising diagonal.
pub fn rectangle<T: Real>(lower: Point<T>, upper: Point<T>, nx: usize, ny: usize) -> Result<TriMesh<T>> {
    if nx == 0 || ny == 0 || !(upper[0] > lower[0]) || !(upper[1] > lower[1]) {
        return Err(Error::Mesh("rectangle needs positive extent and cell counts".into()));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = lower[1] + (upper[1] - lower[1]) * T::from_usize_lossy(j) / T::from_usize_lossy(ny);
        for i in 0..=nx {
            let x = lower[0] + (upper[0] - lower[0]) * T::from_usize_lossy(i) / T::from_usize_lossy(nx);
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let regions = vec![0; triangles.len()];
    TriMesh::new(vertices, triangles, regions, &HashMap::new())
}

/// A closed ring of `count` vertices at polar angles `2 pi j / count`.
#[derive(Debug, Clone, PartialEq)]
pub enum RingSpec<T> {
    Circle { radius: T, count: usize },
    /// Inscribed polygon scaled so that its area equals the disk of `radius`.
    AreaMatched { radius: T, count: usize },
    /// `r(theta) = (1 - s) radius + s r_oct(theta)`, with `r_oct` the regular
    /// octagon of the given circumradius (vertices at angles `j pi/4`).
    Blend {
        radius: T,
        circumradius: T,
        s: T,
        count: usize,
    },
}

impl<T: Real> RingSpec<T> {
    pub fn count(&self) -> usize {
        match *self {
            RingSpec::Circle { count, .. }
            | RingSpec::AreaMatched { count, .. }
            | RingSpec::Blend { count, .. } => count,
        }
    }

    fn radius_at(&self, theta: T) -> T {
        match *self {
            RingSpec::Circle { radius, .. } => radius,
            RingSpec::AreaMatched { radius, count } => {
                let n = T::from_usize_lossy(count);
                radius * (T::TAU() / (n * (T::TAU() / n).sin())).sqrt()
            }
            RingSpec::Blend {
                radius,
                circumradius,
                s,
                ..
            } => (T::one() - s) * radius + s * octagon_radius(circumradius, theta),
        }
    }
}

/// Polar radius of the regular octagon boundary at angle `theta`.
fn octagon_radius<T: Real>(circumradius: T, theta: T) -> T {
    let sector = T::FRAC_PI_4();
    let psi = theta - (theta / sector).floor() * sector - sector / T::lit(2.0);
    circumradius * (sector / T::lit(2.0)).cos() / psi.cos()
}

/// Polar mesh made of concentric rings around the origin. Consecutive rings
/// must have equal vertex counts or the outer one twice the inner one.
#[derive(Debug, Clone, Default)]
pub struct RingMeshBuilder<T> {
    rings: Vec<RingSpec<T>>,
}

impl<T: Real> RingMeshBuilder<T> {
    pub fn new() -> Self {
        RingMeshBuilder { rings: Vec::new() }
    }

    pub fn ring(mut self, spec: RingSpec<T>) -> Self {
        self.rings.push(spec);
        self
    }

    pub fn rings(&self) -> &[RingSpec<T>] {
        &self.rings
    }

    /// Graded rings for a circular interface of radius `a` carrying `count`
    /// vertices (a multiple of 8), continued outward with circles up to
    /// `outer` and blended onto the octagon of `circumradius`.
    ///
    /// Radial spacing is `a / K` with `K = round(count / 2pi)`, so every
    /// multiple of `a / K` is a ring radius. Returns the builder and the
    /// index of the interface ring. With `area_matched` the interface ring
    /// preserves the disk area instead of interpolating the circle.
    pub fn graded(
        a: T,
        count: usize,
        outer: T,
        circumradius: T,
        area_matched: bool,
    ) -> Result<(Self, usize)> {
        if count < 8 || count % 8 != 0 {
            return Err(Error::Mesh("ring vertex count must be a positive multiple of 8".into()));
        }
        let apothem = circumradius * (T::PI() / T::lit(8.0)).cos();
        if !(a > T::zero() && outer >= a && apothem > outer) {
            return Err(Error::Mesh(
                "graded rings need 0 < radius <= outer radius < octagon apothem".into(),
            ));
        }
        let k_layers = ((T::from_usize_lossy(count) / T::TAU()).round().to_usize().unwrap_or(1)).max(1);
        let h = a / T::from_usize_lossy(k_layers);
        let fits = |r: T, c: usize| T::TAU() * r / T::from_usize_lossy(c) >= T::lit(0.75) * h;

        // Inner rings, outermost first, then reversed.
        let mut inner = Vec::new();
        let mut c = count;
        for i in 1..k_layers {
            let r = a - h * T::from_usize_lossy(i);
            let prev = c;
            while c > 8 && c > prev / 2 && !fits(r, c) {
                c /= 2;
            }
            inner.push(RingSpec::Circle { radius: r, count: c });
        }
        inner.reverse();
        let mut builder = RingMeshBuilder { rings: inner };
        let iface = builder.rings.len();
        builder.rings.push(if area_matched {
            RingSpec::AreaMatched { radius: a, count }
        } else {
            RingSpec::Circle { radius: a, count }
        });
        let mut c = count;
        let mut r = a;
        loop {
            let next = r + h;
            if next > outer + T::lit(1e-12) * outer {
                break;
            }
            r = next;
            if T::TAU() * r / T::from_usize_lossy(c) >= T::lit(1.5) * h {
                c *= 2;
            }
            builder.rings.push(RingSpec::Circle { radius: r, count: c });
        }
        let layers = ((apothem - r) / h).ceil().to_usize().unwrap_or(1).max(1);
        for j in 1..=layers {
            builder.rings.push(RingSpec::Blend {
                radius: r,
                circumradius,
                s: T::from_usize_lossy(j) / T::from_usize_lossy(layers),
                count: c,
            });
        }
        Ok((builder, iface))
    }

    /// Triangulates the rings. `tagger(annulus, centroid)` assigns the region
    /// tag, where annulus 0 is the centre fan and annulus `i` lies between
    /// rings `i - 1` and `i`.
    pub fn build(&self, tagger: impl Fn(usize, Point<T>) -> u32) -> Result<TriMesh<T>> {
        let first = self
            .rings
            .first()
            .ok_or_else(|| Error::Mesh("ring mesh needs at least one ring".into()))?;
        if first.count() < 3 {
            return Err(Error::Mesh("innermost ring needs at least 3 vertices".into()));
        }
        for w in self.rings.windows(2) {
            let (ci, co) = (w[0].count(), w[1].count());
            if co != ci && co != 2 * ci {
                return Err(Error::Mesh(format!(
                    "ring counts {ci} -> {co}: outer ring must keep or double the count"
                )));
            }
        }
        let mut vertices = vec![[T::zero(), T::zero()]];
        let mut start = Vec::with_capacity(self.rings.len());
        for spec in &self.rings {
            start.push(vertices.len());
            let n = spec.count();
            for j in 0..n {
                let theta = T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(n);
                let r = spec.radius_at(theta);
                vertices.push([r * theta.cos(), r * theta.sin()]);
            }
        }
        let mut triangles = Vec::new();
        let mut annulus = Vec::new();
        let n0 = first.count();
        for j in 0..n0 {
            triangles.push([0, start[0] + j, start[0] + (j + 1) % n0]);
            annulus.push(0);
        }
        for (i, w) in self.rings.windows(2).enumerate() {
            let (ci, co) = (w[0].count(), w[1].count());
            let a = |j: usize| start[i] + j % ci;
            let b = |j: usize| start[i + 1] + j % co;
            for j in 0..ci {
                if co == ci {
                    triangles.push([a(j), b(j), b(j + 1)]);
                    triangles.push([a(j), b(j + 1), a(j + 1)]);
                    annulus.extend([i + 1; 2]);
                } else {
                    triangles.push([a(j), b(2 * j), b(2 * j + 1)]);
                    triangles.push([a(j), b(2 * j + 1), a(j + 1)]);
                    triangles.push([a(j + 1), b(2 * j + 1), b(2 * j + 2)]);
                    annulus.extend([i + 1; 3]);
                }
            }
        }
        let regions = triangles
            .iter()
            .zip(&annulus)
            .map(|(tri, &ann)| {
                let p = super::centroid(&[vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]]);
                tagger(ann, p)
            })
            .collect();
        TriMesh::new(vertices, triangles, regions, &HashMap::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{norm, Polygon};

    #[test]
    fn octagon_counts() {
        for m in [1usize, 2, 5, 24] {
            let mesh = octagon_fan(3.0f64, m);
            assert_eq!(mesh.num_triangles(), 8 * m * m);
            assert_eq!(mesh.num_vertices(), 1 + 4 * m * (m + 1));
            assert_eq!(mesh.boundary_edges().len(), 8 * m);
        }
        let mesh = octagon_fan(3.0f64, 4);
        let area = Polygon::regular(8, 3.0, 0.0).signed_area();
        assert!((mesh.total_area() - area).abs() < 1e-12 * area);
    }

    #[test]
    fn octagon_boundary_on_polygon() {
        let mesh = octagon_fan(3.0f64, 6);
        let poly = Polygon::regular(8, 3.0, 0.0);
        for v in mesh.boundary_loop().unwrap() {
            assert!(poly.boundary_distance(mesh.vertices()[v]) < 1e-12);
        }
    }

    #[test]
    fn rectangle_counts() {
        let mesh = rectangle([0.0f64, 0.0], [2.0, 1.0], 4, 3).unwrap();
        assert_eq!(mesh.num_triangles(), 24);
        assert_eq!(mesh.num_vertices(), 20);
        assert!((mesh.total_area() - 2.0).abs() < 1e-14);
        assert!(rectangle([0.0f64, 0.0], [0.0, 1.0], 1, 1).is_err());
    }

    #[test]
    fn graded_disk_mesh() {
        let (builder, iface) = RingMeshBuilder::graded(1.0f64, 64, 1.6, 2.2, true).unwrap();
        assert_eq!(builder.rings()[iface].count(), 64);
        let mesh = builder.build(|a, _| u32::from(a <= iface)).unwrap();
        // Tagged area equals the disk area thanks to the area-matched ring.
        let tagged: f64 = (0..mesh.num_triangles())
            .filter(|&t| mesh.regions()[t] == 1)
            .map(|t| mesh.area(t))
            .sum();
        assert!((tagged - std::f64::consts::PI).abs() < 1e-12);
        let octagon = Polygon::regular(8, 2.2, 0.0);
        assert!((mesh.total_area() - octagon.signed_area()).abs() < 1e-12);
        for v in mesh.boundary_loop().unwrap() {
            assert!(octagon.boundary_distance(mesh.vertices()[v]) < 1e-12);
        }
        // Quasi-uniform: element diameters within a modest band.
        let hmax = mesh.max_diameter();
        let hmin = (0..mesh.num_triangles())
            .map(|t| mesh.diameter(t))
            .fold(f64::INFINITY, f64::min);
        assert!(hmax / hmin < 4.0, "{hmax} / {hmin}");
        for t in 0..mesh.num_triangles() {
            let c = super::super::centroid(&mesh.triangle_points(t));
            if mesh.regions()[t] == 1 {
                assert!(norm(c) < 1.0);
            }
        }
    }

    #[test]
    fn ring_counts_must_double_at_most() {
        let b = RingMeshBuilder::new()
            .ring(RingSpec::Circle { radius: 1.0f64, count: 8 })
            .ring(RingSpec::Circle { radius: 2.0, count: 32 });
        assert!(b.build(|_, _| 0).is_err());
    }
}
