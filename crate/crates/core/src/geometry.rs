//! Artificial boundaries and the refractive-index field.
//!
//! The BEM curve is a registered analytic 2π-periodic parameterization with
//! exact first and second derivatives. The FEM boundary is a polygon (the
//! boundary of the mesh). The refractive index is a list of regions tried in
//! order; outside all of them the medium is free space (`n^2 = 1`).

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Point<T> = [T; 2];

#[inline]
pub(crate) fn sub<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn dot<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn norm<T: Real>(a: Point<T>) -> T {
    a[0].hypot(a[1])
}

#[inline]
pub(crate) fn cross<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn to_f64<T: Real>(p: Point<T>) -> [f64; 2] {
    [p[0].as_f64(), p[1].as_f64()]
}

/// Position and derivatives of a curve at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint<T> {
    pub x: Point<T>,
    pub d1: Point<T>,
    pub d2: Point<T>,
}

impl<T: Real> CurvePoint<T> {
    /// Non-normalised normal `(x2', -x1')`; exterior-pointing for a
    /// counterclockwise curve, with length `|x'|`.
    pub fn normal(&self) -> Point<T> {
        [self.d1[1], -self.d1[0]]
    }

    pub fn speed(&self) -> T {
        norm(self.d1)
    }
}

/// Registered analytic curve formulas.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveShape<T> {
    Circle { radius: T },
    Ellipse { a: T, b: T },
    /// `x(t) = 4/(5 sqrt 2) ((1+cos^2 t)cos t + (1+sin^2 t) sin t,
    ///                       -(1+cos^2 t)cos t + (1+sin^2 t) sin t)`.
    RoundedSquare,
}

/// Smooth closed 2π-periodic counterclockwise curve, optionally scaled about the origin.
#[derive(Debug, Clone)]
pub struct ParametricCurve<T> {
    shape: CurveShape<T>,
    scale: T,
    tag: String,
    outline: Polygon<T>,
}

const OUTLINE_SAMPLES: usize = 1024;

impl<T: Real> ParametricCurve<T> {
    pub fn new(shape: CurveShape<T>, scale: T) -> Result<Self> {
        let ok = match &shape {
            CurveShape::Circle { radius } => *radius > T::zero(),
            CurveShape::Ellipse { a, b } => *a > T::zero() && *b > T::zero(),
            CurveShape::RoundedSquare => true,
        };
        if !ok || !(scale > T::zero()) {
            return Err(Error::Geometry(format!(
                "invalid curve parameters {shape:?} scale {scale}"
            )));
        }
        let tag = match &shape {
            CurveShape::Circle { .. } => "circle",
            CurveShape::Ellipse { .. } => "ellipse",
            CurveShape::RoundedSquare => "rounded_square",
        }
        .to_string();
        let mut curve = ParametricCurve {
            shape,
            scale,
            tag,
            outline: Polygon {
                vertices: Vec::new(),
            },
        };
        let h = T::TAU() / T::from_usize_lossy(OUTLINE_SAMPLES);
        curve.outline = Polygon {
            vertices: (0..OUTLINE_SAMPLES)
                .map(|i| curve.eval(h * T::from_usize_lossy(i)).x)
                .collect(),
        };
        Ok(curve)
    }

    pub fn circle(radius: T) -> Self {
        Self::new(CurveShape::Circle { radius }, T::one()).expect("positive radius")
    }

    pub fn ellipse(a: T, b: T) -> Self {
        Self::new(CurveShape::Ellipse { a, b }, T::one()).expect("positive semi-axes")
    }

    pub fn rounded_square() -> Self {
        Self::new(CurveShape::RoundedSquare, T::one()).expect("registered shape")
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.shape.clone(), self.scale * factor)
    }

    pub fn shape(&self) -> &CurveShape<T> {
        &self.shape
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Position, tangent and second derivative at `t` (reduced mod 2π).
    pub fn eval(&self, t: T) -> CurvePoint<T> {
        let t = t % T::TAU();
        let (s, c) = t.sin_cos();
        let (x, d1, d2) = match self.shape {
            CurveShape::Circle { radius } => (
                [radius * c, radius * s],
                [-radius * s, radius * c],
                [-radius * c, -radius * s],
            ),
            CurveShape::Ellipse { a, b } => ([a * c, b * s], [-a * s, b * c], [-a * c, -b * s]),
            CurveShape::RoundedSquare => {
                let three = T::lit(3.0);
                let two = T::lit(2.0);
                let f = c + c * c * c;
                let g = s + s * s * s;
                let f1 = -s - three * c * c * s;
                let g1 = c + three * s * s * c;
                let f2 = -c - three * (c * c * c - two * c * s * s);
                let g2 = -s + three * (two * s * c * c - s * s * s);
                let k = T::lit(4.0) / (T::lit(5.0) * T::SQRT_2());
                (
                    [k * (f + g), k * (g - f)],
                    [k * (f1 + g1), k * (g1 - f1)],
                    [k * (f2 + g2), k * (g2 - f2)],
                )
            }
        };
        let sc = self.scale;
        CurvePoint {
            x: [sc * x[0], sc * x[1]],
            d1: [sc * d1[0], sc * d1[1]],
            d2: [sc * d2[0], sc * d2[1]],
        }
    }

    /// Dense polygonal outline used for region tests.
    pub fn outline(&self) -> &Polygon<T> {
        &self.outline
    }

    /// True if `p` lies inside the curve.
    pub fn encloses(&self, p: Point<T>) -> bool {
        self.outline.contains_strict(p)
    }

    /// True if `p` lies outside the curve scaled by `factor` about the origin.
    pub fn outside_scaled(&self, p: Point<T>, factor: T) -> bool {
        !self.outline.contains([p[0] / factor, p[1] / factor])
    }

    /// Largest distance of the curve from the origin.
    pub fn max_radius(&self) -> T {
        self.outline
            .vertices
            .iter()
            .map(|&v| norm(v))
            .fold(T::zero(), T::max)
    }
}

/// Closed simple polygon, vertices counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T> {
    pub vertices: Vec<Point<T>>,
}

/// Distance below which a point counts as lying on a polygon edge.
pub const EDGE_TOLERANCE: f64 = 1e-12;

impl<T: Real> Polygon<T> {
    pub fn new(vertices: Vec<Point<T>>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry("polygon needs at least 3 vertices".into()));
        }
        let poly = Polygon { vertices };
        if poly.signed_area() <= T::zero() {
            return Err(Error::Geometry(
                "polygon vertices must be counterclockwise".into(),
            ));
        }
        if poly.self_intersects() {
            return Err(Error::Geometry("polygon is not simple".into()));
        }
        Ok(poly)
    }

    /// Regular polygon with `n` vertices, the first at polar angle `rotation`.
    pub fn regular(n: usize, circumradius: T, rotation: T) -> Self {
        let vertices = (0..n)
            .map(|i| {
                let a = rotation + T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(n);
                [circumradius * a.cos(), circumradius * a.sin()]
            })
            .collect();
        Polygon { vertices }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point<T>, Point<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> T {
        self.edges().map(|(a, b)| cross(a, b)).sum::<T>() / T::lit(2.0)
    }

    fn self_intersects(&self) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                let d1 = cross(sub(b, a), sub(c, a));
                let d2 = cross(sub(b, a), sub(d, a));
                let d3 = cross(sub(d, c), sub(a, c));
                let d4 = cross(sub(d, c), sub(b, c));
                if d1 * d2 < T::zero() && d3 * d4 < T::zero() {
                    return true;
                }
            }
        }
        false
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point<T>) -> T {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(T::infinity(), T::min)
    }

    /// Crossing-number test; points within [`EDGE_TOLERANCE`] of an edge count as inside.
    pub fn contains(&self, p: Point<T>) -> bool {
        if self.boundary_distance(p) <= T::lit(EDGE_TOLERANCE) {
            return true;
        }
        self.contains_strict(p)
    }

    /// Crossing-number test without the edge tolerance.
    pub fn contains_strict(&self, p: Point<T>) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let xc = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn max_radius(&self) -> T {
        self.vertices
            .iter()
            .map(|&v| norm(v))
            .fold(T::zero(), T::max)
    }
}

pub(crate) fn segment_distance<T: Real>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 > T::zero() {
        (dot(sub(p, a), ab) / len2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Value model of `n^2` inside a region.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexModel<T> {
    Constant(T),
    /// `1 + amplitude * exp(-decay |x|^2)`.
    Gaussian { amplitude: T, decay: T },
}

impl<T: Real> IndexModel<T> {
    pub fn eval(&self, p: Point<T>) -> T {
        match *self {
            IndexModel::Constant(v) => v,
            IndexModel::Gaussian { amplitude, decay } => {
                T::one() + amplitude * (-decay * dot(p, p)).exp()
            }
        }
    }

    fn lower_bound(&self) -> T {
        match *self {
            IndexModel::Constant(v) => v,
            IndexModel::Gaussian { amplitude, .. } => T::one().min(T::one() + amplitude),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegionShape<T> {
    Disk { center: Point<T>, radius: T },
    Polygon(Polygon<T>),
}

impl<T: Real> RegionShape<T> {
    /// Membership with boundary points included.
    pub fn contains(&self, p: Point<T>) -> bool {
        match self {
            RegionShape::Disk { center, radius } => {
                norm(sub(p, *center)) <= *radius + T::lit(EDGE_TOLERANCE)
            }
            RegionShape::Polygon(poly) => poly.contains(p),
        }
    }

    fn max_radius(&self) -> T {
        match self {
            RegionShape::Disk { center, radius } => norm(*center) + *radius,
            RegionShape::Polygon(poly) => poly.max_radius(),
        }
    }
}

/// One material subdomain. `tag` is the mesh region id that carries it on
/// interface-aligned meshes.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<T> {
    pub shape: RegionShape<T>,
    pub model: IndexModel<T>,
    pub tag: Option<u32>,
}

/// Piecewise description of `n^2`, equal to 1 outside every region.
#[derive(Debug, Clone, PartialEq)]
pub struct RefractiveIndexField<T> {
    regions: Vec<Region<T>>,
}

impl<T: Real> Default for RefractiveIndexField<T> {
    fn default() -> Self {
        Self::free_space()
    }
}

impl<T: Real> RefractiveIndexField<T> {
    pub fn new(regions: Vec<Region<T>>) -> Result<Self> {
        for r in &regions {
            if !(r.model.lower_bound() > T::zero()) {
                return Err(Error::Geometry(format!(
                    "refractive index must stay positive, got model {:?}",
                    r.model
                )));
            }
        }
        Ok(RefractiveIndexField { regions })
    }

    /// `n == 1` everywhere.
    pub fn free_space() -> Self {
        RefractiveIndexField {
            regions: Vec::new(),
        }
    }

    /// `n^2 = 1 + amplitude exp(-decay r^2)` for `r <= radius`.
    pub fn gaussian(amplitude: T, decay: T, radius: T) -> Result<Self> {
        Self::new(vec![Region {
            shape: RegionShape::Disk {
                center: [T::zero(), T::zero()],
                radius,
            },
            model: IndexModel::Gaussian { amplitude, decay },
            tag: None,
        }])
    }

    /// Homogeneous disk with index `n` (not squared), carried by mesh tag `tag`.
    pub fn disk(center: Point<T>, radius: T, n: T, tag: u32) -> Result<Self> {
        Self::new(vec![Region {
            shape: RegionShape::Disk { center, radius },
            model: IndexModel::Constant(n * n),
            tag: Some(tag),
        }])
    }

    pub fn regions(&self) -> &[Region<T>] {
        &self.regions
    }

    pub fn is_free_space(&self) -> bool {
        self.regions.is_empty()
    }

    /// `n^2(p)`: first region containing `p`, else 1.
    pub fn eval(&self, p: Point<T>) -> T {
        self.regions
            .iter()
            .find(|r| r.shape.contains(p))
            .map_or(T::one(), |r| r.model.eval(p))
    }

    /// `n^2` at `p` inside a mesh triangle carrying region tag `tag`.
    ///
    /// Tagged regions apply by tag only, so material interfaces follow the
    /// mesh exactly; untagged (smooth) regions are evaluated pointwise.
    pub fn eval_in_cell(&self, p: Point<T>, tag: u32) -> T {
        if let Some(r) = self.regions.iter().find(|r| r.tag == Some(tag)) {
            return r.model.eval(p);
        }
        self.regions
            .iter()
            .filter(|r| r.tag.is_none())
            .find(|r| r.shape.contains(p))
            .map_or(T::one(), |r| r.model.eval(p))
    }

    pub fn has_tag(&self, tag: u32) -> bool {
        self.regions.iter().any(|r| r.tag == Some(tag))
    }

    /// Radius of a disk about the origin containing the declared support.
    pub fn support_radius(&self) -> T {
        self.regions
            .iter()
            .map(|r| r.shape.max_radius())
            .fold(T::zero(), T::max)
    }
}
