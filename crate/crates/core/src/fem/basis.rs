use crate::geometry::Point;
use crate::mesh::LocalNode;
use crate::scalar::Real;

/// Lagrange basis function of multi-index `alpha` and its derivatives with
/// respect to the three barycentric coordinates:
/// `phi(l) = prod_c prod_{s < alpha_c} (d l_c - s) / (s + 1)`.
pub fn shape<T: Real>(alpha: &LocalNode, d: usize, lam: &[T; 3]) -> (T, [T; 3]) {
    let df = T::from_usize_lossy(d);
    let mut f = [T::one(); 3];
    let mut g = [T::zero(); 3];
    for c in 0..3 {
        for s in 0..alpha[c] {
            let sf = T::from_usize_lossy(s);
            let inv = T::one() / (sf + T::one());
            let factor = (df * lam[c] - sf) * inv;
            // Product rule for the running 1-D factor.
            g[c] = g[c] * factor + f[c] * df * inv;
            f[c] *= factor;
        }
    }
    let value = f[0] * f[1] * f[2];
    let grad = [g[0] * f[1] * f[2], f[0] * g[1] * f[2], f[0] * f[1] * g[2]];
    (value, grad)
}

/// Affine map data of a triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry<T> {
    pub area: T,
    /// Gradients of the barycentric coordinates.
    pub grad_lambda: [Point<T>; 3],
}

impl<T: Real> ElementGeometry<T> {
    pub fn new(p: &[Point<T>; 3]) -> Self {
        let e1 = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
        let e2 = [p[2][0] - p[0][0], p[2][1] - p[0][1]];
        let det = e1[0] * e2[1] - e1[1] * e2[0];
        let g1 = [e2[1] / det, -e2[0] / det];
        let g2 = [-e1[1] / det, e1[0] / det];
        ElementGeometry {
            area: det.abs() / T::lit(2.0),
            grad_lambda: [[-(g1[0] + g2[0]), -(g1[1] + g2[1])], g1, g2],
        }
    }

    /// Physical gradient from barycentric derivatives.
    pub fn gradient(&self, dl: &[T; 3]) -> Point<T> {
        let g = &self.grad_lambda;
        [
            dl[0] * g[0][0] + dl[1] * g[1][0] + dl[2] * g[2][0],
            dl[0] * g[0][1] + dl[1] * g[1][1] + dl[2] * g[2][1],
        ]
    }
}

/// Physical point at barycentric coordinates `lam`.
pub fn map_point<T: Real>(p: &[Point<T>; 3], lam: &[T; 3]) -> Point<T> {
    [
        lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
        lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::LagrangeSpace;
    use crate::mesh::octagon_fan;

    #[test]
    fn kronecker_property_and_partition_of_unity() {
        for d in 1..=3 {
            let space = LagrangeSpace::new(octagon_fan(1.0f64, 1), d).unwrap();
            let nodes = space.local_nodes();
            for (i, a) in nodes.iter().enumerate() {
                for (j, b) in nodes.iter().enumerate() {
                    let lam = b.map(|x| x as f64 / d as f64);
                    let (v, _) = shape(a, d, &lam);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-14, "d={d} i={i} j={j}");
                }
            }
            let lam = [0.2, 0.3, 0.5];
            let sum: f64 = nodes.iter().map(|a| shape(a, d, &lam).0).sum();
            assert!((sum - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let lam = [0.21, 0.33, 0.46];
        for d in 1..=3 {
            let space = LagrangeSpace::new(octagon_fan(1.0f64, 1), d).unwrap();
            for a in space.local_nodes() {
                let (_, g) = shape(a, d, &lam);
                for c in 0..3 {
                    let h = 1e-6f64;
                    let mut lp = lam;
                    let mut lm = lam;
                    lp[c] += h;
                    lm[c] -= h;
                    let fd = (shape(a, d, &lp).0 - shape(a, d, &lm).0) / (2.0 * h);
                    assert!((fd - g[c]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn barycentric_gradients() {
        let p = [[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]];
        let geo = ElementGeometry::<f64>::new(&p);
        assert_eq!(geo.area, 1.0);
        assert_eq!(geo.grad_lambda[1], [0.5, 0.0]);
        assert_eq!(geo.grad_lambda[2], [0.0, 1.0]);
        assert_eq!(geo.grad_lambda[0], [-0.5, -1.0]);
    }
}
