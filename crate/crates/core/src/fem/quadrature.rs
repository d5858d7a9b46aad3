use crate::scalar::Real;

/// Triangle rule in barycentric coordinates; weights sum to 1 (multiply by
/// the triangle area).
#[derive(Debug, Clone)]
pub struct TriangleRule<T> {
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
    pub degree: usize,
}

fn orbit3(a: f64) -> [[f64; 3]; 3] {
    let b = 1.0 - 2.0 * a;
    [[a, a, b], [a, b, a], [b, a, a]]
}

fn orbit6(a: f64, b: f64) -> [[f64; 3]; 6] {
    let c = 1.0 - a - b;
    [[a, b, c], [b, a, c], [a, c, b], [c, a, b], [b, c, a], [c, b, a]]
}

impl<T: Real> TriangleRule<T> {
    /// Radon's 7-point rule, exact for degree 5.
    pub fn degree5() -> Self {
        let s = 15f64.sqrt();
        let mut pts = vec![[1.0 / 3.0; 3]];
        let mut w = vec![9.0 / 40.0];
        for (a, wa) in [((6.0 - s) / 21.0, (155.0 - s) / 1200.0), ((6.0 + s) / 21.0, (155.0 + s) / 1200.0)] {
            pts.extend(orbit3(a));
            w.extend([wa; 3]);
        }
        Self::from_f64(pts, w, 5)
    }

    /// Dunavant's 12-point rule, exact for degree 6.
    pub fn degree6() -> Self {
        let mut pts = Vec::with_capacity(12);
        let mut w = Vec::with_capacity(12);
        for (a, wa) in [
            (0.249_286_745_170_910, 0.116_786_275_726_379),
            (0.063_089_014_491_502, 0.050_844_906_370_207),
        ] {
            pts.extend(orbit3(a));
            w.extend([wa; 3]);
        }
        pts.extend(orbit6(0.053_145_049_844_817, 0.310_352_451_033_784));
        w.extend([0.082_851_075_618_374; 6]);
        Self::from_f64(pts, w, 6)
    }

    /// Rule used for assembling degree-`d` elements (exact for degree `2d`).
    pub fn for_degree(d: usize) -> Self {
        if d <= 2 {
            Self::degree5()
        } else {
            Self::degree6()
        }
    }

    fn from_f64(points: Vec<[f64; 3]>, weights: Vec<f64>, degree: usize) -> Self {
        TriangleRule {
            points: points.into_iter().map(|p| p.map(T::lit)).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
            degree,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Exact mean of `l1^i l2^j` over the reference triangle.
    fn monomial_mean(i: u32, j: u32) -> f64 {
        2.0 * factorial(i) * factorial(j) / factorial(i + j + 2)
    }

    #[test]
    fn rules_are_exact_to_their_degree() {
        for rule in [TriangleRule::<f64>::degree5(), TriangleRule::degree6()] {
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
            for i in 0..=rule.degree as u32 {
                for j in 0..=(rule.degree as u32 - i) {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[1].powi(i as i32) * p[2].powi(j as i32))
                        .sum();
                    let exact = monomial_mean(i, j);
                    assert!((q - exact).abs() < 1e-14, "deg ({i},{j}): {q} vs {exact}");
                }
            }
        }
    }
}
