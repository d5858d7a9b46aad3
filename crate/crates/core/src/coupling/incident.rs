use crate::bem::{point_source, point_source_gradient};
use crate::geometry::{dot, Point};
use crate::scalar::{cis, cplx, czero, Real, C};

/// Incident wave driving the scattering problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Incident<T> {
    /// `amplitude * exp(ik d.x)` with `d = (cos angle, sin angle)`.
    PlaneWave { angle: T, amplitude: C<T> },
    /// `Phi_k(x - source)`, radiating from a point outside the scatterer.
    PointSource { source: Point<T> },
    Zero,
}

impl<T: Real> Incident<T> {
    pub fn plane(angle: T) -> Self {
        Incident::PlaneWave {
            angle,
            amplitude: cplx(T::one(), T::zero()),
        }
    }

    pub fn point(source: Point<T>) -> Self {
        Incident::PointSource { source }
    }

    /// Propagation direction of a plane wave.
    pub fn direction(&self) -> Option<Point<T>> {
        match self {
            Incident::PlaneWave { angle, .. } => Some([angle.cos(), angle.sin()]),
            _ => None,
        }
    }

    pub fn value(&self, k: T, p: Point<T>) -> C<T> {
        self.value_and_gradient(k, p).0
    }

    pub fn value_and_gradient(&self, k: T, p: Point<T>) -> (C<T>, [C<T>; 2]) {
        match self {
            Incident::PlaneWave { angle, amplitude } => {
                let d = [angle.cos(), angle.sin()];
                let v = *amplitude * cis(k * dot(d, p));
                let ik = cplx(T::zero(), k);
                (v, [ik * d[0] * v, ik * d[1] * v])
            }
            Incident::PointSource { source } => {
                (point_source(k, *source, p), point_source_gradient(k, *source, p))
            }
            Incident::Zero => (czero(), [czero(); 2]),
        }
    }
}
