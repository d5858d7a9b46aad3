pub mod bem;
pub mod coupling;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod oracle;
pub mod postproc;
pub mod scalar;
pub mod specfun;

pub use error::{Error, ErrorKind, Result};
pub use scalar::{Real, C};

/// Double-precision instantiations of the generic types.
pub type Point = geometry::Point<f64>;
pub type TriMesh = mesh::TriMesh<f64>;
pub type LagrangeSpace = mesh::LagrangeSpace<f64>;
pub type ParametricCurve = geometry::ParametricCurve<f64>;
pub type RefractiveIndexField = geometry::RefractiveIndexField<f64>;
pub type FemSystem = fem::FemSystem<f64>;
pub type BemDiscretization = bem::BemDiscretization<f64>;
pub type SolveContext = coupling::SolveContext<f64>;
pub type Incident = coupling::Incident<f64>;
pub type ScatterSolution = coupling::ScatterSolution<f64>;
pub type FarFieldTable = postproc::FarFieldTable<f64>;
pub type Scene = postproc::Scene<f64>;
pub type MieDisk = oracle::MieDisk<f64>;
