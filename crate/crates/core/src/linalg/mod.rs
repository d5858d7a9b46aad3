//! Linear algebra kernels: sparse storage and `L D L^T`, dense LU, GMRES.

mod dense;
mod gmres;
mod ldlt;
mod sparse;

pub use dense::{DenseLu, DenseMatrix};
pub use gmres::{gmres, GmresOptions, GmresOutcome};
pub use ldlt::{nested_dissection, SparseLdlt, PIVOT_THRESHOLD};
pub use sparse::CsrMatrix;
