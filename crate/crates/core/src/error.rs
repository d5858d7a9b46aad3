use thiserror::Error;

/// Failure classes surfaced by the library. The CLI maps [`Error::kind`] to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("point {x:?} is not inside any triangle")]
    Location { x: [f64; 2] },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error(
        "interior Dirichlet problem is (near) resonant: pivot {pivot:e} at row {row} \
         is below {threshold:e} relative; change the polygon or the wavenumber"
    )]
    Resonance { row: usize, pivot: f64, threshold: f64 },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("GMRES did not converge in {iterations} iterations (relative residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("point {x:?} is too close to the BEM curve for accurate potential evaluation")]
    Proximity { x: [f64; 2] },
    #[error("solve for incident angle {phi} failed: {source}")]
    Direction {
        phi: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Geometry,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Parse { .. }
            | Error::Mesh(_)
            | Error::Location { .. }
            | Error::Geometry(_)
            | Error::Proximity { .. } => ErrorKind::Geometry,
            Error::Io(_) => ErrorKind::Io,
            Error::Direction { source, .. } => source.kind(),
            Error::Domain(_)
            | Error::Resonance { .. }
            | Error::Numerical(_)
            | Error::Convergence { .. }
            | Error::Dimension { .. } => ErrorKind::Numerical,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
