//! Configuration, presets and commands behind the `helmscat` binary.

pub mod commands;
pub mod config;
pub mod scenes;

use helmscat::ErrorKind;

/// Process exit status for a failure class.
pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Geometry => 3,
        ErrorKind::Numerical => 4,
        ErrorKind::Io => 5,
    }
}
