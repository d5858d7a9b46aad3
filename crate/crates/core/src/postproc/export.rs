use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::coupling::{ScatterSolution, SolveContext};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::{Real, C};

/// Uniform `nx x ny` sampling grid over the box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub lower: Point<T>,
    pub upper: Point<T>,
    pub nx: usize,
    pub ny: usize,
    /// Also write a legacy VTK structured-points file.
    pub vtk: bool,
}

impl<T: Real> GridSpec<T> {
    fn spacing(&self) -> [T; 2] {
        let step = |lo: T, hi: T, n: usize| {
            if n > 1 {
                (hi - lo) / T::from_usize_lossy(n - 1)
            } else {
                T::one()
            }
        };
        [
            step(self.lower[0], self.upper[0], self.nx),
            step(self.lower[1], self.upper[1], self.ny),
        ]
    }

    /// Grid points, `x` fastest.
    pub fn points(&self) -> Vec<Point<T>> {
        let h = self.spacing();
        let mut pts = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                pts.push([
                    self.lower[0] + h[0] * T::from_usize_lossy(i),
                    self.lower[1] + h[1] * T::from_usize_lossy(j),
                ]);
            }
        }
        pts
    }
}

fn push_row<T: Real>(out: &mut String, p: Point<T>, v: C<T>) {
    let _ = writeln!(
        out,
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        p[0].as_f64(),
        p[1].as_f64(),
        v.re.as_f64(),
        v.im.as_f64(),
        v.norm().as_f64()
    );
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Writes `interior.csv` (total field `u_h` at grid points of Ω₂),
/// `exterior.csv` (scattered field `omega_N` at grid points outside the
/// evaluation margin) and optionally `fields.vtk` (total field on the whole
/// grid, NaN where neither representation applies).
pub fn export_fields<T: Real>(
    ctx: &SolveContext<T>,
    sol: &ScatterSolution<T>,
    grid: &GridSpec<T>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if grid.nx == 0 || grid.ny == 0 {
        return Err(Error::Domain("export grid needs at least one point per axis".into()));
    }
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let pts = grid.points();
    let sigma = ctx.space().mesh().boundary_polygon();
    let margin = ctx.bem().margin();
    let inner: Vec<Point<T>> = pts.iter().copied().filter(|&p| sigma.contains(p)).collect();
    let outer: Vec<Point<T>> = pts
        .iter()
        .copied()
        .filter(|&p| ctx.curve().outside_scaled(p, margin))
        .collect();
    let u_in = ctx.interior_total(sol, &inner)?;
    let w_out = ctx.scattered(sol, &outer)?;

    let header = "x,y,re,im,abs\n";
    let mut interior = String::from(header);
    for (&p, &v) in inner.iter().zip(&u_in) {
        push_row(&mut interior, p, v);
    }
    let mut exterior = String::from(header);
    for (&p, &v) in outer.iter().zip(&w_out) {
        push_row(&mut exterior, p, v);
    }
    let mut written = vec![dir.join("interior.csv"), dir.join("exterior.csv")];
    write(&written[0], &interior)?;
    write(&written[1], &exterior)?;

    if grid.vtk {
        let k = ctx.wavenumber();
        let (mut i_in, mut i_out) = (0, 0);
        let mut total = Vec::with_capacity(pts.len());
        for &p in &pts {
            // Both filters above preserve grid order, so walk them in step.
            if i_in < inner.len() && inner[i_in] == p {
                total.push(Some(u_in[i_in]));
                i_in += 1;
                if i_out < outer.len() && outer[i_out] == p {
                    i_out += 1;
                }
            } else if i_out < outer.len() && outer[i_out] == p {
                total.push(Some(w_out[i_out] + sol.incident.value(k, p)));
                i_out += 1;
            } else {
                total.push(None);
            }
        }
        let h = grid.spacing();
        let mut vtk = String::new();
        let _ = writeln!(vtk, "# vtk DataFile Version 3.0");
        let _ = writeln!(vtk, "total field");
        let _ = writeln!(vtk, "ASCII");
        let _ = writeln!(vtk, "DATASET STRUCTURED_POINTS");
        let _ = writeln!(vtk, "DIMENSIONS {} {} 1", grid.nx, grid.ny);
        let _ = writeln!(vtk, "ORIGIN {:.16e} {:.16e} 0", grid.lower[0].as_f64(), grid.lower[1].as_f64());
        let _ = writeln!(vtk, "SPACING {:.16e} {:.16e} 1", h[0].as_f64(), h[1].as_f64());
        let _ = writeln!(vtk, "POINT_DATA {}", pts.len());
        for (name, part) in [("real", 0usize), ("imag", 1)] {
            let _ = writeln!(vtk, "SCALARS {name} double 1");
            let _ = writeln!(vtk, "LOOKUP_TABLE default");
            for v in &total {
                let x = v.map_or(f64::NAN, |z| if part == 0 { z.re.as_f64() } else { z.im.as_f64() });
                let _ = writeln!(vtk, "{x:.16e}");
            }
        }
        let path = dir.join("fields.vtk");
        write(&path, &vtk)?;
        written.push(path);
    }
    Ok(written)
}
