//! The `solve`, `sweep`, `converge` and `oa` commands.
//!
//! Each command writes its data files plus `summary.json` into the output
//! directory. Data files are byte-identical across runs; the summary also
//! carries the wall time.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde_json::{json, Map, Value};

use helmscat::postproc::{
    convergence_study, dscs, export_fields, far_field_csv, oa_dscs, series_csv, uniform_angles, GridSpec,
};
use helmscat::{Error, Result, Scene};

use crate::config::RunConfig;
use crate::scenes::build_scene;

/// Where and how much to write; command-line flags override the config.
#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub angles: usize,
}

impl OutputOptions {
    pub fn from_config(cfg: &RunConfig, dir: Option<PathBuf>, angles: Option<usize>) -> Result<Self> {
        let angles = angles.unwrap_or(cfg.output.angles);
        if angles < 8 {
            return Err(Error::Config(vec![format!("--angles must be at least 8, got {angles}")]));
        }
        Ok(OutputOptions {
            dir: dir.unwrap_or_else(|| cfg.output.dir.clone()),
            angles,
        })
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let wrap = |p: &Path, e: std::io::Error| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())));
    fs::create_dir_all(dir).map_err(|e| wrap(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| wrap(&path, e))?;
    Ok(path)
}

fn finish(dir: &Path, command: &str, mut fields: Map<String, Value>, start: Instant) -> Result<Value> {
    fields.insert("command".into(), json!(command));
    fields.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));
    let summary = Value::Object(fields);
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Numerical(e.to_string()))? + "\n";
    write_file(dir, "summary.json", &text)?;
    Ok(summary)
}

fn scene_fields(scene: &Scene, cfg: &RunConfig, level: usize) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("k".into(), json!(scene.k));
    m.insert("degree".into(), json!(scene.degree));
    m.insert("level".into(), json!(level));
    m.insert("n".into(), json!(cfg.discretization.n));
    m
}

/// One incidence: far field, DSCS, overlap mismatch and optional field grids.
pub fn run_solve(cfg: &RunConfig, out: &OutputOptions) -> Result<Value> {
    let start = Instant::now();
    let scene = build_scene(cfg)?;
    let level = cfg.geometry.refinements;
    let ctx = scene.context(level, cfg.discretization.n)?;
    let (sol, iface) = ctx.solve(&scene.incident)?;
    info!("GMRES: {} iterations, residual {:.3e}", iface.iterations, iface.residual);

    let angles = uniform_angles(out.angles);
    let ff = ctx.far_field(&sol, &angles)?;
    write_file(&out.dir, "far_field.csv", &far_field_csv(&ff))?;
    write_file(&out.dir, "dscs.csv", &series_csv("dscs", &angles, &dscs(&ff)))?;

    let samples = ctx.overlap_samples();
    let u_int = ctx.interior_total(&sol, &samples)?;
    let u_ext = ctx.exterior_total(&sol, &samples)?;
    let mut report = String::from("x,y,abs_diff\n");
    let (mut sup, mut sq) = (0.0f64, 0.0);
    for ((p, a), b) in samples.iter().zip(&u_int).zip(&u_ext) {
        let d = (a - b).norm();
        sup = sup.max(d);
        sq += d * d;
        let _ = writeln!(report, "{:.16e},{:.16e},{:.16e}", p[0], p[1], d);
    }
    write_file(&out.dir, "overlap_mismatch.csv", &report)?;
    let rms = (sq / samples.len().max(1) as f64).sqrt();

    if let Some(g) = &cfg.output.grid {
        let grid = GridSpec {
            lower: g.lower,
            upper: g.upper,
            nx: g.nx,
            ny: g.ny,
            vtk: cfg.output.vtk,
        };
        export_fields(&ctx, &sol, &grid, &out.dir)?;
    }

    let (m, two_n) = ctx.dims();
    let density_sup = sol.density.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let ff_sup = ff.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut f = scene_fields(&scene, cfg, level);
    f.insert("dofs".into(), json!(ctx.fem().num_dofs()));
    f.insert("triangles".into(), json!(ctx.space().mesh().num_triangles()));
    f.insert("sigma_nodes".into(), json!(m));
    f.insert("gamma_nodes".into(), json!(two_n));
    f.insert("iterations".into(), json!(iface.iterations));
    f.insert("residual".into(), json!(iface.residual));
    f.insert("density_sup".into(), json!(density_sup));
    f.insert("far_field_sup".into(), json!(ff_sup));
    f.insert("far_field_l2".into(), json!(ff.l2_norm()));
    f.insert("mismatch_sup".into(), json!(sup));
    f.insert("mismatch_rms".into(), json!(rms));
    f.insert("mismatch_samples".into(), json!(samples.len()));
    finish(&out.dir, "solve", f, start)
}

/// GMRES iteration counts over refinement levels `0..depth` and several `N`.
pub fn run_sweep(cfg: &RunConfig, out: &OutputOptions, depth: usize, ns: &[usize]) -> Result<Value> {
    let start = Instant::now();
    check_ns(ns)?;
    if depth < 1 {
        return Err(Error::Config(vec!["--depth must be at least 1".into()]));
    }
    let scene = build_scene(cfg)?;
    let mut csv = String::from("level,N,dofs,iterations,residual\n");
    let mut counts = Vec::new();
    for level in 0..depth {
        let fem = scene.fem(level)?;
        for &n in ns {
            let ctx = scene.context_with(&fem, n)?;
            let iface = ctx.solve_interface(&scene.incident)?;
            info!("level {level}, N = {n}: {} iterations", iface.iterations);
            let _ = writeln!(
                csv,
                "{level},{n},{},{},{:.6e}",
                fem.num_dofs(),
                iface.iterations,
                iface.residual
            );
            counts.push(iface.iterations);
        }
    }
    write_file(&out.dir, "iterations.csv", &csv)?;
    let mut f = scene_fields(&scene, cfg, depth - 1);
    f.insert("ns".into(), json!(ns));
    f.insert("depth".into(), json!(depth));
    f.insert("min_iterations".into(), json!(counts.iter().min()));
    f.insert("max_iterations".into(), json!(counts.iter().max()));
    finish(&out.dir, "sweep", f, start)
}

/// Reference-solution error table.
pub fn run_converge(cfg: &RunConfig, out: &OutputOptions, depth: usize, ns: &[usize]) -> Result<Value> {
    let start = Instant::now();
    check_ns(ns)?;
    let scene = build_scene(cfg)?;
    let table = convergence_study(&scene, depth, ns)?;
    write_file(&out.dir, "convergence.csv", &table.to_csv())?;
    let mut f = scene_fields(&scene, cfg, table.reference_level);
    f.insert("ns".into(), json!(ns));
    f.insert("depth".into(), json!(depth));
    f.insert("dofs".into(), json!(table.dofs));
    f.insert("reference_dofs".into(), json!(table.reference_dofs));
    f.insert("reference_n".into(), json!(table.reference_n));
    f.insert("samples".into(), json!(table.samples));
    finish(&out.dir, "converge", f, start)
}

/// Orientation-averaged DSCS over `directions` equally spaced incidences.
pub fn run_oa(cfg: &RunConfig, out: &OutputOptions, directions: usize) -> Result<Value> {
    let start = Instant::now();
    let scene = build_scene(cfg)?;
    let level = cfg.geometry.refinements;
    let ctx = scene.context(level, cfg.discretization.n)?;
    let angles = uniform_angles(out.angles);
    let oa = oa_dscs(&ctx, directions, &angles)?;
    write_file(&out.dir, "oa_dscs.csv", &series_csv("oa_dscs", &angles, &oa))?;
    let mut f = scene_fields(&scene, cfg, level);
    f.insert("dofs".into(), json!(ctx.fem().num_dofs()));
    f.insert("directions".into(), json!(directions));
    f.insert("angles".into(), json!(out.angles));
    f.insert("threads".into(), json!(rayon::current_num_threads()));
    finish(&out.dir, "oa", f, start)
}

fn check_ns(ns: &[usize]) -> Result<()> {
    if ns.is_empty() || ns.iter().any(|&n| n < 8) {
        return Err(Error::Config(vec![format!("--N needs values of at least 8, got {ns:?}")]));
    }
    Ok(())
}
