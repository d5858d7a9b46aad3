use std::sync::Arc;

use super::*;
use crate::coupling::{build_context, ContextOptions};
use crate::geometry::{ParametricCurve, RefractiveIndexField};
use crate::mesh::{octagon_fan, LagrangeSpace};
use crate::scalar::{cis, cplx};

fn small_context(index: &RefractiveIndexField<f64>) -> SolveContext<f64> {
    let space = Arc::new(LagrangeSpace::new(octagon_fan(3.0, 6), 3).unwrap());
    build_context(space, index, &ParametricCurve::rounded_square(), 2.0, 16).unwrap()
}

#[test]
fn table_validation() {
    let angles = uniform_angles::<f64>(8);
    let zeros = vec![cplx(0.0, 0.0); 8];
    let ff = FarFieldTable::new(angles.clone(), zeros.clone(), 1.0, None).unwrap();
    assert!(dscs(&ff).iter().all(|&v| v == 0.0));
    assert!(FarFieldTable::new(uniform_angles::<f64>(4), vec![cplx(0.0, 0.0); 4], 1.0, None).is_err());
    assert!(FarFieldTable::new(angles.clone(), zeros[1..].to_vec(), 1.0, None).is_err());
    let mut skewed = angles.clone();
    skewed[3] += 0.01;
    assert!(FarFieldTable::new(skewed, zeros, 1.0, None).is_err());
}

#[test]
fn dscs_is_phase_invariant() {
    let angles = uniform_angles::<f64>(16);
    let values: Vec<C<f64>> = angles.iter().map(|t| cplx(t.cos(), 0.3 * t.sin())).collect();
    let a = FarFieldTable::new(angles.clone(), values.clone(), 2.0, None).unwrap();
    let rot = cis(1.234);
    let b = FarFieldTable::new(angles, values.iter().map(|v| v * rot).collect(), 2.0, None).unwrap();
    for (x, y) in dscs(&a).iter().zip(dscs(&b)) {
        assert!((x - y).abs() < 1e-15);
    }
}

#[test]
fn oa_dscs_free_space_vanishes() {
    let ctx = small_context(&RefractiveIndexField::free_space());
    let oa = oa_dscs(&ctx, 8, &uniform_angles(32)).unwrap();
    let max = oa.iter().copied().fold(0.0, f64::max);
    assert!(oa.iter().all(|&v| v >= 0.0) && max < 1e-6, "{max}");
    assert!(oa_dscs(&ctx, 4, &uniform_angles(32)).is_err());
}

#[test]
fn oa_dscs_of_radial_index_is_nearly_flat_and_deterministic() {
    let index = RefractiveIndexField::gaussian(0.8, 4.0, 1.05).unwrap();
    let ctx = small_context(&index);
    let angles = uniform_angles(64);
    let a = oa_dscs(&ctx, 16, &angles).unwrap();
    let b = oa_dscs(&ctx, 16, &angles).unwrap();
    assert_eq!(a, b);
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    let spread = a.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    assert!(mean > 0.0 && spread < 0.05 * mean, "{spread} {mean}");
}

#[test]
fn export_grid_rows_and_determinism() {
    let ctx = small_context(&RefractiveIndexField::free_space());
    let inc = Incident::plane(0.3);
    let (sol, _) = ctx.solve(&inc).unwrap();
    let dir = std::env::temp_dir().join(format!("helmscat-export-{}", std::process::id()));
    let grid = GridSpec {
        lower: [1.8, -0.5],
        upper: [2.2, 0.5],
        nx: 2,
        ny: 2,
        vtk: true,
    };
    let files = export_fields(&ctx, &sol, &grid, &dir).unwrap();
    let interior = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(interior.lines().count(), 5);
    for line in interior.lines().skip(1) {
        let abs: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!((abs - 1.0).abs() < 1e-3, "{abs}");
    }
    let first: Vec<String> = files.iter().map(|f| std::fs::read_to_string(f).unwrap()).collect();
    export_fields(&ctx, &sol, &grid, &dir).unwrap();
    let second: Vec<String> = files.iter().map(|f| std::fs::read_to_string(f).unwrap()).collect();
    assert_eq!(first, second);
    assert!(first[2].contains("DIMENSIONS 2 2 1"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn convergence_table_shape() {
    let scene = Scene {
        ladder: MeshLadder::Uniform(octagon_fan(3.0, 3)),
        degree: 1,
        curve: ParametricCurve::rounded_square(),
        index: RefractiveIndexField::gaussian(0.5, 4.0, 1.05).unwrap(),
        k: 1.0,
        incident: Incident::plane(0.0),
        options: ContextOptions::default(),
    };
    let table: ConvergenceTable<f64> = convergence_study(&scene, 2, &[8, 16]).unwrap();
    assert_eq!(table.cells.len(), 2);
    assert!(table.cells.iter().all(|r| r.len() == 2));
    assert_eq!(table.reference_n, 32);
    assert_eq!(table.reference_level, 2);
    let csv = table.to_csv();
    assert_eq!(csv.lines().count(), 5);
    let c = table.cell(16, 1).unwrap();
    assert!(c.fem_h1 > 0.0 && c.fem_h1 < table.cell(16, 0).unwrap().fem_h1);
    assert!(c.bem_sup.is_finite() && c.bem_rms <= c.bem_sup);
}
