use super::*;
use crate::mesh::octagon_fan;
use crate::scalar::{cplx, norm_inf};

fn context(m: usize, d: usize, k: f64, n: usize, index: &RefractiveIndexField<f64>) -> Result<SolveContext<f64>> {
    let space = Arc::new(LagrangeSpace::new(octagon_fan(3.0, m), d)?);
    build_context(space, index, &ParametricCurve::rounded_square(), k, n)
}

#[test]
fn nesting_checks() {
    let free = RefractiveIndexField::free_space();
    assert!(context(4, 1, 2.0, 16, &free).is_ok());
    let space = Arc::new(LagrangeSpace::new(octagon_fan(3.0, 4), 1).unwrap());
    let big = ParametricCurve::rounded_square().scaled(3.5 / 1.2).unwrap();
    assert!(matches!(
        build_context(Arc::clone(&space), &free, &big, 2.0, 16),
        Err(Error::Geometry(_))
    ));
    // Γ fits but the margin reaches the polygon.
    let tight = ParametricCurve::circle(2.6);
    assert!(matches!(
        build_context(Arc::clone(&space), &free, &tight, 2.0, 16),
        Err(Error::Geometry(_))
    ));
    let wide = RefractiveIndexField::gaussian(1.0, 1.0, 1.5).unwrap();
    assert!(matches!(
        build_context(space, &wide, &ParametricCurve::circle(1.2), 2.0, 16),
        Err(Error::Geometry(_))
    ));
}

#[test]
fn context_build_is_deterministic() {
    let free = RefractiveIndexField::free_space();
    let a = context(4, 2, 2.0, 16, &free).unwrap();
    let b = context(4, 2, 2.0, 16, &free).unwrap();
    assert_eq!(a.sigma_eval().data, b.sigma_eval().data);
    assert_eq!(a.trace_operator(), b.trace_operator());
}

#[test]
fn interface_operator_is_linear() {
    let index = RefractiveIndexField::gaussian(0.5, 2.0, 1.0).unwrap();
    let ctx = context(4, 2, 2.0, 16, &index).unwrap();
    let (m, two_n) = ctx.dims();
    let zero = ctx.apply_interface(&InterfaceState::zeros(m, two_n)).unwrap();
    assert_eq!(zero.norm(), 0.0);
    let s = InterfaceState {
        sigma: (0..m).map(|i| cplx((i as f64).sin(), (0.3 * i as f64).cos())).collect(),
        gamma: (0..two_n).map(|i| cplx((0.7 * i as f64).cos(), 0.1 * i as f64)).collect(),
    };
    let alpha = cplx(-0.4, 1.3);
    let scaled = InterfaceState {
        sigma: s.sigma.iter().map(|v| v * alpha).collect(),
        gamma: s.gamma.iter().map(|v| v * alpha).collect(),
    };
    let a = ctx.apply_interface(&s).unwrap().to_vec();
    let b = ctx.apply_interface(&scaled).unwrap().to_vec();
    let diff: Vec<C<f64>> = a.iter().zip(&b).map(|(x, y)| x * alpha - y).collect();
    assert!(norm_inf(&diff) < 1e-13 * norm_inf(&b));
    assert!(ctx.apply_interface(&InterfaceState::zeros(m, two_n + 1)).is_err());
}

#[test]
fn zero_incident_gives_zero_solution() {
    let ctx = context(4, 2, 2.0, 16, &RefractiveIndexField::free_space()).unwrap();
    let out = ctx.solve_interface(&Incident::Zero).unwrap();
    assert_eq!(out.iterations, 0);
    assert_eq!(out.state.norm(), 0.0);
    let sol = ctx.reconstruct(&out.state, &Incident::Zero).unwrap();
    assert!(sol.fem.coeffs.iter().all(|v| *v == czero()));
    assert!(sol.density.iter().all(|v| *v == czero()));
}

#[test]
fn fixed_point_image_of_incident_trace() {
    // For n = 1 the interior solve with plane-wave data reproduces the wave,
    // so the gamma block of (I - K)(u_inc, 0) is close to -u_inc on Γ.
    let ctx = context(8, 3, 2.0, 16, &RefractiveIndexField::free_space()).unwrap();
    let inc = Incident::plane(0.4);
    let rhs = ctx.rhs(&inc);
    let (m, two_n) = ctx.dims();
    let s = InterfaceState {
        sigma: rhs.sigma.clone(),
        gamma: vec![czero(); two_n],
    };
    let r = ctx.apply_interface(&s).unwrap();
    assert_eq!(r.sigma, rhs.sigma);
    let err: Vec<C<f64>> = r.gamma.iter().zip(&rhs.gamma).map(|(a, b)| a - b).collect();
    assert!(norm_inf(&err) < 1e-4, "{}", norm_inf(&err));
    assert_eq!(m, ctx.sigma_nodes().len());
}

#[test]
fn trivial_problem_has_no_scattered_field() {
    let ctx = context(8, 3, 2.0, 24, &RefractiveIndexField::free_space()).unwrap();
    for inc in [Incident::plane(1.1), Incident::point([4.5, 1.0])] {
        let before = ctx.sigma_eval().data.clone();
        let out = ctx.solve_interface(&inc).unwrap();
        assert!(out.residual <= 1e-9);
        // True residual of the returned state.
        let b = ctx.rhs(&inc).to_vec();
        let ax = ctx.apply_interface(&out.state).unwrap().to_vec();
        let res: Vec<C<f64>> = ax.iter().zip(&b).map(|(a, c)| a - c).collect();
        assert!(norm2(&res) <= 2e-9 * norm2(&b), "{} {} {}", norm2(&res) / norm2(&b), out.residual, out.iterations);
        assert!(norm_inf(&out.state.gamma) < 5e-4, "{:?} {}", inc, norm_inf(&out.state.gamma));
        let sol = ctx.reconstruct(&out.state, &inc).unwrap();
        let angles = crate::postproc::uniform_angles(64);
        let ff = ctx.far_field(&sol, &angles).unwrap();
        assert!(norm_inf(ff.values()) < 5e-4);
        let samples = ctx.overlap_samples();
        assert!(!samples.is_empty());
        let mm = ctx.overlap_mismatch(&sol, &samples).unwrap();
        assert!(mm.sup < 5e-4 && mm.rms <= mm.sup);
        assert_eq!(before, ctx.sigma_eval().data);
    }
}

#[test]
fn overlap_samples_are_admissible() {
    let ctx = context(4, 2, 2.0, 16, &RefractiveIndexField::free_space()).unwrap();
    let sol = ctx.reconstruct(&ctx.rhs(&Incident::plane(0.0)), &Incident::plane(0.0)).unwrap();
    assert!(ctx.overlap_samples().iter().all(|&p| ctx.in_overlap(p)));
    assert!(ctx.overlap_mismatch(&sol, &[[5.0, 0.0]]).is_err());
    assert!(matches!(
        ctx.overlap_mismatch(&sol, &[[0.2, 0.0]]),
        Err(Error::Proximity { .. })
    ));
}
