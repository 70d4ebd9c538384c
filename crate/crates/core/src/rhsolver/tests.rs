use super::*;
use crate::projcore::{antipodal, P1Point};
use crate::surface::SphereField;
use std::f64::consts::PI;

fn perturbed(scale: f64) -> SurfaceSpec {
    let field = SphereField::from_terms(&[
        ([1, 1, 0], [0.1, 0.0, -0.05]),
        ([0, 0, 2], [0.0, 0.08, 0.0]),
        ([1, 0, 0], [0.0, 0.0, 0.1]),
    ])
    .unwrap();
    SurfaceSpec::new(field, scale, 64).unwrap()
}

fn u_general() -> P1Point {
    P1Point::new(C::new(0.3, -0.5), C::new(0.7, 0.2))
}

#[test]
fn round_disk_is_rotated_identity() {
    let u0 = u_general();
    let [a, b] = u0.vector();
    // U = [[a, -conj b], [b, conj a]] carries [1:0] to u0
    let d = round_disk(&u0, 16);
    let base = round_disk(&P1Point::real(1.0, 0.0), 16);
    for z in boundary_nodes(9) {
        let z = z * 0.7;
        let [x, y] = base.point(z).vector();
        let rotated = P1Point::new(a * x - b.conj() * y, b * x + a.conj() * y);
        assert!(chordal(&rotated, &d.point(z)) < 1e-14);
    }
    assert!(boundary_residual(&d, &SurfaceSpec::standard()).unwrap() < 1e-12);
}

#[test]
fn residual_detects_wrong_surface() {
    let d = round_disk(&u_general(), 32);
    assert!(boundary_residual(&d, &perturbed(0.5)).unwrap() > 1e-4);
}

#[test]
fn residual_reports_chart_overflow() {
    let mut d = round_disk(&P1Point::real(1.0, 0.0), 16);
    d.coeffs[1] = C::new(30.0, 0.0);
    assert!(matches!(
        boundary_residual(&d, &SurfaceSpec::standard()),
        Err(ZollError::ChartOverflow { .. })
    ));
}

#[test]
fn refine_fixed_point_at_scale_zero() {
    let d = round_disk(&u_general(), 32);
    let r = newton_refine(&d, &SurfaceSpec::standard(), 0.0).unwrap();
    let dev = d.coeffs.iter().zip(&r.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(dev < 1e-10);
}

#[test]
fn refine_small_step_and_local_nondegeneracy() {
    let spec = perturbed(1.0);
    let d = round_disk(&P1Point::real(1.0, 0.0), 32);
    let r = newton_refine(&d, &spec, 1.0 / 16.0).unwrap();
    assert!(r.residual < 1e-9, "{}", r.residual);
    let mut bumped = r.clone();
    bumped.coeffs[3] += C::new(1e-3, 0.0);
    assert!(boundary_residual(&bumped, &spec.with_scale(1.0 / 16.0)).unwrap() > 1e-5);
}

#[test]
fn refine_rejects_far_guess() {
    let spec = perturbed(1.0);
    let mut d = round_disk(&P1Point::real(1.0, 0.0), 16);
    d.coeffs[2] = C::new(0.4, 0.0);
    assert!(matches!(
        newton_refine(&d, &spec, 1.0),
        Err(ZollError::NoConvergence { .. })
    ));
}

#[test]
fn solve_at_scale_zero_is_round() {
    let u0 = u_general();
    let d = solve_disk(&SurfaceSpec::standard(), &u0, 16).unwrap();
    assert!(d.aligned_distance(&round_disk(&u0, 16)).unwrap() < 1e-12);
    assert!(d.residual < 1e-12);
}

#[test]
fn solve_perturbed_disk_invariants() {
    let spec = perturbed(1.0);
    let u0 = P1Point::real(1.0, 0.0);
    let d = solve_disk(&spec, &u0, 64).unwrap();
    assert!(d.residual < 1e-9);
    assert!((d.coeffs[0] - d.chart.coord(&u0)).norm() < 1e-9);
    assert!(d.coeffs[1].im.abs() < 1e-14 && d.coeffs[1].re > 0.0);
    assert!(d.spectral_tail() < 1e-8, "{}", d.spectral_tail());
    let diag = disk_diagnostics(&d, &spec).unwrap();
    assert_eq!((diag.lift_winding, diag.normal_maslov, diag.total_maslov), (2, 1, 3));
    assert!((diag.lift_area - 4.0 * PI).abs() < 1e-5 * 4.0 * PI, "{}", diag.lift_area);
    assert!((diag.half_area - 2.0 * PI).abs() < 1e-5 * 2.0 * PI);
    assert!(diag.interior_gap > 1e-4);
    assert!(diag.diagonal_gap > 1e-4);
    assert_eq!(diag.center_gap, 0.0);
    // genuinely away from the round disk
    assert!(d.aligned_distance(&round_disk(&u0, 64)).unwrap() > 1e-3);
}

#[test]
fn secant_and_plain_continuations_agree() {
    let spec = perturbed(1.0);
    let u0 = u_general();
    let a = solve_disk_with(&spec, &u0, &SolverOptions::with_k(32)).unwrap();
    let opts = SolverOptions { initial_step: 1.0 / 5.0, ..SolverOptions::with_k(32) };
    let b = solve_disk_with(&spec, &u0, &opts).unwrap();
    assert!(a.aligned_distance(&b).unwrap() < 1e-8);
}

#[test]
fn solve_requires_docility() {
    let field = SphereField::from_terms(&[([0, 0, 0], [0.0, 0.0, 5.0])]).unwrap();
    let spec = SurfaceSpec::new(field, 1.0, 64).unwrap();
    let r = solve_disk(&spec, &P1Point::real(1.0, 0.0), 16);
    assert!(matches!(r, Err(ZollError::DocilityRequired)), "{r:?}");
    assert!(matches!(
        solve_disk(&SurfaceSpec::standard(), &P1Point::real(1.0, 0.0), 8),
        Err(ZollError::InvalidInput(_))
    ));
}

#[test]
fn maslov_of_round_disk_and_rotation_invariance() {
    let d = round_disk(&u_general(), 16);
    assert_eq!(maslov_lift_winding(&d).unwrap(), 2);
    assert_eq!(maslov_lift_winding(&d.rotated(2.1)).unwrap(), 2);
    let mut flat = d.clone();
    flat.coeffs[1] = C::new(0.0, 0.0);
    assert!(matches!(maslov_lift_winding(&flat), Err(ZollError::DerivativeVanishes(_))));
}

#[test]
fn round_disk_diagnostics() {
    let d = round_disk(&u_general(), 16);
    let g = disk_diagnostics(&d, &SurfaceSpec::standard()).unwrap();
    assert!((g.lift_area - 4.0 * PI).abs() < 1e-8, "{}", g.lift_area);
    assert!((g.half_area - 2.0 * PI).abs() < 1e-8);
    assert!(g.diagonal_gap > 0.0);
    // boundary is a great circle; antipodal boundary points are far apart
    assert!(g.boundary_injectivity_gap > 0.1);
    // interior gap at zeta = 0 is chordal(u0, a(u0)) = 1
    assert!(g.interior_gap > 1e-3 && g.interior_gap <= 1.0);
    assert!(chordal(&d.point(C::new(0.0, 0.0)), &antipodal(&d.u0)) > 0.99);
}
