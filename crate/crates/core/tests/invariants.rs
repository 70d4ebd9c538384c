mod common;

use proptest::prelude::*;
use zoll_core::projcore::*;
use zoll_core::rhsolver::{boundary_residual, round_disk};
use zoll_core::SurfaceSpec;

fn c() -> impl Strategy<Value = C> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C::new(a, b))
}

fn p1() -> impl Strategy<Value = P1Point> {
    (c(), c()).prop_filter_map("zero vector", |(a, b)| P1Point::try_new(a, b).ok())
}

proptest! {
    #[test]
    fn representatives_are_unit(u in p1()) {
        let [a, b] = u.vector();
        prop_assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chordal_is_a_phase_invariant_metric(u in p1(), v in p1(), w in p1(), t in 0.0..6.3f64) {
        prop_assert!(chordal(&u, &u) < 1e-7);
        prop_assert!((chordal(&u, &v) - chordal(&v, &u)).abs() < 1e-15);
        prop_assert!((chordal(&u.phase_rotated(t), &v) - chordal(&u, &v)).abs() < 1e-12);
        prop_assert!(chordal(&u, &w) <= chordal(&u, &v) + chordal(&v, &w) + 1e-12);
        prop_assert!((chordal(&u, &antipodal(&u)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cover_is_symmetric_and_branches_on_conic(u in p1(), v in p1()) {
        prop_assert!(chordal2(&pi_map(&u, &v), &pi_map(&v, &u)) < 1e-12);
        prop_assert!(conic_value(&pi_map(&u, &u)).norm() < 1e-12);
        // Pi(u, a(u)) is real
        let z = pi_map(&u, &antipodal(&u));
        prop_assert!(chordal2(&z, &conj_c(&z)) < 1e-7);
    }

    #[test]
    fn sphere_coordinates_round_trip(u in p1()) {
        let x = u.to_sphere();
        prop_assert!((x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0).abs() < 1e-12);
        prop_assert!(chordal(&P1Point::from_sphere(x), &u) < 1e-7);
        let y = antipodal(&u).to_sphere();
        prop_assert!((0..3).all(|i| (x[i] + y[i]).abs() < 1e-12));
    }

    #[test]
    fn chart_coordinates_invert(u in p1(), pole in p1()) {
        let ch = Chart::with_pole(pole);
        prop_assume!(chordal(&u, &pole) > 0.1);
        prop_assert!(chordal(&ch.point(ch.coord(&u)), &u) < 1e-7);
        prop_assert!(ch.coord(&ch.center()).norm() < 1e-12);
    }

    #[test]
    fn round_disks_solve_the_standard_problem(u in p1()) {
        let d = round_disk(&u, 16);
        prop_assert!(boundary_residual(&d, &SurfaceSpec::standard()).unwrap() < 1e-12);
        prop_assert!(chordal(&d.point(C::new(0.0, 0.0)), &antipodal(&u)) < 1e-7
            || chordal(&d.point(C::new(0.0, 0.0)), &u) < 1e-7);
    }

    #[test]
    fn phi_is_an_involution(u in p1()) {
        let spec = common::reference_spec(1.0);
        prop_assert!(chordal(&spec.phi(&spec.phi(&u)), &u) < 1e-7);
    }
}
