use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::SurfaceSpec;
use crate::error::Result;
use crate::lattice::fibonacci_p1;
use crate::projcore::{
    chordal, conic_value, cross3, norm3, orthonormal_complement, scale3, tangent_lines_through,
    TangentFrame2, C, C3,
};

pub const DEFAULT_DOCILITY_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DocilityThresholds {
    pub fixed_point_gap: f64,
    pub orientation_margin: f64,
    pub involution_defect: f64,
    pub totally_real: f64,
    pub transversality: f64,
    pub conic_gap: f64,
}

impl Default for DocilityThresholds {
    fn default() -> Self {
        Self {
            fixed_point_gap: 0.05,
            orientation_margin: 1e-6,
            involution_defect: 1e-7,
            totally_real: 1e-6,
            transversality: 1e-6,
            conic_gap: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DocilityFailure {
    InvolutionDefect,
    FixedPointGap,
    Orientation,
    TotallyReal,
    ConicGap,
    Transversality,
}

/// Outcome of a docility certification. `min_orientation_det` is the
/// minimum of `-det(D phi)`, positive where `phi` reverses orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocilityReport {
    pub passed: bool,
    pub samples: usize,
    pub min_fixed_point_gap: f64,
    pub min_orientation_det: f64,
    pub max_involution_defect: f64,
    pub min_totally_real_det: Option<f64>,
    pub min_conic_gap: Option<f64>,
    pub min_transversality_det: Option<f64>,
    pub failures: Vec<DocilityFailure>,
}

pub fn check_docility(spec: &SurfaceSpec) -> DocilityReport {
    check_docility_with(spec, DEFAULT_DOCILITY_SAMPLES)
}

/// Certifies the three conditions on `phi` over a Fibonacci lattice.
pub fn check_docility_with(spec: &SurfaceSpec, samples: usize) -> DocilityReport {
    let th = spec.thresholds;
    let mut gap = f64::INFINITY;
    let mut orient = f64::INFINITY;
    let mut defect: f64 = 0.0;
    for u in fibonacci_p1(samples, 0) {
        let v = spec.phi(&u);
        let back = spec.phi(&v);
        defect = defect.max(nan_max(chordal(&back, &u)));
        gap = gap.min(nan_min(chordal(&u, &v)));
        orient = orient.min(nan_min(-spec.phi_area_ratio(&u)));
    }
    let mut failures = Vec::new();
    if !(defect < th.involution_defect) {
        failures.push(DocilityFailure::InvolutionDefect);
    }
    if !(gap > th.fixed_point_gap) {
        failures.push(DocilityFailure::FixedPointGap);
    }
    if !(orient > th.orientation_margin) {
        failures.push(DocilityFailure::Orientation);
    }
    DocilityReport {
        passed: failures.is_empty(),
        samples,
        min_fixed_point_gap: gap,
        min_orientation_det: orient,
        max_involution_defect: defect,
        min_totally_real_det: None,
        min_conic_gap: None,
        min_transversality_det: None,
        failures,
    }
}

// NaN compares false everywhere; map it to the failing side.
fn nan_min(x: f64) -> f64 {
    if x.is_nan() { f64::NEG_INFINITY } else { x }
}

fn nan_max(x: f64) -> f64 {
    if x.is_nan() { f64::INFINITY } else { x }
}

fn unit(v: &C3) -> C3 {
    scale3(v, C::new(1.0 / norm3(v), 0.0))
}

fn real_det(basis: &[C3; 2], cols: [&C3; 4]) -> f64 {
    let c: Vec<[f64; 4]> = cols.iter().map(|v| TangentFrame2::real_coords(basis, v)).collect();
    Matrix4::from_fn(|i, j| c[j][i]).determinant()
}

/// Certifies reality, conic avoidance and transversality directly on sampled
/// tangent planes. Samples closer to the conic than the threshold are
/// recorded as conic-gap failures and skipped for the tangent-line test.
pub fn check_docility_sampled(
    frames: &[TangentFrame2],
    th: &DocilityThresholds,
) -> Result<DocilityReport> {
    let i = C::new(0.0, 1.0);
    let mut tr = f64::INFINITY;
    let mut cg = f64::INFINITY;
    let mut tv = f64::INFINITY;
    for f in frames {
        let b = f.base.vector();
        let basis = orthonormal_complement(&b);
        let e1 = unit(&f.e1);
        let e2 = unit(&f.e2);
        let je1 = scale3(&e1, i);
        let je2 = scale3(&e2, i);
        tr = tr.min(real_det(&basis, [&e1, &e2, &je1, &je2]).abs());
        let q = conic_value(&f.base).norm();
        cg = cg.min(q);
        if q <= th.conic_gap {
            continue;
        }
        for line in tangent_lines_through(&f.base)? {
            // T_p A = { v : <b, v> = 0, a . v = 0 }
            let bbar = [b[0].conj(), b[1].conj(), b[2].conj()];
            let t = unit(&cross3(&bbar, &line.a));
            let jt = scale3(&t, i);
            tv = tv.min(real_det(&basis, [&e1, &e2, &t, &jt]).abs());
        }
    }
    let mut failures = Vec::new();
    if !(tr > th.totally_real) {
        failures.push(DocilityFailure::TotallyReal);
    }
    if !(cg > th.conic_gap) {
        failures.push(DocilityFailure::ConicGap);
    }
    if !(tv > th.transversality) {
        failures.push(DocilityFailure::Transversality);
    }
    Ok(DocilityReport {
        passed: failures.is_empty(),
        samples: frames.len(),
        min_fixed_point_gap: f64::NAN,
        min_orientation_det: f64::NAN,
        max_involution_defect: f64::NAN,
        min_totally_real_det: Some(tr),
        min_conic_gap: Some(cg),
        min_transversality_det: Some(tv),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::fibonacci_sphere;
    use crate::projcore::{P1Point, P2Point};
    use crate::surface::SphereField;

    fn real3(x: [f64; 3]) -> C3 {
        x.map(|a| C::new(a, 0.0))
    }

    fn rp2_frames(n: usize) -> Vec<TangentFrame2> {
        fibonacci_sphere(n, 5)
            .into_iter()
            .map(|x| {
                let a = if x[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                let d = a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
                let e1 = [a[0] - d * x[0], a[1] - d * x[1], a[2] - d * x[2]];
                let e2 = [
                    x[1] * e1[2] - x[2] * e1[1],
                    x[2] * e1[0] - x[0] * e1[2],
                    x[0] * e1[1] - x[1] * e1[0],
                ];
                TangentFrame2::new(P2Point::new(real3(x)), real3(e1), real3(e2))
            })
            .collect()
    }

    #[test]
    fn standard_rp2_is_docile() {
        let r = check_docility(&SurfaceSpec::standard());
        assert!(r.passed, "{r:?}");
        assert!((r.min_fixed_point_gap - 1.0).abs() < 1e-12);
        let r = check_docility_sampled(&rp2_frames(200), &DocilityThresholds::default()).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn sampled_check_agrees_with_phi_check() {
        let field = SphereField::from_terms(&[
            ([1, 1, 0], [0.1, 0.0, -0.05]),
            ([0, 0, 2], [0.0, 0.08, 0.0]),
        ])
        .unwrap();
        let spec = SurfaceSpec::new(field, 1.0, 64).unwrap();
        assert!(check_docility(&spec).passed);
        let frames: Vec<_> =
            fibonacci_p1(150, 2).iter().map(|u| spec.surface_frame(u)).collect();
        let r = check_docility_sampled(&frames, &spec.thresholds).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn projectively_moved_rp2_crossing_conic_fails() {
        // G sends [1:0:0] to [i:1:0] on the conic and fixes the other axes
        let g = |v: &C3| -> C3 {
            [v[0] * C::new(0.0, 1.0), v[0] + v[1], v[2]]
        };
        let mut frames: Vec<TangentFrame2> = rp2_frames(200)
            .into_iter()
            .map(|f| TangentFrame2::new(P2Point::new(g(&f.base.vector())), g(&f.e1), g(&f.e2)))
            .collect();
        let e = [C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)];
        let ez = [C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)];
        frames.push(TangentFrame2::new(P2Point::new(g(&real3([1.0, 0.0, 0.0]))), g(&e), g(&ez)));
        let r = check_docility_sampled(&frames, &DocilityThresholds::default()).unwrap();
        assert!(!r.passed);
        assert!(r.failures.contains(&DocilityFailure::ConicGap));
        assert!(r.min_conic_gap.unwrap() < 1e-6);
    }

    #[test]
    fn nan_maps_to_failure() {
        let u = P1Point::real(1.0, 0.0);
        assert_eq!(nan_min(f64::NAN), f64::NEG_INFINITY);
        assert_eq!(nan_max(chordal(&u, &u)), 0.0);
    }
}
