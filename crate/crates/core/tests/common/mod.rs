#![allow(dead_code)]

use zoll_core::{SphereField, SurfaceSpec};

/// Generic three-term field with coefficients of size 0.1.
pub fn reference_spec(scale: f64) -> SurfaceSpec {
    let field = SphereField::from_terms(&[
        ([1, 1, 0], [0.1, 0.0, -0.05]),
        ([0, 0, 2], [0.0, 0.08, 0.0]),
        ([1, 0, 0], [0.0, 0.0, 0.1]),
    ])
    .unwrap();
    SurfaceSpec::new(field, scale, 64).unwrap()
}

/// Constant field strong enough to destroy the fixed-point gap.
pub fn degenerate_spec() -> SurfaceSpec {
    let field = SphereField::from_terms(&[([0, 0, 0], [0.0, 0.0, 5.0])]).unwrap();
    SurfaceSpec::new(field, 1.0, 64).unwrap()
}
