//! The product Kähler form `omega = pr1^* w + pr2^* w` on `CP1 x CP1` with
//! `w = (alpha - phi^* alpha) / 2`, and its integrals over surface patches.

use rayon::prelude::*;

use super::{chart_jacobian, SurfaceSpec, FD_STEP};
use crate::error::{Result, ZollError};
use crate::lattice::sphere_quadrature;
use crate::projcore::P1Point;

/// Kähler data attached to a surface; `order` is the starting Gauss order
/// in latitude for sphere integrals of the round area form.
#[derive(Debug, Clone)]
pub struct KahlerData {
    pub spec: SurfaceSpec,
    pub order: usize,
}

impl KahlerData {
    pub fn new(spec: SurfaceSpec) -> Self {
        Self { spec, order: 24 }
    }

    /// Ratio `w / alpha` at a point.
    pub fn density_ratio(&self, u: &P1Point) -> f64 {
        0.5 * (1.0 - self.spec.phi_area_ratio(u))
    }
}

/// A map `CP1 -> CP1 x CP1` parameterizing a closed surface.
pub enum SurfacePatch<'a> {
    /// `u -> (u, phi(u))`, the lift of `N`.
    GraphOfPhi,
    /// `u -> (u, v0)`.
    FirstFactor(P1Point),
    /// `u -> (v0, u)`.
    SecondFactor(P1Point),
    /// `u -> (u, u)`.
    Diagonal,
    Custom(&'a (dyn Fn(&P1Point) -> (P1Point, P1Point) + Sync)),
}

fn det(j: [[f64; 2]; 2]) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

fn pullback_density(kd: &KahlerData, patch: &SurfacePatch<'_>, u: &P1Point) -> f64 {
    let spec = &kd.spec;
    match patch {
        SurfacePatch::GraphOfPhi => {
            let r = spec.phi_area_ratio(u);
            let v = spec.phi(u);
            0.5 * (1.0 - r) + r * kd.density_ratio(&v)
        }
        SurfacePatch::FirstFactor(_) | SurfacePatch::SecondFactor(_) => kd.density_ratio(u),
        SurfacePatch::Diagonal => 2.0 * kd.density_ratio(u),
        SurfacePatch::Custom(f) => {
            let (j1, a) = chart_jacobian(|x| f(x).0, u, FD_STEP);
            let (j2, b) = chart_jacobian(|x| f(x).1, u, FD_STEP);
            det(j1) * kd.density_ratio(&a) + det(j2) * kd.density_ratio(&b)
        }
    }
}

fn integrate(kd: &KahlerData, patch: &SurfacePatch<'_>, order: usize) -> f64 {
    sphere_quadrature(order)
        .par_iter()
        .map(|(u, w)| w * pullback_density(kd, patch, u))
        .sum()
}

/// Integral of `omega` pulled back to the patch, refined until two
/// successive orders agree to `1e-5` relative.
pub fn omega_pullback_area(kd: &KahlerData, patch: &SurfacePatch<'_>) -> Result<f64> {
    let mut order = kd.order.max(4);
    let mut coarse = integrate(kd, patch, order);
    for _ in 0..2 {
        order *= 2;
        let fine = integrate(kd, patch, order);
        if (fine - coarse).abs() <= 1e-5 * fine.abs().max(1.0) {
            return Ok(fine);
        }
        coarse = fine;
    }
    let fine = integrate(kd, patch, order * 2);
    Err(ZollError::QuadratureUnresolved { coarse, fine })
}

/// `∫_{S^2} w`, which equals `4 pi` for every orientation-reversing involution.
pub fn kahler_total(kd: &KahlerData) -> Result<f64> {
    omega_pullback_area(kd, &SurfacePatch::FirstFactor(P1Point::real(1.0, 0.0)))
}
