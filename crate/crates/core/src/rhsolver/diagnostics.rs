use serde::{Deserialize, Serialize};

use super::disk::boundary_nodes;
use super::{boundary_residual, maslov_lift_winding, DiskSolution};
use crate::error::Result;
use crate::lattice::disk_radial_rule;
use crate::projcore::{chordal, C};
use crate::surface::SurfaceSpec;

/// Quadrature grid on the unit disk: Gauss-Legendre in the radius times a
/// trapezoidal rule in the angle (`ntheta` even, so `zeta -> -zeta` maps
/// nodes to nodes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsOptions {
    pub nr: usize,
    pub ntheta: usize,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self { nr: 16, ntheta: 48 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskDiagnostics {
    pub residual: f64,
    pub lift_winding: i32,
    pub normal_maslov: i32,
    pub total_maslov: i32,
    pub lift_area: f64,
    pub half_area: f64,
    /// Min of `chordal(ch(zeta), ch(-zeta))` over samples with `zeta != 0`.
    pub diagonal_gap: f64,
    /// `chordal(ch(0), ch(-0))`, the crossing with the conic.
    pub center_gap: f64,
    pub boundary_injectivity_gap: f64,
    /// Min of `chordal(ch(-zeta), phi(ch(zeta)))` over interior samples.
    pub interior_gap: f64,
}

pub fn disk_diagnostics(d: &DiskSolution, spec: &SurfaceSpec) -> Result<DiskDiagnostics> {
    disk_diagnostics_with(d, spec, &DiagnosticsOptions::default())
}

pub fn disk_diagnostics_with(
    d: &DiskSolution,
    spec: &SurfaceSpec,
    opts: &DiagnosticsOptions,
) -> Result<DiskDiagnostics> {
    let residual = boundary_residual(d, spec)?;
    let lift_winding = maslov_lift_winding(d)?;
    let normal_maslov = lift_winding / 2;

    let (rs, ws) = disk_radial_rule(opts.nr);
    let nt = opts.ntheta + opts.ntheta % 2;
    let angles = boundary_nodes(nt);
    let dtheta = std::f64::consts::TAU / nt as f64;
    let mut half_area = 0.0;
    let mut lift_area = 0.0;
    let mut diagonal_gap = f64::INFINITY;
    let mut interior_gap = f64::INFINITY;
    for (r, w) in rs.iter().zip(&ws) {
        let vals: Vec<_> = angles.iter().map(|a| d.point(a * r)).collect();
        let dens: Vec<f64> = angles
            .iter()
            .zip(&vals)
            .map(|(a, x)| {
                let z = a * r;
                let v = d.eval(z);
                let dv = d.eval_derivative(z);
                let ratio = spec.phi_area_ratio(x);
                4.0 * dv.norm_sqr() / (1.0 + v.norm_sqr()).powi(2) * 0.5 * (1.0 - ratio)
            })
            .collect();
        for j in 0..nt {
            let opp = (j + nt / 2) % nt;
            half_area += w * dtheta * dens[j];
            // the second factor is ch(-zeta)
            lift_area += w * dtheta * (dens[j] + dens[opp]);
            diagonal_gap = diagonal_gap.min(chordal(&vals[j], &vals[opp]));
            if *r < 1.0 - 1e-3 {
                interior_gap = interior_gap.min(chordal(&vals[opp], &spec.phi(&vals[j])));
            }
        }
    }

    let nb = 4 * d.k();
    let bvals: Vec<_> = boundary_nodes(nb).iter().map(|z| d.point(*z)).collect();
    let sep = (nb / 16).max(1);
    let mut boundary_injectivity_gap = f64::INFINITY;
    for i in 0..nb {
        diagonal_gap = diagonal_gap.min(chordal(&bvals[i], &bvals[(i + nb / 2) % nb]));
        for j in i + sep..nb {
            if nb - (j - i) < sep {
                break;
            }
            boundary_injectivity_gap = boundary_injectivity_gap.min(chordal(&bvals[i], &bvals[j]));
        }
    }
    let zero = C::new(0.0, 0.0);
    Ok(DiskDiagnostics {
        residual,
        lift_winding,
        normal_maslov,
        total_maslov: normal_maslov + 2,
        lift_area,
        half_area,
        diagonal_gap,
        center_gap: chordal(&d.point(zero), &d.point(-zero)),
        boundary_injectivity_gap,
        interior_gap,
    })
}
