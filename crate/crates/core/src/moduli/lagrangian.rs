use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::fibonacci_p1;
use crate::projcore::upsilon_im_abs;
use crate::surface::SurfaceSpec;

pub const LAGRANGIAN_TOL: f64 = 1e-7;
pub const NON_LAGRANGIAN_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Lagrangian,
    NotLagrangian,
    Inconclusive,
}

impl Verdict {
    pub fn from_max_im(max_im: f64) -> Self {
        if max_im < LAGRANGIAN_TOL {
            Verdict::Lagrangian
        } else if max_im > NON_LAGRANGIAN_TOL {
            Verdict::NotLagrangian
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Lagrangian => "lagrangian",
            Verdict::NotLagrangian => "not_lagrangian",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianReport {
    pub max_im: f64,
    pub mean_im: f64,
    pub sample_count: usize,
    pub verdict: Verdict,
}

/// `|Im upsilon|` on tangent planes of `N` over `m` lattice points.
pub fn lagrangian_report(spec: &SurfaceSpec, m: usize) -> Result<LagrangianReport> {
    let vals: Vec<f64> = fibonacci_p1(m, 0)
        .par_iter()
        .map(|u| upsilon_im_abs(&spec.surface_frame(u)))
        .collect::<Result<_>>()?;
    let max_im = vals.iter().copied().fold(0.0, f64::max);
    let mean_im = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
    Ok(LagrangianReport { max_im, mean_im, sample_count: vals.len(), verdict: Verdict::from_max_im(max_im) })
}
