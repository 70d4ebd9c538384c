//! The nonlinear Riemann-Hilbert problem `ch(-zeta) = phi(ch(zeta))` on the
//! unit circle, discretized by nonnegative-frequency boundary series and
//! solved by damped Gauss-Newton inside a continuation in the surface scale.

mod diagnostics;
mod disk;
pub(crate) mod newton;

pub use diagnostics::{disk_diagnostics, disk_diagnostics_with, DiagnosticsOptions, DiskDiagnostics};
pub use disk::{round_disk, DiskSolution};

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZollError};
use crate::lattice::fibonacci_p1;
use crate::projcore::{chordal, Chart, C, CHART_MARGIN};
use crate::surface::check_docility;
use crate::surface::{SurfaceSpec, FD_STEP};
use disk::boundary_nodes;
use newton::{solve_lm, DiskSystem};

pub const DEFAULT_K: usize = 64;
pub const MIN_K: usize = 16;
pub const MAX_K: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_k: usize,
    pub fd_step: f64,
    /// Re-chart when the boundary comes this close (chordal) to the pole.
    pub rechart: f64,
    pub holomorphy_tol: f64,
    pub tail_tol: f64,
    /// Largest starting residual accepted by the corrector.
    pub admissible: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            tol: 1e-9,
            max_iter: 50,
            initial_step: 1.0 / 16.0,
            min_step: 1e-4,
            max_k: MAX_K,
            fd_step: FD_STEP,
            rechart: 0.2,
            holomorphy_tol: 1e-8,
            tail_tol: 1e-8,
            admissible: 0.05,
        }
    }
}

impl SolverOptions {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }
}

/// Max chordal mismatch `ch(-zeta)` versus `phi(ch(zeta))` over `4K`
/// boundary nodes.
pub fn boundary_residual(d: &DiskSolution, spec: &SurfaceSpec) -> Result<f64> {
    let n = 4 * d.k();
    let nodes = boundary_nodes(n);
    let pts: Vec<_> = nodes.iter().map(|z| d.point(*z)).collect();
    let mut worst: f64 = 0.0;
    for (j, x) in pts.iter().enumerate() {
        let dist = chordal(x, &d.chart.pole);
        if !(dist >= CHART_MARGIN) {
            return Err(ZollError::ChartOverflow { distance: dist });
        }
        let r = chordal(&pts[(j + n / 2) % n], &spec.phi(x));
        worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
    }
    Ok(worst)
}

/// The pole farthest (in the min-chordal sense) from samples of the closed
/// disk, among the antipode of the center and a fixed lattice.
fn best_chart(d: &DiskSolution) -> Chart {
    let mut samples = Vec::new();
    for r in [0.0, 0.35, 0.7, 0.9, 1.0] {
        for z in boundary_nodes(64) {
            samples.push(d.point(z * r));
        }
    }
    let mut best = (Chart::centered_at(&d.u0).pole, 0.0);
    let candidates = std::iter::once(best.0).chain(fibonacci_p1(256, 0));
    for c in candidates {
        let m = samples.iter().map(|s| chordal(s, &c)).fold(f64::INFINITY, f64::min);
        if m > best.1 {
            best = (c, m);
        }
    }
    Chart::with_pole(best.0)
}

fn recharted(d: &DiskSolution, opts: &SolverOptions) -> Result<DiskSolution> {
    if d.pole_clearance(4 * d.k()) >= opts.rechart {
        return Ok(d.clone());
    }
    Ok(d.transplant(best_chart(d), opts.holomorphy_tol)?.gauge_fixed())
}

pub fn newton_refine(d: &DiskSolution, spec: &SurfaceSpec, t: f64) -> Result<DiskSolution> {
    newton_refine_with(d, spec, t, &SolverOptions::default())
}

/// Corrects `d` to a solution for the surface at scale `t`, returned in the
/// gauge `c_1 > 0`.
pub fn newton_refine_with(
    d: &DiskSolution,
    spec: &SurfaceSpec,
    t: f64,
    opts: &SolverOptions,
) -> Result<DiskSolution> {
    if d.coeffs.len() < 2 || d.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(ZollError::InvalidInput("disk coefficients must be finite, K >= 1".into()));
    }
    let st = spec.with_scale(t);
    let mut d = recharted(&d.gauge_fixed(), opts)?;
    let pin = d.chart.coord(&d.u0);
    let sys = DiskSystem::new(&st, d.chart, pin, C::new(1.0, 0.0), d.k(), opts.fd_step);
    let out = solve_lm(&sys, &d.coeffs, opts.tol, opts.max_iter, opts.admissible)?;
    d.coeffs = out.coeffs;
    d = d.gauge_fixed();
    d.spec_scale = t;
    d.residual = boundary_residual(&d, &st)?;
    Ok(d)
}

pub fn solve_disk(spec: &SurfaceSpec, u0: &crate::P1Point, k: usize) -> Result<DiskSolution> {
    solve_disk_with(spec, u0, &SolverOptions::with_k(k))
}

pub fn solve_disk_with(
    spec: &SurfaceSpec,
    u0: &crate::P1Point,
    opts: &SolverOptions,
) -> Result<DiskSolution> {
    check_k(opts.k, opts.max_k)?;
    if !check_docility(spec).passed {
        return Err(ZollError::DocilityRequired);
    }
    continue_disk(spec, round_disk(u0, opts.k), opts)
}

pub(crate) fn check_k(k: usize, max_k: usize) -> Result<()> {
    if k < MIN_K || k > max_k {
        return Err(ZollError::InvalidInput(format!("K = {k} outside [{MIN_K}, {max_k}]")));
    }
    Ok(())
}

fn recoverable(e: &ZollError) -> bool {
    matches!(
        e,
        ZollError::NoConvergence { .. } | ZollError::ChartOverflow { .. } | ZollError::HolomorphyLoss { .. }
    )
}

/// Corrector at one scale, doubling `K` while the spectral tail is too heavy.
pub fn correct_at(guess: &DiskSolution, spec: &SurfaceSpec, t: f64, opts: &SolverOptions) -> Result<DiskSolution> {
    let mut guess = guess.clone();
    loop {
        let s = newton_refine_with(&guess, spec, t, opts)?;
        if s.spectral_tail() < opts.tail_tol || 2 * s.k() > opts.max_k {
            return Ok(s);
        }
        guess = s.with_degree(2 * s.k());
    }
}

/// Predictor-corrector continuation of a docile-family solution from
/// `start.spec_scale` to `spec.scale`. No docility check is made here.
pub fn continue_disk(spec: &SurfaceSpec, start: DiskSolution, opts: &SolverOptions) -> Result<DiskSolution> {
    let target = spec.scale;
    let mut cur = start;
    if cur.spec_scale == target {
        cur.residual = boundary_residual(&cur, spec)?;
        if cur.residual < opts.tol {
            return Ok(cur);
        }
        return correct_at(&cur, spec, target, opts);
    }
    let dir = (target - cur.spec_scale).signum();
    let mut prev: Option<DiskSolution> = None;
    let mut step = opts.initial_step;
    while cur.spec_scale != target {
        let t = cur.spec_scale;
        let remaining = (target - t).abs();
        let t_next = if step >= remaining * (1.0 - 1e-12) { target } else { t + dir * step };
        let guess = match &prev {
            Some(p) if p.chart.pole.vector() == cur.chart.pole.vector() => {
                let p = p.with_degree(cur.k());
                let s = (t_next - t) / (t - p.spec_scale);
                let mut g = cur.clone();
                for (c, q) in g.coeffs.iter_mut().zip(&p.coeffs) {
                    *c += (*c - q) * s;
                }
                g
            }
            _ => cur.clone(),
        };
        match correct_at(&guess, spec, t_next, opts) {
            Ok(s) => {
                prev = Some(std::mem::replace(&mut cur, s));
                step = (2.0 * step).min(opts.initial_step);
            }
            Err(e) if recoverable(&e) => {
                step /= 2.0;
                if step < opts.min_step {
                    return Err(ZollError::ContinuationStuck { t, step });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(cur)
}

/// Winding number of `(i gamma')^2` along the boundary, counted from phase
/// increments between consecutive nodes.
pub fn maslov_lift_winding(d: &DiskSolution) -> Result<i32> {
    let k = d.k().max(1);
    let mut n = 4 * k;
    loop {
        let mut total = 0.0;
        let mut ok = true;
        let mut prev: Option<C> = None;
        let nodes = boundary_nodes(n);
        for z in nodes.iter().chain(std::iter::once(&nodes[0])) {
            let g = C::new(0.0, 1.0) * z * d.eval_derivative(*z);
            if !(g.norm() > 1e-6) {
                return Err(ZollError::DerivativeVanishes(g.norm()));
            }
            let f = (C::new(0.0, 1.0) * g).powi(2);
            if let Some(p) = prev {
                let inc = (f / p).arg();
                if inc.abs() >= std::f64::consts::FRAC_PI_2 {
                    ok = false;
                    break;
                }
                total += inc;
            }
            prev = Some(f);
        }
        if ok {
            return Ok((total / std::f64::consts::TAU).round() as i32);
        }
        if n >= 16 * k {
            return Err(ZollError::PhaseStepTooLarge(n));
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests;
