//! Geodesics of the Zoll projective structure as fibers
//! `C_z = { x in M : z in boundary of the disk x }`, traced by
//! pseudo-arclength continuation of `ch_{u0}(e^{i tau}) = u` in `(u0, tau)`.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::ModuliGrid;
use crate::error::{Result, ZollError};
use crate::projcore::{chordal, pi_map, Chart, P1Point, C};
use crate::rhsolver::newton::{pin_sensitivity, DiskSystem};
use crate::rhsolver::{correct_at, DiskSolution, SolverOptions};
use crate::surface::SurfaceSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// Every node re-solves its disk.
    Exact,
    /// Disks interpolated from the grid; for previews only.
    Interpolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub step: f64,
    pub max_steps: usize,
    pub closure_tol: f64,
    pub min_arclength: f64,
    /// Tolerance on the membership equation in chart coordinates.
    pub tol: f64,
    pub reverse: bool,
    pub mode: TraceMode,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            step: 0.02,
            max_steps: 10_000,
            closure_tol: 1e-4,
            min_arclength: 0.1,
            tol: 1e-10,
            reverse: false,
            mode: TraceMode::Exact,
        }
    }
}

/// A point `(u0, tau)` of the fiber; `tau` is measured in the canonical
/// gauge of the disk at `u0` (chart centered at `u0`, `c_1 > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicNode {
    pub u0: P1Point,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub z_label: P1Point,
    pub nodes: Vec<GeodesicNode>,
    pub closed: bool,
    /// Chordal length of the `u0` polyline.
    pub arclength: f64,
    /// Distance from the closing node to the first one.
    pub closure_gap: f64,
}

/// Distance between fiber nodes: chordal in `u0`, wrapped in `tau`. The
/// canonical chart depends on the phase of the `u0` representative, and a
/// phase `e^{i theta}` shifts `tau` by `2 theta`; this is compensated.
pub fn node_distance(a: &GeodesicNode, b: &GeodesicNode) -> f64 {
    let shift = 2.0 * a.u0.inner(&b.u0).arg();
    let dt = (b.tau - a.tau - shift).rem_euclid(std::f64::consts::TAU);
    chordal(&a.u0, &b.u0).max(dt.min(std::f64::consts::TAU - dt))
}

trait Provider: Sync {
    /// Coefficients of the disk through `chart.point(w0)`, pinned and gauge
    /// fixed in `chart`, starting from `guess`.
    fn solve(&self, chart: &Chart, w0: C, guess: &[C]) -> Result<Vec<C>>;
    fn sensitivity(&self, chart: &Chart, w0: C, coeffs: &[C]) -> Result<[Vec<C>; 2]>;
}

fn disk_in(spec_scale: f64, chart: &Chart, w0: C, coeffs: Vec<C>) -> DiskSolution {
    let u0 = chart.point(w0);
    DiskSolution { spec_scale, u0, p: pi_map(&u0, &u0), chart: *chart, coeffs, residual: f64::NAN }
}

struct Exact<'a> {
    spec: &'a SurfaceSpec,
    opts: SolverOptions,
}

impl Provider for Exact<'_> {
    fn solve(&self, chart: &Chart, w0: C, guess: &[C]) -> Result<Vec<C>> {
        let d = disk_in(self.spec.scale, chart, w0, guess.to_vec());
        let s = correct_at(&d, self.spec, self.spec.scale, &self.opts)?;
        if s.chart.pole.vector() != chart.pole.vector() {
            return Err(ZollError::TraceDiverged("disk left the local chart".into()));
        }
        Ok(s.coeffs)
    }

    fn sensitivity(&self, chart: &Chart, w0: C, coeffs: &[C]) -> Result<[Vec<C>; 2]> {
        let sys = DiskSystem::new(
            self.spec,
            *chart,
            w0,
            C::new(1.0, 0.0),
            coeffs.len() - 1,
            self.opts.fd_step,
        );
        pin_sensitivity(&sys, coeffs)
    }
}

struct Interpolated {
    disks: Vec<DiskSolution>,
    scale: f64,
}

impl Provider for Interpolated {
    fn solve(&self, chart: &Chart, w0: C, _guess: &[C]) -> Result<Vec<C>> {
        let u0 = chart.point(w0);
        let mut near: Vec<(f64, &DiskSolution)> =
            self.disks.iter().map(|d| (chordal(&d.u0, &u0), d)).collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0));
        let k = near.iter().take(3).map(|(_, d)| d.k()).max().unwrap_or(1);
        let mut acc = vec![C::new(0.0, 0.0); k + 1];
        let mut wsum = 0.0;
        for (dist, d) in near.iter().take(3) {
            let w = 1.0 / (dist * dist + 1e-12);
            for (a, c) in acc.iter_mut().zip(&d.with_degree(k).transported_to(&u0).coeffs) {
                *a += c * w;
            }
            wsum += w;
        }
        for a in &mut acc {
            *a /= wsum;
        }
        let centered = disk_in(self.scale, &Chart::centered_at(&u0), C::new(0.0, 0.0), acc);
        Ok(centered.transplant(*chart, 1e-6)?.gauge_fixed().coeffs)
    }

    fn sensitivity(&self, chart: &Chart, w0: C, coeffs: &[C]) -> Result<[Vec<C>; 2]> {
        let h = 1e-6;
        let mut out = [Vec::new(), Vec::new()];
        for (slot, dir) in out.iter_mut().zip([C::new(1.0, 0.0), C::new(0.0, 1.0)]) {
            let p = self.solve(chart, w0 + dir * h, coeffs)?;
            let m = self.solve(chart, w0 - dir * h, coeffs)?;
            *slot = p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        }
        Ok(out)
    }
}

fn eval(c: &[C], z: C) -> C {
    c.iter().rev().fold(C::new(0.0, 0.0), |acc, a| acc * z + a)
}

fn eval_derivative(c: &[C], z: C) -> C {
    c.iter().enumerate().skip(1).rev().fold(C::new(0.0, 0.0), |acc, (k, a)| acc * z + a * k as f64)
}

fn resize(mut v: Vec<C>, n: usize) -> Vec<C> {
    v.resize(n, C::new(0.0, 0.0));
    v
}

/// A traced node expressed in the chart centered at its `u0`.
#[derive(Clone)]
struct Frame {
    chart: Chart,
    coeffs: Vec<C>,
    tau: f64,
    sens: [Vec<C>; 2],
}

impl Frame {
    fn node(&self) -> GeodesicNode {
        GeodesicNode { u0: self.chart.center(), tau: self.tau }
    }
}

struct Tracer<'a> {
    provider: &'a dyn Provider,
    target: P1Point,
    tol: f64,
}

impl Tracer<'_> {
    /// Membership residual and its Jacobian in `(Re w0, Im w0, tau)`, with
    /// the pin sensitivities of the reference frame.
    fn system(&self, chart: &Chart, coeffs: &[C], tau: f64, sens: &[Vec<C>; 2]) -> (C, [[f64; 3]; 2]) {
        let z = C::from_polar(1.0, tau);
        let g = eval(coeffs, z) - chart.coord(&self.target);
        let dx = eval(&sens[0], z);
        let dy = eval(&sens[1], z);
        let dt = C::new(0.0, 1.0) * z * eval_derivative(coeffs, z);
        (g, [[dx.re, dy.re, dt.re], [dx.im, dy.im, dt.im]])
    }

    fn tangent(&self, f: &Frame) -> Vector3<f64> {
        let (_, j) = self.system(&f.chart, &f.coeffs, f.tau, &f.sens);
        let a = Vector3::from(j[0]);
        let b = Vector3::from(j[1]);
        a.cross(&b).normalize()
    }

    /// Newton on the membership equation from `y0` in the frame's chart,
    /// with the extra linear row `a . y = b` when given (minimum-norm steps
    /// otherwise). Coefficient guesses follow the pin sensitivities.
    fn correct(&self, f: &Frame, y0: Vector3<f64>, row: Option<(Vector3<f64>, f64)>) -> Result<(C, Vec<C>, f64)> {
        let n = f.coeffs.len();
        let shift = |c: &[C], d: &Vector3<f64>| -> Vec<C> {
            c.iter().zip(&f.sens[0]).zip(&f.sens[1]).map(|((a, s0), s1)| a + s0 * d[0] + s1 * d[1]).collect()
        };
        let mut y = y0;
        let mut guess = shift(&f.coeffs, &y0);
        let mut last = f64::INFINITY;
        for _ in 0..12 {
            let w0 = C::new(y[0], y[1]);
            let coeffs = self.provider.solve(&f.chart, w0, &guess)?;
            let sens = [resize(f.sens[0].clone(), coeffs.len()), resize(f.sens[1].clone(), coeffs.len())];
            let (g, j) = self.system(&f.chart, &coeffs, y[2], &sens);
            let c_err = row.map_or(0.0, |(a, b)| a.dot(&y) - b);
            let err = g.norm().max(c_err.abs());
            if err < self.tol {
                return Ok((w0, coeffs, y[2]));
            }
            if !(err < 4.0 * last) {
                break;
            }
            last = err;
            let rhs = Vector2::new(-g.re, -g.im);
            let jr = nalgebra::Matrix2x3::new(j[0][0], j[0][1], j[0][2], j[1][0], j[1][1], j[1][2]);
            let d = match row {
                Some((a, _)) => {
                    let m = Matrix3::from_rows(&[jr.row(0).into_owned(), jr.row(1).into_owned(), a.transpose()]);
                    m.lu().solve(&Vector3::new(rhs[0], rhs[1], -c_err))
                }
                None => {
                    let jjt: Matrix2<f64> = jr * jr.transpose();
                    jjt.lu().solve(&rhs).map(|l| jr.transpose() * l)
                }
            }
            .ok_or_else(|| ZollError::TraceDiverged("singular membership Jacobian".into()))?;
            y += d;
            guess = resize(shift(&coeffs, &d), n.max(coeffs.len()));
        }
        Err(ZollError::TraceDiverged("corrector did not converge".into()))
    }

    /// Re-expresses a corrected point in the chart centered at its `u0`.
    fn recenter(&self, chart: &Chart, w0: C, coeffs: Vec<C>, tau: f64) -> Result<Frame> {
        let d = disk_in(f64::NAN, chart, w0, coeffs);
        let centered = Chart::centered_at(&d.u0);
        let t = d.transplant(centered, 1e-8)?;
        let tau = (tau + t.coeffs[1].arg()).rem_euclid(std::f64::consts::TAU);
        let g = t.gauge_fixed();
        let sens = self.provider.sensitivity(&centered, C::new(0.0, 0.0), &g.coeffs)?;
        Ok(Frame { chart: centered, coeffs: g.coeffs, tau, sens })
    }
}

fn seed(tr: &Tracer<'_>, disks: &[DiskSolution], u: &P1Point) -> Result<Frame> {
    let mut best: Option<(f64, usize, f64)> = None;
    for (i, d) in disks.iter().enumerate() {
        let n = 4 * d.k();
        for j in 0..n {
            let tau = std::f64::consts::TAU * j as f64 / n as f64;
            let dist = chordal(&d.point(C::from_polar(1.0, tau)), u);
            if best.map_or(true, |b| dist < b.0) {
                best = Some((dist, i, tau));
            }
        }
    }
    let (dist, i, tau) = best.ok_or(ZollError::SeedNotFound(f64::INFINITY))?;
    if dist > 0.5 {
        return Err(ZollError::SeedNotFound(dist));
    }
    let d = &disks[i];
    let sens = tr.provider.sensitivity(&d.chart, C::new(0.0, 0.0), &d.coeffs)?;
    let f = Frame { chart: d.chart, coeffs: d.coeffs.clone(), tau, sens };
    let mut cur = f;
    // minimum-norm Newton, re-centering after each pass
    for _ in 0..6 {
        match tr.correct(&cur, Vector3::new(0.0, 0.0, cur.tau), None) {
            Ok((w0, coeffs, tau)) => return tr.recenter(&cur.chart, w0, coeffs, tau),
            Err(_) => {
                let (g, j) = tr.system(&cur.chart, &cur.coeffs, cur.tau, &cur.sens);
                let jr = nalgebra::Matrix2x3::new(j[0][0], j[0][1], j[0][2], j[1][0], j[1][1], j[1][2]);
                let jjt: Matrix2<f64> = jr * jr.transpose();
                let Some(l) = jjt.lu().solve(&Vector2::new(-g.re, -g.im)) else { break };
                let mut d = jr.transpose() * l;
                let len = d.norm();
                if len > 0.05 {
                    d *= 0.05 / len;
                }
                let w0 = C::new(d[0], d[1]);
                let shifted: Vec<C> = cur.coeffs.iter().zip(&cur.sens[0]).zip(&cur.sens[1])
                    .map(|((a, s0), s1)| a + s0 * d[0] + s1 * d[1]).collect();
                let coeffs = tr.provider.solve(&cur.chart, w0, &shifted)?;
                cur = tr.recenter(&cur.chart, w0, coeffs, cur.tau + d[2])?;
            }
        }
    }
    Err(ZollError::SeedNotFound(dist))
}

pub fn trace_geodesic(spec: &SurfaceSpec, grid: &ModuliGrid, u: &P1Point) -> Result<Geodesic> {
    trace_geodesic_with(spec, grid, u, &TraceOptions::default())
}

/// Traces the fiber through `u` (the label of `z = Pi(u, phi(u))`).
pub fn trace_geodesic_with(
    spec: &SurfaceSpec,
    grid: &ModuliGrid,
    u: &P1Point,
    opts: &TraceOptions,
) -> Result<Geodesic> {
    let disks: Vec<DiskSolution> =
        grid.entries.iter().map(|e| e.solution.canonical()).collect::<Result<_>>()?;
    let exact = Exact { spec, opts: SolverOptions::with_k(grid.k) };
    let interp = Interpolated { disks: disks.clone(), scale: spec.scale };
    let provider: &dyn Provider = match opts.mode {
        TraceMode::Exact => &exact,
        TraceMode::Interpolated => &interp,
    };
    let tr = Tracer { provider, target: *u, tol: opts.tol };
    let start = seed(&tr, &disks, u)?;
    let first = start.node();
    let mut t = tr.tangent(&start);
    if (t[2] < 0.0) != opts.reverse {
        t = -t;
    }
    let mut nodes = vec![first];
    let mut cur = start;
    let mut h = opts.step;
    let mut arclength = 0.0;
    for _ in 0..opts.max_steps {
        let y0 = Vector3::new(0.0, 0.0, cur.tau);
        let y_pred = y0 + t * h;
        let (w0, coeffs, tau) = match tr.correct(&cur, y_pred, Some((t, t.dot(&y_pred)))) {
            Ok(r) => r,
            Err(e) => {
                h /= 2.0;
                if h < opts.step * 1e-4 {
                    return Err(ZollError::TraceDiverged(format!("step underflow: {e}")));
                }
                continue;
            }
        };
        let next = tr.recenter(&cur.chart, w0, coeffs, tau)?;
        // orient the new tangent along the displacement just made
        let v = -cur.chart.transition_to(&next.chart).apply(C::new(0.0, 0.0));
        let mut tn = tr.tangent(&next);
        if tn[0] * v.re + tn[1] * v.im < 0.0 {
            tn = -tn;
        }
        arclength += chordal(&cur.chart.center(), &next.chart.center());
        nodes.push(next.node());
        cur = next;
        t = tn;
        h = (2.0 * h).min(opts.step);

        let to_start = chordal(&cur.chart.center(), &first.u0);
        if arclength > opts.min_arclength && to_start < 1.5 * opts.step {
            let ws = cur.chart.coord(&first.u0);
            let a = Vector3::new(t[0], t[1], 0.0);
            let b = a[0] * ws.re + a[1] * ws.im;
            let at = a.dot(&t);
            if at.abs() > 1e-12 && b / at > 0.0 {
                let y = Vector3::new(0.0, 0.0, cur.tau) + t * (b / at);
                if let Ok((w0, coeffs, tau)) = tr.correct(&cur, y, Some((a, b))) {
                    let last = tr.recenter(&cur.chart, w0, coeffs, tau)?;
                    let gap = node_distance(&last.node(), &first);
                    if gap < opts.closure_tol {
                        arclength += chordal(&cur.chart.center(), &last.chart.center());
                        nodes.push(last.node());
                        return Ok(Geodesic { z_label: *u, nodes, closed: true, arclength, closure_gap: gap });
                    }
                }
            }
        }
    }
    Err(ZollError::NotClosed(opts.max_steps))
}
