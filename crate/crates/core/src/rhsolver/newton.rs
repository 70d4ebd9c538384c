//! Collocation system for the boundary condition and its damped
//! Gauss-Newton solver.

use nalgebra::{DMatrix, DVector};

use super::disk::boundary_nodes;
use crate::error::{Result, ZollError};
use crate::projcore::{chordal, Chart, P1Point, C, CHART_MARGIN};
use crate::surface::SurfaceSpec;

/// Residual equations for the coefficients `c_0..c_K` of a disk in a fixed
/// chart: `ch(-zeta_j) - Phi(ch(zeta_j))` at `n = 4K` nodes, the pin
/// `c_0 = pin` and the gauge `Im(c_1 conj(gauge)) = 0`.
pub(crate) struct DiskSystem<'a> {
    spec: &'a SurfaceSpec,
    pub chart: Chart,
    pub pin: C,
    pub gauge: C,
    k: usize,
    n: usize,
    powers: Vec<C>,
    fd_step: f64,
}

pub(crate) struct Evaluation {
    pub r: DVector<f64>,
    /// Max chordal boundary mismatch.
    pub boundary: f64,
    /// Max violation of the pin and gauge rows.
    pub constraint: f64,
}

impl Evaluation {
    pub fn error(&self) -> f64 {
        self.boundary.max(self.constraint)
    }
}

impl<'a> DiskSystem<'a> {
    pub fn new(spec: &'a SurfaceSpec, chart: Chart, pin: C, gauge: C, k: usize, fd_step: f64) -> Self {
        let n = 4 * k;
        let nodes = boundary_nodes(n);
        let mut powers = Vec::with_capacity(n * (k + 1));
        for z in &nodes {
            let mut p = C::new(1.0, 0.0);
            for _ in 0..=k {
                powers.push(p);
                p *= z;
            }
        }
        Self { spec, chart, pin, gauge: gauge / gauge.norm(), k, n, powers, fd_step }
    }

    pub fn unknowns(&self) -> usize {
        2 * (self.k + 1)
    }

    pub fn equations(&self) -> usize {
        2 * self.n + 3
    }

    fn row(&self, j: usize) -> &[C] {
        &self.powers[j * (self.k + 1)..(j + 1) * (self.k + 1)]
    }

    fn values(&self, coeffs: &[C]) -> Vec<C> {
        (0..self.n)
            .map(|j| self.row(j).iter().zip(coeffs).map(|(p, c)| p * c).sum())
            .collect()
    }

    fn image(&self, w: C) -> P1Point {
        self.spec.phi(&self.chart.point(w))
    }

    pub fn evaluate(&self, coeffs: &[C]) -> Result<Evaluation> {
        let b = self.values(coeffs);
        let mut r = DVector::zeros(self.equations());
        let mut boundary: f64 = 0.0;
        for j in 0..self.n {
            let x = self.chart.point(b[j]);
            let d = chordal(&x, &self.chart.pole);
            if !(d >= CHART_MARGIN) {
                return Err(ZollError::ChartOverflow { distance: d });
            }
            let y = self.spec.phi(&x);
            let opp = b[(j + self.n / 2) % self.n];
            let e = opp - self.chart.coord(&y);
            r[2 * j] = e.re;
            r[2 * j + 1] = e.im;
            boundary = boundary.max(chordal(&self.chart.point(opp), &y));
        }
        let m = 2 * self.n;
        let p = coeffs[0] - self.pin;
        let g = (coeffs[1] * self.gauge.conj()).im;
        r[m] = p.re;
        r[m + 1] = p.im;
        r[m + 2] = g;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(ZollError::ChartOverflow { distance: 0.0 });
        }
        Ok(Evaluation { r, boundary, constraint: p.norm().max(g.abs()) })
    }

    /// Jacobian of `evaluate(..).r` in the real unknowns
    /// `(Re c_0, Im c_0, Re c_1, ...)`; the derivative of `Phi` comes from
    /// central differences in the chart.
    pub fn jacobian(&self, coeffs: &[C]) -> DMatrix<f64> {
        let b = self.values(coeffs);
        let h = self.fd_step;
        let phi_c = |w: C| self.chart.coord(&self.image(w));
        let mut jac = DMatrix::zeros(self.equations(), self.unknowns());
        for j in 0..self.n {
            let w = b[j];
            let dx = (phi_c(w + h) - phi_c(w - h)) / (2.0 * h);
            let dy = (phi_c(w + C::new(0.0, h)) - phi_c(w - C::new(0.0, h))) / (2.0 * h);
            for (k, v) in self.row(j).iter().enumerate() {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                let re = v * s - (dx * v.re + dy * v.im);
                let im = C::new(0.0, 1.0) * v * s - (dy * v.re - dx * v.im);
                jac[(2 * j, 2 * k)] = re.re;
                jac[(2 * j + 1, 2 * k)] = re.im;
                jac[(2 * j, 2 * k + 1)] = im.re;
                jac[(2 * j + 1, 2 * k + 1)] = im.im;
            }
        }
        let m = 2 * self.n;
        jac[(m, 0)] = 1.0;
        jac[(m + 1, 1)] = 1.0;
        jac[(m + 2, 2)] = -self.gauge.im;
        jac[(m + 2, 3)] = self.gauge.re;
        jac
    }
}

pub(crate) fn to_real(c: &[C]) -> DVector<f64> {
    DVector::from_iterator(2 * c.len(), c.iter().flat_map(|z| [z.re, z.im]))
}

pub(crate) fn to_complex(x: &DVector<f64>) -> Vec<C> {
    x.as_slice().chunks(2).map(|p| C::new(p[0], p[1])).collect()
}

pub(crate) struct Outcome {
    pub coeffs: Vec<C>,
}

/// Levenberg-Marquardt on the normal equations. The Jacobian is kept while
/// steps keep contracting the residual and rebuilt otherwise; once the error
/// drops below `tol` one further step polishes the solution.
pub(crate) fn solve_lm(
    sys: &DiskSystem<'_>,
    start: &[C],
    tol: f64,
    max_iter: usize,
    admissible: f64,
) -> Result<Outcome> {
    let mut x = to_real(start);
    let mut ev = sys.evaluate(start)?;
    if ev.error() < tol {
        return Ok(Outcome { coeffs: start.to_vec() });
    }
    if !(ev.boundary < admissible) {
        return Err(ZollError::NoConvergence { residual: ev.error(), iterations: 0 });
    }
    let mut cost = ev.r.norm_squared();
    let mut lambda = 0.0;
    let mut normal: Option<(DMatrix<f64>, DMatrix<f64>)> = None;
    let mut fresh = false;
    let mut converged = false;
    let mut it = 0;
    while it < max_iter {
        if normal.is_none() {
            let j = sys.jacobian(&to_complex(&x));
            let jtj = j.tr_mul(&j);
            normal = Some((j, jtj));
            fresh = true;
        }
        let (j, jtj) = normal.as_ref().unwrap();
        let g = j.tr_mul(&ev.r);
        let mut a = jtj.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += lambda * (jtj[(i, i)] + 1e-12);
        }
        it += 1;
        let Some(ch) = a.cholesky() else {
            lambda = (lambda * 10.0).max(1e-8);
            continue;
        };
        let trial = &x - ch.solve(&g);
        let accepted = match sys.evaluate(&to_complex(&trial)) {
            Ok(t) if t.r.norm_squared() < cost => Some(t),
            _ => None,
        };
        match accepted {
            Some(t) => {
                let ratio = (t.r.norm_squared() / cost).sqrt();
                x = trial;
                cost = t.r.norm_squared();
                ev = t;
                fresh = false;
                lambda = if lambda > 1e-10 { lambda / 10.0 } else { 0.0 };
                if converged {
                    break;
                }
                if ev.error() < tol {
                    converged = true;
                }
                if ratio > 0.25 {
                    normal = None;
                }
            }
            None if converged => break,
            None if !fresh => normal = None,
            None => {
                lambda = if lambda == 0.0 { 1e-4 } else { lambda * 10.0 };
                if lambda > 1e8 {
                    break;
                }
            }
        }
    }
    if ev.error() < tol {
        Ok(Outcome { coeffs: to_complex(&x) })
    } else {
        Err(ZollError::NoConvergence { residual: ev.error(), iterations: it })
    }
}

/// Least-squares sensitivity of the coefficients to the real and imaginary
/// parts of the pin, at a solution of `sys`.
pub(crate) fn pin_sensitivity(sys: &DiskSystem<'_>, coeffs: &[C]) -> Result<[Vec<C>; 2]> {
    let j = sys.jacobian(coeffs);
    let jtj = j.tr_mul(&j);
    let ch = jtj.cholesky().ok_or(ZollError::NoConvergence { residual: f64::NAN, iterations: 0 })?;
    let m = 2 * sys.n;
    let col = |row: usize| -> Vec<C> {
        // d/d(pin) of the residual is -e_row, so J dc = e_row
        let rhs = j.row(row).transpose();
        to_complex(&ch.solve(&rhs))
    };
    Ok([col(m), col(m + 1)])
}
