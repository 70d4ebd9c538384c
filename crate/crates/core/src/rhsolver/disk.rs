use serde::{Deserialize, Serialize};

use crate::error::{Result, ZollError};
use crate::projcore::{chordal, pi_map, Chart, P1Point, P2Point, C};

/// A holomorphic disk through the conic, stored by its first factor map
/// `ch(zeta) = sum_k c_k zeta^k` in a stereographic chart. The second factor is
/// `ch(-zeta)`, and the boundary condition is `ch(-zeta) = phi(ch(zeta))` on
/// the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskSolution {
    pub spec_scale: f64,
    pub u0: P1Point,
    pub p: P2Point,
    pub chart: Chart,
    pub coeffs: Vec<C>,
    pub residual: f64,
}

impl DiskSolution {
    pub fn k(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Chart coordinate of `ch(zeta)`.
    pub fn eval(&self, zeta: C) -> C {
        self.coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * zeta + c)
    }

    pub fn eval_derivative(&self, zeta: C) -> C {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(C::new(0.0, 0.0), |acc, (k, c)| acc * zeta + c * k as f64)
    }

    pub fn point(&self, zeta: C) -> P1Point {
        self.chart.point(self.eval(zeta))
    }

    /// Chart values at `n` equispaced boundary nodes `exp(2 pi i j / n)`.
    pub fn boundary_values(&self, n: usize) -> Vec<C> {
        boundary_nodes(n).into_iter().map(|z| self.eval(z)).collect()
    }

    /// Reparameterization `zeta -> exp(i theta) zeta`.
    pub fn rotated(&self, theta: f64) -> Self {
        let mut d = self.clone();
        for (k, c) in d.coeffs.iter_mut().enumerate() {
            *c *= C::from_polar(1.0, k as f64 * theta);
        }
        d
    }

    /// Rotation making `c_1` real and positive.
    pub fn gauge_fixed(&self) -> Self {
        self.rotated(-self.coeffs[1].arg())
    }

    /// Zero-pads or truncates the coefficient list to degree `k`.
    pub fn with_degree(&self, k: usize) -> Self {
        let mut d = self.clone();
        d.coeffs.resize(k + 1, C::new(0.0, 0.0));
        d
    }

    /// `|c_K| / max_k |c_k|`.
    pub fn spectral_tail(&self) -> f64 {
        let m = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        self.coeffs.last().unwrap().norm() / m
    }

    /// Minimum chordal distance from the boundary samples to the chart pole.
    pub fn pole_clearance(&self, n: usize) -> f64 {
        self.boundary_values(n)
            .into_iter()
            .map(|w| chordal(&self.chart.point(w), &self.chart.pole))
            .fold(f64::INFINITY, f64::min)
    }

    /// Re-expresses the same map in another chart by resampling the
    /// boundary and projecting onto nonnegative frequencies.
    pub fn transplant(&self, chart: Chart, holomorphy_tol: f64) -> Result<Self> {
        let m = self.chart.transition_to(&chart);
        let k = self.k();
        let n = 4 * (k + 1);
        let samples: Vec<C> = self.boundary_values(n).into_iter().map(|w| m.apply(w)).collect();
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(ZollError::ChartOverflow { distance: 0.0 });
        }
        let spectrum = dft(&samples);
        let neg: f64 = spectrum[n / 2 + 1..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if neg > holomorphy_tol {
            return Err(ZollError::HolomorphyLoss { energy: neg });
        }
        let mut d = self.clone();
        d.chart = chart;
        d.coeffs = spectrum[..=k].to_vec();
        Ok(d)
    }

    /// The same disk in the chart centered at `u0`, gauge fixed.
    pub fn canonical(&self) -> Result<Self> {
        let c = Chart::centered_at(&self.u0);
        let d = if self.chart.pole.vector() == c.pole.vector() {
            self.clone()
        } else {
            self.transplant(c, 1e-8)?
        };
        Ok(d.gauge_fixed())
    }

    /// The same coefficients read in the chart centered at another point;
    /// for round disks this is the rotation carrying one solution to another.
    pub fn transported_to(&self, u0: &P1Point) -> Self {
        let chart = Chart::centered_at(u0);
        let mut c = self.coeffs.clone();
        c[0] = chart.coord(u0);
        Self {
            spec_scale: self.spec_scale,
            u0: *u0,
            p: pi_map(u0, u0),
            chart,
            coeffs: c,
            residual: f64::NAN,
        }
    }

    /// Coefficient distance to `other` after expressing `other` in this
    /// chart and fixing the rotation gauge of both.
    pub fn aligned_distance(&self, other: &DiskSolution) -> Result<f64> {
        let k = self.k().max(other.k());
        let a = self.with_degree(k).gauge_fixed();
        let b = other.with_degree(k).transplant(self.chart, 1e-6)?.gauge_fixed();
        Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }
}

pub(crate) fn boundary_nodes(n: usize) -> Vec<C> {
    (0..n)
        .map(|j| C::from_polar(1.0, std::f64::consts::TAU * j as f64 / n as f64))
        .collect()
}

/// `a_k = (1/n) sum_j b_j exp(-2 pi i j k / n)`.
pub(crate) fn dft(samples: &[C]) -> Vec<C> {
    let n = samples.len();
    let tw = boundary_nodes(n);
    (0..n)
        .map(|k| {
            samples
                .iter()
                .enumerate()
                .map(|(j, s)| s * tw[(j * k) % n].conj())
                .sum::<C>()
                / n as f64
        })
        .collect()
}

/// The closed-form disk for the standard RP2: in the chart centered at
/// `u0`, `ch(zeta) = zeta`.
pub fn round_disk(u0: &P1Point, k: usize) -> DiskSolution {
    let mut coeffs = vec![C::new(0.0, 0.0); k + 1];
    coeffs[1] = C::new(1.0, 0.0);
    DiskSolution {
        spec_scale: 0.0,
        u0: *u0,
        p: pi_map(u0, u0),
        chart: Chart::centered_at(u0),
        coeffs,
        residual: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projcore::antipodal;

    #[test]
    fn horner_and_derivative() {
        let d = DiskSolution {
            coeffs: vec![C::new(0.1, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.2)],
            ..round_disk(&P1Point::real(1.0, 0.0), 2)
        };
        let z = C::new(0.3, -0.4);
        assert!((d.eval(z) - (0.1 + z + C::new(0.0, 0.2) * z * z)).norm() < 1e-15);
        assert!((d.eval_derivative(z) - (1.0 + C::new(0.0, 0.4) * z)).norm() < 1e-15);
    }

    #[test]
    fn round_disk_at_north_pole() {
        let d = round_disk(&P1Point::real(1.0, 0.0), 8);
        assert_eq!(d.chart.pole, P1Point::real(0.0, 1.0));
        assert!(d.point(C::new(0.0, 0.0)) == P1Point::real(1.0, 0.0));
        for z in boundary_nodes(16) {
            assert!(chordal(&d.point(-z), &antipodal(&d.point(z))) < 1e-15);
        }
    }

    #[test]
    fn transplant_preserves_map() {
        let d = round_disk(&P1Point::new(C::new(0.3, 0.2), C::new(0.1, -0.9)), 24);
        let chart = Chart::centered_at(&P1Point::new(C::new(0.5, 0.0), C::new(0.2, -0.7)));
        let e = d.transplant(chart, 1e-8).unwrap();
        for z in boundary_nodes(7) {
            let z = z * 0.8;
            assert!(chordal(&d.point(z), &e.point(z)) < 1e-12);
        }
        assert!(d.aligned_distance(&e).unwrap() < 1e-12);
    }

    #[test]
    fn transplant_detects_non_holomorphic_image() {
        // a chart whose pole lies inside the image forces a pole in the disk
        let d = round_disk(&P1Point::real(1.0, 0.0), 16);
        let inside = Chart::with_pole(d.point(C::new(0.3, 0.0)));
        assert!(matches!(
            d.transplant(inside, 1e-8),
            Err(ZollError::HolomorphyLoss { .. })
        ));
    }

    #[test]
    fn gauge_rotation() {
        let d = round_disk(&P1Point::real(1.0, 0.0), 4).rotated(1.3);
        let g = d.gauge_fixed();
        assert!((g.coeffs[1] - C::new(1.0, 0.0)).norm() < 1e-15);
    }
}
