//! Docile surfaces in normal form.
//!
//! A surface is encoded by an orientation-preserving diffeomorphism `psi` of
//! the sphere, the time-`scale` flow of a polynomial tangent field. The
//! involution `phi = psi . a . psi^-1` is fixed-point free and orientation
//! reversing, and `N` is the image of its graph under the branched cover.

mod docility;
mod kahler;

pub use docility::{
    check_docility, check_docility_sampled, check_docility_with, DocilityFailure,
    DocilityReport, DocilityThresholds, DEFAULT_DOCILITY_SAMPLES,
};
pub use kahler::{kahler_total, omega_pullback_area, KahlerData, SurfacePatch};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, ZollError};
use crate::projcore::{
    antipodal, pi_map, pi_map_raw, scale3, sub3, Chart, P1Point, P2Point, TangentFrame2, C, C3,
    hdot3,
};

/// Maximum total degree of a field monomial.
pub const MAX_DEGREE: u32 = 4;
/// Central-difference step for chart Jacobians.
pub const FD_STEP: f64 = 1e-5;
pub const DEFAULT_FLOW_STEPS: usize = 64;

/// One monomial `x^a y^b z^c` times a coefficient vector in R^3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldTerm {
    pub powers: [u32; 3],
    pub coeff: [f64; 3],
}

/// Polynomial vector field `V` on R^3; the flow uses its tangential part
/// `W(x) = V(x) - <V(x), x> x` on the unit sphere.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SphereField {
    pub degree: u32,
    pub terms: Vec<FieldTerm>,
}

impl SphereField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(degree: u32, terms: Vec<FieldTerm>) -> Result<Self> {
        let f = Self { degree, terms };
        f.validate()?;
        Ok(f)
    }

    /// Convenience constructor from `(powers, coeff)` pairs; the degree is the
    /// largest total power.
    pub fn from_terms(terms: &[([u32; 3], [f64; 3])]) -> Result<Self> {
        let degree = terms.iter().map(|(p, _)| p.iter().sum::<u32>()).max().unwrap_or(0);
        Self::new(
            degree,
            terms.iter().map(|&(powers, coeff)| FieldTerm { powers, coeff }).collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree > MAX_DEGREE {
            return Err(ZollError::InvalidInput(format!(
                "field degree {} exceeds {MAX_DEGREE}",
                self.degree
            )));
        }
        for t in &self.terms {
            if t.powers.iter().sum::<u32>() > self.degree {
                return Err(ZollError::InvalidInput(format!(
                    "monomial {:?} exceeds declared degree {}",
                    t.powers, self.degree
                )));
            }
            if t.coeff.iter().any(|c| !c.is_finite()) {
                return Err(ZollError::InvalidInput("non-finite field coefficient".into()));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.iter().all(|&c| c == 0.0))
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut f = self.clone();
        for t in &mut f.terms {
            for c in &mut t.coeff {
                *c *= s;
            }
        }
        f
    }

    #[inline]
    pub fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut pw = [[1.0; 5]; 3];
        for k in 0..3 {
            for d in 1..5 {
                pw[k][d] = pw[k][d - 1] * x[k];
            }
        }
        let mut v = [0.0; 3];
        for t in &self.terms {
            let m = pw[0][t.powers[0] as usize]
                * pw[1][t.powers[1] as usize]
                * pw[2][t.powers[2] as usize];
            v[0] += m * t.coeff[0];
            v[1] += m * t.coeff[1];
            v[2] += m * t.coeff[2];
        }
        v
    }

    /// Tangential projection at a unit vector.
    #[inline]
    pub fn tangent(&self, x: &[f64; 3]) -> [f64; 3] {
        let v = self.eval(x);
        let d = v[0] * x[0] + v[1] * x[1] + v[2] * x[2];
        [v[0] - d * x[0], v[1] - d * x[1], v[2] - d * x[2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowDirection {
    Forward,
    Inverse,
}

/// A docile surface in normal form. `scale` is both the flow time of `psi`
/// and the homotopy parameter joining the standard RP2 (scale 0) to `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub field: SphereField,
    pub scale: f64,
    pub flow_steps: usize,
    #[serde(default)]
    pub thresholds: DocilityThresholds,
}

impl SurfaceSpec {
    pub fn new(field: SphereField, scale: f64, flow_steps: usize) -> Result<Self> {
        let s = Self { field, scale, flow_steps, thresholds: DocilityThresholds::default() };
        s.validate()?;
        Ok(s)
    }

    /// The standard real linear RP2.
    pub fn standard() -> Self {
        Self {
            field: SphereField::zero(),
            scale: 0.0,
            flow_steps: DEFAULT_FLOW_STEPS,
            thresholds: DocilityThresholds::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        if !(0.0..=1.0).contains(&self.scale) {
            return Err(ZollError::InvalidInput(format!("scale {} outside [0, 1]", self.scale)));
        }
        if self.flow_steps == 0 {
            return Err(ZollError::InvalidInput("flow_steps must be positive".into()));
        }
        Ok(())
    }

    /// The same field at another point of the homotopy.
    pub fn with_scale(&self, t: f64) -> Self {
        let mut s = self.clone();
        s.scale = t;
        s
    }

    pub fn is_identity(&self) -> bool {
        self.scale == 0.0 || self.field.is_zero()
    }

    fn rk4_step(&self, x: [f64; 3], h: f64) -> [f64; 3] {
        let f = &self.field;
        let add = |a: &[f64; 3], b: &[f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
        let k1 = f.tangent(&x);
        let k2 = f.tangent(&add(&x, &k1, 0.5 * h));
        let k3 = f.tangent(&add(&x, &k2, 0.5 * h));
        let k4 = f.tangent(&add(&x, &k3, h));
        let mut y = [0.0; 3];
        for i in 0..3 {
            y[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        [y[0] / n, y[1] / n, y[2] / n]
    }

    /// Flow on the unit sphere by fixed-step RK4 with renormalization.
    pub fn flow_sphere(&self, mut x: [f64; 3], direction: FlowDirection) -> [f64; 3] {
        if self.is_identity() {
            return x;
        }
        let h = match direction {
            FlowDirection::Forward => self.scale,
            FlowDirection::Inverse => -self.scale,
        } / self.flow_steps as f64;
        for _ in 0..self.flow_steps {
            x = self.rk4_step(x, h);
        }
        x
    }

    pub fn psi_apply(&self, u: &P1Point, direction: FlowDirection) -> P1Point {
        if self.is_identity() {
            return *u;
        }
        P1Point::from_sphere(self.flow_sphere(u.to_sphere(), direction))
    }

    /// `phi = psi . a . psi^-1`.
    pub fn phi(&self, u: &P1Point) -> P1Point {
        if self.is_identity() {
            return antipodal(u);
        }
        let x = self.flow_sphere(u.to_sphere(), FlowDirection::Inverse);
        let y = self.flow_sphere([-x[0], -x[1], -x[2]], FlowDirection::Forward);
        P1Point::from_sphere(y)
    }

    /// Point of `N = Pi(graph phi)`.
    pub fn embed_n(&self, u: &P1Point) -> P2Point {
        pi_map(u, &self.phi(u))
    }

    /// Jacobian of `phi` between the charts centered at `u` and at `phi(u)`.
    pub fn phi_jacobian(&self, u: &P1Point) -> ([[f64; 2]; 2], P1Point) {
        chart_jacobian(|x| self.phi(x), u, FD_STEP)
    }

    /// Signed ratio `phi^* alpha / alpha` at `u`.
    pub fn phi_area_ratio(&self, u: &P1Point) -> f64 {
        if self.is_identity() {
            return -1.0;
        }
        let (j, _) = self.phi_jacobian(u);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// Real tangent frame of `N` at `embed_n(u)` from central differences of
    /// the embedding along the two chart directions at `u`.
    pub fn surface_frame(&self, u: &P1Point) -> TangentFrame2 {
        let base = self.embed_n(u);
        let b = base.vector();
        let chart = Chart::centered_at(u);
        let lift = |w: C| -> C3 {
            let x = chart.point(w);
            let z = pi_map_raw(&x, &self.phi(&x));
            scale3(&z, C::new(1.0, 0.0) / hdot3(&b, &z))
        };
        let h = FD_STEP;
        let d = |dir: C| {
            let p = lift(dir * h);
            let m = lift(-dir * h);
            scale3(&sub3(&p, &m), C::new(0.5 / h, 0.0))
        };
        TangentFrame2::new(base, d(C::new(1.0, 0.0)), d(C::new(0.0, 1.0)))
    }

    /// Short stable identifier of the surface (field, scale and flow steps).
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            field: &'a SphereField,
            scale: f64,
            flow_steps: usize,
        }
        let key = Key { field: &self.field, scale: self.scale, flow_steps: self.flow_steps };
        let body = toml::to_string(&key).expect("spec serializes");
        let digest = Sha256::digest(body.as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Central-difference Jacobian of `g` between the chart centered at `u` and
/// the chart centered at `g(u)`. Both charts carry the round area density 4
/// at their centers, so the determinant is the area ratio `g^* alpha / alpha`.
pub fn chart_jacobian<F: Fn(&P1Point) -> P1Point>(
    g: F,
    u: &P1Point,
    h: f64,
) -> ([[f64; 2]; 2], P1Point) {
    let y = g(u);
    let src = Chart::centered_at(u);
    let dst = Chart::centered_at(&y);
    let col = |dir: C| {
        let p = dst.coord(&g(&src.point(dir * h)));
        let m = dst.coord(&g(&src.point(-dir * h)));
        (p - m) / (2.0 * h)
    };
    let a = col(C::new(1.0, 0.0));
    let b = col(C::new(0.0, 1.0));
    ([[a.re, b.re], [a.im, b.im]], y)
}
