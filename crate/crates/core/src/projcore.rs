//! Projective geometry of the reference conic: points of CP1 and CP2 as
//! unit representatives, the branched double cover `CP1 x CP1 -> CP2`, the
//! involutions that act on it, tangent lines of the conic and the
//! sign-ambiguous holomorphic 2-form whose imaginary part detects the
//! Lagrangian condition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZollError};

pub type C = Complex64;
pub type C2 = [C; 2];
pub type C3 = [C; 3];

/// Conic proximity threshold.
pub const EPS_CONIC: f64 = 1e-6;
/// Projective equality tolerance (chordal).
pub const EQ_TOL: f64 = 1e-10;

const I: C = C::new(0.0, 1.0);

#[inline]
pub(crate) fn hdot3(a: &C3, b: &C3) -> C {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

#[inline]
pub(crate) fn dot3(a: &C3, b: &C3) -> C {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm3(a: &C3) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

#[inline]
pub(crate) fn scale3(a: &C3, s: C) -> C3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub(crate) fn sub3(a: &C3, b: &C3) -> C3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Bilinear cross product; `cross3(a, b)` is annihilated by both `a` and `b`
/// under the bilinear pairing.
#[inline]
pub(crate) fn cross3(a: &C3, b: &C3) -> C3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn det3(a: &C3, b: &C3, c: &C3) -> C {
    dot3(a, &cross3(b, c))
}

#[inline]
fn hdot2(a: &C2, b: &C2) -> C {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// A point of CP1 stored as a unit-norm representative.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct P1Point {
    v: C2,
}

impl P1Point {
    pub fn try_new(a: C, b: C) -> Result<Self> {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 1e-300) {
            return Err(ZollError::InvalidInput(format!(
                "degenerate homogeneous coordinates [{a}:{b}]"
            )));
        }
        Ok(Self { v: [a / n, b / n] })
    }

    /// Normalizes `[a:b]`. Panics on the zero vector.
    pub fn new(a: C, b: C) -> Self {
        Self::try_new(a, b).expect("nonzero homogeneous coordinates")
    }

    pub fn real(a: f64, b: f64) -> Self {
        Self::new(C::new(a, 0.0), C::new(b, 0.0))
    }

    pub fn vector(&self) -> C2 {
        self.v
    }

    pub fn inner(&self, other: &P1Point) -> C {
        hdot2(&self.v, &other.v)
    }

    pub fn phase_rotated(&self, theta: f64) -> Self {
        let p = C::from_polar(1.0, theta);
        Self { v: [self.v[0] * p, self.v[1] * p] }
    }

    /// Image on the unit sphere under `u -> (2 Re u1 conj(u2), 2 Im u1 conj(u2), |u1|^2 - |u2|^2)`.
    pub fn to_sphere(&self) -> [f64; 3] {
        let m = self.v[0] * self.v[1].conj();
        [2.0 * m.re, 2.0 * m.im, self.v[0].norm_sqr() - self.v[1].norm_sqr()]
    }

    /// Inverse of [`P1Point::to_sphere`]; the input is renormalized first.
    pub fn from_sphere(x: [f64; 3]) -> Self {
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let (x, y, z) = (x[0] / n, x[1] / n, x[2] / n);
        if z >= 0.0 {
            Self::new(C::new(1.0 + z, 0.0), C::new(x, -y))
        } else {
            Self::new(C::new(x, y), C::new(1.0 - z, 0.0))
        }
    }
}

impl PartialEq for P1Point {
    fn eq(&self, other: &Self) -> bool {
        chordal(self, other) < EQ_TOL
    }
}

/// A point of CP2 stored as a unit-norm representative.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct P2Point {
    v: C3,
}

impl P2Point {
    pub fn try_new(v: C3) -> Result<Self> {
        let n = norm3(&v);
        if !(n.is_finite() && n > 1e-300) {
            return Err(ZollError::InvalidInput("zero vector in CP2".into()));
        }
        Ok(Self { v: scale3(&v, C::new(1.0 / n, 0.0)) })
    }

    pub fn new(v: C3) -> Self {
        Self::try_new(v).expect("nonzero homogeneous coordinates")
    }

    pub fn real(a: f64, b: f64, c: f64) -> Self {
        Self::new([C::new(a, 0.0), C::new(b, 0.0), C::new(c, 0.0)])
    }

    pub fn vector(&self) -> C3 {
        self.v
    }

    pub fn phase_rotated(&self, theta: f64) -> Self {
        Self { v: scale3(&self.v, C::from_polar(1.0, theta)) }
    }
}

impl PartialEq for P2Point {
    fn eq(&self, other: &Self) -> bool {
        chordal2(self, other) < EQ_TOL
    }
}

/// Phase-invariant chordal distance `sqrt(1 - |<u,w>|^2)` on CP1, evaluated
/// as `|u1 w2 - u2 w1|` (equal for unit vectors, without cancellation).
pub fn chordal(u: &P1Point, w: &P1Point) -> f64 {
    (u.v[0] * w.v[1] - u.v[1] * w.v[0]).norm().min(1.0)
}

/// Chordal distance on CP2, as the norm of the wedge product.
pub fn chordal2(a: &P2Point, b: &P2Point) -> f64 {
    norm3(&cross3(&a.v, &b.v)).min(1.0)
}

/// The polynomial branched cover before normalization. For unit inputs the
/// result has Euclidean norm `sqrt(2)`.
pub fn pi_map_raw(u: &P1Point, v: &P1Point) -> C3 {
    let [u1, u2] = u.v;
    let [v1, v2] = v.v;
    [I * (u1 * v1 + u2 * v2), u1 * v1 - u2 * v2, u1 * v2 + u2 * v1]
}

/// The 2-to-1 cover `CP1 x CP1 -> CP2`, ramified over the conic.
pub fn pi_map(u: &P1Point, v: &P1Point) -> P2Point {
    P2Point::new(pi_map_raw(u, v))
}

/// `z1^2 + z2^2 + z3^2` of the stored unit representative.
pub fn conic_value(z: &P2Point) -> C {
    dot3(&z.v, &z.v)
}

/// Antipodal map `[u1:u2] -> [-conj(u2) : conj(u1)]`.
pub fn antipodal(u: &P1Point) -> P1Point {
    P1Point { v: [-u.v[1].conj(), u.v[0].conj()] }
}

/// Complex conjugation of CP2; its fixed points form the standard RP2.
pub fn conj_c(z: &P2Point) -> P2Point {
    P2Point { v: [z.v[0].conj(), z.v[1].conj(), z.v[2].conj()] }
}

/// A projective line tangent to the conic, `a . z = 0` with `a . a = 0`.
#[derive(Debug, Clone, Copy)]
pub struct TangentLine {
    pub a: C3,
    pub tangency_point: P2Point,
}

impl TangentLine {
    fn from_dual(a: C3) -> Self {
        let p = P2Point::new(a);
        Self { a: p.vector(), tangency_point: p }
    }

    pub fn contains(&self, z: &P2Point) -> f64 {
        dot3(&self.a, &z.v).norm()
    }
}

/// Orthonormal (Hermitian) basis of the complement of `v`.
pub(crate) fn orthonormal_complement(v: &C3) -> [C3; 2] {
    let n = norm3(v);
    let v = scale3(v, C::new(1.0 / n, 0.0));
    // seed with the coordinate axis least aligned with v
    let k = (0..3)
        .min_by(|&i, &j| v[i].norm().partial_cmp(&v[j].norm()).unwrap())
        .unwrap();
    let mut e = [C::new(0.0, 0.0); 3];
    e[k] = C::new(1.0, 0.0);
    let b1 = sub3(&e, &scale3(&v, hdot3(&v, &e)));
    let b1 = scale3(&b1, C::new(1.0 / norm3(&b1), 0.0));
    // conj(v x b1) is Hermitian-orthogonal to both
    let c = cross3(&v, &b1);
    let b2 = [c[0].conj(), c[1].conj(), c[2].conj()];
    let b2 = scale3(&b2, C::new(1.0 / norm3(&b2), 0.0));
    [b1, b2]
}

/// The two tangent lines of the conic through a point off the conic.
pub fn tangent_lines_through(p: &P2Point) -> Result<[TangentLine; 2]> {
    let q = conic_value(p);
    if q.norm() < EPS_CONIC {
        return Err(ZollError::DegenerateTangency(q.norm()));
    }
    // a . p = 0 is the Hermitian complement of conj(p)
    let pbar = [p.v[0].conj(), p.v[1].conj(), p.v[2].conj()];
    let [b1, b2] = orthonormal_complement(&pbar);
    // (s b1 + t b2)^2 = A s^2 + 2 B s t + C t^2
    let a = dot3(&b1, &b1);
    let b = dot3(&b1, &b2);
    let c = dot3(&b2, &b2);
    let disc = (b * b - a * c).sqrt();
    let lines = if a.norm() >= c.norm() {
        [(-b + disc) / a, (-b - disc) / a].map(|s| {
            TangentLine::from_dual([
                s * b1[0] + b2[0],
                s * b1[1] + b2[1],
                s * b1[2] + b2[2],
            ])
        })
    } else {
        [(-b + disc) / c, (-b - disc) / c].map(|t| {
            TangentLine::from_dual([
                b1[0] + t * b2[0],
                b1[1] + t * b2[1],
                b1[2] + t * b2[2],
            ])
        })
    };
    Ok(lines)
}

/// A Moebius transformation `w -> (a + b w) / (c + d w)`.
#[derive(Debug, Clone, Copy)]
pub struct Mobius {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl Mobius {
    pub fn apply(&self, w: C) -> C {
        (self.a + self.b * w) / (self.c + self.d * w)
    }

    pub fn derivative(&self, w: C) -> C {
        let den = self.c + self.d * w;
        (self.b * self.c - self.a * self.d) / (den * den)
    }
}

/// Stereographic chart of CP1 with a given pole. The coordinate is
/// `w(u) = <P,u> / <A,u>` with `A = (conj p2, -conj p1)`, so `w(A) = 0`,
/// `w(P) = oo` and points are recovered as `A + w P`. Charts differ from one
/// another by unitary Moebius maps, so the density of the round area form is
/// `4 / (1 + |w|^2)^2` in every chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub pole: P1Point,
}

/// Minimum chordal distance to the pole for a finite chart coordinate.
pub const CHART_MARGIN: f64 = 0.05;

impl Chart {
    pub fn with_pole(pole: P1Point) -> Self {
        Self { pole }
    }

    /// The chart in which `u` has coordinate 0; its pole is the antipode of `u`.
    pub fn centered_at(u: &P1Point) -> Self {
        Self { pole: antipodal(u) }
    }

    pub fn anchor(&self) -> C2 {
        let p = self.pole.v;
        [p[1].conj(), -p[0].conj()]
    }

    pub fn center(&self) -> P1Point {
        let a = self.anchor();
        P1Point { v: a }
    }

    pub fn coord(&self, u: &P1Point) -> C {
        let a = self.anchor();
        hdot2(&self.pole.v, &u.v) / hdot2(&a, &u.v)
    }

    pub fn coord_checked(&self, u: &P1Point) -> Result<C> {
        let d = chordal(u, &self.pole);
        if d < CHART_MARGIN {
            return Err(ZollError::ChartOverflow { distance: d });
        }
        Ok(self.coord(u))
    }

    pub fn point(&self, w: C) -> P1Point {
        let a = self.anchor();
        let p = self.pole.v;
        if !w.is_finite() {
            return self.pole;
        }
        P1Point::new(a[0] + w * p[0], a[1] + w * p[1])
    }

    /// Coordinate change from this chart into `other`.
    pub fn transition_to(&self, other: &Chart) -> Mobius {
        let a = self.anchor();
        let p = self.pole.v;
        let a2 = other.anchor();
        let p2 = other.pole.v;
        Mobius {
            a: hdot2(&p2, &a),
            b: hdot2(&p2, &p),
            c: hdot2(&a2, &a),
            d: hdot2(&a2, &p),
        }
    }
}

/// Real tangent frame of an embedded real surface at a point of CP2.
#[derive(Debug, Clone, Copy)]
pub struct TangentFrame2 {
    pub base: P2Point,
    pub e1: C3,
    pub e2: C3,
}

impl TangentFrame2 {
    /// Removes the components of `e1`, `e2` along the base representative.
    pub fn new(base: P2Point, e1: C3, e2: C3) -> Self {
        let b = base.vector();
        let e1 = sub3(&e1, &scale3(&b, hdot3(&b, &e1)));
        let e2 = sub3(&e2, &scale3(&b, hdot3(&b, &e2)));
        Self { base, e1, e2 }
    }

    /// Real coordinates of a tangent vector in an orthonormal basis of the
    /// complement of the base.
    pub(crate) fn real_coords(basis: &[C3; 2], v: &C3) -> [f64; 4] {
        let x = hdot3(&basis[0], v);
        let y = hdot3(&basis[1], v);
        [x.re, x.im, y.re, y.im]
    }

    pub fn is_independent(&self) -> bool {
        let basis = orthonormal_complement(&self.base.vector());
        let a = Self::real_coords(&basis, &self.e1);
        let b = Self::real_coords(&basis, &self.e2);
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        na > 0.0 && nb > 0.0 && (1.0 - (ab / (na * nb)).powi(2)) > 1e-12
    }
}

/// The 2-form on the frame with the principal square-root branch of `q`.
pub fn upsilon(frame: &TangentFrame2) -> Result<C> {
    let z = frame.base.vector();
    let q = dot3(&z, &z);
    if q.norm() < EPS_CONIC {
        return Err(ZollError::NearConic(q.norm()));
    }
    let s = q.sqrt();
    Ok(det3(&z, &frame.e1, &frame.e2) / (s * s * s))
}

/// `|Im upsilon(e1, e2)|`, independent of the square-root branch.
pub fn upsilon_im_abs(frame: &TangentFrame2) -> Result<f64> {
    Ok(upsilon(frame)?.im.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn assert_p2(a: &P2Point, b: &P2Point) {
        assert!(chordal2(a, b) < 1e-12, "{a:?} vs {b:?}");
    }

    #[test]
    fn pi_map_examples() {
        let n = P1Point::real(1.0, 0.0);
        let s = P1Point::real(0.0, 1.0);
        assert_p2(&pi_map(&n, &n), &P2Point::new([c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0)]));
        assert_p2(&pi_map(&n, &s), &P2Point::real(0.0, 0.0, 1.0));
    }

    #[test]
    fn conic_examples() {
        let z = P2Point::new([c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(conic_value(&z).norm() < 1e-15);
        assert!((conic_value(&P2Point::real(1.0, 0.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn antipodal_examples() {
        assert_eq!(antipodal(&P1Point::real(1.0, 0.0)), P1Point::real(0.0, 1.0));
        let x = P1Point::real(0.3, -0.2).to_sphere();
        let y = antipodal(&P1Point::real(0.3, -0.2)).to_sphere();
        for k in 0..3 {
            assert!((x[k] + y[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn conj_examples() {
        assert_eq!(conj_c(&P2Point::real(1.0, 0.0, 0.0)), P2Point::real(1.0, 0.0, 0.0));
        let z = P2Point::new([c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(conj_c(&z), P2Point::new([c(0.0, -1.0), c(1.0, 0.0), c(0.0, 0.0)]));
    }

    #[test]
    fn tangent_lines_examples() {
        let lines = tangent_lines_through(&P2Point::real(0.0, 0.0, 1.0)).unwrap();
        let want = [
            P2Point::new([c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]),
            P2Point::new([c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0)]),
        ];
        for w in &want {
            assert!(lines.iter().any(|l| chordal2(&l.tangency_point, w) < 1e-12));
        }
        let lines = tangent_lines_through(&P2Point::real(1.0, 0.0, 0.0)).unwrap();
        let want = [
            P2Point::new([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]),
            P2Point::new([c(0.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)]),
        ];
        for w in &want {
            assert!(lines.iter().any(|l| chordal2(&l.tangency_point, w) < 1e-12));
        }
        let on_q = P2Point::new([c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            tangent_lines_through(&on_q),
            Err(ZollError::DegenerateTangency(_))
        ));
    }

    #[test]
    fn upsilon_real_frame() {
        let f = TangentFrame2::new(
            P2Point::real(1.0, 0.0, 0.0),
            [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        );
        let u = upsilon(&f).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-15);
        assert!(upsilon_im_abs(&f).unwrap() < 1e-15);
        let near = TangentFrame2::new(
            P2Point::new([c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0)]),
            [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
        );
        assert!(matches!(upsilon(&near), Err(ZollError::NearConic(_))));
    }

    #[test]
    fn chordal_examples() {
        let u = P1Point::new(c(0.3, 0.1), c(-0.5, 0.7));
        assert!(chordal(&u, &u) < 1e-7);
        assert!((chordal(&P1Point::real(1.0, 0.0), &P1Point::real(0.0, 1.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chart_roundtrip_and_transition() {
        let u0 = P1Point::new(c(0.3, 0.1), c(-0.5, 0.7));
        let chart = Chart::centered_at(&u0);
        assert!(chart.coord(&u0).norm() < 1e-15);
        let w = c(0.4, -0.9);
        assert!((chart.coord(&chart.point(w)) - w).norm() < 1e-13);
        let other = Chart::centered_at(&P1Point::new(c(0.9, 0.0), c(0.1, 0.2)));
        let m = chart.transition_to(&other);
        assert!((m.apply(w) - other.coord(&chart.point(w))).norm() < 1e-13);
        let h = 1e-6;
        let fd = (m.apply(w + h) - m.apply(w - h)) / (2.0 * h);
        assert!((fd - m.derivative(w)).norm() < 1e-7);
        // the antipodal map reads w -> -1/conj(w) in any chart
        let x = chart.coord(&antipodal(&chart.point(w)));
        assert!((x + 1.0 / w.conj()).norm() < 1e-13);
        assert!(chart.coord_checked(&chart.pole.phase_rotated(0.3)).is_err());
    }
}
