//! Sampling and quadrature on the sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::projcore::P1Point;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// A 3x3 rotation matrix drawn from the seed; seed 0 is the identity.
fn seeded_rotation(seed: u64) -> [[f64; 3]; 3] {
    if seed == 0 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // uniform unit quaternion
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let q = [
        (1.0 - u1).sqrt() * (tau * u2).sin(),
        (1.0 - u1).sqrt() * (tau * u2).cos(),
        u1.sqrt() * (tau * u3).sin(),
        u1.sqrt() * (tau * u3).cos(),
    ];
    let [x, y, z, w] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// `n` nearly uniform points on the unit sphere, rotated by a seeded rotation.
pub fn fibonacci_sphere(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let r = seeded_rotation(seed);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let a = golden * i as f64;
            let p = [rho * a.cos(), rho * a.sin(), z];
            [
                r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2],
                r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2],
                r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2],
            ]
        })
        .collect()
}

pub fn fibonacci_p1(n: usize, seed: u64) -> Vec<P1Point> {
    fibonacci_sphere(n, seed).into_iter().map(P1Point::from_sphere).collect()
}

/// Product rule on the sphere: Gauss-Legendre in `cos(theta)` times the
/// trapezoidal rule in longitude. Weights sum to `4 pi`.
pub fn sphere_quadrature(order: usize) -> Vec<(P1Point, f64)> {
    let (x, w) = gauss_legendre(order);
    let nl = 2 * order;
    let dl = std::f64::consts::TAU / nl as f64;
    let mut out = Vec::with_capacity(order * nl);
    for (z, wz) in x.iter().zip(&w) {
        let rho = (1.0 - z * z).sqrt();
        for j in 0..nl {
            let l = (j as f64 + 0.5) * dl;
            out.push((P1Point::from_sphere([rho * l.cos(), rho * l.sin(), *z]), wz * dl));
        }
    }
    out
}

/// Nodes of a polar rule on the unit disk: Gauss-Legendre in the radius on
/// `[0, 1]` (weight `r` folded in) times the trapezoidal rule in angle.
pub fn disk_radial_rule(nr: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(nr);
    let r: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let wr: Vec<f64> = w.iter().zip(&r).map(|(wi, ri)| 0.5 * wi * ri).collect();
    (r, wr)
}
