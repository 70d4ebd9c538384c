//! The moduli space of disks, indexed by their conic point `p = Pi(u0, u0)`,
//! together with the geodesics it carries and the Lagrangian test.

mod geodesic;
mod lagrangian;

pub use geodesic::{
    node_distance, trace_geodesic, trace_geodesic_with, Geodesic, GeodesicNode, TraceMode, TraceOptions,
};
pub use lagrangian::{lagrangian_report, LagrangianReport, Verdict};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZollError};
use crate::lattice::fibonacci_p1;
use crate::projcore::{chordal, chordal2, pi_map, P1Point};
use crate::rhsolver::{
    check_k, continue_disk, correct_at, round_disk, DiskSolution, SolverOptions,
};
use crate::surface::{check_docility, SurfaceSpec};

pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub u0: P1Point,
    pub solution: DiskSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuliGrid {
    pub spec_hash: String,
    pub k: usize,
    pub seed: u64,
    pub entries: Vec<GridEntry>,
}

impl ModuliGrid {
    /// Index of the entry whose `u0` is chordally nearest to `u`.
    pub fn nearest(&self, u: &P1Point) -> Option<usize> {
        self.entries
            .iter()
            .enumerate()
            .min_by(|a, b| chordal(&a.1.u0, u).total_cmp(&chordal(&b.1.u0, u)))
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub n: usize,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl SweepOptions {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, seed: 0, solver: SolverOptions::with_k(k) }
    }
}

pub fn sweep(spec: &SurfaceSpec, n: usize, k: usize) -> Result<ModuliGrid> {
    sweep_with(spec, &SweepOptions::new(n, k))
}

/// Prim's tree over the lattice under chordal distance, rooted at 0;
/// returns parents and the breadth-first levels.
fn spanning_levels(points: &[P1Point]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = points.len();
    let mut parent = vec![0; n];
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut children = vec![Vec::new(); n];
    best[0] = 0.0;
    for _ in 0..n {
        let i = (0..n)
            .filter(|&i| !done[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        done[i] = true;
        if i != 0 {
            children[parent[i]].push(i);
        }
        for j in 0..n {
            if !done[j] {
                let d = chordal(&points[i], &points[j]);
                if d < best[j] {
                    best[j] = d;
                    parent[j] = i;
                }
            }
        }
    }
    let mut levels = vec![vec![0]];
    loop {
        let next: Vec<usize> =
            levels.last().unwrap().iter().flat_map(|&i| children[i].iter().copied()).collect();
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    (parent, levels)
}

fn label(u: &P1Point) -> String {
    let x = u.to_sphere();
    format!("({:.6}, {:.6}, {:.6})", x[0], x[1], x[2])
}

fn at_point(u: &P1Point, e: ZollError) -> ZollError {
    ZollError::AtPoint { u0: label(u), source: Box::new(e) }
}

fn full_solve(spec: &SurfaceSpec, u0: &P1Point, opts: &SolverOptions) -> Result<DiskSolution> {
    continue_disk(spec, round_disk(u0, opts.k), opts)
}

/// Disk at `u0` warm-started from a nearby solution, falling back to full
/// continuation from the round disk.
pub fn solve_from_neighbor(
    spec: &SurfaceSpec,
    neighbor: &DiskSolution,
    u0: &P1Point,
    opts: &SolverOptions,
) -> Result<DiskSolution> {
    let warm = neighbor
        .canonical()
        .and_then(|c| correct_at(&c.transported_to(u0), spec, spec.scale, opts));
    match warm {
        Ok(d) => Ok(d),
        Err(_) => full_solve(spec, u0, opts),
    }
}

/// Solves the disks over a Fibonacci lattice. The root is solved by full
/// continuation; every other point is warm-started from its parent in a
/// minimum spanning tree, level by level, so the result does not depend on
/// the number of worker threads.
pub fn sweep_with(spec: &SurfaceSpec, opts: &SweepOptions) -> Result<ModuliGrid> {
    if opts.n < MIN_SAMPLES {
        return Err(ZollError::InvalidInput(format!("n = {} < {MIN_SAMPLES}", opts.n)));
    }
    check_k(opts.solver.k, opts.solver.max_k)?;
    if !check_docility(spec).passed {
        return Err(ZollError::DocilityRequired);
    }
    let points = fibonacci_p1(opts.n, opts.seed);
    let (parent, levels) = spanning_levels(&points);
    let mut sols: Vec<Option<DiskSolution>> = vec![None; points.len()];
    sols[0] = Some(full_solve(spec, &points[0], &opts.solver).map_err(|e| at_point(&points[0], e))?);
    for level in &levels[1..] {
        let solved: Vec<Result<DiskSolution>> = level
            .par_iter()
            .map(|&i| {
                let p = sols[parent[i]].as_ref().expect("parent solved on an earlier level");
                solve_from_neighbor(spec, p, &points[i], &opts.solver)
                    .map_err(|e| at_point(&points[i], e))
            })
            .collect();
        for (&i, s) in level.iter().zip(solved) {
            sols[i] = Some(s?);
        }
    }
    let entries = points
        .into_iter()
        .zip(sols)
        .map(|(u0, s)| GridEntry { u0, solution: s.unwrap() })
        .collect();
    Ok(ModuliGrid { spec_hash: spec.hash(), k: opts.solver.k, seed: opts.seed, entries })
}

/// Max distance between `Pi(ch(0), ch(0))` and the stored conic point;
/// `inf` if two entries share a conic point to within `1e-6`.
pub fn kappa_check(grid: &ModuliGrid) -> f64 {
    let mut worst: f64 = 0.0;
    for e in &grid.entries {
        let c = e.solution.point(crate::projcore::C::new(0.0, 0.0));
        worst = worst.max(chordal2(&pi_map(&c, &c), &e.solution.p));
    }
    if kappa_separation(grid) <= 1e-6 {
        return f64::INFINITY;
    }
    worst
}

/// Min pairwise distance between the conic points of distinct entries.
pub fn kappa_separation(grid: &ModuliGrid) -> f64 {
    let ps: Vec<_> = grid.entries.iter().map(|e| e.solution.p).collect();
    let mut m = f64::INFINITY;
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            m = m.min(chordal2(&ps[i], &ps[j]));
        }
    }
    m
}

/// Re-solves the disk at `u0` from the nearest grid entry.
pub fn disk_near(spec: &SurfaceSpec, grid: &ModuliGrid, u0: &P1Point) -> Result<DiskSolution> {
    let i = grid.nearest(u0).ok_or(ZollError::InvalidInput("empty grid".into()))?;
    let opts = SolverOptions::with_k(grid.k);
    solve_from_neighbor(spec, &grid.entries[i].solution, u0, &opts)
}

#[cfg(test)]
mod tests;
