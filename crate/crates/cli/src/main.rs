//! `zoll`: docility checks, disk solves, moduli sweeps, geodesic traces and
//! Lagrangian reports from a surface spec file.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use zoll_core::io;
use zoll_core::moduli::{
    kappa_check, lagrangian_report, sweep_with, trace_geodesic_with, ModuliGrid, SweepOptions,
    TraceMode, TraceOptions, MIN_SAMPLES,
};
use zoll_core::rhsolver::{disk_diagnostics, solve_disk_with, MAX_K, MIN_K};
use zoll_core::surface::{check_docility_with, DEFAULT_DOCILITY_SAMPLES};
use zoll_core::{P1Point, SolverOptions, SurfaceSpec, ZollError};

const WORKERS_ENV: &str = "ZOLL_WORKERS";
const ERROR_RECORD: &str = "error.toml";

#[derive(Parser)]
#[command(name = "zoll", version, about = "Holomorphic disks on docile surfaces and their Zoll geodesics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Surface spec file (TOML).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, short = 'o', default_value = ".")]
    output_dir: PathBuf,
    /// Worker threads; defaults to $ZOLL_WORKERS, then the number of CPUs.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Clone)]
struct Solver {
    /// Fourier degree of the disk.
    #[arg(short = 'K', long = "degree", default_value_t = zoll_core::rhsolver::DEFAULT_K)]
    k: usize,
    /// Newton tolerance on the boundary residual.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    initial_step: f64,
    #[arg(long, default_value_t = 1e-4)]
    min_step: f64,
    /// Spectral tail above which K is doubled.
    #[arg(long, default_value_t = 1e-8)]
    tail_tol: f64,
    /// Pole clearance below which the chart is changed.
    #[arg(long, default_value_t = 0.2)]
    rechart: f64,
}

impl Solver {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            k: self.k,
            tol: self.tol,
            initial_step: self.initial_step,
            min_step: self.min_step,
            tail_tol: self.tail_tol,
            rechart: self.rechart,
            ..SolverOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Certify that the surface is docile.
    CheckDocility {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_DOCILITY_SAMPLES)]
        samples: usize,
    },
    /// Solve for the disk through one point.
    SolveDisk {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: Solver,
        /// Center point as "re,im;re,im".
        #[arg(long)]
        u0: String,
        /// Boundary polyline resolution.
        #[arg(long, default_value_t = 256)]
        boundary_points: usize,
    },
    /// Solve disks over a Fibonacci lattice of the moduli space.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: Solver,
        #[arg(short = 'n', long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compute and store diagnostics for every disk.
        #[arg(long)]
        diagnostics: bool,
    },
    /// Trace the geodesics labelled by one or more points z.
    Geodesic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: Solver,
        /// Label "re,im;re,im"; may be repeated.
        #[arg(long, required = true)]
        z: Vec<String>,
        /// Existing grid directory; otherwise a grid is swept.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(short = 'n', long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.02)]
        step: f64,
        #[arg(long, default_value_t = 1e-4)]
        closure_tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long)]
        reverse: bool,
        /// Interpolate disks from the grid instead of solving (preview only).
        #[arg(long)]
        interpolated: bool,
    },
    /// Test the Lagrangian condition on tangent planes.
    Lagrangian {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'm', long, default_value_t = 1000)]
        m: usize,
    },
    /// Maslov indices, areas and injectivity gaps of a disk.
    Diagnostics {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: Solver,
        /// Disk file; otherwise the disk through --u0 is solved.
        #[arg(long)]
        disk: Option<PathBuf>,
        #[arg(long)]
        u0: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckDocility { .. } => "check-docility",
            Command::SolveDisk { .. } => "solve-disk",
            Command::Sweep { .. } => "sweep",
            Command::Geodesic { .. } => "geodesic",
            Command::Lagrangian { .. } => "lagrangian",
            Command::Diagnostics { .. } => "diagnostics",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::CheckDocility { common, .. }
            | Command::SolveDisk { common, .. }
            | Command::Sweep { common, .. }
            | Command::Geodesic { common, .. }
            | Command::Lagrangian { common, .. }
            | Command::Diagnostics { common, .. } => common,
        }
    }
}

/// Why a run failed, mapped onto the exit status.
enum Failure {
    Docility(String),
    Solver(ZollError),
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Docility(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Input(_) => 4,
        }
    }

    fn kind(&self) -> String {
        match self {
            Failure::Docility(_) => "docility".into(),
            Failure::Solver(e) => e.root().kind().into(),
            Failure::Input(_) => "invalid_input".into(),
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Docility(m) | Failure::Input(m) => m.clone(),
            Failure::Solver(e) => e.to_string(),
        }
    }
}

impl From<ZollError> for Failure {
    fn from(e: ZollError) -> Self {
        match e.root() {
            ZollError::DocilityRequired => Failure::Docility(e.to_string()),
            ZollError::InvalidInput(_) | ZollError::Format(_) | ZollError::Io(_) => {
                Failure::Input(e.to_string())
            }
            _ => Failure::Solver(e),
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord {
    version: u32,
    command: String,
    exit_code: u8,
    kind: String,
    message: String,
}

fn parse_point(s: &str) -> Result<P1Point, Failure> {
    let bad = || Failure::Input(format!("point {s:?} is not \"re,im;re,im\""));
    let (a, b) = s.split_once(';').ok_or_else(bad)?;
    let a = io::parse_complex(a).map_err(|_| bad())?;
    let b = io::parse_complex(b).map_err(|_| bad())?;
    P1Point::try_new(a, b).map_err(Failure::from)
}

fn format_point(u: &P1Point) -> String {
    let [a, b] = u.vector();
    format!("{};{}", io::format_complex(a), io::format_complex(b))
}

fn check_k(k: usize) -> Result<(), Failure> {
    if !(MIN_K..=MAX_K).contains(&k) {
        return Err(Failure::Input(format!("K = {k} outside [{MIN_K}, {MAX_K}]")));
    }
    Ok(())
}

fn check_samples(name: &str, n: usize) -> Result<(), Failure> {
    if n < MIN_SAMPLES {
        return Err(Failure::Input(format!("{name} = {n} < {MIN_SAMPLES}")));
    }
    Ok(())
}

fn load_spec(path: &Path) -> Result<SurfaceSpec, Failure> {
    if !path.exists() {
        return Err(Failure::Input(format!("spec file {} does not exist", path.display())));
    }
    Ok(io::load_spec(path)?)
}

fn require_docile(spec: &SurfaceSpec) -> Result<(), Failure> {
    let r = check_docility_with(spec, DEFAULT_DOCILITY_SAMPLES);
    if !r.passed {
        return Err(Failure::Docility(format!("surface is not docile: {:?}", r.failures)));
    }
    Ok(())
}

fn write_toml<T: Serialize>(dir: &Path, name: &str, v: &T) -> Result<PathBuf, Failure> {
    let body = toml::to_string(v).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(io::write_output(dir, name, &body)?)
}

fn setup_workers(requested: Option<usize>) -> Result<(), Failure> {
    let workers = match requested {
        Some(w) => Some(w),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| Failure::Input(format!("{WORKERS_ENV} = {v:?} is not a count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(w) = workers {
        if w == 0 {
            return Err(Failure::Input("workers must be >= 1".into()));
        }
        // fails only if a pool already exists, which never happens here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    Ok(())
}

fn run(cmd: &Command) -> Result<String, Failure> {
    let common = cmd.common();
    setup_workers(common.workers)?;
    let spec = load_spec(&common.spec)?;
    let out = &common.output_dir;
    match cmd {
        Command::CheckDocility { samples, .. } => {
            check_samples("samples", *samples)?;
            let r = check_docility_with(&spec, *samples);
            write_toml(out, "docility.toml", &r)?;
            if !r.passed {
                return Err(Failure::Docility(format!(
                    "docility failed: {:?} (min fixed-point gap {:.3e}, min orientation {:.3e}, max involution defect {:.3e})",
                    r.failures, r.min_fixed_point_gap, r.min_orientation_det, r.max_involution_defect
                )));
            }
            Ok(format!(
                "docility passed: {} samples, min fixed-point gap {:.3e}, min orientation {:.3e}, max involution defect {:.3e}",
                r.samples, r.min_fixed_point_gap, r.min_orientation_det, r.max_involution_defect
            ))
        }
        Command::SolveDisk { solver, u0, boundary_points, .. } => {
            check_k(solver.k)?;
            let u0 = parse_point(u0)?;
            require_docile(&spec)?;
            let d = solve_disk_with(&spec, &u0, &solver.options())?;
            let path = out.join("disk.toml");
            std::fs::create_dir_all(out).map_err(|e| Failure::Input(e.to_string()))?;
            io::save_disk(&path, &spec.hash(), &d, None)?;
            io::write_output(out, "boundary.csv", &io::boundary_polyline_csv(&d, *boundary_points))?;
            Ok(format!(
                "disk solved: K = {}, residual {:.3e}, spectral tail {:.3e}, written to {}",
                d.k(),
                d.residual,
                d.spectral_tail(),
                path.display()
            ))
        }
        Command::Sweep { solver, n, seed, diagnostics, .. } => {
            check_k(solver.k)?;
            check_samples("n", *n)?;
            require_docile(&spec)?;
            let grid = sweep_with(&spec, &SweepOptions { n: *n, seed: *seed, solver: solver.options() })?;
            let diags = if *diagnostics {
                Some(
                    grid.entries
                        .par_iter()
                        .map(|e| disk_diagnostics(&e.solution, &spec))
                        .collect::<zoll_core::Result<Vec<_>>>()?,
                )
            } else {
                None
            };
            let dir = out.join("grid");
            io::save_grid(&dir, &grid, diags.as_deref())?;
            let worst = grid.entries.iter().map(|e| e.solution.residual).fold(0.0, f64::max);
            let mut line = format!(
                "sweep: {} disks, max residual {worst:.3e}, kappa check {:.3e}",
                grid.entries.len(),
                kappa_check(&grid)
            );
            if let Some(d) = &diags {
                let off = d.iter().filter(|d| d.total_maslov != 3 || d.lift_winding != 2).count();
                line += &format!(", {off} disks with unexpected Maslov indices");
            }
            Ok(line + &format!(", written to {}", dir.display()))
        }
        Command::Geodesic {
            solver, z, grid, n, seed, step, closure_tol, max_steps, reverse, interpolated, ..
        } => {
            check_k(solver.k)?;
            check_samples("n", *n)?;
            let labels = z.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>, _>>()?;
            require_docile(&spec)?;
            let grid: ModuliGrid = match grid {
                Some(dir) => {
                    let g = io::load_grid(dir)?;
                    if g.spec_hash != spec.hash() {
                        return Err(Failure::Input(format!("grid {} was built for another spec", dir.display())));
                    }
                    g
                }
                None => sweep_with(&spec, &SweepOptions { n: *n, seed: *seed, solver: solver.options() })?,
            };
            let opts = TraceOptions {
                step: *step,
                closure_tol: *closure_tol,
                max_steps: *max_steps,
                reverse: *reverse,
                mode: if *interpolated { TraceMode::Interpolated } else { TraceMode::Exact },
                ..TraceOptions::default()
            };
            let traced = labels
                .par_iter()
                .map(|u| trace_geodesic_with(&spec, &grid, u, &opts).map_err(|e| (format_point(u), e)))
                .collect::<Vec<_>>();
            let mut closed = 0;
            let mut worst: f64 = 0.0;
            for (i, g) in traced.into_iter().enumerate() {
                let g = g.map_err(|(u, e)| {
                    Failure::from(ZollError::AtPoint { u0: u, source: Box::new(e) })
                })?;
                closed += g.closed as usize;
                worst = worst.max(g.closure_gap);
                io::write_output(out, &format!("geodesic_{i:03}.csv"), &io::geodesic_to_csv(&g))?;
            }
            Ok(format!(
                "geodesics: {closed}/{} closed, max closure gap {worst:.3e}, written to {}",
                labels.len(),
                out.display()
            ))
        }
        Command::Lagrangian { m, .. } => {
            check_samples("m", *m)?;
            let r = lagrangian_report(&spec, *m)?;
            write_toml(out, "lagrangian.toml", &r)?;
            Ok(format!(
                "lagrangian: verdict {}, max |Im upsilon| {:.3e}, mean {:.3e} over {} samples",
                r.verdict.as_str(),
                r.max_im,
                r.mean_im,
                r.sample_count
            ))
        }
        Command::Diagnostics { solver, disk, u0, .. } => {
            let d = match (disk, u0) {
                (Some(path), None) => {
                    let rec = io::load_disk(path)?;
                    if rec.spec_hash != spec.hash() {
                        return Err(Failure::Input(format!("{} was solved for another spec", path.display())));
                    }
                    rec.disk
                }
                (None, Some(u0)) => {
                    check_k(solver.k)?;
                    let u0 = parse_point(u0)?;
                    require_docile(&spec)?;
                    solve_disk_with(&spec, &u0, &solver.options())?
                }
                _ => return Err(Failure::Input("exactly one of --disk and --u0 is required".into())),
            };
            let g = disk_diagnostics(&d, &spec)?;
            std::fs::create_dir_all(out).map_err(|e| Failure::Input(e.to_string()))?;
            io::save_disk(&out.join("disk.toml"), &spec.hash(), &d, Some(&g))?;
            Ok(format!(
                "diagnostics: residual {:.3e}, Maslov {}+{}={}, lift area {:.12}, diagonal gap {:.3e}, boundary injectivity gap {:.3e}",
                g.residual,
                g.lift_winding,
                g.normal_maslov,
                g.total_maslov,
                g.lift_area,
                g.diagonal_gap,
                g.boundary_injectivity_gap
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            let record = ErrorRecord {
                version: io::FORMAT_VERSION,
                command: cli.command.name().into(),
                exit_code: f.code(),
                kind: f.kind(),
                message: f.message(),
            };
            let dir = &cli.command.common().output_dir;
            if let Err(e) = write_toml(dir, ERROR_RECORD, &record) {
                eprintln!("could not write error record: {}", e.message());
            }
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
