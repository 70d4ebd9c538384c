//! Versioned text formats: surface specs and disk solutions as TOML, grids
//! as a directory of disk files plus an index, geodesics as CSV. Complex
//! numbers are written as `"re,im"` with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZollError};
use crate::moduli::{Geodesic, GeodesicNode, GridEntry, ModuliGrid};
use crate::projcore::{Chart, P1Point, P2Point, C};
use crate::rhsolver::{DiskDiagnostics, DiskSolution};
use crate::surface::{DocilityThresholds, FieldTerm, SphereField, SurfaceSpec, DEFAULT_FLOW_STEPS};

pub const FORMAT_VERSION: u32 = 1;

pub fn format_complex(z: C) -> String {
    format!("{:.16e},{:.16e}", z.re, z.im)
}

pub fn parse_complex(s: &str) -> Result<C> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| ZollError::Format(format!("complex number {s:?} is not \"re,im\"")))?;
    let p = |t: &str| {
        t.trim().parse::<f64>().map_err(|e| ZollError::Format(format!("{t:?}: {e}")))
    };
    Ok(C::new(p(a)?, p(b)?))
}

fn complexes(v: &[C]) -> Vec<String> {
    v.iter().map(|z| format_complex(*z)).collect()
}

fn parse_complexes<const N: usize>(v: &[String], what: &str) -> Result<[C; N]> {
    if v.len() != N {
        return Err(ZollError::Format(format!("{what}: expected {N} complex entries, got {}", v.len())));
    }
    let mut out = [C::new(0.0, 0.0); N];
    for (o, s) in out.iter_mut().zip(v) {
        *o = parse_complex(s)?;
    }
    Ok(out)
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(ZollError::Format(format!("unsupported format version {v}")));
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| ZollError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| ZollError::Io(format!("{}: {e}", path.display())))
}

fn to_toml<T: Serialize>(v: &T) -> Result<String> {
    toml::to_string(v).map_err(|e| ZollError::Format(e.to_string()))
}

fn from_toml<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    toml::from_str(s).map_err(|e| ZollError::Format(e.to_string()))
}

// ----- surface specs -----

#[derive(Serialize, Deserialize)]
struct SpecFile {
    version: u32,
    degree: u32,
    scale: f64,
    #[serde(default = "default_flow_steps")]
    flow_steps: usize,
    #[serde(default)]
    terms: Vec<FieldTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thresholds: Option<DocilityThresholds>,
}

fn default_flow_steps() -> usize {
    DEFAULT_FLOW_STEPS
}

pub fn parse_spec(s: &str) -> Result<SurfaceSpec> {
    let f: SpecFile = from_toml(s)?;
    check_version(f.version)?;
    let field = SphereField::new(f.degree, f.terms)?;
    let mut spec = SurfaceSpec::new(field, f.scale, f.flow_steps)?;
    if let Some(t) = f.thresholds {
        spec.thresholds = t;
    }
    Ok(spec)
}

pub fn spec_to_string(spec: &SurfaceSpec) -> Result<String> {
    to_toml(&SpecFile {
        version: FORMAT_VERSION,
        degree: spec.field.degree,
        scale: spec.scale,
        flow_steps: spec.flow_steps,
        terms: spec.field.terms.clone(),
        thresholds: (spec.thresholds != DocilityThresholds::default()).then_some(spec.thresholds),
    })
}

pub fn load_spec(path: &Path) -> Result<SurfaceSpec> {
    parse_spec(&read(path)?)
}

pub fn save_spec(path: &Path, spec: &SurfaceSpec) -> Result<()> {
    write(path, &spec_to_string(spec)?)
}

// ----- disk solutions -----

#[derive(Serialize, Deserialize)]
struct DiskFile {
    version: u32,
    spec_hash: String,
    scale: f64,
    k: usize,
    u0: Vec<String>,
    p: Vec<String>,
    chart_pole: Vec<String>,
    residual: f64,
    coeffs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diagnostics: Option<DiskDiagnostics>,
}

/// A disk as stored on disk, with the hash of the surface it solves.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskRecord {
    pub spec_hash: String,
    pub disk: DiskSolution,
    pub diagnostics: Option<DiskDiagnostics>,
}

pub fn disk_to_string(
    spec_hash: &str,
    d: &DiskSolution,
    diagnostics: Option<&DiskDiagnostics>,
) -> Result<String> {
    to_toml(&DiskFile {
        version: FORMAT_VERSION,
        spec_hash: spec_hash.to_string(),
        scale: d.spec_scale,
        k: d.k(),
        u0: complexes(&d.u0.vector()),
        p: complexes(&d.p.vector()),
        chart_pole: complexes(&d.chart.pole.vector()),
        residual: d.residual,
        coeffs: complexes(&d.coeffs),
        diagnostics: diagnostics.cloned(),
    })
}

pub fn parse_disk(s: &str) -> Result<DiskRecord> {
    let f: DiskFile = from_toml(s)?;
    check_version(f.version)?;
    if f.coeffs.len() != f.k + 1 {
        return Err(ZollError::Format(format!(
            "k = {} but {} coefficients",
            f.k,
            f.coeffs.len()
        )));
    }
    let [a, b] = parse_complexes::<2>(&f.u0, "u0")?;
    let [pa, pb] = parse_complexes::<2>(&f.chart_pole, "chart_pole")?;
    let p = parse_complexes::<3>(&f.p, "p")?;
    let coeffs = f.coeffs.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>>>()?;
    let disk = DiskSolution {
        spec_scale: f.scale,
        u0: P1Point::try_new(a, b)?,
        p: P2Point::try_new(p)?,
        chart: Chart::with_pole(P1Point::try_new(pa, pb)?),
        coeffs,
        residual: f.residual,
    };
    Ok(DiskRecord { spec_hash: f.spec_hash, disk, diagnostics: f.diagnostics })
}

pub fn save_disk(
    path: &Path,
    spec_hash: &str,
    d: &DiskSolution,
    diagnostics: Option<&DiskDiagnostics>,
) -> Result<()> {
    write(path, &disk_to_string(spec_hash, d, diagnostics)?)
}

pub fn load_disk(path: &Path) -> Result<DiskRecord> {
    parse_disk(&read(path)?)
}

// ----- moduli grids -----

pub const GRID_INDEX: &str = "index.toml";

#[derive(Serialize, Deserialize)]
struct GridIndex {
    version: u32,
    spec_hash: String,
    k: usize,
    seed: u64,
    entries: Vec<IndexEntry>,
}

#[derive(Serialize, Deserialize)]
struct IndexEntry {
    file: String,
    u0: Vec<String>,
    residual: f64,
}

pub fn disk_file_name(i: usize) -> String {
    format!("disk_{i:05}.toml")
}

/// Writes every disk of the grid plus the index into `dir`.
pub fn save_grid(
    dir: &Path,
    grid: &ModuliGrid,
    diagnostics: Option<&[DiskDiagnostics]>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(grid.entries.len());
    for (i, e) in grid.entries.iter().enumerate() {
        let name = disk_file_name(i);
        let diag = diagnostics.map(|d| &d[i]);
        save_disk(&dir.join(&name), &grid.spec_hash, &e.solution, diag)?;
        entries.push(IndexEntry { file: name, u0: complexes(&e.u0.vector()), residual: e.solution.residual });
    }
    let index = GridIndex {
        version: FORMAT_VERSION,
        spec_hash: grid.spec_hash.clone(),
        k: grid.k,
        seed: grid.seed,
        entries,
    };
    write(&dir.join(GRID_INDEX), &to_toml(&index)?)
}

pub fn load_grid(dir: &Path) -> Result<ModuliGrid> {
    let index: GridIndex = from_toml(&read(&dir.join(GRID_INDEX))?)?;
    check_version(index.version)?;
    let mut entries = Vec::with_capacity(index.entries.len());
    for e in &index.entries {
        let rec = load_disk(&dir.join(&e.file))?;
        if rec.spec_hash != index.spec_hash {
            return Err(ZollError::Format(format!("{}: spec hash mismatch", e.file)));
        }
        let [a, b] = parse_complexes::<2>(&e.u0, "u0")?;
        entries.push(GridEntry { u0: P1Point::try_new(a, b)?, solution: rec.disk });
    }
    Ok(ModuliGrid { spec_hash: index.spec_hash, k: index.k, seed: index.seed, entries })
}

// ----- geodesics and plot data -----

pub const GEODESIC_HEADER: &str = "u0_1_re,u0_1_im,u0_2_re,u0_2_im,tau,x,y,z";

/// One node per line: the `u0` representative, `tau`, and the sphere point
/// of `u0`. Metadata goes in leading `#` lines.
pub fn geodesic_to_csv(g: &Geodesic) -> String {
    let mut s = String::new();
    let [a, b] = g.z_label.vector();
    let _ = writeln!(s, "# version = {FORMAT_VERSION}");
    let _ = writeln!(s, "# z_label = {};{}", format_complex(a), format_complex(b));
    let _ = writeln!(s, "# closed = {}", g.closed);
    let _ = writeln!(s, "# arclength = {:.16e}", g.arclength);
    let _ = writeln!(s, "# closure_gap = {:.16e}", g.closure_gap);
    let _ = writeln!(s, "{GEODESIC_HEADER}");
    for n in &g.nodes {
        let [a, b] = n.u0.vector();
        let x = n.u0.to_sphere();
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            a.re, a.im, b.re, b.im, n.tau, x[0], x[1], x[2]
        );
    }
    s
}

pub fn parse_geodesic_csv(s: &str) -> Result<Geodesic> {
    let mut label = None;
    let mut closed = false;
    let mut arclength = f64::NAN;
    let mut closure_gap = f64::NAN;
    let mut nodes = Vec::new();
    for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(meta) = line.strip_prefix('#') {
            let Some((k, v)) = meta.split_once('=') else { continue };
            let v = v.trim();
            let num = |v: &str| v.parse::<f64>().map_err(|e| ZollError::Format(e.to_string()));
            match k.trim() {
                "version" => check_version(v.parse().map_err(|_| ZollError::Format(v.into()))?)?,
                "z_label" => {
                    let (a, b) = v.split_once(';').ok_or(ZollError::Format("z_label".into()))?;
                    label = Some(P1Point::try_new(parse_complex(a)?, parse_complex(b)?)?);
                }
                "closed" => closed = v == "true",
                "arclength" => arclength = num(v)?,
                "closure_gap" => closure_gap = num(v)?,
                _ => {}
            }
            continue;
        }
        if line == GEODESIC_HEADER {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| ZollError::Format(format!("{t:?}: {e}"))))
            .collect::<Result<_>>()?;
        if f.len() != 8 {
            return Err(ZollError::Format(format!("geodesic row has {} fields", f.len())));
        }
        nodes.push(GeodesicNode {
            u0: P1Point::try_new(C::new(f[0], f[1]), C::new(f[2], f[3]))?,
            tau: f[4],
        });
    }
    Ok(Geodesic {
        z_label: label.ok_or(ZollError::Format("missing z_label".into()))?,
        nodes,
        closed,
        arclength,
        closure_gap,
    })
}

/// Sphere coordinates of `n` boundary points of the disk, as CSV.
pub fn boundary_polyline_csv(d: &DiskSolution, n: usize) -> String {
    let mut s = String::from("tau,x,y,z\n");
    for j in 0..=n {
        let tau = std::f64::consts::TAU * j as f64 / n as f64;
        let x = d.point(C::from_polar(1.0, tau)).to_sphere();
        let _ = writeln!(s, "{tau:.16e},{:.16e},{:.16e},{:.16e}", x[0], x[1], x[2]);
    }
    s
}

/// Writes `body` to `dir/name`, creating `dir`.
pub fn write_output(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    write(&path, body)?;
    Ok(path)
}
