//! Python bindings. Points of CP1 are pairs of Python complex numbers.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use zoll_core::io;
use zoll_core::moduli::{self, ModuliGrid, SweepOptions, TraceMode, TraceOptions};
use zoll_core::projcore::{self, C};
use zoll_core::rhsolver::{self, DiskSolution};
use zoll_core::surface::{self, DocilityReport, KahlerData, SurfacePatch};
use zoll_core::{P1Point, SolverOptions, SurfaceSpec, ZollError};

create_exception!(zoll, SolverError, PyRuntimeError, "A numerical failure in the solver layers.");

fn err(e: ZollError) -> PyErr {
    match e.root() {
        ZollError::InvalidInput(_) | ZollError::Format(_) | ZollError::Io(_) => {
            PyValueError::new_err(e.to_string())
        }
        r => SolverError::new_err(format!("{}: {e}", r.kind())),
    }
}

fn point(u: (C, C)) -> PyResult<P1Point> {
    P1Point::try_new(u.0, u.1).map_err(err)
}

fn pair(u: &P1Point) -> (C, C) {
    let [a, b] = u.vector();
    (a, b)
}

#[pyclass(name = "Spec", module = "zoll", from_py_object)]
#[derive(Clone)]
struct PySpec(SurfaceSpec);

#[pymethods]
impl PySpec {
    /// The zero field: the standard real projective plane.
    #[staticmethod]
    fn standard() -> Self {
        PySpec(SurfaceSpec::standard())
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        io::parse_spec(text).map(PySpec).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        io::load_spec(&path).map(PySpec).map_err(err)
    }

    /// Field given as `[(powers, coeff), ...]` with integer powers and real
    /// 3-vector coefficients.
    #[staticmethod]
    #[pyo3(signature = (terms, scale = 1.0, flow_steps = 64))]
    fn from_terms(terms: Vec<([u32; 3], [f64; 3])>, scale: f64, flow_steps: usize) -> PyResult<Self> {
        let field = surface::SphereField::from_terms(&terms).map_err(err)?;
        SurfaceSpec::new(field, scale, flow_steps).map(PySpec).map_err(err)
    }

    fn to_toml(&self) -> PyResult<String> {
        io::spec_to_string(&self.0).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_spec(&path, &self.0).map_err(err)
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.0.scale
    }

    fn with_scale(&self, t: f64) -> Self {
        PySpec(self.0.with_scale(t))
    }

    fn hash(&self) -> String {
        self.0.hash()
    }

    /// The involution of the sphere whose graph lifts the surface.
    fn phi(&self, u: (C, C)) -> PyResult<(C, C)> {
        Ok(pair(&self.0.phi(&point(u)?)))
    }

    #[pyo3(signature = (samples = surface::DEFAULT_DOCILITY_SAMPLES))]
    fn check_docility<'py>(&self, py: Python<'py>, samples: usize) -> PyResult<Bound<'py, PyDict>> {
        let r = surface::check_docility_with(&self.0, samples);
        docility_dict(py, &r)
    }

    /// `(kahler_total, integral over the lift)`.
    fn kahler_integrals(&self, py: Python<'_>) -> PyResult<(f64, f64)> {
        let kd = KahlerData::new(self.0.clone());
        py.detach(|| {
            Ok((
                surface::kahler_total(&kd)?,
                surface::omega_pullback_area(&kd, &SurfacePatch::GraphOfPhi)?,
            ))
        })
        .map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Spec(terms={}, scale={}, flow_steps={})", self.0.field.terms.len(), self.0.scale, self.0.flow_steps)
    }
}

fn docility_dict<'py>(py: Python<'py>, r: &DocilityReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("passed", r.passed)?;
    d.set_item("samples", r.samples)?;
    d.set_item("min_fixed_point_gap", r.min_fixed_point_gap)?;
    d.set_item("min_orientation_det", r.min_orientation_det)?;
    d.set_item("max_involution_defect", r.max_involution_defect)?;
    let failures: Vec<String> = r.failures.iter().map(|f| format!("{f:?}")).collect();
    d.set_item("failures", failures)?;
    Ok(d)
}

#[pyclass(name = "Disk", module = "zoll", from_py_object)]
#[derive(Clone)]
struct PyDisk(DiskSolution);

#[pymethods]
impl PyDisk {
    /// Solves by continuation from the round disk at `u0`.
    #[staticmethod]
    #[pyo3(signature = (spec, u0, k = rhsolver::DEFAULT_K, initial_step = 1.0 / 16.0))]
    fn solve(py: Python<'_>, spec: &PySpec, u0: (C, C), k: usize, initial_step: f64) -> PyResult<Self> {
        let u0 = point(u0)?;
        let opts = SolverOptions { initial_step, ..SolverOptions::with_k(k) };
        py.detach(|| rhsolver::solve_disk_with(&spec.0, &u0, &opts)).map(PyDisk).map_err(err)
    }

    #[staticmethod]
    fn round(u0: (C, C), k: usize) -> PyResult<Self> {
        Ok(PyDisk(rhsolver::round_disk(&point(u0)?, k)))
    }

    /// Returns `(disk, spec_hash)`.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<(Self, String)> {
        let rec = io::load_disk(&path).map_err(err)?;
        Ok((PyDisk(rec.disk), rec.spec_hash))
    }

    fn save(&self, path: PathBuf, spec: &PySpec) -> PyResult<()> {
        io::save_disk(&path, &spec.0.hash(), &self.0, None).map_err(err)
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    #[getter]
    fn u0(&self) -> (C, C) {
        pair(&self.0.u0)
    }

    #[getter]
    fn coeffs(&self) -> Vec<C> {
        self.0.coeffs.clone()
    }

    fn spectral_tail(&self) -> f64 {
        self.0.spectral_tail()
    }

    /// The point `ch(zeta)` of CP1.
    fn point(&self, zeta: C) -> (C, C) {
        pair(&self.0.point(zeta))
    }

    /// Sphere coordinates of `n` equally spaced boundary points.
    fn boundary(&self, n: usize) -> Vec<[f64; 3]> {
        (0..n)
            .map(|j| {
                let tau = std::f64::consts::TAU * j as f64 / n as f64;
                self.0.point(C::from_polar(1.0, tau)).to_sphere()
            })
            .collect()
    }

    fn boundary_residual(&self, spec: &PySpec) -> PyResult<f64> {
        rhsolver::boundary_residual(&self.0, &spec.0).map_err(err)
    }

    fn aligned_distance(&self, other: &PyDisk) -> PyResult<f64> {
        self.0.aligned_distance(&other.0).map_err(err)
    }

    fn diagnostics<'py>(&self, py: Python<'py>, spec: &PySpec) -> PyResult<Bound<'py, PyDict>> {
        let g = py.detach(|| rhsolver::disk_diagnostics(&self.0, &spec.0)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("residual", g.residual)?;
        d.set_item("lift_winding", g.lift_winding)?;
        d.set_item("normal_maslov", g.normal_maslov)?;
        d.set_item("total_maslov", g.total_maslov)?;
        d.set_item("lift_area", g.lift_area)?;
        d.set_item("half_area", g.half_area)?;
        d.set_item("diagonal_gap", g.diagonal_gap)?;
        d.set_item("center_gap", g.center_gap)?;
        d.set_item("boundary_injectivity_gap", g.boundary_injectivity_gap)?;
        d.set_item("interior_gap", g.interior_gap)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Disk(k={}, residual={:.3e})", self.0.k(), self.0.residual)
    }
}

#[pyclass(name = "Grid", module = "zoll", from_py_object)]
#[derive(Clone)]
struct PyGrid(ModuliGrid);

#[pymethods]
impl PyGrid {
    #[staticmethod]
    #[pyo3(signature = (spec, n, k = rhsolver::DEFAULT_K, seed = 0))]
    fn sweep(py: Python<'_>, spec: &PySpec, n: usize, k: usize, seed: u64) -> PyResult<Self> {
        let opts = SweepOptions { seed, ..SweepOptions::new(n, k) };
        py.detach(|| moduli::sweep_with(&spec.0, &opts)).map(PyGrid).map_err(err)
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        io::load_grid(&dir).map(PyGrid).map_err(err)
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        io::save_grid(&dir, &self.0, None).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.entries.len()
    }

    fn __getitem__(&self, i: usize) -> PyResult<PyDisk> {
        self.0
            .entries
            .get(i)
            .map(|e| PyDisk(e.solution.clone()))
            .ok_or_else(|| pyo3::exceptions::PyIndexError::new_err(i))
    }

    fn kappa_check(&self) -> f64 {
        moduli::kappa_check(&self.0)
    }
}

/// Traces the geodesic labelled by `z`; returns a dict with `nodes`
/// (list of `(u0, tau)`), `sphere` (S^2 polyline), `closed`, `arclength`
/// and `closure_gap`.
#[pyfunction]
#[pyo3(signature = (spec, grid, z, reverse = false, interpolated = false))]
fn trace_geodesic<'py>(
    py: Python<'py>,
    spec: &PySpec,
    grid: &PyGrid,
    z: (C, C),
    reverse: bool,
    interpolated: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let z = point(z)?;
    let opts = TraceOptions {
        reverse,
        mode: if interpolated { TraceMode::Interpolated } else { TraceMode::Exact },
        ..TraceOptions::default()
    };
    let g = py.detach(|| moduli::trace_geodesic_with(&spec.0, &grid.0, &z, &opts)).map_err(err)?;
    let d = PyDict::new(py);
    let nodes: Vec<((C, C), f64)> = g.nodes.iter().map(|n| (pair(&n.u0), n.tau)).collect();
    let sphere: Vec<[f64; 3]> = g.nodes.iter().map(|n| n.u0.to_sphere()).collect();
    d.set_item("nodes", nodes)?;
    d.set_item("sphere", sphere)?;
    d.set_item("closed", g.closed)?;
    d.set_item("arclength", g.arclength)?;
    d.set_item("closure_gap", g.closure_gap)?;
    Ok(d)
}

/// `(verdict, max_im, mean_im)` over `m` lattice points.
#[pyfunction]
#[pyo3(signature = (spec, m = 1000))]
fn lagrangian_report(py: Python<'_>, spec: &PySpec, m: usize) -> PyResult<(String, f64, f64)> {
    let r = py.detach(|| moduli::lagrangian_report(&spec.0, m)).map_err(err)?;
    Ok((r.verdict.as_str().to_string(), r.max_im, r.mean_im))
}

#[pyfunction]
fn chordal(u: (C, C), w: (C, C)) -> PyResult<f64> {
    Ok(projcore::chordal(&point(u)?, &point(w)?))
}

#[pyfunction]
fn antipodal(u: (C, C)) -> PyResult<(C, C)> {
    Ok(pair(&projcore::antipodal(&point(u)?)))
}

/// Unnormalized branched cover; symmetric in its arguments.
#[pyfunction]
fn pi_map(u: (C, C), v: (C, C)) -> PyResult<[C; 3]> {
    Ok(projcore::pi_map_raw(&point(u)?, &point(v)?))
}

#[pymodule]
fn zoll(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_class::<PyDisk>()?;
    m.add_class::<PyGrid>()?;
    m.add_function(wrap_pyfunction!(trace_geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(lagrangian_report, m)?)?;
    m.add_function(wrap_pyfunction!(chordal, m)?)?;
    m.add_function(wrap_pyfunction!(antipodal, m)?)?;
    m.add_function(wrap_pyfunction!(pi_map, m)?)?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    Ok(())
}
