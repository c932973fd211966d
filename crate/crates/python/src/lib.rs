//! Python bindings for the curveflow solver.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use curveflow::geometry::{self, NodalVectorField, PeriodicMesh, Point};
use curveflow::manufactured::{self, ErrorMonitor};
use curveflow::stepper::{self, StepRule, TimeGrid};
use curveflow::{assembly, linsolve, scenario::Scenario, Error};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::InvalidMesh(_)
        | Error::Dimension { .. }
        | Error::InvalidParameter(_)
        | Error::UnknownScenario { .. }
        | Error::Config(_) => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn points(xy: Vec<(f64, f64)>) -> NodalVectorField {
    NodalVectorField(xy.into_iter().map(|(x, y)| Point::new(x, y)).collect())
}

fn pairs(p: &[Point]) -> Vec<(f64, f64)> {
    p.iter().map(|p| (p.x, p.y)).collect()
}

/// Periodic partition of the unit interval.
#[pyclass(name = "Mesh", frozen)]
struct PyMesh(PeriodicMesh);

#[pymethods]
impl PyMesh {
    /// Mesh from strictly increasing breakpoints `0 = r_0 < ... < r_J = 1`.
    #[new]
    fn new(breakpoints: Vec<f64>) -> PyResult<Self> {
        PeriodicMesh::from_breakpoints(breakpoints)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn uniform(elements: usize) -> PyResult<Self> {
        PeriodicMesh::uniform(elements).map(Self).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Mesh(J={}, max_h={})", self.0.len(), self.0.max_h())
    }

    fn nodes(&self) -> Vec<f64> {
        (0..self.0.len()).map(|i| self.0.node(i)).collect()
    }

    fn lengths(&self) -> Vec<f64> {
        self.0.lengths().to_vec()
    }
}

#[pyfunction]
fn make_uniform_mesh(elements: usize) -> PyResult<PyMesh> {
    PeriodicMesh::uniform(elements).map(PyMesh).map_err(to_py)
}

/// Per-element `(q, tangent, normal)` lists for the polygon `points`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn element_frame(
    mesh: &PyMesh,
    points_xy: Vec<(f64, f64)>,
) -> PyResult<(Vec<f64>, Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let frame = geometry::element_frame(&mesh.0, &points(points_xy)).map_err(to_py)?;
    Ok((
        frame.length_element.clone(),
        pairs(&frame.tangent),
        pairs(&frame.normal),
    ))
}

#[pyfunction]
fn mesh_ratio(mesh: &PyMesh, points_xy: Vec<(f64, f64)>) -> PyResult<f64> {
    geometry::mesh_ratio(&mesh.0, &points(points_xy)).map_err(to_py)
}

/// Solves the periodic tridiagonal system; `sub[0]` and `sup[n-1]` are the
/// wrap-around entries.
#[pyfunction]
fn solve_cyclic_tridiag(
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    rhs: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let n = diag.len();
    for (name, v) in [("sub", &sub), ("sup", &sup), ("rhs", &rhs)] {
        if v.len() != n {
            return Err(PyValueError::new_err(format!(
                "{name} has length {}, expected {n}",
                v.len()
            )));
        }
    }
    let a = assembly::CyclicTridiagonal { sub, diag, sup };
    linsolve::solve_cyclic_tridiag(&a, &rhs).map_err(to_py)
}

/// Final state of a scenario run.
#[pyclass(name = "RunResult", frozen, get_all)]
struct PyRunResult {
    time: f64,
    steps: usize,
    positions: Vec<(f64, f64)>,
    concentration: Vec<f64>,
    max_residual: f64,
    /// `(E1, E2, E3, E4)` when the scenario has an exact solution.
    errors: Option<(f64, f64, f64, f64)>,
}

#[pymethods]
impl PyRunResult {
    fn __repr__(&self) -> String {
        format!(
            "RunResult(time={}, steps={}, J={})",
            self.time,
            self.steps,
            self.positions.len()
        )
    }
}

/// Runs a named scenario; unset arguments take the scenario defaults.
#[pyfunction]
#[pyo3(signature = (name, elements=None, dt=None, alpha=None, d=None, final_time=None))]
fn run_scenario(
    py: Python<'_>,
    name: &str,
    elements: Option<usize>,
    dt: Option<&str>,
    alpha: Option<f64>,
    d: Option<f64>,
    final_time: Option<f64>,
) -> PyResult<PyRunResult> {
    let sc: Scenario = name.parse().map_err(to_py)?;
    let defaults = sc.defaults();
    let rule: StepRule = match dt {
        Some(s) => s.parse().map_err(to_py)?,
        None => defaults.rule,
    };
    let alpha = alpha.unwrap_or(defaults.alpha);
    let d = d.unwrap_or(defaults.diffusivity);
    let elements = elements.unwrap_or(defaults.elements);
    let final_time = final_time.unwrap_or(defaults.final_time);
    py.detach(move || {
        let setup = sc.setup(alpha, d)?;
        let mesh = PeriodicMesh::uniform(elements)?;
        let grid = TimeGrid::new(final_time, rule, mesh.max_h())?;
        let mut monitor = setup.exact.clone().map(ErrorMonitor::new);
        let out = match monitor.as_mut() {
            Some(m) => stepper::run(&mesh, &setup.initial, &setup.params, &grid, &mut [m])?,
            None => stepper::run(&mesh, &setup.initial, &setup.params, &grid, &mut [])?,
        };
        Ok(PyRunResult {
            time: out.state.time,
            steps: out.log.steps,
            positions: pairs(out.state.positions.values()),
            concentration: out.state.concentration.values().to_vec(),
            max_residual: out.log.max_residual,
            errors: monitor.map(|m| {
                let r = m.report();
                (r.e1, r.e2, r.e3, r.e4)
            }),
        })
    })
    .map_err(to_py)
}

#[pyclass(name = "ConvergenceTable", frozen)]
struct PyConvergenceTable(manufactured::ConvergenceTable);

#[pymethods]
impl PyConvergenceTable {
    /// `(J, dt, (E1, E2, E3, E4), eocs or None)` per resolution.
    #[getter]
    #[allow(clippy::type_complexity)]
    fn rows(&self) -> Vec<(usize, f64, [f64; 4], Option<[f64; 4]>)> {
        self.0
            .rows
            .iter()
            .map(|r| (r.elements, r.dt, r.errors.as_array(), r.eoc))
            .collect()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn render(&self) -> String {
        self.0.render_scaled()
    }

    fn __repr__(&self) -> String {
        self.0.render_scaled()
    }
}

#[pyfunction]
#[pyo3(signature = (resolutions, dt="h2", alpha=1.0, final_time=1.0))]
fn convergence_study(
    py: Python<'_>,
    resolutions: Vec<usize>,
    dt: &str,
    alpha: f64,
    final_time: f64,
) -> PyResult<PyConvergenceTable> {
    let rule: StepRule = dt.parse().map_err(to_py)?;
    py.detach(move || manufactured::convergence_study(&resolutions, rule, alpha, final_time))
        .map(PyConvergenceTable)
        .map_err(to_py)
}

#[pymodule]
fn curveflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyRunResult>()?;
    m.add_class::<PyConvergenceTable>()?;
    m.add_function(wrap_pyfunction!(make_uniform_mesh, m)?)?;
    m.add_function(wrap_pyfunction!(element_frame, m)?)?;
    m.add_function(wrap_pyfunction!(mesh_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(solve_cyclic_tridiag, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    m.add("SCENARIOS", Scenario::ALL.map(|s| s.name()).to_vec())?;
    Ok(())
}
