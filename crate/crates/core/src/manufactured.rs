//! Manufactured solutions, the source terms they induce, discrete error
//! monitors and the refinement study that measures convergence orders.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{perp, NodalScalarField, NodalVectorField, PeriodicMesh, Point};
use crate::stepper::{
    run, CurveSource, InitialData, Observer, ReactionFn, ScalarFn, ScalarSource, SchemeParams,
    StepOutcome, StepRule, StepState, TimeGrid,
};

/// A smooth parametrised curve `x(rho, t)` with a concentration `w(rho, t)`
/// and their hand-derived partial derivatives.
pub trait ExactSolution: Send + Sync {
    fn x(&self, rho: f64, t: f64) -> Point;
    fn x_t(&self, rho: f64, t: f64) -> Point;
    fn x_rho(&self, rho: f64, t: f64) -> Point;
    fn x_rhorho(&self, rho: f64, t: f64) -> Point;
    fn x_trho(&self, rho: f64, t: f64) -> Point;
    fn w(&self, rho: f64, t: f64) -> f64;
    fn w_t(&self, rho: f64, t: f64) -> f64;
    fn w_rho(&self, rho: f64, t: f64) -> f64;
    fn w_rhorho(&self, rho: f64, t: f64) -> f64;

    fn tangent(&self, rho: f64, t: f64) -> Point {
        self.x_rho(rho, t).normalize()
    }

    fn normal(&self, rho: f64, t: f64) -> Point {
        perp(&self.tangent(rho, t))
    }

    fn normal_velocity(&self, rho: f64, t: f64) -> f64 {
        self.x_t(rho, t).dot(&self.normal(rho, t))
    }

    fn tangential_velocity(&self, rho: f64, t: f64) -> f64 {
        self.x_t(rho, t).dot(&self.tangent(rho, t))
    }

    fn curvature(&self, rho: f64, t: f64) -> f64 {
        self.x_rhorho(rho, t).dot(&self.normal(rho, t)) / self.x_rho(rho, t).norm_squared()
    }
}

/// Ellipse with oscillating semi-axes `1 +- sin(2 pi t) / 2` carrying
/// `w = t cos(8 pi rho) + (1 - t) sin(6 pi rho)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OscillatingEllipse;

impl OscillatingEllipse {
    fn axes(t: f64) -> (f64, f64) {
        let s = 0.5 * (2.0 * PI * t).sin();
        (1.0 + s, 1.0 - s)
    }

    fn axes_rate(t: f64) -> (f64, f64) {
        let c = PI * (2.0 * PI * t).cos();
        (c, -c)
    }

    fn trig(rho: f64) -> (f64, f64) {
        let (s, c) = (2.0 * PI * rho).sin_cos();
        (c, s)
    }
}

impl ExactSolution for OscillatingEllipse {
    fn x(&self, rho: f64, t: f64) -> Point {
        let (a, b) = Self::axes(t);
        let (c, s) = Self::trig(rho);
        Point::new(a * c, b * s)
    }

    fn x_t(&self, rho: f64, t: f64) -> Point {
        let (a, b) = Self::axes_rate(t);
        let (c, s) = Self::trig(rho);
        Point::new(a * c, b * s)
    }

    fn x_rho(&self, rho: f64, t: f64) -> Point {
        let (a, b) = Self::axes(t);
        let (c, s) = Self::trig(rho);
        Point::new(-a * s, b * c) * (2.0 * PI)
    }

    fn x_rhorho(&self, rho: f64, t: f64) -> Point {
        -self.x(rho, t) * (4.0 * PI * PI)
    }

    fn x_trho(&self, rho: f64, t: f64) -> Point {
        let (a, b) = Self::axes_rate(t);
        let (c, s) = Self::trig(rho);
        Point::new(-a * s, b * c) * (2.0 * PI)
    }

    fn w(&self, rho: f64, t: f64) -> f64 {
        t * (8.0 * PI * rho).cos() + (1.0 - t) * (6.0 * PI * rho).sin()
    }

    fn w_t(&self, rho: f64, _t: f64) -> f64 {
        (8.0 * PI * rho).cos() - (6.0 * PI * rho).sin()
    }

    fn w_rho(&self, rho: f64, t: f64) -> f64 {
        -8.0 * PI * t * (8.0 * PI * rho).sin() + 6.0 * PI * (1.0 - t) * (6.0 * PI * rho).cos()
    }

    fn w_rhorho(&self, rho: f64, t: f64) -> f64 {
        -64.0 * PI * PI * t * (8.0 * PI * rho).cos()
            - 36.0 * PI * PI * (1.0 - t) * (6.0 * PI * rho).sin()
    }
}

/// Round circle of initial radius `r0` shrinking by curve shortening,
/// `r(t) = sqrt(r0^2 - 2t)`, with zero concentration.
#[derive(Debug, Clone, Copy)]
pub struct ShrinkingCircle {
    pub initial_radius: f64,
}

impl ShrinkingCircle {
    pub fn radius(&self, t: f64) -> f64 {
        (self.initial_radius * self.initial_radius - 2.0 * t).sqrt()
    }

    /// Time at which the circle vanishes.
    pub fn extinction_time(&self) -> f64 {
        0.5 * self.initial_radius * self.initial_radius
    }

    fn unit(rho: f64) -> Point {
        let (s, c) = (2.0 * PI * rho).sin_cos();
        Point::new(c, s)
    }
}

impl ExactSolution for ShrinkingCircle {
    fn x(&self, rho: f64, t: f64) -> Point {
        Self::unit(rho) * self.radius(t)
    }

    fn x_t(&self, rho: f64, t: f64) -> Point {
        -Self::unit(rho) / self.radius(t)
    }

    fn x_rho(&self, rho: f64, t: f64) -> Point {
        perp(&Self::unit(rho)) * (2.0 * PI * self.radius(t))
    }

    fn x_rhorho(&self, rho: f64, t: f64) -> Point {
        -Self::unit(rho) * (4.0 * PI * PI * self.radius(t))
    }

    fn x_trho(&self, rho: f64, t: f64) -> Point {
        -perp(&Self::unit(rho)) * (2.0 * PI / self.radius(t))
    }

    fn w(&self, _rho: f64, _t: f64) -> f64 {
        0.0
    }
    fn w_t(&self, _rho: f64, _t: f64) -> f64 {
        0.0
    }
    fn w_rho(&self, _rho: f64, _t: f64) -> f64 {
        0.0
    }
    fn w_rhorho(&self, _rho: f64, _t: f64) -> f64 {
        0.0
    }
}

/// Residual of the curve equation
/// `alpha x_t + (1 - alpha)(x_t . nu) nu = x_rhorho / |x_rho|^2 + f(w) nu`.
pub fn curve_source_at(
    exact: &dyn ExactSolution,
    alpha: f64,
    forcing: &dyn Fn(f64) -> f64,
    rho: f64,
    t: f64,
) -> Point {
    let xt = exact.x_t(rho, t);
    let xr = exact.x_rho(rho, t);
    let nu = exact.normal(rho, t);
    xt * alpha + nu * ((1.0 - alpha) * xt.dot(&nu))
        - exact.x_rhorho(rho, t) / xr.norm_squared()
        - nu * forcing(exact.w(rho, t))
}

/// Residual of the parametrised concentration equation
/// `w_t - psi w_rho / |x_rho| - (d / |x_rho|)(w_rho / |x_rho|)_rho - kappa v w = g(v, w)`.
pub fn scalar_source_at(
    exact: &dyn ExactSolution,
    diffusivity: f64,
    reaction: &dyn Fn(f64, f64) -> f64,
    rho: f64,
    t: f64,
) -> f64 {
    let xr = exact.x_rho(rho, t);
    let len = xr.norm();
    let w = exact.w(rho, t);
    let w_rho = exact.w_rho(rho, t);
    let v = exact.normal_velocity(rho, t);
    let psi = exact.tangential_velocity(rho, t);
    let kappa = exact.curvature(rho, t);
    let diffusion = (diffusivity / len)
        * (exact.w_rhorho(rho, t) / len - w_rho * xr.dot(&exact.x_rhorho(rho, t)) / len.powi(3));
    exact.w_t(rho, t) - psi * w_rho / len - diffusion - kappa * v * w - reaction(v, w)
}

pub fn source_s(exact: Arc<dyn ExactSolution>, alpha: f64, forcing: ScalarFn) -> CurveSource {
    Arc::new(move |rho, t| curve_source_at(exact.as_ref(), alpha, forcing.as_ref(), rho, t))
}

pub fn source_sw(
    exact: Arc<dyn ExactSolution>,
    diffusivity: f64,
    reaction: ReactionFn,
) -> ScalarSource {
    Arc::new(move |rho, t| scalar_source_at(exact.as_ref(), diffusivity, reaction.as_ref(), rho, t))
}

/// `|u|_0^2` for a piecewise-linear `u`, integrated exactly.
pub fn l2_squared(mesh: &PeriodicMesh, u: &[f64]) -> f64 {
    (0..mesh.len())
        .map(|e| {
            let (l, r) = mesh.element_nodes(e);
            let (a, b) = (u[l], u[r]);
            mesh.h(e) / 3.0 * (a * a + a * b + b * b)
        })
        .sum()
}

/// `|u|_1^2` for a piecewise-linear `u`.
pub fn h1_squared(mesh: &PeriodicMesh, u: &[f64]) -> f64 {
    (0..mesh.len())
        .map(|e| {
            let (l, r) = mesh.element_nodes(e);
            (u[r] - u[l]).powi(2) / mesh.h(e)
        })
        .sum()
}

pub fn l2_squared_vector(mesh: &PeriodicMesh, u: &[Point]) -> f64 {
    let (x, y) = split(u);
    l2_squared(mesh, &x) + l2_squared(mesh, &y)
}

pub fn h1_squared_vector(mesh: &PeriodicMesh, u: &[Point]) -> f64 {
    let (x, y) = split(u);
    h1_squared(mesh, &x) + h1_squared(mesh, &y)
}

fn split(u: &[Point]) -> (Vec<f64>, Vec<f64>) {
    u.iter().map(|p| (p.x, p.y)).unzip()
}

/// `E = I_h x - X` and `Z = I_h w - W` at the state's time.
pub fn nodal_errors(
    mesh: &PeriodicMesh,
    state: &StepState,
    exact: &dyn ExactSolution,
) -> (Vec<Point>, Vec<f64>) {
    let t = state.time;
    let x = NodalVectorField::interpolate(mesh, |r| exact.x(r, t));
    let w = NodalScalarField::interpolate(mesh, |r| exact.w(r, t));
    let e = x
        .values()
        .iter()
        .zip(state.positions.values())
        .map(|(a, b)| a - b)
        .collect();
    let z = w
        .values()
        .iter()
        .zip(state.concentration.values())
        .map(|(a, b)| a - b)
        .collect();
    (e, z)
}

/// The four monitored quantities
/// `E1 = sup |Z|_0^2`, `E2 = sum dt |Z|_1^2`, `E3 = sup |E|_1^2`,
/// `E4 = sum dt |D_t E|_0^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

impl ErrorReport {
    pub fn as_array(&self) -> [f64; 4] {
        [self.e1, self.e2, self.e3, self.e4]
    }
}

/// Per-step contributions of one time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepErrors {
    pub z_l2: f64,
    pub z_h1: f64,
    pub e_h1: f64,
    /// `|D_t E^n|_0^2`, zero at level 0.
    pub rate_l2: f64,
}

pub fn error_norms(
    mesh: &PeriodicMesh,
    state: &StepState,
    exact: &dyn ExactSolution,
    dt: f64,
    previous: Option<&[Point]>,
) -> (StepErrors, Vec<Point>) {
    let (e, z) = nodal_errors(mesh, state, exact);
    let rate_l2 = match previous {
        Some(prev) => {
            let rate: Vec<Point> = e.iter().zip(prev).map(|(a, b)| (a - b) / dt).collect();
            l2_squared_vector(mesh, &rate)
        }
        None => 0.0,
    };
    let errors = StepErrors {
        z_l2: l2_squared(mesh, &z),
        z_h1: h1_squared(mesh, &z),
        e_h1: h1_squared_vector(mesh, &e),
        rate_l2,
    };
    (errors, e)
}

/// Observer accumulating [`ErrorReport`] along a run.
pub struct ErrorMonitor {
    exact: Arc<dyn ExactSolution>,
    report: ErrorReport,
    previous: Vec<Point>,
}

impl ErrorMonitor {
    pub fn new(exact: Arc<dyn ExactSolution>) -> Self {
        Self {
            exact,
            report: ErrorReport::default(),
            previous: Vec::new(),
        }
    }

    pub fn report(&self) -> ErrorReport {
        self.report
    }
}

impl Observer for ErrorMonitor {
    fn start(&mut self, mesh: &PeriodicMesh, state: &StepState) -> Result<()> {
        let (errors, e) = error_norms(mesh, state, self.exact.as_ref(), 1.0, None);
        self.report = ErrorReport {
            e1: errors.z_l2,
            e2: 0.0,
            e3: errors.e_h1,
            e4: 0.0,
        };
        self.previous = e;
        Ok(())
    }

    fn observe(&mut self, mesh: &PeriodicMesh, outcome: &StepOutcome, dt: f64) -> Result<()> {
        let (errors, e) = error_norms(
            mesh,
            &outcome.state,
            self.exact.as_ref(),
            dt,
            Some(&self.previous),
        );
        let r = &mut self.report;
        r.e1 = r.e1.max(errors.z_l2);
        r.e2 += dt * errors.z_h1;
        r.e3 = r.e3.max(errors.e_h1);
        r.e4 += dt * errors.rate_l2;
        self.previous = e;
        Ok(())
    }
}

/// The convergence benchmark: oscillating ellipse, `f(w) = 2w`, `g = 0`,
/// `d = 1`, with the induced sources switched on.
pub struct ConvergenceProblem {
    pub exact: Arc<dyn ExactSolution>,
    pub initial: InitialData,
    pub params: SchemeParams,
}

impl ConvergenceProblem {
    pub const DIFFUSIVITY: f64 = 1.0;

    pub fn new(alpha: f64) -> Result<Self> {
        let exact: Arc<dyn ExactSolution> = Arc::new(OscillatingEllipse);
        let params = SchemeParams::new(alpha, Self::DIFFUSIVITY)?
            .with_forcing(|w| 2.0 * w)
            .with_reaction(|_, _| 0.0);
        let s = source_s(exact.clone(), alpha, params.forcing.clone());
        let sw = source_sw(exact.clone(), Self::DIFFUSIVITY, params.reaction.clone());
        let params = params.with_sources(Some(s), Some(sw));
        let (ex, ew) = (exact.clone(), exact.clone());
        let initial = InitialData::new(move |r| ex.x(r, 0.0), move |r| ew.w(r, 0.0));
        Ok(Self {
            exact,
            initial,
            params,
        })
    }

    pub fn solve(&self, elements: usize, rule: StepRule, final_time: f64) -> Result<ErrorReport> {
        let mesh = PeriodicMesh::uniform(elements)?;
        let grid = TimeGrid::new(final_time, rule, mesh.max_h())?;
        let mut monitor = ErrorMonitor::new(self.exact.clone());
        run(
            &mesh,
            &self.initial,
            &self.params,
            &grid,
            &mut [&mut monitor],
        )
        .map_err(|e| Error::Study {
            elements,
            dt: grid.dt(),
            source: Box::new(e),
        })?;
        Ok(monitor.report())
    }
}

/// `log(E_coarse / E_fine) / log(J_fine / J_coarse)`.
pub fn eoc(coarse: f64, fine: f64, j_coarse: usize, j_fine: usize) -> f64 {
    (coarse / fine).ln() / (j_fine as f64 / j_coarse as f64).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub elements: usize,
    pub dt: f64,
    pub errors: ErrorReport,
    pub eoc: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub alpha: f64,
    pub rule: StepRule,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Unscaled values; the first row has empty eoc cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("J,E1,eoc1,E2,eoc2,E3,eoc3,E4,eoc4\n");
        for row in &self.rows {
            let _ = write!(out, "{}", row.elements);
            for (k, e) in row.errors.as_array().iter().enumerate() {
                let _ = write!(out, ",{e:.16e},");
                if let Some(eoc) = row.eoc {
                    let _ = write!(out, "{:.6}", eoc[k]);
                }
            }
            out.push('\n');
        }
        out
    }

    /// Fixed-width table with `E1` and `E4` multiplied by 10.
    pub fn render_scaled(&self) -> String {
        let mut out = format!("alpha = {}, dt rule = {}\n", self.alpha, self.rule);
        let _ = writeln!(
            out,
            "{:>5} | {:>10} | {:>5} | {:>10} | {:>5} | {:>10} | {:>5} | {:>10} | {:>5}",
            "J", "E1 x 10", "eoc1", "E2", "eoc2", "E3", "eoc3", "E4 x 10", "eoc4"
        );
        for row in &self.rows {
            let e = row.errors;
            let cells = [e.e1 * 10.0, e.e2, e.e3, e.e4 * 10.0];
            let _ = write!(out, "{:>5}", row.elements);
            for (k, v) in cells.iter().enumerate() {
                let eoc = row.eoc.map_or("-".to_string(), |r| format!("{:.2}", r[k]));
                let _ = write!(out, " | {v:>10.7} | {eoc:>5}");
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the convergence benchmark at every resolution (in parallel) and
/// tabulates the errors with eocs between consecutive rows.
pub fn convergence_study(
    j_list: &[usize],
    rule: StepRule,
    alpha: f64,
    final_time: f64,
) -> Result<ConvergenceTable> {
    if j_list.is_empty() {
        return Err(Error::InvalidParameter("empty resolution list".into()));
    }
    if j_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "resolutions must be strictly increasing, got {j_list:?}"
        )));
    }
    let problem = ConvergenceProblem::new(alpha)?;
    let reports: Vec<ErrorReport> = j_list
        .par_iter()
        .map(|&j| problem.solve(j, rule, final_time))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(j_list.len());
    for (k, (&j, report)) in j_list.iter().zip(&reports).enumerate() {
        let eoc = (k > 0).then(|| {
            let prev = reports[k - 1].as_array();
            let cur = report.as_array();
            std::array::from_fn(|i| eoc(prev[i], cur[i], j_list[k - 1], j))
        });
        rows.push(ConvergenceRow {
            elements: j,
            dt: rule.step_size(1.0 / j as f64),
            errors: *report,
            eoc,
        });
    }
    Ok(ConvergenceTable { alpha, rule, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const FD_STEP: f64 = 1e-5;
    const FD_TOL: f64 = 1e-7;

    /// Five-point central difference.
    fn central<T>(f: impl Fn(f64) -> T, at: f64) -> T
    where
        T: std::ops::Sub<Output = T>
            + std::ops::Mul<f64, Output = T>
            + std::ops::Div<f64, Output = T>,
    {
        let h = FD_STEP;
        ((f(at + h) - f(at - h)) * 8.0 - (f(at + 2.0 * h) - f(at - 2.0 * h))) / (12.0 * h)
    }

    fn check_derivatives(exact: &dyn ExactSolution, rho: f64, t: f64) {
        let close = |a: Point, b: Point| (a - b).amax() <= FD_TOL;
        assert!(close(exact.x_t(rho, t), central(|s| exact.x(rho, s), t)));
        assert!(close(exact.x_rho(rho, t), central(|r| exact.x(r, t), rho)));
        assert!(close(
            exact.x_rhorho(rho, t),
            central(|r| exact.x_rho(r, t), rho)
        ));
        assert!(close(
            exact.x_trho(rho, t),
            central(|s| exact.x_rho(rho, s), t)
        ));
        assert!((exact.w_t(rho, t) - central(|s| exact.w(rho, s), t)).abs() <= FD_TOL);
        assert!((exact.w_rho(rho, t) - central(|r| exact.w(r, t), rho)).abs() <= FD_TOL);
        assert!((exact.w_rhorho(rho, t) - central(|r| exact.w_rho(r, t), rho)).abs() <= FD_TOL);
    }

    proptest! {
        #[test]
        fn ellipse_derivatives_match_differences(rho in 0.0..1.0f64, t in 0.0..1.0f64) {
            check_derivatives(&OscillatingEllipse, rho, t);
        }

        #[test]
        fn circle_derivatives_match_differences(rho in 0.0..1.0f64, t in 0.0..0.4f64) {
            check_derivatives(&ShrinkingCircle { initial_radius: 1.0 }, rho, t);
        }

        #[test]
        fn frame_is_orthonormal(rho in 0.0..1.0f64, t in 0.0..1.0f64) {
            let e = OscillatingEllipse;
            let (tau, nu) = (e.tangent(rho, t), e.normal(rho, t));
            prop_assert!((tau.norm() - 1.0).abs() < 1e-14);
            prop_assert!((nu.norm() - 1.0).abs() < 1e-14);
            prop_assert!(tau.dot(&nu).abs() < 1e-14);
        }

        #[test]
        fn circle_sources_vanish(rho in 0.0..1.0f64, t in 0.0..0.45f64, alpha in 0.05..1.0f64) {
            let c = ShrinkingCircle { initial_radius: 1.0 };
            prop_assert!(curve_source_at(&c, alpha, &|_| 0.0, rho, t).amax() < 1e-11);
            prop_assert!(scalar_source_at(&c, 1.0, &|_, _| 0.0, rho, t).abs() < 1e-12);
        }
    }

    #[test]
    fn sources_at_origin() {
        let e = OscillatingEllipse;
        let s = curve_source_at(&e, 1.0, &|w| 2.0 * w, 0.0, 0.0);
        assert_relative_eq!(s.x, PI + 1.0, epsilon = 1e-13);
        assert!(s.y.abs() < 1e-13);
        assert_relative_eq!(
            scalar_source_at(&e, 1.0, &|_, _| 0.0, 0.0, 0.0),
            1.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn circle_geometry() {
        let c = ShrinkingCircle {
            initial_radius: 1.0,
        };
        assert_eq!(c.extinction_time(), 0.5);
        assert_relative_eq!(c.radius(0.25), 0.5f64.sqrt());
        assert_relative_eq!(c.curvature(0.3, 0.0), 1.0, epsilon = 1e-14);
        assert_relative_eq!(
            c.normal_velocity(0.3, 0.25),
            1.0 / 0.5f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn norm_examples() {
        let mesh = PeriodicMesh::uniform(10).unwrap();
        assert_relative_eq!(l2_squared(&mesh, &[1.0; 10]), 1.0, epsilon = 1e-15);
        assert_eq!(h1_squared(&mesh, &[1.0; 10]), 0.0);
        let mut hat = vec![0.0; 10];
        hat[3] = 1.0;
        let h = 0.1;
        assert_relative_eq!(l2_squared(&mesh, &hat), 2.0 * h / 3.0, epsilon = 1e-15);
        assert_relative_eq!(h1_squared(&mesh, &hat), 2.0 / h, epsilon = 1e-12);
        let v: Vec<Point> = hat.iter().map(|&a| Point::new(a, 2.0 * a)).collect();
        assert_relative_eq!(
            l2_squared_vector(&mesh, &v),
            5.0 * 2.0 * h / 3.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn interpolant_has_zero_error() {
        let mesh = PeriodicMesh::uniform(16).unwrap();
        let e = OscillatingEllipse;
        let t = 0.3;
        let x = NodalVectorField::interpolate(&mesh, |r| e.x(r, t));
        let w = NodalScalarField::interpolate(&mesh, |r| e.w(r, t));
        let state = StepState::new(&mesh, 1, t, x, w).unwrap();
        let prev = vec![Point::zeros(); 16];
        let (errors, err) = error_norms(&mesh, &state, &e, 0.01, Some(&prev));
        assert_eq!(
            errors,
            StepErrors {
                z_l2: 0.0,
                z_h1: 0.0,
                e_h1: 0.0,
                rate_l2: 0.0
            }
        );
        assert!(err.iter().all(|p| *p == Point::zeros()));
    }

    #[test]
    fn reference_row_eoc() {
        assert!((eoc(0.1817509, 0.0116485, 30, 60) - 3.96).abs() < 5e-3);
        assert_eq!(eoc(2.0, 2.0, 30, 60), 0.0);
    }

    #[test]
    fn study_rejects_non_increasing_resolutions() {
        for list in [&[30, 30][..], &[60, 30], &[]] {
            assert!(matches!(
                convergence_study(list, StepRule::HSquared, 1.0, 1.0),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn small_study_table_layout() {
        let table = convergence_study(&[8, 16], StepRule::HSquared, 1.0, 0.05).unwrap();
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "J,E1,eoc1,E2,eoc2,E3,eoc3,E4,eoc4");
        assert!(lines[1].starts_with("8,") && lines[1].ends_with(','));
        assert_eq!(lines[2].split(',').count(), 9);
        let row = &table.rows[1];
        assert!(row.eoc.unwrap().iter().all(|v| v.is_finite()));
        assert!(table.render_scaled().contains("E1 x 10"));
    }

    #[test]
    fn monitor_starts_from_interpolated_data() {
        let problem = ConvergenceProblem::new(1.0).unwrap();
        let mesh = PeriodicMesh::uniform(12).unwrap();
        let mut monitor = ErrorMonitor::new(problem.exact.clone());
        let state = problem.initial.interpolate(&mesh).unwrap();
        monitor.start(&mesh, &state).unwrap();
        assert_eq!(monitor.report(), ErrorReport::default());
    }
}
