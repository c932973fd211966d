//! Time stepping: each step solves the linear curve system with geometry
//! lagged at the old time level, extracts normal and tangential velocities,
//! then solves the linear concentration system on the new curve.

use std::fmt;
use std::sync::Arc;

use crate::assembly::{
    curve_rhs, curve_stiffness_build, scalar_rhs, scalar_stiffness_build, transport_build,
    BlockCyclicTridiagonal, CyclicTridiagonal, LumpedBlockMass, LumpedScalarMass,
};
use crate::error::{Error, Result};
use crate::geometry::{
    element_frame, ElementFrame, NodalScalarField, NodalVectorField, PeriodicMesh, Point,
};
use crate::linsolve::{
    block_relative_residual, relative_residual, solve_block_cyclic, solve_cyclic_tridiag,
};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Reaction term `g(v, w)`.
pub type ReactionFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `S(rho, t)`.
pub type CurveSource = Arc<dyn Fn(f64, f64) -> Point + Send + Sync>;
/// `S_w(rho, t)`.
pub type ScalarSource = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type CurveSampler = Arc<dyn Fn(f64) -> Point + Send + Sync>;

#[derive(Clone)]
pub struct SchemeParams {
    alpha: f64,
    diffusivity: f64,
    pub forcing: ScalarFn,
    pub reaction: ReactionFn,
    pub curve_source: Option<CurveSource>,
    pub scalar_source: Option<ScalarSource>,
}

impl SchemeParams {
    /// Unforced flow (`f = 0`, `g = 0`, no sources).
    pub fn new(alpha: f64, diffusivity: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !(diffusivity > 0.0 && diffusivity.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "diffusivity must be positive, got {diffusivity}"
            )));
        }
        Ok(Self {
            alpha,
            diffusivity,
            forcing: Arc::new(|_| 0.0),
            reaction: Arc::new(|_, _| 0.0),
            curve_source: None,
            scalar_source: None,
        })
    }

    pub fn with_forcing(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.forcing = Arc::new(f);
        self
    }

    pub fn with_reaction(mut self, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.reaction = Arc::new(g);
        self
    }

    pub fn with_sources(
        mut self,
        curve: Option<CurveSource>,
        scalar: Option<ScalarSource>,
    ) -> Self {
        self.curve_source = curve;
        self.scalar_source = scalar;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }
}

impl fmt::Debug for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchemeParams")
            .field("alpha", &self.alpha)
            .field("diffusivity", &self.diffusivity)
            .field("curve_source", &self.curve_source.is_some())
            .field("scalar_source", &self.scalar_source.is_some())
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `dt = h^2`
    HSquared,
    /// `dt = c h`
    ProportionalToH(f64),
    Fixed(f64),
}

impl StepRule {
    pub fn step_size(&self, h: f64) -> f64 {
        match *self {
            StepRule::HSquared => h * h,
            StepRule::ProportionalToH(c) => c * h,
            StepRule::Fixed(dt) => dt,
        }
    }
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRule::HSquared => write!(f, "h2"),
            StepRule::ProportionalToH(c) if *c == 0.5 => write!(f, "half-h"),
            StepRule::ProportionalToH(c) => write!(f, "{c}h"),
            StepRule::Fixed(dt) => write!(f, "fixed:{dt}"),
        }
    }
}

impl std::str::FromStr for StepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidParameter(format!(
                "unknown dt rule '{s}' (expected h2, half-h, fixed:<dt>)"
            ))
        };
        let rule = match s {
            "h2" => StepRule::HSquared,
            "half-h" => StepRule::ProportionalToH(0.5),
            _ => {
                if let Some(v) = s.strip_prefix("fixed:") {
                    StepRule::Fixed(v.parse().map_err(|_| bad())?)
                } else if let Some(v) = s.strip_suffix('h') {
                    StepRule::ProportionalToH(v.parse().map_err(|_| bad())?)
                } else {
                    return Err(bad());
                }
            }
        };
        if !(rule.step_size(1.0) > 0.0 && rule.step_size(1.0).is_finite()) {
            return Err(bad());
        }
        Ok(rule)
    }
}

/// Uniform steps up to `final_time`; when the nominal step does not divide
/// the interval the last step is clipped to land on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    final_time: f64,
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(final_time: f64, rule: StepRule, h: f64) -> Result<Self> {
        Self::with_step(final_time, rule.step_size(h))
    }

    pub fn with_step(final_time: f64, dt: f64) -> Result<Self> {
        if !(final_time >= 0.0 && final_time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "final time must be >= 0, got {final_time}"
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if final_time == 0.0 {
            return Ok(Self {
                final_time,
                dt,
                steps: 0,
            });
        }
        let ratio = final_time / dt;
        let nearest = ratio.round();
        if nearest >= 1.0 && (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
            let steps = nearest as usize;
            return Ok(Self {
                final_time,
                dt: final_time / steps as f64,
                steps,
            });
        }
        Ok(Self {
            final_time,
            dt,
            steps: ratio.ceil() as usize,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    /// Nominal (non-clipped) step.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Time of level `n`; `time(steps()) == final_time()` exactly.
    pub fn time(&self, n: usize) -> f64 {
        if n >= self.steps {
            self.final_time
        } else {
            n as f64 * self.dt
        }
    }

    /// Size of step `n` (from level `n - 1` to `n`), `n >= 1`.
    pub fn step_size(&self, n: usize) -> f64 {
        self.time(n) - self.time(n - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub step: usize,
    pub time: f64,
    pub positions: NodalVectorField,
    pub concentration: NodalScalarField,
    pub frame: ElementFrame,
}

impl StepState {
    pub fn new(
        mesh: &PeriodicMesh,
        step: usize,
        time: f64,
        positions: NodalVectorField,
        concentration: NodalScalarField,
    ) -> Result<Self> {
        mesh.check_len(concentration.len())?;
        let frame = element_frame(mesh, &positions)?;
        Ok(Self {
            step,
            time,
            positions,
            concentration,
            frame,
        })
    }

    /// Lumped total `(q W, 1)^h`.
    pub fn lumped_total(&self, mesh: &PeriodicMesh) -> f64 {
        LumpedScalarMass::new(mesh, &self.frame).integrate(&self.concentration)
    }
}

/// Endpoint values of `V = D_t X . nu` and `Psi = D_t X . tau` inside each
/// element, as `[left node, right node]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityFields {
    pub normal: Vec<[f64; 2]>,
    pub tangential: Vec<[f64; 2]>,
}

impl VelocityFields {
    pub fn max_tangential(&self) -> f64 {
        self.tangential
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvabilityWarning {
    /// `dt * max |Psi|^2`
    pub value: f64,
    /// `4 d`
    pub bound: f64,
}

impl fmt::Display for SolvabilityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dt * max|Psi|^2 = {:e} >= 4d = {:e}; uniqueness of the concentration step is not guaranteed",
            self.value, self.bound
        )
    }
}

fn sample_curve_source(mesh: &PeriodicMesh, params: &SchemeParams, t: f64) -> Option<Vec<Point>> {
    params
        .curve_source
        .as_ref()
        .map(|s| (0..mesh.len()).map(|i| s(mesh.node(i), t)).collect())
}

fn sample_scalar_source(mesh: &PeriodicMesh, params: &SchemeParams, t: f64) -> Option<Vec<f64>> {
    params
        .scalar_source
        .as_ref()
        .map(|s| (0..mesh.len()).map(|i| s(mesh.node(i), t)).collect())
}

/// Matrix and right-hand side of the curve system at level `t_new`.
pub fn curve_system(
    mesh: &PeriodicMesh,
    old: &StepState,
    params: &SchemeParams,
    dt: f64,
    t_new: f64,
) -> Result<(BlockCyclicTridiagonal, Vec<Point>)> {
    let mass = LumpedBlockMass::new(mesh, &old.frame, params.alpha);
    let mut matrix = BlockCyclicTridiagonal::from_scalar(&curve_stiffness_build(mesh));
    for (d, m) in matrix.diag.iter_mut().zip(&mass.0) {
        *d += m / dt;
    }
    let source = sample_curve_source(mesh, params, t_new);
    let mut rhs = curve_rhs(
        mesh,
        &old.frame,
        &old.concentration,
        params.forcing.as_ref(),
        source.as_deref(),
    )?;
    for ((b, m), x) in rhs.iter_mut().zip(&mass.0).zip(old.positions.values()) {
        *b += m * x / dt;
    }
    Ok((matrix, rhs))
}

pub fn curve_step(
    mesh: &PeriodicMesh,
    old: &StepState,
    params: &SchemeParams,
    dt: f64,
) -> Result<NodalVectorField> {
    curve_step_checked(mesh, old, params, dt).map(|(x, _)| x)
}

fn curve_step_checked(
    mesh: &PeriodicMesh,
    old: &StepState,
    params: &SchemeParams,
    dt: f64,
) -> Result<(NodalVectorField, f64)> {
    let (matrix, rhs) = curve_system(mesh, old, params, dt, old.time + dt)?;
    let x = solve_block_cyclic(&matrix, &rhs)?;
    let residual = block_relative_residual(&matrix, &x, &rhs);
    Ok((NodalVectorField(x), residual))
}

pub fn velocities(
    mesh: &PeriodicMesh,
    x_new: &NodalVectorField,
    x_old: &NodalVectorField,
    dt: f64,
    frame_new: &ElementFrame,
) -> Result<VelocityFields> {
    mesh.check_len(x_new.len())?;
    mesh.check_len(x_old.len())?;
    mesh.check_len(frame_new.len())?;
    let rate: Vec<Point> = x_new
        .values()
        .iter()
        .zip(x_old.values())
        .map(|(a, b)| (a - b) / dt)
        .collect();
    let mut normal = Vec::with_capacity(mesh.len());
    let mut tangential = Vec::with_capacity(mesh.len());
    for e in 0..mesh.len() {
        let (l, r) = mesh.element_nodes(e);
        let nu = frame_new.normal[e];
        let tau = frame_new.tangent[e];
        normal.push([rate[l].dot(&nu), rate[r].dot(&nu)]);
        tangential.push([rate[l].dot(&tau), rate[r].dot(&tau)]);
    }
    Ok(VelocityFields { normal, tangential })
}

/// Flags steps where `dt max|Psi|^2 >= 4 d`.
pub fn check_solvability(
    vel: &VelocityFields,
    dt: f64,
    diffusivity: f64,
) -> Option<SolvabilityWarning> {
    let psi = vel.max_tangential();
    let value = dt * psi * psi;
    let bound = 4.0 * diffusivity;
    (value >= bound).then_some(SolvabilityWarning { value, bound })
}

/// Matrix and right-hand side of the concentration system on the new curve.
pub fn scalar_system(
    mesh: &PeriodicMesh,
    old: &StepState,
    frame_new: &ElementFrame,
    vel: &VelocityFields,
    params: &SchemeParams,
    dt: f64,
    t_new: f64,
) -> Result<(CyclicTridiagonal, Vec<f64>)> {
    let mass = LumpedScalarMass::new(mesh, frame_new);
    let mut matrix = CyclicTridiagonal::from_diagonal(mass.0.iter().map(|m| m / dt).collect());
    matrix.add_scaled(&scalar_stiffness_build(mesh, frame_new), params.diffusivity);
    matrix.add_scaled(&transport_build(mesh, &vel.tangential)?, 1.0);
    let source = sample_scalar_source(mesh, params, t_new);
    let rhs = scalar_rhs(
        mesh,
        frame_new,
        &old.frame,
        &old.concentration,
        &vel.normal,
        params.reaction.as_ref(),
        source.as_deref(),
        dt,
    )?;
    Ok((matrix, rhs))
}

pub fn scalar_step(
    mesh: &PeriodicMesh,
    old: &StepState,
    frame_new: &ElementFrame,
    vel: &VelocityFields,
    params: &SchemeParams,
    dt: f64,
) -> Result<NodalScalarField> {
    let (matrix, rhs) = scalar_system(mesh, old, frame_new, vel, params, dt, old.time + dt)?;
    solve_cyclic_tridiag(&matrix, &rhs).map(NodalScalarField)
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: StepState,
    pub velocities: VelocityFields,
    pub warning: Option<SolvabilityWarning>,
    /// Largest relative residual of the two solves.
    pub residual: f64,
}

pub fn coupled_step(
    mesh: &PeriodicMesh,
    old: &StepState,
    params: &SchemeParams,
    dt: f64,
) -> Result<StepOutcome> {
    let t_new = old.time + dt;
    let (positions, curve_residual) = curve_step_checked(mesh, old, params, dt)?;
    let frame = element_frame(mesh, &positions)?;
    let vel = velocities(mesh, &positions, &old.positions, dt, &frame)?;
    let warning = check_solvability(&vel, dt, params.diffusivity);
    if let Some(w) = &warning {
        log::warn!("step {} (t = {t_new}): {w}", old.step + 1);
    }
    let (matrix, rhs) = scalar_system(mesh, old, &frame, &vel, params, dt, t_new)?;
    let w = solve_cyclic_tridiag(&matrix, &rhs)?;
    let residual = curve_residual.max(relative_residual(&matrix, &w, &rhs));
    Ok(StepOutcome {
        state: StepState {
            step: old.step + 1,
            time: t_new,
            positions,
            concentration: NodalScalarField(w),
            frame,
        },
        velocities: vel,
        warning,
        residual,
    })
}

/// Initial curve and concentration as maps on the periodic unit interval.
#[derive(Clone)]
pub struct InitialData {
    pub curve: CurveSampler,
    pub concentration: ScalarFn,
}

impl InitialData {
    pub fn new(
        curve: impl Fn(f64) -> Point + Send + Sync + 'static,
        concentration: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            curve: Arc::new(curve),
            concentration: Arc::new(concentration),
        }
    }

    /// Nodal interpolants at level 0.
    pub fn interpolate(&self, mesh: &PeriodicMesh) -> Result<StepState> {
        StepState::new(
            mesh,
            0,
            0.0,
            NodalVectorField::interpolate(mesh, |r| (self.curve)(r)),
            NodalScalarField::interpolate(mesh, |r| (self.concentration)(r)),
        )
    }
}

/// Callback invoked on the initial state and after every step.
pub trait Observer {
    fn start(&mut self, _mesh: &PeriodicMesh, _state: &StepState) -> Result<()> {
        Ok(())
    }

    fn observe(&mut self, mesh: &PeriodicMesh, outcome: &StepOutcome, dt: f64) -> Result<()>;
}

#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub steps: usize,
    pub warnings: Vec<(usize, SolvabilityWarning)>,
    pub max_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: StepState,
    pub log: RunLog,
}

pub fn run(
    mesh: &PeriodicMesh,
    initial: &InitialData,
    params: &SchemeParams,
    grid: &TimeGrid,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutput> {
    let at = |step: usize, time: f64| {
        move |e: Error| Error::AtStep {
            step,
            time,
            source: Box::new(e),
        }
    };
    let mut state = initial.interpolate(mesh).map_err(at(0, 0.0))?;
    for obs in observers.iter_mut() {
        obs.start(mesh, &state).map_err(at(0, 0.0))?;
    }
    let mut log = RunLog::default();
    for n in 1..=grid.steps() {
        let dt = grid.step_size(n);
        let mut outcome = coupled_step(mesh, &state, params, dt).map_err(at(n, grid.time(n)))?;
        // pin the clock to the grid so t_N == T exactly
        outcome.state.time = grid.time(n);
        if let Some(w) = outcome.warning {
            log.warnings.push((n, w));
        }
        log.max_residual = log.max_residual.max(outcome.residual);
        for obs in observers.iter_mut() {
            obs.observe(mesh, &outcome, dt)
                .map_err(at(n, grid.time(n)))?;
        }
        state = outcome.state;
        log.steps = n;
    }
    Ok(RunOutput { state, log })
}
