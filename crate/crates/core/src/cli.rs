//! Command-line front end: configuration, run orchestration and file
//! emission.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{mesh_ratio, PeriodicMesh, Point};
use crate::manufactured::{
    convergence_study, ConvergenceTable, ErrorMonitor, ErrorReport, ShrinkingCircle,
};
use crate::output::{self, BoundingBox, SvgCurve};
use crate::scenario::Scenario;
use crate::stepper::{run, Observer, StepOutcome, StepRule, StepState, TimeGrid};

#[derive(Debug, Parser)]
#[command(
    name = "curveflow",
    version,
    about = "Forced curve shortening flow coupled to diffusion on the curve"
)]
pub struct Args {
    /// convergence | dumbbell | grain-boundary | circle
    #[arg(long, value_name = "NAME")]
    pub scenario: Option<String>,
    /// Number of elements
    #[arg(long = "J", value_name = "J")]
    pub elements: Option<usize>,
    /// Time step rule: h2 | half-h | fixed:<dt>
    #[arg(long, value_name = "RULE")]
    pub dt: Option<StepRule>,
    /// Tangential-motion parameter in (0, 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Diffusivity
    #[arg(long = "d")]
    pub diffusivity: Option<f64>,
    /// Final time
    #[arg(long = "T", value_name = "T")]
    pub final_time: Option<f64>,
    /// Comma-separated snapshot times
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub snapshots: Option<Vec<f64>>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv,svg,table
    #[arg(long, value_name = "LIST")]
    pub emit: Option<EmitFlags>,
    /// Comma-separated resolutions for a convergence sweep
    #[arg(long, value_delimiter = ',', num_args = 1.., value_name = "J,...")]
    pub study: Option<Vec<usize>>,
    /// JSON file with default values for the flags above
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitFlags {
    pub csv: bool,
    pub svg: bool,
    pub table: bool,
}

impl EmitFlags {
    pub const ALL: EmitFlags = EmitFlags {
        csv: true,
        svg: true,
        table: true,
    };
    pub const NONE: EmitFlags = EmitFlags {
        csv: false,
        svg: false,
        table: false,
    };
}

impl FromStr for EmitFlags {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut flags = EmitFlags::NONE;
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match item {
                "csv" => flags.csv = true,
                "svg" => flags.svg = true,
                "table" => flags.table = true,
                "none" => {}
                other => {
                    return Err(Error::Config(format!(
                        "unknown emit flag '{other}' (expected csv, svg, table)"
                    )))
                }
            }
        }
        Ok(flags)
    }
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    #[serde(rename = "J")]
    pub elements: Option<usize>,
    pub dt: Option<String>,
    pub alpha: Option<f64>,
    #[serde(rename = "d")]
    pub diffusivity: Option<f64>,
    #[serde(rename = "T")]
    pub final_time: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub emit: Option<Vec<String>>,
    pub study: Option<Vec<usize>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub elements: usize,
    pub rule: StepRule,
    pub alpha: f64,
    pub diffusivity: f64,
    pub final_time: f64,
    pub snapshots: Vec<f64>,
    pub out: PathBuf,
    pub emit: EmitFlags,
    pub study: Option<Vec<usize>>,
}

impl RunConfig {
    /// Flags take precedence over the file, the file over scenario defaults.
    pub fn resolve(args: Args, file: ConfigFile) -> Result<Self> {
        let name = args
            .scenario
            .or(file.scenario)
            .ok_or_else(|| Error::Config("no scenario given".into()))?;
        let scenario: Scenario = name.parse()?;
        let defaults = scenario.defaults();
        let rule = match (args.dt, file.dt) {
            (Some(r), _) => r,
            (None, Some(s)) => s.parse()?,
            (None, None) => defaults.rule,
        };
        let emit = match (args.emit, file.emit) {
            (Some(e), _) => e,
            (None, Some(list)) => list.join(",").parse()?,
            (None, None) => EmitFlags::ALL,
        };
        let config = RunConfig {
            scenario,
            elements: args.elements.or(file.elements).unwrap_or(defaults.elements),
            rule,
            alpha: args.alpha.or(file.alpha).unwrap_or(defaults.alpha),
            diffusivity: args
                .diffusivity
                .or(file.diffusivity)
                .unwrap_or(defaults.diffusivity),
            final_time: args
                .final_time
                .or(file.final_time)
                .unwrap_or(defaults.final_time),
            snapshots: args
                .snapshots
                .or(file.snapshots)
                .unwrap_or(defaults.snapshots),
            out: args
                .out
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            emit,
            study: args.study.or(file.study),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("d", self.diffusivity),
            ("T", self.final_time),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.alpha > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.elements < 3 {
            return Err(Error::InvalidParameter(format!(
                "J must be at least 3, got {}",
                self.elements
            )));
        }
        if let Some(t) = self
            .snapshots
            .iter()
            .find(|t| !(**t >= 0.0 && t.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "snapshot time {t} is not a non-negative number"
            )));
        }
        if self.study.is_some() && self.scenario != Scenario::Convergence {
            return Err(Error::Config(format!(
                "--study needs the convergence scenario, got {}",
                self.scenario
            )));
        }
        Ok(())
    }
}

/// What a finished invocation produced.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Summary {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

pub fn execute(config: &RunConfig) -> Result<Summary> {
    let needs_dir = config.emit.csv || config.emit.svg || config.emit.table;
    if needs_dir {
        fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    }
    match &config.study {
        Some(list) => execute_study(config, list),
        None => execute_run(config),
    }
}

fn execute_study(config: &RunConfig, list: &[usize]) -> Result<Summary> {
    let table: ConvergenceTable =
        convergence_study(list, config.rule, config.alpha, config.final_time)?;
    let mut summary = Summary::default();
    let rendered = table.render_scaled();
    summary.lines.extend(rendered.lines().map(str::to_string));
    if config.emit.table {
        let csv = config.out.join("study.csv");
        output::write_file(&csv, &table.to_csv())?;
        let txt = config.out.join("study.txt");
        output::write_file(&txt, &rendered)?;
        summary.files.extend([csv, txt]);
    }
    Ok(summary)
}

/// Captures states whose time lies within half a step of a requested
/// snapshot time and tracks the bounding box of the whole run.
struct SnapshotRecorder {
    targets: Vec<f64>,
    taken: Vec<bool>,
    captured: Vec<(f64, StepState)>,
    initial: Option<StepState>,
    view: Option<BoundingBox>,
}

impl SnapshotRecorder {
    fn new(targets: &[f64]) -> Self {
        Self {
            targets: targets.to_vec(),
            taken: vec![false; targets.len()],
            captured: Vec::new(),
            initial: None,
            view: None,
        }
    }

    fn visit(&mut self, state: &StepState, dt: f64) {
        let pts = state.positions.values();
        match &mut self.view {
            Some(bb) => bb.extend(pts),
            None => self.view = Some(BoundingBox::of(pts)),
        }
        for (k, &t) in self.targets.iter().enumerate() {
            if !self.taken[k] && (state.time - t).abs() <= 0.5 * dt {
                self.taken[k] = true;
                self.captured.push((t, state.clone()));
            }
        }
    }

    fn missed(&self) -> Vec<f64> {
        self.targets
            .iter()
            .zip(&self.taken)
            .filter(|(_, taken)| !**taken)
            .map(|(t, _)| *t)
            .collect()
    }
}

impl Observer for SnapshotRecorder {
    fn start(&mut self, _mesh: &PeriodicMesh, state: &StepState) -> Result<()> {
        self.initial = Some(state.clone());
        self.visit(state, 0.0);
        Ok(())
    }

    fn observe(&mut self, _mesh: &PeriodicMesh, outcome: &StepOutcome, dt: f64) -> Result<()> {
        self.visit(&outcome.state, dt);
        Ok(())
    }
}

struct MeshRatioSeries(Vec<(f64, f64)>);

impl Observer for MeshRatioSeries {
    fn start(&mut self, mesh: &PeriodicMesh, state: &StepState) -> Result<()> {
        self.0
            .push((state.time, mesh_ratio(mesh, &state.positions)?));
        Ok(())
    }

    fn observe(&mut self, mesh: &PeriodicMesh, outcome: &StepOutcome, _dt: f64) -> Result<()> {
        self.0.push((
            outcome.state.time,
            mesh_ratio(mesh, &outcome.state.positions)?,
        ));
        Ok(())
    }
}

fn execute_run(config: &RunConfig) -> Result<Summary> {
    let setup = config.scenario.setup(config.alpha, config.diffusivity)?;
    let mesh = PeriodicMesh::uniform(config.elements)?;
    let grid = TimeGrid::new(config.final_time, config.rule, mesh.max_h())?;

    let mut recorder = SnapshotRecorder::new(&config.snapshots);
    let mut ratios = MeshRatioSeries(Vec::with_capacity(grid.steps() + 1));
    let mut monitor = setup.exact.clone().map(ErrorMonitor::new);
    let result = {
        let mut observers: Vec<&mut dyn Observer> = vec![&mut recorder, &mut ratios];
        if let Some(m) = monitor.as_mut() {
            observers.push(m);
        }
        run(&mesh, &setup.initial, &setup.params, &grid, &mut observers)?
    };

    let mut summary = Summary::default();
    summary.line(format!("scenario       {}", config.scenario));
    summary.line(format!("J              {}", config.elements));
    summary.line(format!("alpha          {}", config.alpha));
    summary.line(format!("d              {}", config.diffusivity));
    summary.line(format!(
        "dt rule        {} (dt = {:e})",
        config.rule,
        grid.dt()
    ));
    summary.line(format!("steps          {}", result.log.steps));
    summary.line(format!("final time     {}", result.state.time));
    summary.line(format!("max residual   {:e}", result.log.max_residual));
    summary.line(format!(
        "mesh ratio     {:.6}",
        ratios.0.last().map_or(1.0, |r| r.1)
    ));
    summary.line(format!(
        "mass           {:.12e}",
        result.state.lumped_total(&mesh)
    ));
    if !result.log.warnings.is_empty() {
        let (step, w) = result.log.warnings[0];
        log::warn!(
            "solvability bound exceeded at {} steps (first at step {step}: {:e} >= {:e})",
            result.log.warnings.len(),
            w.value,
            w.bound
        );
        summary.line(format!("warnings       {}", result.log.warnings.len()));
    }
    let errors = monitor.as_ref().map(ErrorMonitor::report);
    if let Some(e) = errors {
        summary.line(format!(
            "errors         E1 {:.6e}  E2 {:.6e}  E3 {:.6e}  E4 {:.6e}",
            e.e1, e.e2, e.e3, e.e4
        ));
    }
    if config.scenario == Scenario::Circle {
        let dev = radius_deviation(result.state.positions.values(), result.state.time);
        summary.line(format!("radius error   {dev:.6e}"));
    }
    for t in recorder.missed() {
        log::warn!(
            "snapshot time {t} not reached (final time {})",
            result.state.time
        );
    }

    emit_run_files(
        config,
        &mesh,
        &recorder,
        &result.state,
        &ratios,
        errors,
        &mut summary,
    )?;
    Ok(summary)
}

/// Largest deviation of the nodal radii from the exact shrinking unit circle.
pub fn radius_deviation(positions: &[Point], time: f64) -> f64 {
    let exact = ShrinkingCircle {
        initial_radius: 1.0,
    }
    .radius(time);
    positions
        .iter()
        .map(|p| (p.norm() - exact).abs())
        .fold(0.0, f64::max)
}

fn emit_run_files(
    config: &RunConfig,
    mesh: &PeriodicMesh,
    recorder: &SnapshotRecorder,
    final_state: &StepState,
    ratios: &MeshRatioSeries,
    errors: Option<ErrorReport>,
    summary: &mut Summary,
) -> Result<()> {
    let dir = &config.out;
    let mut states: Vec<(String, &StepState)> = recorder
        .captured
        .iter()
        .map(|(t, s)| (format!("snapshot_t{t}"), s))
        .collect();
    states.push(("final".to_string(), final_state));
    if let Some(initial) = &recorder.initial {
        states.insert(0, ("initial".to_string(), initial));
    }

    if config.emit.csv {
        for (stem, state) in &states {
            let path = dir.join(format!("{stem}.csv"));
            output::write_snapshot_csv(&path, mesh, state)?;
            summary.files.push(path);
        }
        if config.scenario == Scenario::Dumbbell {
            let mut csv = String::from("t,mesh_ratio\n");
            for (t, r) in &ratios.0 {
                let _ = writeln!(csv, "{t:.16e},{r:.16e}");
            }
            let path = dir.join("mesh_ratio.csv");
            output::write_file(&path, &csv)?;
            summary.files.push(path);
        }
    }
    if config.emit.svg {
        if let (Some(view), Some(initial)) = (&recorder.view, &recorder.initial) {
            for (stem, state) in states.iter().filter(|(stem, _)| stem != "initial") {
                let curves = [
                    SvgCurve {
                        points: initial.positions.values(),
                        stroke: "red",
                    },
                    SvgCurve {
                        points: state.positions.values(),
                        stroke: "blue",
                    },
                ];
                let title = format!("{} t = {}", config.scenario, state.time);
                let path = dir.join(format!("{stem}.svg"));
                output::write_file(&path, &output::svg_document(view, &curves, &title))?;
                summary.files.push(path);
            }
        }
    }
    if config.emit.table {
        if let Some(e) = errors {
            let csv = format!(
                "J,E1,E2,E3,E4\n{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                config.elements, e.e1, e.e2, e.e3, e.e4
            );
            let path = dir.join("errors.csv");
            output::write_file(&path, &csv)?;
            summary.files.push(path);
        }
    }
    Ok(())
}

/// Exit status for an error: 1 for bad input, 2 for failures during a run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::UnknownScenario { .. } | Error::Config(_) | Error::InvalidParameter(_) => 1,
        _ => 2,
    }
}

/// Parses `argv`, runs, prints the summary and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let file = match &args.config {
        Some(path) => match ConfigFile::load(path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        },
        None => ConfigFile::default(),
    };
    if args.scenario.is_none() && file.scenario.is_none() {
        let _ = Args::command()
            .error(
                ErrorKind::MissingRequiredArgument,
                "the following required argument was not provided: --scenario <NAME>",
            )
            .print();
        return 1;
    }
    let outcome = RunConfig::resolve(args, file).and_then(|config| execute(&config));
    match outcome {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
