//! Named experiments: initial data, forcing, reaction and default run
//! parameters.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::manufactured::{ConvergenceProblem, ExactSolution, ShrinkingCircle};
use crate::stepper::{InitialData, SchemeParams, StepRule};

/// Solute concentration in the vapour for the grain-boundary experiment.
pub const VAPOUR_CONCENTRATION: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Convergence,
    Dumbbell,
    GrainBoundary,
    Circle,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Convergence,
        Scenario::Dumbbell,
        Scenario::GrainBoundary,
        Scenario::Circle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Convergence => "convergence",
            Scenario::Dumbbell => "dumbbell",
            Scenario::GrainBoundary => "grain-boundary",
            Scenario::Circle => "circle",
        }
    }

    pub fn defaults(&self) -> ScenarioDefaults {
        match self {
            Scenario::Convergence => ScenarioDefaults {
                elements: 30,
                rule: StepRule::HSquared,
                alpha: 1.0,
                diffusivity: 1.0,
                final_time: 1.0,
                snapshots: vec![],
            },
            Scenario::Dumbbell => ScenarioDefaults {
                elements: 60,
                rule: StepRule::HSquared,
                alpha: 1.0,
                diffusivity: 1.0,
                final_time: 0.15,
                snapshots: vec![0.05, 0.1, 0.15],
            },
            Scenario::GrainBoundary => ScenarioDefaults {
                elements: 60,
                rule: StepRule::Fixed(1e-3),
                alpha: 0.1,
                diffusivity: 1.0,
                final_time: 7.0,
                snapshots: vec![1.5, 3.5, 7.0],
            },
            Scenario::Circle => ScenarioDefaults {
                elements: 128,
                rule: StepRule::Fixed(1e-4),
                alpha: 1.0,
                diffusivity: 1.0,
                final_time: 0.25,
                snapshots: vec![],
            },
        }
    }

    /// Binds initial data and model functions for the given `alpha` and `d`.
    pub fn setup(&self, alpha: f64, diffusivity: f64) -> Result<ScenarioSetup> {
        let base = SchemeParams::new(alpha, diffusivity)?;
        Ok(match self {
            Scenario::Convergence => {
                if diffusivity != ConvergenceProblem::DIFFUSIVITY {
                    return Err(Error::Config(format!(
                        "the convergence scenario is defined for d = 1, got {diffusivity}"
                    )));
                }
                let problem = ConvergenceProblem::new(alpha)?;
                ScenarioSetup {
                    initial: problem.initial,
                    params: problem.params,
                    exact: Some(problem.exact),
                }
            }
            Scenario::Dumbbell => ScenarioSetup {
                initial: InitialData::new(
                    |r| {
                        let (s, c) = (2.0 * PI * r).sin_cos();
                        Point::new(c, (0.9 * c * c + 0.1) * s)
                    },
                    |r| (6.0 * PI * r).sin(),
                ),
                params: base.with_forcing(|w| 0.5 * w * w),
                exact: None,
            },
            Scenario::GrainBoundary => ScenarioSetup {
                initial: InitialData::new(
                    |r| {
                        let (s, c) = (2.0 * PI * r).sin_cos();
                        Point::new(2.0 * c, 4.0 * s)
                    },
                    |_| 0.0,
                ),
                params: base
                    .with_forcing(|w| -w * w)
                    .with_reaction(|v, w| v * w - (VAPOUR_CONCENTRATION - w)),
                exact: None,
            },
            Scenario::Circle => {
                let circle = ShrinkingCircle {
                    initial_radius: 1.0,
                };
                ScenarioSetup {
                    initial: InitialData::new(move |r| circle.x(r, 0.0), |_| 0.0),
                    params: base,
                    exact: Some(Arc::new(circle)),
                }
            }
        })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScenario {
                name: s.to_string(),
                valid: Scenario::ALL.map(|s| s.name()).join(", "),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDefaults {
    pub elements: usize,
    pub rule: StepRule,
    pub alpha: f64,
    pub diffusivity: f64,
    pub final_time: f64,
    pub snapshots: Vec<f64>,
}

#[derive(Clone)]
pub struct ScenarioSetup {
    pub initial: InitialData,
    pub params: SchemeParams,
    /// Known exact solution, when the scenario has one.
    pub exact: Option<Arc<dyn ExactSolution>>,
}
