//! Run configuration files.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use superiorization::eval::IterateTrace;
use superiorization::feasibility::{
    run_basic, BasicAlgorithm, IndexVector, PlanBounds, PlanSource, StopRule, StringPlan,
};
use superiorization::geometry::ConstraintFamily;
use superiorization::objectives::{Objective, ObjectiveSpec};
use superiorization::superiorize::{
    run_superiorized, AuxiliaryAlgorithm, DirectionSource, Mode, Restart, Schedule,
    SuperiorizerConfig, DEFAULT_STEP_BUDGET,
};

/// A problem with the user's input rather than with the computation.
/// Maps to exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn field_error(field: &str, msg: impl fmt::Display) -> UsageError {
    UsageError(format!("invalid config field `{field}`: {msg}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Basic,
    Weak,
    Strong,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub a: f64,
    #[serde(default)]
    pub restart: Option<Restart>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionConfig {
    #[default]
    Subgradient,
    Dfs {
        probe_radius: f64,
        trials: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Kaczmarz,
    Cimmino,
    Fixed,
    Cyclic,
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qbar: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `fixed` only
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strings: Option<Vec<Vec<usize>>>,
    /// `fixed` only
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AuxiliaryConfig {
    /// `B(y) = y − step · ∇φ(y)` on the run's objective.
    GradientDescent { step: f64 },
}

fn default_objective() -> ObjectiveSpec {
    ObjectiveSpec::SquaredNorm
}

/// One arm: how to perturb, which basic algorithm and which objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: ModeName,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub direction: DirectionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopRule>,
    #[serde(default)]
    pub plan: PlanConfig,
    #[serde(default = "default_objective")]
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auxiliary: Option<AuxiliaryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_budget: Option<usize>,
    #[serde(default)]
    pub record_events: bool,
}

/// A configuration resolved against a concrete family.
#[derive(Debug, Clone)]
pub struct BuiltRun {
    pub algo: BasicAlgorithm,
    pub objective: Objective,
    /// `None` for the basic arm.
    pub superiorizer: Option<SuperiorizerConfig>,
    pub fingerprint: String,
}

impl BuiltRun {
    pub fn execute(&self, x0: &[f64], stop: &StopRule) -> superiorization::Result<IterateTrace> {
        let mut trace = match &self.superiorizer {
            None => run_basic(&self.algo, x0, stop, Some(&self.objective))?,
            Some(cfg) => run_superiorized(&self.algo, &self.objective, cfg, x0, stop)?,
        };
        trace.meta.fingerprint = format!("{}#{}", trace.meta.fingerprint, self.fingerprint);
        Ok(trace)
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, UsageError> {
        serde_json::from_str(text).map_err(|e| UsageError(format!("malformed run config: {e}")))
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// The stop rule, which must be present for standalone runs.
    pub fn require_stop(&self) -> Result<StopRule, UsageError> {
        let stop = self
            .stop
            .ok_or_else(|| field_error("stop", "missing; set max_iters and/or epsilon"))?;
        stop.validate().map_err(|e| field_error("stop", e))?;
        Ok(stop)
    }

    fn basic_algorithm(&self, family: ConstraintFamily) -> Result<BasicAlgorithm, UsageError> {
        let m = family.len();
        let p = &self.plan;
        let bounds = match (p.delta, p.qbar) {
            (None, None) => PlanBounds::standard(m),
            (delta, qbar) => PlanBounds::new(
                m,
                delta.unwrap_or(PlanBounds::standard(m).delta),
                qbar.unwrap_or(m),
            )
            .map_err(|e| field_error("plan", e))?,
        };
        let custom_bounds = p.delta.is_some() || p.qbar.is_some();
        let source = match p.strategy {
            Strategy::Kaczmarz if !custom_bounds => return Ok(BasicAlgorithm::kaczmarz(family)),
            Strategy::Cimmino if !custom_bounds => return Ok(BasicAlgorithm::cimmino(family)),
            Strategy::Kaczmarz => PlanSource::Fixed(StringPlan::kaczmarz(m)),
            Strategy::Cimmino => PlanSource::Fixed(StringPlan::cimmino(m)),
            Strategy::Cyclic => PlanSource::CyclicRotation,
            Strategy::SeededRandom => PlanSource::SeededRandom {
                seed: p
                    .seed
                    .ok_or_else(|| field_error("plan.seed", "required by seeded_random"))?,
            },
            Strategy::Fixed => {
                let strings = p
                    .strings
                    .as_ref()
                    .ok_or_else(|| field_error("plan.strings", "required by fixed"))?
                    .iter()
                    .map(|s| IndexVector::new(s.clone()))
                    .collect::<superiorization::Result<Vec<_>>>()
                    .map_err(|e| field_error("plan.strings", e))?;
                let weights = p
                    .weights
                    .clone()
                    .ok_or_else(|| field_error("plan.weights", "required by fixed"))?;
                PlanSource::Fixed(
                    StringPlan::new(m, strings, weights).map_err(|e| field_error("plan", e))?,
                )
            }
        };
        BasicAlgorithm::new(family, source, bounds).map_err(|e| field_error("plan", e))
    }

    fn schedule(&self) -> Result<Schedule, UsageError> {
        let s = self
            .schedule
            .as_ref()
            .ok_or_else(|| field_error("schedule", "required by perturbed modes"))?;
        let mut schedule = Schedule::geometric(s.a).map_err(|e| field_error("schedule.a", e))?;
        if let Some(r) = s.restart {
            schedule = schedule
                .with_restart(r)
                .map_err(|e| field_error("schedule.restart", e))?;
        }
        Ok(schedule)
    }

    /// Resolve against `family`. Every failure here is the config's fault.
    pub fn build(&self, family: &ConstraintFamily) -> Result<BuiltRun, UsageError> {
        let algo = self.basic_algorithm(family.clone())?;
        let objective = self
            .objective
            .build()
            .map_err(|e| field_error("objective", e))?;
        if let ObjectiveSpec::Quadratic { c, .. } = &self.objective {
            if c.len() != family.dim() {
                return Err(field_error(
                    "objective.c",
                    format!(
                        "dimension {} does not match the family's {}",
                        c.len(),
                        family.dim()
                    ),
                ));
            }
        }
        let superiorizer = match self.mode {
            ModeName::Basic => None,
            mode => {
                let n = self
                    .n
                    .ok_or_else(|| field_error("N", "required by perturbed modes"))?;
                let mode = match mode {
                    ModeName::Weak => Mode::Weak,
                    ModeName::Strong => Mode::Strong,
                    ModeName::Generic => match &self.auxiliary {
                        Some(AuxiliaryConfig::GradientDescent { step }) => {
                            if !(*step > 0.0 && step.is_finite()) {
                                return Err(field_error("auxiliary.step", "must be positive"));
                            }
                            Mode::Generic(
                                AuxiliaryAlgorithm::gradient_descent(objective.clone(), *step)
                                    .map_err(|e| field_error("auxiliary", e))?,
                            )
                        }
                        None => return Err(field_error("auxiliary", "required by generic mode")),
                    },
                    ModeName::Basic => unreachable!(),
                };
                let direction = match self.direction {
                    DirectionConfig::Subgradient => DirectionSource::Subgradient,
                    DirectionConfig::Dfs {
                        probe_radius,
                        trials,
                        seed,
                    } => DirectionSource::DerivativeFree {
                        probe_radius,
                        trials,
                        seed,
                    },
                };
                let mut cfg =
                    SuperiorizerConfig::new(n, mode, self.schedule()?).with_direction(direction);
                cfg.step_budget = self.step_budget.unwrap_or(DEFAULT_STEP_BUDGET);
                cfg.record_events = self.record_events;
                cfg.validate(&objective).map_err(|e| {
                    let field = match e {
                        superiorization::Error::NoSubgradient => "direction",
                        _ if self.n == Some(0) => "N",
                        _ if self.step_budget == Some(0) => "step_budget",
                        _ => "direction",
                    };
                    field_error(field, e)
                })?;
                Some(cfg)
            }
        };
        Ok(BuiltRun {
            algo,
            objective,
            superiorizer,
            fingerprint: self.fingerprint(),
        })
    }
}
