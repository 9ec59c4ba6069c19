//! Superiorized versions of a basic algorithm.
//!
//! Each outer iteration perturbs the current iterate toward lower objective
//! values with steps drawn from a summable schedule and then applies one
//! feasibility-seeking step:
//!
//! * [`Mode::Weak`]: `N` unconditional steps `y ← y + β v` along
//!   subgradient (or derivative-free) directions.
//! * [`Mode::Strong`]: for each of the `N` perturbations the step index keeps
//!   advancing until the candidate satisfies `φ(z) <= φ(y^k)`.
//! * [`Mode::Generic`]: one step along the normalized displacement
//!   `B(y) − y` of an auxiliary operator `B`.
//!
//! A single [`Schedule`] cursor is shared by every perturbation of a run.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{InnerEvent, IterateTrace, TraceMeta, TraceRecord};
use crate::feasibility::{run_basic, BasicAlgorithm, StopRule};
use crate::linalg::{axpy, check_dim, check_finite, norm, sub, Vector};
use crate::objectives::{derivative_free_direction, subgradient_direction, Direction, Objective};
use crate::seed::mix_seed;

/// Trials allowed per perturbation in strong mode before giving up.
pub const DEFAULT_STEP_BUDGET: usize = 50;

/// Periodic reset of the step index, limited to `budget` resets so that the
/// emitted series stays summable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Restart {
    /// step index `ℓ₀` to restart at
    pub to: u32,
    /// emissions between restarts
    pub every: u64,
    pub budget: u32,
}

/// Geometric step sizes `η_ℓ = a^ℓ` with a monotone cursor.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    base: f64,
    cursor: i64,
    restart: Option<Restart>,
    restarts_used: u32,
    since_restart: u64,
    null: bool,
}

impl Schedule {
    pub fn geometric(base: f64) -> Result<Self> {
        if !(base > 0.0 && base < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "schedule base must lie in (0, 1), got {base}"
            )));
        }
        Ok(Self {
            base,
            cursor: -1,
            restart: None,
            restarts_used: 0,
            since_restart: 0,
            null: false,
        })
    }

    pub fn with_restart(mut self, restart: Restart) -> Result<Self> {
        if restart.every == 0 {
            return Err(Error::InvalidConfig(
                "restart interval must be positive".into(),
            ));
        }
        self.restart = Some(restart);
        Ok(self)
    }

    /// Emits β ≡ 0: perturbations switched off.
    pub fn null() -> Self {
        Self {
            base: 0.5,
            cursor: -1,
            restart: None,
            restarts_used: 0,
            since_restart: 0,
            null: true,
        }
    }

    pub fn is_null(&self) -> bool {
        self.null
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Index ℓ of the last emitted step (−1 before the first emission).
    pub fn cursor(&self) -> i64 {
        self.cursor
    }

    pub fn restarts_used(&self) -> u32 {
        self.restarts_used
    }

    /// Advance the cursor, applying a restart when one is due, and return
    /// `β = a^ℓ`.
    pub fn next_beta(&mut self) -> f64 {
        if self.null {
            return 0.0;
        }
        if let Some(r) = self.restart {
            if self.since_restart == r.every && self.restarts_used < r.budget {
                self.cursor = i64::from(r.to) - 1;
                self.restarts_used += 1;
                self.since_restart = 0;
            }
        }
        self.cursor += 1;
        self.since_restart += 1;
        self.base.powi(self.cursor.min(i32::MAX as i64) as i32)
    }

    /// Upper bound on the sum of every value this schedule can emit.
    pub fn total_bound(&self) -> f64 {
        if self.null {
            return 0.0;
        }
        let segment = 1.0 / (1.0 - self.base);
        match self.restart {
            None => segment,
            Some(r) => segment * (1.0 + f64::from(r.budget) * self.base.powi(r.to as i32)),
        }
    }
}

type Operator = Arc<dyn Fn(&[f64]) -> Vector + Send + Sync>;

/// The auxiliary operator `B` whose displacement drives generic perturbations.
#[derive(Clone)]
pub struct AuxiliaryAlgorithm {
    operator: Operator,
    description: String,
}

impl AuxiliaryAlgorithm {
    pub fn new(
        description: impl Into<String>,
        operator: impl Fn(&[f64]) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            operator: Arc::new(operator),
            description: description.into(),
        }
    }

    /// `B(y) = y − step · s(y)` for a subgradient `s` of `obj`.
    pub fn gradient_descent(obj: Objective, step: f64) -> Result<Self> {
        if !obj.has_subgradient() {
            return Err(Error::NoSubgradient);
        }
        Ok(Self::new(
            format!("gradient-descent(step={step})"),
            move |y| {
                let mut z = y.to_vec();
                // a failing oracle leaves the point fixed, i.e. no perturbation
                if let Ok(s) = obj.subgradient(y) {
                    axpy(-step, &s, &mut z);
                }
                z
            },
        ))
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vector> {
        let z = (self.operator)(y);
        check_dim(y.len(), &z)?;
        check_finite(&z)?;
        Ok(z)
    }
}

impl fmt::Debug for AuxiliaryAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AuxiliaryAlgorithm")
            .field("description", &self.description)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Mode {
    Weak,
    Strong,
    Generic(AuxiliaryAlgorithm),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionSource {
    Subgradient,
    /// Random probing; the seed for perturbation `n` of outer iteration `k`
    /// is `mix_seed(mix_seed(seed, k), n)`.
    DerivativeFree {
        probe_radius: f64,
        trials: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct SuperiorizerConfig {
    /// Perturbations per outer iteration (`N_k = N` for every k).
    pub perturbations: usize,
    pub mode: Mode,
    /// Initial schedule state; each run starts from a copy.
    pub schedule: Schedule,
    pub direction: DirectionSource,
    /// Strong mode only: trials per perturbation.
    pub step_budget: usize,
    /// Keep a log of every inner step.
    pub record_events: bool,
}

impl SuperiorizerConfig {
    pub fn new(perturbations: usize, mode: Mode, schedule: Schedule) -> Self {
        Self {
            perturbations,
            mode,
            schedule,
            direction: DirectionSource::Subgradient,
            step_budget: DEFAULT_STEP_BUDGET,
            record_events: false,
        }
    }

    pub fn with_direction(mut self, direction: DirectionSource) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_events(mut self) -> Self {
        self.record_events = true;
        self
    }

    pub fn validate(&self, obj: &Objective) -> Result<()> {
        if self.perturbations == 0 {
            return Err(Error::InvalidConfig("N must be at least 1".into()));
        }
        if self.step_budget == 0 {
            return Err(Error::InvalidConfig("step budget must be positive".into()));
        }
        match self.direction {
            DirectionSource::Subgradient => {
                if !matches!(self.mode, Mode::Generic(_)) && !obj.has_subgradient() {
                    return Err(Error::NoSubgradient);
                }
            }
            DirectionSource::DerivativeFree {
                probe_radius,
                trials,
                ..
            } => {
                if !(probe_radius > 0.0 && probe_radius.is_finite()) || trials == 0 {
                    return Err(Error::InvalidConfig(
                        "derivative-free search needs probe_radius > 0 and trials >= 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn direction_at(&self, obj: &Objective, y: &[f64], k: usize, n: usize) -> Result<Direction> {
        match self.direction {
            DirectionSource::Subgradient => subgradient_direction(obj, y),
            DirectionSource::DerivativeFree {
                probe_radius,
                trials,
                seed,
            } => {
                let s = mix_seed(mix_seed(seed, k as u64), n as u64);
                derivative_free_direction(obj, y, probe_radius, trials, s)
            }
        }
    }
}

/// Result of one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub point: Vector,
    /// Sum of the β values drawn during this step.
    pub beta_sum: f64,
    /// Inner steps that strictly decreased φ.
    pub descents: usize,
}

/// Weak outer iteration: `N` perturbations then `A`.
pub fn weak_step(
    algo: &BasicAlgorithm,
    obj: &Objective,
    cfg: &SuperiorizerConfig,
    k: usize,
    y: &[f64],
    schedule: &mut Schedule,
    mut events: Option<&mut Vec<InnerEvent>>,
) -> Result<StepOutcome> {
    check_dim(algo.family().dim(), y)?;
    let mut inner = y.to_vec();
    let mut phi_inner = obj.evaluate(&inner)?;
    let mut beta_sum = 0.0;
    let mut descents = 0;
    for n in 0..cfg.perturbations {
        let beta = schedule.next_beta();
        let v = cfg.direction_at(obj, &inner, k, n)?;
        axpy(beta, v.as_slice(), &mut inner);
        beta_sum += beta;
        let phi_next = obj.evaluate(&inner)?;
        if phi_next < phi_inner {
            descents += 1;
        }
        phi_inner = phi_next;
        if let Some(log) = events.as_deref_mut() {
            log.push(InnerEvent {
                k,
                n,
                ell: schedule.cursor(),
                beta,
                accepted: true,
                phi_candidate: phi_next,
            });
        }
    }
    Ok(StepOutcome {
        point: algo.step(k, &inner)?,
        beta_sum,
        descents,
    })
}

/// Strong outer iteration: each perturbation shrinks β along the
/// schedule until `φ(z) <= φ(y^k)`, then `A` is applied.
pub fn strong_step(
    algo: &BasicAlgorithm,
    obj: &Objective,
    cfg: &SuperiorizerConfig,
    k: usize,
    y: &[f64],
    schedule: &mut Schedule,
    mut events: Option<&mut Vec<InnerEvent>>,
) -> Result<StepOutcome> {
    check_dim(algo.family().dim(), y)?;
    let phi_outer = obj.evaluate(y)?;
    let mut inner = y.to_vec();
    let mut phi_inner = phi_outer;
    let mut beta_sum = 0.0;
    let mut descents = 0;
    let mut z = vec![0.0; y.len()];
    for n in 0..cfg.perturbations {
        let v = cfg.direction_at(obj, &inner, k, n)?;
        let mut trials = 0;
        loop {
            let beta = schedule.next_beta();
            beta_sum += beta;
            trials += 1;
            for ((zi, yi), vi) in z.iter_mut().zip(&inner).zip(v.as_slice()) {
                *zi = yi + beta * vi;
            }
            let phi_z = obj.evaluate(&z)?;
            let accepted = phi_z <= phi_outer;
            if let Some(log) = events.as_deref_mut() {
                log.push(InnerEvent {
                    k,
                    n,
                    ell: schedule.cursor(),
                    beta,
                    accepted,
                    phi_candidate: phi_z,
                });
            }
            if accepted {
                if phi_z < phi_inner {
                    descents += 1;
                }
                phi_inner = phi_z;
                std::mem::swap(&mut inner, &mut z);
                break;
            }
            if trials >= cfg.step_budget {
                return Err(Error::StepBudgetExceeded {
                    k,
                    n,
                    ell: schedule.cursor(),
                    trials,
                });
            }
        }
    }
    Ok(StepOutcome {
        point: algo.step(k, &inner)?,
        beta_sum,
        descents,
    })
}

/// `A(y + β v)` with `v = (B(y) − y)/‖B(y) − y‖`, or `v = 0` when `B(y) = y`.
pub fn generic_step(
    algo: &BasicAlgorithm,
    aux: &AuxiliaryAlgorithm,
    k: usize,
    y: &[f64],
    schedule: &mut Schedule,
) -> Result<StepOutcome> {
    check_dim(algo.family().dim(), y)?;
    let displacement = sub(&aux.apply(y)?, y);
    let v = Direction::normalized(displacement);
    let beta = schedule.next_beta();
    let mut perturbed = y.to_vec();
    axpy(beta, v.as_slice(), &mut perturbed);
    Ok(StepOutcome {
        point: algo.step(k, &perturbed)?,
        beta_sum: beta,
        descents: 0,
    })
}

/// Drive the configured superiorized iteration until the stop rule fires.
///
/// With a null schedule this is exactly [`run_basic`] with the objective
/// recorded.
pub fn run_superiorized(
    algo: &BasicAlgorithm,
    obj: &Objective,
    cfg: &SuperiorizerConfig,
    x0: &[f64],
    stop: &StopRule,
) -> Result<IterateTrace> {
    if cfg.schedule.is_null() {
        return run_basic(algo, x0, stop, Some(obj));
    }
    let family = algo.family();
    check_dim(family.dim(), x0)?;
    check_finite(x0)?;
    stop.validate()?;
    cfg.validate(obj)?;

    let mut schedule = cfg.schedule.clone();
    let bound = schedule.total_bound();
    let mut events = Vec::new();
    let mut records = Vec::new();
    let mut y = x0.to_vec();
    let mut consumed = 0.0;
    let mut descents = 0;
    let mut k = 0;
    let stop_reason = loop {
        let prox = family.proximity(&y)?;
        let phi = obj.evaluate(&y)?;
        let reason = stop.check(k, prox);
        let outcome = if reason.is_none() {
            let log = cfg.record_events.then_some(&mut events);
            Some(match &cfg.mode {
                Mode::Weak => weak_step(algo, obj, cfg, k, &y, &mut schedule, log)?,
                Mode::Strong => strong_step(algo, obj, cfg, k, &y, &mut schedule, log)?,
                Mode::Generic(aux) => generic_step(algo, aux, k, &y, &mut schedule)?,
            })
        } else {
            None
        };
        records.push(TraceRecord {
            k,
            point: std::mem::take(&mut y),
            prox,
            phi: Some(phi),
            beta_consumed: consumed,
            descents,
        });
        match (reason, outcome) {
            (Some(r), _) => break r,
            (None, Some(o)) => {
                consumed += o.beta_sum;
                descents = o.descents;
                debug_assert!(consumed <= bound + 1e-9);
                y = o.point;
            }
            (None, None) => unreachable!(),
        }
        k += 1;
    };

    let mode = match cfg.mode {
        Mode::Weak => "weak",
        Mode::Strong => "strong",
        Mode::Generic(_) => "generic",
    };
    Ok(IterateTrace {
        meta: TraceMeta {
            fingerprint: format!(
                "{mode}:N={}:a={}:{}",
                cfg.perturbations,
                cfg.schedule.base(),
                algo.name()
            ),
            seed: match cfg.direction {
                DirectionSource::DerivativeFree { seed, .. } => Some(seed),
                DirectionSource::Subgradient => None,
            },
        },
        records,
        stop_reason,
        events,
    })
}

/// Euclidean length of the perturbation taken in an inner step.
pub fn perturbation_length(before: &[f64], after: &[f64]) -> f64 {
    norm(&sub(after, before))
}
