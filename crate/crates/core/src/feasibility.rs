//! Feasibility-seeking projection operators.
//!
//! The dynamic string-averaging projection (DSAP) step maps `x` to
//! `Σ_{t∈Ω} w(t) P[t](x)`, where each string operator `P[t]` applies the
//! projections onto `C_{t_1}, …, C_{t_q}` in that order. Kaczmarz (one string
//! through every set) and Cimmino (every set its own string, equal weights)
//! are the two extreme plans.
//!
//! Constraint indices are 0-based throughout the crate.

use std::borrow::Cow;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{IterateTrace, StopReason, TraceMeta, TraceRecord};
use crate::geometry::ConstraintFamily;
use crate::linalg::{check_dim, check_finite, Vector};
use crate::objectives::Objective;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Ordered list of constraint indices `t = (t_1, …, t_q)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexVector(Vec<usize>);

impl IndexVector {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidPlan("index vector must be nonempty".into()));
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check_range(&self, m: usize) -> Result<()> {
        match self.0.iter().find(|&&i| i >= m) {
            Some(&index) => Err(Error::IndexOutOfRange { index, m }),
            None => Ok(()),
        }
    }
}

/// A fit set of strings with positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StringPlan {
    m: usize,
    strings: Vec<IndexVector>,
    weights: Vec<f64>,
}

impl StringPlan {
    /// Validates range, fitness over `0..m` and the weight sum. Weights whose
    /// sum is within 1e-12 of one are renormalized; anything further off is
    /// rejected.
    pub fn new(m: usize, strings: Vec<IndexVector>, weights: Vec<f64>) -> Result<Self> {
        if strings.is_empty() {
            return Err(Error::InvalidPlan("plan has no strings".into()));
        }
        if strings.len() != weights.len() {
            return Err(Error::InvalidPlan(format!(
                "{} strings but {} weights",
                strings.len(),
                weights.len()
            )));
        }
        for s in &strings {
            if s.is_empty() {
                return Err(Error::InvalidPlan("empty string".into()));
            }
            s.check_range(m)?;
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidPlan(format!("weight {w} is not positive")));
        }
        let mut covered = vec![false; m];
        for s in &strings {
            for &i in s.indices() {
                covered[i] = true;
            }
        }
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidPlan(format!(
                "plan is not fit: constraint {i} appears in no string"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidPlan(format!("weights sum to {total}, not 1")));
        }
        let weights = if total == 1.0 {
            weights
        } else {
            weights.iter().map(|w| w / total).collect()
        };
        Ok(Self {
            m,
            strings,
            weights,
        })
    }

    /// The single string `(0, 1, …, m−1)` with weight one.
    pub fn kaczmarz(m: usize) -> Self {
        Self {
            m,
            strings: vec![IndexVector((0..m).collect())],
            weights: vec![1.0],
        }
    }

    /// `m` singleton strings with weight `1/m` each.
    pub fn cimmino(m: usize) -> Self {
        Self {
            m,
            strings: (0..m).map(|i| IndexVector(vec![i])).collect(),
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn strings(&self) -> &[IndexVector] {
        &self.strings
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn satisfies(&self, bounds: &PlanBounds) -> bool {
        bounds.check(self).is_ok()
    }
}

/// Bounds defining the admissible plans: string length at most `qbar` and
/// every weight at least `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanBounds {
    pub delta: f64,
    pub qbar: usize,
}

impl PlanBounds {
    pub fn new(m: usize, delta: f64, qbar: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0 / m as f64) {
            return Err(Error::PlanBounds(format!(
                "delta must lie in (0, 1/{m}), got {delta}"
            )));
        }
        if qbar < m {
            return Err(Error::PlanBounds(format!(
                "qbar must be at least m = {m}, got {qbar}"
            )));
        }
        Ok(Self { delta, qbar })
    }

    /// `delta = 1/(2m)`, `qbar = m`: admits both Kaczmarz and Cimmino.
    pub fn standard(m: usize) -> Self {
        Self {
            delta: 0.5 / m as f64,
            qbar: m,
        }
    }

    pub fn check(&self, plan: &StringPlan) -> Result<()> {
        if let Some(s) = plan.strings.iter().find(|s| s.len() > self.qbar) {
            return Err(Error::PlanBounds(format!(
                "string of length {} exceeds qbar = {}",
                s.len(),
                self.qbar
            )));
        }
        if let Some(w) = plan.weights.iter().find(|w| **w < self.delta) {
            return Err(Error::PlanBounds(format!(
                "weight {w} below delta = {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Where each iteration's plan comes from. Every source is a deterministic
/// function of the iteration index (and seed).
#[derive(Debug, Clone, PartialEq)]
pub enum PlanSource {
    Fixed(StringPlan),
    /// Single full string starting at constraint `k mod m`.
    CyclicRotation,
    /// Random partition of a random permutation into strings with random
    /// weights, reproducible from `(seed, k)`.
    SeededRandom {
        seed: u64,
    },
}

/// Stopping rule for a run. At least one of the two must be set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopRule {
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

impl StopRule {
    pub fn max_iters(n: usize) -> Self {
        Self {
            max_iters: Some(n),
            epsilon: None,
        }
    }

    pub fn epsilon(eps: f64) -> Self {
        Self {
            max_iters: None,
            epsilon: Some(eps),
        }
    }

    pub fn both(n: usize, eps: f64) -> Self {
        Self {
            max_iters: Some(n),
            epsilon: Some(eps),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters.is_none() && self.epsilon.is_none() {
            return Err(Error::InvalidConfig(
                "stop rule needs max_iters, epsilon or both".into(),
            ));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(Error::NonPositiveEpsilon(eps));
            }
        }
        Ok(())
    }

    /// Decide whether to stop after recording iterate `k` with proximity `prox`.
    pub(crate) fn check(&self, k: usize, prox: f64) -> Option<StopReason> {
        if let Some(eps) = self.epsilon {
            if prox <= eps {
                return Some(StopReason::EpsilonReached);
            }
        }
        match self.max_iters {
            Some(max) if k >= max => Some(StopReason::MaxIterations),
            _ => None,
        }
    }
}

/// A feasibility-seeking algorithmic operator `A` over a constraint family.
#[derive(Debug, Clone)]
pub struct BasicAlgorithm {
    family: ConstraintFamily,
    source: PlanSource,
    bounds: PlanBounds,
    name: String,
}

impl BasicAlgorithm {
    pub fn new(family: ConstraintFamily, source: PlanSource, bounds: PlanBounds) -> Result<Self> {
        let m = family.len();
        PlanBounds::new(m, bounds.delta, bounds.qbar)?;
        if let PlanSource::Fixed(plan) = &source {
            if plan.m() != m {
                return Err(Error::InvalidPlan(format!(
                    "plan built for {} constraints, family has {m}",
                    plan.m()
                )));
            }
            bounds.check(plan)?;
        }
        let name = match &source {
            PlanSource::Fixed(_) => "dsap-fixed".to_string(),
            PlanSource::CyclicRotation => "dsap-cyclic".to_string(),
            PlanSource::SeededRandom { seed } => format!("dsap-random-{seed}"),
        };
        Ok(Self {
            family,
            source,
            bounds,
            name,
        })
    }

    /// Fully sequential cyclic projections.
    pub fn kaczmarz(family: ConstraintFamily) -> Self {
        let m = family.len();
        Self {
            family,
            source: PlanSource::Fixed(StringPlan::kaczmarz(m)),
            bounds: PlanBounds::standard(m),
            name: "kaczmarz".into(),
        }
    }

    /// Fully simultaneous averaged projections.
    pub fn cimmino(family: ConstraintFamily) -> Self {
        let m = family.len();
        Self {
            family,
            source: PlanSource::Fixed(StringPlan::cimmino(m)),
            bounds: PlanBounds::standard(m),
            name: "cimmino".into(),
        }
    }

    pub fn family(&self) -> &ConstraintFamily {
        &self.family
    }

    pub fn bounds(&self) -> &PlanBounds {
        &self.bounds
    }

    pub fn source(&self) -> &PlanSource {
        &self.source
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The plan used at iteration `k`.
    pub fn plan_at(&self, k: usize) -> Cow<'_, StringPlan> {
        let m = self.family.len();
        match &self.source {
            PlanSource::Fixed(plan) => Cow::Borrowed(plan),
            PlanSource::CyclicRotation => Cow::Owned(StringPlan {
                m,
                strings: vec![IndexVector((0..m).map(|j| (j + k) % m).collect())],
                weights: vec![1.0],
            }),
            PlanSource::SeededRandom { seed } => {
                Cow::Owned(random_plan(m, &self.bounds, *seed, k as u64))
            }
        }
    }

    /// One application `A(x) = P_{Ω_k, w_k}(x)`.
    pub fn step(&self, k: usize, x: &[f64]) -> Result<Vector> {
        dsap_step(self, &self.plan_at(k), x)
    }
}

fn random_plan(m: usize, bounds: &PlanBounds, seed: u64, k: u64) -> StringPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng);
    let count = rng.gen_range(1..=m);
    // count − 1 distinct cut points in 1..m
    let mut cuts: Vec<usize> = rand::seq::index::sample(&mut rng, m - 1, count - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut strings = Vec::with_capacity(count);
    let mut start = 0;
    for end in cuts.into_iter().chain(std::iter::once(m)) {
        strings.push(IndexVector(perm[start..end].to_vec()));
        start = end;
    }
    let raw: Vec<f64> = (0..count).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let raw_total: f64 = raw.iter().sum();
    let spare = 1.0 - count as f64 * bounds.delta;
    let weights = raw
        .iter()
        .map(|r| bounds.delta + spare * r / raw_total)
        .collect();
    StringPlan::new(m, strings, weights).expect("generated plan is valid")
}

/// Apply the string operator `P[t] = P_{t_q} ⋯ P_{t_1}` to `x`.
pub fn apply_string(family: &ConstraintFamily, t: &IndexVector, x: &[f64]) -> Result<Vector> {
    check_dim(family.dim(), x)?;
    t.check_range(family.len())?;
    Ok(apply_string_unchecked(family, t, x))
}

fn apply_string_unchecked(family: &ConstraintFamily, t: &IndexVector, x: &[f64]) -> Vector {
    let sets = family.sets();
    let mut y = x.to_vec();
    for &i in t.indices() {
        y = sets[i].project_unchecked(&y);
    }
    y
}

/// `Σ_t w(t) P[t](x)`, summed in plan order.
pub fn dsap_step(algo: &BasicAlgorithm, plan: &StringPlan, x: &[f64]) -> Result<Vector> {
    let family = &algo.family;
    check_dim(family.dim(), x)?;
    if plan.m() != family.len() {
        return Err(Error::InvalidPlan(format!(
            "plan built for {} constraints, family has {}",
            plan.m(),
            family.len()
        )));
    }
    algo.bounds.check(plan)?;

    let endpoints: Vec<Vector> = plan
        .strings
        .iter()
        .map(|t| apply_string_unchecked(family, t, x))
        .collect();
    // A convex combination of identical points is that point.
    if endpoints.iter().all(|e| *e == endpoints[0]) {
        return Ok(endpoints.into_iter().next().expect("plan has strings"));
    }
    let mut out = vec![0.0; x.len()];
    for (e, w) in endpoints.iter().zip(&plan.weights) {
        crate::linalg::axpy(*w, e, &mut out);
    }
    Ok(out)
}

pub fn kaczmarz(family: ConstraintFamily) -> BasicAlgorithm {
    BasicAlgorithm::kaczmarz(family)
}

pub fn cimmino(family: ConstraintFamily) -> BasicAlgorithm {
    BasicAlgorithm::cimmino(family)
}

/// Iterate `x^{k+1} = A(x^k)` until the stop rule fires. Records every
/// iterate, its proximity and, when an objective is supplied, its value.
pub fn run_basic(
    algo: &BasicAlgorithm,
    x0: &[f64],
    stop: &StopRule,
    objective: Option<&Objective>,
) -> Result<IterateTrace> {
    let family = &algo.family;
    check_dim(family.dim(), x0)?;
    check_finite(x0)?;
    stop.validate()?;

    let mut records = Vec::new();
    let mut x = x0.to_vec();
    let mut k = 0;
    let stop_reason = loop {
        let prox = family.proximity_unchecked(&x);
        let phi = objective.map(|o| o.evaluate(&x)).transpose()?;
        let reason = stop.check(k, prox);
        let next = if reason.is_none() {
            Some(algo.step(k, &x)?)
        } else {
            None
        };
        records.push(TraceRecord {
            k,
            point: std::mem::take(&mut x),
            prox,
            phi,
            beta_consumed: 0.0,
            descents: 0,
        });
        match (reason, next) {
            (Some(r), _) => break r,
            (None, Some(n)) => x = n,
            (None, None) => unreachable!(),
        }
        k += 1;
    };

    Ok(IterateTrace {
        meta: TraceMeta {
            fingerprint: format!("basic:{}", algo.name),
            seed: None,
        },
        records,
        stop_reason,
        events: Vec::new(),
    })
}
