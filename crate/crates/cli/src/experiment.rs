//! Batch experiments: every arm on every replicate under identical
//! conditions, with ε-outputs, curves and pairwise verdicts.
//!
//! Replicate `i` uses the problem seed `mix_seed(master_seed, i)`. Arm
//! configurations keep their own seeds verbatim, so adding or removing an arm
//! never changes another arm's random streams.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use superiorization::eval::{
    better_targeted, curve_from_indices, epsilon_output, monotone_subsequence, Comparison,
    IterateTrace, ProximityTargetCurve, StopReason, Verdict,
};
use superiorization::feasibility::StopRule;
use superiorization::seed::mix_seed;

use crate::config::{BuiltRun, RunConfig, UsageError};
use crate::problem::{generate, ProblemInstance, ProblemSpec};

pub const THREADS_ENV: &str = "SUPERIOR_THREADS";

fn default_samples() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    pub name: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub arms: Vec<ArmSpec>,
    pub eps_grid: Vec<f64>,
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Shared by every arm.
    pub stop: StopRule,
    pub output_dir: PathBuf,
    /// Fill points per curve comparison.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Arm the others are compared against; defaults to the first basic arm,
    /// else the first arm.
    #[serde(default)]
    pub baseline: Option<String>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, UsageError> {
        serde_json::from_str(text)
            .map_err(|e| UsageError(format!("malformed experiment spec: {e}")))
    }

    pub fn replicate_seed(&self, i: usize) -> u64 {
        mix_seed(self.master_seed, i as u64)
    }

    /// Check everything that does not need a generated problem.
    pub fn validate(&self) -> Result<(), UsageError> {
        let bad = |field: &str, msg: String| UsageError(format!("invalid field `{field}`: {msg}"));
        if self.arms.is_empty() {
            return Err(bad("arms", "at least one arm is required".into()));
        }
        if self.replicates == 0 {
            return Err(bad("replicates", "must be at least 1".into()));
        }
        for (i, eps) in self.eps_grid.iter().enumerate() {
            if !(*eps > 0.0 && eps.is_finite()) {
                return Err(bad(
                    &format!("eps_grid[{i}]"),
                    format!("must be positive, got {eps}"),
                ));
            }
        }
        self.stop
            .validate()
            .map_err(|e| bad("stop", e.to_string()))?;
        for (i, arm) in self.arms.iter().enumerate() {
            let name_ok = !arm.name.is_empty()
                && arm
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
            if !name_ok {
                return Err(bad(
                    &format!("arms[{i}].name"),
                    format!("{:?} must be nonempty and use only [A-Za-z0-9_-]", arm.name),
                ));
            }
            if self.arms[..i].iter().any(|a| a.name == arm.name) {
                return Err(bad(
                    &format!("arms[{i}].name"),
                    format!("duplicate name {:?}", arm.name),
                ));
            }
            if let Some(stop) = arm.config.stop {
                if stop != self.stop {
                    return Err(bad(
                        &format!("arms[{i}].config.stop"),
                        "arms must share the experiment's stop rule".into(),
                    ));
                }
            }
        }
        if let Some(b) = &self.baseline {
            if !self.arms.iter().any(|a| &a.name == b) {
                return Err(bad("baseline", format!("no arm named {b:?}")));
            }
        }
        Ok(())
    }

    pub fn baseline_index(&self) -> usize {
        match &self.baseline {
            Some(b) => self.arms.iter().position(|a| &a.name == b).unwrap_or(0),
            None => self
                .arms
                .iter()
                .position(|a| a.config.mode == crate::config::ModeName::Basic)
                .unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsOutput {
    pub eps: f64,
    /// Index of the ε-output, if the trace reached ε.
    pub k: Option<usize>,
    pub phi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ArmResult {
    pub name: String,
    pub trace: Result<IterateTrace, String>,
    pub curve: Option<ProximityTargetCurve>,
    /// This arm (`R`) against the baseline (`S`).
    pub comparison: Option<Comparison>,
    pub eps_outputs: Vec<EpsOutput>,
}

#[derive(Debug, Clone)]
pub struct ReplicateResult {
    pub index: usize,
    pub seed: u64,
    pub instance: Result<ProblemInstance, String>,
    pub arms: Vec<ArmResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmEpsSummary {
    pub name: String,
    /// Replicates in which this arm produced an ε-output.
    pub reached: usize,
    /// Replicates whose ε-output has strictly lower φ than the baseline's.
    pub strictly_lower: usize,
    /// `strictly_lower / replicates`.
    pub fraction: f64,
    /// Largest `φ_arm − φ_baseline` over replicates where both reached ε.
    pub max_excess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsSummary {
    pub eps: f64,
    pub arms: Vec<ArmEpsSummary>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub name: String,
    #[serde(rename = "R_better")]
    pub r_better: usize,
    #[serde(rename = "S_better")]
    pub s_better: usize,
    pub crossing: usize,
    pub incomparable: usize,
    /// Replicates without a verdict (failed run or missing curve).
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerArm {
    pub name: String,
    pub ok: bool,
    pub error: Option<String>,
    pub iterations: Option<usize>,
    pub stop_reason: Option<StopReason>,
    pub final_prox: Option<f64>,
    pub final_phi: Option<f64>,
    pub eps_outputs: Vec<EpsOutput>,
    pub verdict: Option<Verdict>,
    pub witness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub replicate: usize,
    pub seed: u64,
    pub problem_error: Option<String>,
    pub arms: Vec<LedgerArm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub replicates: usize,
    pub master_seed: u64,
    pub baseline: String,
    pub arms: Vec<String>,
    pub eps: Vec<EpsSummary>,
    pub verdicts: Vec<VerdictCounts>,
    pub ledger: Vec<LedgerEntry>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub summary: Summary,
    pub replicates: Vec<ReplicateResult>,
}

fn curve_of(trace: &IterateTrace) -> Option<ProximityTargetCurve> {
    curve_from_indices(trace, &monotone_subsequence(trace)).ok()
}

fn eps_outputs(trace: &IterateTrace, grid: &[f64]) -> Vec<EpsOutput> {
    grid.iter()
        .map(|&eps| {
            let hit = epsilon_output(trace, eps).ok().flatten();
            EpsOutput {
                eps,
                k: hit.map(|(k, _)| k),
                phi: hit.and_then(|(k, _)| trace.records[k].phi),
            }
        })
        .collect()
}

fn run_replicate(spec: &ExperimentSpec, index: usize) -> ReplicateResult {
    let seed = spec.replicate_seed(index);
    let instance = generate(&spec.problem.with_seed(seed)).map_err(|e| format!("{e:#}"));
    let mut arms: Vec<ArmResult> = spec
        .arms
        .iter()
        .map(|arm| {
            let trace = match &instance {
                Err(e) => Err(format!("problem generation failed: {e}")),
                Ok(inst) => arm
                    .config
                    .build(&inst.family)
                    .map_err(|e| e.to_string())
                    .and_then(|b: BuiltRun| {
                        b.execute(&inst.x0, &spec.stop).map_err(|e| e.to_string())
                    }),
            };
            let curve = trace.as_ref().ok().and_then(curve_of);
            let eps_outputs = trace
                .as_ref()
                .map(|t| eps_outputs(t, &spec.eps_grid))
                .unwrap_or_default();
            ArmResult {
                name: arm.name.clone(),
                trace,
                curve,
                comparison: None,
                eps_outputs,
            }
        })
        .collect();
    let base = spec.baseline_index();
    if let Some(s) = arms[base].curve.clone() {
        for arm in &mut arms {
            if let Some(r) = &arm.curve {
                arm.comparison = Some(better_targeted(r, &s, spec.samples));
            }
        }
    }
    ReplicateResult {
        index,
        seed,
        instance,
        arms,
    }
}

fn summarize(spec: &ExperimentSpec, reps: &[ReplicateResult]) -> Summary {
    let base = spec.baseline_index();
    let eps = spec
        .eps_grid
        .iter()
        .enumerate()
        .map(|(j, &eps)| EpsSummary {
            eps,
            arms: spec
                .arms
                .iter()
                .enumerate()
                .map(|(a, arm)| {
                    let mut reached = 0;
                    let mut strictly_lower = 0;
                    let mut max_excess: Option<f64> = None;
                    for rep in reps {
                        let mine = rep.arms[a].eps_outputs.get(j).and_then(|o| o.phi);
                        let theirs = rep.arms[base].eps_outputs.get(j).and_then(|o| o.phi);
                        if mine.is_some() {
                            reached += 1;
                        }
                        if let (Some(p), Some(q)) = (mine, theirs) {
                            if p < q {
                                strictly_lower += 1;
                            }
                            let excess = p - q;
                            max_excess = Some(max_excess.map_or(excess, |m| m.max(excess)));
                        }
                    }
                    ArmEpsSummary {
                        name: arm.name.clone(),
                        reached,
                        strictly_lower,
                        fraction: strictly_lower as f64 / reps.len() as f64,
                        max_excess,
                    }
                })
                .collect(),
        })
        .collect();

    let verdicts = spec
        .arms
        .iter()
        .enumerate()
        .map(|(a, arm)| {
            let mut counts = VerdictCounts {
                name: arm.name.clone(),
                ..Default::default()
            };
            for rep in reps {
                match rep.arms[a].comparison.as_ref().map(|c| c.verdict) {
                    Some(Verdict::RBetter) => counts.r_better += 1,
                    Some(Verdict::SBetter) => counts.s_better += 1,
                    Some(Verdict::Crossing) => counts.crossing += 1,
                    Some(Verdict::Incomparable) => counts.incomparable += 1,
                    None => counts.missing += 1,
                }
            }
            counts
        })
        .collect();

    let ledger = reps
        .iter()
        .map(|rep| LedgerEntry {
            replicate: rep.index,
            seed: rep.seed,
            problem_error: rep.instance.as_ref().err().cloned(),
            arms: rep
                .arms
                .iter()
                .map(|arm| {
                    let last = arm.trace.as_ref().ok().and_then(|t| t.last());
                    LedgerArm {
                        name: arm.name.clone(),
                        ok: arm.trace.is_ok(),
                        error: arm.trace.as_ref().err().cloned(),
                        iterations: arm.trace.as_ref().ok().map(|t| t.len().saturating_sub(1)),
                        stop_reason: arm.trace.as_ref().ok().map(|t| t.stop_reason),
                        final_prox: last.map(|r| r.prox),
                        final_phi: last.and_then(|r| r.phi),
                        eps_outputs: arm.eps_outputs.clone(),
                        verdict: arm.comparison.as_ref().map(|c| c.verdict),
                        witness: arm.comparison.as_ref().and_then(|c| c.witness),
                    }
                })
                .collect(),
        })
        .collect();

    Summary {
        replicates: reps.len(),
        master_seed: spec.master_seed,
        baseline: spec.arms[base].name.clone(),
        arms: spec.arms.iter().map(|a| a.name.clone()).collect(),
        eps,
        verdicts,
        ledger,
    }
}

/// Worker count requested through `SUPERIOR_THREADS`, if any.
pub fn thread_cap() -> Result<Option<usize>, UsageError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(UsageError(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Run every arm on every replicate without touching the filesystem.
pub fn compute(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let threads = thread_cap()?;
    let work = || -> Vec<ReplicateResult> {
        (0..spec.replicates)
            .into_par_iter()
            .map(|i| run_replicate(spec, i))
            .collect()
    };
    let replicates = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(work),
        None => work(),
    };
    let summary = summarize(spec, &replicates);
    Ok(ExperimentReport {
        summary,
        replicates,
    })
}

/// Write `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .context("output path has no file name")?;
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn trace_path(dir: &Path, arm: &str, rep: usize) -> PathBuf {
    dir.join("traces").join(format!("arm-{arm}-rep-{rep}.csv"))
}

pub fn curve_path(dir: &Path, arm: &str, rep: usize) -> PathBuf {
    dir.join("curves").join(format!("arm-{arm}-rep-{rep}.csv"))
}

pub fn compare_path(dir: &Path, arm: &str, baseline: &str, rep: usize) -> PathBuf {
    dir.join("compare")
        .join(format!("{arm}-vs-{baseline}-rep-{rep}.json"))
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

/// Emit the report directory layout under `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    let baseline = &report.summary.baseline;
    for rep in &report.replicates {
        for arm in &rep.arms {
            if let Ok(trace) = &arm.trace {
                let mut buf = Vec::new();
                trace.write_csv(&mut buf)?;
                write_atomic(&trace_path(dir, &arm.name, rep.index), &buf)?;
            }
            if let Some(curve) = &arm.curve {
                let mut buf = Vec::new();
                curve.write_csv(&mut buf)?;
                write_atomic(&curve_path(dir, &arm.name, rep.index), &buf)?;
            }
            if let Some(c) = &arm.comparison {
                write_atomic(
                    &compare_path(dir, &arm.name, baseline, rep.index),
                    &to_json_bytes(c),
                )?;
            }
        }
    }
    write_atomic(&dir.join("summary.json"), &to_json_bytes(&report.summary))
}

/// Compute and write to `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let report = compute(spec)?;
    write_report(&report, &spec.output_dir)?;
    Ok(report)
}
