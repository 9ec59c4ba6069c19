use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EpsilonReached,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMeta {
    pub fingerprint: String,
    pub seed: Option<u64>,
}

/// State after outer iteration `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub point: Vector,
    pub prox: f64,
    /// Objective value, when the run was given an objective.
    pub phi: Option<f64>,
    /// Sum of every β drawn before this iterate was produced.
    pub beta_consumed: f64,
    /// Inner steps of the preceding outer iteration that strictly decreased φ.
    #[serde(default)]
    pub descents: usize,
}

/// One step-size trial of an inner perturbation loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerEvent {
    pub k: usize,
    pub n: usize,
    /// schedule cursor ℓ after drawing β
    pub ell: i64,
    pub beta: f64,
    pub accepted: bool,
    pub phi_candidate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateTrace {
    pub meta: TraceMeta,
    pub records: Vec<TraceRecord>,
    pub stop_reason: StopReason,
    #[serde(default)]
    pub events: Vec<InnerEvent>,
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl IterateTrace {
    /// Wrap externally produced records (stop reason set to max iterations).
    pub fn from_records(records: Vec<TraceRecord>) -> Self {
        Self {
            meta: TraceMeta::default(),
            records,
            stop_reason: StopReason::MaxIterations,
            events: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn prox(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.prox).collect()
    }

    /// Header `k,prox,phi,beta_consumed`, then one row per record with 17
    /// significant digits. A missing φ is written as an empty field.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k,prox,phi,beta_consumed")?;
        for r in &self.records {
            let phi = r.phi.map(fmt17).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{}",
                r.k,
                fmt17(r.prox),
                phi,
                fmt17(r.beta_consumed)
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }
}

pub(crate) fn write_pairs_csv<W: Write>(mut w: W, rows: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "prox,phi")?;
    for (p, f) in rows {
        writeln!(w, "{},{}", fmt17(*p), fmt17(*f))?;
    }
    Ok(())
}
