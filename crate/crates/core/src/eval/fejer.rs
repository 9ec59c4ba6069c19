use serde::{Deserialize, Serialize};

use super::trace::IterateTrace;
use crate::error::Result;
use crate::linalg::{check_dim, dist, Vector};

/// Distance monotonicity of a trace with respect to a reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FejerReport {
    pub reference: Vector,
    /// Smallest index from which the distance never grows by more than the
    /// tolerance; absent when the last transition is still a violation.
    pub first_monotone_index: Option<usize>,
    /// `(k, d_{k+1} − d_k)` for every transition that grew beyond tolerance.
    pub violations: Vec<(usize, f64)>,
}

pub fn fejer_report_from_distances(
    reference: Vector,
    distances: &[f64],
    tolerance: f64,
) -> FejerReport {
    let violations: Vec<(usize, f64)> = distances
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0] + tolerance)
        .map(|(k, w)| (k, w[1] - w[0]))
        .collect();
    let transitions = distances.len().saturating_sub(1);
    let first_monotone_index = match violations.last() {
        None => Some(0),
        Some(&(k, _)) if k + 1 < transitions => Some(k + 1),
        Some(_) => None,
    };
    FejerReport {
        reference,
        first_monotone_index,
        violations,
    }
}

/// Track `‖y^k − reference‖` along a trace.
pub fn fejer_monitor(
    trace: &IterateTrace,
    reference: &[f64],
    tolerance: f64,
) -> Result<FejerReport> {
    for r in &trace.records {
        check_dim(reference.len(), &r.point)?;
    }
    let distances: Vec<f64> = trace
        .records
        .iter()
        .map(|r| dist(&r.point, reference))
        .collect();
    Ok(fejer_report_from_distances(
        reference.to_vec(),
        &distances,
        tolerance,
    ))
}
