//! Evaluation of recorded runs: ε-outputs, monotone-proximity subsequences,
//! proximity-target curves and their comparison, and Fejér monitoring.

mod curve;
mod fejer;
mod trace;

pub use curve::{
    better_targeted, build_curve, curve_from_indices, Comparison, ProximityTargetCurve, Verdict,
};
pub use fejer::{fejer_monitor, fejer_report_from_distances, FejerReport};
pub use trace::{InnerEvent, IterateTrace, StopReason, TraceMeta, TraceRecord};

use crate::error::{Error, Result};

/// Index `K` of the first proximity `<= eps`, if any. This is the unique index
/// with `prox[K] <= eps` and `prox[k] > eps` for every `k < K`.
pub fn first_at_or_below(prox: &[f64], eps: f64) -> Result<Option<usize>> {
    if !(eps > 0.0) {
        return Err(Error::NonPositiveEpsilon(eps));
    }
    Ok(prox.iter().position(|&p| p <= eps))
}

/// The ε-output of a trace: the first record whose proximity is at most `eps`.
pub fn epsilon_output(trace: &IterateTrace, eps: f64) -> Result<Option<(usize, &[f64])>> {
    let prox: Vec<f64> = trace.records.iter().map(|r| r.prox).collect();
    Ok(first_at_or_below(&prox, eps)?.map(|k| (k, trace.records[k].point.as_slice())))
}

/// Running strict minimum of a proximity sequence: index 0, then every index
/// whose value is strictly below all previously kept values.
pub fn monotone_indices(prox: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut best = f64::INFINITY;
    for (i, &p) in prox.iter().enumerate() {
        if out.is_empty() || p < best {
            out.push(i);
            best = p;
        }
    }
    out
}

pub fn monotone_subsequence(trace: &IterateTrace) -> Vec<usize> {
    let prox: Vec<f64> = trace.records.iter().map(|r| r.prox).collect();
    monotone_indices(&prox)
}

/// True when consecutive proximities strictly decrease.
pub fn is_monotone_proximity(prox: &[f64]) -> bool {
    prox.windows(2).all(|w| w[0] > w[1])
}
