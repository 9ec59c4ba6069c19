use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::trace::{write_pairs_csv, IterateTrace};
use crate::error::{Error, Result};

const TIE_SLACK: f64 = 1e-12;

/// Piecewise-linear curve through `(prox, phi)` vertices whose proximities
/// strictly decrease.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximityTargetCurve {
    vertices: Vec<(f64, f64)>,
}

impl ProximityTargetCurve {
    pub fn new(vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidCurve(
                "curve needs at least one vertex".into(),
            ));
        }
        if vertices
            .iter()
            .any(|(p, f)| !p.is_finite() || !f.is_finite())
        {
            return Err(Error::InvalidCurve("vertices must be finite".into()));
        }
        if let Some(i) = vertices.windows(2).position(|w| w[0].0 <= w[1].0) {
            return Err(Error::InvalidCurve(format!(
                "proximity does not strictly decrease between vertices {i} and {}",
                i + 1
            )));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    /// Largest proximity (first vertex).
    pub fn max_prox(&self) -> f64 {
        self.vertices[0].0
    }

    /// Smallest proximity (last vertex).
    pub fn min_prox(&self) -> f64 {
        self.vertices[self.vertices.len() - 1].0
    }

    /// Objective value of the curve at proximity `h`, if `h` is in range.
    pub fn value_at(&self, h: f64) -> Option<f64> {
        if !(self.min_prox() <= h && h <= self.max_prox()) {
            return None;
        }
        // first vertex with prox <= h; vertices are sorted descending
        let j = self.vertices.partition_point(|(p, _)| *p > h);
        let (pj, fj) = self.vertices[j];
        if pj == h || j == 0 {
            return Some(fj);
        }
        let (pi, fi) = self.vertices[j - 1];
        Some(fj + (h - pj) / (pi - pj) * (fi - fj))
    }

    /// Header `prox,phi`, vertices in order.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        write_pairs_csv(w, &self.vertices)
    }
}

fn vertex_of(trace: &IterateTrace, i: usize) -> Result<(f64, f64)> {
    let r = trace.records.get(i).ok_or_else(|| {
        Error::InvalidCurve(format!(
            "index {i} outside a trace of {} records",
            trace.len()
        ))
    })?;
    Ok((r.prox, r.phi.ok_or(Error::MissingObjective)?))
}

/// Curve through the contiguous records `lo..=hi`, which must have monotone
/// proximity.
pub fn build_curve(trace: &IterateTrace, lo: usize, hi: usize) -> Result<ProximityTargetCurve> {
    if lo > hi {
        return Err(Error::InvalidCurve(format!("empty range {lo}..={hi}")));
    }
    let vertices = (lo..=hi)
        .map(|i| vertex_of(trace, i))
        .collect::<Result<Vec<_>>>()?;
    ProximityTargetCurve::new(vertices)
}

/// Curve through the records at `indices` (typically a monotone subsequence).
pub fn curve_from_indices(trace: &IterateTrace, indices: &[usize]) -> Result<ProximityTargetCurve> {
    let vertices = indices
        .iter()
        .map(|&i| vertex_of(trace, i))
        .collect::<Result<Vec<_>>>()?;
    ProximityTargetCurve::new(vertices)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "R_better")]
    RBetter,
    #[serde(rename = "S_better")]
    SBetter,
    #[serde(rename = "crossing")]
    Crossing,
    #[serde(rename = "incomparable")]
    Incomparable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub verdict: Verdict,
    pub t: f64,
    pub u: f64,
    pub witness: Option<f64>,
}

/// Compare two curves over their shared proximity range `[t, u]`.
///
/// Both curves are evaluated at every vertex abscissa in range plus
/// `samples` evenly spaced fill points. Between consecutive evaluation points
/// the difference of two piecewise-linear curves is linear, so the verdict is
/// exact. `R` is reported better when `v <= w + 1e-12` everywhere; `S` when the
/// reverse holds; otherwise the curves cross and the witness is the first
/// root of `v − w` at a sign change.
pub fn better_targeted(
    r: &ProximityTargetCurve,
    s: &ProximityTargetCurve,
    samples: usize,
) -> Comparison {
    let t = r.min_prox().max(s.min_prox());
    let u = r.max_prox().min(s.max_prox());
    if t > u {
        return Comparison {
            verdict: Verdict::Incomparable,
            t,
            u,
            witness: None,
        };
    }

    let samples = samples.max(2);
    let mut hs: Vec<f64> = (0..samples)
        .map(|i| t + (u - t) * i as f64 / (samples - 1) as f64)
        .chain(
            r.vertices
                .iter()
                .chain(&s.vertices)
                .map(|(p, _)| *p)
                .filter(|p| (t..=u).contains(p)),
        )
        .map(|h| h.clamp(t, u))
        .collect();
    hs.sort_by(f64::total_cmp);
    hs.dedup();

    let diffs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let v = r.value_at(h).expect("h within R's range");
            let w = s.value_at(h).expect("h within S's range");
            v - w
        })
        .collect();

    let r_ok = diffs.iter().all(|d| *d <= TIE_SLACK);
    let s_ok = diffs.iter().all(|d| -*d <= TIE_SLACK);
    let verdict = if r_ok {
        Verdict::RBetter
    } else if s_ok {
        Verdict::SBetter
    } else {
        Verdict::Crossing
    };
    let witness = (verdict == Verdict::Crossing).then(|| first_sign_change(&hs, &diffs));
    Comparison {
        verdict,
        t,
        u,
        witness,
    }
}

fn first_sign_change(hs: &[f64], diffs: &[f64]) -> f64 {
    let sign = |d: f64| {
        if d > TIE_SLACK {
            1
        } else if d < -TIE_SLACK {
            -1
        } else {
            0
        }
    };
    let mut established = 0;
    for j in 0..diffs.len() {
        let sj = sign(diffs[j]);
        if sj == 0 {
            continue;
        }
        if established != 0 && sj != established {
            let (h0, h1) = (hs[j - 1], hs[j]);
            let (d0, d1) = (diffs[j - 1], diffs[j]);
            return h0 + d0 * (h1 - h0) / (d0 - d1);
        }
        established = sj;
    }
    unreachable!("crossing verdict implies a sign change")
}
