//! Objective (target) functions and nonascending-direction generators.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, check_finite, norm, Vector};

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vector + Send + Sync;

/// `φ(x) = ½ xᵀQx + cᵀx` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    n: usize,
    /// row-major n × n
    q: Vec<f64>,
    c: Vector,
}

impl Quadratic {
    pub fn new(q_rows: Vec<Vec<f64>>, c: Vector) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(Error::InvalidObjective("quadratic has dimension 0".into()));
        }
        if q_rows.len() != n || q_rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidObjective(format!(
                "Q must be {n}x{n} to match c"
            )));
        }
        let q: Vec<f64> = q_rows.into_iter().flatten().collect();
        check_finite(&q)?;
        check_finite(&c)?;
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (q[i * n + j], q[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidObjective(format!(
                        "Q is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let eig = DMatrix::from_row_slice(n, n, &q).symmetric_eigenvalues();
        let scale = eig.iter().fold(1.0f64, |acc, e| acc.max(e.abs()));
        if eig.iter().any(|&e| e < -1e-10 * scale) {
            return Err(Error::InvalidObjective(
                "Q is not positive semidefinite".into(),
            ));
        }
        Ok(Self { n, q, c })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn q_times(&self, x: &[f64]) -> Vector {
        self.q
            .chunks_exact(self.n)
            .map(|row| crate::linalg::dot(row, x))
            .collect()
    }
}

/// User-supplied objective. The value function must be pure; an optional
/// subgradient oracle makes it usable with subgradient directions.
#[derive(Clone)]
pub struct BlackBox {
    name: String,
    value: Arc<ValueFn>,
    subgradient: Option<Arc<GradFn>>,
}

impl BlackBox {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            subgradient: None,
        }
    }

    pub fn with_subgradient(
        mut self,
        subgradient: impl Fn(&[f64]) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.subgradient = Some(Arc::new(subgradient));
        self
    }
}

impl fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBox")
            .field("name", &self.name)
            .field("subgradient", &self.subgradient.is_some())
            .finish()
    }
}

/// A target function φ.
#[derive(Debug, Clone)]
pub enum Objective {
    /// `‖x‖²`
    SquaredNorm,
    /// `‖x‖₁`
    L1Norm,
    Quadratic(Quadratic),
    BlackBox(BlackBox),
}

impl Objective {
    pub fn has_subgradient(&self) -> bool {
        match self {
            Self::BlackBox(b) => b.subgradient.is_some(),
            _ => true,
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if let Self::Quadratic(q) = self {
            check_dim(q.n, x)?;
        }
        if x.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let v = match self {
            Self::SquaredNorm => x.iter().map(|v| v * v).sum(),
            Self::L1Norm => x.iter().map(|v| v.abs()).sum(),
            Self::Quadratic(q) => {
                0.5 * crate::linalg::dot(x, &q.q_times(x)) + crate::linalg::dot(&q.c, x)
            }
            Self::BlackBox(b) => (b.value)(x),
        };
        if !v.is_finite() {
            return Err(Error::InvalidObjective(format!(
                "objective returned non-finite value {v}"
            )));
        }
        Ok(v)
    }

    /// One element of ∂φ(x). For the ℓ1 norm, zero coordinates get
    /// subgradient component 0.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vector> {
        self.check_input(x)?;
        let s = match self {
            Self::SquaredNorm => x.iter().map(|v| 2.0 * v).collect(),
            Self::L1Norm => x
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        1.0
                    } else if v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            Self::Quadratic(q) => {
                let mut g = q.q_times(x);
                crate::linalg::axpy(1.0, &q.c, &mut g);
                g
            }
            Self::BlackBox(b) => {
                let oracle = b.subgradient.as_ref().ok_or(Error::NoSubgradient)?;
                let g = oracle(x);
                check_dim(x.len(), &g)?;
                g
            }
        };
        check_finite(&s)?;
        Ok(s)
    }
}

/// Serializable description of the built-in objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    SquaredNorm,
    L1,
    Quadratic {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        c: Vector,
    },
}

impl ObjectiveSpec {
    pub fn build(&self) -> Result<Objective> {
        Ok(match self {
            Self::SquaredNorm => Objective::SquaredNorm,
            Self::L1 => Objective::L1Norm,
            Self::Quadratic { q, c } => Objective::Quadratic(Quadratic::new(q.clone(), c.clone())?),
        })
    }
}

/// A vector of norm at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vector);

impl Direction {
    pub fn new(v: Vector) -> Result<Self> {
        check_finite(&v)?;
        let n = norm(&v);
        if n > 1.0 + 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "direction norm {n} exceeds 1"
            )));
        }
        Ok(Self(v))
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// `v / ‖v‖`, or zero when `v` is zero.
    pub fn normalized(v: Vector) -> Self {
        let n = norm(&v);
        if n == 0.0 || !n.is_finite() {
            return Self::zero(v.len());
        }
        Self(v.into_iter().map(|x| x / n).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vector {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

/// `−s/‖s‖` for a subgradient `s`, or zero when `0 ∈ ∂φ(y)`.
pub fn subgradient_direction(obj: &Objective, y: &[f64]) -> Result<Direction> {
    if !obj.has_subgradient() {
        return Err(Error::NoSubgradient);
    }
    let s = obj.subgradient(y)?;
    Ok(Direction::normalized(s.into_iter().map(|v| -v).collect()))
}

/// Sample `trials` unit directions from `seed` and return the first `d` with
/// `φ(y + r·d) <= φ(y)`, or zero if none qualifies.
pub fn derivative_free_direction(
    obj: &Objective,
    y: &[f64],
    probe_radius: f64,
    trials: usize,
    seed: u64,
) -> Result<Direction> {
    if !(probe_radius > 0.0 && probe_radius.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "probe radius must be positive, got {probe_radius}"
        )));
    }
    let base = obj.evaluate(y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe = vec![0.0; y.len()];
    for _ in 0..trials {
        let raw: Vector = (0..y.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let d = Direction::normalized(raw);
        if d.is_zero() {
            continue;
        }
        for ((p, yi), di) in probe.iter_mut().zip(y).zip(d.as_slice()) {
            *p = yi + probe_radius * di;
        }
        if obj.evaluate(&probe)? <= base {
            return Ok(d);
        }
    }
    Ok(Direction::zero(y.len()))
}

/// Checks `φ(y + λd) <= φ(y) + 1e-12` on the grid `λ = delta·j/16`, j = 0..16.
pub fn verify_nonascending(obj: &Objective, y: &[f64], d: &Direction, delta: f64) -> Result<bool> {
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "delta must be positive, got {delta}"
        )));
    }
    check_dim(y.len(), d.as_slice())?;
    let base = obj.evaluate(y)?;
    let mut z = vec![0.0; y.len()];
    for j in 0..=16 {
        let lambda = delta * j as f64 / 16.0;
        for ((zi, yi), di) in z.iter_mut().zip(y).zip(d.as_slice()) {
            *zi = yi + lambda * di;
        }
        if obj.evaluate(&z)? > base + 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}
