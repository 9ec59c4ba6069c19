//! Closed convex constraint sets in level-set form, their orthogonal
//! projections, and the proximity function of a constraint family.
//!
//! Every set kind has a closed-form projection. Membership is evaluated
//! exactly (`q(x) <= gamma` with no tolerance band): a point that passes the
//! membership test is returned bitwise unchanged by [`ConstraintSet::project`].
//! Halfspace and ball projections are corrected by a few ulps when rounding
//! would otherwise leave the result just outside the set, so that projecting
//! twice is the identity for those kinds as well as for boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, check_dim, check_finite, dot, norm_sq, Vector};

/// One closed convex set `{x | q(x) <= gamma}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawSet")]
pub enum ConstraintSet {
    /// `a·x <= b`
    Halfspace { a: Vector, b: f64 },
    /// `a·x = b`
    Hyperplane { a: Vector, b: f64 },
    /// `‖x − center‖ <= radius`
    Ball { center: Vector, radius: f64 },
    /// `lower <= x <= upper` componentwise
    Box { lower: Vector, upper: Vector },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawSet {
    Halfspace { a: Vector, b: f64 },
    Hyperplane { a: Vector, b: f64 },
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
}

impl TryFrom<RawSet> for ConstraintSet {
    type Error = Error;

    fn try_from(raw: RawSet) -> Result<Self> {
        match raw {
            RawSet::Halfspace { a, b } => Self::halfspace(a, b),
            RawSet::Hyperplane { a, b } => Self::hyperplane(a, b),
            RawSet::Ball { center, radius } => Self::ball(center, radius),
            RawSet::Box { lower, upper } => Self::bounds(lower, upper),
        }
    }
}

fn check_normal(a: &[f64], b: f64) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidSet("normal vector is empty".into()));
    }
    check_finite(a)?;
    if !b.is_finite() {
        return Err(Error::InvalidSet("offset is not finite".into()));
    }
    if norm_sq(a) <= 0.0 {
        return Err(Error::InvalidSet("normal vector has zero norm".into()));
    }
    Ok(())
}

impl ConstraintSet {
    pub fn halfspace(a: Vector, b: f64) -> Result<Self> {
        check_normal(&a, b)?;
        Ok(Self::Halfspace { a, b })
    }

    pub fn hyperplane(a: Vector, b: f64) -> Result<Self> {
        check_normal(&a, b)?;
        Ok(Self::Hyperplane { a, b })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidSet("ball center is empty".into()));
        }
        check_finite(&center)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSet(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self::Ball { center, radius })
    }

    /// Axis-aligned box `[lower, upper]`.
    pub fn bounds(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidSet("box bounds are empty".into()));
        }
        check_dim(lower.len(), &upper)?;
        check_finite(&lower)?;
        check_finite(&upper)?;
        if let Some(j) = lower.iter().zip(&upper).position(|(l, u)| l > u) {
            return Err(Error::InvalidSet(format!(
                "box lower bound exceeds upper bound at component {j}"
            )));
        }
        Ok(Self::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Halfspace { a, .. } | Self::Hyperplane { a, .. } => a.len(),
            Self::Ball { center, .. } => center.len(),
            Self::Box { lower, .. } => lower.len(),
        }
    }

    /// Exact membership test `q(x) <= gamma`.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x)?;
        Ok(self.contains_unchecked(x))
    }

    fn contains_unchecked(&self, x: &[f64]) -> bool {
        match self {
            Self::Halfspace { a, b } => dot(a, x) <= *b,
            Self::Hyperplane { a, b } => dot(a, x) == *b,
            Self::Ball { center, radius } => squared_dist(x, center) <= radius * radius,
            Self::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(xi, (l, u))| l <= xi && xi <= u),
        }
    }

    /// Orthogonal projection of `x` onto the set.
    pub fn project(&self, x: &[f64]) -> Result<Vector> {
        check_dim(self.dim(), x)?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &[f64]) -> Vector {
        if self.contains_unchecked(x) {
            return x.to_vec();
        }
        match self {
            Self::Halfspace { a, b } => {
                let nrm2 = norm_sq(a);
                let mut p = x.to_vec();
                axpy(-(dot(a, x) - b) / nrm2, a, &mut p);
                // Rounding can leave a·p a few ulps above b.
                let mut scale = 1.0;
                for _ in 0..64 {
                    let excess = dot(a, &p) - b;
                    if excess <= 0.0 {
                        break;
                    }
                    let floor = f64::EPSILON * b.abs().max(dot(a, &p).abs()).max(f64::MIN_POSITIVE);
                    axpy(-scale * excess.max(floor) / nrm2, a, &mut p);
                    scale *= 2.0;
                }
                p
            }
            Self::Hyperplane { a, b } => {
                let mut p = x.to_vec();
                axpy(-(dot(a, x) - b) / norm_sq(a), a, &mut p);
                p
            }
            Self::Ball { center, radius } => {
                let d = squared_dist(x, center).sqrt();
                let mut factor = radius / d;
                let mut p: Vector = x
                    .iter()
                    .zip(center)
                    .map(|(xi, ci)| ci + factor * (xi - ci))
                    .collect();
                let mut shrink = f64::EPSILON;
                for _ in 0..64 {
                    if squared_dist(&p, center) <= radius * radius {
                        break;
                    }
                    factor *= 1.0 - shrink;
                    shrink *= 2.0;
                    for ((pi, xi), ci) in p.iter_mut().zip(x).zip(center) {
                        *pi = ci + factor * (xi - ci);
                    }
                }
                p
            }
            Self::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(xi, (l, u))| xi.max(*l).min(*u))
                .collect(),
        }
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(self.distance_unchecked(x))
    }

    pub(crate) fn distance_unchecked(&self, x: &[f64]) -> f64 {
        if self.contains_unchecked(x) {
            return 0.0;
        }
        squared_dist(x, &self.project_unchecked(x)).sqrt()
    }

    /// True when the set is bounded, i.e. could sit inside a box.
    fn is_bounded(&self) -> bool {
        match self {
            Self::Halfspace { .. } => false,
            Self::Hyperplane { a, .. } => a.len() == 1,
            Self::Ball { .. } | Self::Box { .. } => true,
        }
    }

    /// Smallest box containing the set, when it is bounded.
    fn bounding_box(&self) -> Option<(Vector, Vector)> {
        if !self.is_bounded() {
            return None;
        }
        match self {
            Self::Hyperplane { a, b } => {
                let p = b / a[0];
                Some((vec![p], vec![p]))
            }
            Self::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            Self::Box { lower, upper } => Some((lower.clone(), upper.clone())),
            Self::Halfspace { .. } => None,
        }
    }
}

fn squared_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Ambient box Λ that contains every constraint set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ambient {
    pub lower: Vector,
    pub upper: Vector,
}

/// The family Θ = {C_i} together with an optional ambient box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct ConstraintFamily {
    dim: usize,
    sets: Vec<ConstraintSet>,
    ambient: Option<Ambient>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    dim: usize,
    sets: Vec<ConstraintSet>,
    #[serde(default)]
    ambient: Option<Ambient>,
}

impl TryFrom<RawFamily> for ConstraintFamily {
    type Error = Error;

    fn try_from(raw: RawFamily) -> Result<Self> {
        let family = Self::with_ambient(raw.sets, raw.ambient)?;
        if family.dim != raw.dim {
            return Err(Error::InvalidFamily(format!(
                "declared dim {} but sets have dimension {}",
                raw.dim, family.dim
            )));
        }
        Ok(family)
    }
}

impl ConstraintFamily {
    /// Family over all of R^n.
    pub fn new(sets: Vec<ConstraintSet>) -> Result<Self> {
        Self::with_ambient(sets, None)
    }

    pub fn with_ambient(sets: Vec<ConstraintSet>, ambient: Option<Ambient>) -> Result<Self> {
        let first = sets
            .first()
            .ok_or_else(|| Error::InvalidFamily("family needs at least one set".into()))?;
        let dim = first.dim();
        if let Some(i) = sets.iter().position(|s| s.dim() != dim) {
            return Err(Error::InvalidFamily(format!(
                "set {i} has dimension {} but set 0 has dimension {dim}",
                sets[i].dim()
            )));
        }
        if let Some(amb) = &ambient {
            // validates shape and ordering
            ConstraintSet::bounds(amb.lower.clone(), amb.upper.clone())?;
            check_dim(dim, &amb.lower)?;
            for (i, set) in sets.iter().enumerate() {
                let (lo, hi) = set.bounding_box().ok_or_else(|| {
                    Error::InvalidFamily(format!(
                        "set {i} is unbounded and cannot lie inside the ambient box"
                    ))
                })?;
                let inside = lo.iter().zip(&amb.lower).all(|(l, al)| al <= l)
                    && hi.iter().zip(&amb.upper).all(|(h, au)| h <= au);
                if !inside {
                    return Err(Error::InvalidFamily(format!(
                        "set {i} is not contained in the ambient box"
                    )));
                }
            }
        }
        Ok(Self { dim, sets, ambient })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[ConstraintSet] {
        &self.sets
    }

    pub fn ambient(&self) -> Option<&Ambient> {
        self.ambient.as_ref()
    }

    pub fn set(&self, index: usize) -> Result<&ConstraintSet> {
        self.sets.get(index).ok_or(Error::IndexOutOfRange {
            index,
            m: self.sets.len(),
        })
    }

    /// Mean squared distance to the sets: `(1/m) Σ_i d(x, C_i)²`.
    pub fn proximity(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        Ok(self.proximity_unchecked(x))
    }

    pub(crate) fn proximity_unchecked(&self, x: &[f64]) -> f64 {
        let total: f64 = self
            .sets
            .iter()
            .map(|s| s.distance_unchecked(x).powi(2))
            .sum();
        total / self.sets.len() as f64
    }

    pub fn is_epsilon_compatible(&self, x: &[f64], eps: f64) -> Result<bool> {
        if !(eps > 0.0) {
            return Err(Error::NonPositiveEpsilon(eps));
        }
        Ok(self.proximity(x)? <= eps)
    }

    pub fn is_feasible(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim, x)?;
        Ok(self.sets.iter().all(|s| s.contains_unchecked(x)))
    }
}

/// Free-function form of [`ConstraintSet::project`].
pub fn project(set: &ConstraintSet, x: &[f64]) -> Result<Vector> {
    set.project(x)
}

pub fn distance(set: &ConstraintSet, x: &[f64]) -> Result<f64> {
    set.distance(x)
}

pub fn proximity(family: &ConstraintFamily, x: &[f64]) -> Result<f64> {
    family.proximity(x)
}

pub fn is_epsilon_compatible(family: &ConstraintFamily, x: &[f64], eps: f64) -> Result<bool> {
    family.is_epsilon_compatible(x, eps)
}
