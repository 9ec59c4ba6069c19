//! Superiorization of feasibility-seeking projection methods.
//!
//! A *basic algorithm* iterates a feasibility-seeking operator `A` built from
//! orthogonal projections onto closed convex sets (string-averaging
//! projections, with Kaczmarz and Cimmino as extreme cases). Its
//! *superiorized version* interlaces bounded, summable perturbations that
//! steer the iterates toward lower values of an objective `φ` without losing
//! convergence toward feasibility:
//!
//! ```text
//! y^{k+1} = A(y^k + β_k v^k),   β_k ≥ 0,   Σ β_k < ∞,   ‖v^k‖ ≤ 1
//! ```
//!
//! Modules:
//!
//! * [`geometry`]: constraint sets, projections, proximity.
//! * [`feasibility`]: string plans, the DSAP step, run loop.
//! * [`objectives`]: target functions and nonascending directions.
//! * [`superiorize`]: step-size schedules and the perturbed iterations.
//! * [`eval`]: ε-outputs, proximity-target curves, Fejér monitoring.
//!
//! ```
//! use superiorization::prelude::*;
//!
//! let family = ConstraintFamily::new(vec![
//!     ConstraintSet::halfspace(vec![-1.0, 0.0], -1.0).unwrap(), // x1 >= 1
//!     ConstraintSet::halfspace(vec![0.0, -1.0], -1.0).unwrap(), // x2 >= 1
//! ])
//! .unwrap();
//! let algo = BasicAlgorithm::cimmino(family);
//! let cfg = SuperiorizerConfig::new(3, Mode::Weak, Schedule::geometric(0.5).unwrap());
//! let stop = StopRule::both(10_000, 1e-10);
//! let trace = run_superiorized(&algo, &Objective::SquaredNorm, &cfg, &[4.0, 3.0], &stop).unwrap();
//! assert!(trace.last().unwrap().prox <= 1e-10);
//! ```

// `!(x > 0.0)` is used deliberately so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod feasibility;
pub mod geometry;
pub mod linalg;
pub mod objectives;
pub mod seed;
pub mod superiorize;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::eval::{
        better_targeted, build_curve, curve_from_indices, epsilon_output, fejer_monitor,
        monotone_subsequence, Comparison, FejerReport, IterateTrace, ProximityTargetCurve,
        StopReason, Verdict,
    };
    pub use crate::feasibility::{
        apply_string, dsap_step, run_basic, BasicAlgorithm, IndexVector, PlanBounds, PlanSource,
        StopRule, StringPlan,
    };
    pub use crate::geometry::{ConstraintFamily, ConstraintSet};
    pub use crate::linalg::Vector;
    pub use crate::objectives::{Direction, Objective, ObjectiveSpec};
    pub use crate::superiorize::{
        run_superiorized, AuxiliaryAlgorithm, DirectionSource, Mode, Restart, Schedule,
        SuperiorizerConfig,
    };
}
