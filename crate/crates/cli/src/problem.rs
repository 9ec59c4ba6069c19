//! Seeded problem generation.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use superiorization::geometry::{ConstraintFamily, ConstraintSet};
use superiorization::linalg::{dot, norm, Vector};
use superiorization::seed::mix_seed;

const X0_STREAM: u64 = 0x5eed_0f01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// Halfspaces with unit normals, all containing the ball of `radius`
    /// around a random center (the witness).
    RandomHalfspaces {
        n: usize,
        m: usize,
        radius: f64,
        seed: u64,
    },
    /// Hyperplanes with unit normals. Consistent systems pass through a
    /// random witness; inconsistent ones repeat the first normal with the
    /// offset shifted by one.
    RandomHyperplanes {
        n: usize,
        m: usize,
        seed: u64,
        consistent: bool,
    },
    /// Sparse-row hyperplane system through a nonnegative witness.
    SparseSystem {
        n: usize,
        m: usize,
        density: f64,
        seed: u64,
    },
    Explicit {
        family: ConstraintFamily,
        #[serde(default)]
        witness: Option<Vector>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum X0Spec {
    /// `scale · N(0, I)` drawn from the problem seed.
    Gaussian {
        scale: f64,
    },
    Explicit {
        point: Vector,
    },
}

impl Default for X0Spec {
    fn default() -> Self {
        Self::Gaussian { scale: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub generator: Generator,
    #[serde(default)]
    pub x0: X0Spec,
}

/// A generated problem: family, optional feasible witness and starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInstance {
    pub family: ConstraintFamily,
    #[serde(default)]
    pub witness: Option<Vector>,
    pub x0: Vector,
}

impl ProblemSpec {
    pub fn seed(&self) -> u64 {
        match self.generator {
            Generator::RandomHalfspaces { seed, .. }
            | Generator::RandomHyperplanes { seed, .. }
            | Generator::SparseSystem { seed, .. } => seed,
            Generator::Explicit { .. } => 0,
        }
    }

    /// Same spec with the generator seed replaced (no-op for explicit families).
    pub fn with_seed(&self, new_seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out.generator {
            Generator::RandomHalfspaces { seed, .. }
            | Generator::RandomHyperplanes { seed, .. }
            | Generator::SparseSystem { seed, .. } => *seed = new_seed,
            Generator::Explicit { .. } => {}
        }
        out
    }
}

fn unit_gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v: Vector = (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let len = norm(&v);
        if len > 0.0 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n < 1 {
        bail!("n must be at least 1, got {n}");
    }
    if m < 1 {
        bail!("m must be at least 1, got {m}");
    }
    Ok(())
}

/// Build the family and witness described by `generator`.
pub fn generate_family(generator: &Generator) -> Result<(ConstraintFamily, Option<Vector>)> {
    match generator {
        &Generator::RandomHalfspaces { n, m, radius, seed } => {
            check_sizes(n, m)?;
            if !(radius > 0.0 && radius.is_finite()) {
                bail!("radius must be positive, got {radius}");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let center: Vector = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sets = (0..m)
                .map(|_| {
                    let a = unit_gaussian(&mut rng, n);
                    let slack = radius * rng.gen::<f64>();
                    let b = dot(&a, &center) + radius + slack;
                    ConstraintSet::halfspace(a, b)
                })
                .collect::<superiorization::Result<Vec<_>>>()?;
            Ok((ConstraintFamily::new(sets)?, Some(center)))
        }
        &Generator::RandomHyperplanes {
            n,
            m,
            seed,
            consistent,
        } => {
            check_sizes(n, m)?;
            if !consistent && m < 2 {
                bail!("an inconsistent hyperplane system needs m >= 2");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let witness: Vector = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut rows: Vec<(Vector, f64)> = (0..m)
                .map(|_| {
                    let a = unit_gaussian(&mut rng, n);
                    let b = dot(&a, &witness);
                    (a, b)
                })
                .collect();
            if !consistent {
                let (a0, b0) = rows[0].clone();
                rows[m - 1] = (a0, b0 + 1.0);
            }
            let sets = rows
                .into_iter()
                .map(|(a, b)| ConstraintSet::hyperplane(a, b))
                .collect::<superiorization::Result<Vec<_>>>()?;
            Ok((ConstraintFamily::new(sets)?, consistent.then_some(witness)))
        }
        &Generator::SparseSystem {
            n,
            m,
            density,
            seed,
        } => {
            check_sizes(n, m)?;
            if !(density > 0.0 && density <= 1.0) {
                bail!("density must lie in (0, 1], got {density}");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let witness: Vector = (0..n).map(|_| rng.gen::<f64>()).collect();
            let sets = (0..m)
                .map(|_| {
                    let mut a: Vector = (0..n)
                        .map(|_| {
                            if rng.gen::<f64>() < density {
                                rng.gen_range(0.1..1.0)
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    if a.iter().all(|v| *v == 0.0) {
                        let j = rng.gen_range(0..n);
                        a[j] = rng.gen_range(0.1..1.0);
                    }
                    let b = dot(&a, &witness);
                    ConstraintSet::hyperplane(a, b)
                })
                .collect::<superiorization::Result<Vec<_>>>()?;
            Ok((ConstraintFamily::new(sets)?, Some(witness)))
        }
        Generator::Explicit { family, witness } => {
            if let Some(w) = witness {
                if w.len() != family.dim() {
                    bail!(
                        "witness has dimension {} but the family has dimension {}",
                        w.len(),
                        family.dim()
                    );
                }
            }
            Ok((family.clone(), witness.clone()))
        }
    }
}

/// Generate the full instance, including the starting point.
pub fn generate(spec: &ProblemSpec) -> Result<ProblemInstance> {
    let (family, witness) = generate_family(&spec.generator)?;
    let x0 = match &spec.x0 {
        X0Spec::Gaussian { scale } => {
            if !(scale.is_finite() && *scale >= 0.0) {
                bail!("x0 scale must be nonnegative, got {scale}");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed(), X0_STREAM));
            (0..family.dim())
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    scale * z
                })
                .collect()
        }
        X0Spec::Explicit { point } => {
            if point.len() != family.dim() {
                bail!(
                    "x0 has dimension {} but the family has dimension {}",
                    point.len(),
                    family.dim()
                );
            }
            point.clone()
        }
    };
    Ok(ProblemInstance {
        family,
        witness,
        x0,
    })
}
