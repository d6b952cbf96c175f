//! Weighted-sup seminorms over compact index sets, the membership test for
//! the family of norm-dominated seminorms, truncated countable convex
//! combinations, and mixture seminorms with weights taken from a
//! distribution's ceil cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sup_norm, Element};
use crate::prob::{ceil_cells, Distribution};

/// p(f) = max_m a_m * max_{i in K_m} |f_i| with positive weights listed in
/// nonincreasing order and nonempty index sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormSpec {
    pub weights: Vec<f64>,
    pub sets: Vec<Vec<usize>>,
}

impl SeminormSpec {
    pub fn new(weights: Vec<f64>, sets: Vec<Vec<usize>>) -> Result<Self> {
        let spec = SeminormSpec { weights, sets };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() || self.weights.len() != self.sets.len() {
            return Err(Error::InvalidParameter(
                "weights and sets must be nonempty and of equal length".into(),
            ));
        }
        for w in self.weights.windows(2) {
            if w[1] > w[0] {
                return Err(Error::InvalidParameter(
                    "weights must be listed in nonincreasing order".into(),
                ));
            }
        }
        if self.weights.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::InvalidParameter("weights must be strictly positive".into()));
        }
        if self.sets.iter().any(|k| k.is_empty()) {
            return Err(Error::InvalidParameter("index sets must be nonempty".into()));
        }
        Ok(())
    }

    /// Reduces to the plain sup-norm on dim indices.
    pub fn norm_like(dim: usize) -> Self {
        SeminormSpec {
            weights: vec![1.0],
            sets: vec![(0..dim).collect()],
        }
    }
}

/// Finite truncation of a countable convex combination of seminorms, with
/// the dropped mass kept explicit. Truncation error on any f is at most
/// tail_mass * sup_norm(f) because every member seminorm is norm-dominated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexCombo {
    pub terms: Vec<(f64, SeminormSpec)>,
    pub tail_mass: f64,
}

impl ConvexCombo {
    pub fn validate(&self) -> Result<()> {
        if self.tail_mass < 0.0 {
            return Err(Error::InvalidParameter("tail_mass must be >= 0".into()));
        }
        let total: f64 = self.terms.iter().map(|(a, _)| a).sum::<f64>() + self.tail_mass;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "combination weights sum to {total}, expected 1"
            )));
        }
        for (a, spec) in &self.terms {
            if !(*a > 0.0 && *a <= 1.0) {
                return Err(Error::InvalidParameter(format!("term weight {a} outside (0,1]")));
            }
            spec.validate()?;
            if !in_n(spec) {
                return Err(Error::InvalidParameter(
                    "combination term is not norm-dominated".into(),
                ));
            }
        }
        Ok(())
    }
}

pub fn eval_seminorm(spec: &SeminormSpec, f: &Element) -> Result<f64> {
    spec.validate()?;
    let mut best = 0.0f64;
    for (a, k) in spec.weights.iter().zip(&spec.sets) {
        let mut sup = 0.0f64;
        for &i in k {
            if i >= f.dim() {
                return Err(Error::DimensionMismatch {
                    expected: f.dim(),
                    got: i + 1,
                });
            }
            sup = sup.max(f.values[i].abs());
        }
        best = best.max(a * sup);
    }
    Ok(best)
}

/// p = sum_k alpha_k p_k over the truncated terms.
pub fn combine(combo: &ConvexCombo, f: &Element) -> Result<f64> {
    combo.validate()?;
    let mut acc = 0.0;
    for (a, spec) in &combo.terms {
        acc += a * eval_seminorm(spec, f)?;
    }
    Ok(acc)
}

/// Structural membership in the norm-dominated family: largest weight <= 1.
pub fn in_n(spec: &SeminormSpec) -> bool {
    spec.weights.iter().cloned().fold(0.0f64, f64::max) <= 1.0
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationByNormReport {
    pub member: bool,
    pub samples: usize,
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Randomized verification that p(f) <= sup_norm(f) on the given samples.
pub fn dominated_by_norm_check(spec: &SeminormSpec, samples: &[Element]) -> Result<DominationByNormReport> {
    let member = in_n(spec);
    let mut worst = 0.0f64;
    for f in samples {
        let p = eval_seminorm(spec, f)?;
        let n = sup_norm(f);
        if n > 0.0 {
            worst = worst.max(p / n);
        }
    }
    Ok(DominationByNormReport {
        member,
        samples: samples.len(),
        worst_ratio: worst,
        pass: !member || worst <= 1.0 + 1e-12,
    })
}

/// Builds E[q_{ceil(Z)}] as a convex combination with weights P[ceil(Z) = k]
/// on q_k, truncated where the remaining mass drops below 1e-10.
pub fn mixture_seminorm(dist: &Distribution, seq: &[SeminormSpec]) -> Result<ConvexCombo> {
    let (cells, start, tail_mass) = ceil_cells(dist, 1e-10)?;
    let needed = start as usize + cells.len();
    if seq.len() < needed {
        return Err(Error::InvalidParameter(format!(
            "mixture needs {needed} seminorms, got {}",
            seq.len()
        )));
    }
    let mut terms = Vec::new();
    for (i, &mass) in cells.iter().enumerate() {
        if mass > 0.0 {
            terms.push((mass, seq[start as usize + i].clone()));
        }
    }
    let combo = ConvexCombo { terms, tail_mass };
    combo.validate()?;
    Ok(combo)
}

/// Checks q_k <= q_{k+1} pointwise on the given samples.
pub fn check_nondecreasing(seq: &[SeminormSpec], samples: &[Element]) -> Result<bool> {
    for pair in seq.windows(2) {
        for f in samples {
            if eval_seminorm(&pair[0], f)? > eval_seminorm(&pair[1], f)? + 1e-12 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct StrictConvergenceReport {
    pub uniformly_bounded: bool,
    pub sup_of_norms: f64,
    pub uniform_on_compacts: bool,
    pub final_deviation: f64,
    pub converges: bool,
}

/// Sequential convergence in the strict sense: the sequence must be
/// uniformly norm-bounded and converge uniformly on every declared compact
/// index set.
pub fn strict_converges(
    seq: &[Element],
    limit: &Element,
    family: &[Vec<usize>],
    norm_bound: f64,
    tol: f64,
) -> Result<StrictConvergenceReport> {
    if seq.is_empty() {
        return Err(Error::InvalidParameter("empty sequence".into()));
    }
    let sup_of_norms = seq.iter().map(sup_norm).fold(0.0f64, f64::max);
    let uniformly_bounded = sup_of_norms <= norm_bound;

    let mut final_dev = 0.0f64;
    let last = seq.last().unwrap();
    for k in family {
        for &i in k {
            if i >= limit.dim() {
                return Err(Error::DimensionMismatch {
                    expected: limit.dim(),
                    got: i + 1,
                });
            }
            final_dev = final_dev.max((last.values[i] - limit.values[i]).abs());
        }
    }
    let uniform_on_compacts = final_dev <= tol;
    Ok(StrictConvergenceReport {
        uniformly_bounded,
        sup_of_norms,
        uniform_on_compacts,
        final_deviation: final_dev,
        converges: uniformly_bounded && uniform_on_compacts,
    })
}
