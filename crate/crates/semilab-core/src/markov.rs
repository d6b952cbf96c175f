//! Continuous-time Markov chains on finite state spaces: jump-chain
//! simulation with per-trajectory RNG substreams, Monte Carlo transition
//! operators, martingale-residual verification, compact containment and
//! generator extension diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{apply, op_norm, sup_norm, Element, Operator};
use crate::semigroup::exp_operator;

/// Chain description as stored on disk: jump rates, optional state metric,
/// designated boundary states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainSpec {
    pub q: Operator,
    #[serde(default)]
    pub metric: Option<Operator>,
    #[serde(default)]
    pub boundary: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QValidation {
    pub valid: bool,
    pub violations: Vec<String>,
}

/// Conservative-generator check: nonnegative off-diagonals, zero row sums.
pub fn validate_q(q: &Operator) -> QValidation {
    let n = q.dim;
    let mut violations = Vec::new();
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            let v = q.get(i, j);
            row_sum += v;
            if i != j && v < 0.0 {
                violations.push(format!("negative off-diagonal at ({i}, {j}): {v}"));
            }
        }
        if row_sum.abs() > 1e-12 {
            violations.push(format!("row {i} sums to {row_sum:e}"));
        }
    }
    QValidation {
        valid: violations.is_empty(),
        violations,
    }
}

/// Piecewise-constant path: state `states[i]` is held on
/// [times[i], times[i+1]), the last state up to the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<usize>,
    pub horizon: f64,
}

impl Trajectory {
    pub fn state_at(&self, t: f64) -> usize {
        match self.times.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => self.states[i],
            Err(0) => self.states[0],
            Err(i) => self.states[i - 1],
        }
    }

    /// Exact int_s^t g(X(u)) du along the piecewise-constant path.
    pub fn path_integral(&self, g: &[f64], s: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.states.len() {
            let seg_start = self.times[i];
            let seg_end = if i + 1 < self.times.len() {
                self.times[i + 1]
            } else {
                self.horizon
            };
            let lo = seg_start.max(s);
            let hi = seg_end.min(t);
            if hi > lo {
                acc += g[self.states[i]] * (hi - lo);
            }
        }
        acc
    }
}

fn simulate_with_rng(q: &Operator, x0: usize, horizon: f64, rng: &mut ChaCha12Rng) -> Trajectory {
    let n = q.dim;
    let mut times = vec![0.0];
    let mut states = vec![x0];
    let mut t = 0.0;
    let mut state = x0;
    loop {
        let rate = -q.get(state, state);
        if rate <= 0.0 {
            break; // absorbing
        }
        let u: f64 = rng.gen::<f64>();
        let hold = -(1.0 - u).ln() / rate;
        t += hold;
        if t >= horizon {
            break;
        }
        // jump proportional to the off-diagonal row
        let mut draw: f64 = rng.gen::<f64>() * rate;
        let mut next = state;
        for j in 0..n {
            if j == state {
                continue;
            }
            draw -= q.get(state, j);
            if draw <= 0.0 {
                next = j;
                break;
            }
        }
        if next == state {
            // numerical leftover mass: take the largest off-diagonal target
            next = (0..n)
                .filter(|&j| j != state)
                .max_by(|&a, &b| q.get(state, a).partial_cmp(&q.get(state, b)).unwrap())
                .unwrap_or(state);
        }
        state = next;
        times.push(t);
        states.push(state);
    }
    Trajectory {
        times,
        states,
        horizon,
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Exact jump-chain simulation; bit-identical for a fixed (seed, stream).
pub fn simulate(q: &Operator, x0: usize, horizon: f64, seed: u64) -> Result<Trajectory> {
    let v = validate_q(q);
    if !v.valid {
        return Err(Error::InvalidParameter(v.violations.join("; ")));
    }
    if x0 >= q.dim {
        return Err(Error::InvalidParameter(format!("x0 {x0} out of range")));
    }
    Ok(simulate_with_rng(q, x0, horizon, &mut stream_rng(seed, 0)))
}

/// One trajectory per substream index; the batch is independent of worker
/// count and assembled in index order.
fn simulate_batch(q: &Operator, x0: usize, horizon: f64, seed: u64, count: usize) -> Vec<Trajectory> {
    (0..count)
        .into_par_iter()
        .map(|i| simulate_with_rng(q, x0, horizon, &mut stream_rng(seed, i as u64)))
        .collect()
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate of E[f(X(t))] started from x0, with standard error.
pub fn transition_mc(
    q: &Operator,
    t: f64,
    f: &[f64],
    x0: usize,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n < 100 {
        return Err(Error::InvalidParameter("need at least 100 trajectories".into()));
    }
    if f.len() != q.dim {
        return Err(Error::DimensionMismatch {
            expected: q.dim,
            got: f.len(),
        });
    }
    let v = validate_q(q);
    if !v.valid {
        return Err(Error::InvalidParameter(v.violations.join("; ")));
    }
    let trajectories = simulate_batch(q, x0, t, seed, n);
    let values: Vec<f64> = trajectories.iter().map(|tr| f[tr.state_at(t)]).collect();
    Ok(mean_se(&values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleEntry {
    pub s: f64,
    pub t: f64,
    pub conditioning_state: usize,
    pub residual_mean: f64,
    pub standard_error: f64,
    pub sample_count: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleReport {
    pub entries: Vec<MartingaleEntry>,
    pub all_pass: bool,
}

/// Minimum conditioning-state occupancy for a conclusive verdict.
pub const MIN_CONDITIONING_COUNT: usize = 30;

/// Tests E[M_f(t) - M_f(s) | X(s) = y] = 0 for the residual
/// M_f(t) = f(X(t)) - f(X(0)) - int_0^t Af(X(u)) du, with the path integral
/// computed exactly on piecewise-constant trajectories.
pub fn martingale_check(
    q_for_sim: &Operator,
    f: &[f64],
    af_claimed: &[f64],
    time_pairs: &[(f64, f64)],
    n: usize,
    seed: u64,
) -> Result<MartingaleReport> {
    let dim = q_for_sim.dim;
    if f.len() != dim || af_claimed.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: f.len().max(af_claimed.len()),
        });
    }
    let horizon = time_pairs
        .iter()
        .map(|&(_, t)| t)
        .fold(0.0f64, f64::max);
    for &(s, t) in time_pairs {
        if !(s < t && t <= horizon) {
            return Err(Error::InvalidParameter(format!("bad time pair ({s}, {t})")));
        }
    }
    let v = validate_q(q_for_sim);
    if !v.valid {
        return Err(Error::InvalidParameter(v.violations.join("; ")));
    }
    let trajectories = simulate_batch(q_for_sim, 0, horizon, seed, n);
    let mut entries = Vec::new();
    let mut all_pass = true;
    for &(s, t) in time_pairs {
        let mut by_state: Vec<Vec<f64>> = vec![Vec::new(); dim];
        for tr in &trajectories {
            let y = tr.state_at(s);
            let residual =
                f[tr.state_at(t)] - f[y] - tr.path_integral(af_claimed, s, t);
            by_state[y].push(residual);
        }
        for (state, residuals) in by_state.iter().enumerate() {
            if residuals.is_empty() {
                continue;
            }
            let (mean, se) = mean_se(residuals);
            let verdict = if residuals.len() < MIN_CONDITIONING_COUNT {
                Verdict::Inconclusive
            } else if mean.abs() <= (3.0 * se).max(1e-12) {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            if verdict == Verdict::Fail {
                all_pass = false;
            }
            entries.push(MartingaleEntry {
                s,
                t,
                conditioning_state: state,
                residual_mean: mean,
                standard_error: se,
                sample_count: residuals.len(),
                verdict,
            });
        }
    }
    Ok(MartingaleReport { entries, all_pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContainmentReport {
    pub per_start: Vec<(usize, f64, f64)>,
    pub min_probability: f64,
    pub se_at_min: f64,
}

/// min over x in K of the Monte Carlo estimate of
/// P_x[X(s) in K_hat for all s <= T].
pub fn compact_containment(
    q: &Operator,
    k: &[usize],
    k_hat: &[usize],
    horizon: f64,
    n: usize,
    seed: u64,
) -> Result<ContainmentReport> {
    if !k.iter().all(|x| k_hat.contains(x)) {
        return Err(Error::InvalidParameter("K must be contained in K_hat".into()));
    }
    let v = validate_q(q);
    if !v.valid {
        return Err(Error::InvalidParameter(v.violations.join("; ")));
    }
    let in_hat: Vec<bool> = (0..q.dim).map(|i| k_hat.contains(&i)).collect();
    let mut per_start = Vec::new();
    let mut min_p = f64::INFINITY;
    let mut se_at_min = 0.0;
    for (offset, &x0) in k.iter().enumerate() {
        // distinct substream block per starting state
        let base = seed.wrapping_add(offset as u64 * 0x9e37_79b9_7f4a_7c15);
        let trajectories = simulate_batch(q, x0, horizon, base, n);
        let hits: Vec<f64> = trajectories
            .iter()
            .map(|tr| {
                if tr.states.iter().all(|&s| in_hat[s]) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let (p, se) = mean_se(&hits);
        if p < min_p {
            min_p = p;
            se_at_min = se;
        }
        per_start.push((x0, p, se));
    }
    Ok(ContainmentReport {
        per_start,
        min_probability: min_p,
        se_at_min,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionRow {
    pub t: f64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub rows: Vec<ExtensionRow>,
    pub monotone: bool,
    pub final_bound: f64,
    pub pass: bool,
}

/// sup over K of |(S(t) f - f)/t - Qf| along a decreasing t sequence; the
/// final error must sit below the first-order Taylor remainder bound.
pub fn generator_extension_check(
    q: &Operator,
    f: &[f64],
    k: &[usize],
    t_seq: &[f64],
) -> Result<ExtensionReport> {
    if t_seq.is_empty() || t_seq.windows(2).any(|w| w[1] >= w[0]) || t_seq.iter().any(|&t| t <= 0.0)
    {
        return Err(Error::InvalidParameter(
            "t sequence must be positive and strictly decreasing".into(),
        ));
    }
    let fx = Element::new(f.to_vec())?;
    let qf = apply(q, &fx)?;
    let mut rows = Vec::new();
    for &t in t_seq {
        let st = exp_operator(q, t, 1e-14)?;
        let stf = apply(&st, &fx)?;
        let quotient = stf.sub(&fx).scale(1.0 / t);
        let diff = quotient.sub(&qf);
        let sup_error = k
            .iter()
            .map(|&i| diff.values[i].abs())
            .fold(0.0f64, f64::max);
        rows.push(ExtensionRow { t, sup_error });
    }
    let monotone = rows.windows(2).all(|w| w[1].sup_error <= w[0].sup_error + 1e-15);
    let t_last = *t_seq.last().unwrap();
    let q2f = apply(q, &qf)?;
    let final_bound = 0.5 * t_last * sup_norm(&q2f) * (t_last * op_norm(q)).exp() * 1.01;
    let pass = monotone && rows.last().unwrap().sup_error <= final_bound;
    Ok(ExtensionReport {
        rows,
        monotone,
        final_bound,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PreservationReport {
    pub rows_stochastic: bool,
    pub worst_row_defect: f64,
    pub boundary_absorbing: bool,
    pub c0_invariant: bool,
    pub pass: bool,
}

/// (i) rows of e^{tQ} are probability vectors; (ii) with an absorbing
/// boundary, functions vanishing on the boundary stay vanishing there.
pub fn c0_and_probability_preservation(
    q: &Operator,
    boundary: &[usize],
    t: f64,
) -> Result<PreservationReport> {
    let n = q.dim;
    let st = exp_operator(q, t, 1e-14)?;
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            let v = st.get(i, j);
            worst = worst.max((-v).max(0.0));
            row_sum += v;
        }
        worst = worst.max((row_sum - 1.0).abs());
    }
    let rows_stochastic = worst <= 1e-10;

    let boundary_absorbing = boundary
        .iter()
        .all(|&b| (0..n).all(|j| j == b || q.get(b, j).abs() == 0.0));
    // f = 1 off the boundary, 0 on it
    let f = Element::new(
        (0..n)
            .map(|i| if boundary.contains(&i) { 0.0 } else { 1.0 })
            .collect(),
    )?;
    let stf = apply(&st, &f)?;
    let c0_invariant = boundary
        .iter()
        .all(|&b| stf.values[b].abs() <= 1e-10);
    Ok(PreservationReport {
        rows_stochastic,
        worst_row_defect: worst,
        boundary_absorbing,
        c0_invariant,
        pass: rows_stochastic && (boundary.is_empty() || c0_invariant),
    })
}
