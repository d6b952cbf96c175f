//! Exact tail probabilities, Chernoff bounds and stochastic domination
//! for the distribution family used by the semigroup bounds: exponentials,
//! integer-shape Gammas, Poissons, ceil-scaled Poissons and the two
//! dominating variables built from the rate functions `phi_gamma` and
//! `phi_poisson`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute accuracy of the tail evaluators.
pub const TAIL_ABS_TOL: f64 = 1e-12;

/// Slack allowed in grid domination comparisons.
pub const DOMINATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    /// Exponential with rate beta > 0.
    Exponential { rate: f64 },
    /// Gamma with integer shape >= 1 and rate > 0 (Erlang).
    Gamma { shape: u32, rate: f64 },
    /// Poisson with mean >= 0.
    Poisson { mean: f64 },
    /// ceil(Z / n) with Z ~ Poisson(n * t).
    CeilScaledPoisson { n: u32, t: f64 },
    /// Continuous dominator on [1/lambda0, inf) with tail exp(-phi_gamma(c, lambda0)).
    GammaDominator { lambda0: f64 },
    /// Integer dominator on {ceil(T), ...} with tail exp(-phi_poisson(k, T)).
    PoissonDominator { horizon: f64 },
    /// Point mass at v.
    PointMass { v: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Distribution::Exponential { rate } => rate > 0.0,
            Distribution::Gamma { shape, rate } => shape >= 1 && rate > 0.0,
            Distribution::Poisson { mean } => mean >= 0.0,
            Distribution::CeilScaledPoisson { n, t } => n >= 1 && t >= 0.0,
            Distribution::GammaDominator { lambda0 } => lambda0 > 0.0,
            Distribution::PoissonDominator { horizon } => horizon > 0.0,
            Distribution::PointMass { v } => v.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self:?}")))
        }
    }

    /// True if the distribution is supported on a subset of the integers.
    pub fn is_lattice(&self) -> bool {
        matches!(
            self,
            Distribution::Poisson { .. }
                | Distribution::CeilScaledPoisson { .. }
                | Distribution::PoissonDominator { .. }
        ) || matches!(self, Distribution::PointMass { v } if v.fract() == 0.0)
    }

    pub fn mean(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            Distribution::Exponential { rate } => 1.0 / rate,
            Distribution::Gamma { shape, rate } => shape as f64 / rate,
            Distribution::Poisson { mean } => mean,
            Distribution::PointMass { v } => v,
            Distribution::CeilScaledPoisson { .. }
            | Distribution::GammaDominator { .. }
            | Distribution::PoissonDominator { .. } => {
                let (cells, start, tail_mass) = ceil_cells(self, 1e-13)?;
                let mut m = 0.0;
                for (i, p) in cells.iter().enumerate() {
                    m += (start + i as i64) as f64 * p;
                }
                m + tail_mass * (start + cells.len() as i64) as f64
            }
        })
    }
}

/// phi(c, alpha) = c*alpha - 1 - log(c*alpha), the Gamma/exponential rate function.
pub fn phi_gamma(c: f64, alpha: f64) -> Result<f64> {
    let ca = c * alpha;
    if ca <= 0.0 {
        return Err(Error::Domain(format!("phi_gamma needs c*alpha > 0, got {ca}")));
    }
    Ok(ca - 1.0 - ca.ln())
}

/// phi(a, b) = a*log(a/b) - a + b, the Poisson rate function.
pub fn phi_poisson(a: f64, b: f64) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Domain(format!(
            "phi_poisson needs positive arguments, got ({a}, {b})"
        )));
    }
    Ok(a * (a / b).ln() - a + b)
}

/// Upper tail P[X > k] of a Poisson(mu) at the integer threshold k.
fn poisson_tail_int(mu: f64, k: i64) -> f64 {
    if k < 0 {
        return 1.0;
    }
    if mu == 0.0 {
        return 0.0;
    }
    let kf = k as f64;
    if kf < mu {
        // tail close to 1: subtract the short lower sum
        let mut term = (-mu).exp();
        let mut cdf = term;
        for j in 1..=k {
            term *= mu / j as f64;
            cdf += term;
        }
        (1.0 - cdf).max(0.0)
    } else {
        // sum the upper tail; terms decay past the mode
        let mut log_term = -mu + (k as f64 + 1.0) * mu.ln() - ln_factorial(k + 1);
        let mut term = log_term.exp();
        if term == 0.0 {
            // recompute with care for very deep tails
            log_term = log_term.max(-745.0);
            term = log_term.exp();
        }
        let mut sum = 0.0;
        let mut j = k + 1;
        loop {
            sum += term;
            j += 1;
            term *= mu / j as f64;
            if term < 1e-18 * (sum + 1e-300) && j as f64 > mu {
                break;
            }
            if j > k + 10_000_000 {
                break;
            }
        }
        sum.min(1.0)
    }
}

fn ln_factorial(k: i64) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// Exact tail P[X > c], accurate to `TAIL_ABS_TOL`.
pub fn tail(d: &Distribution, c: f64) -> Result<f64> {
    d.validate()?;
    Ok(match *d {
        Distribution::Exponential { rate } => {
            if c < 0.0 {
                1.0
            } else {
                (-rate * c).exp()
            }
        }
        Distribution::Gamma { shape, rate } => {
            if c <= 0.0 {
                1.0
            } else {
                // Erlang tail: exp(-rc) * sum_{j<k} (rc)^j / j!
                let rc = rate * c;
                let mut term = (-rc).exp();
                let mut sum = term;
                for j in 1..shape {
                    term *= rc / j as f64;
                    sum += term;
                }
                sum.min(1.0)
            }
        }
        Distribution::Poisson { mean } => poisson_tail_int(mean, c.floor() as i64),
        Distribution::CeilScaledPoisson { n, t } => {
            if c < 0.0 {
                1.0
            } else {
                // B > c  <=>  Z > n * floor(c)  for Z ~ Poisson(n t)
                poisson_tail_int(n as f64 * t, (n as i64) * (c.floor() as i64))
            }
        }
        Distribution::GammaDominator { lambda0 } => {
            if c <= 1.0 / lambda0 {
                1.0
            } else {
                (-phi_gamma(c, lambda0)?).exp()
            }
        }
        Distribution::PoissonDominator { horizon } => {
            let start = horizon.ceil();
            if c < start {
                1.0
            } else {
                (-phi_poisson(c.floor(), horizon)?).exp()
            }
        }
        Distribution::PointMass { v } => {
            if c < v {
                1.0
            } else {
                0.0
            }
        }
    })
}

/// Masses of ceil(X) on {start, start+1, ...}, truncated once the remaining
/// tail drops below `tail_cut`. Returns (cells, start, tail_mass).
pub fn ceil_cells(d: &Distribution, tail_cut: f64) -> Result<(Vec<f64>, i64, f64)> {
    d.validate()?;
    let start: i64 = match *d {
        Distribution::GammaDominator { lambda0 } => (1.0 / lambda0).ceil() as i64,
        Distribution::PoissonDominator { horizon } => horizon.ceil() as i64,
        Distribution::PointMass { v } => v.ceil() as i64,
        _ => 0,
    };
    let mut cells = Vec::new();
    let mut prev_tail = if start == 0 {
        1.0
    } else {
        tail(d, (start - 1) as f64)?
    };
    let mut k = start;
    loop {
        let t = tail(d, k as f64)?;
        cells.push((prev_tail - t).max(0.0));
        prev_tail = t;
        if t <= tail_cut {
            return Ok((cells, start, t));
        }
        k += 1;
        if (k - start) > 1_000_000 {
            return Err(Error::Unsupported(format!(
                "ceil cells for {d:?} did not reach tail {tail_cut} within 1e6 cells"
            )));
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChernoffResult {
    pub bound: f64,
    pub theta: f64,
    pub rate: f64,
}

/// Optimized Chernoff bound on P[(1/n) sum X_i > c]: exp(-n * sup_theta (c
/// theta - log mgf(theta))). The mgf closure returns None where the moment
/// generating function is infinite. Any feasible theta yields a valid upper
/// bound, so optimizer slack only loosens the result.
pub fn chernoff_bound<F>(mgf: F, c: f64, n: u32, theta_max: f64) -> Result<ChernoffResult>
where
    F: Fn(f64) -> Option<f64>,
{
    if theta_max <= 0.0 {
        return Err(Error::InvalidParameter("theta_max must be positive".into()));
    }
    let rate_at = |theta: f64| -> Option<f64> {
        let m = mgf(theta)?;
        if m.is_finite() && m > 0.0 {
            Some(c * theta - m.ln())
        } else {
            None
        }
    };
    let grid_n = 512;
    let mut best: Option<(f64, f64)> = None;
    for i in 1..grid_n {
        let theta = theta_max * i as f64 / grid_n as f64;
        if let Some(r) = rate_at(theta) {
            if best.map_or(true, |(_, br)| r > br) {
                best = Some((theta, r));
            }
        }
    }
    let (theta0, _) = best.ok_or_else(|| Error::Domain("no feasible theta for mgf".into()))?;
    // golden-section refinement around the best grid point
    let step = theta_max / grid_n as f64;
    let mut lo = (theta0 - step).max(step * 1e-6);
    let mut hi = (theta0 + step).min(theta_max * (1.0 - 1e-12));
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        let ra = rate_at(a).unwrap_or(f64::NEG_INFINITY);
        let rb = rate_at(b).unwrap_or(f64::NEG_INFINITY);
        if ra < rb {
            lo = a;
        } else {
            hi = b;
        }
    }
    let theta = 0.5 * (lo + hi);
    let rate = rate_at(theta)
        .unwrap_or(f64::NEG_INFINITY)
        .max(rate_at(theta0).unwrap_or(f64::NEG_INFINITY));
    Ok(ChernoffResult {
        bound: (-(n as f64) * rate).exp(),
        theta,
        rate,
    })
}

/// Chernoff bound for the distributions with a known mgf, in the
/// normalization matching their sample-mean structure: Gamma(n, n*lambda) is
/// the mean of n Exp(lambda) draws; CeilScaledPoisson tails reduce to the
/// mean of n Poisson(t) draws.
pub fn chernoff_for(d: &Distribution, c: f64) -> Result<ChernoffResult> {
    d.validate()?;
    match *d {
        Distribution::Exponential { rate } => {
            chernoff_bound(|th| (th < rate).then(|| rate / (rate - th)), c, 1, rate)
        }
        Distribution::Gamma { shape, rate } => {
            // mean of `shape` iid Exp(rate / ... ): Gamma(n, r) = mean of n Exp(r/n)
            let lam = rate / shape as f64;
            chernoff_bound(|th| (th < lam).then(|| lam / (lam - th)), c, shape, lam)
        }
        Distribution::Poisson { mean } => {
            let theta_max = ((c.max(1.0) / mean.max(1e-12)).ln() + 10.0).max(1.0);
            chernoff_bound(|th| Some((mean * (th.exp() - 1.0)).exp()), c, 1, theta_max)
        }
        Distribution::CeilScaledPoisson { n, t } => {
            if t <= 0.0 {
                return Err(Error::Domain("chernoff for ceil-scaled Poisson needs t > 0".into()));
            }
            let theta_max = ((c.max(1.0) / t).ln() + 10.0).max(1.0);
            chernoff_bound(|th| Some((t * (th.exp() - 1.0)).exp()), c, n, theta_max)
        }
        _ => Err(Error::Unsupported(format!("no mgf for {d:?}"))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub pass: bool,
    pub points_checked: usize,
    pub worst_c: f64,
    /// tail(d1, c) - tail(d2, c) at the worst grid point; negative means violation.
    pub worst_gap: f64,
}

/// Grid covering both supports up to tail mass 1e-10: 512 log-spaced points
/// plus all lattice points in range for integer-valued distributions.
pub fn domination_grid(d1: &Distribution, d2: &Distribution) -> Result<Vec<f64>> {
    let mut c_max = 1.0;
    while tail(d1, c_max)? > 1e-10 || tail(d2, c_max)? > 1e-10 {
        c_max *= 2.0;
        if c_max > 1e12 {
            return Err(Error::Unsupported("support exceeds grid range".into()));
        }
    }
    let mut grid = vec![0.0];
    let lo: f64 = 1e-6;
    for i in 0..512 {
        let f = i as f64 / 511.0;
        grid.push(lo * (c_max / lo).powf(f));
    }
    if d1.is_lattice() || d2.is_lattice() {
        let mut k = 0.0;
        while k <= c_max {
            grid.push(k);
            // half-offsets catch the ordering between lattice jumps
            grid.push(k + 0.5);
            k += 1.0;
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    Ok(grid)
}

/// Grid-verified check that d1 stochastically dominates d2.
pub fn dominates(d1: &Distribution, d2: &Distribution, c_grid: &[f64]) -> Result<DominationReport> {
    let mut worst_gap = f64::INFINITY;
    let mut worst_c = f64::NAN;
    for &c in c_grid {
        let gap = tail(d1, c)? - tail(d2, c)?;
        if gap < worst_gap {
            worst_gap = gap;
            worst_c = c;
        }
    }
    Ok(DominationReport {
        pass: worst_gap >= -DOMINATION_SLACK,
        points_checked: c_grid.len(),
        worst_c,
        worst_gap,
    })
}

/// Expectation of a bounded increasing function, exact summation on lattice
/// supports and a bracketing Riemann-Stieltjes quadrature otherwise.
pub fn expectation_increasing<F>(d: &Distribution, f: F, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    d.validate()?;
    if let Distribution::PointMass { v } = *d {
        return Ok(f(v));
    }
    if d.is_lattice() {
        let (cells, start, tail_mass) = ceil_cells(d, TAIL_ABS_TOL)?;
        let mut e = 0.0;
        for (i, p) in cells.iter().enumerate() {
            e += f((start + i as i64) as f64) * p;
        }
        e += tail_mass * f((start + cells.len() as i64) as f64);
        return Ok(e);
    }
    // continuous case: bracket sum_i f * dF between lower and upper sums
    let lo = match *d {
        Distribution::GammaDominator { lambda0 } => 1.0 / lambda0,
        _ => 0.0,
    };
    let mut c_max = lo.max(1.0);
    while tail(d, c_max)? > 1e-13 {
        c_max *= 2.0;
    }
    let mut n = 1024usize;
    loop {
        let mut lower = 0.0;
        let mut upper = 0.0;
        let mut prev_tail = tail(d, lo)?;
        // mass at or below the support start
        let head = 1.0 - prev_tail;
        lower += head * f(lo);
        upper += head * f(lo);
        for i in 1..=n {
            let x = lo + (c_max - lo) * i as f64 / n as f64;
            let t = tail(d, x)?;
            let mass = (prev_tail - t).max(0.0);
            let x_prev = lo + (c_max - lo) * (i - 1) as f64 / n as f64;
            lower += mass * f(x_prev);
            upper += mass * f(x);
            prev_tail = t;
        }
        let residual = prev_tail * f(c_max);
        if upper - lower < tol || n >= 1 << 22 {
            return Ok(0.5 * (lower + upper) + residual);
        }
        n *= 2;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpectationComparison {
    pub name: String,
    pub e1: f64,
    pub e2: f64,
    pub pass: bool,
}

/// For d1 dominating d2, expectations of bounded increasing test functions
/// must be ordered the same way.
pub fn domination_expectation_check(
    d1: &Distribution,
    d2: &Distribution,
    tests: &[(&str, &dyn Fn(f64) -> f64)],
) -> Result<Vec<ExpectationComparison>> {
    let mut out = Vec::with_capacity(tests.len());
    for (name, f) in tests {
        let e1 = expectation_increasing(d1, f, 1e-10)?;
        let e2 = expectation_increasing(d2, f, 1e-10)?;
        out.push(ExpectationComparison {
            name: (*name).to_string(),
            e1,
            e2,
            pass: e1 >= e2 - 1e-9,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DominatorReport {
    pub cases: Vec<(u32, f64, DominationReport)>,
    pub pass: bool,
}

/// Verifies that the Gamma dominator with floor rate lambda0 dominates every
/// Gamma(n, n*lambda) with lambda >= lambda0.
pub fn gamma_dominator_check(lambda0: f64, n_list: &[u32], lambda_list: &[f64]) -> Result<DominatorReport> {
    let dom = Distribution::GammaDominator { lambda0 };
    dom.validate()?;
    let mut cases = Vec::new();
    let mut pass = true;
    for &n in n_list {
        for &lam in lambda_list {
            if lam < lambda0 {
                return Err(Error::InvalidParameter(format!(
                    "lambda {lam} below floor {lambda0}"
                )));
            }
            let g = Distribution::Gamma { shape: n, rate: n as f64 * lam };
            let grid = domination_grid(&dom, &g)?;
            let rep = dominates(&dom, &g, &grid)?;
            pass &= rep.pass;
            cases.push((n, lam, rep));
        }
    }
    Ok(DominatorReport { cases, pass })
}

/// Verifies that the Poisson dominator for horizon T dominates every
/// ceil-scaled Poisson B_{n,t} with t <= T, exactly on the integer lattice.
pub fn poisson_dominator_check(horizon: f64, n_list: &[u32], t_list: &[f64]) -> Result<DominatorReport> {
    let dom = Distribution::PoissonDominator { horizon };
    dom.validate()?;
    let mut cases = Vec::new();
    let mut pass = true;
    for &n in n_list {
        for &t in t_list {
            if t > horizon {
                return Err(Error::InvalidParameter(format!(
                    "t {t} exceeds horizon {horizon}"
                )));
            }
            let b = Distribution::CeilScaledPoisson { n, t };
            // lattice points up to joint tail 1e-12
            let mut k_max = horizon.ceil();
            while tail(&dom, k_max)? > 1e-12 || tail(&b, k_max)? > 1e-12 {
                k_max += 1.0;
            }
            let grid: Vec<f64> = (0..=(k_max as i64)).map(|k| k as f64).collect();
            let rep = dominates(&dom, &b, &grid)?;
            pass &= rep.pass;
            cases.push((n, t, rep));
        }
    }
    Ok(DominatorReport { cases, pass })
}
