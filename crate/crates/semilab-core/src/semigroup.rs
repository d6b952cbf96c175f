//! Semigroup construction by exponential series, the semigroup law check,
//! dyadic Cesaro averages with the averaging inequality, and empirical
//! (M, omega) type bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{apply, invert, op_norm, sup_norm, Element, Operator};

/// Arguments t with t * op_norm(G) beyond this raise a range error.
pub const EXP_ARG_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStrategy {
    ExponentialSeries,
    /// Evaluate through the bounded approximant n^2 R(n) - n I.
    YosidaLimit { n: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemigroupHandle {
    pub generator: Operator,
    pub eval_strategy: EvalStrategy,
    pub series_tolerance: f64,
}

impl SemigroupHandle {
    pub fn new(generator: Operator) -> Self {
        SemigroupHandle {
            generator,
            eval_strategy: EvalStrategy::ExponentialSeries,
            series_tolerance: 1e-13,
        }
    }

    pub fn dim(&self) -> usize {
        self.generator.dim
    }

    /// T(t) x under the configured strategy.
    pub fn evaluate(&self, t: f64, x: &Element) -> Result<Element> {
        match self.eval_strategy {
            EvalStrategy::ExponentialSeries => {
                exp_series(&self.generator, t, x, self.series_tolerance)
            }
            EvalStrategy::YosidaLimit { n } => {
                let a_n = bounded_approximant(&self.generator, n)?;
                exp_series(&a_n, t, x, self.series_tolerance)
            }
        }
    }
}

/// n^2 R(n) - n I, the bounded stand-in for the generator.
fn bounded_approximant(a: &Operator, n: u32) -> Result<Operator> {
    let nf = n as f64;
    let resolvent = invert(&a.scale(-1.0).shift(nf))?;
    Ok(resolvent.scale(nf * nf).shift(-nf))
}

/// Largest t * op_norm(G) handled by a single series evaluation; longer
/// times are split into steps to keep the partial sums free of the
/// catastrophic cancellation the raw series suffers for large arguments.
const STEP_ARG: f64 = 2.0;

/// e^{tG} x, evaluated by stepping the certified series: t is split into
/// segments with segment * op_norm(G) <= STEP_ARG and the series is applied
/// segment by segment (the semigroup law makes the composition exact).
pub fn exp_series(g: &Operator, t: f64, x: &Element, tol: f64) -> Result<Element> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    let c = op_norm(g);
    let tc = t * c;
    if tc > EXP_ARG_LIMIT {
        return Err(Error::Range(format!(
            "t * op_norm(G) = {tc} exceeds the series range limit"
        )));
    }
    let steps = (tc / STEP_ARG).ceil().max(1.0);
    let tau = t / steps;
    let mut y = x.clone();
    for _ in 0..steps as usize {
        y = exp_series_step(g, tau, &y, tol / steps)?;
    }
    Ok(y)
}

/// Partial sums of sum_k t^k G^k x / k!, stopped once the factorial tail
/// bound (t c)^{K+1}/(K+1)! * e^{t c} * ||x|| falls below tol * (1 + ||x||).
fn exp_series_step(g: &Operator, t: f64, x: &Element, tol: f64) -> Result<Element> {
    if g.dim != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim,
            got: x.dim(),
        });
    }
    let c = op_norm(g);
    let tc = t * c;
    let nx = sup_norm(x);
    let budget = tol * (1.0 + nx);
    let mut sum = x.clone();
    let mut term = x.clone();
    // running tail majorant: nx * (tc)^{k+1}/(k+1)! * e^{tc}
    let mut tail = nx * tc * tc.exp();
    let mut k = 0usize;
    while tail > budget && tc > 0.0 {
        k += 1;
        term = apply(g, &term)?.scale(t / k as f64);
        sum = sum.add(&term);
        tail *= tc / (k as f64 + 1.0);
        if k > 100_000 {
            return Err(Error::Range("series failed to converge".into()));
        }
    }
    Ok(sum)
}

/// Full matrix exponential via the series applied to basis vectors.
pub fn exp_operator(g: &Operator, t: f64, tol: f64) -> Result<Operator> {
    let n = g.dim;
    let mut out = Operator::zeros(n);
    for j in 0..n {
        let col = exp_series(g, t, &Element::basis(n, j), tol)?;
        for i in 0..n {
            out.set(i, j, col.values[i]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct LawReport {
    pub t: f64,
    pub s: f64,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Max over samples of ||T(t)T(s)x - T(t+s)x||.
pub fn semigroup_law_check(
    h: &SemigroupHandle,
    t: f64,
    s: f64,
    samples: &[Element],
    tol: f64,
) -> Result<LawReport> {
    if t < 0.0 || s < 0.0 {
        return Err(Error::Domain("law check needs t, s >= 0".into()));
    }
    let mut worst = 0.0f64;
    for x in samples {
        let two_step = h.evaluate(t, &h.evaluate(s, x)?)?;
        let one_step = h.evaluate(t + s, x)?;
        worst = worst.max(sup_norm(&two_step.sub(&one_step)));
    }
    Ok(LawReport {
        t,
        s,
        max_deviation: worst,
        tol,
        pass: worst <= tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CesaroResult {
    /// Richardson extrapolation of the two finest dyadic levels.
    pub value: Element,
    /// Plain left-endpoint Riemann sum at the finest level.
    pub riemann_sum: Element,
    /// Difference between the two finest dyadic levels.
    pub error_estimate: f64,
    pub levels: u32,
}

/// Dyadic Riemann sum (1/2^L) sum_{i<2^L} T(i r / 2^L) x approximating the
/// time average (1/r) int_0^r T(s) x ds. The left-endpoint sums are first
/// order in the step, so the returned value extrapolates the two finest
/// levels; the raw finest-level sum is kept alongside.
pub fn cesaro_average(h: &SemigroupHandle, r: f64, x: &Element, levels: u32) -> Result<CesaroResult> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("averaging window must be > 0, got {r}")));
    }
    if levels < 1 {
        return Err(Error::InvalidParameter("levels must be >= 1".into()));
    }
    let points = 1usize << levels;
    let step = exp_operator(&h.generator, r / points as f64, h.series_tolerance)?;
    let mut fine = Element::zeros(x.dim());
    let mut coarse = Element::zeros(x.dim());
    let mut cur = x.clone();
    for i in 0..points {
        fine = fine.add(&cur);
        if i % 2 == 0 {
            coarse = coarse.add(&cur);
        }
        if i + 1 < points {
            cur = apply(&step, &cur)?;
        }
    }
    let fine = fine.scale(1.0 / points as f64);
    let coarse = coarse.scale(2.0 / points as f64);
    let extrapolated = fine.scale(2.0).sub(&coarse);
    Ok(CesaroResult {
        error_estimate: sup_norm(&fine.sub(&coarse)),
        value: extrapolated,
        riemann_sum: fine,
        levels,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AveragingBoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Checks ||T(h) x_r - x_r|| <= (2 h / r) * sup_{s <= h + r} ||T(s) x||,
/// with the sup taken over a 64-point grid plus the endpoint.
pub fn averaging_bound_check(
    h: &SemigroupHandle,
    r: f64,
    hstep: f64,
    x: &Element,
) -> Result<AveragingBoundReport> {
    if !(hstep > 0.0 && hstep < r) {
        return Err(Error::Domain(format!(
            "need 0 < hstep < r, got hstep={hstep}, r={r}"
        )));
    }
    let x_r = cesaro_average(h, r, x, 12)?.value;
    let lhs = sup_norm(&h.evaluate(hstep, &x_r)?.sub(&x_r));
    let horizon = hstep + r;
    let mut sup = 0.0f64;
    for i in 0..=64 {
        let s = horizon * i as f64 / 64.0;
        sup = sup.max(sup_norm(&h.evaluate(s, x)?));
    }
    // endpoint refinement
    for i in 1..=4 {
        let s = horizon * (1.0 - 0.25f64.powi(i));
        sup = sup.max(sup_norm(&h.evaluate(s, x)?));
    }
    let rhs = 2.0 * hstep / r * sup;
    Ok(AveragingBoundReport {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-9) + 1e-12,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeBound {
    pub m: f64,
    pub omega: f64,
}

/// Grid supremum of e^{-omega t} ||T(t) x|| / ||x||, clamped to >= 1.
/// An empirical certificate over the tested grid, not a proof.
pub fn fit_type_bound(
    h: &SemigroupHandle,
    omega: f64,
    horizon: f64,
    grid_per_unit: usize,
    samples: &[Element],
) -> Result<TypeBound> {
    let points = ((horizon * grid_per_unit as f64).ceil() as usize).max(1);
    let mut m = 1.0f64;
    for x in samples {
        let nx = sup_norm(x);
        if nx == 0.0 {
            continue;
        }
        for i in 0..=points {
            let t = horizon * i as f64 / points as f64;
            let ratio = (-omega * t).exp() * sup_norm(&h.evaluate(t, x)?) / nx;
            m = m.max(ratio);
        }
    }
    Ok(TypeBound { m, omega })
}
