//! Configuration-driven verification suites: a TOML config names the input
//! artifacts and the checks to run; the runner produces a canonical JSON
//! report plus one CSV table per check.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use semilab_core::linalg::{apply, spectral_abscissa, sup_norm, Element, Operator};
use semilab_core::markov;
use semilab_core::prob::{self, Distribution};
use semilab_core::resolvent;
use semilab_core::sample::random_elements;
use semilab_core::semigroup::{self, SemigroupHandle, TypeBound};
use semilab_core::seminorm::{self, SeminormSpec};
use semilab_core::yosida::{self, YosidaScheme};

use crate::util::{load_chain, load_operator, to_canonical_json};

#[derive(Debug, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
}

#[derive(Debug, Default, Deserialize)]
pub struct Inputs {
    pub operator: Option<PathBuf>,
    pub chain: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
pub struct CheckConfig {
    pub name: String,
    #[serde(flatten)]
    pub params: toml::Table,
}

#[derive(Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// Stable identifier of the verified property.
    pub anchor: String,
    pub pass: bool,
    pub details: Value,
}

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub all_pass: bool,
}

pub struct CsvTable {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

struct Ctx {
    seed: u64,
    tol: f64,
    operator: Option<Operator>,
    chain: Option<markov::ChainSpec>,
}

impl Ctx {
    fn operator(&self) -> Result<&Operator> {
        self.operator
            .as_ref()
            .ok_or_else(|| anyhow!("check needs inputs.operator in the config"))
    }

    fn chain(&self) -> Result<&markov::ChainSpec> {
        self.chain
            .as_ref()
            .ok_or_else(|| anyhow!("check needs inputs.chain in the config"))
    }
}

fn p_f64(p: &toml::Table, key: &str, default: f64) -> Result<f64> {
    match p.get(key) {
        None => Ok(default),
        Some(toml::Value::Float(v)) => Ok(*v),
        Some(toml::Value::Integer(v)) => Ok(*v as f64),
        Some(other) => bail!("parameter {key} must be a number, got {other}"),
    }
}

fn p_u64(p: &toml::Table, key: &str, default: u64) -> Result<u64> {
    match p.get(key) {
        None => Ok(default),
        Some(toml::Value::Integer(v)) if *v >= 0 => Ok(*v as u64),
        Some(other) => bail!("parameter {key} must be a nonnegative integer, got {other}"),
    }
}

fn p_f64_list(p: &toml::Table, key: &str, default: &[f64]) -> Result<Vec<f64>> {
    match p.get(key) {
        None => Ok(default.to_vec()),
        Some(toml::Value::Array(a)) => a
            .iter()
            .map(|v| match v {
                toml::Value::Float(f) => Ok(*f),
                toml::Value::Integer(i) => Ok(*i as f64),
                other => bail!("list entry {other} is not a number"),
            })
            .collect(),
        Some(other) => bail!("parameter {key} must be an array, got {other}"),
    }
}

fn p_usize_list(p: &toml::Table, key: &str, default: &[usize]) -> Result<Vec<usize>> {
    Ok(p_f64_list(
        p,
        key,
        &default.iter().map(|&v| v as f64).collect::<Vec<_>>(),
    )?
    .into_iter()
    .map(|v| v as usize)
    .collect())
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

type CheckResult = Result<(CheckOutcome, Option<CsvTable>)>;

fn run_check(ctx: &Ctx, cfg: &CheckConfig) -> CheckResult {
    let p = &cfg.params;
    match cfg.name.as_str() {
        "semigroup_law" => {
            let op = ctx.operator()?;
            let h = SemigroupHandle::new(op.clone());
            let t = p_f64(p, "t", 0.3)?;
            let s = p_f64(p, "s", 0.4)?;
            let count = p_u64(p, "samples", 8)? as usize;
            let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
            let samples = random_elements(&mut rng, op.dim, count);
            let rep = semigroup::semigroup_law_check(&h, t, s, &samples, ctx.tol.max(1e-10))?;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "semigroup.law:T(t)T(s)=T(t+s)".into(),
                    pass: rep.pass,
                    details: serde_json::to_value(&rep)?,
                },
                None,
            ))
        }
        "averaging_bound" => {
            let op = ctx.operator()?;
            let h = SemigroupHandle::new(op.clone());
            let r = p_f64(p, "r", 1.0)?;
            let hstep = p_f64(p, "hstep", 0.1)?;
            let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
            let x = random_elements(&mut rng, op.dim, 1).pop().unwrap();
            let rep = semigroup::averaging_bound_check(&h, r, hstep, &x)?;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "semigroup.average:|T(h)x_r-x_r|<=(2h/r)sup|T(s)x|".into(),
                    pass: rep.pass,
                    details: serde_json::to_value(&rep)?,
                },
                None,
            ))
        }
        "integral_identity" => {
            // A int_0^r T(s)x ds = T(r)x - x = int_0^r T(s)Ax ds
            let op = ctx.operator()?;
            let h = SemigroupHandle::new(op.clone());
            let r = p_f64(p, "r", 0.8)?;
            let tol = p_f64(p, "tol", 1e-7)?;
            let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
            let x = random_elements(&mut rng, op.dim, 1).pop().unwrap();
            let avg = semigroup::cesaro_average(&h, r, &x, 14)?.value;
            let lhs = apply(op, &avg.scale(r))?;
            let rhs = h.evaluate(r, &x)?.sub(&x);
            let ax = apply(op, &x)?;
            let avg_ax = semigroup::cesaro_average(&h, r, &ax, 14)?.value.scale(r);
            let dev1 = sup_norm(&lhs.sub(&rhs));
            let dev2 = sup_norm(&avg_ax.sub(&rhs));
            let pass = dev1 <= tol && dev2 <= tol;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "semigroup.integral:A*int T(s)x = T(t)x - x = int T(s)Ax".into(),
                    pass,
                    details: json!({"dev_left": dev1, "dev_right": dev2, "tol": tol}),
                },
                None,
            ))
        }
        "fit_type_bound" => {
            let op = ctx.operator()?;
            let h = SemigroupHandle::new(op.clone());
            let omega = p_f64(p, "omega", spectral_abscissa(op)?)?;
            let horizon = p_f64(p, "horizon", 2.0)?;
            let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
            let samples = random_elements(&mut rng, op.dim, 8);
            let tb = semigroup::fit_type_bound(&h, omega, horizon, 64, &samples)?;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "semigroup.type:e^{-wt}|T(t)x|<=M|x|".into(),
                    pass: true,
                    details: serde_json::to_value(&tb)?,
                },
                None,
            ))
        }
        "resolvent_consistency" => {
            let op = ctx.operator()?;
            let h = SemigroupHandle::new(op.clone());
            let omega = spectral_abscissa(op)?;
            let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
            let samples = random_elements(&mut rng, op.dim, 4);
            let tb = semigroup::fit_type_bound(&h, omega, 5.0, 32, &samples)?;
            let lambdas = p_f64_list(p, "lambdas", &[omega + 1.0, omega + 2.0, omega + 10.0])?;
            let tol = p_f64(p, "tol", 1e-8)?;
            let mut worst = 0.0f64;
            for &lam in &lambdas {
                for x in &samples {
                    let (quad, _) = resolvent::resolvent_quadrature(&h, lam, x, &tb, tol * 1e-1)?;
                    let direct = resolvent::resolvent_solve(op, lam, x)?;
                    let rel = sup_norm(&quad.sub(&direct)) / sup_norm(&direct).max(1e-300);
                    worst = worst.max(rel);
                }
            }
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "resolvent.consistency:laplace-quadrature==direct-solve".into(),
                    pass: worst <= tol,
                    details: json!({"worst_relative_error": worst, "tol": tol, "lambdas": lambdas}),
                },
                None,
            ))
        }
        "hille_yosida" => {
            let op = ctx.operator()?;
            let m = p_f64(p, "m", 1.0)?;
            let omega = p_f64(p, "omega", 0.0)?;
            let n_max = p_u64(p, "n_max", 20)? as u32;
            let lambda_grid = p_f64_list(p, "lambda_grid", &[0.5, 1.0, 2.0, 5.0])?;
            let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
            let samples = random_elements(&mut rng, op.dim, 6);
            let rep = resolvent::hille_yosida_check(op, m, omega, n_max, &lambda_grid, &samples)?;
            let pass = rep.pass;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "resolvent.generation:|(n(l-w)R(nl))^n|<=M".into(),
                    pass,
                    details: serde_json::to_value(&rep)?,
                },
                None,
            ))
        }
        "resolvent_convergence" => {
            let op = ctx.operator()?;
            let lambda_seq = p_f64_list(p, "lambda_seq", &[1.0, 10.0, 100.0, 1000.0])?;
            let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
            let samples = random_elements(&mut rng, op.dim, 4);
            let ax_norm = samples
                .iter()
                .map(|x| apply(op, x).map(|v| sup_norm(&v)))
                .collect::<semilab_core::Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0f64, f64::max);
            let tol = p_f64(p, "tol", 1e-2 * ax_norm.max(1.0))?;
            let rep = resolvent::resolvent_convergence_check(op, &lambda_seq, &samples, tol)?;
            let table = CsvTable {
                name: cfg.name.clone(),
                headers: vec!["lambda".into(), "err_x".into(), "err_ax".into()],
                rows: rep
                    .rows
                    .iter()
                    .map(|r| vec![fmt(r.lambda), fmt(r.err_x), fmt(r.err_ax)])
                    .collect(),
            };
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "resolvent.convergence:lR(l)x->x".into(),
                    pass: rep.pass,
                    details: serde_json::to_value(&rep)?,
                },
                Some(table),
            ))
        }
        "yosida_convergence" => {
            let op = ctx.operator()?;
            let indices: Vec<u32> = p_usize_list(p, "indices", &[8, 16, 32, 64, 128])?
                .into_iter()
                .map(|v| v as u32)
                .collect();
            let t = p_f64(p, "t", 1.0)?;
            let scheme = YosidaScheme::new(op.clone(), indices.clone(), TypeBound { m: 1.0, omega: 0.0 })?;
            let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
            let x = random_elements(&mut rng, op.dim, 1).pop().unwrap();
            let truth = semigroup::exp_series(op, t, &x, 1e-15)?;
            let mut rows = Vec::new();
            let mut pass = true;
            let mut prev = f64::INFINITY;
            for &n in &indices {
                let (y, cert) = yosida::yosida_limit(&scheme, t, &x, (n, n))?;
                let err = sup_norm(&y.sub(&truth));
                pass &= err <= cert.limit_gap * (1.0 + 1e-9) + 1e-13;
                pass &= err <= prev * (1.0 + 1e-9) + 1e-15;
                prev = err;
                rows.push((n, cert.limit_gap, err));
            }
            let table = CsvTable {
                name: cfg.name.clone(),
                headers: vec!["n".into(), "certificate".into(), "true_error".into()],
                rows: rows
                    .iter()
                    .map(|(n, c, e)| vec![n.to_string(), fmt(*c), fmt(*e)])
                    .collect(),
            };
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "yosida.limit:|T_n(t)x-e^{tA}x|<=t|A_nx-Ax|".into(),
                    pass,
                    details: json!({"t": t, "rows": rows.iter().map(|(n, c, e)| json!({"n": n, "certificate": c, "true_error": e})).collect::<Vec<_>>()}),
                },
                Some(table),
            ))
        }
        "equicontinuity" => {
            let op = ctx.operator()?;
            let indices: Vec<u32> = p_usize_list(p, "indices", &[2, 4, 8, 16])?
                .into_iter()
                .map(|v| v as u32)
                .collect();
            let horizon = p_f64(p, "horizon", 2.0)?;
            let scheme = YosidaScheme::new(op.clone(), indices, TypeBound { m: 1.0, omega: 0.0 })?;
            let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
            let samples = random_elements(&mut rng, op.dim, 6);
            let rep = yosida::joint_equicontinuity_scan(&scheme, horizon, 32, &samples)?;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "yosida.equicontinuity:sup_n sup_t |T_n(t)x|<=M|x|".into(),
                    pass: rep.pass,
                    details: serde_json::to_value(&rep)?,
                },
                None,
            ))
        }
        "chernoff_gamma" => {
            let lambda0 = p_f64(p, "lambda0", 1.0)?;
            let n_max = p_u64(p, "n_max", 10)? as u32;
            let lambdas = p_f64_list(p, "lambdas", &[1.0, 2.0, 5.0])?;
            let mut rows = Vec::new();
            let mut violations = 0usize;
            let mut points = 0usize;
            for n in 1..=n_max {
                for &lam in &lambdas {
                    let d = Distribution::Gamma { shape: n, rate: n as f64 * lam };
                    for i in 0..512 {
                        let c = 1.0 / lam + 10.0 * (i as f64 + 1.0) / 512.0;
                        let exact = prob::tail(&d, c)?;
                        let bound = (-(n as f64) * prob::phi_gamma(c, lam)?).exp();
                        points += 1;
                        if exact > bound + 1e-15 {
                            violations += 1;
                        }
                        if n == 1 && (i % 64 == 0) {
                            rows.push(vec![fmt(c), fmt(exact), fmt(bound)]);
                        }
                    }
                }
            }
            let table = CsvTable {
                name: cfg.name.clone(),
                headers: vec!["c".into(), "exact_tail".into(), "bound".into()],
                rows,
            };
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "prob.chernoff:P[Z>c]<=e^{-n*phi(c,l)}".into(),
                    pass: violations == 0,
                    details: json!({"lambda0": lambda0, "points": points, "violations": violations}),
                },
                Some(table),
            ))
        }
        "chernoff_poisson" => {
            let horizons = p_f64_list(p, "horizons", &[0.5, 1.0, 2.0])?;
            let n_max = p_u64(p, "n_max", 10)? as u32;
            let mut violations = 0usize;
            let mut points = 0usize;
            for &hor in &horizons {
                for n in 1..=n_max {
                    let d = Distribution::CeilScaledPoisson { n, t: hor };
                    let k0 = hor.ceil() as i64;
                    for k in k0..k0 + 50 {
                        let exact = prob::tail(&d, k as f64)?;
                        let bound = (-(n as f64) * prob::phi_poisson(k as f64, hor)?).exp();
                        points += 1;
                        if exact > bound + 1e-15 {
                            violations += 1;
                        }
                    }
                }
            }
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "prob.chernoff:P[B>k]<=e^{-n*phi(k,t)}".into(),
                    pass: violations == 0,
                    details: json!({"points": points, "violations": violations}),
                },
                None,
            ))
        }
        "gamma_dominator" => {
            let lambda0 = p_f64(p, "lambda0", 1.0)?;
            let n_max = p_u64(p, "n_max", 10)? as u32;
            let lambdas = p_f64_list(p, "lambdas", &[1.0, 2.0, 5.0])?;
            let n_list: Vec<u32> = (1..=n_max).collect();
            let rep = prob::gamma_dominator_check(lambda0, &n_list, &lambdas)?;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "prob.dominator:Y>=Gamma(n,n*l)".into(),
                    pass: rep.pass,
                    details: json!({"cases": rep.cases.len(), "pass": rep.pass}),
                },
                None,
            ))
        }
        "poisson_dominator" => {
            let horizon = p_f64(p, "horizon", 1.0)?;
            let n_max = p_u64(p, "n_max", 10)? as u32;
            let t_list = p_f64_list(p, "t_list", &[horizon / 4.0, horizon / 2.0, horizon])?;
            let n_list: Vec<u32> = (1..=n_max).collect();
            let rep = prob::poisson_dominator_check(horizon, &n_list, &t_list)?;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "prob.dominator:Y>=B_{n,t}".into(),
                    pass: rep.pass,
                    details: json!({"cases": rep.cases.len(), "pass": rep.pass}),
                },
                None,
            ))
        }
        "seminorm_closure" => {
            let dim = p_u64(p, "dim", 6)? as usize;
            let count = p_u64(p, "samples", 10_000)? as usize;
            let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
            let samples = random_elements(&mut rng, dim, count);
            let spec_a = SeminormSpec::new(vec![1.0, 0.4], vec![vec![0, 1], vec![2.min(dim - 1)]])?;
            let spec_b = SeminormSpec::new(vec![0.7], vec![(0..dim).collect()])?;
            let combo = semilab_core::ConvexCombo {
                terms: vec![(0.6, spec_a.clone()), (0.4, spec_b.clone())],
                tail_mass: 0.0,
            };
            let mut violations = 0usize;
            for f in &samples {
                let v = seminorm::combine(&combo, f)?;
                if v > sup_norm(f) + 1e-12 {
                    violations += 1;
                }
            }
            let membership = seminorm::in_n(&spec_a) && seminorm::in_n(&spec_b);
            // monotone mixture under Poisson domination
            let seq: Vec<SeminormSpec> = (0..40)
                .map(|k| {
                    SeminormSpec::new(vec![1.0 - 1.0 / (k as f64 + 2.0)], vec![(0..dim).collect()])
                })
                .collect::<semilab_core::Result<Vec<_>>>()?;
            let hi = seminorm::mixture_seminorm(&Distribution::Poisson { mean: 2.0 }, &seq)?;
            let lo = seminorm::mixture_seminorm(&Distribution::Poisson { mean: 1.0 }, &seq)?;
            let mut mono_violations = 0usize;
            for f in samples.iter().take(1000) {
                let a = seminorm::combine(&hi, f)?;
                let b = seminorm::combine(&lo, f)?;
                if a < b - hi.tail_mass.max(lo.tail_mass) * sup_norm(f) - 1e-12 {
                    mono_violations += 1;
                }
            }
            let pass = membership && violations == 0 && mono_violations == 0;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "seminorm.closure:p<=norm and monotone mixtures".into(),
                    pass,
                    details: json!({"samples": count, "violations": violations, "monotone_violations": mono_violations}),
                },
                None,
            ))
        }
        "markov_transition" => {
            let chain = ctx.chain()?;
            let q = &chain.q;
            let t = p_f64(p, "t", 0.8)?;
            let n = p_u64(p, "n", 50_000)? as usize;
            let f: Vec<f64> = p_f64_list(
                p,
                "f",
                &(0..q.dim).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect::<Vec<_>>(),
            )?;
            let (mc, se) = markov::transition_mc(q, t, &f, 0, n, ctx.seed)?;
            let st = semigroup::exp_operator(q, t, 1e-13)?;
            let truth = apply(&st, &Element::new(f.clone())?)?.values[0];
            let pass = (mc - truth).abs() <= 3.0 * se.max(1e-9);
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "markov.transition:S(t)f(x)=E[f(X(t))]".into(),
                    pass,
                    details: json!({"mc": mc, "se": se, "exact": truth, "t": t, "n": n}),
                },
                None,
            ))
        }
        "martingale" => {
            let chain = ctx.chain()?;
            let q = &chain.q;
            let n = p_u64(p, "n", 50_000)? as usize;
            let pairs_raw = p_f64_list(p, "pair", &[0.2, 0.8])?;
            if pairs_raw.len() != 2 {
                bail!("parameter pair must be [s, t]");
            }
            let f: Vec<f64> = p_f64_list(
                p,
                "f",
                &(0..q.dim).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect::<Vec<_>>(),
            )?;
            let qf = apply(q, &Element::new(f.clone())?)?;
            let rep = markov::martingale_check(
                q,
                &f,
                &qf.values,
                &[(pairs_raw[0], pairs_raw[1])],
                n,
                ctx.seed,
            )?;
            // the perturbed generator must be detected
            let doubled: Vec<f64> = qf.values.iter().map(|v| 2.0 * v).collect();
            let perturbed = markov::martingale_check(
                q,
                &f,
                &doubled,
                &[(pairs_raw[0], pairs_raw[1])],
                n,
                ctx.seed,
            )?;
            let qf_nonzero = sup_norm(&qf) > 1e-12;
            let pass = rep.all_pass && (!qf_nonzero || !perturbed.all_pass);
            let table = CsvTable {
                name: cfg.name.clone(),
                headers: vec![
                    "s".into(),
                    "t".into(),
                    "state".into(),
                    "residual_mean".into(),
                    "standard_error".into(),
                    "count".into(),
                    "verdict".into(),
                ],
                rows: rep
                    .entries
                    .iter()
                    .map(|e| {
                        vec![
                            fmt(e.s),
                            fmt(e.t),
                            e.conditioning_state.to_string(),
                            fmt(e.residual_mean),
                            fmt(e.standard_error),
                            e.sample_count.to_string(),
                            format!("{:?}", e.verdict),
                        ]
                    })
                    .collect(),
            };
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "markov.martingale:E[M_f(t)-M_f(s)|X(s)]=0".into(),
                    pass,
                    details: json!({
                        "true_generator_pass": rep.all_pass,
                        "perturbed_detected": !perturbed.all_pass,
                        "entries": rep.entries.len(),
                    }),
                },
                Some(table),
            ))
        }
        "containment" => {
            let chain = ctx.chain()?;
            let q = &chain.q;
            let k = p_usize_list(p, "k", &[0])?;
            let k_hat = p_usize_list(p, "k_hat", &(0..q.dim).collect::<Vec<_>>())?;
            let horizon = p_f64(p, "horizon", 1.0)?;
            let n = p_u64(p, "n", 20_000)? as usize;
            let rep = markov::compact_containment(q, &k, &k_hat, horizon, n, ctx.seed)?;
            let threshold = p_f64(p, "min_probability", 0.0)?;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "markov.containment:inf_x P_x[X stays in K_hat]".into(),
                    pass: rep.min_probability >= threshold,
                    details: serde_json::to_value(&rep)?,
                },
                None,
            ))
        }
        "extension" => {
            let chain = ctx.chain()?;
            let q = &chain.q;
            let f: Vec<f64> = p_f64_list(
                p,
                "f",
                &(0..q.dim).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect::<Vec<_>>(),
            )?;
            let k = p_usize_list(p, "k", &(0..q.dim).collect::<Vec<_>>())?;
            let t_seq = p_f64_list(p, "t_seq", &[1.0, 0.1, 0.01, 0.001])?;
            let rep = markov::generator_extension_check(q, &f, &k, &t_seq)?;
            let table = CsvTable {
                name: cfg.name.clone(),
                headers: vec!["t".into(), "sup_error".into()],
                rows: rep
                    .rows
                    .iter()
                    .map(|r| vec![fmt(r.t), fmt(r.sup_error)])
                    .collect(),
            };
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "markov.extension:(S(t)f-f)/t->Qf on K".into(),
                    pass: rep.pass,
                    details: serde_json::to_value(&rep)?,
                },
                Some(table),
            ))
        }
        "preservation" => {
            let chain = ctx.chain()?;
            let t = p_f64(p, "t", 1.0)?;
            let rep = markov::c0_and_probability_preservation(&chain.q, &chain.boundary, t)?;
            Ok((
                CheckOutcome {
                    name: cfg.name.clone(),
                    anchor: "markov.preservation:rows of e^{tQ} are probabilities".into(),
                    pass: rep.pass,
                    details: serde_json::to_value(&rep)?,
                },
                None,
            ))
        }
        other => bail!("unknown check name {other:?}"),
    }
}

/// Runs a parsed suite config; returns the report and the tables.
pub fn run_suite(config: &SuiteConfig, base_dir: &Path) -> Result<(SuiteReport, Vec<CsvTable>)> {
    let operator = config
        .inputs
        .operator
        .as_ref()
        .map(|rel| load_operator(&base_dir.join(rel)))
        .transpose()?;
    let chain = config
        .inputs
        .chain
        .as_ref()
        .map(|rel| load_chain(&base_dir.join(rel)))
        .transpose()?;
    if let Some(c) = &chain {
        let v = markov::validate_q(&c.q);
        if !v.valid {
            bail!("invalid chain generator: {}", v.violations.join("; "));
        }
    }
    let ctx = Ctx {
        seed: config.seed,
        tol: config.tol.unwrap_or(1e-8),
        operator,
        chain,
    };
    let mut outcomes = Vec::new();
    let mut tables = Vec::new();
    for check in &config.checks {
        let (outcome, table) = run_check(&ctx, check)
            .with_context(|| format!("running check {:?}", check.name))?;
        outcomes.push(outcome);
        tables.extend(table);
    }
    let all_pass = outcomes.iter().all(|o| o.pass);
    Ok((
        SuiteReport {
            seed: config.seed,
            checks: outcomes,
            all_pass,
        },
        tables,
    ))
}

/// Writes report.json plus one CSV per check into out_dir.
pub fn emit(report: &SuiteReport, tables: &[CsvTable], out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("report.json"), to_canonical_json(report)?)?;
    for table in tables {
        let path = out_dir.join(format!("{}.csv", table.name));
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&table.headers)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    Ok(())
}
