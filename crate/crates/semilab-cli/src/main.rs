mod suite;
mod util;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::json;

use semilab_core::linalg::{apply, spectral_abscissa, sup_norm, Element};
use semilab_core::markov;
use semilab_core::prob;
use semilab_core::resolvent;
use semilab_core::sample::{random_elements, random_q_matrix};
use semilab_core::semigroup::{self, SemigroupHandle, TypeBound};
use semilab_core::yosida::{self, YosidaScheme};

use util::{
    load_chain, load_element, load_operator, parse_distribution, parse_f64_list,
    parse_usize_list, to_canonical_json,
};

/// Numerical laboratory for matrix semigroups, resolvents and Markov chains.
#[derive(Parser)]
#[command(name = "semilab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a demo bundle (operator.json, chain.json, suite.toml) to a directory.
    Generate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// State-space dimension of the generated matrices.
        #[arg(long, default_value_t = 4)]
        dim: usize,
    },
    /// Apply the resolvent R(lambda) = (lambda - A)^{-1} to an element.
    Resolvent {
        /// Operator JSON file ({"dim": n, "entries": [...]}).
        #[arg(long)]
        operator: PathBuf,
        /// Element JSON file ({"values": [...]}).
        #[arg(long)]
        element: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// Also evaluate via Laplace-transform quadrature and report the gap.
        #[arg(long, default_value_t = false)]
        quadrature: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Check the iterated-resolvent growth bound ||(n(l-w)R(nl))^n|| <= M.
    HilleYosida {
        #[arg(long)]
        operator: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
        /// Comma-separated lambda grid (values above omega).
        #[arg(long, default_value = "0.5,1,2,5")]
        lambda_grid: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Tabulate bounded-approximant convergence with error certificates.
    Yosida {
        #[arg(long)]
        operator: PathBuf,
        #[arg(long)]
        element: Option<PathBuf>,
        #[arg(long, default_value = "8,16,32,64,128")]
        indices: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Exponential tail bound sup_theta (c theta - log mgf) for a distribution.
    Chernoff {
        /// Distribution spec, e.g. gamma:3:6, poisson:2, ceilpoisson:4:0.5.
        #[arg(long)]
        dist: String,
        /// Tail threshold c.
        #[arg(long)]
        c: f64,
    },
    /// Check P[D1 > c] >= P[D2 > c] on a shared grid (stochastic domination).
    Dominate {
        #[arg(long)]
        d1: String,
        #[arg(long)]
        d2: String,
    },
    /// Simulate chain trajectories and estimate E[f(X(t))].
    MarkovSim {
        /// Chain JSON file ({"q": {...}, "boundary": [...]}).
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Comma-separated observable values per state; defaults to the
        /// indicator of the starting state.
        #[arg(long)]
        f: Option<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Test the martingale property of f(X(t)) - f(X(0)) - int Qf(X(u)) du.
    MartingaleCheck {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        s: f64,
        #[arg(long, default_value_t = 0.8)]
        t: f64,
        #[arg(long, default_value_t = 50_000)]
        n: usize,
        #[arg(long)]
        f: Option<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Estimate the probability of staying inside a state set over a horizon.
    Containment {
        #[arg(long)]
        chain: PathBuf,
        /// Starting states (comma-separated indices).
        #[arg(long, default_value = "0")]
        k: String,
        /// Containing set; defaults to the full state space.
        #[arg(long)]
        k_hat: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Check (S(t)f - f)/t -> Qf on a state set as t decreases.
    ExtensionCheck {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value = "1,0.1,0.01,0.001")]
        t_seq: String,
        #[arg(long)]
        f: Option<String>,
    },
    /// Run a TOML-configured check suite; writes report.json and CSV tables.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the tolerance from the config file.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn indicator(dim: usize, state: usize) -> Vec<f64> {
    (0..dim).map(|i| if i == state { 1.0 } else { 0.0 }).collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { seed, out, dim } => {
            fs::create_dir_all(&out)?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let dissipative = random_q_matrix(&mut rng, dim, 2.0);
            let q = random_q_matrix(&mut rng, dim, 1.5);
            fs::write(out.join("operator.json"), to_canonical_json(&dissipative)?)?;
            let chain = json!({"q": q, "boundary": [], "metric": null});
            fs::write(out.join("chain.json"), to_canonical_json(&chain)?)?;
            let suite_toml = format!(
                "seed = {seed}\ntol = 1e-8\n\n\
                 [inputs]\noperator = \"operator.json\"\nchain = \"chain.json\"\n\n\
                 [[checks]]\nname = \"semigroup_law\"\n\n\
                 [[checks]]\nname = \"averaging_bound\"\n\n\
                 [[checks]]\nname = \"integral_identity\"\n\n\
                 [[checks]]\nname = \"fit_type_bound\"\n\n\
                 [[checks]]\nname = \"resolvent_consistency\"\n\n\
                 [[checks]]\nname = \"hille_yosida\"\n\n\
                 [[checks]]\nname = \"resolvent_convergence\"\n\n\
                 [[checks]]\nname = \"yosida_convergence\"\n\n\
                 [[checks]]\nname = \"equicontinuity\"\n\n\
                 [[checks]]\nname = \"chernoff_gamma\"\n\n\
                 [[checks]]\nname = \"chernoff_poisson\"\n\n\
                 [[checks]]\nname = \"gamma_dominator\"\nn_max = 6\n\n\
                 [[checks]]\nname = \"poisson_dominator\"\nn_max = 6\n\n\
                 [[checks]]\nname = \"seminorm_closure\"\nsamples = 2000\n\n\
                 [[checks]]\nname = \"markov_transition\"\n\n\
                 [[checks]]\nname = \"martingale\"\n\n\
                 [[checks]]\nname = \"containment\"\n\n\
                 [[checks]]\nname = \"extension\"\n\n\
                 [[checks]]\nname = \"preservation\"\n"
            );
            fs::write(out.join("suite.toml"), suite_toml)?;
            println!("wrote operator.json, chain.json, suite.toml to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Resolvent { operator, element, lambda, quadrature, tol } => {
            let op = load_operator(&operator)?;
            let x = load_element(&element)?;
            let direct = resolvent::resolvent_solve(&op, lambda, &x)?;
            let mut out = json!({
                "lambda": lambda,
                "result": direct,
            });
            if quadrature {
                let h = SemigroupHandle::new(op.clone());
                let omega = spectral_abscissa(&op)?;
                let mut rng = ChaCha12Rng::seed_from_u64(0);
                let samples = random_elements(&mut rng, op.dim, 4);
                let tb = semigroup::fit_type_bound(&h, omega, 5.0, 32, &samples)?;
                let (quad, info) = resolvent::resolvent_quadrature(&h, lambda, &x, &tb, tol)?;
                out["quadrature"] = json!({
                    "result": quad,
                    "gap": sup_norm(&quad.sub(&direct)),
                    "t_max": info.t_max,
                    "panels": info.panels,
                });
            }
            print!("{}", to_canonical_json(&out)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::HilleYosida { operator, m, omega, n_max, lambda_grid, seed } => {
            let op = load_operator(&operator)?;
            let grid = parse_f64_list(&lambda_grid)?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let samples = random_elements(&mut rng, op.dim, 6);
            let rep = resolvent::hille_yosida_check(&op, m, omega, n_max, &grid, &samples)?;
            let pass = rep.pass;
            print!("{}", to_canonical_json(&rep)?);
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Yosida { operator, element, indices, t, seed } => {
            let op = load_operator(&operator)?;
            let idx: Vec<u32> = parse_usize_list(&indices)?.into_iter().map(|v| v as u32).collect();
            let x = match element {
                Some(path) => load_element(&path)?,
                None => {
                    let mut rng = ChaCha12Rng::seed_from_u64(seed);
                    random_elements(&mut rng, op.dim, 1).pop().unwrap()
                }
            };
            let scheme = YosidaScheme::new(op.clone(), idx.clone(), TypeBound { m: 1.0, omega: 0.0 })?;
            let truth = semigroup::exp_series(&op, t, &x, 1e-15)?;
            println!("n,certificate,true_error");
            for &n in &idx {
                let (y, cert) = yosida::yosida_limit(&scheme, t, &x, (n, n))?;
                let err = sup_norm(&y.sub(&truth));
                println!("{n},{:.12e},{:.12e}", cert.limit_gap, err);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Chernoff { dist, c } => {
            let d = parse_distribution(&dist)?;
            let rep = prob::chernoff_for(&d, c)?;
            let exact = prob::tail(&d, c)?;
            let out = json!({
                "c": c,
                "bound": rep.bound,
                "theta": rep.theta,
                "rate": rep.rate,
                "exact_tail": exact,
                "valid": exact <= rep.bound + 1e-15,
            });
            let ok = exact <= rep.bound + 1e-15;
            print!("{}", to_canonical_json(&out)?);
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Dominate { d1, d2 } => {
            let a = parse_distribution(&d1)?;
            let b = parse_distribution(&d2)?;
            let grid = prob::domination_grid(&a, &b)?;
            let rep = prob::dominates(&a, &b, &grid)?;
            let pass = rep.pass;
            print!("{}", to_canonical_json(&rep)?);
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::MarkovSim { chain, t, start, n, f, seed } => {
            let spec = load_chain(&chain)?;
            let fvec = match f {
                Some(s) => parse_f64_list(&s)?,
                None => indicator(spec.q.dim, start),
            };
            let (mc, se) = markov::transition_mc(&spec.q, t, &fvec, start, n, seed)?;
            let st = semigroup::exp_operator(&spec.q, t, 1e-13)?;
            let exact = apply(&st, &Element::new(fvec.clone())?)?.values[start];
            let out = json!({
                "estimate": mc,
                "standard_error": se,
                "exact": exact,
                "t": t,
                "start": start,
                "n": n,
                "within_3se": (mc - exact).abs() <= 3.0 * se.max(1e-9),
            });
            print!("{}", to_canonical_json(&out)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::MartingaleCheck { chain, s, t, n, f, seed } => {
            let spec = load_chain(&chain)?;
            let fvec = match f {
                Some(list) => parse_f64_list(&list)?,
                None => indicator(spec.q.dim, 0),
            };
            let qf = apply(&spec.q, &Element::new(fvec.clone())?)?;
            let rep = markov::martingale_check(&spec.q, &fvec, &qf.values, &[(s, t)], n, seed)?;
            let pass = rep.all_pass;
            print!("{}", to_canonical_json(&rep)?);
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Containment { chain, k, k_hat, horizon, n, seed } => {
            let spec = load_chain(&chain)?;
            let k = parse_usize_list(&k)?;
            let k_hat = match k_hat {
                Some(s) => parse_usize_list(&s)?,
                None => (0..spec.q.dim).collect(),
            };
            let rep = markov::compact_containment(&spec.q, &k, &k_hat, horizon, n, seed)?;
            print!("{}", to_canonical_json(&rep)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::ExtensionCheck { chain, t_seq, f } => {
            let spec = load_chain(&chain)?;
            let fvec = match f {
                Some(list) => parse_f64_list(&list)?,
                None => indicator(spec.q.dim, 0),
            };
            let t_seq = parse_f64_list(&t_seq)?;
            let k: Vec<usize> = (0..spec.q.dim).collect();
            let rep = markov::generator_extension_check(&spec.q, &fvec, &k, &t_seq)?;
            let pass = rep.pass;
            print!("{}", to_canonical_json(&rep)?);
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Suite { config, out, seed, tol } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg: suite::SuiteConfig = match toml::from_str(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return Ok(ExitCode::from(2));
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = tol {
                cfg.tol = Some(t);
            }
            let base = config.parent().unwrap_or_else(|| std::path::Path::new("."));
            let (report, tables) = match suite::run_suite(&cfg, base) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("config error: {e:#}");
                    return Ok(ExitCode::from(2));
                }
            };
            suite::emit(&report, &tables, &out)?;
            for check in &report.checks {
                println!(
                    "{} {} [{}]",
                    if check.pass { "PASS" } else { "FAIL" },
                    check.name,
                    check.anchor
                );
            }
            Ok(if report.all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
