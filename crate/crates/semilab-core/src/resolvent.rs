//! Resolvents two ways: truncated Laplace-transform quadrature of the
//! semigroup and direct linear solves, plus resolvent power bounds, the
//! generation-condition check, resolvent convergence and the renorming
//! supremum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{apply, invert, solve, sup_norm, Element, Operator};
use crate::semigroup::{SemigroupHandle, TypeBound};

// 16-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL_WEIGHTS: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// (lambda I - A)^{-1} as a full operator.
pub fn resolvent_operator(a: &Operator, lambda: f64) -> Result<Operator> {
    invert(&a.scale(-1.0).shift(lambda))
}

/// Solves (lambda I - A) y = x.
pub fn resolvent_solve(a: &Operator, lambda: f64, x: &Element) -> Result<Element> {
    solve(&a.scale(-1.0).shift(lambda), x)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureInfo {
    pub t_max: f64,
    pub panels: usize,
    pub tail_bound_used: f64,
}

/// int_0^inf e^{-lambda t} T(t) x dt by composite Gauss-Legendre on
/// [0, T_max], with T_max chosen so the certified exponential tail
/// M ||x|| e^{-(lambda - omega) T_max} / (lambda - omega) is below tol / 2.
pub fn resolvent_quadrature(
    h: &SemigroupHandle,
    lambda: f64,
    x: &Element,
    bound: &TypeBound,
    tol: f64,
) -> Result<(Element, QuadratureInfo)> {
    let gap = lambda - bound.omega;
    if gap <= 0.0 {
        return Err(Error::Domain(format!(
            "lambda = {lambda} is not beyond the certified growth bound omega = {}",
            bound.omega
        )));
    }
    let nx = sup_norm(x);
    if nx == 0.0 {
        return Ok((
            Element::zeros(x.dim()),
            QuadratureInfo {
                t_max: 0.0,
                panels: 0,
                tail_bound_used: 0.0,
            },
        ));
    }
    let t_max = ((2.0 * bound.m * nx / (tol * gap)).ln() / gap).max(1.0);
    let tail_bound = bound.m * nx * (-gap * t_max).exp() / gap;
    // 4 panels per unit time
    let panels = (4.0 * t_max).ceil() as usize;
    let width = t_max / panels as f64;
    let mut acc = Element::zeros(x.dim());
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        for k in 0..8 {
            for sign in [-1.0, 1.0] {
                let t = mid + sign * 0.5 * width * GL_NODES[k];
                let v = h.evaluate(t, x)?;
                acc = acc.add(&v.scale(0.5 * width * GL_WEIGHTS[k] * (-lambda * t).exp()));
            }
        }
    }
    Ok((
        acc,
        QuadratureInfo {
            t_max,
            panels,
            tail_bound_used: tail_bound,
        },
    ))
}

/// (n lambda_prime R(n lambda))^n x by n successive solves, left to right.
pub fn resolvent_power(
    a: &Operator,
    lambda: f64,
    n: u32,
    lambda_prime: f64,
    x: &Element,
) -> Result<Element> {
    let shifted = a.scale(-1.0).shift(n as f64 * lambda);
    let factor = n as f64 * lambda_prime;
    let mut y = x.clone();
    for step in 1..=n {
        y = solve(&shifted, &y)
            .map_err(|e| Error::Domain(format!("resolvent power step {step}: {e}")))?;
        y = y.scale(factor);
    }
    Ok(y)
}

#[derive(Debug, Clone, Serialize)]
pub struct HilleYosidaReport {
    pub worst_ratio: f64,
    pub worst_n: u32,
    pub worst_lambda: f64,
    pub worst_sample: usize,
    pub m: f64,
    pub omega: f64,
    pub pass: bool,
}

/// Checks ||(n (lambda - omega) R(n lambda))^n x|| <= M ||x|| over the
/// grid of n, lambda and samples.
pub fn hille_yosida_check(
    a: &Operator,
    m: f64,
    omega: f64,
    n_max: u32,
    lambda_grid: &[f64],
    samples: &[Element],
) -> Result<HilleYosidaReport> {
    if n_max > 64 {
        return Err(Error::InvalidParameter("n_max must be <= 64".into()));
    }
    let mut report = HilleYosidaReport {
        worst_ratio: 0.0,
        worst_n: 0,
        worst_lambda: f64::NAN,
        worst_sample: 0,
        m,
        omega,
        pass: true,
    };
    for &lambda in lambda_grid {
        if lambda <= omega {
            return Err(Error::Domain(format!(
                "lambda {lambda} must exceed omega {omega}"
            )));
        }
        for n in 1..=n_max {
            for (idx, x) in samples.iter().enumerate() {
                let nx = sup_norm(x);
                if nx == 0.0 {
                    continue;
                }
                let y = resolvent_power(a, lambda, n, lambda - omega, x)?;
                let ratio = sup_norm(&y) / nx;
                if ratio > report.worst_ratio {
                    report.worst_ratio = ratio;
                    report.worst_n = n;
                    report.worst_lambda = lambda;
                    report.worst_sample = idx;
                }
            }
        }
    }
    report.pass = report.worst_ratio <= m * (1.0 + 1e-9);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub lambda: f64,
    pub err_x: f64,
    pub err_ax: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub monotone: bool,
    pub final_err_x: f64,
    pub final_err_ax: f64,
    pub pass: bool,
}

/// Tabulates ||lambda R(lambda) x - x|| and ||lambda R(lambda) A x - A x||
/// along an increasing lambda sequence.
pub fn resolvent_convergence_check(
    a: &Operator,
    lambda_seq: &[f64],
    samples: &[Element],
    tol: f64,
) -> Result<ConvergenceReport> {
    if lambda_seq.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("lambda sequence must be increasing".into()));
    }
    let mut rows = Vec::with_capacity(lambda_seq.len());
    for &lambda in lambda_seq {
        let mut err_x = 0.0f64;
        let mut err_ax = 0.0f64;
        for x in samples {
            let y = resolvent_solve(a, lambda, x)?.scale(lambda);
            err_x = err_x.max(sup_norm(&y.sub(x)));
            let ax = apply(a, x)?;
            let z = resolvent_solve(a, lambda, &ax)?.scale(lambda);
            err_ax = err_ax.max(sup_norm(&z.sub(&ax)));
        }
        rows.push(ConvergenceRow { lambda, err_x, err_ax });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].err_x <= w[0].err_x + 1e-12 && w[1].err_ax <= w[0].err_ax + 1e-12);
    let last = rows.last().expect("nonempty lambda sequence");
    let pass = monotone && last.err_x <= tol && last.err_ax <= tol;
    Ok(ConvergenceReport {
        final_err_x: last.err_x,
        final_err_ax: last.err_ax,
        rows,
        monotone,
        pass,
    })
}

/// Grid approximation of the renorming sup_{n >= 0} ||mu^n R(mu)^n x||,
/// a lower bound of the true supremum. Contraction case (omega = 0) only.
pub fn renorm_estimate(a: &Operator, mu_grid: &[f64], n_max: u32, x: &Element) -> Result<f64> {
    let mut sup = sup_norm(x); // n = 0 term
    for &mu in mu_grid {
        if mu <= 0.0 {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
        let mut y = x.clone();
        for _ in 1..=n_max {
            y = resolvent_solve(a, mu, &y)?.scale(mu);
            sup = sup.max(sup_norm(&y));
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_dissipative, random_elements, random_q_matrix};
    use crate::semigroup::fit_type_bound;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn el(v: &[f64]) -> Element {
        Element::new(v.to_vec()).unwrap()
    }

    #[test]
    fn solve_cases() {
        let x = el(&[1.0, 2.0]);
        let y = resolvent_solve(&Operator::zeros(2), 1.0, &x).unwrap();
        assert_eq!(y, x);
        // lambda in the spectrum
        assert!(resolvent_solve(&Operator::diagonal(&[2.0]), 2.0, &el(&[1.0])).is_err());
    }

    #[test]
    fn solve_residual_random_dissipative() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let a = random_dissipative(&mut rng, 6, 1.0);
        let x = el(&[1.0, -1.0, 0.5, 2.0, 0.0, -0.3]);
        let y = resolvent_solve(&a, 1.0, &x).unwrap();
        let shifted = a.scale(-1.0).shift(1.0);
        let r = apply(&shifted, &y).unwrap().sub(&x);
        assert!(sup_norm(&r) <= 1e-10);
    }

    #[test]
    fn quadrature_trivial_scalar_cases() {
        // G = 0, lambda = 2, x = 3: integral of 3 e^{-2t} = 1.5
        let h = SemigroupHandle::new(Operator::zeros(1));
        let tb = TypeBound { m: 1.0, omega: 0.0 };
        let (y, info) = resolvent_quadrature(&h, 2.0, &el(&[3.0]), &tb, 1e-10).unwrap();
        assert!((y.values[0] - 1.5).abs() < 1e-9, "{} (t_max {})", y.values[0], info.t_max);

        // a = -1, lambda = 1: 1/(lambda - a) = 0.5
        let h = SemigroupHandle::new(Operator::diagonal(&[-1.0]));
        let tb = TypeBound { m: 1.0, omega: -1.0 };
        let (y, _) = resolvent_quadrature(&h, 1.0, &el(&[1.0]), &tb, 1e-10).unwrap();
        assert!((y.values[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn quadrature_refuses_uncertified_lambda() {
        let h = SemigroupHandle::new(Operator::zeros(1));
        let tb = TypeBound { m: 1.0, omega: 0.0 };
        assert!(resolvent_quadrature(&h, -0.5, &el(&[1.0]), &tb, 1e-8).is_err());
    }

    #[test]
    fn quadrature_matches_solve_on_q_matrix() {
        let q = Operator::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let h = SemigroupHandle::new(q.clone());
        let tb = TypeBound { m: 1.0, omega: 0.0 };
        let x = el(&[1.0, 0.0]);
        let (quad, _) = resolvent_quadrature(&h, 1.0, &x, &tb, 1e-10).unwrap();
        let direct = resolvent_solve(&q, 1.0, &x).unwrap();
        assert!(sup_norm(&quad.sub(&direct)) < 1e-8);
    }

    #[test]
    fn power_cases() {
        let x = el(&[2.0, -1.0]);
        for n in [1u32, 3, 7] {
            let y = resolvent_power(&Operator::zeros(2), 1.0, n, 1.0, &x).unwrap();
            assert!(sup_norm(&y.sub(&x)) < 1e-12);
        }
        // scalar a = -1, lambda = 1, n = 2, lambda' = lambda: (2/3)^2
        let a = Operator::diagonal(&[-1.0]);
        let y = resolvent_power(&a, 1.0, 2, 1.0, &el(&[1.0])).unwrap();
        assert!((y.values[0] - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn hille_yosida_q_matrix_contraction() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let q = random_q_matrix(&mut rng, 4, 2.0);
        let samples = random_elements(&mut rng, 4, 5);
        let r = hille_yosida_check(&q, 1.0, 0.0, 20, &[0.5, 1.0, 2.0, 5.0], &samples).unwrap();
        assert!(r.pass, "worst ratio {}", r.worst_ratio);
    }

    #[test]
    fn hille_yosida_scalar_shift_cases() {
        let a = Operator::diagonal(&[2.0]);
        let x = [el(&[1.0])];
        // correct shift passes
        let r = hille_yosida_check(&a, 1.0, 2.0, 20, &[3.0, 4.0], &x).unwrap();
        assert!(r.pass);
        // understated omega fails for large n: ((lambda-1)/(lambda-2/n))^n blows up
        let r = hille_yosida_check(&a, 1.0, 1.0, 20, &[3.0], &x).unwrap();
        assert!(!r.pass);

        let zero = Operator::zeros(1);
        let r = hille_yosida_check(&zero, 1.0, 0.0, 10, &[1.0], &x).unwrap();
        assert!((r.worst_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convergence_cases() {
        let x = [el(&[1.0])];
        let zero = Operator::zeros(1);
        let r = resolvent_convergence_check(&zero, &[1.0, 10.0], &x, 1e-12).unwrap();
        assert!(r.pass && r.final_err_x < 1e-14);

        // scalar a = -1 at lambda = 10: |10/11 - 1| = 1/11
        let a = Operator::diagonal(&[-1.0]);
        let r = resolvent_convergence_check(&a, &[10.0], &x, 1.0).unwrap();
        assert!((r.rows[0].err_x - 1.0 / 11.0).abs() < 1e-12);

        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let q = random_q_matrix(&mut rng, 5, 2.0);
        let samples = random_elements(&mut rng, 5, 4);
        let ax_norm = samples
            .iter()
            .map(|x| sup_norm(&apply(&q, x).unwrap()))
            .fold(0.0f64, f64::max);
        let r =
            resolvent_convergence_check(&q, &[1.0, 10.0, 100.0, 1000.0], &samples, 1e-2 * ax_norm)
                .unwrap();
        assert!(r.monotone);
        assert!(r.final_err_ax <= 1e-2 * ax_norm, "{} vs {}", r.final_err_ax, ax_norm);
    }

    #[test]
    fn renorm_cases() {
        let x = el(&[1.0, -2.0]);
        let mu_grid = [0.5, 1.0, 2.0, 4.0];
        assert!(
            (renorm_estimate(&Operator::zeros(2), &mu_grid, 16, &x).unwrap() - 2.0).abs() < 1e-12
        );

        // contraction resolvents keep the sup at ||x||
        let q = Operator::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let e = renorm_estimate(&q, &mu_grid, 16, &x).unwrap();
        assert!((e - 2.0).abs() < 1e-9);

        // non-contractive nilpotent: estimate brackets between ||x|| and M ||x||.
        // The fit horizon must cover the n_max / mu_min time scale the
        // iterated resolvents probe.
        let g = Operator::from_rows(&[vec![0.0, 4.0], vec![0.0, 0.0]]).unwrap();
        let h = SemigroupHandle::new(g.clone());
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let samples = random_elements(&mut rng, 2, 5);
        let tb = fit_type_bound(&h, 0.0, 16.0, 64, &samples).unwrap();
        for s in &samples {
            let est = renorm_estimate(&g, &[1.0, 2.0, 8.0], 16, s).unwrap();
            assert!(est >= sup_norm(s) - 1e-12);
            assert!(est <= tb.m * sup_norm(s) * (1.0 + 1e-6), "est {est}, M {}", tb.m);
        }
    }

    #[test]
    fn resolvent_identity_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..5 {
            let a = random_dissipative(&mut rng, 5, 1.0);
            let (l, m) = (1.0, 2.5);
            let rl = resolvent_operator(&a, l).unwrap();
            let rm = resolvent_operator(&a, m).unwrap();
            let lhs = rl.sub(&rm);
            let rhs = rl.matmul(&rm).scale(m - l);
            assert!(crate::linalg::op_norm(&lhs.sub(&rhs)) < 1e-9);
        }
    }

    #[test]
    fn resolvent_norm_bound_certified() {
        // ||R(lambda) x|| <= M ||x|| / (lambda - omega) with (M, omega) = (1, 0)
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        let q = random_q_matrix(&mut rng, 6, 2.0);
        let samples = random_elements(&mut rng, 6, 6);
        for &lambda in &[0.5, 1.0, 3.0] {
            for x in &samples {
                let y = resolvent_solve(&q, lambda, x).unwrap();
                assert!(sup_norm(&y) <= sup_norm(x) / lambda * (1.0 + 1e-10));
            }
        }
    }
}
