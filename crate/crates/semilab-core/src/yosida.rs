//! Bounded approximants A_n = n^2 R(n) - n I, their semigroups, the
//! Cauchy-difference error certificate t ||A_n x - A_m x||, and the
//! joint equi-continuity scan over the approximating family.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{apply, op_norm, sup_norm, Element, Operator};
use crate::resolvent::resolvent_operator;
use crate::semigroup::{exp_series, TypeBound};

/// Approximation scheme for one generator. When omega != 0 the scheme works
/// with the shifted generator A - omega I and multiplies evaluations back by
/// e^{omega t}, so the (1, 0) contraction machinery applies unchanged.
#[derive(Debug, Clone)]
pub struct YosidaScheme {
    pub generator: Operator,
    pub indices: Vec<u32>,
    pub approximants: Vec<Operator>,
    pub bound: TypeBound,
    shifted: Operator,
}

impl YosidaScheme {
    pub fn new(generator: Operator, indices: Vec<u32>, bound: TypeBound) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidParameter("scheme needs at least one index".into()));
        }
        let shifted = generator.shift(-bound.omega);
        let approximants = indices
            .iter()
            .map(|&n| yosida_approximant(&shifted, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(YosidaScheme {
            generator,
            indices,
            approximants,
            bound,
            shifted,
        })
    }

    fn approximant_for(&self, n: u32) -> Result<&Operator> {
        self.indices
            .iter()
            .position(|&i| i == n)
            .map(|p| &self.approximants[p])
            .ok_or_else(|| Error::InvalidParameter(format!("index {n} not in scheme")))
    }

    /// True if the Cauchy certificate is rigorous rather than heuristic.
    pub fn is_contraction_case(&self) -> bool {
        (self.bound.m - 1.0).abs() <= 1e-12
    }
}

/// A_n by both algebraic routes, n A R(n) and n^2 R(n) - n I, required to
/// agree to 1e-10; the second form is returned.
pub fn yosida_approximant(a: &Operator, n: u32) -> Result<Operator> {
    if n == 0 {
        return Err(Error::InvalidParameter("approximant index must be >= 1".into()));
    }
    let nf = n as f64;
    let r = resolvent_operator(a, nf)?;
    let form_product = a.matmul(&r).scale(nf);
    let form_shift = r.scale(nf * nf).shift(-nf);
    let gap = op_norm(&form_product.sub(&form_shift));
    let scale = op_norm(&form_shift).max(1.0);
    if gap > 1e-10 * scale {
        return Err(Error::Domain(format!(
            "approximant forms disagree by {gap:.3e} at n = {n}"
        )));
    }
    Ok(form_shift)
}

/// T_n(t) x = exp(t A_n) x, rescaled by e^{omega t} when the scheme was shifted.
pub fn yosida_semigroup(scheme: &YosidaScheme, n: u32, t: f64, x: &Element) -> Result<Element> {
    let a_n = scheme.approximant_for(n)?;
    let y = exp_series(a_n, t, x, 1e-13)?;
    Ok(y.scale((scheme.bound.omega * t).exp()))
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitCertificate {
    /// t ||A_n x - A_m x||, the Cauchy gap between the two approximants.
    pub cauchy_gap: f64,
    /// t ||A_n x - A x||, bounding the distance to the limit semigroup.
    pub limit_gap: f64,
    /// True in the contraction case; otherwise the certificate is heuristic.
    pub rigorous: bool,
}

/// T_n(t) x for the larger index plus the pair's error certificate.
pub fn yosida_limit(
    scheme: &YosidaScheme,
    t: f64,
    x: &Element,
    n_pair: (u32, u32),
) -> Result<(Element, LimitCertificate)> {
    let (n, m) = n_pair;
    let hi = n.max(m);
    let a_n = scheme.approximant_for(n)?;
    let a_m = scheme.approximant_for(m)?;
    let growth = (scheme.bound.omega * t).exp();
    let an_x = apply(a_n, x)?;
    let am_x = apply(a_m, x)?;
    let ax = apply(&scheme.shifted, x)?;
    let cert = LimitCertificate {
        cauchy_gap: t * sup_norm(&an_x.sub(&am_x)) * growth,
        limit_gap: t * sup_norm(&if n >= m { an_x.sub(&ax) } else { am_x.sub(&ax) }) * growth,
        rigorous: scheme.is_contraction_case(),
    };
    Ok((yosida_semigroup(scheme, hi, t, x)?, cert))
}

#[derive(Debug, Clone, Serialize)]
pub struct EquicontinuityReport {
    /// sup over n <= n_max, k <= n of ||(n R(n))^k x|| / ||x||.
    pub resolvent_sup: f64,
    /// sup over scheme indices and the time grid of e^{-omega t} ||T_n(t) x|| / ||x||.
    pub semigroup_sup: f64,
    pub m: f64,
    pub pass: bool,
}

/// Certifies the iterated-resolvent bound first, then scans the approximant
/// semigroups over the time grid.
pub fn joint_equicontinuity_scan(
    scheme: &YosidaScheme,
    horizon: f64,
    grid: usize,
    samples: &[Element],
) -> Result<EquicontinuityReport> {
    let m = scheme.bound.m;
    let mut resolvent_sup = 0.0f64;
    for &n in &scheme.indices {
        for x in samples {
            let nx = sup_norm(x);
            if nx == 0.0 {
                continue;
            }
            // iterate y <- n R(n) y, covering all powers k <= n
            let mut y = x.clone();
            for _k in 1..=n.min(16) {
                y = crate::resolvent::resolvent_solve(&scheme.shifted, n as f64, &y)?
                    .scale(n as f64);
                resolvent_sup = resolvent_sup.max(sup_norm(&y) / nx);
            }
        }
    }
    let mut semigroup_sup = 0.0f64;
    for &n in &scheme.indices {
        for i in 0..=grid {
            let t = horizon * i as f64 / grid as f64;
            for x in samples {
                let nx = sup_norm(x);
                if nx == 0.0 {
                    continue;
                }
                let y = yosida_semigroup(scheme, n, t, x)?;
                semigroup_sup =
                    semigroup_sup.max((-scheme.bound.omega * t).exp() * sup_norm(&y) / nx);
            }
        }
    }
    let pass = resolvent_sup <= m * (1.0 + 1e-9) && semigroup_sup <= m * (1.0 + 1e-9);
    Ok(EquicontinuityReport {
        resolvent_sup,
        semigroup_sup,
        m,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_elements, random_q_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn el(v: &[f64]) -> Element {
        Element::new(v.to_vec()).unwrap()
    }

    fn sym_q() -> Operator {
        Operator::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    fn contraction_bound() -> TypeBound {
        TypeBound { m: 1.0, omega: 0.0 }
    }

    #[test]
    fn approximant_cases() {
        let a0 = yosida_approximant(&Operator::zeros(3), 5).unwrap();
        assert!(op_norm(&a0) < 1e-12);

        // scalar a = -1, n = 10: A_10 = -10/11
        let a = Operator::diagonal(&[-1.0]);
        let a10 = yosida_approximant(&a, 10).unwrap();
        assert!((a10.get(0, 0) + 10.0 / 11.0).abs() < 1e-12);

        // Neumann-series bound ||A_n - A|| <= ||A^2|| / (n - ||A||)
        let q = sym_q();
        let n = 50u32;
        let an = yosida_approximant(&q, n).unwrap();
        let a2 = q.matmul(&q);
        let bound = op_norm(&a2) / (n as f64 - op_norm(&q));
        assert!(op_norm(&an.sub(&q)) <= bound * (1.0 + 1e-9));
    }

    #[test]
    fn approximant_rejects_spectrum() {
        // 2 is an eigenvalue of diag(2); after no shift, n = 2 hits the spectrum
        let a = Operator::diagonal(&[2.0]);
        assert!(yosida_approximant(&a, 2).is_err());
    }

    #[test]
    fn semigroup_cases() {
        let scheme =
            YosidaScheme::new(sym_q(), vec![4, 10], contraction_bound()).unwrap();
        let x = el(&[1.0, -2.0]);
        let y = yosida_semigroup(&scheme, 4, 0.0, &x).unwrap();
        assert!(sup_norm(&y.sub(&x)) < 1e-13);

        let zero_scheme =
            YosidaScheme::new(Operator::zeros(2), vec![3], contraction_bound()).unwrap();
        let y = yosida_semigroup(&zero_scheme, 3, 2.5, &x).unwrap();
        assert!(sup_norm(&y.sub(&x)) < 1e-12);

        // scalar a = -1, n = 10, t = 1: e^{-10/11} x
        let s = YosidaScheme::new(Operator::diagonal(&[-1.0]), vec![10], contraction_bound())
            .unwrap();
        let y = yosida_semigroup(&s, 10, 1.0, &el(&[1.0])).unwrap();
        assert!((y.values[0] - (-10.0f64 / 11.0).exp()).abs() < 1e-12);

        // contraction: ||T_n(t)|| <= 1 on samples
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for x in random_elements(&mut rng, 2, 5) {
            let y = yosida_semigroup(&scheme, 10, 1.7, &x).unwrap();
            assert!(sup_norm(&y) <= sup_norm(&x) * (1.0 + 1e-10));
        }
    }

    #[test]
    fn limit_certificate_cases() {
        let zero_scheme =
            YosidaScheme::new(Operator::zeros(2), vec![2, 4], contraction_bound()).unwrap();
        let (_, cert) = yosida_limit(&zero_scheme, 1.0, &el(&[1.0, 1.0]), (2, 4)).unwrap();
        assert_eq!(cert.cauchy_gap, 0.0);
        assert_eq!(cert.limit_gap, 0.0);
        assert!(cert.rigorous);

        // scalar: |e^{a_n t} - e^{a t}| <= t |a_n - a|
        let s = YosidaScheme::new(Operator::diagonal(&[-1.0]), vec![50, 100], contraction_bound())
            .unwrap();
        let (y, cert) = yosida_limit(&s, 1.0, &el(&[1.0]), (100, 50)).unwrap();
        let truth = (-1.0f64).exp();
        assert!((y.values[0] - truth).abs() <= cert.limit_gap * (1.0 + 1e-9));
    }

    #[test]
    fn limit_error_decreases_and_respects_certificate() {
        let q = sym_q();
        let indices: Vec<u32> = (2..=7).map(|k| 1u32 << k).collect();
        let scheme = YosidaScheme::new(q.clone(), indices.clone(), contraction_bound()).unwrap();
        let x = el(&[1.0, 0.0]);
        let t = 1.0;
        let truth = exp_series(&q, t, &x, 1e-15).unwrap();
        let mut prev = f64::INFINITY;
        for &n in &indices {
            let (y, cert) = yosida_limit(&scheme, t, &x, (n, n)).unwrap();
            let err = sup_norm(&y.sub(&truth));
            assert!(err <= cert.limit_gap * (1.0 + 1e-9) + 1e-14, "n={n}");
            assert!(err <= prev * (1.0 + 1e-12), "n={n}: {err} vs {prev}");
            prev = err;
        }
    }

    #[test]
    fn approximants_commute() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let q = random_q_matrix(&mut rng, 4, 2.0);
        let scheme = YosidaScheme::new(q, vec![5, 9], contraction_bound()).unwrap();
        let an = &scheme.approximants[0];
        let am = &scheme.approximants[1];
        assert!(op_norm(&an.matmul(am).sub(&am.matmul(an))) <= 1e-9);
    }

    #[test]
    fn convergence_is_first_order_in_n() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let q = random_q_matrix(&mut rng, 4, 1.5);
        let x = el(&[1.0, -0.5, 0.25, 0.0]);
        let ax = apply(&q, &x).unwrap();
        let ns: Vec<u32> = (3..=8).map(|k| 1u32 << k).collect();
        let mut logs = Vec::new();
        for &n in &ns {
            let an = yosida_approximant(&q, n).unwrap();
            let err = sup_norm(&apply(&an, &x).unwrap().sub(&ax));
            logs.push(((n as f64).ln(), err.ln()));
        }
        // least-squares slope over log-log points
        let count = logs.len() as f64;
        let sx: f64 = logs.iter().map(|p| p.0).sum();
        let sy: f64 = logs.iter().map(|p| p.1).sum();
        let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
        let slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
        assert!((slope + 1.0).abs() <= 0.2, "slope {slope}");
    }

    #[test]
    fn generator_recovery_first_order() {
        let q = sym_q();
        let x = el(&[1.0, 0.0]);
        let ax = apply(&q, &x).unwrap();
        let mut prev = f64::INFINITY;
        for &h in &[1.0, 0.5, 0.25, 0.125, 0.0625] {
            let th = exp_series(&q, h, &x, 1e-15).unwrap();
            let quotient = th.sub(&x).scale(1.0 / h);
            let err = sup_norm(&quotient.sub(&ax));
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 0.1);
    }

    #[test]
    fn equicontinuity_scan_cases() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let samples = random_elements(&mut rng, 2, 5);

        let zero_scheme =
            YosidaScheme::new(Operator::zeros(2), vec![1, 2, 4], contraction_bound()).unwrap();
        let r = joint_equicontinuity_scan(&zero_scheme, 1.0, 16, &samples).unwrap();
        assert!(r.pass);
        assert!((r.semigroup_sup - 1.0).abs() < 1e-12);

        let q_scheme =
            YosidaScheme::new(sym_q(), vec![2, 4, 8, 16], contraction_bound()).unwrap();
        let r = joint_equicontinuity_scan(&q_scheme, 2.0, 32, &samples).unwrap();
        assert!(r.pass, "sups {} {}", r.resolvent_sup, r.semigroup_sup);

        // omega = 1 rescaling brings diag(1) into the contraction regime
        let s = YosidaScheme::new(
            Operator::diagonal(&[1.0]),
            vec![2, 4],
            TypeBound { m: 1.0, omega: 1.0 },
        )
        .unwrap();
        let r = joint_equicontinuity_scan(&s, 1.0, 16, &[el(&[1.0])]).unwrap();
        assert!(r.pass, "sups {} {}", r.resolvent_sup, r.semigroup_sup);
    }
}
