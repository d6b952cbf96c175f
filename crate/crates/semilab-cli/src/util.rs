use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use semilab_core::markov::ChainSpec;
use semilab_core::{Distribution, Element, Operator};

pub fn load_operator(path: &Path) -> Result<Operator> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let op: Operator = serde_json::from_str(&text).context("parsing operator JSON")?;
    Operator::new(op.dim, op.entries.clone()).context("validating operator")?;
    Ok(op)
}

pub fn load_chain(path: &Path) -> Result<ChainSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).context("parsing chain JSON")
}

pub fn load_element(path: &Path) -> Result<Element> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).context("parsing element JSON")
}

/// Distribution spec strings: exp:RATE, gamma:SHAPE:RATE, poisson:MEAN,
/// ceilpoisson:N:T, gammadom:LAMBDA0, poissondom:T, point:V.
pub fn parse_distribution(spec: &str) -> Result<Distribution> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.parse::<f64>().with_context(|| format!("bad number {s:?} in {spec:?}"))
    };
    let d = match parts.as_slice() {
        ["exp", r] => Distribution::Exponential { rate: num(r)? },
        ["gamma", k, r] => Distribution::Gamma {
            shape: k.parse().with_context(|| format!("bad shape in {spec:?}"))?,
            rate: num(r)?,
        },
        ["poisson", m] => Distribution::Poisson { mean: num(m)? },
        ["ceilpoisson", n, t] => Distribution::CeilScaledPoisson {
            n: n.parse().with_context(|| format!("bad n in {spec:?}"))?,
            t: num(t)?,
        },
        ["gammadom", l] => Distribution::GammaDominator { lambda0: num(l)? },
        ["poissondom", t] => Distribution::PoissonDominator { horizon: num(t)? },
        ["point", v] => Distribution::PointMass { v: num(v)? },
        _ => bail!("unrecognized distribution spec {spec:?}"),
    };
    d.validate()?;
    Ok(d)
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?}")))
        .collect()
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad index {p:?}")))
        .collect()
}

/// Canonical JSON: sorted object keys (the default serde_json map), pretty
/// printed with a trailing newline.
pub fn to_canonical_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(format!("{}\n", serde_json::to_string_pretty(&v)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_specs_parse() {
        assert_eq!(
            parse_distribution("exp:2.5").unwrap(),
            Distribution::Exponential { rate: 2.5 }
        );
        assert_eq!(
            parse_distribution("gamma:3:6").unwrap(),
            Distribution::Gamma { shape: 3, rate: 6.0 }
        );
        assert_eq!(
            parse_distribution("ceilpoisson:2:0.5").unwrap(),
            Distribution::CeilScaledPoisson { n: 2, t: 0.5 }
        );
        assert!(parse_distribution("exp:-1").is_err());
        assert!(parse_distribution("cauchy:1").is_err());
    }
}
