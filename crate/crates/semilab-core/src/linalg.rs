//! Finite-dimensional substrate: coordinate vectors, dense operators,
//! sup-norms, pivoted solves and eigenvalue-based growth diagnostics.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a solve is declared singular.
pub const SINGULARITY_TOL: f64 = 1e-12;

/// A vector on the n-point discretized state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub values: Vec<f64>,
}

impl Element {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("element must have dim >= 1".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("element has non-finite entry".into()));
        }
        Ok(Element { values })
    }

    pub fn zeros(dim: usize) -> Self {
        Element { values: vec![0.0; dim] }
    }

    /// Standard basis vector e_i.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Element { values: v }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn scale(&self, c: f64) -> Element {
        Element {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        Element {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Element) -> Element {
        Element {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Dense n-by-n real operator in row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    pub dim: usize,
    /// Row-major entries, length dim * dim.
    pub entries: Vec<f64>,
}

impl Operator {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("operator must have dim >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("operator has non-finite entry".into()));
        }
        Ok(Operator { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        Operator::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Operator { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut op = Operator::zeros(dim);
        for (i, d) in diag.iter().enumerate() {
            op.entries[i * dim + i] = *d;
        }
        op
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn scale(&self, c: f64) -> Operator {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Operator) -> Operator {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Operator { dim: n, entries: out }
    }

    /// Shift by a multiple of the identity: self + c * I.
    pub fn shift(&self, c: f64) -> Operator {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i] += c;
        }
        out
    }
}

/// Matrix-vector product.
pub fn apply(op: &Operator, x: &Element) -> Result<Element> {
    if op.dim != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim,
            got: x.dim(),
        });
    }
    let n = op.dim;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += op.entries[i * n + j] * x.values[j];
        }
        out[i] = acc;
    }
    Ok(Element { values: out })
}

/// Solve op * y = b by LU with partial pivoting.
///
/// A pivot whose magnitude drops below `SINGULARITY_TOL` relative to the
/// largest initial entry is reported as `SingularOperator`.
pub fn solve(op: &Operator, b: &Element) -> Result<Element> {
    if op.dim != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim,
            got: b.dim(),
        });
    }
    let n = op.dim;
    let mut a = op.entries.clone();
    let mut y = b.values.clone();
    let scale = op
        .entries
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);

    for col in 0..n {
        // partial pivot
        let mut piv_row = col;
        let mut piv_val = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > piv_val {
                piv_val = v;
                piv_row = r;
            }
        }
        if piv_val < SINGULARITY_TOL * scale {
            return Err(Error::SingularOperator {
                pivot: piv_val,
                step: col,
            });
        }
        if piv_row != col {
            for j in 0..n {
                a.swap(col * n + j, piv_row * n + j);
            }
            y.swap(col, piv_row);
        }
        let pivot = a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= factor * a[col * n + j];
            }
            y[r] -= factor * y[col];
        }
    }
    // back substitution
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in (i + 1)..n {
            acc -= a[i * n + j] * y[j];
        }
        y[i] = acc / a[i * n + i];
    }
    Element::new(y)
}

/// Solve op * Y = I column by column, returning the inverse operator.
pub fn invert(op: &Operator) -> Result<Operator> {
    let n = op.dim;
    let mut out = Operator::zeros(n);
    for j in 0..n {
        let col = solve(op, &Element::basis(n, j))?;
        for i in 0..n {
            out.set(i, j, col.values[i]);
        }
    }
    Ok(out)
}

/// Coordinate sup-norm max_i |x_i|.
pub fn sup_norm(x: &Element) -> f64 {
    x.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Induced operator norm for the sup-norm: max absolute row sum.
pub fn op_norm(op: &Operator) -> f64 {
    let n = op.dim;
    (0..n)
        .map(|i| (0..n).map(|j| op.entries[i * n + j].abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}

/// Largest real part over the spectrum, the finite-dimensional growth bound.
pub fn spectral_abscissa(op: &Operator) -> Result<f64> {
    let n = op.dim;
    let m = DMatrix::from_row_slice(n, n, &op.entries);
    let eigs = m.complex_eigenvalues();
    let mut worst = f64::NEG_INFINITY;
    for e in eigs.iter() {
        if !e.re.is_finite() {
            return Err(Error::EigenFailure(n));
        }
        worst = worst.max(e.re);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(v: &[f64]) -> Element {
        Element::new(v.to_vec()).unwrap()
    }

    #[test]
    fn apply_identity_and_zero() {
        let x = el(&[3.0, -1.0]);
        assert_eq!(apply(&Operator::identity(2), &x).unwrap(), x);
        assert_eq!(
            apply(&Operator::zeros(2), &x).unwrap(),
            el(&[0.0, 0.0])
        );
    }

    #[test]
    fn apply_basis_shift() {
        let op = Operator::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(apply(&op, &el(&[0.0, 1.0])).unwrap(), el(&[1.0, 0.0]));
    }

    #[test]
    fn apply_dim_mismatch() {
        let op = Operator::identity(2);
        assert!(apply(&op, &el(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn solve_identity_and_scalar() {
        let b = el(&[1.0, 2.0]);
        assert_eq!(solve(&Operator::identity(2), &b).unwrap(), b);
        let two = Operator::diagonal(&[2.0]);
        assert_eq!(solve(&two, &el(&[4.0])).unwrap(), el(&[2.0]));
    }

    #[test]
    fn solve_residual_on_well_conditioned_system() {
        // fixed pseudo-random well-conditioned 5x5: diagonally dominant
        let n = 5;
        let mut op = Operator::zeros(n);
        let mut s = 12345u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for i in 0..n {
            let mut row_abs = 0.0;
            for j in 0..n {
                if i != j {
                    let v = next();
                    op.set(i, j, v);
                    row_abs += v.abs();
                }
            }
            op.set(i, i, row_abs + 1.0);
        }
        let b = el(&[1.0, -2.0, 0.5, 3.0, -1.0]);
        let y = solve(&op, &b).unwrap();
        let r = apply(&op, &y).unwrap().sub(&b);
        assert!(sup_norm(&r) <= 1e-10 * (1.0 + sup_norm(&b)));
    }

    #[test]
    fn solve_singular_detected() {
        let op = Operator::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        match solve(&op, &el(&[1.0, 2.0])) {
            Err(Error::SingularOperator { .. }) => {}
            other => panic!("expected SingularOperator, got {other:?}"),
        }
    }

    #[test]
    fn norms() {
        assert_eq!(sup_norm(&el(&[1.0, -3.0, 2.0])), 3.0);
        assert_eq!(op_norm(&Operator::identity(4)), 1.0);
        let q = Operator::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert_eq!(op_norm(&q), 2.0);
    }

    #[test]
    fn abscissa_cases() {
        let d = Operator::diagonal(&[-1.0, -3.0]);
        assert!((spectral_abscissa(&d).unwrap() + 1.0).abs() <= 1e-8);
        let q = Operator::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert!(spectral_abscissa(&q).unwrap().abs() <= 1e-8);
        // eigenvalues +/- i, real parts 0
        let rot = Operator::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(spectral_abscissa(&rot).unwrap().abs() <= 1e-8);
    }

    #[test]
    fn json_round_trip_schema() {
        let op = Operator::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let js = serde_json::to_value(&op).unwrap();
        assert_eq!(js["dim"], 2);
        assert_eq!(js["entries"].as_array().unwrap().len(), 4);
        let back: Operator = serde_json::from_value(js).unwrap();
        assert_eq!(back, op);
        let x = el(&[1.0, 2.0]);
        let js = serde_json::to_value(&x).unwrap();
        assert_eq!(js["values"].as_array().unwrap().len(), 2);
    }
}
