//! Seeded generators for test operators, chains and sample elements.

use rand::Rng;

use crate::linalg::{Element, Operator};

/// Conservative jump-rate matrix: nonnegative off-diagonals scaled by
/// `rate`, diagonal set to minus the row sum.
pub fn random_q_matrix<R: Rng>(rng: &mut R, dim: usize, rate: f64) -> Operator {
    let mut op = Operator::zeros(dim);
    for i in 0..dim {
        let mut row_sum = 0.0;
        for j in 0..dim {
            if i != j {
                let v = rate * rng.gen::<f64>() / (dim - 1).max(1) as f64;
                op.set(i, j, v);
                row_sum += v;
            }
        }
        op.set(i, i, -row_sum);
    }
    op
}

/// Sup-norm dissipative matrix: strictly row-diagonally dominant with a
/// negative diagonal, so the generated semigroup is a contraction.
pub fn random_dissipative<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Operator {
    let mut op = Operator::zeros(dim);
    for i in 0..dim {
        let mut off_abs = 0.0;
        for j in 0..dim {
            if i != j {
                let v = scale * (2.0 * rng.gen::<f64>() - 1.0) / dim as f64;
                op.set(i, j, v);
                off_abs += v.abs();
            }
        }
        op.set(i, i, -(off_abs + scale * rng.gen::<f64>()));
    }
    op
}

pub fn random_elements<R: Rng>(rng: &mut R, dim: usize, count: usize) -> Vec<Element> {
    (0..count)
        .map(|_| {
            Element::new((0..dim).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect()).unwrap()
        })
        .collect()
}
