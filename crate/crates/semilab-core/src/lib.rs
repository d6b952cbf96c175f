//! Desk-scale numerical laboratory for strongly continuous operator
//! semigroups on finite-dimensional discretizations: exponential-series
//! semigroups, integral and direct resolvents, bounded-approximant limits,
//! weighted-sup seminorm families, tail bounds with stochastic domination,
//! and Markov transition semigroups with martingale-residual verification.

pub mod error;
pub mod linalg;
pub mod markov;
pub mod prob;
pub mod resolvent;
pub mod sample;
pub mod semigroup;
pub mod seminorm;
pub mod yosida;

pub use error::{Error, Result};
pub use linalg::{Element, Operator};
pub use markov::{ChainSpec, Trajectory};
pub use prob::Distribution;
pub use semigroup::{SemigroupHandle, TypeBound};
pub use seminorm::{ConvexCombo, SeminormSpec};
pub use yosida::YosidaScheme;
