//! Greedy importance sampling.
//!
//! Each start drawn from a proposal `Q` seeds a deterministic greedy ascent
//! of `|f(x) p̃(x)|`. Every point of the resulting block is weighted
//! `P(x_j)/Q(x_i)·α_ij`, where the auxiliary weights `α` make the incoming
//! weight of every point sum to one, so the estimator stays unbiased.
//!
//! - [`model`]: points, grids, targets, proposals and the scenario catalog.
//! - [`search`]: greedy successors, predecessors and block construction.
//! - [`auxweight`]: `S(b, m)`, path corrections, `α`, and the predecessor-tree check.
//! - [`estimators`]: plain, self-normalized, block and greedy importance sampling.
//! - [`baselines`]: direct, rejection, Metropolis, Gibbs, HMC and the Kalman model.
//! - [`bench`]: repetition runner, statistics and export.
//!
//! ```
//! use greedy_is::auxweight::SearchConfig;
//! use greedy_is::estimators::{gis_estimate_continuous, WeightMode};
//! use greedy_is::model::make_gaussian;
//! use rand::SeedableRng;
//!
//! let p = make_gaussian(1, 0.0, 1.0).unwrap();
//! let q = make_gaussian(1, 0.0, 36.0).unwrap();
//! let f = |x: &[f64]| x[0] * x[0];
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let cfg = SearchConfig::for_dimension(1);
//! let report =
//!     gis_estimate_continuous(&p, &q, &f, &cfg, 2000, &mut rng, WeightMode::Indirect).unwrap();
//! assert!((report.estimate - 1.0).abs() < 0.2);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auxweight;
pub mod baselines;
pub mod bench;
pub mod error;
pub mod estimators;
pub mod model;
pub mod search;

pub use error::{Error, Result};
