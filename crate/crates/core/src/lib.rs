//! Performance bounds and estimation for direction-of-arrival (DOA) estimation
//! with 1-bit quantized uniform linear arrays.
//!
//! The crate evaluates the Fisher information of the ideal (unquantized)
//! receiver, a guaranteed lower bound on the Fisher information after
//! hard-limiting (built from the quadratic sign statistics `z_i z_j`), the
//! resulting quantization loss and pessimistic CRLB, and the conservative
//! maximum-likelihood estimator (CMLE) that asymptotically attains that bound.
//! A seeded Monte Carlo harness compares estimator RMSE against the bound.

// Negated comparisons reject NaN on purpose; index loops mirror the matrix
// formulas; quadrature constants keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod array_model;
pub mod bounds;
pub mod error;
pub mod estimator;
pub mod exec;
pub mod moments;
pub mod montecarlo;
pub mod numerics;
pub mod report;
pub mod selftest;
pub mod sweep;

pub use array_model::{fisher_unquantized, receive_covariance, steering, CovariancePair, SteeringPair, UlaSource};
pub use bounds::{bound_report, fisher_exact_small, fisher_lower_bound, pcrlb, quantization_loss, BoundReport};
pub use error::{Error, Result};
pub use estimator::{cmle, gaussian_mle, sample_statistics, BitSnapshots, EstimateResult, EstimatorOptions, Method};
pub use exec::Execution;
pub use moments::{
    arcsine_map, orthant2, orthant4, quartic_moment, statistic_moments, PairIndex, QuantizedCovariance, QuarticCache,
    StatisticMoments,
};
pub use montecarlo::{quantize, run_rmse_experiment, sample_receive, ExperimentConfig, RmseReport, SnrPoint};
pub use report::{loss_csv, rmse_csv};
pub use selftest::{run_selftest, CheckGroup, SelftestOptions};
pub use sweep::{loss_sweep, parse_list, parse_range, LossRow, SweepSpec, SweepVariable};
