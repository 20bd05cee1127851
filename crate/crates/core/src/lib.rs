//! Robust parameter estimation with q-deformed logarithms.
//!
//! The crate provides the estimating functions used for fitting univariate
//! densities when the data may carry outliers:
//!
//! - `rho_log`: the ordinary log-likelihood (MLE),
//! - `rho_logq`: the q-log-likelihood (MqLE),
//! - `psi_log` / `psi_logq`: least informative distribution (LID) estimating
//!   functions, the derivative of the (q-)log-likelihood of the contaminated
//!   density `(1 - eps) f0 + eps f1` at `eps = 0`,
//! - Huber's M-estimator for location and scale.
//!
//! Around those sit the five density families (Weibull, Gamma, Burr III,
//! exponential power and generalized t), a box-constrained hybrid genetic
//! optimizer, AIC/BIC and their robust `RAIC_q` / `RBIC_q` variants, and the
//! contamination experiments (outlier injection, order-statistic simulation,
//! edge-inclusive bin counting).
//!
//! All numerical code is generic over the scalar type through [`Real`]; the
//! `*64` / `*32` aliases below fix the common choices.
//!
//! ```
//! use qlid::{DistributionSpec, Sample, SampleSupport, estimators};
//!
//! let sample = Sample::new(vec![0.5_f64, 2.0], SampleSupport::HalfLine).unwrap();
//! let f0 = DistributionSpec::gamma(1.0, 1.0).prepare().unwrap();
//! let rho = estimators::rho_log(&sample, &f0).value().unwrap();
//! assert!((rho + 2.5).abs() < 1e-12);
//! ```

// `!(x > 0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod optimizer;
pub mod qcore;
pub mod robustlab;
pub mod sample;
pub mod scalar;
pub mod special;
mod sum;

pub use criteria::{
    compare, ic, ric_q, ComparabilityClass, Comparison, ComparisonRow, Condition, CriterionKind,
    FitResult, Penalty,
};
pub use distributions::{Density, DistributionSpec, Family, Param, PreparedDensity};
pub use error::{Error, Result};
pub use estimators::{
    ConvexCombination, EstimatorKind, EstimatorSpec, FamilyBinding, Lambda, Objective,
};
pub use optimizer::{hga_maximize, Bounds, Diagnostics, OptConfig, Optimum};
pub use qcore::{log_q, log_q_second_derivative, tsallis_entropy, QParam};
pub use robustlab::{artificial_mean_sample, bin_count, inject_outliers, order_statistic_means, BinReport};
pub use sample::{Sample, SampleSupport};
pub use scalar::Real;
pub use sum::pairwise_sum;

pub type Sample64 = Sample<f64>;
pub type Sample32 = Sample<f32>;
pub type DistributionSpec64 = DistributionSpec<f64>;
pub type DistributionSpec32 = DistributionSpec<f32>;
pub type EstimatorSpec64 = EstimatorSpec<f64>;
pub type EstimatorSpec32 = EstimatorSpec<f32>;
pub type QParam64 = QParam<f64>;
pub type QParam32 = QParam<f32>;
pub type Bounds64 = Bounds<f64>;
pub type FitResult64 = FitResult<f64>;
pub type BinReport64 = BinReport<f64>;
