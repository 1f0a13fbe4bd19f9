//! Robust linear regression through the mean-shift outlier model
//!
//! ```text
//! y = Xβ + γ + ε
//! ```
//!
//! where a nonzero γᵢ marks case i as an outlier. Outliers and coefficients
//! are estimated together by iterating a thresholding rule Θ on the
//! residuals (Θ-IPOD). Hard thresholding is the workhorse; soft thresholding
//! reproduces Huber's M-estimator and is kept mostly as a baseline.
//!
//! Modules, roughly in dependency order:
//!
//! - [`threshold`]: Θ rules, ψ functions and the penalties they induce.
//! - [`regress`]: QR factorization, hat matrix, leverages, reduced model.
//! - [`pilot`]: robust starting values (LTS with concentration steps).
//! - [`ipod`]: the iteration itself and the λ solution path.
//! - [`tune`]: BIC* and the local-minimum selection of λ.
//! - [`mest`]: IRLS and Huber's concomitant-scale fit for comparison.
//! - [`highdim`]: the p > n variant with proportional screening.
//! - [`sim`]: simulation designs, detection metrics, timing benchmark.
//! - [`data`]: bundled datasets and CSV ingestion.
//!
//! ```
//! use ipod::{data, ipod::PathConfig, pilot, threshold::ThresholdRule, tune};
//!
//! let problem = data::hbk().problem(true).unwrap();
//! let model = problem.factor().unwrap();
//! let start = pilot::lts_lite(&problem, &pilot::LtsConfig::default(), 1).unwrap();
//! let path = ipod::ipod::solution_path(
//!     &model,
//!     problem.y(),
//!     &PathConfig::new(ThresholdRule::Hard),
//!     &start.gamma_start(&problem),
//! )
//! .unwrap();
//! let report = tune::select_lambda(&path, &tune::SelectConfig::for_n(problem.n())).unwrap();
//! assert_eq!(report.selected_df, 10);
//! ```

pub mod data;
pub mod error;
pub mod highdim;
pub mod ipod;
pub mod mest;
pub mod pilot;
pub mod regress;
pub mod sim;
pub mod threshold;
pub mod tune;

mod par;
mod serde_util;

pub use par::configure_threads;

pub use error::{IpodError, Result};
pub use regress::{QrModel, RegressionProblem};
pub use threshold::ThresholdRule;
