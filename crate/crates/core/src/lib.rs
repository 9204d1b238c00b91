//! Estimation of univariate and multivariate moving-average processes from
//! the recursion linking MA coefficients to the coefficients of the AR
//! representation.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the bottom fix the scalar to `f64`.
//!
//! ```
//! use marec::{ma_to_ar, restricted_ols_from_stage1, MaModel, RestrictedConfig, Stage1Fit};
//!
//! let truth = MaModel::new(vec![0.5f64, 0.3]).unwrap();
//! let phi = ma_to_ar(&truth, 100).unwrap();
//! let stage1 = Stage1Fit::from_coefficients(phi, vec![1e-30; 100], 0.0).unwrap();
//! let est = restricted_ols_from_stage1(stage1, 2, &RestrictedConfig::default()).unwrap();
//! assert!((est.psi_hat[0] - 0.5).abs() < 1e-8);
//! ```

pub mod error;
pub mod estimators;
pub mod linreg;
pub mod model;
pub mod montecarlo;
pub mod recursion;
pub mod roots;
pub mod scalar;
pub mod simulate;

pub use error::{Error, Result};
pub use estimators::{
    durbin, durbin_from_stage1, durbin_with, fit_ar_ols, fit_var_ols, restricted_ols, restricted_ols_from_stage1,
    restricted_ols_multivariate, restricted_ols_multivariate_from_stage1, restricted_ols_with, suggest_ar_order,
    unrestricted_ols, unrestricted_ols_from_stage1, unrestricted_ols_multivariate,
    unrestricted_ols_multivariate_from_stage1, DurbinSequence, EstimateReport, Method, RestrictedConfig, Stage1Fit,
    Stage2Diagnostics, VarStage1Fit, VmaEstimateReport,
};
pub use linreg::{autocovariances, ols, theil_f_class, yule_walker, MixedFit, OlsFit};
pub use model::{companion_from_ar, ArModel, CompanionMatrix, MaModel, TimeSeries, VarModel, VmaModel};
pub use montecarlo::{run_grid, run_point, seed_mix, skip_rule, GridPoint, GridResult, GridSpec, PointRecord, Region};
pub use recursion::{ar_to_ma, companion_power_column, ma_to_ar, var_to_vma, vma_to_var};
pub use roots::{classify_invertibility, invertible_sibling, ma_roots, Invertibility, InvertibilityReport};
pub use scalar::Real;
pub use simulate::{simulate_ar, simulate_ma, simulate_vma};

pub type TimeSeriesF64 = TimeSeries<f64>;
pub type MaModelF64 = MaModel<f64>;
pub type ArModelF64 = ArModel<f64>;
pub type VmaModelF64 = VmaModel<f64>;
pub type VarModelF64 = VarModel<f64>;
pub type Stage1FitF64 = Stage1Fit<f64>;
pub type EstimateReportF64 = EstimateReport<f64>;
pub type VmaEstimateReportF64 = VmaEstimateReport<f64>;
pub type GridSpecF64 = GridSpec<f64>;
pub type GridResultF64 = GridResult<f64>;
