//! Two-stage MA estimation.
//!
//! Stage 1 fits a long AR (or VAR) of order `l` by conditional OLS without
//! intercept. Stage 2 exploits the fact that, beyond index `q`, the AR
//! coefficients of an MA(q) obey `φ_j = −Σ_{i=1}^q ψ_i φ_{j-i}`, and estimates
//! `ψ` from the stage-1 coefficient sequence, either with Yule-Walker (Durbin)
//! or with least squares, optionally combined with the prior `ψ_1 = φ̂_1`.

mod multivariate;
mod univariate;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linreg::ols;
use crate::model::{ArModel, TimeSeries};
use crate::scalar::Real;

pub use multivariate::{
    fit_var_ols, restricted_ols_multivariate, restricted_ols_multivariate_from_stage1, stage2_block_regression,
    unrestricted_ols_multivariate, unrestricted_ols_multivariate_from_stage1, VarStage1Fit, VmaEstimateReport,
};
pub use univariate::{
    durbin, durbin_from_stage1, durbin_with, restricted_ols, restricted_ols_from_stage1, restricted_ols_with,
    stage2_regression, unrestricted_ols, unrestricted_ols_from_stage1,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Durbin,
    RestrictedOls,
    UnrestrictedOls,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Durbin => "durbin",
            Method::RestrictedOls => "restricted-ols",
            Method::UnrestrictedOls => "unrestricted-ols",
        }
    }
}

/// Which sequence Durbin's Yule-Walker step is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DurbinSequence {
    /// The stage-1 estimates `φ̂_1 … φ̂_l` alone, none dropped. This is the
    /// variant the restricted estimator is benchmarked against.
    #[default]
    EstimatesOnly,
    /// The AR polynomial `1, −φ̂_1, …, −φ̂_l`. Prepending the known unit term
    /// makes the sequence an exact AR(q) impulse response, so Yule-Walker is
    /// consistent for any q. For q = 1 both variants coincide asymptotically.
    WithLeadingUnit,
}

impl DurbinSequence {
    pub fn as_str(self) -> &'static str {
        match self {
            DurbinSequence::EstimatesOnly => "estimates-only",
            DurbinSequence::WithLeadingUnit => "with-leading-unit",
        }
    }
}

impl std::str::FromStr for DurbinSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "estimates-only" => Ok(DurbinSequence::EstimatesOnly),
            "with-leading-unit" => Ok(DurbinSequence::WithLeadingUnit),
            other => Err(Error::validation(format!("unknown Durbin sequence '{other}'"))),
        }
    }
}

/// Stage-2 options for the least-squares estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RestrictedConfig {
    /// Number of leading stage-1 coefficients excluded from the responses.
    /// Defaults to `q`; must be at least `q`.
    pub drop: Option<usize>,
}

impl RestrictedConfig {
    pub(crate) fn drop_count(&self, q: usize) -> Result<usize> {
        let d = self.drop.unwrap_or(q);
        if d < q {
            return Err(Error::validation(format!("drop count {d} is below the MA order {q}")));
        }
        Ok(d)
    }
}

/// A fitted long AR: coefficients with their OLS variances.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Fit<T: Real> {
    pub phi: Vec<T>,
    /// `σ̂²(φ̂_i)` for each coefficient.
    pub cov_diag: Vec<T>,
    /// Residual variance with divisor `T − 2l`.
    pub resid_var: T,
    /// Condition number of the stage-1 normal matrix (NaN when not fitted).
    pub cond: T,
}

impl<T: Real> Stage1Fit<T> {
    /// Wraps externally supplied coefficients, e.g. exact AR(∞) weights.
    pub fn from_coefficients(phi: Vec<T>, cov_diag: Vec<T>, resid_var: T) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::validation("stage-1 order must be >= 1"));
        }
        if phi.len() != cov_diag.len() {
            return Err(Error::dimension("coefficient and variance counts differ"));
        }
        if phi.iter().chain(&cov_diag).any(|v| !v.finite()) || cov_diag.iter().any(|&v| v < T::zero()) {
            return Err(Error::validation(
                "stage-1 coefficients and variances must be finite, variances >= 0",
            ));
        }
        Ok(Stage1Fit {
            phi,
            cov_diag,
            resid_var,
            cond: T::lit(f64::NAN),
        })
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn model(&self) -> Result<ArModel<T>> {
        ArModel::with_variance(self.phi.clone(), self.resid_var)
    }
}

/// Stage-2 fit quality.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage2Diagnostics<T: Real> {
    /// Residual variance of the stage-2 regression (Yule-Walker prediction
    /// error variance for Durbin).
    pub resid_var: T,
    /// Condition number of the stage-2 normal (or Toeplitz) matrix.
    pub cond: T,
    /// Observations used in stage 2.
    pub rows: usize,
}

/// A univariate MA estimate together with the stage it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport<T: Real> {
    pub method: Method,
    pub psi_hat: Vec<T>,
    /// Asymptotic standard errors; absent for Durbin.
    pub stderr: Option<Vec<T>>,
    pub stage1: Stage1Fit<T>,
    pub diagnostics: Stage2Diagnostics<T>,
}

/// Largest stage-1 order keeping at least four observations per coefficient:
/// `floor(T / 4)`, optionally capped.
pub fn suggest_ar_order(sample_size: usize, cap: Option<usize>) -> Result<usize> {
    if sample_size < 8 {
        return Err(Error::insufficient(format!("sample size {sample_size} is below 8")));
    }
    let l = sample_size / 4;
    Ok(cap.map_or(l, |c| l.min(c)))
}

/// Lagged design for a k-variate series: row `t` (for `t = l … T−1`) holds
/// `y_{t-1}, …, y_{t-l}`, each lag contributing `k` consecutive columns.
pub(crate) fn lagged_design<T: Real>(series: &TimeSeries<T>, l: usize) -> DMatrix<T> {
    let k = series.dim();
    let rows = series.len() - l;
    DMatrix::from_fn(rows, k * l, |r, col| {
        let lag = col / k + 1;
        series.row(r + l - lag)[col % k]
    })
}

fn check_stage1_sample(n: usize, l: usize, k: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::validation("stage-1 order must be >= 1"));
    }
    if n <= l || n - l <= k * l {
        return Err(Error::insufficient(format!(
            "{n} observations cannot support a stage-1 fit of order {l} in dimension {k}"
        )));
    }
    Ok(())
}

/// Conditional OLS fit of an AR(`l`) without intercept.
pub fn fit_ar_ols<T: Real>(series: &TimeSeries<T>, l: usize) -> Result<Stage1Fit<T>> {
    if series.dim() != 1 {
        return Err(Error::dimension(format!(
            "expected a univariate series, got dimension {}",
            series.dim()
        )));
    }
    check_stage1_sample(series.len(), l, 1)?;
    let x = lagged_design(series, l);
    let y = DVector::from_column_slice(&series.as_slice()[l..]);
    let fit = ols(&x, &y)?;
    Ok(Stage1Fit {
        phi: fit.beta.iter().copied().collect(),
        cov_diag: fit.cov_diag.iter().copied().collect(),
        resid_var: fit.resid_var,
        cond: fit.cond,
    })
}

/// Residual-variance floor for stage-2 weighting: `ε² · y'y / n`.
///
/// Exact (noise-free) coefficient sequences give a zero residual, which would
/// make `1/σ²` infinite.
pub(crate) fn floored_variance<T: Real>(resid_var: T, y: &DVector<T>) -> T {
    let scale = y.norm_squared() / T::from_count(y.len().max(1));
    let floor = T::default_epsilon() * T::default_epsilon() * scale;
    let floor = if floor > T::zero() {
        floor
    } else {
        T::min_value().unwrap_or_else(T::default_epsilon)
    };
    resid_var.max(floor)
}

pub(crate) fn check_stage2_orders(q: usize, l: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::validation("MA order must be >= 1"));
    }
    if l < 3 * q + 1 {
        return Err(Error::insufficient(format!(
            "stage-1 order {l} must be at least 3q + 1 = {}",
            3 * q + 1
        )));
    }
    Ok(())
}
