use nalgebra::{DMatrix, DVector};

use super::{
    check_stage2_orders, fit_ar_ols, floored_variance, DurbinSequence, EstimateReport, Method, RestrictedConfig,
    Stage1Fit, Stage2Diagnostics,
};
use crate::error::{Error, Result};
use crate::linreg::{autocovariances, ols, symmetric_cond, theil_f_class, yule_walker};
use crate::model::TimeSeries;
use crate::scalar::Real;

/// Stage-2 regression on a coefficient sequence: for `j = drop+1 … l`
/// (1-based) the response is `φ_j` and the regressors are
/// `φ_{j-1}, …, φ_{j-q}`. The coefficient vector is `−ψ`.
pub fn stage2_regression<T: Real>(phi: &[T], q: usize, drop: usize) -> Result<(DMatrix<T>, DVector<T>)> {
    if q == 0 {
        return Err(Error::validation("MA order must be >= 1"));
    }
    if drop < q {
        return Err(Error::validation(format!(
            "drop count {drop} is below the MA order {q}"
        )));
    }
    let l = phi.len();
    if l <= drop || l - drop <= q {
        return Err(Error::insufficient(format!(
            "{} stage-2 rows for {q} coefficients",
            l.saturating_sub(drop)
        )));
    }
    let rows = l - drop;
    // row r is j = drop + 1 + r, i.e. 0-based index drop + r
    let x = DMatrix::from_fn(rows, q, |r, c| phi[drop + r - 1 - c]);
    let y = DVector::from_column_slice(&phi[drop..]);
    Ok((x, y))
}

fn check_univariate_orders(q: usize, l: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::validation("MA order must be >= 1"));
    }
    if l <= 2 * q {
        return Err(Error::insufficient(format!(
            "stage-1 order {l} must exceed 2q = {}",
            2 * q
        )));
    }
    Ok(())
}

/// Durbin's estimator with the default sequence.
pub fn durbin<T: Real>(series: &TimeSeries<T>, q: usize, l: usize) -> Result<EstimateReport<T>> {
    durbin_with(series, q, l, DurbinSequence::default())
}

pub fn durbin_with<T: Real>(
    series: &TimeSeries<T>,
    q: usize,
    l: usize,
    sequence: DurbinSequence,
) -> Result<EstimateReport<T>> {
    check_univariate_orders(q, l)?;
    let stage1 = fit_ar_ols(series, l)?;
    durbin_from_stage1(stage1, q, sequence)
}

/// Durbin's second stage: Yule-Walker of order `q` on the stage-1
/// coefficients, `ψ̂ = −a`.
pub fn durbin_from_stage1<T: Real>(
    stage1: Stage1Fit<T>,
    q: usize,
    sequence: DurbinSequence,
) -> Result<EstimateReport<T>> {
    check_univariate_orders(q, stage1.order())?;
    let seq: Vec<T> = match sequence {
        DurbinSequence::EstimatesOnly => stage1.phi.clone(),
        DurbinSequence::WithLeadingUnit => std::iter::once(T::one())
            .chain(stage1.phi.iter().map(|&p| -p))
            .collect(),
    };
    let a = yule_walker(&seq, q)?;
    let c = autocovariances(&seq, q);
    let resid_var = a.iter().zip(&c[1..]).fold(c[0], |acc, (&ai, &ci)| acc - ai * ci);
    let toeplitz = DMatrix::from_fn(q, q, |i, j| c[i.abs_diff(j)]);
    Ok(EstimateReport {
        method: Method::Durbin,
        psi_hat: a.into_iter().map(|v| -v).collect(),
        stderr: None,
        stage1,
        diagnostics: Stage2Diagnostics {
            resid_var,
            cond: symmetric_cond(&toeplitz),
            rows: seq.len(),
        },
    })
}

pub fn restricted_ols<T: Real>(series: &TimeSeries<T>, q: usize, l: usize) -> Result<EstimateReport<T>> {
    restricted_ols_with(series, q, l, &RestrictedConfig::default())
}

pub fn restricted_ols_with<T: Real>(
    series: &TimeSeries<T>,
    q: usize,
    l: usize,
    config: &RestrictedConfig,
) -> Result<EstimateReport<T>> {
    check_stage2_orders(q, l)?;
    let stage1 = fit_ar_ols(series, l)?;
    restricted_ols_from_stage1(stage1, q, config)
}

/// Least squares on the coefficient recursion combined with the prior
/// `ψ_1 = φ̂_1`, weighted by the stage-1 variance of `φ̂_1`.
///
/// The stage-2 disturbance variance comes from an unrestricted pre-pass
/// over the same rows.
pub fn restricted_ols_from_stage1<T: Real>(
    stage1: Stage1Fit<T>,
    q: usize,
    config: &RestrictedConfig,
) -> Result<EstimateReport<T>> {
    check_stage2_orders(q, stage1.order())?;
    let drop = config.drop_count(q)?;
    let (x, y) = stage2_regression(&stage1.phi, q, drop)?;
    let pre = ols(&x, &y)?;
    let sigma2 = floored_variance(pre.resid_var, &y);
    let mut r = DMatrix::zeros(1, q);
    r[(0, 0)] = T::one();
    let r_vec = DVector::from_element(1, -stage1.phi[0]);
    let prior_var = DVector::from_element(1, stage1.cov_diag[0]);
    let fit = theil_f_class(&x, &y, &r, &r_vec, &prior_var, sigma2)?;
    Ok(EstimateReport {
        method: Method::RestrictedOls,
        psi_hat: fit.beta.iter().map(|&b| -b).collect(),
        stderr: Some(fit.var_diag.iter().map(|&v| v.sqrt()).collect()),
        stage1,
        diagnostics: Stage2Diagnostics {
            resid_var: pre.resid_var,
            cond: pre.cond,
            rows: y.len(),
        },
    })
}

pub fn unrestricted_ols<T: Real>(
    series: &TimeSeries<T>,
    q: usize,
    l: usize,
    config: &RestrictedConfig,
) -> Result<EstimateReport<T>> {
    check_stage2_orders(q, l)?;
    let stage1 = fit_ar_ols(series, l)?;
    unrestricted_ols_from_stage1(stage1, q, config)
}

/// Stage-2 least squares without the `ψ_1` prior.
pub fn unrestricted_ols_from_stage1<T: Real>(
    stage1: Stage1Fit<T>,
    q: usize,
    config: &RestrictedConfig,
) -> Result<EstimateReport<T>> {
    check_stage2_orders(q, stage1.order())?;
    let drop = config.drop_count(q)?;
    let (x, y) = stage2_regression(&stage1.phi, q, drop)?;
    let fit = ols(&x, &y)?;
    Ok(EstimateReport {
        method: Method::UnrestrictedOls,
        psi_hat: fit.beta.iter().map(|&b| -b).collect(),
        stderr: Some(fit.cov_diag.iter().map(|&v| v.sqrt()).collect()),
        stage1,
        diagnostics: Stage2Diagnostics {
            resid_var: fit.resid_var,
            cond: fit.cond,
            rows: y.len(),
        },
    })
}
