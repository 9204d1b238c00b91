use nalgebra::{DMatrix, DVector};

use super::{check_stage2_orders, floored_variance, lagged_design, Method, RestrictedConfig, Stage2Diagnostics};
use crate::error::{Error, Result};
use crate::linreg::{ols, theil_f_class};
use crate::model::{TimeSeries, VarModel};
use crate::scalar::Real;

/// A fitted long VAR, one OLS regression per equation.
#[derive(Debug, Clone, PartialEq)]
pub struct VarStage1Fit<T: Real> {
    pub phi: Vec<DMatrix<T>>,
    /// Sampling variance of each entry of each `Φ̂_i`.
    pub cov: Vec<DMatrix<T>>,
    /// Residual variance of each equation.
    pub resid_var: Vec<T>,
    /// Condition number of the shared stage-1 normal matrix (NaN when not fitted).
    pub cond: T,
}

impl<T: Real> VarStage1Fit<T> {
    /// Wraps externally supplied coefficient matrices.
    pub fn from_coefficients(phi: Vec<DMatrix<T>>, cov: Vec<DMatrix<T>>, resid_var: Vec<T>) -> Result<Self> {
        let k = phi
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::validation("stage-1 order must be >= 1"))?;
        if k == 0 || phi.iter().chain(&cov).any(|m| m.shape() != (k, k)) || phi.len() != cov.len() {
            return Err(Error::dimension(
                "coefficient and variance matrices must all be k x k, one per lag",
            ));
        }
        if resid_var.len() != k {
            return Err(Error::dimension(format!(
                "{} residual variances for dimension {k}",
                resid_var.len()
            )));
        }
        if cov.iter().flat_map(|m| m.iter()).any(|&v| !v.finite() || v < T::zero())
            || phi.iter().flat_map(|m| m.iter()).any(|v| !v.finite())
        {
            return Err(Error::validation(
                "stage-1 coefficients and variances must be finite, variances >= 0",
            ));
        }
        Ok(VarStage1Fit {
            phi,
            cov,
            resid_var,
            cond: T::lit(f64::NAN),
        })
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn dim(&self) -> usize {
        self.phi[0].nrows()
    }

    /// The fitted VAR with a diagonal innovation covariance of residual variances.
    pub fn model(&self) -> Result<VarModel<T>> {
        let sigma = DMatrix::from_diagonal(&DVector::from_column_slice(&self.resid_var));
        VarModel::with_covariance(self.phi.clone(), sigma)
    }
}

/// A vector MA estimate: `Ψ̂_1 … Ψ̂_q` with entrywise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct VmaEstimateReport<T: Real> {
    pub method: Method,
    pub psi_hat: Vec<DMatrix<T>>,
    pub stderr: Option<Vec<DMatrix<T>>>,
    pub stage1: VarStage1Fit<T>,
    /// One entry per column of `Ψ`, each estimated by its own regression.
    pub diagnostics: Vec<Stage2Diagnostics<T>>,
}

/// Conditional OLS fit of a VAR(`l`) without intercept. For `k = 1` this is
/// exactly [`super::fit_ar_ols`].
pub fn fit_var_ols<T: Real>(series: &TimeSeries<T>, l: usize) -> Result<VarStage1Fit<T>> {
    let k = series.dim();
    super::check_stage1_sample(series.len(), l, k)?;
    let x = lagged_design(series, l);
    let mut phi = vec![DMatrix::zeros(k, k); l];
    let mut cov = vec![DMatrix::zeros(k, k); l];
    let mut resid_var = Vec::with_capacity(k);
    let mut cond = T::zero();
    for eq in 0..k {
        let y = DVector::from_iterator(series.len() - l, (l..series.len()).map(|t| series.row(t)[eq]));
        let fit = ols(&x, &y)?;
        for col in 0..k * l {
            phi[col / k][(eq, col % k)] = fit.beta[col];
            cov[col / k][(eq, col % k)] = fit.cov_diag[col];
        }
        resid_var.push(fit.resid_var);
        cond = fit.cond;
    }
    Ok(VarStage1Fit {
        phi,
        cov,
        resid_var,
        cond,
    })
}

/// Stacked stage-2 regression for column `j` of `Ψ`. For each
/// `m = l, l−1, …, drop+1` and each row `r`, the response is `Φ_m[r, j]`
/// and the regressors are `Φ_{m-1}[r, ·], …, Φ_{m-q}[r, ·]`. The coefficient
/// vector is `−(Ψ_1[·, j]; …; Ψ_q[·, j])`.
pub fn stage2_block_regression<T: Real>(
    phi: &[DMatrix<T>],
    q: usize,
    drop: usize,
    j: usize,
) -> Result<(DMatrix<T>, DVector<T>)> {
    let l = phi.len();
    let k = phi.first().map_or(0, |m| m.nrows());
    if q == 0 || drop < q {
        return Err(Error::validation(format!("invalid MA order {q} / drop count {drop}")));
    }
    if j >= k {
        return Err(Error::dimension(format!("column {j} out of range for dimension {k}")));
    }
    if l <= drop || k * (l - drop) <= k * q {
        return Err(Error::insufficient(format!(
            "{} stage-2 blocks for {q} coefficient blocks",
            l.saturating_sub(drop)
        )));
    }
    let blocks = l - drop;
    let mut x = DMatrix::zeros(blocks * k, k * q);
    let mut y = DVector::zeros(blocks * k);
    for b in 0..blocks {
        let m = l - b; // 1-based
        for r in 0..k {
            let row = b * k + r;
            y[row] = phi[m - 1][(r, j)];
            for i in 1..=q {
                for c in 0..k {
                    x[(row, (i - 1) * k + c)] = phi[m - 1 - i][(r, c)];
                }
            }
        }
    }
    Ok((x, y))
}

fn unstack<T: Real>(columns: &[DVector<T>], k: usize, q: usize, sign: T) -> Vec<DMatrix<T>> {
    (0..q)
        .map(|i| DMatrix::from_fn(k, k, |r, j| sign * columns[j][i * k + r]))
        .collect()
}

pub fn restricted_ols_multivariate<T: Real>(
    series: &TimeSeries<T>,
    q: usize,
    l: usize,
    config: &RestrictedConfig,
) -> Result<VmaEstimateReport<T>> {
    check_stage2_orders(q, l)?;
    let stage1 = fit_var_ols(series, l)?;
    restricted_ols_multivariate_from_stage1(stage1, q, config)
}

/// Column-by-column restricted least squares: column `j` of `Ψ_1` is tied to
/// column `j` of `Φ̂_1` with the stage-1 variances of those entries.
pub fn restricted_ols_multivariate_from_stage1<T: Real>(
    stage1: VarStage1Fit<T>,
    q: usize,
    config: &RestrictedConfig,
) -> Result<VmaEstimateReport<T>> {
    check_stage2_orders(q, stage1.order())?;
    let drop = config.drop_count(q)?;
    let k = stage1.dim();
    let mut r = DMatrix::zeros(k, k * q);
    r.view_mut((0, 0), (k, k)).fill_with_identity();
    let mut betas = Vec::with_capacity(k);
    let mut vars = Vec::with_capacity(k);
    let mut diagnostics = Vec::with_capacity(k);
    for j in 0..k {
        let (x, y) = stage2_block_regression(&stage1.phi, q, drop, j)?;
        let pre = ols(&x, &y)?;
        let sigma2 = floored_variance(pre.resid_var, &y);
        let r_vec = -stage1.phi[0].column(j).into_owned();
        let prior_var = stage1.cov[0].column(j).into_owned();
        let fit = theil_f_class(&x, &y, &r, &r_vec, &prior_var, sigma2)?;
        diagnostics.push(Stage2Diagnostics {
            resid_var: pre.resid_var,
            cond: pre.cond,
            rows: y.len(),
        });
        betas.push(fit.beta);
        vars.push(fit.var_diag.map(|v| v.sqrt()));
    }
    Ok(VmaEstimateReport {
        method: Method::RestrictedOls,
        psi_hat: unstack(&betas, k, q, -T::one()),
        stderr: Some(unstack(&vars, k, q, T::one())),
        stage1,
        diagnostics,
    })
}

pub fn unrestricted_ols_multivariate<T: Real>(
    series: &TimeSeries<T>,
    q: usize,
    l: usize,
    config: &RestrictedConfig,
) -> Result<VmaEstimateReport<T>> {
    check_stage2_orders(q, l)?;
    let stage1 = fit_var_ols(series, l)?;
    unrestricted_ols_multivariate_from_stage1(stage1, q, config)
}

pub fn unrestricted_ols_multivariate_from_stage1<T: Real>(
    stage1: VarStage1Fit<T>,
    q: usize,
    config: &RestrictedConfig,
) -> Result<VmaEstimateReport<T>> {
    check_stage2_orders(q, stage1.order())?;
    let drop = config.drop_count(q)?;
    let k = stage1.dim();
    let mut betas = Vec::with_capacity(k);
    let mut vars = Vec::with_capacity(k);
    let mut diagnostics = Vec::with_capacity(k);
    for j in 0..k {
        let (x, y) = stage2_block_regression(&stage1.phi, q, drop, j)?;
        let fit = ols(&x, &y)?;
        diagnostics.push(Stage2Diagnostics {
            resid_var: fit.resid_var,
            cond: fit.cond,
            rows: y.len(),
        });
        betas.push(fit.beta);
        vars.push(fit.cov_diag.map(|v| v.sqrt()));
    }
    Ok(VmaEstimateReport {
        method: Method::UnrestrictedOls,
        psi_hat: unstack(&betas, k, q, -T::one()),
        stderr: Some(unstack(&vars, k, q, T::one())),
        stage1,
        diagnostics,
    })
}
