//! Regression primitives: least squares, Yule-Walker, and Theil's mixed
//! (f-class) estimator with stochastic linear restrictions.
//!
//! Everything here is sign-neutral and knows nothing about MA models; the
//! estimators own the sign bookkeeping.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit<T: Real> {
    pub beta: DVector<T>,
    /// Residual sum of squares over `n − m`.
    pub resid_var: T,
    /// Diagonal of `resid_var · (X'X)⁻¹`.
    pub cov_diag: DVector<T>,
    /// Condition number of `X'X`.
    pub cond: T,
}

/// False for NaN as well as for non-positive values.
fn positive<T: Real>(v: T) -> bool {
    v > T::zero()
}

/// Condition number of `R'R` from the singular values of `R`; `+∞` if singular.
fn normal_matrix_cond<T: Real>(r: &DMatrix<T>) -> T {
    let sv = r.clone().singular_values();
    let smax = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let smin = sv.iter().copied().fold(smax, |a, b| a.min(b));
    if smin <= T::zero() {
        return T::lit(f64::INFINITY);
    }
    let ratio = smax / smin;
    ratio * ratio
}

pub(crate) fn symmetric_cond<T: Real>(a: &DMatrix<T>) -> T {
    let sv = a.clone().singular_values();
    let smax = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let smin = sv.iter().copied().fold(smax, |a, b| a.min(b));
    if smin <= T::zero() {
        T::lit(f64::INFINITY)
    } else {
        smax / smin
    }
}

/// Least squares `min ‖y − Xβ‖²` through a Householder QR of `X`.
///
/// The normal matrix is never formed. A design whose `X'X` has condition
/// number above [`Real::singular_cond_limit`] is rejected.
pub fn ols<T: Real>(x: &DMatrix<T>, y: &DVector<T>) -> Result<OlsFit<T>> {
    let (n, m) = x.shape();
    if m == 0 {
        return Err(Error::validation("design matrix has no columns"));
    }
    if y.len() != n {
        return Err(Error::dimension(format!(
            "design has {n} rows but response has {}",
            y.len()
        )));
    }
    if n <= m {
        return Err(Error::insufficient(format!("{n} rows for {m} coefficients")));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let cond = normal_matrix_cond(&r);
    if !cond.finite() || cond > T::singular_cond_limit() {
        return Err(Error::Singular { cond: cond.as_f64() });
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let beta = r
        .solve_upper_triangular(&qty.rows(0, m).into_owned())
        .ok_or(Error::Singular { cond: cond.as_f64() })?;
    let resid = y - x * &beta;
    let resid_var = resid.norm_squared() / T::from_count(n - m);
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(m, m))
        .ok_or(Error::Singular { cond: cond.as_f64() })?;
    let cov_diag = DVector::from_iterator(m, r_inv.row_iter().map(|row| row.norm_squared() * resid_var));
    Ok(OlsFit {
        beta,
        resid_var,
        cov_diag,
        cond,
    })
}

/// Biased sample autocovariances `ĉ_h = (1/N) Σ_t x_t x_{t+h}`, `h = 0 … max_lag`,
/// with no mean removed.
pub fn autocovariances<T: Real>(series: &[T], max_lag: usize) -> Vec<T> {
    let n = series.len();
    let denom = T::from_count(n);
    (0..=max_lag)
        .map(|h| {
            let mut acc = T::zero();
            for t in 0..n.saturating_sub(h) {
                acc += series[t] * series[t + h];
            }
            acc / denom
        })
        .collect()
}

fn levinson_durbin<T: Real>(c: &[T], order: usize) -> Option<Vec<T>> {
    let mut a: Vec<T> = Vec::with_capacity(order);
    let mut err = c[0];
    for m in 1..=order {
        if !positive(err) {
            return None;
        }
        let mut num = c[m];
        for (i, &ai) in a.iter().enumerate() {
            num -= ai * c[m - 1 - i];
        }
        let k = num / err;
        let prev = a.clone();
        for i in 0..a.len() {
            a[i] = prev[i] - k * prev[m - 2 - i];
        }
        a.push(k);
        err *= T::one() - k * k;
        if !k.finite() {
            return None;
        }
    }
    if err > T::zero() {
        Some(a)
    } else {
        None
    }
}

/// Yule-Walker AR(`order`) coefficients: `a` with `x_t ≈ Σ a_i x_{t-i}`.
///
/// Solves the Toeplitz system of biased autocovariances by Levinson-Durbin,
/// falling back to a dense solve if the prediction-error variance stops
/// being positive.
pub fn yule_walker<T: Real>(series: &[T], order: usize) -> Result<Vec<T>> {
    if order == 0 {
        return Err(Error::validation("Yule-Walker order must be >= 1"));
    }
    if series.len() <= order {
        return Err(Error::insufficient(format!(
            "series of length {} for Yule-Walker order {order}",
            series.len()
        )));
    }
    let c = autocovariances(series, order);
    if !positive(c[0]) {
        return Err(Error::Singular { cond: f64::INFINITY });
    }
    if let Some(a) = levinson_durbin(&c, order) {
        return Ok(a);
    }
    let toeplitz = DMatrix::from_fn(order, order, |i, j| c[i.abs_diff(j)]);
    let cond = symmetric_cond(&toeplitz);
    if !cond.finite() || cond > T::singular_cond_limit() {
        return Err(Error::Singular { cond: cond.as_f64() });
    }
    let rhs = DVector::from_column_slice(&c[1..]);
    toeplitz
        .lu()
        .solve(&rhs)
        .map(|a| a.iter().copied().collect())
        .ok_or(Error::Singular { cond: cond.as_f64() })
}

/// Output of [`theil_f_class`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixedFit<T: Real> {
    pub beta: DVector<T>,
    /// Diagonal of `((1/σ²) X'X + R'V⁻¹R)⁻¹`.
    pub var_diag: DVector<T>,
}

/// Theil's f-class estimator for `y = Xβ + u` combined with the stochastic
/// prior `Rβ = r + e`, `e ~ (0, diag(prior_var))`:
///
/// `β = ((1/σ²) X'X + R'V⁻¹R)⁻¹ ((1/σ²) X'y + R'V⁻¹ r)`.
///
/// An infinite prior variance switches the corresponding restriction off.
pub fn theil_f_class<T: Real>(
    x: &DMatrix<T>,
    y: &DVector<T>,
    r: &DMatrix<T>,
    r_vec: &DVector<T>,
    prior_var: &DVector<T>,
    sigma2: T,
) -> Result<MixedFit<T>> {
    let (n, m) = x.shape();
    if y.len() != n {
        return Err(Error::dimension(format!(
            "design has {n} rows but response has {}",
            y.len()
        )));
    }
    if r.ncols() != m || r.nrows() != r_vec.len() || r.nrows() != prior_var.len() {
        return Err(Error::dimension(format!(
            "restriction is {}x{} with {} prior values and {} variances for {m} coefficients",
            r.nrows(),
            r.ncols(),
            r_vec.len(),
            prior_var.len()
        )));
    }
    if !positive(sigma2) || !sigma2.finite() {
        return Err(Error::validation(format!(
            "residual variance must be finite and > 0, got {sigma2}"
        )));
    }
    if prior_var.iter().any(|&v| !positive(v)) {
        return Err(Error::validation("prior variances must be > 0"));
    }
    let weights = prior_var.map(|v| T::one() / v);
    let inv_s2 = T::one() / sigma2;
    let weighted_r = DMatrix::from_fn(r.nrows(), m, |i, j| r[(i, j)] * weights[i]);
    let a = x.tr_mul(x) * inv_s2 + r.tr_mul(&weighted_r);
    let b = x.tr_mul(y) * inv_s2 + r.tr_mul(&r_vec.component_mul(&weights));
    let chol = a.clone().cholesky().ok_or_else(|| Error::Singular {
        cond: symmetric_cond(&a).as_f64(),
    })?;
    let beta = chol.solve(&b);
    let var_diag = chol.inverse().diagonal();
    Ok(MixedFit { beta, var_diag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ArModel;
    use crate::simulate::{simulate_ar, standard_normals};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn random_design(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
        DMatrix::from_column_slice(n, m, &standard_normals(n * m, seed))
    }

    #[test]
    fn constant_column() {
        let fit = ols(&DMatrix::from_element(3, 1, 1.0f64), &DVector::from_element(3, 2.0)).unwrap();
        assert_abs_diff_eq!(fit.beta[0], 2.0, epsilon = 1e-14);
        assert!(fit.resid_var.abs() < 1e-28);
        assert!(fit.cond >= 1.0);
    }

    #[test]
    fn noiseless_recovery() {
        let x = random_design(50, 4, 1);
        let b = DVector::from_column_slice(&[1.5, -2.0, 0.25, 3.0]);
        let fit = ols(&x, &(&x * &b)).unwrap();
        assert!((&fit.beta - &b).amax() < 1e-12);
        assert!(fit.resid_var <= 1e-20);
    }

    #[test]
    fn agrees_with_normal_equations() {
        let x = random_design(200, 5, 2);
        let y = DVector::from_column_slice(&standard_normals(200, 3));
        let fit = ols(&x, &y).unwrap();
        // independent route: solve X'X b = X'y directly
        let xtx = x.transpose() * &x;
        let oracle = xtx.clone().try_inverse().unwrap() * x.transpose() * &y;
        assert!((&fit.beta - &oracle).amax() < 1e-8);
        let resid = &y - &x * &oracle;
        let s2 = resid.norm_squared() / 195.0;
        let inv = xtx.try_inverse().unwrap();
        for i in 0..5 {
            assert_abs_diff_eq!(fit.cov_diag[i], s2 * inv[(i, i)], epsilon = 1e-10);
        }
        assert_abs_diff_eq!(fit.resid_var, s2, epsilon = 1e-10);
    }

    #[test]
    fn rank_deficient_rejected() {
        let mut x = random_design(30, 3, 4);
        let c0 = x.column(0).into_owned();
        x.set_column(2, &(c0 * 2.0));
        let err = ols(&x, &DVector::from_element(30, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Singular { cond } if cond > 1e12));
    }

    #[test]
    fn too_few_rows_rejected() {
        assert!(matches!(
            ols(&random_design(3, 3, 5), &DVector::from_element(3, 1.0)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn yule_walker_geometric_sequence() {
        let n = 2000;
        let x: Vec<f64> = (0..=n).map(|t| 0.9f64.powi(t)).collect();
        let a = yule_walker(&x, 1).unwrap();
        assert!((a[0] - 0.9).abs() < 1.0 / n as f64);
    }

    #[test]
    fn yule_walker_zero_series_fails() {
        assert!(matches!(yule_walker(&[0.0; 10], 2), Err(Error::Singular { .. })));
        assert!(yule_walker(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn yule_walker_consistency_on_simulated_ar() {
        let y = simulate_ar(&ArModel::new(vec![0.5f64]).unwrap(), 100_000, 42).unwrap();
        let a = yule_walker(y.as_slice(), 1).unwrap();
        assert!((a[0] - 0.5).abs() < 0.01, "{a:?}");
    }

    #[test]
    fn yule_walker_error_shrinks_with_length() {
        // impulse response of x_t = 0.6 x_{t-1} − 0.3 x_{t-2}
        let response = |n: usize| {
            let mut x: Vec<f64> = vec![1.0, 0.6];
            while x.len() < n {
                let t = x.len();
                x.push(0.6 * x[t - 1] - 0.3 * x[t - 2]);
            }
            x
        };
        let err = |n: usize| {
            let a = yule_walker(&response(n), 2).unwrap();
            (a[0] - 0.6).abs() + (a[1] + 0.3).abs()
        };
        let (short, long) = (err(5), err(40));
        assert!(long < short, "{short} {long}");
        assert!(long < 1e-10);
    }

    #[test]
    fn yule_walker_matches_dense_toeplitz_solve() {
        let x = standard_normals(500, 6);
        let a = yule_walker(&x, 4).unwrap();
        let c = autocovariances(&x, 4);
        let t = DMatrix::from_fn(4, 4, |i, j| c[i.abs_diff(j)]);
        let dense = t.try_inverse().unwrap() * DVector::from_column_slice(&c[1..]);
        for i in 0..4 {
            assert_abs_diff_eq!(a[i], dense[i], epsilon = 1e-12);
        }
    }

    fn mixed_setup() -> (DMatrix<f64>, DVector<f64>) {
        let x = random_design(80, 3, 10);
        let b = DVector::from_column_slice(&[0.4, -0.7, 1.1]);
        let noise = DVector::from_column_slice(&standard_normals(80, 11)) * 0.3;
        let y = &x * &b + noise;
        (x, y)
    }

    fn first_row(m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(1, m, |_, j| if j == 0 { 1.0 } else { 0.0 })
    }

    #[test]
    fn uninformative_prior_is_ols() {
        let (x, y) = mixed_setup();
        let o = ols(&x, &y).unwrap();
        let fit = theil_f_class(
            &x,
            &y,
            &first_row(3),
            &DVector::from_element(1, 5.0),
            &DVector::from_element(1, 1e30),
            0.09,
        )
        .unwrap();
        assert!((&fit.beta - &o.beta).amax() < 1e-6);
        let fit = theil_f_class(
            &x,
            &y,
            &first_row(3),
            &DVector::from_element(1, 5.0),
            &DVector::from_element(1, f64::INFINITY),
            0.09,
        )
        .unwrap();
        assert!((&fit.beta - &o.beta).amax() < 1e-12);
    }

    #[test]
    fn dogmatic_prior_is_hard_restriction() {
        let (x, y) = mixed_setup();
        let fit = theil_f_class(
            &x,
            &y,
            &first_row(3),
            &DVector::from_element(1, 5.0),
            &DVector::from_element(1, 1e-30),
            0.09,
        )
        .unwrap();
        assert_abs_diff_eq!(fit.beta[0], 5.0, epsilon = 1e-6);
        assert!(fit.var_diag[0] < 1e-20);
    }

    #[test]
    fn agreeing_sources_recover_truth() {
        let x = random_design(40, 3, 12);
        let b = DVector::from_column_slice(&[0.2, 0.9, -0.5]);
        let y = &x * &b;
        let r = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        let rv = &r * &b;
        for pv in [1e-8, 1.0, 1e8] {
            let fit = theil_f_class(&x, &y, &r, &rv, &DVector::from_element(2, pv), 0.5).unwrap();
            assert!((&fit.beta - &b).amax() < 1e-10, "{pv}");
        }
    }

    #[test]
    fn mixed_input_validation() {
        let (x, y) = mixed_setup();
        let r = first_row(3);
        let v = DVector::from_element(1, 1.0);
        assert!(theil_f_class(&x, &y, &r, &v, &DVector::from_element(1, 0.0), 1.0).is_err());
        assert!(theil_f_class(&x, &y, &r, &v, &v, 0.0).is_err());
        assert!(matches!(
            theil_f_class(&x, &y, &first_row(2), &v, &v, 1.0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn prior_sweep_is_monotone() {
        let (x, y) = mixed_setup();
        let o = ols(&x, &y).unwrap();
        let target = o.beta[0] + 3.0;
        let mut last = o.beta[0];
        for e in (-12..=12).rev() {
            let fit = theil_f_class(
                &x,
                &y,
                &first_row(3),
                &DVector::from_element(1, target),
                &DVector::from_element(1, 10f64.powi(e)),
                0.09,
            )
            .unwrap();
            assert!(fit.beta[0] >= last - 1e-12, "not monotone at 1e{e}");
            assert!(fit.beta[0] <= target + 1e-12);
            last = fit.beta[0];
        }
        assert_abs_diff_eq!(last, target, epsilon = 1e-6);
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_to_design(seed in 0u64..500, m in 1usize..6) {
            let x = random_design(60, m, seed);
            let y = DVector::from_column_slice(&standard_normals(60, seed + 1000));
            let fit = ols(&x, &y).unwrap();
            let resid = &y - &x * &fit.beta;
            let xty = x.transpose() * &y;
            prop_assert!((x.transpose() * resid).norm() <= 1e-8 * xty.norm().max(1.0));
            prop_assert!(fit.cov_diag.iter().all(|&v| v >= 0.0));
        }
    }
}
