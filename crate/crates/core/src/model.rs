//! Process models and observation containers.
//!
//! Sign conventions are fixed crate-wide:
//!
//! * AR: `y_t = Σ φ_i y_{t-i} + ε_t`
//! * MA: `y_t = ε_t + Σ ψ_j ε_{t-j}`, with `ψ_0 = 1` implicit and never stored.
//!
//! Every recursion and estimator reports its output in these conventions.
//! Constructors validate and reject non-finite input; nothing is repaired.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_finite<T: Real>(what: &str, values: &[T]) -> Result<()> {
    match values.iter().position(|v| !v.finite()) {
        Some(i) => Err(Error::validation(format!("{what}[{}] is not finite", i + 1))),
        None => Ok(()),
    }
}

fn check_variance<T: Real>(sigma2: T) -> Result<()> {
    if !sigma2.finite() || sigma2 <= T::zero() {
        return Err(Error::validation(format!(
            "innovation variance must be finite and > 0, got {sigma2}"
        )));
    }
    Ok(())
}

/// Observations `y_1 … y_T`, univariate (`dim == 1`) or k-variate.
///
/// Stored row-major: observation `t` occupies `values[t*dim .. (t+1)*dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    values: Vec<T>,
    dim: usize,
}

impl<T: Real> TimeSeries<T> {
    pub fn univariate(values: Vec<T>) -> Result<Self> {
        Self::from_flat(values, 1)
    }

    /// Builds a k-variate series from one row per time step.
    pub fn multivariate(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::dimension("rows of a multivariate series differ in length"));
        }
        Self::from_flat(rows.concat(), dim)
    }

    pub fn from_flat(values: Vec<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("series dimension must be >= 1"));
        }
        if values.is_empty() {
            return Err(Error::validation("series must contain at least one observation"));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::dimension(format!(
                "{} values do not divide into rows of {dim}",
                values.len()
            )));
        }
        check_finite("series", &values)?;
        Ok(TimeSeries { values, dim })
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Observation at time step `t` (0-based).
    pub fn row(&self, t: usize) -> &[T] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks(self.dim)
    }

    /// All observations of one channel.
    pub fn channel(&self, j: usize) -> Vec<T> {
        self.rows().map(|r| r[j]).collect()
    }

    /// The raw values; for univariate series this is the observation vector.
    pub fn as_slice(&self) -> &[T] {
        &self.values
    }
}

/// MA(q) model `y_t = ε_t + Σ_{j=1}^q ψ_j ε_{t-j}`, `ε ~ N(0, sigma2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaModel<T> {
    psi: Vec<T>,
    sigma2: T,
}

impl<T: Real> MaModel<T> {
    /// Unit innovation variance.
    pub fn new(psi: Vec<T>) -> Result<Self> {
        Self::with_variance(psi, T::one())
    }

    pub fn with_variance(psi: Vec<T>, sigma2: T) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::validation("MA order must be >= 1"));
        }
        check_finite("psi", &psi)?;
        check_variance(sigma2)?;
        Ok(MaModel { psi, sigma2 })
    }

    pub fn psi(&self) -> &[T] {
        &self.psi
    }

    pub fn order(&self) -> usize {
        self.psi.len()
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }
}

/// AR(p) model `y_t = Σ_{i=1}^p φ_i y_{t-i} + ε_t`, `ε ~ N(0, sigma2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel<T> {
    phi: Vec<T>,
    sigma2: T,
}

impl<T: Real> ArModel<T> {
    pub fn new(phi: Vec<T>) -> Result<Self> {
        Self::with_variance(phi, T::one())
    }

    pub fn with_variance(phi: Vec<T>, sigma2: T) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::validation("AR order must be >= 1"));
        }
        check_finite("phi", &phi)?;
        check_variance(sigma2)?;
        Ok(ArModel { phi, sigma2 })
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }
}

/// Companion matrix `F` of an AR(p): the φ row on top, a shifted identity below.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionMatrix<T: Real> {
    matrix: DMatrix<T>,
}

impl<T: Real> CompanionMatrix<T> {
    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// Reads the φ row back; inverse of [`companion_from_ar`].
    pub fn to_ar(&self) -> Result<ArModel<T>> {
        ArModel::new(self.matrix.row(0).iter().copied().collect())
    }
}

pub fn companion_from_ar<T: Real>(model: &ArModel<T>) -> CompanionMatrix<T> {
    let p = model.order();
    let mut matrix = DMatrix::zeros(p, p);
    for (i, &phi) in model.phi().iter().enumerate() {
        matrix[(0, i)] = phi;
    }
    for i in 1..p {
        matrix[(i, i - 1)] = T::one();
    }
    CompanionMatrix { matrix }
}

fn check_square_sequence<T: Real>(what: &str, mats: &[DMatrix<T>]) -> Result<usize> {
    let k = match mats.first() {
        Some(m) => m.nrows(),
        None => {
            return Err(Error::validation(format!(
                "{what}: at least one coefficient matrix required"
            )))
        }
    };
    if k == 0 {
        return Err(Error::validation(format!("{what}: dimension must be >= 1")));
    }
    for (j, m) in mats.iter().enumerate() {
        if m.nrows() != k || m.ncols() != k {
            return Err(Error::dimension(format!(
                "{what}[{}] is {}x{}, expected {k}x{k}",
                j + 1,
                m.nrows(),
                m.ncols()
            )));
        }
        check_finite(what, m.as_slice())?;
    }
    Ok(k)
}

fn check_covariance<T: Real>(sigma: &DMatrix<T>, k: usize) -> Result<()> {
    if sigma.nrows() != k || sigma.ncols() != k {
        return Err(Error::dimension(format!("innovation covariance must be {k}x{k}")));
    }
    check_finite("Sigma", sigma.as_slice())?;
    let tol = T::lit(1e-12);
    for i in 0..k {
        for j in 0..i {
            if (sigma[(i, j)] - sigma[(j, i)]).abs() > tol {
                return Err(Error::validation("innovation covariance is not symmetric"));
            }
        }
    }
    if sigma.clone().cholesky().is_none() {
        return Err(Error::validation("innovation covariance is not positive definite"));
    }
    Ok(())
}

/// k-variate MA(q): `y_t = ε_t + Σ Ψ_j ε_{t-j}`, `ε ~ N(0, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VmaModel<T: Real> {
    psi: Vec<DMatrix<T>>,
    sigma: DMatrix<T>,
}

impl<T: Real> VmaModel<T> {
    /// Identity innovation covariance.
    pub fn new(psi: Vec<DMatrix<T>>) -> Result<Self> {
        let k = check_square_sequence("Psi", &psi)?;
        Self::with_covariance(psi, DMatrix::identity(k, k))
    }

    pub fn with_covariance(psi: Vec<DMatrix<T>>, sigma: DMatrix<T>) -> Result<Self> {
        let k = check_square_sequence("Psi", &psi)?;
        check_covariance(&sigma, k)?;
        Ok(VmaModel { psi, sigma })
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn order(&self) -> usize {
        self.psi.len()
    }

    pub fn psi(&self) -> &[DMatrix<T>] {
        &self.psi
    }

    pub fn sigma(&self) -> &DMatrix<T> {
        &self.sigma
    }
}

/// k-variate AR(p): `y_t = Σ Φ_i y_{t-i} + ε_t`, `ε ~ N(0, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarModel<T: Real> {
    phi: Vec<DMatrix<T>>,
    sigma: DMatrix<T>,
}

impl<T: Real> VarModel<T> {
    pub fn new(phi: Vec<DMatrix<T>>) -> Result<Self> {
        let k = check_square_sequence("Phi", &phi)?;
        Self::with_covariance(phi, DMatrix::identity(k, k))
    }

    pub fn with_covariance(phi: Vec<DMatrix<T>>, sigma: DMatrix<T>) -> Result<Self> {
        let k = check_square_sequence("Phi", &phi)?;
        check_covariance(&sigma, k)?;
        Ok(VarModel { phi, sigma })
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self) -> &[DMatrix<T>] {
        &self.phi
    }

    pub fn sigma(&self) -> &DMatrix<T> {
        &self.sigma
    }
}

/// Scalar coefficients embedded as 1×1 matrices.
#[cfg(test)]
pub(crate) fn scalars_as_matrices<T: Real>(values: &[T]) -> Vec<DMatrix<T>> {
    values.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn companion_scalar() {
        let f = companion_from_ar(&ArModel::new(vec![0.5]).unwrap());
        assert_eq!(f.matrix(), &DMatrix::from_row_slice(1, 1, &[0.5]));
    }

    #[test]
    fn companion_ar2() {
        let f = companion_from_ar(&ArModel::new(vec![0.5, 0.3]).unwrap());
        assert_eq!(f.matrix(), &DMatrix::from_row_slice(2, 2, &[0.5, 0.3, 1.0, 0.0]));
    }

    #[test]
    fn companion_zero_coefficients() {
        let f = companion_from_ar(&ArModel::new(vec![0.0; 3]).unwrap());
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(f.matrix(), &expected);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(ArModel::new(vec![0.5, f64::NAN]), Err(Error::Validation(_))));
        assert!(matches!(MaModel::new(vec![f64::INFINITY]), Err(Error::Validation(_))));
        assert!(MaModel::with_variance(vec![0.5], 0.0).is_err());
        assert!(MaModel::<f64>::new(vec![]).is_err());
        assert!(TimeSeries::univariate(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::<f64>::univariate(vec![]).is_err());
    }

    #[test]
    fn covariance_validation() {
        let psi = vec![DMatrix::<f64>::zeros(2, 2)];
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(VmaModel::with_covariance(psi.clone(), asym).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(VmaModel::with_covariance(psi.clone(), indefinite).is_err());
        let bad_dim = vec![DMatrix::<f64>::zeros(2, 2), DMatrix::zeros(3, 3)];
        assert!(matches!(VarModel::new(bad_dim), Err(Error::Dimension(_))));
    }

    #[test]
    fn multivariate_layout() {
        let ts = TimeSeries::multivariate(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.dim(), 2);
        assert_eq!(ts.row(1), &[3.0, 4.0]);
        assert_eq!(ts.channel(1), vec![2.0, 4.0, 6.0]);
    }

    proptest! {
        #[test]
        fn companion_row_round_trip(phi in prop::collection::vec(-3.0f64..3.0, 1..8)) {
            let model = ArModel::new(phi.clone()).unwrap();
            let f = companion_from_ar(&model);
            let back = f.to_ar().unwrap();
            prop_assert_eq!(back.phi(), &phi[..]);
            let p = phi.len();
            for i in 1..p {
                for j in 0..p {
                    let expected = if j + 1 == i { 1.0 } else { 0.0 };
                    prop_assert_eq!(f.matrix()[(i, j)], expected);
                }
            }
        }
    }
}
