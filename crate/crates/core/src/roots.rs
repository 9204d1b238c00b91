//! Roots of the MA polynomial `1 + ψ_1 z + … + ψ_q z^q`, invertibility
//! classification, and the invertible sibling obtained by reflecting roots
//! across the unit circle.

use nalgebra::{Complex, ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::model::MaModel;
use crate::scalar::Real;

/// Default tolerance on `| |z| − 1 |` for calling a root "on" the unit circle.
pub const BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invertibility {
    /// All roots strictly outside the unit circle.
    Invertible,
    /// At least one root strictly inside and none on the circle.
    Noninvertible,
    /// Some root lies on the unit circle within the tolerance.
    Boundary,
}

impl Invertibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Invertibility::Invertible => "invertible",
            Invertibility::Noninvertible => "noninvertible",
            Invertibility::Boundary => "boundary",
        }
    }
}

impl std::str::FromStr for Invertibility {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "invertible" => Ok(Invertibility::Invertible),
            "noninvertible" => Ok(Invertibility::Noninvertible),
            "boundary" => Ok(Invertibility::Boundary),
            other => Err(Error::validation(format!("unknown invertibility class '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertibilityReport<T: Real> {
    pub class: Invertibility,
    /// Smallest root modulus; `+∞` for white noise.
    pub min_modulus: T,
    /// Smallest modulus among roots strictly inside the unit circle, if any.
    pub min_inside_modulus: Option<T>,
}

/// `[1, ψ_1, …, ψ_d]` with trailing zeros removed.
fn trimmed_coefficients<T: Real>(psi: &[T]) -> Vec<T> {
    let mut coefs = Vec::with_capacity(psi.len() + 1);
    coefs.push(T::one());
    coefs.extend_from_slice(psi);
    while coefs.len() > 1 && *coefs.last().unwrap() == T::zero() {
        coefs.pop();
    }
    coefs
}

/// `(p(z), p'(z))` by Horner's scheme; `coefs[k]` multiplies `z^k`.
fn eval_with_derivative<T: Real>(coefs: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::new(T::zero(), T::zero());
    let mut dp = Complex::new(T::zero(), T::zero());
    for &c in coefs.iter().rev() {
        dp = dp * z + p;
        p = p * z + Complex::new(c, T::zero());
    }
    (p, dp)
}

fn newton_polish<T: Real>(coefs: &[T], z: Complex<T>) -> Complex<T> {
    let (p, dp) = eval_with_derivative(coefs, z);
    if dp.norm_sqr() == T::zero() {
        return z;
    }
    let candidate = z - p / dp;
    let (p_new, _) = eval_with_derivative(coefs, candidate);
    if p_new.norm_sqr() < p.norm_sqr() {
        candidate
    } else {
        z
    }
}

/// Roots of `1 + ψ_1 z + … + ψ_q z^q` after trimming trailing zero coefficients.
///
/// Computed as reciprocals of the eigenvalues of the companion matrix of the
/// reversed polynomial `λ^d + ψ_1 λ^{d-1} + … + ψ_d` (the inverse roots),
/// followed by one Newton step per root on the original polynomial.
pub fn ma_roots<T: Real>(model: &MaModel<T>) -> Vec<Complex<T>> {
    let coefs = trimmed_coefficients(model.psi());
    let degree = coefs.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    let mut companion = DMatrix::<T>::zeros(degree, degree);
    for j in 0..degree {
        companion[(0, j)] = -coefs[j + 1];
    }
    for i in 1..degree {
        companion[(i, i - 1)] = T::one();
    }
    let inverse_roots = companion.complex_eigenvalues();
    inverse_roots
        .iter()
        .map(|lambda| newton_polish(&coefs, Complex::new(T::one(), T::zero()) / *lambda))
        .collect()
}

pub fn classify_invertibility<T: Real>(model: &MaModel<T>, tol: T) -> InvertibilityReport<T> {
    classify_roots(&ma_roots(model), tol)
}

pub(crate) fn classify_roots<T: Real>(roots: &[Complex<T>], tol: T) -> InvertibilityReport<T> {
    let one = T::one();
    let moduli: Vec<T> = roots.iter().map(|r| r.modulus()).collect();
    let min_modulus = moduli
        .iter()
        .copied()
        .reduce(|a, b| a.min(b))
        .unwrap_or_else(|| T::lit(f64::INFINITY));
    let boundary = moduli.iter().any(|&m| (m - one).abs() <= tol);
    let inside: Vec<T> = moduli.iter().copied().filter(|&m| m < one - tol).collect();
    let min_inside_modulus = inside.into_iter().reduce(|a, b| a.min(b));
    let class = if boundary {
        Invertibility::Boundary
    } else if min_inside_modulus.is_some() {
        Invertibility::Noninvertible
    } else {
        Invertibility::Invertible
    };
    InvertibilityReport {
        class,
        min_modulus,
        min_inside_modulus,
    }
}

/// Expands `Π (1 − z / r_i)` and returns the coefficients of `z^1 … z^d`.
fn coefficients_from_roots<T: Real>(roots: &[Complex<T>]) -> Vec<Complex<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut poly = vec![Complex::new(T::one(), T::zero())];
    for r in roots {
        let factor = -(Complex::new(T::one(), T::zero()) / *r);
        let mut next = vec![zero; poly.len() + 1];
        for (k, &c) in poly.iter().enumerate() {
            next[k] += c;
            next[k + 1] += c * factor;
        }
        poly = next;
    }
    poly.remove(0);
    poly
}

/// The MA process with every inside root `r` replaced by `1/conj(r)`.
///
/// The innovation variance is multiplied by `Π 1/|r|²` over the reflected roots,
/// which keeps the autocovariance function unchanged. An already invertible
/// model is returned as is.
pub fn invertible_sibling<T: Real>(model: &MaModel<T>) -> Result<MaModel<T>> {
    let roots = ma_roots(model);
    let tol = T::lit(BOUNDARY_TOL);
    let one = T::one();
    if let Some(r) = roots.iter().find(|r| (r.modulus() - one).abs() <= tol) {
        return Err(Error::BoundaryRoot {
            modulus: r.modulus().as_f64(),
        });
    }
    if roots.iter().all(|r| r.modulus() > one) {
        return Ok(model.clone());
    }
    let mut scale = one;
    let flipped: Vec<Complex<T>> = roots
        .iter()
        .map(|&r| {
            let m2 = r.norm_sqr();
            if m2 < one {
                scale /= m2;
                Complex::new(one, T::zero()) / r.conj()
            } else {
                r
            }
        })
        .collect();
    let mut psi: Vec<T> = coefficients_from_roots(&flipped).into_iter().map(|c| c.re).collect();
    // restore trimmed trailing zeros
    psi.resize(model.order(), T::zero());
    MaModel::with_variance(psi, model.sigma2() * scale)
}
