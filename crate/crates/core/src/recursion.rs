//! Coefficient recursions between a process and its inverted representation.
//!
//! Under a zero constant and a zero presample these hold for stable and
//! unstable AR models alike (and for invertible and noninvertible MA models),
//! so nothing here checks stability. Explosive sequences are expected output;
//! the only failure is exceeding [`Real::overflow_limit`], reported with the
//! finite prefix computed so far.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{companion_from_ar, ArModel, MaModel, VarModel, VmaModel};
use crate::scalar::Real;

fn check_terms(n_terms: usize) -> Result<()> {
    if n_terms == 0 {
        return Err(Error::validation("n_terms must be >= 1"));
    }
    Ok(())
}

fn overflowed<T: Real>(v: T) -> bool {
    !v.finite() || v.abs() > T::overflow_limit()
}

fn scalar_overflow<T: Real>(index: usize, prefix: &[T]) -> Error {
    Error::Overflow {
        index,
        partial: prefix.iter().map(|v| v.as_f64()).collect(),
    }
}

fn matrix_overflow<T: Real>(index: usize, prefix: &[DMatrix<T>]) -> Error {
    Error::Overflow {
        index,
        partial: prefix.iter().flat_map(|m| m.iter().map(|v| v.as_f64())).collect(),
    }
}

/// MA(∞) weights `ψ_1 … ψ_n` of an AR model.
///
/// `ψ_j = Σ_{i=1}^{min(j,p)} φ_i ψ_{j-i}` with `ψ_0 = 1`.
pub fn ar_to_ma<T: Real>(model: &ArModel<T>, n_terms: usize) -> Result<Vec<T>> {
    check_terms(n_terms)?;
    let phi = model.phi();
    // psi[0] is the implicit unit weight
    let mut psi = Vec::with_capacity(n_terms + 1);
    psi.push(T::one());
    for j in 1..=n_terms {
        let mut acc = T::zero();
        for (i, &phi_i) in phi.iter().enumerate().take(j) {
            acc += phi_i * psi[j - 1 - i];
        }
        if overflowed(acc) {
            return Err(scalar_overflow(j, &psi[1..]));
        }
        psi.push(acc);
    }
    psi.remove(0);
    Ok(psi)
}

/// AR(∞) weights `φ_1 … φ_n` of an MA model.
///
/// `φ_j = ψ_j − Σ_{i=1}^{min(j-1,q)} ψ_i φ_{j-i}`, where `ψ_j = 0` for `j > q`;
/// beyond `q` this is the q-th order difference equation `φ_j = −Σ ψ_i φ_{j-i}`.
pub fn ma_to_ar<T: Real>(model: &MaModel<T>, n_terms: usize) -> Result<Vec<T>> {
    check_terms(n_terms)?;
    let psi = model.psi();
    let mut phi: Vec<T> = Vec::with_capacity(n_terms);
    for j in 1..=n_terms {
        let mut acc = psi.get(j - 1).copied().unwrap_or_else(T::zero);
        for (i, &psi_i) in psi.iter().enumerate().take(j - 1) {
            acc -= psi_i * phi[j - 2 - i];
        }
        if overflowed(acc) {
            return Err(scalar_overflow(j, &phi));
        }
        phi.push(acc);
    }
    Ok(phi)
}

/// First column of `F^j` by repeated dense multiplication.
///
/// Deliberately naive: this is the reference the recursions are checked against.
pub fn companion_power_column<T: Real>(model: &ArModel<T>, j: usize) -> Vec<T> {
    let f = companion_from_ar(model);
    let p = f.order();
    let mut power = DMatrix::<T>::identity(p, p);
    for _ in 0..j {
        power = f.matrix() * &power;
    }
    power.column(0).iter().copied().collect()
}

/// VMA(∞) weights of a VAR: `Ψ_m = Σ_{i=1}^{min(m,p)} Φ_i Ψ_{m-i}`, `Ψ_0 = I`.
pub fn var_to_vma<T: Real>(model: &VarModel<T>, n_terms: usize) -> Result<Vec<DMatrix<T>>> {
    check_terms(n_terms)?;
    let k = model.dim();
    let phi = model.phi();
    let mut psi = Vec::with_capacity(n_terms + 1);
    psi.push(DMatrix::<T>::identity(k, k));
    for m in 1..=n_terms {
        let mut acc = DMatrix::<T>::zeros(k, k);
        for (i, phi_i) in phi.iter().enumerate().take(m) {
            acc += phi_i * &psi[m - 1 - i];
        }
        if acc.iter().any(|&v| overflowed(v)) {
            return Err(matrix_overflow(m, &psi[1..]));
        }
        psi.push(acc);
    }
    psi.remove(0);
    Ok(psi)
}

/// VAR(∞) weights of a VMA: `Φ_m = Ψ_m − Σ_{j=1}^{min(m-1,q)} Φ_{m-j} Ψ_j`.
///
/// `Φ_{m-j}` multiplies `Ψ_j` from the left.
pub fn vma_to_var<T: Real>(model: &VmaModel<T>, n_terms: usize) -> Result<Vec<DMatrix<T>>> {
    check_terms(n_terms)?;
    let k = model.dim();
    let psi = model.psi();
    let mut phi: Vec<DMatrix<T>> = Vec::with_capacity(n_terms);
    for m in 1..=n_terms {
        let mut acc = psi.get(m - 1).cloned().unwrap_or_else(|| DMatrix::zeros(k, k));
        for (j, psi_j) in psi.iter().enumerate().take(m - 1) {
            acc -= &phi[m - 2 - j] * psi_j;
        }
        if acc.iter().any(|&v| overflowed(v)) {
            return Err(matrix_overflow(m, &phi));
        }
        phi.push(acc);
    }
    Ok(phi)
}
