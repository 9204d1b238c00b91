//! Sample paths under a zero presample: `ε_s = 0` and `y_s = 0` for `s ≤ 0`.
//! There is no burn-in, so the first observation is exactly `ε_1`.
//!
//! Gaussian draws come from `ChaCha8Rng::seed_from_u64(seed)` fed through
//! `rand_distr::StandardNormal` (ziggurat), one `f64` per innovation in time
//! order (row-major over channels for vector processes), then scaled. This
//! pairing is fixed: the same `(model, n_obs, seed)` reproduces the same path.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{ArModel, MaModel, TimeSeries, VmaModel};
use crate::scalar::Real;

/// `n` iid standard normal draws for `seed`.
pub fn standard_normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// `n` iid `N(0, sigma2)` innovations.
pub fn innovations<T: Real>(n: usize, sigma2: T, seed: u64) -> Vec<T> {
    let scale = sigma2.sqrt();
    standard_normals(n, seed)
        .into_iter()
        .map(|z| T::lit(z) * scale)
        .collect()
}

fn check_len(n_obs: usize) -> Result<()> {
    if n_obs == 0 {
        return Err(Error::validation("n_obs must be >= 1"));
    }
    Ok(())
}

pub fn simulate_ma<T: Real>(model: &MaModel<T>, n_obs: usize, seed: u64) -> Result<TimeSeries<T>> {
    check_len(n_obs)?;
    simulate_ma_with_innovations(model, &innovations(n_obs, model.sigma2(), seed))
}

/// MA path driven by a caller-supplied innovation stream `ε_1 … ε_n`.
pub fn simulate_ma_with_innovations<T: Real>(model: &MaModel<T>, eps: &[T]) -> Result<TimeSeries<T>> {
    check_len(eps.len())?;
    let psi = model.psi();
    let y = (0..eps.len())
        .map(|t| {
            let mut acc = eps[t];
            for (j, &psi_j) in psi.iter().enumerate().take(t) {
                acc += psi_j * eps[t - 1 - j];
            }
            acc
        })
        .collect();
    TimeSeries::univariate(y)
}

/// AR path; unstable coefficients are simulated as is.
pub fn simulate_ar<T: Real>(model: &ArModel<T>, n_obs: usize, seed: u64) -> Result<TimeSeries<T>> {
    check_len(n_obs)?;
    simulate_ar_with_innovations(model, &innovations(n_obs, model.sigma2(), seed))
}

pub fn simulate_ar_with_innovations<T: Real>(model: &ArModel<T>, eps: &[T]) -> Result<TimeSeries<T>> {
    check_len(eps.len())?;
    let phi = model.phi();
    let mut y: Vec<T> = Vec::with_capacity(eps.len());
    for t in 0..eps.len() {
        let mut acc = eps[t];
        for (i, &phi_i) in phi.iter().enumerate().take(t) {
            acc += phi_i * y[t - 1 - i];
        }
        if !acc.finite() || acc.abs() > T::overflow_limit() {
            return Err(Error::Overflow {
                index: t + 1,
                partial: y.iter().map(|v| v.as_f64()).collect(),
            });
        }
        y.push(acc);
    }
    TimeSeries::univariate(y)
}

/// Vector MA path with `ε_t = L z_t`, `L L' = Σ` the Cholesky factor.
pub fn simulate_vma<T: Real>(model: &VmaModel<T>, n_obs: usize, seed: u64) -> Result<TimeSeries<T>> {
    check_len(n_obs)?;
    let k = model.dim();
    let chol = model
        .sigma()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::validation("innovation covariance is not positive definite"))?;
    let lower: DMatrix<T> = chol.l();
    let z = standard_normals(n_obs * k, seed);
    let mut eps = Vec::with_capacity(n_obs * k);
    for zt in z.chunks(k) {
        for i in 0..k {
            let mut acc = T::zero();
            for (c, &zc) in zt.iter().enumerate().take(i + 1) {
                acc += lower[(i, c)] * T::lit(zc);
            }
            eps.push(acc);
        }
    }
    simulate_vma_with_innovations(model, &eps)
}

/// Vector MA path from a flat row-major innovation stream (`n_obs * k` values).
pub fn simulate_vma_with_innovations<T: Real>(model: &VmaModel<T>, eps: &[T]) -> Result<TimeSeries<T>> {
    let k = model.dim();
    if eps.is_empty() || !eps.len().is_multiple_of(k) {
        return Err(Error::dimension(format!(
            "innovation stream of length {} does not hold whole {k}-vectors",
            eps.len()
        )));
    }
    let n = eps.len() / k;
    let psi = model.psi();
    let mut y = Vec::with_capacity(eps.len());
    for t in 0..n {
        for i in 0..k {
            let mut acc = eps[t * k + i];
            for (j, psi_j) in psi.iter().enumerate().take(t) {
                let lagged = &eps[(t - 1 - j) * k..(t - j) * k];
                for (c, &e) in lagged.iter().enumerate() {
                    acc += psi_j[(i, c)] * e;
                }
            }
            y.push(acc);
        }
    }
    TimeSeries::from_flat(y, k)
}
