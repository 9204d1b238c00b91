//! Grid experiment over MA(2) parameters: per grid point, simulate many
//! series, estimate with Durbin's method and with restricted OLS on the same
//! series, and aggregate squared errors.
//!
//! Seeds are derived from grid indices, never from execution order, and the
//! replications of a point are accumulated sequentially, so results are
//! bit-identical for any worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{durbin_from_stage1, fit_ar_ols, restricted_ols_from_stage1, DurbinSequence, RestrictedConfig};
use crate::model::{MaModel, TimeSeries};
use crate::roots::{classify_invertibility, Invertibility, InvertibilityReport, BOUNDARY_TOL};
use crate::scalar::Real;
use crate::simulate::simulate_ma;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Invertible,
    Noninvertible,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Invertible => "invertible",
            Region::Noninvertible => "noninvertible",
        }
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "invertible" => Ok(Region::Invertible),
            "noninvertible" => Ok(Region::Noninvertible),
            other => Err(Error::validation(format!("unknown region '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T: Real> {
    pub psi1_range: (T, T),
    pub psi2_range: (T, T),
    pub points_per_axis: usize,
    pub region: Region,
    /// Observations per replication.
    pub t: usize,
    /// Stage-1 AR order.
    pub l: usize,
    pub reps: usize,
    pub base_seed: u64,
    pub durbin: DurbinSequence,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        GridSpec {
            psi1_range: (T::lit(-2.2), T::lit(2.2)),
            psi2_range: (T::lit(-2.2), T::lit(2.2)),
            points_per_axis: 23,
            region: Region::Invertible,
            t: 400,
            l: 100,
            reps: 500,
            base_seed: 0,
            durbin: DurbinSequence::default(),
        }
    }
}

impl<T: Real> GridSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("psi1", self.psi1_range), ("psi2", self.psi2_range)] {
            if !lo.finite() || !hi.finite() || lo > hi {
                return Err(Error::validation(format!(
                    "{name} range [{lo}, {hi}] is not a finite interval"
                )));
            }
        }
        if self.points_per_axis < 2 {
            return Err(Error::validation("points per axis must be >= 2"));
        }
        if self.reps == 0 {
            return Err(Error::validation("reps must be >= 1"));
        }
        if self.l < 7 {
            return Err(Error::validation(format!(
                "stage-1 order {} is below 7, the minimum for an MA(2)",
                self.l
            )));
        }
        if self.t <= 2 * self.l {
            return Err(Error::validation(format!(
                "{} observations cannot support a stage-1 order of {}",
                self.t, self.l
            )));
        }
        Ok(())
    }

    fn coordinate(&self, (lo, hi): (T, T), i: usize) -> T {
        lo + (hi - lo) * T::from_count(i) / T::from_count(self.points_per_axis - 1)
    }

    /// Every grid point, row-major over `ψ_1` then `ψ_2`.
    pub fn points(&self) -> Vec<GridPoint<T>> {
        let n = self.points_per_axis;
        (0..n)
            .flat_map(|row| (0..n).map(move |col| (row, col)))
            .map(|(row, col)| GridPoint {
                row,
                col,
                psi1: self.coordinate(self.psi1_range, row),
                psi2: self.coordinate(self.psi2_range, col),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint<T: Real> {
    pub row: usize,
    pub col: usize,
    pub psi1: T,
    pub psi2: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorStats<T: Real> {
    /// Mean squared error over successful replications and both parameters.
    pub mse: Option<T>,
    pub mse_per_param: Option<[T; 2]>,
    pub ok: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord<T: Real> {
    pub point: GridPoint<T>,
    pub class: Invertibility,
    pub min_modulus: T,
    pub reps: usize,
    pub durbin: EstimatorStats<T>,
    pub restricted: EstimatorStats<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult<T: Real> {
    pub spec: GridSpec<T>,
    pub schema_version: u32,
    pub records: Vec<PointRecord<T>>,
}

fn ma2<T: Real>(psi1: T, psi2: T) -> MaModel<T> {
    MaModel::new(vec![psi1, psi2]).expect("finite MA(2) coefficients")
}

fn classify<T: Real>(psi1: T, psi2: T) -> InvertibilityReport<T> {
    classify_invertibility(&ma2(psi1, psi2), T::lit(BOUNDARY_TOL))
}

/// Whether `(ψ_1, ψ_2)` belongs to the study region. The invertible region
/// keeps invertible points; the noninvertible region keeps points with a
/// root inside the unit circle whose smallest such modulus is at least 0.8.
/// Points with a root on the circle are skipped in both.
pub fn skip_rule<T: Real>(psi1: T, psi2: T, region: Region) -> bool {
    let report = classify(psi1, psi2);
    match region {
        Region::Invertible => report.class == Invertibility::Invertible,
        Region::Noninvertible => {
            report.class == Invertibility::Noninvertible && report.min_inside_modulus.is_some_and(|m| m >= T::lit(0.8))
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Simulation seed for one replication: a splitmix64 chain over
/// `base, row, col, rep`.
pub fn seed_mix(base: u64, row: usize, col: usize, rep: usize) -> u64 {
    let mut h = splitmix64(base);
    h = splitmix64(h ^ row as u64);
    h = splitmix64(h ^ col as u64);
    splitmix64(h ^ rep as u64)
}

#[derive(Default)]
struct Accumulator<T> {
    sums: [T; 2],
    ok: usize,
    failed: usize,
}

impl<T: Real> Accumulator<T> {
    fn push(&mut self, estimate: Option<&[T]>, truth: [T; 2]) {
        match estimate {
            Some(psi) if psi.iter().all(|v| v.finite()) => {
                for i in 0..2 {
                    let e = psi[i] - truth[i];
                    self.sums[i] += e * e;
                }
                self.ok += 1;
            }
            _ => self.failed += 1,
        }
    }

    fn finish(self) -> EstimatorStats<T> {
        let (mse, per_param) = if self.ok == 0 {
            (None, None)
        } else {
            let n = T::from_count(self.ok);
            let per = [self.sums[0] / n, self.sums[1] / n];
            (Some((per[0] + per[1]) / T::lit(2.0)), Some(per))
        };
        EstimatorStats {
            mse,
            mse_per_param: per_param,
            ok: self.ok,
            failed: self.failed,
        }
    }
}

fn accumulate<T: Real>(
    point: GridPoint<T>,
    spec: &GridSpec<T>,
    mut series_for_rep: impl FnMut(usize) -> Result<TimeSeries<T>>,
) -> PointRecord<T> {
    let truth = [point.psi1, point.psi2];
    let mut durbin_acc = Accumulator::default();
    let mut restricted_acc = Accumulator::default();
    let config = RestrictedConfig::default();
    for rep in 0..spec.reps {
        let stage1 = series_for_rep(rep).and_then(|y| fit_ar_ols(&y, spec.l));
        let (d, r) = match stage1 {
            Ok(s1) => (
                durbin_from_stage1(s1.clone(), 2, spec.durbin).ok(),
                restricted_ols_from_stage1(s1, 2, &config).ok(),
            ),
            Err(_) => (None, None),
        };
        durbin_acc.push(d.as_ref().map(|e| e.psi_hat.as_slice()), truth);
        restricted_acc.push(r.as_ref().map(|e| e.psi_hat.as_slice()), truth);
    }
    let report = classify(point.psi1, point.psi2);
    PointRecord {
        point,
        class: report.class,
        min_modulus: report.min_modulus,
        reps: spec.reps,
        durbin: durbin_acc.finish(),
        restricted: restricted_acc.finish(),
    }
}

/// All replications for one grid point. Failing replications are counted,
/// not fatal.
pub fn run_point<T: Real>(point: GridPoint<T>, spec: &GridSpec<T>) -> PointRecord<T> {
    let model = ma2(point.psi1, point.psi2);
    accumulate(point, spec, |rep| {
        simulate_ma(&model, spec.t, seed_mix(spec.base_seed, point.row, point.col, rep))
    })
}

/// Runs every kept point of the grid on `workers` threads.
pub fn run_grid<T: Real>(spec: &GridSpec<T>, workers: usize) -> Result<GridResult<T>> {
    spec.validate()?;
    if workers == 0 {
        return Err(Error::validation("worker count must be >= 1"));
    }
    let kept: Vec<GridPoint<T>> = spec
        .points()
        .into_iter()
        .filter(|p| skip_rule(p.psi1, p.psi2, spec.region))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::validation(format!("cannot start worker pool: {e}")))?;
    let records = pool.install(|| kept.par_iter().map(|&p| run_point(p, spec)).collect());
    Ok(GridResult {
        spec: spec.clone(),
        schema_version: SCHEMA_VERSION,
        records,
    })
}
