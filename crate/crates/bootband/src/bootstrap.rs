//! The multiplier bootstrap engine.
//!
//! One run draws independent mean-one variance-one multipliers per replicate,
//! reweights every model's log likelihood with the same multiplier vector
//! (preserving the dependence between models), refits, and records the
//! square-root likelihood-ratio statistics in a models-by-replicates matrix.
//! Marginal quantiles of that matrix calibrate per-model critical values; the
//! multiplicity correction lowers the marginal level over the replicate grid
//! until the joint exceedance frequency fits the nominal level.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{Family, ModelGrid, PreparedGrid};
use crate::rng::{RngSpec, StreamDomain};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

/// Redraw budget per replicate index.
const MAX_REDRAWS: usize = 100;

/// Distribution of the bootstrap multipliers. All choices have mean one and
/// variance one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// 1 + standard normal.
    Gaussian,
    /// Exponential with rate one.
    Exponential,
    /// 0 or 2 with probability one half each.
    TwoPointBernoulli,
}

impl WeightScheme {
    /// Whether the scheme can produce negative multipliers (disallowed for
    /// the quantile family).
    pub fn can_be_negative(self) -> bool {
        matches!(self, WeightScheme::Gaussian)
    }
}

/// Draws the multiplier vector of one replicate. Deterministic in
/// (seed, replicate index) regardless of call order or thread count.
pub fn draw_weights(scheme: WeightScheme, n: usize, rng: &RngSpec, replicate: u64) -> Vec<f64> {
    let mut r = rng.substream(StreamDomain::BootstrapWeights, replicate);
    let mut u = Vec::with_capacity(n);
    match scheme {
        WeightScheme::Gaussian => {
            for _ in 0..n {
                let z: f64 = r.sample(StandardNormal);
                u.push(1.0 + z);
            }
        }
        WeightScheme::Exponential => {
            for _ in 0..n {
                let z: f64 = r.sample(Exp1);
                u.push(z);
            }
        }
        WeightScheme::TwoPointBernoulli => {
            for _ in 0..n {
                u.push(if r.random_bool(0.5) { 2.0 } else { 0.0 });
            }
        }
    }
    u
}

/// Square-root likelihood-ratio statistics, models by replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct LrMatrix {
    models: usize,
    replicates: usize,
    /// Row-major, row `k` holds the statistics of model `k` across replicates.
    values: Vec<f64>,
    /// Same rows sorted ascending.
    sorted: Vec<f64>,
    rejected_replicates: u64,
}

impl LrMatrix {
    /// Wraps a precomputed matrix. Entries must be finite and nonnegative.
    pub fn from_values(values: Vec<f64>, models: usize, replicates: usize) -> Result<Self> {
        if models == 0 || replicates == 0 || values.len() != models * replicates {
            return Err(Error::DimensionMismatch {
                expected: models * replicates,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidData(
                "likelihood-ratio statistics must be finite and nonnegative".into(),
            ));
        }
        let mut sorted = values.clone();
        for k in 0..models {
            sorted[k * replicates..(k + 1) * replicates].sort_by(f64::total_cmp);
        }
        Ok(LrMatrix { models, replicates, values, sorted, rejected_replicates: 0 })
    }

    pub fn models(&self) -> usize {
        self.models
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.replicates..(k + 1) * self.replicates]
    }

    pub fn sorted_row(&self, k: usize) -> &[f64] {
        &self.sorted[k * self.replicates..(k + 1) * self.replicates]
    }

    /// Total curvature-guard redraws across all replicates.
    pub fn rejected_replicates(&self) -> u64 {
        self.rejected_replicates
    }
}

/// Builds the bootstrap matrix: `replicates` multiplier draws, each shared by
/// every model of the grid.
///
/// Replicates failing a curvature guard are redrawn from fresh substream
/// indices at or beyond `replicates`, so accepted replicates keep stable
/// streams; a replicate exhausting its redraw budget fails with
/// [`Error::TooManyRejections`].
pub fn build_lr_matrix(
    data: &Dataset,
    grid: &ModelGrid,
    replicates: usize,
    scheme: WeightScheme,
    rng: &RngSpec,
) -> Result<LrMatrix> {
    let prep = grid.prepare(data)?;
    build_lr_matrix_prepared(&prep, replicates, scheme, rng)
}

/// As [`build_lr_matrix`], reusing an already prepared grid.
pub fn build_lr_matrix_prepared(
    prep: &PreparedGrid,
    replicates: usize,
    scheme: WeightScheme,
    rng: &RngSpec,
) -> Result<LrMatrix> {
    if prep.family() == Family::QuantileLocation && scheme.can_be_negative() {
        return Err(Error::NegativeMultiplier);
    }
    let n = prep.data().n();
    build_with_drawer(prep, replicates, &|index| draw_weights(scheme, n, rng, index))
}

/// Engine core, generic over the multiplier source keyed by substream index.
fn build_with_drawer(
    prep: &PreparedGrid,
    replicates: usize,
    drawer: &(dyn Fn(u64) -> Vec<f64> + Sync),
) -> Result<LrMatrix> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("replicate count must be positive".into()));
    }
    let k_count = prep.len();
    let b_count = replicates;
    // Replicate-major fill so each worker writes one contiguous row.
    let mut by_replicate = vec![0.0f64; b_count * k_count];
    let mut redraws = vec![0u64; b_count];

    by_replicate
        .par_chunks_mut(k_count)
        .zip(redraws.par_iter_mut())
        .enumerate()
        .try_for_each(|(b, (row, redrawn))| -> Result<()> {
            let mut attempt = 0usize;
            loop {
                let index = if attempt == 0 {
                    b as u64
                } else {
                    b_count as u64 + (b as u64) * MAX_REDRAWS as u64 + (attempt as u64 - 1)
                };
                let u = drawer(index);
                match fill_replicate(prep, &u, row) {
                    Ok(()) => {
                        *redrawn = attempt as u64;
                        return Ok(());
                    }
                    Err(Error::NonPositiveCurvature) => {
                        attempt += 1;
                        if attempt > MAX_REDRAWS {
                            return Err(Error::TooManyRejections {
                                replicate: b,
                                attempts: attempt,
                            });
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
        })?;

    let mut values = vec![0.0f64; k_count * b_count];
    for b in 0..b_count {
        for k in 0..k_count {
            values[k * b_count + b] = by_replicate[b * k_count + k];
        }
    }
    let mut lr = LrMatrix::from_values(values, k_count, b_count)?;
    lr.rejected_replicates = redraws.iter().sum();
    Ok(lr)
}

fn fill_replicate(prep: &PreparedGrid, u: &[f64], row: &mut [f64]) -> Result<()> {
    for (k, slot) in row.iter_mut().enumerate() {
        *slot = prep.bootstrap_sqrt_lr(k, u)?;
    }
    Ok(())
}

/// The marginal bootstrap quantile: the smallest nonnegative threshold whose
/// exceedance frequency in the column is at most `alpha`.
///
/// `sorted_column` must be sorted ascending. Equals the order statistic at
/// rank B - floor(alpha B).
pub fn marginal_quantile(sorted_column: &[f64], alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    if sorted_column.is_empty() {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    debug_assert!(sorted_column.windows(2).all(|p| p[0] <= p[1]));
    let b = sorted_column.len();
    let count = (alpha * b as f64).floor() as usize;
    Ok(marginal_quantile_at_count(sorted_column, count))
}

/// The order statistic allowing exactly `exceed` strict exceedances: entry
/// B - 1 - exceed of the ascending column (saturating at the minimum).
pub fn marginal_quantile_at_count(sorted_column: &[f64], exceed: usize) -> f64 {
    let b = sorted_column.len();
    let idx = b - 1 - exceed.min(b - 1);
    sorted_column[idx]
}

/// Fraction of replicates in which any model's statistic strictly exceeds
/// its critical value.
pub fn union_exceedance(lr: &LrMatrix, critical_values: &[f64]) -> Result<f64> {
    if critical_values.len() != lr.models() {
        return Err(Error::DimensionMismatch {
            expected: lr.models(),
            got: critical_values.len(),
        });
    }
    let b = lr.replicates();
    let mut exceeded = vec![false; b];
    for (k, &z) in critical_values.iter().enumerate() {
        for (flag, &v) in exceeded.iter_mut().zip(lr.row(k)) {
            *flag |= v > z;
        }
    }
    Ok(exceeded.iter().filter(|&&f| f).count() as f64 / b as f64)
}

/// A multiplicity-corrected marginal level.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionResult {
    /// The nominal joint level the correction was run for.
    pub alpha: f64,
    /// Corrected marginal level, a grid value j/B in (0, alpha].
    pub corrected_level: f64,
    /// The integer j with corrected_level = j/B.
    pub corrected_count: usize,
    /// Per-model critical values at the corrected level.
    pub critical_values: Vec<f64>,
    /// Joint exceedance frequency at the corrected level.
    pub union_frequency: f64,
    /// Set when no grid level satisfied the nominal constraint and the
    /// correction fell back to the smallest level 1/B. Only then may
    /// `union_frequency` exceed `alpha`.
    pub conservative_floor: bool,
}

fn critical_values_at_count(lr: &LrMatrix, exceed: usize) -> Vec<f64> {
    (0..lr.models())
        .map(|k| marginal_quantile_at_count(lr.sorted_row(k), exceed))
        .collect()
}

/// Finds the largest grid level c = j/B, j = 1..floor(alpha B), whose joint
/// exceedance frequency stays within `alpha`.
///
/// The exceedance frequency is nondecreasing in j (critical values shrink
/// entrywise), so the feasible set is a prefix and binary search finds its
/// maximum. When even j = 1 is infeasible the result falls back to 1/B with
/// `conservative_floor` set.
pub fn multiplicity_correction(lr: &LrMatrix, alpha: f64) -> Result<CorrectionResult> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let b = lr.replicates();
    let j_max = (alpha * b as f64).floor() as usize;
    if j_max == 0 {
        return Err(Error::AlphaBelowResolution { alpha, replicates: b });
    }
    let feasible = |j: usize| -> Result<bool> {
        let crit = critical_values_at_count(lr, j);
        Ok(union_exceedance(lr, &crit)? <= alpha)
    };

    let (count, floored) = if !feasible(1)? {
        (1, true)
    } else {
        let mut lo = 1usize;
        let mut hi = j_max;
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if feasible(mid)? {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        (lo, false)
    };

    let critical_values = critical_values_at_count(lr, count);
    let union_frequency = union_exceedance(lr, &critical_values)?;
    Ok(CorrectionResult {
        alpha,
        corrected_level: count as f64 / b as f64,
        corrected_count: count,
        critical_values,
        union_frequency,
        conservative_floor: floored,
    })
}

/// One model's slice of a simultaneous band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPoint {
    /// Model location: center for regression families, level for quantiles.
    pub location: f64,
    /// Fitted value at the location.
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// Critical value at the corrected marginal level.
    pub critical_value: f64,
}

impl BandPoint {
    pub fn halfwidth(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

/// A simultaneous confidence band with its correction.
#[derive(Debug, Clone, PartialEq)]
pub struct BandResult {
    pub points: Vec<BandPoint>,
    pub correction: CorrectionResult,
    pub rejected_replicates: u64,
}

/// Runs the full bootstrap band construction at joint level 1 - alpha.
///
/// Regression bands are symmetric intervals around the local estimate with
/// halfwidth critical value times the local standard-error scale; quantile
/// bands are profiled likelihood intervals.
pub fn simultaneous_band(
    data: &Dataset,
    grid: &ModelGrid,
    alpha: f64,
    replicates: usize,
    scheme: WeightScheme,
    rng: &RngSpec,
) -> Result<BandResult> {
    let prep = grid.prepare(data)?;
    let lr = build_lr_matrix_prepared(&prep, replicates, scheme, rng)?;
    let correction = multiplicity_correction(&lr, alpha)?;
    let mut points = Vec::with_capacity(prep.len());
    for k in 0..prep.len() {
        let z = correction.critical_values[k];
        let estimate = prep.estimate(k);
        let (lower, upper) = match prep.halfwidth_scale(k)? {
            Some(scale) => (estimate - z * scale, estimate + z * scale),
            None => prep.quantile_interval(k, z)?,
        };
        points.push(BandPoint {
            location: prep.location(k),
            estimate,
            lower,
            upper,
            critical_value: z,
        });
    }
    Ok(BandResult { points, correction, rejected_replicates: lr.rejected_replicates() })
}
