//! Monte-Carlo ground truth for the synthetic experiments.
//!
//! The data-generating process puts equidistant design points on [0, 1],
//! evaluates a piecewise mean function, and adds Gaussian noise. Because the
//! truth is known, the true-world statistics sqrt(2(L_k(theta_hat) -
//! L_k(theta_star))) can be sampled directly, giving reference quantiles and
//! a reference multiplicity correction to hold the bootstrap against, and the
//! effective-coverage experiment can count how often the bootstrap band
//! captures every target at once.

use crate::bootstrap::{
    build_lr_matrix_prepared, multiplicity_correction, CorrectionResult, LrMatrix, WeightScheme,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{target_params, ModelGrid};
use crate::rng::{RngSpec, StreamDomain};
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Mean function of the synthetic regression model.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanFunction {
    /// Constant mean.
    Flat(f64),
    /// Level 5 with a parabolic bump up to 8.8 peaking at 0.35 and a mirror
    /// bump down to 1.2 peaking at 0.55; flat elsewhere.
    Bumps,
    /// User-supplied (x, f(x)) table, linearly interpolated, constant beyond
    /// the endpoints.
    Table(Vec<(f64, f64)>),
}

impl MeanFunction {
    fn validate(&self) -> Result<()> {
        match self {
            MeanFunction::Flat(c) => {
                if !c.is_finite() {
                    return Err(Error::InvalidParameter("flat mean level must be finite".into()));
                }
            }
            MeanFunction::Bumps => {}
            MeanFunction::Table(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidParameter("mean table is empty".into()));
                }
                for pair in points.windows(2) {
                    if pair[1].0 <= pair[0].0 {
                        return Err(Error::InvalidParameter(
                            "mean table abscissae must be strictly increasing".into(),
                        ));
                    }
                }
                if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                    return Err(Error::InvalidParameter("mean table must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Evaluates the mean function at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            MeanFunction::Flat(c) => *c,
            MeanFunction::Bumps => {
                // 5 + 3.8 (1 - 100 (x - 0.35)^2) and its mirror image,
                // expanded so the peaks evaluate to 8.8 and 1.2 exactly.
                if (0.25..=0.45).contains(&x) {
                    let d = x - 0.35;
                    8.8 - 380.0 * d * d
                } else if (0.45..=0.65).contains(&x) {
                    let d = x - 0.55;
                    1.2 + 380.0 * d * d
                } else {
                    5.0
                }
            }
            MeanFunction::Table(points) => {
                let hi = points.partition_point(|(px, _)| *px < x);
                if hi == 0 {
                    points[0].1
                } else if hi == points.len() {
                    points[points.len() - 1].1
                } else {
                    let (x0, y0) = points[hi - 1];
                    let (x1, y1) = points[hi];
                    let t = (x - x0) / (x1 - x0);
                    y0 + t * (y1 - y0)
                }
            }
        }
    }
}

/// The synthetic data-generating process: equidistant design on [0, 1],
/// piecewise mean, independent Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    n: usize,
    mean: MeanFunction,
    noise_sd: f64,
}

impl DgpSpec {
    /// Builds a process with `n` design points. `noise_sd` must be finite
    /// and nonnegative; zero is permitted as an exact-mean hook for tests.
    pub fn new(n: usize, mean: MeanFunction, noise_sd: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("design needs at least two points".into()));
        }
        if !noise_sd.is_finite() || noise_sd < 0.0 {
            return Err(Error::InvalidParameter(
                "noise standard deviation must be finite and nonnegative".into(),
            ));
        }
        mean.validate()?;
        Ok(DgpSpec { n, mean, noise_sd })
    }

    /// The two-bump mean with unit noise.
    pub fn bumps(n: usize) -> Result<Self> {
        DgpSpec::new(n, MeanFunction::Bumps, 1.0)
    }

    /// The flat mean at level 5 with unit noise.
    pub fn flat(n: usize) -> Result<Self> {
        DgpSpec::new(n, MeanFunction::Flat(5.0), 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> &MeanFunction {
        &self.mean
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    /// The design points (i - 1)/(n - 1), i = 1..n.
    pub fn design(&self) -> Vec<f64> {
        let d = (self.n - 1) as f64;
        (0..self.n).map(|i| i as f64 / d).collect()
    }

    /// The mean function evaluated on the design.
    pub fn mean_values(&self) -> Vec<f64> {
        self.design().iter().map(|&x| self.mean.eval(x)).collect()
    }
}

/// Draws dataset `dataset_index`: Y_i = f(X_i) + noise_sd * N(0, 1).
/// Deterministic per (seed, dataset index).
pub fn sample_dataset(dgp: &DgpSpec, rng: &RngSpec, dataset_index: u64) -> Dataset {
    let x = dgp.design();
    let mut r = rng.substream(StreamDomain::Dataset, dataset_index);
    let y: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let z: f64 = rand::Rng::sample(&mut r, StandardNormal);
            dgp.mean.eval(xi) + dgp.noise_sd * z
        })
        .collect();
    Dataset::new(x, y).expect("generated dataset is valid by construction")
}

/// Samples `datasets` independent datasets and records the true-world
/// statistics sqrt(2(L_k(theta_hat) - L_k(theta_star))), one column per
/// dataset, with the targets computed from the known mean function.
pub fn true_lr_matrix(
    dgp: &DgpSpec,
    grid: &ModelGrid,
    datasets: usize,
    rng: &RngSpec,
) -> Result<LrMatrix> {
    if datasets == 0 {
        return Err(Error::InvalidParameter("dataset count must be positive".into()));
    }
    let theta_star = target_params(dgp, grid)?;
    let k_count = grid.len();
    let columns: Vec<Vec<f64>> = (0..datasets)
        .into_par_iter()
        .map(|m| -> Result<Vec<f64>> {
            let data = sample_dataset(dgp, rng, m as u64);
            let prep = grid.prepare(&data)?;
            (0..k_count).map(|k| prep.sqrt_lr_at(k, &theta_star[k])).collect()
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0f64; k_count * datasets];
    for (m, col) in columns.iter().enumerate() {
        for k in 0..k_count {
            values[k * datasets + m] = col[k];
        }
    }
    LrMatrix::from_values(values, k_count, datasets)
}

/// The multiplicity correction computed from true-world statistics; the
/// algorithm is identical to the bootstrap correction with the replicate
/// grid replaced by the Monte-Carlo dataset grid.
pub fn mc_correction(true_lr: &LrMatrix, alpha: f64) -> Result<CorrectionResult> {
    multiplicity_correction(true_lr, alpha)
}

/// One nominal level of a coverage experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub alpha: f64,
    /// Fraction of datasets whose band captured every target.
    pub coverage_frequency: f64,
    /// Mean over datasets of the corrected confidence level 1 - q_boot(alpha).
    pub mean_corrected_level_bootstrap: f64,
    /// Corrected confidence level 1 - q(alpha) from the true-world matrix;
    /// `None` when alpha is below the 1/datasets resolution.
    pub corrected_level_mc: Option<f64>,
}

/// Outcome of [`coverage_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    /// Number of Monte-Carlo datasets.
    pub datasets: usize,
    /// One row per requested alpha, in request order.
    pub rows: Vec<CoverageRow>,
    /// Total curvature-guard redraws across all datasets.
    pub rejected_replicates: u64,
}

struct DatasetOutcome {
    covered: Vec<bool>,
    corrected_level: Vec<f64>,
    true_stats: Vec<f64>,
    rejected: u64,
}

fn validate_alphas(alphas: &[f64], resolutions: &[usize]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("need at least one alpha".into()));
    }
    for &alpha in alphas {
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
            return Err(Error::InvalidAlpha(alpha));
        }
        for &b in resolutions {
            if (alpha * b as f64).floor() as usize == 0 {
                return Err(Error::AlphaBelowResolution { alpha, replicates: b });
            }
        }
    }
    Ok(())
}

/// Runs the effective-coverage experiment.
///
/// For each of `datasets` independent datasets, a full bootstrap of
/// `replicates` draws is corrected for multiplicity at every requested alpha,
/// and the dataset counts as covered when the true-world statistic stays
/// within the corrected critical value for every model simultaneously.
/// Dataset iterations run in parallel; per-dataset substreams make the
/// result independent of thread count.
pub fn coverage_experiment(
    dgp: &DgpSpec,
    grid: &ModelGrid,
    alphas: &[f64],
    datasets: usize,
    replicates: usize,
    scheme: WeightScheme,
    rng: &RngSpec,
) -> Result<CoverageReport> {
    if datasets == 0 || replicates == 0 {
        return Err(Error::InvalidParameter(
            "dataset and replicate counts must be positive".into(),
        ));
    }
    validate_alphas(alphas, &[replicates])?;
    let theta_star = target_params(dgp, grid)?;
    let k_count = grid.len();

    let outcomes: Vec<DatasetOutcome> = (0..datasets)
        .into_par_iter()
        .map(|m| -> Result<DatasetOutcome> {
            let data = sample_dataset(dgp, rng, m as u64);
            let prep = grid.prepare(&data)?;
            let boot_rng = rng.child(StreamDomain::DatasetBootstrap, m as u64);
            let lr = build_lr_matrix_prepared(&prep, replicates, scheme, &boot_rng)?;
            let true_stats: Vec<f64> = (0..k_count)
                .map(|k| prep.sqrt_lr_at(k, &theta_star[k]))
                .collect::<Result<_>>()?;
            let mut covered = Vec::with_capacity(alphas.len());
            let mut corrected_level = Vec::with_capacity(alphas.len());
            for &alpha in alphas {
                let corr = multiplicity_correction(&lr, alpha)?;
                covered.push(
                    true_stats.iter().zip(&corr.critical_values).all(|(s, z)| s <= z),
                );
                corrected_level.push(1.0 - corr.corrected_level);
            }
            Ok(DatasetOutcome {
                covered,
                corrected_level,
                true_stats,
                rejected: lr.rejected_replicates(),
            })
        })
        .collect::<Result<_>>()?;

    // The true-world statistics double as the reference matrix.
    let mut values = vec![0.0f64; k_count * datasets];
    for (m, outcome) in outcomes.iter().enumerate() {
        for k in 0..k_count {
            values[k * datasets + m] = outcome.true_stats[k];
        }
    }
    let true_lr = LrMatrix::from_values(values, k_count, datasets)?;

    let mut rows = Vec::with_capacity(alphas.len());
    for (a, &alpha) in alphas.iter().enumerate() {
        let covered = outcomes.iter().filter(|o| o.covered[a]).count();
        let mean_level =
            outcomes.iter().map(|o| o.corrected_level[a]).sum::<f64>() / datasets as f64;
        // The reference correction needs at least one grid level j/datasets
        // at or below alpha; tiny runs simply omit it.
        let corrected_level_mc = if (alpha * datasets as f64).floor() >= 1.0 {
            Some(1.0 - mc_correction(&true_lr, alpha)?.corrected_level)
        } else {
            None
        };
        rows.push(CoverageRow {
            alpha,
            coverage_frequency: covered as f64 / datasets as f64,
            mean_corrected_level_bootstrap: mean_level,
            corrected_level_mc,
        });
    }
    let rejected_replicates = outcomes.iter().map(|o| o.rejected).sum();
    Ok(CoverageReport { datasets, rows, rejected_replicates })
}

/// One nominal level of a correction comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionRow {
    pub alpha: f64,
    /// 1 - q(alpha) from the true-world matrix.
    pub mc_corrected_level: f64,
    /// Mean of 1 - q_boot(alpha) over independent bootstrap repetitions.
    pub bootstrap_corrected_level: f64,
}

/// Outcome of [`correction_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionReport {
    /// Datasets behind the true-world matrix.
    pub datasets: usize,
    /// Independent bootstrap repetitions averaged on the bootstrap side.
    pub repetitions: usize,
    pub rows: Vec<CorrectionRow>,
    pub rejected_replicates: u64,
}

/// Compares the reference correction with the bootstrap correction.
///
/// The reference level 1 - q(alpha) comes from a true-world matrix over
/// `datasets` samples; the bootstrap level is the mean of 1 - q_boot(alpha)
/// over `repetitions` fresh datasets, each corrected from its own
/// `replicates`-draw bootstrap.
#[allow(clippy::too_many_arguments)]
pub fn correction_experiment(
    dgp: &DgpSpec,
    grid: &ModelGrid,
    alphas: &[f64],
    datasets: usize,
    replicates: usize,
    repetitions: usize,
    scheme: WeightScheme,
    rng: &RngSpec,
) -> Result<CorrectionReport> {
    if datasets == 0 || replicates == 0 || repetitions == 0 {
        return Err(Error::InvalidParameter(
            "dataset, replicate, and repetition counts must be positive".into(),
        ));
    }
    validate_alphas(alphas, &[replicates, datasets])?;
    let true_lr = true_lr_matrix(dgp, grid, datasets, rng)?;

    let per_rep: Vec<(Vec<f64>, u64)> = (0..repetitions)
        .into_par_iter()
        .map(|r| -> Result<(Vec<f64>, u64)> {
            let data = sample_dataset(dgp, rng, r as u64);
            let prep = grid.prepare(&data)?;
            let boot_rng = rng.child(StreamDomain::DatasetBootstrap, r as u64);
            let lr = build_lr_matrix_prepared(&prep, replicates, scheme, &boot_rng)?;
            let levels: Vec<f64> = alphas
                .iter()
                .map(|&alpha| {
                    multiplicity_correction(&lr, alpha).map(|c| 1.0 - c.corrected_level)
                })
                .collect::<Result<_>>()?;
            Ok((levels, lr.rejected_replicates()))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(alphas.len());
    for (a, &alpha) in alphas.iter().enumerate() {
        let mc = mc_correction(&true_lr, alpha)?;
        let mean_boot =
            per_rep.iter().map(|(levels, _)| levels[a]).sum::<f64>() / repetitions as f64;
        rows.push(CorrectionRow {
            alpha,
            mc_corrected_level: 1.0 - mc.corrected_level,
            bootstrap_corrected_level: mean_boot,
        });
    }
    let rejected_replicates = per_rep.iter().map(|(_, rej)| rej).sum();
    Ok(CorrectionReport { datasets, repetitions, rows, rejected_replicates })
}
