//! The four experiment commands, each mapping a [`RunConfig`] to a CSV table.
//!
//! Commands validate the configuration, run the corresponding library
//! experiment, and lay the result out under a stable header. All randomness
//! flows from the configured seed, so a command is a pure function of its
//! configuration.

use bootband::{
    bias_norm_lc, bias_norm_lq, correction_experiment, coverage_experiment, mc_correction,
    sample_dataset, simultaneous_band, target_params, true_lr_matrix, DgpSpec, Family, ModelGrid,
    RngSpec,
};

use crate::config::{ConfigError, RunConfig};
use crate::csvout::CsvTable;
use crate::CliError;

/// Datasets simulated by `coverage` and `bias` when `m` is not set.
const DEFAULT_DATASETS: usize = 5000;
/// Datasets simulated by `correction` when `m` is not set.
const DEFAULT_CORRECTION_DATASETS: usize = 10_000;

fn problem(config: &RunConfig) -> Result<(DgpSpec, ModelGrid), CliError> {
    let grid = config.grid()?;
    let dgp = DgpSpec::new(config.n, config.mean.to_mean_function(), config.noise_sd)
        .map_err(|e| ConfigError::new(e.to_string()))?;
    Ok((dgp, grid))
}

/// The scalar summary of each model's target: the parameter itself for the
/// local-constant and quantile families, the fitted value at the center for
/// the local-quadratic family.
fn target_scalars(dgp: &DgpSpec, grid: &ModelGrid) -> bootband::Result<Vec<f64>> {
    let theta_star = target_params(dgp, grid)?;
    Ok(match grid.family() {
        Family::LocalQuadratic => grid
            .centers()
            .iter()
            .zip(&theta_star)
            .map(|(&c, t)| t[0] + t[1] * c + t[2] * c * c)
            .collect(),
        _ => theta_star.iter().map(|t| t[0]).collect(),
    })
}

/// Builds the simultaneous band for one sampled dataset.
///
/// The dataset is stream 0 of the configured seed and the band is run at
/// the first nominal level in `alphas`. Columns: `center`, `theta_hat`,
/// `lower`, `upper`, `critical_value`, `target_theta_star`.
pub fn cmd_band(config: &RunConfig) -> Result<CsvTable, CliError> {
    config.validate()?;
    let (dgp, grid) = problem(config)?;
    let rng = RngSpec::new(config.seed);
    let data = sample_dataset(&dgp, &rng, 0);
    let band = simultaneous_band(&data, &grid, config.alphas[0], config.b, config.scheme, &rng)?;
    let targets = target_scalars(&dgp, &grid)?;

    let mut table = CsvTable::new([
        "center",
        "theta_hat",
        "lower",
        "upper",
        "critical_value",
        "target_theta_star",
    ]);
    for (point, &target) in band.points.iter().zip(&targets) {
        table.push_row(vec![
            point.location,
            point.estimate,
            point.lower,
            point.upper,
            point.critical_value,
            target,
        ]);
    }
    Ok(table)
}

/// Runs the effective-coverage experiment.
///
/// Columns: `alpha`, `coverage_frequency`, `mean_corrected_level_bootstrap`.
pub fn cmd_coverage(config: &RunConfig) -> Result<CsvTable, CliError> {
    config.validate()?;
    let (dgp, grid) = problem(config)?;
    let datasets = config.datasets_or(DEFAULT_DATASETS);
    let report = coverage_experiment(
        &dgp,
        &grid,
        &config.alphas,
        datasets,
        config.b,
        config.scheme,
        &RngSpec::new(config.seed),
    )?;

    let mut table =
        CsvTable::new(["alpha", "coverage_frequency", "mean_corrected_level_bootstrap"]);
    for row in &report.rows {
        table.push_row(vec![
            row.alpha,
            row.coverage_frequency,
            row.mean_corrected_level_bootstrap,
        ]);
    }
    Ok(table)
}

/// Compares the true-world and bootstrap multiplicity corrections.
///
/// Columns: `alpha`, `mc_corrected_level`, `bootstrap_corrected_level`.
pub fn cmd_correction(config: &RunConfig) -> Result<CsvTable, CliError> {
    config.validate()?;
    let (dgp, grid) = problem(config)?;
    let datasets = config.datasets_or(DEFAULT_CORRECTION_DATASETS);
    let report = correction_experiment(
        &dgp,
        &grid,
        &config.alphas,
        datasets,
        config.b,
        config.repetitions(),
        config.scheme,
        &RngSpec::new(config.seed),
    )?;

    let mut table = CsvTable::new(["alpha", "mc_corrected_level", "bootstrap_corrected_level"]);
    for row in &report.rows {
        table.push_row(vec![row.alpha, row.mc_corrected_level, row.bootstrap_corrected_level]);
    }
    Ok(table)
}

/// Computes per-center modeling-bias norms next to paired band widths.
///
/// The bootstrap width comes from the band on dataset 0; the reference
/// width applies the true-world critical values to the same fit, so the
/// two columns differ only through the calibration. Columns: `center`,
/// `bias_norm`, `band_width_bootstrap`, `band_width_mc`.
pub fn cmd_bias(config: &RunConfig) -> Result<CsvTable, CliError> {
    config.validate()?;
    if config.family == Family::QuantileLocation {
        return Err(ConfigError::new(
            "bias diagnostics apply to the regression families (lc, lq)",
        )
        .into());
    }
    let (dgp, grid) = problem(config)?;
    let alpha = config.alphas[0];
    let rng = RngSpec::new(config.seed);

    let data = sample_dataset(&dgp, &rng, 0);
    let band = simultaneous_band(&data, &grid, alpha, config.b, config.scheme, &rng)?;

    let true_lr = true_lr_matrix(&dgp, &grid, config.datasets_or(DEFAULT_DATASETS), &rng)?;
    let reference = mc_correction(&true_lr, alpha)?;
    let prep = grid.prepare(&data)?;

    let mut table = CsvTable::new(["center", "bias_norm", "band_width_bootstrap", "band_width_mc"]);
    for (k, point) in band.points.iter().enumerate() {
        let bias = match config.family {
            Family::LocalConstant => bias_norm_lc(&dgp, &grid, k)?,
            _ => bias_norm_lq(&dgp, &grid, k)?,
        };
        let scale = prep
            .halfwidth_scale(k)?
            .expect("regression families have a halfwidth scale");
        let width_mc = 2.0 * reference.critical_values[k] * scale;
        table.push_row(vec![point.location, bias, point.upper - point.lower, width_mc]);
    }
    Ok(table)
}
