//! Run configuration: defaults, key=value files, flag overrides.
//!
//! A run is described by a flat key=value text file, optionally overridden
//! by command-line flags. Defaults reproduce the reference experiment:
//! n=400 observations, K=71 equidistant centers, h=0.3, B=10^4 bootstrap
//! replicates, and the ten nominal levels alpha=0.05..0.50.
//!
//! Parsing is strict: unknown keys, malformed numbers, and out-of-range
//! values all fail with a [`ConfigError`] naming the offending line, and the
//! fully resolved configuration can be emitted back as a file that re-parses
//! to an identical [`RunConfig`].

use std::fmt;
use std::path::{Path, PathBuf};

use bootband::{Family, KernelSpec, MeanFunction, ModelGrid, WeightScheme};

/// A configuration problem: bad file, bad key, bad value, or an
/// inconsistent combination of settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    message: String,
}

impl ConfigError {
    /// Wraps a diagnostic message.
    pub fn new(message: impl Into<String>) -> Self {
        Self { message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Synthetic mean function selectable from a configuration file.
///
/// `flat:<level>` pins the regression function to a constant, which makes
/// every local model exact; `bumps` is the piecewise-parabolic test function
/// the experiments are built around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanKey {
    Bumps,
    Flat(f64),
}

impl MeanKey {
    /// The oracle-side mean function this key selects.
    pub fn to_mean_function(self) -> MeanFunction {
        match self {
            MeanKey::Bumps => MeanFunction::Bumps,
            MeanKey::Flat(level) => MeanFunction::Flat(level),
        }
    }

    fn emit(self) -> String {
        match self {
            MeanKey::Bumps => "bumps".into(),
            MeanKey::Flat(level) => format!("flat:{level}"),
        }
    }
}

/// Scale presets: `paper` is the full experiment, `desk` shrinks the
/// Monte-Carlo axes so a coverage run finishes in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Paper,
    Desk,
}

/// Everything a subcommand needs to run, fully resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Model family fitted at every grid point.
    pub family: Family,
    /// Number of design points.
    pub n: usize,
    /// Number of models in the grid.
    pub k: usize,
    /// Kernel bandwidth for the regression families.
    pub h: f64,
    /// Bootstrap replicates per dataset.
    pub b: usize,
    /// Monte-Carlo datasets; `None` picks the per-command default
    /// (5000 for coverage and bias, 10^4 for the correction comparison).
    pub m: Option<usize>,
    /// Bootstrap repetitions averaged by the correction comparison;
    /// `None` means 10^4 (200 under the desk preset).
    pub reps: Option<usize>,
    /// Nominal joint levels.
    pub alphas: Vec<f64>,
    /// Multiplier weight scheme.
    pub scheme: WeightScheme,
    /// Root seed for every stream in the run.
    pub seed: u64,
    /// Output directory; `None` prints CSV to stdout.
    pub out: Option<PathBuf>,
    /// Noise standard deviation of the synthetic data.
    pub noise_sd: f64,
    /// Synthetic mean function.
    pub mean: MeanKey,
    /// Explicit kernel centers; `None` means `k` equidistant ones.
    pub centers: Option<Vec<f64>>,
    /// Explicit quantile levels; `None` means the default grid of size `k`.
    pub taus: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            family: Family::LocalConstant,
            n: 400,
            k: 71,
            h: 0.3,
            b: 10_000,
            m: None,
            reps: None,
            alphas: vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50],
            scheme: WeightScheme::Gaussian,
            seed: 42,
            out: None,
            noise_sd: 1.0,
            mean: MeanKey::Bumps,
            centers: None,
            taus: None,
        }
    }
}

impl RunConfig {
    /// Applies a scale preset. `paper` restates the defaults; `desk`
    /// shrinks the Monte-Carlo axes to M=500, B=2000, 200 repetitions.
    pub fn apply_preset(&mut self, preset: Preset) {
        match preset {
            Preset::Paper => {
                self.b = 10_000;
                self.m = None;
                self.reps = None;
            }
            Preset::Desk => {
                self.b = 2000;
                self.m = Some(500);
                self.reps = Some(200);
            }
        }
    }

    /// Datasets to simulate, falling back to the command's default.
    pub fn datasets_or(&self, default: usize) -> usize {
        self.m.unwrap_or(default)
    }

    /// Correction repetitions, falling back to the full-scale default.
    pub fn repetitions(&self) -> usize {
        self.reps.unwrap_or(10_000)
    }

    /// The model grid this configuration describes.
    pub fn grid(&self) -> Result<ModelGrid, ConfigError> {
        let wrap = |e: bootband::Error| ConfigError::new(e.to_string());
        match self.family {
            Family::LocalConstant | Family::LocalQuadratic => {
                if self.taus.is_some() {
                    return Err(ConfigError::new(
                        "taus applies only to the quantile-location family",
                    ));
                }
                let centers = match &self.centers {
                    Some(c) => c.clone(),
                    None => ModelGrid::equidistant_centers(self.k),
                };
                let kernel = KernelSpec::epanechnikov(self.h).map_err(wrap)?;
                match self.family {
                    Family::LocalConstant => ModelGrid::local_constant(centers, kernel),
                    _ => ModelGrid::local_quadratic(centers, kernel),
                }
                .map_err(wrap)
            }
            Family::QuantileLocation => {
                if self.centers.is_some() {
                    return Err(ConfigError::new(
                        "centers applies only to the regression families",
                    ));
                }
                let taus = match &self.taus {
                    Some(t) => t.clone(),
                    None => ModelGrid::default_taus(self.k),
                };
                ModelGrid::quantile_location(taus).map_err(wrap)
            }
        }
    }

    /// Checks every invariant that does not depend on the subcommand.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 2 {
            return Err(ConfigError::new(format!("n must be at least 2, got {}", self.n)));
        }
        if self.k == 0 {
            return Err(ConfigError::new("k must be positive"));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(ConfigError::new(format!("h must be positive, got {}", self.h)));
        }
        if self.b == 0 {
            return Err(ConfigError::new("b must be positive"));
        }
        if self.m == Some(0) {
            return Err(ConfigError::new("m must be positive"));
        }
        if self.reps == Some(0) {
            return Err(ConfigError::new("reps must be positive"));
        }
        if self.alphas.is_empty() {
            return Err(ConfigError::new("at least one alpha is required"));
        }
        for &alpha in &self.alphas {
            if !(alpha.is_finite() && 0.0 < alpha && alpha < 1.0) {
                return Err(ConfigError::new(format!(
                    "alpha must lie strictly inside (0, 1), got {alpha}"
                )));
            }
            if (alpha * self.b as f64).floor() < 1.0 {
                return Err(ConfigError::new(format!(
                    "alpha={alpha} is below the 1/{} resolution of b replicates",
                    self.b
                )));
            }
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(ConfigError::new(format!(
                "noise_sd must be a nonnegative number, got {}",
                self.noise_sd
            )));
        }
        if let MeanKey::Flat(level) = self.mean {
            if !level.is_finite() {
                return Err(ConfigError::new(format!("flat mean level must be finite, got {level}")));
            }
        }
        if let Some(centers) = &self.centers {
            if centers.len() != self.k {
                return Err(ConfigError::new(format!(
                    "centers lists {} values but k={}",
                    centers.len(),
                    self.k
                )));
            }
        }
        if let Some(taus) = &self.taus {
            if taus.len() != self.k {
                return Err(ConfigError::new(format!(
                    "taus lists {} values but k={}",
                    taus.len(),
                    self.k
                )));
            }
        }
        if self.family == Family::QuantileLocation {
            if self.scheme == WeightScheme::Gaussian {
                return Err(ConfigError::new(
                    "quantile-location runs need a nonnegative weight scheme (exp or bern)",
                ));
            }
            if !matches!(self.mean, MeanKey::Flat(_)) {
                return Err(ConfigError::new(
                    "quantile-location targets need a constant mean; set f = flat or flat:<level>",
                ));
            }
        }
        // Surface grid construction problems (bad centers, bad taus,
        // family/grid mismatches) at validation time.
        self.grid()?;
        Ok(())
    }

    /// Renders the configuration as a key=value file that parses back to
    /// an identical `RunConfig`.
    pub fn emit(&self) -> String {
        let mut lines = Vec::new();
        lines.push(format!("family = {}", family_key(self.family)));
        lines.push(format!("n = {}", self.n));
        lines.push(format!("k = {}", self.k));
        lines.push(format!("h = {}", self.h));
        lines.push(format!("b = {}", self.b));
        if let Some(m) = self.m {
            lines.push(format!("m = {m}"));
        }
        if let Some(reps) = self.reps {
            lines.push(format!("reps = {reps}"));
        }
        lines.push(format!("alphas = {}", join_floats(&self.alphas)));
        lines.push(format!("scheme = {}", scheme_key(self.scheme)));
        lines.push(format!("seed = {}", self.seed));
        if let Some(out) = &self.out {
            lines.push(format!("out = {}", out.display()));
        }
        lines.push(format!("noise_sd = {}", self.noise_sd));
        lines.push(format!("f = {}", self.mean.emit()));
        if let Some(centers) = &self.centers {
            lines.push(format!("centers = {}", join_floats(centers)));
        }
        if let Some(taus) = &self.taus {
            lines.push(format!("taus = {}", join_floats(taus)));
        }
        lines.push(String::new());
        lines.join("\n")
    }

    /// Applies every `key = value` line of a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(format!("line {lineno}: expected key = value, got {line:?}"))
            })?;
            let key = key.trim();
            let value = value.trim();
            self.apply_key(key, value)
                .map_err(|e| ConfigError::new(format!("line {lineno}, key {key:?}: {}", e.message)))?;
        }
        Ok(())
    }

    fn apply_key(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "family" => self.family = parse_family(value)?,
            "n" => self.n = parse_count(value)?,
            "k" => self.k = parse_count(value)?,
            "h" => self.h = parse_float(value)?,
            "b" => self.b = parse_count(value)?,
            "m" => self.m = Some(parse_count(value)?),
            "reps" => self.reps = Some(parse_count(value)?),
            "alphas" => self.alphas = parse_float_list(value)?,
            "scheme" => self.scheme = parse_scheme(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| ConfigError::new(format!("expected an unsigned integer, got {value:?}")))?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "noise_sd" => self.noise_sd = parse_float(value)?,
            "f" => self.mean = parse_mean(value)?,
            "centers" => self.centers = Some(parse_float_list(value)?),
            "taus" => self.taus = Some(parse_float_list(value)?),
            _ => return Err(ConfigError::new("unknown key".to_string())),
        }
        Ok(())
    }
}

/// Reads a config file and resolves it against the defaults.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    let mut config = RunConfig::default();
    config.apply_text(&text)?;
    config.validate()?;
    Ok(config)
}

/// Parses `lc`, `lq`, or `qt`.
pub fn parse_family(value: &str) -> Result<Family, ConfigError> {
    match value {
        "lc" => Ok(Family::LocalConstant),
        "lq" => Ok(Family::LocalQuadratic),
        "qt" => Ok(Family::QuantileLocation),
        _ => Err(ConfigError::new(format!("expected lc, lq, or qt, got {value:?}"))),
    }
}

/// Parses `gauss`, `exp`, or `bern`.
pub fn parse_scheme(value: &str) -> Result<WeightScheme, ConfigError> {
    match value {
        "gauss" => Ok(WeightScheme::Gaussian),
        "exp" => Ok(WeightScheme::Exponential),
        "bern" => Ok(WeightScheme::TwoPointBernoulli),
        _ => Err(ConfigError::new(format!("expected gauss, exp, or bern, got {value:?}"))),
    }
}

/// Parses `paper` or `desk`.
pub fn parse_preset(value: &str) -> Result<Preset, ConfigError> {
    match value {
        "paper" => Ok(Preset::Paper),
        "desk" => Ok(Preset::Desk),
        _ => Err(ConfigError::new(format!("expected paper or desk, got {value:?}"))),
    }
}

fn parse_mean(value: &str) -> Result<MeanKey, ConfigError> {
    if value == "bumps" {
        return Ok(MeanKey::Bumps);
    }
    if value == "flat" {
        return Ok(MeanKey::Flat(5.0));
    }
    if let Some(level) = value.strip_prefix("flat:") {
        return Ok(MeanKey::Flat(parse_float(level)?));
    }
    Err(ConfigError::new(format!("expected bumps, flat, or flat:<level>, got {value:?}")))
}

fn parse_count(value: &str) -> Result<usize, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::new(format!("expected a positive integer, got {value:?}")))
}

fn parse_float(value: &str) -> Result<f64, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::new(format!("expected a number, got {value:?}")))
}

fn parse_float_list(value: &str) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|piece| parse_float(piece.trim())).collect()
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn family_key(family: Family) -> &'static str {
    match family {
        Family::LocalConstant => "lc",
        Family::LocalQuadratic => "lq",
        Family::QuantileLocation => "qt",
    }
}

fn scheme_key(scheme: WeightScheme) -> &'static str {
    match scheme {
        WeightScheme::Gaussian => "gauss",
        WeightScheme::Exponential => "exp",
        WeightScheme::TwoPointBernoulli => "bern",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_all_defaults() {
        let mut config = RunConfig::default();
        config.apply_text("").unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.n, 400);
        assert_eq!(config.k, 71);
        assert_eq!(config.b, 10_000);
        assert_eq!(config.seed, 42);
        assert_eq!(config.alphas.len(), 10);
        assert_eq!(config.alphas[0], 0.05);
        assert_eq!(config.alphas[9], 0.50);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let mut config = RunConfig::default();
        config
            .apply_text("# a comment\n\n  n = 100  \n# another\nseed = 7\n")
            .unwrap();
        assert_eq!(config.n, 100);
        assert_eq!(config.seed, 7);
    }

    #[test]
    fn round_trip_emit_then_parse_is_identity() {
        let mut config = RunConfig {
            family: Family::QuantileLocation,
            n: 150,
            k: 9,
            h: 0.12,
            b: 500,
            m: Some(250),
            reps: Some(40),
            alphas: vec![0.05, 0.25],
            scheme: WeightScheme::Exponential,
            seed: 99,
            out: Some(PathBuf::from("results/run1")),
            noise_sd: 0.5,
            mean: MeanKey::Flat(2.5),
            centers: None,
            taus: Some(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]),
        };
        config.validate().unwrap();
        let mut reparsed = RunConfig::default();
        reparsed.apply_text(&config.emit()).unwrap();
        assert_eq!(reparsed, config);

        // The default configuration round-trips too.
        config = RunConfig::default();
        let mut again = RunConfig::default();
        again.apply_text(&config.emit()).unwrap();
        assert_eq!(again, config);
    }

    #[test]
    fn out_of_range_alpha_is_rejected() {
        let mut config = RunConfig::default();
        config.apply_text("alphas = 0.05,1.5").unwrap();
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("1.5"), "{err}");
    }

    #[test]
    fn alpha_below_replicate_resolution_is_rejected() {
        let config = RunConfig { b: 10, alphas: vec![0.05], ..RunConfig::default() };
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("resolution"), "{err}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let mut config = RunConfig::default();
        let err = config.apply_text("bandwidth = 0.3").unwrap_err();
        assert!(err.to_string().contains("bandwidth"), "{err}");
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let mut config = RunConfig::default();
        let err = config.apply_text("n = 100\nnot a key value\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn gaussian_weights_with_quantile_family_are_rejected() {
        let mut config = RunConfig::default();
        config.apply_text("family = qt\nf = flat").unwrap();
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("nonnegative"), "{err}");
        config.apply_text("scheme = exp").unwrap();
        config.validate().unwrap();
    }

    #[test]
    fn quantile_family_requires_a_flat_mean() {
        let mut config = RunConfig::default();
        config.apply_text("family = qt\nscheme = exp").unwrap();
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("flat"), "{err}");
        config.apply_text("f = flat:2.5").unwrap();
        config.validate().unwrap();
    }

    #[test]
    fn centers_length_must_match_k() {
        let mut config = RunConfig::default();
        config.apply_text("k = 3\ncenters = 0.2,0.8").unwrap();
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("centers"), "{err}");
        config.apply_text("centers = 0.2,0.5,0.8").unwrap();
        config.validate().unwrap();
    }

    #[test]
    fn taus_on_a_regression_family_are_rejected() {
        let mut config = RunConfig::default();
        config.apply_text("k = 2\ntaus = 0.25,0.75").unwrap();
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("quantile"), "{err}");
    }

    #[test]
    fn desk_preset_shrinks_the_monte_carlo_axes() {
        let mut config = RunConfig::default();
        config.apply_preset(Preset::Desk);
        assert_eq!(config.b, 2000);
        assert_eq!(config.m, Some(500));
        assert_eq!(config.reps, Some(200));
        assert_eq!(config.n, 400);
        assert_eq!(config.k, 71);

        config.apply_preset(Preset::Paper);
        assert_eq!(config, RunConfig::default());
    }

    #[test]
    fn grid_reflects_family_and_size() {
        let config = RunConfig { k: 5, ..RunConfig::default() };
        let grid = config.grid().unwrap();
        assert_eq!(grid.family(), Family::LocalConstant);
        assert_eq!(grid.len(), 5);

        let config = RunConfig {
            family: Family::QuantileLocation,
            scheme: WeightScheme::Exponential,
            k: 4,
            ..RunConfig::default()
        };
        let grid = config.grid().unwrap();
        assert_eq!(grid.family(), Family::QuantileLocation);
        assert_eq!(grid.taus().len(), 4);
    }
}
