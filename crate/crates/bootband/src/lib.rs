//! Simultaneous likelihood-based confidence sets via the multiplier
//! bootstrap.
//!
//! Many simple parametric models are fitted to the same data: local constant
//! or local quadratic regressions at a grid of kernel centers, or location
//! models at a grid of quantile levels. Each model alone yields a
//! likelihood-ratio confidence set; the problem is calibrating all of them to
//! hold *jointly*.
//!
//! The engine reweights every model's log likelihood with one shared vector
//! of independent mean-one variance-one multipliers per replicate, refits,
//! and records the square-root likelihood-ratio statistics in a
//! models-by-replicates matrix ([`build_lr_matrix`]). Marginal bootstrap
//! quantiles give per-model critical values ([`marginal_quantile`]); the
//! multiplicity correction ([`multiplicity_correction`]) lowers the marginal
//! level until the joint exceedance frequency fits the nominal one, and
//! [`simultaneous_band`] assembles the corrected confidence band.
//!
//! Because the synthetic data-generating process ([`DgpSpec`]) has a known
//! mean function, the [`oracle`] module can sample true-world statistics,
//! giving reference corrections and effective-coverage experiments, and the
//! [`diagnostics`] module quantifies the modeling bias that makes bootstrap
//! bands conservative under misspecification.
//!
//! # Example
//!
//! ```
//! use bootband::{
//!     sample_dataset, simultaneous_band, DgpSpec, KernelSpec, ModelGrid, RngSpec, WeightScheme,
//! };
//!
//! let dgp = DgpSpec::bumps(60)?;
//! let rng = RngSpec::new(7);
//! let data = sample_dataset(&dgp, &rng, 0);
//!
//! let kernel = KernelSpec::epanechnikov(0.25)?;
//! let grid = ModelGrid::local_constant(ModelGrid::equidistant_centers(5), kernel)?;
//!
//! let band = simultaneous_band(&data, &grid, 0.10, 400, WeightScheme::Gaussian, &rng)?;
//! assert_eq!(band.points.len(), 5);
//! for point in &band.points {
//!     assert!(point.lower <= point.estimate && point.estimate <= point.upper);
//! }
//! # Ok::<(), bootband::Error>(())
//! ```

pub mod bootstrap;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod rng;

pub use bootstrap::{
    build_lr_matrix, build_lr_matrix_prepared, draw_weights, marginal_quantile,
    marginal_quantile_at_count, multiplicity_correction, simultaneous_band, union_exceedance,
    BandPoint, BandResult, CorrectionResult, LrMatrix, WeightScheme,
};
pub use data::Dataset;
pub use diagnostics::{
    bias_diagnostics, bias_diagnostics_at, bias_norm_lc, bias_norm_lc_at, bias_norm_lq,
    bias_norm_lq_at, score_vector, wilks_residual, BiasDiagnostics,
};
pub use error::{Error, Result};
pub use kernel::{KernelFamily, KernelSpec};
pub use models::{
    lc_fit, loglik, lq_fit, qt_fit, target_params, Family, FitResult, ModelGrid, ModelKind,
    Multipliers, PreparedGrid,
};
pub use oracle::{
    correction_experiment, coverage_experiment, mc_correction, sample_dataset, true_lr_matrix,
    CorrectionReport, CorrectionRow, CoverageReport, CoverageRow, DgpSpec, MeanFunction,
};
pub use rng::{RngSpec, StreamDomain};
