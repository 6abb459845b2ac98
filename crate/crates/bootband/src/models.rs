//! Model families and per-model fits.
//!
//! Three families share one interface. The two regression families maximize a
//! kernel-weighted Gaussian log likelihood, so their fits are weighted least
//! squares with an explicit curvature matrix; the quantile-location family
//! maximizes a check-loss likelihood over all observations and carries no
//! curvature. Every fit accepts per-observation multipliers so the same code
//! serves the observed data (unit multipliers) and the reweighted bootstrap
//! world.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{local_weights, KernelSpec, WEIGHT_EPS};
use crate::linalg::{inv_quad_form, ldlt_solve, SymMatrix};
use crate::oracle::DgpSpec;
use statrs::distribution::{ContinuousCDF, Normal};

/// The family of a model grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    LocalConstant,
    LocalQuadratic,
    QuantileLocation,
}

/// The likelihood kind of one concrete model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    LocalConstant,
    LocalQuadratic,
    QuantileLocation { tau: f64 },
}

/// Per-observation multipliers, or the unit vector.
#[derive(Debug, Clone, Copy)]
pub enum Multipliers<'a> {
    Unit,
    PerObservation(&'a [f64]),
}

impl<'a> Multipliers<'a> {
    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        match self {
            Multipliers::Unit => 1.0,
            Multipliers::PerObservation(u) => u[i],
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        match self {
            Multipliers::Unit => Ok(()),
            Multipliers::PerObservation(u) => {
                if u.len() == n {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch { expected: n, got: u.len() })
                }
            }
        }
    }

    fn check_nonnegative(&self) -> Result<()> {
        if let Multipliers::PerObservation(u) = self {
            if u.iter().any(|&v| v < 0.0) {
                return Err(Error::NegativeMultiplier);
            }
        }
        Ok(())
    }
}

/// Output of a single model fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Maximizer of the reweighted log likelihood. Length 1 for the local
    /// constant and quantile families, 3 (coefficients of 1, x, x^2) for the
    /// local quadratic.
    pub theta_hat: Vec<f64>,
    /// Log likelihood at `theta_hat`.
    pub max_loglik: f64,
    /// Negative Hessian of the reweighted log likelihood at the maximizer;
    /// `None` for the quantile family.
    pub curvature: Option<SymMatrix>,
}

/// Fits the local constant model: a weighted mean of the responses.
pub fn lc_fit(data: &Dataset, w: &[f64], u: Multipliers) -> Result<FitResult> {
    let n = data.n();
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    u.check_len(n)?;
    let y = data.y();
    let sw: f64 = w.iter().sum();
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for i in 0..n {
        let wu = w[i] * u.get(i);
        s0 += wu;
        s1 += wu * y[i];
    }
    guard_curvature(s0, sw)?;
    let theta = s1 / s0;
    let mut loglik = 0.0;
    for i in 0..n {
        let r = y[i] - theta;
        loglik -= 0.5 * w[i] * u.get(i) * r * r;
    }
    Ok(FitResult {
        theta_hat: vec![theta],
        max_loglik: loglik,
        curvature: Some(SymMatrix::from_diag(&[s0])),
    })
}

/// Rejects a reweighted weight mass at or below the degeneracy threshold
/// relative to the plain weight mass.
#[inline]
fn guard_curvature(s0: f64, sw: f64) -> Result<()> {
    if !s0.is_finite() || s0 <= WEIGHT_EPS * sw {
        Err(Error::NonPositiveCurvature)
    } else {
        Ok(())
    }
}

/// Centering point and scale of the internal local-quadratic basis.
///
/// Fits are solved in the basis (1, t, t^2) with t = (x - center)/scale, which
/// keeps the 3x3 system well conditioned on narrow kernel windows, and mapped
/// back to coefficients of (1, x, x^2) afterwards. The choice is a function of
/// the design and kernel weights only, so it is identical across bootstrap
/// replicates.
pub(crate) fn lq_basis(x: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    if sw <= WEIGHT_EPS {
        return Err(Error::NonPositiveCurvature);
    }
    let center = x.iter().zip(w).map(|(xi, wi)| wi * xi).sum::<f64>() / sw;
    let var = x
        .iter()
        .zip(w)
        .map(|(xi, wi)| {
            let d = xi - center;
            wi * d * d
        })
        .sum::<f64>()
        / sw;
    if var <= 0.0 {
        return Err(Error::NonPositiveCurvature);
    }
    Ok((center, var.sqrt()))
}

/// Coefficients of (1, x, x^2) from coefficients of (1, t, t^2).
pub(crate) fn lq_raw_coeffs(theta_loc: &[f64], center: f64, scale: f64) -> Vec<f64> {
    let (a, b, c) = (theta_loc[0], theta_loc[1], theta_loc[2]);
    let s = scale;
    vec![
        a - b * center / s + c * center * center / (s * s),
        b / s - 2.0 * c * center / (s * s),
        c / (s * s),
    ]
}

/// Coefficients of (1, t, t^2) from coefficients of (1, x, x^2).
pub(crate) fn lq_local_coeffs(theta_raw: &[f64], center: f64, scale: f64) -> Vec<f64> {
    let (a, b, c) = (theta_raw[0], theta_raw[1], theta_raw[2]);
    vec![
        a + b * center + c * center * center,
        scale * (b + 2.0 * c * center),
        scale * scale * c,
    ]
}

/// Row-major matrix C with (1, x, x^2)' = C (1, t, t^2)', so a local-basis
/// moment matrix S maps to the raw basis as C S C'.
pub(crate) fn lq_embed_matrix(center: f64, scale: f64) -> [f64; 9] {
    let (c, s) = (center, scale);
    [1.0, 0.0, 0.0, c, s, 0.0, c * c, 2.0 * c * s, s * s]
}

pub(crate) struct LqLocalFit {
    pub(crate) theta_loc: Vec<f64>,
    pub(crate) m_loc: SymMatrix,
}

/// Solves the local-quadratic normal equations in the local basis.
pub(crate) fn lq_solve_local(
    x: &[f64],
    y: &[f64],
    w: &[f64],
    u: Multipliers,
    center: f64,
    scale: f64,
) -> Result<LqLocalFit> {
    let mut s = [0.0f64; 5];
    let mut r = [0.0f64; 3];
    for i in 0..x.len() {
        let wu = w[i] * u.get(i);
        if wu == 0.0 {
            continue;
        }
        let t = (x[i] - center) / scale;
        let t2 = t * t;
        s[0] += wu;
        s[1] += wu * t;
        s[2] += wu * t2;
        s[3] += wu * t2 * t;
        s[4] += wu * t2 * t2;
        let wy = wu * y[i];
        r[0] += wy;
        r[1] += wy * t;
        r[2] += wy * t2;
    }
    let mut m_loc = SymMatrix::zeros(3);
    for i in 0..3 {
        for j in i..3 {
            m_loc.set(i, j, s[i + j]);
        }
    }
    let theta_loc = ldlt_solve(&m_loc, &r)?;
    Ok(LqLocalFit { theta_loc, m_loc })
}

fn lq_loglik_local(
    x: &[f64],
    y: &[f64],
    w: &[f64],
    u: Multipliers,
    center: f64,
    scale: f64,
    theta_loc: &[f64],
) -> f64 {
    let mut loglik = 0.0;
    for i in 0..x.len() {
        let wu = w[i] * u.get(i);
        if wu == 0.0 {
            continue;
        }
        let t = (x[i] - center) / scale;
        let r = y[i] - (theta_loc[0] + t * (theta_loc[1] + t * theta_loc[2]));
        loglik -= 0.5 * wu * r * r;
    }
    loglik
}

/// Fits the local quadratic model by weighted least squares on (1, x, x^2).
///
/// The reported curvature is the reweighted Gram matrix in that basis. Errors
/// with [`Error::NonPositiveCurvature`] when the reweighted system is not
/// positive definite.
pub fn lq_fit(data: &Dataset, w: &[f64], u: Multipliers) -> Result<FitResult> {
    let n = data.n();
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    u.check_len(n)?;
    let (x, y) = (data.x(), data.y());
    let (center, scale) = lq_basis(x, w)?;
    let fit = lq_solve_local(x, y, w, u, center, scale)?;
    let loglik = lq_loglik_local(x, y, w, u, center, scale, &fit.theta_loc);

    // Public curvature is the Gram matrix in the documented raw basis,
    // accumulated directly.
    let mut s = [0.0f64; 5];
    for i in 0..n {
        let wu = w[i] * u.get(i);
        if wu == 0.0 {
            continue;
        }
        let xi = x[i];
        let x2 = xi * xi;
        s[0] += wu;
        s[1] += wu * xi;
        s[2] += wu * x2;
        s[3] += wu * x2 * xi;
        s[4] += wu * x2 * x2;
    }
    let mut m_raw = SymMatrix::zeros(3);
    for i in 0..3 {
        for j in i..3 {
            m_raw.set(i, j, s[i + j]);
        }
    }

    Ok(FitResult {
        theta_hat: lq_raw_coeffs(&fit.theta_loc, center, scale),
        max_loglik: loglik,
        curvature: Some(m_raw),
    })
}

/// Fits the quantile-location model: a weighted tau-quantile of the
/// responses.
///
/// Requires nonnegative multipliers with a positive sum. The fitted value is
/// the smallest response whose cumulative multiplier weight reaches tau times
/// the total, which is the smallest minimizer of the weighted check loss.
pub fn qt_fit(data: &Dataset, tau: f64, u: Multipliers) -> Result<FitResult> {
    check_tau(tau)?;
    let n = data.n();
    u.check_len(n)?;
    u.check_nonnegative()?;
    let y = data.y();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| y[a as usize].total_cmp(&y[b as usize]));
    let theta = weighted_quantile(y, &order, tau, u)?;
    let loglik = -check_loss_sum(y, tau, theta, u);
    Ok(FitResult { theta_hat: vec![theta], max_loglik: loglik, curvature: None })
}

fn check_tau(tau: f64) -> Result<()> {
    if !tau.is_finite() || tau <= 0.0 || tau >= 1.0 {
        return Err(Error::InvalidTau(tau));
    }
    Ok(())
}

/// Smallest sorted response whose cumulative weight reaches tau times the
/// total weight. `order` must sort `y` ascending.
pub(crate) fn weighted_quantile(y: &[f64], order: &[u32], tau: f64, u: Multipliers) -> Result<f64> {
    let total: f64 = match u {
        Multipliers::Unit => y.len() as f64,
        Multipliers::PerObservation(v) => v.iter().sum(),
    };
    if total <= 0.0 || total.is_nan() {
        return Err(Error::NonPositiveCurvature);
    }
    let threshold = tau * total;
    let mut cum = 0.0;
    let mut pick = None;
    for &i in order {
        cum += u.get(i as usize);
        if cum >= threshold {
            pick = Some(y[i as usize]);
            break;
        }
    }
    // Rounding in the cumulative sum can leave the last candidate short; the
    // largest response is always a valid upper quantile.
    Ok(pick.unwrap_or(y[order[order.len() - 1] as usize]))
}

#[inline]
pub(crate) fn check_loss(tau: f64, r: f64) -> f64 {
    if r >= 0.0 {
        tau * r
    } else {
        (tau - 1.0) * r
    }
}

pub(crate) fn check_loss_sum(y: &[f64], tau: f64, theta: f64, u: Multipliers) -> f64 {
    let mut acc = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        acc += u.get(i) * check_loss(tau, yi - theta);
    }
    acc
}

/// Reweighted log likelihood of `theta` under the given model kind.
///
/// `w` must have one weight per observation for the regression families and
/// must be empty for the quantile family, which carries no kernel weights.
pub fn loglik(
    kind: ModelKind,
    theta: &[f64],
    data: &Dataset,
    w: &[f64],
    u: Multipliers,
) -> Result<f64> {
    let n = data.n();
    u.check_len(n)?;
    let (x, y) = (data.x(), data.y());
    match kind {
        ModelKind::LocalConstant => {
            expect_len(theta, 1)?;
            expect_len_w(w, n)?;
            let mut acc = 0.0;
            for i in 0..n {
                let r = y[i] - theta[0];
                acc -= 0.5 * w[i] * u.get(i) * r * r;
            }
            Ok(acc)
        }
        ModelKind::LocalQuadratic => {
            expect_len(theta, 3)?;
            expect_len_w(w, n)?;
            let mut acc = 0.0;
            for i in 0..n {
                let fit = theta[0] + x[i] * (theta[1] + x[i] * theta[2]);
                let r = y[i] - fit;
                acc -= 0.5 * w[i] * u.get(i) * r * r;
            }
            Ok(acc)
        }
        ModelKind::QuantileLocation { tau } => {
            check_tau(tau)?;
            expect_len(theta, 1)?;
            if !w.is_empty() {
                return Err(Error::DimensionMismatch { expected: 0, got: w.len() });
            }
            Ok(-check_loss_sum(y, tau, theta[0], u))
        }
    }
}

fn expect_len(theta: &[f64], p: usize) -> Result<()> {
    if theta.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: theta.len() });
    }
    Ok(())
}

fn expect_len_w(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    Ok(())
}

/// A collection of models fitted jointly: regression centers with a shared
/// kernel, or a grid of quantile levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrid {
    family: Family,
    centers: Vec<f64>,
    taus: Vec<f64>,
    kernel: Option<KernelSpec>,
}

impl ModelGrid {
    /// Local constant models at strictly increasing centers.
    pub fn local_constant(centers: Vec<f64>, kernel: KernelSpec) -> Result<Self> {
        check_increasing(&centers, "centers")?;
        Ok(ModelGrid {
            family: Family::LocalConstant,
            centers,
            taus: Vec::new(),
            kernel: Some(kernel),
        })
    }

    /// Local quadratic models at strictly increasing centers.
    pub fn local_quadratic(centers: Vec<f64>, kernel: KernelSpec) -> Result<Self> {
        check_increasing(&centers, "centers")?;
        Ok(ModelGrid {
            family: Family::LocalQuadratic,
            centers,
            taus: Vec::new(),
            kernel: Some(kernel),
        })
    }

    /// Quantile-location models at strictly increasing levels inside (0, 1).
    pub fn quantile_location(taus: Vec<f64>) -> Result<Self> {
        check_increasing(&taus, "quantile levels")?;
        if taus.iter().any(|&t| t <= 0.0 || t >= 1.0) {
            return Err(Error::InvalidGrid("quantile levels must lie inside (0, 1)".into()));
        }
        Ok(ModelGrid { family: Family::QuantileLocation, centers: Vec::new(), taus, kernel: None })
    }

    /// `k` equidistant centers spanning [0, 1].
    pub fn equidistant_centers(k: usize) -> Vec<f64> {
        if k == 1 {
            return vec![0.5];
        }
        (0..k).map(|j| j as f64 / (k - 1) as f64).collect()
    }

    /// `k` equidistant interior quantile levels j/(k+1).
    pub fn default_taus(k: usize) -> Vec<f64> {
        (1..=k).map(|j| j as f64 / (k + 1) as f64).collect()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Number of models.
    pub fn len(&self) -> usize {
        match self.family {
            Family::QuantileLocation => self.taus.len(),
            _ => self.centers.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn kernel(&self) -> Option<&KernelSpec> {
        self.kernel.as_ref()
    }

    /// Model locations: centers for regression families, levels for the
    /// quantile family.
    pub fn locations(&self) -> &[f64] {
        match self.family {
            Family::QuantileLocation => &self.taus,
            _ => &self.centers,
        }
    }

    /// Resolves kernel weights and data-world fits for every model on a
    /// dataset.
    pub fn prepare<'d>(&self, data: &'d Dataset) -> Result<PreparedGrid<'d>> {
        PreparedGrid::new(self, data)
    }
}

fn check_increasing(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidGrid(format!("empty {what}")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite {what}")));
    }
    if v.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidGrid(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// Parameter targets: the maximizers of the expected log likelihood of each
/// model under the data-generating process.
///
/// Local constant targets are kernel-weighted means of the true mean
/// function; local quadratic targets solve the weighted normal equations with
/// the true mean as response; quantile targets are the level-plus-noise
/// quantiles, defined only for a flat mean function.
pub fn target_params(dgp: &DgpSpec, grid: &ModelGrid) -> Result<Vec<Vec<f64>>> {
    let x = dgp.design();
    let f: Vec<f64> = x.iter().map(|&xi| dgp.mean().eval(xi)).collect();
    let data = Dataset::new(x, f.clone())?;
    match grid.family() {
        Family::LocalConstant => {
            let kernel = grid.kernel().expect("regression grid has a kernel");
            grid.centers()
                .iter()
                .map(|&c| {
                    let w = local_weights(c, kernel, &data)?;
                    let fit = lc_fit(&data, &w, Multipliers::Unit)?;
                    Ok(fit.theta_hat)
                })
                .collect()
        }
        Family::LocalQuadratic => {
            let kernel = grid.kernel().expect("regression grid has a kernel");
            grid.centers()
                .iter()
                .map(|&c| {
                    let w = local_weights(c, kernel, &data)?;
                    let fit = lq_fit(&data, &w, Multipliers::Unit)?;
                    Ok(fit.theta_hat)
                })
                .collect()
        }
        Family::QuantileLocation => {
            let first = f[0];
            if f.iter().any(|&v| v != first) {
                return Err(Error::NonConstantQuantileMean);
            }
            let normal = Normal::new(0.0, 1.0).expect("standard normal");
            Ok(grid
                .taus()
                .iter()
                .map(|&tau| vec![first + dgp.noise_sd() * normal.inverse_cdf(tau)])
                .collect())
        }
    }
}

/// One model of a grid with its kernel weights resolved on a dataset and the
/// data-world fit cached. Window arrays only keep observations with nonzero
/// weight.
#[derive(Debug, Clone)]
enum PreparedModel {
    LocalConstant {
        idx: Vec<u32>,
        w: Vec<f64>,
        wy: Vec<f64>,
        weight_sum: f64,
        theta: f64,
    },
    LocalQuadratic {
        idx: Vec<u32>,
        w: Vec<f64>,
        t: Vec<f64>,
        y: Vec<f64>,
        weight_sum: f64,
        center: f64,
        scale: f64,
        theta_loc: Vec<f64>,
        m_loc: SymMatrix,
    },
    Quantile {
        tau: f64,
        theta: f64,
    },
}

/// A model grid resolved on one dataset.
#[derive(Debug, Clone)]
pub struct PreparedGrid<'d> {
    data: &'d Dataset,
    family: Family,
    locations: Vec<f64>,
    models: Vec<PreparedModel>,
    /// Indices sorting the responses ascending; quantile family only.
    sort_order: Vec<u32>,
}

impl<'d> PreparedGrid<'d> {
    fn new(grid: &ModelGrid, data: &'d Dataset) -> Result<Self> {
        let (x, y) = (data.x(), data.y());
        let mut models = Vec::with_capacity(grid.len());
        let mut sort_order = Vec::new();
        match grid.family() {
            Family::LocalConstant | Family::LocalQuadratic => {
                let kernel = grid.kernel().expect("regression grid has a kernel");
                for &center in grid.centers() {
                    let w_full = local_weights(center, kernel, data)?;
                    let idx: Vec<u32> = (0..data.n() as u32)
                        .filter(|&i| w_full[i as usize] != 0.0)
                        .collect();
                    let w: Vec<f64> = idx.iter().map(|&i| w_full[i as usize]).collect();
                    let weight_sum: f64 = w.iter().sum();
                    if grid.family() == Family::LocalConstant {
                        let fit = lc_fit(data, &w_full, Multipliers::Unit)?;
                        let wy = idx
                            .iter()
                            .zip(&w)
                            .map(|(&i, wi)| wi * y[i as usize])
                            .collect();
                        models.push(PreparedModel::LocalConstant {
                            idx,
                            w,
                            wy,
                            weight_sum,
                            theta: fit.theta_hat[0],
                        });
                    } else {
                        let (bc, bs) = lq_basis(x, &w_full)?;
                        let fit = lq_solve_local(x, y, &w_full, Multipliers::Unit, bc, bs)?;
                        let t = idx.iter().map(|&i| (x[i as usize] - bc) / bs).collect();
                        let yw = idx.iter().map(|&i| y[i as usize]).collect();
                        models.push(PreparedModel::LocalQuadratic {
                            idx,
                            w,
                            t,
                            y: yw,
                            weight_sum,
                            center: bc,
                            scale: bs,
                            theta_loc: fit.theta_loc,
                            m_loc: fit.m_loc,
                        });
                    }
                }
            }
            Family::QuantileLocation => {
                let mut order: Vec<u32> = (0..data.n() as u32).collect();
                order.sort_by(|&a, &b| y[a as usize].total_cmp(&y[b as usize]));
                for &tau in grid.taus() {
                    check_tau(tau)?;
                    let theta = weighted_quantile(y, &order, tau, Multipliers::Unit)?;
                    models.push(PreparedModel::Quantile { tau, theta });
                }
                sort_order = order;
            }
        }
        Ok(PreparedGrid {
            data,
            family: grid.family(),
            locations: grid.locations().to_vec(),
            models,
            sort_order,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    /// Center (regression) or level (quantile) of model `k`.
    pub fn location(&self, k: usize) -> f64 {
        self.locations[k]
    }

    /// Data-world parameter estimate of model `k` in the public basis.
    pub fn theta_hat(&self, k: usize) -> Vec<f64> {
        match &self.models[k] {
            PreparedModel::LocalConstant { theta, .. } => vec![*theta],
            PreparedModel::LocalQuadratic { theta_loc, center, scale, .. } => {
                lq_raw_coeffs(theta_loc, *center, *scale)
            }
            PreparedModel::Quantile { theta, .. } => vec![*theta],
        }
    }

    /// Fitted value at the model location: the local estimate for the
    /// regression families, the fitted quantile for the quantile family.
    pub fn estimate(&self, k: usize) -> f64 {
        match &self.models[k] {
            PreparedModel::LocalConstant { theta, .. } => *theta,
            PreparedModel::LocalQuadratic { theta_loc, .. } => theta_loc[0],
            PreparedModel::Quantile { theta, .. } => *theta,
        }
    }

    /// Sum of the kernel weights of model `k` (regression families).
    pub fn weight_sum(&self, k: usize) -> Option<f64> {
        match &self.models[k] {
            PreparedModel::LocalConstant { weight_sum, .. }
            | PreparedModel::LocalQuadratic { weight_sum, .. } => Some(*weight_sum),
            PreparedModel::Quantile { .. } => None,
        }
    }

    /// Band halfwidth per unit critical value at the model location:
    /// 1/sqrt(sum of weights) for the local constant family and
    /// sqrt(a' M^{-1} a) with a the basis at the center for the local
    /// quadratic. `None` for the quantile family, whose bands are profiled.
    pub fn halfwidth_scale(&self, k: usize) -> Result<Option<f64>> {
        match &self.models[k] {
            PreparedModel::LocalConstant { weight_sum, .. } => Ok(Some(1.0 / weight_sum.sqrt())),
            PreparedModel::LocalQuadratic { m_loc, .. } => {
                let q = inv_quad_form(m_loc, &[1.0, 0.0, 0.0])?;
                Ok(Some(q.sqrt()))
            }
            PreparedModel::Quantile { .. } => Ok(None),
        }
    }

    /// The square-root likelihood-ratio separation between the bootstrap fit
    /// under multipliers `u` and the data-world fit of model `k`:
    /// sqrt(max(0, 2 (L(theta_boot) - L(theta_data)))) in the reweighted
    /// likelihood. Errors with [`Error::NonPositiveCurvature`] when the
    /// reweighted fit degenerates, which signals the caller to redraw.
    pub fn bootstrap_sqrt_lr(&self, k: usize, u: &[f64]) -> Result<f64> {
        let n = self.data.n();
        if u.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: u.len() });
        }
        match &self.models[k] {
            PreparedModel::LocalConstant { idx, w, wy, weight_sum, theta } => {
                let mut s0 = 0.0;
                let mut s1 = 0.0;
                for (j, &i) in idx.iter().enumerate() {
                    let ui = u[i as usize];
                    s0 += w[j] * ui;
                    s1 += wy[j] * ui;
                }
                guard_curvature(s0, *weight_sum)?;
                let d = s1 / s0 - theta;
                // 2 (L(boot) - L(data)) = s0 d^2 exactly for the quadratic loss.
                Ok(s0.sqrt() * d.abs())
            }
            PreparedModel::LocalQuadratic { idx, w, t, y, theta_loc, .. } => {
                let mut s = [0.0f64; 5];
                let mut r = [0.0f64; 3];
                for (j, &i) in idx.iter().enumerate() {
                    let wu = w[j] * u[i as usize];
                    let tj = t[j];
                    let t2 = tj * tj;
                    s[0] += wu;
                    s[1] += wu * tj;
                    s[2] += wu * t2;
                    s[3] += wu * t2 * tj;
                    s[4] += wu * t2 * t2;
                    let wyj = wu * y[j];
                    r[0] += wyj;
                    r[1] += wyj * tj;
                    r[2] += wyj * t2;
                }
                let mut m = SymMatrix::zeros(3);
                for a in 0..3 {
                    for b in a..3 {
                        m.set(a, b, s[a + b]);
                    }
                }
                let boot = ldlt_solve(&m, &r)?;
                let d: Vec<f64> = boot.iter().zip(theta_loc).map(|(a, b)| a - b).collect();
                Ok(m.quad_form(&d).max(0.0).sqrt())
            }
            PreparedModel::Quantile { tau, theta } => {
                if u.iter().any(|&v| v < 0.0) {
                    return Err(Error::NegativeMultiplier);
                }
                let y = self.data.y();
                let boot =
                    weighted_quantile(y, &self.sort_order, *tau, Multipliers::PerObservation(u))?;
                let mut at_boot = 0.0;
                let mut at_data = 0.0;
                for (i, &yi) in y.iter().enumerate() {
                    at_boot += u[i] * check_loss(*tau, yi - boot);
                    at_data += u[i] * check_loss(*tau, yi - theta);
                }
                Ok((2.0 * (at_data - at_boot)).max(0.0).sqrt())
            }
        }
    }

    /// The square-root likelihood-ratio separation between the data-world fit
    /// and a fixed parameter `theta_star` (public basis), under unit
    /// multipliers.
    pub fn sqrt_lr_at(&self, k: usize, theta_star: &[f64]) -> Result<f64> {
        match &self.models[k] {
            PreparedModel::LocalConstant { weight_sum, theta, .. } => {
                expect_len(theta_star, 1)?;
                Ok(weight_sum.sqrt() * (theta - theta_star[0]).abs())
            }
            PreparedModel::LocalQuadratic { center, scale, theta_loc, m_loc, .. } => {
                expect_len(theta_star, 3)?;
                let star_loc = lq_local_coeffs(theta_star, *center, *scale);
                let d: Vec<f64> = theta_loc.iter().zip(&star_loc).map(|(a, b)| a - b).collect();
                Ok(m_loc.quad_form(&d).max(0.0).sqrt())
            }
            PreparedModel::Quantile { tau, theta } => {
                expect_len(theta_star, 1)?;
                let y = self.data.y();
                let at_data = check_loss_sum(y, *tau, *theta, Multipliers::Unit);
                let at_star = check_loss_sum(y, *tau, theta_star[0], Multipliers::Unit);
                Ok((2.0 * (at_star - at_data)).max(0.0).sqrt())
            }
        }
    }

    /// Likelihood-based confidence interval of the quantile model `k` at
    /// critical value `z`: the set of locations whose log likelihood stays
    /// within z^2/2 of the maximum. Endpoints are found by bisection on the
    /// piecewise-linear profile.
    pub fn quantile_interval(&self, k: usize, z: f64) -> Result<(f64, f64)> {
        let PreparedModel::Quantile { tau, theta } = &self.models[k] else {
            return Err(Error::InvalidGrid("quantile_interval on a regression model".into()));
        };
        let y = self.data.y();
        let target = 0.5 * z * z;
        let at_hat = check_loss_sum(y, *tau, *theta, Multipliers::Unit);
        let drop = |v: f64| check_loss_sum(y, *tau, v, Multipliers::Unit) - at_hat;
        let spread = {
            let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (hi - lo).max(1.0)
        };
        Ok((
            profile_endpoint(*theta, -spread, target, &drop),
            profile_endpoint(*theta, spread, target, &drop),
        ))
    }
}

/// Walks from `start` in the direction of `step` until the profile drop
/// exceeds `target`, then bisects the crossing.
fn profile_endpoint(start: f64, step: f64, target: f64, drop: &dyn Fn(f64) -> f64) -> f64 {
    let mut inside = start;
    let mut delta = step;
    let mut outside = start + delta;
    // The check loss grows without bound, so doubling must eventually cross.
    while drop(outside) <= target {
        inside = outside;
        delta *= 2.0;
        outside = start + delta;
        if delta.abs() > 1e300 {
            return outside;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if drop(mid) <= target {
            inside = mid;
        } else {
            outside = mid;
        }
        if (outside - inside).abs() <= 1e-12 * (1.0 + outside.abs()) {
            break;
        }
    }
    0.5 * (inside + outside)
}
