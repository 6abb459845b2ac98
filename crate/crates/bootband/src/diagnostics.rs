//! Modeling-bias and information diagnostics.
//!
//! For each local model three symmetric matrices summarize how the working
//! family sits relative to the truth: the curvature D2, the expected squared
//! score H2, and the squared mean score B2. Their ratio, the bias norm
//! |H^-1 B^2 H^-1| in spectral norm, is zero under correct specification and
//! grows where the local model misses the true mean; it is the quantity that
//! widens bootstrap bands relative to their ideal counterparts.
//!
//! Local quadratic diagnostics are computed in the centered-scaled basis of
//! the fitting path and mapped to the raw (1, x, x^2) basis for reporting;
//! the bias norm is basis invariant, so the better conditioned basis is used
//! for the eigensolve.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::local_weights;
use crate::linalg::{inv_sqrt, min_eigenvalue, spectral_norm, SymMatrix};
use crate::models::{
    lq_basis, lq_embed_matrix, lq_local_coeffs, lq_solve_local, target_params, Family, ModelKind,
    ModelGrid, Multipliers,
};
use crate::oracle::DgpSpec;

/// Relative eigenvalue floor below which an information matrix counts as
/// singular.
const INFO_RTOL: f64 = 1e-10;

/// Information and bias matrices of one local model, in the raw coefficient
/// basis, together with the scalar bias norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasDiagnostics {
    /// Model location (kernel center).
    pub location: f64,
    /// Curvature: sum of w for the local constant family, the weighted Gram
    /// matrix for the local quadratic one.
    pub d2: SymMatrix,
    /// Expected squared score, per observation: w^2 ((f - prediction)^2 +
    /// noise variance) times the basis outer product.
    pub h2: SymMatrix,
    /// Squared mean score: w^2 (f - prediction)^2 times the basis outer
    /// product.
    pub b2: SymMatrix,
    /// Spectral norm of H^-1 B^2 H^-1, in [0, 1].
    pub bias_norm: f64,
}

fn grid_center(grid: &ModelGrid, k: usize) -> Result<f64> {
    grid.centers().get(k).copied().ok_or_else(|| {
        Error::InvalidParameter(format!(
            "model index {k} out of range for a grid of {}",
            grid.len()
        ))
    })
}

fn noiseless_dataset(dgp: &DgpSpec) -> Dataset {
    Dataset::new(dgp.design(), dgp.mean_values())
        .expect("mean function is finite on a valid design")
}

/// Diagnostics of model `k` with the target taken from the known mean
/// function.
pub fn bias_diagnostics(dgp: &DgpSpec, grid: &ModelGrid, k: usize) -> Result<BiasDiagnostics> {
    let theta_star = target_params(dgp, grid)?;
    let star = theta_star.get(k).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "model index {k} out of range for a grid of {}",
            grid.len()
        ))
    })?;
    bias_diagnostics_at(dgp, grid, k, star)
}

/// Diagnostics of model `k` against a caller-supplied target parameter
/// (raw-basis coefficients for the local quadratic family).
pub fn bias_diagnostics_at(
    dgp: &DgpSpec,
    grid: &ModelGrid,
    k: usize,
    theta_star: &[f64],
) -> Result<BiasDiagnostics> {
    match grid.family() {
        Family::LocalConstant => lc_diagnostics(dgp, grid, k, theta_star),
        Family::LocalQuadratic => lq_diagnostics(dgp, grid, k, theta_star),
        Family::QuantileLocation => Err(Error::InvalidParameter(
            "bias diagnostics need a quadratic-loss family".into(),
        )),
    }
}

fn lc_diagnostics(
    dgp: &DgpSpec,
    grid: &ModelGrid,
    k: usize,
    theta_star: &[f64],
) -> Result<BiasDiagnostics> {
    if theta_star.len() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: theta_star.len() });
    }
    let center = grid_center(grid, k)?;
    let kernel = grid.kernel().expect("regression grids carry a kernel");
    let data = noiseless_dataset(dgp);
    let w = local_weights(center, kernel, &data)?;
    let f = data.y();
    let sigma2 = dgp.noise_sd() * dgp.noise_sd();
    let mut sw = 0.0;
    let mut sw2 = 0.0;
    let mut a = 0.0;
    for i in 0..data.n() {
        let wi = w[i];
        if wi == 0.0 {
            continue;
        }
        let d = f[i] - theta_star[0];
        sw += wi;
        sw2 += wi * wi;
        a += wi * wi * d * d;
    }
    let noise = sigma2 * sw2;
    Ok(BiasDiagnostics {
        location: center,
        d2: SymMatrix::from_diag(&[sw]),
        h2: SymMatrix::from_diag(&[a + noise]),
        b2: SymMatrix::from_diag(&[a]),
        bias_norm: lc_bias_ratio(a, noise),
    })
}

/// The scalar ratio B2 / (B2 + noise * sum w^2), kept cancellation free; by
/// convention 0 when both terms vanish.
pub(crate) fn lc_bias_ratio(bias_mass: f64, noise_mass: f64) -> f64 {
    if bias_mass == 0.0 {
        0.0
    } else {
        bias_mass / (bias_mass + noise_mass)
    }
}

fn lq_diagnostics(
    dgp: &DgpSpec,
    grid: &ModelGrid,
    k: usize,
    theta_star: &[f64],
) -> Result<BiasDiagnostics> {
    if theta_star.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: theta_star.len() });
    }
    let center = grid_center(grid, k)?;
    let kernel = grid.kernel().expect("regression grids carry a kernel");
    let data = noiseless_dataset(dgp);
    let w = local_weights(center, kernel, &data)?;
    let (x, f) = (data.x(), data.y());
    let (bc, bs) = lq_basis(x, &w)?;
    let star_loc = lq_local_coeffs(theta_star, bc, bs);
    let sigma2 = dgp.noise_sd() * dgp.noise_sd();

    let mut d2 = SymMatrix::zeros(3);
    let mut h2 = SymMatrix::zeros(3);
    let mut b2 = SymMatrix::zeros(3);
    for i in 0..data.n() {
        let wi = w[i];
        if wi == 0.0 {
            continue;
        }
        let t = (x[i] - bc) / bs;
        let psi = [1.0, t, t * t];
        let pred = star_loc[0] + t * (star_loc[1] + t * star_loc[2]);
        let df = f[i] - pred;
        let bias_term = wi * wi * df * df;
        let score_term = bias_term + wi * wi * sigma2;
        for r in 0..3 {
            for c in r..3 {
                let outer = psi[r] * psi[c];
                d2.set(r, c, d2.get(r, c) + wi * outer);
                h2.set(r, c, h2.get(r, c) + score_term * outer);
                b2.set(r, c, b2.get(r, c) + bias_term * outer);
            }
        }
    }
    let h_inv_sqrt = inv_sqrt(&h2, INFO_RTOL).ok_or(Error::SingularH2)?;
    let sandwich = b2.congruence(h_inv_sqrt.data());
    let bias_norm = spectral_norm(&sandwich).clamp(0.0, 1.0);

    let embed = lq_embed_matrix(bc, bs);
    Ok(BiasDiagnostics {
        location: center,
        d2: d2.congruence(&embed),
        h2: h2.congruence(&embed),
        b2: b2.congruence(&embed),
        bias_norm,
    })
}

/// Bias norm of local-constant model `k`: the ratio
/// sum w^2 (f - theta*)^2 / sum w^2 ((f - theta*)^2 + noise variance).
pub fn bias_norm_lc(dgp: &DgpSpec, grid: &ModelGrid, k: usize) -> Result<f64> {
    require_family(grid, Family::LocalConstant)?;
    Ok(bias_diagnostics(dgp, grid, k)?.bias_norm)
}

/// As [`bias_norm_lc`] with a caller-supplied target value.
pub fn bias_norm_lc_at(dgp: &DgpSpec, grid: &ModelGrid, k: usize, theta_star: f64) -> Result<f64> {
    require_family(grid, Family::LocalConstant)?;
    Ok(bias_diagnostics_at(dgp, grid, k, &[theta_star])?.bias_norm)
}

/// Bias norm of local-quadratic model `k`: the spectral norm of
/// H^-1 B^2 H^-1.
pub fn bias_norm_lq(dgp: &DgpSpec, grid: &ModelGrid, k: usize) -> Result<f64> {
    require_family(grid, Family::LocalQuadratic)?;
    Ok(bias_diagnostics(dgp, grid, k)?.bias_norm)
}

/// As [`bias_norm_lq`] with a caller-supplied raw-basis target.
pub fn bias_norm_lq_at(
    dgp: &DgpSpec,
    grid: &ModelGrid,
    k: usize,
    theta_star: &[f64],
) -> Result<f64> {
    require_family(grid, Family::LocalQuadratic)?;
    Ok(bias_diagnostics_at(dgp, grid, k, theta_star)?.bias_norm)
}

fn require_family(grid: &ModelGrid, family: Family) -> Result<()> {
    if grid.family() != family {
        return Err(Error::InvalidParameter(format!(
            "operation defined for the {family:?} family, grid holds {:?}",
            grid.family()
        )));
    }
    Ok(())
}

/// The normalized score D^-1 grad L(theta*) at unit multipliers, in the raw
/// coefficient basis (D^-1 is the symmetric inverse square root of the
/// curvature).
pub fn score_vector(
    kind: ModelKind,
    data: &Dataset,
    w: &[f64],
    theta_star: &[f64],
) -> Result<Vec<f64>> {
    if matches!(kind, ModelKind::QuantileLocation { .. }) {
        return Err(Error::InvalidParameter(
            "score vectors need a quadratic-loss family".into(),
        ));
    }
    let n = data.n();
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    let (x, y) = (data.x(), data.y());
    match kind {
        ModelKind::LocalConstant => {
            if theta_star.len() != 1 {
                return Err(Error::DimensionMismatch { expected: 1, got: theta_star.len() });
            }
            let sw: f64 = w.iter().sum();
            if sw <= 0.0 || sw.is_nan() {
                return Err(Error::NonPositiveCurvature);
            }
            let grad: f64 = y
                .iter()
                .zip(w)
                .map(|(yi, wi)| wi * (yi - theta_star[0]))
                .sum();
            Ok(vec![grad / sw.sqrt()])
        }
        ModelKind::LocalQuadratic => {
            if theta_star.len() != 3 {
                return Err(Error::DimensionMismatch { expected: 3, got: theta_star.len() });
            }
            let mut gram = SymMatrix::zeros(3);
            let mut grad = [0.0f64; 3];
            for i in 0..n {
                let wi = w[i];
                if wi == 0.0 {
                    continue;
                }
                let psi = [1.0, x[i], x[i] * x[i]];
                let r = y[i] - (theta_star[0] + x[i] * (theta_star[1] + x[i] * theta_star[2]));
                for a in 0..3 {
                    grad[a] += wi * r * psi[a];
                    for b in a..3 {
                        gram.set(a, b, gram.get(a, b) + wi * psi[a] * psi[b]);
                    }
                }
            }
            let d_inv = inv_sqrt(&gram, INFO_RTOL).ok_or(Error::NonPositiveCurvature)?;
            Ok(d_inv.mul_vec(&grad))
        }
        ModelKind::QuantileLocation { .. } => Err(Error::InvalidParameter(
            "score vectors need a quadratic-loss family".into(),
        )),
    }
}

/// Discrepancy between the square-root likelihood-ratio statistic at
/// `theta_star` and the normalized score norm. Exactly zero for quadratic
/// losses in exact arithmetic; evaluated in a centered basis so the residual
/// stays at rounding level.
pub fn wilks_residual(
    kind: ModelKind,
    data: &Dataset,
    w: &[f64],
    theta_star: &[f64],
) -> Result<f64> {
    if matches!(kind, ModelKind::QuantileLocation { .. }) {
        return Err(Error::InvalidParameter(
            "the Wilks identity needs a quadratic-loss family".into(),
        ));
    }
    let n = data.n();
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    let (x, y) = (data.x(), data.y());
    match kind {
        ModelKind::LocalConstant => {
            if theta_star.len() != 1 {
                return Err(Error::DimensionMismatch { expected: 1, got: theta_star.len() });
            }
            let sw: f64 = w.iter().sum();
            if sw <= 0.0 || sw.is_nan() {
                return Err(Error::NonPositiveCurvature);
            }
            let swy: f64 = y.iter().zip(w).map(|(yi, wi)| wi * yi).sum();
            let theta_hat = swy / sw;
            let lhs = sw.sqrt() * (theta_hat - theta_star[0]).abs();
            let grad: f64 = y
                .iter()
                .zip(w)
                .map(|(yi, wi)| wi * (yi - theta_star[0]))
                .sum();
            let rhs = (grad / sw.sqrt()).abs();
            Ok((lhs - rhs).abs())
        }
        ModelKind::LocalQuadratic => {
            if theta_star.len() != 3 {
                return Err(Error::DimensionMismatch { expected: 3, got: theta_star.len() });
            }
            let (bc, bs) = lq_basis(x, w)?;
            let fit = lq_solve_local(x, y, w, Multipliers::Unit, bc, bs)?;
            let star_loc = lq_local_coeffs(theta_star, bc, bs);
            let delta: Vec<f64> =
                fit.theta_loc.iter().zip(&star_loc).map(|(a, b)| a - b).collect();
            let lhs = fit.m_loc.quad_form(&delta).max(0.0).sqrt();
            let mut grad = [0.0f64; 3];
            for i in 0..n {
                let wi = w[i];
                if wi == 0.0 {
                    continue;
                }
                let t = (x[i] - bc) / bs;
                let r = y[i] - (star_loc[0] + t * (star_loc[1] + t * star_loc[2]));
                grad[0] += wi * r;
                grad[1] += wi * r * t;
                grad[2] += wi * r * t * t;
            }
            let d_inv = inv_sqrt(&fit.m_loc, INFO_RTOL).ok_or(Error::NonPositiveCurvature)?;
            let xi = d_inv.mul_vec(&grad);
            let rhs = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            Ok((lhs - rhs).abs())
        }
        ModelKind::QuantileLocation { .. } => Err(Error::InvalidParameter(
            "the Wilks identity needs a quadratic-loss family".into(),
        )),
    }
}

/// Smallest eigenvalue of H2 - B2; nonnegative up to rounding by
/// construction.
pub fn psd_gap(diag: &BiasDiagnostics) -> f64 {
    min_eigenvalue(&diag.h2.sub(&diag.b2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::models::{lc_fit, lq_fit, loglik};
    use crate::oracle::MeanFunction;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn lc_grid(h: f64, k: usize) -> ModelGrid {
        let kernel = KernelSpec::epanechnikov(h).unwrap();
        ModelGrid::local_constant(ModelGrid::equidistant_centers(k), kernel).unwrap()
    }

    fn lq_grid(h: f64, k: usize) -> ModelGrid {
        let kernel = KernelSpec::epanechnikov(h).unwrap();
        ModelGrid::local_quadratic(ModelGrid::equidistant_centers(k), kernel).unwrap()
    }

    #[test]
    fn flat_truth_has_no_bias() {
        let dgp = DgpSpec::flat(120).unwrap();
        let lc = lc_grid(0.3, 7);
        let lq = lq_grid(0.3, 7);
        for k in 0..7 {
            assert!(bias_norm_lc(&dgp, &lc, k).unwrap() < 1e-16);
            assert!(bias_norm_lq(&dgp, &lq, k).unwrap() < 1e-16);
        }
    }

    #[test]
    fn constant_target_shift_gives_the_closed_ratio() {
        let dgp = DgpSpec::flat(90).unwrap();
        let grid = lc_grid(0.25, 5);
        for c in [0.5f64, 1.0, 2.0] {
            for k in 0..5 {
                let got = bias_norm_lc_at(&dgp, &grid, k, 5.0 - c).unwrap();
                let expect = c * c / (c * c + 1.0);
                assert_abs_diff_eq!(got, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zero_noise_with_a_shifted_target_saturates() {
        let dgp = DgpSpec::new(50, MeanFunction::Flat(5.0), 0.0).unwrap();
        let grid = lc_grid(0.4, 3);
        assert_eq!(bias_norm_lc_at(&dgp, &grid, 1, 4.0).unwrap(), 1.0);
        assert_eq!(bias_norm_lc_at(&dgp, &grid, 1, 5.0).unwrap(), 0.0);
    }

    // The displayed form of the local-constant bias: 1 - (1 + ratio)^-1 with
    // ratio = sum w^2 (f - theta*)^2 / (sigma^2 sum w^2), summed in reverse
    // order for an independent rounding path.
    fn lc_bias_by_display_formula(
        dgp: &DgpSpec,
        grid: &ModelGrid,
        k: usize,
        theta_star: f64,
    ) -> f64 {
        let data = Dataset::new(dgp.design(), dgp.mean_values()).unwrap();
        let w = local_weights(grid.centers()[k], grid.kernel().unwrap(), &data).unwrap();
        let sigma2 = dgp.noise_sd() * dgp.noise_sd();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in (0..data.n()).rev() {
            let d = data.y()[i] - theta_star;
            num += w[i] * w[i] * d * d;
            den += w[i] * w[i];
        }
        if num == 0.0 {
            return 0.0;
        }
        1.0 - 1.0 / (1.0 + num / (sigma2 * den))
    }

    #[test]
    fn bump_bias_matches_the_display_formula_everywhere() {
        let dgp = DgpSpec::bumps(400).unwrap();
        let grid = lc_grid(0.12, 71);
        let theta_star = target_params(&dgp, &grid).unwrap();
        for (k, star) in theta_star.iter().enumerate() {
            let got = bias_norm_lc(&dgp, &grid, k).unwrap();
            let expect = lc_bias_by_display_formula(&dgp, &grid, k, star[0]);
            assert_abs_diff_eq!(got, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn bump_bias_is_zero_off_the_bumps_and_large_on_them() {
        let dgp = DgpSpec::bumps(400).unwrap();
        let grid = lc_grid(0.12, 21);
        let h = 0.12;
        for (k, &c) in grid.centers().iter().enumerate() {
            let bias = bias_norm_lc(&dgp, &grid, k).unwrap();
            if c + h <= 0.25 || c - h >= 0.65 {
                assert!(bias < 1e-10, "center {c}: bias {bias}");
            }
            if c == 0.35 || c == 0.45 || c == 0.55 {
                assert!(bias > 0.05, "center {c}: bias {bias}");
            }
        }
    }

    #[test]
    fn information_ordering_holds_for_both_families() {
        let dgp = DgpSpec::bumps(200).unwrap();
        for k in 0..9 {
            let dc = bias_diagnostics(&dgp, &lc_grid(0.2, 9), k).unwrap();
            let dq = bias_diagnostics(&dgp, &lq_grid(0.2, 9), k).unwrap();
            for d in [dc, dq] {
                assert!(psd_gap(&d) >= -1e-10, "psd gap {}", psd_gap(&d));
                assert!((0.0..=1.0).contains(&d.bias_norm));
            }
        }
    }

    #[test]
    fn quadratic_fit_reduces_the_bias_on_the_bumps() {
        let dgp = DgpSpec::bumps(400).unwrap();
        let lc = lc_grid(0.12, 21);
        let lq = lq_grid(0.12, 21);
        let bump_centers: Vec<usize> = lc
            .centers()
            .iter()
            .enumerate()
            .filter(|(_, &c)| (0.3..=0.6).contains(&c))
            .map(|(k, _)| k)
            .collect();
        let mean = |f: &dyn Fn(usize) -> f64| {
            bump_centers.iter().map(|&k| f(k)).sum::<f64>() / bump_centers.len() as f64
        };
        let mean_lc = mean(&|k| bias_norm_lc(&dgp, &lc, k).unwrap());
        let mean_lq = mean(&|k| bias_norm_lq(&dgp, &lq, k).unwrap());
        assert!(
            mean_lq < mean_lc,
            "quadratic bias {mean_lq} not below constant bias {mean_lc}"
        );
    }

    #[test]
    fn jacobi_agrees_with_cubic_characteristic_roots() {
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..200 {
            let mut a = SymMatrix::zeros(3);
            for i in 0..3 {
                for j in i..3 {
                    a.set(i, j, rng.random::<f64>() * 4.0 - 2.0);
                }
            }
            let (mut eig, _) = crate::linalg::jacobi_eigen(&a);
            eig.sort_by(f64::total_cmp);
            let mut roots = symmetric_cubic_roots(&a);
            roots.sort_by(f64::total_cmp);
            for (e, r) in eig.iter().zip(&roots) {
                assert_abs_diff_eq!(e, r, epsilon = 1e-9);
            }
        }
    }

    // Closed-form eigenvalues of a symmetric 3x3 matrix via the
    // trigonometric solution of its characteristic cubic.
    fn symmetric_cubic_roots(a: &SymMatrix) -> Vec<f64> {
        let p1 = a.get(0, 1).powi(2) + a.get(0, 2).powi(2) + a.get(1, 2).powi(2);
        let q = (a.get(0, 0) + a.get(1, 1) + a.get(2, 2)) / 3.0;
        if p1 == 0.0 {
            return vec![a.get(0, 0), a.get(1, 1), a.get(2, 2)];
        }
        let p2 = (a.get(0, 0) - q).powi(2)
            + (a.get(1, 1) - q).powi(2)
            + (a.get(2, 2) - q).powi(2)
            + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let det_b = {
            let b = |i: usize, j: usize| {
                (a.get(i, j) - if i == j { q } else { 0.0 }) / p
            };
            b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
                - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
                + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0))
        };
        let r = (det_b / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        vec![e1, e3, 3.0 * q - e1 - e3]
    }

    fn random_instance(rng: &mut StdRng) -> (Dataset, Vec<f64>) {
        let n = 20 + (rng.random::<f64>() * 40.0) as usize;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&xi| xi + rng.random::<f64>() * 2.0).collect();
        let center = rng.random::<f64>();
        let data = Dataset::new(x, y).unwrap();
        let kernel = KernelSpec::epanechnikov(0.3 + rng.random::<f64>() * 0.7).unwrap();
        let w = match local_weights(center, &kernel, &data) {
            Ok(w) => w,
            Err(_) => vec![1.0; n],
        };
        (data, w)
    }

    #[test]
    fn wilks_residual_is_rounding_level_for_quadratic_families() {
        let mut rng = StdRng::seed_from_u64(101);
        for _ in 0..500 {
            let (data, w) = random_instance(&mut rng);
            let shift = rng.random::<f64>() * 2.0 - 1.0;
            let lc_star = [lc_fit(&data, &w, Multipliers::Unit).unwrap().theta_hat[0] + shift];
            let r = wilks_residual(ModelKind::LocalConstant, &data, &w, &lc_star).unwrap();
            assert!(r <= 1e-10, "local constant residual {r}");
            if let Ok(fit) = lq_fit(&data, &w, Multipliers::Unit) {
                let mut star = fit.theta_hat.clone();
                star[0] += shift;
                star[1] -= 0.5 * shift;
                let r = wilks_residual(ModelKind::LocalQuadratic, &data, &w, &star).unwrap();
                assert!(r <= 1e-10, "local quadratic residual {r}");
            }
        }
    }

    #[test]
    fn score_norm_matches_the_likelihood_drop() {
        let mut rng = StdRng::seed_from_u64(103);
        for _ in 0..100 {
            let (data, w) = random_instance(&mut rng);
            let fit = lc_fit(&data, &w, Multipliers::Unit).unwrap();
            let star = [fit.theta_hat[0] - 0.7];
            let xi = score_vector(ModelKind::LocalConstant, &data, &w, &star).unwrap();
            let norm = xi[0].abs();
            let drop = 2.0
                * (fit.max_loglik
                    - loglik(ModelKind::LocalConstant, &star, &data, &w, Multipliers::Unit)
                        .unwrap());
            assert_abs_diff_eq!(norm, drop.sqrt(), epsilon = 1e-9 * (1.0 + norm));

            if let Ok(fit) = lq_fit(&data, &w, Multipliers::Unit) {
                let star: Vec<f64> =
                    fit.theta_hat.iter().map(|v| v + 0.3).collect();
                let xi = score_vector(ModelKind::LocalQuadratic, &data, &w, &star).unwrap();
                let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                let drop = 2.0
                    * (fit.max_loglik
                        - loglik(ModelKind::LocalQuadratic, &star, &data, &w, Multipliers::Unit)
                            .unwrap());
                assert_abs_diff_eq!(norm, drop.max(0.0).sqrt(), epsilon = 1e-8 * (1.0 + norm));
            }
        }
    }

    #[test]
    fn quantile_family_is_rejected() {
        let data = Dataset::new(vec![0.0, 0.5, 1.0], vec![1.0, 2.0, 3.0]).unwrap();
        let kind = ModelKind::QuantileLocation { tau: 0.5 };
        assert!(wilks_residual(kind, &data, &[], &[2.0]).is_err());
        assert!(score_vector(kind, &data, &[], &[2.0]).is_err());
        let grid = ModelGrid::quantile_location(vec![0.5]).unwrap();
        let dgp = DgpSpec::flat(30).unwrap();
        assert!(bias_diagnostics(&dgp, &grid, 0).is_err());
    }

    #[test]
    fn family_and_index_mismatches_are_rejected() {
        let dgp = DgpSpec::flat(40).unwrap();
        let lc = lc_grid(0.3, 3);
        let lq = lq_grid(0.3, 3);
        assert!(bias_norm_lc(&dgp, &lq, 0).is_err());
        assert!(bias_norm_lq(&dgp, &lc, 0).is_err());
        assert!(bias_norm_lc(&dgp, &lc, 3).is_err());
    }
}
