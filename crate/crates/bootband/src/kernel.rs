//! Localization kernels and per-model weight vectors.

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Threshold below which a weight sum counts as degenerate.
pub(crate) const WEIGHT_EPS: f64 = 1e-12;

/// Supported kernel shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    /// K(u) = 0.75 (1 - u^2) on [-1, 1], zero outside.
    Epanechnikov,
}

/// Kernel shape plus bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
}

impl KernelSpec {
    /// Builds a kernel spec; the bandwidth must be finite and positive.
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        if !bandwidth.is_finite() || bandwidth <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(KernelSpec { family, bandwidth })
    }

    pub fn epanechnikov(bandwidth: f64) -> Result<Self> {
        KernelSpec::new(KernelFamily::Epanechnikov, bandwidth)
    }

    /// Weight of an observation at `x` for a model centered at `center`.
    pub fn weight(&self, center: f64, x: f64) -> f64 {
        kernel_value(self.family, (center - x) / self.bandwidth)
    }
}

/// Evaluates the kernel shape at `u`.
pub fn kernel_value(family: KernelFamily, u: f64) -> f64 {
    match family {
        KernelFamily::Epanechnikov => {
            if u.abs() >= 1.0 {
                0.0
            } else {
                0.75 * (1.0 - u * u)
            }
        }
    }
}

/// Kernel weights of every observation for a model centered at `center`.
///
/// Errors with [`Error::DegenerateWeights`] when the weights sum below the
/// degeneracy threshold, i.e. no observation lies in the kernel support.
pub fn local_weights(center: f64, kernel: &KernelSpec, data: &Dataset) -> Result<Vec<f64>> {
    let w: Vec<f64> = data.x().iter().map(|&x| kernel.weight(center, x)).collect();
    let sum: f64 = w.iter().sum();
    if sum < WEIGHT_EPS {
        return Err(Error::DegenerateWeights { center, sum });
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn epanechnikov_values() {
        let k = KernelFamily::Epanechnikov;
        assert_eq!(kernel_value(k, 0.0), 0.75);
        assert_eq!(kernel_value(k, 1.0), 0.0);
        assert_eq!(kernel_value(k, -1.0), 0.0);
        assert_eq!(kernel_value(k, 2.5), 0.0);
        assert_abs_diff_eq!(kernel_value(k, -0.5), 0.5625, epsilon = 1e-15);
    }

    #[test]
    fn epanechnikov_integrates_to_one() {
        // Trapezoid rule on [-1, 1] with step 1e-4.
        let step = 1e-4;
        let m = (2.0 / step) as usize;
        let mut sum = 0.0;
        for i in 0..=m {
            let u = -1.0 + i as f64 * step;
            let v = kernel_value(KernelFamily::Epanechnikov, u);
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            sum += w * v;
        }
        assert_abs_diff_eq!(sum * step, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn weights_against_hand_values() {
        let data = Dataset::new(vec![0.0, 0.5, 1.0], vec![0.0; 3]).unwrap();
        let kernel = KernelSpec::epanechnikov(10.0).unwrap();
        let w = local_weights(0.5, &kernel, &data).unwrap();
        assert_abs_diff_eq!(w[0], 0.748125, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2], 0.748125, epsilon = 1e-12);
    }

    #[test]
    fn observations_outside_support_get_zero() {
        let data = Dataset::new(vec![0.0, 0.2, 0.9], vec![0.0; 3]).unwrap();
        let kernel = KernelSpec::epanechnikov(0.1).unwrap();
        let w = local_weights(0.2, &kernel, &data).unwrap();
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], 0.75);
        assert_eq!(w[2], 0.0);
    }

    #[test]
    fn empty_support_is_degenerate() {
        let data = Dataset::new(vec![5.0, 6.0], vec![0.0; 2]).unwrap();
        let kernel = KernelSpec::epanechnikov(0.5).unwrap();
        match local_weights(0.0, &kernel, &data) {
            Err(Error::DegenerateWeights { center, .. }) => assert_eq!(center, 0.0),
            other => panic!("expected DegenerateWeights, got {other:?}"),
        }
    }

    #[test]
    fn bad_bandwidth_rejected() {
        assert!(KernelSpec::epanechnikov(0.0).is_err());
        assert!(KernelSpec::epanechnikov(-1.0).is_err());
        assert!(KernelSpec::epanechnikov(f64::NAN).is_err());
    }
}
