//! Dense symmetric helpers for the small (p <= 3) systems in this crate.

use crate::error::{Error, Result};

/// Relative pivot floor: a factorization with smallest pivot below
/// `PIVOT_RTOL` times the largest counts as not positive definite.
pub const PIVOT_RTOL: f64 = 1e-10;

/// Jacobi sweep cap and relative off-diagonal tolerance.
const JACOBI_MAX_SWEEPS: usize = 30;
const JACOBI_TOL: f64 = 1e-12;

/// Small dense symmetric matrix, full row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    p: usize,
    a: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(p: usize) -> Self {
        SymMatrix { p, a: vec![0.0; p * p] }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.a[i * diag.len() + i] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.p + j]
    }

    /// Sets entry (i, j) and its mirror.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.p + j] = v;
        self.a[j * self.p + i] = v;
    }

    /// v' A v.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let p = self.p;
        let mut out = 0.0;
        for (i, &vi) in v[..p].iter().enumerate() {
            let mut row = 0.0;
            for (j, &vj) in v[..p].iter().enumerate() {
                row += self.get(i, j) * vj;
            }
            out += vi * row;
        }
        out
    }

    /// The full row-major entries.
    pub fn data(&self) -> &[f64] {
        &self.a
    }

    /// A v.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.p)
            .map(|i| (0..self.p).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// A - B.
    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        let a = self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect();
        SymMatrix { p: self.p, a }
    }

    /// C A C' for a general square C (row-major, same dimension).
    pub fn congruence(&self, c: &[f64]) -> SymMatrix {
        let p = self.p;
        let mut out = SymMatrix::zeros(p);
        for i in 0..p {
            for j in i..p {
                let mut s = 0.0;
                for k in 0..p {
                    let cik = c[i * p + k];
                    if cik == 0.0 {
                        continue;
                    }
                    for l in 0..p {
                        s += cik * self.get(k, l) * c[j * p + l];
                    }
                }
                out.set(i, j, s);
            }
        }
        out
    }

    fn frobenius(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Solves A x = b for symmetric positive definite A by LDL' with symmetric
/// (largest remaining diagonal) pivoting. Errors with
/// [`Error::NonPositiveCurvature`] on a nonpositive pivot or when the pivot
/// spread exceeds [`PIVOT_RTOL`].
pub fn ldlt_solve(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let p = a.dim();
    if b.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: b.len() });
    }
    let mut m = a.clone();
    let mut perm: Vec<usize> = (0..p).collect();

    for k in 0..p {
        // Largest remaining diagonal becomes the pivot.
        let mut best = k;
        for i in k + 1..p {
            if m.get(i, i) > m.get(best, best) {
                best = i;
            }
        }
        if best != k {
            swap_sym(&mut m, k, best);
            perm.swap(k, best);
        }
        let d = m.get(k, k);
        if !d.is_finite() || d <= 0.0 {
            return Err(Error::NonPositiveCurvature);
        }
        for i in k + 1..p {
            let l = m.get(i, k) / d;
            for j in k + 1..=i {
                let v = m.get(i, j) - l * m.get(k, j);
                m.set(i, j, v);
            }
            m.a[i * p + k] = l;
        }
    }

    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for k in 0..p {
        lo = lo.min(m.get(k, k));
        hi = hi.max(m.get(k, k));
    }
    if lo < PIVOT_RTOL * hi {
        return Err(Error::NonPositiveCurvature);
    }

    // P A P' = L D L'; solve in permuted coordinates, then undo P.
    let mut z: Vec<f64> = (0..p).map(|i| b[perm[i]]).collect();
    for i in 0..p {
        for j in 0..i {
            z[i] -= m.a[i * p + j] * z[j];
        }
    }
    for (i, zi) in z.iter_mut().enumerate() {
        *zi /= m.get(i, i);
    }
    for i in (0..p).rev() {
        for j in i + 1..p {
            z[i] -= m.a[j * p + i] * z[j];
        }
    }
    let mut x = vec![0.0; p];
    for i in 0..p {
        x[perm[i]] = z[i];
    }
    Ok(x)
}

fn swap_sym(m: &mut SymMatrix, i: usize, j: usize) {
    let p = m.p;
    for c in 0..p {
        m.a.swap(i * p + c, j * p + c);
    }
    for r in 0..p {
        m.a.swap(r * p + i, r * p + j);
    }
}

/// v' A^{-1} v through the pivoted factorization.
pub fn inv_quad_form(a: &SymMatrix, v: &[f64]) -> Result<f64> {
    let x = ldlt_solve(a, v)?;
    Ok(v.iter().zip(&x).map(|(vi, xi)| vi * xi).sum())
}

/// Eigendecomposition A = V diag(values) V' by cyclic Jacobi rotations.
///
/// Runs at most 30 sweeps and stops once the off-diagonal Frobenius mass
/// drops below 1e-12 relative to the matrix norm. Returns eigenvalues in
/// no particular order with the matching eigenvector columns of `V`
/// (row-major).
pub fn jacobi_eigen(a: &SymMatrix) -> (Vec<f64>, Vec<f64>) {
    let p = a.dim();
    let mut m = a.clone();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }
    let norm = m.frobenius().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..p {
            for j in i + 1..p {
                off += 2.0 * m.get(i, j) * m.get(i, j);
            }
        }
        if off.sqrt() <= JACOBI_TOL * norm {
            break;
        }
        for i in 0..p {
            for j in i + 1..p {
                let apq = m.get(i, j);
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.get(j, j) - m.get(i, i)) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, i, j, c, s);
            }
        }
    }

    let values = (0..p).map(|i| m.get(i, i)).collect();
    (values, v)
}

fn rotate(m: &mut SymMatrix, v: &mut [f64], p_idx: usize, q_idx: usize, c: f64, s: f64) {
    let p = m.p;
    for k in 0..p {
        let akp = m.get(k, p_idx);
        let akq = m.get(k, q_idx);
        m.a[k * p + p_idx] = c * akp - s * akq;
        m.a[k * p + q_idx] = s * akp + c * akq;
    }
    for k in 0..p {
        let apk = m.a[p_idx * p + k];
        let aqk = m.a[q_idx * p + k];
        m.a[p_idx * p + k] = c * apk - s * aqk;
        m.a[q_idx * p + k] = s * apk + c * aqk;
    }
    for k in 0..p {
        let vkp = v[k * p + p_idx];
        let vkq = v[k * p + q_idx];
        v[k * p + p_idx] = c * vkp - s * vkq;
        v[k * p + q_idx] = s * vkp + c * vkq;
    }
}

/// Largest absolute eigenvalue.
pub fn spectral_norm(a: &SymMatrix) -> f64 {
    let (values, _) = jacobi_eigen(a);
    values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Smallest eigenvalue.
pub fn min_eigenvalue(a: &SymMatrix) -> f64 {
    let (values, _) = jacobi_eigen(a);
    values.iter().fold(f64::INFINITY, |acc, v| acc.min(*v))
}

/// A^{-1/2} for symmetric positive definite A, or `None` when the spectrum
/// is nonpositive or spread beyond `rtol`.
pub fn inv_sqrt(a: &SymMatrix, rtol: f64) -> Option<SymMatrix> {
    let p = a.dim();
    let (values, v) = jacobi_eigen(a);
    let hi = values.iter().fold(0.0f64, |acc, x| acc.max(*x));
    let lo = values.iter().fold(f64::INFINITY, |acc, x| acc.min(*x));
    if hi <= 0.0 || lo <= rtol * hi {
        return None;
    }
    let mut out = SymMatrix::zeros(p);
    for i in 0..p {
        for j in i..p {
            let mut s = 0.0;
            for (k, val) in values.iter().enumerate() {
                s += v[i * p + k] * v[j * p + k] / val.sqrt();
            }
            out.set(i, j, s);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sym3(d: [f64; 6]) -> SymMatrix {
        let mut m = SymMatrix::zeros(3);
        m.set(0, 0, d[0]);
        m.set(0, 1, d[1]);
        m.set(0, 2, d[2]);
        m.set(1, 1, d[3]);
        m.set(1, 2, d[4]);
        m.set(2, 2, d[5]);
        m
    }

    #[test]
    fn solves_identity() {
        let m = SymMatrix::from_diag(&[1.0, 1.0, 1.0]);
        let x = ldlt_solve(&m, &[3.0, -1.0, 2.0]).unwrap();
        assert_eq!(x, vec![3.0, -1.0, 2.0]);
    }

    #[test]
    fn solves_spd_system() {
        let m = sym3([4.0, 1.0, 0.5, 3.0, -0.2, 2.0]);
        let x = ldlt_solve(&m, &[1.0, 2.0, 3.0]).unwrap();
        let back = m.mul_vec(&x);
        for (b, e) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*b, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite_and_near_singular() {
        let indef = sym3([1.0, 0.0, 0.0, -1.0, 0.0, 1.0]);
        assert_eq!(ldlt_solve(&indef, &[1.0, 1.0, 1.0]), Err(Error::NonPositiveCurvature));
        // Rank-2: two identical rows.
        let sing = sym3([1.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(ldlt_solve(&sing, &[1.0, 1.0, 1.0]), Err(Error::NonPositiveCurvature));
    }

    #[test]
    fn jacobi_diagonalizes_known_matrix() {
        // Eigenvalues of [[2,1,0],[1,2,1],[0,1,2]] are 2 and 2 +/- sqrt(2).
        let m = sym3([2.0, 1.0, 0.0, 2.0, 1.0, 2.0]);
        let (mut values, _) = jacobi_eigen(&m);
        values.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(values[0], 2.0 - std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(values[2], 2.0 + std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn inv_sqrt_squares_back() {
        let m = sym3([4.0, 1.0, 0.5, 3.0, -0.2, 2.0]);
        let r = inv_sqrt(&m, PIVOT_RTOL).unwrap();
        // r m r should be the identity.
        let t = m.congruence(&r.a);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(t.get(i, j), expect, epsilon = 1e-10);
            }
        }
    }

    proptest! {
        // A = G'G + eps I is SPD; the solve must reproduce b.
        #[test]
        fn prop_spd_solve_residual(g in proptest::array::uniform9(-3.0f64..3.0),
                                   b in proptest::array::uniform3(-5.0f64..5.0)) {
            let mut m = SymMatrix::zeros(3);
            for i in 0..3 {
                for j in i..3 {
                    let mut s = if i == j { 0.05 } else { 0.0 };
                    for k in 0..3 {
                        s += g[k * 3 + i] * g[k * 3 + j];
                    }
                    m.set(i, j, s);
                }
            }
            let x = ldlt_solve(&m, &b).unwrap();
            let back = m.mul_vec(&x);
            for (got, expect) in back.iter().zip(b) {
                prop_assert!((got - expect).abs() < 1e-8);
            }
        }

        // Jacobi eigenvalues reproduce trace and quadratic forms.
        #[test]
        fn prop_jacobi_reconstructs(d in proptest::array::uniform6(-4.0f64..4.0)) {
            let m = sym3(d);
            let (values, v) = jacobi_eigen(&m);
            let trace = m.get(0, 0) + m.get(1, 1) + m.get(2, 2);
            prop_assert!((values.iter().sum::<f64>() - trace).abs() < 1e-9);
            // Reconstruct A from V diag V'.
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for k in 0..3 {
                        s += v[i * 3 + k] * values[k] * v[j * 3 + k];
                    }
                    prop_assert!((s - m.get(i, j)).abs() < 1e-9);
                }
            }
        }
    }
}
