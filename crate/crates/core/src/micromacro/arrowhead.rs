//! Closed-form inverse of the per-cell Newton Jacobian.
//!
//! The Jacobian has the arrowhead shape
//!
//! ```text
//! | a_1          d_1 |
//! |     ...      ... |
//! |          a_N d_N |
//! | g_1 ...  g_N  0  |
//! ```
//!
//! and is never formed. Only the ratios `1/a_j`, `g_j/a_j`, `d_j/a_j` and
//! `S = sum_j (g_j/a_j) d_j` are kept; in the solver they are built from
//! expressions that stay bounded as the relaxation parameter vanishes.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Systems with `|S|` below this are rejected as singular.
pub const SINGULARITY_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub struct ArrowheadSystem<T> {
    /// `1 / alpha_j`, all negative.
    pub inv_alpha: Vec<T>,
    /// `gamma_j / alpha_j`.
    pub gamma_over_alpha: Vec<T>,
    /// `delta_j / alpha_j`.
    pub delta_over_alpha: Vec<T>,
    /// `sum_j (gamma_j / alpha_j) delta_j`.
    pub s: T,
}

impl<T: Real> ArrowheadSystem<T> {
    /// Builds the system from raw Jacobian entries. `cell` only labels errors.
    pub fn from_entries(alpha: &[T], gamma: &[T], delta: &[T], cell: usize) -> Result<Self> {
        assert!(alpha.len() == gamma.len() && alpha.len() == delta.len());
        let inv_alpha: Vec<T> = alpha.iter().map(|&a| T::one() / a).collect();
        let gamma_over_alpha: Vec<T> = gamma.iter().zip(alpha).map(|(&g, &a)| g / a).collect();
        let delta_over_alpha: Vec<T> = delta.iter().zip(alpha).map(|(&d, &a)| d / a).collect();
        let s = gamma_over_alpha
            .iter()
            .zip(delta)
            .map(|(&ga, &d)| ga * d)
            .sum::<T>();
        Self::from_ratios(inv_alpha, gamma_over_alpha, delta_over_alpha, s, cell)
    }

    /// Builds the system from precomputed ratios, checking the singularity floor.
    pub fn from_ratios(
        inv_alpha: Vec<T>,
        gamma_over_alpha: Vec<T>,
        delta_over_alpha: Vec<T>,
        s: T,
        cell: usize,
    ) -> Result<Self> {
        if !s.is_finite() || s.abs().as_f64() < SINGULARITY_FLOOR {
            return Err(Error::SingularSystem { cell, s: s.as_f64() });
        }
        Ok(ArrowheadSystem {
            inv_alpha,
            gamma_over_alpha,
            delta_over_alpha,
            s,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_alpha.is_empty()
    }

    /// Writes `J^{-1} rhs` into `out` in O(N). Both slices have length `N + 1`.
    pub fn apply_inverse_into(&self, rhs: &[T], out: &mut [T]) {
        let n = self.len();
        assert_eq!(rhs.len(), n + 1);
        assert_eq!(out.len(), n + 1);
        let weighted = self
            .gamma_over_alpha
            .iter()
            .zip(&rhs[..n])
            .map(|(&g, &b)| g * b)
            .sum::<T>();
        let x_last = (weighted - rhs[n]) / self.s;
        for j in 0..n {
            out[j] = self.inv_alpha[j] * rhs[j] - self.delta_over_alpha[j] * x_last;
        }
        out[n] = x_last;
    }

    pub fn apply_inverse(&self, rhs: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); rhs.len()];
        self.apply_inverse_into(rhs, &mut out);
        out
    }

    /// Dense Jacobian reconstructed from the stored ratios (row-major).
    /// Intended for diagnostics and tests on small systems.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.len();
        let mut m = vec![vec![T::zero(); n + 1]; n + 1];
        for j in 0..n {
            let alpha = T::one() / self.inv_alpha[j];
            m[j][j] = alpha;
            m[j][n] = self.delta_over_alpha[j] * alpha;
            m[n][j] = self.gamma_over_alpha[j] * alpha;
        }
        m
    }
}

/// Free-function form of [`ArrowheadSystem::apply_inverse`].
pub fn arrowhead_apply_inverse<T: Real>(sys: &ArrowheadSystem<T>, rhs: &[T]) -> Vec<T> {
    sys.apply_inverse(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example() -> ArrowheadSystem<f64> {
        ArrowheadSystem::from_entries(&[-1.0, -2.0, -4.0], &[1.0; 3], &[1.0; 3], 0).unwrap()
    }

    fn matvec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    #[test]
    fn s_of_small_example() {
        assert!((example().s + 1.75).abs() < 1e-15);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        assert!(example().apply_inverse(&[0.0; 4]).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dense_product_recovers_rhs() {
        let sys = example();
        // Dense Jacobian written out by hand, independent of to_dense.
        let jac = vec![
            vec![-1.0, 0.0, 0.0, 1.0],
            vec![0.0, -2.0, 0.0, 1.0],
            vec![0.0, 0.0, -4.0, 1.0],
            vec![1.0, 1.0, 1.0, 0.0],
        ];
        assert_eq!(sys.to_dense(), jac);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let rhs: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let x = sys.apply_inverse(&rhs);
            let back = matvec(&jac, &x);
            for (a, b) in back.iter().zip(&rhs) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn last_column_of_inverse() {
        let sys = example();
        let x = sys.apply_inverse(&[0.0, 0.0, 0.0, 1.0]);
        assert!((x[3] + 1.0 / sys.s).abs() < 1e-15);
    }

    #[test]
    fn singular_system_is_rejected() {
        let err = ArrowheadSystem::<f64>::from_entries(&[-1.0, -1.0], &[1.0, -1.0], &[1.0, 1.0], 3)
            .unwrap_err();
        assert!(matches!(err, Error::SingularSystem { cell: 3, .. }));
    }
}
