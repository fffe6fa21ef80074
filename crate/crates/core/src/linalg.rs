//! Dense symmetric matrices and jittered Cholesky factorization.
//!
//! Inverses are never formed explicitly. Every `A⁻¹b` product goes through
//! [`solve`], i.e. one forward and one backward triangular substitution.

use crate::error::{Error, Result};

/// Largest diagonal jitter the factorization will escalate to.
pub const MAX_JITTER: f64 = 1e-4;

/// First rung of the escalation ladder when the caller starts from zero jitter.
const ZERO_START_JITTER: f64 = 1e-12;

/// Square symmetric matrix stored densely in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, checking symmetry and finiteness.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("matrix dimension must be at least 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "matrix entries",
                expected: n * n,
                found: entries.len(),
            });
        }
        if let Some(bad) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite matrix entry at ({}, {})",
                bad / n,
                bad % n
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// Evaluates `f(i, j)` on the upper triangle and mirrors it, so the
    /// result is symmetric bit-for-bit.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Self { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("matrix-vector product", self.n, x.len())?;
        Ok(self
            .entries
            .chunks_exact(self.n)
            .map(|row| dot(row, x))
            .collect())
    }
}

/// Lower-triangular factor `L` with `L·Lᵀ = M + jitter_used·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>,
    jitter_used: f64,
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    #[inline]
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    pub fn diag(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.lower(i, i))
    }

    /// `Σ ln Lᵢᵢ`, i.e. half the log-determinant of the factored matrix.
    pub fn half_log_det(&self) -> f64 {
        self.diag().map(f64::ln).sum()
    }

    /// Reconstructs `L·Lᵀ` densely. Used by tests and diagnostics.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n;
        SymMatrix::from_fn(n, |i, j| {
            (0..=i.min(j)).map(|k| self.lower(i, k) * self.lower(j, k)).sum()
        })
    }

    /// Solves `L·z = b` by forward substitution.
    pub fn solve_lower(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len("triangular solve", self.n, rhs.len())?;
        let n = self.n;
        let mut z = rhs.to_vec();
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s = z[i] - dot(row, &z[..i]);
            z[i] = s / self.lower(i, i);
        }
        Ok(z)
    }

    /// Solves `Lᵀ·x = z` by backward substitution.
    pub fn solve_upper(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len("triangular solve", self.n, rhs.len())?;
        let n = self.n;
        let mut x = rhs.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.lower(k, i) * x[k];
            }
            x[i] = s / self.lower(i, i);
        }
        Ok(x)
    }
}

/// Factors `m + jitter·I`, escalating the jitter tenfold after each failed
/// attempt until [`MAX_JITTER`] is reached.
///
/// A zero `initial_jitter` is tried as-is first; escalation from zero starts
/// at `1e-12`.
pub fn cholesky(m: &SymMatrix, initial_jitter: f64) -> Result<CholeskyFactor> {
    if !(initial_jitter >= 0.0 && initial_jitter.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "initial jitter must be finite and non-negative, got {initial_jitter}"
        )));
    }
    let mut jitter = initial_jitter;
    loop {
        if let Some(lower) = try_factor(m, jitter) {
            return Ok(CholeskyFactor {
                n: m.n,
                lower,
                jitter_used: jitter,
            });
        }
        if jitter >= MAX_JITTER {
            return Err(Error::NotPositiveDefinite {
                n: m.n,
                max_jitter: jitter,
            });
        }
        jitter = if jitter == 0.0 {
            ZERO_START_JITTER
        } else {
            (jitter * 10.0).min(MAX_JITTER)
        };
    }
}

fn try_factor(m: &SymMatrix, jitter: f64) -> Option<Vec<f64>> {
    let n = m.n;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let row_j = &l[j * n..j * n + j];
        let d = m.get(j, j) + jitter - dot(row_j, row_j);
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let s = m.get(i, j) - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            l[i * n + j] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `(M + jitter_used·I)·x = rhs` using the factor.
pub fn solve(f: &CholeskyFactor, rhs: &[f64]) -> Result<Vec<f64>> {
    let z = f.solve_lower(rhs)?;
    f.solve_upper(&z)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frobenius(a: &[f64]) -> f64 {
        a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn identity_factors_to_identity() {
        let f = cholesky(&SymMatrix::identity(2), 0.0).unwrap();
        assert_eq!(f.jitter_used(), 0.0);
        assert_eq!(f.reconstruct(), SymMatrix::identity(2));
        assert_eq!(f.lower(0, 1), 0.0);
        assert_eq!(f.lower(1, 0), 0.0);
    }

    #[test]
    fn two_by_two_hand_expansion() {
        // [[2,0],[1,√2]]·[[2,1],[0,√2]] = [[4,2],[2,3]]
        let m = SymMatrix::new(2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        let f = cholesky(&m, 0.0).unwrap();
        assert_eq!(f.lower(0, 0), 2.0);
        assert_eq!(f.lower(1, 0), 1.0);
        assert!((f.lower(1, 1) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(f.jitter_used(), 0.0);
    }

    #[test]
    fn singular_matrix_with_small_jitter() {
        let m = SymMatrix::new(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let f = cholesky(&m, 1.490116e-08).unwrap();
        assert!(f.jitter_used() >= 1.490116e-08);
        assert!(f.diag().all(|d| d > 0.0));
    }

    #[test]
    fn singular_matrix_from_zero_jitter_escalates() {
        let m = SymMatrix::new(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let f = cholesky(&m, 0.0).unwrap();
        assert!(f.jitter_used() > 0.0 && f.jitter_used() <= MAX_JITTER);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = SymMatrix::new(2, vec![1.0, 3.0, 3.0, 1.0]).unwrap();
        match cholesky(&m, 0.0) {
            Err(Error::NotPositiveDefinite { n: 2, max_jitter }) => {
                assert_eq!(max_jitter, MAX_JITTER)
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_and_nonfinite_are_rejected() {
        assert!(SymMatrix::new(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(SymMatrix::new(2, vec![1.0, f64::NAN, f64::NAN, 1.0]).is_err());
        assert!(SymMatrix::new(0, vec![]).is_err());
    }

    #[test]
    fn solve_examples() {
        let id = cholesky(&SymMatrix::identity(2), 0.0).unwrap();
        assert_eq!(solve(&id, &[3.0, 7.0]).unwrap(), vec![3.0, 7.0]);

        // Direct 2×2 inverse: [[4,2],[2,3]]⁻¹ = (1/8)[[3,−2],[−2,4]]
        let m = SymMatrix::new(2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        let f = cholesky(&m, 0.0).unwrap();
        let x = solve(&f, &[8.0, 7.0]).unwrap();
        let oracle = [(3.0 * 8.0 - 2.0 * 7.0) / 8.0, (-2.0 * 8.0 + 4.0 * 7.0) / 8.0];
        assert!((x[0] - oracle[0]).abs() < 1e-14 && (x[0] - 1.25).abs() < 1e-14);
        assert!((x[1] - oracle[1]).abs() < 1e-14 && (x[1] - 1.5).abs() < 1e-14);

        let d = cholesky(&SymMatrix::new(2, vec![2.0, 0.0, 0.0, 2.0]).unwrap(), 0.0).unwrap();
        assert!(solve(&d, &[1.0, 1.0]).unwrap().iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn solve_rejects_wrong_length() {
        let f = cholesky(&SymMatrix::identity(3), 0.0).unwrap();
        assert!(matches!(
            solve(&f, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 2, .. })
        ));
    }

    /// `A·Aᵀ + n·I` from an arbitrary square `A`.
    fn spd_from(n: usize, a: &[f64]) -> SymMatrix {
        SymMatrix::from_fn(n, |i, j| {
            let s: f64 = (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum();
            s + if i == j { n as f64 } else { 0.0 }
        })
    }

    fn spd_strategy() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
        (1usize..=64).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(-1.0f64..1.0, n * n),
                prop::collection::vec(-10.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reconstruction_matches_input((n, a, _x) in spd_strategy()) {
            let m = spd_from(n, &a);
            let f = cholesky(&m, 0.0).unwrap();
            prop_assert!(f.diag().all(|d| d > 0.0));
            let r = f.reconstruct();
            let diff: Vec<f64> = (0..n * n)
                .map(|k| {
                    let jit = if k / n == k % n { f.jitter_used() } else { 0.0 };
                    r.entries()[k] - (m.entries()[k] + jit)
                })
                .collect();
            prop_assert!(frobenius(&diff) <= 1e-8 * frobenius(m.entries()));
        }

        #[test]
        fn solve_recovers_vector((n, a, x) in spd_strategy()) {
            let m = spd_from(n, &a);
            let f = cholesky(&m, 0.0).unwrap();
            prop_assert_eq!(f.jitter_used(), 0.0);
            let b = m.mul_vec(&x).unwrap();
            let got = solve(&f, &b).unwrap();
            let err: Vec<f64> = got.iter().zip(&x).map(|(g, t)| g - t).collect();
            prop_assert!(frobenius(&err) <= 1e-6 * frobenius(&x).max(1e-12));
        }
    }
}
