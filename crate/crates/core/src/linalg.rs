//! Minimal dense complex linear algebra: LU with partial pivoting, forward
//! and adjoint solves, and a Hager-style 1-norm condition estimate read off
//! the factors. The Lippmann-Schwinger systems are at most a few thousand
//! nodes, so a straightforward row-major kernel is adequate.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub struct LuFactors {
    pub n: usize,
    /// Row-major combined L\U storage.
    lu: Vec<Complex64>,
    /// Row permutation: `perm[k]` is the original row index of pivot row k.
    perm: Vec<usize>,
    norm1: f64,
}

impl LuFactors {
    /// Factor a row-major dense matrix in place.
    pub fn new(mut a: Vec<Complex64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].norm();
            for r in k + 1..n {
                let v = a[r * n + k].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SolverFailure(format!(
                    "singular or non-finite pivot at column {k}"
                )));
            }
            if p != k {
                perm.swap(k, p);
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let pivot = a[k * n + k];
            for r in k + 1..n {
                let factor = a[r * n + k] / pivot;
                a[r * n + k] = factor;
                if factor != Complex64::ZERO {
                    let (head, tail) = a.split_at_mut(r * n);
                    let krow = &head[k * n + k + 1..k * n + n];
                    let rrow = &mut tail[k + 1..n];
                    for (rv, kv) in rrow.iter_mut().zip(krow) {
                        *rv -= factor * kv;
                    }
                }
            }
        }
        Ok(Self {
            n,
            lu: a,
            perm,
            norm1,
        })
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    /// Solve `A^H x = b` (conjugate transpose), needed by the norm estimator.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        // A = P^T L U  =>  A^H = U^H L^H P
        let mut x = b.to_vec();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[j * n + i].conj() * x[j];
            }
            x[i] = acc / self.lu[i * n + i].conj();
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[j * n + i].conj() * x[j];
            }
            x[i] = acc;
        }
        let mut out = vec![Complex64::ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }

    /// 1-norm condition estimate ||A||_1 * est(||A^-1||_1).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            let y1: f64 = y.iter().map(|c| c.norm()).sum();
            if y1 <= est {
                break;
            }
            est = y1;
            let xi: Vec<Complex64> = y
                .iter()
                .map(|c| {
                    if c.norm() > 0.0 {
                        c / c.norm()
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (mut jmax, mut zmax) = (0usize, 0.0f64);
            for (j, v) in z.iter().enumerate() {
                if v.norm() > zmax {
                    zmax = v.norm();
                    jmax = j;
                }
            }
            let z1: f64 = x.iter().zip(&z).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= z1 {
                break;
            }
            x = vec![Complex64::ZERO; n];
            x[jmax] = Complex64::new(1.0, 0.0);
        }
        self.norm1 * est
    }
}

/// Solve a complex tridiagonal system by the Thomas algorithm.
/// `diag`, `lower`, `upper` have lengths n, n-1, n-1.
pub fn tridiag_solve(
    diag: &[Complex64],
    lower: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let mut c = vec![Complex64::ZERO; n];
    let mut d = vec![Complex64::ZERO; n];
    let mut denom = diag[0];
    if denom.norm() == 0.0 {
        return Err(Error::SolverFailure("tridiagonal pivot is zero".into()));
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i - 1] * c[i - 1];
        if denom.norm() == 0.0 {
            return Err(Error::SolverFailure("tridiagonal pivot is zero".into()));
        }
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= c[i] * next;
    }
    Ok(d)
}
