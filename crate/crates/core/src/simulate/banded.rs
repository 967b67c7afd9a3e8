//! Banded LU factorization without pivoting, for the diagonally dominant
//! systems of the implicit steps and the boundary-value oracle.

use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// LU factors of an `n x n` matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-major band storage: entry `(i, j)` lives at `i * w + (j + kl - i)`.
    band: Vec<T>,
}

impl<T: Scalar> BandedLu<T> {
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn at(&self, i: usize, j: usize) -> T {
        self.band[i * self.width() + (j + self.kl - i)]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        let w = self.width();
        &mut self.band[i * w + (j + self.kl - i)]
    }

    /// Factors the matrix whose diagonal `k` (from `-kl` to `ku`) is
    /// `diagonals[k + kl]`, each of length `n` indexed by row.
    pub fn factor(n: usize, kl: usize, ku: usize, diagonals: &[Vec<T>]) -> Result<Self> {
        if diagonals.len() != kl + ku + 1 || diagonals.iter().any(|d| d.len() != n) {
            return Err(Error::Config("band storage does not match dimensions".into()));
        }
        let mut lu = BandedLu { n, kl, ku, band: vec![T::zero(); n * (kl + ku + 1)] };
        for i in 0..n {
            for (k, diag) in diagonals.iter().enumerate() {
                let off = k as isize - kl as isize;
                let j = i as isize + off;
                if j >= 0 && (j as usize) < n {
                    *lu.at_mut(i, j as usize) = diag[i];
                }
            }
        }
        for k in 0..n {
            let pivot = lu.at(k, k);
            if pivot.magnitude() < 1e-300 {
                return Err(Error::Consistency(format!("zero pivot in banded factorization at row {k}")));
            }
            for i in k + 1..(k + kl + 1).min(n) {
                let m = lu.at(i, k) / pivot;
                *lu.at_mut(i, k) = m;
                for j in k + 1..(k + ku + 1).min(n) {
                    let v = lu.at(i, j) - m * lu.at(k, j);
                    *lu.at_mut(i, j) = v;
                }
            }
        }
        Ok(lu)
    }

    pub fn solve(&self, b: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let mut acc = b[i];
            for j in i.saturating_sub(self.kl)..i {
                acc = acc - self.at(i, j) * b[j];
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..(i + self.ku + 1).min(n) {
                acc = acc - self.at(i, j) * b[j];
            }
            b[i] = acc / self.at(i, i);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored. Overwrites `diag`
/// and leaves the solution in `rhs`.
pub fn solve_tridiagonal<T: Scalar>(sub: &[T], diag: &mut [T], sup: &[T], rhs: &mut [T]) -> Result<()> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::Config("tridiagonal system has inconsistent lengths".into()));
    }
    for i in 1..n {
        if diag[i - 1].magnitude() < 1e-300 {
            return Err(Error::Consistency(format!("zero pivot in tridiagonal solve at row {}", i - 1)));
        }
        let m = sub[i] / diag[i - 1];
        diag[i] = diag[i] - m * sup[i - 1];
        rhs[i] = rhs[i] - m * rhs[i - 1];
    }
    rhs[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_mul(n: usize, kl: usize, diags: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; n];
        for i in 0..n {
            for (k, d) in diags.iter().enumerate() {
                let j = i as isize + k as isize - kl as isize;
                if j >= 0 && (j as usize) < n {
                    y[i] += d[i] * x[j as usize];
                }
            }
        }
        y
    }

    #[test]
    fn tridiagonal_small() {
        let sub = [0.0, 1.0, 1.0];
        let mut diag = [4.0, 4.0, 4.0];
        let sup = [1.0, 1.0, 0.0];
        let mut rhs = [5.0, 6.0, 5.0];
        solve_tridiagonal(&sub, &mut diag, &sup, &mut rhs).unwrap();
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn pentadiagonal_solves(n in 5usize..40, seed in proptest::collection::vec(-1.0..1.0f64, 200)) {
            let kl = 2;
            let diags: Vec<Vec<f64>> = (0..5)
                .map(|k| (0..n).map(|i| if k == 2 { 8.0 + seed[i % 200].abs() } else { seed[(i * 5 + k) % 200] }).collect())
                .collect();
            let x: Vec<f64> = (0..n).map(|i| seed[(i * 7 + 3) % 200]).collect();
            let mut b = dense_mul(n, kl, &diags, &x);
            let lu = BandedLu::factor(n, kl, 2, &diags).unwrap();
            lu.solve(&mut b);
            for i in 0..n {
                prop_assert!((b[i] - x[i]).abs() < 1e-10);
            }
        }
    }
}
