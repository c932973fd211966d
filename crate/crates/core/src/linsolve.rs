//! Direct O(n) solvers for periodic tridiagonal systems, scalar and 2x2 block.
//!
//! Elimination runs down the band while carrying the fill-in of the two
//! wrap-around entries as an extra last column and an extra last row, so the
//! periodic corner is handled exactly and every pivot (including the final
//! corner pivot) is checked. A dense LU solver is kept as a test oracle.

use std::ops::{Add, Mul, Sub};

use nalgebra::Matrix2;

use crate::assembly::{BlockCyclicTridiagonal, CyclicTridiagonal};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Pivots below this fraction of the largest row magnitude are rejected.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// Matrix entry type of a banded system: `f64` or a 2x2 block.
trait BandEntry: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    type Rhs: Copy + Sub<Output = Self::Rhs>;

    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    /// Size of the entry as a pivot, zero when singular.
    fn pivot_magnitude(&self) -> f64;
    fn inverse(&self) -> Self;
    fn apply(&self, v: Self::Rhs) -> Self::Rhs;
}

impl BandEntry for f64 {
    type Rhs = f64;

    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn pivot_magnitude(&self) -> f64 {
        self.abs()
    }
    fn inverse(&self) -> Self {
        1.0 / self
    }
    fn apply(&self, v: f64) -> f64 {
        self * v
    }
}

impl BandEntry for Matrix2<f64> {
    type Rhs = Point;

    fn zero() -> Self {
        Matrix2::zeros()
    }
    fn magnitude(&self) -> f64 {
        self.abs().row_sum().max()
    }
    // |det| / ||A||_F is a lower bound on the smallest singular value.
    fn pivot_magnitude(&self) -> f64 {
        let fro = self.norm();
        if fro == 0.0 {
            0.0
        } else {
            self.determinant().abs() / fro
        }
    }
    fn inverse(&self) -> Self {
        let det = self.determinant();
        Matrix2::new(self[(1, 1)], -self[(0, 1)], -self[(1, 0)], self[(0, 0)]) / det
    }
    fn apply(&self, v: Point) -> Point {
        self * v
    }
}

fn check_pivot<T: BandEntry>(pivot: &T, index: usize, tolerance: f64) -> Result<T> {
    let magnitude = pivot.pivot_magnitude();
    if !(magnitude > tolerance) {
        return Err(Error::Singular {
            pivot: index,
            magnitude,
            tolerance,
        });
    }
    Ok(pivot.inverse())
}

fn solve_banded<T: BandEntry>(
    sub: &[T],
    diag: &[T],
    sup: &[T],
    rhs: &[T::Rhs],
) -> Result<Vec<T::Rhs>> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: n,
        });
    }
    if sub.len() != n || sup.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: sub.len().min(sup.len()),
        });
    }
    if rhs.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: rhs.len(),
        });
    }

    let scale = (0..n)
        .map(|i| sub[i].magnitude() + diag[i].magnitude() + sup[i].magnitude())
        .fold(0.0, f64::max);
    let tolerance = PIVOT_TOLERANCE * scale;

    let last = n - 1;
    // Rows 0..last after elimination: d[k] x_k + u[k] x_{k+1} + c[k] x_last.
    let mut d = diag[..last].to_vec();
    let mut u: Vec<T> = sup[..last].to_vec();
    let mut c = vec![T::zero(); last];
    let mut y = rhs[..last].to_vec();
    c[0] = sub[0];
    // row last-1 couples to x_last through its super-diagonal
    c[last - 1] = c[last - 1] + u[last - 1];
    u[last - 1] = T::zero();

    // Last row: l[k] is its entry in column k.
    let mut l = vec![T::zero(); last];
    l[0] = sup[last];
    l[last - 1] = l[last - 1] + sub[last];
    let mut d_last = diag[last];
    let mut y_last = rhs[last];

    let mut inv = Vec::with_capacity(last);
    for k in 0..last {
        let pivot_inv = check_pivot(&d[k], k, tolerance)?;
        inv.push(pivot_inv);
        if k + 1 < last {
            let m = sub[k + 1] * pivot_inv;
            d[k + 1] = d[k + 1] - m * u[k];
            c[k + 1] = c[k + 1] - m * c[k];
            y[k + 1] = y[k + 1] - m.apply(y[k]);
        }
        let m = l[k] * pivot_inv;
        if k + 1 < last {
            l[k + 1] = l[k + 1] - m * u[k];
        }
        d_last = d_last - m * c[k];
        y_last = y_last - m.apply(y[k]);
    }

    let mut x = vec![rhs[0]; n];
    x[last] = check_pivot(&d_last, last, tolerance)?.apply(y_last);
    for k in (0..last).rev() {
        let mut r = y[k] - c[k].apply(x[last]);
        if k + 1 < last {
            r = r - u[k].apply(x[k + 1]);
        }
        x[k] = inv[k].apply(r);
    }
    Ok(x)
}

pub fn solve_cyclic_tridiag(a: &CyclicTridiagonal, b: &[f64]) -> Result<Vec<f64>> {
    solve_banded(&a.sub, &a.diag, &a.sup, b)
}

pub fn solve_block_cyclic(a: &BlockCyclicTridiagonal, b: &[Point]) -> Result<Vec<Point>> {
    solve_banded(&a.sub, &a.diag, &a.sup, b)
}

/// `||Ax - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)`.
pub fn relative_residual(a: &CyclicTridiagonal, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.apply(x);
    let res = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    let xn = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let bn = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    res / (a.norm_inf() * xn + bn).max(f64::MIN_POSITIVE)
}

pub fn block_relative_residual(a: &BlockCyclicTridiagonal, x: &[Point], b: &[Point]) -> f64 {
    let ax = a.apply(x);
    let res = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q).amax())
        .fold(0.0, f64::max);
    let xn = x.iter().map(|v| v.amax()).fold(0.0, f64::max);
    let bn = b.iter().map(|v| v.amax()).fold(0.0, f64::max);
    res / (a.norm_inf() * xn + bn).max(f64::MIN_POSITIVE)
}

pub mod dense {
    //! Gaussian elimination with partial pivoting on dense row-major matrices.

    use crate::error::{Error, Result};

    pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
        let n = b.len();
        if a.len() != n || a.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                found: a.len(),
            });
        }
        let scale = a
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap_or(k);
            if !(a[p][k].abs() > super::PIVOT_TOLERANCE * scale) {
                return Err(Error::Singular {
                    pivot: k,
                    magnitude: a[p][k].abs(),
                    tolerance: super::PIVOT_TOLERANCE * scale,
                });
            }
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let m = a[i][k] / a[k][k];
                if m != 0.0 {
                    for j in k..n {
                        a[i][j] -= m * a[k][j];
                    }
                    b[i] -= m * b[k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        Ok(x)
    }
}
