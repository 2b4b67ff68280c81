//! Small dense linear solvers used by the absorption and stationary
//! computations. Systems here are at most 100×100.

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Largest acceptable `|Ax - b|` entry after a floating-point solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("singular system (no usable pivot in column {0})")]
    Singular(usize),
    #[error("residual {0:e} exceeds tolerance")]
    Residual(f64),
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting, then
/// verifies the residual.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();

    for k in 0..n {
        let (pivot_row, pivot_abs) = (k..n)
            .map(|i| (i, m[i][k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs < 1e-14 {
            return Err(LinalgError::Singular(k));
        }
        m.swap(k, pivot_row);
        rhs.swap(k, pivot_row);
        let (upper, lower) = m.split_at_mut(k + 1);
        let pivot = &upper[k];
        for (off, row) in lower.iter_mut().enumerate() {
            let factor = row[k] / pivot[k];
            if factor == 0.0 {
                continue;
            }
            row[k] = 0.0;
            for j in k + 1..n {
                row[j] -= factor * pivot[j];
            }
            rhs[k + 1 + off] -= factor * rhs[k];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (rhs[i] - s) / m[i][i];
    }

    let residual = a
        .iter()
        .zip(b)
        .map(|(row, bi)| (row.iter().zip(&x).map(|(aij, xj)| aij * xj).sum::<f64>() - bi).abs())
        .fold(0.0, f64::max);
    if residual > RESIDUAL_TOLERANCE || !residual.is_finite() {
        return Err(LinalgError::Residual(residual));
    }
    Ok(x)
}

/// Exact Gaussian elimination over the rationals.
pub fn solve_exact(a: &[Vec<BigRational>], b: &[BigRational]) -> Result<Vec<BigRational>, LinalgError> {
    let n = b.len();
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    let mut rhs = b.to_vec();

    for k in 0..n {
        let pivot_row = (k..n)
            .find(|&i| !m[i][k].is_zero())
            .ok_or(LinalgError::Singular(k))?;
        m.swap(k, pivot_row);
        rhs.swap(k, pivot_row);
        let inv = BigRational::one() / &m[k][k];
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let factor = &m[i][k] * &inv;
            for j in k + 1..n {
                if !m[k][j].is_zero() {
                    let delta = &factor * &m[k][j];
                    m[i][j] -= delta;
                }
            }
            m[i][k] = BigRational::zero();
            let delta = &factor * &rhs[k];
            rhs[i] -= delta;
        }
    }

    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i].clone();
        for j in i + 1..n {
            if !m[i][j].is_zero() {
                s -= &m[i][j] * &x[j];
            }
        }
        x[i] = s / &m[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn solves_small_system() {
        let a = vec![vec![0.0, 2.0], vec![3.0, 1.0]];
        let x = solve(&a, &[4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn detects_singular() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(solve(&a, &[1.0, 2.0]), Err(LinalgError::Singular(1))));
        let a = vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]];
        assert!(solve_exact(&a, &[q(1, 1), q(2, 1)]).is_err());
    }

    #[test]
    fn exact_matches_float() {
        let a = vec![
            vec![q(1, 1), q(-1, 6), q(0, 1)],
            vec![q(-1, 3), q(1, 1), q(-1, 2)],
            vec![q(0, 1), q(-1, 6), q(5, 6)],
        ];
        let b = vec![q(1, 6), q(0, 1), q(1, 3)];
        let exact = solve_exact(&a, &b).unwrap();
        let af: Vec<Vec<f64>> = a
            .iter()
            .map(|r| r.iter().map(to_f64).collect())
            .collect();
        let bf: Vec<f64> = b.iter().map(to_f64).collect();
        let x = solve(&af, &bf).unwrap();
        for (e, f) in exact.iter().zip(&x) {
            assert!((to_f64(e) - f).abs() < 1e-14);
        }
    }

    fn to_f64(r: &BigRational) -> f64 {
        use num_traits::ToPrimitive;
        r.to_f64().unwrap()
    }
}
