//! Exact dense linear algebra over Gaussian rationals.

use super::exact::ExactScalar;
use crate::error::{Result, VoxError};

pub type Matrix = Vec<Vec<ExactScalar>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { ExactScalar::one() } else { ExactScalar::zero() }).collect())
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let k = b.len();
    let mut out = vec![vec![ExactScalar::zero(); m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[t][j].is_zero() {
                    out[i][j] += &a[i][t] * &b[t][j];
                }
            }
        }
    }
    out
}

pub fn transpose(a: &Matrix) -> Matrix {
    let m = a.first().map_or(0, |r| r.len());
    (0..m).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Outcome of reducing `[A | B]`.
pub struct Solution {
    /// One particular solution per right-hand side column (free variables set to 0).
    pub columns: Vec<Vec<ExactScalar>>,
    pub rank: usize,
    pub unknowns: usize,
}

impl Solution {
    pub fn is_unique(&self) -> bool {
        self.rank == self.unknowns
    }
}

/// Solves `A X = B` for consistent (possibly over-determined) systems.
/// Fails with [`VoxError::InconsistentSamples`] when some column has no solution.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Solution> {
    let rows = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let nrhs = b.first().map_or(0, |r| r.len());
    let mut m: Matrix = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb.iter()).cloned().collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv()?;
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &(&f * p);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    for row in m.iter().skip(r) {
        if row[n..].iter().any(|x| !x.is_zero()) {
            return Err(VoxError::InconsistentSamples("linear system has no solution".into()));
        }
    }
    let mut columns = vec![vec![ExactScalar::zero(); n]; nrhs];
    for (i, &c) in pivots.iter().enumerate() {
        for (k, col) in columns.iter_mut().enumerate() {
            col[c] = m[i][n + k].clone();
        }
    }
    Ok(Solution { columns, rank: pivots.len(), unknowns: n })
}

/// Exact inverse of a square matrix.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.len();
    let sol = solve(a, &identity(n)).map_err(|_| VoxError::Singular)?;
    if !sol.is_unique() {
        return Err(VoxError::Singular);
    }
    Ok(transpose(&sol.columns))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| ExactScalar::from_int(x)).collect()).collect()
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(matmul(&a, &inv), identity(3));
    }

    #[test]
    fn singular_detected() {
        let a = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(inverse(&a), Err(VoxError::Singular));
    }

    #[test]
    fn overdetermined_consistent_and_not() {
        let a = m(&[&[1, 0], &[0, 1], &[1, 1]]);
        let ok = solve(&a, &m(&[&[1], &[2], &[3]])).unwrap();
        assert!(ok.is_unique());
        assert_eq!(ok.columns[0], vec![ExactScalar::from_int(1), ExactScalar::from_int(2)]);
        assert!(solve(&a, &m(&[&[1], &[2], &[4]])).is_err());
    }
}
