// SPDX-License-Identifier: Apache-2.0

//! Square integer matrices with overflow-checked arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Square `n x n` integer matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<i64>>", try_from = "Vec<Vec<i64>>")]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotSquare;

impl fmt::Display for NotSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("matrix is not square")
    }
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, NotSquare> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(NotSquare);
        }
        Ok(IntMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn neg(&self) -> Self {
        IntMatrix {
            n: self.n,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }

    /// `None` on `i64` overflow.
    pub fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc: i64 = 0;
                for l in 0..n {
                    acc = acc.checked_add(self.get(i, l).checked_mul(rhs.get(l, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Some(out)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = self
            .rows()
            .into_iter()
            .map(|r| r.into_iter().map(BigInt::from).collect())
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }
}

impl From<IntMatrix> for Vec<Vec<i64>> {
    fn from(m: IntMatrix) -> Self {
        m.rows()
    }
}

impl TryFrom<Vec<Vec<i64>>> for IntMatrix {
    type Error = NotSquare;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self, Self::Error> {
        IntMatrix::from_rows(rows)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(i64::to_string).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_small() {
        let m = IntMatrix::from_rows(vec![vec![-1, 1], vec![0, 1]]).unwrap();
        assert_eq!(m.determinant(), BigInt::from(-1));
        let m = IntMatrix::from_rows(vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(m.determinant(), BigInt::from(-1));
        let m = IntMatrix::from_rows(vec![vec![2, 1, 3], vec![0, 4, 1], vec![5, 2, 0]]).unwrap();
        // 2(0-2) - 1(0-5) + 3(0-20) = -59
        assert_eq!(m.determinant(), BigInt::from(-59));
        let singular = IntMatrix::from_rows(vec![vec![1, 2], vec![2, 4]]).unwrap();
        assert!(singular.determinant().is_zero());
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(IntMatrix::from_rows(vec![vec![0, 1], vec![1]]).is_err());
    }

    #[test]
    fn mul_overflow_is_detected() {
        let big = IntMatrix::from_rows(vec![vec![i64::MAX, 1], vec![1, 1]]).unwrap();
        assert!(big.checked_mul(&big).is_none());
        let id = IntMatrix::identity(2);
        assert_eq!(big.checked_mul(&id).unwrap(), big);
    }
}
