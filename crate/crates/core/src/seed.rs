// SPDX-License-Identifier: Apache-2.0

//! Labeled seeds, matrix and seed mutation, and C-matrices.
//!
//! Direction indices are zero-based throughout the library. Text and JSON
//! surfaces (paths in exported files, the CLI) use one-based directions.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::laurent::{LaurentError, LaurentPoly, MAX_RANK};
use crate::matrix::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeedError {
    #[error("matrix is not skew-symmetrizable: {0}")]
    NotSkewSymmetrizable(String),
    #[error("direction {k} out of range for rank {rank}")]
    DirectionOutOfRange { k: usize, rank: usize },
    #[error("column {k} of C-matrix {matrix} is not sign-coherent")]
    SignCoherenceViolated { k: usize, matrix: String },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

impl SeedError {
    pub fn is_division_not_exact(&self) -> bool {
        matches!(self, SeedError::Laurent(LaurentError::DivisionNotExact { .. }))
    }
}

fn pos(x: i64) -> i64 {
    x.max(0)
}

fn check_direction(k: usize, rank: usize) -> Result<(), SeedError> {
    if k < rank {
        Ok(())
    } else {
        Err(SeedError::DirectionOutOfRange { k, rank })
    }
}

/// Finds the smallest positive integer symmetrizer `s` with `s_i b_ij = -s_j b_ji`.
///
/// Ratios `s_j / s_i` are propagated along each connected component of the
/// nonzero pattern, then each component is scaled to coprime integers.
pub fn check_symmetrizer(b: &IntMatrix) -> Result<Vec<u64>, SeedError> {
    let n = b.size();
    let fail = |msg: String| Err(SeedError::NotSkewSymmetrizable(msg));
    for i in 0..n {
        if b.get(i, i) != 0 {
            return fail(format!("diagonal entry b{0}{0} is nonzero", i + 1));
        }
        for j in 0..n {
            let (x, y) = (b.get(i, j), b.get(j, i));
            if (x == 0) != (y == 0) || (x != 0 && x.signum() == y.signum()) {
                return fail(format!("sign pattern violated at ({}, {})", i + 1, j + 1));
            }
        }
    }

    // s as reduced fractions (num, den)
    let mut ratio: Vec<Option<(i128, i128)>> = vec![None; n];
    let mut out = vec![0u64; n];
    for start in 0..n {
        if ratio[start].is_some() {
            continue;
        }
        ratio[start] = Some((1, 1));
        let mut component = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let (p, q) = ratio[i].expect("visited");
            for j in 0..n {
                let bij = b.get(i, j) as i128;
                if bij == 0 {
                    continue;
                }
                let bji = b.get(j, i) as i128;
                // s_j = s_i * b_ij / (-b_ji)
                let num = p * bij;
                let den = q * -bji;
                let g = num.gcd(&den) * den.signum();
                let cand = (num / g, den / g);
                match ratio[j] {
                    None => {
                        ratio[j] = Some(cand);
                        component.push(j);
                        queue.push_back(j);
                    }
                    Some(existing) if existing != cand => {
                        return fail(format!(
                            "inconsistent ratios around ({}, {})",
                            i + 1,
                            j + 1
                        ));
                    }
                    Some(_) => {}
                }
            }
        }
        let lcm = component
            .iter()
            .fold(1i128, |acc, &i| acc.lcm(&ratio[i].expect("visited").1));
        let scaled: Vec<i128> = component
            .iter()
            .map(|&i| {
                let (p, q) = ratio[i].expect("visited");
                p * (lcm / q)
            })
            .collect();
        let g = scaled.iter().fold(0i128, |acc, v| acc.gcd(v));
        for (&i, v) in component.iter().zip(&scaled) {
            out[i] = u64::try_from(v / g).map_err(|_| SeedError::Overflow("symmetrizer"))?;
        }
    }
    Ok(out)
}

/// Skew-symmetrizable exchange matrix together with a symmetrizer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExchangeMatrix {
    b: IntMatrix,
    symmetrizer: Vec<u64>,
}

impl ExchangeMatrix {
    /// Validates the matrix and computes its minimal symmetrizer.
    pub fn new(b: IntMatrix) -> Result<Self, SeedError> {
        if b.size() > MAX_RANK {
            return Err(LaurentError::RankTooLarge(b.size()).into());
        }
        let symmetrizer = check_symmetrizer(&b)?;
        Ok(ExchangeMatrix { b, symmetrizer })
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, SeedError> {
        let b = IntMatrix::from_rows(rows)
            .map_err(|_| SeedError::NotSkewSymmetrizable("matrix is not square".into()))?;
        Self::new(b)
    }

    /// Uses a caller-supplied symmetrizer, which must be positive and valid.
    pub fn with_symmetrizer(b: IntMatrix, symmetrizer: Vec<u64>) -> Result<Self, SeedError> {
        let m = Self::new(b)?;
        if symmetrizer.len() != m.rank() || symmetrizer.contains(&0) {
            return Err(SeedError::NotSkewSymmetrizable(
                "symmetrizer must have one positive entry per row".into(),
            ));
        }
        if !m.is_symmetrized_by(&symmetrizer) {
            return Err(SeedError::NotSkewSymmetrizable(
                "supplied symmetrizer does not make SB skew-symmetric".into(),
            ));
        }
        Ok(ExchangeMatrix { b: m.b, symmetrizer })
    }

    pub fn rank(&self) -> usize {
        self.b.size()
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.b.get(i, j)
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.b
    }

    pub fn symmetrizer(&self) -> &[u64] {
        &self.symmetrizer
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.b.rows()
    }

    /// Entrywise check of `s_i b_ij = -s_j b_ji`.
    pub fn is_symmetrized_by(&self, s: &[u64]) -> bool {
        let n = self.rank();
        s.len() == n
            && (0..n).all(|i| {
                (0..n).all(|j| {
                    (s[i] as i128) * (self.get(i, j) as i128)
                        == -(s[j] as i128) * (self.get(j, i) as i128)
                })
            })
    }

    /// `-B`; the same symmetrizer still applies.
    pub fn neg(&self) -> Self {
        ExchangeMatrix {
            b: self.b.neg(),
            symmetrizer: self.symmetrizer.clone(),
        }
    }

    /// Matrix mutation in direction `k`.
    pub fn mutate(&self, k: usize) -> Result<Self, SeedError> {
        let n = self.rank();
        check_direction(k, n)?;
        let mut out = IntMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let bij = self.get(i, j);
                let v = if i == k || j == k {
                    -bij
                } else {
                    let bik = self.get(i, k);
                    let bkj = self.get(k, j);
                    pos(bik)
                        .checked_mul(bkj)
                        .and_then(|a| bik.checked_mul(pos(-bkj)).and_then(|b| a.checked_add(b)))
                        .and_then(|d| bij.checked_add(d))
                        .ok_or(SeedError::Overflow("matrix mutation"))?
                };
                out.set(i, j, v);
            }
        }
        let mutated = ExchangeMatrix {
            b: out,
            symmetrizer: self.symmetrizer.clone(),
        };
        debug_assert!(mutated.is_symmetrized_by(&mutated.symmetrizer));
        Ok(mutated)
    }
}

/// The C-matrix: column `j` is the c-vector `c_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CMatrix(IntMatrix);

impl CMatrix {
    pub fn identity(n: usize) -> Self {
        CMatrix(IntMatrix::identity(n))
    }

    pub fn from_matrix(m: IntMatrix) -> Self {
        CMatrix(m)
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.size()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.0.column(j)
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.0.rows()
    }

    /// Sign of column `k`: `+1` if it is nonnegative, `-1` if nonpositive.
    /// Zero and mixed-sign columns are reported as sign-coherence violations.
    pub fn epsilon(&self, k: usize) -> Result<i64, SeedError> {
        check_direction(k, self.rank())?;
        let col = self.column(k);
        let has_pos = col.iter().any(|&v| v > 0);
        let has_neg = col.iter().any(|&v| v < 0);
        match (has_pos, has_neg) {
            (true, false) => Ok(1),
            (false, true) => Ok(-1),
            _ => Err(SeedError::SignCoherenceViolated {
                k,
                matrix: self.0.to_string(),
            }),
        }
    }

    pub fn column_is_nonnegative(&self, j: usize) -> bool {
        (0..self.rank()).all(|i| self.0.get(i, j) >= 0)
    }

    pub fn determinant(&self) -> BigInt {
        self.0.determinant()
    }

    /// Every column nonzero and sign-coherent, and `det = ±1`.
    pub fn check_sign_coherent(&self) -> Result<(), SeedError> {
        for k in 0..self.rank() {
            self.epsilon(k)?;
        }
        if self.determinant().abs() != BigInt::from(1) {
            return Err(SeedError::SignCoherenceViolated {
                k: usize::MAX,
                matrix: format!("{} (determinant {})", self.0, self.determinant()),
            });
        }
        Ok(())
    }

    /// c-vector recurrence across the edge `t --k-- t'`, where `b` is `B_t`.
    pub fn mutate(&self, b: &ExchangeMatrix, k: usize) -> Result<Self, SeedError> {
        let n = self.rank();
        check_direction(k, n)?;
        if b.rank() != n {
            return Err(SeedError::RankMismatch {
                expected: n,
                got: b.rank(),
            });
        }
        let ck = self.column(k);
        let mut out = IntMatrix::zeros(n);
        for j in 0..n {
            let bkj = b.get(k, j);
            for i in 0..n {
                let v = if j == k {
                    -ck[i]
                } else {
                    pos(bkj)
                        .checked_mul(ck[i])
                        .and_then(|a| bkj.checked_mul(pos(-ck[i])).and_then(|b| a.checked_add(b)))
                        .and_then(|d| self.0.get(i, j).checked_add(d))
                        .ok_or(SeedError::Overflow("c-vector recurrence"))?
                };
                out.set(i, j, v);
            }
        }
        Ok(CMatrix(out))
    }
}

/// A vertex of the n-regular tree, as a reduced path of directions from a fixed root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePath(Vec<usize>);

impl TreePath {
    pub fn root() -> Self {
        TreePath(Vec::new())
    }

    /// Builds a path by walking `steps` from the root, cancelling immediate repeats.
    pub fn from_steps(steps: impl IntoIterator<Item = usize>) -> Self {
        let mut p = TreePath::root();
        for k in steps {
            p.push(k);
        }
        p
    }

    pub fn steps(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Walks one edge; stepping back along the last edge shortens the path.
    pub fn push(&mut self, k: usize) {
        if self.0.last() == Some(&k) {
            self.0.pop();
        } else {
            self.0.push(k);
        }
    }

    pub fn child(&self, k: usize) -> Self {
        let mut p = self.clone();
        p.push(k);
        p
    }

    /// Directions of the unique tree path from `self` to `other`.
    pub fn route_to(&self, other: &TreePath) -> Vec<usize> {
        let common = self
            .0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count();
        self.0[common..]
            .iter()
            .rev()
            .chain(other.0[common..].iter())
            .copied()
            .collect()
    }

    /// One-based directions for display and JSON.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|k| k + 1).collect()
    }

    /// All reduced paths of length at most `depth` in the rank-`n` tree, shortest first.
    pub fn all_up_to(n: usize, depth: usize) -> Vec<TreePath> {
        let mut out = vec![TreePath::root()];
        let mut level = vec![TreePath::root()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for p in &level {
                for k in 0..n {
                    if p.last() != Some(k) {
                        next.push(p.child(k));
                    }
                }
            }
            out.extend(next.iter().cloned());
            level = next;
        }
        out
    }
}

/// Replays the c-vector recurrence from a root carrying `root_matrix` (with the
/// identity C-matrix) along `route`, returning the matrix and C-matrix at the end.
pub fn replay(root_matrix: &ExchangeMatrix, route: &[usize]) -> Result<(ExchangeMatrix, CMatrix), SeedError> {
    let mut b = root_matrix.clone();
    let mut c = CMatrix::identity(b.rank());
    for &k in route {
        c = c.mutate(&b, k)?;
        b = b.mutate(k)?;
    }
    Ok((b, c))
}

/// Exchange matrices and C-matrices of the seed pattern generated by one initial matrix.
#[derive(Debug, Clone)]
pub struct SeedPattern {
    initial: ExchangeMatrix,
}

impl SeedPattern {
    pub fn new(initial: ExchangeMatrix) -> Self {
        SeedPattern { initial }
    }

    pub fn initial(&self) -> &ExchangeMatrix {
        &self.initial
    }

    pub fn rank(&self) -> usize {
        self.initial.rank()
    }

    pub fn matrix_at(&self, t: &TreePath) -> Result<ExchangeMatrix, SeedError> {
        t.steps().iter().try_fold(self.initial.clone(), |b, &k| b.mutate(k))
    }

    /// `C_target` with respect to `root`, whose matrix is `B_root`.
    pub fn cmatrix(&self, root: &TreePath, target: &TreePath) -> Result<CMatrix, SeedError> {
        let b = self.matrix_at(root)?;
        Ok(replay(&b, &root.route_to(target))?.1)
    }

    /// `C_target` with respect to `root` after assigning `-B_root` to `root`.
    pub fn cmatrix_opposite(&self, root: &TreePath, target: &TreePath) -> Result<CMatrix, SeedError> {
        let b = self.matrix_at(root)?.neg();
        Ok(replay(&b, &root.route_to(target))?.1)
    }

    /// C-matrix at `t` with respect to `s' = s·k`, computed from the C-matrix with
    /// respect to `s` as `(J_k + [-eps_k(C_s^{-B_t;t}) B_s]_+^{k•}) C_t^{B_s;s}`.
    pub fn transition_cmatrix(&self, s: &TreePath, k: usize, t: &TreePath) -> Result<CMatrix, SeedError> {
        let n = self.rank();
        check_direction(k, n)?;
        let b_s = self.matrix_at(s)?;
        let c_t = self.cmatrix(s, t)?;
        let eps = self.cmatrix_opposite(t, s)?.epsilon(k)?;
        let mut m = IntMatrix::identity(n);
        m.set(k, k, -1);
        for j in 0..n {
            if j != k {
                m.set(k, j, pos(-eps * b_s.get(k, j)));
            }
        }
        let out = m
            .checked_mul(c_t.matrix())
            .ok_or(SeedError::Overflow("C-matrix transition"))?;
        Ok(CMatrix(out))
    }
}

/// Labeled seed: cluster, exchange matrix, C-matrix relative to the pattern root,
/// and the reduced tree path from that root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSeed {
    variables: Vec<LaurentPoly>,
    matrix: ExchangeMatrix,
    cmatrix: CMatrix,
    path: TreePath,
}

impl LabeledSeed {
    /// Initial seed `(x1, ..., xn)` with identity C-matrix.
    pub fn initial(matrix: ExchangeMatrix) -> Self {
        let n = matrix.rank();
        LabeledSeed {
            variables: (0..n).map(|i| LaurentPoly::variable(n, i)).collect(),
            cmatrix: CMatrix::identity(n),
            matrix,
            path: TreePath::root(),
        }
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    pub fn variables(&self) -> &[LaurentPoly] {
        &self.variables
    }

    pub fn matrix(&self) -> &ExchangeMatrix {
        &self.matrix
    }

    pub fn cmatrix(&self) -> &CMatrix {
        &self.cmatrix
    }

    pub fn path(&self) -> &TreePath {
        &self.path
    }

    /// Exchange-relation numerator `prod x_i^[b_ik]_+ + prod x_i^[-b_ik]_+`.
    fn exchange_binomial(&self, k: usize) -> Result<LaurentPoly, SeedError> {
        let n = self.rank();
        let mut plus = LaurentPoly::one(n);
        let mut minus = LaurentPoly::one(n);
        for (i, x) in self.variables.iter().enumerate() {
            let b = self.matrix.get(i, k);
            let e = u32::try_from(b.unsigned_abs()).map_err(|_| SeedError::Overflow("exponent"))?;
            if b > 0 {
                plus = plus.try_mul(&x.pow(e))?;
            } else if b < 0 {
                minus = minus.try_mul(&x.pow(e))?;
            }
        }
        Ok(plus.try_add(&minus)?)
    }

    /// Seed mutation in direction `k`.
    pub fn mutate(&self, k: usize) -> Result<Self, SeedError> {
        check_direction(k, self.rank())?;
        let new_var = self.exchange_binomial(k)?.exact_div(&self.variables[k])?;
        let mut variables = self.variables.clone();
        variables[k] = new_var;
        Ok(LabeledSeed {
            variables,
            cmatrix: self.cmatrix.mutate(&self.matrix, k)?,
            matrix: self.matrix.mutate(k)?,
            path: self.path.child(k),
        })
    }

    /// Applies the directions in order.
    pub fn mutate_along(&self, steps: &[usize]) -> Result<Self, SeedError> {
        steps.iter().try_fold(self.clone(), |s, &k| s.mutate(k))
    }

    pub fn record(&self) -> SeedRecord {
        SeedRecord {
            b: self.matrix.rows(),
            symmetrizer: self.matrix.symmetrizer().to_vec(),
            variables: self.variables.iter().map(ToString::to_string).collect(),
            c: self.cmatrix.rows(),
            path: self.path.one_based(),
        }
    }
}

/// JSON form of a labeled seed; `path` is one-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedRecord {
    #[serde(rename = "B")]
    pub b: Vec<Vec<i64>>,
    pub symmetrizer: Vec<u64>,
    pub variables: Vec<String>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<i64>>,
    pub path: Vec<usize>,
}
