//! Bilinear algorithm triples `[[U, V, W]]` with exact-rational coefficients.
//!
//! Row index conventions (zero-based throughout):
//!
//! - row `i` of `U` addresses entry `(rowA, colA)` of A with `i = rowA + colA * m0`
//!   (column-major);
//! - row `j` of `V` addresses entry `(rowB, colB)` of B with `j = rowB + colB * k0`
//!   (column-major);
//! - row `k` of `W` addresses entry `(rowC, colC)` of C with `k = rowC * n0 + colC`
//!   (row-major).
//!
//! An algorithm is correct exactly when, for every `(i, j, k)`, the sum
//! `sum_r u[i,r] * v[j,r] * w[k,r]` equals 1 if the triple encodes a classical
//! product term (`colA = rowB`, `rowA = rowC`, `colB = colC`) and 0 otherwise.
//! [`validate`] checks this in exact rational arithmetic; a
//! [`BilinearAlgorithm`] can only be obtained through it.

pub mod catalog;
mod parse;
mod transform;

pub use parse::{parse_algorithm, serialize_algorithm};
pub use transform::{cyclic_rotate, kron, permute_rows, transpose_transform, vec_permutation, Perm};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Exact rational scalar used for all coefficient arithmetic.
pub type Rat = BigRational;

/// Shorthand for an integer-valued [`Rat`].
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Shorthand for the rational `p / q`.
pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(p.into(), q.into())
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// A single violated correctness condition: the triple `(i, j, k)` whose
/// exact sum `sum_r u[i,r] * v[j,r] * w[k,r]` differs from the classical
/// tensor entry it must equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Row of `U` (entry of A, column-major index).
    pub i: usize,
    /// Row of `V` (entry of B, column-major index).
    pub j: usize,
    /// Row of `W` (entry of C, row-major index).
    pub k: usize,
    /// Required value: 1 for classical product terms, 0 otherwise.
    pub expected: Rat,
    /// The exact sum the candidate produced.
    pub got: Rat,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(i={}, j={}, k={}): expected {}, got {}",
            self.i, self.j, self.k, self.expected, self.got
        )
    }
}

/// Errors from constructing, parsing, or transforming algorithms.
#[derive(Debug, Error)]
pub enum AlgoError {
    /// Shapes, dimensions, or file syntax are inconsistent.
    #[error("structural error: {0}")]
    Structural(String),
    /// Malformed algorithm file; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// The triple is well-formed but mathematically incorrect.
    #[error("{} correctness violations, first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
    /// A row permutation produced an incorrect algorithm (caller error).
    #[error("not a matmul-preserving transform: {} violations", .0.len())]
    NotMatmulPreserving(Vec<Violation>),
}

// ---------------------------------------------------------------------------
// Rational matrices
// ---------------------------------------------------------------------------

/// Dense exact-rational matrix, row-major storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMat {
    /// Builds a matrix from row-major data; `data.len()` must be `rows * cols`.
    pub fn new(rows: usize, cols: usize, data: Vec<Rat>) -> Result<Self, AlgoError> {
        if data.len() != rows * cols {
            return Err(AlgoError::Structural(format!(
                "matrix data length {} does not match {} x {}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(RatMat { rows, cols, data })
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    /// Builds from integer row-major data.
    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Result<Self, AlgoError> {
        Self::new(rows, cols, data.iter().map(|&x| rat(x)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rat) {
        self.data[r * self.cols + c] = value;
    }

    /// Number of nonzero entries.
    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|x| !x.is_zero()).count()
    }

    /// One column as an owned vector.
    pub fn col(&self, c: usize) -> Vec<Rat> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    /// Returns the rows of the matrix reordered so that row `d` of the result
    /// is row `perm[d]` of the input.
    pub fn permuted_rows(&self, perm: &Perm) -> Result<Self, AlgoError> {
        if perm.len() != self.rows {
            return Err(AlgoError::Structural(format!(
                "permutation order {} does not match row count {}",
                perm.len(),
                self.rows
            )));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for d in 0..self.rows {
            let s = perm.map()[d];
            data.extend_from_slice(&self.data[s * self.cols..(s + 1) * self.cols]);
        }
        Ok(RatMat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

// ---------------------------------------------------------------------------
// Algorithm types
// ---------------------------------------------------------------------------

/// A candidate triple as read from a file or assembled by hand; shapes are
/// checked but correctness is not. Feed it to [`validate`].
#[derive(Debug, Clone)]
pub struct UnvalidatedAlgorithm {
    pub name: String,
    pub m0: usize,
    pub k0: usize,
    pub n0: usize,
    pub u: RatMat,
    pub v: RatMat,
    pub w: RatMat,
}

/// A validated bilinear algorithm for the base case `<m0, k0, n0>`.
///
/// Values of this type always satisfy the exact correctness condition; the
/// only constructor is [`validate`] (the transforms in this module revalidate
/// their results). Immutable after construction.
#[derive(Debug, Clone)]
pub struct BilinearAlgorithm {
    name: String,
    m0: usize,
    k0: usize,
    n0: usize,
    rank: usize,
    u: RatMat,
    v: RatMat,
    w: RatMat,
    floats: FloatCoeffs,
}

/// Per-column sparse `f64` copies of the coefficients, materialized once per
/// algorithm for the execution engine.
#[derive(Debug, Clone)]
pub(crate) struct FloatCoeffs {
    /// For each product r: the nonzero (row of U, coefficient) pairs, ascending row.
    pub u_cols: Vec<Vec<(usize, f64)>>,
    /// For each product r: the nonzero (row of V, coefficient) pairs, ascending row.
    pub v_cols: Vec<Vec<(usize, f64)>>,
    /// For each product r: the nonzero (row of W, coefficient) pairs, ascending row.
    pub w_cols: Vec<Vec<(usize, f64)>>,
}

fn sparse_cols(mat: &RatMat) -> Vec<Vec<(usize, f64)>> {
    (0..mat.cols())
        .map(|c| {
            (0..mat.rows())
                .filter(|&r| !mat.get(r, c).is_zero())
                .map(|r| {
                    let x = mat.get(r, c).to_f64().expect("coefficient out of f64 range");
                    (r, x)
                })
                .collect()
        })
        .collect()
}

impl BilinearAlgorithm {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Base-case dimensions `(m0, k0, n0)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.m0, self.k0, self.n0)
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Number of active multiplications R.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `(m0 * k0) x R` coefficient matrix over the entries of A.
    pub fn u(&self) -> &RatMat {
        &self.u
    }

    /// `(k0 * n0) x R` coefficient matrix over the entries of B.
    pub fn v(&self) -> &RatMat {
        &self.v
    }

    /// `(m0 * n0) x R` recombination matrix over the entries of C.
    pub fn w(&self) -> &RatMat {
        &self.w
    }

    /// Total nonzeros of U, V, W.
    pub fn nnz(&self) -> usize {
        self.u.nnz() + self.v.nnz() + self.w.nnz()
    }

    pub(crate) fn floats(&self) -> &FloatCoeffs {
        &self.floats
    }

    /// Same dimensions and identical coefficient matrices (names may differ).
    pub fn same_coefficients(&self, other: &BilinearAlgorithm) -> bool {
        self.dims() == other.dims() && self.u == other.u && self.v == other.v && self.w == other.w
    }

    /// Same dimensions and the same multiset of `(U, V, W)` column triples:
    /// equality modulo reordering of the R products. Checked by canonically
    /// sorting the column triples of both algorithms.
    pub fn equivalent_up_to_columns(&self, other: &BilinearAlgorithm) -> bool {
        if self.dims() != other.dims() || self.rank != other.rank {
            return false;
        }
        let cols = |alg: &BilinearAlgorithm| {
            let mut list: Vec<(Vec<Rat>, Vec<Rat>, Vec<Rat>)> = (0..alg.rank)
                .map(|r| (alg.u.col(r), alg.v.col(r), alg.w.col(r)))
                .collect();
            list.sort();
            list
        };
        cols(self) == cols(other)
    }

    /// Rebuilds the triple under a new name (revalidating is unnecessary:
    /// renaming cannot change correctness).
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

// ---------------------------------------------------------------------------
// Index conventions
// ---------------------------------------------------------------------------

/// Column-major index of entry `(rowA, colA)` of A into the rows of U.
pub fn index_a(row_a: usize, col_a: usize, m0: usize) -> usize {
    row_a + col_a * m0
}

/// Column-major index of entry `(rowB, colB)` of B into the rows of V.
pub fn index_b(row_b: usize, col_b: usize, k0: usize) -> usize {
    row_b + col_b * k0
}

/// Row-major index of entry `(rowC, colC)` of C into the rows of W.
pub fn index_c(row_c: usize, col_c: usize, n0: usize) -> usize {
    row_c * n0 + col_c
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Checks the candidate triple against every correctness condition in exact
/// rational arithmetic and returns the validated algorithm, or the full list
/// of violated `(i, j, k)` triples in lexicographic order.
///
/// The check evaluates all `(m0*k0) * (k0*n0) * (m0*n0)` triple products; the
/// nonzero work is proportional to `sum_r alpha_r * beta_r * gamma_r`, so even
/// the largest catalog base cases validate in well under a millisecond.
pub fn validate(candidate: UnvalidatedAlgorithm) -> Result<BilinearAlgorithm, AlgoError> {
    let UnvalidatedAlgorithm {
        name,
        m0,
        k0,
        n0,
        u,
        v,
        w,
    } = candidate;
    if m0 == 0 || k0 == 0 || n0 == 0 {
        return Err(AlgoError::Structural(format!(
            "base-case dimensions must be positive, got <{m0}, {k0}, {n0}>"
        )));
    }
    let rank = u.cols();
    if rank == 0 {
        return Err(AlgoError::Structural("rank must be positive".into()));
    }
    if v.cols() != rank || w.cols() != rank {
        return Err(AlgoError::Structural(format!(
            "U, V, W must all have rank {} columns (got {}, {}, {})",
            rank,
            u.cols(),
            v.cols(),
            w.cols()
        )));
    }
    for (label, mat, want) in [("U", &u, m0 * k0), ("V", &v, k0 * n0), ("W", &w, m0 * n0)] {
        if mat.rows() != want {
            return Err(AlgoError::Structural(format!(
                "{label} must have {want} rows for dims <{m0}, {k0}, {n0}>, got {}",
                mat.rows()
            )));
        }
    }

    // Accumulate the algorithm's tensor sparsely: only (i, j, k) hit by some
    // product r get an entry.
    let mut sums: HashMap<(usize, usize, usize), Rat> = HashMap::new();
    let u_cols = sparse_rat_cols(&u);
    let v_cols = sparse_rat_cols(&v);
    let w_cols = sparse_rat_cols(&w);
    for r in 0..rank {
        for &(i, ref ui) in &u_cols[r] {
            for &(j, ref vj) in &v_cols[r] {
                let uv = ui * vj;
                for &(k, ref wk) in &w_cols[r] {
                    let term = &uv * wk;
                    let slot = sums.entry((i, j, k)).or_insert_with(Rat::zero);
                    *slot += term;
                }
            }
        }
    }

    // Compare against the classical tensor over all triples, lexicographically.
    let mut violations = Vec::new();
    let zero = Rat::zero();
    let one = Rat::one();
    for i in 0..m0 * k0 {
        let (row_a, col_a) = (i % m0, i / m0);
        for j in 0..k0 * n0 {
            let (row_b, col_b) = (j % k0, j / k0);
            for k in 0..m0 * n0 {
                let (row_c, col_c) = (k / n0, k % n0);
                let expected = if col_a == row_b && row_a == row_c && col_b == col_c {
                    &one
                } else {
                    &zero
                };
                let got = sums.get(&(i, j, k)).unwrap_or(&zero);
                if got != expected {
                    violations.push(Violation {
                        i,
                        j,
                        k,
                        expected: expected.clone(),
                        got: got.clone(),
                    });
                }
            }
        }
    }
    if !violations.is_empty() {
        return Err(AlgoError::Invalid(violations));
    }

    let floats = FloatCoeffs {
        u_cols: sparse_cols(&u),
        v_cols: sparse_cols(&v),
        w_cols: sparse_cols(&w),
    };
    Ok(BilinearAlgorithm {
        name,
        m0,
        k0,
        n0,
        rank,
        u,
        v,
        w,
        floats,
    })
}

fn sparse_rat_cols(mat: &RatMat) -> Vec<Vec<(usize, Rat)>> {
    (0..mat.cols())
        .map(|c| {
            (0..mat.rows())
                .filter(|&r| !mat.get(r, c).is_zero())
                .map(|r| (r, mat.get(r, c).clone()))
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo::catalog;

    #[test]
    fn index_conventions_are_bijective() {
        let (m0, k0, n0) = (3, 2, 4);
        let mut seen_a = vec![false; m0 * k0];
        for col_a in 0..k0 {
            for row_a in 0..m0 {
                let i = index_a(row_a, col_a, m0);
                assert!(!seen_a[i]);
                seen_a[i] = true;
            }
        }
        assert!(seen_a.iter().all(|&s| s));
        let mut seen_c = vec![false; m0 * n0];
        for row_c in 0..m0 {
            for col_c in 0..n0 {
                let k = index_c(row_c, col_c, n0);
                assert!(!seen_c[k]);
                seen_c[k] = true;
            }
        }
        assert!(seen_c.iter().all(|&s| s));
    }

    #[test]
    fn strassen_validates() {
        let alg = catalog::strassen();
        assert_eq!(alg.dims(), (2, 2, 2));
        assert_eq!(alg.rank(), 7);
        assert_eq!(alg.nnz(), 36);
    }

    #[test]
    fn zero_w_violates_every_classical_triple() {
        let alg = catalog::strassen();
        let candidate = UnvalidatedAlgorithm {
            name: "broken".into(),
            m0: 2,
            k0: 2,
            n0: 2,
            u: alg.u().clone(),
            v: alg.v().clone(),
            w: RatMat::zeros(4, 7),
        };
        match validate(candidate) {
            Err(AlgoError::Invalid(violations)) => {
                // Exactly the m0*k0*n0 = 8 classical product terms are missed;
                // all other sums are zero as required.
                assert_eq!(violations.len(), 8);
                for v in &violations {
                    assert_eq!(v.expected, rat(1));
                    assert_eq!(v.got, rat(0));
                }
            }
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn sign_flip_is_detected() {
        let alg = catalog::strassen();
        let mut u = alg.u().clone();
        // Flip the sign of the first nonzero of U.
        'outer: for r in 0..u.rows() {
            for c in 0..u.cols() {
                if !u.get(r, c).is_zero() {
                    let flipped = -u.get(r, c).clone();
                    u.set(r, c, flipped);
                    break 'outer;
                }
            }
        }
        let candidate = UnvalidatedAlgorithm {
            name: "signflip".into(),
            m0: 2,
            k0: 2,
            n0: 2,
            u,
            v: alg.v().clone(),
            w: alg.w().clone(),
        };
        match validate(candidate) {
            Err(AlgoError::Invalid(violations)) => assert!(!violations.is_empty()),
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn violations_are_lexicographic() {
        let alg = catalog::strassen();
        let candidate = UnvalidatedAlgorithm {
            name: "broken".into(),
            m0: 2,
            k0: 2,
            n0: 2,
            u: alg.u().clone(),
            v: alg.v().clone(),
            w: RatMat::zeros(4, 7),
        };
        let Err(AlgoError::Invalid(violations)) = validate(candidate) else {
            panic!("expected Invalid");
        };
        let keys: Vec<_> = violations.iter().map(|v| (v.i, v.j, v.k)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn rank_zero_is_structural() {
        let candidate = UnvalidatedAlgorithm {
            name: "empty".into(),
            m0: 1,
            k0: 1,
            n0: 1,
            u: RatMat::zeros(1, 0),
            v: RatMat::zeros(1, 0),
            w: RatMat::zeros(1, 0),
        };
        assert!(matches!(validate(candidate), Err(AlgoError::Structural(_))));
    }

    #[test]
    fn equivalence_up_to_columns_sees_reordered_products() {
        let alg = catalog::strassen();
        let r = alg.rank();
        let swap_cols = |mat: &RatMat| {
            // Reverse the column order.
            let mut data = Vec::new();
            for row in 0..mat.rows() {
                for c in 0..r {
                    data.push(mat.get(row, r - 1 - c).clone());
                }
            }
            RatMat::new(mat.rows(), r, data).unwrap()
        };
        let reordered = validate(UnvalidatedAlgorithm {
            name: "strassen-reversed".into(),
            m0: 2,
            k0: 2,
            n0: 2,
            u: swap_cols(alg.u()),
            v: swap_cols(alg.v()),
            w: swap_cols(alg.w()),
        })
        .unwrap();
        assert!(alg.equivalent_up_to_columns(&reordered));
        assert!(!alg.same_coefficients(&reordered));
    }
}
