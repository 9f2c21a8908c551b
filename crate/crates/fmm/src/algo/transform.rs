//! Structural transforms of validated algorithms: cyclic rotation,
//! transposition via vec-permutation matrices, and row permutations.
//!
//! Rotation and transposition of a correct algorithm are always correct, so
//! those functions revalidate internally and treat failure as a bug (panic).
//! [`permute_rows`] accepts arbitrary permutations, which can break
//! correctness; it returns the violation list as a caller error instead.

use super::{validate, AlgoError, BilinearAlgorithm, UnvalidatedAlgorithm};

// ---------------------------------------------------------------------------
// Permutations
// ---------------------------------------------------------------------------

/// A permutation of `{0, .., n-1}` stored as a source map: applying it to the
/// rows of a matrix puts input row `map[d]` at output row `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perm {
    map: Vec<usize>,
}

impl Perm {
    /// Identity permutation of the given order.
    pub fn identity(n: usize) -> Self {
        Perm {
            map: (0..n).collect(),
        }
    }

    /// Builds a permutation from its source map, checking bijectivity.
    pub fn from_map(map: Vec<usize>) -> Result<Self, AlgoError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &s in &map {
            if s >= n || seen[s] {
                return Err(AlgoError::Structural(format!(
                    "not a permutation of 0..{n}: {map:?}"
                )));
            }
            seen[s] = true;
        }
        Ok(Perm { map })
    }

    /// Transposition of two positions in an otherwise-identity permutation.
    pub fn swap(n: usize, a: usize, b: usize) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a, b);
        Perm { map }
    }

    /// Order of the permuted set.
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The source map: output position `d` takes input position `map[d]`.
    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Inverse permutation.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (d, &s) in self.map.iter().enumerate() {
            inv[s] = d;
        }
        Perm { map: inv }
    }
}

/// The vec-permutation matrix `P_{m,n}` of order `m*n` satisfying
/// `P * vec_colmajor(X) = vec_rowmajor(X)` for every `m x n` matrix `X`.
///
/// `P_{m,n}` and `P_{n,m}` are inverses.
pub fn vec_permutation(m: usize, n: usize) -> Perm {
    // Row-major position (r, c) = r*n + c reads column-major position r + c*m.
    let mut map = vec![0; m * n];
    for r in 0..m {
        for c in 0..n {
            map[r * n + c] = r + c * m;
        }
    }
    Perm { map }
}

/// Kronecker product of two permutation matrices: block structure follows the
/// first factor, within-block structure the second.
pub fn kron(a: &Perm, b: &Perm) -> Perm {
    let nb = b.len();
    let mut map = Vec::with_capacity(a.len() * nb);
    for &sa in a.map() {
        for &sb in b.map() {
            map.push(sa * nb + sb);
        }
    }
    Perm { map }
}

// ---------------------------------------------------------------------------
// Algorithm transforms
// ---------------------------------------------------------------------------

/// Cyclic rotation `[[U, V, W]] -> [[W, U, V]]`: a valid algorithm for
/// `<n0, m0, k0>`. Applying it three times returns an algorithm equivalent to
/// the input up to column ordering.
pub fn cyclic_rotate(alg: &BilinearAlgorithm) -> BilinearAlgorithm {
    let (m0, k0, n0) = alg.dims();
    let candidate = UnvalidatedAlgorithm {
        name: format!("rot({})", alg.name()),
        m0: n0,
        k0: m0,
        n0: k0,
        u: alg.w().clone(),
        v: alg.u().clone(),
        w: alg.v().clone(),
    };
    validate(candidate).unwrap_or_else(|e| {
        panic!("internal error: cyclic rotation broke correctness: {e}")
    })
}

/// Transposition transform `[[P_{k0,n0} V, P_{m0,k0} U, P_{n0,m0} W]]`:
/// a valid algorithm for `<n0, k0, m0>` (it computes `C^T = B^T A^T` in the
/// original algorithm's terms, reindexed by vec-permutation matrices).
pub fn transpose_transform(alg: &BilinearAlgorithm) -> BilinearAlgorithm {
    let (m0, k0, n0) = alg.dims();
    let u = alg
        .v()
        .permuted_rows(&vec_permutation(k0, n0))
        .expect("vec permutation order matches V rows");
    let v = alg
        .u()
        .permuted_rows(&vec_permutation(m0, k0))
        .expect("vec permutation order matches U rows");
    let w = alg
        .w()
        .permuted_rows(&vec_permutation(n0, m0))
        .expect("vec permutation order matches W rows");
    let candidate = UnvalidatedAlgorithm {
        name: format!("tr({})", alg.name()),
        m0: n0,
        k0,
        n0: m0,
        u,
        v,
        w,
    };
    validate(candidate).unwrap_or_else(|e| {
        panic!("internal error: transposition transform broke correctness: {e}")
    })
}

/// Applies row permutations to U, V, W: `[[pU U, pV V, pW W]]`. Unlike
/// rotation and transposition this is not correctness-preserving for
/// arbitrary permutations; an incorrect result is reported as a caller error
/// ("not a matmul-preserving transform") carrying the violation list.
pub fn permute_rows(
    alg: &BilinearAlgorithm,
    p_u: &Perm,
    p_v: &Perm,
    p_w: &Perm,
) -> Result<BilinearAlgorithm, AlgoError> {
    let (m0, k0, n0) = alg.dims();
    let candidate = UnvalidatedAlgorithm {
        name: format!("perm({})", alg.name()),
        m0,
        k0,
        n0,
        u: alg.u().permuted_rows(p_u)?,
        v: alg.v().permuted_rows(p_v)?,
        w: alg.w().permuted_rows(p_w)?,
    };
    match validate(candidate) {
        Ok(result) => Ok(result),
        Err(AlgoError::Invalid(violations)) => Err(AlgoError::NotMatmulPreserving(violations)),
        Err(other) => Err(other),
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
