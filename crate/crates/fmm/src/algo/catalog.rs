//! Built-in coefficient catalog: the classical generator for any small base
//! case, Strassen's `<2,2,2>` rank-7 algorithm, a `<3,2,3>` rank-15 algorithm,
//! and a `<4,4,2>` rank-26 algorithm with half-integer coefficients.
//!
//! The constants are stored in the same text format the parser reads, with
//! rows already in this crate's index convention (U and V rows are
//! column-major entries of A and B, W rows are row-major entries of C), so
//! loading a catalog entry exercises the full parse + validate path.
//! Rotations and transposes are generated on demand via
//! [`crate::algo::cyclic_rotate`] and [`crate::algo::transpose_transform`].

use super::{parse_algorithm, validate, AlgoError, BilinearAlgorithm, Rat, RatMat};
use num_traits::One;

// ---------------------------------------------------------------------------
// Coefficient constants
// ---------------------------------------------------------------------------

const STRASSEN_TEXT: &str = "\
name strassen\n\
dims 2 2 2\n\
rank 7\n\
U\n\
1 0 1 0 1 -1 0\n\
0 1 0 0 0 1 0\n\
0 0 0 0 1 0 1\n\
1 1 0 1 0 0 -1\n\
V\n\
1 1 0 -1 0 1 0\n\
0 0 0 1 0 0 1\n\
0 0 1 0 0 1 0\n\
1 0 -1 0 1 0 1\n\
W\n\
1 0 0 1 -1 0 1\n\
0 0 1 0 1 0 0\n\
0 1 0 1 0 0 0\n\
1 -1 1 0 0 1 0\n\
";

const FAST323_TEXT: &str = "\
name fast323\n\
dims 3 2 3\n\
rank 15\n\
U\n\
0 1 0 0 -1 1 1 0 0 0 -1 0 0 0 -1\n\
0 1 0 0 0 0 0 -1 0 -1 0 0 1 -1 0\n\
0 0 0 1 0 0 0 -1 0 -1 1 0 0 -1 0\n\
-1 0 1 0 1 0 0 0 0 0 1 0 0 0 1\n\
-1 0 0 0 0 1 0 1 0 1 0 1 -1 0 0\n\
0 0 -1 0 0 0 0 1 1 0 -1 0 0 0 -1\n\
V\n\
0 0 1 1 0 0 0 0 0 0 1 0 0 1 1\n\
0 0 1 0 0 0 0 -1 1 -1 0 0 0 1 0\n\
0 -1 0 0 0 1 0 0 0 1 0 1 1 -1 0\n\
-1 0 0 0 0 0 0 1 0 1 0 1 0 -1 0\n\
0 1 1 0 0 0 1 0 0 0 1 0 0 0 1\n\
1 0 1 0 1 1 1 0 0 0 0 0 0 0 1\n\
W\n\
0 0 1 0 0 0 -1 0 1 0 0 0 0 0 -1\n\
1 0 0 0 1 1 0 0 0 0 0 -1 0 0 0\n\
0 0 0 0 1 0 1 0 0 0 0 0 0 0 0\n\
0 0 0 -1 0 0 0 0 0 -1 0 1 0 -1 0\n\
0 0 0 0 0 0 0 0 0 0 0 1 1 0 0\n\
0 1 0 0 0 1 -1 0 0 0 0 0 1 0 0\n\
0 0 0 1 0 0 0 0 1 0 0 0 0 0 0\n\
0 0 0 0 0 0 0 1 1 -1 0 0 -1 0 0\n\
0 0 0 -1 1 0 0 0 0 0 1 0 0 0 -1\n\
";

const FAST442_TEXT: &str = "\
name fast442\n\
dims 4 4 2\n\
rank 26\n\
U\n\
1 0 0 -1 0 0 0 0 -1 0 0 0 0 -1 0 0 0 0 0 0 0 0 0 0 0 0\n\
0 0 1 0 0 -1 0 0 0 0 1 1 1 -1 0 0 0 0 0 0 -1 0 0 1 0 0\n\
0 0 0 0 0 -1 0 0 0 0 1 1 1 0 0 0 0 0 0 0 0 0 0 0 0 0\n\
0 0 0 0 0 0 0 0 0 0 0 -1 0 1 0 0 0 0 0 0 0 0 0 0 0 0\n\
0 0 0 0 0 0 0 1/2 0 0 0 0 0 0 0 -1/2 1/2 1/2 0 0 0 0 0 0 0 0\n\
0 1 0 0 -1 0 0 1/2 0 0 0 0 0 0 0 0 0 1/2 0 0 0 -1 1 0 1 0\n\
0 1 0 0 -1 0 0 0 0 0 0 0 0 0 0 1/2 0 0 0 1/2 0 -1 1 0 1 0\n\
0 0 0 1/2 0 0 -1/2 -1/2 0 1/2 0 0 0 0 0 0 0 -1/2 0 0 -1/2 0 0 0 0 0\n\
0 1 0 0 0 0 0 1/2 0 0 0 0 0 0 0 0 0 0 -1/2 0 0 0 0 0 0 1\n\
0 1 0 0 0 0 0 1/2 0 0 0 0 0 0 0 0 0 0 -1/2 0 0 -1 0 0 0 0\n\
0 1 0 0 0 0 0 0 0 0 0 0 -1 0 0 1/2 0 0 0 1/2 0 -1 0 1 -1 0\n\
0 0 0 1/2 1 0 -1/2 -1/2 0 -1/2 -1 1 0 -1 -1 0 0 1/2 0 0 1/2 0 0 0 0 0\n\
0 -1 0 0 0 0 0 0 1 0 0 0 0 0 0 1/2 -1/2 -1/2 1/2 0 0 0 0 0 0 -1\n\
0 0 0 0 1 0 0 0 0 0 0 0 0 0 0 0 0 -1/2 1/2 0 0 0 0 0 -1 0\n\
0 0 0 0 1 0 0 0 0 0 0 0 1 0 0 0 0 0 0 0 0 0 0 0 0 0\n\
0 0 0 0 -1 0 0 0 0 0 1 0 0 1 1 0 0 0 0 0 0 0 0 0 0 0\n\
V\n\
1 0 -1 0 0 -1 0 0 0 0 -1 0 0 -1 -1 0 0 0 0 0 0 0 0 0 0 0\n\
1 1/2 1 1 0 0 0 1 1 0 0 0 0 0 0 0 1 -1 -1 1 1 0 0 -1 1/2 0\n\
1 1/2 -1 1 0 0 0 1 1 0 0 0 0 0 0 1 0 1 1 0 -1 0 0 1 -1/2 1\n\
1 1/2 -1 1 0 1 0 1 1 0 1 0 -1 0 1 1 0 1 -1 0 -1 0 0 1 -1/2 0\n\
-1 0 -1 -1 0 -1 -1 0 0 -1 0 -1 0 0 0 0 0 0 0 0 -1 0 0 0 0 0\n\
-1 0 1 -1 0 0 -1 0 -1 1 0 0 0 0 0 -1 -1 0 0 1 1 0 -1 -1 0 0\n\
-1 -1 -1 -1 0 0 -1 0 -1 -1 0 0 0 0 0 0 0 0 0 0 -1 1 1 1 0 -1\n\
-1 0 -1 -1 -1 1 -1 0 -1 -1 1 0 -1 0 0 0 0 0 0 0 -1 0 -1 1 -1 0\n\
W\n\
1 -1 0 1 0 0 1 1 0 0 0 0 0 0 0 1 1 0 0 1 0 1 0 0 0 1\n\
0 -1 0 1 0 0 1 1 -1 0 0 0 0 0 0 1 -1 0 0 1 0 1 0 0 0 0\n\
0 1 -1 0 0 0 0 0 0 -1 0 0 0 0 0 -1 -1 -1 -1 -1 -1 -1 0 0 0 -1\n\
0 0 0 0 0 0 0 0 0 1 0 0 0 0 0 1 1 1 0 -1 1 -1 -1 -1 1 0\n\
0 0 1 0 1 0 0 0 0 1 -1 0 -1 0 1 1 1 1 0 1 1 0 0 0 1 0\n\
0 0 0 0 -1 1 0 0 0 -1 1 0 0 0 -1 -1 -1 -1 0 1 -1 0 0 1 -1 0\n\
1 0 -1 1 0 0 1 0 0 -1 0 0 0 -1 1 0 0 0 0 0 -1 0 0 0 0 0\n\
0 0 0 0 0 1 1 0 0 1 1 1 0 0 -1 0 0 0 0 0 0 0 0 0 0 0\n\
";

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

fn load(text: &str) -> BilinearAlgorithm {
    validate(parse_algorithm(text).expect("catalog constant must parse"))
        .expect("catalog constant must validate")
}

/// Strassen's rank-7 algorithm for `<2,2,2>`.
pub fn strassen() -> BilinearAlgorithm {
    load(STRASSEN_TEXT)
}

/// Rank-15 algorithm for `<3,2,3>` (94 nonzeros).
pub fn fast323() -> BilinearAlgorithm {
    load(FAST323_TEXT)
}

/// Rank-26 algorithm for `<4,4,2>` with half-integer coefficients
/// (257 nonzeros).
pub fn fast442() -> BilinearAlgorithm {
    load(FAST442_TEXT)
}

/// The classical algorithm for `<m0, k0, n0>`: rank `m0*k0*n0`, every product
/// `a[p,q] * b[q,s]` contributing once to `c[p,s]`.
pub fn classical(m0: usize, k0: usize, n0: usize) -> Result<BilinearAlgorithm, AlgoError> {
    if m0 == 0 || k0 == 0 || n0 == 0 {
        return Err(AlgoError::Structural(format!(
            "base-case dimensions must be positive, got <{m0}, {k0}, {n0}>"
        )));
    }
    let rank = m0 * k0 * n0;
    let mut u = RatMat::zeros(m0 * k0, rank);
    let mut v = RatMat::zeros(k0 * n0, rank);
    let mut w = RatMat::zeros(m0 * n0, rank);
    for p in 0..m0 {
        for q in 0..k0 {
            for s in 0..n0 {
                let r = (p * k0 + q) * n0 + s;
                u.set(super::index_a(p, q, m0), r, Rat::one());
                v.set(super::index_b(q, s, k0), r, Rat::one());
                w.set(super::index_c(p, s, n0), r, Rat::one());
            }
        }
    }
    validate(super::UnvalidatedAlgorithm {
        name: format!("classical:{m0}x{k0}x{n0}"),
        m0,
        k0,
        n0,
        u,
        v,
        w,
    })
}

/// Names accepted by [`by_name`].
pub fn names() -> &'static [&'static str] {
    &["strassen", "323", "442"]
}

/// Looks up a fixed catalog entry by name (`strassen`, `323`/`fast323`,
/// `442`/`fast442`). The classical generator and the rotation/transposition
/// combinators are separate entry points.
pub fn by_name(name: &str) -> Option<BilinearAlgorithm> {
    match name {
        "strassen" => Some(strassen()),
        "323" | "fast323" => Some(fast323()),
        "442" | "fast442" => Some(fast442()),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_entries_validate() {
        assert_eq!(strassen().dims(), (2, 2, 2));
        assert_eq!(strassen().rank(), 7);
        assert_eq!(fast323().dims(), (3, 2, 3));
        assert_eq!(fast323().rank(), 15);
        assert_eq!(fast442().dims(), (4, 4, 2));
        assert_eq!(fast442().rank(), 26);
    }

    #[test]
    fn catalog_nonzero_counts() {
        assert_eq!(strassen().nnz(), 36);
        assert_eq!(fast323().nnz(), 94);
        assert_eq!(fast442().nnz(), 257);
    }

    #[test]
    fn classical_all_small_dims_validate() {
        for m0 in 1..=4 {
            for k0 in 1..=4 {
                for n0 in 1..=4 {
                    let alg = classical(m0, k0, n0).unwrap();
                    assert_eq!(alg.dims(), (m0, k0, n0));
                    assert_eq!(alg.rank(), m0 * k0 * n0);
                    assert_eq!(alg.nnz(), 3 * m0 * k0 * n0);
                }
            }
        }
    }

    #[test]
    fn by_name_aliases() {
        assert!(by_name("strassen").is_some());
        assert!(by_name("323").is_some());
        assert!(by_name("fast442").is_some());
        assert!(by_name("nonesuch").is_none());
    }
}
