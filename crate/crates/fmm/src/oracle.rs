//! Compensated reference products and error measurement.
//!
//! The reference multiply accumulates every inner product in double-double
//! arithmetic (an unevaluated sum `hi + lo` of two doubles, giving roughly
//! 106 bits of precision), using Knuth's exact two-sum and an FMA-based
//! exact two-product. For inputs that are exact in double precision the
//! reference is correct to far below one ulp of the working precision, so it
//! serves as ground truth when measuring the error of the fast recursions.

use thiserror::Error;

use crate::engine::EngineError;
use crate::matrix::Matrix;

/// Oracle failures.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dimension mismatch: computed is {got_rows}x{got_cols}, reference is {want_rows}x{want_cols}")]
    ShapeMismatch {
        got_rows: usize,
        got_cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("nonpositive elapsed time {0}")]
    NonpositiveTime(f64),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

// ---------------------------------------------------------------------------
// Double-double primitives
// ---------------------------------------------------------------------------

/// Unevaluated sum of two doubles with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

/// Exact sum: `a + b = s + err` with `s = fl(a + b)`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Exact product: `a * b = p + err` with `p = fl(a * b)`.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// Renormalizes so `hi` is the double nearest the represented value.
    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    /// `self + rhs`, accurate to the full double-double precision.
    #[inline]
    pub fn add(self, rhs: DoubleDouble) -> Self {
        let (s, e1) = two_sum(self.hi, rhs.hi);
        let e = e1 + self.lo + rhs.lo;
        DoubleDouble::renorm(s, e)
    }

    /// `self + a * b` with the product formed exactly first.
    #[inline]
    pub fn add_prod(self, a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        self.add(DoubleDouble { hi: p, lo: e })
    }

    pub fn neg(self) -> Self {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }

    /// Value rounded back to one double.
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

/// Dense matrix of double-double entries, row-major.
#[derive(Debug, Clone)]
pub struct DdMatrix {
    rows: usize,
    cols: usize,
    data: Vec<DoubleDouble>,
}

impl DdMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> DoubleDouble {
        self.data[r * self.cols + c]
    }

    /// Rounds every entry back to double precision.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::new(
            self.rows,
            self.cols,
            self.data.iter().map(|x| x.to_f64()).collect(),
        )
    }
}

// ---------------------------------------------------------------------------
// Reference product and comparison
// ---------------------------------------------------------------------------

/// Classical product with double-double accumulation.
pub fn multiply_reference(a: &Matrix, b: &Matrix) -> Result<DdMatrix, OracleError> {
    if a.cols() != b.rows() {
        return Err(OracleError::Engine(EngineError::DimensionMismatch {
            m: a.rows(),
            k_left: a.cols(),
            k_right: b.rows(),
            n: b.cols(),
        }));
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut data = vec![DoubleDouble::ZERO; m * n];
    for i in 0..m {
        for t in 0..k {
            let ait = a.get(i, t);
            if ait == 0.0 {
                continue;
            }
            for j in 0..n {
                let idx = i * n + j;
                data[idx] = data[idx].add_prod(ait, b.get(t, j));
            }
        }
    }
    Ok(DdMatrix { rows: m, cols: n, data })
}

/// Error metrics of a computed product against a reference.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub rows: usize,
    pub cols: usize,
    /// `max_ij |computed - reference|`, the difference formed in
    /// double-double and rounded once.
    pub max_abs_err: f64,
    /// `max_ij |computed - reference| / |reference|` over entries with a
    /// nonzero reference.
    pub max_rel_err: f64,
    /// Entries excluded from the relative metric because the reference is
    /// exactly zero.
    pub zero_reference_entries: usize,
    /// A priori bound the absolute error can be checked against, when the
    /// caller has one.
    pub bound: Option<f64>,
}

impl ErrorReport {
    /// True when a bound is attached and the measured error respects it.
    pub fn within_bound(&self) -> Option<bool> {
        self.bound.map(|b| self.max_abs_err <= b)
    }
}

/// Measures a computed product against the double-double reference.
pub fn compare(
    computed: &Matrix,
    reference: &DdMatrix,
    bound: Option<f64>,
) -> Result<ErrorReport, OracleError> {
    if computed.rows() != reference.rows() || computed.cols() != reference.cols() {
        return Err(OracleError::ShapeMismatch {
            got_rows: computed.rows(),
            got_cols: computed.cols(),
            want_rows: reference.rows(),
            want_cols: reference.cols(),
        });
    }
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut zeros = 0usize;
    for r in 0..computed.rows() {
        for c in 0..computed.cols() {
            let want = reference.get(r, c);
            let diff = want.add(DoubleDouble::from_f64(-computed.get(r, c))).abs();
            let abs = diff.to_f64();
            max_abs = max_abs.max(abs);
            if want.is_zero() {
                zeros += 1;
            } else {
                max_rel = max_rel.max(abs / want.abs().to_f64());
            }
        }
    }
    Ok(ErrorReport {
        rows: computed.rows(),
        cols: computed.cols(),
        max_abs_err: max_abs,
        max_rel_err: max_rel,
        zero_reference_entries: zeros,
        bound,
    })
}

/// Effective GFLOP/s of an `m x k` by `k x n` multiply: the classical flop
/// count `2mkn - mn` divided by the elapsed seconds, regardless of the
/// algorithm actually used.
pub fn effective_gflops(m: usize, k: usize, n: usize, seconds: f64) -> Result<f64, OracleError> {
    if !(seconds > 0.0) {
        return Err(OracleError::NonpositiveTime(seconds));
    }
    let flops = 2.0 * m as f64 * k as f64 * n as f64 - (m * n) as f64;
    Ok(flops / seconds * 1e-9)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo::{catalog, Rat};
    use crate::engine::{multiply, RecursionPlan};
    use num_traits::{Signed, ToPrimitive, Zero};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    #[test]
    fn two_sum_and_two_prod_are_exact() {
        let (s, e) = two_sum(1.0, 2.0_f64.powi(-60));
        assert_eq!(s, 1.0);
        assert_eq!(e, 2.0_f64.powi(-60));
        let (p, e) = two_prod(1.0 + 2.0_f64.powi(-30), 1.0 + 2.0_f64.powi(-30));
        // (1 + u)^2 = 1 + 2u + u^2; the square term falls into the error word.
        assert_eq!(p, 1.0 + 2.0_f64.powi(-29));
        assert_eq!(e, 2.0_f64.powi(-60));
    }

    #[test]
    fn integer_products_are_exact() {
        let mut rng = StdRng::seed_from_u64(1);
        let a = Matrix::new(
            9,
            7,
            (0..63).map(|_| rng.gen_range(-50..=50) as f64).collect(),
        );
        let b = Matrix::new(
            7,
            5,
            (0..35).map(|_| rng.gen_range(-50..=50) as f64).collect(),
        );
        let reference = multiply_reference(&a, &b).unwrap();
        for i in 0..9 {
            for j in 0..5 {
                let mut want = 0i64;
                for t in 0..7 {
                    want += a.get(i, t) as i64 * b.get(t, j) as i64;
                }
                let got = reference.get(i, j);
                assert_eq!(got.hi, want as f64);
                assert_eq!(got.lo, 0.0);
            }
        }
    }

    #[test]
    fn cancellation_heavy_inner_product_matches_exact_rationals() {
        // Row of tiny offsets times a column of near-ones: heavy low-order
        // structure that plain double accumulation would lose.
        let n = 1000;
        let tiny = 2.0_f64.powi(-27);
        let a = Matrix::new(1, n, (0..n).map(|t| 1.0 + (t as f64) * tiny).collect());
        let b = Matrix::new(n, 1, (0..n).map(|t| 1.0 - (t as f64) * tiny).collect());
        let reference = multiply_reference(&a, &b).unwrap();
        let got = reference.get(0, 0);

        let mut exact = Rat::zero();
        for t in 0..n {
            let x = Rat::from_float(a.get(0, t)).unwrap();
            let y = Rat::from_float(b.get(t, 0)).unwrap();
            exact += x * y;
        }
        let err = (Rat::from_float(got.hi).unwrap() + Rat::from_float(got.lo).unwrap()
            - exact.clone())
        .abs()
        .to_f64()
        .unwrap();
        let scale = exact.abs().to_f64().unwrap();
        assert!(err <= scale * 2.0_f64.powi(-100), "err {err:e}");
    }

    #[test]
    fn reference_of_random_16x16_matches_exact_rationals() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let a = Matrix::new(4, 4, (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let b = Matrix::new(4, 4, (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let reference = multiply_reference(&a, &b).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let mut exact = Rat::zero();
                    for t in 0..4 {
                        exact += Rat::from_float(a.get(i, t)).unwrap()
                            * Rat::from_float(b.get(t, j)).unwrap();
                    }
                    let got = reference.get(i, j);
                    let dd = Rat::from_float(got.hi).unwrap()
                        + Rat::from_float(got.lo).unwrap();
                    let err = (dd - exact.clone()).abs().to_f64().unwrap();
                    let bound = exact.abs().to_f64().unwrap().max(1e-300) * 2.0_f64.powi(-99);
                    assert!(err <= bound, "({i},{j}): err {err:e}");
                }
            }
        }
    }

    #[test]
    fn compare_reports_absolute_and_relative_error() {
        let a = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = Matrix::from_rows(&[&[3.0, 0.0], &[0.0, 4.0]]);
        let reference = multiply_reference(&a, &b).unwrap();
        let mut computed = reference.to_matrix();
        computed.set(0, 0, 3.0 + 3e-10);
        let report = compare(&computed, &reference, Some(1e-9)).unwrap();
        // The stored entry is fl(3 + 3e-10), so allow one rounding of slack.
        assert!((report.max_abs_err - 3e-10).abs() < 1e-15);
        assert!((report.max_rel_err - 1e-10).abs() < 1e-15);
        assert_eq!(report.zero_reference_entries, 2);
        assert_eq!(report.within_bound(), Some(true));
        let tight = compare(&computed, &reference, Some(1e-10)).unwrap();
        assert_eq!(tight.within_bound(), Some(false));
    }

    #[test]
    fn compare_is_invariant_under_transposing_both_sides() {
        let mut rng = StdRng::seed_from_u64(9);
        let a = Matrix::new(8, 8, (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let b = Matrix::new(8, 8, (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let strassen = Arc::new(catalog::strassen());
        let plan = RecursionPlan::stationary(strassen, 2);
        let c = multiply(&a, &b, &plan).unwrap();
        let reference = multiply_reference(&a, &b).unwrap();
        let direct = compare(&c, &reference, None).unwrap();

        // (A B)^T = B^T A^T; measure the transposed product against the
        // transposed reference.
        let ct = c.transposed();
        let ref_t = multiply_reference(&b.transposed(), &a.transposed()).unwrap();
        let swapped = compare(&ct, &ref_t, None).unwrap();
        assert_eq!(direct.max_abs_err, swapped.max_abs_err);
        assert_eq!(direct.max_rel_err, swapped.max_rel_err);
    }

    #[test]
    fn gflops_and_shape_errors() {
        let g = effective_gflops(1024, 1024, 1024, 1.0).unwrap();
        let expect = (2.0 * 1024f64.powi(3) - 1024f64.powi(2)) * 1e-9;
        assert!((g - expect).abs() < 1e-12 * expect);
        assert!(matches!(
            effective_gflops(8, 8, 8, 0.0),
            Err(OracleError::NonpositiveTime(_))
        ));
        let a = Matrix::zeros(2, 2);
        let reference = multiply_reference(&a, &a).unwrap();
        let wrong = Matrix::zeros(3, 2);
        assert!(matches!(
            compare(&wrong, &reference, None),
            Err(OracleError::ShapeMismatch { .. })
        ));
    }
}
