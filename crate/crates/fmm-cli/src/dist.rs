//! Input distributions for generated operand pairs.
//!
//! The two uniform families stress nothing in particular; `dist2` and
//! `dist3` plant badly scaled blocks whose positions interact differently
//! with outside and inside scaling, which makes them useful for error
//! sweeps. Block thresholds split each matrix axis in half; the magnitude
//! `N` is the largest of the three problem dimensions.

use anyhow::{bail, Result};
use fmm::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A named input distribution for an `(A, B)` operand pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist {
    /// Entries uniform on `(0, 1)`.
    U01,
    /// Entries uniform on `(-1, 1)`.
    U11,
    /// Right half of A and top half of B uniform on `(0, 1/N^2)`,
    /// the rest on `(0, 1)`.
    Dist2,
    /// Top-right block of A uniform on `(0, N^2)`, left half of B on
    /// `(0, 1/N^2)`, the rest on `(0, 1)`.
    Dist3,
}

impl Dist {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text.trim() {
            "u01" | "dist1" => Dist::U01,
            "u11" => Dist::U11,
            "dist2" => Dist::Dist2,
            "dist3" => Dist::Dist3,
            other => bail!("unknown distribution '{other}': expected u01, u11, dist2, or dist3"),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Dist::U01 => "u01",
            Dist::U11 => "u11",
            Dist::Dist2 => "dist2",
            Dist::Dist3 => "dist3",
        }
    }
}

/// Generates the operand pair for an `m x k` by `k x n` product. A and B
/// draw from separate streams of the seed, so A's entries do not depend on
/// B's shape or order of generation.
pub fn generate(dist: Dist, m: usize, k: usize, n: usize, seed: u64) -> (Matrix, Matrix) {
    let mut rng_a = ChaCha8Rng::seed_from_u64(seed);
    rng_a.set_stream(0);
    let mut rng_b = ChaCha8Rng::seed_from_u64(seed);
    rng_b.set_stream(1);
    let big = m.max(k).max(n) as f64;
    let big2 = big * big;

    let a = matrix_from(m, k, &mut rng_a, |rng, i, j| match dist {
        Dist::U01 => rng.gen_range(0.0..1.0),
        Dist::U11 => rng.gen_range(-1.0..1.0),
        // Columns past the midpoint are small.
        Dist::Dist2 => {
            if 2 * (j + 1) > k {
                rng.gen_range(0.0..1.0 / big2)
            } else {
                rng.gen_range(0.0..1.0)
            }
        }
        // Rows before the midpoint and columns past it are large.
        Dist::Dist3 => {
            if 2 * (i + 1) < m && 2 * (j + 1) > k {
                rng.gen_range(0.0..big2)
            } else {
                rng.gen_range(0.0..1.0)
            }
        }
    });
    let b = matrix_from(k, n, &mut rng_b, |rng, i, j| match dist {
        Dist::U01 => rng.gen_range(0.0..1.0),
        Dist::U11 => rng.gen_range(-1.0..1.0),
        // Rows before the midpoint are small.
        Dist::Dist2 => {
            if 2 * (i + 1) < k {
                rng.gen_range(0.0..1.0 / big2)
            } else {
                rng.gen_range(0.0..1.0)
            }
        }
        // Columns before the midpoint are small.
        Dist::Dist3 => {
            if 2 * (j + 1) < n {
                rng.gen_range(0.0..1.0 / big2)
            } else {
                rng.gen_range(0.0..1.0)
            }
        }
    });
    (a, b)
}

fn matrix_from(
    rows: usize,
    cols: usize,
    rng: &mut ChaCha8Rng,
    mut entry: impl FnMut(&mut ChaCha8Rng, usize, usize) -> f64,
) -> Matrix {
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            data.push(entry(rng, i, j));
        }
    }
    Matrix::new(rows, cols, data)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip_and_bad_names_fail() {
        for dist in [Dist::U01, Dist::U11, Dist::Dist2, Dist::Dist3] {
            assert_eq!(Dist::parse(dist.name()).unwrap(), dist);
        }
        assert_eq!(Dist::parse("dist1").unwrap(), Dist::U01);
        assert!(Dist::parse("gauss").is_err());
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let (a1, b1) = generate(Dist::U01, 5, 4, 6, 9);
        let (a2, b2) = generate(Dist::U01, 5, 4, 6, 9);
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        let (a3, _) = generate(Dist::U01, 5, 4, 6, 10);
        assert_ne!(a1, a3);
    }

    #[test]
    fn ranges_respect_the_distribution() {
        let (a, b) = generate(Dist::U01, 8, 8, 8, 1);
        assert!(a.data().iter().chain(b.data()).all(|&v| (0.0..1.0).contains(&v)));
        let (a, b) = generate(Dist::U11, 8, 8, 8, 1);
        assert!(a.data().iter().chain(b.data()).all(|&v| (-1.0..1.0).contains(&v)));
        assert!(a.data().iter().any(|&v| v < 0.0));
    }

    fn region_max(m: &Matrix, pred: impl Fn(usize, usize) -> bool) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if pred(i, j) {
                    best = best.max(m.get(i, j).abs());
                }
            }
        }
        best
    }

    #[test]
    fn block_structure_lands_where_documented() {
        let n2 = 64.0;
        let (a, b) = generate(Dist::Dist2, 8, 8, 8, 3);
        // A: columns 4.. are drawn below 1/N^2, the rest reach past it.
        assert!(region_max(&a, |_, j| j >= 4) < 1.0 / n2);
        assert!(region_max(&a, |_, j| j < 4) > 1.0 / n2);
        // B: rows ..3 are small (the one-based condition i < N/2 is strict,
        // so three of the eight rows qualify).
        assert!(region_max(&b, |i, _| i < 3) < 1.0 / n2);
        assert!(region_max(&b, |i, _| i >= 3) > 1.0 / n2);

        let (a, b) = generate(Dist::Dist3, 8, 8, 8, 3);
        // A: only the top-right block exceeds one.
        assert!(region_max(&a, |i, j| i < 3 && j >= 4) > 1.0);
        assert!(region_max(&a, |i, j| !(i < 3 && j >= 4)) < 1.0);
        // B: columns ..3 are small.
        assert!(region_max(&b, |_, j| j < 3) < 1.0 / n2);
        assert!(region_max(&b, |_, j| j >= 3) > 1.0 / n2);
    }

    #[test]
    fn rectangular_thresholds_use_each_axis() {
        // A is 4 x 10 and B is 10 x 6: block thresholds follow each
        // matrix's own axis lengths while magnitudes use N = 10.
        let (a, b) = generate(Dist::Dist2, 4, 10, 6, 5);
        let n2 = 100.0;
        assert!(region_max(&a, |_, j| j >= 5) < 1.0 / n2);
        assert!(region_max(&a, |_, j| j < 5) > 1.0 / n2);
        assert!(region_max(&b, |i, _| i < 4) < 1.0 / n2);
        assert!(region_max(&b, |i, _| i >= 4) > 1.0 / n2);
    }
}
