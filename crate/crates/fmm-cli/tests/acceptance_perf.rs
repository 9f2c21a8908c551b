//! Criterion 11 of the acceptance checklist: wall-clock sanity. Kept in its
//! own test target so the timings never share the process with other tests.

use std::sync::Arc;
use std::time::Instant;

use fmm::algo::catalog;
use fmm::{
    multiply, multiply_classical, scaled_multiply, Matrix, RecursionPlan, ScalingConfig,
    ScalingMode,
};
use fmm_cli::dist::{self, Dist};

/// Best-of-`reps` wall time of `f`, in seconds.
fn seconds<F: FnMut() -> Matrix>(reps: usize, mut f: F) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..reps {
        let clock = Instant::now();
        let c = f();
        let dt = clock.elapsed().as_secs_f64();
        std::hint::black_box(&c);
        best = best.min(dt);
    }
    best
}

#[test]
fn acceptance_11_performance() {
    let plan = RecursionPlan::stationary(Arc::new(catalog::strassen()), 2);

    // Two recursion levels already beat the classical kernel at 2048.
    let (a, b) = dist::generate(Dist::U01, 2048, 2048, 2048, 11);
    let t_classical = seconds(2, || multiply_classical(&a, &b).unwrap());
    let t_fast = seconds(2, || multiply(&a, &b, &plan).unwrap());
    assert!(
        t_fast < t_classical,
        "fast {t_fast:.3}s not below classical {t_classical:.3}s"
    );

    // The relative cost of scaling shrinks as the multiplication grows: the
    // scaling passes are quadratic in the dimension, the product is not.
    let none = ScalingConfig::default();
    let rep2 = ScalingConfig {
        mode: ScalingMode::Repeated,
        max_steps: 4,
        ..ScalingConfig::default()
    };
    let overhead = |n: usize, reps: usize| -> f64 {
        let (x, y) = dist::generate(Dist::U01, n, n, n, 11);
        let plain = seconds(reps, || scaled_multiply(&x, &y, &plan, &none).unwrap());
        let scaled = seconds(reps, || scaled_multiply(&x, &y, &plan, &rep2).unwrap());
        scaled / plain
    };
    let r512 = overhead(512, 5);
    let r2048 = overhead(2048, 2);
    assert!(
        r2048 < r512,
        "scaling overhead ratio grew with size: {r512:.4} -> {r2048:.4}"
    );

    println!("criterion 11 (performance): PASS");
}
