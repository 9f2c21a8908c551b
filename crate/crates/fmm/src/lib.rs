//! Fast (Strassen-like) matrix multiplication as exact coefficient triples.
//!
//! A bilinear algorithm for the base-case product of an `m0 x k0` matrix by a
//! `k0 x n0` matrix is a triple of exact-rational matrices `[[U, V, W]]`: each
//! of the `R` scalar products multiplies a linear combination of A-entries
//! (a column of `U`) by a linear combination of B-entries (a column of `V`),
//! and `W` recombines the products into the entries of C. This crate provides:
//!
//! - [`algo`]: the triple representation, exact validation against the Brent
//!   equations, a file format, structural transforms (cyclic rotation,
//!   transposition, row permutations), and a built-in coefficient catalog;
//! - [`stability`]: the principal quantities (alpha, beta, gamma, a, b, q, Q,
//!   e, E, nnz) of an algorithm, forward error bounds for stationary and
//!   uniform non-stationary recursions, and the delta/xi analysis of arbitrary
//!   recursion trees;
//! - [`matrix`] and [`engine`]: a dense `f64` matrix with binary/text IO and a
//!   recursive executor for stationary, per-level, and tree-shaped plans with
//!   deterministic sequential summation;
//! - [`scaling`]: outside, inside, and repeated outside-inside diagonal
//!   scaling with convergence diagnostics and a stopping criterion;
//! - [`oracle`]: a compensated double-double reference product and error
//!   metrics.

pub mod algo;
pub mod engine;
pub mod matrix;
pub mod oracle;
pub mod scaling;
pub mod stability;

pub use algo::{
    catalog, cyclic_rotate, parse_algorithm, permute_rows, serialize_algorithm,
    transpose_transform, vec_permutation, AlgoError, BilinearAlgorithm, Perm, Rat, RatMat,
    UnvalidatedAlgorithm, Violation,
};
pub use engine::{
    multiply, multiply_classical, multiply_mode, pad_dims, EngineError, ExecMode, PlanShape,
    RecursionPlan, TreeChild, TreeNode,
};
pub use matrix::{Matrix, MatrixIoError};
pub use oracle::{
    compare, effective_gflops, multiply_reference, DdMatrix, DoubleDouble, ErrorReport,
    OracleError,
};
pub use scaling::{
    inside_scale, outside_scale, repeated_scale, scale, scaled_multiply, scaled_multiply_mode,
    scaled_multiply_traced, ScalingConfig, ScalingError, ScalingMode, ScalingState, ScalingTrace,
    StepFactors, StepKind, StepRecord,
};
pub use stability::{
    analyze, analyze_plan, analyze_plan_with, analyze_with, bound_stationary,
    bound_uniform_nonstationary, kron_stability_vector, tradeoff_point, PlanStabilityReport,
    StabilityError, StabilityReport, SummationModel,
};
