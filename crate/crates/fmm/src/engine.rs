//! Recursive matrix multiplication driven by bilinear algorithms.
//!
//! A recursion plan says which algorithm splits the problem at each level:
//!
//! - [`RecursionPlan::Classical`]: no fast levels, cubic multiply only;
//! - [`RecursionPlan::Stationary`]: one algorithm applied for a fixed number
//!   of levels, classical below;
//! - [`RecursionPlan::Uniform`]: one algorithm per level (uniform
//!   non-stationary);
//! - [`RecursionPlan::Tree`]: a full recursion tree where every multiplication
//!   node picks its own algorithm. Trees must have uniform leaf depth and
//!   identical base-case dimensions across each level, so padding is
//!   well-defined.
//!
//! Inputs are zero-padded up front to the next multiples of the per-level
//! dimension products and the result is cropped at the end. Execution order
//! is fixed and sequential, so results are deterministic bit-for-bit:
//! S and T sums run over ascending operand index, products run in ascending
//! column order, and every C entry accumulates its products in ascending
//! column order. The classical base kernel accumulates over ascending k.
//!
//! Strict mode rounds every multiply and add separately; fast mode fuses the
//! base-kernel multiply-add (FMA), which may change low-order bits but not
//! the error analysis. Neither mode reorders sums. Non-finite inputs are
//! propagated, not detected; callers that want a check can use
//! [`Matrix::first_non_finite`] before multiplying.

use std::sync::Arc;

use thiserror::Error;

use crate::algo::BilinearAlgorithm;
use crate::matrix::Matrix;

/// Engine failures.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("dimension mismatch: left is {m}x{k_left}, right is {k_right}x{n}")]
    DimensionMismatch {
        m: usize,
        k_left: usize,
        k_right: usize,
        n: usize,
    },
    #[error("malformed plan: {0}")]
    MalformedPlan(String),
}

/// Rounding mode of the inner kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// Separate rounding for every multiply and add.
    Strict,
    /// Fused multiply-add in the base kernel.
    Fast,
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

/// One multiplication node of a tree plan: the algorithm splitting this node
/// and one child per column (rank children), each either a classical base
/// case or a further tree node.
#[derive(Debug, Clone)]
pub struct TreeNode {
    alg: Arc<BilinearAlgorithm>,
    children: Vec<TreeChild>,
}

/// Child of a [`TreeNode`].
#[derive(Debug, Clone)]
pub enum TreeChild {
    /// Multiply this subproblem classically.
    Classical,
    /// Split this subproblem with another algorithm node.
    Node(Arc<TreeNode>),
}

impl TreeNode {
    /// Builds a node, checking that there is exactly one child per column.
    pub fn new(alg: Arc<BilinearAlgorithm>, children: Vec<TreeChild>) -> Result<Self, EngineError> {
        if children.len() != alg.rank() {
            return Err(EngineError::MalformedPlan(format!(
                "node '{}' has {} children, rank {} requires one per column",
                alg.name(),
                children.len(),
                alg.rank()
            )));
        }
        Ok(TreeNode { alg, children })
    }

    /// Node with the given algorithm and all-classical children.
    pub fn leaf_level(alg: Arc<BilinearAlgorithm>) -> Self {
        let rank = alg.rank();
        TreeNode {
            alg,
            children: vec![TreeChild::Classical; rank],
        }
    }

    pub fn alg(&self) -> &Arc<BilinearAlgorithm> {
        &self.alg
    }

    pub fn children(&self) -> &[TreeChild] {
        &self.children
    }

    fn collect_shape(
        &self,
        depth: usize,
        levels: &mut Vec<(usize, usize, usize)>,
        total_depth: &mut Option<usize>,
    ) -> Result<(), EngineError> {
        let dims = self.alg.dims();
        if levels.len() == depth {
            levels.push(dims);
        } else if levels[depth] != dims {
            return Err(EngineError::MalformedPlan(format!(
                "level {depth} mixes base dimensions {:?} and {dims:?}",
                levels[depth]
            )));
        }
        let mut saw_node = false;
        let mut saw_classical = false;
        for child in &self.children {
            match child {
                TreeChild::Classical => saw_classical = true,
                TreeChild::Node(node) => {
                    saw_node = true;
                    node.collect_shape(depth + 1, levels, total_depth)?;
                }
            }
        }
        if saw_node && saw_classical {
            return Err(EngineError::MalformedPlan(format!(
                "node at level {depth} mixes classical and split children; leaf depth must be uniform"
            )));
        }
        if saw_classical {
            match *total_depth {
                None => *total_depth = Some(depth + 1),
                Some(d) if d != depth + 1 => {
                    return Err(EngineError::MalformedPlan(format!(
                        "leaves at depth {} and {d}; leaf depth must be uniform",
                        depth + 1
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Per-level base dimensions of a validated plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanShape {
    levels: Vec<(usize, usize, usize)>,
}

impl PlanShape {
    /// Base dimensions per level, outermost first.
    pub fn levels(&self) -> &[(usize, usize, usize)] {
        &self.levels
    }

    /// Number of fast recursion levels.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Componentwise products of the per-level dimensions.
    pub fn dim_products(&self) -> (usize, usize, usize) {
        self.levels
            .iter()
            .fold((1, 1, 1), |(m, k, n), &(m0, k0, n0)| (m * m0, k * k0, n * n0))
    }
}

/// Which bilinear algorithms run at which recursion levels.
#[derive(Debug, Clone)]
pub enum RecursionPlan {
    /// Classical cubic multiplication, no fast levels.
    Classical,
    /// `alg` applied for `levels` levels, classical below.
    Stationary {
        alg: Arc<BilinearAlgorithm>,
        levels: usize,
    },
    /// `algs[l]` applied at level `l`, classical below the last.
    Uniform { algs: Vec<Arc<BilinearAlgorithm>> },
    /// Full recursion tree.
    Tree(Arc<TreeNode>),
}

impl RecursionPlan {
    /// Stationary plan.
    pub fn stationary(alg: Arc<BilinearAlgorithm>, levels: usize) -> Self {
        RecursionPlan::Stationary { alg, levels }
    }

    /// Uniform non-stationary plan.
    pub fn uniform(algs: Vec<Arc<BilinearAlgorithm>>) -> Self {
        RecursionPlan::Uniform { algs }
    }

    /// Tree plan rooted at `root`.
    pub fn tree(root: Arc<TreeNode>) -> Self {
        RecursionPlan::Tree(root)
    }

    /// Validates the plan and returns its per-level shape.
    pub fn shape(&self) -> Result<PlanShape, EngineError> {
        match self {
            RecursionPlan::Classical => Ok(PlanShape { levels: Vec::new() }),
            RecursionPlan::Stationary { alg, levels } => Ok(PlanShape {
                levels: vec![alg.dims(); *levels],
            }),
            RecursionPlan::Uniform { algs } => Ok(PlanShape {
                levels: algs.iter().map(|a| a.dims()).collect(),
            }),
            RecursionPlan::Tree(root) => {
                let mut levels = Vec::new();
                let mut total_depth = None;
                root.collect_shape(0, &mut levels, &mut total_depth)?;
                let depth = total_depth.expect("every finite tree has leaves");
                debug_assert_eq!(depth, levels.len());
                Ok(PlanShape { levels })
            }
        }
    }
}

/// Rounds the problem dimensions up to the next multiples of the plan's
/// per-level dimension products.
pub fn pad_dims(
    m: usize,
    k: usize,
    n: usize,
    plan: &RecursionPlan,
) -> Result<(usize, usize, usize), EngineError> {
    let (pm, pk, pn) = plan.shape()?.dim_products();
    let up = |x: usize, p: usize| x.div_ceil(p) * p;
    Ok((up(m, pm), up(k, pk), up(n, pn)))
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// Walks a plan level by level without materializing stationary plans as
/// trees.
#[derive(Clone, Copy)]
enum Cursor<'p> {
    /// Remaining levels of a stationary plan.
    Repeat(&'p Arc<BilinearAlgorithm>, usize),
    /// Remaining levels of a uniform plan.
    Levels(&'p [Arc<BilinearAlgorithm>]),
    /// Position in a tree plan (`None` = classical leaf).
    Tree(Option<&'p TreeNode>),
}

impl<'p> Cursor<'p> {
    fn current(&self) -> Option<&'p BilinearAlgorithm> {
        match *self {
            Cursor::Repeat(_, 0) => None,
            Cursor::Repeat(alg, _) => Some(alg.as_ref()),
            Cursor::Levels(algs) => algs.first().map(|a| a.as_ref()),
            Cursor::Tree(node) => node.map(|n| n.alg.as_ref()),
        }
    }

    fn child(&self, r: usize) -> Cursor<'p> {
        match *self {
            Cursor::Repeat(alg, left) => Cursor::Repeat(alg, left - 1),
            Cursor::Levels(algs) => Cursor::Levels(&algs[1..]),
            Cursor::Tree(node) => {
                let node = node.expect("child of a leaf");
                match &node.children[r] {
                    TreeChild::Classical => Cursor::Tree(None),
                    TreeChild::Node(child) => Cursor::Tree(Some(child)),
                }
            }
        }
    }
}

/// Borrowed rectangular block of a larger row-major buffer.
#[derive(Clone, Copy)]
struct View<'a> {
    data: &'a [f64],
    offset: usize,
    stride: usize,
    rows: usize,
    cols: usize,
}

impl<'a> View<'a> {
    fn whole(m: &'a Matrix) -> Self {
        View {
            data: m.data(),
            offset: 0,
            stride: m.cols(),
            rows: m.rows(),
            cols: m.cols(),
        }
    }

    fn of_buffer(data: &'a [f64], rows: usize, cols: usize) -> Self {
        View {
            data,
            offset: 0,
            stride: cols,
            rows,
            cols,
        }
    }

    fn block(&self, br: usize, bc: usize, rows: usize, cols: usize) -> View<'a> {
        View {
            data: self.data,
            offset: self.offset + br * rows * self.stride + bc * cols,
            stride: self.stride,
            rows,
            cols,
        }
    }

    #[inline]
    fn row(&self, r: usize) -> &[f64] {
        let start = self.offset + r * self.stride;
        &self.data[start..start + self.cols]
    }
}

/// `dst += coef * block` over a full block, row by row.
fn add_scaled_block(dst: &mut [f64], dst_cols: usize, block: View<'_>, coef: f64) {
    for r in 0..block.rows {
        let src = block.row(r);
        let dst_row = &mut dst[r * dst_cols..r * dst_cols + dst_cols];
        for (d, &s) in dst_row.iter_mut().zip(src) {
            *d += coef * s;
        }
    }
}

/// `dst_block += coef * src` where `dst_block` lives inside `dst`.
fn add_scaled_into(
    dst: &mut [f64],
    stride: usize,
    offset: usize,
    rows: usize,
    cols: usize,
    src: &[f64],
    coef: f64,
) {
    for r in 0..rows {
        let start = offset + r * stride;
        let dst_row = &mut dst[start..start + cols];
        let src_row = &src[r * cols..r * cols + cols];
        for (d, &s) in dst_row.iter_mut().zip(src_row) {
            *d += coef * s;
        }
    }
}

/// Classical kernel: `c = a * b`, iteration order i-k-j, ascending k
/// accumulation per entry. `c` is `am x bn` row-major and is overwritten.
fn classical_kernel(
    a: View<'_>,
    b: View<'_>,
    c: &mut [f64],
    c_stride: usize,
    c_offset: usize,
    mode: ExecMode,
) {
    let (am, ak, bn) = (a.rows, a.cols, b.cols);
    for i in 0..am {
        let c_start = c_offset + i * c_stride;
        c[c_start..c_start + bn].fill(0.0);
    }
    for i in 0..am {
        let a_row = a.row(i);
        let c_start = c_offset + i * c_stride;
        for k in 0..ak {
            let aik = a_row[k];
            let b_row = b.row(k);
            let c_row = &mut c[c_start..c_start + bn];
            match mode {
                ExecMode::Strict => {
                    for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                        *cv += aik * bv;
                    }
                }
                ExecMode::Fast => {
                    for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                        *cv = aik.mul_add(bv, *cv);
                    }
                }
            }
        }
    }
}

/// Recursive worker. `a` is `m x k`, `b` is `k x n`, both divisible by the
/// base dims along the cursor; writes the product into the `c` block.
fn recurse(
    cursor: Cursor<'_>,
    a: View<'_>,
    b: View<'_>,
    c: &mut [f64],
    c_stride: usize,
    c_offset: usize,
    mode: ExecMode,
) {
    let alg = match cursor.current() {
        None => return classical_kernel(a, b, c, c_stride, c_offset, mode),
        Some(alg) => alg,
    };
    let (m0, k0, n0) = alg.dims();
    let (bm, bk, bn) = (a.rows / m0, a.cols / k0, b.cols / n0);
    let floats = alg.floats();

    let mut s_buf = vec![0.0; bm * bk];
    let mut t_buf = vec![0.0; bk * bn];
    let mut m_buf = vec![0.0; bm * bn];

    for i in 0..a.rows {
        let start = c_offset + i * c_stride;
        c[start..start + b.cols].fill(0.0);
    }

    for r in 0..alg.rank() {
        s_buf.fill(0.0);
        for &(i, coef) in &floats.u_cols[r] {
            let (row_a, col_a) = (i % m0, i / m0);
            add_scaled_block(&mut s_buf, bk, a.block(row_a, col_a, bm, bk), coef);
        }
        t_buf.fill(0.0);
        for &(j, coef) in &floats.v_cols[r] {
            let (row_b, col_b) = (j % k0, j / k0);
            add_scaled_block(&mut t_buf, bn, b.block(row_b, col_b, bk, bn), coef);
        }
        recurse(
            cursor.child(r),
            View::of_buffer(&s_buf, bm, bk),
            View::of_buffer(&t_buf, bk, bn),
            &mut m_buf,
            bn,
            0,
            mode,
        );
        for &(k, coef) in &floats.w_cols[r] {
            let (row_c, col_c) = (k / n0, k % n0);
            add_scaled_into(
                c,
                c_stride,
                c_offset + row_c * bm * c_stride + col_c * bn,
                bm,
                bn,
                &m_buf,
                coef,
            );
        }
    }
}

/// Multiplies `a * b` under `plan` in strict mode.
pub fn multiply(a: &Matrix, b: &Matrix, plan: &RecursionPlan) -> Result<Matrix, EngineError> {
    multiply_mode(a, b, plan, ExecMode::Strict)
}

/// Multiplies `a * b` under `plan` with an explicit kernel mode.
pub fn multiply_mode(
    a: &Matrix,
    b: &Matrix,
    plan: &RecursionPlan,
    mode: ExecMode,
) -> Result<Matrix, EngineError> {
    if a.cols() != b.rows() {
        return Err(EngineError::DimensionMismatch {
            m: a.rows(),
            k_left: a.cols(),
            k_right: b.rows(),
            n: b.cols(),
        });
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let (pm, pk, pn) = pad_dims(m, k, n, plan)?;
    let a_pad = a.zero_padded(pm, pk);
    let b_pad = b.zero_padded(pk, pn);
    let mut c = Matrix::zeros(pm, pn);

    let cursor = match plan {
        RecursionPlan::Classical => Cursor::Tree(None),
        RecursionPlan::Stationary { alg, levels } => Cursor::Repeat(alg, *levels),
        RecursionPlan::Uniform { algs } => Cursor::Levels(algs),
        RecursionPlan::Tree(root) => Cursor::Tree(Some(root)),
    };

    let c_stride = c.cols();
    recurse(
        cursor,
        View::whole(&a_pad),
        View::whole(&b_pad),
        c.data_mut(),
        c_stride,
        0,
        mode,
    );
    Ok(if (pm, pn) == (m, n) { c } else { c.cropped(m, n) })
}

/// Classical cubic multiply (identical code path to the classical plan).
pub fn multiply_classical(a: &Matrix, b: &Matrix) -> Result<Matrix, EngineError> {
    multiply(a, b, &RecursionPlan::Classical)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo::catalog;
    use crate::algo::{Rat, RatMat};
    use num_traits::Zero;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rat_multiply(a: &Matrix, b: &Matrix) -> Vec<Rat> {
        let (m, k, n) = (a.rows(), a.cols(), b.cols());
        let mut out = vec![Rat::zero(); m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = Rat::zero();
                for t in 0..k {
                    let av = Rat::from_float(a.get(i, t)).unwrap();
                    let bv = Rat::from_float(b.get(t, j)).unwrap();
                    acc += av * bv;
                }
                out[i * n + j] = acc;
            }
        }
        out
    }

    fn assert_exact(c: &Matrix, expect: &[Rat]) {
        for i in 0..c.rows() {
            for j in 0..c.cols() {
                let got = Rat::from_float(c.get(i, j)).unwrap();
                assert_eq!(got, expect[i * c.cols() + j], "entry ({i},{j})");
            }
        }
    }

    fn random_int_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> Matrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-8..=8) as f64).collect();
        Matrix::new(rows, cols, data)
    }

    #[test]
    fn pad_dims_examples() {
        let strassen = Arc::new(catalog::strassen());
        let plan = RecursionPlan::stationary(strassen, 2);
        assert_eq!(pad_dims(5, 5, 5, &plan).unwrap(), (8, 8, 8));

        let c423 = Arc::new(catalog::classical(4, 2, 3).unwrap());
        let plan = RecursionPlan::stationary(c423, 6);
        assert_eq!(pad_dims(4096, 2048, 3645, &plan).unwrap(), (4096, 2048, 3645));
        assert_eq!(
            pad_dims(4096, 2047, 3644, &plan).unwrap(),
            (4096, 2048, 3645)
        );
    }

    #[test]
    fn classical_plan_matches_direct_kernel_bitwise() {
        let mut rng = StdRng::seed_from_u64(7);
        let a = Matrix::new(
            9,
            6,
            (0..54).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let b = Matrix::new(
            6,
            11,
            (0..66).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let via_plan = multiply(&a, &b, &RecursionPlan::Classical).unwrap();
        let direct = multiply_classical(&a, &b).unwrap();
        for (x, y) in via_plan.data().iter().zip(direct.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        let strassen = Arc::new(catalog::strassen());
        let zero_levels = multiply(&a, &b, &RecursionPlan::stationary(strassen, 0)).unwrap();
        for (x, y) in zero_levels.data().iter().zip(direct.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn small_integer_products_are_exact() {
        let mut rng = StdRng::seed_from_u64(42);
        let strassen = Arc::new(catalog::strassen());
        let f323 = Arc::new(catalog::fast323());
        let f442 = Arc::new(catalog::fast442());
        let plans: Vec<(RecursionPlan, usize, usize, usize)> = vec![
            (RecursionPlan::Classical, 5, 7, 3),
            (RecursionPlan::stationary(strassen.clone(), 1), 6, 6, 6),
            (RecursionPlan::stationary(strassen.clone(), 3), 8, 8, 8),
            (RecursionPlan::stationary(f323.clone(), 2), 9, 4, 9),
            (RecursionPlan::stationary(f442.clone(), 1), 8, 8, 4),
            (
                RecursionPlan::uniform(vec![strassen.clone(), f323.clone()]),
                12, 12, 12,
            ),
            (
                RecursionPlan::uniform(vec![f442.clone(), strassen.clone()]),
                8, 8, 8,
            ),
        ];
        for (plan, m, k, n) in plans {
            let a = random_int_matrix(&mut rng, m, k);
            let b = random_int_matrix(&mut rng, k, n);
            let c = multiply(&a, &b, &plan).unwrap();
            assert_exact(&c, &rat_multiply(&a, &b));
        }
    }

    #[test]
    fn fractional_coefficients_stay_exact_on_representable_data() {
        // An algorithm with 1/2 coefficients still multiplies small binary
        // fractions exactly: every intermediate is representable.
        let strassen = Arc::new(catalog::strassen());
        let half = {
            let mut u = RatMat::zeros(4, 7);
            let mut v = RatMat::zeros(4, 7);
            let mut w = RatMat::zeros(4, 7);
            let base = catalog::strassen();
            for r in 0..7 {
                for i in 0..4 {
                    u.set(i, r, base.u().get(i, r).clone() * Rat::new(1.into(), 2.into()));
                    v.set(i, r, base.v().get(i, r).clone() * Rat::new(2.into(), 1.into()));
                    w.set(i, r, base.w().get(i, r).clone());
                }
            }
            crate::algo::validate(crate::algo::UnvalidatedAlgorithm {
                name: "strassen-rescaled".into(),
                m0: 2,
                k0: 2,
                n0: 2,
                u,
                v,
                w,
            })
            .unwrap()
        };
        let mut rng = StdRng::seed_from_u64(3);
        let a = Matrix::new(4, 4, (0..16).map(|_| rng.gen_range(-16..=16) as f64 / 4.0).collect());
        let b = Matrix::new(4, 4, (0..16).map(|_| rng.gen_range(-16..=16) as f64 / 4.0).collect());
        let expect = rat_multiply(&a, &b);
        let c1 = multiply(&a, &b, &RecursionPlan::stationary(Arc::new(half), 1)).unwrap();
        let c2 = multiply(&a, &b, &RecursionPlan::stationary(strassen, 1)).unwrap();
        assert_exact(&c1, &expect);
        assert_exact(&c2, &expect);
    }

    #[test]
    fn tree_plan_matches_equivalent_stationary_bitwise() {
        let strassen = Arc::new(catalog::strassen());
        let level1 = Arc::new(TreeNode::leaf_level(strassen.clone()));
        let root = Arc::new(
            TreeNode::new(
                strassen.clone(),
                vec![TreeChild::Node(level1); 7],
            )
            .unwrap(),
        );
        let tree = RecursionPlan::tree(root);
        let stationary = RecursionPlan::stationary(strassen, 2);

        let mut rng = StdRng::seed_from_u64(11);
        let a = Matrix::new(7, 5, (0..35).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let b = Matrix::new(5, 9, (0..45).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let c_tree = multiply(&a, &b, &tree).unwrap();
        let c_stat = multiply(&a, &b, &stationary).unwrap();
        for (x, y) in c_tree.data().iter().zip(c_stat.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn mixed_tree_multiplies_correctly() {
        // Root 442, children alternate between strassen nodes and must be
        // rejected: level-1 dims differ. Then a correct tree: root strassen,
        // level 1 alternates strassen and 222-classical algorithms.
        let strassen = Arc::new(catalog::strassen());
        let c222 = Arc::new(catalog::classical(2, 2, 2).unwrap());
        let mut children = Vec::new();
        for r in 0..7 {
            let alg = if r % 2 == 0 { strassen.clone() } else { c222.clone() };
            children.push(TreeChild::Node(Arc::new(TreeNode::leaf_level(alg))));
        }
        let root = Arc::new(TreeNode::new(strassen.clone(), children).unwrap());
        let plan = RecursionPlan::tree(root);
        assert_eq!(plan.shape().unwrap().levels(), &[(2, 2, 2), (2, 2, 2)]);

        let mut rng = StdRng::seed_from_u64(23);
        let a = random_int_matrix(&mut rng, 4, 4);
        let b = random_int_matrix(&mut rng, 4, 4);
        let c = multiply(&a, &b, &plan).unwrap();
        assert_exact(&c, &rat_multiply(&a, &b));
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let strassen = Arc::new(catalog::strassen());
        let f323 = Arc::new(catalog::fast323());

        let wrong_count = TreeNode::new(strassen.clone(), vec![TreeChild::Classical; 6]);
        assert!(matches!(wrong_count, Err(EngineError::MalformedPlan(_))));

        // Mixed leaf depth: child 0 splits once more, the rest are leaves.
        let deeper = TreeChild::Node(Arc::new(TreeNode::leaf_level(strassen.clone())));
        let mut children = vec![deeper];
        children.extend(vec![TreeChild::Classical; 6]);
        let ragged = RecursionPlan::tree(Arc::new(TreeNode::new(strassen.clone(), children).unwrap()));
        assert!(matches!(ragged.shape(), Err(EngineError::MalformedPlan(_))));

        // Mixed dims at one level.
        let mut children = vec![TreeChild::Node(Arc::new(TreeNode::leaf_level(f323)))];
        children.extend(vec![
            TreeChild::Node(Arc::new(TreeNode::leaf_level(strassen.clone())));
            6
        ]);
        let mixed = RecursionPlan::tree(Arc::new(TreeNode::new(strassen, children).unwrap()));
        assert!(matches!(mixed.shape(), Err(EngineError::MalformedPlan(_))));
    }

    #[test]
    fn padding_is_neutral_for_integer_data() {
        let strassen = Arc::new(catalog::strassen());
        let plan = RecursionPlan::stationary(strassen, 2);
        let mut rng = StdRng::seed_from_u64(5);
        let a = random_int_matrix(&mut rng, 5, 5);
        let b = random_int_matrix(&mut rng, 5, 5);
        assert_eq!(pad_dims(5, 5, 5, &plan).unwrap(), (8, 8, 8));
        let c = multiply(&a, &b, &plan).unwrap();
        assert_eq!((c.rows(), c.cols()), (5, 5));
        assert_exact(&c, &rat_multiply(&a, &b));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(4, 2);
        assert!(matches!(
            multiply(&a, &b, &RecursionPlan::Classical),
            Err(EngineError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fast_mode_stays_close_to_strict() {
        let mut rng = StdRng::seed_from_u64(17);
        let a = Matrix::new(16, 16, (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let b = Matrix::new(16, 16, (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let strassen = Arc::new(catalog::strassen());
        let plan = RecursionPlan::stationary(strassen, 2);
        let strict = multiply_mode(&a, &b, &plan, ExecMode::Strict).unwrap();
        let fast = multiply_mode(&a, &b, &plan, ExecMode::Fast).unwrap();
        for (x, y) in strict.data().iter().zip(fast.data()) {
            let diff = (x - y).abs();
            assert!(diff <= 1e-12 * x.abs().max(y.abs()).max(1.0));
        }
    }

    #[test]
    fn repeated_runs_are_bitwise_identical() {
        let mut rng = StdRng::seed_from_u64(29);
        let a = Matrix::new(20, 20, (0..400).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let b = Matrix::new(20, 20, (0..400).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let f323 = Arc::new(catalog::fast323());
        let plan = RecursionPlan::stationary(f323, 2);
        let c1 = multiply(&a, &b, &plan).unwrap();
        let c2 = multiply(&a, &b, &plan).unwrap();
        for (x, y) in c1.data().iter().zip(c2.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn known_product_float_check() {
        let a = Matrix::from_rows(&[&[1.5, 2.0], &[-0.25, 4.0]]);
        let b = Matrix::from_rows(&[&[2.0, 0.5], &[1.0, -1.0]]);
        let strassen = Arc::new(catalog::strassen());
        let c = multiply(&a, &b, &RecursionPlan::stationary(strassen, 1)).unwrap();
        let want = [5.0, -1.25, 3.5, -4.125];
        for (got, want) in c.data().iter().zip(want.iter()) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
