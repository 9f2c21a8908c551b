//! Principal stability quantities and forward error bounds.
//!
//! For a bilinear algorithm `[[U, V, W]]` with rank `R`:
//!
//! - `alpha_r`, `beta_r`: nonzeros of column `r` of `U` and `V`;
//! - `gamma_k`: nonzeros of row `k` of `W`;
//! - `a_r = sum_i |u_ir|`, `b_r = sum_j |v_jr|` (exact rationals);
//! - `q_k = gamma_k + max { alpha_r + beta_r : w_kr != 0 }` and `Q = max_k q_k`,
//!   the worst number of summation terms feeding one output entry;
//! - `e_k = sum_r a_r b_r |w_kr|` and `E = max_k e_k`, the amplification
//!   factor of one recursion level;
//! - `legacyE = max_k sum_r alpha_r beta_r |w_kr|`, the older amplification
//!   measure that uses term counts instead of coefficient magnitude sums
//!   (it coincides with `E` when every coefficient is 0 or +-1).
//!
//! A stationary recursion with `L` levels on an inner dimension `K` divisible
//! by `k0^L` satisfies
//!
//! ```text
//! |C - C_computed| <= (K/k0^L + Q L) * (K/k0^L) * E^L * ||A|| * ||B|| * eps
//! ```
//!
//! in the max-norm, to first order in eps. The uniform non-stationary bound
//! replaces `Q L` by the sum of the per-level `Q` and `E^L` by the product of
//! the per-level `E`. For general recursion trees the two level-aggregates
//! are replaced by `delta` (worst summation-term count along any root-to-leaf
//! accumulation path) and `xi` (worst amplification product), computed here
//! by exact recursions over the tree: `xi` cannot be read off per-level
//! maxima, because the maximizing output entry of one level need not be
//! the entry whose sub-product maximizes the next level.
//!
//! [`SummationModel::DivideAndConquer`] models pairwise (binary-tree)
//! summation: every term count `c` in `q`, `Q`, and `delta` is replaced by
//! `1 + ceil(log2 c)`. Amplification (`a`, `b`, `e`, `E`, `xi`) is a property
//! of the coefficients, not the summation order, and is unchanged.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::algo::{BilinearAlgorithm, Rat};
use crate::engine::{EngineError, RecursionPlan, TreeChild, TreeNode};

/// Stability analysis failures.
#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("inner dimension {k} is not divisible by the plan's k0 product {k0_product}")]
    Divisibility { k: u64, k0_product: u64 },
    #[error("plan rejected: {0}")]
    Plan(#[from] EngineError),
}

/// How sums are accumulated, which determines summation-term counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummationModel {
    /// Left-to-right accumulation: a sum of `c` terms counts `c`.
    Sequential,
    /// Pairwise accumulation: a sum of `c >= 2` terms counts
    /// `1 + ceil(log2 c)`.
    DivideAndConquer,
}

impl SummationModel {
    /// Term count of a sum of `c` terms under this model.
    pub fn count(self, c: u64) -> u64 {
        match self {
            SummationModel::Sequential => c,
            SummationModel::DivideAndConquer => {
                if c <= 1 {
                    c
                } else {
                    let log = c.ilog2() as u64;
                    1 + if c.is_power_of_two() { log } else { log + 1 }
                }
            }
        }
    }

    fn text_name(self) -> &'static str {
        match self {
            SummationModel::Sequential => "sequential",
            SummationModel::DivideAndConquer => "divide-and-conquer",
        }
    }
}

fn rat_string(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn rat_pow(base: &Rat, exp: usize) -> Rat {
    let mut out = Rat::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

// ---------------------------------------------------------------------------
// Per-algorithm analysis
// ---------------------------------------------------------------------------

/// Principal quantities of one bilinear algorithm.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub name: String,
    pub m0: usize,
    pub k0: usize,
    pub n0: usize,
    pub rank: usize,
    pub nnz: usize,
    /// Nonzeros per `U` column.
    pub alpha: Vec<usize>,
    /// Nonzeros per `V` column.
    pub beta: Vec<usize>,
    /// Nonzeros per `W` row.
    pub gamma: Vec<usize>,
    /// Absolute column sums of `U`.
    pub a: Vec<Rat>,
    /// Absolute column sums of `V`.
    pub b: Vec<Rat>,
    /// Per-output summation-term counts (indexed by row-major C index).
    pub q: Vec<u64>,
    /// `max_k q_k`.
    pub big_q: u64,
    /// Per-output amplification factors (indexed by row-major C index).
    pub e: Vec<Rat>,
    /// `max_k e_k`.
    pub big_e: Rat,
    /// Count-based amplification measure.
    pub legacy_e: Rat,
    /// `log_{n0} E` when `m0 = k0 = n0 >= 2`.
    pub stab_exponent: Option<f64>,
    /// Summation model used for `q`, `Q`.
    pub model: SummationModel,
}

impl StabilityReport {
    /// `e` reindexed by column-major C index `d = rowC + colC * m0`.
    pub fn e_column_major(&self) -> Vec<Rat> {
        (0..self.e.len())
            .map(|d| self.e[(d % self.m0) * self.n0 + d / self.m0].clone())
            .collect()
    }

    /// Key-value text block, one quantity per line.
    pub fn to_text(&self) -> String {
        let join_usize = |v: &[usize]| {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        let join_u64 =
            |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let join_rat =
            |v: &[Rat]| v.iter().map(rat_string).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        out.push_str(&format!("name: {}\n", self.name));
        out.push_str(&format!("dims: {}x{}x{}\n", self.m0, self.k0, self.n0));
        out.push_str(&format!("rank: {}\n", self.rank));
        out.push_str(&format!("nnz: {}\n", self.nnz));
        out.push_str(&format!("model: {}\n", self.model.text_name()));
        out.push_str(&format!("alpha: {}\n", join_usize(&self.alpha)));
        out.push_str(&format!("beta: {}\n", join_usize(&self.beta)));
        out.push_str(&format!("gamma: {}\n", join_usize(&self.gamma)));
        out.push_str(&format!("a: {}\n", join_rat(&self.a)));
        out.push_str(&format!("b: {}\n", join_rat(&self.b)));
        out.push_str(&format!("q: {}\n", join_u64(&self.q)));
        out.push_str(&format!("Q: {}\n", self.big_q));
        out.push_str(&format!("e: {}\n", join_rat(&self.e)));
        out.push_str(&format!("E: {}\n", rat_string(&self.big_e)));
        out.push_str(&format!("legacyE: {}\n", rat_string(&self.legacy_e)));
        match self.stab_exponent {
            Some(x) => out.push_str(&format!("stab-exponent: {x}\n")),
            None => out.push_str("stab-exponent: n/a\n"),
        }
        out
    }

    /// CSV column names matching [`StabilityReport::to_csv_row`].
    pub fn csv_header() -> &'static str {
        "name,m0,k0,n0,rank,nnz,Q,E,legacyE,stab_exponent"
    }

    /// One CSV row; exact rationals are rendered as doubles.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.name,
            self.m0,
            self.k0,
            self.n0,
            self.rank,
            self.nnz,
            self.big_q,
            rat_to_f64(&self.big_e),
            rat_to_f64(&self.legacy_e),
            self.stab_exponent.map_or(String::new(), |x| x.to_string()),
        )
    }
}

/// Analyzes one algorithm under sequential summation.
pub fn analyze(alg: &BilinearAlgorithm) -> StabilityReport {
    analyze_with(alg, SummationModel::Sequential)
}

/// Analyzes one algorithm under an explicit summation model.
pub fn analyze_with(alg: &BilinearAlgorithm, model: SummationModel) -> StabilityReport {
    let (m0, k0, n0) = alg.dims();
    let rank = alg.rank();
    let col_nnz = |mat: &crate::algo::RatMat, r: usize| {
        (0..mat.rows()).filter(|&i| !mat.get(i, r).is_zero()).count()
    };
    let col_abs_sum = |mat: &crate::algo::RatMat, r: usize| {
        (0..mat.rows()).fold(Rat::zero(), |acc, i| acc + mat.get(i, r).abs())
    };

    let alpha: Vec<usize> = (0..rank).map(|r| col_nnz(alg.u(), r)).collect();
    let beta: Vec<usize> = (0..rank).map(|r| col_nnz(alg.v(), r)).collect();
    let a: Vec<Rat> = (0..rank).map(|r| col_abs_sum(alg.u(), r)).collect();
    let b: Vec<Rat> = (0..rank).map(|r| col_abs_sum(alg.v(), r)).collect();

    let outputs = m0 * n0;
    let mut gamma = Vec::with_capacity(outputs);
    let mut q = Vec::with_capacity(outputs);
    let mut e = Vec::with_capacity(outputs);
    let mut legacy = Vec::with_capacity(outputs);
    for k in 0..outputs {
        let mut g = 0usize;
        let mut worst_terms: Option<u64> = None;
        let mut amp = Rat::zero();
        let mut amp_legacy = Rat::zero();
        for r in 0..rank {
            let w = alg.w().get(k, r);
            if w.is_zero() {
                continue;
            }
            g += 1;
            let terms = model.count(alpha[r] as u64) + model.count(beta[r] as u64);
            worst_terms = Some(worst_terms.map_or(terms, |t| t.max(terms)));
            let wabs = w.abs();
            amp += &a[r] * &b[r] * &wabs;
            amp_legacy += Rat::from_integer((alpha[r] * beta[r]).into()) * wabs;
        }
        let worst_terms = worst_terms.expect("validated algorithm has a nonzero W row");
        gamma.push(g);
        q.push(model.count(g as u64) + worst_terms);
        e.push(amp);
        legacy.push(amp_legacy);
    }

    let big_q = q.iter().copied().max().unwrap_or(0);
    let big_e = e.iter().max().cloned().unwrap_or_else(Rat::zero);
    let legacy_e = legacy.iter().max().cloned().unwrap_or_else(Rat::zero);
    let stab_exponent = (m0 == k0 && k0 == n0 && n0 >= 2)
        .then(|| rat_to_f64(&big_e).ln() / (n0 as f64).ln());

    StabilityReport {
        name: alg.name().to_string(),
        m0,
        k0,
        n0,
        rank,
        nnz: alg.nnz(),
        alpha,
        beta,
        gamma,
        a,
        b,
        q,
        big_q,
        e,
        big_e,
        legacy_e,
        stab_exponent,
        model,
    }
}

// ---------------------------------------------------------------------------
// Error bounds
// ---------------------------------------------------------------------------

fn check_divisible(k: u64, k0_product: u64) -> Result<u64, StabilityError> {
    if k0_product == 0 || k % k0_product != 0 {
        return Err(StabilityError::Divisibility { k, k0_product });
    }
    Ok(k / k0_product)
}

/// First-order forward bound of a stationary recursion: `levels` levels of
/// the analyzed algorithm on inner dimension `k` (must be divisible by
/// `k0^levels`), base-case summation over `k / k0^levels` terms.
pub fn bound_stationary(
    report: &StabilityReport,
    levels: usize,
    k: u64,
    norm_a: f64,
    norm_b: f64,
    eps: f64,
) -> Result<f64, StabilityError> {
    let k0_product = (report.k0 as u64)
        .checked_pow(levels as u32)
        .ok_or(StabilityError::Divisibility { k, k0_product: u64::MAX })?;
    let ratio = check_divisible(k, k0_product)?;
    let additive = report.model.count(ratio) + report.big_q * levels as u64;
    let growth = rat_pow(&report.big_e, levels);
    Ok(additive as f64 * ratio as f64 * rat_to_f64(&growth) * norm_a * norm_b * eps)
}

/// First-order forward bound of a uniform non-stationary recursion: level
/// `l` runs `reports[l]`'s algorithm. An empty sequence is a pure classical
/// multiply. The base-case term count uses divide-and-conquer form only when
/// every per-level report does.
pub fn bound_uniform_nonstationary(
    reports: &[StabilityReport],
    k: u64,
    norm_a: f64,
    norm_b: f64,
    eps: f64,
) -> Result<f64, StabilityError> {
    let mut k0_product = 1u64;
    for rep in reports {
        k0_product = k0_product
            .checked_mul(rep.k0 as u64)
            .ok_or(StabilityError::Divisibility { k, k0_product: u64::MAX })?;
    }
    let ratio = check_divisible(k, k0_product)?;
    let base_model = if !reports.is_empty()
        && reports.iter().all(|r| r.model == SummationModel::DivideAndConquer)
    {
        SummationModel::DivideAndConquer
    } else {
        SummationModel::Sequential
    };
    let additive =
        base_model.count(ratio) + reports.iter().map(|r| r.big_q).sum::<u64>();
    let growth = reports.iter().fold(Rat::one(), |acc, r| acc * &r.big_e);
    Ok(additive as f64 * ratio as f64 * rat_to_f64(&growth) * norm_a * norm_b * eps)
}

/// Scale-free point on the speed/stability tradeoff curve after `levels`
/// levels: (flops relative to classical, amplification relative to the
/// bound-preserving baseline `k0^2`).
pub fn tradeoff_point(report: &StabilityReport, levels: usize) -> (f64, f64) {
    let flop_base = report.rank as f64 / (report.m0 * report.k0 * report.n0) as f64;
    let amp_base = rat_to_f64(&report.big_e) / (report.k0 * report.k0) as f64;
    (flop_base.powi(levels as i32), amp_base.powi(levels as i32))
}

/// Kronecker product of two per-output amplification vectors: the `e` vector
/// of the two-level algorithm whose levels have vectors `e1` and `e2`.
pub fn kron_stability_vector(e1: &[Rat], e2: &[Rat]) -> Vec<Rat> {
    let mut out = Vec::with_capacity(e1.len() * e2.len());
    for x in e1 {
        for y in e2 {
            out.push(x * y);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Plan analysis (delta / xi)
// ---------------------------------------------------------------------------

/// Stability aggregates of a whole recursion plan.
#[derive(Debug, Clone)]
pub struct PlanStabilityReport {
    /// Fast recursion depth.
    pub depth: usize,
    /// Product of per-level `k0`.
    pub k0_product: u64,
    /// Base-case inner dimension `k / k0_product`.
    pub ratio: u64,
    /// Worst summation-term count over root-to-leaf accumulation paths,
    /// including the base-case term.
    pub delta_max: u64,
    /// Worst amplification product over outputs (exact).
    pub xi_max: Rat,
    /// `delta_max * ratio * xi_max`: multiply by `||A|| ||B|| eps` for the
    /// first-order forward bound.
    pub bound_coefficient: f64,
    /// Summation model used for `delta_max`.
    pub model: SummationModel,
}

/// Analyzes a plan under sequential summation.
pub fn analyze_plan(plan: &RecursionPlan, k: u64) -> Result<PlanStabilityReport, StabilityError> {
    analyze_plan_with(plan, k, SummationModel::Sequential)
}

/// Analyzes a plan under an explicit summation model. Stationary and uniform
/// plans use the closed forms `delta = ratio' + sum Q` and `xi = prod E`;
/// tree plans run the exact recursions, memoized on shared subtrees.
pub fn analyze_plan_with(
    plan: &RecursionPlan,
    k: u64,
    model: SummationModel,
) -> Result<PlanStabilityReport, StabilityError> {
    let shape = plan.shape()?;
    let mut k0_product = 1u64;
    for &(_, k0, _) in shape.levels() {
        k0_product = k0_product
            .checked_mul(k0 as u64)
            .ok_or(StabilityError::Divisibility { k, k0_product: u64::MAX })?;
    }
    let ratio = check_divisible(k, k0_product)?;

    let (delta_max, xi_max) = match plan {
        RecursionPlan::Classical => (model.count(ratio), Rat::one()),
        RecursionPlan::Stationary { alg, levels } => {
            let rep = analyze_with(alg, model);
            (
                model.count(ratio) + rep.big_q * *levels as u64,
                rat_pow(&rep.big_e, *levels),
            )
        }
        RecursionPlan::Uniform { algs } => {
            let reps: Vec<StabilityReport> =
                algs.iter().map(|a| analyze_with(a, model)).collect();
            (
                model.count(ratio) + reps.iter().map(|r| r.big_q).sum::<u64>(),
                reps.iter().fold(Rat::one(), |acc, r| acc * &r.big_e),
            )
        }
        RecursionPlan::Tree(root) => {
            let mut walker = TreeWalker {
                model,
                reports: HashMap::new(),
                delta: HashMap::new(),
                xi: HashMap::new(),
            };
            let d_root = walker.node_delta(root);
            let xi_root = walker.node_xi(root);
            let xi = xi_root.iter().max().cloned().unwrap_or_else(Rat::one);
            (model.count(ratio) + d_root, xi)
        }
    };

    let bound_coefficient = delta_max as f64 * ratio as f64 * rat_to_f64(&xi_max);
    Ok(PlanStabilityReport {
        depth: shape.depth(),
        k0_product,
        ratio,
        delta_max,
        xi_max,
        bound_coefficient,
        model,
    })
}

/// Exact recursions over a tree plan, memoized by node identity so shared
/// subtrees are analyzed once.
struct TreeWalker {
    model: SummationModel,
    reports: HashMap<*const BilinearAlgorithm, Arc<StabilityReport>>,
    delta: HashMap<*const TreeNode, u64>,
    xi: HashMap<*const TreeNode, Arc<Vec<Rat>>>,
}

impl TreeWalker {
    fn report(&mut self, alg: &Arc<BilinearAlgorithm>) -> Arc<StabilityReport> {
        let key = Arc::as_ptr(alg);
        if let Some(rep) = self.reports.get(&key) {
            return rep.clone();
        }
        let rep = Arc::new(analyze_with(alg, self.model));
        self.reports.insert(key, rep.clone());
        rep
    }

    /// Worst summation-term count below this node (base-case term excluded):
    /// `max_k [ gamma'_k + max { alpha'_r + beta'_r + delta(child_r) : w_kr != 0 } ]`.
    fn node_delta(&mut self, node: &Arc<TreeNode>) -> u64 {
        let key = Arc::as_ptr(node);
        if let Some(&d) = self.delta.get(&key) {
            return d;
        }
        let rep = self.report(node.alg());
        let child_delta: Vec<u64> = node
            .children()
            .iter()
            .map(|c| match c {
                TreeChild::Classical => 0,
                TreeChild::Node(n) => self.node_delta(n),
            })
            .collect();
        let alg = node.alg();
        let mut worst = 0u64;
        for k in 0..rep.m0 * rep.n0 {
            let mut inner: Option<u64> = None;
            for r in 0..rep.rank {
                if alg.w().get(k, r).is_zero() {
                    continue;
                }
                let cand = self.model.count(rep.alpha[r] as u64)
                    + self.model.count(rep.beta[r] as u64)
                    + child_delta[r];
                inner = Some(inner.map_or(cand, |x| x.max(cand)));
            }
            let inner = inner.expect("validated algorithm has a nonzero W row");
            worst = worst.max(self.model.count(rep.gamma[k] as u64) + inner);
        }
        self.delta.insert(key, worst);
        worst
    }

    /// Exact per-output amplification vector of the subtree rooted here,
    /// indexed by the root-to-leaf output path
    /// `(k, tau) -> k * child_len + tau`:
    /// `xi[k, tau] = sum_r |w_kr| a_r b_r xi(child_r)[tau]`.
    fn node_xi(&mut self, node: &Arc<TreeNode>) -> Arc<Vec<Rat>> {
        let key = Arc::as_ptr(node);
        if let Some(v) = self.xi.get(&key) {
            return v.clone();
        }
        let rep = self.report(node.alg());
        let leaf: Arc<Vec<Rat>> = Arc::new(vec![Rat::one()]);
        let child_xi: Vec<Arc<Vec<Rat>>> = node
            .children()
            .iter()
            .map(|c| match c {
                TreeChild::Classical => leaf.clone(),
                TreeChild::Node(n) => self.node_xi(n),
            })
            .collect();
        let child_len = child_xi[0].len();
        let alg = node.alg();
        let mut out = vec![Rat::zero(); rep.m0 * rep.n0 * child_len];
        for k in 0..rep.m0 * rep.n0 {
            for r in 0..rep.rank {
                let w = alg.w().get(k, r);
                if w.is_zero() {
                    continue;
                }
                let scale = w.abs() * &rep.a[r] * &rep.b[r];
                let sub = &child_xi[r];
                for tau in 0..child_len {
                    out[k * child_len + tau] += &scale * &sub[tau];
                }
            }
        }
        let out = Arc::new(out);
        self.xi.insert(key, out.clone());
        out
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
