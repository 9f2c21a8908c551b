//! Diagonal scaling of the operands around a fast multiply.
//!
//! Fast recursions lose relative accuracy when the operands are badly
//! scaled, because their error bounds are normwise: a tiny product entry
//! inherits absolute error proportional to `||A|| * ||B||`. Conjugating the
//! multiply with diagonal matrices repairs much of that imbalance without
//! changing the exact product:
//!
//! * outside scaling divides each row of `A` and each column of `B` by its
//!   max-norm and multiplies the factors back into the result,
//! * inside scaling balances the inner dimension with a transient diagonal
//!   `D`, computing `(A D) (D^-1 B)`, which needs no post-correction,
//! * repeated scaling alternates the two, accumulating the outside factors,
//!   until a stopping test certifies that further rounds cannot improve the
//!   scaled problem by more than the tolerance `tau`.
//!
//! Each applied step is recorded in a [`ScalingTrace`] with its factors, the
//! contraction measure `w` (the largest absolute natural log of any factor,
//! which is nonincreasing over the alternation and halves across each
//! balancing step), the operand norms after the step, and the stop-test
//! verdict where one was evaluated.
//!
//! With `pow2_round` enabled every factor is rounded to the nearest power
//! of two in log scale, making all scalings exact in floating point: the
//! scaled multiply then recovers the unscaled result bitwise (absent
//! overflow or underflow), at the price of a residual imbalance of at most
//! a factor of `sqrt(2)`.

use thiserror::Error;

use crate::engine::{self, EngineError, ExecMode, RecursionPlan};
use crate::matrix::Matrix;

/// Scaling failures.
#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("cannot scale: {slice} {index} has maximum absolute value {value}; a positive finite maximum is required")]
    UnscalableSlice {
        slice: &'static str,
        index: usize,
        value: f64,
    },
    #[error("scaling factor for {slice} {index} came out as {value}; the dynamic range of the inputs is too extreme")]
    NonFiniteFactor {
        slice: &'static str,
        index: usize,
        value: f64,
    },
    #[error("inner dimensions disagree: A has {k_left} columns but B has {k_right} rows")]
    DimensionMismatch { k_left: usize, k_right: usize },
    #[error("matrices must be nonempty to scale")]
    EmptyInput,
    #[error("invalid scaling configuration: {reason}")]
    Config { reason: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Which scaling is applied around the multiply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMode {
    /// No scaling; `scaled_multiply` is a bitwise pass-through.
    None,
    /// One outside step (row factors for `A`, column factors for `B`).
    Outside,
    /// One inside step (transient diagonal between the operands).
    Inside,
    /// One outside step followed by one inside step.
    OutsideThenInside,
    /// One inside step followed by one outside step.
    InsideThenOutside,
    /// Alternating steps until the stop test fires or `max_steps` is hit.
    Repeated,
}

impl ScalingMode {
    /// Stable lowercase name used by command-line output.
    pub fn text_name(self) -> &'static str {
        match self {
            ScalingMode::None => "none",
            ScalingMode::Outside => "outside",
            ScalingMode::Inside => "inside",
            ScalingMode::OutsideThenInside => "outside-inside",
            ScalingMode::InsideThenOutside => "inside-outside",
            ScalingMode::Repeated => "repeated",
        }
    }
}

/// The two step kinds of the alternating iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Outside,
    Inside,
}

impl StepKind {
    fn other(self) -> StepKind {
        match self {
            StepKind::Outside => StepKind::Inside,
            StepKind::Inside => StepKind::Outside,
        }
    }

    fn letter(self) -> char {
        match self {
            StepKind::Outside => 'O',
            StepKind::Inside => 'I',
        }
    }
}

/// Full description of a scaling run.
#[derive(Debug, Clone, Copy)]
pub struct ScalingConfig {
    pub mode: ScalingMode,
    /// Which step opens the repeated iteration.
    pub first_step: StepKind,
    /// Relative tolerance of the stopping criterion; must be positive.
    pub tau: f64,
    /// Hard cap on the number of steps of the repeated iteration.
    pub max_steps: usize,
    /// Round every factor to the nearest power of two (in log scale).
    pub pow2_round: bool,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            mode: ScalingMode::None,
            first_step: StepKind::Outside,
            tau: 1e-14,
            max_steps: 40,
            pow2_round: false,
        }
    }
}

impl ScalingConfig {
    fn validate(&self) -> Result<(), ScalingError> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(ScalingError::Config {
                reason: format!("tau must be positive and finite, got {}", self.tau),
            });
        }
        if self.max_steps == 0 {
            return Err(ScalingError::Config {
                reason: "max_steps must be at least 1".to_string(),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Trace and state
// ---------------------------------------------------------------------------

/// Per-step factors, by step kind.
#[derive(Debug, Clone)]
pub enum StepFactors {
    /// Row factors of `A` and column factors of `B`.
    Outside { r: Vec<f64>, s: Vec<f64> },
    /// The transient inner diagonal.
    Inside { p: Vec<f64> },
}

impl StepFactors {
    pub fn kind(&self) -> StepKind {
        match self {
            StepFactors::Outside { .. } => StepKind::Outside,
            StepFactors::Inside { .. } => StepKind::Inside,
        }
    }

    /// Smallest and largest factor applied in this step.
    pub fn range(&self) -> (f64, f64) {
        let all: &[&[f64]] = match self {
            StepFactors::Outside { r, s } => &[r, s],
            StepFactors::Inside { p } => &[p],
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in all.iter().flat_map(|v| v.iter()) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        (lo, hi)
    }
}

/// One applied scaling step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub factors: StepFactors,
    /// Largest absolute natural log of any factor of this step.
    pub w: f64,
    /// Stop-test verdict, `None` where the test was not evaluated.
    pub stop_test: Option<bool>,
    /// Max-norm of the working `A` after this step.
    pub norm_a: f64,
    /// Max-norm of the working `B` after this step.
    pub norm_b: f64,
}

impl StepRecord {
    pub fn kind(&self) -> StepKind {
        self.factors.kind()
    }
}

/// The sequence of applied steps.
#[derive(Debug, Clone, Default)]
pub struct ScalingTrace {
    pub steps: Vec<StepRecord>,
}

impl ScalingTrace {
    /// True when the stopping criterion ended the iteration.
    pub fn fired(&self) -> bool {
        self.steps
            .last()
            .map_or(false, |rec| rec.stop_test == Some(true))
    }

    /// One line per step, for human consumption.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, rec) in self.steps.iter().enumerate() {
            let (lo, hi) = rec.factors.range();
            let verdict = match rec.stop_test {
                None => "untested",
                Some(false) => "continue",
                Some(true) => "fired",
            };
            out.push_str(&format!(
                "step {}: {} w={:.6e} factors in [{:.6e}, {:.6e}] norm_a={:.6e} norm_b={:.6e} stop={}\n",
                t + 1,
                rec.kind().letter(),
                rec.w,
                lo,
                hi,
                rec.norm_a,
                rec.norm_b,
                verdict,
            ));
        }
        out
    }
}

/// Result of a scaling run: the working matrices plus the factors needed to
/// recover the original product.
///
/// In exact arithmetic `diag(d_a) * a_scaled * b_scaled * diag(d_b)` equals
/// `A * B` for the original inputs. Inside steps contribute nothing to
/// `d_a`/`d_b`: their diagonal cancels between the two operands.
#[derive(Debug, Clone)]
pub struct ScalingState {
    /// Accumulated left factors (one per row of `A`).
    pub d_a: Vec<f64>,
    /// Accumulated right factors (one per column of `B`).
    pub d_b: Vec<f64>,
    pub a_scaled: Matrix,
    pub b_scaled: Matrix,
    pub steps_taken: usize,
    /// True when the repeated iteration hit `max_steps` without the stop
    /// test firing. Never set by the fixed one- and two-step modes.
    pub cap_reached: bool,
}

// ---------------------------------------------------------------------------
// Power-of-two rounding
// ---------------------------------------------------------------------------

/// `2^e` as an `f64`, exact over the full exponent range.
fn exp2i(e: i32) -> f64 {
    if (-1022..=1023).contains(&e) {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e > 1023 {
        f64::INFINITY
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

/// Rounds a positive finite value to the nearest power of two in log scale,
/// ties toward the smaller exponent.
fn round_to_pow2(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    // log2 can be off by an ulp near exact powers; pin e0 so that
    // 2^e0 <= x < 2^(e0+1).
    let mut e0 = x.log2().floor() as i32;
    if exp2i(e0) > x {
        e0 -= 1;
    } else if exp2i(e0 + 1) <= x {
        e0 += 1;
    }
    // The ratio x / 2^e0 lies in [1, 2); compare its square against 2 to
    // decide which neighbor is nearer in log scale without taking roots.
    let ratio = x / exp2i(e0);
    if ratio * ratio <= 2.0 {
        exp2i(e0)
    } else {
        exp2i(e0 + 1)
    }
}

// ---------------------------------------------------------------------------
// Single steps
// ---------------------------------------------------------------------------

fn slice_max(
    values: impl Iterator<Item = f64>,
    slice: &'static str,
    index: usize,
) -> Result<f64, ScalingError> {
    let mut m = 0.0f64;
    for v in values {
        m = m.max(v.abs());
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(ScalingError::UnscalableSlice {
            slice,
            index,
            value: m,
        });
    }
    Ok(m)
}

fn checked_factor(
    raw: f64,
    pow2: bool,
    slice: &'static str,
    index: usize,
) -> Result<f64, ScalingError> {
    let f = if pow2 { round_to_pow2(raw) } else { raw };
    if !(f > 0.0) || !f.is_finite() {
        return Err(ScalingError::NonFiniteFactor {
            slice,
            index,
            value: f,
        });
    }
    Ok(f)
}

/// Working data of a scaling run; each step mutates the matrices in place
/// and appends a trace record.
struct Iteration {
    a: Matrix,
    b: Matrix,
    d_a: Vec<f64>,
    d_b: Vec<f64>,
    steps: Vec<StepRecord>,
}

impl Iteration {
    fn begin(a: &Matrix, b: &Matrix) -> Result<Self, ScalingError> {
        if a.rows() == 0 || a.cols() == 0 || b.rows() == 0 || b.cols() == 0 {
            return Err(ScalingError::EmptyInput);
        }
        Ok(Iteration {
            a: a.clone(),
            b: b.clone(),
            d_a: vec![1.0; a.rows()],
            d_b: vec![1.0; b.cols()],
            steps: Vec::new(),
        })
    }

    fn step(&mut self, kind: StepKind, pow2: bool) -> Result<(), ScalingError> {
        let factors = match kind {
            StepKind::Outside => self.outside(pow2)?,
            StepKind::Inside => self.inside(pow2)?,
        };
        let mut w = 0.0f64;
        match &factors {
            StepFactors::Outside { r, s } => {
                for v in r.iter().chain(s) {
                    w = w.max(v.ln().abs());
                }
            }
            StepFactors::Inside { p } => {
                for v in p {
                    w = w.max(v.ln().abs());
                }
            }
        }
        self.steps.push(StepRecord {
            factors,
            w,
            stop_test: None,
            norm_a: self.a.max_norm(),
            norm_b: self.b.max_norm(),
        });
        Ok(())
    }

    fn outside(&mut self, pow2: bool) -> Result<StepFactors, ScalingError> {
        let (m, ka) = (self.a.rows(), self.a.cols());
        let (kb, n) = (self.b.rows(), self.b.cols());
        let mut r = Vec::with_capacity(m);
        for i in 0..m {
            let raw = slice_max((0..ka).map(|j| self.a.get(i, j)), "row of A", i)?;
            r.push(checked_factor(raw, pow2, "row of A", i)?);
        }
        let mut s = Vec::with_capacity(n);
        for j in 0..n {
            let raw = slice_max((0..kb).map(|i| self.b.get(i, j)), "column of B", j)?;
            s.push(checked_factor(raw, pow2, "column of B", j)?);
        }
        let a = self.a.data_mut();
        for i in 0..m {
            for j in 0..ka {
                a[i * ka + j] /= r[i];
            }
        }
        let b = self.b.data_mut();
        for i in 0..kb {
            for j in 0..n {
                b[i * n + j] /= s[j];
            }
        }
        for (i, (d, f)) in self.d_a.iter_mut().zip(&r).enumerate() {
            *d *= f;
            if !d.is_finite() || !(*d > 0.0) {
                return Err(ScalingError::NonFiniteFactor {
                    slice: "accumulated row factor",
                    index: i,
                    value: *d,
                });
            }
        }
        for (j, (d, f)) in self.d_b.iter_mut().zip(&s).enumerate() {
            *d *= f;
            if !d.is_finite() || !(*d > 0.0) {
                return Err(ScalingError::NonFiniteFactor {
                    slice: "accumulated column factor",
                    index: j,
                    value: *d,
                });
            }
        }
        Ok(StepFactors::Outside { r, s })
    }

    fn inside(&mut self, pow2: bool) -> Result<StepFactors, ScalingError> {
        let (m, ka) = (self.a.rows(), self.a.cols());
        let (kb, n) = (self.b.rows(), self.b.cols());
        if ka != kb {
            return Err(ScalingError::DimensionMismatch {
                k_left: ka,
                k_right: kb,
            });
        }
        let mut p = Vec::with_capacity(ka);
        for k in 0..ka {
            let ca = slice_max((0..m).map(|i| self.a.get(i, k)), "column of A", k)?;
            let rb = slice_max((0..n).map(|j| self.b.get(k, j)), "row of B", k)?;
            p.push(checked_factor((rb / ca).sqrt(), pow2, "inner diagonal", k)?);
        }
        let a = self.a.data_mut();
        for i in 0..m {
            for k in 0..ka {
                a[i * ka + k] *= p[k];
            }
        }
        let b = self.b.data_mut();
        for k in 0..kb {
            for j in 0..n {
                b[k * n + j] /= p[k];
            }
        }
        Ok(StepFactors::Inside { p })
    }

    fn finish(self, cap_reached: bool) -> (ScalingState, ScalingTrace) {
        (
            ScalingState {
                d_a: self.d_a,
                d_b: self.d_b,
                a_scaled: self.a,
                b_scaled: self.b,
                steps_taken: self.steps.len(),
                cap_reached,
            },
            ScalingTrace { steps: self.steps },
        )
    }
}

fn stop_test_passes(factors: &StepFactors, tau: f64) -> bool {
    match factors {
        // After a balancing step the iteration may stop once every inner
        // factor sits within (1+tau)^(+-1/4) of one.
        StepFactors::Inside { p } => {
            let lo = (1.0 + tau).powf(-0.25);
            let hi = (1.0 + tau).powf(0.25);
            p.iter().all(|&x| lo <= x && x <= hi)
        }
        // After a normalizing step every factor is at most one (the previous
        // step left all row and column maxima at most one), so only the
        // lower bound (1+tau)^(-1/2) needs checking.
        StepFactors::Outside { r, s } => {
            let lo = (1.0 + tau).powf(-0.5);
            r.iter().all(|&x| x >= lo) && s.iter().all(|&x| x >= lo)
        }
    }
}

fn fixed_sequence(
    a: &Matrix,
    b: &Matrix,
    kinds: &[StepKind],
    pow2: bool,
) -> Result<(ScalingState, ScalingTrace), ScalingError> {
    let mut it = Iteration::begin(a, b)?;
    for &kind in kinds {
        it.step(kind, pow2)?;
    }
    Ok(it.finish(false))
}

fn identity_state(a: &Matrix, b: &Matrix) -> ScalingState {
    ScalingState {
        d_a: vec![1.0; a.rows()],
        d_b: vec![1.0; b.cols()],
        a_scaled: a.clone(),
        b_scaled: b.clone(),
        steps_taken: 0,
        cap_reached: false,
    }
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// One outside step: divides row `i` of `A` by its max-norm and column `j`
/// of `B` by its max-norm, recording the factors in `d_a`/`d_b`.
///
/// With `pow2` off both scaled operands have max-norm exactly one, and every
/// row of `a_scaled` and column of `b_scaled` attains absolute value one.
pub fn outside_scale(a: &Matrix, b: &Matrix, pow2: bool) -> Result<ScalingState, ScalingError> {
    Ok(fixed_sequence(a, b, &[StepKind::Outside], pow2)?.0)
}

/// One inside step: computes the transient diagonal
/// `d_k = sqrt(rowmax_k(B) / colmax_k(A))` and forms `A * D` and `D^-1 * B`.
///
/// The diagonal cancels in the product, so `d_a` and `d_b` stay all-ones and
/// the result needs no post-correction. After the step, column `k` of
/// `a_scaled` and row `k` of `b_scaled` have equal max-norms (up to the
/// roundoff of the square root), namely `sqrt(colmax_k(A) * rowmax_k(B))`.
pub fn inside_scale(a: &Matrix, b: &Matrix, pow2: bool) -> Result<ScalingState, ScalingError> {
    Ok(fixed_sequence(a, b, &[StepKind::Inside], pow2)?.0)
}

/// The alternating iteration: steps of alternating kind starting with
/// `cfg.first_step`, until the stopping test fires at tolerance `cfg.tau`
/// or `cfg.max_steps` steps have been applied (`cap_reached` in the state).
///
/// The stop test is evaluated from the step after the first outside step
/// onward; earlier steps carry `stop_test: None` in the trace. Uses
/// `cfg.first_step`, `cfg.tau`, `cfg.max_steps`, and `cfg.pow2_round`;
/// `cfg.mode` is ignored.
pub fn repeated_scale(
    a: &Matrix,
    b: &Matrix,
    cfg: &ScalingConfig,
) -> Result<(ScalingState, ScalingTrace), ScalingError> {
    cfg.validate()?;
    let mut it = Iteration::begin(a, b)?;
    let mut kind = cfg.first_step;
    let test_from = match cfg.first_step {
        StepKind::Outside => 1,
        StepKind::Inside => 2,
    };
    let mut fired = false;
    for t in 0..cfg.max_steps {
        it.step(kind, cfg.pow2_round)?;
        if t >= test_from {
            let rec = it.steps.last_mut().expect("step just pushed");
            let pass = stop_test_passes(&rec.factors, cfg.tau);
            rec.stop_test = Some(pass);
            if pass {
                fired = true;
                break;
            }
        }
        kind = kind.other();
    }
    Ok(it.finish(!fired))
}

/// Applies the scaling selected by `cfg.mode` and returns the state along
/// with the trace of applied steps. The fixed one- and two-step modes do not
/// evaluate the stop test; mode `none` returns the operands unchanged with
/// an empty trace.
pub fn scale(
    a: &Matrix,
    b: &Matrix,
    cfg: &ScalingConfig,
) -> Result<(ScalingState, ScalingTrace), ScalingError> {
    cfg.validate()?;
    use StepKind::{Inside, Outside};
    match cfg.mode {
        ScalingMode::None => Ok((identity_state(a, b), ScalingTrace::default())),
        ScalingMode::Outside => fixed_sequence(a, b, &[Outside], cfg.pow2_round),
        ScalingMode::Inside => fixed_sequence(a, b, &[Inside], cfg.pow2_round),
        ScalingMode::OutsideThenInside => fixed_sequence(a, b, &[Outside, Inside], cfg.pow2_round),
        ScalingMode::InsideThenOutside => fixed_sequence(a, b, &[Inside, Outside], cfg.pow2_round),
        ScalingMode::Repeated => repeated_scale(a, b, cfg),
    }
}

// ---------------------------------------------------------------------------
// Scaled multiply
// ---------------------------------------------------------------------------

fn unscale(c: &Matrix, d_a: &[f64], d_b: &[f64]) -> Matrix {
    let (m, n) = (c.rows(), c.cols());
    let mut out = Matrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            out.set(i, j, (d_a[i] * c.get(i, j)) * d_b[j]);
        }
    }
    out
}

/// Scales per `cfg`, multiplies under `plan`, and applies the accumulated
/// factors to the result: `C = diag(d_a) * C' * diag(d_b)`. Also returns the
/// scaling state and trace, so callers can report step counts and factor
/// diagnostics. Mode `none` is a bitwise pass-through to the engine.
pub fn scaled_multiply_traced(
    a: &Matrix,
    b: &Matrix,
    plan: &RecursionPlan,
    cfg: &ScalingConfig,
    mode: ExecMode,
) -> Result<(Matrix, ScalingState, ScalingTrace), ScalingError> {
    if cfg.mode == ScalingMode::None {
        let c = engine::multiply_mode(a, b, plan, mode)?;
        return Ok((c, identity_state(a, b), ScalingTrace::default()));
    }
    let (state, trace) = scale(a, b, cfg)?;
    let c_scaled = engine::multiply_mode(&state.a_scaled, &state.b_scaled, plan, mode)?;
    let c = unscale(&c_scaled, &state.d_a, &state.d_b);
    Ok((c, state, trace))
}

/// `scaled_multiply_traced` in strict mode, returning only the product.
pub fn scaled_multiply(
    a: &Matrix,
    b: &Matrix,
    plan: &RecursionPlan,
    cfg: &ScalingConfig,
) -> Result<Matrix, ScalingError> {
    Ok(scaled_multiply_traced(a, b, plan, cfg, ExecMode::Strict)?.0)
}

/// `scaled_multiply_traced` with an explicit kernel mode, returning only the
/// product.
pub fn scaled_multiply_mode(
    a: &Matrix,
    b: &Matrix,
    plan: &RecursionPlan,
    cfg: &ScalingConfig,
    mode: ExecMode,
) -> Result<Matrix, ScalingError> {
    Ok(scaled_multiply_traced(a, b, plan, cfg, mode)?.0)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
