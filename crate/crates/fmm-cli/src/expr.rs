//! Textual grammars used on the command line: algorithm expressions,
//! recursion plans, scaling specifications, level lists, and step kinds.
//!
//! Every grammar here satisfies parse(print(x)) == x, so values echoed by
//! one command can be pasted into another.

use std::fmt;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use fmm::{catalog, BilinearAlgorithm, RecursionPlan, ScalingMode, StepKind, TreeChild, TreeNode};

// ---------------------------------------------------------------------------
// Algorithm expressions
// ---------------------------------------------------------------------------

/// A base-case algorithm: a catalog name, a classical case, or a transform.
///
/// Grammar: `strassen | 323 | 442 | classical:MxKxN | rot(expr) | tr(expr)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgExpr {
    Named(String),
    Classical(usize, usize, usize),
    Rot(Box<AlgExpr>),
    Tr(Box<AlgExpr>),
}

impl AlgExpr {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(inner) = enclosed(text, "rot(") {
            return Ok(AlgExpr::Rot(Box::new(AlgExpr::parse(inner)?)));
        }
        if let Some(inner) = enclosed(text, "tr(") {
            return Ok(AlgExpr::Tr(Box::new(AlgExpr::parse(inner)?)));
        }
        if let Some(dims) = text.strip_prefix("classical:") {
            let (m0, k0, n0) = parse_case_dims(dims)?;
            return Ok(AlgExpr::Classical(m0, k0, n0));
        }
        if catalog::by_name(text).is_some() {
            return Ok(AlgExpr::Named(text.to_string()));
        }
        bail!(
            "unknown algorithm '{text}': expected strassen, 323, 442, \
             classical:MxKxN, rot(expr), or tr(expr)"
        );
    }

    pub fn build(&self) -> Result<BilinearAlgorithm> {
        Ok(match self {
            AlgExpr::Named(name) => {
                catalog::by_name(name).ok_or_else(|| anyhow!("unknown algorithm '{name}'"))?
            }
            AlgExpr::Classical(m0, k0, n0) => catalog::classical(*m0, *k0, *n0)?,
            AlgExpr::Rot(inner) => fmm::cyclic_rotate(&inner.build()?),
            AlgExpr::Tr(inner) => fmm::transpose_transform(&inner.build()?),
        })
    }
}

impl fmt::Display for AlgExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgExpr::Named(name) => write!(f, "{name}"),
            AlgExpr::Classical(m0, k0, n0) => write!(f, "classical:{m0}x{k0}x{n0}"),
            AlgExpr::Rot(inner) => write!(f, "rot({inner})"),
            AlgExpr::Tr(inner) => write!(f, "tr({inner})"),
        }
    }
}

fn parse_case_dims(text: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = text.split('x').collect();
    if parts.len() != 3 {
        bail!("malformed dimensions '{text}': expected MxKxN");
    }
    let mut dims = [0usize; 3];
    for (slot, part) in dims.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .with_context(|| format!("malformed dimension '{part}' in '{text}'"))?;
        if *slot == 0 {
            bail!("dimensions must be positive in '{text}'");
        }
    }
    Ok((dims[0], dims[1], dims[2]))
}

// ---------------------------------------------------------------------------
// Recursion plans
// ---------------------------------------------------------------------------

/// A recursion plan.
///
/// Grammar: `classical | ALG:L=N | seq(ALG, ALG, ...) | TREE` where `TREE`
/// is `tree(ALG, CHILD, ...)` with one child per product of `ALG`, each
/// child either `classical` or a nested `tree(...)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanExpr {
    Classical,
    Stationary(AlgExpr, usize),
    Seq(Vec<AlgExpr>),
    Tree(TreeExpr),
}

/// One node of a tree plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeExpr {
    Classical,
    Node(AlgExpr, Vec<TreeExpr>),
}

impl PlanExpr {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "classical" {
            return Ok(PlanExpr::Classical);
        }
        if let Some(inner) = enclosed(text, "seq(") {
            let parts = split_top(inner)?;
            if parts.is_empty() {
                bail!("seq(...) needs at least one algorithm");
            }
            let algs = parts
                .iter()
                .map(|p| AlgExpr::parse(p))
                .collect::<Result<Vec<_>>>()?;
            return Ok(PlanExpr::Seq(algs));
        }
        if text.starts_with("tree(") {
            return Ok(PlanExpr::Tree(TreeExpr::parse(text)?));
        }
        if let Some((head, levels)) = text.rsplit_once(":L=") {
            let levels = levels
                .trim()
                .parse()
                .with_context(|| format!("malformed level count in '{text}'"))?;
            return Ok(PlanExpr::Stationary(AlgExpr::parse(head)?, levels));
        }
        bail!(
            "unrecognized plan '{text}': expected classical, ALG:L=N, \
             seq(ALG, ...), or tree(ALG, CHILD, ...)"
        );
    }

    pub fn build(&self) -> Result<RecursionPlan> {
        Ok(match self {
            PlanExpr::Classical => RecursionPlan::Classical,
            PlanExpr::Stationary(alg, levels) => {
                RecursionPlan::stationary(Arc::new(alg.build()?), *levels)
            }
            PlanExpr::Seq(algs) => {
                let algs = algs
                    .iter()
                    .map(|a| Ok(Arc::new(a.build()?)))
                    .collect::<Result<Vec<_>>>()?;
                RecursionPlan::uniform(algs)
            }
            PlanExpr::Tree(root) => match root.build()? {
                TreeChild::Node(node) => RecursionPlan::tree(node),
                TreeChild::Classical => RecursionPlan::Classical,
            },
        })
    }
}

impl TreeExpr {
    fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "classical" {
            return Ok(TreeExpr::Classical);
        }
        if let Some(inner) = enclosed(text, "tree(") {
            let parts = split_top(inner)?;
            if parts.is_empty() {
                bail!("tree(...) needs an algorithm");
            }
            let alg = AlgExpr::parse(parts[0])?;
            let children = parts[1..]
                .iter()
                .map(|p| TreeExpr::parse(p))
                .collect::<Result<Vec<_>>>()?;
            return Ok(TreeExpr::Node(alg, children));
        }
        bail!("unrecognized tree node '{text}': expected classical or tree(ALG, CHILD, ...)");
    }

    fn build(&self) -> Result<TreeChild> {
        Ok(match self {
            TreeExpr::Classical => TreeChild::Classical,
            TreeExpr::Node(alg, children) => {
                let children = children
                    .iter()
                    .map(|c| c.build())
                    .collect::<Result<Vec<_>>>()?;
                TreeChild::Node(Arc::new(TreeNode::new(Arc::new(alg.build()?), children)?))
            }
        })
    }
}

impl fmt::Display for PlanExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanExpr::Classical => write!(f, "classical"),
            PlanExpr::Stationary(alg, levels) => write!(f, "{alg}:L={levels}"),
            PlanExpr::Seq(algs) => {
                write!(f, "seq(")?;
                for (idx, alg) in algs.iter().enumerate() {
                    if idx > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{alg}")?;
                }
                write!(f, ")")
            }
            PlanExpr::Tree(root) => write!(f, "{root}"),
        }
    }
}

impl fmt::Display for TreeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeExpr::Classical => write!(f, "classical"),
            TreeExpr::Node(alg, children) => {
                write!(f, "tree({alg}")?;
                for child in children {
                    write!(f, ",{child}")?;
                }
                write!(f, ")")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Scaling specifications, step kinds, level lists
// ---------------------------------------------------------------------------

/// A scaling mode as written on the command line.
///
/// Grammar: `none | outside | inside | outside-inside | inside-outside |
/// repeated | repeated:N | repeated(N)` where `N` is a number of
/// outside-inside rounds (two steps each).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingSpec {
    pub mode: ScalingMode,
    /// Rounds requested via `repeated:N`; caps the iteration at `2N` steps.
    pub rounds: Option<usize>,
}

impl ScalingSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (mode, rounds) = match text {
            "none" => (ScalingMode::None, None),
            "outside" => (ScalingMode::Outside, None),
            "inside" => (ScalingMode::Inside, None),
            "outside-inside" => (ScalingMode::OutsideThenInside, None),
            "inside-outside" => (ScalingMode::InsideThenOutside, None),
            "repeated" => (ScalingMode::Repeated, None),
            other => {
                let n = other
                    .strip_prefix("repeated:")
                    .or_else(|| enclosed(other, "repeated("))
                    .ok_or_else(|| {
                        anyhow!(
                            "unknown scaling '{other}': expected none, outside, inside, \
                             outside-inside, inside-outside, repeated, or repeated:N"
                        )
                    })?;
                let rounds: usize = n
                    .trim()
                    .parse()
                    .with_context(|| format!("malformed round count in '{other}'"))?;
                if rounds == 0 {
                    bail!("repeated:N needs at least one round");
                }
                (ScalingMode::Repeated, Some(rounds))
            }
        };
        Ok(ScalingSpec { mode, rounds })
    }
}

impl fmt::Display for ScalingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rounds {
            Some(n) => write!(f, "repeated:{n}"),
            None => write!(f, "{}", self.mode.text_name()),
        }
    }
}

/// Parses `outside`/`O` or `inside`/`I`.
pub fn parse_first_step(text: &str) -> Result<StepKind> {
    match text.trim() {
        "outside" | "O" | "o" => Ok(StepKind::Outside),
        "inside" | "I" | "i" => Ok(StepKind::Inside),
        other => bail!("unknown step kind '{other}': expected outside or inside"),
    }
}

/// Parses a level list: comma-separated entries, each a number or an
/// inclusive range `A..B` (so `0,2..4` is `[0, 2, 3, 4]`).
pub fn parse_levels(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            bail!("empty entry in level list '{text}'");
        }
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: usize = lo
                .trim()
                .parse()
                .with_context(|| format!("malformed range '{part}'"))?;
            let hi: usize = hi
                .trim()
                .parse()
                .with_context(|| format!("malformed range '{part}'"))?;
            if hi < lo {
                bail!("descending range '{part}'");
            }
            out.extend(lo..=hi);
        } else {
            out.push(
                part.parse()
                    .with_context(|| format!("malformed level '{part}'"))?,
            );
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Shared lexing helpers
// ---------------------------------------------------------------------------

/// `prefix(...)` with the closing parenthesis at the end: the inner text.
fn enclosed<'a>(text: &'a str, prefix: &str) -> Option<&'a str> {
    text.strip_prefix(prefix)?.strip_suffix(')')
}

/// Splits on commas at parenthesis depth zero.
fn split_top(text: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (idx, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| anyhow!("unbalanced parentheses in '{text}'"))?;
            }
            ',' if depth == 0 => {
                parts.push(text[start..idx].trim());
                start = idx + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        bail!("unbalanced parentheses in '{text}'");
    }
    let last = text[start..].trim();
    if !last.is_empty() {
        parts.push(last);
    } else if !parts.is_empty() {
        bail!("empty element in '{text}'");
    }
    if parts.iter().any(|p| p.is_empty()) {
        bail!("empty element in '{text}'");
    }
    Ok(parts)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
