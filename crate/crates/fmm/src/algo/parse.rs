//! Text file format for algorithm triples.
//!
//! ```text
//! name <identifier>
//! dims <M0> <K0> <N0>
//! rank <R>
//! U
//! <M0*K0 lines, each with R whitespace-separated entries>
//! V
//! <K0*N0 lines>
//! W
//! <M0*N0 lines>
//! ```
//!
//! Entries are integers (`-1`), decimals (`0.5`), or rationals (`p/q`); all
//! three parse to exact rationals, so `1/2` and `0.5` are the same value.
//! `#` starts a comment that runs to the end of the line; blank lines are
//! ignored. Row order follows the index conventions of [`crate::algo`]
//! (U and V rows are column-major entries of A and B, W rows are row-major
//! entries of C).

use super::{AlgoError, Rat, RatMat, UnvalidatedAlgorithm};
use num_bigint::BigInt;
use num_traits::{Pow, Zero};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn err(line: usize, msg: impl Into<String>) -> AlgoError {
    AlgoError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Lines with comments stripped, paired with their 1-based line numbers;
/// blank lines removed.
fn meaningful_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .filter_map(|(idx, raw)| {
            let body = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let body = body.trim();
            if body.is_empty() {
                None
            } else {
                Some((idx + 1, body))
            }
        })
        .collect()
}

/// Parses one coefficient entry: integer, decimal, or `p/q`.
fn parse_entry(tok: &str, line: usize) -> Result<Rat, AlgoError> {
    let bad = || err(line, format!("unparsable entry '{tok}'"));
    if let Some((p, q)) = tok.split_once('/') {
        let num: BigInt = p.parse().map_err(|_| bad())?;
        let den: BigInt = q.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(err(line, format!("zero denominator in '{tok}'")));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int_part, frac_part)) = tok.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let (sign, digits) = match int_part.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int_val: BigInt = digits.parse().map_err(|_| bad())?;
        let frac_val: BigInt = frac_part.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10).pow(frac_part.len() as u32);
        let num = (int_val * &scale + frac_val) * BigInt::from(sign);
        return Ok(Rat::new(num, scale));
    }
    let num: BigInt = tok.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(num))
}

fn parse_block(
    lines: &[(usize, &str)],
    pos: &mut usize,
    label: &str,
    rows: usize,
    rank: usize,
) -> Result<RatMat, AlgoError> {
    let last_line = lines.last().map(|&(n, _)| n).unwrap_or(0);
    let &(line, header) = lines
        .get(*pos)
        .ok_or_else(|| err(last_line, format!("missing '{label}' section")))?;
    if header != label {
        return Err(err(line, format!("expected '{label}' section, found '{header}'")));
    }
    *pos += 1;
    let mut data = Vec::with_capacity(rows * rank);
    for row in 0..rows {
        let &(line, body) = lines.get(*pos).ok_or_else(|| {
            err(
                last_line,
                format!("{label} is missing row {} of {rows}", row + 1),
            )
        })?;
        *pos += 1;
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != rank {
            return Err(err(
                line,
                format!(
                    "{label} row {} has {} entries, expected rank {rank}",
                    row + 1,
                    toks.len()
                ),
            ));
        }
        for tok in toks {
            data.push(parse_entry(tok, line)?);
        }
    }
    RatMat::new(rows, rank, data).map_err(|e| err(last_line, e.to_string()))
}

/// Parses an algorithm file into an unvalidated triple. Every failure carries
/// the 1-based line number it was detected on.
pub fn parse_algorithm(text: &str) -> Result<UnvalidatedAlgorithm, AlgoError> {
    let lines = meaningful_lines(text);
    let mut pos = 0;

    let mut header_field = |key: &str| -> Result<(usize, Vec<String>), AlgoError> {
        let &(line, body) = lines
            .get(pos)
            .ok_or_else(|| err(lines.last().map(|&(n, _)| n).unwrap_or(0), format!("missing '{key}' header")))?;
        pos += 1;
        let mut toks = body.split_whitespace();
        if toks.next() != Some(key) {
            return Err(err(line, format!("expected '{key}' header, found '{body}'")));
        }
        Ok((line, toks.map(str::to_owned).collect()))
    };

    let (line, name_toks) = header_field("name")?;
    if name_toks.len() != 1 {
        return Err(err(line, "'name' takes exactly one identifier"));
    }
    let name = name_toks[0].clone();

    let (line, dim_toks) = header_field("dims")?;
    if dim_toks.len() != 3 {
        return Err(err(line, "'dims' takes exactly three positive integers"));
    }
    let parse_dim = |tok: &str| -> Result<usize, AlgoError> {
        let value: usize = tok
            .parse()
            .map_err(|_| err(line, format!("bad dimension '{tok}'")))?;
        if value == 0 {
            return Err(err(line, "dimensions must be positive"));
        }
        Ok(value)
    };
    let m0 = parse_dim(&dim_toks[0])?;
    let k0 = parse_dim(&dim_toks[1])?;
    let n0 = parse_dim(&dim_toks[2])?;

    let (line, rank_toks) = header_field("rank")?;
    if rank_toks.len() != 1 {
        return Err(err(line, "'rank' takes exactly one positive integer"));
    }
    let rank: usize = rank_toks[0]
        .parse()
        .map_err(|_| err(line, format!("bad rank '{}'", rank_toks[0])))?;
    if rank == 0 {
        return Err(err(line, "rank must be positive"));
    }

    let u = parse_block(&lines, &mut pos, "U", m0 * k0, rank)?;
    let v = parse_block(&lines, &mut pos, "V", k0 * n0, rank)?;
    let w = parse_block(&lines, &mut pos, "W", m0 * n0, rank)?;
    if let Some(&(line, body)) = lines.get(pos) {
        return Err(err(line, format!("unexpected trailing content '{body}'")));
    }

    Ok(UnvalidatedAlgorithm {
        name,
        m0,
        k0,
        n0,
        u,
        v,
        w,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn entry_string(x: &Rat) -> String {
    if x.denom() == &num_bigint::BigInt::from(1) {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn block_string(out: &mut String, label: &str, mat: &RatMat) {
    out.push_str(label);
    out.push('\n');
    for r in 0..mat.rows() {
        let row: Vec<String> = (0..mat.cols()).map(|c| entry_string(mat.get(r, c))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

/// Renders an algorithm in the file format; `parse_algorithm` on the output
/// recovers the exact rational coefficients.
pub fn serialize_algorithm(alg: &crate::algo::BilinearAlgorithm) -> String {
    let (m0, k0, n0) = alg.dims();
    let mut out = String::new();
    out.push_str(&format!("name {}\n", alg.name()));
    out.push_str(&format!("dims {m0} {k0} {n0}\n"));
    out.push_str(&format!("rank {}\n", alg.rank()));
    block_string(&mut out, "U", alg.u());
    block_string(&mut out, "V", alg.v());
    block_string(&mut out, "W", alg.w());
    out
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
