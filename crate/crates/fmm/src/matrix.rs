//! Dense double-precision matrix with row-major storage and file IO.
//!
//! Two interchange formats:
//!
//! - binary: little-endian header (magic `FMM1`, `u64` rows, `u64` cols)
//!   followed by `rows * cols` row-major IEEE-754 doubles, little-endian;
//! - text: one matrix row per line of whitespace-separated decimals, for
//!   small fixtures. Values are written in shortest round-trip form, so
//!   text IO is lossless too.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

/// Magic bytes opening the binary format.
pub const BINARY_MAGIC: &[u8; 4] = b"FMM1";

/// Matrix IO failures.
#[derive(Debug, Error)]
pub enum MatrixIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad matrix file: {0}")]
    Format(String),
}

/// Dense `f64` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data. Panics if the length mismatches
    /// (programmer error, not input error).
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "matrix data length must be rows * cols"
        );
        Matrix { rows, cols, data }
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from nested row slices (test convenience).
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    /// Row-major backing slice.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Max-norm: largest absolute entry (0 for empty matrices).
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, &x| acc.max(x.abs()))
    }

    /// Transposed copy.
    pub fn transposed(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// First non-finite entry, if any (position as `(row, col)`).
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|x| !x.is_finite())
            .map(|pos| (pos / self.cols, pos % self.cols))
    }

    /// Copies `self` into the top-left corner of a zero matrix of the given
    /// (not smaller) dimensions.
    pub fn zero_padded(&self, rows: usize, cols: usize) -> Matrix {
        assert!(rows >= self.rows && cols >= self.cols, "padding must not shrink");
        let mut out = Matrix::zeros(rows, cols);
        for r in 0..self.rows {
            let src = &self.data[r * self.cols..(r + 1) * self.cols];
            out.data[r * cols..r * cols + self.cols].copy_from_slice(src);
        }
        out
    }

    /// Copies the top-left `rows x cols` block out of `self`.
    pub fn cropped(&self, rows: usize, cols: usize) -> Matrix {
        assert!(rows <= self.rows && cols <= self.cols, "crop must not grow");
        let mut out = Matrix::zeros(rows, cols);
        for r in 0..rows {
            let src = &self.data[r * self.cols..r * self.cols + cols];
            out.data[r * cols..(r + 1) * cols].copy_from_slice(src);
        }
        out
    }

    // -----------------------------------------------------------------------
    // Binary IO
    // -----------------------------------------------------------------------

    /// Writes the binary format.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<(), MatrixIoError> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&(self.rows as u64).to_le_bytes())?;
        out.write_all(&(self.cols as u64).to_le_bytes())?;
        for &x in &self.data {
            out.write_all(&x.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the binary format.
    pub fn read_binary(path: impl AsRef<Path>) -> Result<Matrix, MatrixIoError> {
        let mut input = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(MatrixIoError::Format(format!(
                "bad magic {magic:?}, expected {BINARY_MAGIC:?}"
            )));
        }
        let mut word = [0u8; 8];
        input.read_exact(&mut word)?;
        let rows = u64::from_le_bytes(word) as usize;
        input.read_exact(&mut word)?;
        let cols = u64::from_le_bytes(word) as usize;
        let count = rows
            .checked_mul(cols)
            .ok_or_else(|| MatrixIoError::Format("dimension overflow".into()))?;
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            input.read_exact(&mut word)?;
            data.push(f64::from_le_bytes(word));
        }
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(MatrixIoError::Format("trailing bytes after matrix data".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    // -----------------------------------------------------------------------
    // Text IO
    // -----------------------------------------------------------------------

    /// Writes the text format (shortest round-trip decimal per entry).
    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<(), MatrixIoError> {
        let mut out = BufWriter::new(File::create(path)?);
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| format!("{}", self.get(r, c))).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the text format; every line must have the same entry count.
    pub fn read_text(path: impl AsRef<Path>) -> Result<Matrix, MatrixIoError> {
        let input = BufReader::new(File::open(path)?);
        let mut data = Vec::new();
        let mut cols: Option<usize> = None;
        let mut rows = 0;
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let body = line.trim();
            if body.is_empty() {
                continue;
            }
            let entries: Vec<f64> = body
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        MatrixIoError::Format(format!("line {}: bad number '{tok}'", idx + 1))
                    })
                })
                .collect::<Result<_, _>>()?;
            match cols {
                None => cols = Some(entries.len()),
                Some(c) if c != entries.len() => {
                    return Err(MatrixIoError::Format(format!(
                        "line {}: {} entries, expected {c}",
                        idx + 1,
                        entries.len()
                    )));
                }
                _ => {}
            }
            data.extend(entries);
            rows += 1;
        }
        let cols = cols.unwrap_or(0);
        Ok(Matrix { rows, cols, data })
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
