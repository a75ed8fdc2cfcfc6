//! Dense GF(2) matrices with single-word rows.
//!
//! Column `j` of a row lives at bit `j` of the row word, so a column subset
//! is just a `u64` mask and the rank of any column selection can be computed
//! without materialising the submatrix.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Maximum number of rows of a [`BinaryMatrix`].
pub const MAX_ROWS: usize = 32;
/// Maximum number of columns of a [`BinaryMatrix`] (one machine word per row).
pub const MAX_COLS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix must have at least one row")]
    NoRows,
    #[error("matrix of {rows}x{cols} exceeds the supported {max_rows}x{max_cols}", max_rows = MAX_ROWS, max_cols = MAX_COLS)]
    TooLarge { rows: usize, cols: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("invalid character {ch:?} at row {row}, column {col}")]
    InvalidChar { row: usize, col: usize, ch: char },
    #[error("row {row} has bits set beyond column {cols}")]
    StrayBits { row: usize, cols: usize },
    #[error("invalid column selection: {0}")]
    InvalidSelection(String),
    #[error("column count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// A dense binary matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u64>,
}

fn col_mask(cols: usize) -> u64 {
    if cols >= 64 {
        u64::MAX
    } else {
        (1u64 << cols) - 1
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<(), MatrixError> {
    if rows == 0 {
        return Err(MatrixError::NoRows);
    }
    if rows > MAX_ROWS || cols > MAX_COLS {
        return Err(MatrixError::TooLarge { rows, cols });
    }
    Ok(())
}

/// GF(2) rank of a set of row words, by XOR elimination on the leading bit.
pub(crate) fn rank_of_words<I: IntoIterator<Item = u64>>(words: I) -> usize {
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for mut v in words {
        while v != 0 {
            let lead = 63 - v.leading_zeros() as usize;
            if basis[lead] == 0 {
                basis[lead] = v;
                rank += 1;
                break;
            }
            v ^= basis[lead];
        }
    }
    rank
}

impl BinaryMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, MatrixError> {
        check_dims(rows, cols)?;
        Ok(Self {
            rows,
            cols,
            bits: vec![0; rows],
        })
    }

    pub fn identity(size: usize) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(size, size)?;
        for (i, row) in m.bits.iter_mut().enumerate() {
            *row = 1 << i;
        }
        Ok(m)
    }

    /// Builds a matrix from packed row words; bit `j` of a word is column `j`.
    pub fn from_row_words(words: &[u64], cols: usize) -> Result<Self, MatrixError> {
        check_dims(words.len(), cols)?;
        let mask = col_mask(cols);
        for (row, &w) in words.iter().enumerate() {
            if w & !mask != 0 {
                return Err(MatrixError::StrayBits { row, cols });
            }
        }
        Ok(Self {
            rows: words.len(),
            cols,
            bits: words.to_vec(),
        })
    }

    /// Builds a matrix from rows of 0/1 entries.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        check_dims(rows.len(), cols)?;
        let mut bits = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(MatrixError::RaggedRow {
                    row: i,
                    len: r.len(),
                    expected: cols,
                });
            }
            let mut word = 0u64;
            for (j, &b) in r.iter().enumerate() {
                match b {
                    0 => {}
                    1 => word |= 1 << j,
                    other => {
                        return Err(MatrixError::InvalidChar {
                            row: i,
                            col: j,
                            ch: char::from(b'0'.wrapping_add(other)),
                        })
                    }
                }
            }
            bits.push(word);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            bits,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Packed row `i`.
    #[inline]
    pub fn row_word(&self, i: usize) -> u64 {
        self.bits[i]
    }

    pub fn row_words(&self) -> &[u64] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        (self.bits[row] >> col) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        if value {
            self.bits[row] |= 1 << col;
        } else {
            self.bits[row] &= !(1 << col);
        }
    }

    /// Mask with one bit per column of the matrix.
    #[inline]
    pub fn full_column_mask(&self) -> u64 {
        col_mask(self.cols)
    }

    /// GF(2) rank. Works on a scratch copy; `self` is untouched.
    pub fn rank(&self) -> usize {
        rank_of_words(self.bits.iter().copied())
    }

    /// Rank of the submatrix made of the columns whose bits are set in `mask`.
    #[inline]
    pub fn rank_of_columns(&self, mask: u64) -> usize {
        rank_of_words(self.bits.iter().map(|&r| r & mask))
    }

    /// Submatrix keeping the given columns, in order.
    ///
    /// `indices` must be strictly increasing and in range.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self, MatrixError> {
        for (pos, &c) in indices.iter().enumerate() {
            if c >= self.cols {
                return Err(MatrixError::InvalidSelection(format!(
                    "column {c} out of range for {} columns",
                    self.cols
                )));
            }
            if pos > 0 && indices[pos - 1] >= c {
                return Err(MatrixError::InvalidSelection(format!(
                    "indices not strictly increasing at position {pos}"
                )));
            }
        }
        let bits = self
            .bits
            .iter()
            .map(|&row| {
                indices
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (dst, &src)| acc | (((row >> src) & 1) << dst))
            })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: indices.len(),
            bits,
        })
    }

    /// `[self | I_rows]`; identity columns sit at `cols..cols + rows`.
    pub fn augment_identity(&self) -> Result<Self, MatrixError> {
        let cols = self.cols + self.rows;
        check_dims(self.rows, cols)?;
        let bits = self
            .bits
            .iter()
            .enumerate()
            .map(|(i, &row)| row | (1u64 << (self.cols + i)))
            .collect();
        Ok(Self {
            rows: self.rows,
            cols,
            bits,
        })
    }

    /// Whether both matrices span the same row space over GF(2).
    pub fn same_row_space(&self, other: &Self) -> Result<bool, MatrixError> {
        if self.cols != other.cols {
            return Err(MatrixError::DimensionMismatch {
                left: self.cols,
                right: other.cols,
            });
        }
        let ra = self.rank();
        if ra != other.rank() {
            return Ok(false);
        }
        let joint = rank_of_words(self.bits.iter().chain(other.bits.iter()).copied());
        Ok(joint == ra)
    }

    /// Text form: one line per row of '0'/'1', no trailing newline.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &row) in self.bits.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            for j in 0..self.cols {
                f.write_str(if (row >> j) & 1 == 1 { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryMatrix({}x{}) [", self.rows, self.cols)?;
        for (i, line) in self.to_string().lines().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(line)?;
        }
        f.write_str("]")
    }
}

impl FromStr for BinaryMatrix {
    type Err = MatrixError;

    /// Parses the text form. A single trailing newline is accepted.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.strip_suffix('\n').unwrap_or(s);
        if body.is_empty() {
            return Err(MatrixError::NoRows);
        }
        let mut rows = Vec::new();
        for (i, line) in body.split('\n').enumerate() {
            let mut row = Vec::with_capacity(line.len());
            for (j, ch) in line.chars().enumerate() {
                match ch {
                    '0' => row.push(0u8),
                    '1' => row.push(1u8),
                    _ => return Err(MatrixError::InvalidChar { row: i, col: j, ch }),
                }
            }
            rows.push(row);
        }
        Self::from_rows(&rows)
    }
}
