//! Bit-packed value matrices of split problems.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::State;
use crate::word::CyclicWord;

/// Largest number of entries a matrix may hold.
pub const MAX_MATRIX_ENTRIES: u128 = 1 << 30;

/// What the entries of a matrix mean.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemTag {
    Pred,
    Cycle { k: usize },
    Invasion { background: CyclicWord },
    Reference { name: String },
    Transposed { of: Box<ProblemTag> },
    Custom,
}

/// A `rows x cols` matrix over `0..values`, each row padded to whole words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredMatrix {
    values: usize,
    rows: usize,
    cols: usize,
    n: usize,
    i: usize,
    bits: u32,
    row_words: usize,
    data: Vec<u64>,
    problem: ProblemTag,
}

fn bits_for(values: usize) -> u32 {
    match values {
        0..=2 => 1,
        3..=4 => 2,
        5..=16 => 4,
        17..=256 => 8,
        _ => 16,
    }
}

pub(crate) fn check_size(rows: u128, cols: u128) -> Result<()> {
    let size = rows.saturating_mul(cols);
    if size > MAX_MATRIX_ENTRIES {
        return Err(Error::CapExceeded {
            what: "matrix entries",
            size,
            cap: MAX_MATRIX_ENTRIES,
        });
    }
    Ok(())
}

impl PredMatrix {
    /// Tabulates `f(row, col)` in parallel over rows.
    pub fn from_fn(
        values: usize,
        rows: usize,
        cols: usize,
        f: impl Fn(usize, usize) -> Result<State> + Sync,
    ) -> Result<Self> {
        check_size(rows as u128, cols as u128)?;
        let bits = bits_for(values);
        let per_word = (64 / bits) as usize;
        let row_words = cols.div_ceil(per_word).max(1);
        let packed: Vec<Vec<u64>> = (0..rows)
            .into_par_iter()
            .map(|r| {
                let mut words = vec![0u64; row_words];
                for c in 0..cols {
                    let v = f(r, c)?;
                    if v as usize >= values {
                        return Err(Error::StateOutOfRange {
                            state: v as usize,
                            states: values,
                        });
                    }
                    words[c / per_word] |= (v as u64) << ((c % per_word) as u32 * bits);
                }
                Ok(words)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            values,
            rows,
            cols,
            n: 0,
            i: 0,
            bits,
            row_words,
            data: packed.concat(),
            problem: ProblemTag::Custom,
        })
    }

    /// Matrix from explicit rows.
    pub fn from_rows(values: usize, rows: &[Vec<State>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_fn(values, rows.len(), cols, |r, c| Ok(rows[r][c]))
    }

    pub(crate) fn with_split(mut self, n: usize, i: usize, problem: ProblemTag) -> Self {
        self.n = n;
        self.i = i;
        self.problem = problem;
        self
    }

    pub fn values(&self) -> usize {
        self.values
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Input length `n` and split point `i`.
    pub fn split(&self) -> (usize, usize) {
        (self.n, self.i)
    }

    pub fn problem(&self) -> &ProblemTag {
        &self.problem
    }

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> State {
        let per_word = (64 / self.bits) as usize;
        let w = self.data[r * self.row_words + c / per_word];
        let mask = (1u64 << self.bits) - 1;
        ((w >> ((c % per_word) as u32 * self.bits)) & mask) as State
    }

    /// Packed words of row `r`; equal rows have equal slices.
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.row_words..(r + 1) * self.row_words]
    }

    pub fn row(&self, r: usize) -> Vec<State> {
        (0..self.cols).map(|c| self.entry(r, c)).collect()
    }

    pub fn transpose(&self) -> PredMatrix {
        let t = Self::from_fn(self.values, self.cols, self.rows, |r, c| {
            Ok(self.entry(c, r))
        })
        .expect("transpose has the same size");
        let n = self.n;
        t.with_split(
            n,
            n.saturating_sub(self.i),
            ProblemTag::Transposed {
                of: Box::new(self.problem.clone()),
            },
        )
    }

    pub fn distinct_rows(&self) -> usize {
        (0..self.rows)
            .map(|r| self.row_words(r))
            .collect::<HashSet<_>>()
            .len()
    }

    pub fn distinct_cols(&self) -> usize {
        self.transpose().distinct_rows()
    }

    pub fn is_constant(&self) -> bool {
        let first = (self.rows > 0 && self.cols > 0).then(|| self.entry(0, 0));
        first.is_none_or(|v| (0..self.rows).all(|r| (0..self.cols).all(|c| self.entry(r, c) == v)))
    }

    /// Text rendering, one row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            let row = self.row(r);
            crate::word::write_cells(&mut out, self.values, &row).expect("string write");
            out.push('\n');
        }
        out
    }
}
