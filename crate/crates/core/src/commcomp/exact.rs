//! Exact deterministic communication complexity by rectangle recursion.
//!
//! A leaf is a rectangle in which one party can answer alone: every row is
//! constant on it, or every column is. Each protocol node splits the current
//! rectangle by a bipartition of its row classes or of its column classes.

use std::collections::HashMap;

use super::matrix::PredMatrix;
use crate::error::{Error, Result};
use crate::rule::State;

/// Most distinct rows (and columns) [`exact_cc`] accepts.
pub const MAX_CLASSES: usize = 12;

/// Default depth limit for [`exact_cc`].
pub const DEFAULT_DEPTH_LIMIT: u32 = 24;

struct Solver {
    rows: usize,
    cols: usize,
    grid: Vec<State>,
    // known bounds on the cost of a canonical rectangle: (lower, upper)
    memo: HashMap<(u16, u16), (u32, u32)>,
}

fn bits(mask: u16) -> impl Iterator<Item = usize> {
    (0..16).filter(move |b| mask & (1 << b) != 0)
}

impl Solver {
    fn at(&self, r: usize, c: usize) -> State {
        self.grid[r * self.cols + c]
    }

    /// Drops rows (columns) duplicating an earlier one within the rectangle.
    fn canonical(&self, rows: u16, cols: u16) -> (u16, u16) {
        let mut keep_r = 0u16;
        for r in bits(rows) {
            let dup = bits(keep_r).any(|k| bits(cols).all(|c| self.at(r, c) == self.at(k, c)));
            if !dup {
                keep_r |= 1 << r;
            }
        }
        let mut keep_c = 0u16;
        for c in bits(cols) {
            let dup = bits(keep_c).any(|k| bits(keep_r).all(|r| self.at(r, c) == self.at(r, k)));
            if !dup {
                keep_c |= 1 << c;
            }
        }
        (keep_r, keep_c)
    }

    fn is_leaf(&self, rows: u16, cols: u16) -> bool {
        let rows_const = bits(rows).all(|r| {
            let mut it = bits(cols).map(|c| self.at(r, c));
            let first = it.next();
            it.all(|v| Some(v) == first)
        });
        rows_const
            || bits(cols).all(|c| {
                let mut it = bits(rows).map(|r| self.at(r, c));
                let first = it.next();
                it.all(|v| Some(v) == first)
            })
    }

    fn fits(&mut self, rows: u16, cols: u16, depth: u32) -> bool {
        let key = self.canonical(rows, cols);
        let (rows, cols) = key;
        let (lower, upper) = match self.memo.get(&key) {
            Some(&b) => b,
            None => {
                let b = if self.is_leaf(rows, cols) {
                    (0, 0)
                } else {
                    (1, u32::MAX)
                };
                self.memo.insert(key, b);
                b
            }
        };
        if upper <= depth {
            return true;
        }
        if lower > depth {
            return false;
        }
        let ok =
            self.split_fits(rows, cols, true, depth) || self.split_fits(rows, cols, false, depth);
        let entry = self.memo.get_mut(&key).expect("inserted above");
        if ok {
            entry.1 = entry.1.min(depth);
        } else {
            entry.0 = entry.0.max(depth + 1);
        }
        ok
    }

    fn split_fits(&mut self, rows: u16, cols: u16, by_rows: bool, depth: u32) -> bool {
        let set = if by_rows { rows } else { cols };
        if set.count_ones() < 2 {
            return false;
        }
        let low = set & set.wrapping_neg();
        let rest = set ^ low;
        // submasks of `rest`; `low` always goes to the first part
        let mut sub = rest;
        loop {
            let a = sub | low;
            if a != set {
                let b = set ^ a;
                let (a_r, a_c, b_r, b_c) = if by_rows {
                    (a, cols, b, cols)
                } else {
                    (rows, a, rows, b)
                };
                if self.fits(a_r, a_c, depth - 1) && self.fits(b_r, b_c, depth - 1) {
                    return true;
                }
            }
            if sub == 0 {
                return false;
            }
            sub = (sub - 1) & rest;
        }
    }
}

/// Distinct rows of `m` in order of first appearance, as indices.
fn class_representatives(m: &PredMatrix) -> Vec<usize> {
    let mut seen = HashMap::new();
    (0..m.rows())
        .filter(|&r| seen.insert(m.row_words(r).to_vec(), r).is_none())
        .collect()
}

/// Exact protocol-tree depth of `m` in the leaf model above.
pub fn exact_cc(m: &PredMatrix, depth_limit: u32) -> Result<u32> {
    let row_reps = class_representatives(m);
    let t = m.transpose();
    let col_reps = class_representatives(&t);
    let limit = MAX_CLASSES;
    if row_reps.len() > limit || col_reps.len() > limit {
        return Err(Error::CapExceeded {
            what: "distinct rows/columns for exact cc",
            size: row_reps.len().max(col_reps.len()) as u128,
            cap: limit as u128,
        });
    }
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0);
    }
    let mut grid = Vec::with_capacity(row_reps.len() * col_reps.len());
    for &r in &row_reps {
        for &c in &col_reps {
            grid.push(m.entry(r, c));
        }
    }
    let mut solver = Solver {
        rows: row_reps.len(),
        cols: col_reps.len(),
        grid,
        memo: HashMap::new(),
    };
    let all_rows = ((1u32 << solver.rows) - 1) as u16;
    let all_cols = ((1u32 << solver.cols) - 1) as u16;
    for d in 0..=depth_limit {
        if solver.fits(all_rows, all_cols, d) {
            return Ok(d);
        }
    }
    Err(Error::DepthLimit(depth_limit))
}
