//! Finite words and spatially periodic configurations.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::State;

/// A finite word over `0..states`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    states: usize,
    cells: Vec<State>,
}

impl Word {
    pub fn new(states: usize, cells: Vec<State>) -> Result<Self> {
        if let Some(&bad) = cells.iter().find(|&&c| c as usize >= states) {
            return Err(Error::StateOutOfRange {
                state: bad as usize,
                states,
            });
        }
        Ok(Self { states, cells })
    }

    pub(crate) fn new_unchecked(states: usize, cells: Vec<State>) -> Self {
        debug_assert!(cells.iter().all(|&c| (c as usize) < states));
        Self { states, cells }
    }

    /// Parses a word. For `states <= 10` each character is one digit
    /// (`"1101001"`); otherwise cells are comma-separated (`"12,0,39"`).
    pub fn parse(states: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        let cells: Vec<State> = if states <= 10 && !s.contains(',') {
            s.chars()
                .map(|ch| {
                    ch.to_digit(10)
                        .map(|d| d as State)
                        .ok_or_else(|| Error::Parse(format!("bad cell {ch:?} in {s:?}")))
                })
                .collect::<Result<_>>()?
        } else if s.is_empty() {
            Vec::new()
        } else {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<State>()
                        .map_err(|e| Error::Parse(format!("bad cell {t:?}: {e}")))
                })
                .collect::<Result<_>>()?
        };
        Self::new(states, cells)
    }

    /// Binary word from a string of `0`/`1`.
    pub fn bits(s: &str) -> Self {
        Self::parse(2, s).expect("binary literal")
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn cells(&self) -> &[State] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<State> {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.states != other.states {
            return Err(Error::StateCountMismatch {
                expected: self.states,
                found: other.states,
            });
        }
        let mut cells = self.cells.clone();
        cells.extend_from_slice(&other.cells);
        Ok(Word::new_unchecked(self.states, cells))
    }

    /// Word whose base-`q` value is `index` (first cell most significant).
    pub fn from_index(states: usize, len: usize, index: usize) -> Self {
        let mut cells = vec![0; len];
        crate::rule::decode_index(index, states, &mut cells);
        Word::new_unchecked(states, cells)
    }

    pub fn index(&self) -> usize {
        crate::rule::encode_cells(&self.cells, self.states)
    }

    pub(crate) fn check_states(&self, states: usize) -> Result<()> {
        if self.states != states {
            return Err(Error::StateCountMismatch {
                expected: states,
                found: self.states,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cells(f, self.states, &self.cells)
    }
}

pub(crate) fn write_cells(f: &mut impl fmt::Write, states: usize, cells: &[State]) -> fmt::Result {
    if states <= 10 {
        for c in cells {
            write!(f, "{c}")?;
        }
    } else {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                f.write_char(',')?;
            }
            write!(f, "{c}")?;
        }
    }
    Ok(())
}

/// One spatial period `u` of the configuration `p_u`, with `p_u[i] = u[i mod |u|]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclicWord {
    period: Word,
}

impl CyclicWord {
    pub fn new(period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidRule(
                "cyclic word needs a nonempty period".into(),
            ));
        }
        Ok(Self { period })
    }

    pub fn parse(states: usize, s: &str) -> Result<Self> {
        Self::new(Word::parse(states, s)?)
    }

    pub fn bits(s: &str) -> Self {
        Self::new(Word::bits(s)).expect("nonempty binary literal")
    }

    pub(crate) fn from_cells_unchecked(states: usize, cells: Vec<State>) -> Self {
        debug_assert!(!cells.is_empty());
        Self {
            period: Word::new_unchecked(states, cells),
        }
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn cells(&self) -> &[State] {
        self.period.cells()
    }

    pub fn states(&self) -> usize {
        self.period.states()
    }

    pub fn len(&self) -> usize {
        self.period.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell of `p_u` at absolute position `i`.
    #[inline]
    pub fn at(&self, i: i64) -> State {
        let n = self.len() as i64;
        self.period.cells[i.rem_euclid(n) as usize]
    }

    /// Rotation by `k`: the result's cell `i` is this word's cell `i + k`.
    pub fn rotate(&self, k: usize) -> Self {
        let mut cells = self.cells().to_vec();
        let n = cells.len();
        cells.rotate_left(k % n);
        Self::from_cells_unchecked(self.states(), cells)
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.period.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w = Word::bits("1101001");
        assert_eq!(w.len(), 7);
        assert_eq!(w.to_string(), "1101001");
        let big = Word::parse(40, "12,0,39").unwrap();
        assert_eq!(big.cells(), &[12, 0, 39]);
        assert_eq!(big.to_string(), "12,0,39");
        assert!(Word::parse(2, "102").is_err());
        assert!(Word::parse(40, "40").is_err());
    }

    #[test]
    fn index_round_trip() {
        let w = Word::parse(3, "2101").unwrap();
        assert_eq!(w.index(), 2 * 27 + 9 + 1);
        assert_eq!(Word::from_index(3, 4, w.index()), w);
    }

    #[test]
    fn cyclic_indexing() {
        let c = CyclicWord::bits("011");
        assert_eq!(c.at(0), 0);
        assert_eq!(c.at(-1), 1);
        assert_eq!(c.at(5), 1);
        assert_eq!(c.at(-3), 0);
        assert_eq!(c.rotate(1).to_string(), "110");
        assert!(CyclicWord::new(Word::bits("")).is_err());
    }
}
