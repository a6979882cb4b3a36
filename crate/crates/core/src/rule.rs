//! Local rules of one-dimensional cellular automata.
//!
//! A rule of radius `r` over `q` states is stored as a lookup table indexed by
//! the neighbourhood `(u_1, ..., u_{2r+1})` read as a base-`q` number with the
//! leftmost cell most significant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A cell state. States of a `q`-state rule are `0..q`.
pub type State = u16;

/// Largest lookup table any constructor will allocate.
pub const MAX_TABLE_LEN: usize = 1 << 24;

/// `q^(2r+1)`, or an error when it exceeds [`MAX_TABLE_LEN`].
pub fn table_len(states: usize, radius: usize) -> Result<usize> {
    let width = 2 * radius + 1;
    let mut len: u128 = 1;
    for _ in 0..width {
        len = len.saturating_mul(states as u128);
        if len > MAX_TABLE_LEN as u128 {
            return Err(Error::CapExceeded {
                what: "rule table length",
                size: (states as u128).saturating_pow(width as u32),
                cap: MAX_TABLE_LEN as u128,
            });
        }
    }
    Ok(len as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Rule {
    states: usize,
    radius: usize,
    table: Vec<State>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

#[derive(Deserialize)]
struct RawRule {
    states: usize,
    radius: usize,
    table: Vec<u64>,
    #[serde(default)]
    name: Option<String>,
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawRule::deserialize(d)?;
        let mut table = Vec::with_capacity(raw.table.len());
        for v in raw.table {
            let s = State::try_from(v).map_err(|_| {
                serde::de::Error::custom(format!("table entry {v} does not fit a state"))
            })?;
            table.push(s);
        }
        let rule = Rule::new(raw.states, raw.radius, table).map_err(serde::de::Error::custom)?;
        Ok(match raw.name {
            Some(n) => rule.with_name(n),
            None => rule,
        })
    }
}

impl Rule {
    /// Builds a rule from an explicit table.
    pub fn new(states: usize, radius: usize, table: Vec<State>) -> Result<Self> {
        if states < 2 {
            return Err(Error::InvalidRule(format!(
                "state count must be at least 2, got {states}"
            )));
        }
        if states > State::MAX as usize + 1 {
            return Err(Error::InvalidRule(format!(
                "state count {states} too large"
            )));
        }
        let len = table_len(states, radius)?;
        if table.len() != len {
            return Err(Error::InvalidRule(format!(
                "table has {} entries, expected {states}^{} = {len}",
                table.len(),
                2 * radius + 1
            )));
        }
        if let Some(&bad) = table.iter().find(|&&s| s as usize >= states) {
            return Err(Error::StateOutOfRange {
                state: bad as usize,
                states,
            });
        }
        Ok(Self {
            states,
            radius,
            table,
            name: None,
        })
    }

    /// Elementary rule with the standard Wolfram numbering: the image of the
    /// neighbourhood `(a, b, c)` is bit `4a + 2b + c` of `code`.
    pub fn from_wolfram(code: u32) -> Result<Self> {
        if code > 255 {
            return Err(Error::WolframCode(code));
        }
        let table = (0..8).map(|i| ((code >> i) & 1) as State).collect();
        Ok(Self::new(2, 1, table)?.with_name(format!("eca:{code}")))
    }

    /// Tabulates `f` over every neighbourhood of width `2r+1`.
    pub fn from_fn(
        states: usize,
        radius: usize,
        mut f: impl FnMut(&[State]) -> State,
    ) -> Result<Self> {
        let len = table_len(states, radius)?;
        let width = 2 * radius + 1;
        let mut nbhd = vec![0 as State; width];
        let mut table = Vec::with_capacity(len);
        for idx in 0..len {
            decode_index(idx, states, &mut nbhd);
            table.push(f(&nbhd));
        }
        Self::new(states, radius, table)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Neighbourhood width `2r+1`.
    pub fn width(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn table(&self) -> &[State] {
        &self.table
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("q{}r{}", self.states, self.radius))
    }

    /// Table index of a neighbourhood (leftmost cell most significant).
    #[inline]
    pub fn index_of(&self, nbhd: &[State]) -> usize {
        debug_assert_eq!(nbhd.len(), self.width());
        nbhd.iter()
            .fold(0usize, |acc, &s| acc * self.states + s as usize)
    }

    #[inline]
    pub fn eval(&self, nbhd: &[State]) -> State {
        self.table[self.index_of(nbhd)]
    }

    #[inline]
    pub fn eval_index(&self, idx: usize) -> State {
        self.table[idx]
    }

    /// Wolfram code, when this is an elementary rule.
    pub fn wolfram_code(&self) -> Option<u32> {
        (self.states == 2 && self.radius == 1).then(|| {
            self.table
                .iter()
                .enumerate()
                .map(|(i, &s)| (s as u32) << i)
                .sum()
        })
    }

    /// The same global map written with a larger radius; the extra cells are
    /// ignored.
    pub fn lift(&self, radius: usize) -> Result<Self> {
        if radius < self.radius {
            return Err(Error::InvalidRule(format!(
                "cannot lift radius {} down to {radius}",
                self.radius
            )));
        }
        if radius == self.radius {
            return Ok(self.clone());
        }
        let pad = radius - self.radius;
        let inner = self.width();
        let lifted = Self::from_fn(self.states, radius, |n| self.eval(&n[pad..pad + inner]))?;
        Ok(match &self.name {
            Some(n) => lifted.with_name(n.clone()),
            None => lifted,
        })
    }

    /// Whether the table genuinely depends on cell `pos` of the neighbourhood.
    pub fn depends_on(&self, pos: usize) -> bool {
        let width = self.width();
        let stride = self.states.pow((width - 1 - pos) as u32);
        (0..self.table.len()).any(|idx| {
            if !(idx / stride).is_multiple_of(self.states) {
                return false;
            }
            let v = self.table[idx];
            (1..self.states).any(|d| self.table[idx + d * stride] != v)
        })
    }

    /// True when no smaller radius describes the same global map.
    pub fn is_canonical(&self) -> bool {
        self.radius == 0 || self.depends_on(0) || self.depends_on(self.width() - 1)
    }

    /// Minimal-radius representation of the same global map.
    pub fn canonicalize(&self) -> Self {
        let mut rule = self.clone();
        while !rule.is_canonical() {
            let r = rule.radius - 1;
            let q = rule.states;
            // Both extremal digits are irrelevant, so read them as 0.
            let table = (0..q.pow((2 * r + 1) as u32))
                .map(|inner| rule.table[inner * q])
                .collect();
            let mut next = Self::new(q, r, table).expect("shrinking a valid table stays valid");
            next.name = rule.name.take();
            rule = next;
        }
        rule
    }

    /// Whether two rules induce the same global map, comparing tables after
    /// lifting both to a common radius.
    pub fn same_global_map(&self, other: &Rule) -> bool {
        if self.states != other.states {
            return false;
        }
        let a = self.canonicalize();
        let b = other.canonicalize();
        a.radius == b.radius && a.table == b.table
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("rule serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Writes the base-`q` digits of `idx` into `out` (most significant first).
pub fn decode_index(mut idx: usize, states: usize, out: &mut [State]) {
    for slot in out.iter_mut().rev() {
        *slot = (idx % states) as State;
        idx /= states;
    }
}

/// Base-`q` value of `cells` with the first cell most significant.
pub fn encode_cells(cells: &[State], states: usize) -> usize {
    cells
        .iter()
        .fold(0usize, |acc, &s| acc * states + s as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wolfram_218_table() {
        let r = Rule::from_wolfram(218).unwrap();
        assert_eq!(r.eval(&[1, 0, 1]), 0);
        assert_eq!(r.eval(&[0, 0, 1]), 1);
        assert_eq!(r.eval(&[1, 1, 1]), 1);
        assert_eq!(r.wolfram_code(), Some(218));
    }

    #[test]
    fn wolfram_110_and_zero() {
        let r = Rule::from_wolfram(110).unwrap();
        assert_eq!(r.eval(&[1, 1, 0]), 1);
        assert_eq!(r.eval(&[1, 1, 1]), 0);
        let z = Rule::from_wolfram(0).unwrap();
        assert!(z.table().iter().all(|&s| s == 0));
        assert!(matches!(
            Rule::from_wolfram(256),
            Err(Error::WolframCode(256))
        ));
    }

    #[test]
    fn make_rule_validation() {
        let not = Rule::new(2, 0, vec![1, 0]).unwrap();
        assert_eq!(not.eval(&[0]), 1);
        assert!(Rule::new(3, 1, vec![0; 27]).is_ok());
        assert!(Rule::new(2, 1, vec![0; 7]).is_err());
        assert!(matches!(
            Rule::new(2, 1, vec![0, 0, 0, 2, 0, 0, 0, 0]),
            Err(Error::StateOutOfRange { state: 2, .. })
        ));
    }

    #[test]
    fn canonical_shift_and_identity() {
        let shift = Rule::from_wolfram(170).unwrap();
        assert!(shift.is_canonical());
        assert_eq!(shift.canonicalize().radius(), 1);

        let id = Rule::from_wolfram(204).unwrap();
        let c = id.canonicalize();
        assert_eq!(c.radius(), 0);
        assert_eq!(c.table(), &[0, 1]);
    }

    #[test]
    fn lifted_rule_90_canonicalizes_back() {
        let r90 = Rule::from_wolfram(90).unwrap();
        let lifted = r90.lift(2).unwrap();
        assert_eq!(lifted.radius(), 2);
        assert!(!lifted.is_canonical());
        let back = lifted.canonicalize();
        assert_eq!(back.radius(), 1);
        assert_eq!(back.table(), r90.table());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let r = Rule::from_wolfram(94).unwrap();
        let s = r.to_json();
        assert!(s.contains("\"states\":2"));
        assert_eq!(Rule::from_json(&s).unwrap(), r);
        assert!(Rule::from_json(r#"{"states":2,"radius":1,"table":[0,1]}"#).is_err());
        assert!(Rule::from_json(r#"{"states":2,"radius":0,"table":[0,3]}"#).is_err());
    }

    #[test]
    fn depends_on_positions() {
        let r60 = Rule::from_wolfram(60).unwrap();
        assert!(r60.depends_on(0));
        assert!(r60.depends_on(1));
        assert!(!r60.depends_on(2));
    }
}
