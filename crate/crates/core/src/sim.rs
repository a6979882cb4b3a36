//! Simulation: local word maps, cyclic configurations and finitely perturbed
//! periodic configurations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::{Rule, State};
use crate::word::{CyclicWord, Word};

/// Applies the local rule to every window of `cells`; the output has
/// `cells.len() - 2r` cells. The caller guarantees the length.
pub(crate) fn apply_cells(rule: &Rule, cells: &[State], out: &mut Vec<State>) {
    let width = rule.width();
    out.clear();
    if cells.len() < width {
        return;
    }
    let q = rule.states();
    let modulus = q.pow(width as u32 - 1);
    let table = rule.table();
    let mut idx = 0usize;
    for &c in &cells[..width - 1] {
        idx = idx * q + c as usize;
    }
    for &c in &cells[width - 1..] {
        idx = idx * q + c as usize;
        out.push(table[idx]);
        idx %= modulus;
    }
}

/// `f(u_1 ... u_n) = f(u_1 ... u_{2r+1}) ... f(u_{n-2r} ... u_n)`.
pub fn apply_local(rule: &Rule, w: &Word) -> Result<Word> {
    w.check_states(rule.states())?;
    if w.len() < rule.width() {
        return Err(Error::WordTooShort {
            len: w.len(),
            need: rule.width(),
        });
    }
    let mut out = Vec::with_capacity(w.len() - 2 * rule.radius());
    apply_cells(rule, w.cells(), &mut out);
    Ok(Word::new_unchecked(rule.states(), out))
}

/// Largest `t` for which `f^t` is defined on words of length `len`; `None` for
/// radius 0 where every `t` is allowed.
pub fn max_iterations(rule: &Rule, len: usize) -> Option<usize> {
    (rule.radius() > 0).then(|| len.saturating_sub(1) / (2 * rule.radius()))
}

/// `f^t(w)`, of length `|w| - 2rt`.
pub fn iterate_local(rule: &Rule, w: &Word, t: usize) -> Result<Word> {
    w.check_states(rule.states())?;
    let max = max_iterations(rule, w.len()).unwrap_or(usize::MAX);
    if t == 0 || t > max {
        return Err(Error::IterationRange { t, max });
    }
    let mut cur = w.cells().to_vec();
    let mut next = Vec::with_capacity(cur.len());
    for _ in 0..t {
        apply_cells(rule, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Word::new_unchecked(rule.states(), cur))
}

/// `f^*(w)`: iterate while the word is long enough. The result has length
/// `((|w| - 1) mod 2r) + 1`. For radius 0 this is a single application.
pub fn collapse(rule: &Rule, w: &Word) -> Result<Word> {
    w.check_states(rule.states())?;
    if w.is_empty() {
        return Err(Error::WordTooShort { len: 0, need: 1 });
    }
    Ok(Word::new_unchecked(
        rule.states(),
        collapse_cells(rule, w.cells()),
    ))
}

pub(crate) fn collapse_cells(rule: &Rule, cells: &[State]) -> Vec<State> {
    let mut cur = cells.to_vec();
    if rule.radius() == 0 {
        let mut out = Vec::with_capacity(cur.len());
        apply_cells(rule, &cur, &mut out);
        return out;
    }
    let mut next = Vec::with_capacity(cur.len());
    while cur.len() > 2 * rule.radius() {
        apply_cells(rule, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// All rows of the triangular space-time diagram of `w`, from `w` itself down
/// to `f^*(w)`.
pub fn spacetime_triangle(rule: &Rule, w: &Word) -> Result<Vec<Word>> {
    w.check_states(rule.states())?;
    let mut rows = vec![w.clone()];
    if rule.radius() == 0 {
        rows.push(collapse(rule, w)?);
        return Ok(rows);
    }
    let mut cur = w.cells().to_vec();
    while cur.len() > 2 * rule.radius() {
        let mut next = Vec::new();
        apply_cells(rule, &cur, &mut next);
        rows.push(Word::new_unchecked(rule.states(), next.clone()));
        cur = next;
    }
    Ok(rows)
}

pub(crate) fn step_cyclic_cells(
    rule: &Rule,
    cells: &[State],
    ext: &mut Vec<State>,
    out: &mut Vec<State>,
) {
    let n = cells.len() as i64;
    let r = rule.radius() as i64;
    ext.clear();
    ext.extend((-r..n + r).map(|j| cells[j.rem_euclid(n) as usize]));
    apply_cells(rule, ext, out);
}

/// One step of `F` on the periodic configuration `p_u`, returned as a period of
/// the same length.
pub fn step_cyclic(rule: &Rule, c: &CyclicWord) -> Result<CyclicWord> {
    c.period().check_states(rule.states())?;
    let mut ext = Vec::new();
    let mut out = Vec::new();
    step_cyclic_cells(rule, c.cells(), &mut ext, &mut out);
    Ok(CyclicWord::from_cells_unchecked(rule.states(), out))
}

/// `p_u` modified on a finite window: cells `offset..offset+|window|` come
/// from `window`, all other cells from the background.
///
/// The window is kept normalized: its first and last cells differ from the
/// background, or it is empty when the configuration equals `p_u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PerturbedConfig {
    background: CyclicWord,
    offset: i64,
    window: Word,
}

impl PerturbedConfig {
    /// Builds and normalizes `p_u` with `window` written from `offset` on.
    pub fn new(background: CyclicWord, offset: i64, window: Word) -> Result<Self> {
        window.check_states(background.states())?;
        let cells = window.into_cells();
        Ok(Self::normalized(background, offset, cells))
    }

    /// The instance `p_u(x_1 ... x_n)`, with `x` at positions `1..=n`.
    pub fn instance(background: CyclicWord, x: Word) -> Result<Self> {
        Self::new(background, 1, x)
    }

    pub(crate) fn normalized(
        background: CyclicWord,
        mut offset: i64,
        mut cells: Vec<State>,
    ) -> Self {
        let start = cells
            .iter()
            .enumerate()
            .position(|(k, &c)| c != background.at(offset + k as i64));
        match start {
            None => {
                cells.clear();
                offset = 0;
            }
            Some(s) => {
                let end = (s..cells.len())
                    .rev()
                    .find(|&k| cells[k] != background.at(offset + k as i64))
                    .expect("start is a difference");
                cells.truncate(end + 1);
                cells.drain(..s);
                offset += s as i64;
            }
        }
        let states = background.states();
        Self {
            background,
            offset,
            window: Word::new_unchecked(states, cells),
        }
    }

    pub fn background(&self) -> &CyclicWord {
        &self.background
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn window(&self) -> &Word {
        &self.window
    }

    /// True when the configuration equals its background.
    pub fn is_background(&self) -> bool {
        self.window.is_empty()
    }

    /// Leftmost and rightmost differing positions.
    pub fn extent(&self) -> Option<(i64, i64)> {
        (!self.window.is_empty()).then(|| (self.offset, self.offset + self.window.len() as i64 - 1))
    }

    pub fn width(&self) -> usize {
        self.window.len()
    }

    pub fn at(&self, i: i64) -> State {
        let k = i - self.offset;
        if k >= 0 && (k as usize) < self.window.len() {
            self.window.cells()[k as usize]
        } else {
            self.background.at(i)
        }
    }

    /// Cells `from..=to`.
    pub fn segment(&self, from: i64, to: i64) -> Vec<State> {
        (from..=to).map(|i| self.at(i)).collect()
    }
}

/// Memoized `step_cyclic` for one rule.
#[derive(Debug, Default)]
pub struct OrbitCache {
    next: HashMap<CyclicWord, CyclicWord>,
}

impl OrbitCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(&mut self, rule: &Rule, c: &CyclicWord) -> Result<CyclicWord> {
        if let Some(n) = self.next.get(c) {
            return Ok(n.clone());
        }
        let n = step_cyclic(rule, c)?;
        self.next.insert(c.clone(), n.clone());
        Ok(n)
    }
}

/// One step of `F` on a perturbed configuration; the background advances
/// through the cache.
pub fn step_perturbed(
    rule: &Rule,
    p: &PerturbedConfig,
    cache: &mut OrbitCache,
) -> Result<PerturbedConfig> {
    let next_bg = cache.step(rule, &p.background)?;
    Ok(step_perturbed_with(rule, p, next_bg))
}

/// One step of `F` given the already computed image of the background.
pub(crate) fn step_perturbed_with(
    rule: &Rule,
    p: &PerturbedConfig,
    next_bg: CyclicWord,
) -> PerturbedConfig {
    if p.window.is_empty() {
        return PerturbedConfig::normalized(next_bg, 0, Vec::new());
    }
    let r = rule.radius() as i64;
    let (lo, hi) = p.extent().expect("nonempty window");
    let ext = p.segment(lo - 2 * r, hi + 2 * r);
    let mut out = Vec::with_capacity(ext.len());
    apply_cells(rule, &ext, &mut out);
    PerturbedConfig::normalized(next_bg, lo - r, out)
}
