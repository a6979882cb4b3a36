//! The prediction, cycle-length and invasion problems.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::{Rule, State};
use crate::sim::{collapse_cells, step_cyclic_cells, step_perturbed_with, PerturbedConfig};
use crate::word::{CyclicWord, Word};

/// First letter of `f^*(w)`.
pub fn pred(rule: &Rule, w: &Word) -> Result<State> {
    w.check_states(rule.states())?;
    if w.is_empty() {
        return Err(Error::WordTooShort { len: 0, need: 1 });
    }
    Ok(collapse_cells(rule, w.cells())[0])
}

/// Brent's cycle detection on `x0, f(x0), f(f(x0)), ...`; returns the least
/// preperiod `mu` and the period `lambda`.
pub fn brent<T: Clone + PartialEq>(x0: &T, mut f: impl FnMut(&T) -> T) -> (usize, usize) {
    let mut power = 1;
    let mut lam = 1;
    let mut tortoise = x0.clone();
    let mut hare = f(x0);
    while tortoise != hare {
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        hare = f(&hare);
        lam += 1;
    }
    let mut tortoise = x0.clone();
    let mut hare = x0.clone();
    for _ in 0..lam {
        hare = f(&hare);
    }
    let mut mu = 0;
    while tortoise != hare {
        tortoise = f(&tortoise);
        hare = f(&hare);
        mu += 1;
    }
    (mu, lam)
}

/// The orbit of `p_u`: `F^t(p_u) = F^{t+p}(p_u)` for all `t >= t0`, with
/// both values minimal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSignature {
    pub preperiod: usize,
    pub period: usize,
    /// `F^0(p_u), ..., F^{t0-1}(p_u)`.
    pub transient_words: Vec<CyclicWord>,
    /// `F^{t0}(p_u), ..., F^{t0+p-1}(p_u)`.
    pub period_words: Vec<CyclicWord>,
}

impl OrbitSignature {
    /// `F^t(p_u)`.
    pub fn at(&self, t: usize) -> &CyclicWord {
        if t < self.preperiod {
            &self.transient_words[t]
        } else {
            &self.period_words[(t - self.preperiod) % self.period]
        }
    }

    /// Position of time `t >= t0` in the period.
    pub fn phase(&self, t: usize) -> usize {
        (t - self.preperiod) % self.period
    }
}

fn cyclic_stepper(rule: &Rule) -> impl FnMut(&Vec<State>) -> Vec<State> + '_ {
    let mut ext = Vec::new();
    move |cells: &Vec<State>| {
        let mut out = Vec::with_capacity(cells.len());
        step_cyclic_cells(rule, cells, &mut ext, &mut out);
        out
    }
}

/// Cycle detection on the orbit of `p_u`.
pub fn background_orbit(rule: &Rule, u: &CyclicWord) -> Result<OrbitSignature> {
    u.period().check_states(rule.states())?;
    let mut step = cyclic_stepper(rule);
    let start = u.cells().to_vec();
    let (mu, lam) = brent(&start, &mut step);
    let mut words = Vec::with_capacity(mu + lam);
    let mut cur = start;
    for _ in 0..mu + lam {
        let next = step(&cur);
        words.push(CyclicWord::from_cells_unchecked(u.states(), cur));
        cur = next;
    }
    let period_words = words.split_off(mu);
    Ok(OrbitSignature {
        preperiod: mu,
        period: lam,
        transient_words: words,
        period_words,
    })
}

/// `(t0, lambda(u))` without storing the orbit.
pub fn cycle_length(rule: &Rule, u: &CyclicWord) -> Result<(usize, usize)> {
    u.period().check_states(rule.states())?;
    Ok(brent(&u.cells().to_vec(), cyclic_stepper(rule)))
}

/// `lambda(u) <= k`.
pub fn cycle_pred(rule: &Rule, k: usize, u: &CyclicWord) -> Result<bool> {
    if k == 0 {
        return Err(Error::IterationRange {
            t: 0,
            max: usize::MAX,
        });
    }
    Ok(cycle_length(rule, u)?.1 <= k)
}

/// Whether `F^t(p_u) = p_u` for some `1 <= t <= k`.
pub fn returns_within(rule: &Rule, k: usize, u: &CyclicWord) -> Result<bool> {
    u.period().check_states(rule.states())?;
    let mut step = cyclic_stepper(rule);
    let start = u.cells().to_vec();
    let mut cur = start.clone();
    for _ in 0..k {
        cur = step(&cur);
        if cur == start {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvasionBudget {
    pub max_steps: usize,
    pub max_width: usize,
}

impl Default for InvasionBudget {
    fn default() -> Self {
        Self {
            max_steps: 10_000,
            max_width: 1_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    NoInvasion,
    Invasion,
    Unknown,
}

/// Boundary state of one side of the difference window: the outermost
/// differing cell, its position modulo `|u|`, and the background phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeState {
    pub cell: State,
    pub offset_mod: usize,
    pub phase: usize,
}

/// One side moving outward at speed `r` on every step of `[first, second]`
/// with the same edge state at both ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRepeat {
    pub first: usize,
    pub second: usize,
    pub state: EdgeState,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// The configuration equals the background orbit from `time` on.
    Vanished { time: usize },
    /// The triple (window, lediff mod |u|, phase) seen at both times.
    Repeat {
        first: usize,
        second: usize,
        window: Word,
        offset_mod: usize,
        phase: usize,
    },
    /// Both edges move outward at maximal speed with a repeating edge state.
    Growth { left: EdgeRepeat, right: EdgeRepeat },
    /// A structural decider for this rule settled the instance.
    Decider { name: String, reason: String },
    /// Budget exhausted.
    Budget { steps: usize, width: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvasionVerdict {
    pub outcome: Outcome,
    pub certificate: Certificate,
    /// Steps simulated.
    pub steps: usize,
    /// Largest window width seen.
    pub width: usize,
}

impl InvasionVerdict {
    pub fn is_known(&self) -> bool {
        self.outcome != Outcome::Unknown
    }
}

/// Orbit of a perturbed configuration next to its background orbit.
pub struct PerturbedOrbit<'a> {
    rule: &'a Rule,
    orbit: OrbitSignature,
    time: usize,
    current: PerturbedConfig,
}

impl<'a> PerturbedOrbit<'a> {
    pub fn new(rule: &'a Rule, start: PerturbedConfig) -> Result<Self> {
        let orbit = background_orbit(rule, start.background())?;
        Ok(Self::with_orbit(rule, start, orbit))
    }

    pub fn with_orbit(rule: &'a Rule, start: PerturbedConfig, orbit: OrbitSignature) -> Self {
        Self {
            rule,
            orbit,
            time: 0,
            current: start,
        }
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn current(&self) -> &PerturbedConfig {
        &self.current
    }

    pub fn orbit(&self) -> &OrbitSignature {
        &self.orbit
    }

    pub fn step(&mut self) -> &PerturbedConfig {
        let next_bg = self.orbit.at(self.time + 1).clone();
        self.current = step_perturbed_with(self.rule, &self.current, next_bg);
        self.time += 1;
        &self.current
    }
}

fn instance(rule: &Rule, u: &CyclicWord, x: &Word) -> Result<PerturbedConfig> {
    u.period().check_states(rule.states())?;
    PerturbedConfig::instance(u.clone(), x.clone())
}

/// Leftmost and rightmost differences after `t` steps, `None` when the
/// configuration equals the background.
pub fn diff_extent(rule: &Rule, u: &CyclicWord, x: &Word, t: usize) -> Result<Option<(i64, i64)>> {
    let mut orbit = PerturbedOrbit::new(rule, instance(rule, u, x)?)?;
    for _ in 0..t {
        if orbit.current().is_background() {
            return Ok(None);
        }
        orbit.step();
    }
    Ok(orbit.current().extent())
}

#[derive(Default)]
struct EdgeTracker {
    run_start: usize,
    seen: HashMap<EdgeState, usize>,
    found: Option<EdgeRepeat>,
}

impl EdgeTracker {
    fn observe(&mut self, t: usize, max_speed: bool, state: EdgeState) {
        if self.found.is_some() {
            return;
        }
        if !max_speed {
            self.seen.clear();
            self.run_start = t;
        }
        if let Some(&first) = self.seen.get(&state) {
            self.found = Some(EdgeRepeat {
                first,
                second: t,
                state,
            });
        } else {
            self.seen.insert(state, t);
        }
    }
}

/// Decides invasion on `p_u(x)` by simulation.
///
/// `NoInvasion` is reported when the window vanishes or the triple
/// (window, lediff mod |u|, phase) repeats after the preperiod. `Invasion` is
/// reported when each edge moves outward by `r` on every step between two
/// times with equal edge states. Otherwise the verdict is `Unknown`.
pub fn invasion(
    rule: &Rule,
    u: &CyclicWord,
    x: &Word,
    budget: InvasionBudget,
) -> Result<InvasionVerdict> {
    let start = instance(rule, u, x)?;
    let mut orbit = PerturbedOrbit::new(rule, start)?;
    let t0 = orbit.orbit().preperiod;
    let n = u.len() as i64;
    let r = rule.radius() as i64;
    let mut triples: HashMap<(Vec<State>, usize, usize), usize> = HashMap::new();
    let mut left = EdgeTracker::default();
    let mut right = EdgeTracker::default();
    let mut width = orbit.current().width();
    let mut prev_extent: Option<(i64, i64)> = None;

    loop {
        let t = orbit.time();
        let cur = orbit.current();
        width = width.max(cur.width());
        let Some((lo, hi)) = cur.extent() else {
            return Ok(InvasionVerdict {
                outcome: Outcome::NoInvasion,
                certificate: Certificate::Vanished { time: t },
                steps: t,
                width,
            });
        };
        if t >= t0 {
            let phase = orbit.orbit().phase(t);
            let key = (
                cur.window().cells().to_vec(),
                lo.rem_euclid(n) as usize,
                phase,
            );
            if let Some(&first) = triples.get(&key) {
                return Ok(InvasionVerdict {
                    outcome: Outcome::NoInvasion,
                    certificate: Certificate::Repeat {
                        first,
                        second: t,
                        window: cur.window().clone(),
                        offset_mod: key.1,
                        phase,
                    },
                    steps: t,
                    width,
                });
            }
            let cells = cur.window().cells();
            let (l_fast, r_fast) = match prev_extent {
                Some((plo, phi)) if r > 0 => (lo == plo - r, hi == phi + r),
                _ => (false, false),
            };
            left.observe(
                t,
                l_fast,
                EdgeState {
                    cell: cells[0],
                    offset_mod: lo.rem_euclid(n) as usize,
                    phase,
                },
            );
            right.observe(
                t,
                r_fast,
                EdgeState {
                    cell: cells[cells.len() - 1],
                    offset_mod: hi.rem_euclid(n) as usize,
                    phase,
                },
            );
            if let (Some(l), Some(rr)) = (&left.found, &right.found) {
                return Ok(InvasionVerdict {
                    outcome: Outcome::Invasion,
                    certificate: Certificate::Growth {
                        left: l.clone(),
                        right: rr.clone(),
                    },
                    steps: t,
                    width,
                });
            }
            triples.insert(key, t);
        }
        if t >= budget.max_steps || cur.width() > budget.max_width {
            return Ok(InvasionVerdict {
                outcome: Outcome::Unknown,
                certificate: Certificate::Budget { steps: t, width },
                steps: t,
                width,
            });
        }
        prev_extent = Some((lo, hi));
        orbit.step();
    }
}

/// Replays a simulation certificate. Decider and budget certificates carry
/// nothing to replay and are rejected.
pub fn verify_certificate(
    rule: &Rule,
    u: &CyclicWord,
    x: &Word,
    verdict: &InvasionVerdict,
) -> Result<bool> {
    let mut orbit = PerturbedOrbit::new(rule, instance(rule, u, x)?)?;
    let t0 = orbit.orbit().preperiod;
    let n = u.len() as i64;
    let r = rule.radius() as i64;
    let advance = |orbit: &mut PerturbedOrbit, t: usize| {
        while orbit.time() < t {
            orbit.step();
        }
    };
    match &verdict.certificate {
        Certificate::Vanished { time } => {
            advance(&mut orbit, *time);
            Ok(verdict.outcome == Outcome::NoInvasion && orbit.current().is_background())
        }
        Certificate::Repeat {
            first,
            second,
            window,
            offset_mod,
            phase,
        } => {
            if verdict.outcome != Outcome::NoInvasion || first >= second || *first < t0 {
                return Ok(false);
            }
            let triple = |c: &PerturbedConfig, t: usize, o: &OrbitSignature| {
                c.extent()
                    .map(|(lo, _)| (c.window().clone(), lo.rem_euclid(n) as usize, o.phase(t)))
            };
            let want = Some((window.clone(), *offset_mod, *phase));
            advance(&mut orbit, *first);
            let a = triple(orbit.current(), *first, orbit.orbit());
            advance(&mut orbit, *second);
            let b = triple(orbit.current(), *second, orbit.orbit());
            Ok(a == want && b == want)
        }
        Certificate::Growth { left, right } => {
            if verdict.outcome != Outcome::Invasion {
                return Ok(false);
            }
            let end = left.second.max(right.second);
            let mut extents = Vec::with_capacity(end + 1);
            let mut edges = Vec::with_capacity(end + 1);
            loop {
                let t = orbit.time();
                let c = orbit.current();
                extents.push(c.extent());
                edges.push(c.extent().map(|(lo, hi)| {
                    let w = c.window().cells();
                    (
                        w[0],
                        lo.rem_euclid(n) as usize,
                        w[w.len() - 1],
                        hi.rem_euclid(n) as usize,
                    )
                }));
                if t == end {
                    break;
                }
                orbit.step();
            }
            let phase = |t: usize| orbit.orbit().phase(t);
            let side_ok = |rep: &EdgeRepeat, is_left: bool| {
                if rep.first >= rep.second || rep.first < t0 || r == 0 {
                    return false;
                }
                let state_at = |t: usize| {
                    edges[t].map(|(lc, lo, rc, ro)| {
                        if is_left {
                            EdgeState {
                                cell: lc,
                                offset_mod: lo,
                                phase: phase(t),
                            }
                        } else {
                            EdgeState {
                                cell: rc,
                                offset_mod: ro,
                                phase: phase(t),
                            }
                        }
                    })
                };
                let moves =
                    (rep.first + 1..=rep.second).all(|t| match (extents[t - 1], extents[t]) {
                        (Some((plo, phi)), Some((lo, hi))) => {
                            if is_left {
                                lo == plo - r
                            } else {
                                hi == phi + r
                            }
                        }
                        _ => false,
                    });
                moves
                    && state_at(rep.first).as_ref() == Some(&rep.state)
                    && state_at(rep.second).as_ref() == Some(&rep.state)
            };
            Ok(side_ok(left, true) && side_ok(right, false))
        }
        Certificate::Decider { .. } | Certificate::Budget { .. } => Ok(false),
    }
}

/// A rule-specific procedure that settles some invasion instances.
pub trait InvasionDecider: Sync {
    fn name(&self) -> &str;

    /// Whether this decider is meant for `rule`.
    fn applies_to(&self, rule: &Rule) -> bool;

    /// `Some((outcome, reason))` when the instance is settled.
    fn decide(&self, rule: &Rule, u: &CyclicWord, x: &Word) -> Result<Option<(Outcome, String)>>;
}

/// Consults every applicable decider before falling back to simulation.
pub fn invasion_with_deciders(
    rule: &Rule,
    u: &CyclicWord,
    x: &Word,
    budget: InvasionBudget,
    deciders: &[&dyn InvasionDecider],
) -> Result<InvasionVerdict> {
    for d in deciders.iter().filter(|d| d.applies_to(rule)) {
        if let Some((outcome, reason)) = d.decide(rule, u, x)? {
            return Ok(InvasionVerdict {
                outcome,
                certificate: Certificate::Decider {
                    name: d.name().to_string(),
                    reason,
                },
                steps: 0,
                width: instance(rule, u, x)?.width(),
            });
        }
    }
    invasion(rule, u, x, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eca(n: u32) -> Rule {
        Rule::from_wolfram(n).unwrap()
    }

    #[test]
    fn pred_examples() {
        assert_eq!(pred(&eca(110), &Word::bits("1101001")).unwrap(), 1);
        assert_eq!(pred(&eca(90), &Word::bits("1")).unwrap(), 1);
        assert!(pred(&eca(90), &Word::bits("")).is_err());
    }

    #[test]
    fn pred_218_families() {
        let r = eca(218);
        for n in 1..=8usize {
            for i in 0..=n {
                for j in 0..=n {
                    let s = format!(
                        "{}{}{}",
                        "1".repeat(n - i),
                        "0".repeat(i + j + 1),
                        "1".repeat(n - j)
                    );
                    let want = if i == j { 0 } else { 1 };
                    assert_eq!(pred(&r, &Word::bits(&s)).unwrap(), want, "{s}");
                }
            }
        }
    }

    #[test]
    fn brent_small() {
        assert_eq!(brent(&-10i64, |x| (x + 5) % 6 + 3), (2, 3));
        assert_eq!(brent(&0u8, |x| *x), (0, 1));
    }

    #[test]
    fn orbits() {
        let o = background_orbit(&eca(0), &CyclicWord::bits("1")).unwrap();
        assert_eq!((o.preperiod, o.period), (1, 1));
        let o = background_orbit(&eca(170), &CyclicWord::bits("01")).unwrap();
        assert_eq!((o.preperiod, o.period), (0, 2));
        assert_eq!(o.at(5).to_string(), "10");
        let o = background_orbit(&eca(33), &CyclicWord::bits("011011")).unwrap();
        assert_eq!(o.period, 2);
        assert!(o.preperiod <= 4);
        assert_eq!(
            cycle_length(&eca(204), &CyclicWord::bits("0110")).unwrap(),
            (0, 1)
        );
        assert!(!cycle_pred(&eca(170), 1, &CyclicWord::bits("01")).unwrap());
        assert!(cycle_pred(&eca(170), 2, &CyclicWord::bits("01")).unwrap());
    }

    #[test]
    fn invasion_examples() {
        let b = InvasionBudget::default();
        let v = invasion(&eca(110), &CyclicWord::bits("01"), &Word::bits("10"), b).unwrap();
        assert_eq!(v.outcome, Outcome::NoInvasion);
        assert_eq!(v.certificate, Certificate::Vanished { time: 0 });

        let v = invasion(&eca(218), &CyclicWord::bits("0"), &Word::bits("1"), b).unwrap();
        assert_eq!(v.outcome, Outcome::Invasion);
        assert!(
            verify_certificate(&eca(218), &CyclicWord::bits("0"), &Word::bits("1"), &v).unwrap()
        );

        let v = invasion(&eca(218), &CyclicWord::bits("1"), &Word::bits("0"), b).unwrap();
        assert_eq!(v.outcome, Outcome::NoInvasion);
        assert!(
            verify_certificate(&eca(218), &CyclicWord::bits("1"), &Word::bits("0"), &v).unwrap()
        );

        // a shifted single cell never grows
        let v = invasion(&eca(170), &CyclicWord::bits("0"), &Word::bits("1"), b).unwrap();
        assert_eq!(v.outcome, Outcome::NoInvasion);
    }

    #[test]
    fn extents() {
        let r218 = eca(218);
        let u = CyclicWord::bits("0");
        let x = Word::bits("1");
        assert_eq!(diff_extent(&r218, &u, &x, 0).unwrap(), Some((1, 1)));
        assert_eq!(diff_extent(&r218, &u, &x, 5).unwrap(), Some((-4, 6)));
        let shifted = diff_extent(&eca(170), &u, &Word::bits("101"), 4).unwrap();
        assert_eq!(shifted, Some((-3, -1)));
    }

    #[test]
    fn unknown_on_tight_budget() {
        let tight = InvasionBudget {
            max_steps: 0,
            max_width: 1000,
        };
        let v = invasion(&eca(30), &CyclicWord::bits("0"), &Word::bits("1"), tight).unwrap();
        assert_eq!(v.outcome, Outcome::Unknown);
        assert!(
            !verify_certificate(&eca(30), &CyclicWord::bits("0"), &Word::bits("1"), &v).unwrap()
        );
    }

    #[test]
    fn verdict_json() {
        let v = invasion(
            &eca(218),
            &CyclicWord::bits("0"),
            &Word::bits("1"),
            InvasionBudget::default(),
        )
        .unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.starts_with("{\"outcome\":\"Invasion\",\"certificate\":{\"kind\":\"growth\""));
        let back: InvasionVerdict = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
