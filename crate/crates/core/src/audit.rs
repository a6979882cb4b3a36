//! Mechanical re-checks of the structural facts behind the rule-specific
//! protocols, plus the two rule-specific invasion deciders.
//!
//! Every claim is a plain function of an [`AuditConfig`], so ranges can be
//! lowered for quick runs and raised for release checks.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{is_linear, is_reversible, Operator};
use crate::commcomp::{build_matrix, check_fooling_set, linear_protocol_pred, FoolingSet, Problem};
use crate::error::{Error, Result};
use crate::problems::{
    background_orbit, cycle_length, cycle_pred, invasion, pred, returns_within, InvasionBudget,
    InvasionDecider, OrbitSignature, Outcome,
};
use crate::rule::{Rule, State};
use crate::sim::{apply_cells, step_cyclic, step_perturbed_with, PerturbedConfig};
use crate::word::{CyclicWord, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Verified,
    Refuted,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditClaim {
    pub id: String,
    pub statement: String,
    pub status: ClaimStatus,
    /// Counterexample when refuted, otherwise an optional note.
    pub witness: Option<String>,
    pub parameters: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub subject: String,
    pub claims: Vec<AuditClaim>,
}

impl AuditReport {
    pub fn claim(&self, id: &str) -> Option<&AuditClaim> {
        self.claims.iter().find(|c| c.id == id)
    }

    pub fn refuted(&self) -> impl Iterator<Item = &AuditClaim> {
        self.claims
            .iter()
            .filter(|c| c.status == ClaimStatus::Refuted)
    }

    pub fn all_verified(&self) -> bool {
        self.claims
            .iter()
            .all(|c| c.status == ClaimStatus::Verified)
    }

    /// Refuted claims must carry a witness.
    pub fn validate(&self) -> Result<()> {
        match self.refuted().find(|c| c.witness.is_none()) {
            Some(c) => Err(Error::Parse(format!(
                "refuted claim {} has no witness",
                c.id
            ))),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }
}

/// Exhaustive ranges of every claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub word_len_218: usize,
    pub word_len_94: usize,
    pub run_len: usize,
    pub invasion_background: usize,
    pub invasion_window: usize,
    pub fooling_218: usize,
    pub cycle_33: usize,
    pub fooling_33: usize,
    pub linear_len: usize,
    pub reversible_len: usize,
    pub budget: InvasionBudget,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            word_len_218: 9,
            word_len_94: 10,
            run_len: 9,
            invasion_background: 3,
            invasion_window: 6,
            fooling_218: 8,
            cycle_33: 14,
            fooling_33: 10,
            linear_len: 9,
            reversible_len: 10,
            budget: InvasionBudget::default(),
        }
    }
}

impl AuditConfig {
    /// Reduced ranges for quick runs.
    pub fn small() -> Self {
        Self {
            word_len_218: 6,
            word_len_94: 6,
            run_len: 6,
            invasion_background: 2,
            invasion_window: 4,
            fooling_218: 5,
            cycle_33: 8,
            fooling_33: 6,
            linear_len: 6,
            reversible_len: 6,
            ..Self::default()
        }
    }

    /// Sets every word-length range to `n`; invasion ranges are kept.
    pub fn with_range(n: usize) -> Self {
        Self {
            word_len_218: n,
            word_len_94: n,
            run_len: n,
            fooling_218: n,
            cycle_33: n,
            fooling_33: n,
            linear_len: n,
            reversible_len: n,
            ..Self::default()
        }
    }
}

type Check = fn(&AuditConfig) -> Result<Outcome1>;

// Result of one claim body: counterexample (if any), note, parameters.
struct Outcome1 {
    counterexample: Option<String>,
    note: Option<String>,
    parameters: Vec<(&'static str, u64)>,
}

impl Outcome1 {
    fn from(counterexample: Option<String>, parameters: Vec<(&'static str, u64)>) -> Self {
        Self {
            counterexample,
            note: None,
            parameters,
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

struct ClaimSpec {
    id: &'static str,
    statement: &'static str,
    check: Check,
}

fn run(subject: &str, specs: &[ClaimSpec], cfg: &AuditConfig) -> Result<AuditReport> {
    let mut claims = specs
        .par_iter()
        .map(|s| {
            let out = (s.check)(cfg)?;
            let status = if out.counterexample.is_some() {
                ClaimStatus::Refuted
            } else {
                ClaimStatus::Verified
            };
            Ok(AuditClaim {
                id: s.id.to_string(),
                statement: s.statement.to_string(),
                status,
                witness: out.counterexample.or(out.note),
                parameters: out
                    .parameters
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    claims.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(AuditReport {
        subject: subject.to_string(),
        claims,
    })
}

fn eca(code: u32) -> Rule {
    Rule::from_wolfram(code).expect("valid code")
}

fn bit_words(len: usize) -> impl Iterator<Item = Vec<State>> {
    (0..1usize << len).map(move |i| Word::from_index(2, len, i).into_cells())
}

fn show(cells: &[State]) -> String {
    cells.iter().map(|&c| char::from(b'0' + c as u8)).collect()
}

fn image(rule: &Rule, cells: &[State]) -> Vec<State> {
    let mut out = Vec::new();
    apply_cells(rule, cells, &mut out);
    out
}

fn iterate(rule: &Rule, cells: &[State], t: usize) -> Vec<State> {
    let mut cur = cells.to_vec();
    for _ in 0..t {
        cur = image(rule, &cur);
    }
    cur
}

fn contains(cells: &[State], pat: &[State]) -> bool {
    cells.windows(pat.len()).any(|w| w == pat)
}

fn contains_cyclic(cells: &[State], pat: &[State]) -> bool {
    let ext: Vec<State> = cells
        .iter()
        .chain(cells.iter().cycle().take(pat.len()))
        .copied()
        .collect();
    contains(&ext, pat)
}

/// Maximal runs `(start, len, symbol)` that are bounded on both sides.
fn inner_runs(cells: &[State]) -> Vec<(usize, usize, State)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for k in 1..=cells.len() {
        if k == cells.len() || cells[k] != cells[start] {
            if start > 0 && k < cells.len() {
                runs.push((start, k - start, cells[start]));
            }
            start = k;
        }
    }
    runs
}

/// Cyclic run lengths; empty for a uniform word.
fn cyclic_runs(cells: &[State]) -> Vec<(usize, State)> {
    let n = cells.len();
    let Some(b) = (0..n).find(|&k| cells[k] != cells[(k + n - 1) % n]) else {
        return Vec::new();
    };
    let rotated: Vec<State> = (0..n).map(|k| cells[(b + k) % n]).collect();
    let mut runs = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k == n || rotated[k] != rotated[start] {
            runs.push((k - start, rotated[start]));
            start = k;
        }
    }
    runs
}

/// Factor of a rule-218 additive configuration: no `11`, inner 0-runs odd.
pub fn additive218_word(cells: &[State]) -> bool {
    !contains(cells, &[1, 1])
        && inner_runs(cells)
            .iter()
            .all(|&(_, len, s)| s == 1 || len % 2 == 1)
}

/// Rule-218 additivity of `p_u`.
pub fn additive218_cyclic(cells: &[State]) -> bool {
    let runs = cyclic_runs(cells);
    if runs.is_empty() {
        return cells.iter().all(|&c| c == 0);
    }
    runs.iter()
        .all(|&(len, s)| if s == 1 { len == 1 } else { len % 2 == 1 })
}

/// Factor of a rule-94 additive configuration: every inner run is even.
pub fn additive94_word(cells: &[State]) -> bool {
    inner_runs(cells).iter().all(|&(_, len, _)| len % 2 == 0)
}

/// Rule-94 additivity of `p_u`: uniform, or every cyclic run even.
pub fn additive94_cyclic(cells: &[State]) -> bool {
    cyclic_runs(cells).iter().all(|&(len, _)| len % 2 == 0)
}

fn first_failure<T>(
    items: impl Iterator<Item = T>,
    bad: impl Fn(&T) -> Option<String>,
) -> Option<String> {
    items.into_iter().find_map(|t| bad(&t))
}

fn words_up_to(min: usize, max: usize) -> impl Iterator<Item = Vec<State>> {
    (min..=max).flat_map(bit_words)
}

fn cyclic_up_to(max: usize) -> impl Iterator<Item = CyclicWord> {
    (1..=max).flat_map(|n| {
        (0..1usize << n).map(move |i| CyclicWord::new(Word::from_index(2, n, i)).expect("nonempty"))
    })
}

fn is_rule(rule: &Rule, code: u32) -> bool {
    rule.same_global_map(&eca(code))
}

fn decider_agreement(
    code: u32,
    decider: &dyn InvasionDecider,
    cfg: &AuditConfig,
) -> Result<Outcome1> {
    let rule = eca(code);
    let instances: Vec<(CyclicWord, Word)> = cyclic_up_to(cfg.invasion_background)
        .flat_map(|u| {
            words_up_to(1, cfg.invasion_window)
                .map(move |x| (u.clone(), Word::new(2, x).expect("bits")))
        })
        .collect();
    let rows = instances
        .par_iter()
        .map(|(u, x)| {
            let generic = invasion(&rule, u, x, cfg.budget)?;
            let decided = decider.decide(&rule, u, x)?;
            Ok((generic.outcome, decided.map(|d| d.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut unknown = 0u64;
    let mut counterexample = None;
    for ((u, x), (generic, decided)) in instances.iter().zip(&rows) {
        if *generic == Outcome::Unknown {
            unknown += 1;
            continue;
        }
        if decided.as_ref() != Some(generic) && counterexample.is_none() {
            counterexample = Some(format!(
                "u={u} x={x}: simulation {generic:?}, decider {decided:?}"
            ));
        }
    }
    Ok(Outcome1::from(
        counterexample,
        vec![
            ("max_background", cfg.invasion_background as u64),
            ("max_window", cfg.invasion_window as u64),
            ("instances", instances.len() as u64),
            ("unknown", unknown),
        ],
    ))
}

// ---------------------------------------------------------------- rule 218

/// Rule 218: an additive background is invaded by every nonzero
/// perturbation; any other background carries walls.
pub struct Rule218Decider;

impl InvasionDecider for Rule218Decider {
    fn name(&self) -> &str {
        "rule-218"
    }

    fn applies_to(&self, rule: &Rule) -> bool {
        is_rule(rule, 218)
    }

    fn decide(&self, rule: &Rule, u: &CyclicWord, x: &Word) -> Result<Option<(Outcome, String)>> {
        let p = PerturbedConfig::instance(u.clone(), x.clone())?;
        if !additive218_cyclic(u.cells()) {
            return Ok(Some((
                Outcome::NoInvasion,
                "background is not additive: walls 11 appear".into(),
            )));
        }
        let _ = rule;
        Ok(Some(if p.is_background() {
            (
                Outcome::NoInvasion,
                "perturbation equals the background".into(),
            )
        } else {
            (
                Outcome::Invasion,
                "additive background and a nonzero difference".into(),
            )
        }))
    }
}

fn r218_closure(cfg: &AuditConfig) -> Result<Outcome1> {
    let f = eca(218);
    let bad = first_failure(words_up_to(3, cfg.word_len_218), |w| {
        let img = image(&f, w);
        (additive218_word(w) && !additive218_word(&img))
            .then(|| format!("{} -> {}", show(w), show(&img)))
    });
    let bad = bad.or_else(|| {
        let img = image(&f, &[0, 1, 0, 1, 0]);
        (img != [0, 0, 0]).then(|| format!("01010 -> {}", show(&img)))
    });
    Ok(Outcome1::from(
        bad,
        vec![("max_len", cfg.word_len_218 as u64)],
    ))
}

/// Outer-cell flips change the image of every additive neighbourhood; with
/// `both`, only flips landing on an additive neighbourhood count.
fn flip_sensitivity(code: u32, additive: fn(&[State]) -> bool, both: bool) -> Option<String> {
    let f = eca(code);
    first_failure(bit_words(3), |w| {
        if !additive(w) {
            return None;
        }
        let v = f.eval(w);
        let left = [1 - w[0], w[1], w[2]];
        let right = [w[0], w[1], 1 - w[2]];
        let same = |n: &[State]| (!both || additive(n)) && f.eval(n) == v;
        (same(&left) || same(&right)).then(|| show(w))
    })
}

fn r218_flip(_: &AuditConfig) -> Result<Outcome1> {
    Ok(Outcome1::from(
        flip_sensitivity(218, additive218_word, false),
        vec![],
    ))
}

fn r218_wall(_: &AuditConfig) -> Result<Outcome1> {
    let f = eca(218);
    let bad = first_failure(bit_words(1), |a| {
        let l = [a[0], 1, 1];
        let r = [1, 1, a[0]];
        (f.eval(&l) != 1 || f.eval(&r) != 1).then(|| format!("a={}", a[0]))
    });
    Ok(Outcome1::from(bad, vec![]))
}

fn zeros_between_ones(n: usize) -> Vec<State> {
    let mut w = vec![0; n + 2];
    w[0] = 1;
    w[n + 1] = 1;
    w
}

fn r218_shrink(cfg: &AuditConfig) -> Result<Outcome1> {
    let f = eca(218);
    let bad = first_failure(2..=cfg.run_len, |&n| {
        let img = image(&f, &zeros_between_ones(n));
        (img != zeros_between_ones(n - 2)).then(|| format!("n={n}: {}", show(&img)))
    });
    Ok(Outcome1::from(bad, vec![("max_n", cfg.run_len as u64)]))
}

fn r218_decider(cfg: &AuditConfig) -> Result<Outcome1> {
    decider_agreement(218, &Rule218Decider, cfg)
}

/// `S_n` for rule 218: Alice holds `1^{n-k} 0^k`, Bob `0^{k+1} 1^{n-k}`.
pub fn fooling_set_218(n: usize) -> FoolingSet {
    let pairs = (0..=n)
        .map(|k| {
            let mut x = vec![1; n - k];
            x.resize(n, 0);
            let mut y = vec![0; k + 1];
            y.resize(n + 1, 1);
            (
                Word::new(2, x).expect("bits"),
                Word::new(2, y).expect("bits"),
            )
        })
        .collect();
    FoolingSet { pairs, value: 0 }
}

fn pred_families(
    rule: &Rule,
    s: &FoolingSet,
    matched: State,
    mismatched: State,
) -> Result<Option<String>> {
    for (a, (x, _)) in s.pairs.iter().enumerate() {
        for (b, (_, y)) in s.pairs.iter().enumerate() {
            let v = pred(rule, &x.concat(y)?)?;
            let want = if a == b { matched } else { mismatched };
            if v != want {
                return Ok(Some(format!("x={x} y={y}: pred {v}, expected {want}")));
            }
        }
    }
    Ok(None)
}

fn fooling_claim(
    rule: &Rule,
    n: usize,
    i: usize,
    s: &FoolingSet,
    bound: u32,
) -> Result<Option<String>> {
    let m = build_matrix(rule, n, i, &Problem::Pred)?;
    let check = check_fooling_set(&m, s)?;
    Ok(match (check.valid, check.bound) {
        (true, Some(b)) if b == bound => None,
        _ => Some(format!("n={n}: {check:?}, expected bound {bound}")),
    })
}

fn r218_fooling(cfg: &AuditConfig) -> Result<Outcome1> {
    let f = eca(218);
    for n in 1..=cfg.fooling_218 {
        let s = fooling_set_218(n);
        if let Some(w) = pred_families(&f, &s, 0, 1)? {
            return Ok(Outcome1::from(
                Some(w),
                vec![("max_n", cfg.fooling_218 as u64)],
            ));
        }
        let bound = crate::commcomp::ceil_log2(n + 1);
        if let Some(w) = fooling_claim(&f, 2 * n + 1, n, &s, bound)? {
            return Ok(Outcome1::from(
                Some(w),
                vec![("max_n", cfg.fooling_218 as u64)],
            ));
        }
    }
    Ok(Outcome1::from(
        None,
        vec![("max_n", cfg.fooling_218 as u64)],
    ))
}

const RULE_218: &[ClaimSpec] = &[
    ClaimSpec {
        id: "218.a-additive-closure",
        statement: "the image of an additive word is additive (01010 maps to 000)",
        check: r218_closure,
    },
    ClaimSpec {
        id: "218.b-flip-sensitivity",
        statement: "on additive neighbourhoods, flipping either outer cell flips the image",
        check: r218_flip,
    },
    ClaimSpec {
        id: "218.c-wall",
        statement: "f(*,1,1) = f(1,1,*) = 1, so 11 is a wall",
        check: r218_wall,
    },
    ClaimSpec {
        id: "218.d-shrinking-runs",
        statement: "10^n1 maps to 10^(n-2)1",
        check: r218_shrink,
    },
    ClaimSpec {
        id: "218.e-invasion-decider",
        statement: "the one-bit invasion decider agrees with simulation",
        check: r218_decider,
    },
    ClaimSpec {
        id: "218.f-fooling-set",
        statement: "S_n is a fooling set for PRED with value 0; mismatched pairs give 1",
        check: r218_fooling,
    },
];

pub fn audit_rule218() -> Result<AuditReport> {
    audit_rule218_with(&AuditConfig::default())
}

pub fn audit_rule218_with(cfg: &AuditConfig) -> Result<AuditReport> {
    run("eca:218", RULE_218, cfg)
}

// ----------------------------------------------------------------- rule 94

/// Rule 94: walls in the background orbit stop everything. Otherwise the
/// first image either stays additive (the difference spreads) or holds odd
/// runs that become walls; each side is then settled at the time its
/// outermost wall forms.
pub struct Rule94Decider;

/// Odd bounded runs that grow into the wall 101: odd 0-runs and odd 1-runs
/// of length at least 3, as `(middle, steps until 101 sits on the middle)`.
fn wall_seeds(cells: &[State]) -> Vec<(usize, usize)> {
    inner_runs(cells)
        .into_iter()
        .filter(|&(_, len, s)| len % 2 == 1 && (s == 0 || len >= 3))
        .map(|(start, len, _)| (start + len / 2, len / 2))
        .collect()
}

impl Rule94Decider {
    /// Whether the difference outside the wall centred at `mid` (formed at
    /// time `at`) is ever nonzero; `dir` is -1 for the left side.
    fn side_leaks(
        orbit: &OrbitSignature,
        rule: &Rule,
        c1: &PerturbedConfig,
        mid: i64,
        at: usize,
        dir: i64,
    ) -> bool {
        let mut c = c1.clone();
        for t in 1..at {
            c = step_perturbed_with(rule, &c, orbit.at(t + 1).clone());
        }
        let (lo, hi) = c
            .extent()
            .expect("walls differ from an additive background");
        let outer = mid + 2 * dir;
        let differs = if dir < 0 { lo <= outer } else { hi >= outer };
        let edge = mid + dir;
        differs || (at..at + orbit.preperiod + orbit.period).any(|t| orbit.at(t).at(edge) == 0)
    }
}

impl InvasionDecider for Rule94Decider {
    fn name(&self) -> &str {
        "rule-94"
    }

    fn applies_to(&self, rule: &Rule) -> bool {
        is_rule(rule, 94)
    }

    fn decide(&self, rule: &Rule, u: &CyclicWord, x: &Word) -> Result<Option<(Outcome, String)>> {
        let p = PerturbedConfig::instance(u.clone(), x.clone())?;
        let bg1 = step_cyclic(rule, u)?;
        if !additive94_cyclic(bg1.cells()) {
            return Ok(Some((
                Outcome::NoInvasion,
                "the background orbit contains the wall 101".into(),
            )));
        }
        let c1 = step_perturbed_with(rule, &p, bg1);
        let Some((lo, hi)) = c1.extent() else {
            return Ok(Some((
                Outcome::NoInvasion,
                "the difference vanishes after one step".into(),
            )));
        };
        let margin = 2 * u.len() as i64 + 3;
        let from = lo - margin;
        let cells = c1.segment(from, hi + margin);
        if inner_runs(&cells).iter().all(|&(_, len, _)| len % 2 == 0) {
            return Ok(Some((
                Outcome::Invasion,
                "the first image is additive and differs".into(),
            )));
        }
        let seeds = wall_seeds(&cells);
        let (Some(&(left, lt)), Some(&(right, rt))) = (seeds.first(), seeds.last()) else {
            return Ok(None);
        };
        let orbit = background_orbit(rule, u)?;
        let left_leaks = Self::side_leaks(&orbit, rule, &c1, from + left as i64, 1 + lt, -1);
        let right_leaks = Self::side_leaks(&orbit, rule, &c1, from + right as i64, 1 + rt, 1);
        Ok(Some(match (left_leaks, right_leaks) {
            (false, false) => (
                Outcome::NoInvasion,
                "the outermost walls enclose every difference".into(),
            ),
            _ => (
                Outcome::Invasion,
                "a difference escapes past an outermost wall".into(),
            ),
        }))
    }
}

fn r94_closure(cfg: &AuditConfig) -> Result<Outcome1> {
    let f = eca(94);
    let bad = first_failure(words_up_to(3, cfg.word_len_94), |w| {
        let img = image(&f, w);
        (additive94_word(w) && !additive94_word(&img))
            .then(|| format!("{} -> {}", show(w), show(&img)))
    });
    Ok(Outcome1::from(
        bad,
        vec![("max_len", cfg.word_len_94 as u64)],
    ))
}

fn r94_flip(_: &AuditConfig) -> Result<Outcome1> {
    let f94 = eca(94);
    let f90 = eca(90);
    let bad = flip_sensitivity(94, additive94_word, true).or_else(|| {
        first_failure(bit_words(3), |w| {
            (additive94_word(w) && f94.eval(w) != f90.eval(w))
                .then(|| format!("{} differs from rule 90", show(w)))
        })
    });
    Ok(Outcome1::from(bad, vec![]))
}

fn r94_stable(_: &AuditConfig) -> Result<Outcome1> {
    let f = eca(94);
    let bad = first_failure(bit_words(2), |c| {
        let w = [c[0], 1, 0, 1, c[1]];
        let img = image(&f, &w);
        (img != [1, 0, 1]).then(|| format!("{} -> {}", show(&w), show(&img)))
    });
    Ok(Outcome1::from(bad, vec![]))
}

fn ones_between_zeros(n: usize) -> Vec<State> {
    let mut w = vec![1; n + 2];
    w[0] = 0;
    w[n + 1] = 0;
    w
}

fn r94_shrink(cfg: &AuditConfig) -> Result<Outcome1> {
    let f = eca(94);
    let max = cfg.word_len_94.saturating_sub(2);
    let bad = first_failure(2..=max, |&n| {
        let want = zeros_between_ones(n - 2);
        let a = image(&f, &zeros_between_ones(n));
        let b = image(&f, &ones_between_zeros(n));
        if a != want {
            Some(format!("1 0^{n} 1 -> {}", show(&a)))
        } else if b != want {
            Some(format!("0 1^{n} 0 -> {}", show(&b)))
        } else {
            None
        }
    });
    Ok(Outcome1::from(bad, vec![("max_n", max as u64)]))
}

fn r94_preimage(_: &AuditConfig) -> Result<Outcome1> {
    let f = eca(94);
    let bad = first_failure(bit_words(5), |w| {
        (image(&f, w) == [0, 1, 0] && !contains(w, &[1, 0, 1])).then(|| show(w))
    });
    Ok(Outcome1::from(bad, vec![]))
}

fn r94_timing(cfg: &AuditConfig) -> Result<Outcome1> {
    let f = eca(94);
    let max_t = cfg.word_len_94.saturating_sub(3) / 2;
    let bad = first_failure(0..=max_t, |&t| {
        let a = zeros_between_ones(2 * t + 1);
        let b = ones_between_zeros(2 * t + 3);
        if iterate(&f, &a, t) != [1, 0, 1] {
            return Some(format!("1 0^{} 1 after {t} steps", 2 * t + 1));
        }
        if b.len() <= cfg.word_len_94 && iterate(&f, &b, t + 1) != [1, 0, 1] {
            return Some(format!("0 1^{} 0 after {} steps", 2 * t + 3, t + 1));
        }
        None
    });
    Ok(
        Outcome1::from(bad, vec![("max_len", cfg.word_len_94 as u64)])
            .note("the wall sits at the middle of the seed after t steps (t+1 for a 1-run)"),
    )
}

fn r94_wall_iff(cfg: &AuditConfig) -> Result<Outcome1> {
    let f = eca(94);
    let words: Vec<CyclicWord> = cyclic_up_to(cfg.word_len_94).collect();
    let bad = words
        .par_iter()
        .map(|u| {
            let orbit = background_orbit(&f, u)?;
            let wall = (0..orbit.preperiod + orbit.period)
                .any(|t| contains_cyclic(orbit.at(t).cells(), &[1, 0, 1]));
            let first = step_cyclic(&f, u)?;
            Ok((wall == additive94_cyclic(first.cells()))
                .then(|| format!("u={u}: wall in orbit = {wall}")))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(Outcome1::from(
        bad,
        vec![("max_len", cfg.word_len_94 as u64)],
    ))
}

fn r94_decider(cfg: &AuditConfig) -> Result<Outcome1> {
    decider_agreement(94, &Rule94Decider, cfg)
}

const RULE_94: &[ClaimSpec] = &[
    ClaimSpec {
        id: "94.a-additive-closure",
        statement: "the image of a word with even inner runs has even inner runs",
        check: r94_closure,
    },
    ClaimSpec {
        id: "94.b-restricted-bipermutive",
        statement: "on additive neighbourhoods the rule equals rule 90 and is bi-permutative",
        check: r94_flip,
    },
    ClaimSpec {
        id: "94.c-wall-101",
        statement: "101 is stable under iteration",
        check: r94_stable,
    },
    ClaimSpec {
        id: "94.d-shrinking-runs",
        statement: "10^n1 and 01^n0 both map to 10^(n-2)1",
        check: r94_shrink,
    },
    ClaimSpec {
        id: "94.e-preimage-010",
        statement: "every length-5 preimage of 010 contains 101",
        check: r94_preimage,
    },
    ClaimSpec {
        id: "94.f-wall-timing",
        statement: "10^(2t+1)1 becomes 101 after t steps and 01^(2t+3)0 after t+1",
        check: r94_timing,
    },
    ClaimSpec {
        id: "94.g-wall-iff-nonadditive",
        statement: "the orbit of p_u contains 101 iff F(p_u) is not additive",
        check: r94_wall_iff,
    },
    ClaimSpec {
        id: "94.h-invasion-decider",
        statement: "the wall-seed invasion decider agrees with simulation",
        check: r94_decider,
    },
];

pub fn audit_rule94() -> Result<AuditReport> {
    audit_rule94_with(&AuditConfig::default())
}

pub fn audit_rule94_with(cfg: &AuditConfig) -> Result<AuditReport> {
    run("eca:94", RULE_94, cfg)
}

// ----------------------------------------------------------------- rule 33

fn r33_square(_: &AuditConfig) -> Result<Outcome1> {
    let f = eca(33);
    let bad = first_failure(bit_words(7), |w| {
        if contains(w, &[1, 0, 1]) || contains(w, &[1, 0, 0, 1]) {
            return None;
        }
        let img = iterate(&f, w, 2);
        (img != w[2..5]).then(|| format!("{} -> {}", show(w), show(&img)))
    });
    Ok(Outcome1::from(bad, vec![]))
}

fn r33_antecedent(_: &AuditConfig) -> Result<Outcome1> {
    let f = eca(33);
    let bad = first_failure(bit_words(5), |w| {
        (image(&f, w) == [1, 0, 1] && w[..] != [1, 0, 1, 0, 1]).then(|| show(w))
    });
    Ok(Outcome1::from(bad, vec![]))
}

fn r33_period(cfg: &AuditConfig) -> Result<Outcome1> {
    let f = eca(33);
    let words: Vec<CyclicWord> = cyclic_up_to(cfg.cycle_33).collect();
    let bad = words
        .par_iter()
        .map(|u| {
            let (t0, lam) = cycle_length(&f, u)?;
            let ok = lam <= 2 && t0 <= u.len() / 2 + 1;
            Ok((!ok).then(|| format!("u={u}: preperiod {t0}, period {lam}")))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(Outcome1::from(
        bad,
        vec![
            ("max_len", cfg.cycle_33 as u64),
            ("words", words.len() as u64),
        ],
    ))
}

/// `S_n` for rule 33: Alice `1^{n-2k}(01)^k 0`, Bob `(10)^k 1^{n-2k}`,
/// `0 <= k < n/2`.
pub fn fooling_set_33(n: usize) -> FoolingSet {
    let pairs = (0..n / 2)
        .map(|k| {
            let mut x = vec![1; n - 2 * k];
            for _ in 0..k {
                x.extend([0, 1]);
            }
            x.push(0);
            let mut y = Vec::new();
            for _ in 0..k {
                y.extend([1, 0]);
            }
            y.resize(n, 1);
            (
                Word::new(2, x).expect("bits"),
                Word::new(2, y).expect("bits"),
            )
        })
        .collect();
    FoolingSet {
        pairs,
        value: (n % 2) as State,
    }
}

fn r33_families(cfg: &AuditConfig) -> Result<Outcome1> {
    let f = eca(33);
    for n in 1..=cfg.fooling_33 {
        let v = (n % 2) as State;
        if let Some(w) = pred_families(&f, &fooling_set_33(n), v, 1 - v)? {
            return Ok(Outcome1::from(
                Some(format!("n={n}: {w}")),
                vec![("max_n", cfg.fooling_33 as u64)],
            ));
        }
    }
    Ok(Outcome1::from(None, vec![("max_n", cfg.fooling_33 as u64)]))
}

fn r33_fooling(cfg: &AuditConfig) -> Result<Outcome1> {
    let f = eca(33);
    for n in 2..=cfg.fooling_33 {
        let s = fooling_set_33(n);
        let bound = crate::commcomp::ceil_log2(s.pairs.len());
        if let Some(w) = fooling_claim(&f, 2 * n + 1, n + 1, &s, bound)? {
            return Ok(Outcome1::from(
                Some(w),
                vec![("max_n", cfg.fooling_33 as u64)],
            ));
        }
    }
    Ok(Outcome1::from(None, vec![("max_n", cfg.fooling_33 as u64)]))
}

const RULE_33: &[ClaimSpec] = &[
    ClaimSpec {
        id: "33.a-square-identity",
        statement: "F^2 fixes the centre of every length-7 word without 101 or 1001",
        check: r33_square,
    },
    ClaimSpec {
        id: "33.b-antecedent-101",
        statement: "10101 is the only antecedent of 101",
        check: r33_antecedent,
    },
    ClaimSpec {
        id: "33.c-period-two",
        statement: "every cyclic word has period at most 2 after at most n/2+1 steps",
        check: r33_period,
    },
    ClaimSpec {
        id: "33.d-pred-families",
        statement: "matched pairs of S_n give n mod 2, mismatched pairs the other value",
        check: r33_families,
    },
    ClaimSpec {
        id: "33.e-fooling-set",
        statement: "S_n is a fooling set for PRED",
        check: r33_fooling,
    },
];

pub fn audit_rule33() -> Result<AuditReport> {
    audit_rule33_with(&AuditConfig::default())
}

pub fn audit_rule33_with(cfg: &AuditConfig) -> Result<AuditReport> {
    run("eca:33", RULE_33, cfg)
}

// ---------------------------------------------------------- generic audits

fn single(subject: String, id: &str, statement: &str, out: Outcome1) -> AuditReport {
    let status = if out.counterexample.is_some() {
        ClaimStatus::Refuted
    } else {
        ClaimStatus::Verified
    };
    AuditReport {
        subject,
        claims: vec![AuditClaim {
            id: id.to_string(),
            statement: statement.to_string(),
            status,
            witness: out.counterexample.or(out.note),
            parameters: out
                .parameters
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }],
    }
}

/// The one-round linear protocol against direct prediction, all words up to
/// `max_len` and all splits.
pub fn audit_linear_protocol(
    rule: &Rule,
    op: &Operator,
    e: State,
    max_len: usize,
) -> Result<AuditReport> {
    if !is_linear(rule, op, e)? {
        return Err(Error::NotLinear);
    }
    let q = rule.states();
    let lens: Vec<usize> = (1..=max_len).collect();
    let bad = lens
        .par_iter()
        .map(|&n| {
            let count = (q as u128).pow(n as u32);
            if count > 1 << 24 {
                return Err(Error::CapExceeded {
                    what: "words in linear protocol audit",
                    size: count,
                    cap: 1 << 24,
                });
            }
            for idx in 0..count as usize {
                let w = Word::from_index(q, n, idx);
                let want = pred(rule, &w)?;
                for i in 0..=n {
                    let got = linear_protocol_pred(rule, op, e, &w, i)?;
                    if got != want {
                        return Ok(Some(format!("w={w} i={i}: protocol {got}, pred {want}")));
                    }
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(single(
        rule.label(),
        "linear-protocol",
        "the one-round protocol computes PRED at every split",
        Outcome1::from(bad, vec![("max_len", max_len as u64)]),
    ))
}

/// `lambda(u) <= k` iff `F^t(p_u) = p_u` for some `1 <= t <= k`, over all
/// cyclic words up to `max_len` and `k <= k_max`.
pub fn audit_reversible_cycle(rule: &Rule, k_max: usize, max_len: usize) -> Result<AuditReport> {
    if !is_reversible(rule)? {
        return Err(Error::NotReversible);
    }
    let q = rule.states();
    let mut words = Vec::new();
    for n in 1..=max_len {
        let count = (q as u128).pow(n as u32);
        if count > 1 << 22 {
            return Err(Error::CapExceeded {
                what: "words in cycle audit",
                size: count,
                cap: 1 << 22,
            });
        }
        words.extend(
            (0..count as usize)
                .map(|i| CyclicWord::new(Word::from_index(q, n, i)).expect("nonempty")),
        );
    }
    let bad = words
        .par_iter()
        .map(|u| {
            for k in 1..=k_max {
                let a = cycle_pred(rule, k, u)?;
                let b = returns_within(rule, k, u)?;
                if a != b {
                    return Ok(Some(format!("u={u} k={k}: cycle {a}, return {b}")));
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(single(
        rule.label(),
        "reversible-cycle",
        "a bounded cycle length is the same as a bounded return time",
        Outcome1::from(
            bad,
            vec![
                ("k_max", k_max as u64),
                ("max_len", max_len as u64),
                ("words", words.len() as u64),
            ],
        ),
    ))
}

/// Subjects accepted by [`audit`].
pub const SUBJECTS: &[&str] = &["eca:218", "eca:94", "eca:33"];

fn specs_for(subject: &str) -> Result<&'static [ClaimSpec]> {
    match subject {
        "eca:218" | "218" => Ok(RULE_218),
        "eca:94" | "94" => Ok(RULE_94),
        "eca:33" | "33" => Ok(RULE_33),
        _ => Err(Error::InvalidRule(format!("no audit for {subject}"))),
    }
}

/// Runs the structural audit of one of [`SUBJECTS`].
pub fn audit(subject: &str, cfg: &AuditConfig) -> Result<AuditReport> {
    let specs = specs_for(subject)?;
    run(
        &format!("eca:{}", subject.trim_start_matches("eca:")),
        specs,
        cfg,
    )
}

/// Runs a single claim of a subject audit by id.
pub fn audit_claim(subject: &str, id: &str, cfg: &AuditConfig) -> Result<AuditReport> {
    let spec = specs_for(subject)?
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::InvalidRule(format!("no claim {id} for {subject}")))?;
    run(
        &format!("eca:{}", subject.trim_start_matches("eca:")),
        std::slice::from_ref(spec),
        cfg,
    )
}

/// Claim ids of a subject audit.
pub fn claim_ids(subject: &str) -> Vec<&'static str> {
    specs_for(subject).map_or_else(|_| Vec::new(), |specs| specs.iter().map(|s| s.id).collect())
}
