//! Constructed automata with maximal complexity, their instance encoders, and
//! a catalogue of elementary rules with executable claims.

use serde::Serialize;

use crate::algebra::{coupled_product, Layers};
use crate::analysis::{is_linear, is_reversible, Operator};
use crate::commcomp::{build_matrix, Problem};
use crate::error::{Error, Result};
use crate::problems::{cycle_length, invasion, pred, InvasionBudget, Outcome};
use crate::rule::{Rule, State};
use crate::sim::{step_cyclic, PerturbedConfig};
use crate::word::{CyclicWord, Word};

/// A problem instance produced by an encoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Word(Word),
    Cyclic(CyclicWord),
    Perturbed(PerturbedConfig),
}

/// How a gallery entry maps `(x, y)` bit vectors to configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Encoder {
    /// Inner product to a prediction word.
    InnerProduct,
    /// Disjointness to an invasion instance over `q0`.
    DisjointnessInvasion,
    /// Disjointness to a cyclic word for the cycle problem.
    DisjointnessCycle,
}

impl Encoder {
    pub fn encode(&self, x: &[bool], y: &[bool]) -> Result<Instance> {
        Ok(match self {
            Encoder::InnerProduct => Instance::Word(ip_encode(x, y)?),
            Encoder::DisjointnessInvasion => Instance::Perturbed(invasion_encode(x, y)?),
            Encoder::DisjointnessCycle => Instance::Cyclic(cycle_encode(x, y)?),
        })
    }
}

/// Result of running one claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimOutcome {
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub counterexample: Option<String>,
}

/// A checkable statement about an entry; `Ok(None)` means it holds.
#[derive(Clone, Copy)]
pub struct Claim {
    pub id: &'static str,
    pub description: &'static str,
    pub check: fn(&Rule) -> Result<Option<String>>,
}

pub struct GalleryEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub rule: Rule,
    pub encoder: Option<Encoder>,
    pub claims: Vec<Claim>,
}

impl GalleryEntry {
    /// Runs every claim; errors count as failures.
    pub fn check(&self) -> Vec<ClaimOutcome> {
        self.claims
            .iter()
            .map(|c| {
                let (passed, counterexample) = match (c.check)(&self.rule) {
                    Ok(None) => (true, None),
                    Ok(Some(cx)) => (false, Some(cx)),
                    Err(e) => (false, Some(format!("error: {e}"))),
                };
                ClaimOutcome {
                    id: c.id,
                    description: c.description,
                    passed,
                    counterexample,
                }
            })
            .collect()
    }
}

fn check_lengths(x: &[bool], y: &[bool]) -> Result<()> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::MalformedInstance(format!(
            "inputs must have equal nonzero length (got {} and {})",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// All bit vectors of length `n`, `x_1` taken from the highest bit.
pub fn bit_vectors(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1usize << n).map(move |v| (0..n).map(|i| (v >> (n - 1 - i)) & 1 == 1).collect())
}

fn fmt_bits(b: &[bool]) -> String {
    b.iter().map(|&v| if v { '1' } else { '0' }).collect()
}

// ---------------------------------------------------------------------------
// Inner product, prediction

/// Layers of the prediction-hard automaton: left circulation, right
/// circulation, test.
pub fn ip_layers() -> Layers {
    Layers::new(vec![2, 2, 2], 8).expect("8 states")
}

/// Radius 1, 8 states: the left component shifts left, the right component
/// shifts right, and the test bit flips when both incoming circulation bits
/// are 1.
pub fn ip_hard_rule() -> Rule {
    coupled_product(&ip_layers(), 1, |n| {
        let l = n[2][0];
        let r = n[0][1];
        vec![l, r, n[1][2] ^ (l & r)]
    })
    .expect("valid coupling")
    .with_name("gallery:ip-hard")
}

/// `X_1 ... X_n Z Y_n ... Y_1` with `x` on the right-moving component and
/// `y` on the left-moving one.
pub fn ip_encode(x: &[bool], y: &[bool]) -> Result<Word> {
    check_lengths(x, y)?;
    let layers = ip_layers();
    let mut cells: Vec<State> = x
        .iter()
        .map(|&b| layers.encode(&[0, b as State, 0]))
        .collect();
    cells.push(0);
    cells.extend(y.iter().rev().map(|&b| layers.encode(&[b as State, 0, 0])));
    Word::new(8, cells)
}

/// Test component of a prediction-hard state.
pub fn ip_decode(s: State) -> bool {
    ip_layers().project(s, 2) == 1
}

pub fn ip_reduction_counterexample(rule: &Rule, max_n: usize) -> Result<Option<String>> {
    for n in 1..=max_n {
        for x in bit_vectors(n) {
            for y in bit_vectors(n) {
                let want = x.iter().zip(&y).filter(|(a, b)| **a && **b).count() % 2 == 1;
                let got = ip_decode(pred(rule, &ip_encode(&x, &y)?)?);
                if got != want {
                    return Ok(Some(format!(
                        "x={} y={}: pred {got}, expected {want}",
                        fmt_bits(&x),
                        fmt_bits(&y)
                    )));
                }
            }
        }
    }
    Ok(None)
}

pub fn build_ip_hard() -> GalleryEntry {
    GalleryEntry {
        id: "ip-hard",
        description: "reversible radius-1 automaton whose prediction problem embeds inner product",
        rule: ip_hard_rule(),
        encoder: Some(Encoder::InnerProduct),
        claims: vec![
            Claim {
                id: "reversible",
                description: "the global map is injective",
                check: reversible_claim,
            },
            Claim {
                id: "ip-reduction",
                description: "pred(encode(x,y)) = <x,y> mod 2 for all n <= 4",
                check: |r| ip_reduction_counterexample(r, 4),
            },
        ],
    }
}

fn reversible_claim(r: &Rule) -> Result<Option<String>> {
    Ok((!is_reversible(r)?).then(|| "pair graph has a non-diagonal bi-infinite path".to_string()))
}

// ---------------------------------------------------------------------------
// Disjointness, invasion

/// Circulation value of a wall.
pub const WALL: State = 4;

/// Layers of `G`: flag `{0,1}`, circulation (`top*2+bottom`, or [`WALL`]),
/// test (`top*2+bottom`).
pub fn g_layers() -> Layers {
    Layers::new(vec![2, 5, 4], 40).expect("40 states")
}

fn g_top(c: State) -> State {
    c >> 1
}

fn g_bottom(c: State) -> State {
    c & 1
}

/// The 40-state automaton `G`.
///
/// Flag: identity. Circulation: walls are fixed; the top bit moves right and
/// the bottom bit moves left, turning around next to a wall. Test: the top
/// bit moves right and the bottom bit moves left, each inverted when it
/// leaves a cell with flag 1 and circulation `(1,1)`. The test layer ignores
/// walls.
pub fn invasion_hard_rule() -> Rule {
    coupled_product(&g_layers(), 1, |n| {
        let (left, me, right) = (&n[0], &n[1], &n[2]);
        let circ = if me[1] == WALL {
            WALL
        } else {
            let top = if left[1] == WALL {
                g_bottom(me[1])
            } else {
                g_top(left[1])
            };
            let bottom = if right[1] == WALL {
                g_top(me[1])
            } else {
                g_bottom(right[1])
            };
            top * 2 + bottom
        };
        let fires = |c: &Vec<State>| (c[0] == 1 && c[1] == 3) as State;
        let test_top = (left[2] >> 1) ^ fires(left);
        let test_bottom = (right[2] & 1) ^ fires(right);
        vec![me[0], circ, test_top * 2 + test_bottom]
    })
    .expect("valid coupling")
    .with_name("gallery:invasion-hard")
}

/// `^w q0 M X_n ... X_1 T Y_1 ... Y_n M q0^w` over the background `q0`.
pub fn invasion_encode(x: &[bool], y: &[bool]) -> Result<PerturbedConfig> {
    check_lengths(x, y)?;
    let l = g_layers();
    let wall = l.encode(&[0, WALL, 0]);
    let mut cells = vec![wall];
    cells.extend(x.iter().rev().map(|&b| l.encode(&[0, (b as State) * 2, 0])));
    cells.push(l.encode(&[1, 0, 0]));
    cells.extend(y.iter().map(|&b| l.encode(&[0, b as State, 0])));
    cells.push(wall);
    PerturbedConfig::instance(
        CyclicWord::new(Word::new(40, vec![0])?)?,
        Word::new(40, cells)?,
    )
}

pub fn invasion_reduction_counterexample(
    rule: &Rule,
    max_n: usize,
    budget: InvasionBudget,
) -> Result<Option<String>> {
    for n in 1..=max_n {
        for x in bit_vectors(n) {
            for y in bit_vectors(n) {
                let want = x.iter().zip(&y).any(|(a, b)| *a && *b);
                let inst = invasion_encode(&x, &y)?;
                let v = invasion(rule, inst.background(), inst.window(), budget)?;
                let ok = match v.outcome {
                    Outcome::Invasion => want,
                    Outcome::NoInvasion => !want,
                    Outcome::Unknown => false,
                };
                if !ok {
                    return Ok(Some(format!(
                        "x={} y={}: verdict {:?}, expected invasion={want}",
                        fmt_bits(&x),
                        fmt_bits(&y),
                        v.outcome
                    )));
                }
            }
        }
    }
    Ok(None)
}

/// Between two walls the number of circulating 1 bits never changes.
pub fn circulation_counterexample(
    rule: &Rule,
    max_width: usize,
    steps: usize,
) -> Result<Option<String>> {
    let l = g_layers();
    let wall = l.encode(&[0, WALL, 0]);
    for inner in 1..max_width.saturating_sub(1) {
        for idx in 0..4usize.pow(inner as u32) {
            let mut cells = vec![wall];
            let mut circ = vec![0 as State; inner];
            crate::rule::decode_index(idx, 4, &mut circ);
            cells.extend(circ.iter().map(|&c| l.encode(&[0, c, 0])));
            let ones = |c: &CyclicWord| -> u32 {
                c.cells()
                    .iter()
                    .map(|&s| l.project(s, 1))
                    .filter(|&c| c != WALL)
                    .map(|c| (c as u32).count_ones())
                    .sum()
            };
            let mut c = CyclicWord::new(Word::new(40, cells)?)?;
            let start = ones(&c);
            for t in 1..=steps {
                c = step_cyclic(rule, &c)?;
                if ones(&c) != start {
                    return Ok(Some(format!("zone {circ:?} changes bit count at step {t}")));
                }
            }
        }
    }
    Ok(None)
}

pub fn build_invasion_hard() -> GalleryEntry {
    GalleryEntry {
        id: "invasion-hard",
        description: "reversible 40-state automaton G whose invasion problem embeds disjointness",
        rule: invasion_hard_rule(),
        encoder: Some(Encoder::DisjointnessInvasion),
        claims: vec![
            Claim {
                id: "reversible",
                description: "the global map is injective",
                check: reversible_claim,
            },
            Claim {
                id: "disj-reduction",
                description: "invasion iff some x_i = y_i = 1, all n <= 3",
                check: |r| {
                    invasion_reduction_counterexample(
                        r,
                        3,
                        InvasionBudget {
                            max_steps: 500,
                            max_width: 1000,
                        },
                    )
                },
            },
            Claim {
                id: "circulation-conserved",
                description: "walls conserve circulating bits, zones of width <= 6 for 20 steps",
                check: |r| circulation_counterexample(r, 6, 20),
            },
            Claim {
                id: "wall-test-completion",
                description: "implementation-defined: the test layer crosses walls unchanged",
                check: |r| {
                    let l = g_layers();
                    let before = CyclicWord::new(Word::new(
                        40,
                        vec![l.encode(&[0, WALL, 2]), l.encode(&[0, WALL, 0])],
                    )?)?;
                    let after = step_cyclic(r, &before)?;
                    let want = vec![l.encode(&[0, WALL, 0]), l.encode(&[0, WALL, 2])];
                    Ok((after.cells() != want).then(|| format!("{before} -> {after}")))
                },
            },
        ],
    }
}

// ---------------------------------------------------------------------------
// Disjointness, cycle length

/// The spreading state of the cycle-hard automaton's layers.
pub const KILL: State = 2;

pub fn cycle_layers() -> Layers {
    Layers::new(vec![3, 3, 3], 27).expect("27 states")
}

/// 27 states over three `{0,1,K}` layers: `K` anywhere in the neighbourhood
/// yields `(K,K,K)`; otherwise layer 1 shifts left, layer 2 shifts right, and
/// the control layer keeps its value unless the cell reads `(1,1,1)`, which
/// turns it into `K`.
pub fn cycle_hard_rule() -> Rule {
    coupled_product(&cycle_layers(), 1, |n| {
        if n.iter().flatten().any(|&c| c == KILL) {
            return vec![KILL; 3];
        }
        let me = &n[1];
        let control = if me.iter().all(|&c| c == 1) {
            KILL
        } else {
            me[2]
        };
        vec![n[2][0], n[0][1], control]
    })
    .expect("valid coupling")
    .with_name("gallery:cycle-hard")
}

/// Cyclic word of length `4n+2`: `x_n ... x_1` on layer 1, a control 1, then
/// `y_1 ... y_n` on layer 2, followed by `2n+1` empty cells.
pub fn cycle_encode(x: &[bool], y: &[bool]) -> Result<CyclicWord> {
    check_lengths(x, y)?;
    let n = x.len();
    let l = cycle_layers();
    let mut cells = vec![0 as State; 4 * n + 2];
    for (i, &b) in x.iter().enumerate() {
        cells[n - 1 - i] = l.encode(&[b as State, 0, 0]);
    }
    cells[n] = l.encode(&[0, 0, 1]);
    for (i, &b) in y.iter().enumerate() {
        cells[n + 1 + i] = l.encode(&[0, b as State, 0]);
    }
    CyclicWord::new(Word::new(27, cells)?)
}

pub fn cycle_reduction_counterexample(rule: &Rule, max_n: usize) -> Result<Option<String>> {
    for n in 1..=max_n {
        for x in bit_vectors(n) {
            for y in bit_vectors(n) {
                let meets = x.iter().zip(&y).any(|(a, b)| *a && *b);
                let empty = !x.contains(&true) && !y.contains(&true);
                let (_, lambda) = cycle_length(rule, &cycle_encode(&x, &y)?)?;
                let ok = if meets || empty {
                    lambda == 1
                } else {
                    lambda >= n && lambda > 1
                };
                if !ok {
                    return Ok(Some(format!(
                        "x={} y={}: lambda {lambda}",
                        fmt_bits(&x),
                        fmt_bits(&y)
                    )));
                }
            }
        }
    }
    Ok(None)
}

pub fn build_cycle_hard() -> GalleryEntry {
    GalleryEntry {
        id: "cycle-hard",
        description: "27-state automaton whose cycle-length problem embeds disjointness",
        rule: cycle_hard_rule(),
        encoder: Some(Encoder::DisjointnessCycle),
        claims: vec![
            Claim {
                id: "states",
                description: "three {0,1,K} layers, 27 states",
                check: |r| Ok((r.states() != 27).then(|| format!("{} states", r.states()))),
            },
            Claim {
                id: "disj-reduction",
                description:
                    "lambda = 1 iff the sets meet or both are empty, else lambda >= n, all n <= 4",
                check: |r| cycle_reduction_counterexample(r, 4),
            },
        ],
    }
}

// ---------------------------------------------------------------------------
// Elementary rules

fn elementary(code: u32, description: &'static str, claims: Vec<Claim>) -> GalleryEntry {
    GalleryEntry {
        id: ELEMENTARY_IDS[ELEMENTARY_CODES
            .iter()
            .position(|&c| c == code)
            .expect("listed code")],
        description,
        rule: Rule::from_wolfram(code).expect("valid code"),
        encoder: None,
        claims,
    }
}

const ELEMENTARY_CODES: [u32; 8] = [110, 178, 218, 94, 33, 90, 170, 204];
const ELEMENTARY_IDS: [&str; 8] = [
    "eca:110", "eca:178", "eca:218", "eca:94", "eca:33", "eca:90", "eca:170", "eca:204",
];

fn linear_claim(r: &Rule) -> Result<Option<String>> {
    Ok((!is_linear(r, &Operator::xor(), 0)?).then(|| "not xor-linear".to_string()))
}

pub fn elementary_entries() -> Vec<GalleryEntry> {
    vec![
        elementary(
            110,
            "rule 110",
            vec![Claim {
                id: "pred-1101001",
                description: "pred(1101001) = 1",
                check: |r| Ok((pred(r, &Word::bits("1101001"))? != 1).then(|| "apex is 0".into())),
            }],
        ),
        elementary(
            178,
            "rule 178",
            vec![Claim {
                id: "matrix-13-6",
                description: "the split matrix for n=13, i=6 is 64x128",
                check: |r| {
                    let m = build_matrix(r, 13, 6, &Problem::Pred)?;
                    Ok(((m.rows(), m.cols()) != (64, 128))
                        .then(|| format!("{}x{}", m.rows(), m.cols())))
                },
            }],
        ),
        elementary(
            218,
            "rule 218",
            vec![
                Claim {
                    id: "wall-11",
                    description: "f(*,1,1) = f(1,1,*) = 1",
                    check: |r| {
                        let bad =
                            (0..2).find(|&a| r.eval(&[a, 1, 1]) != 1 || r.eval(&[1, 1, a]) != 1);
                        Ok(bad.map(|a| format!("fails with free cell {a}")))
                    },
                },
                Claim {
                    id: "one-bit-invasion",
                    description: "invasion on the additive background 0 from a single 1",
                    check: |r| {
                        let v = invasion(
                            r,
                            &CyclicWord::bits("0"),
                            &Word::bits("1"),
                            InvasionBudget::default(),
                        )?;
                        Ok((v.outcome != Outcome::Invasion).then(|| format!("{:?}", v.outcome)))
                    },
                },
            ],
        ),
        elementary(
            94,
            "rule 94",
            vec![Claim {
                id: "wall-101",
                description: "101 is stable: f(x101y) contains 101 in the middle",
                check: |r| {
                    let bad = (0..4u16).find(|&v| {
                        let w = Word::new(2, vec![v >> 1, 1, 0, 1, v & 1]).expect("binary");
                        crate::sim::apply_local(r, &w).expect("long enough").cells() != [1, 0, 1]
                    });
                    Ok(bad.map(|v| format!("context {v:02b}")))
                },
            }],
        ),
        elementary(
            33,
            "rule 33",
            vec![Claim {
                id: "period-2",
                description: "lambda(u) <= 2 for all periods of length <= 10",
                check: |r| {
                    for len in 1..=10 {
                        for idx in 0..1usize << len {
                            let u = CyclicWord::new(Word::from_index(2, len, idx))?;
                            let (_, lambda) = cycle_length(r, &u)?;
                            if lambda > 2 {
                                return Ok(Some(format!("u={u} lambda={lambda}")));
                            }
                        }
                    }
                    Ok(None)
                },
            }],
        ),
        elementary(
            90,
            "rule 90",
            vec![Claim {
                id: "xor-linear",
                description: "linear for xor with neutral 0",
                check: linear_claim,
            }],
        ),
        elementary(
            170,
            "rule 170, the shift",
            vec![
                Claim {
                    id: "reversible",
                    description: "the global map is injective",
                    check: reversible_claim,
                },
                Claim {
                    id: "canonical",
                    description: "radius 1 is minimal",
                    check: |r| Ok((!r.is_canonical()).then(|| "not canonical".into())),
                },
            ],
        ),
        elementary(
            204,
            "rule 204, the identity",
            vec![
                Claim {
                    id: "reversible",
                    description: "the global map is injective",
                    check: reversible_claim,
                },
                Claim {
                    id: "radius-0",
                    description: "canonical form has radius 0",
                    check: |r| {
                        Ok(
                            (r.canonicalize().radius() != 0)
                                .then(|| "radius stays positive".into()),
                        )
                    },
                },
                Claim {
                    id: "xor-linear",
                    description: "linear for xor with neutral 0",
                    check: linear_claim,
                },
            ],
        ),
    ]
}

/// Every entry in a fixed order.
pub fn all_entries() -> Vec<GalleryEntry> {
    let mut out = vec![build_ip_hard(), build_invasion_hard(), build_cycle_hard()];
    out.extend(elementary_entries());
    out
}

pub fn entry(id: &str) -> Option<GalleryEntry> {
    all_entries().into_iter().find(|e| e.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ip_small_cases() {
        let r = ip_hard_rule();
        assert_eq!(r.states(), 8);
        assert_eq!(r.radius(), 1);
        assert!(ip_decode(
            pred(&r, &ip_encode(&[true], &[true]).unwrap()).unwrap()
        ));
        assert!(!ip_decode(
            pred(
                &r,
                &ip_encode(&[false, false, false], &[true, false, true]).unwrap()
            )
            .unwrap()
        ));
        assert_eq!(ip_reduction_counterexample(&r, 3).unwrap(), None);
        assert!(ip_encode(&[true], &[]).is_err());
    }

    #[test]
    fn g_layout() {
        let g = invasion_hard_rule();
        assert_eq!(g.states(), 40);
        let inst = invasion_encode(&[true, false], &[false, true]).unwrap();
        assert_eq!(inst.width(), 7);
        assert_eq!(inst.offset(), 1);
        let budget = InvasionBudget {
            max_steps: 500,
            max_width: 1000,
        };
        let v = invasion(&g, inst.background(), inst.window(), budget).unwrap();
        assert_eq!(v.outcome, Outcome::NoInvasion);
        let hit = invasion_encode(&[false, true], &[false, true]).unwrap();
        let v = invasion(&g, hit.background(), hit.window(), budget).unwrap();
        assert_eq!(v.outcome, Outcome::Invasion);
    }

    #[test]
    fn g_circulation() {
        assert_eq!(
            circulation_counterexample(&invasion_hard_rule(), 5, 12).unwrap(),
            None
        );
    }

    #[test]
    fn cycle_cases() {
        let r = cycle_hard_rule();
        let lam =
            |x: &[bool], y: &[bool]| cycle_length(&r, &cycle_encode(x, y).unwrap()).unwrap().1;
        assert_eq!(lam(&[true, false], &[true, false]), 1);
        assert_eq!(lam(&[false, false], &[false, false]), 1);
        assert_eq!(lam(&[true, false], &[false, true]), 10);
        assert_eq!(cycle_reduction_counterexample(&r, 3).unwrap(), None);
    }

    #[test]
    fn elementary_claims_pass() {
        for e in elementary_entries() {
            for c in e.check() {
                assert!(c.passed, "{} {}: {:?}", e.id, c.id, c.counterexample);
            }
        }
        assert_eq!(entry("eca:218").unwrap().rule.wolfram_code(), Some(218));
        assert!(entry("nope").is_none());
    }

    #[test]
    fn encoders_dispatch() {
        let inst = Encoder::DisjointnessCycle
            .encode(&[true], &[false])
            .unwrap();
        assert!(matches!(inst, Instance::Cyclic(c) if c.len() == 6));
    }
}
