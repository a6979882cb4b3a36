//! Communication complexity of split problems.

mod exact;
mod matrix;
pub mod netpbm;

pub use exact::{exact_cc, DEFAULT_DEPTH_LIMIT, MAX_CLASSES};
pub use matrix::{PredMatrix, ProblemTag, MAX_MATRIX_ENTRIES};

use serde::{Deserialize, Serialize};

use crate::analysis::{linearity_counterexample, Operator};
use crate::error::{Error, Result};
use crate::problems::{cycle_length, invasion, pred, InvasionBudget, Outcome};
use crate::rule::{Rule, State};
use crate::sim::collapse_cells;
use crate::word::{CyclicWord, Word};

/// A problem whose inputs are words of length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    Pred,
    /// `lambda(xy) <= k` on the cyclic word `xy`.
    Cycle {
        k: usize,
    },
    /// Invasion of `p_u(xy)`.
    Invasion {
        background: CyclicWord,
        budget: InvasionBudget,
    },
}

impl Problem {
    pub fn label(&self) -> String {
        match self {
            Problem::Pred => "pred".into(),
            Problem::Cycle { k } => format!("cycle:{k}"),
            Problem::Invasion { background, .. } => format!("invasion:{background}"),
        }
    }

    fn tag(&self) -> ProblemTag {
        match self {
            Problem::Pred => ProblemTag::Pred,
            Problem::Cycle { k } => ProblemTag::Cycle { k: *k },
            Problem::Invasion { background, .. } => ProblemTag::Invasion {
                background: background.clone(),
            },
        }
    }

    /// Value on the input word `w`.
    pub fn evaluate(&self, rule: &Rule, w: &Word) -> Result<State> {
        match self {
            Problem::Pred => pred(rule, w),
            Problem::Cycle { k } => {
                let c = CyclicWord::new(w.clone())?;
                Ok((cycle_length(rule, &c)?.1 <= *k) as State)
            }
            Problem::Invasion { background, budget } => {
                let v = invasion(rule, background, w, *budget)?;
                match v.outcome {
                    Outcome::Invasion => Ok(1),
                    Outcome::NoInvasion => Ok(0),
                    Outcome::Unknown => Err(Error::UnknownVerdict {
                        steps: v.steps,
                        width: v.width,
                    }),
                }
            }
        }
    }

    fn values(&self, rule: &Rule) -> usize {
        match self {
            Problem::Pred => rule.states(),
            _ => 2,
        }
    }
}

/// `M^{n,i}`: entry `(x, y)` is the problem value on `xy`, rows indexed by
/// the base-`q` value of `x`.
pub fn build_matrix(rule: &Rule, n: usize, i: usize, problem: &Problem) -> Result<PredMatrix> {
    if i > n || n == 0 {
        return Err(Error::Dimension(format!("split {i} of length {n}")));
    }
    let q = rule.states();
    let rows = (q as u128).checked_pow(i as u32).unwrap_or(u128::MAX);
    let cols = (q as u128).checked_pow((n - i) as u32).unwrap_or(u128::MAX);
    matrix::check_size(rows, cols)?;
    if let Problem::Invasion { background, .. } = problem {
        background.period().check_states(q)?;
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let m = match problem {
        Problem::Pred => PredMatrix::from_fn(q, rows, cols, |r, c| {
            let mut cells = vec![0; n];
            crate::rule::decode_index(r, q, &mut cells[..i]);
            crate::rule::decode_index(c, q, &mut cells[i..]);
            Ok(collapse_cells(rule, &cells)[0])
        })?,
        _ => PredMatrix::from_fn(problem.values(rule), rows, cols, |r, c| {
            let x = Word::from_index(q, i, r);
            let y = Word::from_index(q, n - i, c);
            problem.evaluate(rule, &x.concat(&y)?)
        })?,
    };
    Ok(m.with_split(n, i, problem.tag()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneRound {
    pub row_messages: usize,
    pub col_messages: usize,
    pub bits: u32,
}

pub(crate) fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// Distinct rows, distinct columns, and `ceil(log2(min))`.
pub fn one_round_cc(m: &PredMatrix) -> OneRound {
    let row_messages = m.distinct_rows();
    let col_messages = m.distinct_cols();
    OneRound {
        row_messages,
        col_messages,
        bits: ceil_log2(row_messages.min(col_messages)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reference {
    Eq,
    Ip,
    Disj,
}

/// EQ, IP or DISJ on `n`-bit inputs; bit `x_1` is the most significant.
pub fn reference_matrix(kind: Reference, n: usize) -> Result<PredMatrix> {
    if n >= 32 {
        return Err(Error::CapExceeded {
            what: "reference matrix bits",
            size: n as u128,
            cap: 31,
        });
    }
    let side = 1usize << n;
    let m = PredMatrix::from_fn(2, side, side, |x, y| {
        Ok(match kind {
            Reference::Eq => (x == y) as State,
            Reference::Ip => ((x & y).count_ones() % 2) as State,
            Reference::Disj => (x & y == 0) as State,
        })
    })?;
    let name = format!("{kind:?}").to_lowercase();
    Ok(m.with_split(2 * n, n, ProblemTag::Reference { name }))
}

/// Input pairs `(x, y)` all expected to take the value `value`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoolingSet {
    pub pairs: Vec<(Word, Word)>,
    pub value: State,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoolingCheck {
    pub valid: bool,
    /// `ceil(log2 |S|)` when valid.
    pub bound: Option<u32>,
    /// First offending pair index (or pair of indices) when invalid.
    pub violation: Option<(usize, usize)>,
}

/// Checks both fooling-set conditions against `m`.
pub fn check_fooling_set(m: &PredMatrix, s: &FoolingSet) -> Result<FoolingCheck> {
    let mut idx = Vec::with_capacity(s.pairs.len());
    for (x, y) in &s.pairs {
        let (r, c) = (x.index(), y.index());
        let q = x.states();
        let fits = |w: &Word, count: usize| {
            w.states() == q && (q as u128).checked_pow(w.len() as u32) == Some(count as u128)
        };
        if !fits(x, m.rows()) || !fits(y, m.cols()) {
            return Err(Error::Dimension(format!(
                "pair ({x}, {y}) does not index a {}x{} matrix",
                m.rows(),
                m.cols()
            )));
        }
        idx.push((r, c));
    }
    for (k, &(r, c)) in idx.iter().enumerate() {
        if m.entry(r, c) != s.value {
            return Ok(FoolingCheck {
                valid: false,
                bound: None,
                violation: Some((k, k)),
            });
        }
    }
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let (ra, ca) = idx[a];
            let (rb, cb) = idx[b];
            if m.entry(ra, cb) == s.value && m.entry(rb, ca) == s.value {
                return Ok(FoolingCheck {
                    valid: false,
                    bound: None,
                    violation: Some((a, b)),
                });
            }
        }
    }
    Ok(FoolingCheck {
        valid: true,
        bound: Some(ceil_log2(idx.len())),
        violation: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "one-round")]
    OneRound,
    #[serde(rename = "exact")]
    Exact,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-round" => Ok(Method::OneRound),
            "exact" => Ok(Method::Exact),
            _ => Err(Error::Parse(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCost {
    pub i: usize,
    pub bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub messages: Option<usize>,
    pub method: Method,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcReport {
    pub rule: String,
    pub problem: String,
    pub n: usize,
    pub splits: Vec<SplitCost>,
    pub max_bits: u32,
}

impl CcReport {
    /// Checks that `max_bits` is the maximum over the splits.
    pub fn validate(&self) -> Result<()> {
        let max = self.splits.iter().map(|s| s.bits).max().unwrap_or(0);
        if max != self.max_bits {
            return Err(Error::Parse(format!(
                "max_bits {} but splits give {max}",
                self.max_bits
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: CcReport = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }
}

/// Cost of one split.
pub fn split_cost(m: &PredMatrix, i: usize, method: Method) -> Result<SplitCost> {
    Ok(match method {
        Method::OneRound => {
            let o = one_round_cc(m);
            SplitCost {
                i,
                bits: o.bits,
                messages: Some(o.row_messages.min(o.col_messages)),
                method,
            }
        }
        Method::Exact => SplitCost {
            i,
            bits: exact_cc(m, DEFAULT_DEPTH_LIMIT)?,
            messages: None,
            method,
        },
    })
}

/// Costs of the splits `1..=n-1` and their maximum.
pub fn cc_profile(rule: &Rule, n: usize, problem: &Problem, method: Method) -> Result<CcReport> {
    cc_profile_splits(rule, n, problem, method, &(1..n).collect::<Vec<_>>())
}

/// Like [`cc_profile`] restricted to the given split points.
pub fn cc_profile_splits(
    rule: &Rule,
    n: usize,
    problem: &Problem,
    method: Method,
    splits: &[usize],
) -> Result<CcReport> {
    let splits = splits
        .iter()
        .map(|&i| split_cost(&build_matrix(rule, n, i, problem)?, i, method))
        .collect::<Result<Vec<_>>>()?;
    let max_bits = splits.iter().map(|s| s.bits).max().unwrap_or(0);
    Ok(CcReport {
        rule: rule.label(),
        problem: problem.label(),
        n,
        splits,
        max_bits,
    })
}

/// One-round protocol for rules linear under a monoid: each party collapses
/// its half padded with the neutral element and the results are combined.
#[derive(Clone, Debug)]
pub struct LinearProtocol {
    rule: Rule,
    op: Operator,
    neutral: State,
}

impl LinearProtocol {
    pub fn new(rule: &Rule, op: &Operator, neutral: State) -> Result<Self> {
        if linearity_counterexample(rule, op, neutral)?.is_some() {
            return Err(Error::NotLinear);
        }
        Ok(Self {
            rule: rule.clone(),
            op: op.clone(),
            neutral,
        })
    }

    /// Alice's message on `x` for inputs of length `n`.
    pub fn alice(&self, x: &[State], n: usize) -> State {
        let mut cells = x.to_vec();
        cells.resize(n, self.neutral);
        collapse_cells(&self.rule, &cells)[0]
    }

    /// Bob's message on `y` for inputs of length `n`.
    pub fn bob(&self, y: &[State], n: usize) -> State {
        let mut cells = vec![self.neutral; n - y.len()];
        cells.extend_from_slice(y);
        collapse_cells(&self.rule, &cells)[0]
    }

    pub fn pred(&self, w: &Word, i: usize) -> Result<State> {
        w.check_states(self.rule.states())?;
        if w.is_empty() || i > w.len() {
            return Err(Error::Dimension(format!("split {i} of length {}", w.len())));
        }
        let (x, y) = w.cells().split_at(i);
        Ok(self.op.apply(self.alice(x, w.len()), self.bob(y, w.len())))
    }
}

pub fn linear_protocol_pred(
    rule: &Rule,
    op: &Operator,
    neutral: State,
    w: &Word,
    i: usize,
) -> Result<State> {
    LinearProtocol::new(rule, op, neutral)?.pred(w, i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eca(n: u32) -> Rule {
        Rule::from_wolfram(n).unwrap()
    }

    #[test]
    fn reference_matrices() {
        let eq = reference_matrix(Reference::Eq, 2).unwrap();
        assert_eq!(eq.to_text(), "1000\n0100\n0010\n0001\n");
        let ip = reference_matrix(Reference::Ip, 1).unwrap();
        assert_eq!(ip.to_text(), "00\n01\n");
        let disj = reference_matrix(Reference::Disj, 1).unwrap();
        assert_eq!(disj.to_text(), "11\n10\n");
    }

    #[test]
    fn one_round_examples() {
        let c = PredMatrix::from_fn(2, 3, 3, |_, _| Ok(1)).unwrap();
        let o = one_round_cc(&c);
        assert_eq!((o.row_messages, o.col_messages, o.bits), (1, 1, 0));
        let o = one_round_cc(&reference_matrix(Reference::Eq, 2).unwrap());
        assert_eq!((o.row_messages, o.col_messages, o.bits), (4, 4, 2));
    }

    #[test]
    fn pred_matrix_matches_pred() {
        let r = eca(90);
        let m = build_matrix(&r, 5, 2, &Problem::Pred).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 8));
        for x in 0..4 {
            for y in 0..8 {
                let w = Word::from_index(2, 5, x * 8 + y);
                assert_eq!(m.entry(x, y), pred(&r, &w).unwrap());
            }
        }
        assert!(build_matrix(&eca(0), 6, 3, &Problem::Pred)
            .unwrap()
            .is_constant());
    }

    #[test]
    fn cycle_and_invasion_matrices() {
        let m = build_matrix(&eca(170), 4, 2, &Problem::Cycle { k: 1 }).unwrap();
        assert_eq!(m.entry(0, 0), 1);
        assert_eq!(m.entry(1, 1), 0); // 0101 has period 2 under the shift
        let inva = Problem::Invasion {
            background: CyclicWord::bits("0"),
            budget: InvasionBudget::default(),
        };
        let m = build_matrix(&eca(218), 4, 2, &inva).unwrap();
        assert_eq!(m.entry(0, 0), 0);
        assert_eq!(m.entry(0, 1), 1);
    }

    #[test]
    fn eq_fooling_set() {
        for n in 1..=3 {
            let m = reference_matrix(Reference::Eq, n).unwrap();
            let s = FoolingSet {
                pairs: (0..1 << n)
                    .map(|x| (Word::from_index(2, n, x), Word::from_index(2, n, x)))
                    .collect(),
                value: 1,
            };
            let chk = check_fooling_set(&m, &s).unwrap();
            assert!(chk.valid);
            assert_eq!(chk.bound, Some(n as u32));
        }
        let m = reference_matrix(Reference::Eq, 2).unwrap();
        let bad = FoolingSet {
            pairs: vec![
                (Word::bits("00"), Word::bits("00")),
                (Word::bits("01"), Word::bits("10")),
            ],
            value: 1,
        };
        assert_eq!(check_fooling_set(&m, &bad).unwrap().violation, Some((1, 1)));
        let wrong = FoolingSet {
            pairs: vec![(Word::bits("000"), Word::bits("00"))],
            value: 1,
        };
        assert!(check_fooling_set(&m, &wrong).is_err());
    }

    #[test]
    fn profiles() {
        let id = eca(204);
        let rep = cc_profile(&id, 6, &Problem::Pred, Method::OneRound).unwrap();
        assert_eq!(rep.max_bits, 0);
        assert_eq!(rep.splits.len(), 5);
        let rep = cc_profile(&eca(90), 7, &Problem::Pred, Method::OneRound).unwrap();
        assert!(rep.max_bits <= 1);
        let back = CcReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        let exact = cc_profile(&eca(90), 5, &Problem::Pred, Method::Exact).unwrap();
        assert!(exact.splits.iter().all(|s| s.messages.is_none()));
        assert!(exact.to_json().contains("\"method\":\"exact\""));
    }

    #[test]
    fn linear_protocol() {
        let p = LinearProtocol::new(&eca(90), &Operator::xor(), 0).unwrap();
        for idx in 0..128 {
            let w = Word::from_index(2, 7, idx);
            for i in 0..=7 {
                assert_eq!(p.pred(&w, i).unwrap(), pred(&eca(90), &w).unwrap());
            }
        }
        assert_eq!(p.pred(&Word::bits("0000000"), 3).unwrap(), 0);
        assert!(matches!(
            LinearProtocol::new(&eca(110), &Operator::xor(), 0),
            Err(Error::NotLinear)
        ));
    }

    #[test]
    fn log2() {
        assert_eq!(
            [0, 1, 2, 3, 4, 5, 8, 9].map(ceil_log2),
            [0, 0, 1, 2, 2, 3, 3, 4]
        );
    }
}
