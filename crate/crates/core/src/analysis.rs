//! Exhaustive structural checks: dependency width of `f^n`, linearity and
//! reversibility.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rule::{Rule, State, MAX_TABLE_LEN};

/// Truth table of `f^n` over all words of length `2rn+1`.
pub fn power_table(rule: &Rule, n: usize) -> Result<Vec<State>> {
    if n == 0 {
        return Err(Error::IterationRange {
            t: 0,
            max: usize::MAX,
        });
    }
    let q = rule.states();
    let r = rule.radius();
    let len = 2 * r * n + 1;
    let size = (q as u128).saturating_pow(len as u32);
    if size > MAX_TABLE_LEN as u128 {
        return Err(Error::CapExceeded {
            what: "dependency enumeration",
            size,
            cap: MAX_TABLE_LEN as u128,
        });
    }
    let mut table = rule.table().to_vec();
    let mut width = rule.width();
    // f^k(w) = f(f^{k-1}(w_0..), ..., f^{k-1}(w_2r..)) on overlapping windows
    for _ in 1..n {
        let next_width = width + 2 * r;
        let inner = q.pow(width as u32);
        let prev = &table;
        let next: Vec<State> = (0..q.pow(next_width as u32))
            .into_par_iter()
            .map(|idx| {
                let mut nb = 0usize;
                for j in 0..rule.width() {
                    let shift = q.pow((rule.width() - 1 - j) as u32);
                    nb = nb * q + prev[(idx / shift) % inner] as usize;
                }
                rule.eval_index(nb)
            })
            .collect();
        table = next;
        width = next_width;
    }
    Ok(table)
}

/// Number of input cells on which `f^n` genuinely depends.
pub fn dependency_width(rule: &Rule, n: usize) -> Result<usize> {
    let table = power_table(rule, n)?;
    let q = rule.states();
    let len = 2 * rule.radius() * n + 1;
    let depends = |pos: usize| {
        let stride = q.pow((len - 1 - pos) as u32);
        (0..table.len()).into_par_iter().any(|idx| {
            (idx / stride).is_multiple_of(q)
                && (1..q).any(|d| table[idx + d * stride] != table[idx])
        })
    };
    Ok((0..len).filter(|&p| depends(p)).count())
}

/// A binary operation on `0..q`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operator {
    states: usize,
    table: Vec<State>,
}

impl Operator {
    pub fn new(states: usize, table: Vec<State>) -> Result<Self> {
        if table.len() != states * states {
            return Err(Error::InvalidOperator(format!(
                "{} entries for {states} states",
                table.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&s| s as usize >= states) {
            return Err(Error::InvalidOperator(format!("entry {bad} out of range")));
        }
        Ok(Self { states, table })
    }

    pub fn xor() -> Self {
        Self::mod_sum(2)
    }

    /// Addition modulo `q`.
    pub fn mod_sum(q: usize) -> Self {
        let table = (0..q * q).map(|i| ((i / q + i % q) % q) as State).collect();
        Self { states: q, table }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    #[inline]
    pub fn apply(&self, a: State, b: State) -> State {
        self.table[a as usize * self.states + b as usize]
    }

    /// Checks associativity and that `e` is a two-sided neutral element.
    pub fn check_monoid(&self, e: State) -> Result<()> {
        let q = self.states as State;
        if e >= q {
            return Err(Error::InvalidOperator(format!("neutral {e} out of range")));
        }
        for a in 0..q {
            if self.apply(a, e) != a || self.apply(e, a) != a {
                return Err(Error::InvalidOperator(format!(
                    "{e} is not neutral for {a}"
                )));
            }
            for b in 0..q {
                for c in 0..q {
                    if self.apply(self.apply(a, b), c) != self.apply(a, self.apply(b, c)) {
                        return Err(Error::InvalidOperator(format!(
                            "not associative on ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// First pair of neighbourhoods violating `f(u + v) = f(u) + f(v)`.
pub fn linearity_counterexample(
    rule: &Rule,
    op: &Operator,
    e: State,
) -> Result<Option<(usize, usize)>> {
    if op.states() != rule.states() {
        return Err(Error::StateCountMismatch {
            expected: rule.states(),
            found: op.states(),
        });
    }
    op.check_monoid(e)?;
    let n = rule.table().len();
    if (n as u128) * (n as u128) > MAX_TABLE_LEN as u128 * 16 {
        return Err(Error::CapExceeded {
            what: "linearity pair scan",
            size: (n as u128) * (n as u128),
            cap: MAX_TABLE_LEN as u128 * 16,
        });
    }
    let q = rule.states();
    let w = rule.width();
    let found = (0..n).into_par_iter().find_first(|&u| {
        let mut du = vec![0; w];
        let mut dv = vec![0; w];
        crate::rule::decode_index(u, q, &mut du);
        (0..n).any(|v| {
            crate::rule::decode_index(v, q, &mut dv);
            let sum = du
                .iter()
                .zip(&dv)
                .fold(0usize, |acc, (&a, &b)| acc * q + op.apply(a, b) as usize);
            rule.eval_index(sum) != op.apply(rule.eval_index(u), rule.eval_index(v))
        })
    });
    Ok(found.map(|u| {
        let mut du = vec![0; w];
        let mut dv = vec![0; w];
        crate::rule::decode_index(u, q, &mut du);
        let v = (0..n)
            .find(|&v| {
                crate::rule::decode_index(v, q, &mut dv);
                let sum = du
                    .iter()
                    .zip(&dv)
                    .fold(0usize, |acc, (&a, &b)| acc * q + op.apply(a, b) as usize);
                rule.eval_index(sum) != op.apply(rule.eval_index(u), rule.eval_index(v))
            })
            .expect("witness exists");
        (u, v)
    }))
}

pub fn is_linear(rule: &Rule, op: &Operator, e: State) -> Result<bool> {
    Ok(linearity_counterexample(rule, op, e)?.is_none())
}

/// Largest pair graph [`is_reversible`] will build.
pub const MAX_PAIR_VERTICES: usize = 1 << 26;

/// Injectivity of the global map on bi-infinite configurations.
///
/// Vertices of the pair graph are pairs of words of length `2r`; an edge
/// `(x, y) -> (x', y')` exists when both sides extend by one cell with equal
/// images. The rule is injective iff no vertex off the diagonal lies on a
/// bi-infinite path. Vertices with no successor or no predecessor are peeled
/// until the graph is stable.
pub fn is_reversible(rule: &Rule) -> Result<bool> {
    let q = rule.states();
    let r = rule.radius();
    if r == 0 {
        let mut seen = vec![false; q];
        return Ok(rule
            .table()
            .iter()
            .all(|&s| !std::mem::replace(&mut seen[s as usize], true)));
    }
    let k = q.pow(2 * r as u32);
    let vertices = (k as u128) * (k as u128);
    if vertices > MAX_PAIR_VERTICES as u128 {
        return Err(Error::CapExceeded {
            what: "pair graph vertices",
            size: vertices,
            cap: MAX_PAIR_VERTICES as u128,
        });
    }
    let table = rule.table();

    // succ[x][s]: cells a with f(xa) = s; pred[x][s]: cells p with f(px) = s
    let succ = MatchLists::build(k, q, |x, a| table[x * q + a]);
    let pred = MatchLists::build(k, q, |x, p| table[p * k + x]);

    let mut out_deg: Vec<u32> = (0..k * k)
        .into_par_iter()
        .map(|v| succ.pair_count(v / k, v % k))
        .collect();
    let mut in_deg: Vec<u32> = (0..k * k)
        .into_par_iter()
        .map(|v| pred.pair_count(v / k, v % k))
        .collect();

    let mut alive = vec![true; k * k];
    let mut queue: Vec<usize> = (0..k * k)
        .filter(|&v| out_deg[v] == 0 || in_deg[v] == 0)
        .collect();
    for &v in &queue {
        alive[v] = false;
    }
    while let Some(v) = queue.pop() {
        let (x, y) = (v / k, v % k);
        for s in 0..q {
            for &a in succ.get(x, s) {
                for &b in succ.get(y, s) {
                    let w = ((x * q + a as usize) % k) * k + (y * q + b as usize) % k;
                    if alive[w] {
                        in_deg[w] -= 1;
                        if in_deg[w] == 0 {
                            alive[w] = false;
                            queue.push(w);
                        }
                    }
                }
            }
            for &a in pred.get(x, s) {
                for &b in pred.get(y, s) {
                    let u = ((a as usize * k + x) / q) * k + (b as usize * k + y) / q;
                    if alive[u] {
                        out_deg[u] -= 1;
                        if out_deg[u] == 0 {
                            alive[u] = false;
                            queue.push(u);
                        }
                    }
                }
            }
        }
    }
    Ok((0..k * k).all(|v| !alive[v] || v / k == v % k))
}

/// For each word `x` of length `2r` and image `s`, the cells completing `x`
/// to a neighbourhood with image `s`.
struct MatchLists {
    q: usize,
    start: Vec<u32>,
    cells: Vec<State>,
}

impl MatchLists {
    fn build(k: usize, q: usize, image: impl Fn(usize, usize) -> State) -> Self {
        let mut start = Vec::with_capacity(k * q + 1);
        let mut cells = Vec::with_capacity(k * q);
        let mut bucket: Vec<Vec<State>> = vec![Vec::new(); q];
        for x in 0..k {
            for b in bucket.iter_mut() {
                b.clear();
            }
            for a in 0..q {
                bucket[image(x, a) as usize].push(a as State);
            }
            for b in &bucket {
                start.push(cells.len() as u32);
                cells.extend_from_slice(b);
            }
        }
        start.push(cells.len() as u32);
        Self { q, start, cells }
    }

    #[inline]
    fn get(&self, x: usize, s: usize) -> &[State] {
        let i = x * self.q + s;
        &self.cells[self.start[i] as usize..self.start[i + 1] as usize]
    }

    fn pair_count(&self, x: usize, y: usize) -> u32 {
        (0..self.q)
            .map(|s| (self.get(x, s).len() * self.get(y, s).len()) as u32)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eca(n: u32) -> Rule {
        Rule::from_wolfram(n).unwrap()
    }

    #[test]
    fn widths() {
        assert_eq!(dependency_width(&eca(170), 3).unwrap(), 1);
        assert_eq!(dependency_width(&eca(204), 5).unwrap(), 1);
        assert_eq!(dependency_width(&eca(90), 2).unwrap(), 2);
        assert_eq!(dependency_width(&eca(150), 3).unwrap(), 5);
        assert!(dependency_width(&eca(110), 20).is_err());
    }

    #[test]
    fn power_table_matches_iteration() {
        let r = eca(110);
        let t = power_table(&r, 3).unwrap();
        for (idx, &want) in t.iter().enumerate() {
            let w = crate::word::Word::from_index(2, 7, idx);
            let v = crate::sim::iterate_local(&r, &w, 3).unwrap();
            assert_eq!(v.cells(), &[want]);
        }
    }

    #[test]
    fn linearity() {
        let xor = Operator::xor();
        assert!(is_linear(&eca(90), &xor, 0).unwrap());
        assert!(is_linear(&eca(204), &xor, 0).unwrap());
        assert!(is_linear(&eca(60), &xor, 0).unwrap());
        assert!(!is_linear(&eca(110), &xor, 0).unwrap());
        assert!(linearity_counterexample(&eca(110), &xor, 0)
            .unwrap()
            .is_some());
        assert!(is_linear(&eca(90), &xor, 1).is_err());
        let not_assoc = Operator::new(2, vec![1, 0, 0, 0]).unwrap();
        assert!(is_linear(&eca(90), &not_assoc, 0).is_err());
    }

    #[test]
    fn reversible_elementary_rules() {
        let rev: Vec<u32> = (0..256)
            .filter(|&c| is_reversible(&eca(c)).unwrap())
            .collect();
        assert_eq!(rev, vec![15, 51, 85, 170, 204, 240]);
    }

    #[test]
    fn radius_zero_reversibility() {
        assert!(is_reversible(&Rule::new(3, 0, vec![2, 0, 1]).unwrap()).unwrap());
        assert!(!is_reversible(&Rule::new(3, 0, vec![2, 0, 0]).unwrap()).unwrap());
    }

    #[test]
    fn lifted_rule_keeps_reversibility() {
        assert!(is_reversible(&eca(170).lift(2).unwrap()).unwrap());
        assert!(!is_reversible(&eca(90).lift(2).unwrap()).unwrap());
    }
}
