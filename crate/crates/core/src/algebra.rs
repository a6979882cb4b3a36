//! Structural algebra on rules: packing, rescaling, products and
//! sub-automaton embeddings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::{decode_index, table_len, Rule, State};
use crate::sim::apply_cells;
use crate::word::CyclicWord;

/// Default cap on the state count of a product rule.
pub const DEFAULT_PRODUCT_CAP: usize = 256;

/// Parameters of the rescaling `<F>^{m,t,z}`: pack `m` cells per block, run
/// `t` steps, shift by `z` cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RescaleParams {
    pub m: usize,
    pub t: usize,
    pub z: i64,
}

impl RescaleParams {
    pub fn new(m: usize, t: usize, z: i64) -> Result<Self> {
        if m == 0 || t == 0 {
            return Err(Error::InvalidRule(format!(
                "rescaling needs m, t >= 1 (got m={m}, t={t})"
            )));
        }
        Ok(Self { m, t, z })
    }

    pub const IDENTITY: RescaleParams = RescaleParams { m: 1, t: 1, z: 0 };
}

fn checked_pow(q: usize, m: usize, what: &'static str) -> Result<usize> {
    let mut acc: u128 = 1;
    for _ in 0..m {
        acc *= q as u128;
        if acc > State::MAX as u128 + 1 {
            return Err(Error::CapExceeded {
                what,
                size: (q as u128).saturating_pow(m as u32),
                cap: State::MAX as u128 + 1,
            });
        }
    }
    Ok(acc as usize)
}

/// Packs blocks of `m` cells into single states over `q^m` (first cell most
/// significant). The period length must be a multiple of `m`.
pub fn pack(c: &CyclicWord, m: usize) -> Result<CyclicWord> {
    if m == 0 || !c.len().is_multiple_of(m) {
        return Err(Error::Dimension(format!(
            "period length {} is not a multiple of {m}",
            c.len()
        )));
    }
    let q = c.states();
    let packed_states = checked_pow(q, m, "packed state count")?;
    let cells = c
        .cells()
        .chunks(m)
        .map(|b| crate::rule::encode_cells(b, q) as State)
        .collect();
    Ok(CyclicWord::from_cells_unchecked(packed_states, cells))
}

/// Inverse of [`pack`].
pub fn unpack(c: &CyclicWord, q: usize, m: usize) -> Result<CyclicWord> {
    let expect = checked_pow(q, m, "packed state count")?;
    if c.states() != expect {
        return Err(Error::StateCountMismatch {
            expected: expect,
            found: c.states(),
        });
    }
    let mut cells = vec![0; c.len() * m];
    for (b, &s) in cells.chunks_mut(m).zip(c.cells()) {
        decode_index(s as usize, q, b);
    }
    Ok(CyclicWord::from_cells_unchecked(q, cells))
}

/// Shift `sigma_z(c)_i = c_{i-z}` on a cyclic word.
pub fn shift_cyclic(c: &CyclicWord, z: i64) -> CyclicWord {
    let n = c.len() as i64;
    c.rotate((-z).rem_euclid(n) as usize)
}

/// The rule of `bloc_m . sigma_z . F^t . bloc_m^{-1}` on `q^m` states, with
/// radius `ceil((rt + |z|) / m)`.
pub fn rescale(rule: &Rule, p: RescaleParams) -> Result<Rule> {
    let RescaleParams { m, t, z } = RescaleParams::new(p.m, p.t, p.z)?;
    let q = rule.states();
    let r = rule.radius();
    let reach = r * t + z.unsigned_abs() as usize;
    let radius = reach.div_ceil(m);
    let big_q = checked_pow(q, m, "rescaled state count")?;
    table_len(big_q, radius)?;

    let width = 2 * radius + 1;
    // output cell k of the centre block sits at this index of f^t(flat)
    let base = (radius * m) as i64 - (r * t) as i64 - z;
    let mut flat = vec![0 as State; width * m];
    let mut cur = Vec::with_capacity(width * m);
    let mut next = Vec::with_capacity(width * m);
    let rescaled = Rule::from_fn(big_q, radius, |blocks| {
        for (chunk, &b) in flat.chunks_mut(m).zip(blocks) {
            decode_index(b as usize, q, chunk);
        }
        cur.clear();
        cur.extend_from_slice(&flat);
        for _ in 0..t {
            apply_cells(rule, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        let block = &cur[base as usize..base as usize + m];
        crate::rule::encode_cells(block, q) as State
    })?;
    Ok(rescaled.with_name(format!("<{}>^{{{m},{t},{z}}}", rule.label())))
}

/// Mixed-radix encoding of a state tuple; the first layer is most significant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layers {
    sizes: Vec<usize>,
}

impl Layers {
    pub fn new(sizes: Vec<usize>, cap: usize) -> Result<Self> {
        if sizes.is_empty() || sizes.iter().any(|&s| s < 2) {
            return Err(Error::InvalidRule(format!("bad layer sizes {sizes:?}")));
        }
        let total = sizes
            .iter()
            .try_fold(1u128, |acc, &s| acc.checked_mul(s as u128))
            .unwrap_or(u128::MAX);
        if total > cap as u128 {
            return Err(Error::CapExceeded {
                what: "product state count",
                size: total,
                cap: cap as u128,
            });
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn states(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn encode(&self, parts: &[State]) -> State {
        debug_assert_eq!(parts.len(), self.sizes.len());
        parts
            .iter()
            .zip(&self.sizes)
            .fold(0usize, |acc, (&p, &s)| acc * s + p as usize) as State
    }

    pub fn decode(&self, mut s: State) -> Vec<State> {
        let mut out = vec![0; self.sizes.len()];
        for (slot, &size) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = s % size as State;
            s /= size as State;
        }
        out
    }

    pub fn project(&self, s: State, layer: usize) -> State {
        self.decode(s)[layer]
    }

    /// The layer-`k` component of every cell.
    pub fn project_cyclic(&self, c: &CyclicWord, layer: usize) -> CyclicWord {
        let cells = c.cells().iter().map(|&s| self.project(s, layer)).collect();
        CyclicWord::from_cells_unchecked(self.sizes[layer], cells)
    }

    /// Stacks one cyclic word per layer into a single configuration.
    pub fn stack_cyclic(&self, layers: &[CyclicWord]) -> Result<CyclicWord> {
        if layers.len() != self.sizes.len() || layers.iter().any(|l| l.len() != layers[0].len()) {
            return Err(Error::Dimension(
                "layer words must match in count and length".into(),
            ));
        }
        for (l, &s) in layers.iter().zip(&self.sizes) {
            l.period().check_states(s)?;
        }
        let mut parts = vec![0; layers.len()];
        let cells = (0..layers[0].len())
            .map(|i| {
                for (p, l) in parts.iter_mut().zip(layers) {
                    *p = l.cells()[i];
                }
                self.encode(&parts)
            })
            .collect();
        Ok(CyclicWord::from_cells_unchecked(self.states(), cells))
    }
}

/// Componentwise product of `rules`, all lifted to the largest radius.
pub fn product(rules: &[Rule]) -> Result<(Rule, Layers)> {
    product_with_cap(rules, DEFAULT_PRODUCT_CAP)
}

pub fn product_with_cap(rules: &[Rule], cap: usize) -> Result<(Rule, Layers)> {
    let layers = Layers::new(rules.iter().map(Rule::states).collect(), cap)?;
    let radius = rules.iter().map(Rule::radius).max().unwrap_or(0);
    let lifted: Vec<Rule> = rules
        .iter()
        .map(|r| r.lift(radius))
        .collect::<Result<_>>()?;
    let rule = coupled_product(&layers, radius, |cells| {
        lifted
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let nb: Vec<State> = cells.iter().map(|c| c[k]).collect();
                r.eval(&nb)
            })
            .collect()
    })?;
    let name = rules.iter().map(Rule::label).collect::<Vec<_>>().join("x");
    Ok((rule.with_name(name), layers))
}

/// Product whose layers may read each other: `f` receives the decoded
/// neighbourhood (`cells[j][layer]`) and returns the new components.
pub fn coupled_product(
    layers: &Layers,
    radius: usize,
    f: impl Fn(&[Vec<State>]) -> Vec<State>,
) -> Result<Rule> {
    let width = 2 * radius + 1;
    let mut decoded = vec![Vec::new(); width];
    let mut bad = None;
    let rule = Rule::from_fn(layers.states(), radius, |nb| {
        for (slot, &s) in decoded.iter_mut().zip(nb) {
            *slot = layers.decode(s);
        }
        let out = f(&decoded);
        if out.len() != layers.sizes.len()
            || out
                .iter()
                .zip(&layers.sizes)
                .any(|(&o, &s)| o as usize >= s)
        {
            bad.get_or_insert(out.clone());
            return 0;
        }
        layers.encode(&out)
    })?;
    match bad {
        Some(out) => Err(Error::InvalidRule(format!(
            "coupling returned invalid components {out:?}"
        ))),
        None => Ok(rule),
    }
}

/// An injective state map `iota` from the states of one rule to another.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Embedding {
    pub map: Vec<State>,
    pub target_states: usize,
}

impl Embedding {
    pub fn new(map: Vec<State>, target_states: usize) -> Result<Self> {
        let mut seen = vec![false; target_states];
        for &s in &map {
            let slot = seen.get_mut(s as usize).ok_or(Error::StateOutOfRange {
                state: s as usize,
                states: target_states,
            })?;
            if std::mem::replace(slot, true) {
                return Err(Error::InvalidRule(format!("map {map:?} is not injective")));
            }
        }
        Ok(Self { map, target_states })
    }

    pub fn identity(states: usize) -> Self {
        Self {
            map: (0..states as State).collect(),
            target_states: states,
        }
    }

    pub fn apply(&self, s: State) -> State {
        self.map[s as usize]
    }

    pub fn apply_cyclic(&self, c: &CyclicWord) -> Result<CyclicWord> {
        c.period().check_states(self.map.len())?;
        let cells = c.cells().iter().map(|&s| self.apply(s)).collect();
        Ok(CyclicWord::from_cells_unchecked(self.target_states, cells))
    }
}

/// Limits for the embedding and simulation searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    /// Backtracking nodes before giving up with an error.
    pub max_nodes: u64,
    /// Largest neighbourhood enumeration `q_F^(2R+1)`.
    pub max_neighbourhoods: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_nodes: 2_000_000,
            max_neighbourhoods: 1 << 22,
        }
    }
}

/// Searches for `iota` with `iota(f(n)) = g(iota(n))` on every neighbourhood;
/// returns the lexicographically first one.
pub fn is_subautomaton(f: &Rule, g: &Rule) -> Result<Option<Embedding>> {
    is_subautomaton_with(f, g, SearchLimits::default())
}

pub fn is_subautomaton_with(f: &Rule, g: &Rule, limits: SearchLimits) -> Result<Option<Embedding>> {
    let qf = f.states();
    let qg = g.states();
    if qf > qg {
        return Ok(None);
    }
    let radius = f.radius().max(g.radius());
    let width = 2 * radius + 1;
    let n_count = (qf as u128).saturating_pow(width as u32);
    if n_count > limits.max_neighbourhoods as u128 {
        return Err(Error::CapExceeded {
            what: "embedding neighbourhoods",
            size: n_count,
            cap: limits.max_neighbourhoods as u128,
        });
    }
    let f_off = radius - f.radius();
    let g_off = radius - g.radius();
    let mut search = EmbedSearch {
        f,
        g,
        width,
        f_off,
        g_off,
        map: Vec::with_capacity(qf),
        used: vec![false; qg],
        nodes: 0,
        limits,
        nb: vec![0; width],
        img: vec![0; width],
    };
    if search.extend()? {
        Ok(Some(Embedding {
            map: search.map,
            target_states: qg,
        }))
    } else {
        Ok(None)
    }
}

struct EmbedSearch<'a> {
    f: &'a Rule,
    g: &'a Rule,
    width: usize,
    f_off: usize,
    g_off: usize,
    map: Vec<State>,
    used: Vec<bool>,
    nodes: u64,
    limits: SearchLimits,
    nb: Vec<State>,
    img: Vec<State>,
}

impl EmbedSearch<'_> {
    fn extend(&mut self) -> Result<bool> {
        let k = self.map.len();
        if k == self.f.states() {
            return Ok(true);
        }
        for cand in 0..self.g.states() {
            if self.used[cand] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.limits.max_nodes {
                return Err(Error::CapExceeded {
                    what: "embedding search nodes",
                    size: self.nodes as u128,
                    cap: self.limits.max_nodes as u128,
                });
            }
            self.map.push(cand as State);
            self.used[cand] = true;
            if self.consistent() && self.extend()? {
                return Ok(true);
            }
            self.used[cand] = false;
            self.map.pop();
        }
        Ok(false)
    }

    /// Checks every neighbourhood over the assigned states that uses the newest one.
    fn consistent(&mut self) -> bool {
        let k = self.map.len();
        let newest = (k - 1) as State;
        let total = k.pow(self.width as u32);
        for idx in 0..total {
            decode_index(idx, k, &mut self.nb);
            if !self.nb.contains(&newest) {
                continue;
            }
            let fw = self.f.width();
            let fv = self.f.eval(&self.nb[self.f_off..self.f_off + fw]);
            for (i, &c) in self.img.iter_mut().zip(&self.nb) {
                *i = self.map[c as usize];
            }
            let gw = self.g.width();
            let gv = self.g.eval(&self.img[self.g_off..self.g_off + gw]);
            match self.map.get(fv as usize) {
                Some(&m) if m != gv => return false,
                // f(n) not yet placed: its image must stay free.
                None if self.used[gv as usize] => return false,
                _ => {}
            }
        }
        true
    }
}

/// Bounds for [`simulates`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationBounds {
    pub max_m: usize,
    pub max_t: usize,
    pub max_z: i64,
    pub limits: SearchLimits,
}

impl Default for SimulationBounds {
    fn default() -> Self {
        Self {
            max_m: 3,
            max_t: 3,
            max_z: 2,
            limits: SearchLimits::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationWitness {
    pub f_params: RescaleParams,
    pub g_params: RescaleParams,
    pub embedding: Embedding,
}

impl SimulationBounds {
    /// Parameter triples ordered by `m`, then `t`, then `|z|` with `+z` first.
    pub fn params(&self) -> Vec<RescaleParams> {
        let mut zs = vec![0i64];
        for z in 1..=self.max_z {
            zs.extend([z, -z]);
        }
        let mut out = Vec::new();
        for m in 1..=self.max_m {
            for t in 1..=self.max_t {
                for &z in &zs {
                    out.push(RescaleParams { m, t, z });
                }
            }
        }
        out
    }
}

/// Bounded search for `<F>^{p1} ⊑ <G>^{p2}`.
///
/// `Ok(None)` means no witness exists within the bounds; `Err(Inconclusive)`
/// means no witness was found but some candidates exceeded the caps.
pub fn simulates(
    f: &Rule,
    g: &Rule,
    bounds: SimulationBounds,
) -> Result<Option<SimulationWitness>> {
    let params = bounds.params();
    let mut g_rules: Vec<Option<Rule>> = Vec::with_capacity(params.len());
    for &p in &params {
        g_rules.push(rescale(g, p).ok());
    }
    let mut skipped = 0usize;
    for &p1 in &params {
        let Ok(fr) = rescale(f, p1) else {
            skipped += params.len();
            continue;
        };
        for (&p2, gr) in params.iter().zip(&g_rules) {
            let Some(gr) = gr else {
                skipped += 1;
                continue;
            };
            match is_subautomaton_with(&fr, gr, bounds.limits) {
                Ok(Some(embedding)) => {
                    return Ok(Some(SimulationWitness {
                        f_params: p1,
                        g_params: p2,
                        embedding,
                    }))
                }
                Ok(None) => {}
                Err(Error::CapExceeded { .. }) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    if skipped > 0 {
        Err(Error::Inconclusive(skipped))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::step_cyclic;

    fn eca(n: u32) -> Rule {
        Rule::from_wolfram(n).unwrap()
    }

    #[test]
    fn shift_then_unshift_is_identity() {
        let id = rescale(&eca(170), RescaleParams::new(1, 1, 1).unwrap()).unwrap();
        assert!(id.same_global_map(&eca(204)));
        assert_eq!(id.canonicalize().radius(), 0);
    }

    #[test]
    fn identity_params_preserve_rule() {
        for code in [30u32, 90, 110, 218] {
            let r = rescale(&eca(code), RescaleParams::IDENTITY).unwrap();
            assert!(r.same_global_map(&eca(code)), "rule {code}");
        }
    }

    #[test]
    fn rescaled_radius() {
        let r = rescale(&eca(110), RescaleParams::new(2, 3, -1).unwrap()).unwrap();
        assert_eq!(r.states(), 4);
        assert_eq!(r.radius(), 2);
        assert!(RescaleParams::new(0, 1, 0).is_err());
    }

    #[test]
    fn rule_90_packing_commutes() {
        let r90 = eca(90);
        let packed = rescale(&r90, RescaleParams::new(2, 1, 0).unwrap()).unwrap();
        for len in (2..=12).step_by(2) {
            for idx in 0..1usize << len {
                let c = CyclicWord::from_cells_unchecked(
                    2,
                    crate::word::Word::from_index(2, len, idx).into_cells(),
                );
                let direct = step_cyclic(&r90, &c).unwrap();
                let via =
                    unpack(&step_cyclic(&packed, &pack(&c, 2).unwrap()).unwrap(), 2, 2).unwrap();
                assert_eq!(direct, via);
            }
        }
    }

    #[test]
    fn pack_round_trip() {
        let c = CyclicWord::bits("011010");
        let p = pack(&c, 3).unwrap();
        assert_eq!(p.cells(), &[3, 2]);
        assert_eq!(unpack(&p, 2, 3).unwrap(), c);
        assert!(pack(&c, 4).is_err());
    }

    #[test]
    fn product_of_shifts() {
        let (p, layers) = product(&[eca(170), eca(240)]).unwrap();
        assert_eq!(p.states(), 4);
        let a = CyclicWord::bits("0011");
        let b = CyclicWord::bits("0100");
        let c = layers.stack_cyclic(&[a.clone(), b.clone()]).unwrap();
        let next = step_cyclic(&p, &c).unwrap();
        assert_eq!(
            layers.project_cyclic(&next, 0),
            step_cyclic(&eca(170), &a).unwrap()
        );
        assert_eq!(
            layers.project_cyclic(&next, 1),
            step_cyclic(&eca(240), &b).unwrap()
        );
        assert_eq!(layers.project_cyclic(&next, 1).to_string(), "0010");
    }

    #[test]
    fn product_cap() {
        let r = Rule::new(20, 0, (0..20).collect()).unwrap();
        assert!(matches!(
            product(&[r.clone(), r]),
            Err(Error::CapExceeded {
                size: 400,
                cap: 256,
                ..
            })
        ));
    }

    #[test]
    fn embeddings() {
        let r90 = eca(90);
        assert_eq!(
            is_subautomaton(&r90, &r90).unwrap(),
            Some(Embedding::identity(2))
        );
        assert_eq!(is_subautomaton(&eca(0), &eca(204)).unwrap(), None);
        let (prod, _) = product(&[eca(90), eca(170)]).unwrap();
        let e = is_subautomaton(&r90, &prod).unwrap().unwrap();
        assert_eq!(e.map, vec![0, 2]);
    }

    #[test]
    fn embedding_validation() {
        assert!(Embedding::new(vec![1, 1], 3).is_err());
        assert!(Embedding::new(vec![0, 3], 3).is_err());
        assert!(Embedding::new(vec![2, 0], 3).is_ok());
    }

    #[test]
    fn simulation_search() {
        let w = simulates(&eca(110), &eca(110), SimulationBounds::default())
            .unwrap()
            .unwrap();
        assert_eq!(w.f_params, RescaleParams::IDENTITY);
        assert_eq!(w.g_params, RescaleParams::IDENTITY);

        let g = rescale(&eca(170), RescaleParams::new(2, 2, 0).unwrap()).unwrap();
        assert!(simulates(&eca(170), &g, SimulationBounds::default())
            .unwrap()
            .is_some());
        let f = rescale(&eca(170), RescaleParams::new(2, 2, 0).unwrap()).unwrap();
        assert!(is_subautomaton(&f, &g).unwrap().is_some());

        assert_eq!(
            simulates(&eca(90), &eca(0), SimulationBounds::default()).unwrap(),
            None
        );
    }

    #[test]
    fn simulation_caps_are_inconclusive() {
        let tight = SimulationBounds {
            limits: SearchLimits {
                max_nodes: 1,
                max_neighbourhoods: 1,
            },
            ..SimulationBounds::default()
        };
        assert!(matches!(
            simulates(&eca(90), &eca(0), tight),
            Err(Error::Inconclusive(_))
        ));
    }
}
