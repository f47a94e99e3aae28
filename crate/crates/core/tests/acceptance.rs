//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so each line is printed in order; exits non-zero on any failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use cogkernel::activation::bla;
use cogkernel::declarative::episodic::EpisodicStore;
use cogkernel::declarative::retrieval::{retrieve, Cue, RetrievalOutcome, RetrievalParams};
use cogkernel::declarative::semantic::{SemanticStore, StoreCause};
use cogkernel::declarative::spread::{fan_strength, spread_soar};
use cogkernel::dsl::validate::METADATA_EDGES;
use cogkernel::dsl::{self, parse, parse_env, print_model};
use cogkernel::procedural::{decide, CueTest, Decision, ImpasseKind, PrefKind, Preference};
use cogkernel::runtime::{trace, Runtime, StopReason};
use cogkernel::{Mode, Symbol, Triple, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{bundled, gen, model, repo_root, BUNDLED};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sym(s: &str) -> Symbol {
    Symbol::named(s)
}

// ---- c01: cycle timing -------------------------------------------------

const TICK_ACTR: &str = "cogm 1\nmode actr\nparams { max-cycles = 200 }\nwm { (goal ^n 0) }\n\
    rule up { (goal ^n 0) --> -(goal ^n 0) +(goal ^n 1) }\n\
    rule down { (goal ^n 1) --> -(goal ^n 1) +(goal ^n 0) }\n";

const TICK_SOAR: &str = "cogm 1\nmode soar\nparams { max-cycles = 200  episodic = false }\nwm { (s1 ^n 0) }\n\
    propose go { (?s ^n ?x) --> operator ?s flip }\n\
    apply up for flip { (?s ^selected ?o) (?s ^n 0) --> -(?s ^n 0) +(?s ^n 1) }\n\
    apply down for flip { (?s ^selected ?o) (?s ^n 1) --> -(?s ^n 1) +(?s ^n 0) }\n";

fn c01() -> Outcome {
    let mut checked = 0;
    for src in [TICK_ACTR, TICK_SOAR] {
        let mut rt = Runtime::new(&model(src), None).map_err(|e| e.to_string())?;
        for n in 1..=200u64 {
            let r = rt.step().map_err(|e| format!("cycle {n}: {e}"))?;
            ensure(r.cycle == n && r.time_ms == 50 * n, || format!("cycle {} at {} ms", r.cycle, r.time_ms))?;
            checked += 1;
        }
        let s = Runtime::new(&model(src), None).unwrap().run().map_err(|e| e.to_string())?;
        ensure(s.time_ms == 50 * s.cycles && s.cycles == 200, || format!("{s:?}"))?;
    }
    Ok(format!("{checked} cycles at n*50 ms in both modes"))
}

// ---- c02: base-level activation ----------------------------------------

fn bla_oracle(accesses: &[u64], now: u64, d: f64) -> f64 {
    let mut sum = 0.0;
    for &t in accesses {
        let age = (now - t).max(1) as f64 / 1000.0;
        sum += (-d * age.ln()).exp();
    }
    sum.ln()
}

fn c02() -> Outcome {
    let mut r = rng(2);
    let anchor = bla(&[1000, 2000], 3000, 0.5);
    ensure((anchor - (1.0 + 0.5f64.sqrt()).ln()).abs() < 1e-9, || format!("anchor {anchor}"))?;
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = r.gen_range(1..=30);
        let mut hist: Vec<u64> = (0..n).map(|_| r.gen_range(0..500_000)).collect();
        hist.sort();
        let now = hist.last().unwrap() + r.gen_range(1..100_000);
        let d = r.gen_range(0.1..1.0);
        let (got, want) = (bla(&hist, now, d), bla_oracle(&hist, now, d));
        let err = (got - want).abs();
        worst = worst.max(err);
        ensure(err <= 1e-9, || format!("case {case}: {got} vs {want}"))?;
    }
    Ok(format!("1000 histories, max error {worst:.1e} (tol 1e-9)"))
}

// ---- c03: retrieval argmax ---------------------------------------------

fn c03() -> Outcome {
    let mut r = rng(3);
    let mut successes = 0;
    for case in 0..1000 {
        let mut sm = SemanticStore::new();
        let mut now = 0;
        for _ in 0..r.gen_range(1..25) {
            now += r.gen_range(1..5_000);
            let slots = vec![
                (sym("kind"), Value::sym(&format!("k{}", r.gen_range(0..3)))),
                (sym("val"), Value::sym(&format!("v{}", r.gen_range(0..4)))),
            ];
            let name = sym(&format!("c{}", r.gen_range(0..6)));
            sm.store_chunk(Mode::Actr, &name, slots, now, StoreCause::ExplicitCommand).unwrap();
        }
        now += r.gen_range(1..10_000);
        let kind = Value::sym(&format!("k{}", r.gen_range(0..4)));
        let cue = Cue::new(vec![(sym("kind"), CueTest::Eq(kind.clone()))]);
        let mut spread: BTreeMap<Symbol, f64> = BTreeMap::new();
        for c in sm.chunks() {
            if r.gen_bool(0.5) {
                spread.insert(c.name.clone(), r.gen_range(0.0..2.0));
            }
        }
        let params = RetrievalParams { threshold: r.gen_range(-2.0..1.0), noise: 0.0, ..Default::default() };

        let mut best: Option<(Symbol, f64)> = None;
        for c in sm.chunks() {
            if !c.slots.iter().any(|(e, v)| e.as_str() == "kind" && *v == kind) {
                continue;
            }
            let a = bla_oracle(&c.accesses, now, params.decay) + spread.get(&c.name).copied().unwrap_or(0.0);
            if best.as_ref().is_none_or(|(_, b)| a > *b) {
                best = Some((c.name.clone(), a));
            }
        }
        let want = best.filter(|(_, a)| *a >= params.threshold).map(|(n, _)| n);
        let got = match retrieve(&mut sm, &cue, &params, &spread, now, &mut rng(0)) {
            RetrievalOutcome::Success { chunk, .. } => Some(chunk.name),
            RetrievalOutcome::Failure { .. } => None,
        };
        ensure(got == want, || format!("case {case}: got {got:?}, oracle {want:?}"))?;
        successes += usize::from(got.is_some());
    }
    Ok(format!("1000 cues agree with the oracle ({successes} retrieved, rest below threshold or unmatched)"))
}

// ---- c04: spread -------------------------------------------------------

fn c04() -> Outcome {
    let s = 5.0;
    for f in 1..50usize {
        let (a, b) = (fan_strength(s, f), fan_strength(s, f + 1));
        ensure(b < a, || format!("fan {f}: {a} then {b}"))?;
        ensure((a - (s - (f as f64).ln())).abs() < 1e-12, || format!("fan {f}: {a}"))?;
    }
    let mut r = rng(4);
    for g in 0..500 {
        let mut sm = SemanticStore::new();
        let n = r.gen_range(2..9);
        for i in 0..n {
            let mut slots = vec![(sym("id"), Value::Num(i as f64))];
            for k in 0..r.gen_range(0..4) {
                slots.push((sym(&format!("l{k}")), Value::sym(&format!("n{}", r.gen_range(0..n)))));
            }
            sm.store_chunk(Mode::Soar, &sym(&format!("n{i}")), slots, r.gen_range(0..1000), StoreCause::ExplicitCommand)
                .unwrap();
        }
        let sources: BTreeSet<Symbol> = (0..n).filter(|_| r.gen_bool(0.4)).map(|i| sym(&format!("n{i}"))).collect();
        let mut prev = spread_soar(&sources, &sm, 0, 5000, 0.5);
        for depth in 1..=5 {
            let next = spread_soar(&sources, &sm, depth, 5000, 0.5);
            for (k, v) in &next {
                ensure(*v + 1e-12 >= prev[k], || format!("graph {g}, depth {depth}: {k} fell {} -> {v}", prev[k]))?;
            }
            prev = next;
        }
    }
    Ok("fan strength strictly decreasing over 1..50; spread monotone in depth over 500 graphs".into())
}

// ---- c05: compilation --------------------------------------------------

fn compile_model(r: &mut impl Rng) -> String {
    let x = format!("x{}", r.gen_range(0..5));
    let y = format!("y{}", r.gen_range(0..5));
    let keep_tmp = r.gen_bool(0.5);
    let extra = r.gen_bool(0.5);
    let drop_tmp = if keep_tmp { "" } else { " -(goal ^tmp ?t)" };
    let extra_cond = if extra { " (imaginal ^w ?w)" } else { "" };
    let extra_act = if extra { " +(goal ^w2 ?w)" } else { "" };
    let wm_extra = if extra { format!(" (imaginal ^w w{})", r.gen_range(0..3)) } else { String::new() };
    format!(
        "cogm 1\nmode actr\nparams {{ compile = true  noise = 0  seed = {seed} }}\n\
         wm {{ (goal ^state a ^x {x} ^y {y}){wm_extra} }}\n\
         rule r1 {{ (goal ^state a) (goal ^x ?x) --> -(goal ^state a) +(goal ^state b) +(goal ^tmp ?x) }}\n\
         rule r2 {{ (goal ^state b) (goal ^tmp ?t) (goal ^y ?y){extra_cond} --> -(goal ^state b) +(goal ^state c) +(goal ^out ?t) +(goal ^out2 ?y){drop_tmp}{extra_act} }}\n",
        seed = r.gen_range(0..1000),
    )
}

fn c05() -> Outcome {
    let mut r = rng(5);
    let mut pairs = 0;
    for case in 0..150 {
        let src = compile_model(&mut r);
        let m = model(&src);
        let mut rt = Runtime::new(&m, None).map_err(|e| e.to_string())?;
        rt.run_for(2).map_err(|e| format!("case {case}: {e}"))?;
        let learned = rt.learned_rules();
        let Some(p) = learned.first() else { continue };
        let mut bare = m.clone();
        bare.productions.clear();
        bare.config.compile = false;
        let mut one = Runtime::new(&bare, None).map_err(|e| e.to_string())?;
        one.add_production(p.clone());
        one.run_for(1).map_err(|e| format!("case {case}: {e}"))?;
        ensure(one.wm().triples() == rt.wm().triples(), || {
            format!("case {case}: compiled rule diverges\n{src}\n{:?}\nvs\n{:?}", one.wm().triples(), rt.wm().triples())
        })?;
        pairs += 1;
    }
    ensure(pairs >= 100, || format!("only {pairs} pairs compiled"))?;
    Ok(format!("{pairs} compiled pairs reproduce their parents' end state in one cycle"))
}

// ---- c06: chunking -----------------------------------------------------

fn tie_task(names: &[String], prefer: usize) -> String {
    let mut s = format!(
        "cogm 1\nmode soar\nparams {{ chunking = true  episodic = false  max-cycles = 12 }}\n\
         wm {{ (s1 ^task @t1) (t1 ^prefer {} ^done no) }}\n",
        names[prefer]
    );
    for n in names {
        s += &format!("propose p-{n} {{ (?s ^task ?t) (?t ^done no) --> operator ?s {n} }}\n");
        s += &format!(
            "apply do-{n} for {n} {{ (?s ^selected ?o) (?o ^name {n}) (?s ^task ?t) (?t ^done no) --> -(?t ^done no) +(?t ^done {n}) !halt }}\n"
        );
    }
    s += "evaluate pick { (?x ^impasse tie) (?x ^superstate ?s) (?x ^item ?o) (?o ^name ?n) (?s ^task ?t) (?t ^prefer ?n) --> prefer ?o best }\n";
    s
}

fn c06() -> Outcome {
    let mut r = rng(6);
    let pool = ["red", "green", "blue", "amber", "teal", "plum"];
    for task in 0..50 {
        let k = r.gen_range(2..=4);
        let mut names: Vec<String> = pool.iter().map(|s| s.to_string()).collect();
        for i in (1..names.len()).rev() {
            names.swap(i, r.gen_range(0..=i));
        }
        names.truncate(k);
        let src = tie_task(&names, r.gen_range(0..k));
        let m = model(&src);
        let mut first = Runtime::new(&m, None).map_err(|e| e.to_string())?;
        first.run().map_err(|e| format!("task {task}: {e}"))?;
        let chunks = first.learned_rules();
        ensure(first.impasse_count() >= 1 && !chunks.is_empty(), || format!("task {task}: nothing learned"))?;

        let mut again = m.clone();
        again.config.chunking = false;
        let mut replay = Runtime::new(&again, None).map_err(|e| e.to_string())?;
        for c in chunks {
            replay.add_production(c);
        }
        let s = replay.run().map_err(|e| format!("task {task}: {e}"))?;
        ensure(replay.impasse_count() == 0, || format!("task {task}: {} impasses on replay", replay.impasse_count()))?;
        ensure(s.reason == StopReason::Halt, || format!("task {task}: replay stopped by {:?}", s.reason))?;
        ensure(replay.wm().top_state_snapshot() == first.wm().top_state_snapshot(), || {
            format!("task {task}: superstate differs")
        })?;
    }
    Ok("50 tie tasks replay with learned chunks: 0 impasses, same superstate".into())
}

// ---- c07: bandit RL ----------------------------------------------------

fn c07() -> Outcome {
    let (mut m, env) = bundled("bandit");
    m.config.max_cycles = 10_000;
    let started = Instant::now();
    let mut rt = Runtime::new(&m, env).map_err(|e| e.to_string())?;
    let mut decisions = 0;
    while decisions < 500 {
        let rec = rt.step().map_err(|e| e.to_string())?;
        decisions += rec.fired.iter().filter(|f| f.production.starts_with("a-")).count();
    }
    let elapsed = started.elapsed();
    let (left, right) = (rt.productions().utility(&sym("v-left")), rt.productions().utility(&sym("v-right")));
    ensure((left - 1.0).abs() <= 0.1, || format!("Q(left) = {left}"))?;
    ensure(left > right, || format!("Q(left) {left} <= Q(right) {right}"))?;
    ensure(elapsed.as_secs_f64() < 5.0, || format!("took {elapsed:?}"))?;
    Ok(format!("{decisions} decisions: Q(left) {left:.4}, Q(right) {right:.4}, {:.0} ms", elapsed.as_secs_f64() * 1000.0))
}

// ---- c08: utility learning ---------------------------------------------

fn c08() -> Outcome {
    let src = "cogm 1\nmode actr\nparams { alpha = 0.2  noise = 0  max-cycles = 200 }\nwm { (goal ^go yes) }\n\
        rule work { (goal ^go yes) --> +(reward ^amount 10) }\n";
    let mut rt = Runtime::new(&model(src), None).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for n in 1..=100 {
        rt.step().map_err(|e| e.to_string())?;
        let u = rt.productions().utility(&sym("work"));
        let want = 10.0 * (1.0 - 0.8f64.powi(n));
        let err = (u - want).abs();
        worst = worst.max(err);
        ensure(err <= 1e-9, || format!("after {n} rewards: {u} vs {want}"))?;
    }
    Ok(format!("100 rewards follow 10(1-0.8^n), max error {worst:.1e} (tol 1e-9)"))
}

// ---- c09: episodic memory ----------------------------------------------

fn c09() -> Outcome {
    let mut r = rng(9);
    let universe: Vec<Triple> =
        (0..8).map(|i| Triple::of("s1", &format!("e{}", i % 3), Value::sym(&format!("v{i}")))).collect();
    let mut queries = 0;
    for stream in 0..500 {
        let mut em = EpisodicStore::new();
        let mut present: BTreeSet<Triple> = BTreeSet::new();
        let mut snaps: Vec<BTreeSet<Triple>> = Vec::new();
        for c in 1..=r.gen_range(1..40u64) {
            let (mut add, mut rem) = (Vec::new(), Vec::new());
            for t in &universe {
                if r.gen_bool(0.2) {
                    if present.contains(t) {
                        rem.push(t.clone());
                    } else {
                        add.push(t.clone());
                    }
                }
            }
            for t in &rem {
                present.remove(t);
            }
            present.extend(add.iter().cloned());
            em.record(&add, &rem, c, c * 50);
            snaps.push(present.clone());
        }
        ensure(em.len() == snaps.len(), || format!("stream {stream}: {} episodes", em.len()))?;
        for (i, snap) in snaps.iter().enumerate() {
            let ep = em.episode(i).unwrap();
            ensure(&em.reconstruct(&ep) == snap, || format!("stream {stream}: episode {i} reconstructs wrongly"))?;
        }
        for _ in 0..10 {
            let cue: BTreeSet<Triple> = (0..r.gen_range(1..4)).map(|_| universe[r.gen_range(0..universe.len())].clone()).collect();
            let score = |s: &BTreeSet<Triple>| cue.iter().filter(|t| s.contains(t)).count();
            let full = (0..snaps.len()).rev().find(|&i| score(&snaps[i]) == cue.len());
            let want = full.or_else(|| {
                let mut best: Option<(usize, usize)> = None;
                for i in 0..snaps.len() {
                    let s = score(&snaps[i]);
                    if s > 0 && best.is_none_or(|(_, b)| s >= b) {
                        best = Some((i, s));
                    }
                }
                best.map(|(i, _)| i)
            });
            let cue: Vec<Triple> = cue.into_iter().collect();
            let got = em.retrieve(&cue).map(|e| e.index);
            ensure(got == want, || format!("stream {stream}: got {got:?}, scan {want:?}"))?;
            queries += 1;
        }
    }
    Ok(format!("500 streams reconstruct exactly; {queries} cue queries match a linear scan"))
}

// ---- c10: decision procedure -------------------------------------------

fn decide_oracle(proposed: &[Symbol], prefs: &[Preference]) -> (Option<ImpasseKind>, Vec<Symbol>) {
    let marked = |o: &Symbol, k: PrefKind| prefs.iter().any(|p| &p.operator == o && p.kind == k);
    let mut all: Vec<Symbol> = proposed.to_vec();
    for p in prefs.iter().filter(|p| p.kind == PrefKind::Acceptable) {
        all.push(p.operator.clone());
    }
    all.sort();
    all.dedup();
    let mut pool: Vec<Symbol> = all.into_iter().filter(|o| !marked(o, PrefKind::Reject)).collect();
    if pool.is_empty() {
        return (Some(ImpasseKind::StateNoChange), vec![]);
    }
    if pool.iter().any(|o| marked(o, PrefKind::Best)) {
        pool.retain(|o| marked(o, PrefKind::Best));
    }
    let n = pool.len();
    let ix = |s: &Symbol| pool.iter().position(|x| x == s);
    let mut reach = vec![vec![false; n]; n];
    for p in prefs {
        let Some(o) = &p.other else { continue };
        let (w, l) = match p.kind {
            PrefKind::Better => (&p.operator, o),
            PrefKind::Worse => (o, &p.operator),
            _ => continue,
        };
        if let (Some(a), Some(b)) = (ix(w), ix(l)) {
            if a != b {
                reach[a][b] = true;
            }
        }
    }
    let direct = reach.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let cyclic: Vec<Symbol> = (0..n).filter(|&i| reach[i][i]).map(|i| pool[i].clone()).collect();
    if !cyclic.is_empty() {
        return (Some(ImpasseKind::Conflict), cyclic);
    }
    let mut pool: Vec<Symbol> = (0..n).filter(|&j| !(0..n).any(|i| direct[i][j])).map(|j| pool[j].clone()).collect();
    if pool.iter().any(|o| !marked(o, PrefKind::Worst)) {
        pool.retain(|o| !marked(o, PrefKind::Worst));
    }
    match pool.len() {
        1 => (None, pool),
        _ if pool.iter().all(|o| marked(o, PrefKind::Indifferent)) => (None, pool),
        _ => (Some(ImpasseKind::Tie), pool),
    }
}

fn check_decision(
    case: u64,
    proposed: &[Symbol],
    prefs: &[Preference],
    values: &BTreeMap<Symbol, f64>,
    tally: &mut BTreeMap<&'static str, usize>,
) -> Result<(), String> {
    let got = decide(proposed, prefs, values, 1.0, &mut rng(case));
    let (kind, set) = decide_oracle(proposed, prefs);
    let label = match (&got, kind) {
        (Decision::Selected { operator, pool }, None) => {
            ensure(pool == &set && set.contains(operator), || format!("case {case}: {got:?} vs {set:?}\n{prefs:?}"))?;
            "selected"
        }
        (Decision::Impasse { kind: g, candidates }, Some(w)) => {
            ensure(*g == w && candidates == &set, || format!("case {case}: {got:?} vs {w:?} {set:?}\n{prefs:?}"))?;
            g.word()
        }
        _ => return Err(format!("case {case}: {got:?} vs oracle {kind:?} {set:?}\n{prefs:?}")),
    };
    *tally.entry(label).or_default() += 1;
    Ok(())
}

/// Unary markers a candidate can carry in the structured sweep; `None`
/// stands for no preference at all.
const MARKS: [Option<PrefKind>; 6] = [
    None,
    Some(PrefKind::Acceptable),
    Some(PrefKind::Reject),
    Some(PrefKind::Best),
    Some(PrefKind::Worst),
    Some(PrefKind::Indifferent),
];

/// Preferences for one point of the sweep: bit `b` of `rel` sets the
/// `b`-th ordered pair, written as `better` or as the mirrored `worse`.
fn sweep_prefs(names: &[Symbol], rel: u64, marks: u64) -> Vec<Preference> {
    let n = names.len();
    let mut prefs = Vec::new();
    let mut m = marks;
    for name in names {
        if let Some(kind) = MARKS[(m % 6) as usize] {
            prefs.push(Preference { operator: name.clone(), kind, other: None });
        }
        m /= 6;
    }
    let mut bit = 0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            if rel >> bit & 1 == 1 {
                let (a, b) = (names[i].clone(), names[j].clone());
                prefs.push(if bit % 2 == 0 {
                    Preference { operator: a, kind: PrefKind::Better, other: Some(b) }
                } else {
                    Preference { operator: b, kind: PrefKind::Worse, other: Some(a) }
                });
            }
            bit += 1;
        }
    }
    prefs
}

fn c10() -> Outcome {
    let names: Vec<Symbol> = (1..=4).map(|i| sym(&format!("o{i}"))).collect();
    let values: BTreeMap<Symbol, f64> = names.iter().zip([0.3, -0.2, 0.9, 0.0]).map(|(n, v)| (n.clone(), v)).collect();
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    let mut case = 0u64;

    // every proposal subset, dominance relation and marker assignment for
    // up to three candidates
    for n in 0..=3usize {
        let ops = &names[..n];
        let rels = 1u64 << (n * n.saturating_sub(1));
        let markings = 6u64.pow(n as u32);
        for mask in 0..(1u64 << n) {
            let proposed: Vec<Symbol> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ops[i].clone()).collect();
            for rel in 0..rels {
                for marks in 0..markings {
                    check_decision(case, &proposed, &sweep_prefs(ops, rel, marks), &values, &mut tally)?;
                    case += 1;
                }
            }
        }
    }
    // four candidates: every relation against a spread of markings, and
    // every marking against a spread of relations
    let exhaustive = case;
    for rel in 0..4096u64 {
        for k in 0..16 {
            let marks = (rel * 31 + k * 83) % 1296;
            check_decision(case, &names, &sweep_prefs(&names, rel, marks), &values, &mut tally)?;
            case += 1;
        }
    }
    for marks in 0..1296u64 {
        for k in 0..16 {
            let rel = (marks * 17 + k * 257) % 4096;
            check_decision(case, &names, &sweep_prefs(&names, rel, marks), &values, &mut tally)?;
            case += 1;
        }
    }
    let structured = case;

    // random sets, several preferences per candidate
    let mut r = rng(10);
    for _ in 0..20_000 {
        let k = r.gen_range(0..=4);
        let proposed: Vec<Symbol> = names[..k].to_vec();
        let mut prefs = Vec::new();
        for _ in 0..r.gen_range(0..7) {
            let kind = PrefKind::ALL[r.gen_range(0..PrefKind::ALL.len())];
            let op = names[r.gen_range(0..4)].clone();
            let other = kind.is_binary().then(|| names[r.gen_range(0..4)].clone());
            prefs.push(Preference { operator: op, kind, other });
        }
        let values: BTreeMap<Symbol, f64> = names.iter().map(|n| (n.clone(), r.gen_range(-1.0..1.0))).collect();
        check_decision(case, &proposed, &prefs, &values, &mut tally)?;
        case += 1;
    }
    let mix: Vec<String> = tally.iter().map(|(k, n)| format!("{k} {n}")).collect();
    Ok(format!(
        "{case} preference sets match the oracle: {exhaustive} exhaustive (n<=3), {} structured (n=4), 20000 random ({})",
        structured - exhaustive,
        mix.join(", ")
    ))
}

// ---- c11: determinism --------------------------------------------------

fn c11() -> Outcome {
    let mut sizes = Vec::new();
    for name in BUNDLED {
        let (m, env) = bundled(name);
        let run = || -> Result<String, String> {
            let mut rt = Runtime::new(&m, env.clone()).map_err(|e| e.to_string())?;
            rt.run().map_err(|e| e.to_string())?;
            Ok(rt.trace_jsonl())
        };
        let (a, b) = (run()?, run()?);
        ensure(a == b, || format!("{name}: two runs differ"))?;
        let golden = std::fs::read_to_string(repo_root().join(format!("models/golden/{name}.jsonl")))
            .map_err(|e| format!("{name}: {e}"))?;
        ensure(a == golden, || format!("{name}: trace differs from the golden file"))?;
        sizes.push(format!("{name} {}B", a.len()));
    }
    Ok(format!("bundled traces byte-identical across runs and to golden files ({})", sizes.join(", ")))
}

// ---- c12: DSL round trip and fuzzing -----------------------------------

fn c12() -> Outcome {
    let mut r = rng(12);
    for case in 0..1000 {
        let ast = gen::model_ast(&mut r);
        let text = print_model(&ast);
        let (back, diags) = parse(&text);
        ensure(diags.is_empty(), || format!("case {case}: {diags:?}\n{text}"))?;
        ensure(back == ast, || format!("case {case}: parse(print(ast)) != ast\n{text}"))?;
        ensure(print_model(&back) == text, || format!("case {case}: printing is not stable"))?;
    }
    let seeds: Vec<Vec<u8>> = BUNDLED
        .iter()
        .map(|n| std::fs::read(repo_root().join(format!("models/{n}.cogm"))).unwrap())
        .collect();
    let alphabet = b"(){}^?@!-+<>=*\"# \n\tx1.";
    let mut inputs = 0;
    for i in 0..5000 {
        let bytes: Vec<u8> = if i % 2 == 0 {
            (0..r.gen_range(0..300)).map(|_| r.gen()).collect()
        } else {
            let mut b = seeds[r.gen_range(0..seeds.len())].clone();
            for _ in 0..r.gen_range(1..10) {
                let at = r.gen_range(0..b.len().max(1));
                match r.gen_range(0..3) {
                    0 if !b.is_empty() => {
                        b.remove(at);
                    }
                    1 if !b.is_empty() => b[at] = alphabet[r.gen_range(0..alphabet.len())],
                    _ => b.insert(at.min(b.len()), alphabet[r.gen_range(0..alphabet.len())]),
                }
            }
            b
        };
        let src = String::from_utf8_lossy(&bytes).into_owned();
        let result = catch_unwind(AssertUnwindSafe(|| {
            let _ = dsl::load(&src);
            let _ = parse_env(&src);
        }));
        ensure(result.is_ok(), || format!("input {i} panicked: {src:?}"))?;
        inputs += 1;
    }
    Ok(format!("1000 generated models round-trip; {inputs} fuzzed inputs handled without a crash"))
}

// ---- c13: the metadata wall --------------------------------------------

fn rejected(src: &str) -> bool {
    let (m, diags) = dsl::load(src);
    m.is_none() && dsl::has_errors(&diags)
}

fn c13() -> Outcome {
    let mut refused = 0;
    for mode in ["actr", "soar"] {
        let head = format!("cogm 1\nmode {mode}\nwm {{ (a1 ^go yes) }}\n");
        let bad = [
            "rule w { (a1 ^go yes) --> +(retrieval ^status free) }".to_string(),
            "rule w { (a1 ^go yes) --> -(motor ^status busy) }".to_string(),
            "rule r { (a1 ^activation ?a) --> !halt }".to_string(),
            "rule r { (a1 ^go yes) (a1 ^utility ?u) --> !halt }".to_string(),
            "rule r { (a1 ^go yes) --> +(a1 ^base-level 3) }".to_string(),
        ];
        for b in &bad {
            let src = format!("{head}{b}\n");
            ensure(rejected(&src), || format!("accepted:\n{src}"))?;
            refused += 1;
        }
    }
    for name in BUNDLED {
        let (m, env) = bundled(name);
        let mut rt = Runtime::new(&m, env).map_err(|e| e.to_string())?;
        while !rt.is_halted() && rt.cycle() < m.config.max_cycles {
            rt.step().map_err(|e| format!("{name}: {e}"))?;
            let a = rt.audit();
            ensure(a.is_clean(), || format!("{name} cycle {}: {a:?}", rt.cycle()))?;
        }
        for r in rt.trace() {
            for t in r.wm_delta.added.iter().chain(&r.wm_delta.removed) {
                ensure(!METADATA_EDGES.iter().any(|e| t.contains(&format!("^{e} "))), || format!("{name}: trace shows {t}"))?;
            }
        }
        let (wm, _) = trace::replay_to(rt.trace(), rt.cycle()).ok_or("no record")?;
        ensure(wm.len() == rt.wm().triples().len(), || format!("{name}: replayed WM differs in size"))?;
    }
    Ok(format!("{refused} status writes / metadata reads refused; audits clean on every cycle of the bundled models"))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 13] = [
        ("c01", "cycle timing", c01),
        ("c02", "base-level activation", c02),
        ("c03", "retrieval argmax", c03),
        ("c04", "spreading activation", c04),
        ("c05", "production compilation", c05),
        ("c06", "chunking", c06),
        ("c07", "bandit reinforcement learning", c07),
        ("c08", "utility learning", c08),
        ("c09", "episodic memory", c09),
        ("c10", "decision procedure", c10),
        ("c11", "deterministic traces", c11),
        ("c12", "model language round trip and fuzzing", c12),
        ("c13", "metadata wall", c13),
    ];
    let mut failed = 0;
    for (id, title, check) in criteria {
        let outcome = catch_unwind(check).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {id} {title}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {title}: {why}");
            }
        }
    }
    println!("{} of 13 criteria pass", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
