mod common;

use cogkernel::data::MetaSubject;
use cogkernel::dsl::parse_env;
use cogkernel::runtime::{Runtime, StopReason};
use cogkernel::{RunError, Symbol, Triple, Value};

use common::{bundled, model, runtime, trace_conforms, BUNDLED};

const HALT: &str = "cogm 1\nmode actr\nwm { (goal ^go yes) }\nrule stop { (goal ^go yes) --> !halt }\n";

const TICK: &str = "cogm 1\nmode actr\nwm { (goal ^n 0) }\n\
    rule tick { (goal ^n ?n) --> -(goal ^n ?n) +(goal ^n 1) }\n";

#[test]
fn one_halting_rule_is_one_cycle_of_50_ms() {
    let mut rt = runtime(HALT);
    let s = rt.run().unwrap();
    assert_eq!((s.cycles, s.time_ms, s.reason), (1, 50, StopReason::Halt));
}

#[test]
fn empty_buffer_model_is_quiescent_at_cycle_0() {
    let mut rt = runtime("cogm 1\nmode actr\n");
    let s = rt.run().unwrap();
    assert_eq!((s.cycles, s.time_ms, s.reason), (0, 0, StopReason::Quiescence));
    assert_eq!(rt.trace().last().unwrap().phase, "quiescent");
}

#[test]
fn stepping_matches_a_bounded_run() {
    for name in BUNDLED {
        let (m, env) = bundled(name);
        for n in [1, 3, 7] {
            let mut a = Runtime::new(&m, env.clone()).unwrap();
            let mut b = Runtime::new(&m, env.clone()).unwrap();
            a.run_for(n).unwrap();
            while !b.is_halted() && b.cycle() < n {
                let before = b.trace().len();
                let r = b.step().unwrap();
                assert_eq!(b.trace().len(), before + 1);
                assert_eq!(b.trace().last().unwrap(), &r);
            }
            assert_eq!(a.trace_jsonl(), b.trace_jsonl(), "{name} n={n}");
        }
    }
}

#[test]
fn step_after_halt_is_an_error() {
    let mut rt = runtime(HALT);
    rt.run().unwrap();
    assert!(matches!(rt.step(), Err(RunError::Halted)));
}

#[test]
fn cycles_cost_50_ms_each() {
    let mut rt = runtime(TICK);
    let s = rt.run_for(40).unwrap();
    assert_eq!((s.cycles, s.time_ms), (40, 2000));
}

const PRESS: &str = "cogm 1\nmode actr\nwm { (goal ^step press) }\n\
    rule press { (goal ^step press) --> !motor motor (press key) -(goal ^step press) +(goal ^step wait) }\n\
    rule idle { (goal ^step wait) (motor ^status busy) --> -(goal ^step wait) +(goal ^step wait2) }\n\
    rule idle2 { (goal ^step wait2) (motor ^status busy) --> -(goal ^step wait2) +(goal ^step wait) }\n\
    rule seen { (goal ^step ?s) (motor ^status success) (percept ^percept ?p) (?p ^light on) --> !halt }\n";

#[test]
fn motor_is_busy_until_its_latency_has_passed() {
    let env = parse_env("motor \"press key\" latency 200 status success percept { (lamp ^light on) }").unwrap();
    let mut rt = Runtime::new(&model(PRESS), Some(env)).unwrap();
    let s = rt.run().unwrap();
    assert_eq!(s.reason, StopReason::Halt);
    let busy: Vec<u64> = rt
        .trace()
        .iter()
        .filter(|r| r.buffers["motor"].status == "busy")
        .map(|r| r.time_ms)
        .collect();
    // issued at the end of cycle 1 (50 ms), done at 250 ms, seen by the
    // cycle that starts then; other rules kept firing meanwhile
    assert_eq!(busy, vec![50, 100, 150, 200, 250]);
    let done = rt.trace().iter().find(|r| r.buffers["motor"].status == "success").unwrap();
    assert_eq!(done.time_ms, 300);
}

#[test]
fn unscripted_motor_command_fails_the_run() {
    let mut rt = runtime(PRESS);
    let err = rt.run().unwrap_err();
    assert!(matches!(err, RunError::UnknownEnvironmentResponse(ref c) if c == "press key"), "{err}");
}

#[test]
fn percepts_carry_no_derivation_and_arrive_at_cycle_start() {
    let src = "cogm 1\nmode actr\nparams { quiescence = wait }\nwm { (goal ^n 0) }\n\
        rule look { (percept ^percept ?p) (?p ^color ?c) --> !halt }\n";
    let env = parse_env("percept at 120 { (light ^color red) }").unwrap();
    let mut rt = Runtime::new(&model(src), Some(env)).unwrap();
    rt.step().unwrap();
    let id = rt.wm().find(&Triple::of("light", "color", Value::sym("red"))).unwrap();
    assert!(rt.wm().meta(id).is_none_or(|m| m.derivation.is_none()));
    assert!(!rt
        .metadata()
        .iter()
        .any(|r| r.subject == MetaSubject::Element(id) && matches!(r.payload, cogkernel::data::MetaPayload::Derivation(_))));
    let s = rt.run().unwrap();
    // the cycle that sees it starts at 120 ms
    assert_eq!((s.time_ms, s.reason), (170, StopReason::Halt));
}

#[test]
fn end_quiescence_ignores_pending_events_and_wait_does_not() {
    let src = |q: &str| {
        format!(
            "cogm 1\nmode actr\nparams {{ quiescence = {q} }}\n\
             rule look {{ (percept ^percept ?p) (?p ^color ?c) --> !halt }}\n"
        )
    };
    let env = parse_env("percept at 500 { (light ^color red) }").unwrap();
    let mut end = Runtime::new(&model(&src("end")), Some(env.clone())).unwrap();
    assert_eq!(end.run().unwrap().reason, StopReason::Quiescence);
    let mut wait = Runtime::new(&model(&src("wait")), Some(env)).unwrap();
    let s = wait.run().unwrap();
    assert_eq!((s.reason, s.time_ms), (StopReason::Halt, 550));
}

#[test]
fn state_mode_without_proposals_makes_one_substate_then_stops() {
    let mut rt = runtime("cogm 1\nmode soar\n");
    let s = rt.run().unwrap();
    assert_eq!(s.reason, StopReason::Quiescence);
    assert_eq!(rt.impasse_count(), 1);
    assert_eq!(rt.trace()[1].impasses[0].kind, "state-no-change");
}

#[test]
fn traces_conform_to_the_schema() {
    for name in BUNDLED {
        let (m, env) = bundled(name);
        let mut rt = Runtime::new(&m, env).unwrap();
        rt.run().unwrap();
        trace_conforms(&rt.trace_jsonl()).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let mut rt = runtime(HALT);
    rt.run().unwrap();
    trace_conforms(&rt.trace_jsonl()).unwrap();
}

const STORE: &str = "cogm 1\nmode actr\nwm { (goal ^n 1) }\n\
    rule make { (goal ^n 1) --> -(goal ^n 1) +(goal ^n 2) +(imaginal ^payload @fact) }\n\
    rule fill { (imaginal ^payload ?f) (goal ^n 2) --> +(?f ^kind learned) -(goal ^n 2) +(goal ^n 3) }\n\
    rule keep { (imaginal ^payload ?f) (?f ^kind learned) (goal ^n 3) --> !store ?f -(goal ^n 3) }\n";

#[test]
fn declarative_store_round_trips_and_persists() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.dm"), dir.path().join("b.dm"));
    let mut rt = runtime(STORE);
    rt.run().unwrap();
    assert!(rt.semantic().get(&Symbol::named("fact")).is_some(), "stored by the run");
    rt.save_dm(&a).unwrap();

    // a later run starts from the saved store
    let mut next = runtime("cogm 1\nmode actr\n");
    next.load_dm(&a).unwrap();
    assert!(next.semantic().get(&Symbol::named("fact")).is_some());
    next.save_dm(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // a damaged file is refused and the loaded store is kept
    let mut text = std::fs::read_to_string(&a).unwrap();
    text = text.replace("learned", "learnt");
    std::fs::write(&b, text).unwrap();
    assert!(next.load_dm(&b).is_err());
    assert!(next.semantic().get(&Symbol::named("fact")).is_some());
}

#[test]
fn bundled_models_stop_as_expected() {
    let (m, env) = bundled("count");
    let mut rt = Runtime::new(&m, env).unwrap();
    assert_eq!(rt.run().unwrap().reason, StopReason::Halt);
    assert!(rt.wm().contains(&Triple::of("goal", "count", Value::sym("four"))));

    let (m, env) = bundled("tie");
    let mut rt = Runtime::new(&m, env).unwrap();
    rt.run().unwrap();
    assert_eq!(rt.learned_rules().len(), 1);
    assert!(rt.wm().contains(&Triple::of("t1", "done", Value::sym("b"))));
}
