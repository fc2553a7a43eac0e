//! Acceptance criteria. Each test prints one PASS/FAIL line and then
//! asserts; run with `--nocapture` to see the lines.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use instream::equivalence::axioms::{run_axioms, AxiomConfig, SCHEMAS};
use instream::equivalence::{
    rooted_branching_equivalent, verify_system, verify_theorem, TheoremCheck,
};
use instream::extraction::extract_plain;
use instream::process::{ActionLabel, Datum, Port, ProcessTerm};
use instream::protocols::{
    compose_mutant, compose_system, overlap_states, Mutation, ProtocolId, ReceiverVariant,
};
use instream::semantics::{build_lts, BuildOptions, StateKey, Stepper, Termination};
use instream::thread::{
    enumerate_threads, random_spec_with, random_thread, unfold_once, ActionMarker, Alphabet,
    BasicAction, ThreadTerm,
};

const AXIOM_SAMPLES: usize = 200;
const AXIOM_MAX_DEPTH: usize = 4;
const AXIOM_BUDGET: Duration = Duration::from_secs(60);
const THEOREM1_BUDGET: Duration = Duration::from_secs(5 * 60);
const THEOREM2_BUDGET: Duration = Duration::from_secs(10 * 60);
const EXHAUSTIVE_DEPTH: usize = 2;
const RANDOM_THREADS: usize = 500;
const RANDOM_THREAD_DEPTH: usize = 5;
const RANDOM_SPECS: usize = 100;
const MAX_EQUATIONS: usize = 3;
const SPEC_RHS_DEPTH: usize = 2;
const MUTATION_THRESHOLD: f64 = 0.95;
const AIP_INSTANCES: usize = 100;
const AIP_THREAD_DEPTH: usize = 4;
const AIP_AGREEMENT: f64 = 1.0;
const PROPOSITION_SPECS: usize = 100;

fn verdict_line(criterion: u32, title: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion} [{status}] {title}: {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn alphabet() -> Alphabet {
    Alphabet::new(&["f", "g"], &["m"])
}

fn actions() -> Vec<BasicAction> {
    alphabet().basic_actions()
}

/// Exhaustive depth-2 threads, random deeper threads and random recursive
/// specifications.
fn theorem_corpus() -> Vec<ThreadTerm> {
    let mut corpus = enumerate_threads(EXHAUSTIVE_DEPTH, &actions()).unwrap();
    assert_eq!(corpus.len(), 202);
    for i in 0..RANDOM_THREADS {
        corpus.push(random_thread(
            RANDOM_THREAD_DEPTH,
            &actions(),
            10_000 + i as u64,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20_000);
    for _ in 0..RANDOM_SPECS {
        let spec = random_spec_with(&mut rng, MAX_EQUATIONS, SPEC_RHS_DEPTH, &actions());
        corpus.push(ThreadTerm::Rec("X0".into(), spec.spec().clone()));
    }
    corpus
}

fn mixed_leaves() -> ThreadTerm {
    ThreadTerm::post(
        ThreadTerm::post(
            ThreadTerm::Stop,
            BasicAction::new("g", "n"),
            ThreadTerm::Stop,
        ),
        BasicAction::new("f", "m"),
        ThreadTerm::Deadlock,
    )
}

fn mixed_alphabet() -> Alphabet {
    Alphabet::new(&["f", "g"], &["m", "n"])
}

fn run_corpus(protocol: ProtocolId, variant: ReceiverVariant) -> (usize, Vec<String>, Duration) {
    let started = Instant::now();
    let corpus = theorem_corpus();
    let mut failures = Vec::new();
    for t in &corpus {
        match verify_theorem(t, &alphabet(), protocol, variant, Termination::Server, None) {
            Ok(check) if check.verdict.is_equivalent() => {}
            Ok(check) => failures.push(format!("{t:?}\n{}", check.verdict.witness().unwrap())),
            Err(e) => failures.push(format!("{t:?}: {e}")),
        }
    }
    (corpus.len(), failures, started.elapsed())
}

#[test]
fn criterion_1_axiom_soundness() {
    let started = Instant::now();
    let reports = run_axioms(&AxiomConfig {
        samples: AXIOM_SAMPLES,
        seed: 1,
        max_depth: AXIOM_MAX_DEPTH,
    });
    let elapsed = started.elapsed();
    let failing: Vec<String> = reports
        .iter()
        .filter(|r| !r.all_passed() || r.instances != AXIOM_SAMPLES)
        .map(|r| {
            format!(
                "{} {}/{} {:?}",
                r.schema,
                r.passed,
                r.instances,
                r.failures.first()
            )
        })
        .collect();
    let instances: usize = reports.iter().map(|r| r.instances).sum();
    let strong: usize = reports.iter().map(|r| r.strong).sum();
    let pass = failing.is_empty() && reports.len() == SCHEMAS.len() && elapsed < AXIOM_BUDGET;
    verdict_line(
        1,
        "axiom soundness",
        pass,
        &format!(
            "{} schemas, {instances} instances ({strong} strong), {} failing, {:.2}s (budget {}s) {failing:?}",
            reports.len(),
            failing.len(),
            elapsed.as_secs_f64(),
            AXIOM_BUDGET.as_secs()
        ),
    );
}

#[test]
fn criterion_2_simple_protocol() {
    let (n, failures, elapsed) = run_corpus(ProtocolId::Simple, ReceiverVariant::Repaired);
    let pass = failures.is_empty() && elapsed < THEOREM1_BUDGET;
    verdict_line(
        2,
        "simple protocol, server termination",
        pass,
        &format!(
            "{}/{n} equivalent in {:.2}s (budget {}s) {:?}",
            n - failures.len(),
            elapsed.as_secs_f64(),
            THEOREM1_BUDGET.as_secs(),
            failures.first()
        ),
    );
}

#[test]
fn criterion_3_pipelined_protocol() {
    let (n, failures, elapsed) = run_corpus(ProtocolId::Pipelined, ReceiverVariant::Repaired);
    let pass = failures.is_empty() && elapsed < THEOREM2_BUDGET;
    verdict_line(
        3,
        "pipelined protocol, repaired receiver, server termination",
        pass,
        &format!(
            "{}/{n} equivalent in {:.2}s (budget {}s) {:?}",
            n - failures.len(),
            elapsed.as_secs_f64(),
            THEOREM2_BUDGET.as_secs(),
            failures.first()
        ),
    );
}

#[test]
fn criterion_4_strict_termination_divergence() {
    let check = |t: &ThreadTerm| {
        verify_theorem(
            t,
            &alphabet(),
            ProtocolId::Simple,
            ReceiverVariant::Repaired,
            Termination::Strict,
            None,
        )
        .unwrap()
    };
    let stop = check(&ThreadTerm::Stop);
    let dead = check(&ThreadTerm::Deadlock);
    let stop_ok = match stop.verdict.witness() {
        Some(w) => {
            w.replays(&stop.left, &stop.right)
                && w.is_terminate_vs_deadlock()
                && w.left.terminates
                && w.observation().is_empty()
                && w.left_trace
                    .iter()
                    .chain(&w.right_trace)
                    .all(ActionLabel::is_tau)
        }
        None => false,
    };
    let dead_ok = dead.verdict.is_equivalent();
    let detail = format!(
        "S: {} / D: {}",
        stop.verdict
            .witness()
            .map_or("equivalent".to_string(), |w| w
                .to_string()
                .replace('\n', " | ")),
        if dead_ok {
            "equivalent"
        } else {
            "distinguished"
        }
    );
    verdict_line(
        4,
        "strict termination: S distinguished, D equivalent",
        stop_ok && dead_ok,
        &detail,
    );
}

/// The parallel components of a system state (below abstraction and
/// encapsulation).
fn components(t: &ProcessTerm, out: &mut Vec<Arc<ProcessTerm>>) {
    match t {
        ProcessTerm::Abstract(_, p) | ProcessTerm::Encap(_, p) => components(p, out),
        ProcessTerm::Par(p, q, _) => {
            for side in [p, q] {
                if matches!(**side, ProcessTerm::Par(..)) {
                    components(side, out);
                } else {
                    out.push(side.clone());
                }
            }
        }
        _ => out.push(Arc::new(t.clone())),
    }
}

fn blocked_components(check: &TheoremCheck, state: usize) -> (bool, bool) {
    let StateKey::Term(term) = check.right.state(state) else {
        return (false, false);
    };
    let mut parts = Vec::new();
    components(term, &mut parts);
    let mut stepper = Stepper::new();
    let void = ActionLabel::PortRecv(Port::P2, Datum::Marker(ActionMarker::Void));
    let (mut thread_waits, mut receiver_waits) = (false, false);
    for part in parts {
        let labels: Vec<ActionLabel> = stepper
            .step(&part)
            .unwrap()
            .into_iter()
            .map(|s| s.0)
            .collect();
        if !labels.is_empty()
            && labels
                .iter()
                .all(|l| matches!(l, ActionLabel::PortRecv(p, _) if *p == Port::P4))
        {
            thread_waits = true;
        }
        if labels == [void.clone()] {
            receiver_waits = true;
        }
    }
    (thread_waits, receiver_waits)
}

#[test]
fn criterion_5_faithful_receiver_divergence() {
    let check = verify_theorem(
        &mixed_leaves(),
        &mixed_alphabet(),
        ProtocolId::Pipelined,
        ReceiverVariant::Faithful,
        Termination::Server,
        None,
    )
    .unwrap();
    let (pass, detail) = match check.verdict.witness() {
        None => (false, "equivalent".to_string()),
        Some(w) => {
            let replays = w.replays(&check.left, &check.right);
            let (thread_waits, receiver_waits) = blocked_components(&check, w.right_state);
            let observation: Vec<String> = w.observation().iter().map(|l| l.to_string()).collect();
            (
                replays && thread_waits && receiver_waits && w.right.is_deadlock(),
                format!(
                    "after {observation:?}: replays={replays}, thread awaits rcv_4={thread_waits}, receiver awaits rcv_2(void*)={receiver_waits}"
                ),
            )
        }
    };
    verdict_line(5, "faithful receiver deadlocks", pass, &detail);
}

#[test]
fn criterion_6_mutation_sensitivity() {
    let corpus: Vec<ThreadTerm> = enumerate_threads(EXHAUSTIVE_DEPTH, &actions())
        .unwrap()
        .into_iter()
        .filter(|t| t.swap_branches() != *t)
        .collect();
    let mut rates = Vec::new();
    for mutation in [Mutation::SwappedReplies, Mutation::NoReplyChannel] {
        let distinguished = corpus
            .iter()
            .filter(|t| {
                let sys = compose_mutant(
                    t,
                    &alphabet(),
                    ProtocolId::Simple,
                    ReceiverVariant::Repaired,
                    mutation,
                )
                .unwrap();
                let check = verify_system(t, &sys, Termination::Server, None).unwrap();
                if let Some(w) = check.verdict.witness() {
                    assert!(w.replays(&check.left, &check.right));
                }
                !check.verdict.is_equivalent()
            })
            .count();
        rates.push((mutation, distinguished as f64 / corpus.len() as f64));
    }
    let pass = rates.iter().all(|(_, r)| *r >= MUTATION_THRESHOLD);
    verdict_line(
        6,
        "mutations are detected",
        pass,
        &format!(
            "{} reply-dependent threads, rates {rates:?} (threshold {MUTATION_THRESHOLD})",
            corpus.len()
        ),
    );
}

#[test]
fn criterion_7_pipelining_overlap() {
    let sys = compose_system(
        &mixed_leaves(),
        &mixed_alphabet(),
        ProtocolId::Pipelined,
        ReceiverVariant::Repaired,
    )
    .unwrap();
    let lts = build_lts(&sys.process, &BuildOptions::default()).unwrap();
    let overlap = overlap_states(&lts);
    verdict_line(
        7,
        "reply transfer overlaps the next dispatch",
        !overlap.is_empty(),
        &format!("{} of {} reachable states", overlap.len(), lts.num_states()),
    );
}

#[test]
fn criterion_8_projection_agreement() {
    let mut agree = 0;
    let mut total = 0;
    let mut distinguished = 0;
    for i in 0..AIP_INSTANCES {
        let t = random_thread(AIP_THREAD_DEPTH, &actions(), 30_000 + i as u64);
        let depth = (2 * t.depth() + 4) as u32;
        for termination in [Termination::Server, Termination::Strict] {
            let full = verify_theorem(
                &t,
                &alphabet(),
                ProtocolId::Simple,
                ReceiverVariant::Repaired,
                termination,
                None,
            )
            .unwrap();
            let bounded = verify_theorem(
                &t,
                &alphabet(),
                ProtocolId::Simple,
                ReceiverVariant::Repaired,
                termination,
                Some(depth),
            )
            .unwrap();
            total += 1;
            distinguished += !full.verdict.is_equivalent() as usize;
            agree += (full.verdict.is_equivalent() == bounded.verdict.is_equivalent()) as usize;
        }
    }
    let rate = agree as f64 / total as f64;
    verdict_line(
        8,
        "bounded projection agrees with the unbounded check",
        rate >= AIP_AGREEMENT,
        &format!("{agree}/{total} agree ({distinguished} distinguished under the unbounded check)"),
    );
}

#[test]
fn criterion_9_recursion_unfolding() {
    let mut rng = ChaCha8Rng::seed_from_u64(40_000);
    let mut equivalent = 0;
    for _ in 0..PROPOSITION_SPECS {
        let spec = random_spec_with(&mut rng, MAX_EQUATIONS, SPEC_RHS_DEPTH, &actions());
        let constant = ThreadTerm::Rec("X0".into(), spec.spec().clone());
        let unfolded = unfold_once("X0", &spec).unwrap();
        let l = build_lts(&extract_plain(&constant), &BuildOptions::default()).unwrap();
        let r = build_lts(&extract_plain(&unfolded), &BuildOptions::default()).unwrap();
        equivalent += rooted_branching_equivalent(&l, &r).is_equivalent() as usize;
    }
    verdict_line(
        9,
        "extraction respects unfolding",
        equivalent == PROPOSITION_SPECS,
        &format!("{equivalent}/{PROPOSITION_SPECS} equivalent"),
    );
}
