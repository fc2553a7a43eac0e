//! Pseudo-random closed process terms, used by the axiom suite and the
//! property tests.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{ActionLabel, Datum, LabelSet, Port, ProcessSpec, ProcessTerm, RecVar};
use crate::thread::{ActionMarker, Focus, Method};

/// Shape parameters for random terms.
#[derive(Clone, Debug)]
pub struct TermShape {
    pub alphabet: Vec<ActionLabel>,
    pub max_depth: usize,
    pub allow_tau: bool,
    /// Parallel operators only appear at or below this remaining depth, which
    /// keeps the interleaving state spaces small.
    pub parallel_depth: usize,
}

impl TermShape {
    pub fn new(alphabet: Vec<ActionLabel>, max_depth: usize, allow_tau: bool) -> Self {
        TermShape {
            alphabet,
            max_depth,
            allow_tau,
            parallel_depth: 2,
        }
    }
}

/// Six labels forming three communicating pairs, so that parallel
/// composition exercises both `i` and `j` communications.
pub fn default_alphabet() -> Vec<ActionLabel> {
    let f = Focus::new("f");
    vec![
        ActionLabel::PortSend(Port::P1, Datum::Marker(ActionMarker::Stop)),
        ActionLabel::PortRecv(Port::P1, Datum::Marker(ActionMarker::Stop)),
        ActionLabel::PortSend(Port::P3, Datum::Reply(true)),
        ActionLabel::PortRecv(Port::P3, Datum::Reply(true)),
        ActionLabel::ServiceSend(f.clone(), Datum::Method(Method::new("m"))),
        ActionLabel::ServiceRecv(f, Datum::Method(Method::new("m"))),
    ]
}

pub fn random_label<R: Rng + ?Sized>(rng: &mut R, alphabet: &[ActionLabel]) -> ActionLabel {
    alphabet.choose(rng).expect("non-empty alphabet").clone()
}

/// A random subset of the alphabet (for encapsulation/abstraction sets).
pub fn random_label_set<R: Rng + ?Sized>(rng: &mut R, alphabet: &[ActionLabel]) -> LabelSet {
    LabelSet::new(alphabet.iter().filter(|_| rng.gen_bool(0.5)).cloned())
}

/// A constant: an atomic action, `delta`, or (when allowed) `tau`.
pub fn random_constant<R: Rng + ?Sized>(rng: &mut R, shape: &TermShape) -> ProcessTerm {
    let roll = rng.gen_range(0..10);
    if roll == 0 {
        ProcessTerm::Delta
    } else if roll == 1 && shape.allow_tau {
        ProcessTerm::Tau
    } else {
        ProcessTerm::Atom(random_label(rng, &shape.alphabet))
    }
}

pub fn random_process<R: Rng + ?Sized>(rng: &mut R, shape: &TermShape) -> ProcessTerm {
    random_at(rng, shape, shape.max_depth)
}

fn random_at<R: Rng + ?Sized>(rng: &mut R, shape: &TermShape, depth: usize) -> ProcessTerm {
    if depth == 0 || rng.gen_ratio(1, 5) {
        return random_constant(rng, shape);
    }
    let sub = |rng: &mut R| random_at(rng, shape, depth - 1);
    let parallel_ok = depth <= shape.parallel_depth;
    loop {
        let op = rng.gen_range(0..10);
        return match op {
            0 | 1 => ProcessTerm::alt(sub(rng), sub(rng)),
            2 | 3 => ProcessTerm::seq(sub(rng), sub(rng)),
            4 if parallel_ok => ProcessTerm::par(sub(rng), sub(rng)),
            5 if parallel_ok => {
                if rng.gen_bool(0.5) {
                    ProcessTerm::left_merge(sub(rng), sub(rng))
                } else {
                    ProcessTerm::comm_merge(sub(rng), sub(rng))
                }
            }
            6 => ProcessTerm::encap(random_label_set(rng, &shape.alphabet), sub(rng)),
            7 if shape.allow_tau => {
                ProcessTerm::abstraction(random_label_set(rng, &shape.alphabet), sub(rng))
            }
            8 => ProcessTerm::proj(rng.gen_range(0..4), sub(rng)),
            9 => random_constant(rng, shape),
            _ => continue,
        };
    }
}

/// A random guarded specification whose variables occur only at the tail of
/// a summand (`p . X`), so every reachable state space is finite. Returns
/// the spec and its variables.
pub fn random_process_spec<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &TermShape,
    max_equations: usize,
) -> (Arc<ProcessSpec>, Vec<RecVar>) {
    let count = rng.gen_range(1..=max_equations.max(1));
    let vars: Vec<RecVar> = (0..count)
        .map(|i| RecVar::plain(&format!("P{i}")))
        .collect();
    let small = TermShape {
        max_depth: shape.max_depth.min(2),
        ..shape.clone()
    };
    let mut equations = BTreeMap::new();
    for var in &vars {
        let summands = rng.gen_range(1..=3);
        let mut parts = Vec::new();
        for _ in 0..summands {
            let head = random_process(rng, &small);
            let head = if head.contains_abstraction() {
                ProcessTerm::Atom(random_label(rng, &shape.alphabet))
            } else {
                head
            };
            if rng.gen_bool(0.7) {
                let target = vars.choose(rng).unwrap().clone();
                parts.push(ProcessTerm::seq(head, ProcessTerm::var(target)));
            } else {
                parts.push(head);
            }
        }
        equations.insert(var.clone(), ProcessTerm::sum(parts));
    }
    let spec = ProcessSpec::new(equations).expect("tail recursion is guarded");
    (Arc::new(spec), vars)
}
