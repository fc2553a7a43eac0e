//! Structural operational semantics for process terms and the finite
//! labelled transition systems generated from them.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::process::{gamma, ActionLabel, BoolExpr, Perpetual, ProcessSpec, ProcessTerm, RecVar};

pub const DEFAULT_MAX_STATES: usize = 200_000;
pub const DEFAULT_MAX_TRANSITIONS: usize = 1_000_000;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("free data variable {0} reached by the semantics")]
    FreeDataVariable(String),
    #[error("free recursion variable {0} reached by the semantics")]
    FreeRecursionVariable(String),
    #[error("recursion constant {0} has no equation in its specification")]
    UndefinedEquation(String),
    #[error("state budget exceeded after {states} states and {transitions} transitions")]
    StateBudgetExceeded { states: usize, transitions: usize },
}

/// Where a transition leads.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Successor {
    Terminated,
    Term(Arc<ProcessTerm>),
}

/// Reading of successful termination for parallel compositions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Termination {
    /// A parallel composition terminates only when all operands have.
    #[default]
    Strict,
    /// Operands marked perpetual also count as terminated while they sit at
    /// their initial term.
    Server,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
    pub max_transitions: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: DEFAULT_MAX_STATES,
            max_transitions: DEFAULT_MAX_TRANSITIONS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub limits: Limits,
    pub termination: Termination,
    /// Normalise state terms (flatten and sort `+`, drop `delta` summands,
    /// `delta . x = delta`). Disabled by the axiom suite so the rewrites it
    /// validates are not applied up front.
    pub canonicalize: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            limits: Limits::default(),
            termination: Termination::Strict,
            canonicalize: true,
        }
    }
}

impl BuildOptions {
    pub fn with_termination(termination: Termination) -> Self {
        BuildOptions {
            termination,
            ..BuildOptions::default()
        }
    }

    pub fn raw() -> Self {
        BuildOptions {
            canonicalize: false,
            ..BuildOptions::default()
        }
    }
}

/// Computes transitions, caching recursion unfoldings per constant.
#[derive(Default)]
pub struct Stepper {
    unfoldings: HashMap<(RecVar, usize), (Arc<ProcessSpec>, Arc<ProcessTerm>)>,
}

type Steps = Vec<(ActionLabel, Successor)>;

impl Stepper {
    pub fn new() -> Self {
        Stepper::default()
    }

    /// All transitions of `t`, sorted and without duplicates.
    pub fn step(&mut self, t: &Arc<ProcessTerm>) -> Result<Steps, SemanticsError> {
        let mut out = self.raw_steps(t)?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn unfold(
        &mut self,
        var: &RecVar,
        spec: &Arc<ProcessSpec>,
    ) -> Result<Arc<ProcessTerm>, SemanticsError> {
        let key = (var.clone(), Arc::as_ptr(spec) as usize);
        if let Some((_, body)) = self.unfoldings.get(&key) {
            return Ok(body.clone());
        }
        let rhs = spec
            .get(var)
            .ok_or_else(|| SemanticsError::UndefinedEquation(var.to_string()))?;
        let body = close_process(&Arc::new(rhs.clone()), spec);
        self.unfoldings.insert(key, (spec.clone(), body.clone()));
        Ok(body)
    }

    fn raw_steps(&mut self, t: &Arc<ProcessTerm>) -> Result<Steps, SemanticsError> {
        use ProcessTerm::*;
        Ok(match &**t {
            Atom(l) => {
                if let Some(crate::process::Datum::Var(v)) = l.datum() {
                    return Err(SemanticsError::FreeDataVariable(v.to_string()));
                }
                vec![(l.clone(), Successor::Terminated)]
            }
            Tau => vec![(ActionLabel::Tau, Successor::Terminated)],
            Delta => Vec::new(),
            Alt(p, q) => {
                let mut steps = self.raw_steps(p)?;
                steps.extend(self.raw_steps(q)?);
                steps
            }
            Seq(p, q) => self
                .raw_steps(p)?
                .into_iter()
                .map(|(l, s)| {
                    let next = match s {
                        Successor::Terminated => Successor::Term(q.clone()),
                        Successor::Term(p2) => Successor::Term(Arc::new(Seq(p2, q.clone()))),
                    };
                    (l, next)
                })
                .collect(),
            Par(p, q, flags) => {
                let left = self.raw_steps(p)?;
                let right = self.raw_steps(q)?;
                let mut steps = Vec::with_capacity(left.len() + right.len());
                for (l, s) in &left {
                    steps.push((l.clone(), compose(s, &Successor::Term(q.clone()), flags)));
                }
                for (l, s) in &right {
                    steps.push((l.clone(), compose(&Successor::Term(p.clone()), s, flags)));
                }
                communications(&left, &right, flags, &mut steps);
                steps
            }
            LeftMerge(p, q) => {
                let none = Perpetual::none();
                self.raw_steps(p)?
                    .into_iter()
                    .map(|(l, s)| {
                        let next = compose(&s, &Successor::Term(q.clone()), &none);
                        (l, next)
                    })
                    .collect()
            }
            CommMerge(p, q) => {
                let left = self.raw_steps(p)?;
                let right = self.raw_steps(q)?;
                let mut steps = Vec::new();
                communications(&left, &right, &Perpetual::none(), &mut steps);
                steps
            }
            Encap(h, p) => self
                .raw_steps(p)?
                .into_iter()
                .filter(|(l, _)| !h.contains(l))
                .map(|(l, s)| (l, wrap(s, |x| Encap(h.clone(), x))))
                .collect(),
            Abstract(i, p) => self
                .raw_steps(p)?
                .into_iter()
                .map(|(l, s)| {
                    let l = if i.contains(&l) { ActionLabel::Tau } else { l };
                    (l, wrap(s, |x| Abstract(i.clone(), x)))
                })
                .collect(),
            Proj(n, p) => {
                let n = *n;
                self.raw_steps(p)?
                    .into_iter()
                    .filter_map(|(l, s)| {
                        if l.is_tau() {
                            Some((l, wrap(s, |x| Proj(n, x))))
                        } else if n >= 1 {
                            Some((l, wrap(s, |x| Proj(n - 1, x))))
                        } else {
                            None
                        }
                    })
                    .collect()
            }
            Var(v) => return Err(SemanticsError::FreeRecursionVariable(v.to_string())),
            Rec(v, spec) => {
                if let Some(crate::process::Datum::Var(d)) = v.args.iter().find(|a| !a.is_closed())
                {
                    return Err(SemanticsError::FreeDataVariable(d.to_string()));
                }
                let body = self.unfold(v, spec)?;
                self.raw_steps(&body)?
            }
            Cond(b, p, q) => match b {
                BoolExpr::Lit(true) => self.raw_steps(p)?,
                BoolExpr::Lit(false) => self.raw_steps(q)?,
                BoolExpr::Var(v) => return Err(SemanticsError::FreeDataVariable(v.to_string())),
            },
            EarlyInput(input, body) => {
                let mut steps = Vec::with_capacity(input.domain.len());
                for d in input.domain.iter() {
                    let next = input
                        .receive(d, body)
                        .expect("domain elements fit their binder");
                    steps.push((
                        input.channel.receive(d.clone()),
                        Successor::Term(Arc::new(next)),
                    ));
                }
                steps
            }
        })
    }
}

fn wrap(s: Successor, f: impl FnOnce(Arc<ProcessTerm>) -> ProcessTerm) -> Successor {
    match s {
        Successor::Terminated => Successor::Terminated,
        Successor::Term(x) => Successor::Term(Arc::new(f(x))),
    }
}

/// Parallel composition of two successors; a terminated side drops out.
fn compose(left: &Successor, right: &Successor, flags: &Perpetual) -> Successor {
    match (left, right) {
        (Successor::Terminated, Successor::Terminated) => Successor::Terminated,
        (Successor::Terminated, x) | (x, Successor::Terminated) => x.clone(),
        (Successor::Term(p), Successor::Term(q)) => Successor::Term(Arc::new(ProcessTerm::Par(
            p.clone(),
            q.clone(),
            flags.clone(),
        ))),
    }
}

fn communications(left: &Steps, right: &Steps, flags: &Perpetual, out: &mut Steps) {
    for (a, s1) in left {
        if a.is_tau() {
            continue;
        }
        for (b, s2) in right {
            if let Some(c) = gamma(a, b) {
                out.push((c, compose(s1, s2, flags)));
            }
        }
    }
}

/// Replace every recursion variable by its constant in `spec`.
pub fn close_process(t: &Arc<ProcessTerm>, spec: &Arc<ProcessSpec>) -> Arc<ProcessTerm> {
    use ProcessTerm::*;
    let c = |p: &Arc<ProcessTerm>| close_process(p, spec);
    let rebuilt = match &**t {
        Atom(_) | Tau | Delta | Rec(..) => return t.clone(),
        Var(v) => Rec(v.clone(), spec.clone()),
        Alt(p, q) => Alt(c(p), c(q)),
        Seq(p, q) => Seq(c(p), c(q)),
        Par(p, q, flags) => Par(c(p), c(q), flags.clone()),
        LeftMerge(p, q) => LeftMerge(c(p), c(q)),
        CommMerge(p, q) => CommMerge(c(p), c(q)),
        Encap(h, p) => Encap(h.clone(), c(p)),
        Abstract(i, p) => Abstract(i.clone(), c(p)),
        Proj(n, p) => Proj(*n, c(p)),
        Cond(b, p, q) => Cond(b.clone(), c(p), c(q)),
        EarlyInput(input, body) => EarlyInput(input.clone(), c(body)),
    };
    Arc::new(rebuilt)
}

/// `step` with a throwaway cache.
pub fn step(t: &ProcessTerm) -> Result<Vec<(ActionLabel, Successor)>, SemanticsError> {
    Stepper::new().step(&Arc::new(t.clone()))
}

/// Whether a state term may terminate under the server convention: every
/// operand of a parallel composition has either terminated or is a
/// perpetual operand back at its initial term.
pub fn server_idle(t: &ProcessTerm) -> bool {
    match t {
        ProcessTerm::Par(p, q, flags) => idle_side(p, &flags.left) && idle_side(q, &flags.right),
        ProcessTerm::Encap(_, p) | ProcessTerm::Abstract(_, p) | ProcessTerm::Proj(_, p) => {
            server_idle(p)
        }
        _ => false,
    }
}

fn idle_side(operand: &Arc<ProcessTerm>, mark: &Option<Arc<ProcessTerm>>) -> bool {
    mark.as_ref().is_some_and(|initial| operand == initial) || server_idle(operand)
}

/// Normal form used for state keys: `+` flattened, sorted and deduplicated
/// with `delta` summands removed, and `delta . x` collapsed to `delta`.
pub fn canonicalize(t: &Arc<ProcessTerm>) -> Arc<ProcessTerm> {
    use ProcessTerm::*;
    let same = |a: &Arc<ProcessTerm>, b: &Arc<ProcessTerm>| Arc::ptr_eq(a, b);
    match &**t {
        Atom(_) | Tau | Delta | Var(_) | Rec(..) => t.clone(),
        Alt(..) => {
            let mut parts: Vec<Arc<ProcessTerm>> = Vec::new();
            flatten_alt(t, &mut parts);
            let mut parts: Vec<Arc<ProcessTerm>> = parts
                .iter()
                .map(canonicalize)
                .filter(|p| !matches!(**p, Delta))
                .collect();
            parts.sort();
            parts.dedup();
            let Some(mut acc) = parts.pop() else {
                return Arc::new(Delta);
            };
            while let Some(p) = parts.pop() {
                acc = Arc::new(Alt(p, acc));
            }
            if *acc == **t {
                t.clone()
            } else {
                acc
            }
        }
        Seq(p, q) => {
            let p2 = canonicalize(p);
            if matches!(*p2, Delta) {
                return Arc::new(Delta);
            }
            let q2 = canonicalize(q);
            if same(p, &p2) && same(q, &q2) {
                t.clone()
            } else {
                Arc::new(Seq(p2, q2))
            }
        }
        Par(p, q, flags) => {
            let (p2, q2) = (canonicalize(p), canonicalize(q));
            let flags2 = Perpetual {
                left: flags.left.as_ref().map(canonicalize),
                right: flags.right.as_ref().map(canonicalize),
            };
            if same(p, &p2) && same(q, &q2) && flags2 == *flags {
                t.clone()
            } else {
                Arc::new(Par(p2, q2, flags2))
            }
        }
        LeftMerge(p, q) | CommMerge(p, q) | Cond(_, p, q) => {
            let (p2, q2) = (canonicalize(p), canonicalize(q));
            if same(p, &p2) && same(q, &q2) {
                return t.clone();
            }
            Arc::new(match &**t {
                LeftMerge(..) => LeftMerge(p2, q2),
                CommMerge(..) => CommMerge(p2, q2),
                Cond(b, ..) => Cond(b.clone(), p2, q2),
                _ => unreachable!(),
            })
        }
        Encap(_, p) | Abstract(_, p) | Proj(_, p) | EarlyInput(_, p) => {
            let p2 = canonicalize(p);
            if same(p, &p2) {
                return t.clone();
            }
            Arc::new(match &**t {
                Encap(h, _) => Encap(h.clone(), p2),
                Abstract(i, _) => Abstract(i.clone(), p2),
                Proj(n, _) => Proj(*n, p2),
                EarlyInput(input, _) => EarlyInput(input.clone(), p2),
                _ => unreachable!(),
            })
        }
    }
}

fn flatten_alt(t: &Arc<ProcessTerm>, out: &mut Vec<Arc<ProcessTerm>>) {
    match &**t {
        ProcessTerm::Alt(p, q) => {
            flatten_alt(p, out);
            flatten_alt(q, out);
        }
        _ => out.push(t.clone()),
    }
}

/// State identity: a process term or the post-termination marker.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateKey {
    Term(Arc<ProcessTerm>),
    Terminated,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: usize,
    pub label: ActionLabel,
    pub target: usize,
}

/// A finite labelled transition system. States are numbered in breadth-first
/// discovery order; transitions are sorted by source, label and target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    states: Vec<StateKey>,
    initial: usize,
    transitions: Vec<Transition>,
    offsets: Vec<usize>,
    terminating: BTreeSet<usize>,
}

impl Lts {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn states(&self) -> &[StateKey] {
        &self.states
    }

    pub fn state(&self, id: usize) -> &StateKey {
        &self.states[id]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn outgoing(&self, state: usize) -> &[Transition] {
        &self.transitions[self.offsets[state]..self.offsets[state + 1]]
    }

    pub fn terminating(&self) -> &BTreeSet<usize> {
        &self.terminating
    }

    pub fn is_terminating(&self, state: usize) -> bool {
        self.terminating.contains(&state)
    }

    /// Labels of the outgoing transitions of `state`.
    pub fn enabled(&self, state: usize) -> BTreeSet<ActionLabel> {
        self.outgoing(state)
            .iter()
            .map(|t| t.label.clone())
            .collect()
    }

    /// Every label on some transition.
    pub fn labels(&self) -> BTreeSet<ActionLabel> {
        self.transitions.iter().map(|t| t.label.clone()).collect()
    }

    fn finish(
        states: Vec<StateKey>,
        mut transitions: Vec<Transition>,
        terminating: BTreeSet<usize>,
    ) -> Lts {
        transitions.sort();
        transitions.dedup();
        let mut offsets = vec![0; states.len() + 1];
        for t in &transitions {
            offsets[t.source + 1] += 1;
        }
        for i in 0..states.len() {
            offsets[i + 1] += offsets[i];
        }
        Lts {
            states,
            initial: 0,
            transitions,
            offsets,
            terminating,
        }
    }
}

/// Breadth-first reachability closure of `t` under [`Stepper::step`].
pub fn build_lts(t: &ProcessTerm, options: &BuildOptions) -> Result<Lts, SemanticsError> {
    let mut stepper = Stepper::new();
    let norm = |x: Arc<ProcessTerm>| {
        if options.canonicalize {
            canonicalize(&x)
        } else {
            x
        }
    };
    let root = StateKey::Term(norm(Arc::new(t.clone())));
    let mut states = vec![root.clone()];
    let mut index: HashMap<StateKey, usize> = HashMap::new();
    index.insert(root, 0);
    let mut transitions = Vec::new();
    let mut terminating = BTreeSet::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let term = match &states[id] {
            StateKey::Terminated => {
                terminating.insert(id);
                continue;
            }
            StateKey::Term(term) => term.clone(),
        };
        if options.termination == Termination::Server && server_idle(&term) {
            terminating.insert(id);
        }
        for (label, succ) in stepper.step(&term)? {
            let key = match succ {
                Successor::Terminated => StateKey::Terminated,
                Successor::Term(x) => StateKey::Term(norm(x)),
            };
            let target = match index.get(&key) {
                Some(&target) => target,
                None => {
                    let target = states.len();
                    if target >= options.limits.max_states {
                        return Err(SemanticsError::StateBudgetExceeded {
                            states: states.len(),
                            transitions: transitions.len(),
                        });
                    }
                    states.push(key.clone());
                    index.insert(key, target);
                    queue.push_back(target);
                    target
                }
            };
            transitions.push(Transition {
                source: id,
                label,
                target,
            });
            if transitions.len() > options.limits.max_transitions {
                return Err(SemanticsError::StateBudgetExceeded {
                    states: states.len(),
                    transitions: transitions.len(),
                });
            }
        }
    }
    Ok(Lts::finish(states, transitions, terminating))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{Datum, LabelSet, Port};
    use crate::thread::ActionMarker;

    fn a() -> ActionLabel {
        ActionLabel::PortSend(Port::P1, Datum::Marker(ActionMarker::Stop))
    }

    fn b() -> ActionLabel {
        ActionLabel::PortRecv(Port::P1, Datum::Marker(ActionMarker::Stop))
    }

    #[test]
    fn atom_steps_to_termination() {
        assert_eq!(
            step(&ProcessTerm::atom(a())).unwrap(),
            vec![(a(), Successor::Terminated)]
        );
    }

    #[test]
    fn encapsulated_action_blocks() {
        let t = ProcessTerm::encap(
            LabelSet::new([a()]),
            ProcessTerm::seq(ProcessTerm::atom(a()), ProcessTerm::atom(b())),
        );
        assert!(step(&t).unwrap().is_empty());
    }

    #[test]
    fn projection_zero_blocks_actions() {
        assert!(step(&ProcessTerm::proj(0, ProcessTerm::atom(a())))
            .unwrap()
            .is_empty());
        let t = ProcessTerm::proj(0, ProcessTerm::Tau);
        assert_eq!(
            step(&t).unwrap(),
            vec![(ActionLabel::Tau, Successor::Terminated)]
        );
    }

    #[test]
    fn abstraction_renames_to_tau() {
        let t = ProcessTerm::abstraction(LabelSet::new([a()]), ProcessTerm::atom(a()));
        assert_eq!(
            step(&t).unwrap(),
            vec![(ActionLabel::Tau, Successor::Terminated)]
        );
    }

    #[test]
    fn parallel_communicates() {
        let t = ProcessTerm::par(ProcessTerm::atom(a()), ProcessTerm::atom(b()));
        let steps = step(&t).unwrap();
        assert!(steps.contains(&(ActionLabel::J, Successor::Terminated)));
        assert_eq!(steps.len(), 3);
    }

    #[test]
    fn free_data_variable_is_an_error() {
        let t = ProcessTerm::atom(ActionLabel::PortSend(Port::P3, Datum::var("u")));
        assert!(matches!(step(&t), Err(SemanticsError::FreeDataVariable(_))));
        let t = ProcessTerm::cond(
            BoolExpr::Var("b".into()),
            ProcessTerm::Tau,
            ProcessTerm::Tau,
        );
        assert!(matches!(step(&t), Err(SemanticsError::FreeDataVariable(_))));
    }

    #[test]
    fn small_lts_shapes() {
        let lts = build_lts(
            &ProcessTerm::seq(ProcessTerm::Tau, ProcessTerm::Delta),
            &BuildOptions::default(),
        )
        .unwrap();
        assert_eq!((lts.num_states(), lts.num_transitions()), (2, 1));
        assert!(lts.terminating().is_empty());
        assert_eq!(lts.transitions()[0].label, ActionLabel::Tau);

        let lts = build_lts(&ProcessTerm::atom(a()), &BuildOptions::default()).unwrap();
        assert_eq!((lts.num_states(), lts.num_transitions()), (2, 1));
        assert_eq!(lts.state(1), &StateKey::Terminated);
        assert!(lts.is_terminating(1));
    }

    #[test]
    fn build_is_deterministic() {
        let t = ProcessTerm::par(
            ProcessTerm::alt(ProcessTerm::atom(a()), ProcessTerm::atom(b())),
            ProcessTerm::seq(ProcessTerm::atom(b()), ProcessTerm::atom(a())),
        );
        let one = build_lts(&t, &BuildOptions::default()).unwrap();
        let two = build_lts(&t, &BuildOptions::default()).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn budget_is_enforced() {
        let t = ProcessTerm::par(
            ProcessTerm::seq(ProcessTerm::atom(a()), ProcessTerm::atom(a())),
            ProcessTerm::seq(ProcessTerm::atom(b()), ProcessTerm::atom(b())),
        );
        let mut opts = BuildOptions::default();
        opts.limits.max_states = 3;
        assert!(matches!(
            build_lts(&t, &opts),
            Err(SemanticsError::StateBudgetExceeded { .. })
        ));
    }

    #[test]
    fn canonical_form_sorts_and_prunes() {
        let t = Arc::new(ProcessTerm::alt(
            ProcessTerm::atom(b()),
            ProcessTerm::alt(
                ProcessTerm::Delta,
                ProcessTerm::alt(ProcessTerm::atom(a()), ProcessTerm::atom(b())),
            ),
        ));
        let c = canonicalize(&t);
        let mut expected = [ProcessTerm::atom(a()), ProcessTerm::atom(b())];
        expected.sort();
        let [x, y] = expected;
        assert_eq!(*c, ProcessTerm::alt(x, y));
        let dead = Arc::new(ProcessTerm::seq(ProcessTerm::Delta, ProcessTerm::atom(a())));
        assert_eq!(*canonicalize(&dead), ProcessTerm::Delta);
    }
}
