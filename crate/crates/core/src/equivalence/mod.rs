//! Strong and rooted branching bisimilarity of finite LTSs, with
//! distinguishing witnesses, bounded projection comparison, the
//! end-to-end theorem checks and the axiom soundness suite.

use std::collections::BTreeSet;
use std::fmt;

use crate::process::ActionLabel;
use crate::semantics::Lts;

pub mod axioms;
mod partition;
pub mod theorem;
mod witness;

pub use theorem::{
    bounded_projection_equivalent, verify_system, verify_theorem, TheoremCheck, VerifyError,
};

use partition::Graph;

/// What a state offers: successful termination and its enabled labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Capabilities {
    pub terminates: bool,
    pub enabled: BTreeSet<ActionLabel>,
}

impl Capabilities {
    pub fn of(lts: &Lts, state: usize) -> Self {
        Capabilities {
            terminates: lts.is_terminating(state),
            enabled: lts.enabled(state),
        }
    }

    /// Neither terminates nor moves.
    pub fn is_deadlock(&self) -> bool {
        !self.terminates && self.enabled.is_empty()
    }
}

impl fmt::Display for Capabilities {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.enabled.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", labels.join(", "))?;
        if self.terminates {
            f.write_str(" + tick")?;
        }
        Ok(())
    }
}

/// How the final states of a witness differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Difference {
    /// One side terminates; the other can do nothing at all.
    TerminateVsDeadlock { left_terminates: bool },
    /// One side terminates, the other does not but can still move.
    Termination { left_terminates: bool },
    /// Same termination, different enabled labels.
    Actions {
        only_left: BTreeSet<ActionLabel>,
        only_right: BTreeSet<ActionLabel>,
    },
}

/// A distinguishing observation: the labels each side performs from its
/// initial state, and the capabilities of the states reached. The visible
/// (non-τ) parts of both traces coincide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub left_trace: Vec<ActionLabel>,
    pub right_trace: Vec<ActionLabel>,
    pub left_state: usize,
    pub right_state: usize,
    pub left: Capabilities,
    pub right: Capabilities,
}

fn visible(trace: &[ActionLabel]) -> Vec<&ActionLabel> {
    trace.iter().filter(|l| !l.is_tau()).collect()
}

impl Witness {
    pub fn observation(&self) -> Vec<&ActionLabel> {
        visible(&self.left_trace)
    }

    pub fn difference(&self) -> Difference {
        let (l, r) = (&self.left, &self.right);
        if l.terminates != r.terminates {
            let other = if l.terminates { r } else { l };
            return if other.is_deadlock() {
                Difference::TerminateVsDeadlock {
                    left_terminates: l.terminates,
                }
            } else {
                Difference::Termination {
                    left_terminates: l.terminates,
                }
            };
        }
        Difference::Actions {
            only_left: l.enabled.difference(&r.enabled).cloned().collect(),
            only_right: r.enabled.difference(&l.enabled).cloned().collect(),
        }
    }

    pub fn is_terminate_vs_deadlock(&self) -> bool {
        matches!(self.difference(), Difference::TerminateVsDeadlock { .. })
    }

    /// Check the witness against the LTSs it was computed from: both traces
    /// lead to the recorded states, their visible parts agree, and the
    /// recorded capabilities are accurate and different.
    pub fn replays(&self, left: &Lts, right: &Lts) -> bool {
        reaches(left, &self.left_trace, self.left_state)
            && reaches(right, &self.right_trace, self.right_state)
            && visible(&self.left_trace) == visible(&self.right_trace)
            && Capabilities::of(left, self.left_state) == self.left
            && Capabilities::of(right, self.right_state) == self.right
            && self.left != self.right
    }
}

fn reaches(lts: &Lts, trace: &[ActionLabel], target: usize) -> bool {
    let mut current = BTreeSet::from([lts.initial()]);
    for label in trace {
        current = current
            .iter()
            .flat_map(|&s| lts.outgoing(s).iter())
            .filter(|t| &t.label == label)
            .map(|t| t.target)
            .collect();
    }
    current.contains(&target)
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |t: &[ActionLabel]| {
            t.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(f, "left:  {} -> {}", show(&self.left_trace), self.left)?;
        write!(f, "right: {} -> {}", show(&self.right_trace), self.right)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Distinguished(Box<Witness>),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Equivalent => None,
            Verdict::Distinguished(w) => Some(w),
        }
    }
}

fn distinguished(g: &Graph, block: &[u32], branching: bool) -> Verdict {
    let w = witness::find(g, block, branching).unwrap_or_else(|| {
        // not expected; report the roots as they are
        let (s, t) = g.roots;
        let caps = |x: usize| Capabilities {
            terminates: g.terminating[x],
            enabled: g.out[x]
                .iter()
                .map(|&(a, _)| g.labels[a as usize].clone())
                .collect(),
        };
        Witness {
            left_trace: Vec::new(),
            right_trace: Vec::new(),
            left_state: s,
            right_state: t - g.split,
            left: caps(s),
            right: caps(t),
        }
    });
    Verdict::Distinguished(Box::new(w))
}

/// Strong bisimilarity of the initial states, respecting termination.
pub fn strong_equivalent(left: &Lts, right: &Lts) -> Verdict {
    let g = Graph::union(left, right);
    let block = partition::strong_blocks(&g);
    if block[g.roots.0] == block[g.roots.1] {
        Verdict::Equivalent
    } else {
        distinguished(&g, &block, false)
    }
}

/// Rooted branching bisimilarity of the initial states, respecting
/// termination.
pub fn rooted_branching_equivalent(left: &Lts, right: &Lts) -> Verdict {
    let g = Graph::union(left, right);
    let block = partition::branching_blocks(&g);
    if partition::roots_match(&g, &block) {
        Verdict::Equivalent
    } else {
        distinguished(&g, &block, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{Datum, Port, ProcessTerm};
    use crate::semantics::{build_lts, BuildOptions};
    use crate::thread::ActionMarker;

    fn label(i: u8) -> ActionLabel {
        ActionLabel::PortSend(Port::new(i).unwrap(), Datum::Marker(ActionMarker::Stop))
    }

    fn a() -> ProcessTerm {
        ProcessTerm::atom(label(1))
    }
    fn b() -> ProcessTerm {
        ProcessTerm::atom(label(2))
    }
    fn c() -> ProcessTerm {
        ProcessTerm::atom(label(3))
    }

    fn lts(t: &ProcessTerm) -> Lts {
        build_lts(t, &BuildOptions::raw()).unwrap()
    }

    fn check(verdict: &Verdict, l: &Lts, r: &Lts) {
        if let Some(w) = verdict.witness() {
            assert!(w.replays(l, r), "witness does not replay:\n{w}");
        }
    }

    #[test]
    fn strong_examples() {
        let (l, r) = (
            lts(&ProcessTerm::alt(a(), b())),
            lts(&ProcessTerm::alt(b(), a())),
        );
        assert!(strong_equivalent(&l, &r).is_equivalent());

        let l = lts(&ProcessTerm::seq(a(), ProcessTerm::alt(b(), c())));
        let r = lts(&ProcessTerm::alt(
            ProcessTerm::seq(a(), b()),
            ProcessTerm::seq(a(), c()),
        ));
        let v = strong_equivalent(&l, &r);
        assert!(!v.is_equivalent());
        check(&v, &l, &r);
        assert_eq!(v.witness().unwrap().observation(), vec![&label(1)]);

        let l = lts(&a());
        let r = lts(&ProcessTerm::seq(a(), ProcessTerm::Delta));
        let v = strong_equivalent(&l, &r);
        check(&v, &l, &r);
        assert!(v.witness().unwrap().is_terminate_vs_deadlock());
    }

    #[test]
    fn branching_examples() {
        let l = lts(&ProcessTerm::seq(a(), ProcessTerm::Tau));
        let r = lts(&a());
        assert!(rooted_branching_equivalent(&l, &r).is_equivalent());
        assert!(!strong_equivalent(&l, &r).is_equivalent());

        let l = lts(&ProcessTerm::seq(
            a(),
            ProcessTerm::alt(
                ProcessTerm::seq(ProcessTerm::Tau, ProcessTerm::alt(b(), c())),
                b(),
            ),
        ));
        let r = lts(&ProcessTerm::seq(a(), ProcessTerm::alt(b(), c())));
        assert!(rooted_branching_equivalent(&l, &r).is_equivalent());

        let l = lts(&ProcessTerm::seq(ProcessTerm::Tau, a()));
        let r = lts(&a());
        let v = rooted_branching_equivalent(&l, &r);
        assert!(!v.is_equivalent());
        check(&v, &l, &r);
    }

    #[test]
    fn tau_is_not_inert_when_it_drops_options() {
        // a . (tau . b + c) vs a . (b + c)
        let l = lts(&ProcessTerm::seq(
            a(),
            ProcessTerm::alt(ProcessTerm::seq(ProcessTerm::Tau, b()), c()),
        ));
        let r = lts(&ProcessTerm::seq(a(), ProcessTerm::alt(b(), c())));
        let v = rooted_branching_equivalent(&l, &r);
        assert!(!v.is_equivalent());
        check(&v, &l, &r);
    }

    #[test]
    fn tau_cycles_collapse() {
        use crate::process::{ProcessSpec, RecVar};
        use std::collections::BTreeMap;
        use std::sync::Arc;
        // X = tau . X + a  vs  tau . a + a, both rooted-equivalent to tau.a + a
        let x = RecVar::plain("X");
        let spec = ProcessSpec::new(BTreeMap::from([(
            x.clone(),
            ProcessTerm::alt(
                ProcessTerm::seq(ProcessTerm::Tau, ProcessTerm::var(x.clone())),
                a(),
            ),
        )]))
        .unwrap();
        let l = lts(&ProcessTerm::Rec(x, Arc::new(spec)));
        let r = lts(&ProcessTerm::alt(
            ProcessTerm::seq(ProcessTerm::Tau, a()),
            a(),
        ));
        assert!(rooted_branching_equivalent(&l, &r).is_equivalent());
    }

    #[test]
    fn termination_is_respected() {
        let l = lts(&ProcessTerm::seq(a(), ProcessTerm::Tau));
        let r = lts(&ProcessTerm::seq(
            a(),
            ProcessTerm::seq(ProcessTerm::Tau, ProcessTerm::Delta),
        ));
        let v = rooted_branching_equivalent(&l, &r);
        check(&v, &l, &r);
        assert!(v.witness().unwrap().is_terminate_vs_deadlock());
    }
}
