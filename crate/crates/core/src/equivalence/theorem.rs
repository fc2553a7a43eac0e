//! End-to-end comparison of a thread's plain process with the process of
//! the corresponding client/server system.

use thiserror::Error;

use super::{rooted_branching_equivalent, Verdict};
use crate::extraction::extract_plain;
use crate::process::ProcessTerm;
use crate::protocols::{
    compose_system, ProtocolError, ProtocolId, ReceiverVariant, SystemDescription,
};
use crate::semantics::{build_lts, BuildOptions, Lts, SemanticsError, Termination};
use crate::thread::{Alphabet, ThreadTerm};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// The verdict together with both LTSs it was computed on.
#[derive(Clone, Debug)]
pub struct TheoremCheck {
    pub verdict: Verdict,
    pub left: Lts,
    pub right: Lts,
}

/// Compare `pi_n(p)` and `pi_n(q)` up to rooted branching bisimilarity.
pub fn bounded_projection_equivalent(
    p: &ProcessTerm,
    q: &ProcessTerm,
    n: u32,
    options: &BuildOptions,
) -> Result<Verdict, SemanticsError> {
    let left = build_lts(&ProcessTerm::proj(n, p.clone()), options)?;
    let right = build_lts(&ProcessTerm::proj(n, q.clone()), options)?;
    Ok(rooted_branching_equivalent(&left, &right))
}

/// `tau . [[p]]` and `tau . tau_{j}(system)`.
pub fn theorem_sides(p: &ThreadTerm, system: &SystemDescription) -> (ProcessTerm, ProcessTerm) {
    let left = ProcessTerm::seq(ProcessTerm::Tau, extract_plain(p));
    let right = ProcessTerm::seq(ProcessTerm::Tau, system.abstracted());
    (left, right)
}

/// Check `p` against an already composed system, optionally only up to
/// projection depth `depth`.
pub fn verify_system(
    p: &ThreadTerm,
    system: &SystemDescription,
    termination: Termination,
    depth: Option<u32>,
) -> Result<TheoremCheck, VerifyError> {
    let (mut left, mut right) = theorem_sides(p, system);
    if let Some(n) = depth {
        left = ProcessTerm::proj(n, left);
        right = ProcessTerm::proj(n, right);
    }
    let options = BuildOptions::with_termination(termination);
    let left = build_lts(&left, &options)?;
    let right = build_lts(&right, &options)?;
    let verdict = rooted_branching_equivalent(&left, &right);
    Ok(TheoremCheck {
        verdict,
        left,
        right,
    })
}

pub fn verify_theorem(
    p: &ThreadTerm,
    alphabet: &Alphabet,
    protocol: ProtocolId,
    variant: ReceiverVariant,
    termination: Termination,
    depth: Option<u32>,
) -> Result<TheoremCheck, VerifyError> {
    let system = compose_system(p, alphabet, protocol, variant)?;
    verify_system(p, &system, termination, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{ActionLabel, Datum, Port};
    use crate::thread::{ActionMarker, BasicAction};

    fn fg() -> Alphabet {
        Alphabet::new(&["f", "g"], &["m", "n"])
    }

    fn mixed() -> ThreadTerm {
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

    fn run(
        p: &ThreadTerm,
        protocol: ProtocolId,
        variant: ReceiverVariant,
        termination: Termination,
    ) -> TheoremCheck {
        let check = verify_theorem(p, &fg(), protocol, variant, termination, None).unwrap();
        if let Some(w) = check.verdict.witness() {
            assert!(w.replays(&check.left, &check.right));
        }
        check
    }

    #[test]
    fn deadlock_thread_strict() {
        let c = run(
            &ThreadTerm::Deadlock,
            ProtocolId::Simple,
            ReceiverVariant::Repaired,
            Termination::Strict,
        );
        assert!(c.verdict.is_equivalent());
    }

    #[test]
    fn stop_thread_depends_on_termination_reading() {
        let c = run(
            &ThreadTerm::Stop,
            ProtocolId::Simple,
            ReceiverVariant::Repaired,
            Termination::Server,
        );
        assert!(c.verdict.is_equivalent());
        let c = run(
            &ThreadTerm::Stop,
            ProtocolId::Simple,
            ReceiverVariant::Repaired,
            Termination::Strict,
        );
        let w = c.verdict.witness().expect("distinguished");
        assert!(w.is_terminate_vs_deadlock());
        assert!(w.left.terminates);
        assert!(w.observation().is_empty());
    }

    #[test]
    fn faithful_receiver_deadlocks_on_mixed_leaves() {
        let c = run(
            &mixed(),
            ProtocolId::Pipelined,
            ReceiverVariant::Faithful,
            Termination::Server,
        );
        assert!(!c.verdict.is_equivalent());
        let c = run(
            &mixed(),
            ProtocolId::Pipelined,
            ReceiverVariant::Repaired,
            Termination::Server,
        );
        assert!(c.verdict.is_equivalent());
    }

    #[test]
    fn simple_protocol_on_mixed_leaves() {
        let c = run(
            &mixed(),
            ProtocolId::Simple,
            ReceiverVariant::Repaired,
            Termination::Server,
        );
        assert!(c.verdict.is_equivalent());
    }

    #[test]
    fn projection_examples() {
        let a = ProcessTerm::atom(ActionLabel::PortSend(
            Port::P1,
            Datum::Marker(ActionMarker::Stop),
        ));
        let b = ProcessTerm::atom(ActionLabel::PortSend(
            Port::P2,
            Datum::Marker(ActionMarker::Stop),
        ));
        let c = ProcessTerm::atom(ActionLabel::PortSend(Port::P3, Datum::Reply(true)));
        let ab = ProcessTerm::seq(a.clone(), b.clone());
        let ac = ProcessTerm::seq(a.clone(), c.clone());
        let opts = BuildOptions::default();
        assert!(bounded_projection_equivalent(&ab, &ac, 1, &opts)
            .unwrap()
            .is_equivalent());
        assert!(!bounded_projection_equivalent(&ab, &ac, 2, &opts)
            .unwrap()
            .is_equivalent());
        let ta = ProcessTerm::seq(ProcessTerm::Tau, a);
        let tb = ProcessTerm::seq(ProcessTerm::Tau, b);
        assert!(!bounded_projection_equivalent(&ta, &tb, 1, &opts)
            .unwrap()
            .is_equivalent());
    }
}
