//! Aldebaran (`.aut`) export.
//!
//! The format has no notion of successful termination, so every
//! terminating state gets a transition labelled `tick` into one extra sink
//! state. Both the sink and the tick transitions are counted in the header.

use std::fmt::Write;

use crate::semantics::Lts;

pub const TICK: &str = "tick";

pub fn export_aut(lts: &Lts) -> String {
    let ticks = lts.terminating().len();
    let sink = lts.num_states();
    let states = lts.num_states() + usize::from(ticks > 0);
    let mut out = String::new();
    writeln!(
        out,
        "des ({},{},{})",
        lts.initial(),
        lts.num_transitions() + ticks,
        states
    )
    .unwrap();
    for t in lts.transitions() {
        writeln!(out, "({},\"{}\",{})", t.source, t.label, t.target).unwrap();
    }
    for &s in lts.terminating() {
        writeln!(out, "({s},\"{TICK}\",{sink})").unwrap();
    }
    out
}

/// Parse the header line back into `(initial, transitions, states)`.
pub fn parse_header(text: &str) -> Option<(usize, usize, usize)> {
    let line = text.lines().next()?;
    let inner = line.strip_prefix("des (")?.strip_suffix(')')?;
    let mut parts = inner.split(',').map(|p| p.trim().parse::<usize>());
    let (a, b, c) = (
        parts.next()?.ok()?,
        parts.next()?.ok()?,
        parts.next()?.ok()?,
    );
    Some((a, b, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{ActionLabel, Datum, Port, ProcessTerm};
    use crate::protocols::{bool_domain, build_channel};
    use crate::semantics::{build_lts, BuildOptions};
    use crate::thread::ActionMarker;

    #[test]
    fn silent_deadlock() {
        let lts = build_lts(
            &ProcessTerm::seq(ProcessTerm::Tau, ProcessTerm::Delta),
            &BuildOptions::default(),
        )
        .unwrap();
        assert_eq!(export_aut(&lts), "des (0,1,2)\n(0,\"tau\",1)\n");
    }

    #[test]
    fn termination_tick() {
        let a = ProcessTerm::atom(ActionLabel::PortSend(
            Port::P1,
            Datum::Marker(ActionMarker::Stop),
        ));
        let text = export_aut(&build_lts(&a, &BuildOptions::default()).unwrap());
        assert_eq!(parse_header(&text), Some((0, 2, 3)));
        assert!(text.contains("(1,\"tick\",2)"));
    }

    #[test]
    fn channel_has_no_sink() {
        let ch = build_channel(Port::P3, Port::P4, bool_domain()).unwrap();
        let text = export_aut(&build_lts(&ch, &BuildOptions::default()).unwrap());
        assert_eq!(parse_header(&text), Some((0, 4, 3)));
        assert!(!text.contains(TICK));
        assert_eq!(text.lines().count(), 5);
    }
}
