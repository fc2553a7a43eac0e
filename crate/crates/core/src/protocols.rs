//! Transmission channels, receivers and the composed client/server systems.
//!
//! A remotely controlled thread sends instructions on port 1; channel
//! `CH12` forwards them to the receiver on port 2. The receiver performs the
//! instruction on its service and returns the reply on port 3, which `CH34`
//! forwards to the thread on port 4.
//!
//! The simple protocol handles one instruction per round trip. The
//! pipelined protocol transmits, along with each instruction, the first
//! actions of both continuations, so the receiver can dispatch the next
//! instruction while the reply is still travelling back.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::extraction::{extract_rct, extract_rct_alt};
use crate::process::{
    expand_parallel_input, ActionLabel, Binder, BoolExpr, Channel, Datum, Input, LabelSet,
    Perpetual, Port, ProcessError, ProcessSpec, ProcessTerm, RecVar,
};
use crate::semantics::{Lts, StateKey, Stepper};
use crate::thread::{ActionMarker, Alphabet, Focus, ThreadTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolId {
    Simple,
    Pipelined,
}

/// Terminal clauses of the pipelined receiver. Only `Pipelined` systems are
/// affected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReceiverVariant {
    /// After a reply that leads the thread to `S` or `D`, wait for `void*`
    /// without forwarding the reply.
    Faithful,
    /// Forward the reply on port 3 first, then wait for `void*`.
    #[default]
    Repaired,
}

/// Deliberate faults used to check that the theorem checks can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// The receiver returns the negation of every reply.
    SwappedReplies,
    /// The reply channel is left out of the composition.
    NoReplyChannel,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("focus and method alphabets must be non-empty")]
    EmptyAlphabet,
    #[error(transparent)]
    Process(#[from] ProcessError),
}

pub fn bool_domain() -> Vec<Datum> {
    vec![Datum::Reply(true), Datum::Reply(false)]
}

/// Basic actions plus `stop*` and `dead*`.
pub fn bact_i_markers(alphabet: &Alphabet) -> Vec<ActionMarker> {
    let mut out: Vec<ActionMarker> = alphabet
        .basic_actions()
        .into_iter()
        .map(ActionMarker::Action)
        .collect();
    out.push(ActionMarker::Stop);
    out.push(ActionMarker::Dead);
    out
}

/// Messages of the simple protocol.
pub fn bact_i(alphabet: &Alphabet) -> Vec<Datum> {
    bact_i_markers(alphabet)
        .into_iter()
        .map(Datum::Marker)
        .collect()
}

/// Pairs over [`bact_i_markers`].
pub fn bact_ii_pairs(alphabet: &Alphabet) -> Vec<Datum> {
    let markers = bact_i_markers(alphabet);
    let mut out = Vec::with_capacity(markers.len() * markers.len());
    for a in &markers {
        for b in &markers {
            out.push(Datum::Pair(a.clone(), b.clone()));
        }
    }
    out
}

/// A basic action with both possible next first actions.
pub fn bact_ii_triples(alphabet: &Alphabet) -> Vec<Datum> {
    let markers = bact_i_markers(alphabet);
    let mut out = Vec::new();
    for action in alphabet.basic_actions() {
        for a in &markers {
            for b in &markers {
                out.push(Datum::Triple(action.clone(), a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Messages of the pipelined protocol: pairs, triples, `stop*`, `dead*`
/// and `void*`.
pub fn bact_ii(alphabet: &Alphabet) -> Vec<Datum> {
    let mut out = bact_ii_pairs(alphabet);
    out.extend(bact_ii_triples(alphabet));
    out.extend([ActionMarker::Stop, ActionMarker::Dead, ActionMarker::Void].map(Datum::Marker));
    out
}

/// `X = sum_{d in domain} rcv_in(d) . snd_out(d) . X`, named `CH<in><out>`.
pub fn build_channel(
    input: Port,
    output: Port,
    domain: impl IntoIterator<Item = Datum>,
) -> Result<ProcessTerm, ProcessError> {
    let var = RecVar::plain(&format!("CH{}{}", input.index(), output.index()));
    let summands: Vec<ProcessTerm> = domain
        .into_iter()
        .map(|d| {
            ProcessTerm::seq_all([
                ProcessTerm::atom(ActionLabel::PortRecv(input, d.clone())),
                ProcessTerm::atom(ActionLabel::PortSend(output, d)),
                ProcessTerm::var(var.clone()),
            ])
        })
        .collect();
    if summands.is_empty() {
        return Err(ProcessError::EmptyDomain);
    }
    let spec = ProcessSpec::new(BTreeMap::from([(var.clone(), ProcessTerm::sum(summands))]))?;
    Ok(ProcessTerm::Rec(var, Arc::new(spec)))
}

fn atom(l: ActionLabel) -> ProcessTerm {
    ProcessTerm::atom(l)
}

fn rcv2(m: ActionMarker) -> ProcessTerm {
    atom(ActionLabel::PortRecv(Port::P2, Datum::Marker(m)))
}

fn snd3(r: bool) -> ProcessTerm {
    atom(ActionLabel::PortSend(Port::P3, Datum::Reply(r)))
}

fn service_reply(f: &Focus, r: bool) -> ProcessTerm {
    atom(ActionLabel::ServiceRecv(f.clone(), Datum::Reply(r)))
}

fn dead_end() -> ProcessTerm {
    ProcessTerm::seq(atom(ActionLabel::I), ProcessTerm::Delta)
}

fn check(alphabet: &Alphabet) -> Result<(), ProtocolError> {
    if alphabet.is_empty() {
        Err(ProtocolError::EmptyAlphabet)
    } else {
        Ok(())
    }
}

pub fn build_receiver_simple(alphabet: &Alphabet) -> Result<ProcessTerm, ProtocolError> {
    receiver_simple(alphabet, false)
}

fn receiver_simple(alphabet: &Alphabet, swap: bool) -> Result<ProcessTerm, ProtocolError> {
    check(alphabet)?;
    let var = RecVar::plain("RCV");
    let mut summands = Vec::new();
    for a in alphabet.basic_actions() {
        let reply = |r: bool| ProcessTerm::seq(service_reply(&a.focus, r), snd3(r != swap));
        summands.push(ProcessTerm::seq_all([
            rcv2(ActionMarker::Action(a.clone())),
            atom(ActionLabel::ServiceSend(
                a.focus.clone(),
                Datum::Method(a.method.clone()),
            )),
            ProcessTerm::alt(reply(true), reply(false)),
            ProcessTerm::var(var.clone()),
        ]));
    }
    summands.push(rcv2(ActionMarker::Stop));
    summands.push(ProcessTerm::seq(rcv2(ActionMarker::Dead), dead_end()));
    let spec = ProcessSpec::new(BTreeMap::from([(var.clone(), ProcessTerm::sum(summands))]))?;
    Ok(ProcessTerm::Rec(var, Arc::new(spec)))
}

/// The pipelined receiver's equation family: the entry `RCV`, the reply
/// stages `RCV'(r, a)` and the await stages `RCV''[f]`.
#[derive(Clone, Debug)]
pub struct PipelinedReceiver {
    spec: Arc<ProcessSpec>,
}

const ENTRY: &str = "RCV";
const REPLY_STAGE: &str = "RCV'";

fn reply_var(r: Datum, a: Datum) -> RecVar {
    RecVar::indexed(REPLY_STAGE, vec![r, a])
}

fn await_var(f: &Focus) -> RecVar {
    RecVar::plain(&format!("RCV''[{f}]"))
}

impl PipelinedReceiver {
    pub fn spec(&self) -> &Arc<ProcessSpec> {
        &self.spec
    }

    pub fn entry(&self) -> ProcessTerm {
        ProcessTerm::Rec(RecVar::plain(ENTRY), self.spec.clone())
    }

    /// `RCV'(r, a)`: forward reply `r` and start on `a`.
    pub fn reply_stage(&self, r: bool, a: &ActionMarker) -> ProcessTerm {
        ProcessTerm::Rec(
            reply_var(Datum::Reply(r), Datum::Marker(a.clone())),
            self.spec.clone(),
        )
    }

    /// `RCV''[f]`: wait for the next pair and the reply of service `f`.
    pub fn await_stage(&self, f: &Focus) -> ProcessTerm {
        ProcessTerm::Rec(await_var(f), self.spec.clone())
    }
}

pub fn build_receiver_pipelined(
    alphabet: &Alphabet,
    variant: ReceiverVariant,
) -> Result<PipelinedReceiver, ProtocolError> {
    receiver_pipelined(alphabet, variant, false)
}

fn receiver_pipelined(
    alphabet: &Alphabet,
    variant: ReceiverVariant,
    swap: bool,
) -> Result<PipelinedReceiver, ProtocolError> {
    check(alphabet)?;
    let mut equations = BTreeMap::new();
    let stage = |r: bool, a: &ActionMarker| {
        ProcessTerm::var(reply_var(Datum::Reply(r), Datum::Marker(a.clone())))
    };

    let mut entry = Vec::new();
    for triple in bact_ii_triples(alphabet) {
        let Datum::Triple(action, a, b) = &triple else {
            unreachable!()
        };
        let f = &action.focus;
        entry.push(ProcessTerm::seq_all([
            atom(ActionLabel::PortRecv(Port::P2, triple.clone())),
            atom(ActionLabel::ServiceSend(
                f.clone(),
                Datum::Method(action.method.clone()),
            )),
            ProcessTerm::alt(
                ProcessTerm::seq(service_reply(f, true), stage(true, a)),
                ProcessTerm::seq(service_reply(f, false), stage(false, b)),
            ),
        ]));
    }
    entry.push(rcv2(ActionMarker::Stop));
    entry.push(ProcessTerm::seq(rcv2(ActionMarker::Dead), dead_end()));
    equations.insert(RecVar::plain(ENTRY), ProcessTerm::sum(entry));

    for r in [true, false] {
        let forwarded = snd3(r != swap);
        for a in bact_i_markers(alphabet) {
            let wait_void = rcv2(ActionMarker::Void);
            let body = match &a {
                ActionMarker::Action(next) => ProcessTerm::seq(
                    ProcessTerm::par(
                        forwarded.clone(),
                        atom(ActionLabel::ServiceSend(
                            next.focus.clone(),
                            Datum::Method(next.method.clone()),
                        )),
                    ),
                    ProcessTerm::var(await_var(&next.focus)),
                ),
                ActionMarker::Stop => match variant {
                    ReceiverVariant::Faithful => wait_void,
                    ReceiverVariant::Repaired => ProcessTerm::seq(forwarded.clone(), wait_void),
                },
                ActionMarker::Dead => {
                    let tail = ProcessTerm::seq(wait_void, dead_end());
                    match variant {
                        ReceiverVariant::Faithful => tail,
                        ReceiverVariant::Repaired => ProcessTerm::seq(forwarded.clone(), tail),
                    }
                }
                ActionMarker::Void => unreachable!("void* is not a first action"),
            };
            equations.insert(reply_var(Datum::Reply(r), Datum::Marker(a)), body);
        }
    }

    let pairs = Input::new(
        Channel::Port(Port::P2),
        bact_ii_pairs(alphabet),
        Binder::Pair("u".into(), "v".into()),
    )?;
    for f in &alphabet.foci {
        let reply = Input::new(
            Channel::Service(f.clone()),
            bool_domain(),
            Binder::Single("beta".into()),
        )?;
        let pick = |x: &str| ProcessTerm::var(reply_var(Datum::var("beta"), Datum::var(x)));
        let body = ProcessTerm::cond(BoolExpr::Var("beta".into()), pick("u"), pick("v"));
        equations.insert(await_var(f), expand_parallel_input(&pairs, &reply, &body)?);
    }

    Ok(PipelinedReceiver {
        spec: Arc::new(ProcessSpec::new(equations)?),
    })
}

/// A composed client/server system.
#[derive(Clone, Debug)]
pub struct SystemDescription {
    /// `encap_H((thread || RCV) || (CH12 || CH34))`.
    pub process: ProcessTerm,
    pub encapsulation: LabelSet,
    pub abstraction: LabelSet,
    /// Names of the components flagged as perpetual servers.
    pub perpetual: Vec<String>,
}

impl SystemDescription {
    /// `tau_{j}` of the system.
    pub fn abstracted(&self) -> ProcessTerm {
        ProcessTerm::abstraction(self.abstraction.clone(), self.process.clone())
    }
}

/// Send and receive actions over ports 1 and 2 for `messages` and over
/// ports 3 and 4 for replies.
pub fn encapsulation_set(messages: &[Datum]) -> LabelSet {
    let mut labels = Vec::new();
    for (ports, domain) in [
        ([Port::P1, Port::P2], messages.to_vec()),
        ([Port::P3, Port::P4], bool_domain()),
    ] {
        for port in ports {
            for d in &domain {
                labels.push(ActionLabel::PortSend(port, d.clone()));
                labels.push(ActionLabel::PortRecv(port, d.clone()));
            }
        }
    }
    LabelSet::new(labels)
}

pub fn compose_system(
    p: &ThreadTerm,
    alphabet: &Alphabet,
    protocol: ProtocolId,
    variant: ReceiverVariant,
) -> Result<SystemDescription, ProtocolError> {
    compose(p, alphabet, protocol, variant, None)
}

/// [`compose_system`] with a fault injected.
pub fn compose_mutant(
    p: &ThreadTerm,
    alphabet: &Alphabet,
    protocol: ProtocolId,
    variant: ReceiverVariant,
    mutation: Mutation,
) -> Result<SystemDescription, ProtocolError> {
    compose(p, alphabet, protocol, variant, Some(mutation))
}

fn compose(
    p: &ThreadTerm,
    alphabet: &Alphabet,
    protocol: ProtocolId,
    variant: ReceiverVariant,
    mutation: Option<Mutation>,
) -> Result<SystemDescription, ProtocolError> {
    check(alphabet)?;
    let swap = mutation == Some(Mutation::SwappedReplies);
    let (thread, messages, receiver) = match protocol {
        ProtocolId::Simple => (
            extract_rct(p),
            bact_i(alphabet),
            receiver_simple(alphabet, swap)?,
        ),
        ProtocolId::Pipelined => (
            extract_rct_alt(p),
            bact_ii(alphabet),
            receiver_pipelined(alphabet, variant, swap)?.entry(),
        ),
    };
    let cha = Arc::new(build_channel(Port::P1, Port::P2, messages.clone())?);
    let chr = Arc::new(build_channel(Port::P3, Port::P4, bool_domain())?);
    let client = ProcessTerm::par(thread, receiver);
    let (channels, perpetual) = if mutation == Some(Mutation::NoReplyChannel) {
        let flags = Perpetual {
            left: None,
            right: Some(cha.clone()),
        };
        (
            ProcessTerm::Par(Arc::new(client), cha, flags),
            vec!["CH12".to_string()],
        )
    } else {
        let flags = Perpetual {
            left: Some(cha.clone()),
            right: Some(chr.clone()),
        };
        let servers = ProcessTerm::Par(cha, chr, flags.clone());
        let outer = ProcessTerm::Par(Arc::new(client), Arc::new(servers), Perpetual::none());
        (outer, vec!["CH12".to_string(), "CH34".to_string()])
    };
    let encapsulation = encapsulation_set(&messages);
    Ok(SystemDescription {
        process: ProcessTerm::encap(encapsulation.clone(), channels),
        encapsulation,
        abstraction: LabelSet::new([ActionLabel::J]),
        perpetual,
    })
}

/// States of a composed system's LTS in which the receiver can both
/// forward a reply on port 3 and dispatch a service request, i.e. where
/// reply transfer and the next instruction overlap.
pub fn overlap_states(lts: &Lts) -> Vec<usize> {
    let mut stepper = Stepper::new();
    let mut out = Vec::new();
    for (id, key) in lts.states().iter().enumerate() {
        let StateKey::Term(t) = key else { continue };
        let inner = match &**t {
            ProcessTerm::Encap(_, inner) => inner.clone(),
            _ => t.clone(),
        };
        let Ok(steps) = stepper.step(&inner) else {
            continue;
        };
        let reply = steps
            .iter()
            .any(|(l, _)| matches!(l, ActionLabel::PortSend(p, _) if *p == Port::P3));
        let dispatch = steps
            .iter()
            .any(|(l, _)| matches!(l, ActionLabel::ServiceSend(..)));
        if reply && dispatch {
            out.push(id);
        }
    }
    out
}
