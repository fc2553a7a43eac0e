//! Turning threads into processes.
//!
//! Three translations are provided. The plain one talks to services directly
//! through `snd_f`/`rcv_f`. The remote-control one sends every instruction
//! over port 1 and reads the reply on port 4. The alternative remote-control
//! one also sends the first actions of both continuations, so a receiver can
//! start the next instruction before the reply has been delivered.
//!
//! Recursion constants map to process recursion constants over an image
//! specification with one equation per thread equation (two for the
//! alternative form). All functions expect closed terms whose
//! specifications have passed [`validate_spec`](crate::thread::validate_spec)
//! and panic otherwise.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::process::{ActionLabel, Datum, LabelSet, Port, ProcessSpec, ProcessTerm, RecVar};
use crate::thread::{first_action_in, ActionMarker, BasicAction, ThreadSpec, ThreadTerm};

/// Which translation to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtractionMode {
    Plain,
    Rct,
    RctAlt,
}

/// The process whose `stp` actions are hidden by the plain extraction.
pub fn extract_c(t: &ThreadTerm) -> ProcessTerm {
    Extractor::new(Form::Service).term(t)
}

/// `tau_{stp}` applied to [`extract_c`].
pub fn extract_plain(t: &ThreadTerm) -> ProcessTerm {
    ProcessTerm::abstraction(LabelSet::new([ActionLabel::Stp]), extract_c(t))
}

pub fn extract_rct(t: &ThreadTerm) -> ProcessTerm {
    Extractor::new(Form::Remote).term(t)
}

pub fn extract_rct_alt(t: &ThreadTerm) -> ProcessTerm {
    extract_rct_alt_family(t).top
}

/// Both forms of the alternative extraction of one thread.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AltExtraction {
    /// Sends a triple for the first instruction.
    pub top: ProcessTerm,
    /// Sends only the pair of next first actions; used after the first
    /// instruction, and ends with `void*`.
    pub aux: ProcessTerm,
}

pub fn extract_rct_alt_family(t: &ThreadTerm) -> AltExtraction {
    let mut ex = Extractor::new(Form::AltTop);
    let top = ex.term(t);
    ex.form = Form::AltAux;
    let aux = ex.term(t);
    AltExtraction { top, aux }
}

/// Dispatch on [`ExtractionMode`].
pub fn extract(mode: ExtractionMode, t: &ThreadTerm) -> ProcessTerm {
    match mode {
        ExtractionMode::Plain => extract_plain(t),
        ExtractionMode::Rct => extract_rct(t),
        ExtractionMode::RctAlt => extract_rct_alt(t),
    }
}

/// Suffix naming the auxiliary equation family.
pub const AUX_SUFFIX: &str = "'";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Form {
    Service,
    Remote,
    AltTop,
    AltAux,
}

struct Extractor {
    form: Form,
    images: HashMap<(usize, bool), Arc<ProcessSpec>>,
}

fn snd1(d: Datum) -> ProcessTerm {
    ProcessTerm::atom(ActionLabel::PortSend(Port::P1, d))
}

fn marker(m: ActionMarker) -> Datum {
    Datum::Marker(m)
}

impl Extractor {
    fn new(form: Form) -> Self {
        Extractor {
            form,
            images: HashMap::new(),
        }
    }

    fn term(&mut self, t: &ThreadTerm) -> ProcessTerm {
        match t {
            ThreadTerm::Rec(var, spec) => {
                let image = self.image(spec);
                ProcessTerm::Rec(self.var(var), image)
            }
            ThreadTerm::Var(v) => panic!("extraction of open thread variable {v}"),
            _ => self.body(t, None),
        }
    }

    fn var(&self, name: &str) -> RecVar {
        match self.form {
            Form::AltAux => RecVar::plain(&format!("{name}{AUX_SUFFIX}")),
            _ => RecVar::plain(name),
        }
    }

    /// Translate one node. `spec` is set while translating a right-hand side,
    /// where variables stay variables.
    fn body(&mut self, t: &ThreadTerm, spec: Option<&ThreadSpec>) -> ProcessTerm {
        match t {
            ThreadTerm::Stop => match self.form {
                Form::Service => ProcessTerm::atom(ActionLabel::Stp),
                Form::Remote | Form::AltTop => snd1(marker(ActionMarker::Stop)),
                Form::AltAux => snd1(marker(ActionMarker::Void)),
            },
            ThreadTerm::Deadlock => match self.form {
                Form::Service => {
                    ProcessTerm::seq(ProcessTerm::atom(ActionLabel::I), ProcessTerm::Delta)
                }
                Form::Remote | Form::AltTop => snd1(marker(ActionMarker::Dead)),
                Form::AltAux => snd1(marker(ActionMarker::Void)),
            },
            ThreadTerm::Var(v) if spec.is_some() => ProcessTerm::var(self.var(v)),
            ThreadTerm::Var(_) | ThreadTerm::Rec(..) => self.term(t),
            ThreadTerm::PostCond(l, a, r) => self.postcond(l, a, r, spec),
        }
    }

    fn postcond(
        &mut self,
        l: &ThreadTerm,
        a: &BasicAction,
        r: &ThreadTerm,
        spec: Option<&ThreadSpec>,
    ) -> ProcessTerm {
        if self.form == Form::Service {
            let reply = |b: bool| {
                ProcessTerm::atom(ActionLabel::ServiceRecv(a.focus.clone(), Datum::Reply(b)))
            };
            let send = ProcessTerm::atom(ActionLabel::ServiceSend(
                a.focus.clone(),
                Datum::Method(a.method.clone()),
            ));
            let on_true = ProcessTerm::seq(reply(true), self.body(l, spec));
            let on_false = ProcessTerm::seq(reply(false), self.body(r, spec));
            return ProcessTerm::seq(send, ProcessTerm::alt(on_true, on_false));
        }
        let first = |t: &ThreadTerm| match spec {
            Some(s) => first_action_in(t, s),
            None => crate::thread::first_action(t),
        };
        let datum = match self.form {
            Form::Remote => marker(ActionMarker::Action(a.clone())),
            Form::AltTop => Datum::Triple(a.clone(), first(l), first(r)),
            Form::AltAux => Datum::Pair(first(l), first(r)),
            Form::Service => unreachable!(),
        };
        // after the first instruction the alternative form continues with aux
        let saved = self.form;
        if self.form == Form::AltTop {
            self.form = Form::AltAux;
        }
        let reply = |b: bool| ProcessTerm::atom(ActionLabel::PortRecv(Port::P4, Datum::Reply(b)));
        let on_true = ProcessTerm::seq(reply(true), self.body(l, spec));
        let on_false = ProcessTerm::seq(reply(false), self.body(r, spec));
        self.form = saved;
        ProcessTerm::seq(snd1(datum), ProcessTerm::alt(on_true, on_false))
    }

    /// Image of a thread specification in the current form. The alternative
    /// forms share one image holding both equation families.
    fn image(&mut self, spec: &Arc<ThreadSpec>) -> Arc<ProcessSpec> {
        let alt = matches!(self.form, Form::AltTop | Form::AltAux);
        let key = (Arc::as_ptr(spec) as usize, alt);
        if let Some(image) = self.images.get(&key) {
            return image.clone();
        }
        let saved = self.form;
        let forms: &[Form] = if alt {
            &[Form::AltTop, Form::AltAux]
        } else {
            &[saved]
        };
        let mut equations = BTreeMap::new();
        for &form in forms {
            self.form = form;
            for (name, rhs) in &spec.equations {
                let body = self.body(rhs, Some(spec));
                equations.insert(self.var(name), body);
            }
        }
        self.form = saved;
        let image = Arc::new(
            ProcessSpec::new(equations).expect("image of a validated thread specification"),
        );
        self.images.insert(key, image.clone());
        image
    }
}
