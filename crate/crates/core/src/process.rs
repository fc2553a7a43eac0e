//! Process terms over the action alphabet used by the transmission
//! protocols, the communication function, data substitution for early
//! input, and guarded recursive process specifications.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::thread::{ActionMarker, BasicAction, Focus, Method};

pub mod random;

/// A transmission port. Ports 1 and 2 carry instruction messages, ports 3
/// and 4 carry replies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Port(u8);

impl Port {
    pub const P1: Port = Port(1);
    pub const P2: Port = Port(2);
    pub const P3: Port = Port(3);
    pub const P4: Port = Port(4);

    pub fn new(index: u8) -> Result<Port, ProcessError> {
        match index {
            1..=4 => Ok(Port(index)),
            other => Err(ProcessError::InvalidPort(other)),
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Name of a data variable bound by an early input.
pub type DataVar = Arc<str>;

/// Message payloads.
///
/// `Var` is a placeholder for a datum bound by an enclosing early input;
/// closed terms never contain it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datum {
    Marker(ActionMarker),
    Reply(bool),
    Method(Method),
    Pair(ActionMarker, ActionMarker),
    Triple(BasicAction, ActionMarker, ActionMarker),
    Var(DataVar),
}

impl Datum {
    pub fn var(name: &str) -> Datum {
        Datum::Var(name.into())
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self, Datum::Var(_))
    }

    /// Pair and triple components are drawn from `BAct ∪ {stop*, dead*}`.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Datum::Pair(a, b) | Datum::Triple(_, a, b) => {
                *a != ActionMarker::Void && *b != ActionMarker::Void
            }
            _ => true,
        }
    }
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Marker(m) => m.fmt(f),
            Datum::Reply(true) => f.write_str("T"),
            Datum::Reply(false) => f.write_str("F"),
            Datum::Method(m) => m.fmt(f),
            Datum::Pair(a, b) => write!(f, "{a},{b}"),
            Datum::Triple(a, b, c) => write!(f, "{a},{b},{c}"),
            Datum::Var(v) => f.write_str(v),
        }
    }
}

/// Atomic actions, plus the silent step.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionLabel {
    PortSend(Port, Datum),
    PortRecv(Port, Datum),
    ServiceSend(Focus, Datum),
    ServiceRecv(Focus, Datum),
    Stp,
    I,
    J,
    Tau,
}

impl ActionLabel {
    pub fn is_tau(&self) -> bool {
        matches!(self, ActionLabel::Tau)
    }

    pub fn datum(&self) -> Option<&Datum> {
        match self {
            ActionLabel::PortSend(_, d)
            | ActionLabel::PortRecv(_, d)
            | ActionLabel::ServiceSend(_, d)
            | ActionLabel::ServiceRecv(_, d) => Some(d),
            _ => None,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.datum().is_none_or(Datum::is_closed)
    }

    /// Service actions carry a method or a reply, nothing else.
    pub fn is_well_formed(&self) -> bool {
        match self {
            ActionLabel::ServiceSend(_, d) | ActionLabel::ServiceRecv(_, d) => {
                matches!(d, Datum::Method(_) | Datum::Reply(_) | Datum::Var(_))
            }
            ActionLabel::PortSend(_, d) | ActionLabel::PortRecv(_, d) => d.is_well_formed(),
            _ => true,
        }
    }

    fn map_datum(&self, f: impl FnOnce(&Datum) -> Datum) -> ActionLabel {
        match self {
            ActionLabel::PortSend(p, d) => ActionLabel::PortSend(*p, f(d)),
            ActionLabel::PortRecv(p, d) => ActionLabel::PortRecv(*p, f(d)),
            ActionLabel::ServiceSend(s, d) => ActionLabel::ServiceSend(s.clone(), f(d)),
            ActionLabel::ServiceRecv(s, d) => ActionLabel::ServiceRecv(s.clone(), f(d)),
            other => other.clone(),
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::PortSend(p, d) => write!(f, "snd_{p}({d})"),
            ActionLabel::PortRecv(p, d) => write!(f, "rcv_{p}({d})"),
            ActionLabel::ServiceSend(s, d) => write!(f, "snd_{s}({d})"),
            ActionLabel::ServiceRecv(s, d) => write!(f, "rcv_{s}({d})"),
            ActionLabel::Stp => f.write_str("stp"),
            ActionLabel::I => f.write_str("i"),
            ActionLabel::J => f.write_str("j"),
            ActionLabel::Tau => f.write_str("tau"),
        }
    }
}

/// The communication function. Matching sends and receives on a service
/// synchronise to `i`, on a port to `j`; nothing else communicates.
pub fn gamma(a: &ActionLabel, b: &ActionLabel) -> Option<ActionLabel> {
    use ActionLabel::*;
    match (a, b) {
        (ServiceSend(f, d), ServiceRecv(g, e)) | (ServiceRecv(g, e), ServiceSend(f, d))
            if f == g && d == e =>
        {
            Some(I)
        }
        (PortSend(p, d), PortRecv(q, e)) | (PortRecv(q, e), PortSend(p, d)) if p == q && d == e => {
            Some(J)
        }
        _ => None,
    }
}

fn fingerprint_of<T: Hash>(value: &T) -> u64 {
    let mut hasher = DefaultHasher::new();
    value.hash(&mut hasher);
    hasher.finish()
}

/// An immutable set of action labels with a cached fingerprint, so that
/// hashing a state with a large encapsulation set stays cheap.
#[derive(Clone, Debug)]
pub struct LabelSet {
    labels: Arc<BTreeSet<ActionLabel>>,
    fingerprint: u64,
}

impl LabelSet {
    pub fn new(labels: impl IntoIterator<Item = ActionLabel>) -> Self {
        let labels: BTreeSet<ActionLabel> = labels.into_iter().collect();
        let fingerprint = fingerprint_of(&labels);
        LabelSet {
            labels: Arc::new(labels),
            fingerprint,
        }
    }

    pub fn contains(&self, label: &ActionLabel) -> bool {
        self.labels.contains(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActionLabel> {
        self.labels.iter()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl PartialEq for LabelSet {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
            && (Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels)
    }
}

impl Eq for LabelSet {}

impl Hash for LabelSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.fingerprint.hash(state);
    }
}

impl PartialOrd for LabelSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LabelSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.fingerprint
            .cmp(&other.fingerprint)
            .then_with(|| self.labels.cmp(&other.labels))
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            l.fmt(f)?;
        }
        f.write_str("}")
    }
}

/// A recursion variable, optionally indexed by data (`RCV'(T,f.m)`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecVar {
    pub name: Arc<str>,
    pub args: Vec<Datum>,
}

impl RecVar {
    pub fn plain(name: &str) -> Self {
        RecVar {
            name: name.into(),
            args: Vec::new(),
        }
    }

    pub fn indexed(name: &str, args: Vec<Datum>) -> Self {
        RecVar {
            name: name.into(),
            args,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.args.iter().all(Datum::is_closed)
    }
}

impl fmt::Display for RecVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                a.fmt(f)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Condition of an `if b then p else q` construct.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoolExpr {
    Lit(bool),
    Var(DataVar),
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::Lit(true) => f.write_str("T"),
            BoolExpr::Lit(false) => f.write_str("F"),
            BoolExpr::Var(v) => f.write_str(v),
        }
    }
}

/// Where an early input listens.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Port(Port),
    Service(Focus),
}

impl Channel {
    pub fn receive(&self, d: Datum) -> ActionLabel {
        match self {
            Channel::Port(p) => ActionLabel::PortRecv(*p, d),
            Channel::Service(f) => ActionLabel::ServiceRecv(f.clone(), d),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Port(p) => p.fmt(f),
            Channel::Service(s) => s.fmt(f),
        }
    }
}

/// Binding pattern of an early input: a single variable, or a pair `(u,v)`
/// destructuring a [`Datum::Pair`] into two markers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Binder {
    Single(DataVar),
    Pair(DataVar, DataVar),
}

impl Binder {
    fn binds(&self, var: &str) -> bool {
        match self {
            Binder::Single(u) => &**u == var,
            Binder::Pair(u, v) => &**u == var || &**v == var,
        }
    }

    fn names(&self) -> Vec<DataVar> {
        match self {
            Binder::Single(u) => vec![u.clone()],
            Binder::Pair(u, v) => vec![u.clone(), v.clone()],
        }
    }

    /// The bindings produced by receiving `d`, or `None` when `d` does not
    /// fit the pattern.
    pub fn bindings(&self, d: &Datum) -> Option<Vec<(DataVar, Datum)>> {
        match (self, d) {
            (Binder::Single(u), d) => Some(vec![(u.clone(), d.clone())]),
            (Binder::Pair(u, v), Datum::Pair(a, b)) => Some(vec![
                (u.clone(), Datum::Marker(a.clone())),
                (v.clone(), Datum::Marker(b.clone())),
            ]),
            _ => None,
        }
    }
}

impl fmt::Display for Binder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binder::Single(u) => f.write_str(u),
            Binder::Pair(u, v) => write!(f, "{u},{v}"),
        }
    }
}

/// A restricted early input `erd^D_c(binder)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Input {
    pub channel: Channel,
    pub domain: Arc<[Datum]>,
    pub binder: Binder,
}

impl Input {
    /// Builds an input over the sorted, deduplicated domain.
    pub fn new(
        channel: Channel,
        domain: impl IntoIterator<Item = Datum>,
        binder: Binder,
    ) -> Result<Input, ProcessError> {
        let domain: BTreeSet<Datum> = domain.into_iter().collect();
        if domain.is_empty() {
            return Err(ProcessError::EmptyDomain);
        }
        for d in &domain {
            if binder.bindings(d).is_none() {
                return Err(ProcessError::DomainViolation(d.to_string()));
            }
        }
        Ok(Input {
            channel,
            domain: domain.into_iter().collect::<Vec<_>>().into(),
            binder,
        })
    }

    /// `body[d/binder]`, checking that `d` lies in the domain.
    pub fn receive(&self, d: &Datum, body: &ProcessTerm) -> Result<ProcessTerm, ProcessError> {
        if self.domain.binary_search(d).is_err() {
            return Err(ProcessError::DomainViolation(d.to_string()));
        }
        let bindings = self
            .binder
            .bindings(d)
            .ok_or_else(|| ProcessError::DomainViolation(d.to_string()))?;
        let mut out = body.clone();
        for (var, value) in bindings {
            out = substitute_data(&out, &var, &value);
        }
        Ok(out)
    }
}

/// Guarded recursive equations over process terms. Equation keys are
/// closed recursion variables; indexed families are instantiated eagerly.
#[derive(Clone, Debug)]
pub struct ProcessSpec {
    equations: BTreeMap<RecVar, ProcessTerm>,
    fingerprint: u64,
}

impl ProcessSpec {
    /// Validates and freezes a set of equations.
    pub fn new(equations: BTreeMap<RecVar, ProcessTerm>) -> Result<ProcessSpec, ProcessError> {
        if equations.is_empty() {
            return Err(ProcessError::EmptySpec);
        }
        let arities: BTreeSet<(Arc<str>, usize)> = equations
            .keys()
            .map(|k| (k.name.clone(), k.args.len()))
            .collect();
        for (key, rhs) in &equations {
            if !key.is_closed() {
                return Err(ProcessError::OpenEquationKey(key.to_string()));
            }
            check_rhs(key, rhs, false, &equations, &arities)?;
            if let Some(var) = free_data_vars(rhs).into_iter().next() {
                return Err(ProcessError::FreeDataVariable {
                    equation: key.to_string(),
                    variable: var.to_string(),
                });
            }
        }
        let fingerprint = fingerprint_of(&equations);
        Ok(ProcessSpec {
            equations,
            fingerprint,
        })
    }

    pub fn equations(&self) -> &BTreeMap<RecVar, ProcessTerm> {
        &self.equations
    }

    pub fn get(&self, var: &RecVar) -> Option<&ProcessTerm> {
        self.equations.get(var)
    }
}

impl PartialEq for ProcessSpec {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint && self.equations == other.equations
    }
}

impl Eq for ProcessSpec {}

impl Hash for ProcessSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.fingerprint.hash(state);
    }
}

impl PartialOrd for ProcessSpec {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ProcessSpec {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if std::ptr::eq(self, other) {
            return std::cmp::Ordering::Equal;
        }
        self.fingerprint
            .cmp(&other.fingerprint)
            .then_with(|| self.equations.cmp(&other.equations))
    }
}

fn check_rhs(
    key: &RecVar,
    t: &ProcessTerm,
    guarded: bool,
    equations: &BTreeMap<RecVar, ProcessTerm>,
    arities: &BTreeSet<(Arc<str>, usize)>,
) -> Result<(), ProcessError> {
    use ProcessTerm::*;
    let recur = |t: &ProcessTerm, g: bool| check_rhs(key, t, g, equations, arities);
    match t {
        Atom(_) | Tau | Delta | Rec(..) => Ok(()),
        Var(v) => {
            let defined = if v.is_closed() {
                equations.contains_key(v)
            } else {
                arities.contains(&(v.name.clone(), v.args.len()))
            };
            if !defined {
                Err(ProcessError::UndefinedVariable {
                    equation: key.to_string(),
                    variable: v.to_string(),
                })
            } else if !guarded {
                Err(ProcessError::UnguardedOccurrence {
                    equation: key.to_string(),
                    variable: v.to_string(),
                })
            } else {
                Ok(())
            }
        }
        // the right operand is only reached after the left one has acted
        Seq(p, q) | LeftMerge(p, q) => {
            recur(p, guarded)?;
            recur(q, true)
        }
        Alt(p, q) | Par(p, q, _) | CommMerge(p, q) | Cond(_, p, q) => {
            recur(p, guarded)?;
            recur(q, guarded)
        }
        Encap(_, p) | Proj(_, p) => recur(p, guarded),
        Abstract(..) => Err(ProcessError::AbstractionInSpec(key.to_string())),
        EarlyInput(_, body) => recur(body, true),
    }
}

/// Marks operands of a parallel composition that act as perpetual servers.
/// Each mark stores the operand's initial term; the operand counts as
/// terminated under the server convention whenever it is back at that term.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perpetual {
    pub left: Option<Arc<ProcessTerm>>,
    pub right: Option<Arc<ProcessTerm>>,
}

impl Perpetual {
    pub fn none() -> Self {
        Perpetual::default()
    }

    pub fn is_none(&self) -> bool {
        self.left.is_none() && self.right.is_none()
    }
}

/// Process terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcessTerm {
    Atom(ActionLabel),
    Tau,
    Delta,
    Alt(Arc<ProcessTerm>, Arc<ProcessTerm>),
    Seq(Arc<ProcessTerm>, Arc<ProcessTerm>),
    Par(Arc<ProcessTerm>, Arc<ProcessTerm>, Perpetual),
    LeftMerge(Arc<ProcessTerm>, Arc<ProcessTerm>),
    CommMerge(Arc<ProcessTerm>, Arc<ProcessTerm>),
    Encap(LabelSet, Arc<ProcessTerm>),
    Abstract(LabelSet, Arc<ProcessTerm>),
    Proj(u32, Arc<ProcessTerm>),
    /// Recursion variable; only inside the equations of a [`ProcessSpec`].
    Var(RecVar),
    Rec(RecVar, Arc<ProcessSpec>),
    Cond(BoolExpr, Arc<ProcessTerm>, Arc<ProcessTerm>),
    EarlyInput(Arc<Input>, Arc<ProcessTerm>),
}

impl ProcessTerm {
    pub fn atom(label: ActionLabel) -> Self {
        ProcessTerm::Atom(label)
    }

    pub fn alt(p: ProcessTerm, q: ProcessTerm) -> Self {
        ProcessTerm::Alt(Arc::new(p), Arc::new(q))
    }

    pub fn seq(p: ProcessTerm, q: ProcessTerm) -> Self {
        ProcessTerm::Seq(Arc::new(p), Arc::new(q))
    }

    pub fn par(p: ProcessTerm, q: ProcessTerm) -> Self {
        ProcessTerm::Par(Arc::new(p), Arc::new(q), Perpetual::none())
    }

    pub fn left_merge(p: ProcessTerm, q: ProcessTerm) -> Self {
        ProcessTerm::LeftMerge(Arc::new(p), Arc::new(q))
    }

    pub fn comm_merge(p: ProcessTerm, q: ProcessTerm) -> Self {
        ProcessTerm::CommMerge(Arc::new(p), Arc::new(q))
    }

    pub fn encap(h: LabelSet, p: ProcessTerm) -> Self {
        debug_assert!(!h.contains(&ActionLabel::Tau));
        ProcessTerm::Encap(h, Arc::new(p))
    }

    pub fn abstraction(i: LabelSet, p: ProcessTerm) -> Self {
        debug_assert!(!i.contains(&ActionLabel::Tau));
        ProcessTerm::Abstract(i, Arc::new(p))
    }

    pub fn proj(n: u32, p: ProcessTerm) -> Self {
        ProcessTerm::Proj(n, Arc::new(p))
    }

    pub fn cond(b: BoolExpr, p: ProcessTerm, q: ProcessTerm) -> Self {
        ProcessTerm::Cond(b, Arc::new(p), Arc::new(q))
    }

    pub fn early_input(input: Input, body: ProcessTerm) -> Self {
        ProcessTerm::EarlyInput(Arc::new(input), Arc::new(body))
    }

    pub fn var(v: RecVar) -> Self {
        ProcessTerm::Var(v)
    }

    /// Right-nested alternative composition; `delta` for no summands.
    pub fn sum(summands: impl IntoIterator<Item = ProcessTerm>) -> Self {
        let mut items: Vec<ProcessTerm> = summands.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return ProcessTerm::Delta;
        };
        while let Some(p) = items.pop() {
            acc = ProcessTerm::alt(p, acc);
        }
        acc
    }

    /// Right-nested sequential composition of a non-empty list.
    pub fn seq_all(parts: impl IntoIterator<Item = ProcessTerm>) -> Self {
        let mut items: Vec<ProcessTerm> = parts.into_iter().collect();
        let mut acc = items.pop().expect("seq_all of empty list");
        while let Some(p) = items.pop() {
            acc = ProcessTerm::seq(p, acc);
        }
        acc
    }

    /// Top-level summands of a (possibly nested) alternative composition.
    pub fn summands(&self) -> Vec<&ProcessTerm> {
        let mut out = Vec::new();
        fn walk<'a>(t: &'a ProcessTerm, out: &mut Vec<&'a ProcessTerm>) {
            match t {
                ProcessTerm::Alt(p, q) => {
                    walk(p, out);
                    walk(q, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn contains_tau(&self) -> bool {
        self.any(&mut |t| matches!(t, ProcessTerm::Tau | ProcessTerm::Abstract(..)))
    }

    pub fn contains_abstraction(&self) -> bool {
        self.any(&mut |t| matches!(t, ProcessTerm::Abstract(..)))
    }

    /// Does any node (not descending into recursion constants) satisfy `pred`?
    pub fn any(&self, pred: &mut impl FnMut(&ProcessTerm) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        use ProcessTerm::*;
        match self {
            Atom(_) | Tau | Delta | Var(_) | Rec(..) => false,
            Alt(p, q)
            | Seq(p, q)
            | Par(p, q, _)
            | LeftMerge(p, q)
            | CommMerge(p, q)
            | Cond(_, p, q) => p.any(pred) || q.any(pred),
            Encap(_, p) | Abstract(_, p) | Proj(_, p) | EarlyInput(_, p) => p.any(pred),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ProcessError {
    #[error("port index {0} is not one of 1..=4")]
    InvalidPort(u8),
    #[error("input domain is empty")]
    EmptyDomain,
    #[error("datum {0} lies outside the binder's domain")]
    DomainViolation(String),
    #[error("parallel input binders must be distinct")]
    SharedBinder,
    #[error("process specification has no equations")]
    EmptySpec,
    #[error("equation key {0} is not closed")]
    OpenEquationKey(String),
    #[error("equation {0}: abstraction inside a recursive specification")]
    AbstractionInSpec(String),
    #[error("equation {equation}: variable {variable} is undefined")]
    UndefinedVariable { equation: String, variable: String },
    #[error("equation {equation}: occurrence of {variable} is unguarded")]
    UnguardedOccurrence { equation: String, variable: String },
    #[error("equation {equation}: data variable {variable} is free")]
    FreeDataVariable { equation: String, variable: String },
}

/// Replace free occurrences of the data variable `var` by `d`. Binders
/// that rebind `var` shadow it. Recursion constants' specs are closed and
/// left untouched, but their index arguments are substituted.
pub fn substitute_data(t: &ProcessTerm, var: &str, d: &Datum) -> ProcessTerm {
    let arc = Arc::new(t.clone());
    (*subst(&arc, var, d)).clone()
}

fn subst_datum(x: &Datum, var: &str, d: &Datum) -> Datum {
    match x {
        Datum::Var(v) if &**v == var => d.clone(),
        other => other.clone(),
    }
}

fn subst_recvar(v: &RecVar, var: &str, d: &Datum) -> RecVar {
    RecVar {
        name: v.name.clone(),
        args: v.args.iter().map(|a| subst_datum(a, var, d)).collect(),
    }
}

fn subst(t: &Arc<ProcessTerm>, var: &str, d: &Datum) -> Arc<ProcessTerm> {
    use ProcessTerm::*;
    if free_data_vars(t).iter().all(|v| &**v != var) {
        return t.clone();
    }
    let s = |p: &Arc<ProcessTerm>| subst(p, var, d);
    Arc::new(match &**t {
        Atom(l) => Atom(l.map_datum(|x| subst_datum(x, var, d))),
        Tau | Delta => unreachable!("no free variables"),
        Alt(p, q) => Alt(s(p), s(q)),
        Seq(p, q) => Seq(s(p), s(q)),
        Par(p, q, flags) => Par(s(p), s(q), flags.clone()),
        LeftMerge(p, q) => LeftMerge(s(p), s(q)),
        CommMerge(p, q) => CommMerge(s(p), s(q)),
        Encap(h, p) => Encap(h.clone(), s(p)),
        Abstract(i, p) => Abstract(i.clone(), s(p)),
        Proj(n, p) => Proj(*n, s(p)),
        Var(v) => Var(subst_recvar(v, var, d)),
        Rec(v, spec) => Rec(subst_recvar(v, var, d), spec.clone()),
        Cond(b, p, q) => {
            let b = match (b, d) {
                (BoolExpr::Var(v), Datum::Reply(r)) if &**v == var => BoolExpr::Lit(*r),
                (other, _) => other.clone(),
            };
            Cond(b, s(p), s(q))
        }
        EarlyInput(input, body) => {
            if input.binder.binds(var) {
                return t.clone();
            }
            EarlyInput(input.clone(), s(body))
        }
    })
}

/// Data variables occurring free in `t`.
pub fn free_data_vars(t: &ProcessTerm) -> BTreeSet<DataVar> {
    let mut out = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free(t: &ProcessTerm, bound: &mut Vec<DataVar>, out: &mut BTreeSet<DataVar>) {
    use ProcessTerm::*;
    let mut note = |d: &Datum, bound: &Vec<DataVar>| {
        if let Datum::Var(v) = d {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
    };
    match t {
        Atom(l) => {
            if let Some(d) = l.datum() {
                note(d, bound);
            }
        }
        Tau | Delta => {}
        Var(v) | Rec(v, _) => {
            for a in &v.args {
                note(a, bound);
            }
        }
        Alt(p, q) | Seq(p, q) | Par(p, q, _) | LeftMerge(p, q) | CommMerge(p, q) => {
            collect_free(p, bound, out);
            collect_free(q, bound, out);
        }
        Cond(b, p, q) => {
            if let BoolExpr::Var(v) = b {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            collect_free(p, bound, out);
            collect_free(q, bound, out);
        }
        Encap(_, p) | Abstract(_, p) | Proj(_, p) => collect_free(p, bound, out),
        EarlyInput(input, body) => {
            let names = input.binder.names();
            let before = bound.len();
            bound.extend(names);
            collect_free(body, bound, out);
            bound.truncate(before);
        }
    }
}

/// Binary parallel input `(erd^{D1}(u1) || erd^{D2}(u2)) > body`, expanded
/// into the sum over which datum arrives first.
pub fn expand_parallel_input(
    first: &Input,
    second: &Input,
    body: &ProcessTerm,
) -> Result<ProcessTerm, ProcessError> {
    if first.domain.is_empty() || second.domain.is_empty() {
        return Err(ProcessError::EmptyDomain);
    }
    let shared = first.binder.names().iter().any(|n| second.binder.binds(n));
    if shared {
        return Err(ProcessError::SharedBinder);
    }
    let mut summands = Vec::with_capacity(first.domain.len() + second.domain.len());
    for (now, later) in [(first, second), (second, first)] {
        for d in now.domain.iter() {
            let rest = now.receive(d, body)?;
            summands.push(ProcessTerm::seq(
                ProcessTerm::atom(now.channel.receive(d.clone())),
                ProcessTerm::early_input(later.clone(), rest),
            ));
        }
    }
    Ok(ProcessTerm::sum(summands))
}

// Rendering: `+` binds weakest, then the parallel operators, then `.`.
fn precedence(t: &ProcessTerm) -> u8 {
    match t {
        ProcessTerm::Alt(..) => 1,
        ProcessTerm::Par(..) | ProcessTerm::LeftMerge(..) | ProcessTerm::CommMerge(..) => 2,
        ProcessTerm::Seq(..) => 3,
        _ => 4,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, t: &ProcessTerm, min: u8) -> fmt::Result {
    if precedence(t) < min {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

fn write_binary(
    f: &mut fmt::Formatter<'_>,
    p: &ProcessTerm,
    op: &str,
    q: &ProcessTerm,
    prec: u8,
) -> fmt::Result {
    // right-nested chains print without parentheses
    write_operand(f, p, prec + 1)?;
    write!(f, " {op} ")?;
    write_operand(f, q, prec)
}

impl fmt::Display for ProcessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ProcessTerm::*;
        match self {
            Atom(l) => l.fmt(f),
            Tau => f.write_str("tau"),
            Delta => f.write_str("delta"),
            Alt(p, q) => write_binary(f, p, "+", q, 1),
            Par(p, q, _) => write_binary(f, p, "||", q, 2),
            LeftMerge(p, q) => write_binary(f, p, "||_", q, 2),
            CommMerge(p, q) => write_binary(f, p, "|", q, 2),
            Seq(p, q) => write_binary(f, p, ".", q, 3),
            Encap(h, p) => write!(f, "encap{h}({p})"),
            Abstract(i, p) => write!(f, "abstract{i}({p})"),
            Proj(n, p) => write!(f, "pi_{n}({p})"),
            Var(v) | Rec(v, _) => v.fmt(f),
            Cond(b, p, q) => write!(f, "({p} <| {b} |> {q})"),
            EarlyInput(input, body) => {
                write!(f, "erd_{}({}){{", input.channel, input.binder)?;
                for (i, d) in input.domain.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    d.fmt(f)?;
                }
                write!(f, "}} > ")?;
                write_operand(f, body, 4)
            }
        }
    }
}
