//! Basic thread algebra: threads built from `S`, `D` and postconditional
//! composition, plus guarded recursive specifications over them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest depth accepted by [`enumerate_threads`].
pub const MAX_ENUMERATION_DEPTH: usize = 3;

/// Name of a service in the execution environment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Focus(Arc<str>);

/// Name of a command understood by a service.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Method(Arc<str>);

impl Focus {
    pub fn new(name: &str) -> Self {
        assert!(!name.is_empty(), "focus names are non-empty");
        Focus(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Method {
    pub fn new(name: &str) -> Self {
        assert!(!name.is_empty(), "method names are non-empty");
        Method(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Focus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A request `f.m`: ask the service named `f` to process method `m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasicAction {
    pub focus: Focus,
    pub method: Method,
}

impl BasicAction {
    pub fn new(focus: &str, method: &str) -> Self {
        BasicAction {
            focus: Focus::new(focus),
            method: Method::new(method),
        }
    }
}

impl fmt::Display for BasicAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.focus, self.method)
    }
}

/// The finite focus and method alphabets a spec file declares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    pub foci: Vec<Focus>,
    pub methods: Vec<Method>,
}

impl Alphabet {
    pub fn new(foci: &[&str], methods: &[&str]) -> Self {
        Alphabet {
            foci: foci.iter().map(|f| Focus::new(f)).collect(),
            methods: methods.iter().map(|m| Method::new(m)).collect(),
        }
    }

    /// All `f.m` in declaration order (foci outer, methods inner).
    pub fn basic_actions(&self) -> Vec<BasicAction> {
        let mut out = Vec::with_capacity(self.foci.len() * self.methods.len());
        for focus in &self.foci {
            for method in &self.methods {
                out.push(BasicAction {
                    focus: focus.clone(),
                    method: method.clone(),
                });
            }
        }
        out
    }

    pub fn contains(&self, action: &BasicAction) -> bool {
        self.foci.contains(&action.focus) && self.methods.contains(&action.method)
    }

    pub fn is_empty(&self) -> bool {
        self.foci.is_empty() || self.methods.is_empty()
    }
}

/// What a thread does first: a basic action, or one of the three markers
/// transmitted in its place (`stop*`, `dead*`, `void*`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionMarker {
    Action(BasicAction),
    Stop,
    Dead,
    Void,
}

impl fmt::Display for ActionMarker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionMarker::Action(a) => a.fmt(f),
            ActionMarker::Stop => f.write_str("stop*"),
            ActionMarker::Dead => f.write_str("dead*"),
            ActionMarker::Void => f.write_str("void*"),
        }
    }
}

/// A thread term.
///
/// `Var` only appears inside the right-hand sides of a [`ThreadSpec`];
/// closed terms refer to recursion through `Rec`, which carries its spec.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ThreadTerm {
    Stop,
    Deadlock,
    PostCond(Arc<ThreadTerm>, BasicAction, Arc<ThreadTerm>),
    Var(String),
    Rec(String, Arc<ThreadSpec>),
}

impl ThreadTerm {
    pub fn post(on_true: ThreadTerm, action: BasicAction, on_false: ThreadTerm) -> Self {
        ThreadTerm::PostCond(Arc::new(on_true), action, Arc::new(on_false))
    }

    /// `a ; p`, shorthand for `p <a> p`.
    pub fn prefix(action: BasicAction, then: ThreadTerm) -> Self {
        let then = Arc::new(then);
        ThreadTerm::PostCond(then.clone(), action, then)
    }

    /// Postconditional nesting depth. Variables and recursion constants count
    /// as leaves.
    pub fn depth(&self) -> usize {
        match self {
            ThreadTerm::PostCond(l, _, r) => 1 + l.depth().max(r.depth()),
            _ => 0,
        }
    }

    /// True when no `Var` occurs outside a recursion constant.
    pub fn is_closed(&self) -> bool {
        match self {
            ThreadTerm::Stop | ThreadTerm::Deadlock | ThreadTerm::Rec(..) => true,
            ThreadTerm::Var(_) => false,
            ThreadTerm::PostCond(l, _, r) => l.is_closed() && r.is_closed(),
        }
    }

    pub fn is_recursion_free(&self) -> bool {
        match self {
            ThreadTerm::Stop | ThreadTerm::Deadlock => true,
            ThreadTerm::Var(_) | ThreadTerm::Rec(..) => false,
            ThreadTerm::PostCond(l, _, r) => l.is_recursion_free() && r.is_recursion_free(),
        }
    }

    /// Every basic action occurring in the term, including those of any
    /// recursive specification it refers to.
    pub fn basic_actions(&self) -> BTreeSet<BasicAction> {
        let mut out = BTreeSet::new();
        self.collect_actions(&mut out);
        out
    }

    fn collect_actions(&self, out: &mut BTreeSet<BasicAction>) {
        match self {
            ThreadTerm::Stop | ThreadTerm::Deadlock | ThreadTerm::Var(_) => {}
            ThreadTerm::PostCond(l, a, r) => {
                out.insert(a.clone());
                l.collect_actions(out);
                r.collect_actions(out);
            }
            ThreadTerm::Rec(_, spec) => {
                for rhs in spec.equations.values() {
                    rhs.collect_actions(out);
                }
            }
        }
    }

    /// Swap the two branches of every postconditional composition,
    /// recursively. Used to decide whether a thread's behaviour depends on
    /// the replies it receives.
    pub fn swap_branches(&self) -> ThreadTerm {
        match self {
            ThreadTerm::PostCond(l, a, r) => {
                ThreadTerm::post(r.swap_branches(), a.clone(), l.swap_branches())
            }
            other => other.clone(),
        }
    }

    fn vars_into<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ThreadTerm::Var(v) => out.push(v),
            ThreadTerm::PostCond(l, _, r) => {
                l.vars_into(out);
                r.vars_into(out);
            }
            _ => {}
        }
    }
}

/// A set of recursion equations `X = t_X`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThreadSpec {
    pub equations: BTreeMap<String, ThreadTerm>,
}

impl ThreadSpec {
    pub fn new() -> Self {
        ThreadSpec::default()
    }

    pub fn with(mut self, var: &str, rhs: ThreadTerm) -> Self {
        self.equations.insert(var.to_string(), rhs);
        self
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("equation {equation}: variable {variable} is not defined")]
    UndefinedVariable { equation: String, variable: String },
    #[error("equation {equation}: right-hand side is a bare variable")]
    UnguardedEquation { equation: String },
    #[error("equation {equation}: recursion constant on a right-hand side")]
    NestedConstant { equation: String },
    #[error("specification has no equations")]
    EmptySpec,
    #[error("enumeration depth {requested} exceeds the supported maximum {max}")]
    DepthTooLarge { requested: usize, max: usize },
}

/// A thread spec that passed [`validate_spec`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CheckedSpec(Arc<ThreadSpec>);

impl CheckedSpec {
    pub fn spec(&self) -> &Arc<ThreadSpec> {
        &self.0
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.0.equations.keys().map(String::as_str)
    }

    /// The recursion constant `<var|E>`, if `var` is defined.
    pub fn constant(&self, var: &str) -> Option<ThreadTerm> {
        self.0
            .equations
            .contains_key(var)
            .then(|| ThreadTerm::Rec(var.to_string(), self.0.clone()))
    }
}

/// Check that every right-hand side is `S`, `D` or a postconditional
/// composition over the spec's own variables.
pub fn validate_spec(spec: ThreadSpec) -> Result<CheckedSpec, Vec<SpecError>> {
    if spec.equations.is_empty() {
        return Err(vec![SpecError::EmptySpec]);
    }
    let mut errors = Vec::new();
    for (name, rhs) in &spec.equations {
        match rhs {
            ThreadTerm::Var(_) => errors.push(SpecError::UnguardedEquation {
                equation: name.clone(),
            }),
            ThreadTerm::Rec(..) => errors.push(SpecError::NestedConstant {
                equation: name.clone(),
            }),
            _ => {}
        }
        if contains_constant(rhs) && !matches!(rhs, ThreadTerm::Rec(..)) {
            errors.push(SpecError::NestedConstant {
                equation: name.clone(),
            });
        }
        let mut vars = Vec::new();
        rhs.vars_into(&mut vars);
        let mut seen = BTreeSet::new();
        for var in vars {
            if !spec.equations.contains_key(var) && seen.insert(var) {
                errors.push(SpecError::UndefinedVariable {
                    equation: name.clone(),
                    variable: var.to_string(),
                });
            }
        }
    }
    if errors.is_empty() {
        Ok(CheckedSpec(Arc::new(spec)))
    } else {
        Err(errors)
    }
}

fn contains_constant(t: &ThreadTerm) -> bool {
    match t {
        ThreadTerm::Rec(..) => true,
        ThreadTerm::PostCond(l, _, r) => contains_constant(l) || contains_constant(r),
        _ => false,
    }
}

/// Replace every variable of `term` by its recursion constant in `spec`.
pub fn close_over(term: &ThreadTerm, spec: &Arc<ThreadSpec>) -> ThreadTerm {
    match term {
        ThreadTerm::Var(v) => ThreadTerm::Rec(v.clone(), spec.clone()),
        ThreadTerm::PostCond(l, a, r) => {
            ThreadTerm::post(close_over(l, spec), a.clone(), close_over(r, spec))
        }
        other => other.clone(),
    }
}

/// One application of the recursive definition principle:
/// `<X|E>` becomes `t_X` with every `Y` replaced by `<Y|E>`.
pub fn unfold_once(var: &str, spec: &CheckedSpec) -> Option<ThreadTerm> {
    let rhs = spec.0.equations.get(var)?;
    Some(close_over(rhs, &spec.0))
}

/// The first thing a thread does: `⌈S⌉ = stop*`, `⌈D⌉ = dead*`,
/// `⌈t <a> t'⌉ = a`, and a recursion constant answers for its unfolding.
///
/// # Panics
///
/// If `t` is an open variable; use [`first_action_in`] for right-hand sides.
pub fn first_action(t: &ThreadTerm) -> ActionMarker {
    match t {
        ThreadTerm::Stop => ActionMarker::Stop,
        ThreadTerm::Deadlock => ActionMarker::Dead,
        ThreadTerm::PostCond(_, a, _) => ActionMarker::Action(a.clone()),
        ThreadTerm::Rec(var, spec) => first_action_in(&ThreadTerm::Var(var.clone()), spec),
        ThreadTerm::Var(v) => panic!("first_action of free variable {v}"),
    }
}

/// [`first_action`] for terms whose variables are interpreted in `spec`.
pub fn first_action_in(t: &ThreadTerm, spec: &ThreadSpec) -> ActionMarker {
    match t {
        ThreadTerm::Var(v) => {
            let rhs = spec
                .equations
                .get(v)
                .unwrap_or_else(|| panic!("variable {v} undefined in spec"));
            // guarded: one lookup reaches S, D or a postconditional
            first_action(rhs)
        }
        other => first_action(other),
    }
}

/// All recursion-free closed terms of postconditional depth at most
/// `max_depth` over `alphabet`, shallow terms first.
pub fn enumerate_threads(
    max_depth: usize,
    alphabet: &[BasicAction],
) -> Result<Vec<ThreadTerm>, SpecError> {
    if max_depth > MAX_ENUMERATION_DEPTH {
        return Err(SpecError::DepthTooLarge {
            requested: max_depth,
            max: MAX_ENUMERATION_DEPTH,
        });
    }
    let mut level: Vec<Arc<ThreadTerm>> =
        vec![Arc::new(ThreadTerm::Stop), Arc::new(ThreadTerm::Deadlock)];
    for _ in 0..max_depth {
        let mut next = vec![Arc::new(ThreadTerm::Stop), Arc::new(ThreadTerm::Deadlock)];
        for action in alphabet {
            for left in &level {
                for right in &level {
                    next.push(Arc::new(ThreadTerm::PostCond(
                        left.clone(),
                        action.clone(),
                        right.clone(),
                    )));
                }
            }
        }
        level = next;
    }
    let mut out: Vec<ThreadTerm> = level.iter().map(|t| (**t).clone()).collect();
    out.sort_by_key(|t| t.depth());
    Ok(out)
}

/// Deterministic pseudo-random recursion-free thread of depth at most
/// `max_depth`.
pub fn random_thread(max_depth: usize, alphabet: &[BasicAction], seed: u64) -> ThreadTerm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_thread_with(&mut rng, max_depth, alphabet)
}

pub fn random_thread_with<R: Rng + ?Sized>(
    rng: &mut R,
    max_depth: usize,
    alphabet: &[BasicAction],
) -> ThreadTerm {
    if max_depth == 0 || alphabet.is_empty() || rng.gen_ratio(1, 4) {
        return if rng.gen_bool(0.5) {
            ThreadTerm::Stop
        } else {
            ThreadTerm::Deadlock
        };
    }
    let action = alphabet[rng.gen_range(0..alphabet.len())].clone();
    let left = random_thread_with(rng, max_depth - 1, alphabet);
    let right = random_thread_with(rng, max_depth - 1, alphabet);
    ThreadTerm::post(left, action, right)
}

/// A random guarded recursive specification with `1..=max_equations`
/// equations named `X0, X1, ...`; the entry variable is `X0`.
pub fn random_spec_with<R: Rng + ?Sized>(
    rng: &mut R,
    max_equations: usize,
    max_rhs_depth: usize,
    alphabet: &[BasicAction],
) -> CheckedSpec {
    assert!(max_equations >= 1 && !alphabet.is_empty());
    let count = rng.gen_range(1..=max_equations);
    let names: Vec<String> = (0..count).map(|i| format!("X{i}")).collect();
    let mut spec = ThreadSpec::new();
    for name in &names {
        let rhs = if rng.gen_ratio(1, 6) {
            random_leaf(rng, &[])
        } else {
            let action = alphabet[rng.gen_range(0..alphabet.len())].clone();
            let depth = max_rhs_depth.max(1) - 1;
            ThreadTerm::post(
                random_open(rng, depth, alphabet, &names),
                action,
                random_open(rng, depth, alphabet, &names),
            )
        };
        spec.equations.insert(name.clone(), rhs);
    }
    validate_spec(spec).expect("generated specs are guarded")
}

fn random_leaf<R: Rng + ?Sized>(rng: &mut R, vars: &[String]) -> ThreadTerm {
    let choices = 2 + 2 * vars.len();
    match rng.gen_range(0..choices) {
        0 => ThreadTerm::Stop,
        1 => ThreadTerm::Deadlock,
        k => ThreadTerm::Var(vars[(k - 2) % vars.len()].clone()),
    }
}

fn random_open<R: Rng + ?Sized>(
    rng: &mut R,
    depth: usize,
    alphabet: &[BasicAction],
    vars: &[String],
) -> ThreadTerm {
    if depth == 0 || rng.gen_ratio(1, 2) {
        return random_leaf(rng, vars);
    }
    let action = alphabet[rng.gen_range(0..alphabet.len())].clone();
    ThreadTerm::post(
        random_open(rng, depth - 1, alphabet, vars),
        action,
        random_open(rng, depth - 1, alphabet, vars),
    )
}
