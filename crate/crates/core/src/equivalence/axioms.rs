//! Soundness of the process axioms in the operational model: every schema
//! is instantiated with random closed terms and both sides are compared.
//! τ-free instances must be strongly bisimilar (and, as a cross-check,
//! rooted branching bisimilar); instances with τ must be rooted branching
//! bisimilar.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{rooted_branching_equivalent, strong_equivalent};
use crate::process::random::{
    default_alphabet, random_label, random_label_set, random_process, random_process_spec,
    TermShape,
};
use crate::process::{ActionLabel, LabelSet, ProcessTerm};
use crate::semantics::{build_lts, close_process, BuildOptions};

/// Every checked schema, in report order.
pub const SCHEMAS: [&str; 38] = [
    "A1", "A2", "A3", "A4", "A5", "A6", "A7", "CM1", "CM2", "CM3", "CM4", "CM5", "CM6", "CM7",
    "CM8", "CM9", "B1", "B2", "C1", "C2", "C3", "C4", "D1", "D2", "D3", "D4", "TI1", "TI2", "TI3",
    "TI4", "PR1", "PR2", "PR3", "PR4", "PR5", "PR6", "PR7", "RDP",
];

#[derive(Clone, Debug)]
pub struct AxiomConfig {
    pub samples: usize,
    pub seed: u64,
    pub max_depth: usize,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        AxiomConfig {
            samples: 200,
            seed: 0,
            max_depth: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub schema: &'static str,
    pub instances: usize,
    pub passed: usize,
    /// Instances decided by the strong checker.
    pub strong: usize,
    /// Rendered failing instances (at most five).
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.instances
    }
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    shape: TermShape,
}

impl Gen<'_> {
    fn term(&mut self) -> ProcessTerm {
        random_process(self.rng, &self.shape)
    }

    /// An arbitrary constant: atomic action, `delta`, or `tau` when allowed.
    fn constant(&mut self) -> ProcessTerm {
        match self.rng.gen_range(0..6) {
            0 => ProcessTerm::Delta,
            1 if self.shape.allow_tau => ProcessTerm::Tau,
            _ => ProcessTerm::atom(self.label()),
        }
    }

    /// A constant other than `tau`.
    fn visible_constant(&mut self) -> ProcessTerm {
        if self.rng.gen_ratio(1, 6) {
            ProcessTerm::Delta
        } else {
            ProcessTerm::atom(self.label())
        }
    }

    fn label(&mut self) -> ActionLabel {
        random_label(self.rng, &self.shape.alphabet)
    }

    fn set(&mut self) -> LabelSet {
        random_label_set(self.rng, &self.shape.alphabet)
    }

    fn depth(&mut self) -> u32 {
        self.rng.gen_range(0..4)
    }
}

fn constant_label(t: &ProcessTerm) -> Option<&ActionLabel> {
    match t {
        ProcessTerm::Atom(l) => Some(l),
        _ => None,
    }
}

/// One random instance `(lhs, rhs)` of `schema`.
pub fn instance(
    schema: &str,
    rng: &mut ChaCha8Rng,
    shape: &TermShape,
) -> (ProcessTerm, ProcessTerm) {
    use ProcessTerm as P;
    let mut g = Gen {
        rng,
        shape: shape.clone(),
    };
    let tau = || P::Tau;
    match schema {
        "A1" => {
            let (x, y) = (g.term(), g.term());
            (P::alt(x.clone(), y.clone()), P::alt(y, x))
        }
        "A2" => {
            let (x, y, z) = (g.term(), g.term(), g.term());
            (
                P::alt(P::alt(x.clone(), y.clone()), z.clone()),
                P::alt(x, P::alt(y, z)),
            )
        }
        "A3" => {
            let x = g.term();
            (P::alt(x.clone(), x.clone()), x)
        }
        "A4" => {
            let (x, y, z) = (g.term(), g.term(), g.term());
            (
                P::seq(P::alt(x.clone(), y.clone()), z.clone()),
                P::alt(P::seq(x, z.clone()), P::seq(y, z)),
            )
        }
        "A5" => {
            let (x, y, z) = (g.term(), g.term(), g.term());
            (
                P::seq(P::seq(x.clone(), y.clone()), z.clone()),
                P::seq(x, P::seq(y, z)),
            )
        }
        "A6" => {
            let x = g.term();
            (P::alt(x.clone(), P::Delta), x)
        }
        "A7" => (P::seq(P::Delta, g.term()), P::Delta),
        "CM1" => {
            let (x, y) = (g.term(), g.term());
            let rhs = P::sum([
                P::left_merge(x.clone(), y.clone()),
                P::left_merge(y.clone(), x.clone()),
                P::comm_merge(x.clone(), y.clone()),
            ]);
            (P::par(x, y), rhs)
        }
        "CM2" => {
            let (a, x) = (g.constant(), g.term());
            (P::left_merge(a.clone(), x.clone()), P::seq(a, x))
        }
        "CM3" => {
            let (a, x, y) = (g.constant(), g.term(), g.term());
            (
                P::left_merge(P::seq(a.clone(), x.clone()), y.clone()),
                P::seq(a, P::par(x, y)),
            )
        }
        "CM4" => {
            let (x, y, z) = (g.term(), g.term(), g.term());
            (
                P::left_merge(P::alt(x.clone(), y.clone()), z.clone()),
                P::alt(P::left_merge(x, z.clone()), P::left_merge(y, z)),
            )
        }
        "CM5" => {
            let (a, b, x) = (g.constant(), g.constant(), g.term());
            (
                P::comm_merge(P::seq(a.clone(), x.clone()), b.clone()),
                P::seq(P::comm_merge(a, b), x),
            )
        }
        "CM6" => {
            let (a, b, x) = (g.constant(), g.constant(), g.term());
            (
                P::comm_merge(a.clone(), P::seq(b.clone(), x.clone())),
                P::seq(P::comm_merge(a, b), x),
            )
        }
        "CM7" => {
            let (a, b, x, y) = (g.constant(), g.constant(), g.term(), g.term());
            (
                P::comm_merge(P::seq(a.clone(), x.clone()), P::seq(b.clone(), y.clone())),
                P::seq(P::comm_merge(a, b), P::par(x, y)),
            )
        }
        "CM8" => {
            let (x, y, z) = (g.term(), g.term(), g.term());
            (
                P::comm_merge(P::alt(x.clone(), y.clone()), z.clone()),
                P::alt(P::comm_merge(x, z.clone()), P::comm_merge(y, z)),
            )
        }
        "CM9" => {
            let (x, y, z) = (g.term(), g.term(), g.term());
            (
                P::comm_merge(x.clone(), P::alt(y.clone(), z.clone())),
                P::alt(P::comm_merge(x.clone(), y), P::comm_merge(x, z)),
            )
        }
        "B1" => {
            let x = g.term();
            (P::seq(x.clone(), tau()), x)
        }
        "B2" => {
            let (x, y, z) = (g.term(), g.term(), g.term());
            let yz = P::alt(y.clone(), z);
            (
                P::seq(x.clone(), P::alt(P::seq(tau(), yz.clone()), y)),
                P::seq(x, yz),
            )
        }
        "C1" => {
            let (a, b) = (g.constant(), g.constant());
            (P::comm_merge(a.clone(), b.clone()), P::comm_merge(b, a))
        }
        "C2" => {
            let (a, b, c) = (g.constant(), g.constant(), g.constant());
            (
                P::comm_merge(P::comm_merge(a.clone(), b.clone()), c.clone()),
                P::comm_merge(a, P::comm_merge(b, c)),
            )
        }
        "C3" => (P::comm_merge(P::Delta, g.constant()), P::Delta),
        "C4" => (P::comm_merge(tau(), g.constant()), P::Delta),
        "D1" => {
            let a = g.constant();
            let h = g.set();
            let h = LabelSet::new(h.iter().filter(|l| Some(*l) != constant_label(&a)).cloned());
            (P::encap(h, a.clone()), a)
        }
        "D2" => {
            let a = g.label();
            let h = LabelSet::new(g.set().iter().cloned().chain([a.clone()]));
            (P::encap(h, P::atom(a)), P::Delta)
        }
        "D3" => {
            let (h, x, y) = (g.set(), g.term(), g.term());
            (
                P::encap(h.clone(), P::alt(x.clone(), y.clone())),
                P::alt(P::encap(h.clone(), x), P::encap(h, y)),
            )
        }
        "D4" => {
            let (h, x, y) = (g.set(), g.term(), g.term());
            (
                P::encap(h.clone(), P::seq(x.clone(), y.clone())),
                P::seq(P::encap(h.clone(), x), P::encap(h, y)),
            )
        }
        "TI1" => {
            let a = g.constant();
            let i = g.set();
            let i = LabelSet::new(i.iter().filter(|l| Some(*l) != constant_label(&a)).cloned());
            (P::abstraction(i, a.clone()), a)
        }
        "TI2" => {
            let a = g.label();
            let i = LabelSet::new(g.set().iter().cloned().chain([a.clone()]));
            (P::abstraction(i, P::atom(a)), tau())
        }
        "TI3" => {
            let (i, x, y) = (g.set(), g.term(), g.term());
            (
                P::abstraction(i.clone(), P::alt(x.clone(), y.clone())),
                P::alt(P::abstraction(i.clone(), x), P::abstraction(i, y)),
            )
        }
        "TI4" => {
            let (i, x, y) = (g.set(), g.term(), g.term());
            (
                P::abstraction(i.clone(), P::seq(x.clone(), y.clone())),
                P::seq(P::abstraction(i.clone(), x), P::abstraction(i, y)),
            )
        }
        "PR1" => (P::proj(0, g.visible_constant()), P::Delta),
        "PR2" => {
            let (n, a) = (g.depth(), g.visible_constant());
            (P::proj(n + 1, a.clone()), a)
        }
        "PR3" => (P::proj(0, P::seq(g.visible_constant(), g.term())), P::Delta),
        "PR4" => {
            let (n, a, x) = (g.depth(), g.visible_constant(), g.term());
            (
                P::proj(n + 1, P::seq(a.clone(), x.clone())),
                P::seq(a, P::proj(n, x)),
            )
        }
        "PR5" => {
            let (n, x, y) = (g.depth(), g.term(), g.term());
            (
                P::proj(n, P::alt(x.clone(), y.clone())),
                P::alt(P::proj(n, x), P::proj(n, y)),
            )
        }
        "PR6" => (P::proj(g.depth(), tau()), tau()),
        "PR7" => {
            let (n, x) = (g.depth(), g.term());
            (
                P::proj(n, P::seq(tau(), x.clone())),
                P::seq(tau(), P::proj(n, x)),
            )
        }
        "RDP" => {
            let (spec, vars) = random_process_spec(g.rng, &g.shape, 3);
            let var = vars[g.rng.gen_range(0..vars.len())].clone();
            let body = spec.get(&var).expect("variable of its own spec").clone();
            let unfolded = close_process(&std::sync::Arc::new(body), &spec);
            (P::Rec(var, spec), (*unfolded).clone())
        }
        other => panic!("unknown axiom schema {other}"),
    }
}

/// Outcome of one instance: `Ok(strong)` when equivalent, with whether the
/// strong checker decided it.
fn check_instance(lhs: &ProcessTerm, rhs: &ProcessTerm) -> Result<bool, String> {
    let options = BuildOptions::raw();
    let l = build_lts(lhs, &options).map_err(|e| e.to_string())?;
    let r = build_lts(rhs, &options).map_err(|e| e.to_string())?;
    let tau_free =
        !l.labels().contains(&ActionLabel::Tau) && !r.labels().contains(&ActionLabel::Tau);
    let branching = rooted_branching_equivalent(&l, &r);
    if tau_free {
        if let Some(w) = strong_equivalent(&l, &r).witness() {
            return Err(format!("not strongly bisimilar\n{w}"));
        }
        if let Some(w) = branching.witness() {
            return Err(format!("strongly but not branching bisimilar\n{w}"));
        }
        Ok(true)
    } else {
        match branching.witness() {
            Some(w) => Err(format!("not rooted branching bisimilar\n{w}")),
            None => Ok(false),
        }
    }
}

pub fn run_schema(schema: &'static str, index: usize, config: &AxiomConfig) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ ((index as u64 + 1) << 32));
    let mut report = AxiomReport {
        schema,
        instances: config.samples,
        passed: 0,
        strong: 0,
        failures: Vec::new(),
    };
    for i in 0..config.samples {
        // alternate between τ-free terms and terms with τ
        let shape = TermShape::new(default_alphabet(), config.max_depth, i % 2 == 1);
        let (lhs, rhs) = instance(schema, &mut rng, &shape);
        match check_instance(&lhs, &rhs) {
            Ok(strong) => {
                report.passed += 1;
                report.strong += strong as usize;
            }
            Err(why) => {
                if report.failures.len() < 5 {
                    report.failures.push(format!("{lhs}  =  {rhs}: {why}"));
                }
            }
        }
    }
    report
}

/// Run every schema; schemas are checked in parallel, each from its own
/// seed, so results do not depend on scheduling.
pub fn run_axioms(config: &AxiomConfig) -> Vec<AxiomReport> {
    SCHEMAS
        .par_iter()
        .enumerate()
        .map(|(i, name)| run_schema(name, i, config))
        .collect()
}
