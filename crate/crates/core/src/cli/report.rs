//! JSON verification reports.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::equivalence::{Capabilities, Difference, TheoremCheck, Verdict, Witness};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: &'static str,
    /// SHA-256 of the input file, hex encoded; absent for generated inputs.
    pub input_digest: Option<String>,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(input: Option<&[u8]>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            input_digest: input.map(digest),
            checks: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub thread: String,
    pub protocol: String,
    pub variant: String,
    pub termination: String,
    pub depth: Option<u32>,
    pub verdict: &'static str,
    pub witness: Option<WitnessRecord>,
    pub left_states: usize,
    pub left_transitions: usize,
    pub right_states: usize,
    pub right_transitions: usize,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CapabilityRecord {
    pub terminates: bool,
    pub enabled: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessRecord {
    pub observation: Vec<String>,
    pub left_trace: Vec<String>,
    pub right_trace: Vec<String>,
    pub left: CapabilityRecord,
    pub right: CapabilityRecord,
    pub difference: String,
}

fn labels<'a, T: ToString + 'a>(it: impl IntoIterator<Item = &'a T>) -> Vec<String> {
    it.into_iter().map(ToString::to_string).collect()
}

fn capability(c: &Capabilities) -> CapabilityRecord {
    CapabilityRecord {
        terminates: c.terminates,
        enabled: labels(&c.enabled),
    }
}

pub fn describe_difference(w: &Witness) -> String {
    let side = |left: bool| if left { "left" } else { "right" };
    match w.difference() {
        Difference::TerminateVsDeadlock { left_terminates } => {
            format!(
                "terminate vs deadlock ({} terminates)",
                side(left_terminates)
            )
        }
        Difference::Termination { left_terminates } => {
            format!("only the {} side terminates", side(left_terminates))
        }
        Difference::Actions {
            only_left,
            only_right,
        } => format!(
            "enabled actions differ (left only: {:?}, right only: {:?})",
            labels(&only_left),
            labels(&only_right)
        ),
    }
}

pub fn witness_record(w: &Witness) -> WitnessRecord {
    WitnessRecord {
        observation: w
            .observation()
            .into_iter()
            .map(ToString::to_string)
            .collect(),
        left_trace: labels(&w.left_trace),
        right_trace: labels(&w.right_trace),
        left: capability(&w.left),
        right: capability(&w.right),
        difference: describe_difference(w),
    }
}

/// Settings of one check, rendered for the report.
pub struct CheckSettings {
    pub thread: String,
    pub protocol: String,
    pub variant: String,
    pub termination: String,
    pub depth: Option<u32>,
}

pub fn check_record(
    settings: CheckSettings,
    check: &TheoremCheck,
    wall_time_ms: f64,
) -> CheckRecord {
    let (verdict, witness) = match &check.verdict {
        Verdict::Equivalent => ("equivalent", None),
        Verdict::Distinguished(w) => ("distinguished", Some(witness_record(w))),
    };
    CheckRecord {
        thread: settings.thread,
        protocol: settings.protocol,
        variant: settings.variant,
        termination: settings.termination,
        depth: settings.depth,
        verdict,
        witness,
        left_states: check.left.num_states(),
        left_transitions: check.left.num_transitions(),
        right_states: check.right.num_states(),
        right_transitions: check.right.num_transitions(),
        wall_time_ms,
    }
}
