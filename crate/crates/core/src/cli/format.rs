//! Text rendering of terms and specifications.

use crate::cli::parser::SpecFile;
use crate::process::{ProcessSpec, ProcessTerm};
use crate::thread::ThreadTerm;

/// `S`, `D`, variables by name, and `l <f.m> r` with nested compositions
/// parenthesized. Recursion constants print as their variable.
pub fn format_thread(t: &ThreadTerm) -> String {
    let mut out = String::new();
    write_thread(t, &mut out, false);
    out
}

fn write_thread(t: &ThreadTerm, out: &mut String, nested: bool) {
    match t {
        ThreadTerm::Stop => out.push('S'),
        ThreadTerm::Deadlock => out.push('D'),
        ThreadTerm::Var(v) | ThreadTerm::Rec(v, _) => out.push_str(v),
        ThreadTerm::PostCond(l, a, r) => {
            if nested {
                out.push('(');
            }
            write_thread(l, out, true);
            out.push_str(&format!(" <{a}> "));
            write_thread(r, out, true);
            if nested {
                out.push(')');
            }
        }
    }
}

pub fn format_process(t: &ProcessTerm) -> String {
    t.to_string()
}

/// One `X = ...;` line per equation, in the given order.
pub fn format_spec_file(file: &SpecFile) -> String {
    let join = |v: Vec<String>| v.join(", ");
    let mut out = format!(
        "foci {};\nmethods {};\n",
        join(file.alphabet.foci.iter().map(ToString::to_string).collect()),
        join(
            file.alphabet
                .methods
                .iter()
                .map(ToString::to_string)
                .collect()
        ),
    );
    for name in &file.order {
        out.push_str(&format!(
            "{name} = {};\n",
            format_thread(&file.spec.spec().equations[name])
        ));
    }
    out
}

/// The equations of a process specification, one per line.
pub fn format_process_spec(spec: &ProcessSpec) -> String {
    spec.equations()
        .iter()
        .map(|(var, rhs)| format!("{var} = {rhs}\n"))
        .collect()
}
