//! Command-line front end.
//!
//! Exit codes: 0 for success or an equivalent verdict, 1 for a
//! distinguished verdict or any failed property, 2 for input errors.

pub mod aut;
pub mod format;
pub mod parser;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::equivalence::axioms::{run_axioms, AxiomConfig};
use crate::equivalence::{verify_theorem, TheoremCheck, VerifyError};
use crate::extraction::{extract, ExtractionMode};
use crate::process::ProcessTerm;
use crate::protocols::{compose_system, ProtocolId, ReceiverVariant};
use crate::semantics::{build_lts, BuildOptions, Termination};
use crate::thread::{random_thread, Alphabet, ThreadTerm};

use format::{format_process_spec, format_spec_file, format_thread};
use parser::{parse_spec_text, SpecFile};
use report::{check_record, CheckSettings, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "instream",
    version,
    about = "Remotely controlled threads: extraction, protocols and bisimulation checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Plain,
    Rct,
    RctAlt,
}

impl From<ModeArg> for ExtractionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Plain => ExtractionMode::Plain,
            ModeArg::Rct => ExtractionMode::Rct,
            ModeArg::RctAlt => ExtractionMode::RctAlt,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProtocolArg {
    #[value(name = "1")]
    Simple,
    #[value(name = "2")]
    Pipelined,
}

impl From<ProtocolArg> for ProtocolId {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Simple => ProtocolId::Simple,
            ProtocolArg::Pipelined => ProtocolId::Pipelined,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReceiverArg {
    Faithful,
    Repaired,
}

impl From<ReceiverArg> for ReceiverVariant {
    fn from(r: ReceiverArg) -> Self {
        match r {
            ReceiverArg::Faithful => ReceiverVariant::Faithful,
            ReceiverArg::Repaired => ReceiverVariant::Repaired,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TerminationArg {
    Strict,
    Server,
}

impl From<TerminationArg> for Termination {
    fn from(t: TerminationArg) -> Self {
        match t {
            TerminationArg::Strict => Termination::Strict,
            TerminationArg::Server => Termination::Server,
        }
    }
}

#[derive(clap::Args, Debug, Clone)]
struct SystemArgs {
    /// 1 = simple protocol, 2 = pipelined protocol.
    #[arg(long, value_enum, default_value = "1")]
    protocol: ProtocolArg,
    #[arg(long, value_enum, default_value = "repaired")]
    receiver: ReceiverArg,
    #[arg(long, value_enum, default_value = "strict")]
    termination: TerminationArg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a specification file and print it back.
    Parse { file: PathBuf },
    /// Print the process extracted from a thread.
    Extract {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "plain")]
        mode: ModeArg,
        /// Entry variable; defaults to the first equation.
        #[arg(long)]
        thread: Option<String>,
    },
    /// Export an LTS in Aldebaran format: of the extracted process, or with
    /// --system of the abstracted client/server system.
    Lts {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "plain")]
        mode: ModeArg,
        #[arg(long)]
        thread: Option<String>,
        #[arg(long)]
        system: bool,
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a thread's process with its client/server system.
    Verify {
        file: PathBuf,
        #[arg(long)]
        thread: Option<String>,
        #[command(flatten)]
        sys: SystemArgs,
        /// Compare projections up to this depth only.
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Verify many random recursion-free threads.
    Fuzz {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "f,g")]
        foci: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "m")]
        methods: Vec<String>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check the process axioms on random instances.
    Axioms {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
    },
}

/// A failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

fn input_error(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        input_error(e)
    }
}

type Outcome = Result<i32, Failure>;

/// Run the command line `args` (program name first).
pub fn run_command<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let sink: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(SpecFile, Vec<u8>), Failure> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| input_error(format!("{}: not UTF-8", path.display())))?;
    let file =
        parse_spec_text(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok((file, bytes))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) {
    let _ = out.write_all(text.as_bytes());
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Parse { file } => {
            let (spec, _) = load(&file)?;
            emit(out, &format_spec_file(&spec));
            Ok(EXIT_OK)
        }
        Command::Extract { file, mode, thread } => {
            let (spec, _) = load(&file)?;
            let t = spec.entry(thread.as_deref()).map_err(input_error)?;
            let p = extract(mode.into(), &t);
            emit(out, &format!("{p}\n"));
            if let Some(image) = recursion_image(&p) {
                emit(out, &format_process_spec(image));
            }
            Ok(EXIT_OK)
        }
        Command::Lts {
            file,
            mode,
            thread,
            system,
            sys,
            out: path,
        } => {
            let (spec, _) = load(&file)?;
            let t = spec.entry(thread.as_deref()).map_err(input_error)?;
            let (process, options) = if system {
                let s =
                    compose_system(&t, &spec.alphabet, sys.protocol.into(), sys.receiver.into())
                        .map_err(input_error)?;
                (
                    s.abstracted(),
                    BuildOptions::with_termination(sys.termination.into()),
                )
            } else {
                (extract(mode.into(), &t), BuildOptions::default())
            };
            let lts = build_lts(&process, &options).map_err(input_error)?;
            let text = aut::export_aut(&lts);
            match path {
                Some(path) => write_file(&path, &text)?,
                None => emit(out, &text),
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            file,
            thread,
            sys,
            depth,
            report,
        } => {
            let (spec, bytes) = load(&file)?;
            let t = spec.entry(thread.as_deref()).map_err(input_error)?;
            let started = Instant::now();
            let check = verify_theorem(
                &t,
                &spec.alphabet,
                sys.protocol.into(),
                sys.receiver.into(),
                sys.termination.into(),
                depth,
            )?;
            let elapsed = started.elapsed().as_secs_f64() * 1e3;
            print_verdict(out, &t, &check);
            if let Some(path) = report {
                let mut r = Report::new(Some(&bytes));
                r.checks
                    .push(check_record(settings(&t, &sys, depth), &check, elapsed));
                write_file(&path, &r.to_json())?;
            }
            Ok(verdict_code(&check))
        }
        Command::Fuzz {
            sys,
            count,
            max_depth,
            seed,
            foci,
            methods,
            report,
        } => {
            let foci: Vec<&str> = foci.iter().map(String::as_str).collect();
            let methods: Vec<&str> = methods.iter().map(String::as_str).collect();
            let alphabet = Alphabet::new(&foci, &methods);
            if alphabet.is_empty() {
                return Err(input_error("foci and methods must be non-empty"));
            }
            let actions = alphabet.basic_actions();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let seeds: Vec<u64> = (0..count).map(|_| rng.gen()).collect();
            let results: Vec<(ThreadTerm, Result<TheoremCheck, VerifyError>, f64)> = seeds
                .par_iter()
                .map(|&s| {
                    let t = random_thread(max_depth, &actions, s);
                    let started = Instant::now();
                    let check = verify_theorem(
                        &t,
                        &alphabet,
                        sys.protocol.into(),
                        sys.receiver.into(),
                        sys.termination.into(),
                        None,
                    );
                    (t, check, started.elapsed().as_secs_f64() * 1e3)
                })
                .collect();
            let mut r = Report::new(None);
            let mut equivalent = 0;
            let mut code = EXIT_OK;
            for (t, check, ms) in &results {
                match check {
                    Ok(check) => {
                        if check.verdict.is_equivalent() {
                            equivalent += 1;
                        } else {
                            code = EXIT_FAILED;
                            emit(out, &format!("distinguished: {}\n", format_thread(t)));
                        }
                        r.checks
                            .push(check_record(settings(t, &sys, None), check, *ms));
                    }
                    Err(e) => {
                        code = EXIT_FAILED;
                        emit(out, &format!("error: {}: {e}\n", format_thread(t)));
                    }
                }
            }
            emit(out, &format!("{equivalent}/{count} equivalent\n"));
            if let Some(path) = report {
                write_file(&path, &r.to_json())?;
            }
            Ok(code)
        }
        Command::Axioms {
            samples,
            seed,
            max_depth,
        } => {
            let started = Instant::now();
            let reports = run_axioms(&AxiomConfig {
                samples,
                seed,
                max_depth,
            });
            let mut code = EXIT_OK;
            for r in &reports {
                let status = if r.all_passed() { "ok" } else { "FAILED" };
                emit(
                    out,
                    &format!(
                        "{:<4} {}/{} ({} strong) {status}\n",
                        r.schema, r.passed, r.instances, r.strong
                    ),
                );
                for f in &r.failures {
                    emit(out, &format!("  {f}\n"));
                }
                if !r.all_passed() {
                    code = EXIT_FAILED;
                }
            }
            emit(out, &format!("{:.2}s\n", started.elapsed().as_secs_f64()));
            Ok(code)
        }
    }
}

fn recursion_image(p: &ProcessTerm) -> Option<&crate::process::ProcessSpec> {
    match p {
        ProcessTerm::Rec(_, spec) => Some(spec),
        ProcessTerm::Abstract(_, inner) => recursion_image(inner),
        _ => None,
    }
}

fn settings(t: &ThreadTerm, sys: &SystemArgs, depth: Option<u32>) -> CheckSettings {
    let name = |v: &dyn std::fmt::Debug| format!("{v:?}").to_lowercase();
    CheckSettings {
        thread: format_thread(t),
        protocol: name(&ProtocolId::from(sys.protocol)),
        variant: name(&ReceiverVariant::from(sys.receiver)),
        termination: name(&Termination::from(sys.termination)),
        depth,
    }
}

fn verdict_code(check: &TheoremCheck) -> i32 {
    if check.verdict.is_equivalent() {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn print_verdict(out: &mut dyn Write, t: &ThreadTerm, check: &TheoremCheck) {
    match check.verdict.witness() {
        None => emit(out, &format!("equivalent: {}\n", format_thread(t))),
        Some(w) => emit(
            out,
            &format!(
                "distinguished: {}\n{w}\n{}\n",
                format_thread(t),
                report::describe_difference(w)
            ),
        ),
    }
}
