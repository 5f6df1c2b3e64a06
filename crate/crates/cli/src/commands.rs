//! Subcommands. Each returns the process exit code.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use trainyard::engine::{simulate, Outcome, Status, DEFAULT_STEP_CAP};
use trainyard::gadgets::{stamp, verify, GadgetKind, VerificationReport, VerifyMode, DEFAULT_EXHAUSTIVE_BOUND};
use trainyard::io::{
    parse_formula_bytes, parse_graph_bytes, parse_layout, parse_level_bytes, serialize_level, LoadedLevel, TraceDocument,
};
use trainyard::reduction::{
    canonical_layout, compile, dominating_set_to_mms, extract_assignment, oracle_solve, Assignment, MmsInstance,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CRASHED: i32 = 2;
pub const EXIT_DEADLOCKED: i32 = 3;
pub const EXIT_TIMEOUT: i32 = 4;
/// A gadget contract failed verification.
pub const EXIT_VIOLATION: i32 = 5;

pub fn outcome_code(o: Outcome) -> i32 {
    match o {
        Outcome::Won => EXIT_OK,
        Outcome::Crashed => EXIT_CRASHED,
        Outcome::Deadlocked => EXIT_DEADLOCKED,
        Outcome::Timeout => EXIT_TIMEOUT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "trainyard", version, about = "Trainyard simulator and Min-Mon-SAT level compiler")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Exhaustive when the stamp is small enough, sampled otherwise.
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a formula file into a level document.
    Compile {
        formula: PathBuf,
        /// Overrides the budget from the formula header.
        #[arg(short)]
        k: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a level document and report the outcome.
    Simulate {
        level: PathBuf,
        /// JSON list of rail entries; defaults to the layout inside the level.
        #[arg(long)]
        layout: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
        cap: u64,
        /// Write the trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Decide a formula with the brute-force oracle.
    SolveMms { formula: PathBuf },
    /// Compile a formula and build the winning layout for an assignment.
    Canonical {
        formula: PathBuf,
        /// Comma-separated true variables, e.g. "2,4,5".
        #[arg(long)]
        assignment: String,
        #[arg(short)]
        k: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check gadget contracts.
    VerifyGadgets {
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_BOUND)]
        bound: usize,
        /// Print the reports as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Decide whether a graph has a dominating set of size at most k.
    Dominating {
        graph: PathBuf,
        #[arg(short)]
        k: u32,
    },
    /// Serve the HTTP API and the player's static files.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "ui/dist")]
        static_dir: PathBuf,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

type CmdResult = Result<i32, String>;

fn read(path: &Path) -> Result<Vec<u8>, String> {
    fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(text: &str, output: Option<&PathBuf>, out: &mut dyn Write) -> Result<(), String> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn load_instance(path: &Path, k: Option<u32>) -> Result<MmsInstance, String> {
    let inst = parse_formula_bytes(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    match k {
        None => Ok(inst),
        Some(k) => MmsInstance::new(inst.formula, k).map_err(|e| e.to_string()),
    }
}

pub fn parse_assignment(s: &str) -> Result<Assignment, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim_start_matches(['x', 'X'])
                .parse::<u32>()
                .map_err(|_| format!("`{t}` is not a variable index"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Assignment::new)
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let w = |e: std::io::Error| e.to_string();
    match cmd {
        Command::Compile { formula, k, output } => {
            let inst = load_instance(&formula, k)?;
            let plan = compile(&inst).map_err(|e| e.to_string())?;
            emit(&serialize_level(&LoadedLevel::from_plan(&plan, None)), output.as_ref(), out)?;
            writeln!(
                err,
                "compiled {} (k = {}) into a {}x{} level",
                inst.formula,
                inst.k,
                plan.level.width(),
                plan.level.height()
            )
            .map_err(w)?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            level,
            layout,
            cap,
            trace,
        } => {
            let loaded = parse_level_bytes(&read(&level)?).map_err(|e| format!("{}: {e}", level.display()))?;
            let rails = match layout {
                Some(p) => {
                    let text = String::from_utf8(read(&p)?).map_err(|e| format!("{}: {e}", p.display()))?;
                    parse_layout(&loaded.level, &text).map_err(|e| format!("{}: {e}", p.display()))?
                }
                None => loaded.layout.clone().unwrap_or_default(),
            };
            let r = simulate(&loaded.level, &rails, cap).map_err(|e| e.to_string())?;
            let last = r.trace.last();
            writeln!(out, "outcome: {:?} at step {}", r.outcome, last.step).map_err(w)?;
            if let Status::Crashed { pos, reason } = last.status {
                writeln!(out, "crash: {reason:?} at {pos}").map_err(w)?;
            }
            if let Some(plan) = loaded.reduction_plan() {
                if let Ok(a) = extract_assignment(&plan, &r.trace) {
                    writeln!(out, "assignment: {a}").map_err(w)?;
                }
            }
            if let Some(p) = trace {
                let doc = serde_json::to_string(&TraceDocument::from_result(&r)).map_err(|e| e.to_string())?;
                fs::write(&p, doc).map_err(|e| format!("{}: {e}", p.display()))?;
            }
            Ok(outcome_code(r.outcome))
        }
        Command::SolveMms { formula } => {
            let inst = load_instance(&formula, None)?;
            match oracle_solve(&inst).map_err(|e| e.to_string())? {
                Some(a) => writeln!(out, "satisfiable: {a}").map_err(w)?,
                None => writeln!(out, "unsatisfiable with k = {}", inst.k).map_err(w)?,
            }
            Ok(EXIT_OK)
        }
        Command::Canonical {
            formula,
            assignment,
            k,
            output,
        } => {
            let inst = load_instance(&formula, k)?;
            let a = parse_assignment(&assignment)?;
            let plan = compile(&inst).map_err(|e| e.to_string())?;
            let layout = canonical_layout(&plan, &a).map_err(|e| e.to_string())?;
            let r = simulate(&plan.level, &layout, DEFAULT_STEP_CAP).map_err(|e| e.to_string())?;
            emit(&serialize_level(&LoadedLevel::from_plan(&plan, Some(layout))), output.as_ref(), out)?;
            writeln!(err, "canonical layout: {:?} at step {}", r.outcome, r.trace.last().step).map_err(w)?;
            Ok(outcome_code(r.outcome))
        }
        Command::VerifyGadgets {
            kind,
            mode,
            seed,
            samples,
            bound,
            json,
        } => {
            let kinds = match kind {
                Some(name) => vec![GadgetKind::parse(&name).ok_or_else(|| format!("unknown gadget `{name}`"))?],
                None => GadgetKind::catalog(),
            };
            let mut reports = Vec::new();
            for kind in kinds {
                let cells = stamp(kind).map_err(|e| e.to_string())?.free_cells.len();
                let exhaustive = match mode {
                    ModeArg::Exhaustive => true,
                    ModeArg::Sampled => false,
                    ModeArg::Auto => cells <= bound,
                };
                let m = if exhaustive {
                    VerifyMode::Exhaustive { bound }
                } else {
                    VerifyMode::Sampled { samples, seed }
                };
                let r = verify(kind, m).map_err(|e| format!("{}: {e}", kind.name()))?;
                if !json {
                    writeln!(out, "{}", summary(&r)).map_err(w)?;
                }
                reports.push(r);
            }
            if json {
                let text = serde_json::to_string_pretty(&reports).map_err(|e| e.to_string())?;
                writeln!(out, "{text}").map_err(w)?;
            }
            Ok(if reports.iter().all(VerificationReport::passed) {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Dominating { graph, k } => {
            let g = parse_graph_bytes(&read(&graph)?).map_err(|e| format!("{}: {e}", graph.display()))?;
            let inst = dominating_set_to_mms(&g, k).map_err(|e| e.to_string())?;
            match oracle_solve(&inst).map_err(|e| e.to_string())? {
                Some(a) => {
                    let set: Vec<String> = a.iter().map(|v| v.to_string()).collect();
                    writeln!(out, "yes: {{{}}}", set.join(", ")).map_err(w)?
                }
                None => writeln!(out, "no dominating set of size {k}").map_err(w)?,
            }
            Ok(EXIT_OK)
        }
        Command::Serve { port, static_dir } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(crate::service::serve(port, static_dir)).map_err(|e| e.to_string())?;
            Ok(EXIT_OK)
        }
    }
}

pub fn summary(r: &VerificationReport) -> String {
    let mode = match r.mode {
        VerifyMode::Exhaustive { .. } => "exhaustive".to_string(),
        VerifyMode::Sampled { samples, seed } => format!("sampled {samples} (seed {seed})"),
    };
    let classes: Vec<&str> = r.witnessed.keys().map(String::as_str).collect();
    format!(
        "{:<14} {:<26} layouts {:>8}  adversarial {:>6}  viable {:>7}  violations {}  classes [{}]  {} ms  {}",
        r.kind.name(),
        mode,
        r.layouts_checked,
        r.adversarial_checked,
        r.viable_layouts,
        r.violations,
        classes.join(", "),
        r.elapsed_ms,
        if r.passed() { "PASS" } else { "FAIL" }
    )
}
