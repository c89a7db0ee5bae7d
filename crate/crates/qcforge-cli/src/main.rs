//! Command line front end. Four subcommands:
//!
//! * `analyze FILE` prints the standard metrics line (optionally the
//!   per-moment T distribution).
//! * `pipeline [--input FILE] [--output FILE] STEPS...` chains synthesis,
//!   transpilation, optimizer passes, verification, and analysis over one
//!   working circuit.
//! * `bench SCENARIO RANGE CSV` times synthesis scenarios over a range of
//!   address sizes and writes a CSV.
//! * `strategies` lists the registered Toffoli decompositions.
//!
//! Exit codes: 0 success, 2 circuit file parse error, 3 invariant
//! violation during optimization, 4 benchmark resource guard, 1 anything
//! else (bad usage, verification mismatch, I/O).

use std::fmt::Write as _;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::exit;

use clap::{Parser, Subcommand};

use qcforge::format;
use qcforge::ir::Circuit;
use qcforge::optimize::{
    with_invariants, CancelPass, CommutePass, DropTPass, InvariantSpec, OptimizeError,
    OptimizerPass, RecomposePass, RewriteReport,
};
use qcforge::transpile::{decompose_mpmct, decompose_toffoli, list_strategies, ControlOrder};
use qcforge::verify::{self, DEFAULT_SIM_LIMIT, DEFAULT_TOL};
use qcforge::{
    analysis, run_bench, synth_bucket_brigade, write_csv, BenchError, FormatError, GuardConfig,
    QramSpec, Scenario, TranspileError, VerifyError,
};

#[derive(Parser)]
#[command(
    name = "qcforge",
    version,
    about = "Synthesize, transpile, optimize, and verify Clifford+T circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the metrics line for a circuit file.
    Analyze {
        input: PathBuf,
        /// Also print the per-moment T gate distribution.
        #[arg(long)]
        t_dist: bool,
    },
    /// Run a chain of steps over one working circuit.
    ///
    /// Steps are given as trailing words, each opened by one of `synth`,
    /// `transpile`, `opt`, `verify`, `analyze`:
    ///
    ///   synth bb --n N [--memory BITS]
    ///   transpile --strategy NAME [--order a0,a1|a1,a0]
    ///   opt PASS [--flagged F] [--invariant t-count,qubit-count]
    ///   verify (--against FILE | --truth-table)
    ///   analyze
    Pipeline {
        /// Circuit file loaded as the initial working circuit.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Write the final working circuit here.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Simulator qubit cap for verify steps (overrides QCFORGE_SIM_LIMIT).
        #[arg(long)]
        sim_limit: Option<usize>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, required = true)]
        steps: Vec<String>,
    },
    /// Time a synthesis scenario over a range of address sizes.
    Bench {
        /// One of: synth, synth-transpile, synth-opt.
        scenario: String,
        /// Address sizes, inclusive: `2..5` or a single `4`.
        range: String,
        /// Output CSV path.
        csv: PathBuf,
        /// Run past the scenario's default size guard.
        #[arg(long)]
        force: bool,
    },
    /// List registered Toffoli decomposition strategies.
    Strategies,
}

/// Terminal error: message for stderr plus the process exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(1, message)
    }
}

impl From<FormatError> for Failure {
    fn from(err: FormatError) -> Self {
        Failure::new(2, err.to_string())
    }
}

impl From<OptimizeError> for Failure {
    fn from(err: OptimizeError) -> Self {
        let code = match err {
            OptimizeError::InvariantViolated { .. } => 3,
            _ => 1,
        };
        Failure::new(code, err.to_string())
    }
}

impl From<BenchError> for Failure {
    fn from(err: BenchError) -> Self {
        let code = match err {
            BenchError::ResourceGuardExceeded { .. } => 4,
            _ => 1,
        };
        Failure::new(code, err.to_string())
    }
}

impl From<TranspileError> for Failure {
    fn from(err: TranspileError) -> Self {
        Failure::new(1, err.to_string())
    }
}

impl From<VerifyError> for Failure {
    fn from(err: VerifyError) -> Self {
        Failure::new(1, err.to_string())
    }
}

impl From<qcforge::IrError> for Failure {
    fn from(err: qcforge::IrError) -> Self {
        Failure::new(1, err.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::new(1, err.to_string())
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap uses stdout for --help/--version, stderr for misuse.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            exit(code);
        }
    };
    if let Err(failure) = run(cli) {
        eprintln!("error: {}", failure.message);
        exit(failure.code);
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { input, t_dist } => cmd_analyze(&input, t_dist),
        Command::Pipeline {
            input,
            output,
            sim_limit,
            steps,
        } => cmd_pipeline(input, output, sim_limit, &steps),
        Command::Bench {
            scenario,
            range,
            csv,
            force,
        } => cmd_bench(&scenario, &range, &csv, force),
        Command::Strategies => {
            cmd_strategies();
            Ok(())
        }
    }
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|err| Failure::new(1, format!("cannot read {}: {err}", path.display())))?;
    Ok(format::parse(&text)?)
}

fn cmd_analyze(input: &Path, t_dist: bool) -> Result<(), Failure> {
    let circuit = load_circuit(input)?;
    println!("{}", analysis::metrics(&circuit));
    if t_dist {
        let dist = analysis::t_distribution(&circuit);
        let mut line = String::from("t_dist=");
        for (i, count) in dist.per_moment.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "{count}");
        }
        println!("{line}");
    }
    Ok(())
}

fn cmd_strategies() {
    for info in list_strategies() {
        println!(
            "{} ancillae={} t={} t_depth={}",
            info.name, info.ancilla_count, info.t_count, info.t_depth
        );
    }
}

fn cmd_bench(scenario: &str, range: &str, csv: &Path, force: bool) -> Result<(), Failure> {
    let scenario = Scenario::from_token(scenario).ok_or_else(|| {
        Failure::usage(format!(
            "unknown scenario {scenario:?}; known: synth, synth-transpile, synth-opt"
        ))
    })?;
    let range = parse_range(range)?;
    let records = run_bench(scenario, range, GuardConfig { force })?;
    let mut sink = Vec::new();
    write_csv(&records, &mut sink)?;
    fs::write(csv, &sink)
        .map_err(|err| Failure::new(1, format!("cannot write {}: {err}", csv.display())))?;
    for record in &records {
        println!("{}", record.csv_row());
    }
    Ok(())
}

fn parse_range(text: &str) -> Result<RangeInclusive<u32>, Failure> {
    let bad = || Failure::usage(format!("bad range {text:?}; use N or A..B (inclusive)"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        Ok(lo..=hi)
    } else {
        let n = text.trim().parse().map_err(|_| bad())?;
        Ok(n..=n)
    }
}

/// One parsed pipeline step.
enum Step {
    Synth {
        n: u32,
        memory: Option<Vec<bool>>,
    },
    Transpile {
        strategy: String,
        order: Option<ControlOrder>,
    },
    Opt {
        pass: String,
        flagged: Option<u32>,
        invariants: Vec<String>,
    },
    Verify {
        against: Option<PathBuf>,
        truth_table: bool,
    },
    Analyze,
}

impl Step {
    fn head(&self) -> &'static str {
        match self {
            Step::Synth { .. } => "synth",
            Step::Transpile { .. } => "transpile",
            Step::Opt { .. } => "opt",
            Step::Verify { .. } => "verify",
            Step::Analyze => "analyze",
        }
    }
}

const STEP_HEADS: [&str; 5] = ["synth", "transpile", "opt", "verify", "analyze"];

/// Split the trailing words into steps at each head keyword.
fn parse_steps(tokens: &[String]) -> Result<Vec<Step>, Failure> {
    if !STEP_HEADS.contains(&tokens[0].as_str()) {
        return Err(Failure::usage(format!(
            "pipeline must start with a step keyword ({}), got {:?}",
            STEP_HEADS.join("|"),
            tokens[0]
        )));
    }
    let mut steps = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut j = i + 1;
        while j < tokens.len() && !STEP_HEADS.contains(&tokens[j].as_str()) {
            j += 1;
        }
        steps.push(parse_step(&tokens[i], &tokens[i + 1..j])?);
        i = j;
    }
    Ok(steps)
}

fn parse_step(head: &str, args: &[String]) -> Result<Step, Failure> {
    let mut it = args.iter();
    match head {
        "synth" => {
            match it.next().map(String::as_str) {
                Some("bb") => {}
                other => {
                    return Err(Failure::usage(format!(
                        "synth supports only the bb target, got {other:?}"
                    )))
                }
            }
            let mut n = None;
            let mut memory = None;
            while let Some(key) = it.next() {
                match key.as_str() {
                    "--n" => n = Some(parse_num(option_value(&mut it, key)?, key)?),
                    "--memory" => memory = Some(parse_memory(option_value(&mut it, key)?)?),
                    other => return Err(unknown_option("synth bb", other)),
                }
            }
            let n = n.ok_or_else(|| Failure::usage("synth bb requires --n"))?;
            Ok(Step::Synth { n, memory })
        }
        "transpile" => {
            let mut strategy = None;
            let mut order = None;
            while let Some(key) = it.next() {
                match key.as_str() {
                    "--strategy" => strategy = Some(option_value(&mut it, key)?.clone()),
                    "--order" => order = Some(parse_order(option_value(&mut it, key)?)?),
                    other => return Err(unknown_option("transpile", other)),
                }
            }
            let strategy =
                strategy.ok_or_else(|| Failure::usage("transpile requires --strategy"))?;
            Ok(Step::Transpile { strategy, order })
        }
        "opt" => {
            let pass = it
                .next()
                .ok_or_else(|| Failure::usage("opt requires a pass name"))?
                .clone();
            let mut flagged = None;
            let mut invariants = Vec::new();
            while let Some(key) = it.next() {
                match key.as_str() {
                    "--flagged" => flagged = Some(parse_num(option_value(&mut it, key)?, key)?),
                    "--invariant" => invariants.extend(
                        option_value(&mut it, key)?
                            .split(',')
                            .map(|s| s.trim().to_string()),
                    ),
                    other => return Err(unknown_option("opt", other)),
                }
            }
            Ok(Step::Opt {
                pass,
                flagged,
                invariants,
            })
        }
        "verify" => {
            let mut against = None;
            let mut truth_table = false;
            while let Some(key) = it.next() {
                match key.as_str() {
                    "--against" => against = Some(PathBuf::from(option_value(&mut it, key)?)),
                    "--truth-table" => truth_table = true,
                    other => return Err(unknown_option("verify", other)),
                }
            }
            if against.is_some() == truth_table {
                return Err(Failure::usage(
                    "verify takes exactly one of --against FILE or --truth-table",
                ));
            }
            Ok(Step::Verify {
                against,
                truth_table,
            })
        }
        "analyze" => {
            if let Some(extra) = it.next() {
                return Err(unknown_option("analyze", extra));
            }
            Ok(Step::Analyze)
        }
        _ => unreachable!("parse_steps only splits at known heads"),
    }
}

fn option_value<'a>(
    it: &mut std::slice::Iter<'a, String>,
    key: &str,
) -> Result<&'a String, Failure> {
    it.next()
        .ok_or_else(|| Failure::usage(format!("{key} needs a value")))
}

fn unknown_option(step: &str, token: &str) -> Failure {
    Failure::usage(format!("unknown {step} option {token:?}"))
}

fn parse_num<T: std::str::FromStr>(text: &str, key: &str) -> Result<T, Failure> {
    text.parse()
        .map_err(|_| Failure::usage(format!("{key} expects a number, got {text:?}")))
}

fn parse_memory(text: &str) -> Result<Vec<bool>, Failure> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Failure::usage(format!(
                "--memory expects a string of 0s and 1s, got {text:?}"
            ))),
        })
        .collect()
}

fn parse_order(text: &str) -> Result<ControlOrder, Failure> {
    match text {
        "a0,a1" => Ok(ControlOrder::default()),
        "a1,a0" => Ok(ControlOrder::swapped()),
        _ => Err(Failure::usage(format!(
            "unknown control order {text:?}; use a0,a1 or a1,a0"
        ))),
    }
}

fn cmd_pipeline(
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    sim_limit: Option<usize>,
    tokens: &[String],
) -> Result<(), Failure> {
    let steps = parse_steps(tokens)?;
    let sim_limit = resolve_sim_limit(sim_limit)?;
    let mut current: Option<Circuit> = match &input {
        Some(path) => Some(load_circuit(path)?),
        None => None,
    };
    for (idx, step) in steps.iter().enumerate() {
        let label = idx + 1;
        run_step(step, label, sim_limit, &mut current).map_err(|err| {
            Failure::new(
                err.code,
                format!("step {label} ({}): {}", step.head(), err.message),
            )
        })?;
    }
    if let Some(path) = &output {
        let circuit = current
            .as_ref()
            .ok_or_else(|| Failure::usage("no working circuit to write to --output"))?;
        circuit.validate()?;
        fs::write(path, format::serialize(circuit))
            .map_err(|err| Failure::new(1, format!("cannot write {}: {err}", path.display())))?;
    }
    Ok(())
}

fn run_step(
    step: &Step,
    label: usize,
    sim_limit: usize,
    current: &mut Option<Circuit>,
) -> Result<(), Failure> {
    match step {
        Step::Synth { n, memory } => {
            let cells = 1usize
                .checked_shl(*n)
                .ok_or_else(|| Failure::usage(format!("--n {n} is out of range")))?;
            let memory = match memory {
                Some(bits) => bits.clone(),
                // Alternating load pattern, same as the benchmarks.
                None => (0..cells).map(|j| j % 2 == 0).collect(),
            };
            let circuit = synth_bucket_brigade(&QramSpec::new(*n, memory))?;
            println!("step {label}: synth bb n={n} {}", analysis::metrics(&circuit));
            *current = Some(circuit);
        }
        Step::Transpile { strategy, order } => {
            let circuit = require_circuit(current)?;
            let before = analysis::metrics(circuit);
            // --order applies to direct Toffoli lowering; without it, MPMCT
            // gates of any width are accepted and reduced first.
            let lowered = match order {
                Some(order) => decompose_toffoli(circuit, strategy, *order)?,
                None => decompose_mpmct(circuit, strategy)?,
            };
            let after = analysis::metrics(&lowered);
            println!(
                "step {label}: transpile {strategy} {}",
                analysis::diff_metrics(&before, &after)
            );
            *current = Some(lowered);
        }
        Step::Opt {
            pass,
            flagged,
            invariants,
        } => {
            let circuit = require_circuit(current)?;
            let before = analysis::metrics(circuit);
            let (optimized, report) = run_opt(pass, *flagged, invariants, circuit)?;
            let after = analysis::metrics(&optimized);
            println!("step {label}: {report}");
            println!(
                "step {label}: {}",
                analysis::diff_metrics(&before, &after)
            );
            *current = Some(optimized);
        }
        Step::Verify {
            against,
            truth_table,
        } => {
            let circuit = require_circuit(current)?;
            if let Some(path) = against {
                let other = load_circuit(path)?;
                let eq = verify::equivalent(circuit, &other, DEFAULT_TOL, sim_limit)?;
                println!(
                    "step {label}: verify against {} equivalent={} max_deviation={:.3e}",
                    path.display(),
                    eq.equivalent,
                    eq.max_deviation
                );
                if !eq.equivalent {
                    return Err(Failure::new(
                        1,
                        format!(
                            "circuit differs from {} (max deviation {:.3e})",
                            path.display(),
                            eq.max_deviation
                        ),
                    ));
                }
            } else {
                debug_assert!(*truth_table);
                let table = verify::truth_table(circuit)?;
                println!(
                    "step {label}: truth table over {} qubits",
                    table.qubit_count()
                );
                for (input, output) in table.as_slice().iter().enumerate() {
                    println!("{input} -> {output}");
                }
            }
        }
        Step::Analyze => {
            let circuit = require_circuit(current)?;
            println!("step {label}: {}", analysis::metrics(circuit));
        }
    }
    Ok(())
}

fn require_circuit(current: &Option<Circuit>) -> Result<&Circuit, Failure> {
    current
        .as_ref()
        .ok_or_else(|| Failure::usage("no working circuit; load one with --input or synth first"))
}

fn run_opt(
    pass: &str,
    flagged: Option<u32>,
    invariants: &[String],
    circuit: &Circuit,
) -> Result<(Circuit, RewriteReport), Failure> {
    let flagged_only = flagged.is_some();
    let boxed: Box<dyn OptimizerPass> = match pass {
        "cancel-cnot" => Box::new(CancelPass::cnot(flagged_only, flagged)?),
        "cancel-h" => Box::new(CancelPass::hadamard(flagged_only, flagged)?),
        "recompose-s" => Box::new(RecomposePass::new(flagged_only, flagged)?),
        "commute-t-start" | "drop-t" => {
            if flagged_only {
                return Err(Failure::usage(format!("pass {pass} does not take --flagged")));
            }
            if pass == "commute-t-start" {
                Box::new(CommutePass)
            } else {
                Box::new(DropTPass)
            }
        }
        other => {
            return Err(Failure::usage(format!(
                "unknown pass {other:?}; known: cancel-cnot, cancel-h, recompose-s, \
                 commute-t-start, drop-t"
            )))
        }
    };
    if invariants.is_empty() {
        return Ok(boxed.run(circuit)?);
    }
    let mut specs = Vec::with_capacity(invariants.len());
    for token in invariants {
        specs.push(InvariantSpec::from_name(token).ok_or_else(|| {
            Failure::usage(format!(
                "unknown invariant {token:?}; known: t-count, qubit-count"
            ))
        })?);
    }
    Ok(with_invariants(boxed, specs).run(circuit)?)
}

/// Flag beats the QCFORGE_SIM_LIMIT variable, which beats the default.
fn resolve_sim_limit(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(limit) = flag {
        return Ok(limit);
    }
    match std::env::var("QCFORGE_SIM_LIMIT") {
        Ok(text) => text.trim().parse().map_err(|_| {
            Failure::usage(format!(
                "QCFORGE_SIM_LIMIT must be a qubit count, got {text:?}"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SIM_LIMIT),
        Err(err) => Err(Failure::usage(err.to_string())),
    }
}
