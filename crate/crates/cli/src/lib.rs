//! Command-line front end: validate models, run simulations, and derive
//! equations of motion from Lagrangian description files.
//!
//! [`run`] is the whole program; `main` only wires it to the process.
//! Exit codes: 0 success, 1 usage error, 2 parse/load error, 3 runtime error.

use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use hybridlang::lang::{parse_expression, parse_model, Model, StmtKind};
use hybridlang::models::{builtin_source, quad_scenario_source, BUILTIN_MODELS, QUAD_SCENARIO_CLASS};
use hybridlang::sim::{
    eval_constant, simulate, Integrator, LoopResolution, SimConfig, SimError, TraceFormat, Value, DEFAULT_PRECISION,
};
use hybridlang::symcas::{emit_explicit_source, euler_lagrange, is_identifier, parse_lagrangian, SymError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_LOAD: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Environment variable overriding the significant digits of CSV output.
pub const PRECISION_ENV: &str = "HYBRIDLANG_PRECISION";

#[derive(Debug, Parser)]
#[command(name = "hybridlang", version, about = "Hybrid-systems model interpreter and Euler-Lagrange toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a model file, then print a summary.
    Parse { file: PathBuf },
    /// Simulate a model file and write the trace.
    Simulate {
        file: PathBuf,
        /// Class to instantiate as the root object.
        #[arg(long)]
        entry: String,
        /// Constructor arguments, each an expression such as `1.5` or `[0,0,1]`.
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        args: Vec<String>,
        #[command(flatten)]
        run: RunOptions,
    },
    /// Derive equations of motion from a Lagrangian description file.
    Derive {
        file: PathBuf,
        /// Also print explicit model source.
        #[arg(long)]
        emit: bool,
        /// Class name of the emitted source (default: the file stem).
        #[arg(long)]
        entry: Option<String>,
        /// Write to FILE instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in model with a canned configuration.
    Demo {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(BUILTIN_MODELS))]
        name: String,
        #[command(flatten)]
        run: RunOptions,
    },
}

#[derive(Debug, Args)]
struct RunOptions {
    /// Step size in seconds.
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    /// End time in seconds.
    #[arg(long, allow_negative_numbers = true)]
    end: Option<f64>,
    /// Variables to record, comma separated (default: every numeric root variable).
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to FILE instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = IntegratorArg::SemiImplicit)]
    integrator: IntegratorArg,
    #[arg(long, value_enum, default_value_t = LoopsArg::Simultaneous)]
    loops: LoopsArg,
    /// Reserved; simulations are deterministic and use no randomness.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IntegratorArg {
    SemiImplicit,
    Explicit,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LoopsArg {
    Simultaneous,
    SinglePass,
}

/// A failure with its exit code and a one-line message.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Display) -> Self {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }

    fn load(message: impl Display) -> Self {
        Failure { code: EXIT_LOAD, message: message.to_string() }
    }

    fn runtime(message: impl Display) -> Self {
        Failure { code: EXIT_RUNTIME, message: message.to_string() }
    }
}

/// Runs the program on `argv` (including the program name) and returns the
/// process exit code. Results go to `stdout` unless `--out` is given;
/// diagnostics go to `stderr` as a single line.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let text = e.render().to_string();
                    let first = text.lines().next().unwrap_or("invalid arguments");
                    let _ = writeln!(stderr, "{first}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Parse { file } => cmd_parse(&file, stdout),
        Command::Simulate { file, entry, args, run } => cmd_simulate(&file, &entry, &args, &run, stdout),
        Command::Derive { file, emit, entry, out } => cmd_derive(&file, emit, entry.as_deref(), out.as_deref(), stdout),
        Command::Demo { name, run } => cmd_demo(&name, &run, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn read_source(file: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(file).map_err(|e| Failure::load(format!("{}: {e}", file.display())))
}

/// Prefixes a message with the file name, joined as `file:line:col` when the
/// message starts with a position.
fn located(file: &str, has_pos: bool, message: impl Display) -> String {
    if has_pos {
        format!("{file}:{message}")
    } else {
        format!("{file}: {message}")
    }
}

fn load_model(file: &str, source: &str) -> Result<Model, Failure> {
    parse_model(source).map_err(|e| Failure::load(located(file, e.pos().is_some(), &e)))
}

fn sim_failure(file: &str, e: &SimError) -> Failure {
    let message = match e {
        SimError::AtStep { step, source } => format!("{} (step {step})", located(file, source.pos().is_some(), source)),
        other => located(file, other.pos().is_some(), other),
    };
    match e {
        SimError::Config(_) => Failure::usage(message),
        e if e.is_runtime() => Failure::runtime(message),
        _ => Failure::load(message),
    }
}

fn cmd_parse(file: &Path, stdout: &mut dyn Write) -> Result<(), Failure> {
    let name = file.display().to_string();
    let model = load_model(&name, &read_source(file)?)?;
    let classes = model.classes.len();
    let params: usize = model.classes.iter().map(|c| c.params.len()).sum();
    let mut text = format!("{classes} class{}, {params} param{}\n", plural(classes, "es"), plural(params, "s"));
    for class in &model.classes {
        let creates = class.private_inits.iter().filter(|s| matches!(s.kind, StmtKind::Create { .. })).count();
        text.push_str(&format!(
            "  {} ({}): {} private init(s), {} child object(s), {} continuous, {} discrete\n",
            class.name,
            class.params.join(", "),
            class.private_inits.len() - creates,
            creates,
            class.continuous_count(),
            class.discrete_count(),
        ));
    }
    write_out(stdout, None, text.as_bytes())
}

fn plural(n: usize, suffix: &'static str) -> &'static str {
    if n == 1 {
        ""
    } else {
        suffix
    }
}

fn parse_args(args: &[String]) -> Result<Vec<Value>, Failure> {
    args.iter()
        .map(|a| {
            let e = parse_expression(a).map_err(|e| Failure::usage(format!("--args `{a}`: {e}")))?;
            eval_constant(&e).map_err(|e| Failure::usage(format!("--args `{a}`: {e}")))
        })
        .collect()
}

fn precision() -> Result<usize, Failure> {
    match std::env::var(PRECISION_ENV) {
        Err(_) => Ok(DEFAULT_PRECISION),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(p) if (1..=17).contains(&p) => Ok(p),
            _ => Err(Failure::usage(format!("{PRECISION_ENV} must be an integer in 1..=17, got `{v}`"))),
        },
    }
}

fn config(run: &RunOptions, dt: f64, end: f64) -> SimConfig {
    SimConfig {
        dt: run.dt.unwrap_or(dt),
        end_time: run.end.unwrap_or(end),
        recorded: run.vars.clone(),
        integrator: match run.integrator {
            IntegratorArg::SemiImplicit => Integrator::SemiImplicitEuler,
            IntegratorArg::Explicit => Integrator::ExplicitEuler,
        },
        loops: match run.loops {
            LoopsArg::Simultaneous => LoopResolution::Simultaneous,
            LoopsArg::SinglePass => LoopResolution::SinglePass,
        },
    }
}

fn run_and_write(
    file: &str,
    model: &Model,
    entry: &str,
    args: Vec<Value>,
    run: &RunOptions,
    config: SimConfig,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    config.validate().map_err(Failure::usage)?;
    let precision = precision()?;
    let trace = simulate(model, entry, args, &config).map_err(|e| sim_failure(file, &e))?;
    let format = match run.format {
        Format::Csv => TraceFormat::Csv,
        Format::Jsonl => TraceFormat::Jsonl,
    };
    let mut buf = Vec::new();
    trace.write(format, precision, &mut buf).map_err(Failure::runtime)?;
    write_out(stdout, run.out.as_deref(), &buf)
}

fn cmd_simulate(
    file: &Path,
    entry: &str,
    args: &[String],
    run: &RunOptions,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let args = parse_args(args)?;
    let name = file.display().to_string();
    let model = load_model(&name, &read_source(file)?)?;
    let defaults = SimConfig::default();
    run_and_write(&name, &model, entry, args, run, config(run, defaults.dt, defaults.end_time), stdout)
}

fn cmd_demo(name: &str, run: &RunOptions, stdout: &mut dyn Write) -> Result<(), Failure> {
    let (source, entry, args, vars, end): (String, &str, Vec<f64>, &[&str], f64) = match name {
        "pendulum" => {
            (builtin_source(name).map_err(Failure::usage)?.to_string(), "pendulum", vec![1.0], &["theta"], 5.0)
        }
        "double_pendulum" => (
            builtin_source(name).map_err(Failure::usage)?.to_string(),
            "double_pendulum",
            vec![1.0, 1.0, 1.0, 1.0],
            &["t_1", "t_2"],
            5.0,
        ),
        _ => (
            quad_scenario_source([0.0; 4]),
            QUAD_SCENARIO_CLASS,
            vec![],
            &["quad.P", "quad.phi", "quad.theta", "quad.psi"],
            10.0,
        ),
    };
    let model = load_model(name, &source)?;
    let mut config = config(run, 1e-3, end);
    if config.recorded.is_none() {
        config.recorded = Some(vars.iter().map(|v| v.to_string()).collect());
    }
    let args = args.into_iter().map(Value::Real).collect();
    run_and_write(name, &model, entry, args, run, config, stdout)
}

fn sym_failure(file: &str, e: SymError) -> Failure {
    match e {
        SymError::Spec { line: 0, message } => Failure::load(format!("{file}: {message}")),
        SymError::Spec { line, message } => Failure::load(format!("{file}:{line}: {message}")),
        SymError::InvalidSystem(_) | SymError::TooManyCoords(_) | SymError::SingularSymbolicDet => {
            Failure::load(format!("{file}: {e}"))
        }
        other => Failure::runtime(format!("{file}: {other}")),
    }
}

fn cmd_derive(
    file: &Path,
    emit: bool,
    entry: Option<&str>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let name = file.display().to_string();
    let class_name = match entry {
        Some(e) if is_identifier(e) => e.to_string(),
        Some(e) => return Err(Failure::usage(format!("--entry `{e}` is not a valid class name"))),
        None => file.file_stem().and_then(|s| s.to_str()).filter(|s| is_identifier(s)).unwrap_or("derived").to_string(),
    };
    let sys = parse_lagrangian(&read_source(file)?).map_err(|e| sym_failure(&name, e))?;
    let eom = euler_lagrange(&sys).map_err(|e| sym_failure(&name, e))?;

    // The implicit form is printed as comments so that the output as a whole
    // stays valid model source.
    let mut text = String::new();
    text.push_str(&format!("// coordinates: {}\n", eom.coords.join(", ")));
    text.push_str("// residuals (each = 0):\n");
    for (q, r) in eom.coords.iter().zip(&eom.residuals) {
        text.push_str(&format!("//   r[{q}] = {r}\n"));
    }
    text.push_str("// mass matrix:\n");
    for (i, row) in eom.mass.iter().enumerate() {
        for (j, m) in row.iter().enumerate() {
            text.push_str(&format!("//   M[{}][{}] = {m}\n", i + 1, j + 1));
        }
    }
    if emit {
        let source = emit_explicit_source(&sys, &class_name).map_err(|e| sym_failure(&name, e))?;
        text.push_str(&source);
    }
    write_out(stdout, out, text.as_bytes())
}

fn write_out(stdout: &mut dyn Write, out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let result = match out {
        None => stdout.write_all(bytes).and_then(|_| stdout.flush()),
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            w.write_all(bytes)?;
            w.flush()
        }),
    };
    result.map_err(|e: io::Error| match out {
        Some(path) => Failure::runtime(format!("{}: {e}", path.display())),
        None => Failure::runtime(format!("writing output: {e}")),
    })
}
