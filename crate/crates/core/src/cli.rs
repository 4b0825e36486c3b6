//! Command-line front end.
//!
//! Exit codes: 0 = no violation found (or feasible / PASS), 1 = infeasible
//! with a witness (or FAIL), 2 = invalid input.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::criteria::{
    nc_caratheodory_check, nc_cf_check, schur_norm, toeplitz_min_eigenvalue, Budget, CFInstance, CaratheodoryInstance,
    CheckOptions, FeasibilityReport, Problem, DEFAULT_OPT_ITERS, DEFAULT_SAMPLES, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::instance::{instance_to_string, parse_lambda, read_instance, Instance, InstanceFile};
use crate::json;
use crate::linalg::CMat;
use crate::realization::{gen_feasible_instance, Certificate};
use crate::repro;
use crate::tuples::MatrixTuple;
use crate::words::AdmissibleSet;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ncinterp", version, about = "Non-commutative Carathéodory and Carathéodory–Fejér interpolation checks")]
pub struct Cli {
    /// Print progress details to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search for a contractive Λ-jointly nilpotent tuple violating the criterion.
    Check(CheckArgs),
    /// Generate a feasible Carathéodory instance from a random realization.
    Gen(GenArgs),
    /// One-variable Toeplitz / Schur criterion.
    Classical(ClassicalArgs),
    /// Run a scripted scenario and print PASS/FAIL.
    Repro(ReproArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Caratheodory,
    Cf,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Problem {
        match p {
            ProblemArg::Caratheodory => Problem::Caratheodory,
            ProblemArg::Cf => Problem::Cf,
        }
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Expected problem kind; must match the instance file.
    #[arg(long, value_enum)]
    pub problem: Option<ProblemArg>,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SAMPLES, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    pub samples: usize,
    /// Largest sampled dimension [default: #Λ].
    #[arg(long, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    pub max_dim: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_OPT_ITERS)]
    pub opt_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Index set to test against instead of the instance's own (must contain it).
    #[arg(long)]
    pub test_lambda: Option<PathBuf>,
    /// JSON list of tuples to evaluate before the random samples.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    /// Report file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub n_vars: usize,
    /// Index set file: `{"n_vars", "words"}` or a list of word keys.
    #[arg(long, conflicts_with = "order", required_unless_present = "order")]
    pub lambda: Option<PathBuf>,
    /// Use every word of length at most this.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub dim_h: usize,
    #[arg(long, default_value_t = 1)]
    pub dim_y: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Certificate file [default: <out stem>.cert.json].
    #[arg(long)]
    pub cert: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClassicalArgs {
    /// `{"problem": "caratheodory"|"cf", "coeffs": [c_0, …, c_m]}`
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReproArgs {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(repro::SCENARIOS))]
    pub name: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub report: FeasibilityReport,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalData {
    problem: Problem,
    #[serde(with = "json::matrix_list")]
    coeffs: Vec<CMat>,
}

#[derive(Serialize)]
struct ClassicalReport {
    schema_version: u32,
    problem: Problem,
    feasible: bool,
    /// `λ_min(T_c)` or `‖T_s‖`.
    value: f64,
    tol: f64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let verbose = cli.verbose;
    let result = match cli.command {
        Command::Check(a) => cmd_check(&a, verbose),
        Command::Gen(a) => cmd_gen(&a, verbose),
        Command::Classical(a) => cmd_classical(&a),
        Command::Repro(a) => cmd_repro(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn cmd_check(a: &CheckArgs, verbose: bool) -> Result<i32> {
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(Error::InvalidData(format!("tol must be positive, got {}", a.tol)));
    }
    let mut inst = read_instance(&a.instance)?;
    if let Some(p) = a.problem {
        if Problem::from(p) != inst.problem() {
            return Err(Error::InvalidData(format!(
                "--problem {:?} does not match the instance file ({:?})",
                Problem::from(p),
                inst.problem()
            )));
        }
    }
    if let Some(path) = &a.test_lambda {
        let wider = parse_lambda(&read_text(path)?, Some(inst.lambda().n_vars()))?;
        inst = inst.with_lambda(wider)?;
    }
    let candidates = match &a.candidates {
        Some(path) => serde_json::from_str::<Vec<MatrixTuple>>(&read_text(path)?)?,
        None => Vec::new(),
    };
    let opts = CheckOptions {
        budget: Budget { samples: a.samples, max_dim: a.max_dim, opt_iters: a.opt_iters },
        seed: a.seed,
        tol: a.tol,
        candidates,
    };
    let report = match &inst {
        Instance::Caratheodory(i) => nc_caratheodory_check(i, &opts)?,
        Instance::Cf(i) => nc_cf_check(i, &opts)?,
    };
    if verbose {
        eprintln!(
            "{:?}: violation {:.3e} after {} trials in {:.2?}",
            report.verdict, report.violation, report.trials, report.elapsed
        );
    }
    let code = if report.is_infeasible() { EXIT_INFEASIBLE } else { EXIT_OK };
    emit(&to_json(&ReportFile { schema_version: SCHEMA_VERSION, report }), a.out.as_deref())?;
    Ok(code)
}

fn cert_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into());
    out.with_file_name(format!("{stem}.cert.json"))
}

pub fn cmd_gen(a: &GenArgs, verbose: bool) -> Result<i32> {
    let lambda = match (&a.lambda, a.order) {
        (Some(path), _) => parse_lambda(&read_text(path)?, Some(a.n_vars))?,
        (None, Some(m)) => AdmissibleSet::lambda_m(a.n_vars, m)?,
        (None, None) => return Err(Error::InvalidData("one of --lambda or --order is required".into())),
    };
    let (inst, realization) = gen_feasible_instance(a.n_vars, &lambda, a.dim_h, a.dim_y, a.seed)?;
    let inst = Instance::Caratheodory(inst);
    let cert = Certificate {
        g: realization.g().clone(),
        v: realization.v().clone(),
        lambda: lambda.clone(),
        instance: InstanceFile::from_instance(&inst),
    };
    let cert_out = a.cert.clone().unwrap_or_else(|| cert_path(&a.out));
    fs::write(&a.out, instance_to_string(&inst))?;
    fs::write(&cert_out, to_json(&cert))?;
    if verbose {
        eprintln!("wrote {} and {}", a.out.display(), cert_out.display());
    }
    Ok(EXIT_OK)
}

pub fn cmd_classical(a: &ClassicalArgs) -> Result<i32> {
    let data: ClassicalData = serde_json::from_str(&read_text(&a.data)?)?;
    let (feasible, value) = match data.problem {
        Problem::Caratheodory => {
            // validates shapes and c_0 = c_0*
            CaratheodoryInstance::one_variable(&data.coeffs)?;
            let v = toeplitz_min_eigenvalue(&data.coeffs)?;
            (v >= -a.tol, v)
        }
        Problem::Cf => {
            CFInstance::one_variable(&data.coeffs)?;
            let v = schur_norm(&data.coeffs)?;
            (v <= 1.0 + a.tol, v)
        }
    };
    let report = ClassicalReport { schema_version: SCHEMA_VERSION, problem: data.problem, feasible, value, tol: a.tol };
    emit(&to_json(&report), a.out.as_deref())?;
    Ok(if feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

pub fn cmd_repro(a: &ReproArgs) -> Result<i32> {
    let outcome = repro::run(&a.name, a.seed)?;
    for line in &outcome.lines {
        println!("  {line}");
    }
    println!("{} {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.name);
    Ok(if outcome.passed { EXIT_OK } else { EXIT_INFEASIBLE })
}
