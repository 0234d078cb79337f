//! Command-line front end. Every command writes CSV or JSON to `--output`
//! or stdout; output order is fixed, so thread count never shows in the bytes.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::correspondence::{correspondence_report, critical_match, DEFAULT_J_LIST};
use crate::error::Error;
use crate::models::{ClassicalModel, ModelId, ModelSpec};
use crate::phase::{bifurcation_scan_grid, find_fixed_points, portrait, DEFAULT_GRID};
use crate::spectra::{sweep, uniform_grid, DEFAULT_WINDOW};
use crate::su2::Spin;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "CWQPT_THREADS";

/// `start:stop:step`, inclusive of `stop` within half a step, or one value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        uniform_grid(self.start, self.stop, self.step)
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| -> Result<f64, String> {
            let v: f64 = t.trim().parse().map_err(|_| format!("`{t}` is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{t}` is not finite"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        let r = match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Range { start: v, stop: v, step: 1.0 }
            }
            [a, b, c] => Range { start: num(a)?, stop: num(b)?, step: num(c)? },
            _ => return Err(format!("`{s}` is neither a value nor start:stop:step")),
        };
        if r.step <= 0.0 {
            return Err(format!("step must be positive in `{s}`"));
        }
        if r.start > r.stop {
            return Err(format!("start exceeds stop in `{s}`"));
        }
        Ok(r)
    }
}

/// Comma-separated spins, e.g. `25,50,100`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinList(pub Vec<Spin>);

impl FromStr for SpinList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| t.parse::<Spin>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()
            .map(SpinList)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "cwqpt", version, about = "Quantum phase transitions in Curie-Weiss models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct QuantumArgs {
    /// lipkin, pairing, jc-rwa, jc-crw, bilayer or heisenberg.
    #[arg(long)]
    pub model: ModelId,
    /// Spin, e.g. `100` or `3/2`.
    #[arg(long, default_value = "100")]
    pub j: Spin,
    /// Coupling value or `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub g: Range,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues over a coupling range.
    Spectrum(QuantumArgs),
    /// Ground-state order parameter, gap and degeneracy over a coupling range.
    Expectation(QuantumArgs),
    /// Classical phase-space analysis.
    #[command(subcommand)]
    Classical(ClassicalCommand),
    /// Quantum-classical correspondence report (JSON).
    Correspond(CorrespondArgs),
}

#[derive(Debug, Subcommand)]
pub enum ClassicalCommand {
    /// Fixed points with their stability class.
    FixedPoints {
        #[arg(long)]
        model: ModelId,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Range,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Level-set polylines of the classical energy.
    Portrait {
        #[arg(long)]
        model: ModelId,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Comma-separated energies; automatic levels when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        energies: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fixed-point census over a λ range with refined critical values (JSON).
    Scan {
        #[arg(long)]
        model: ModelId,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Range,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["g", "critical"])))]
pub struct CorrespondArgs {
    #[arg(long)]
    pub model: ModelId,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// Comma-separated ascending spins.
    #[arg(long)]
    pub j: Option<SpinList>,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Pair the quantum critical coupling with the classical bifurcation.
    #[arg(long)]
    pub critical: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidSpin(_) | Error::InvalidInput(_) | Error::SpinTooLarge { .. } => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Magnitudes below this are solver noise and print as zero.
const NOISE_FLOOR: f64 = 1e-12;

/// Rounds to nine significant digits; noise and negative zero become zero.
fn round_sig(x: f64) -> f64 {
    if !x.is_finite() {
        x
    } else if x.abs() < NOISE_FLOOR {
        0.0
    } else {
        format!("{x:.8e}").parse::<f64>().map_or(x, |r| r + 0.0)
    }
}

/// Plain decimal with at most nine significant digits.
pub fn fmt_num(x: f64) -> String {
    round_sig(x).to_string()
}

/// Rounds every float as in the CSV output.
fn round_floats(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = serde_json::Number::from_f64(round_sig(n.as_f64().unwrap_or(f64::NAN))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let fail = |e: serde_json::Error| Failure { code: EXIT_NUMERICAL, message: e.to_string() };
    let mut tree = serde_json::to_value(value).map_err(fail)?;
    round_floats(&mut tree);
    let mut s = serde_json::to_string_pretty(&tree).map_err(fail)?;
    s.push('\n');
    Ok(s)
}

fn only_json(out: &OutputArgs, what: &str) -> Result<(), Failure> {
    match out.format {
        Some(Format::Csv) => Err(Failure::usage(format!("{what} is only available as JSON"))),
        _ => Ok(()),
    }
}

fn emit(out: &OutputArgs, body: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error, target: &str| Failure {
        code: EXIT_IO,
        message: format!("cannot write {target}: {e}"),
    };
    match &out.output {
        Some(path) => std::fs::write(path, body).map_err(|e| io(e, &path.display().to_string())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| io(e, "stdout"))
        }
    }
}

#[derive(Serialize)]
struct SpectrumRecord<'a> {
    g: f64,
    eigenvalues: &'a [f64],
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    model: ModelId,
    j: Spin,
    spectra: Vec<SpectrumRecord<'a>>,
}

#[derive(Serialize)]
struct ExpectationRow {
    g: f64,
    value: f64,
    gap: f64,
    degenerate: bool,
}

#[derive(Serialize)]
struct ExpectationJson {
    model: ModelId,
    j: Spin,
    observable: String,
    rows: Vec<ExpectationRow>,
}

fn cmd_quantum(args: &QuantumArgs, expectation: bool) -> Result<String, Failure> {
    let spec = ModelSpec::new(args.model, args.j)?;
    let result = sweep(&spec, &args.g.values())?;
    let format = args.out.format.unwrap_or(Format::Csv);
    let (model, j) = (spec.id, spec.spin);
    if !expectation {
        return match format {
            Format::Json => json(&SpectrumJson {
                model,
                j,
                spectra: result
                    .points
                    .iter()
                    .map(|p| SpectrumRecord { g: p.g, eigenvalues: &p.eigenvalues })
                    .collect(),
            }),
            Format::Csv => {
                let mut s = String::from("model,j,g,index,energy\n");
                for p in &result.points {
                    for (k, e) in p.eigenvalues.iter().enumerate() {
                        let _ = writeln!(s, "{model},{j},{},{k},{}", fmt_num(p.g), fmt_num(*e));
                    }
                }
                Ok(s)
            }
        };
    }
    let observable = spec.observable.to_string();
    match format {
        Format::Json => json(&ExpectationJson {
            model,
            j,
            observable,
            rows: result
                .points
                .iter()
                .map(|p| ExpectationRow {
                    g: p.g,
                    value: p.ground.value,
                    gap: p.ground.gap,
                    degenerate: p.ground.degenerate,
                })
                .collect(),
        }),
        Format::Csv => {
            let mut s = String::from("model,j,g,observable,value,gap,degenerate\n");
            for p in &result.points {
                let _ = writeln!(
                    s,
                    "{model},{j},{},{observable},{},{},{}",
                    fmt_num(p.g),
                    fmt_num(p.ground.value),
                    fmt_num(p.ground.gap),
                    p.ground.degenerate
                );
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct FixedPointRow {
    lambda: f64,
    #[serde(flatten)]
    point: crate::phase::FixedPoint,
}

fn cmd_classical(cmd: &ClassicalCommand) -> Result<(String, &OutputArgs), Failure> {
    match cmd {
        ClassicalCommand::FixedPoints { model, lambda, out } => {
            let m = ClassicalModel::new(*model);
            let mut rows = Vec::new();
            for l in lambda.values() {
                for point in find_fixed_points(&m, l)? {
                    rows.push(FixedPointRow { lambda: l, point });
                }
            }
            let body = match out.format.unwrap_or(Format::Csv) {
                Format::Json => json(&rows)?,
                Format::Csv => {
                    let mut s = String::from("model,lambda,p,q,energy,kind,on_boundary\n");
                    for r in &rows {
                        let _ = writeln!(
                            s,
                            "{model},{},{},{},{},{},{}",
                            fmt_num(r.lambda),
                            fmt_num(r.point.p),
                            fmt_num(r.point.q),
                            fmt_num(r.point.energy),
                            r.point.kind.as_str(),
                            r.point.on_boundary
                        );
                    }
                    s
                }
            };
            Ok((body, out))
        }
        ClassicalCommand::Portrait { model, lambda, grid, energies, out } => {
            let m = ClassicalModel::new(*model);
            let p = portrait(&m, *lambda, *grid, energies.as_deref())?;
            let body = match out.format.unwrap_or(Format::Csv) {
                Format::Json => json(&p)?,
                Format::Csv => {
                    let mut s = String::from("model,lambda,orbit_id,energy,seq,p,q\n");
                    for (id, line) in p.orbits.iter().enumerate() {
                        for (seq, x) in line.points.iter().enumerate() {
                            let _ = writeln!(
                                s,
                                "{model},{},{id},{},{seq},{},{}",
                                fmt_num(*lambda),
                                fmt_num(line.energy),
                                fmt_num(x[0]),
                                fmt_num(x[1])
                            );
                        }
                    }
                    s
                }
            };
            Ok((body, out))
        }
        ClassicalCommand::Scan { model, lambda, out } => {
            only_json(out, "scan")?;
            let grid = lambda.values();
            if grid.len() < 11 {
                return Err(Failure::usage("scan needs at least 10 λ steps"));
            }
            let report = bifurcation_scan_grid(&ClassicalModel::new(*model), &grid)?;
            Ok((json(&report)?, out))
        }
    }
}

/// Writes the report; a critical match whose quantum detector did not
/// converge then fails with the numerical exit code.
fn cmd_correspond(args: &CorrespondArgs) -> Result<(), Failure> {
    only_json(&args.out, "correspond")?;
    if args.critical {
        if args.j.is_some() {
            return Err(Failure::usage("--critical runs at j = 100; drop --j"));
        }
        let m = critical_match(args.model)?;
        emit(&args.out, &json(&m)?)?;
        return match &m.quantum_note {
            Some(note) => Err(Failure { code: EXIT_NUMERICAL, message: note.clone() }),
            None => Ok(()),
        };
    }
    let g = args.g.expect("clap group requires --g or --critical");
    let j_list = args.j.as_ref().map_or(DEFAULT_J_LIST.to_vec(), |l| l.0.clone());
    emit(&args.out, &json(&correspondence_report(args.model, g, &j_list, args.window)?)?)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // A pool built earlier in the same process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Spectrum(a) => emit(&a.out, &cmd_quantum(a, false)?),
        Command::Expectation(a) => emit(&a.out, &cmd_quantum(a, true)?),
        Command::Classical(c) => {
            let (body, out) = cmd_classical(c)?;
            emit(out, &body)
        }
        Command::Correspond(a) => cmd_correspond(a),
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
