//! The `eracah` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | `verify` found a failing identity, or `limit` found a non-decaying deviation |
//! | 2 | invalid input: bad flags or config file, parameters outside the domain |
//! | 3 | numerical failure inside the pipeline, or the output could not be written |
//!
//! Errors are reported on stderr as a single JSON object.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::matrix::HeunMatrix;
use crate::params::{CouplingParams, RawParams};
use crate::qracah::{lame_matrix, trig_limit_convergence, trig_tables, ConvergenceReport, DEFAULT_SWEEP};
use crate::racah::RacahTable;
use crate::spectra;
use crate::verify::{verify_all, VerifyOptions, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Table,
    Verify,
    Limit,
    Lame,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Builds the finite discrete Heun matrix, its spectrum and the elliptic Racah
/// eigenbasis, and checks their identities.
#[derive(Debug, Parser)]
#[command(name = "eracah", version)]
pub struct Args {
    #[arg(long, value_enum)]
    pub command: Command,
    /// Flat `name = value` file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub u1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u4: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v4: Option<f64>,
    /// Virtual parameter; shifts the spectrum without changing the eigenvectors.
    #[arg(long, allow_hyphen_values = true)]
    pub uu: Option<f64>,
    /// Matrix degree; the matrix has size M+1.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Elliptic nome, 0 < p < 1.
    #[arg(long)]
    pub p: Option<f64>,
    /// Replaces every `verify` threshold except the exact sign and positivity counts.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed of the random parameter draws used by `verify`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random parameter draws used by `verify`.
    #[arg(long)]
    pub draws: Option<usize>,
    /// Strictly decreasing nome values for `limit`, comma separated.
    #[arg(long = "p-sweep")]
    pub p_sweep: Option<String>,
}

/// A fully resolved invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: RawParams,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub draws: usize,
    /// Sweep values together with their text as written, echoed into the output.
    pub p_sweep: Vec<(String, f64)>,
}

/// Failure of the front end itself, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub body: serde_json::Value,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            body: json!({ "error": "invalid_input", "message": message.into() }),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        CliError {
            code: EXIT_NUMERICAL,
            body: json!({ "error": "io", "message": format!("{}: {err}", path.display()) }),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let mut body = json!({ "error": err.kind(), "message": err.to_string() });
        if let Error::DomainViolation(constraints) = &err {
            body["constraints"] = json!(constraints.iter().map(ToString::to_string).collect::<Vec<_>>());
        }
        CliError {
            code: if err.is_domain() { EXIT_INPUT } else { EXIT_NUMERICAL },
            body,
        }
    }
}

/// Parses a flat config file: one `name = value` per line, `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `name = value`", n + 1))?;
        let key = key.trim().replace('-', "_");
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key `{key}`", n + 1));
        }
    }
    Ok(map)
}

fn parse_sweep(text: &str) -> Result<Vec<(String, f64)>, String> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .map(|p| (s.to_string(), p))
                .map_err(|_| format!("p-sweep entry `{s}` is not a number"))
        })
        .collect()
}

impl RunConfig {
    pub fn resolve(args: Args) -> Result<Self, CliError> {
        let mut file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                parse_config(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
            }
            None => BTreeMap::new(),
        };
        let mut take = |key: &str| file.remove(key);

        fn pick<T: std::str::FromStr>(flag: Option<T>, file: Option<String>, key: &str, default: T) -> Result<T, CliError> {
            match (flag, file) {
                (Some(v), _) => Ok(v),
                (None, Some(s)) => s
                    .parse()
                    .map_err(|_| CliError::input(format!("config value for `{key}` is not valid: `{s}`"))),
                (None, None) => Ok(default),
            }
        }

        let d = RawParams::desk_default();
        let params = RawParams {
            u: [
                pick(args.u1, take("u1"), "u1", d.u[0])?,
                pick(args.u2, take("u2"), "u2", d.u[1])?,
                pick(args.u3, take("u3"), "u3", d.u[2])?,
                pick(args.u4, take("u4"), "u4", d.u[3])?,
            ],
            v: [
                pick(args.v1, take("v1"), "v1", d.v[0])?,
                pick(args.v2, take("v2"), "v2", d.v[1])?,
                pick(args.v3, take("v3"), "v3", d.v[2])?,
                pick(args.v4, take("v4"), "v4", d.v[3])?,
            ],
            u_virtual: pick(args.uu, take("uu"), "uu", d.u_virtual)?,
            m: pick(args.m, take("M"), "M", d.m)?,
            p: pick(args.p, take("p"), "p", d.p)?,
        };
        let tol = match (args.tol, take("tol")) {
            (Some(t), _) => Some(t),
            (None, Some(s)) => Some(s.parse().map_err(|_| CliError::input(format!("config value for `tol` is not valid: `{s}`")))?),
            (None, None) => None,
        };
        if let Some(t) = tol {
            if !(t > 0.0) {
                return Err(CliError::input(format!("tol must be positive, got {t}")));
            }
        }
        let seed = pick(args.seed, take("seed"), "seed", VerifyOptions::default().seed)?;
        let draws = pick(args.draws, take("draws"), "draws", VerifyOptions::default().draws)?;
        let sweep_text = args.p_sweep.or_else(|| take("p_sweep"));
        let p_sweep = match sweep_text {
            Some(s) => parse_sweep(&s).map_err(CliError::input)?,
            None => DEFAULT_SWEEP.iter().map(|p| (p.to_string(), *p)).collect(),
        };
        if let Some(key) = file.keys().next() {
            return Err(CliError::input(format!("unknown config key `{key}`")));
        }
        Ok(RunConfig {
            command: args.command,
            params,
            format: args.format.unwrap_or_default(),
            out: args.out,
            tol,
            seed,
            draws,
            p_sweep,
        })
    }
}

/// Output of a successful command: the document and whether its checks passed.
struct Outcome {
    document: Vec<u8>,
    passed: bool,
    failures: Vec<String>,
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializing plain data");
    out.push(b'\n');
    out
}

struct Csv(csv::Writer<Vec<u8>>);

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("writing to memory");
        Csv(w)
    }

    fn row(&mut self, fields: &[String]) {
        self.0.write_record(fields).expect("writing to memory");
    }

    fn finish(self) -> Vec<u8> {
        self.0.into_inner().expect("writing to memory")
    }
}

/// Shortest round-trip decimal, switching to exponent form for tiny and huge values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Appends `quantity,k,j,value` rows; an empty index means "not applicable".
fn table_rows(csv: &mut Csv, quantity: &str, k: Option<usize>, j: Option<usize>, value: f64) {
    let idx = |i: Option<usize>| i.map(|i| i.to_string()).unwrap_or_default();
    csv.row(&[quantity.to_string(), idx(k), idx(j), num(value)]);
}

fn grid(csv: &mut Csv, quantity: &str, x: &[Vec<f64>]) {
    for (k, row) in x.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            table_rows(csv, quantity, Some(k), Some(j), value);
        }
    }
}

#[derive(Serialize)]
struct Bands<'a> {
    sub: &'a [f64],
    diag: &'a [f64],
    sup: &'a [f64],
}

#[derive(Serialize)]
struct TraceCheck {
    matrix: f64,
    eigenvalues: f64,
    relative_residual: f64,
}

impl TraceCheck {
    fn new(matrix: f64, eigenvalues: f64, scale: f64) -> Self {
        let scale = scale.max(matrix.abs()).max(f64::MIN_POSITIVE);
        TraceCheck {
            matrix,
            eigenvalues,
            relative_residual: (matrix - eigenvalues).abs() / scale,
        }
    }
}

fn bands(h: &HeunMatrix) -> Bands<'_> {
    Bands {
        sub: h.sub(),
        diag: h.diag(),
        sup: h.sup(),
    }
}

fn cmd_spectrum(cfg: &RunConfig, params: &CouplingParams) -> Result<Outcome, Error> {
    let h = HeunMatrix::build(params)?;
    let spectrum = spectra::eigenvalues(&h)?;
    let e = spectrum.values();
    let document = match cfg.format {
        Format::Json => {
            let abs_sum: f64 = e.iter().map(|x| x.abs()).sum();
            let sq: f64 = e.iter().map(|x| x * x).sum();
            to_json(&json!({
                "command": Command::Spectrum,
                "params": params.raw(),
                "alpha": params.alpha(),
                "matrix": bands(&h),
                "eigenvalues": spectrum,
                "trace": TraceCheck::new(h.trace(), e.iter().sum(), abs_sum),
                "trace_of_square": TraceCheck::new(h.trace_of_square(), sq, sq),
            }))
        }
        Format::Csv => {
            let mut csv = Csv::new(&["j", "eigenvalue"]);
            for (j, x) in e.iter().enumerate() {
                csv.row(&[j.to_string(), num(*x)]);
            }
            csv.finish()
        }
    };
    Ok(Outcome {
        document,
        passed: true,
        failures: Vec::new(),
    })
}

fn cmd_table(cfg: &RunConfig, params: &CouplingParams) -> Result<Outcome, Error> {
    let t = RacahTable::compute(params)?;
    let document = match cfg.format {
        Format::Json => to_json(&json!({ "command": Command::Table, "table": t })),
        Format::Csv => {
            let mut csv = Csv::new(&["quantity", "k", "j", "value"]);
            for (j, &x) in t.spectrum.values().iter().enumerate() {
                table_rows(&mut csv, "eigenvalue", None, Some(j), x);
            }
            for (k, &x) in t.weights.iter().enumerate() {
                table_rows(&mut csv, "weight", Some(k), None, x);
            }
            for (j, &x) in t.norms.iter().enumerate() {
                table_rows(&mut csv, "norm", None, Some(j), x);
            }
            for (j, &x) in t.eps.iter().enumerate() {
                table_rows(&mut csv, "epsilon", None, Some(j), x);
            }
            for (j, &x) in t.eps_tilde.iter().enumerate() {
                table_rows(&mut csv, "epsilon_tilde", None, Some(j), x);
            }
            grid(&mut csv, "p", &t.p);
            grid(&mut csv, "f", &t.f);
            grid(&mut csv, "heun", &t.h);
            // stored [j][k]; transposed here so the columns keep their meaning
            let inv = crate::racah::measure::transpose(&t.matrix.inverse);
            grid(&mut csv, "f_inverse", &inv);
            table_rows(&mut csv, "det_elimination", None, None, t.matrix.det_elimination);
            table_rows(&mut csv, "det_vandermonde", None, None, t.matrix.det_vandermonde);
            table_rows(&mut csv, "det_norm_weight", None, None, t.matrix.det_norm_weight);
            csv.finish()
        }
    };
    Ok(Outcome {
        document,
        passed: true,
        failures: Vec::new(),
    })
}

fn cmd_verify(cfg: &RunConfig, params: &CouplingParams) -> Result<Outcome, Error> {
    let options = VerifyOptions {
        seed: cfg.seed,
        draws: cfg.draws,
        tol_override: cfg.tol,
        ..VerifyOptions::default()
    };
    let report: VerifyReport = verify_all(params, &options)?;
    let document = match cfg.format {
        Format::Json => to_json(&json!({
            "command": Command::Verify,
            "params": params.raw(),
            "passed": report.passed(),
            "report": report,
        })),
        Format::Csv => {
            let mut csv = Csv::new(&["identity", "max_residual", "threshold", "passed"]);
            for r in &report.identities {
                csv.row(&[
                    r.name.to_string(),
                    num(r.max_residual),
                    num(r.threshold),
                    r.passed.to_string(),
                ]);
            }
            csv.finish()
        }
    };
    Ok(Outcome {
        document,
        passed: report.passed(),
        failures: report.failures().iter().map(|s| s.to_string()).collect(),
    })
}

fn cmd_limit(cfg: &RunConfig, params: &CouplingParams) -> Result<Outcome, Error> {
    let ps: Vec<f64> = cfg.p_sweep.iter().map(|(_, p)| *p).collect();
    let report: ConvergenceReport = trig_limit_convergence(params, &ps)?;
    let rows_per_p = params.m() + 1;
    let failures = report
        .failure
        .map(|f| {
            let row = &report.rows[f.step * rows_per_p + f.j];
            vec![format!(
                "p={} j={} {} ratio {}",
                cfg.p_sweep[f.step].0, f.j, f.quantity, f.ratio
            )]
            .into_iter()
            .chain(std::iter::once(format!("abs_dE={} max_abs_df={}", row.abs_de, row.max_abs_df)))
            .collect()
        })
        .unwrap_or_default();
    let document = match cfg.format {
        Format::Json => {
            let tables = trig_tables(params)?;
            to_json(&json!({
                "command": Command::Limit,
                "params": params.raw(),
                "p_sweep": ps,
                "convergence": report,
                "trigonometric": tables,
            }))
        }
        Format::Csv => {
            let mut csv = Csv::new(&["p", "j", "abs_dE", "max_abs_df"]);
            for (i, row) in report.rows.iter().enumerate() {
                csv.row(&[
                    cfg.p_sweep[i / rows_per_p].0.clone(),
                    row.j.to_string(),
                    num(row.abs_de),
                    num(row.max_abs_df),
                ]);
            }
            csv.finish()
        }
    };
    Ok(Outcome {
        document,
        passed: report.failure.is_none(),
        failures,
    })
}

fn cmd_lame(cfg: &RunConfig, params: &CouplingParams) -> Result<Outcome, Error> {
    let raw = params.raw();
    let slice = lame_matrix(raw.u[0], raw.m, raw.p)?;
    let document = match cfg.format {
        Format::Json => to_json(&json!({
            "command": Command::Lame,
            "u": slice.u,
            "M": raw.m,
            "p": raw.p,
            "alpha_display": slice.alpha_display,
            "alpha_general": slice.alpha_general,
            "matrix": bands(&slice.matrix),
            "offdiag_residual": slice.offdiag_residual,
            "eigenvalues": slice.spectrum,
            "antisymmetry_residual": slice.antisymmetry_residual,
        })),
        Format::Csv => {
            let mut csv = Csv::new(&["j", "eigenvalue"]);
            for (j, x) in slice.spectrum.values().iter().enumerate() {
                csv.row(&[j.to_string(), num(*x)]);
            }
            csv.finish()
        }
    };
    Ok(Outcome {
        document,
        passed: true,
        failures: Vec::new(),
    })
}

/// Runs one resolved command, writing the document to `cfg.out` or `stdout`.
pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let params = CouplingParams::validate(cfg.params.clone())?;
    let outcome = match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg, &params),
        Command::Table => cmd_table(cfg, &params),
        Command::Verify => cmd_verify(cfg, &params),
        Command::Limit => cmd_limit(cfg, &params),
        Command::Lame => cmd_lame(cfg, &params),
    }?;
    match &cfg.out {
        Some(path) => fs::write(path, &outcome.document).map_err(|e| CliError::io(path, e))?,
        None => stdout
            .write_all(&outcome.document)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))?,
    }
    if outcome.passed {
        Ok(EXIT_OK)
    } else {
        Err(CliError {
            code: EXIT_CHECK_FAILED,
            body: json!({ "error": "check_failed", "failed": outcome.failures }),
        })
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "{e}");
            return EXIT_INPUT;
        }
    };
    let result = RunConfig::resolve(args).and_then(|cfg| execute(&cfg, stdout));
    match result {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "{}", err.body);
            err.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let map = parse_config("# desk\nu1 = 1.5\n\n M=3 # size\np-sweep = 0.1, 0.05\n").unwrap();
        assert_eq!(map["u1"], "1.5");
        assert_eq!(map["M"], "3");
        assert_eq!(map["p_sweep"], "0.1, 0.05");
        assert!(parse_config("u1 1.5").is_err());
        assert!(parse_config("u1 = 1\nu1 = 2").is_err());
    }

    #[test]
    fn sweep_keeps_text() {
        let s = parse_sweep("1e-2, 0.005").unwrap();
        assert_eq!(s[0], ("1e-2".to_string(), 0.01));
        assert_eq!(s[1].1, 0.005);
        assert!(parse_sweep("0.1,x").is_err());
    }

    #[test]
    fn flags_override_defaults() {
        let args = Args::try_parse_from(["eracah", "--command", "spectrum", "--M", "3", "--v2", "-0.1"]).unwrap();
        let cfg = RunConfig::resolve(args).unwrap();
        assert_eq!(cfg.params.m, 3);
        assert_eq!(cfg.params.v[1], -0.1);
        assert_eq!(cfg.params.u, RawParams::desk_default().u);
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn domain_error_exit_code() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(["eracah", "--command", "spectrum", "--u1", "-1"], &mut out, &mut err);
        assert_eq!(code, EXIT_INPUT);
        let body: serde_json::Value = serde_json::from_slice(&err).unwrap();
        assert_eq!(body["error"], "domain_violation");
        assert!(body["constraints"][0].as_str().unwrap().contains("u1"));
    }
}
