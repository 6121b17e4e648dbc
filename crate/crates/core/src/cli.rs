//! Command-line front end: `build`, `sample`, `verify` and `repro`.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 input error, 3 singular
//! support matrix, 4 I/O error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::engine::RESIDUAL_TOLERANCE;
use crate::linalg::Matrix;
use crate::problem::{Model, Problem, ProblemError};
use crate::repro;
use crate::spec::ProblemSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cexpr", version, about = "Build, sample and verify constrained expressions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for ensemble draws (overrides the spec's own seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Relative residual tolerance for `verify`.
    #[arg(long, global = true, default_value_t = RESIDUAL_TOLERANCE)]
    pub tolerance: f64,
    /// Output format for `sample`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the spec and print the support matrix, rank, rcond and coefficients.
    Build { spec: PathBuf },
    /// Evaluate the spec on its sampling grid and write CSV (`-o -` for stdout).
    Sample {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check every constraint residual against tolerance * scale.
    Verify { spec: PathBuf },
    /// Reproduce a worked example and compare it with reference values.
    Repro {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(repro::NAMES))]
        name: String,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Singular(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Singular(_) => EXIT_SINGULAR,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        if e.is_singular() {
            CliError::Singular(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

fn io_error(what: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("cannot {what} {}: {e}", path.display()))
}

/// Formats a number with the shortest decimal text that reads back to the
/// same `f64`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn format_row(values: &[f64]) -> String {
    values.iter().map(|v| format_number(*v)).collect::<Vec<_>>().join(", ")
}

fn format_matrix(out: &mut String, m: &Matrix) {
    for row in m.to_rows() {
        let _ = writeln!(out, "  [{}]", format_row(&row));
    }
}

pub fn load_spec(path: &Path) -> Result<ProblemSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error("read", path, e))?;
    ProblemSpec::from_json(&text).map_err(CliError::from)
}

pub fn load_problem(path: &Path, seed: Option<u64>) -> Result<Problem, CliError> {
    Ok(load_spec(path)?.resolve(seed)?)
}

fn describe_model(out: &mut String, model: &Model) {
    match model {
        Model::Engine(e) => {
            let n = e.n();
            let _ = writeln!(out, "n = {n}");
            let _ = writeln!(out, "basis: {}", e.basis().descriptors().join(", "));
            let _ = writeln!(out, "constraints:");
            for (k, c) in e.constraints().iter().enumerate() {
                let _ = writeln!(out, "  {}: {c}", k + 1);
            }
            let _ = writeln!(out, "support matrix H:");
            format_matrix(out, e.support().entries());
            let _ = writeln!(out, "rank = {}", e.support().rank());
            let _ = writeln!(out, "rcond = {:.6e}", e.support().rcond());
            let _ = writeln!(out, "coefficients Xi = H^-1 (row i: basis member, column k: constraint):");
            format_matrix(out, e.coefficients().matrix());
            let _ = writeln!(out, "beta coefficient vectors (beta_k(x) = sum_i Xi[i][k] h_i(x)):");
            for k in 0..n {
                let _ = writeln!(out, "  beta_{} = [{}]", k + 1, format_row(&e.coefficients().column(k)));
            }
        }
        Model::Form(f) => {
            let _ = writeln!(out, "form: {}", f.kind_name());
        }
    }
}

pub fn build_report(problem: &Problem) -> String {
    let mut out = String::new();
    if let Some(d) = &problem.description {
        let _ = writeln!(out, "{d}");
    }
    if problem.is_ensemble() {
        let _ = writeln!(out, "ensemble of {} members", problem.members.len());
    }
    for (m, model) in problem.members.iter().enumerate() {
        if problem.is_ensemble() {
            let draws = problem.draws[m]
                .iter()
                .map(|(k, v)| format!("{k} = {}", format_number(*v)))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "member {}: {draws}", m + 1);
        }
        describe_model(&mut out, model);
    }
    for n in &problem.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

/// The full CSV text for a problem's sampling grid.
pub fn sample_csv(problem: &Problem) -> Result<String, CliError> {
    let sampling = problem
        .sampling
        .ok_or_else(|| CliError::Input("the spec has no sampling block".into()))?;
    let mut out = problem.header(sampling.derivatives)?.join(",");
    out.push('\n');
    for x in sampling.points() {
        let row = problem.row(x, sampling.derivatives)?;
        out.push_str(&row.iter().map(|v| format_number(*v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Writes the residual table and returns whether every check passed.
pub fn verify_report(problem: &Problem, tolerance: f64) -> Result<(String, bool), CliError> {
    let checks = problem.checks()?;
    let mut out = String::new();
    let _ = writeln!(out, "{:<40} {:>24} {:>24} {:>12} {:>8}  status", "constraint", "target", "value", "residual", "scale");
    let mut passed = 0;
    for c in &checks {
        let ok = c.passes(tolerance);
        passed += usize::from(ok);
        let _ = writeln!(
            out,
            "{:<40} {:>24} {:>24} {:>12.3e} {:>8.2e}  {}",
            c.label,
            format_number(c.target),
            format_number(c.value),
            c.residual(),
            c.scale,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    for n in &problem.notes {
        let _ = writeln!(out, "note: {n}");
    }
    let all = passed == checks.len();
    let _ = writeln!(
        out,
        "{}: {passed}/{} constraints within {} * scale",
        if all { "PASS" } else { "FAIL" },
        checks.len(),
        format_number(tolerance)
    );
    Ok((out, all))
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let write_out = |w: &mut dyn Write, text: &str| {
        w.write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write output: {e}")))
    };
    match &cli.command {
        Command::Build { spec } => {
            let problem = load_problem(spec, cli.seed)?;
            write_out(stdout, &build_report(&problem))?;
            Ok(EXIT_OK)
        }
        Command::Sample { spec, output } => {
            let problem = load_problem(spec, cli.seed)?;
            let Format::Csv = cli.format;
            let csv = sample_csv(&problem)?;
            for n in &problem.notes {
                write_out(stderr, &format!("note: {n}\n"))?;
            }
            if output.as_os_str() == "-" {
                write_out(stdout, &csv)?;
            } else {
                std::fs::write(output, csv).map_err(|e| io_error("write", output, e))?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify { spec } => {
            if !(cli.tolerance > 0.0 && cli.tolerance.is_finite()) {
                return Err(CliError::Input("tolerance must be positive".into()));
            }
            let problem = load_problem(spec, cli.seed)?;
            let (report, ok) = verify_report(&problem, cli.tolerance)?;
            write_out(stdout, &report)?;
            Ok(if ok { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Command::Repro { name } => {
            let report = repro::run(name).ok_or_else(|| CliError::Input(format!("unknown example '{name}'")))?;
            write_out(stdout, &format!("{report}\n"))?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, stdout, stderr),
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{}", e.render());
            EXIT_INPUT
        }
        Err(e) => {
            let _ = write!(stdout, "{}", e.render());
            EXIT_OK
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.1, -2.5, 1.0 / 3.0, 1e-7, 6.02e23, 123456.0, -0.0, f64::MIN_POSITIVE] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(1e-7), "1e-7");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Input(String::new()).exit_code(), 2);
        assert_eq!(CliError::Singular(String::new()).exit_code(), 3);
        assert_eq!(CliError::Io(String::new()).exit_code(), 4);
    }
}
