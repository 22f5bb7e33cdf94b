//! Command-line frontend: evaluation, certification, the property-suite
//! runner and plot-data export.
//!
//! Every command emits one JSON document
//! `{command, version, inputs, results, residuals}` to stdout (or
//! `--out`). Exit codes: 0 success, 2 validation error, 3 solver
//! non-convergence. Batch inputs (`--file`, one CSV vector per line)
//! are processed by parallel workers; output order matches input order.

use crate::bounds;
use crate::capra::{self, PhiSpec};
use crate::checks;
use crate::error::CapraError;
use crate::norms::{self, SourceNorm};
use crate::solver::SolverConfig;
use crate::Result;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "capra", version, about = "Coordinate-k norms, Capra conjugacy and l0 certificates")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonOpts {
    /// lp exponent of the source norm: a decimal >= 1 or "inf"
    #[arg(long, value_parser = SourceNorm::parse)]
    p: SourceNorm,
    /// Write the JSON document here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct VectorOpts {
    /// Inline vector as a JSON array, e.g. "[1,2,0.5]"
    #[arg(long, value_name = "JSON")]
    x: Option<String>,
    /// CSV file with one comma-separated vector per line (batch mode)
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coordinate-k norm of x (source norm when --k is omitted)
    Norm {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        vec: VectorOpts,
    },
    /// Dual coordinate-k norm of y (dual norm when --k is omitted)
    DualNorm {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        k: Option<usize>,
        /// Inline vector as a JSON array
        #[arg(long, value_name = "JSON")]
        y: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Primal and dual coordinate-k norm sequences of x
    Seq {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        vec: VectorOpts,
    },
    /// Sparsity read-off from the graded norm sequence
    Sparsity {
        #[command(flatten)]
        common: CommonOpts,
        /// Relative tolerance for sequence stationarity
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        vec: VectorOpts,
    },
    /// Capra conjugate of phi(l0(.)) at y
    Conjugate {
        #[command(flatten)]
        common: CommonOpts,
        /// Preset "l0", "sqrt", "levelset:k", or a JSON array with "inf" tokens
        #[arg(long)]
        phi: String,
        #[arg(long, value_name = "JSON")]
        y: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Capra biconjugate of phi(l0(.)) at x, by two routes
    Biconjugate {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 12345)]
        seed: u64,
        #[command(flatten)]
        vec: VectorOpts,
    },
    /// Subdifferential membership certificate for y at x (origin when --x is omitted)
    Subdiff {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        phi: String,
        #[arg(long, value_name = "JSON")]
        x: Option<String>,
        #[arg(long, value_name = "JSON")]
        y: String,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// phi-norm ratio lower bound on l0(x)
    Bound {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 12345)]
        seed: u64,
        #[command(flatten)]
        vec: VectorOpts,
    },
    /// CSV boundary of the d=2 coordinate-k ball (or its dual ball)
    BallSlice {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        k: usize,
        /// Sweep the dual coordinate-k ball instead of the primal one
        #[arg(long)]
        dual: bool,
        #[arg(long, default_value_t = 360)]
        resolution: usize,
        /// Ambient dimension; only d = 2 slices are supported
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Run the full property suite and report violations
    Check {
        #[arg(long, default_value_t = 12345)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// printf-style `%.12g`: 12 significant digits, trailing zeros stripped,
/// scientific notation outside [1e-4, 1e12).
pub fn fmt_g12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", v);
    let (mant, ex) = sci.split_once('e').expect("scientific format");
    let exp: i32 = ex.parse().expect("exponent");
    if exp < -4 || exp >= 12 {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{}e{}{:02}", mant, if exp < 0 { "-" } else { "+" }, exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

fn parse_inline_vector(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = serde_json::from_str(s)
        .map_err(|e| CapraError::InvalidArgument(format!("cannot parse vector {s:?}: {e}")))?;
    if v.is_empty() {
        return Err(CapraError::InvalidArgument("vector cannot be empty".into()));
    }
    if v.iter().any(|t| !t.is_finite()) {
        return Err(CapraError::InvalidArgument("vector entries must be finite".into()));
    }
    Ok(v)
}

fn parse_vector_file(path: &PathBuf) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CapraError::InvalidArgument(format!("cannot read {}: {e}", path.display()))
    })?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) if !v.is_empty() && v.iter().all(|t| t.is_finite()) => out.push(v),
            _ => {
                return Err(CapraError::InvalidArgument(format!(
                    "{}:{}: malformed vector line {line:?}",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(CapraError::InvalidArgument(format!(
            "{}: no vectors found",
            path.display()
        )));
    }
    Ok(out)
}

enum Inputs {
    Single(Vec<f64>),
    Batch(Vec<Vec<f64>>),
}

fn gather(inline: &Option<String>, file: &Option<PathBuf>) -> Result<Inputs> {
    match (inline, file) {
        (Some(s), None) => Ok(Inputs::Single(parse_inline_vector(s)?)),
        (None, Some(f)) => Ok(Inputs::Batch(parse_vector_file(f)?)),
        _ => Err(CapraError::InvalidArgument(
            "provide exactly one of the inline vector or --file".into(),
        )),
    }
}

/// Applies `f` per vector, in parallel for batches, preserving order.
fn map_inputs(
    inputs: Inputs,
    f: impl Fn(&[f64]) -> Result<Value> + Sync,
) -> Result<(Value, Value)> {
    match inputs {
        Inputs::Single(v) => Ok((json!(v), f(&v)?)),
        Inputs::Batch(vs) => {
            let results: Result<Vec<Value>> = vs.par_iter().map(|v| f(v)).collect();
            Ok((json!(vs), Value::Array(results?)))
        }
    }
}

fn emit(doc: &Value, out: &Option<PathBuf>) -> Result<()> {
    let text = format!("{}\n", serde_json::to_string_pretty(doc).expect("serializable"));
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            CapraError::InvalidArgument(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn envelope(command: &str, inputs: Value, results: Value, residuals: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "inputs": inputs,
        "results": results,
        "residuals": residuals,
    })
}

fn solver_cfg(seed: u64) -> SolverConfig {
    SolverConfig { seed, ..SolverConfig::default() }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Norm { common, k, vec } => {
            let inputs = gather(&vec.x, &vec.file)?;
            let (echo, results) = map_inputs(inputs, |x| {
                let value = match k {
                    Some(k) => norms::coordinate_norm(x, k, common.p)?,
                    None => norms::source_norm(x, common.p),
                };
                Ok(json!({ "value": value }))
            })?;
            let doc = envelope(
                "norm",
                json!({"p": common.p, "k": k, "x": echo}),
                results,
                json!({}),
            );
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::DualNorm { common, k, y, file } => {
            let inputs = gather(&y, &file)?;
            let (echo, results) = map_inputs(inputs, |v| {
                let value = match k {
                    Some(k) => norms::dual_coordinate_norm(v, k, common.p)?,
                    None => norms::dual_norm(v, common.p),
                };
                Ok(json!({ "value": value }))
            })?;
            let doc = envelope(
                "dual-norm",
                json!({"p": common.p, "k": k, "y": echo}),
                results,
                json!({}),
            );
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::Seq { common, vec } => {
            let inputs = gather(&vec.x, &vec.file)?;
            let (echo, results) = map_inputs(inputs, |x| {
                let seq = norms::norm_sequence(x, common.p)?;
                Ok(json!({ "values": seq.values, "dual_values": seq.dual_values }))
            })?;
            let doc =
                envelope("seq", json!({"p": common.p, "x": echo}), results, json!({}));
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::Sparsity { common, tol, vec } => {
            let inputs = gather(&vec.x, &vec.file)?;
            let (echo, results) = map_inputs(inputs, |x| {
                let k_hat = norms::sparsity_from_grading(x, common.p, tol)?;
                Ok(json!({ "k_hat": k_hat, "is_exact": common.p.is_strictly_convex() }))
            })?;
            let doc = envelope(
                "sparsity",
                json!({"p": common.p, "tol": tol, "x": echo}),
                results,
                json!({}),
            );
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::Conjugate { common, phi, y, file } => {
            let inputs = gather(&y, &file)?;
            let phi_echo = phi.clone();
            let (echo, results) = map_inputs(inputs, |v| {
                let table = PhiSpec::parse(&phi, v.len() )?;
                let value = capra::capra_conjugate(&table, v, common.p)?;
                Ok(json!({ "value": value }))
            })?;
            let doc = envelope(
                "conjugate",
                json!({"p": common.p, "phi": phi_echo, "y": echo}),
                results,
                json!({}),
            );
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::Biconjugate { common, phi, seed, vec } => {
            let inputs = gather(&vec.x, &vec.file)?;
            let cfg = solver_cfg(seed);
            let phi_echo = phi.clone();
            let (echo, results) = map_inputs(inputs, |x| {
                let table = PhiSpec::parse(&phi, x.len())?;
                let b = capra::capra_biconjugate(&table, x, common.p, &cfg)?;
                Ok(json!({
                    "value": b.value,
                    "variational": b.variational,
                    "gap": b.gap,
                }))
            })?;
            let doc = envelope(
                "biconjugate",
                json!({"p": common.p, "phi": phi_echo, "seed": seed, "x": echo}),
                results,
                json!({}),
            );
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::Subdiff { common, phi, x, y, tol } => {
            let yv = parse_inline_vector(&y)?;
            let table = PhiSpec::parse(&phi, yv.len())?;
            let cert = match &x {
                Some(xs) => {
                    let xv = parse_inline_vector(xs)?;
                    capra::subdiff_membership(&table, &xv, &yv, common.p, tol)?
                }
                None => capra::subdiff_at_zero_contains(&table, &yv, common.p, tol)?,
            };
            let residuals = json!({
                "coupling_eq": cert.residual_coupling_eq,
                "argmax": cert.residual_argmax,
            });
            let doc = envelope(
                "subdiff",
                json!({"p": common.p, "phi": phi, "x": x, "y": yv, "tol": tol}),
                serde_json::to_value(&cert).expect("serializable"),
                residuals,
            );
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::Bound { common, phi, seed, vec } => {
            let inputs = gather(&vec.x, &vec.file)?;
            let cfg = solver_cfg(seed);
            let phi_echo = phi.clone();
            let (echo, results) = map_inputs(inputs, |x| {
                let table = PhiSpec::parse(&phi, x.len())?;
                let report = bounds::l0_lower_bound(x, &table, common.p, &cfg)?;
                Ok(serde_json::to_value(&report).expect("serializable"))
            })?;
            let doc = envelope(
                "bound",
                json!({"p": common.p, "phi": phi_echo, "seed": seed, "x": echo}),
                results,
                json!({}),
            );
            emit(&doc, &common.out)?;
            Ok(0)
        }
        Command::BallSlice { common, k, dual, resolution, dim } => {
            if dim != 2 {
                return Err(CapraError::InvalidArgument(
                    "ball slices are only defined for d = 2".into(),
                ));
            }
            if resolution < 4 {
                return Err(CapraError::InvalidArgument("resolution must be >= 4".into()));
            }
            let mut csv = String::from("theta,x1,x2,ball\n");
            let label = if dual { "dual" } else { "primal" };
            for i in 0..resolution {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / resolution as f64;
                let u = [theta.cos(), theta.sin()];
                let gauge = if dual {
                    norms::dual_coordinate_norm(&u, k, common.p)?
                } else {
                    norms::coordinate_norm(&u, k, common.p)?
                };
                let pt = [u[0] / gauge, u[1] / gauge];
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_g12(theta),
                    fmt_g12(pt[0]),
                    fmt_g12(pt[1]),
                    label
                ));
            }
            match &common.out {
                Some(path) => std::fs::write(path, csv).map_err(|e| {
                    CapraError::InvalidArgument(format!(
                        "cannot write {}: {e}",
                        path.display()
                    ))
                })?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Check { seed, out } => {
            let report = checks::run_check_suite(seed);
            let doc = envelope(
                "check",
                json!({ "seed": seed }),
                serde_json::to_value(&report).expect("serializable"),
                json!({}),
            );
            emit(&doc, &out)?;
            if report.passed {
                Ok(0)
            } else {
                if let Some(failure) = report.first_failure() {
                    eprintln!(
                        "property {} violated; first counterexample: {}",
                        failure.name,
                        failure
                            .first_counterexample
                            .as_ref()
                            .map(|v| v.to_string())
                            .unwrap_or_else(|| "n/a".into())
                    );
                }
                Ok(1)
            }
        }
    }
}

/// Parses and runs a command line; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_formatting() {
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(1.0), "1");
        assert_eq!(fmt_g12(-2.5), "-2.5");
        assert_eq!(fmt_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g12(1e-7), "1e-07");
        assert_eq!(fmt_g12(1.5e13), "1.5e+13");
        assert_eq!(fmt_g12(123.456), "123.456");
        assert_eq!(fmt_g12(2.0f64.sqrt()), "1.41421356237");
    }

    #[test]
    fn inline_vector_parsing() {
        assert_eq!(parse_inline_vector("[1, 2, 0.5]").unwrap(), vec![1.0, 2.0, 0.5]);
        assert!(parse_inline_vector("[]").is_err());
        assert!(parse_inline_vector("[1, \"a\"]").is_err());
    }

    #[test]
    fn file_parsing_reports_the_line() {
        let dir = std::env::temp_dir().join("capra-cli-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("vectors.csv");
        std::fs::write(&path, "1,2,3\n4,oops,6\n").unwrap();
        let err = parse_vector_file(&path).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
        std::fs::write(&path, "1,2,3\n4,5,6\n").unwrap();
        assert_eq!(parse_vector_file(&path).unwrap().len(), 2);
    }
}
