//! Command-line frontend.
//!
//! [`run`] parses the arguments, dispatches to the library and writes
//! machine-readable output. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, or the contract of the command passed |
//! | 1 | the command ran but its contract failed (certificate, comparison, invariant) |
//! | 2 | usage, I/O or parse error |
//! | 3 | numerical precondition or integration error |
//! | 4 | the supplied majorant does not majorize the field |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::coeffs::{check_invariants, coeff_table, zeta_crosscheck, CoeffKind};
use crate::domain::{gamma_boundary_table, in_delta, in_gamma, lifetime_bounds, DomainQuery};
use crate::error::Error;
use crate::freelie::{recursive_z_free, Bidegree};
use crate::liealg::{lie_norm, random_matrix, recursive_z_eval, MatrixAlgebra, MatrixJson, PairJson};
use crate::numfmt::{fmt_sig, round_sig};
use crate::odecmp::{check_majorization_with, linear_matrix_problem, ComparisonOptions, ExitReason};
use crate::series::{cbhd_problem, certify, DEFAULT_PSI_ORDER, DEFAULT_TABLE_ORDER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_MAJORANT: i32 = 4;

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(name = "cbhd", version, about = "CBHD coefficients, Dynkin polynomials and convergence certificates")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print an exact coefficient family as "n,num/den" lines.
    Coeffs {
        /// K, T, ALPHA or G_ABS
        #[arg(long, default_value = "K")]
        kind: CoeffKind,
        /// Largest index
        #[arg(long)]
        n: usize,
    },
    /// Print the Dynkin polynomial Z_{i,j}, or evaluate it on a matrix pair.
    BchTerm {
        i: usize,
        j: usize,
        /// Pair file {"a": matrix, "b": matrix}; prints the evaluated matrix as JSON
        #[arg(long)]
        eval: Option<PathBuf>,
    },
    /// Domain membership for a norm pair, or the boundary table of the enlarged domain.
    Domain(DomainArgs),
    /// Emit the convergence certificate for a matrix pair; exit 0 iff it passes.
    Certify {
        pair: PathBuf,
        #[arg(long = "max-i", default_value_t = DEFAULT_TABLE_ORDER)]
        max_i: usize,
        #[arg(long = "max-j", default_value_t = DEFAULT_TABLE_ORDER)]
        max_j: usize,
        /// Order of the ψ series
        #[arg(long = "psi-order", default_value_t = DEFAULT_PSI_ORDER)]
        psi_order: usize,
        /// Write the certificate here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare a vector problem with its scalar majorant; CSV "t,norm_phi,psi" plus a JSON report.
    CompareOde {
        /// Problem specification (JSON)
        spec: PathBuf,
        /// Seed for random problems without one in the specification
        #[arg(long)]
        seed: Option<u64>,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the report here instead of stderr
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the exact invariant suite of the coefficient families.
    BernoulliCheck {
        #[arg(long, default_value_t = 30)]
        n: usize,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
pub struct DomainArgs {
    #[arg(long = "a-norm", requires = "b_norm", conflicts_with = "table")]
    pub a_norm: Option<f64>,
    #[arg(long = "b-norm", requires = "a_norm", conflicts_with = "table")]
    pub b_norm: Option<f64>,
    /// Number of rows of the boundary table
    #[arg(long)]
    pub table: Option<usize>,
}

/// Problem specification read by `compare-ode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub problem: ProblemKind,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Matrix size of random problems.
    #[serde(default)]
    pub n: Option<usize>,
    /// Explicit CBHD pair.
    #[serde(default)]
    pub a: Option<MatrixJson>,
    #[serde(default)]
    pub b: Option<MatrixJson>,
    /// CBHD pair file, relative to the specification.
    #[serde(default)]
    pub pair_file: Option<PathBuf>,
    /// Target norms of random matrices (`linear`: field matrix `A`; `cbhd`: the pair).
    #[serde(default)]
    pub norm_a: Option<f64>,
    #[serde(default)]
    pub norm_b: Option<f64>,
    /// `linear`: norms of the inhomogeneity `C` and of the initial value.
    #[serde(default)]
    pub norm_c: Option<f64>,
    #[serde(default)]
    pub norm_x: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub lifetime_slack: Option<f64>,
    #[serde(default)]
    pub reverse_time: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// `y' = cos(t) A y + C` with majorant `(‖A‖*/2) z + ‖C‖*`.
    Linear,
    /// `φ' = f_b(φ)`, `φ(0) = a` with majorant `‖b‖ G(z)`.
    Cbhd,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    /// Error variant name for structured output.
    kind: Option<&'static str>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
            kind: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::MajorantViolation { .. } => EXIT_MAJORANT,
            Error::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
            kind: Some(e.kind()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("i/o error: {e}"))
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let structured = matches!(
        config.command,
        Command::Domain(_) | Command::Certify { .. } | Command::CompareOde { .. }
    );
    match dispatch(config.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            match f.kind {
                Some(kind) if structured => {
                    let v = json!({ "error": kind, "message": f.message });
                    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"));
                    let _ = writeln!(err, "error: {}", f.message);
                }
                _ => {
                    let _ = writeln!(err, "error: {}", f.message);
                }
            }
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Coeffs { kind, n } => cmd_coeffs(kind, n, out),
        Command::BchTerm { i, j, eval } => cmd_bch_term(i, j, eval.as_deref(), out),
        Command::Domain(args) => cmd_domain(&args, out),
        Command::Certify {
            pair,
            max_i,
            max_j,
            psi_order,
            output,
        } => cmd_certify(&pair, max_i, max_j, psi_order, output.as_deref(), out),
        Command::CompareOde {
            spec,
            seed,
            csv,
            report,
        } => cmd_compare_ode(&spec, seed, csv.as_deref(), report.as_deref(), out, err),
        Command::BernoulliCheck { n } => cmd_bernoulli_check(n, out),
    }
}

fn cmd_coeffs(kind: CoeffKind, n: usize, out: &mut dyn Write) -> CmdResult {
    let table = coeff_table(kind, n);
    for (i, v) in table.values.iter().enumerate() {
        writeln!(out, "{i},{v}")?;
    }
    Ok(EXIT_OK)
}

fn read_pair(path: &Path) -> std::result::Result<(DMatrix<f64>, DMatrix<f64>), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let pair: PairJson =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let (a, b) = pair.to_matrices().map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok((a, b))
}

fn rounded_matrix_json(m: &DMatrix<f64>) -> MatrixJson {
    let mut j = MatrixJson::from_matrix(m);
    for row in &mut j.data {
        for x in row.iter_mut() {
            *x = round_sig(*x, 15);
        }
    }
    j
}

fn cmd_bch_term(i: usize, j: usize, eval: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let d = Bidegree { i, j };
    match eval {
        None => writeln!(out, "{}", recursive_z_free(d))?,
        Some(path) => {
            let (a, b) = read_pair(path)?;
            let z = recursive_z_eval(&MatrixAlgebra::new(a.nrows()), d, &a, &b);
            writeln!(out, "{}", serde_json::to_string(&rounded_matrix_json(&z)).expect("json"))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_domain(args: &DomainArgs, out: &mut dyn Write) -> CmdResult {
    if let Some(rows) = args.table {
        let table = gamma_boundary_table(rows)?;
        writeln!(out, "norm_a,max_norm_b")?;
        for (na, nb) in table {
            writeln!(out, "{},{}", fmt_sig(na, 12), fmt_sig(nb, 12))?;
        }
        return Ok(EXIT_OK);
    }
    let (Some(na), Some(nb)) = (args.a_norm, args.b_norm) else {
        return Err(Failure::usage("domain needs --a-norm and --b-norm, or --table"));
    };
    let q = DomainQuery::new(na, nb)?;
    let beta = match lifetime_bounds(&q) {
        Ok(lb) => Some(round_sig(lb.beta_tilde, 15)),
        Err(Error::DegenerateB) => None,
        Err(e) => return Err(e.into()),
    };
    let v = json!({
        "in_delta": in_delta(&q),
        "in_gamma": in_gamma(&q),
        "beta_tilde": beta,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
    Ok(EXIT_OK)
}

fn cmd_certify(
    pair: &Path,
    max_i: usize,
    max_j: usize,
    psi_order: usize,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let (a, b) = read_pair(pair)?;
    let cert = certify(&MatrixAlgebra::new(a.nrows()), &a, &b, max_i, max_j, psi_order)?;
    let text = cert.to_json();
    match output {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => writeln!(out, "{text}")?,
    }
    Ok(if cert.pass { EXIT_OK } else { EXIT_FAIL })
}

fn parse_spec(path: &Path) -> std::result::Result<CompareSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn exit_label(reason: ExitReason) -> &'static str {
    match reason {
        ExitReason::Horizon => "HORIZON",
        ExitReason::DomainExit => "DOMAIN_EXIT",
        ExitReason::StepUnderflow => "STEP_UNDERFLOW",
    }
}

fn cmd_compare_ode(
    spec_path: &Path,
    seed: Option<u64>,
    csv: Option<&Path>,
    report: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let spec = parse_spec(spec_path)?;
    let seed = spec.seed.or(seed);
    let n = spec.n.unwrap_or(3);
    let rng = || {
        seed.map(ChaCha8Rng::seed_from_u64)
            .ok_or_else(|| Failure::usage("random problems need a seed (in the specification or --seed)"))
    };

    let (vp, sm, default_horizon) = match spec.problem {
        ProblemKind::Linear => {
            let mut r = rng()?;
            let a = random_matrix(&mut r, n, spec.norm_a.unwrap_or(1.0));
            let c = random_matrix(&mut r, n, spec.norm_c.unwrap_or(0.5));
            let x = random_matrix(&mut r, n, spec.norm_x.unwrap_or(0.5));
            let (vp, sm) = linear_matrix_problem(a, c, x);
            (vp, sm, 2.0)
        }
        ProblemKind::Cbhd => {
            let (a, b) = match (&spec.a, &spec.b, &spec.pair_file) {
                (Some(a), Some(b), None) => (a.to_matrix()?, b.to_matrix()?),
                (None, None, Some(file)) => {
                    let base = spec_path.parent().unwrap_or(Path::new("."));
                    read_pair(&base.join(file))?
                }
                (None, None, None) => {
                    let mut r = rng()?;
                    let a = random_matrix(&mut r, n, spec.norm_a.unwrap_or(0.5));
                    let b = random_matrix(&mut r, n, spec.norm_b.unwrap_or(0.5));
                    (a, b)
                }
                _ => {
                    return Err(Failure::usage(
                        "cbhd problems take either both 'a' and 'b', or 'pair_file', or random norms",
                    ))
                }
            };
            let (vp, sm) = cbhd_problem(&a, &b)?;
            (vp, sm, 1.0)
        }
    };
    let horizon = spec.horizon.unwrap_or(default_horizon);
    let tol = spec.tol.unwrap_or(1e-8);
    if !(tol > 0.0) || !(horizon > 0.0) {
        return Err(Failure::usage("tol and horizon must be positive"));
    }
    let mut opts = ComparisonOptions::new(tol).with_lifetime_slack(spec.lifetime_slack.unwrap_or(1e-3));
    opts.reverse_time = spec.reverse_time;
    let rep = check_majorization_with(&vp, &sm, horizon, &opts)?;

    let mut text = String::from("t,norm_phi,psi\n");
    for row in &rep.rows {
        text.push_str(&format!(
            "{},{},{}\n",
            fmt_sig(row.t, 15),
            fmt_sig(row.norm_phi, 15),
            fmt_sig(row.psi, 15)
        ));
    }
    match csv {
        Some(path) => std::fs::write(path, &text)?,
        None => out.write_all(text.as_bytes())?,
    }

    let r = |x: f64| if x.is_finite() { Some(round_sig(x, 15)) } else { None };
    let summary = json!({
        "problem": spec.problem,
        "pass": rep.passed,
        "dominated": rep.dominated,
        "lifetime_ordered": rep.lifetime_ordered,
        "strictly_dominated": rep.strictly_dominated,
        "max_excess": r(rep.max_excess),
        "min_interior_gap": r(rep.min_interior_gap),
        "vector_exit": { "reason": exit_label(rep.vector.exit_reason), "time": r(rep.vector_exit()) },
        "scalar_exit": { "reason": exit_label(rep.scalar.exit_reason), "time": r(rep.scalar_exit()) },
        "norm_initial": r(lie_norm(&vp.initial)),
        "grid_points": rep.rows.len(),
        "samples_checked": rep.samples_checked,
        "tol": tol,
        "lifetime_slack": opts.lifetime_slack,
        "horizon": horizon,
        "reverse_time": spec.reverse_time,
    });
    let text = serde_json::to_string_pretty(&summary).expect("json") + "\n";
    match report {
        Some(path) => std::fs::write(path, text)?,
        None => err.write_all(text.as_bytes())?,
    }
    Ok(if rep.passed { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_bernoulli_check(n: usize, out: &mut dyn Write) -> CmdResult {
    let mut all = true;
    for c in check_invariants(n) {
        all &= c.passed;
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {}: {}", c.name, c.detail)?;
    }
    for (k, terms, bound) in [(1, 1_000_000, 1e-6), (2, 10_000, 1e-10)] {
        let residual = zeta_crosscheck(k, terms);
        let ok = residual < bound;
        all &= ok;
        let tag = if ok { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} zeta cross-check k={k} terms={terms}: residual {residual:.3e} < {bound:e}")?;
    }
    Ok(if all { EXIT_OK } else { EXIT_FAIL })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["cbhd"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn coeffs_output() {
        let (code, out, _) = run_str(&["coeffs", "--kind", "K", "--n", "4"]);
        assert_eq!(code, 0);
        assert_eq!(out, "0,1\n1,-1/2\n2,1/12\n3,0\n4,-1/720\n");
        let (_, out, _) = run_str(&["coeffs", "--kind", "G_ABS", "--n", "2"]);
        assert!(out.ends_with("2,1/12\n"));
        let (code, _, err) = run_str(&["coeffs", "--kind", "Q", "--n", "2"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("unknown coefficient kind"));
    }

    #[test]
    fn bch_term_output() {
        assert_eq!(run_str(&["bch-term", "1", "1"]).1, "1/2 xy\n-1/2 yx\n");
        assert_eq!(run_str(&["bch-term", "0", "0"]).1, "0\n");
        assert_eq!(run_str(&["bch-term", "3", "0"]).1, "0\n");
    }

    #[test]
    fn domain_output() {
        let (code, out, _) = run_str(&["domain", "--a-norm", "0.1", "--b-norm", "1.0"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["in_delta"], false);
        assert_eq!(v["in_gamma"], true);
        let (code, _, _) = run_str(&["domain", "--a-norm", "7", "--b-norm", "1"]);
        assert_eq!(code, EXIT_NUMERIC);
        let (code, _, _) = run_str(&["domain"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn help_is_not_an_error() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("certify"));
    }

    #[test]
    fn bernoulli_check_passes() {
        let (code, out, _) = run_str(&["bernoulli-check"]);
        assert_eq!(code, 0, "{out}");
        assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 7);
    }
}
