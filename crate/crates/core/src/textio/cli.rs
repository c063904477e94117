//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
//! 3 lift limit exceeded.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::factorizer::{factor_logged, refine, verify, Factorization};
use crate::matrix::{companion, Matrix};
use crate::oracle::{bairstow_factor, compare, random_poly, InstanceSpec};
use crate::poly::Polynomial;
use crate::textio::json::{read_input_file, to_json, FactorsDoc, InputFile, OutputDoc, TraceDoc};
use crate::textio::parse::{format_poly, parse_poly};
use crate::truepair::true_pair_traced;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

/// Tolerance for the cross-method agreement in `--method both` and `bench`.
const AGREE_TOL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(
    name = "realfactor",
    version,
    about = "Factor real polynomials with true pairs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Knobs {
    /// Residual tolerance (overrides REALFACTOR_TOL)
    #[arg(long)]
    tol: Option<f64>,
    /// Largest dimension a symmetric lift may reach
    #[arg(long)]
    max_lift_dim: Option<usize>,
}

impl Knobs {
    fn config(&self) -> Result<Config> {
        let mut cfg = Config::from_env();
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::contract("--tol must be positive"));
            }
            cfg.tol = t;
        }
        if let Some(m) = self.max_lift_dim {
            cfg.max_lift_dim = m;
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Paper,
    Bairstow,
    Both,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Factor a polynomial given as an expression or a {"coeffs": [...]} file
    Factor {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        #[arg(long, value_enum, default_value = "paper")]
        method: Method,
        #[command(flatten)]
        knobs: Knobs,
        /// Print the JSON document instead of text
        #[arg(long)]
        json: bool,
        /// Write the true-pair trace to FILE
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// Polish the factors against the input
        #[arg(long)]
        refine: bool,
    },
    /// True pair of a companion matrix, or of a {"matrix": [[...]]} file
    Truepair {
        #[arg(allow_hyphen_values = true)]
        input: String,
        #[command(flatten)]
        knobs: Knobs,
        #[arg(long)]
        json: bool,
    },
    /// Check a factors JSON document against a polynomial
    Verify {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        factors: PathBuf,
        /// Largest accepted relative residual
        #[arg(long, default_value_t = 1e-8)]
        max_residual: f64,
        #[arg(long)]
        json: bool,
    },
    /// Cross-method agreement table over random polynomials
    Bench {
        /// Degree range such as 1..7 (inclusive)
        #[arg(long, value_parser = parse_range)]
        degrees: (usize, usize),
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        knobs: Knobs,
    },
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got '{s}'"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
    if a == 0 || a > b {
        return Err(format!("need 1 <= A <= B, got {a}..{b}"));
    }
    Ok((a, b))
}

/// Map an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::LimitExceeded { .. } => EXIT_LIMIT,
        Error::NumericalFailure { .. }
        | Error::InvarianceViolated { .. }
        | Error::NotCommuting { .. }
        | Error::NonConvergence { .. }
        | Error::BracketFailure
        | Error::DivisionByZero => EXIT_NUMERICAL,
        Error::ContractViolation(_) | Error::Parse(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
    }
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_cli`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.cmd, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Cmd::Factor {
            poly,
            method,
            knobs,
            json,
            trace,
            refine,
        } => cmd_factor(
            &poly,
            method,
            &knobs.config()?,
            json,
            trace.as_deref(),
            refine,
            out,
            err,
        ),
        Cmd::Truepair { input, knobs, json } => cmd_truepair(&input, &knobs.config()?, json, out),
        Cmd::Verify {
            poly,
            factors,
            max_residual,
            json,
        } => cmd_verify(&poly, &factors, max_residual, json, out),
        Cmd::Bench {
            degrees,
            count,
            seed,
            knobs,
        } => cmd_bench(degrees, count, seed, &knobs.config()?, out),
    }
}

/// An expression, or the path of a coefficient file.
fn read_poly(arg: &str) -> Result<Polynomial> {
    let path = Path::new(arg);
    if path.is_file() {
        return match read_input_file(path)? {
            InputFile::Coeffs(p) => Ok(p),
            InputFile::Matrix(_) => {
                Err(Error::contract("expected a coefficient file, got a matrix"))
            }
        };
    }
    Ok(parse_poly(arg, 't')?)
}

fn check_factorable(p: &Polynomial) -> Result<()> {
    if p.degree() == 0 {
        return Err(Error::contract("input is a constant; nothing to factor"));
    }
    Ok(())
}

struct Run {
    doc: OutputDoc,
    fact: Factorization,
}

fn run_method(
    p: &Polynomial,
    method: Method,
    cfg: &Config,
    do_refine: bool,
    trace: &mut Option<TraceDoc>,
) -> Result<Run> {
    let start = Instant::now();
    let (name, mut f) = match method {
        Method::Paper => {
            let mut c = cfg.clone();
            c.trace = trace.is_some();
            let (f, log) = factor_logged(p, &c)?;
            if let Some(t) = trace.as_mut() {
                t.events = log.trace;
            }
            ("paper", f)
        }
        Method::Bairstow => ("bairstow", bairstow_factor(p, cfg)?),
        Method::Both => unreachable!("split by the caller"),
    };
    if do_refine {
        f = refine(&f, p, cfg);
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Run {
        doc: OutputDoc::new(p, name, &f, ms),
        fact: f,
    })
}

fn write_text(out: &mut dyn Write, doc: &OutputDoc) -> Result<()> {
    writeln!(out, "method: {}", doc.method)?;
    writeln!(out, "constant: {}", doc.constant)?;
    for l in &doc.linear {
        writeln!(
            out,
            "linear: {}",
            format_poly(&Polynomial::linear(l.root), 't')
        )?;
    }
    for q in &doc.quadratic {
        writeln!(
            out,
            "quadratic: {}   (alpha {}, beta {})",
            format_poly(&Polynomial::quadratic_pair(q.alpha, q.beta), 't'),
            q.alpha,
            q.beta
        )?;
    }
    writeln!(out, "residual: {:e}", doc.residual)?;
    if let Some(t) = &doc.trace {
        writeln!(out, "trace: {t}")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_factor(
    poly: &str,
    method: Method,
    cfg: &Config,
    json: bool,
    trace_path: Option<&Path>,
    do_refine: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let p = read_poly(poly)?;
    check_factorable(&p)?;
    let mut trace = trace_path.map(|_| TraceDoc::default());
    let write_trace = |trace: &Option<TraceDoc>, doc: &mut OutputDoc| -> Result<()> {
        if let (Some(path), Some(t)) = (trace_path, trace) {
            std::fs::write(path, to_json(t)?)?;
            doc.trace = Some(path.display().to_string());
        }
        Ok(())
    };

    if method != Method::Both {
        let mut run = run_method(&p, method, cfg, do_refine, &mut trace)?;
        write_trace(&trace, &mut run.doc)?;
        if json {
            out.write_all(to_json(&run.doc)?.as_bytes())?;
        } else {
            write_text(out, &run.doc)?;
        }
        return Ok(EXIT_OK);
    }

    // both: the true-pair method may legitimately stop at the lift limit
    let paper = run_method(&p, Method::Paper, cfg, do_refine, &mut trace);
    let mut bairstow = run_method(&p, Method::Bairstow, cfg, do_refine, &mut None)?;
    let mut paper = match paper {
        Ok(r) => r,
        Err(e) => {
            writeln!(err, "paper method failed: {e}")?;
            if json {
                out.write_all(to_json(&bairstow.doc)?.as_bytes())?;
            } else {
                write_text(out, &bairstow.doc)?;
            }
            return Ok(exit_code(&e));
        }
    };
    write_trace(&trace, &mut paper.doc)?;
    let report = compare(&paper.fact, &bairstow.fact, AGREE_TOL);
    if json {
        bairstow.doc.trace = None;
        let doc = serde_json::json!({
            "paper": paper.doc,
            "bairstow": bairstow.doc,
            "compare": report,
        });
        out.write_all(to_json(&doc)?.as_bytes())?;
    } else {
        write_text(out, &paper.doc)?;
        writeln!(out)?;
        write_text(out, &bairstow.doc)?;
        writeln!(out)?;
        writeln!(
            out,
            "compare: {} (max distance {:e}, tol {:e})",
            if report.equal { "equal" } else { "DIFFERENT" },
            report.max_distance,
            AGREE_TOL
        )?;
        for r in &report.unmatched_linear {
            writeln!(out, "  unmatched root {r}")?;
        }
        for (a, b) in &report.unmatched_quadratic {
            writeln!(out, "  unmatched pair ({a}, {b})")?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_truepair(input: &str, cfg: &Config, json: bool, out: &mut dyn Write) -> Result<i32> {
    let path = Path::new(input);
    let a: Matrix = if path.is_file() {
        match read_input_file(path)? {
            InputFile::Matrix(m) => m,
            InputFile::Coeffs(p) => companion_of(&p)?,
        }
    } else {
        companion_of(&parse_poly(input, 't')?)?
    };
    let (tp, events) = true_pair_traced(&a, cfg)?;
    if json {
        out.write_all(to_json(&tp)?.as_bytes())?;
    } else {
        writeln!(out, "alpha: {}", tp.alpha)?;
        writeln!(out, "beta: {}", tp.beta)?;
        let v: Vec<String> = tp.vector.iter().map(|x| x.to_string()).collect();
        writeln!(out, "vector: [{}]", v.join(", "))?;
        writeln!(out, "residual: {:e}", tp.residual)?;
        writeln!(out, "trace events: {}", events.len())?;
    }
    Ok(EXIT_OK)
}

fn companion_of(p: &Polynomial) -> Result<Matrix> {
    check_factorable(p)?;
    companion(&p.monic())
}

fn cmd_verify(
    poly: &str,
    factors: &Path,
    max_residual: f64,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let p = read_poly(poly)?;
    let text = std::fs::read_to_string(factors)?;
    let doc: FactorsDoc = serde_json::from_str(&text)?;
    let report = verify(&doc.factorization(), &p);
    let ok = report.degree_ok && report.relative_residual <= max_residual;
    if json {
        out.write_all(to_json(&report)?.as_bytes())?;
    } else {
        writeln!(
            out,
            "degree: {} (factors {})",
            report.expected_degree, report.factor_degree
        )?;
        writeln!(
            out,
            "max coefficient difference: {:e}",
            report.max_coeff_diff
        )?;
        writeln!(out, "relative residual: {:e}", report.relative_residual)?;
        writeln!(out, "{}", if ok { "OK" } else { "MISMATCH" })?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_bench(
    degrees: (usize, usize),
    count: usize,
    seed: u64,
    cfg: &Config,
    out: &mut dyn Write,
) -> Result<i32> {
    writeln!(
        out,
        "{:>6} {:>6} {:>8} {:>8} {:>8} {:>8} {:>12} {:>12}",
        "degree", "count", "paper", "limit", "bairst", "agree", "max_res_pap", "max_res_bai"
    )?;
    for deg in degrees.0..=degrees.1 {
        let (mut ok_p, mut limit, mut ok_b, mut agree) = (0, 0, 0, 0);
        let (mut res_p, mut res_b) = (0.0f64, 0.0f64);
        for i in 0..count {
            let s = seed
                .wrapping_mul(1_000_003)
                .wrapping_add((deg * 100_000 + i) as u64);
            let (p, _) = random_poly(&InstanceSpec::for_degree(deg, s))?;
            let paper = match factor_logged(&p, cfg) {
                Ok((f, _)) => Some(refine(&f, &p, cfg)),
                Err(Error::LimitExceeded { .. }) => {
                    limit += 1;
                    None
                }
                Err(_) => None,
            };
            let bai = bairstow_factor(&p, cfg).ok().map(|f| refine(&f, &p, cfg));
            if let Some(f) = &paper {
                ok_p += 1;
                res_p = res_p.max(f.residual);
            }
            if let Some(f) = &bai {
                ok_b += 1;
                res_b = res_b.max(f.residual);
            }
            if let (Some(a), Some(b)) = (&paper, &bai) {
                if compare(a, b, AGREE_TOL).equal {
                    agree += 1;
                }
            }
        }
        writeln!(
            out,
            "{deg:>6} {count:>6} {ok_p:>8} {limit:>8} {ok_b:>8} {agree:>8} {res_p:>12.3e} {res_b:>12.3e}"
        )?;
    }
    Ok(EXIT_OK)
}
