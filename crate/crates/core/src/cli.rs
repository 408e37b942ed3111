//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 internal
//! verification failure, 3 pattern does not hold. With `--json` every
//! command prints one [`OutputRecord`]; big integers are decimal strings.

use std::collections::BTreeMap;
use std::io::Write;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{extract_pattern, trajectory, verify_pattern, DynamicsParams};
use crate::forge::{forge, minimal_witness, segment_boundaries, ForgeError};
use crate::pattern::{Direction, Pattern};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;
pub const EXIT_PATTERN_FALSE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "collatz-pattern",
    version,
    about = "Forge and check odd integers with prescribed Collatz rise/fall run lengths"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct an odd m whose trajectory follows PATTERN.
    Forge {
        /// Comma-separated run lengths, e.g. 1,2,3.
        pattern: Pattern,
        #[arg(long)]
        json: bool,
    },
    /// Check whether m follows PATTERN.
    Verify {
        #[arg(value_parser = parse_decimal)]
        m: BigUint,
        pattern: Pattern,
        #[arg(long)]
        json: bool,
    },
    /// Print a trajectory, its exponents, and its run-length pattern.
    Trace {
        #[arg(value_parser = parse_decimal)]
        m: BigUint,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value = "2", value_parser = parse_decimal)]
        p: BigUint,
        #[arg(long, default_value_t = 2)]
        ell: u32,
        #[arg(long, default_value = "1", value_parser = parse_decimal)]
        r: BigUint,
        #[arg(long)]
        json: bool,
    },
    /// Find the least odd m ≤ BOUND following PATTERN by exhaustive search.
    Minimal {
        pattern: Pattern,
        #[arg(long, default_value_t = 1_000_000)]
        bound: u64,
        #[arg(long)]
        json: bool,
    },
    /// Histogram of leading run direction and length over odd m ≤ MAX_M.
    Scan {
        #[arg(long)]
        max_m: u64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        json: bool,
    },
}

fn parse_decimal(s: &str) -> Result<BigUint, String> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("{s:?} is not a nonnegative decimal integer"));
    }
    BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| format!("cannot parse {s:?}"))
}

#[derive(Debug, Serialize)]
pub struct OutputRecord<I: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: &'static str,
    pub inputs: I,
    pub result: R,
}

fn dec(n: &BigUint) -> String {
    n.to_str_radix(10)
}

fn decs(v: &[BigUint]) -> Vec<String> {
    v.iter().map(dec).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Serialize)]
struct PatternInput {
    pattern: Vec<u32>,
}

#[derive(Serialize)]
struct CertificateOut {
    particular: Vec<String>,
    lifted: Vec<String>,
    shift: String,
}

#[derive(Serialize)]
struct ForgeOut {
    m: String,
    w: Vec<String>,
    boundaries: Vec<String>,
    verified: bool,
    certificate: Option<CertificateOut>,
}

#[derive(Serialize)]
struct VerifyIn {
    m: String,
    pattern: Vec<u32>,
}

#[derive(Serialize)]
struct VerifyOut {
    ok: bool,
    failure_index: Option<u64>,
}

#[derive(Serialize)]
struct TraceIn {
    m: String,
    steps: usize,
    p: String,
    ell: u32,
    r: String,
}

#[derive(Serialize)]
struct ParamsOut {
    p: String,
    ell: u32,
    q: String,
    r: String,
    primality_assumed: bool,
}

#[derive(Serialize)]
struct RleOut {
    leading_direction: Direction,
    runs: Vec<u64>,
    truncated: bool,
}

#[derive(Serialize)]
struct TraceOut {
    params: ParamsOut,
    values: Vec<String>,
    exponents: Vec<u64>,
    reached_fixed_point: bool,
    pattern: RleOut,
}

#[derive(Serialize)]
struct MinimalIn {
    pattern: Vec<u32>,
    bound: String,
}

#[derive(Serialize)]
struct MinimalOut {
    witness: Option<String>,
}

#[derive(Serialize)]
struct ScanIn {
    max_m: String,
    steps: usize,
}

#[derive(Serialize)]
struct HistogramRow {
    direction: Direction,
    first_run: Option<u64>,
    count: u64,
}

#[derive(Serialize)]
struct ScanOut {
    scanned: u64,
    histogram: Vec<HistogramRow>,
}

/// Parses `args` (including the program name) and runs the command,
/// writing the report to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

fn emit<I: Serialize, R: Serialize>(
    out: &mut dyn Write,
    command: &'static str,
    inputs: I,
    result: R,
) -> Result<(), Failure> {
    let record = OutputRecord {
        schema_version: SCHEMA_VERSION,
        command,
        inputs,
        result,
    };
    let text = serde_json::to_string_pretty(&record).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: e.to_string(),
    })?;
    writeln!(out, "{text}").map_err(Failure::usage)
}

fn lines(out: &mut dyn Write, rows: &[(&str, String)]) -> Result<(), Failure> {
    for (k, v) in rows {
        writeln!(out, "{k}: {v}").map_err(Failure::usage)?;
    }
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Forge { pattern, json } => cmd_forge(&pattern, json, out),
        Command::Verify { m, pattern, json } => cmd_verify(&m, &pattern, json, out),
        Command::Trace {
            m,
            steps,
            p,
            ell,
            r,
            json,
        } => cmd_trace(&m, steps, p, ell, r, json, out),
        Command::Minimal {
            pattern,
            bound,
            json,
        } => cmd_minimal(&pattern, bound, json, out),
        Command::Scan { max_m, steps, json } => cmd_scan(max_m, steps, json, out),
    }
}

fn cmd_forge(pattern: &Pattern, json: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let witness = match forge(pattern) {
        Ok(w) => w,
        Err(e @ ForgeError::VerificationFailed { .. }) | Err(e @ ForgeError::Chain(_)) => {
            return Err(Failure {
                code: EXIT_INTERNAL,
                message: e.to_string(),
            })
        }
        Err(e) => return Err(Failure::usage(e)),
    };
    let boundaries = segment_boundaries(&witness).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: e.to_string(),
    })?;
    if json {
        let result = ForgeOut {
            m: dec(&witness.m),
            w: decs(&witness.w),
            boundaries: decs(&boundaries),
            verified: witness.verified,
            certificate: witness.certificate.as_ref().map(|c| CertificateOut {
                particular: c.particular.iter().map(|x| x.to_str_radix(10)).collect(),
                lifted: decs(&c.lifted),
                shift: dec(&c.shift),
            }),
        };
        let inputs = PatternInput {
            pattern: pattern.runs().to_vec(),
        };
        emit(out, "forge", inputs, result)?;
    } else {
        lines(
            out,
            &[
                ("pattern", pattern.to_string()),
                ("m", dec(&witness.m)),
                ("w", join(&decs(&witness.w))),
                ("boundaries", join(&decs(&boundaries))),
                ("verified", witness.verified.to_string()),
            ],
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(
    m: &BigUint,
    pattern: &Pattern,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    if m.bits() == 0 {
        return Err(Failure::usage("m must be ≥ 1"));
    }
    if !m.bit(0) {
        return Err(Failure::usage("m must be odd"));
    }
    let check = verify_pattern(&DynamicsParams::collatz(), m, pattern).map_err(Failure::usage)?;
    if json {
        let inputs = VerifyIn {
            m: dec(m),
            pattern: pattern.runs().to_vec(),
        };
        let result = VerifyOut {
            ok: check.ok,
            failure_index: check.failure_index,
        };
        emit(out, "verify", inputs, result)?;
    } else {
        let mut rows = vec![("ok", check.ok.to_string())];
        if let Some(i) = check.failure_index {
            rows.push(("failure_index", i.to_string()));
        }
        lines(out, &rows)?;
    }
    Ok(if check.ok {
        EXIT_OK
    } else {
        EXIT_PATTERN_FALSE
    })
}

fn cmd_trace(
    m: &BigUint,
    steps: usize,
    p: BigUint,
    ell: u32,
    r: BigUint,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    if steps == 0 {
        return Err(Failure::usage("--steps must be ≥ 1"));
    }
    let inputs = TraceIn {
        m: dec(m),
        steps,
        p: dec(&p),
        ell,
        r: dec(&r),
    };
    let params = DynamicsParams::new(p, ell, r).map_err(Failure::usage)?;
    let traj = trajectory(&params, m, steps).map_err(Failure::usage)?;
    let rle = extract_pattern(&params, m, steps).map_err(Failure::usage)?;
    if json {
        let result = TraceOut {
            params: ParamsOut {
                p: dec(params.p()),
                ell: params.ell(),
                q: dec(params.q()),
                r: dec(params.r()),
                primality_assumed: params.primality_assumed(),
            },
            values: decs(&traj.values),
            exponents: traj.exponents,
            reached_fixed_point: traj.reached_fixed_point,
            pattern: RleOut {
                leading_direction: rle.leading_direction,
                runs: rle.runs,
                truncated: rle.truncated,
            },
        };
        emit(out, "trace", inputs, result)?;
    } else {
        let mut rows = vec![
            ("values", join(&decs(&traj.values))),
            ("exponents", join(&traj.exponents)),
            ("reached_fixed_point", traj.reached_fixed_point.to_string()),
            ("leading_direction", rle.leading_direction.to_string()),
            ("runs", join(&rle.runs)),
            ("truncated", rle.truncated.to_string()),
        ];
        if params.primality_assumed() {
            rows.push(("primality_assumed", "true".to_string()));
        }
        lines(out, &rows)?;
    }
    Ok(EXIT_OK)
}

fn cmd_minimal(
    pattern: &Pattern,
    bound: u64,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    if bound == 0 {
        return Err(Failure::usage("--bound must be ≥ 1"));
    }
    let found = minimal_witness(pattern, bound);
    if json {
        let inputs = MinimalIn {
            pattern: pattern.runs().to_vec(),
            bound: bound.to_string(),
        };
        let result = MinimalOut {
            witness: found.map(|m| m.to_string()),
        };
        emit(out, "minimal", inputs, result)?;
    } else {
        let shown = found.map_or_else(|| "none".to_string(), |m| m.to_string());
        lines(out, &[("pattern", pattern.to_string()), ("witness", shown)])?;
    }
    Ok(EXIT_OK)
}

type HistogramKey = (Direction, Option<u64>);

fn leading_run_histogram(max_m: u64, steps: usize) -> BTreeMap<HistogramKey, u64> {
    let collatz = DynamicsParams::collatz();
    let odd_count = max_m.div_ceil(2);
    (0..odd_count)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<HistogramKey, u64>, k| {
            let m = BigUint::from(2 * k + 1);
            let rle = extract_pattern(&collatz, &m, steps).expect("odd m in domain");
            *acc.entry((rle.leading_direction, rle.runs.first().copied()))
                .or_default() += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        })
}

fn cmd_scan(max_m: u64, steps: usize, json: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    if max_m == 0 {
        return Err(Failure::usage("--max-m must be ≥ 1"));
    }
    if steps == 0 {
        return Err(Failure::usage("--steps must be ≥ 1"));
    }
    let histogram = leading_run_histogram(max_m, steps);
    let scanned = histogram.values().sum();
    if json {
        let inputs = ScanIn {
            max_m: max_m.to_string(),
            steps,
        };
        let result = ScanOut {
            scanned,
            histogram: histogram
                .into_iter()
                .map(|((direction, first_run), count)| HistogramRow {
                    direction,
                    first_run,
                    count,
                })
                .collect(),
        };
        emit(out, "scan", inputs, result)?;
    } else {
        writeln!(out, "scanned: {scanned}").map_err(Failure::usage)?;
        for ((direction, first_run), count) in histogram {
            let run = first_run.map_or_else(|| "-".to_string(), |r| r.to_string());
            writeln!(out, "{direction} {run}: {count}").map_err(Failure::usage)?;
        }
    }
    Ok(EXIT_OK)
}
