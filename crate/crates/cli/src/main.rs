//! Command-line frontend for the theta-expansion toolkit.
//!
//! Every subcommand is deterministic given its full flag set (seed
//! included); JSON outputs carry a schema version and the flags that
//! produced them. Exit codes: 0 success/PASS, 1 verification FAIL,
//! 2 usage error, 3 resource budget exceeded.

use std::fmt::Write as _;
use std::io::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::json;

use thetacf_core::bounds::{self, VerifyMode};
use thetacf_core::error::Error;
use thetacf_core::expansion::{self, DigitSeq};
use thetacf_core::extremes::{self, EtaSpec, Filler};
use thetacf_core::highprec::{ExpandStatus, RealExpander};
use thetacf_core::intervals;
use thetacf_core::measure::{self, InvarianceOptions, MeasureParams};
use thetacf_core::quad::QuadValue;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "thetacf", version, about = "theta-expansion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SideArg {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Args, Serialize)]
struct OutputOpts {
    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to a file instead of stdout
    #[arg(long)]
    output: Option<String>,
    /// Worker threads (default: THETACF_THREADS or 1); results do not
    /// depend on it
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a point into theta-expansion digits and convergents
    Expand {
        /// Modulus: theta^2 = 1/m
        #[arg(long)]
        m: u64,
        /// The point: `p/q`, `a+b*theta` (rational a, b), `theta`, or a
        /// decimal like `0.397078` (decimals run in high-precision mode)
        #[arg(long)]
        x: String,
        /// Maximum number of digits
        #[arg(long, default_value_t = 30)]
        count: usize,
        /// Working precision in decimal digits for high-precision mode
        #[arg(long, default_value_t = 200)]
        precision: usize,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Closed-form dimension bounds for bounded-digit sets
    Bounds {
        /// Preset pair list: `table41` or `table42`
        #[arg(long, conflicts_with_all = ["m", "big_m", "pairs"])]
        preset: Option<String>,
        #[arg(long, requires = "big_m")]
        m: Option<u64>,
        #[arg(long = "M", requires = "m")]
        big_m: Option<u64>,
        /// Explicit pair list `m:M[,m:M...]`
        #[arg(long)]
        pairs: Option<String>,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Verify a covering condition at a given s (defaults to the matching
    /// closed form); exits 1 when violations are found
    Verify {
        #[arg(long)]
        m: u64,
        #[arg(long = "M")]
        big_m: u64,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: ModeArg,
        /// Sample size for sampled mode
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Finite-depth covering-sum dimension estimate
    Estimate {
        #[arg(long)]
        m: u64,
        #[arg(long = "M")]
        big_m: u64,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Build an extreme-value stream and emit its rescaled max series
    Construct {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        m: u64,
        #[arg(long = "M")]
        big_m: u64,
        #[arg(long)]
        n_max: u64,
        /// Filler digit policy: `const:K` or `random`
        #[arg(long, default_value = "const:m")]
        filler: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit every k-th row of the CSV series
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Monte Carlo exploration of the liminf law
    Liminf {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n_max: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Numerical check of the invariance of the measure
    MeasureCheck {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        depth: usize,
        /// Fundamental intervals use digits in [m, m+cutoff]
        #[arg(long, default_value_t = 3)]
        cutoff: u64,
        /// Explicitly summed preimage branches
        #[arg(long, default_value_t = 1_000_000)]
        branches: u64,
        #[command(flatten)]
        out: OutputOpts,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } => 3,
                _ => 2,
            }
        }
    };
    std::process::exit(code);
}

fn emit(out: &OutputOpts, text: &str) -> Result<(), Error> {
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            Error::InvalidParameter(format!("cannot write {path}: {e}"))
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).expect("stdout");
        }
    }
    Ok(())
}

fn envelope(command: &str, flags: serde_json::Value, result: serde_json::Value) -> String {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "flags": flags,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

fn threads_of(out: &OutputOpts) -> usize {
    out.threads
        .or_else(|| {
            std::env::var("THETACF_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1)
        .max(1)
}

/// Parses `p/q`, an integer, or a plain decimal into an exact rational.
fn parse_rational(text: &str) -> Result<BigRational, Error> {
    let bad = |_| Error::InvalidParameter(format!("cannot parse rational `{text}`"));
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(bad)?;
        let d: BigInt = den.trim().parse().map_err(bad)?;
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        let neg = int_part.trim_start().starts_with('-');
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        let i: BigInt = int_part.trim().parse().map_err(bad)?;
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidParameter(format!(
                "cannot parse decimal `{text}`"
            )));
        }
        let f: BigInt = frac_part.parse().map_err(bad)?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = BigRational::new(f, scale);
        let whole = BigRational::from_integer(i);
        return Ok(if neg { whole - frac } else { whole + frac });
    }
    let n: BigInt = text.trim().parse().map_err(bad)?;
    Ok(BigRational::from_integer(n))
}

enum PointSpec {
    /// Exact element of Q(1/sqrt(m)).
    Exact(QuadValue),
    /// Decimal input: exact rational, but expanded in high-precision mode.
    Decimal(BigRational),
}

/// Accepts `p/q`, `a+b*theta`, `a-b*theta`, `b*theta`, `theta`, or a
/// decimal string.
fn parse_point(text: &str, m: u64) -> Result<PointSpec, Error> {
    let t = text.trim();
    if t.contains("theta") {
        // split into rational part and theta coefficient; a leading sign
        // belongs to a, so look for the splitting sign after position 0
        let split = t[1..].find(['+', '-']).map(|i| i + 1);
        let (a_str, b_str) = match split {
            Some(i) if t[i..].contains("theta") => (&t[..i], &t[i..]),
            _ => ("0", t),
        };
        let b_str = b_str.trim();
        let (sign, b_core) = match b_str.strip_prefix('-') {
            Some(rest) => (-1i64, rest.trim()),
            None => (1, b_str.strip_prefix('+').unwrap_or(b_str).trim()),
        };
        let b_core = b_core
            .strip_suffix("theta")
            .map(|s| s.trim().strip_suffix('*').unwrap_or(s.trim()).trim())
            .ok_or_else(|| Error::InvalidParameter(format!("cannot parse `{text}`")))?;
        let b = if b_core.is_empty() {
            BigRational::one()
        } else {
            parse_rational(b_core)?
        } * BigRational::from_integer(BigInt::from(sign));
        let a = parse_rational(a_str.trim())?;
        return Ok(PointSpec::Exact(QuadValue::new(a, b, m)?));
    }
    if t.contains('.') {
        return Ok(PointSpec::Decimal(parse_rational(t)?));
    }
    let r = parse_rational(t)?;
    Ok(PointSpec::Exact(QuadValue::new(
        r,
        BigRational::zero(),
        m,
    )?))
}

#[derive(Serialize)]
struct ConvergentOut {
    n: usize,
    p: String,
    q: String,
    value: String,
}

fn convergents_of(word: &DigitSeq) -> Result<Vec<ConvergentOut>, Error> {
    let mut rows = Vec::new();
    for pair in expansion::convergents(word) {
        let value = pair.p.div(&pair.q)?.to_decimal(12)?;
        rows.push(ConvergentOut {
            n: pair.n,
            p: pair.p.to_string(),
            q: pair.q.to_string(),
            value,
        });
    }
    Ok(rows)
}

fn run(command: Command) -> Result<i32, Error> {
    match command {
        Command::Expand {
            m,
            x,
            count,
            precision,
            out,
        } => {
            let point = parse_point(&x, m)?;
            let (word, terminated, mode) = match point {
                PointSpec::Exact(v) => {
                    let word = expansion::expand(&v, count)?;
                    let terminated = word.is_finite();
                    (word, terminated, "exact")
                }
                PointSpec::Decimal(r) => {
                    let bits = (precision as f64 * 3.33) as u64 + 64;
                    let mut expander = RealExpander::from_rational(m, &r, bits)?;
                    let (word, status) = expander.expand(count)?;
                    (word, status == ExpandStatus::Terminated, "high-precision")
                }
            };
            let convergents = convergents_of(&word)?;
            let flags = json!({
                "m": m, "x": x, "count": count, "precision": precision,
            });
            let text = match out.format {
                Format::Json => envelope(
                    "expand",
                    flags,
                    json!({
                        "mode": mode,
                        "digits": word.digits(),
                        "terminated": terminated,
                        "convergents": convergents,
                    }),
                ),
                Format::Csv => {
                    let mut s = String::from("n,digit,p,q,value\n");
                    for (c, d) in convergents.iter().zip(word.digits()) {
                        writeln!(s, "{},{},{},{},{}", c.n, d, c.p, c.q, c.value)
                            .expect("string write");
                    }
                    s
                }
            };
            emit(&out, &text)?;
            Ok(0)
        }

        Command::Bounds {
            preset,
            m,
            big_m,
            pairs,
            out,
        } => {
            let specs: Vec<(u64, u64)> = if let Some(p) = &preset {
                match p.as_str() {
                    "table41" => bounds::TABLE41_SPECS.to_vec(),
                    "table42" => bounds::TABLE42_SPECS.to_vec(),
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown preset `{other}` (expected table41 or table42)"
                        )))
                    }
                }
            } else if let Some(pairs) = &pairs {
                pairs
                    .split(',')
                    .map(|chunk| {
                        let (a, b) = chunk.split_once(':').ok_or_else(|| {
                            Error::InvalidParameter(format!("bad pair `{chunk}`"))
                        })?;
                        let m = a.trim().parse().map_err(|_| {
                            Error::InvalidParameter(format!("bad m in `{chunk}`"))
                        })?;
                        let mm = b.trim().parse().map_err(|_| {
                            Error::InvalidParameter(format!("bad M in `{chunk}`"))
                        })?;
                        Ok((m, mm))
                    })
                    .collect::<Result<_, Error>>()?
            } else if let (Some(m), Some(big_m)) = (m, big_m) {
                vec![(m, big_m)]
            } else {
                return Err(Error::InvalidParameter(
                    "need --preset, --pairs, or --m with --M".to_string(),
                ));
            };
            let rows = bounds::bounds_table(&specs)?;
            let flags = json!({
                "preset": preset, "m": m, "M": big_m, "pairs": pairs,
            });
            let text = match out.format {
                Format::Csv => bounds::bounds_rows_to_csv(&rows),
                Format::Json => envelope("bounds", flags, serde_json::to_value(&rows).unwrap()),
            };
            emit(&out, &text)?;
            Ok(0)
        }

        Command::Verify {
            m,
            big_m,
            side,
            s,
            depth,
            mode,
            samples,
            seed,
            out,
        } => {
            let s_val = match (s, side) {
                (Some(v), _) => v,
                (None, SideArg::Lower) => bounds::s_lower(m, big_m)?,
                (None, SideArg::Upper) => bounds::s_upper(m, big_m)?,
            };
            let vmode = match mode {
                ModeArg::Exhaustive => VerifyMode::Exhaustive,
                ModeArg::Sampled => VerifyMode::Sampled {
                    size: samples,
                    seed,
                },
            };
            let report = match side {
                SideArg::Lower => bounds::verify_lower_condition(s_val, m, big_m, depth, vmode)?,
                SideArg::Upper => bounds::verify_upper_condition(s_val, m, big_m, depth, vmode)?,
            };
            let verdict = if report.passed() { "PASS" } else { "FAIL" };
            let flags = json!({
                "m": m, "M": big_m, "side": side, "s": s_val, "depth": depth,
                "mode": mode, "samples": samples, "seed": seed,
            });
            let text = match out.format {
                Format::Json => envelope(
                    "verify",
                    flags,
                    json!({
                        "verdict": verdict,
                        "report": serde_json::to_value(&report).unwrap(),
                    }),
                ),
                Format::Csv => format!(
                    "{}\n{}\n",
                    bounds::CoverReport::csv_header(),
                    report.to_csv_row()
                ),
            };
            emit(&out, &text)?;
            eprintln!(
                "verify {side:?} s={s_val} depth={depth}: {verdict} \
                 ({} prefixes, {} violations, worst ratio {})",
                report.prefixes_checked, report.violations, report.worst_ratio
            );
            Ok(if report.passed() { 0 } else { 1 })
        }

        Command::Estimate {
            m,
            big_m,
            depth,
            tol,
            out,
        } => {
            let est = bounds::estimate_dimension(m, big_m, depth, tol)?;
            let flags = json!({"m": m, "M": big_m, "depth": depth, "tol": tol});
            let text = match out.format {
                Format::Json => {
                    envelope("estimate", flags, serde_json::to_value(&est).unwrap())
                }
                Format::Csv => {
                    let (lo, up) = est
                        .closed_form
                        .map(|(a, b)| (format!("{a}"), format!("{b}")))
                        .unwrap_or_default();
                    format!(
                        "m,M,depth,tol,s_star,bracket_lo,bracket_hi,s_lower,s_upper\n\
                         {m},{big_m},{depth},{tol},{},{},{},{lo},{up}\n",
                        est.s_star, est.bracket.0, est.bracket.1
                    )
                }
            };
            emit(&out, &text)?;
            Ok(0)
        }

        Command::Construct {
            eta,
            m,
            big_m,
            n_max,
            filler,
            seed,
            stride,
            out,
        } => {
            let spec = EtaSpec::new(eta, m, big_m)?;
            let filler_policy = match filler.as_str() {
                "random" => Filler::Random { seed },
                "const:m" => Filler::Constant(m),
                other => match other.strip_prefix("const:") {
                    Some(v) => Filler::Constant(v.parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad filler `{filler}`"))
                    })?),
                    None => {
                        return Err(Error::InvalidParameter(format!(
                            "bad filler `{filler}` (expected const:K or random)"
                        )))
                    }
                },
            };
            let stream = extremes::construct_eta_stream(&spec, filler_policy)?;
            let series = extremes::ratio_series(stream, m, n_max)?;
            let k0 = spec.k0()?;
            let flags = json!({
                "eta": eta, "m": m, "M": big_m, "n_max": n_max,
                "filler": filler, "seed": seed, "stride": stride,
            });
            let text = match out.format {
                Format::Csv => series.to_csv(stride),
                Format::Json => {
                    let final_ratio = series.ratio_at(n_max).unwrap();
                    envelope(
                        "construct",
                        flags,
                        json!({
                            "k0": k0,
                            "n0": spec.n0()?,
                            "pre_asymptotic_until": series.pre_asymptotic_until,
                            "final_ratio": final_ratio,
                            "final_running_min": series.running_min.last(),
                        }),
                    )
                }
            };
            emit(&out, &text)?;
            Ok(0)
        }

        Command::Liminf {
            m,
            n_max,
            trials,
            seed,
            out,
        } => {
            let threads = threads_of(&out);
            let summary = extremes::liminf_monte_carlo(m, n_max, trials, seed, threads)?;
            let flags = json!({
                "m": m, "n_max": n_max, "trials": trials, "seed": seed,
            });
            let text = match out.format {
                Format::Csv => summary.to_csv(),
                Format::Json => {
                    envelope("liminf", flags, serde_json::to_value(&summary).unwrap())
                }
            };
            emit(&out, &text)?;
            Ok(0)
        }

        Command::MeasureCheck {
            m,
            depth,
            cutoff,
            branches,
            out,
        } => {
            let params = MeasureParams::new(m)?;
            let opts = InvarianceOptions {
                cutoff,
                max_branches: branches,
                branch_floor: 1e-14,
            };
            let disc = measure::check_invariance_with(&params, depth, &opts)?;
            let norm_gap = (measure::cdf(params.theta(), &params)? - 1.0).abs();
            // a few interval measures for orientation
            let first_cyl = intervals::interval(&DigitSeq::prefix(m, vec![m])?)?;
            let first_mass = measure::measure_of_interval(
                first_cyl.left.to_f64(),
                first_cyl.right.to_f64(),
                &params,
            )?;
            let flags = json!({
                "m": m, "depth": depth, "cutoff": cutoff, "branches": branches,
            });
            let text = match out.format {
                Format::Json => envelope(
                    "measure-check",
                    flags,
                    json!({
                        "max_discrepancy": disc,
                        "normalization_gap": norm_gap,
                        "first_cylinder_mass": first_mass,
                    }),
                ),
                Format::Csv => format!(
                    "m,depth,cutoff,branches,max_discrepancy,normalization_gap\n\
                     {m},{depth},{cutoff},{branches},{disc},{norm_gap}\n"
                ),
            };
            emit(&out, &text)?;
            Ok(0)
        }
    }
}
