//! The `ktree` command line.
//!
//! Every subcommand is deterministic in its flags. Failures print one JSON
//! object `{"error": <kind>, "message": <text>}` on stderr and exit with
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | a verification ran and its verdict is `fail` |
//! | 2 | usage or parse error |
//! | 3 | invalid parameters or `k` |
//! | 4 | precision exhausted |
//! | 5 | size limit |
//! | 6 | I/O error |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::One;
use serde_json::json;

use ktree::exactnum::{parse_exact_rational, QuadReal};
use ktree::indicator::{self, RangeClass};
use ktree::rho::{self, DEFAULT_DIGITS, DEFAULT_SWEEP_ITERS};
use ktree::rows::{self, GoldenParams, RowTable};
use ktree::tree::{self, SliceOptions, DEFAULT_NODE_LIMIT};
use ktree::{Error, Execution, KValue};

#[derive(Parser, Debug)]
#[command(name = "ktree", version, about = "Exact k-descending trees and their row asymptotics")]
pub struct Cli {
    /// Run every computation on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Breadth-first slice of the tree as DOT, text, or JSON.
    Tree {
        /// k-spec: integer, p/q, decimal, quad:(p,q,D,r), golden:a,b, pi, e.
        k: String,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[arg(long, value_enum, default_value_t = TreeFormat::Text)]
        format: TreeFormat,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        node_limit: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Leftmost nodes f_d and row lengths r_d.
    Rows {
        k: String,
        #[arg(long, default_value_t = 10)]
        depth: u32,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[command(flatten)]
        out: OutArg,
    },
    /// Enclosure of c(k) and rho(k); golden:a,b specs also get the closed form.
    Rho {
        k: String,
        #[arg(long, default_value_t = DEFAULT_SWEEP_ITERS)]
        iters: u32,
        #[arg(long, default_value_t = DEFAULT_DIGITS)]
        digits: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Enclosures on an evenly spaced rational grid, as CSV.
    Sweep {
        /// Exact decimal or fraction.
        #[arg(long)]
        kmin: String,
        #[arg(long)]
        kmax: String,
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_SWEEP_ITERS)]
        iters: u32,
        #[arg(long, default_value_t = DEFAULT_DIGITS)]
        digits: u32,
        /// No progress lines on stderr.
        #[arg(long)]
        quiet: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Count indicators and the child-count indicator graph.
    Indicators {
        #[command(subcommand)]
        mode: IndicatorMode,
    },
    /// Recurrence, closed-form rows, and closed-form rho for k^2 = ak + b.
    Verify {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long, default_value_t = 25)]
        depth: u32,
        #[arg(long, default_value_t = 60)]
        iters: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Enclosures of c around k = q/(q-1).
    Josephus {
        #[arg(long)]
        q: u64,
        /// Offsets as exact decimals or fractions; repeatable.
        #[arg(long = "eps", required = true)]
        eps: Vec<String>,
        #[arg(long, default_value_t = 200)]
        iters: u32,
        #[arg(long, default_value_t = 20)]
        digits: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// k = (a + sqrt(a^2 + 4b))/2 over a rectangle of (a, b), with closed rho where known.
    Kvalues {
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        amin: i64,
        #[arg(long, default_value_t = 7, allow_hyphen_values = true)]
        amax: i64,
        #[arg(long, default_value_t = -6, allow_hyphen_values = true)]
        bmin: i64,
        #[arg(long, default_value_t = 8, allow_hyphen_values = true)]
        bmax: i64,
        #[arg(long, default_value_t = 6)]
        digits: u32,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand, Debug)]
enum IndicatorMode {
    /// The lines f_i(x) = {(i - x) b/k} sampled at x = j/resolution.
    Lines {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long, default_value_t = 200)]
        resolution: u64,
        #[arg(long, default_value_t = DEFAULT_DIGITS)]
        digits: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Pairs ({n k}, {c k}) with c the first child of n.
    Scatter {
        k: String,
        #[arg(long, default_value_t = 500)]
        n_max: u64,
        #[arg(long, default_value_t = DEFAULT_DIGITS)]
        digits: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Lines landing in the ceil-range (b >= 0) or floor-range (b < 0).
    Grandparent {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Range class of {n k} and the child count it predicts, n = 1..n_max.
    Classify {
        k: String,
        #[arg(long, default_value_t = 20)]
        n_max: u64,
        #[arg(long, default_value_t = DEFAULT_DIGITS)]
        digits: u32,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct OutArg {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TreeFormat {
    Dot,
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Io(std::io::Error),
    Verdict,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Verdict => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 6,
            Failure::Lib(e) => match e {
                Error::Parse(_) => 2,
                Error::PrecisionExhausted { .. } => 4,
                Error::SizeLimit { .. } => 5,
                _ => 3,
            },
        }
    }

    fn to_json(&self) -> Option<serde_json::Value> {
        let (kind, message) = match self {
            Failure::Verdict => return None,
            Failure::Usage(m) => ("usage", m.clone()),
            Failure::Io(e) => ("io", e.to_string()),
            Failure::Lib(e) => (e.kind(), e.to_string()),
        };
        Some(json!({ "error": kind, "message": message }))
    }
}

type CmdResult = Result<(), Failure>;

struct Ctx<'a> {
    exec: Execution,
    stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, out: &OutArg, text: &str) -> CmdResult {
        match &out.out {
            Some(path) => fs::write(path, text)?,
            None => self.stdout.write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn emit_json(&mut self, out: &OutArg, value: &serde_json::Value) -> CmdResult {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.emit(out, &text)
    }
}

fn parse_k(spec: &str) -> Result<KValue, Error> {
    spec.parse()
}

fn parse_rational(name: &str, s: &str) -> Result<BigRational, Failure> {
    parse_exact_rational(s).map_err(|e| Failure::Usage(format!("--{name}: {e}")))
}

fn golden_from_spec(spec: &str) -> Option<GoldenParams> {
    let rest = spec.trim().strip_prefix("golden:")?;
    let (a, b) = rest.split_once(',')?;
    GoldenParams::new(a.trim().parse().ok()?, b.trim().parse().ok()?).ok()
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let message = e.render().to_string();
            let _ = writeln!(stderr, "{}", json!({ "error": "usage", "message": message.trim_end() }));
            return 2;
        }
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let mut ctx = Ctx { exec, stdout };
    match dispatch(cli.command, &mut ctx) {
        Ok(()) => 0,
        Err(f) => {
            if let Some(j) = f.to_json() {
                let _ = writeln!(stderr, "{j}");
            }
            f.exit_code()
        }
    }
}

fn dispatch(command: Command, ctx: &mut Ctx) -> CmdResult {
    match command {
        Command::Tree { k, depth, format, node_limit, out } => {
            let k = parse_k(&k)?;
            let opts = SliceOptions { node_limit, exec: ctx.exec };
            let slice = tree::build_slice_with(&k, depth, opts)?;
            match format {
                TreeFormat::Dot => ctx.emit(&out, &slice.to_dot()?),
                TreeFormat::Text => ctx.emit(&out, &slice.to_text()?),
                TreeFormat::Json => ctx.emit_json(&out, &slice.to_json()),
            }
        }
        Command::Rows { k, depth, format, out } => {
            let table = RowTable::build(&parse_k(&k)?, depth)?;
            match format {
                TableFormat::Csv => ctx.emit(&out, &table.to_csv()),
                TableFormat::Json => ctx.emit_json(&out, &table.to_json()),
            }
        }
        Command::Rho { k: spec, iters, digits, out } => {
            let k = parse_k(&spec)?;
            let e = rho::enclose_c(&k, iters)?;
            let mut report = e.to_json(digits);
            if let Some(params) = golden_from_spec(&spec) {
                if let Ok(closed) = rho::closed_rho(&params) {
                    report["closed_rho"] = json!(closed.to_spec());
                    report["closed_rho_decimal"] = json!(closed.to_decimal(digits, false));
                    report["closed_rho_contained"] = json!(e.contains_rho(&closed));
                }
            }
            ctx.emit_json(&out, &report)
        }
        Command::Sweep { kmin, kmax, points, iters, digits, quiet, out } => {
            let lo = parse_rational("kmin", &kmin)?;
            let hi = parse_rational("kmax", &kmax)?;
            if lo >= hi {
                return Err(Failure::Usage(format!("--kmin {kmin} must be below --kmax {kmax}")));
            }
            if lo <= BigRational::one() {
                return Err(Failure::Usage(format!("--kmin {kmin} must exceed 1")));
            }
            if points < 2 {
                return Err(Failure::Usage("--points must be at least 2".into()));
            }
            let step = (points / 20).max(1);
            let progress = move |done: usize| {
                if !quiet && (done % step == 0 || done == points) {
                    eprintln!("sweep: {done}/{points}");
                }
            };
            let rows = rho::sweep_with_progress(&lo, &hi, points, iters, ctx.exec, &progress)?;
            ctx.emit(&out, &rho::sweep_csv(&rows, digits))
        }
        Command::Indicators { mode } => indicators(mode, ctx),
        Command::Verify { a, b, depth, iters, out } => verify(a, b, depth, iters, &out, ctx),
        Command::Josephus { q, eps, iters, digits, out } => {
            let eps = eps
                .iter()
                .map(|s| parse_rational("eps", s))
                .collect::<Result<Vec<_>, _>>()?;
            let report = rho::josephus_probe(q, &eps, iters, digits, ctx.exec)?;
            ctx.emit_json(&out, &serde_json::to_value(report).expect("serializable"))
        }
        Command::Kvalues { amin, amax, bmin, bmax, digits, out } => {
            if amin > amax || bmin > bmax {
                return Err(Failure::Usage("empty (a, b) rectangle".into()));
            }
            ctx.emit(&out, &kvalues_csv(amin..=amax, bmin..=bmax, digits))
        }
    }
}

fn indicators(mode: IndicatorMode, ctx: &mut Ctx) -> CmdResult {
    match mode {
        IndicatorMode::Lines { a, b, resolution, digits, out } => {
            let params = GoldenParams::new(a, b)?;
            let samples = indicator::cci_samples(&params, resolution, ctx.exec)?;
            ctx.emit(&out, &indicator::cci_csv(&samples, digits))
        }
        IndicatorMode::Scatter { k, n_max, digits, out } => {
            let k = parse_k(&k)?;
            let points = indicator::indicator_scatter(&k, n_max, ctx.exec)?;
            ctx.emit(&out, &indicator::scatter_csv(&points, &k, digits)?)
        }
        IndicatorMode::Grandparent { a, b, samples, out } => {
            if samples == 0 {
                return Err(Failure::Usage("--samples must be positive".into()));
            }
            let params = GoldenParams::new(a, b)?;
            let mut grid = indicator::sample_grid(samples);
            grid.extend(indicator::boundary_probes(&params, 12));
            let report = indicator::grandparent_count(&params, &grid, ctx.exec)?;
            let verdict = report.verdict;
            let mut value = serde_json::to_value(&report).expect("serializable");
            value["samples"] = json!(grid.iter().map(QuadReal::to_spec).collect::<Vec<_>>());
            ctx.emit_json(&out, &value)?;
            if verdict {
                Ok(())
            } else {
                Err(Failure::Verdict)
            }
        }
        IndicatorMode::Classify { k, n_max, digits, out } => {
            let k = parse_k(&k)?;
            let mut text = String::from("n,x,range_class,h_predicted,h_actual\n");
            for n in 1..=n_max {
                let n = n.into();
                let x = indicator::count_indicator(&n, &k)?;
                let class = indicator::classify(&x, &k)?;
                let predicted = match class {
                    RangeClass::Floor => k.floor()?,
                    RangeClass::Ceil => k.ceil()?,
                };
                let actual = tree::children(&n, &k)?.len();
                text.push_str(&format!(
                    "{n},{},{class},{predicted},{actual}\n",
                    x.to_decimal(digits, false)
                ));
            }
            ctx.emit(&out, &text)
        }
    }
}

fn verify(a: i64, b: i64, depth: u32, iters: u32, out: &OutArg, ctx: &mut Ctx) -> CmdResult {
    let params = GoldenParams::new(a, b)?;
    let recurrence = rows::verify_recurrence(&params, depth)?;
    let mut first_mismatch = None;
    for (d, r) in recurrence.rows.iter().enumerate() {
        if &rows::closed_form_row(&params, d as u32)? != r {
            first_mismatch = Some(d);
            break;
        }
    }
    let closed = rho::closed_rho(&params)?;
    let enclosure = rho::enclose_c(&params.k(), iters)?;
    let contained = enclosure.contains_rho(&closed);
    let pass = recurrence.holds && first_mismatch.is_none() && contained;
    let report = json!({
        "a": a,
        "b": b,
        "k": params.k().to_string(),
        "depth": depth,
        "recurrence": recurrence,
        "closed_form_rows": {
            "matches": first_mismatch.is_none(),
            "first_mismatch": first_mismatch,
        },
        "closed_rho": {
            "value": closed.to_spec(),
            "decimal": closed.to_decimal(DEFAULT_DIGITS, false),
            "enclosure": enclosure.to_json(DEFAULT_DIGITS),
            "contained": contained,
            "strictly_contained": enclosure.strictly_contains_rho(&closed),
        },
        "verdict": if pass { "pass" } else { "fail" },
    });
    ctx.emit_json(out, &report)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

/// Columns `a,b,discriminant,k,k_decimal,recurrence_range,closed_rho,closed_rho_decimal`;
/// `k` is blank where `a² + 4b < 0`.
fn kvalues_csv(
    a_range: std::ops::RangeInclusive<i64>,
    b_range: std::ops::RangeInclusive<i64>,
    digits: u32,
) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(vec![]);
    w.write_record([
        "a",
        "b",
        "discriminant",
        "k",
        "k_decimal",
        "recurrence_range",
        "closed_rho",
        "closed_rho_decimal",
    ])
    .expect("in-memory write");
    for a in a_range {
        for b in b_range.clone() {
            let disc = a as i128 * a as i128 + 4 * b as i128;
            let mut cols = vec![a.to_string(), b.to_string(), disc.to_string()];
            // a ≤ 0 is outside the parameter family but still has a root.
            let k = u64::try_from(disc)
                .ok()
                .map(|d| QuadReal::new(a.into(), 1.into(), d, 2.into()));
            match &k {
                Some(k) => cols.extend([k.to_spec(), k.to_decimal(digits, false)]),
                None => cols.extend([String::new(), String::new()]),
            }
            let closed = GoldenParams::new(a, b)
                .ok()
                .filter(|p| p.check_recurrence_range().is_ok())
                .and_then(|p| rho::closed_rho(&p).ok());
            cols.push(closed.is_some().to_string());
            match closed {
                Some(r) => cols.extend([r.to_spec(), r.to_decimal(digits, false)]),
                None => cols.extend([String::new(), String::new()]),
            }
            w.write_record(&cols).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
