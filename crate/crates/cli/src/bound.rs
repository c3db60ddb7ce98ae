use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use pebms::{
    banach_tail_bound, kannan_step_bound, modkannan_bounds, modkannan_step_bound, IterationTrace,
    Space, SpaceDoc,
};
use serde::Serialize;
use serde_json::json;

use crate::input::load_space;
use crate::{envelope, Common, Done, Format, EXIT_MATH, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Banach,
    Kannan,
    Modkannan,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Trace CSV written by `solve --trace`.
    pub trace: PathBuf,
    /// Space the trace was produced in (JSON file or gallery:<id>).
    #[arg(long)]
    pub space: String,
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    #[arg(long)]
    pub k: f64,
    /// Evaluate at this n only; otherwise every admissible index is checked.
    #[arg(long)]
    pub n: Option<usize>,
    /// Second index for the Banach tail and modified Kannan window bounds.
    #[arg(long)]
    pub m: Option<usize>,
    /// Relative slack allowed when comparing observed values with bounds.
    #[arg(long, default_value_t = 1e-12)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// What `observed` measures, e.g. `p(x_n,x_m)`.
    pub quantity: &'static str,
    pub observed: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Serialize)]
struct BoundReport {
    passed: bool,
    rows_checked: usize,
    violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    window_bound: Option<f64>,
    rows: Vec<BoundRow>,
}

fn row(
    n: usize,
    m: Option<usize>,
    quantity: &'static str,
    observed: f64,
    bound: f64,
    rel: f64,
) -> BoundRow {
    BoundRow {
        n,
        m,
        quantity,
        observed,
        bound,
        holds: observed <= bound + rel * bound.abs(),
    }
}

fn evaluate<S: Space>(space: &S, csv: &str, args: &BoundArgs) -> Result<BoundReport> {
    let trace = IterationTrace::<S::Point>::from_csv(csv)?;
    let xs = trace.points();
    if xs.len() < 2 {
        bail!("trace needs at least 2 rows, has {}", xs.len());
    }
    let (k, rel) = (args.k, args.rel_tol);
    let mut rows = Vec::new();
    let mut window_bound = None;
    match args.kind {
        BoundKind::Banach => {
            let pairs: Vec<(usize, usize)> = match (args.n, args.m) {
                (Some(n), Some(m)) => vec![(n, m)],
                (None, None) => (0..xs.len())
                    .flat_map(|m| (0..m).map(move |n| (n, m)))
                    .collect(),
                _ => bail!("banach needs both --n and --m, or neither"),
            };
            for (n, m) in pairs {
                let b = banach_tail_bound(space, xs, k, n, m)?;
                rows.push(row(
                    n,
                    Some(m),
                    "p(x_n,x_m)",
                    space.p(xs[n], xs[m])?,
                    b.value,
                    rel,
                ));
            }
        }
        BoundKind::Kannan => {
            let p01 = trace.rows[0].step_dist;
            let ns: Vec<usize> = args
                .n
                .map_or_else(|| (0..trace.rows.len()).collect(), |n| vec![n]);
            for n in ns {
                let Some(r) = trace.rows.get(n) else {
                    bail!("n = {n} is past the trace end ({} rows)", trace.rows.len());
                };
                rows.push(row(
                    n,
                    None,
                    "p(x_n,x_n+1)",
                    r.step_dist,
                    kannan_step_bound(k, n, p01)?,
                    rel,
                ));
            }
        }
        BoundKind::Modkannan => {
            let ns: Vec<usize> = args
                .n
                .map_or_else(|| (0..xs.len() - 1).collect(), |n| vec![n]);
            for n in ns {
                if n + 1 >= xs.len() {
                    bail!("n = {n} needs x_(n+1); trace has {} points", xs.len());
                }
                let b = modkannan_step_bound(space, xs, k, n)?;
                rows.push(row(
                    n,
                    None,
                    "p(x_n+1,x_n)",
                    space.p(xs[n + 1], xs[n])?,
                    b,
                    rel,
                ));
            }
            if let (Some(n), Some(m)) = (args.n, args.m) {
                window_bound = Some(modkannan_bounds(space, xs, k, n, m)?.window_bound);
            }
        }
    }
    let violations = rows.iter().filter(|r| !r.holds).count();
    Ok(BoundReport {
        passed: violations == 0,
        rows_checked: rows.len(),
        violations,
        window_bound,
        rows,
    })
}

pub fn run(args: BoundArgs) -> Result<Done> {
    let loaded = load_space(&args.space)?;
    let bytes = fs::read(&args.trace)
        .with_context(|| format!("cannot read trace {}", args.trace.display()))?;
    let csv = String::from_utf8(bytes.clone()).context("trace is not UTF-8")?;
    let report = match &loaded.doc {
        SpaceDoc::Finite(s) => evaluate(s, &csv, &args)?,
        SpaceDoc::Analytic(s) => evaluate(s, &csv, &args)?,
    };
    let code = if report.passed { EXIT_OK } else { EXIT_MATH };
    let stdout = match args.common.format {
        Format::Json => {
            let config = json!({
                "subcommand": "bound",
                "trace": args.trace.display().to_string(),
                "space": args.space,
                "kind": args.kind,
                "k": args.k,
                "n": args.n,
                "m": args.m,
                "rel_tol": args.rel_tol,
                "format": args.common.format,
            });
            let mut digest_input = loaded.digest.into_bytes();
            digest_input.extend_from_slice(&bytes);
            envelope::to_text(&envelope::wrap(
                "bound",
                config,
                &envelope::sha256_hex(&digest_input),
                &report,
            ))
        }
        Format::Csv => {
            let mut out = String::from("n,m,quantity,observed,bound,holds\n");
            for r in &report.rows {
                let m = r.m.map(|m| m.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{m},{},{},{},{}",
                    r.n, r.quantity, r.observed, r.bound, r.holds
                );
            }
            out
        }
        Format::Text => {
            let mut out = format!(
                "{:?} bound: {} ({} of {} rows violate)\n",
                args.kind,
                if report.passed { "holds" } else { "fails" },
                report.violations,
                report.rows_checked
            );
            if let Some(w) = report.window_bound {
                let _ = writeln!(out, "window bound {w}");
            }
            for r in report.rows.iter().filter(|r| !r.holds) {
                let _ = writeln!(
                    out,
                    "  n={} m={:?} {} = {} > {}",
                    r.n, r.m, r.quantity, r.observed, r.bound
                );
            }
            out
        }
    };
    Ok(Done { stdout, code })
}
