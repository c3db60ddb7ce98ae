use std::fmt::{Display, Write as _};
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use pebms::axioms::{check_axioms, check_axioms_sampled, AxiomReport};
use pebms::fixed_point::{Outcome, Precondition};
use pebms::gallery::GalleryMap;
use pebms::{
    picard_solve, uniqueness_probe, verify_contraction, verify_theta_condition, AnalyticMap,
    AxiomProfile, ContractionSpec, EvidenceMode, Family, FiniteMap, SelfMap, Space, SpaceDoc,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{load_space, resolve_profile};
use crate::{envelope, Common, Done, Format, EXIT_MATH, EXIT_NO_CONVERGENCE, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Banach,
    Kannan,
    ModifiedKannan,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Banach => Family::Banach,
            FamilyArg::Kannan => Family::Kannan,
            FamilyArg::ModifiedKannan => Family::ModifiedKannan,
        }
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Space JSON file, or gallery:<id>.
    pub space: String,
    /// Self-map: an expression in x for analytic spaces, or a comma-separated
    /// index table for finite spaces.
    #[arg(long)]
    pub map: Option<String>,
    /// Contraction family whose preconditions are verified.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Contraction constant.
    #[arg(long)]
    pub k: Option<f64>,
    /// Start point (a coordinate, or an index for finite spaces).
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Grid points for sampled preconditions on analytic spaces.
    #[arg(long, default_value_t = 41)]
    pub grid_n: usize,
    /// Orbit horizon for the Banach control-function surrogate.
    #[arg(long, default_value_t = 40)]
    pub horizon: usize,
    /// Axiom profile checked as a precondition; defaults to the declared one.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub s: Option<f64>,
    /// Comma-separated starts for a uniqueness probe.
    #[arg(long)]
    pub starts: Option<String>,
    /// Write the iteration trace CSV here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the certificate JSON here.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

fn parse_points<P: FromStr>(list: &str) -> Result<Vec<P>> {
    list.split(',')
        .map(|t| {
            t.trim()
                .parse::<P>()
                .map_err(|_| anyhow!("cannot parse start point {t:?}"))
        })
        .collect()
}

fn parse_point<P: FromStr>(text: &str) -> Result<P> {
    text.trim()
        .parse::<P>()
        .map_err(|_| anyhow!("cannot parse x0 {text:?}"))
}

fn axiom_precondition(report: &AxiomReport) -> Precondition {
    let detail = match report.violations.first() {
        None => format!("{} checks pass", report.checks_run),
        Some(v) => format!(
            "{} violations; first {} at {:?}: lhs {} rhs {}",
            report.violations.len(),
            v.axiom.as_str(),
            v.coords
                .clone()
                .map_or_else(|| format!("{:?}", v.witness), |c| format!("{c:?}")),
            v.lhs,
            v.rhs
        ),
    };
    Precondition {
        name: format!("axioms_{}", report.profile.tag()),
        verified: report.passed(),
        detail,
        mode: if report.grid_relative {
            EvidenceMode::Sampled
        } else {
            EvidenceMode::Exhaustive
        },
    }
}

struct SolveOut {
    report: Value,
    trace_csv: String,
    certificate: Value,
    text: String,
    code: u8,
}

#[derive(Serialize)]
struct SolveReport<'a, P: Serialize> {
    preconditions: &'a [Precondition],
    outcome: &'a Outcome<P>,
    trace_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    uniqueness: Option<Value>,
}

#[allow(clippy::too_many_arguments)]
fn solve_in<S, M>(
    space: &S,
    map: &M,
    x0: S::Point,
    spec: Option<ContractionSpec>,
    axioms: Precondition,
    starts: Option<Vec<S::Point>>,
    args: &SolveArgs,
) -> Result<SolveOut>
where
    S: Space,
    M: SelfMap<S::Point> + Sync,
{
    let mut preconditions = vec![axioms];
    if let Some(spec) = spec {
        let sample = space.sample(args.grid_n);
        preconditions.push(verify_contraction(space, map, spec, &sample)?.precondition());
        preconditions.push(
            verify_theta_condition(space, map, spec, x0, args.horizon, &sample)?.precondition(),
        );
    }
    let mut run = picard_solve(space, map, x0, args.tol, args.max_iter, spec)?;
    let probe = match &starts {
        Some(s) => Some(uniqueness_probe(space, map, s, args.tol, args.max_iter)?),
        None => None,
    };
    if let Outcome::Converged(c) = &mut run.outcome {
        c.preconditions = preconditions.clone();
        c.unique_within_starts = probe.as_ref().map(|p| p.passed);
    }
    let all_verified =
        preconditions.iter().all(|p| p.verified) && probe.as_ref().is_none_or(|p| p.passed);
    let code = if !run.converged() {
        EXIT_NO_CONVERGENCE
    } else if !all_verified {
        EXIT_MATH
    } else {
        EXIT_OK
    };
    for p in preconditions.iter().filter(|p| !p.verified) {
        eprintln!(
            "warning: precondition {} not verified: {}",
            p.name, p.detail
        );
    }
    if let Some(p) = probe.as_ref().filter(|p| !p.passed) {
        eprintln!("warning: uniqueness probe failed: {}", p.detail);
    }
    let mut text = String::new();
    for p in &preconditions {
        let _ = writeln!(
            text,
            "{:<32} {:<5} [{}] {}",
            p.name,
            if p.verified { "ok" } else { "FAIL" },
            if p.mode == EvidenceMode::Exhaustive {
                "exhaustive"
            } else {
                "sampled"
            },
            p.detail
        );
    }
    match &run.outcome {
        Outcome::Converged(c) => {
            let _ = writeln!(
                text,
                "converged: u = {} after {} iterations, residual {}, self distance {}",
                c.fixed_point, c.iterations, c.residual, c.self_distance
            );
        }
        Outcome::Exhausted {
            iterations,
            final_step_dist,
            last,
        } => {
            let _ = writeln!(
                text,
                "no convergence after {iterations} iterations: last x = {last}, step distance {final_step_dist}"
            );
        }
    }
    if let Some(p) = &probe {
        let _ = writeln!(text, "uniqueness: {}", p.detail);
    }
    let report = serde_json::to_value(SolveReport {
        preconditions: &preconditions,
        outcome: &run.outcome,
        trace_rows: run.trace.len(),
        uniqueness: probe
            .as_ref()
            .map(|p| serde_json::to_value(p).expect("serializes")),
    })?;
    Ok(SolveOut {
        report,
        trace_csv: run.trace.to_csv(),
        certificate: serde_json::to_value(&run.outcome)?,
        text,
        code,
    })
}

fn finite_table(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad map table entry {t:?}"))
        })
        .collect()
}

fn display_opt<T: Display>(v: &Option<T>) -> Value {
    v.as_ref().map_or(Value::Null, |v| json!(v.to_string()))
}

pub fn run(args: SolveArgs) -> Result<Done> {
    let loaded = load_space(&args.space)?;
    let profile: AxiomProfile = resolve_profile(&loaded, args.profile.as_deref(), args.s)?;
    let entry = loaded.entry.as_ref();

    let spec = match (args.family, args.k) {
        (Some(f), Some(k)) => Some(ContractionSpec::new(f.into(), k)?),
        (None, None) => entry.and_then(|e| e.contraction),
        _ => bail!("--family and --k must be given together"),
    };
    let x0_text = match (&args.x0, entry) {
        (Some(x), _) => x.clone(),
        (None, Some(e)) if e.map.is_some() => e.x0.to_string(),
        _ => bail!("--x0 is required"),
    };

    let out = match &loaded.doc {
        SpaceDoc::Analytic(space) => {
            let map = match (&args.map, entry.and_then(|e| e.map.as_ref())) {
                (Some(src), _) => AnalyticMap::parse(src, space)?,
                (None, Some(GalleryMap::Analytic(m))) => m.clone(),
                _ => bail!("--map is required"),
            };
            let axioms = check_axioms_sampled(space, args.grid_n, profile)?;
            let starts = args
                .starts
                .as_deref()
                .map(parse_points::<f64>)
                .transpose()?;
            solve_in(
                space,
                &map,
                parse_point(&x0_text)?,
                spec,
                axiom_precondition(&axioms),
                starts,
                &args,
            )?
        }
        SpaceDoc::Finite(space) => {
            let map = match (&args.map, entry.and_then(|e| e.map.as_ref())) {
                (Some(src), _) => FiniteMap::new(finite_table(src)?, space)?,
                (None, Some(GalleryMap::Finite(m))) => m.clone(),
                _ => bail!("--map is required"),
            };
            let axioms = check_axioms(space, profile)?;
            let starts = args
                .starts
                .as_deref()
                .map(parse_points::<usize>)
                .transpose()?;
            solve_in(
                space,
                &map,
                parse_point(&x0_text)?,
                spec,
                axiom_precondition(&axioms),
                starts,
                &args,
            )?
        }
    };

    let config = json!({
        "subcommand": "solve",
        "input": args.space,
        "map": display_opt(&args.map),
        "family": spec.map(|s| s.family),
        "k": spec.map(|s| s.k),
        "x0": x0_text,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "grid_n": args.grid_n,
        "horizon": args.horizon,
        "profile": profile,
        "starts": display_opt(&args.starts),
        "format": args.common.format,
    });
    if let Some(path) = &args.trace {
        fs::write(path, &out.trace_csv)
            .with_context(|| format!("cannot write trace {}", path.display()))?;
    }
    if let Some(path) = &args.certificate {
        let doc = envelope::wrap("solve", config.clone(), &loaded.digest, &out.certificate);
        fs::write(path, envelope::to_text(&doc))
            .with_context(|| format!("cannot write certificate {}", path.display()))?;
    }
    let stdout = match args.common.format {
        Format::Json => envelope::to_text(&envelope::wrap(
            "solve",
            config,
            &loaded.digest,
            &out.report,
        )),
        Format::Csv => out.trace_csv,
        Format::Text => out.text,
    };
    Ok(Done {
        stdout,
        code: out.code,
    })
}
