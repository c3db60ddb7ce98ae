use std::fmt::Write as _;

use anyhow::{bail, Result};
use clap::Args;
use pebms::axioms::{
    check_axioms, check_axioms_sampled, triangle_detail, AxiomReport, TriangleCheck,
};
use pebms::SpaceDoc;
use serde_json::json;

use crate::input::{load_space, resolve_profile};
use crate::{envelope, Common, Done, Format, EXIT_MATH, EXIT_OK};

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Space JSON file, or gallery:<id>.
    pub space: String,
    /// Axiom profile tag; defaults to the space's declared profile.
    #[arg(long)]
    pub profile: Option<String>,
    /// Coefficient for the b_metric and pbm profiles.
    #[arg(long)]
    pub s: Option<f64>,
    /// Grid points per axis when sampling an analytic space.
    #[arg(long, default_value_t = 41)]
    pub grid_n: usize,
    /// Include every triangle evaluation (finite spaces only).
    #[arg(long)]
    pub detail: bool,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: CheckArgs) -> Result<Done> {
    let loaded = load_space(&args.space)?;
    let profile = resolve_profile(&loaded, args.profile.as_deref(), args.s)?;
    let report = match &loaded.doc {
        SpaceDoc::Finite(s) => check_axioms(s, profile)?,
        SpaceDoc::Analytic(s) => check_axioms_sampled(s, args.grid_n, profile)?,
    };
    let triangles = match (&loaded.doc, args.detail) {
        (_, false) => None,
        (SpaceDoc::Finite(s), true) => Some(triangle_detail(s, profile)?),
        (SpaceDoc::Analytic(_), true) => bail!("--detail needs a finite space"),
    };
    let code = if report.passed() { EXIT_OK } else { EXIT_MATH };
    let stdout = match args.common.format {
        Format::Json => {
            let mut body = serde_json::to_value(&report)?;
            if let Some(t) = &triangles {
                body["triangles"] = serde_json::to_value(t)?;
            }
            let config = json!({
                "subcommand": "check",
                "input": args.space,
                "profile": profile,
                "grid_n": args.grid_n,
                "detail": args.detail,
                "format": args.common.format,
            });
            envelope::to_text(&envelope::wrap("check", config, &loaded.digest, &body))
        }
        Format::Csv => violations_csv(&report),
        Format::Text => {
            let mut out = text(&report);
            for t in triangles.iter().flatten() {
                out.push_str(&triangle_line(t));
            }
            out
        }
    };
    Ok(Done { stdout, code })
}

fn witness_text(v: &pebms::axioms::Violation) -> String {
    let idx = v
        .witness
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    match &v.coords {
        Some(c) => {
            let xs = c
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            format!("({idx}) at x = ({xs})")
        }
        None => format!("({idx})"),
    }
}

fn triangle_line(t: &TriangleCheck) -> String {
    let [x, y, z] = t.witness;
    format!(
        "  triangle ({x}, {y}, {z}): {} <= {} * ({} + {}) = {} * {} = {}{}\n",
        t.lhs,
        t.theta,
        t.pxy,
        t.pyz,
        t.theta,
        t.sum,
        t.product,
        if t.self_term == 0.0 {
            String::new()
        } else {
            format!(" - {}", t.self_term)
        }
    )
}

fn text(r: &AxiomReport) -> String {
    let mut out = format!(
        "profile {}: {} ({} checks{}, worst margin {})\n",
        r.profile,
        if r.passed() { "pass" } else { "fail" },
        r.checks_run,
        if r.grid_relative { " on a grid" } else { "" },
        r.worst_margin
    );
    for v in &r.violations {
        let _ = writeln!(
            out,
            "  {} {}: lhs {} rhs {} margin {}",
            v.axiom.as_str(),
            witness_text(v),
            v.lhs,
            v.rhs,
            v.margin
        );
    }
    out
}

fn violations_csv(r: &AxiomReport) -> String {
    let mut out = String::from("axiom,witness,coords,lhs,rhs,margin\n");
    for v in &r.violations {
        let join = |xs: Vec<String>| xs.join(" ");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            v.axiom.as_str(),
            join(v.witness.iter().map(|i| i.to_string()).collect()),
            v.coords
                .as_ref()
                .map(|c| join(c.iter().map(|x| x.to_string()).collect()))
                .unwrap_or_default(),
            v.lhs,
            v.rhs,
            v.margin
        );
    }
    out
}
