use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use pebms::fuzz::CounterexampleKind;
use pebms::{fuzz_campaign, AxiomProfile, FuzzConfig, SpaceDoc};
use serde_json::json;

use crate::{envelope, Common, Done, Format, EXIT_MATH, EXIT_OK};

#[derive(Args, Debug)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[arg(long, default_value_t = 0.9)]
    pub mutation_factor: f64,
    /// Save every shrunk counterexample here as a space JSON file.
    #[arg(long)]
    pub save_dir: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: FuzzArgs) -> Result<Done> {
    let config = FuzzConfig {
        n_min: args.n_min,
        n_max: args.n_max,
        trials: args.trials,
        seed: args.seed,
        profile: AxiomProfile::PartialExtendedBMetric,
        mutation_factor: args.mutation_factor,
    };
    let campaign = fuzz_campaign(&config)?;
    let mut saved = Vec::new();
    if let Some(dir) = &args.save_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for c in &campaign.counterexamples {
            let kind = match c.kind {
                CounterexampleKind::ExpectedMutation => "mutation",
                CounterexampleKind::GeneratorAnomaly => "anomaly",
            };
            let path = dir.join(format!("trial{:05}_{kind}.json", c.trial));
            fs::write(&path, SpaceDoc::Finite(c.space.clone()).to_json())
                .with_context(|| format!("cannot write {}", path.display()))?;
            saved.push(path.display().to_string());
        }
    }
    let stats = &campaign.stats;
    let code = if stats.inconsistencies() == 0 {
        EXIT_OK
    } else {
        EXIT_MATH
    };
    let run_config = json!({
        "subcommand": "fuzz",
        "trials": args.trials,
        "seed": args.seed,
        "n_min": args.n_min,
        "n_max": args.n_max,
        "mutation_factor": args.mutation_factor,
        "save_dir": args.save_dir.as_ref().map(|d| d.display().to_string()),
        "format": args.common.format,
    });
    let stdout = match args.common.format {
        Format::Json => {
            let digest = envelope::sha256_hex(run_config.to_string().as_bytes());
            let report = json!({
                "stats": stats,
                "counterexamples": campaign.counterexamples,
                "saved": saved,
            });
            envelope::to_text(&envelope::wrap("fuzz", run_config, &digest, report))
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "trials               {}", stats.trials);
            let _ = writeln!(
                out,
                "generated pass/fail  {}/{}",
                stats.generated_passed, stats.generated_failed
            );
            let _ = writeln!(
                out,
                "mutations caught     {}/{} ({} impossible)",
                stats.mutations_caught, stats.mutations_possible, stats.mutations_impossible
            );
            let _ = writeln!(
                out,
                "counterexamples      {} ({} shrunk)",
                campaign.counterexamples.len(),
                stats.shrunk
            );
            let _ = writeln!(out, "inconsistencies      {}", stats.inconsistencies());
            out
        }
        Format::Csv => bail!("fuzz supports json and text output"),
    };
    Ok(Done { stdout, code })
}
