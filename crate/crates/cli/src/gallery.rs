use anyhow::{bail, Result};
use clap::Args;
use pebms::run_gallery;
use serde_json::json;

use crate::{envelope, Common, Done, Format, EXIT_MATH, EXIT_OK};

#[derive(Args, Debug)]
pub struct GalleryArgs {
    /// Grid points per axis for sampled checks.
    #[arg(long, default_value_t = 41)]
    pub grid_n: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: GalleryArgs) -> Result<Done> {
    let config = json!({
        "subcommand": "gallery",
        "grid_n": args.grid_n,
        "tol": args.tol,
        "format": args.common.format,
    });
    let report = run_gallery(args.grid_n, args.tol)?;
    let code = if report.passed { EXIT_OK } else { EXIT_MATH };
    let stdout = match args.common.format {
        Format::Json => {
            let digest = envelope::sha256_hex(config.to_string().as_bytes());
            envelope::to_text(&envelope::wrap("gallery", config, &digest, &report))
        }
        Format::Text => report.text_table(),
        Format::Csv => bail!("gallery supports json and text output"),
    };
    Ok(Done { stdout, code })
}
