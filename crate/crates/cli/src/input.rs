use std::fs;

use anyhow::{anyhow, Context, Result};
use pebms::gallery::GalleryEntry;
use pebms::{build_example, AxiomProfile, SpaceDoc};

use crate::envelope::sha256_hex;

pub const GALLERY_PREFIX: &str = "gallery:";

pub struct Loaded {
    pub doc: SpaceDoc,
    pub digest: String,
    pub entry: Option<GalleryEntry>,
}

impl Loaded {
    /// The declared profile, or the partial extended b-metric profile.
    pub fn declared(&self) -> AxiomProfile {
        match &self.doc {
            SpaceDoc::Finite(s) => s.declared(),
            SpaceDoc::Analytic(s) => s.declared().unwrap_or(AxiomProfile::PartialExtendedBMetric),
        }
    }
}

/// Reads a space JSON file, or builds a gallery entry for `gallery:<id>`.
pub fn load_space(arg: &str) -> Result<Loaded> {
    if let Some(id) = arg.strip_prefix(GALLERY_PREFIX) {
        let entry = build_example(id)?;
        let doc = entry.space.clone();
        let digest = sha256_hex(doc.to_json().as_bytes());
        return Ok(Loaded {
            doc,
            digest,
            entry: Some(entry),
        });
    }
    let bytes = fs::read(arg).with_context(|| format!("cannot read space file {arg}"))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| anyhow!("{arg} is not UTF-8"))?;
    let doc = SpaceDoc::from_json(&text).with_context(|| format!("in {arg}"))?;
    Ok(Loaded {
        doc,
        digest: sha256_hex(&bytes),
        entry: None,
    })
}

/// Resolves `--profile` and `--s` against the space's declared profile.
pub fn resolve_profile(loaded: &Loaded, tag: Option<&str>, s: Option<f64>) -> Result<AxiomProfile> {
    match tag {
        None if s.is_some() => Err(anyhow!("--s needs --profile")),
        None => Ok(loaded.declared()),
        Some(tag) => {
            let s = s.or_else(|| {
                loaded
                    .declared()
                    .coefficient()
                    .filter(|_| matches!(tag, "b_metric" | "pbm"))
            });
            Ok(AxiomProfile::from_tag(tag, s)?)
        }
    }
}
