use serde::{Deserialize, Serialize};

use super::{AnalyticSpace, FiniteSpace};
use crate::error::{Error, Result};

/// The on-disk space document, tagged by `"kind"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceDoc {
    Finite(FiniteSpace),
    Analytic(AnalyticSpace),
}

impl SpaceDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    /// Pretty JSON, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("space documents always serialize");
        s.push('\n');
        s
    }
}

impl From<FiniteSpace> for SpaceDoc {
    fn from(s: FiniteSpace) -> Self {
        Self::Finite(s)
    }
}

impl From<AnalyticSpace> for SpaceDoc {
    fn from(s: AnalyticSpace) -> Self {
        Self::Analytic(s)
    }
}
