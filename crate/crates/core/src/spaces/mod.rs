//! Space representations: finite matrix-backed spaces, closed-form spaces on
//! an interval, the axiom profile lattice, and the induced extended b-metric.

mod analytic;
mod finite;
mod json;
pub(crate) mod profile;

use std::fmt;
use std::str::FromStr;

pub use analytic::{sample_grid, AnalyticSpace, Interval};
pub use finite::{induced_ebm, FiniteSpace};
pub use json::SpaceDoc;
pub use profile::AxiomProfile;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Whether a verdict covers every point or only a finite sample of a continuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvidenceMode {
    Exhaustive,
    Sampled,
}

/// Anything that can evaluate a partial distance and a control function.
///
/// Points of finite spaces are indices; points of analytic spaces are reals.
pub trait Space: Sync {
    type Point: Copy + PartialEq + fmt::Debug + fmt::Display + FromStr + Serialize + Send + Sync;

    fn p(&self, x: Self::Point, y: Self::Point) -> Result<f64>;

    fn theta(&self, x: Self::Point, y: Self::Point) -> Result<f64>;

    fn contains(&self, x: Self::Point) -> bool;

    fn domain_label(&self) -> String;

    /// Number of points, or `None` for a continuum.
    fn size(&self) -> Option<usize>;

    /// Every point of a finite space, or an `n`-point grid of a continuum.
    fn sample(&self, n: usize) -> Vec<Self::Point>;

    /// Exhaustive when `sample` covers the whole space.
    fn evidence_mode(&self, sample_len: usize) -> EvidenceMode {
        if self.size() == Some(sample_len) {
            EvidenceMode::Exhaustive
        } else {
            EvidenceMode::Sampled
        }
    }

    /// The induced distance: zero on the diagonal, `p` elsewhere.
    fn induced(&self, x: Self::Point, y: Self::Point) -> Result<f64> {
        if x == y {
            self.contains(x)
                .then_some(0.0)
                .ok_or_else(|| self.domain_error(x))
        } else {
            self.p(x, y)
        }
    }

    fn domain_error(&self, x: Self::Point) -> crate::Error {
        crate::Error::Domain {
            point: x.to_string(),
            domain: self.domain_label(),
        }
    }
}

pub fn eval_p<S: Space>(space: &S, x: S::Point, y: S::Point) -> Result<f64> {
    space.p(x, y)
}

pub fn eval_theta<S: Space>(space: &S, x: S::Point, y: S::Point) -> Result<f64> {
    space.theta(x, y)
}
