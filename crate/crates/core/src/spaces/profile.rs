use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which family of axioms a space claims (or is checked against).
///
/// `BMetric` and `PartialBMetric` use a constant coefficient `s` in place of
/// the control matrix; the other profiles take θ from the space (or 1 for the
/// metric and partial metric cases).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub enum AxiomProfile {
    Metric,
    BMetric { s: f64 },
    ExtendedBMetric,
    PartialMetric,
    PartialBMetric { s: f64 },
    PartialExtendedBMetric,
}

/// Where the triangle-axiom factor comes from under a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control {
    Constant(f64),
    Matrix,
}

impl AxiomProfile {
    pub const TAGS: [&'static str; 6] =
        ["metric", "b_metric", "ebm", "partial_metric", "pbm", "pebm"];

    pub fn b_metric(s: f64) -> Result<Self> {
        check_coefficient(s)?;
        Ok(Self::BMetric { s })
    }

    pub fn partial_b_metric(s: f64) -> Result<Self> {
        check_coefficient(s)?;
        Ok(Self::PartialBMetric { s })
    }

    pub fn from_tag(tag: &str, s: Option<f64>) -> Result<Self> {
        let need_s = || {
            s.ok_or_else(|| {
                Error::Configuration(format!("profile {tag:?} requires a coefficient \"s\""))
            })
        };
        match tag {
            "metric" => Ok(Self::Metric),
            "b_metric" => Self::b_metric(need_s()?),
            "ebm" => Ok(Self::ExtendedBMetric),
            "partial_metric" => Ok(Self::PartialMetric),
            "pbm" => Self::partial_b_metric(need_s()?),
            "pebm" => Ok(Self::PartialExtendedBMetric),
            other => Err(Error::Configuration(format!(
                "unknown profile {other:?}; expected one of {}",
                Self::TAGS.join(", ")
            ))),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Metric => "metric",
            Self::BMetric { .. } => "b_metric",
            Self::ExtendedBMetric => "ebm",
            Self::PartialMetric => "partial_metric",
            Self::PartialBMetric { .. } => "pbm",
            Self::PartialExtendedBMetric => "pebm",
        }
    }

    pub fn coefficient(&self) -> Option<f64> {
        match self {
            Self::BMetric { s } | Self::PartialBMetric { s } => Some(*s),
            _ => None,
        }
    }

    /// Partial profiles allow nonzero self-distance and carry axiom A2.
    pub fn is_partial(&self) -> bool {
        matches!(
            self,
            Self::PartialMetric | Self::PartialBMetric { .. } | Self::PartialExtendedBMetric
        )
    }

    pub fn control(&self) -> Control {
        match self {
            Self::Metric | Self::PartialMetric => Control::Constant(1.0),
            Self::BMetric { s } | Self::PartialBMetric { s } => Control::Constant(*s),
            Self::ExtendedBMetric | Self::PartialExtendedBMetric => Control::Matrix,
        }
    }
}

fn check_coefficient(s: f64) -> Result<()> {
    if s.is_finite() && s >= 1.0 {
        Ok(())
    } else {
        Err(Error::Configuration(format!(
            "coefficient s must be a finite real >= 1, got {s}"
        )))
    }
}

impl fmt::Display for AxiomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.coefficient() {
            Some(s) => write!(f, "{}(s={s})", self.tag()),
            None => f.write_str(self.tag()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ProfileRepr {
    profile: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
}

impl TryFrom<ProfileRepr> for AxiomProfile {
    type Error = Error;

    fn try_from(repr: ProfileRepr) -> Result<Self> {
        Self::from_tag(&repr.profile, repr.s)
    }
}

impl From<AxiomProfile> for ProfileRepr {
    fn from(p: AxiomProfile) -> Self {
        Self {
            profile: p.tag().to_owned(),
            s: p.coefficient(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_tag_round_trips() {
        for tag in AxiomProfile::TAGS {
            let p = AxiomProfile::from_tag(tag, Some(2.0)).unwrap();
            assert_eq!(p.tag(), tag);
        }
    }

    #[test]
    fn coefficient_below_one_rejected() {
        assert!(AxiomProfile::b_metric(0.5).is_err());
        assert!(AxiomProfile::from_tag("pbm", None).is_err());
        assert!(AxiomProfile::from_tag("quasi", None).is_err());
    }

    #[test]
    fn serializes_flat() {
        let json = serde_json::to_value(AxiomProfile::PartialBMetric { s: 4.0 }).unwrap();
        assert_eq!(json, serde_json::json!({"profile": "pbm", "s": 4.0}));
        let json = serde_json::to_value(AxiomProfile::PartialExtendedBMetric).unwrap();
        assert_eq!(json, serde_json::json!({"profile": "pebm"}));
    }
}
