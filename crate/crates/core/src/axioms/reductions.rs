//! The implication lattice between profiles, tested on concrete spaces.

use serde::{Deserialize, Serialize};

use super::check_axioms;
use crate::error::Result;
use crate::matrix::SquareMatrix;
use crate::spaces::{induced_ebm, AxiomProfile, FiniteSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplicationStatus {
    Holds,
    Fails,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Implication {
    pub name: String,
    pub status: ImplicationStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    #[serde(flatten)]
    pub declared: AxiomProfile,
    pub declared_passes: bool,
    pub implications: Vec<Implication>,
}

impl ReductionReport {
    pub fn get(&self, name: &str) -> Option<&Implication> {
        self.implications.iter().find(|i| i.name == name)
    }

    /// No tested implication failed.
    pub fn consistent(&self) -> bool {
        self.implications
            .iter()
            .all(|i| i.status != ImplicationStatus::Fails)
    }
}

fn constant_value(m: &SquareMatrix) -> Option<f64> {
    let first = m.iter().next()?.1;
    m.iter().all(|(_, v)| v == first).then_some(first)
}

fn zero_diagonal(space: &FiniteSpace) -> bool {
    (0..space.len()).all(|i| space.distance_matrix().get(i, i) == 0.0)
}

/// Tests each reduction between profiles that is applicable to `space`.
///
/// Implications whose premise does not hold (including a space that fails
/// its own declared profile) are reported as not applicable.
pub fn verify_reductions(space: &FiniteSpace) -> Result<ReductionReport> {
    let declared = space.declared();
    let declared_passes = check_axioms(space, declared)
        .map(|r| r.passed())
        .unwrap_or(false);
    let mut out = Vec::new();
    let mut push = |name: &str, status: ImplicationStatus, detail: String| {
        out.push(Implication {
            name: name.to_owned(),
            status,
            detail,
        })
    };
    let outcome = |passed: bool| {
        if passed {
            ImplicationStatus::Holds
        } else {
            ImplicationStatus::Fails
        }
    };

    let theta = space.control_matrix().ok();
    let with_theta = theta
        .as_ref()
        .and_then(|t| space.with_theta(t.clone()).ok());
    let passes =
        |s: &FiniteSpace, p: AxiomProfile| check_axioms(s, p).map(|r| r.passed()).unwrap_or(false);

    if !declared_passes {
        for name in [
            "ebm_is_pebm",
            "pebm_zero_self_is_ebm",
            "pebm_constant_theta_is_pbm",
            "b_metric_is_pbm",
            "partial_metric_is_pbm",
        ] {
            push(
                name,
                ImplicationStatus::NotApplicable,
                format!("space fails its declared profile {declared}"),
            );
        }
        return Ok(ReductionReport {
            declared,
            declared_passes,
            implications: out,
        });
    }

    // An extended b-metric space is a partial extended b-metric space with zero self-distance.
    match &with_theta {
        Some(s) if passes(s, AxiomProfile::ExtendedBMetric) => push(
            "ebm_is_pebm",
            outcome(passes(s, AxiomProfile::PartialExtendedBMetric)),
            "passes ebm; checked as pebm".into(),
        ),
        _ => push(
            "ebm_is_pebm",
            ImplicationStatus::NotApplicable,
            "space does not pass ebm".into(),
        ),
    }

    let pebm_ok = with_theta
        .as_ref()
        .is_some_and(|s| passes(s, AxiomProfile::PartialExtendedBMetric));

    if pebm_ok && zero_diagonal(space) {
        let induced = induced_ebm(with_theta.as_ref().expect("pebm_ok implies theta"));
        push(
            "pebm_zero_self_is_ebm",
            outcome(passes(&induced, AxiomProfile::ExtendedBMetric)),
            "zero diagonal; induced space checked as ebm".into(),
        );
    } else {
        push(
            "pebm_zero_self_is_ebm",
            ImplicationStatus::NotApplicable,
            if pebm_ok {
                "nonzero self-distance".into()
            } else {
                "space does not pass pebm".into()
            },
        );
    }

    match theta.as_ref().and_then(constant_value) {
        Some(s) if pebm_ok => {
            let pbm = AxiomProfile::PartialBMetric { s };
            push(
                "pebm_constant_theta_is_pbm",
                outcome(passes(space, pbm)),
                format!("Theta is constant {s}; checked as {pbm}"),
            );
        }
        _ => push(
            "pebm_constant_theta_is_pbm",
            ImplicationStatus::NotApplicable,
            "Theta is not constant or space does not pass pebm".into(),
        ),
    }

    // Every b-metric space is a partial b-metric space with the same coefficient.
    let coefficient = declared
        .coefficient()
        .or_else(|| theta.as_ref().and_then(constant_value));
    match coefficient {
        Some(s) if s >= 1.0 && passes(space, AxiomProfile::BMetric { s }) => push(
            "b_metric_is_pbm",
            outcome(passes(space, AxiomProfile::PartialBMetric { s })),
            format!("passes b_metric(s={s}); checked as pbm(s={s})"),
        ),
        _ => push(
            "b_metric_is_pbm",
            ImplicationStatus::NotApplicable,
            "space does not pass a b_metric profile".into(),
        ),
    }

    // A partial metric space is a partial b-metric space with s = 1.
    if passes(space, AxiomProfile::PartialMetric) {
        push(
            "partial_metric_is_pbm",
            outcome(passes(space, AxiomProfile::PartialBMetric { s: 1.0 })),
            "passes partial_metric; checked as pbm(s=1)".into(),
        );
    } else {
        push(
            "partial_metric_is_pbm",
            ImplicationStatus::NotApplicable,
            "space does not pass partial_metric".into(),
        );
    }

    Ok(ReductionReport {
        declared,
        declared_passes,
        implications: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::sample_grid;
    use crate::AnalyticSpace;

    fn ex_235() -> FiniteSpace {
        let xs = [2.0, 3.0, 4.0];
        FiniteSpace::new(
            vec!["2".into(), "3".into(), "4".into()],
            SquareMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 20.0 }),
            Some(SquareMatrix::from_fn(3, |i, j| 1.0 + xs[i] + xs[j])),
            AxiomProfile::ExtendedBMetric,
        )
        .unwrap()
    }

    #[test]
    fn ebm_example_is_also_pebm() {
        let r = verify_reductions(&ex_235()).unwrap();
        assert!(r.declared_passes);
        assert_eq!(
            r.get("ebm_is_pebm").unwrap().status,
            ImplicationStatus::Holds
        );
        assert_eq!(
            r.get("pebm_zero_self_is_ebm").unwrap().status,
            ImplicationStatus::Holds
        );
        assert!(r.consistent());
    }

    #[test]
    fn constant_theta_grid_is_a_pbm() {
        let s = AnalyticSpace::parse((0.0, 1.0), "max(x,y)", "1+x+y", &[], None).unwrap();
        let g = sample_grid(&s, 11).unwrap();
        let g = g.with_theta(SquareMatrix::filled(11, 3.0)).unwrap();
        let r = verify_reductions(&g).unwrap();
        assert_eq!(
            r.get("pebm_constant_theta_is_pbm").unwrap().status,
            ImplicationStatus::Holds
        );
        assert_eq!(
            r.get("pebm_zero_self_is_ebm").unwrap().status,
            ImplicationStatus::NotApplicable
        );
    }

    #[test]
    fn failing_space_reports_not_applicable() {
        let s = AnalyticSpace::parse((0.0, 1.0), "abs(x-y)+x", "1", &[], None).unwrap();
        let g = sample_grid(&s, 3).unwrap();
        let r = verify_reductions(&g).unwrap();
        assert!(!r.declared_passes);
        assert!(r
            .implications
            .iter()
            .all(|i| i.status == ImplicationStatus::NotApplicable));
    }
}
