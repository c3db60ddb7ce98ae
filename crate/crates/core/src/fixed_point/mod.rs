//! Contraction preconditions, Picard iteration with traces and certificates,
//! and the error bounds of the Banach, Kannan and modified Kannan families.

mod bounds;
mod picard;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{orbit, SelfMap};
use crate::spaces::{EvidenceMode, Space};

pub use bounds::{
    banach_tail_bound, kannan_step_bound, modkannan_bounds, modkannan_step_bound, ModKannanBounds,
    TailBound,
};
pub use picard::{
    picard_solve, record_trace, uniqueness_probe, ConvergenceCertificate, IterationTrace, Outcome,
    PicardRun, StartResult, TraceRow, UniquenessReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `p(Tx,Ty) <= k p(x,y)`
    Banach,
    /// `p(Tx,Ty) <= k [p(x,Tx) + p(y,Ty)]`
    Kannan,
    /// `p(Tx,Ty) <= k [p(x,Ty) + p(y,Ty)]`
    ModifiedKannan,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Banach, Family::Kannan, Family::ModifiedKannan];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Banach => "banach",
            Family::Kannan => "kannan",
            Family::ModifiedKannan => "modified_kannan",
        }
    }

    /// Exclusive upper limit on `k`.
    pub fn k_limit(self) -> f64 {
        match self {
            Family::Banach => 1.0,
            Family::Kannan | Family::ModifiedKannan => 0.5,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                Error::Argument(format!(
                    "unknown contraction family {s:?}; expected banach, kannan or modified_kannan"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionSpec {
    pub family: Family,
    pub k: f64,
}

impl ContractionSpec {
    pub fn new(family: Family, k: f64) -> Result<Self> {
        if (0.0..family.k_limit()).contains(&k) {
            Ok(Self { family, k })
        } else {
            Err(Error::Argument(format!(
                "{family} contraction needs k in [0, {}), got {k}",
                family.k_limit()
            )))
        }
    }

    pub fn banach(k: f64) -> Result<Self> {
        Self::new(Family::Banach, k)
    }

    pub fn kannan(k: f64) -> Result<Self> {
        Self::new(Family::Kannan, k)
    }

    pub fn modified_kannan(k: f64) -> Result<Self> {
        Self::new(Family::ModifiedKannan, k)
    }

    /// `1/k`, or `None` when `k = 0` and every finite control passes.
    pub fn theta_threshold(&self) -> Option<f64> {
        (self.k > 0.0).then(|| 1.0 / self.k)
    }
}

/// One hypothesis of a fixed-point theorem and how it was checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Precondition {
    pub name: String,
    pub verified: bool,
    pub detail: String,
    pub mode: EvidenceMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport<P> {
    #[serde(flatten)]
    pub spec: ContractionSpec,
    pub passed: bool,
    /// Largest `lhs / bracket` over pairs with a positive bracket: the smallest
    /// `k` the sample admits.
    pub worst_ratio: f64,
    /// Pair attaining the worst ratio; set only on failure.
    pub witness: Option<(P, P)>,
    /// Pairs with a zero bracket and a positive left-hand side.
    pub hard_violations: Vec<(P, P)>,
    pub pairs_checked: usize,
    pub mode: EvidenceMode,
}

impl<P: fmt::Display> ContractionReport<P> {
    pub fn precondition(&self) -> Precondition {
        let mut detail = format!(
            "worst ratio {} against k = {} over {} pairs",
            self.worst_ratio, self.spec.k, self.pairs_checked
        );
        if let Some((x, y)) = &self.witness {
            detail.push_str(&format!("; witness ({x}, {y})"));
        }
        if !self.hard_violations.is_empty() {
            detail.push_str(&format!(
                "; {} pairs with zero bracket and positive lhs",
                self.hard_violations.len()
            ));
        }
        Precondition {
            name: format!("{}_contraction", self.spec.family),
            verified: self.passed,
            detail,
            mode: self.mode,
        }
    }
}

/// `p(Tx,Ty)` and the family's bracket, so that the inequality reads `lhs <= k * bracket`.
fn contraction_sides<S, M>(
    space: &S,
    map: &M,
    family: Family,
    x: S::Point,
    y: S::Point,
) -> Result<(f64, f64)>
where
    S: Space,
    M: SelfMap<S::Point> + ?Sized,
{
    let tx = map.apply(x)?;
    let ty = map.apply(y)?;
    for t in [tx, ty] {
        if !space.contains(t) {
            return Err(space.domain_error(t));
        }
    }
    let lhs = space.p(tx, ty)?;
    let bracket = match family {
        Family::Banach => space.p(x, y)?,
        Family::Kannan => space.p(x, tx)? + space.p(y, ty)?,
        Family::ModifiedKannan => space.p(x, ty)? + space.p(y, ty)?,
    };
    Ok((lhs, bracket))
}

/// Evaluates the family's contraction inequality at every ordered pair of `sample`.
pub fn verify_contraction<S, M>(
    space: &S,
    map: &M,
    spec: ContractionSpec,
    sample: &[S::Point],
) -> Result<ContractionReport<S::Point>>
where
    S: Space,
    M: SelfMap<S::Point> + ?Sized,
{
    if sample.is_empty() {
        return Err(Error::Argument("contraction sample is empty".into()));
    }
    let mut worst_ratio = 0.0_f64;
    let mut worst_pair = (sample[0], sample[0]);
    let mut exceeded = false;
    let mut hard_violations = Vec::new();
    for &x in sample {
        for &y in sample {
            let (lhs, bracket) = contraction_sides(space, map, spec.family, x, y)?;
            if bracket == 0.0 {
                if lhs > 0.0 {
                    hard_violations.push((x, y));
                }
                continue;
            }
            let ratio = lhs / bracket;
            let fails = lhs > spec.k * bracket;
            // prefer a failing pair as witness over a passing one at equal ratio
            if ratio > worst_ratio || (fails && !exceeded && ratio == worst_ratio) {
                worst_ratio = ratio;
                worst_pair = (x, y);
            }
            exceeded |= fails;
        }
    }
    if !hard_violations.is_empty() {
        worst_ratio = f64::INFINITY;
        worst_pair = hard_violations[0];
    }
    let passed = !exceeded && hard_violations.is_empty();
    Ok(ContractionReport {
        spec,
        passed,
        worst_ratio,
        witness: (!passed).then_some(worst_pair),
        hard_violations,
        pairs_checked: sample.len() * sample.len(),
        mode: space.evidence_mode(sample.len()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaReport<P> {
    #[serde(flatten)]
    pub spec: ContractionSpec,
    pub passed: bool,
    /// Banach: max `θ(x_n, x_m)` over tail-half orbit pairs. Kannan
    /// families: max `θ(Tx, x)` over the sample.
    pub observed_sup: f64,
    pub argmax: (P, P),
    /// `1/k`; `None` when `k = 0`.
    pub threshold: Option<f64>,
    /// `1/k - observed_sup`; `None` when `k = 0`.
    pub margin: Option<f64>,
    /// Orbit length used by the Banach surrogate.
    pub horizon: Option<usize>,
    pub mode: EvidenceMode,
}

impl<P: fmt::Display> ThetaReport<P> {
    pub fn precondition(&self) -> Precondition {
        let what = match self.spec.family {
            Family::Banach => format!(
                "max theta over tail-half orbit pairs to horizon {}",
                self.horizon.unwrap_or(0)
            ),
            _ => "sup theta(Tx, x) over the sample".to_owned(),
        };
        let threshold = self.threshold.map_or("inf".to_owned(), |t| t.to_string());
        Precondition {
            name: format!("{}_theta_condition", self.spec.family),
            verified: self.passed,
            detail: format!(
                "{what} = {} at ({}, {}) against 1/k = {threshold}",
                self.observed_sup, self.argmax.0, self.argmax.1
            ),
            mode: self.mode,
        }
    }
}

/// Checks the control-function hypothesis `sup θ < 1/k` of the family.
///
/// The Banach double limit is approximated by the maximum over pairs `n != m`
/// in the second half of `[x0, ..., T^horizon x0]`; the Kannan families take
/// the maximum of `θ(Tx, x)` over `sample`.
pub fn verify_theta_condition<S, M>(
    space: &S,
    map: &M,
    spec: ContractionSpec,
    x0: S::Point,
    horizon: usize,
    sample: &[S::Point],
) -> Result<ThetaReport<S::Point>>
where
    S: Space,
    M: SelfMap<S::Point> + ?Sized,
{
    let (observed_sup, argmax, horizon_used, mode) = match spec.family {
        Family::Banach => {
            if horizon < 2 {
                return Err(Error::Argument(format!(
                    "horizon must be at least 2, got {horizon}"
                )));
            }
            let xs = orbit(space, map, x0, horizon)?.terms;
            let tail = &xs[horizon / 2..];
            let mut best = (f64::NEG_INFINITY, (tail[0], tail[1]));
            for (a, &xn) in tail.iter().enumerate() {
                for (b, &xm) in tail.iter().enumerate() {
                    if a != b {
                        let t = space.theta(xn, xm)?;
                        if t > best.0 {
                            best = (t, (xn, xm));
                        }
                    }
                }
            }
            (best.0, best.1, Some(horizon), EvidenceMode::Sampled)
        }
        Family::Kannan | Family::ModifiedKannan => {
            if sample.is_empty() {
                return Err(Error::Argument("theta sample is empty".into()));
            }
            let mut best = (f64::NEG_INFINITY, (sample[0], sample[0]));
            for &x in sample {
                let tx = map.apply(x)?;
                let t = space.theta(tx, x)?;
                if t > best.0 {
                    best = (t, (tx, x));
                }
            }
            (best.0, best.1, None, space.evidence_mode(sample.len()))
        }
    };
    let threshold = spec.theta_threshold();
    Ok(ThetaReport {
        spec,
        passed: threshold.is_none_or(|t| observed_sup < t),
        observed_sup,
        argmax,
        threshold,
        margin: threshold.map(|t| t - observed_sup),
        horizon: horizon_used,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{AnalyticMap, FiniteMap};
    use crate::spaces::{AnalyticSpace, AxiomProfile, FiniteSpace};
    use crate::SquareMatrix;

    fn max_space(theta: &str) -> AnalyticSpace {
        AnalyticSpace::parse((0.0, 1.0), "max(x,y)", theta, &[], None).unwrap()
    }

    #[test]
    fn spec_ranges() {
        assert!(ContractionSpec::banach(0.99).is_ok());
        assert!(ContractionSpec::banach(1.0).is_err());
        assert!(ContractionSpec::kannan(0.5).is_err());
        assert!(ContractionSpec::modified_kannan(-0.1).is_err());
        assert!(ContractionSpec::kannan(0.0).is_ok());
        assert_eq!(
            "modified_kannan".parse::<Family>().unwrap(),
            Family::ModifiedKannan
        );
    }

    #[test]
    fn kannan_ratio_on_max_form() {
        let s = max_space("1 + x*y/(1+x+y)");
        let t = AnalyticMap::parse("x/4", &s).unwrap();
        let r = verify_contraction(
            &s,
            &t,
            ContractionSpec::kannan(1.0 / 3.0).unwrap(),
            &s.sample(21),
        )
        .unwrap();
        assert!(r.passed);
        assert_eq!(r.worst_ratio, 0.25);
        assert_eq!(r.witness, None);
        assert_eq!(r.mode, EvidenceMode::Sampled);
    }

    #[test]
    fn banach_ratio_is_exactly_a_quarter() {
        let s = max_space("1+x+y");
        let t = AnalyticMap::parse("x/4", &s).unwrap();
        let r = verify_contraction(
            &s,
            &t,
            ContractionSpec::banach(0.25).unwrap(),
            &s.sample(41),
        )
        .unwrap();
        assert!(r.passed);
        assert_eq!(r.worst_ratio, 0.25);
        let tighter =
            verify_contraction(&s, &t, ContractionSpec::banach(0.2).unwrap(), &s.sample(41))
                .unwrap();
        assert!(!tighter.passed);
        assert!(tighter.witness.is_some());
    }

    #[test]
    fn identity_is_not_a_contraction() {
        let s = max_space("1+x+y");
        let id = AnalyticMap::parse("x", &s).unwrap();
        let r = verify_contraction(&s, &id, ContractionSpec::banach(0.9).unwrap(), &s.sample(5))
            .unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_ratio, 1.0);

        let single = FiniteSpace::new(
            vec!["a".into()],
            SquareMatrix::filled(1, 0.0),
            None,
            AxiomProfile::Metric,
        )
        .unwrap();
        let r = verify_contraction(
            &single,
            &FiniteMap::identity(&single),
            ContractionSpec::banach(0.5).unwrap(),
            &[0],
        )
        .unwrap();
        assert!(r.passed);
        assert_eq!(r.mode, EvidenceMode::Exhaustive);
    }

    #[test]
    fn zero_bracket_with_positive_lhs_is_hard() {
        // p(0,0) = 0 but T sends 0 to 1 with p(1,1) > 0
        let s = FiniteSpace::new(
            vec!["a".into(), "b".into()],
            SquareMatrix::from_rows(vec![vec![0.0, 2.0], vec![2.0, 1.0]]).unwrap(),
            None,
            AxiomProfile::PartialMetric,
        )
        .unwrap();
        let t = FiniteMap::constant(&s, 1).unwrap();
        let r = verify_contraction(&s, &t, ContractionSpec::banach(0.5).unwrap(), &[0, 1]).unwrap();
        assert!(!r.passed);
        assert_eq!(r.hard_violations, vec![(0, 0)]);
        assert_eq!(r.worst_ratio, f64::INFINITY);
    }

    #[test]
    fn kannan_theta_sup_on_unit_interval() {
        let s = max_space("1 + x*y/(1+x+y)");
        let t = AnalyticMap::parse("x/4", &s).unwrap();
        let r = verify_theta_condition(
            &s,
            &t,
            ContractionSpec::kannan(1.0 / 3.0).unwrap(),
            1.0,
            0,
            &s.sample(41),
        )
        .unwrap();
        assert!(r.passed);
        assert!((r.observed_sup - (1.0 + 1.0 / 9.0)).abs() < 1e-15);
        assert_eq!(r.argmax, (0.25, 1.0));
    }

    #[test]
    fn constant_theta_passes_every_admissible_k() {
        let s = AnalyticSpace::parse((0.0, 1.0), "abs(x-y)+x", "1", &[], None).unwrap();
        let t = AnalyticMap::parse("x/4", &s).unwrap();
        for k in [0.0, 0.1, 0.49] {
            let r = verify_theta_condition(
                &s,
                &t,
                ContractionSpec::modified_kannan(k).unwrap(),
                1.0,
                0,
                &s.sample(11),
            )
            .unwrap();
            assert!(r.passed);
            assert_eq!(r.observed_sup, 1.0);
        }
    }

    #[test]
    fn banach_theta_along_orbit_tail() {
        let s = max_space("1+x+y");
        let t = AnalyticMap::parse("x/4", &s).unwrap();
        let r =
            verify_theta_condition(&s, &t, ContractionSpec::banach(0.25).unwrap(), 1.0, 20, &[])
                .unwrap();
        assert!(r.passed);
        assert_eq!(r.horizon, Some(20));
        let expected = 1.0 + 4f64.powi(-10) + 4f64.powi(-11);
        assert_eq!(r.observed_sup, expected);
        assert_eq!(r.margin, Some(4.0 - expected));
        assert!(verify_theta_condition(
            &s,
            &t,
            ContractionSpec::banach(0.25).unwrap(),
            1.0,
            1,
            &[]
        )
        .is_err());
    }
}
