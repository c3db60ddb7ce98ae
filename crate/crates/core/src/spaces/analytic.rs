use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AxiomProfile, FiniteSpace, Space};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::matrix::SquareMatrix;

// Construction-time sampling resolution for the p >= 0 and theta >= 1 checks.
const VALIDATION_SAMPLES: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::Construction(format!(
                "invalid interval [{lo}, {hi}]"
            )))
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `n >= 2` uniformly spaced points, both endpoints included exactly.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let width = self.hi - self.lo;
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.hi
                } else {
                    self.lo + width * i as f64 / last
                }
            })
            .collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(d)?;
        Interval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// A space on a closed real interval with closed-form `p` and `θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticSpace {
    domain: Interval,
    p_form: Expr,
    theta_form: Expr,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", flatten)]
    declared: Option<AxiomProfile>,
}

impl AnalyticSpace {
    pub fn new(
        domain: Interval,
        p_form: Expr,
        theta_form: Expr,
        params: BTreeMap<String, f64>,
        declared: Option<AxiomProfile>,
    ) -> Result<Self> {
        for name in p_form.params().into_iter().chain(theta_form.params()) {
            if !params.contains_key(&name) {
                return Err(Error::Construction(format!(
                    "parameter {name:?} is not bound"
                )));
            }
        }
        let space = Self {
            domain,
            p_form,
            theta_form,
            params,
            declared,
        };
        let grid = domain.grid(VALIDATION_SAMPLES);
        for &x in &grid {
            for &y in &grid {
                let p = space.p(x, y)?;
                if p < 0.0 {
                    return Err(Error::Construction(format!(
                        "p({x}, {y}) = {p} is negative"
                    )));
                }
                let t = space.theta(x, y)?;
                if t < 1.0 {
                    return Err(Error::Construction(format!(
                        "theta({x}, {y}) = {t} is below 1"
                    )));
                }
            }
        }
        Ok(space)
    }

    /// Convenience constructor from expression strings.
    pub fn parse(
        domain: (f64, f64),
        p_form: &str,
        theta_form: &str,
        params: &[(&str, f64)],
        declared: Option<AxiomProfile>,
    ) -> Result<Self> {
        Self::new(
            Interval::new(domain.0, domain.1)?,
            Expr::parse(p_form)?,
            Expr::parse(theta_form)?,
            params.iter().map(|(k, v)| ((*k).to_owned(), *v)).collect(),
            declared,
        )
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn p_form(&self) -> &Expr {
        &self.p_form
    }

    pub fn theta_form(&self) -> &Expr {
        &self.theta_form
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn declared(&self) -> Option<AxiomProfile> {
        self.declared
    }

    /// Same forms on a different interval.
    pub fn with_domain(&self, domain: Interval) -> Result<Self> {
        Self::new(
            domain,
            self.p_form.clone(),
            self.theta_form.clone(),
            self.params.clone(),
            self.declared,
        )
    }

    /// Same distance and domain under a different control function.
    pub fn with_theta_form(&self, theta_form: &str) -> Result<Self> {
        Self::new(
            self.domain,
            self.p_form.clone(),
            Expr::parse(theta_form)?,
            self.params.clone(),
            self.declared,
        )
    }

    fn eval(&self, form: &Expr, what: &str, x: f64, y: f64) -> Result<f64> {
        for v in [x, y] {
            if !self.domain.contains(v) {
                return Err(self.domain_error(v));
            }
        }
        let v = form.eval(x, y, &self.params).map_err(Error::Argument)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Argument(format!(
                "{what}({x}, {y}) = {v} is not finite"
            )))
        }
    }
}

impl Space for AnalyticSpace {
    type Point = f64;

    fn p(&self, x: f64, y: f64) -> Result<f64> {
        self.eval(&self.p_form, "p", x, y)
    }

    fn theta(&self, x: f64, y: f64) -> Result<f64> {
        self.eval(&self.theta_form, "theta", x, y)
    }

    fn contains(&self, x: f64) -> bool {
        self.domain.contains(x)
    }

    fn domain_label(&self) -> String {
        self.domain.to_string()
    }

    fn size(&self) -> Option<usize> {
        None
    }

    fn sample(&self, n: usize) -> Vec<f64> {
        self.domain.grid(n.max(2))
    }
}

#[derive(Deserialize)]
struct AnalyticRepr {
    domain: Interval,
    p_form: Expr,
    theta_form: Expr,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default)]
    profile: Option<String>,
    #[serde(default)]
    s: Option<f64>,
}

impl<'de> Deserialize<'de> for AnalyticSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = AnalyticRepr::deserialize(d)?;
        let declared = r
            .profile
            .map(|tag| AxiomProfile::from_tag(&tag, r.s))
            .transpose()
            .map_err(serde::de::Error::custom)?;
        AnalyticSpace::new(r.domain, r.p_form, r.theta_form, r.params, declared)
            .map_err(serde::de::Error::custom)
    }
}

/// Discretizes an analytic space on `n` uniformly spaced points of its domain.
///
/// The result keeps the grid coordinates and declares the analytic space's
/// profile, or the partial extended b-metric profile when none is declared.
pub fn sample_grid(space: &AnalyticSpace, n: usize) -> Result<FiniteSpace> {
    if n < 2 {
        return Err(Error::Argument(format!(
            "grid needs at least 2 points, got {n}"
        )));
    }
    let xs = space.domain.grid(n);
    let mut p = SquareMatrix::filled(n, 0.0);
    let mut theta = SquareMatrix::filled(n, 1.0);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate() {
            p[(i, j)] = space.p(x, y)?;
            theta[(i, j)] = space.theta(x, y)?;
        }
    }
    let labels = xs.iter().map(|x| x.to_string()).collect();
    let declared = space
        .declared
        .unwrap_or(AxiomProfile::PartialExtendedBMetric);
    Ok(FiniteSpace::new(labels, p, Some(theta), declared)?.with_coords(xs))
}
