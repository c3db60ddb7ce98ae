//! Exhaustive axiom verification over finite spaces.
//!
//! Every profile is checked clause by clause: pair clauses (A1 to A3) over
//! all `n²` ordered pairs and the triangle clause (A4) over all `n³` ordered
//! triples, degenerate ones included. Equality clauses compare with an
//! absolute tolerance of [`EQ_TOL`]; inequality clauses compare exactly, as
//! real numbers, with no rounding between the stored values and the verdict.

mod minimal;
mod reductions;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use minimal::minimal_theta;
pub use reductions::{verify_reductions, Implication, ImplicationStatus, ReductionReport};

use crate::error::{Error, Result};
use crate::exact::{exact_sum, triangle_slack, two_prod};
use crate::spaces::profile::Control;
use crate::spaces::{sample_grid, AnalyticSpace, AxiomProfile, FiniteSpace, Space};

/// Absolute tolerance for the equality clauses A1 and A3.
pub const EQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AxiomId {
    #[serde(rename = "A1_indistancy")]
    Indistancy,
    #[serde(rename = "A2_small_self")]
    SmallSelf,
    #[serde(rename = "A3_symmetry")]
    Symmetry,
    #[serde(rename = "A4_triangle")]
    Triangle,
}

impl AxiomId {
    pub const ALL: [AxiomId; 4] = [
        Self::Indistancy,
        Self::SmallSelf,
        Self::Symmetry,
        Self::Triangle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Indistancy => "A1_indistancy",
            Self::SmallSelf => "A2_small_self",
            Self::Symmetry => "A3_symmetry",
            Self::Triangle => "A4_triangle",
        }
    }

    /// Number of points a witness of this axiom names.
    pub fn arity(&self) -> usize {
        match self {
            Self::Triangle => 3,
            _ => 2,
        }
    }

    /// Whether the clause applies under `profile`.
    pub fn applies_to(&self, profile: AxiomProfile) -> bool {
        match self {
            Self::SmallSelf => profile.is_partial(),
            _ => true,
        }
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: AxiomId,
    pub witness: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs` for inequality clauses; the absolute discrepancy for
    /// equality clauses.
    pub margin: f64,
    /// Grid coordinates of the witness points, when the space is a grid sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    #[serde(flatten)]
    pub profile: AxiomProfile,
    pub verdict: Verdict,
    pub checks_run: usize,
    pub checks_by_axiom: BTreeMap<AxiomId, usize>,
    pub violations: Vec<Violation>,
    /// Smallest slack over all checks; nonnegative on pass.
    pub worst_margin: f64,
    /// True when the space was a grid sample of an analytic space, so a pass
    /// is evidence on the grid rather than a proof on the interval.
    pub grid_relative: bool,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn violations_of(&self, axiom: AxiomId) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.axiom == axiom)
    }
}

/// Every intermediate of one triangle-clause evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleCheck {
    pub witness: [usize; 3],
    pub lhs: f64,
    pub theta: f64,
    pub pxy: f64,
    pub pyz: f64,
    /// `p(x,y) + p(y,z)`, rounded.
    pub sum: f64,
    /// `theta * sum`, rounded.
    pub product: f64,
    /// `p(y,y)` under partial profiles, 0 otherwise.
    pub self_term: f64,
    /// `theta * (p(x,y) + p(y,z)) - self_term`, rounded once.
    pub rhs: f64,
}

impl TriangleCheck {
    /// `rhs - lhs` over the reals, rounded once; its sign is exact.
    pub fn margin(&self) -> f64 {
        triangle_slack(self.lhs, self.theta, self.pxy, self.pyz, self.self_term)
    }

    pub fn holds(&self) -> bool {
        self.margin() >= 0.0
    }
}

/// `theta * (pxy + pyz) - pyy` over the reals, rounded once.
pub(crate) fn triangle_rhs(theta: f64, pxy: f64, pyz: f64, pyy: f64) -> f64 {
    let (a, ea) = two_prod(theta, pxy);
    let (b, eb) = two_prod(theta, pyz);
    exact_sum(&[a, ea, b, eb, -pyy])
}

/// Read-only view of a finite space under a profile.
struct View<'a> {
    space: &'a FiniteSpace,
    profile: AxiomProfile,
}

impl View<'_> {
    fn new(space: &FiniteSpace, profile: AxiomProfile) -> Result<View<'_>> {
        if profile.control() == Control::Matrix && space.theta_matrix().is_none() {
            return Err(Error::Configuration(format!(
                "profile {profile} needs a Theta matrix but the space has none"
            )));
        }
        Ok(View { space, profile })
    }

    fn p(&self, i: usize, j: usize) -> f64 {
        self.space.distance_matrix().get(i, j)
    }

    fn theta(&self, i: usize, k: usize) -> f64 {
        match self.profile.control() {
            Control::Constant(s) => s,
            Control::Matrix => self
                .space
                .theta_matrix()
                .expect("checked in View::new")
                .get(i, k),
        }
    }

    fn triangle(&self, x: usize, y: usize, z: usize) -> TriangleCheck {
        let theta = self.theta(x, z);
        let (pxy, pyz) = (self.p(x, y), self.p(y, z));
        let self_term = if self.profile.is_partial() {
            self.p(y, y)
        } else {
            0.0
        };
        let sum = pxy + pyz;
        TriangleCheck {
            witness: [x, y, z],
            lhs: self.p(x, z),
            theta,
            pxy,
            pyz,
            sum,
            product: theta * sum,
            self_term,
            rhs: triangle_rhs(theta, pxy, pyz, self_term),
        }
    }

    fn violation(
        &self,
        axiom: AxiomId,
        witness: Vec<usize>,
        lhs: f64,
        rhs: f64,
        margin: f64,
    ) -> Violation {
        let coords = self
            .space
            .coords()
            .map(|c| witness.iter().map(|&i| c[i]).collect());
        Violation {
            axiom,
            witness,
            lhs,
            rhs,
            margin,
            coords,
        }
    }

    /// Evaluates one pair clause; returns its slack and the violation, if any.
    fn pair_check(&self, axiom: AxiomId, i: usize, j: usize) -> (f64, Option<Violation>) {
        match axiom {
            AxiomId::Indistancy if !self.profile.is_partial() => {
                let d = self.p(i, j);
                if i == j {
                    // d(x,x) = 0
                    let slack = EQ_TOL - d.abs();
                    let v =
                        (slack < 0.0).then(|| self.violation(axiom, vec![i, j], d, 0.0, d.abs()));
                    (slack, v)
                } else {
                    // d(x,y) = 0 only if x = y
                    let slack = d - EQ_TOL;
                    let v =
                        (slack <= 0.0).then(|| self.violation(axiom, vec![i, j], d, 0.0, d.abs()));
                    (slack, v)
                }
            }
            AxiomId::Indistancy => {
                if i == j {
                    // the forward direction is an identity on the diagonal
                    return (EQ_TOL, None);
                }
                let (pii, pij, pjj) = (self.p(i, i), self.p(i, j), self.p(j, j));
                let (di, dj) = ((pij - pii).abs(), (pij - pjj).abs());
                let disc = di.max(dj);
                let slack = disc - EQ_TOL;
                let v = (slack <= 0.0).then(|| {
                    let rhs = if di >= dj { pii } else { pjj };
                    self.violation(axiom, vec![i, j], pij, rhs, disc)
                });
                (slack, v)
            }
            AxiomId::SmallSelf => {
                let (lhs, rhs) = (self.p(i, i), self.p(i, j));
                let slack = rhs - lhs;
                let v = (lhs > rhs).then(|| self.violation(axiom, vec![i, j], lhs, rhs, slack));
                (slack, v)
            }
            AxiomId::Symmetry => {
                let (lhs, rhs) = (self.p(i, j), self.p(j, i));
                let disc = (lhs - rhs).abs();
                let slack = EQ_TOL - disc;
                let v = (slack < 0.0).then(|| self.violation(axiom, vec![i, j], lhs, rhs, disc));
                (slack, v)
            }
            AxiomId::Triangle => unreachable!("triangle is a triple clause"),
        }
    }
}

#[derive(Default)]
struct Tally {
    worst: f64,
    violations: Vec<Violation>,
}

impl Tally {
    fn new() -> Self {
        Self {
            worst: f64::INFINITY,
            violations: Vec::new(),
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.worst = self.worst.min(other.worst);
        self.violations.extend(other.violations);
        self
    }
}

/// Checks every clause of `profile` on every applicable tuple of `space`.
pub fn check_axioms(space: &FiniteSpace, profile: AxiomProfile) -> Result<AxiomReport> {
    let view = View::new(space, profile)?;
    let n = space.len();
    let mut counts = BTreeMap::new();

    let mut tally = Tally::new();
    for axiom in [AxiomId::Indistancy, AxiomId::SmallSelf, AxiomId::Symmetry] {
        if !axiom.applies_to(profile) {
            continue;
        }
        counts.insert(axiom, n * n);
        for i in 0..n {
            for j in 0..n {
                let (slack, v) = view.pair_check(axiom, i, j);
                tally.worst = tally.worst.min(slack);
                tally.violations.extend(v);
            }
        }
    }

    counts.insert(AxiomId::Triangle, n * n * n);
    let triangles = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut t = Tally::new();
            for y in 0..n {
                for z in 0..n {
                    let c = view.triangle(x, y, z);
                    t.worst = t.worst.min(c.margin());
                    if !c.holds() {
                        t.violations.push(view.violation(
                            AxiomId::Triangle,
                            vec![x, y, z],
                            c.lhs,
                            c.rhs,
                            c.margin(),
                        ));
                    }
                }
            }
            t
        })
        .reduce(Tally::new, Tally::merge);
    tally = tally.merge(triangles);

    tally
        .violations
        .sort_by(|a, b| a.witness.cmp(&b.witness).then(a.axiom.cmp(&b.axiom)));
    let worst_margin = if n == 0 { 0.0 } else { tally.worst };
    Ok(AxiomReport {
        profile,
        verdict: if tally.violations.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        checks_run: counts.values().sum(),
        checks_by_axiom: counts,
        violations: tally.violations,
        worst_margin,
        grid_relative: space.coords().is_some(),
    })
}

/// Samples `space` on an `n`-point grid and checks the result.
///
/// A fail is a genuine counterexample; a pass only covers the grid.
pub fn check_axioms_sampled(
    space: &AnalyticSpace,
    n: usize,
    profile: AxiomProfile,
) -> Result<AxiomReport> {
    let grid = sample_grid(space, n)?;
    let mut report = check_axioms(&grid, profile)?;
    report.grid_relative = true;
    Ok(report)
}

/// Intermediates of the triangle clause at the ordered triple `(x, y, z)`.
pub fn explain_triangle(
    space: &FiniteSpace,
    profile: AxiomProfile,
    x: usize,
    y: usize,
    z: usize,
) -> Result<TriangleCheck> {
    for i in [x, y, z] {
        if !space.contains(i) {
            return Err(space.domain_error(i));
        }
    }
    Ok(View::new(space, profile)?.triangle(x, y, z))
}

/// All `n³` triangle evaluations in lexicographic order.
pub fn triangle_detail(space: &FiniteSpace, profile: AxiomProfile) -> Result<Vec<TriangleCheck>> {
    let view = View::new(space, profile)?;
    let n = space.len();
    let mut out = Vec::with_capacity(n * n * n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                out.push(view.triangle(x, y, z));
            }
        }
    }
    Ok(out)
}

/// Re-evaluates the clause a violation names at its witness.
///
/// Returns the recomputed violation when the clause still fails there.
pub fn recheck(
    space: &FiniteSpace,
    profile: AxiomProfile,
    v: &Violation,
) -> Result<Option<Violation>> {
    if v.witness.len() != v.axiom.arity() || v.witness.iter().any(|&i| !space.contains(i)) {
        return Err(Error::Argument(format!(
            "witness {:?} does not fit {}",
            v.witness, v.axiom
        )));
    }
    let view = View::new(space, profile)?;
    Ok(match v.axiom {
        AxiomId::Triangle => {
            let c = view.triangle(v.witness[0], v.witness[1], v.witness[2]);
            (!c.holds()).then(|| {
                view.violation(
                    AxiomId::Triangle,
                    v.witness.clone(),
                    c.lhs,
                    c.rhs,
                    c.margin(),
                )
            })
        }
        axiom => view.pair_check(axiom, v.witness[0], v.witness[1]).1,
    })
}
