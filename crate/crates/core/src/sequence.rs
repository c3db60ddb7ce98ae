//! Orbits of self-maps and windowed diagnostics for convergence, Cauchy and
//! 0-Cauchy behavior of sequences under a partial distance.
//!
//! A verdict here is a numerical judgment on a finite prefix, never a proof
//! about the limit; every verdict carries the tail value it was based on.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::spaces::{AnalyticSpace, FiniteSpace, Interval, Space};

const MAP_VALIDATION_SAMPLES: usize = 33;

/// A self-map `T: X -> X`.
pub trait SelfMap<P> {
    fn apply(&self, x: P) -> Result<P>;

    fn describe(&self) -> String;
}

/// A mapping table on the indices of a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMap {
    table: Vec<usize>,
}

impl FiniteMap {
    pub fn new(table: Vec<usize>, space: &FiniteSpace) -> Result<Self> {
        if table.len() != space.len() {
            return Err(Error::Construction(format!(
                "map table has {} entries for a {}-point space",
                table.len(),
                space.len()
            )));
        }
        if let Some((i, &t)) = table.iter().enumerate().find(|(_, &t)| t >= space.len()) {
            return Err(Error::Construction(format!(
                "map sends {i} to {t}, outside the space"
            )));
        }
        Ok(Self { table })
    }

    pub fn identity(space: &FiniteSpace) -> Self {
        Self {
            table: (0..space.len()).collect(),
        }
    }

    pub fn constant(space: &FiniteSpace, target: usize) -> Result<Self> {
        Self::new(vec![target; space.len()], space)
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }
}

impl SelfMap<usize> for FiniteMap {
    fn apply(&self, x: usize) -> Result<usize> {
        self.table.get(x).copied().ok_or_else(|| Error::Domain {
            point: x.to_string(),
            domain: format!("{{0..{}}}", self.table.len()),
        })
    }

    fn describe(&self) -> String {
        format!("table {:?}", self.table)
    }
}

/// A closed-form map `x -> f(x)` on an interval, written in the expression grammar.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMap {
    expr: Expr,
    domain: Interval,
    params: std::collections::BTreeMap<String, f64>,
}

impl AnalyticMap {
    /// Builds the map and checks on a sample grid that it stays in the domain.
    pub fn new(expr: Expr, space: &AnalyticSpace) -> Result<Self> {
        if expr.uses_y() {
            return Err(Error::Construction(format!("map {expr} may only use x")));
        }
        let map = Self {
            expr,
            domain: space.domain(),
            params: space.params().clone(),
        };
        for x in map.domain.grid(MAP_VALIDATION_SAMPLES) {
            let tx = map.apply(x)?;
            if !map.domain.contains(tx) {
                return Err(Error::Construction(format!(
                    "map {} sends {x} to {tx}, outside {}",
                    map.expr, map.domain
                )));
            }
        }
        Ok(map)
    }

    pub fn parse(src: &str, space: &AnalyticSpace) -> Result<Self> {
        Self::new(Expr::parse(src)?, space)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl SelfMap<f64> for AnalyticMap {
    fn apply(&self, x: f64) -> Result<f64> {
        let v = self
            .expr
            .eval(x, 0.0, &self.params)
            .map_err(Error::Argument)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Argument(format!(
                "map {} is not finite at {x}",
                self.expr
            )))
        }
    }

    fn describe(&self) -> String {
        format!("x -> {}", self.expr)
    }
}

/// An ordered run of points, optionally tagged with how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSequence<P> {
    pub terms: Vec<P>,
    pub generator: Option<String>,
}

impl<P> PointSequence<P> {
    pub fn new(terms: Vec<P>) -> Self {
        Self {
            terms,
            generator: None,
        }
    }

    pub fn generated(terms: Vec<P>, generator: impl Into<String>) -> Self {
        Self {
            terms,
            generator: Some(generator.into()),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn last_window(&self, window: usize) -> &[P] {
        &self.terms[self.terms.len() - window..]
    }
}

impl PointSequence<f64> {
    /// `x_n = f(n)` for `n = first..=last`.
    pub fn from_fn(first: usize, last: usize, f: impl Fn(usize) -> f64, generator: &str) -> Self {
        Self::generated((first..=last).map(f).collect(), generator)
    }
}

impl<P: Serialize> Serialize for PointSequence<P> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

/// `[x0, T x0, ..., T^n x0]`.
pub fn orbit<S, M>(space: &S, map: &M, x0: S::Point, n: usize) -> Result<PointSequence<S::Point>>
where
    S: Space,
    M: SelfMap<S::Point> + ?Sized,
{
    if !space.contains(x0) {
        return Err(space.domain_error(x0));
    }
    let mut terms = Vec::with_capacity(n + 1);
    terms.push(x0);
    let mut x = x0;
    for step in 1..=n {
        x = map.apply(x)?;
        if !space.contains(x) {
            return Err(Error::DomainEscape {
                step,
                value: x.to_string(),
                domain: space.domain_label(),
            });
        }
        terms.push(x);
    }
    Ok(PointSequence::generated(
        terms,
        format!("orbit of {} from {x0}", map.describe()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    pub converges: bool,
    /// `|p(x_N, x) - p(x, x)|` at the last index.
    pub discrepancy: f64,
    /// The discrepancy did not increase over the final quarter of the sequence.
    pub tail_non_increasing: bool,
}

/// Judges `x_n -> x` in the partial sense `p(x_n, x) -> p(x, x)`.
///
/// Limits need not be unique: under `p = max{x,y}` the sequence `1/n`
/// converges both to 0 and to any `x` with `p(x_n, x) = p(x, x)` eventually.
pub fn converges_to<S: Space>(
    space: &S,
    seq: &PointSequence<S::Point>,
    x: S::Point,
    tol: f64,
) -> Result<ConvergenceVerdict> {
    if seq.is_empty() {
        return Err(Error::Argument("sequence is empty".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let pxx = space.p(x, x)?;
    let quarter = seq.len().div_ceil(4);
    let tail = seq.last_window(quarter);
    let disc: Vec<f64> = tail
        .iter()
        .map(|&xn| space.p(xn, x).map(|v| (v - pxx).abs()))
        .collect::<Result<_>>()?;
    let discrepancy = *disc.last().expect("nonempty tail");
    let tail_non_increasing = disc.windows(2).all(|w| w[1] <= w[0]);
    Ok(ConvergenceVerdict {
        converges: discrepancy <= tol && tail_non_increasing,
        discrepancy,
        tail_non_increasing,
    })
}

fn window_values<S: Space>(
    space: &S,
    seq: &PointSequence<S::Point>,
    window: usize,
) -> Result<Vec<f64>> {
    if window < 2 {
        return Err(Error::Argument(format!(
            "window must be at least 2, got {window}"
        )));
    }
    if window > seq.len() {
        return Err(Error::Argument(format!(
            "window {window} exceeds sequence length {}",
            seq.len()
        )));
    }
    let tail = seq.last_window(window);
    let mut out = Vec::with_capacity(window * window);
    for &a in tail {
        for &b in tail {
            out.push(space.p(a, b)?);
        }
    }
    Ok(out)
}

/// `max p(x_n, x_m)` over all pairs (diagonal included) in the last `window`
/// terms. The sequence looks 0-Cauchy at `tol` when this is at most `tol`.
pub fn zero_cauchy_tail<S: Space>(
    space: &S,
    seq: &PointSequence<S::Point>,
    window: usize,
) -> Result<f64> {
    Ok(window_values(space, seq, window)?
        .into_iter()
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyTail {
    /// Mean of `p(x_n, x_m)` over the window.
    pub estimate: f64,
    /// `max - min` of `p(x_n, x_m)` over the window.
    pub spread: f64,
}

impl CauchyTail {
    pub fn is_cauchy(&self, tol: f64) -> bool {
        self.spread <= tol
    }
}

/// Estimates `lim p(x_n, x_m)` over the last `window` terms; the sequence
/// looks Cauchy when the spread is small, whatever the limit value.
pub fn cauchy_tail<S: Space>(
    space: &S,
    seq: &PointSequence<S::Point>,
    window: usize,
) -> Result<CauchyTail> {
    let vals = window_values(space, seq, window)?;
    let (lo, hi) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok(CauchyTail {
        estimate: vals.iter().sum::<f64>() / vals.len() as f64,
        spread: hi - lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SquareMatrix;
    use crate::spaces::AxiomProfile;

    fn max_space(hi: f64) -> AnalyticSpace {
        AnalyticSpace::parse((0.0, hi), "max(x,y)", "1+x+y", &[], None).unwrap()
    }

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
    fn quarter_map_orbit() {
        let s = max_space(1.0);
        let t = AnalyticMap::parse("x/4", &s).unwrap();
        assert_eq!(
            orbit(&s, &t, 1.0, 3).unwrap().terms,
            vec![1.0, 0.25, 0.0625, 0.015625]
        );
        let id = AnalyticMap::parse("x", &s).unwrap();
        assert_eq!(orbit(&s, &id, 0.3, 5).unwrap().terms, vec![0.3; 6]);
    }

    #[test]
    fn finite_constant_map_orbit() {
        let s = ex_235();
        let t = FiniteMap::constant(&s, 0).unwrap();
        assert_eq!(orbit(&s, &t, 2, 2).unwrap().terms, vec![2, 0, 0]);
        assert!(FiniteMap::new(vec![0, 1, 3], &s).is_err());
        assert!(FiniteMap::new(vec![0, 1], &s).is_err());
    }

    #[test]
    fn escaping_map_names_the_step() {
        let narrow = max_space(1.0);
        // bypasses the construction-time sample check
        let up = AnalyticMap {
            expr: Expr::parse("2*x").unwrap(),
            domain: narrow.domain(),
            params: Default::default(),
        };
        match orbit(&narrow, &up, 0.3, 3) {
            Err(Error::DomainEscape { step, .. }) => assert_eq!(step, 2),
            other => panic!("expected escape, got {other:?}"),
        }
        assert!(AnalyticMap::parse("2*x", &narrow).is_err());
        assert!(AnalyticMap::parse("x+y", &narrow).is_err());
    }

    #[test]
    fn reciprocal_sequence_converges_to_zero() {
        let s = max_space(1.0);
        let seq = PointSequence::from_fn(1, 1000, |n| 1.0 / n as f64, "1/n");
        let v = converges_to(&s, &seq, 0.0, 1e-2).unwrap();
        assert!(v.converges);
        assert_eq!(v.discrepancy, 1e-3);
    }

    #[test]
    fn constant_sequence_converges_with_zero_discrepancy() {
        let s = max_space(1.0);
        let seq = PointSequence::new(vec![0.4; 10]);
        let v = converges_to(&s, &seq, 0.4, 1e-12).unwrap();
        assert!(v.converges);
        assert_eq!(v.discrepancy, 0.0);
    }

    #[test]
    fn partial_limits_are_not_unique() {
        let s = max_space(1.0);
        let seq = PointSequence::from_fn(1, 1000, |n| 1.0 / n as f64, "1/n");
        let v = converges_to(&s, &seq, 0.5, 1e-2).unwrap();
        assert!(v.converges);
        assert_eq!(v.discrepancy, 0.0);
    }

    #[test]
    fn oscillating_discrepancy_is_not_convergence() {
        let s = max_space(1.0);
        let seq = PointSequence::new(
            (0..40)
                .map(|n| if n % 2 == 0 { 0.001 } else { 0.002 })
                .collect(),
        );
        let v = converges_to(&s, &seq, 0.0, 1e-2).unwrap();
        assert!(!v.tail_non_increasing);
        assert!(!v.converges);
    }

    #[test]
    fn argument_errors() {
        let s = max_space(1.0);
        let empty = PointSequence::<f64>::new(vec![]);
        assert!(converges_to(&s, &empty, 0.0, 1.0).is_err());
        let seq = PointSequence::new(vec![0.5; 3]);
        assert!(converges_to(&s, &seq, 0.0, 0.0).is_err());
        assert!(zero_cauchy_tail(&s, &seq, 4).is_err());
        assert!(cauchy_tail(&s, &seq, 1).is_err());
    }

    #[test]
    fn min_form_sequence_is_zero_cauchy() {
        let s = AnalyticSpace::parse((0.0, 2.0), "abs(x-y)+min(x,y)", "1+x+y", &[], None).unwrap();
        let seq = PointSequence::from_fn(1, 2000, |n| 1.0 / (n * n) as f64, "1/n^2");
        let tail = zero_cauchy_tail(&s, &seq, 100).unwrap();
        assert!(tail <= 2.0 / (1901.0 * 1901.0));
        assert!(tail > 0.0);
        let c = cauchy_tail(&s, &seq, 100).unwrap();
        assert!(c.estimate < tail && c.spread <= tail);
    }

    #[test]
    fn cauchy_but_not_zero_cauchy() {
        let s = max_space(1.0);
        let zeros = PointSequence::new(vec![0.0; 10]);
        assert_eq!(zero_cauchy_tail(&s, &zeros, 5).unwrap(), 0.0);
        let ones = PointSequence::new(vec![1.0; 10]);
        assert_eq!(zero_cauchy_tail(&s, &ones, 5).unwrap(), 1.0);
        assert_eq!(
            cauchy_tail(&s, &ones, 5).unwrap(),
            CauchyTail {
                estimate: 1.0,
                spread: 0.0
            }
        );
        let alt = PointSequence::new((0..10).map(|n| (n % 2) as f64).collect());
        let c = cauchy_tail(&s, &alt, 4).unwrap();
        assert_eq!(c.spread, 1.0);
        assert!(!c.is_cauchy(0.5));
    }

    #[test]
    fn sequences_serialize_as_arrays() {
        let seq = PointSequence::generated(vec![1.0, 0.25], "x/4");
        assert_eq!(serde_json::to_string(&seq).unwrap(), "[1.0,0.25]");
    }
}
