use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::bounds::{kannan_step_bound, modkannan_step_bound};
use super::{ContractionSpec, Family, Precondition};
use crate::error::{Error, Result};
use crate::sequence::SelfMap;
use crate::spaces::Space;

pub const TRACE_HEADER: &str = "n,x,step_dist,self_dist,bound,n_self";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow<P> {
    pub n: usize,
    pub x: P,
    /// `p(x_n, x_{n+1})`
    pub step_dist: f64,
    /// `p(x_n, x_n)`
    pub self_dist: f64,
    /// The active family's bound on this step, when a family is attached.
    pub bound: Option<f64>,
    /// `n * p(x_n, x_n)`
    pub n_self: f64,
}

/// Rows `0..=N` of a Picard run plus every realized point `x_0..x_{N+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace<P> {
    pub spec: Option<ContractionSpec>,
    pub rows: Vec<TraceRow<P>>,
    points: Vec<P>,
}

impl<P: Copy> IterationTrace<P> {
    /// `x_0, ..., x_{N+1}`; a trace read back from CSV ends at `x_N`.
    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl<P: fmt::Display> IterationTrace<P> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let bound = r.bound.map(|b| b.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n, r.x, r.step_dist, r.self_dist, bound, r.n_self
            );
        }
        out
    }
}

impl<P: Copy + FromStr> IterationTrace<P> {
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == TRACE_HEADER => {}
            other => {
                return Err(Error::Format(format!(
                    "trace header must be {TRACE_HEADER:?}, got {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let mut rows = Vec::new();
        for (line_no, line) in lines.enumerate() {
            let bad = |what: &str| {
                Error::Format(format!("trace row {}: bad {what} in {line:?}", line_no + 1))
            };
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 6 {
                return Err(bad("column count"));
            }
            let num = |i: usize, what: &str| cols[i].parse::<f64>().map_err(|_| bad(what));
            let n = cols[0].parse::<usize>().map_err(|_| bad("n"))?;
            if n != rows.len() {
                return Err(bad("row index"));
            }
            rows.push(TraceRow {
                n,
                x: cols[1].parse::<P>().map_err(|_| bad("x"))?,
                step_dist: num(2, "step_dist")?,
                self_dist: num(3, "self_dist")?,
                bound: if cols[4].is_empty() {
                    None
                } else {
                    Some(num(4, "bound")?)
                },
                n_self: num(5, "n_self")?,
            });
        }
        let points = rows.iter().map(|r| r.x).collect();
        Ok(Self {
            spec: None,
            rows,
            points,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCertificate<P> {
    pub fixed_point: P,
    /// `p(Tu, u)`
    pub residual: f64,
    /// `p(u, u)`
    pub self_distance: f64,
    pub iterations: usize,
    pub preconditions: Vec<Precondition>,
    /// Set once a multi-start probe has been run.
    pub unique_within_starts: Option<bool>,
}

impl<P> ConvergenceCertificate<P> {
    pub fn all_preconditions_verified(&self) -> bool {
        self.preconditions.iter().all(|p| p.verified)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome<P> {
    Converged(ConvergenceCertificate<P>),
    /// `max_iter` steps without meeting the stopping rule.
    Exhausted {
        iterations: usize,
        final_step_dist: f64,
        last: P,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardRun<P> {
    pub trace: IterationTrace<P>,
    pub outcome: Outcome<P>,
}

impl<P> PicardRun<P> {
    pub fn certificate(&self) -> Option<&ConvergenceCertificate<P>> {
        match &self.outcome {
            Outcome::Converged(c) => Some(c),
            Outcome::Exhausted { .. } => None,
        }
    }

    pub fn converged(&self) -> bool {
        self.certificate().is_some()
    }
}

struct Recorder<'a, S: Space, M: ?Sized> {
    space: &'a S,
    map: &'a M,
    spec: Option<ContractionSpec>,
    rows: Vec<TraceRow<S::Point>>,
    points: Vec<S::Point>,
}

impl<'a, S, M> Recorder<'a, S, M>
where
    S: Space,
    M: SelfMap<S::Point> + ?Sized,
{
    fn start(
        space: &'a S,
        map: &'a M,
        x0: S::Point,
        spec: Option<ContractionSpec>,
    ) -> Result<Self> {
        if !space.contains(x0) {
            return Err(space.domain_error(x0));
        }
        Ok(Self {
            space,
            map,
            spec,
            rows: Vec::new(),
            points: vec![x0],
        })
    }

    /// Applies `T` once more and records row `n`; returns `(x_n, x_{n+1})`.
    fn step(&mut self) -> Result<(S::Point, S::Point)> {
        let n = self.rows.len();
        let x = self.points[n];
        let next = self.map.apply(x)?;
        if !self.space.contains(next) {
            return Err(Error::DomainEscape {
                step: n + 1,
                value: next.to_string(),
                domain: self.space.domain_label(),
            });
        }
        self.points.push(next);
        let step_dist = self.space.p(x, next)?;
        let self_dist = self.space.p(x, x)?;
        let bound = match self.spec {
            None => None,
            Some(spec) => Some(match spec.family {
                Family::Banach => {
                    spec.k.powi(n as i32) * self.rows.first().map_or(step_dist, |r| r.step_dist)
                }
                Family::Kannan => kannan_step_bound(
                    spec.k,
                    n,
                    self.rows.first().map_or(step_dist, |r| r.step_dist),
                )?,
                Family::ModifiedKannan => {
                    modkannan_step_bound(self.space, &self.points, spec.k, n)?
                }
            }),
        };
        self.rows.push(TraceRow {
            n,
            x,
            step_dist,
            self_dist,
            bound,
            n_self: n as f64 * self_dist,
        });
        Ok((x, next))
    }

    fn finish(self) -> IterationTrace<S::Point> {
        IterationTrace {
            spec: self.spec,
            rows: self.rows,
            points: self.points,
        }
    }
}

/// Iterates `x_{n+1} = T x_n` and stops at the first `n` where
/// `p(x_n, x_{n+1})`, `p(x_{n+1}, x_n)` and `p(x_n, x_n)` are all at most `tol`;
/// `x_n` is then the certified fixed point after `n` applications of `T`.
///
/// The trace bound column follows `spec` when one is given.
pub fn picard_solve<S, M>(
    space: &S,
    map: &M,
    x0: S::Point,
    tol: f64,
    max_iter: usize,
    spec: Option<ContractionSpec>,
) -> Result<PicardRun<S::Point>>
where
    S: Space,
    M: SelfMap<S::Point> + ?Sized,
{
    if !(tol > 0.0) {
        return Err(Error::Argument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::Argument("max_iter must be at least 1".into()));
    }
    let mut rec = Recorder::start(space, map, x0, spec)?;
    for _ in 0..max_iter {
        let (u, tu) = rec.step()?;
        let row = rec.rows.last().expect("row just recorded");
        if row.step_dist > tol || row.self_dist > tol {
            continue;
        }
        let residual = space.p(tu, u)?;
        if residual <= tol {
            let cert = ConvergenceCertificate {
                fixed_point: u,
                residual,
                self_distance: row.self_dist,
                iterations: row.n,
                preconditions: Vec::new(),
                unique_within_starts: None,
            };
            return Ok(PicardRun {
                trace: rec.finish(),
                outcome: Outcome::Converged(cert),
            });
        }
    }
    let last_row = rec.rows.last().expect("max_iter >= 1");
    let outcome = Outcome::Exhausted {
        iterations: max_iter,
        final_step_dist: last_row.step_dist,
        last: *rec.points.last().expect("nonempty"),
    };
    Ok(PicardRun {
        trace: rec.finish(),
        outcome,
    })
}

/// Records exactly `steps` rows of the orbit of `x0`, with no stopping rule.
pub fn record_trace<S, M>(
    space: &S,
    map: &M,
    x0: S::Point,
    steps: usize,
    spec: Option<ContractionSpec>,
) -> Result<IterationTrace<S::Point>>
where
    S: Space,
    M: SelfMap<S::Point> + ?Sized,
{
    let mut rec = Recorder::start(space, map, x0, spec)?;
    for _ in 0..steps {
        rec.step()?;
    }
    Ok(rec.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartResult<P> {
    pub start: P,
    pub fixed_point: Option<P>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport<P> {
    pub passed: bool,
    pub runs: Vec<StartResult<P>>,
    /// Largest induced distance between two certified fixed points.
    pub max_pairwise: f64,
    pub non_convergent: Vec<P>,
    pub detail: String,
}

/// Solves from every start and compares the certified fixed points under the
/// induced distance, which is zero on the diagonal.
pub fn uniqueness_probe<S, M>(
    space: &S,
    map: &M,
    starts: &[S::Point],
    tol: f64,
    max_iter: usize,
) -> Result<UniquenessReport<S::Point>>
where
    S: Space,
    M: SelfMap<S::Point> + Sync + ?Sized,
{
    if starts.is_empty() {
        return Err(Error::Argument(
            "uniqueness probe needs at least one start".into(),
        ));
    }
    let runs: Vec<StartResult<S::Point>> = starts
        .par_iter()
        .map(|&start| {
            let run = picard_solve(space, map, start, tol, max_iter, None)?;
            Ok(match run.outcome {
                Outcome::Converged(c) => StartResult {
                    start,
                    fixed_point: Some(c.fixed_point),
                    iterations: c.iterations,
                },
                Outcome::Exhausted { iterations, .. } => StartResult {
                    start,
                    fixed_point: None,
                    iterations,
                },
            })
        })
        .collect::<Result<_>>()?;
    let non_convergent: Vec<_> = runs
        .iter()
        .filter(|r| r.fixed_point.is_none())
        .map(|r| r.start)
        .collect();
    let fixed: Vec<_> = runs.iter().filter_map(|r| r.fixed_point).collect();
    let mut max_pairwise = 0.0_f64;
    let mut far = None;
    for (i, &u) in fixed.iter().enumerate() {
        for &w in &fixed[i + 1..] {
            let d = space.induced(u, w)?.max(space.induced(w, u)?);
            if d > max_pairwise {
                max_pairwise = d;
                far = Some((u, w));
            }
        }
    }
    let (passed, detail) = if let Some(s) = non_convergent.first() {
        (
            false,
            format!("start {s} did not converge within {max_iter} iterations"),
        )
    } else if max_pairwise > tol {
        let (u, w) = far.expect("positive distance has a pair");
        (
            false,
            format!("fixed points {u} and {w} are {max_pairwise} apart"),
        )
    } else {
        (true, format!("{} starts agree within {tol}", runs.len()))
    };
    Ok(UniquenessReport {
        passed,
        runs,
        max_pairwise,
        non_convergent,
        detail,
    })
}
