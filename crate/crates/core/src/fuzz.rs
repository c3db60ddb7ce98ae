//! Random finite spaces that satisfy the partial extended b-metric axioms by
//! construction, control-matrix mutations that must break them, and a
//! shrinker for the resulting counterexamples.
//!
//! Randomness is ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`. Trial
//! `t` of a campaign draws its point count and a 64-bit generation seed from
//! stream `t` of the campaign seed, so each trial replays on its own through
//! [`gen_space`] and results do not depend on scheduling.

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axioms::{check_axioms, minimal_theta, AxiomId, Violation, EQ_TOL};
use crate::error::{Error, Result};
use crate::exact::triangle_slack;
use crate::matrix::SquareMatrix;
use crate::spaces::{AxiomProfile, FiniteSpace};

pub const GENERATOR: &str = "chacha8 (rand_chacha 0.9), seed_from_u64";

const OFF_DIAGONAL: (f64, f64) = (0.1, 10.0);
const DIAGONAL_FRACTION: f64 = 0.9;
const INFLATION: (f64, f64) = (1.0, 3.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Profile the generated spaces declare and are checked under.
    #[serde(flatten)]
    pub profile: AxiomProfile,
    pub mutation_factor: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 8,
            trials: 100,
            seed: 42,
            profile: AxiomProfile::PartialExtendedBMetric,
            mutation_factor: 0.9,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Argument("trials must be at least 1".into()));
        }
        if self.n_min < 2 || self.n_min > self.n_max {
            return Err(Error::Argument(format!(
                "point range must satisfy 2 <= n_min <= n_max, got [{}, {}]",
                self.n_min, self.n_max
            )));
        }
        if !(self.mutation_factor > 0.0 && self.mutation_factor < 1.0) {
            return Err(Error::Argument(format!(
                "mutation factor must lie in (0, 1), got {}",
                self.mutation_factor
            )));
        }
        Ok(())
    }
}

/// A random `n`-point partial extended b-metric space, deterministic in `seed`.
///
/// Off-diagonal entries are uniform on `[0.1, 10]`, each diagonal entry is a
/// uniform fraction in `[0, 0.9]` of its row minimum, and the control matrix
/// is the minimal one scaled by a uniform factor in `[1, 3]`.
pub fn gen_space(n: usize, seed: u64) -> Result<FiniteSpace> {
    if n < 2 {
        return Err(Error::Argument(format!(
            "generated spaces need at least 2 points, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = SquareMatrix::filled(n, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(OFF_DIAGONAL.0..=OFF_DIAGONAL.1);
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    for i in 0..n {
        let row_min = (0..n)
            .filter(|&j| j != i)
            .map(|j| p.get(i, j))
            .fold(f64::INFINITY, f64::min);
        p[(i, i)] = rng.random_range(0.0..=DIAGONAL_FRACTION) * row_min;
    }
    // p(x,y) must stay apart from p(x,x) or p(y,y) beyond the equality tolerance
    for i in 0..n {
        for j in i + 1..n {
            let mut v = p.get(i, j);
            while (v - p.get(i, i)).abs() <= EQ_TOL && (v - p.get(j, j)).abs() <= EQ_TOL {
                v = (v + 2.0 * EQ_TOL).next_up();
            }
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    let factor = rng.random_range(INFLATION.0..=INFLATION.1);
    let base = minimal_theta(&p)?;
    let theta = SquareMatrix::from_fn(n, |i, k| (base.get(i, k) * factor).max(1.0));
    FiniteSpace::unlabeled(p, Some(theta), AxiomProfile::PartialExtendedBMetric)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Mutation {
    Mutated {
        #[serde(skip)]
        space: FiniteSpace,
        /// `(x, y, z)` of the tightest triangle check; `Θ(x, z)` was scaled.
        triple: [usize; 3],
        before: f64,
        after: f64,
    },
    /// Every control entry is already at the floor of 1.
    Impossible,
}

/// Scales `Θ(x, z)` by `factor` at the triangle check with the smallest
/// margin among those whose control entry exceeds 1, clamping at 1.
pub fn mutate_theta(space: &FiniteSpace, factor: f64) -> Result<Mutation> {
    if !(factor > 0.0 && factor < 1.0) {
        return Err(Error::Argument(format!(
            "mutation factor must lie in (0, 1), got {factor}"
        )));
    }
    let theta = space.control_matrix()?;
    let p = space.distance_matrix();
    let partial = space.declared().is_partial();
    let n = space.len();
    let mut best: Option<(f64, [usize; 3])> = None;
    for x in 0..n {
        for z in 0..n {
            let t = theta.get(x, z);
            if t <= 1.0 {
                continue;
            }
            for y in 0..n {
                let pyy = if partial { p.get(y, y) } else { 0.0 };
                let m = triangle_slack(p.get(x, z), t, p.get(x, y), p.get(y, z), pyy);
                if best.is_none_or(|(bm, _)| m < bm) {
                    best = Some((m, [x, y, z]));
                }
            }
        }
    }
    let Some((_, triple)) = best else {
        return Ok(Mutation::Impossible);
    };
    let [x, _, z] = triple;
    let before = theta.get(x, z);
    let after = (before * factor).max(1.0);
    let mut mutated = theta;
    mutated[(x, z)] = after;
    Ok(Mutation::Mutated {
        space: space.with_theta(mutated)?,
        triple,
        before,
        after,
    })
}

/// Greedily removes points while some violation of `axiom` persists, never
/// going below the axiom's arity. Returns the smallest space reached and its
/// first violation of `axiom`.
pub fn shrink(
    space: &FiniteSpace,
    profile: AxiomProfile,
    axiom: AxiomId,
) -> Result<(FiniteSpace, Violation)> {
    let first = |s: &FiniteSpace| -> Result<Option<Violation>> {
        Ok(check_axioms(s, profile)?
            .violations_of(axiom)
            .next()
            .cloned())
    };
    let mut current = space.clone();
    let mut violation = first(&current)?
        .ok_or_else(|| Error::Argument(format!("space has no {axiom} violation to shrink")))?;
    'outer: while current.len() > axiom.arity() {
        for drop in 0..current.len() {
            let keep: Vec<usize> = (0..current.len()).filter(|&i| i != drop).collect();
            let candidate = current.subspace(&keep);
            if let Some(v) = first(&candidate)? {
                current = candidate;
                violation = v;
                continue 'outer;
            }
        }
        break;
    }
    Ok((current, violation))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleKind {
    /// Produced on purpose by the control-matrix mutation.
    ExpectedMutation,
    /// A generated space failed the checker: a generator or checker bug.
    GeneratorAnomaly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub trial: usize,
    pub kind: CounterexampleKind,
    pub space: FiniteSpace,
    /// First violation of the shrunk space in checker order; `check_axioms`
    /// on `space` reproduces it exactly.
    pub violation: Violation,
    pub shrunk: bool,
    pub original_size: usize,
    pub generation_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub n: usize,
    pub generation_seed: u64,
    pub generated_passed: bool,
    pub mutation: Option<Mutation>,
    pub mutation_caught: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzStats {
    pub config: FuzzConfig,
    pub generator: &'static str,
    pub trials: usize,
    pub generated_passed: usize,
    pub generated_failed: usize,
    pub mutations_possible: usize,
    pub mutations_caught: usize,
    pub mutations_missed: usize,
    pub mutations_impossible: usize,
    pub shrunk: usize,
    pub violations_by_axiom: BTreeMap<AxiomId, usize>,
}

impl FuzzStats {
    /// Generated spaces that failed plus mutations the checker missed.
    pub fn inconsistencies(&self) -> usize {
        self.generated_failed + self.mutations_missed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzCampaign {
    pub stats: FuzzStats,
    pub trials: Vec<TrialOutcome>,
    pub counterexamples: Vec<CounterexampleReport>,
}

/// Point count and generation seed of trial `t`.
pub fn trial_parameters(config: &FuzzConfig, trial: usize) -> (usize, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial as u64);
    let n = rng.random_range(config.n_min..=config.n_max);
    (n, rng.next_u64())
}

fn counterexample(
    trial: usize,
    kind: CounterexampleKind,
    space: &FiniteSpace,
    profile: AxiomProfile,
    axiom: AxiomId,
    seed: u64,
) -> Result<CounterexampleReport> {
    let (small, violation) = shrink(space, profile, axiom)?;
    Ok(CounterexampleReport {
        trial,
        kind,
        shrunk: small.len() < space.len(),
        original_size: space.len(),
        space: small,
        violation,
        generation_seed: seed,
    })
}

fn run_trial(
    config: &FuzzConfig,
    trial: usize,
) -> Result<(TrialOutcome, Vec<CounterexampleReport>)> {
    let (n, seed) = trial_parameters(config, trial);
    let space = gen_space(n, seed)?.with_declared(config.profile);
    let mut found = Vec::new();
    let report = check_axioms(&space, config.profile)?;
    if let Some(v) = report.violations.first() {
        found.push(counterexample(
            trial,
            CounterexampleKind::GeneratorAnomaly,
            &space,
            config.profile,
            v.axiom,
            seed,
        )?);
    }
    // the mutation targets the minimal control, where every entry above 1 is tight
    let tight = space.with_theta(minimal_theta(space.distance_matrix())?)?;
    let mutation = mutate_theta(&tight, config.mutation_factor)?;
    let caught = match &mutation {
        Mutation::Impossible => None,
        Mutation::Mutated { space: mutated, .. } => {
            let r = check_axioms(mutated, config.profile)?;
            let hit = r.violations_of(AxiomId::Triangle).next().is_some();
            if hit {
                found.push(counterexample(
                    trial,
                    CounterexampleKind::ExpectedMutation,
                    mutated,
                    config.profile,
                    AxiomId::Triangle,
                    seed,
                )?);
            }
            Some(hit)
        }
    };
    Ok((
        TrialOutcome {
            trial,
            n,
            generation_seed: seed,
            generated_passed: report.passed(),
            mutation: Some(mutation),
            mutation_caught: caught,
        },
        found,
    ))
}

/// Runs every trial of `config` in parallel; output order follows trial index.
pub fn fuzz_campaign(config: &FuzzConfig) -> Result<FuzzCampaign> {
    config.validate()?;
    let results: Vec<(TrialOutcome, Vec<CounterexampleReport>)> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<_>>()?;
    let mut stats = FuzzStats {
        config: *config,
        generator: GENERATOR,
        trials: config.trials,
        generated_passed: 0,
        generated_failed: 0,
        mutations_possible: 0,
        mutations_caught: 0,
        mutations_missed: 0,
        mutations_impossible: 0,
        shrunk: 0,
        violations_by_axiom: BTreeMap::new(),
    };
    let mut trials = Vec::with_capacity(results.len());
    let mut counterexamples = Vec::new();
    for (outcome, found) in results {
        if outcome.generated_passed {
            stats.generated_passed += 1;
        } else {
            stats.generated_failed += 1;
        }
        match outcome.mutation_caught {
            None => stats.mutations_impossible += 1,
            Some(hit) => {
                stats.mutations_possible += 1;
                if hit {
                    stats.mutations_caught += 1;
                } else {
                    stats.mutations_missed += 1;
                }
            }
        }
        for c in &found {
            stats.shrunk += usize::from(c.shrunk);
            *stats
                .violations_by_axiom
                .entry(c.violation.axiom)
                .or_default() += 1;
        }
        trials.push(outcome);
        counterexamples.extend(found);
    }
    Ok(FuzzCampaign {
        stats,
        trials,
        counterexamples,
    })
}
