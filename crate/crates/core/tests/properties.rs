use pebms::axioms::{check_axioms, minimal_theta, AxiomId};
use pebms::{
    cauchy_tail, gen_space, induced_ebm, mutate_theta, orbit, picard_solve, record_trace, shrink,
    zero_cauchy_tail, AnalyticMap, AnalyticSpace, AxiomProfile, FiniteSpace, Mutation,
    PointSequence, SelfMap, Space, SpaceDoc, SquareMatrix,
};
use proptest::prelude::*;

const PEBM: AxiomProfile = AxiomProfile::PartialExtendedBMetric;

fn generated() -> impl Strategy<Value = FiniteSpace> {
    (2usize..=8, any::<u64>()).prop_map(|(n, seed)| gen_space(n, seed).unwrap())
}

fn ulp_below(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

fn max_space() -> AnalyticSpace {
    AnalyticSpace::parse((0.0, 1.0), "max(x,y)", "1+x+y", &[], Some(PEBM)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_spaces_pass_pebm(space in generated()) {
        let report = check_axioms(&space, PEBM).unwrap();
        prop_assert!(report.passed(), "{:?}", report.violations.first());
    }

    #[test]
    fn induced_space_is_an_extended_b_metric(space in generated()) {
        let d = induced_ebm(&space);
        for i in 0..d.len() {
            prop_assert_eq!(d.distance_matrix().get(i, i), 0.0);
        }
        prop_assert!(check_axioms(&d, AxiomProfile::ExtendedBMetric).unwrap().passed());
    }

    #[test]
    fn raising_theta_keeps_the_space_valid(space in generated(), factor in 1.0f64..4.0) {
        let theta = space.theta_matrix().unwrap();
        let raised = SquareMatrix::from_fn(theta.dim(), |i, j| theta.get(i, j) * factor);
        let raised = space.with_theta(raised).unwrap();
        prop_assert!(check_axioms(&raised, PEBM).unwrap().passed());
    }

    #[test]
    fn minimal_theta_is_tight(space in generated()) {
        let p = space.distance_matrix();
        let min = minimal_theta(p).unwrap();
        prop_assert!(check_axioms(&space.with_theta(min.clone()).unwrap(), PEBM).unwrap().passed());
        for ((i, j), t) in min.iter() {
            if t > 1.0 {
                let lowered = SquareMatrix::from_fn(min.dim(), |a, b| {
                    if (a, b) == (i, j) { ulp_below(t) } else { min.get(a, b) }
                });
                let report = check_axioms(&space.with_theta(lowered).unwrap(), PEBM).unwrap();
                prop_assert!(report.violations_of(AxiomId::Triangle).next().is_some(), "entry ({}, {})", i, j);
            }
        }
    }

    #[test]
    fn mutation_is_detected(space in generated()) {
        let tight = space.with_theta(minimal_theta(space.distance_matrix()).unwrap()).unwrap();
        if let Mutation::Mutated { space: mutated, .. } = mutate_theta(&tight, 0.9).unwrap() {
            let report = check_axioms(&mutated, PEBM).unwrap();
            prop_assert!(report.violations_of(AxiomId::Triangle).next().is_some());
        }
    }

    #[test]
    fn shrinking_keeps_the_axiom_and_reaches_its_arity(space in generated()) {
        let tight = space.with_theta(minimal_theta(space.distance_matrix()).unwrap()).unwrap();
        if let Mutation::Mutated { space: mutated, .. } = mutate_theta(&tight, 0.9).unwrap() {
            let (small, v) = shrink(&mutated, PEBM, AxiomId::Triangle).unwrap();
            prop_assert_eq!(v.axiom, AxiomId::Triangle);
            prop_assert!(small.len() <= mutated.len());
            prop_assert!((2..=3).contains(&small.len()));
            let again = check_axioms(&small, PEBM).unwrap();
            prop_assert_eq!(again.violations_of(AxiomId::Triangle).next(), Some(&v));
        }
    }

    #[test]
    fn space_json_round_trips_exactly(space in generated()) {
        let doc = SpaceDoc::Finite(space);
        let back = SpaceDoc::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), doc.to_json());
    }

    #[test]
    fn zero_cauchy_implies_cauchy(a in 0.0f64..0.5, c in 0.0f64..0.5, window in 2usize..50) {
        let space = max_space();
        let seq = PointSequence::from_fn(1, 400, |n| a + c / (n * n) as f64, "a+c/n^2");
        let zero = zero_cauchy_tail(&space, &seq, window).unwrap();
        let tail = cauchy_tail(&space, &seq, window).unwrap();
        prop_assert!(tail.spread <= zero);
        prop_assert!(tail.estimate <= zero);
    }

    #[test]
    fn self_distance_never_exceeds_step_distance(c in 0.0f64..0.95, x0 in 0.0f64..=1.0) {
        let space = max_space();
        let map = AnalyticMap::parse(&format!("{c}*x"), &space).unwrap();
        let trace = record_trace(&space, &map, x0, 30, None).unwrap();
        for r in &trace.rows {
            prop_assert!(r.self_dist <= r.step_dist);
        }
    }

    #[test]
    fn orbits_are_deterministic(c in 0.0f64..1.0, x0 in 0.0f64..=1.0, n in 1usize..60) {
        let space = max_space();
        let map = AnalyticMap::parse(&format!("{c}*x*x"), &space).unwrap();
        let a = orbit(&space, &map, x0, n).unwrap();
        let b = orbit(&space, &map, x0, n).unwrap();
        prop_assert_eq!(a.terms, b.terms);
    }

    #[test]
    fn certificates_are_sound(c in 0.0f64..0.9, x0 in 0.0f64..=1.0, tol in 1e-12f64..1e-3) {
        let space = max_space();
        let map = AnalyticMap::parse(&format!("{c}*x"), &space).unwrap();
        let run = picard_solve(&space, &map, x0, tol, 10_000, None).unwrap();
        let cert = run.certificate().expect("linear contraction converges");
        let u = cert.fixed_point;
        let tu = map.apply(u).unwrap();
        prop_assert!(space.p(u, tu).unwrap() <= tol);
        prop_assert!(space.p(tu, u).unwrap() <= tol);
        prop_assert!(space.p(u, u).unwrap() <= tol);
        prop_assert_eq!(cert.residual, space.p(tu, u).unwrap());
    }
}
