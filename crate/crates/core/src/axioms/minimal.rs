use crate::error::{Error, Result};
use crate::exact::triangle_slack;
use crate::matrix::SquareMatrix;

/// The pointwise-smallest control matrix under which `p` satisfies the
/// partial triangle clause `p(i,k) <= θ(i,k)[p(i,j) + p(j,k)] - p(j,j)`.
///
/// Each entry is the smallest `f64` at or above 1 for which the clause holds
/// over the reals at every intermediate `j`, so `(p, Θ*)` passes the
/// checker and lowering any entry above 1 by one ulp breaks it. `p` must be
/// symmetric with `p(i,i) <= p(i,j)`.
pub fn minimal_theta(p: &SquareMatrix) -> Result<SquareMatrix> {
    let n = p.dim();
    if !p.is_symmetric() {
        return Err(Error::Argument(
            "minimal_theta needs a symmetric distance matrix".into(),
        ));
    }
    for i in 0..n {
        for j in 0..n {
            if p.get(i, i) > p.get(i, j) {
                return Err(Error::Argument(format!(
                    "minimal_theta needs p(i,i) <= p(i,j); fails at ({i}, {j})"
                )));
            }
        }
    }
    let mut theta = SquareMatrix::filled(n, 1.0);
    for i in 0..n {
        for k in 0..n {
            let mut t: f64 = 1.0;
            for j in 0..n {
                if let Some(tj) =
                    smallest_factor(p.get(i, k), p.get(i, j), p.get(j, k), p.get(j, j))
                {
                    t = t.max(tj);
                } else {
                    return Err(Error::Infeasible { i, j, k });
                }
            }
            theta[(i, k)] = t;
        }
    }
    Ok(theta)
}

/// Smallest `f64` `t >= 1` with `lhs <= t*(pxy+pyz) - pyy` over the reals,
/// or `None` when no `t` works.
fn smallest_factor(lhs: f64, pxy: f64, pyz: f64, pyy: f64) -> Option<f64> {
    let passes = |t: f64| triangle_slack(lhs, t, pxy, pyz, pyy) >= 0.0;
    let sum = pxy + pyz;
    if sum == 0.0 {
        return passes(1.0).then_some(1.0);
    }
    let mut t = ((lhs + pyy) / sum).max(1.0);
    if !t.is_finite() {
        return None;
    }
    // the slack is increasing in t, so the passing set is an up-set
    while !passes(t) {
        t = t.next_up();
    }
    while t > 1.0 && passes(t.next_down()) {
        t = t.next_down();
    }
    Some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{check_axioms, AxiomId};
    use crate::spaces::{AxiomProfile, FiniteSpace};

    fn pebm(p: SquareMatrix, theta: SquareMatrix) -> FiniteSpace {
        FiniteSpace::unlabeled(p, Some(theta), AxiomProfile::PartialExtendedBMetric).unwrap()
    }

    #[test]
    fn ordinary_metric_needs_no_relaxation() {
        // points 0, 1, 3 on a line
        let xs = [0.0f64, 1.0, 3.0];
        let p = SquareMatrix::from_fn(3, |i, j| (xs[i] - xs[j]).abs());
        let t = minimal_theta(&p).unwrap();
        assert!(t.iter().all(|(_, v)| v == 1.0));
    }

    #[test]
    fn ex_235_distances_give_all_ones() {
        let p = SquareMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 20.0 });
        let t = minimal_theta(&p).unwrap();
        assert!(t.iter().all(|(_, v)| v == 1.0));
    }

    #[test]
    fn violated_triangle_needs_the_exact_ratio() {
        // p(0,2) = 5 > p(0,1) + p(1,2) = 2, so theta(0,2) = 5/2
        let p = SquareMatrix::from_rows(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ])
        .unwrap();
        let t = minimal_theta(&p).unwrap();
        assert_eq!(t.get(0, 2), 2.5);
        assert_eq!(t.get(2, 0), 2.5);
        assert_eq!(t.get(0, 1), 1.0);
        assert!(check_axioms(
            &pebm(p.clone(), t.clone()),
            AxiomProfile::PartialExtendedBMetric
        )
        .unwrap()
        .passed());
        let mut lowered = t;
        lowered[(0, 2)] = 2.5f64.next_down();
        let r = check_axioms(&pebm(p, lowered), AxiomProfile::PartialExtendedBMetric).unwrap();
        assert_eq!(
            r.violations_of(AxiomId::Triangle).next().unwrap().witness,
            vec![0, 1, 2]
        );
    }

    #[test]
    fn zero_denominator_with_positive_numerator_is_infeasible() {
        let p = SquareMatrix::from_rows(vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(
            minimal_theta(&p),
            Err(Error::Infeasible { i: 0, j: 1, k: 2 })
        );
    }

    #[test]
    fn preconditions_are_enforced() {
        let asym = SquareMatrix::from_rows(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(matches!(minimal_theta(&asym), Err(Error::Argument(_))));
        let big_self = SquareMatrix::from_rows(vec![vec![3.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(minimal_theta(&big_self), Err(Error::Argument(_))));
    }

    #[test]
    fn rounding_sensitive_instance_passes_the_exact_checker() {
        let p = SquareMatrix::from_rows(vec![
            vec![0.1, 0.7, 0.3],
            vec![0.7, 0.2, 0.1 + 0.2],
            vec![0.3, 0.1 + 0.2, 0.3],
        ])
        .unwrap();
        let t = minimal_theta(&p).unwrap();
        let r = check_axioms(&pebm(p, t), AxiomProfile::PartialExtendedBMetric).unwrap();
        assert!(r.violations_of(AxiomId::Triangle).next().is_none());
    }
}
