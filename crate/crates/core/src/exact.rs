//! Error-free transformations and faithfully rounded sums of floats.

/// `a + b = s + e` exactly, with `s` the rounded sum.
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `a * b = p + e` exactly, barring underflow.
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// The real sum of `terms`, rounded once at the end.
///
/// The result is zero exactly when the real sum is zero and otherwise has
/// its sign. Non-finite inputs fall back to the plain rounded sum.
pub(crate) fn exact_sum(terms: &[f64]) -> f64 {
    let plain = || terms.iter().sum::<f64>();
    if terms.iter().any(|t| !t.is_finite()) {
        return plain();
    }
    // nonoverlapping expansion, smallest component first
    let mut expansion: Vec<f64> = Vec::with_capacity(terms.len());
    for &t in terms {
        let mut q = t;
        for e in expansion.iter_mut() {
            let (s, h) = two_sum(q, *e);
            *e = h;
            q = s;
        }
        if !q.is_finite() {
            return plain();
        }
        expansion.push(q);
    }
    expansion.iter().fold(0.0, |acc, &c| acc + c)
}

/// `theta * (pxy + pyz) - pyy - lhs` over the reals, rounded once; the
/// triangle clause holds exactly when this is nonnegative.
pub(crate) fn triangle_slack(lhs: f64, theta: f64, pxy: f64, pyz: f64, pyy: f64) -> f64 {
    let (a, ea) = two_prod(theta, pxy);
    let (b, eb) = two_prod(theta, pyz);
    exact_sum(&[a, ea, b, eb, -pyy, -lhs])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_is_exact() {
        assert!(exact_sum(&[0.1, 0.2, -0.3]) > 0.0);
        assert_eq!(exact_sum(&[1e100, 1.0, -1e100]), 1.0);
        assert_eq!(exact_sum(&[1e100, -1.0, -1e100]), -1.0);
        assert_eq!(exact_sum(&[0.5, 0.25, -0.75]), 0.0);
        assert_eq!(exact_sum(&[]), 0.0);
    }

    #[test]
    fn tight_triangle_holds() {
        // (0.1 + 0.25) - 0.1 rounds below 0.25
        let (a, b) = std::hint::black_box((0.1f64, 0.25f64));
        assert!((a + b) - a < b);
        assert_eq!(triangle_slack(0.25, 1.0, 0.1, 0.25, 0.1), 0.0);
        assert!(triangle_slack(0.25f64.next_up(), 1.0, 0.1, 0.25, 0.1) < 0.0);
    }
}
