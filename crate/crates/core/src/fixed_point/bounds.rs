use serde::Serialize;

use crate::error::{Error, Result};
use crate::spaces::Space;

fn check_k(k: f64, limit: f64) -> Result<()> {
    if (0.0..limit).contains(&k) {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "k must lie in [0, {limit}), got {k}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBound {
    pub value: f64,
    /// Cumulative sums of the series, term `i = n` first; the last equals `value`.
    pub partial_sums: Vec<f64>,
}

/// `p(x_0, x_1) * Σ_{i=n}^{m-1} (Π_{j=n}^{i} θ(x_j, x_m)) k^i` along `points`.
pub fn banach_tail_bound<S: Space>(
    space: &S,
    points: &[S::Point],
    k: f64,
    n: usize,
    m: usize,
) -> Result<TailBound> {
    check_k(k, 1.0)?;
    if !(n < m && m < points.len()) {
        return Err(Error::Argument(format!(
            "need n < m < {} (points available), got n = {n}, m = {m}",
            points.len()
        )));
    }
    let p01 = space.p(points[0], points[1])?;
    let xm = points[m];
    let mut product = 1.0;
    let mut sum = 0.0;
    let mut partial_sums = Vec::with_capacity(m - n);
    #[allow(clippy::needless_range_loop)]
    for i in n..m {
        product *= space.theta(points[i], xm)?;
        sum += product * k.powi(i as i32);
        partial_sums.push(p01 * sum);
    }
    Ok(TailBound {
        value: p01 * sum,
        partial_sums,
    })
}

/// `(k/(1-k))^n * p01`.
pub fn kannan_step_bound(k: f64, n: usize, p01: f64) -> Result<f64> {
    check_k(k, 0.5)?;
    if !(p01 >= 0.0) {
        return Err(Error::Argument(format!(
            "p01 must be nonnegative, got {p01}"
        )));
    }
    Ok((k / (1.0 - k)).powi(n as i32) * p01)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModKannanBounds {
    /// `k^m p(x_n,x_n) + ((1-k^{m+1})/(1-k)) p(x_n,x_{n-1})`
    pub window_bound: f64,
    /// `k^n p(x_1,x_0) + k Σ_{t=1}^{n} k^{n-t} p(x_t,x_t)`
    pub step_bound: f64,
}

/// The step bound alone; defined for every `n` with `x_max(n,1)` available.
pub fn modkannan_step_bound<S: Space>(
    space: &S,
    points: &[S::Point],
    k: f64,
    n: usize,
) -> Result<f64> {
    check_k(k, 0.5)?;
    if points.len() < 2 || n >= points.len() {
        return Err(Error::Argument(format!(
            "step bound at n = {n} needs x_0, x_1 and x_n; {} points available",
            points.len()
        )));
    }
    let mut sum = 0.0;
    for (t, &xt) in points.iter().enumerate().take(n + 1).skip(1) {
        sum += k.powi((n - t) as i32) * space.p(xt, xt)?;
    }
    Ok(k.powi(n as i32) * space.p(points[1], points[0])? + k * sum)
}

pub fn modkannan_bounds<S: Space>(
    space: &S,
    points: &[S::Point],
    k: f64,
    n: usize,
    m: usize,
) -> Result<ModKannanBounds> {
    check_k(k, 0.5)?;
    if n == 0 {
        return Err(Error::Argument(
            "window bound needs n >= 1 to reach x_{n-1}".into(),
        ));
    }
    let step_bound = modkannan_step_bound(space, points, k, n)?;
    let xn = points[n];
    let window_bound = k.powi(m as i32) * space.p(xn, xn)?
        + ((1.0 - k.powi(m as i32 + 1)) / (1.0 - k)) * space.p(xn, points[n - 1])?;
    Ok(ModKannanBounds {
        window_bound,
        step_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::AnalyticSpace;

    fn space(p: &str, theta: &str) -> AnalyticSpace {
        AnalyticSpace::parse((0.0, 1.0), p, theta, &[], None).unwrap()
    }

    fn quarter_orbit(len: usize) -> Vec<f64> {
        (0..len).map(|i| 4f64.powi(-(i as i32))).collect()
    }

    #[test]
    fn constant_theta_is_a_geometric_series() {
        let s = space("max(x,y)", "1");
        let xs = quarter_orbit(10);
        let k: f64 = 0.25;
        let b = banach_tail_bound(&s, &xs, k, 2, 7).unwrap();
        let closed = k.powi(2) * (1.0 - k.powi(5)) / (1.0 - k);
        assert!((b.value - closed).abs() <= 1e-15);
        assert_eq!(b.partial_sums.len(), 5);
        assert_eq!(*b.partial_sums.last().unwrap(), b.value);
    }

    #[test]
    fn one_term_window() {
        let s = space("max(x,y)", "1+x+y");
        let xs = quarter_orbit(6);
        let b = banach_tail_bound(&s, &xs, 0.25, 3, 4).unwrap();
        assert_eq!(b.value, (1.0 + xs[3] + xs[4]) * 0.25f64.powi(3));
    }

    #[test]
    fn tail_bound_dominates_observed_distance() {
        let s = space("max(x,y)", "1+x+y");
        let xs = quarter_orbit(6);
        assert!(
            banach_tail_bound(&s, &xs, 0.25, 2, 5).unwrap().value >= s.p(xs[2], xs[5]).unwrap()
        );
    }

    #[test]
    fn tail_bound_argument_errors() {
        let s = space("max(x,y)", "1");
        let xs = quarter_orbit(4);
        assert!(banach_tail_bound(&s, &xs, 0.25, 2, 2).is_err());
        assert!(banach_tail_bound(&s, &xs, 0.25, 0, 4).is_err());
        assert!(banach_tail_bound(&s, &xs, 1.0, 0, 1).is_err());
    }

    #[test]
    fn kannan_ratio_powers() {
        assert_eq!(kannan_step_bound(1.0 / 3.0, 0, 1.7).unwrap(), 1.7);
        assert!((kannan_step_bound(1.0 / 3.0, 2, 1.0).unwrap() - 0.25).abs() < 1e-16);
        assert!(kannan_step_bound(0.5, 1, 1.0).is_err());
        assert!(kannan_step_bound(0.2, 1, -1.0).is_err());
    }

    #[test]
    fn step_bound_without_self_distance() {
        let s = AnalyticSpace::parse((0.0, 1.0), "abs(x-y)", "1", &[], None).unwrap();
        let xs = quarter_orbit(8);
        let k: f64 = 0.3;
        let b = modkannan_step_bound(&s, &xs, k, 5).unwrap();
        assert_eq!(b, k.powi(5) * 0.75);
    }

    #[test]
    fn step_bound_covers_reverse_steps() {
        let s = space("abs(x-y)+x", "1");
        let xs = quarter_orbit(30);
        for n in 0..29 {
            let b = modkannan_step_bound(&s, &xs, 1.0 / 3.0, n).unwrap();
            assert!(s.p(xs[n + 1], xs[n]).unwrap() <= b, "n = {n}");
        }
    }

    #[test]
    fn degenerate_window() {
        let s = space("abs(x-y)+x", "1");
        let xs = quarter_orbit(5);
        let k = 1.0 / 3.0;
        let b = modkannan_bounds(&s, &xs, k, 2, 0).unwrap();
        let expected =
            s.p(xs[2], xs[2]).unwrap() + ((1.0 - k) / (1.0 - k)) * s.p(xs[2], xs[1]).unwrap();
        assert_eq!(b.window_bound, expected);
        assert!(b.window_bound >= s.p(xs[2], xs[2]).unwrap());
        assert!(modkannan_bounds(&s, &xs, k, 0, 1).is_err());
        assert!(modkannan_bounds(&s, &xs, k, 9, 1).is_err());
    }
}
