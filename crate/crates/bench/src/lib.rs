//! Shared inputs for the criterion benches.

use pebms::{sample_grid, AnalyticSpace, FiniteSpace};

/// The `max(x,y)` space with `θ = 1+x+y` on `[0,1]`, sampled on `n` points.
pub fn max_grid(n: usize) -> FiniteSpace {
    sample_grid(&max_space(), n).expect("grid sampling of a valid space")
}

pub fn max_space() -> AnalyticSpace {
    AnalyticSpace::parse((0.0, 1.0), "max(x,y)", "1+x+y", &[], None).expect("valid forms")
}
