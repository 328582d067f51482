use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::GridPath;
use crate::rng::SimRng;

/// Where a sampled Brownian path is pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    /// Value at the left end.
    Start(f64),
    /// Value at the right end; the path is built backwards in time.
    End(f64),
    /// Value at the grid node closest to time `at`; both sides are built
    /// outwards from it.
    Node { at: f64, value: f64 },
}

/// Fills `out` with a Gaussian walk whose increments have variance
/// `variance * dt`, starting from `out[0]`.
pub(crate) fn fill_increments(out: &mut [f64], sd: f64, rng: &mut SimRng) {
    for k in 1..out.len() {
        let z: f64 = rng.sample(StandardNormal);
        out[k] = out[k - 1] + sd * z;
    }
}

/// Brownian motion with the given variance per unit time on `[a, b]`,
/// sampled at `intervals + 1` nodes.
pub fn sample_brownian_grid(
    variance: f64,
    a: f64,
    b: f64,
    intervals: usize,
    anchor: Anchor,
    rng: &mut SimRng,
) -> Result<GridPath> {
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(Error::config("variance", "must be finite and non-negative"));
    }
    if intervals < 1 {
        return Err(Error::Contract("grid needs at least one interval".into()));
    }
    let dt = (b - a) / intervals as f64;
    let sd = (variance * dt).sqrt();
    let mut v = vec![0.0; intervals + 1];
    match anchor {
        Anchor::Start(x) => {
            v[0] = x;
            fill_increments(&mut v, sd, rng);
        }
        Anchor::End(x) => {
            v[intervals] = x;
            v.reverse();
            fill_increments(&mut v, sd, rng);
            v.reverse();
        }
        Anchor::Node { at, value } => {
            let k = (((at - a) / dt).round().max(0.0) as usize).min(intervals);
            v[k] = value;
            fill_increments(&mut v[k..], sd, rng);
            let left = &mut v[..=k];
            left.reverse();
            fill_increments(left, sd, rng);
            left.reverse();
        }
    }
    GridPath::new(a, b, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn zero_variance_is_constant() {
        let mut r = rng::stream(0, 0);
        let p = sample_brownian_grid(0.0, 0.0, 1.0, 16, Anchor::Start(2.0), &mut r).unwrap();
        assert!(p.values().iter().all(|v| *v == 2.0));
    }

    #[test]
    fn two_sided_anchor_is_exact() {
        let mut r = rng::stream(0, 1);
        let p = sample_brownian_grid(1.0, -1.0, 1.0, 64, Anchor::Node { at: 0.0, value: 0.0 }, &mut r)
            .unwrap();
        assert_eq!(p.values()[32], 0.0);
        let q = sample_brownian_grid(1.0, -1.0, 1.0, 64, Anchor::End(3.0), &mut r).unwrap();
        assert_eq!(q.values()[64], 3.0);
    }
}
