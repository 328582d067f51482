use crate::error::{Error, Result};
use crate::grid::GridPath;
use crate::walk_core::{EnvSnapshot, WalkLedger};

/// Two-sided partial sums of the environment seen from `position`:
/// for `i <= 0`, `E_i = sum_{j = X+i}^{X} (delta_j + 1/2)`; for `i >= 1`,
/// `E_i = sum_{j = X+1}^{X+i-1} (-delta_j + 1/2)`. Returns `E_{-w..=w}`.
pub fn env_partial_sums(position: i64, half_width: i64, delta: impl Fn(i64) -> i64) -> Vec<f64> {
    let w = half_width.max(0) as usize;
    let mut out = vec![0.0; 2 * w + 1];
    let mut acc = 0.0;
    for i in 0..=w {
        acc += delta(position - i as i64) as f64 + 0.5;
        out[w - i] = acc;
    }
    acc = 0.0;
    for i in 1..=w {
        out[w + i] = acc;
        acc += -(delta(position + i as i64) as f64) + 0.5;
    }
    out
}

fn scaled(values: Vec<f64>, half_width: i64, n: u64) -> Result<GridPath> {
    if n == 0 {
        return Err(Error::config("n", "must be positive"));
    }
    if half_width < 1 {
        return Err(Error::config("window", "half-width must be at least one site"));
    }
    let s = (n as f64).sqrt();
    let span = half_width as f64 / n as f64;
    GridPath::new(-span, span, values.into_iter().map(|v| v / s).collect())
}

/// `E_k` at the walker's current position, on `[-w/n, w/n]` with `2w`
/// intervals and values divided by `sqrt(n)`. With the zero initial
/// environment the window must lie inside the visited range.
pub fn env_process_from_walk(ledger: &WalkLedger, half_width: i64, n: u64) -> Result<GridPath> {
    let x = ledger.position();
    if !ledger.has_random_environment() {
        let (lo, hi) = ledger.visited_range();
        if x - half_width < lo || x + half_width > hi {
            return Err(Error::Range(format!(
                "window [{}, {}] exceeds visited sites [{lo}, {hi}]",
                x - half_width,
                x + half_width
            )));
        }
    }
    scaled(env_partial_sums(x, half_width, |j| ledger.delta(j)), half_width, n)
}

/// `E_k` built from a recorded environment window.
pub fn env_process_from_snapshot(snap: &EnvSnapshot, half_width: i64, n: u64) -> Result<GridPath> {
    if half_width > snap.half_width {
        return Err(Error::Range(format!(
            "window {half_width} exceeds the recorded half-width {}",
            snap.half_width
        )));
    }
    scaled(env_partial_sums(0, half_width, |j| snap.at_offset(j)), half_width, n)
}

/// Sample variance per unit length of the increments of a scaled path.
pub fn increment_variance_rate(path: &GridPath) -> f64 {
    let v = path.values();
    let m = v.len() - 1;
    if m < 2 {
        return 0.0;
    }
    let incs: Vec<f64> = v.windows(2).map(|p| p[1] - p[0]).collect();
    let mean = incs.iter().sum::<f64>() / m as f64;
    let var = incs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    var / path.dt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_follow_the_two_sided_definition() {
        let d = |j: i64| j;
        let e = env_partial_sums(10, 3, d);
        // i = 0: delta_10 + 1/2
        assert_eq!(e[3], 10.5);
        // i = -1: (9 + 1/2) + (10 + 1/2)
        assert_eq!(e[2], 20.0);
        // i = 1 is the empty sum.
        assert_eq!(e[4], 0.0);
        // i = 2: -11 + 1/2
        assert_eq!(e[5], -10.5);
        assert_eq!(e[6] - e[5], -12.0 + 0.5);
    }

    #[test]
    fn snapshot_window_is_range_checked() {
        let snap = EnvSnapshot {
            time: 0,
            position: 0,
            half_width: 2,
            window: vec![0; 5],
        };
        assert!(env_process_from_snapshot(&snap, 3, 4).is_err());
        let p = env_process_from_snapshot(&snap, 2, 4).unwrap();
        assert_eq!(p.intervals(), 4);
        assert!((p.end() - 0.5).abs() < 1e-15);
    }
}
