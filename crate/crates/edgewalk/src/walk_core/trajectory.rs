use crate::error::{Error, Result};
use crate::grid::GridPath;
use crate::walk_core::ledger::PositionLog;

/// The rescaled path `Y_t = (X_{T0 + t n^{3/2}} - X_{T0}) / n` on `[0, horizon]`,
/// sampled at `intervals + 1` grid times. The walk is interpolated linearly
/// between integer times.
pub fn build_y(log: &PositionLog, t0: u64, n: u64, horizon: f64, intervals: usize) -> Result<GridPath> {
    if !(horizon > 0.0) || intervals == 0 || n == 0 {
        return Err(Error::Contract("horizon, grid and scale must be positive".into()));
    }
    let time_scale = (n as f64).powf(1.5);
    let end = t0 as f64 + horizon * time_scale;
    let end_step = end.ceil() as u64;
    if !log.covers(t0, end_step) {
        return Err(Error::Range(format!(
            "position log holds [{}, {}], need [{t0}, {end_step}]",
            log.first_time(),
            log.last_time()
        )));
    }
    let x0 = log.position_at(t0).expect("covered") as f64;
    let nf = n as f64;
    GridPath::from_fn(0.0, horizon, intervals, |t| {
        let s = t0 as f64 + t * time_scale;
        let k = s.floor() as u64;
        let frac = s - k as f64;
        let a = log.position_at(k).expect("covered") as f64;
        let x = if frac > 0.0 {
            let b = log.position_at(k + 1).expect("covered") as f64;
            a + frac * (b - a)
        } else {
            a
        };
        (x - x0) / nf
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::walk_core::{WalkLedger, WeightFunction};

    #[test]
    fn starts_at_zero_and_respects_speed() {
        let t = WeightFunction::default().transition_table();
        let mut r = rng::stream(5, 5);
        let mut l = WalkLedger::new();
        l.advance(1000, &t, &mut r);
        l.enable_log(1 << 20);
        let t0 = l.time();
        l.advance(20_000, &t, &mut r);
        let n = 100;
        let y = build_y(l.log().unwrap(), t0, n, 10.0, 977).unwrap();
        assert_eq!(y.values()[0], 0.0);
        let bound = (n as f64).sqrt() * y.dt() + 2.0 / n as f64;
        for w in y.values().windows(2) {
            assert!((w[1] - w[0]).abs() <= bound + 1e-12);
        }
    }

    #[test]
    fn short_log_is_a_range_error() {
        let t = WeightFunction::default().transition_table();
        let mut r = rng::stream(5, 6);
        let mut l = WalkLedger::new();
        l.enable_log(100);
        l.advance(50, &t, &mut r);
        assert!(matches!(build_y(l.log().unwrap(), 0, 100, 1.0, 10), Err(Error::Range(_))));
    }
}
