use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chains::law::InvariantLaws;
use crate::rng::SimRng;
use crate::walk_core::ledger::WalkLedger;
use crate::walk_core::weight::TransitionTable;

/// Environment seen from the walker: `window[k]` is the imbalance at
/// `position + k - half_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSnapshot {
    pub time: u64,
    pub position: i64,
    pub half_width: i64,
    pub window: Vec<i64>,
}

impl EnvSnapshot {
    pub fn at_offset(&self, i: i64) -> i64 {
        self.window[(i + self.half_width) as usize]
    }
}

/// Runs the walk from independent invariant-law imbalances (`minus` left of
/// 0, `plus` right of 0, their mixture at 0) and records the recentred
/// environment at each requested time. `times` must be non-decreasing.
pub fn stationary_env_walk(
    laws: Arc<InvariantLaws>,
    table: &TransitionTable,
    env_seed: u64,
    times: &[u64],
    half_width: i64,
    rng: &mut SimRng,
) -> Vec<EnvSnapshot> {
    let mut ledger = WalkLedger::with_random_environment(laws, env_seed);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        while ledger.time() < t {
            ledger.step(table, rng);
        }
        let x = ledger.position();
        out.push(EnvSnapshot {
            time: ledger.time(),
            position: x,
            half_width,
            window: ledger.delta_window(x - half_width, x + half_width),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::DEFAULT_TAIL_EPS;
    use crate::rng;
    use crate::walk_core::WeightFunction;

    #[test]
    fn time_zero_snapshot_is_the_initial_environment() {
        let w = WeightFunction::default();
        let laws = Arc::new(InvariantLaws::new(&w, DEFAULT_TAIL_EPS).unwrap());
        let mut r = rng::stream(0, 0);
        let snaps = stationary_env_walk(laws.clone(), &w.transition_table(), 3, &[0], 4, &mut r);
        let fresh = WalkLedger::with_random_environment(laws, 3);
        for i in -4..=4 {
            assert_eq!(snaps[0].at_offset(i), fresh.base(i));
        }
    }
}
