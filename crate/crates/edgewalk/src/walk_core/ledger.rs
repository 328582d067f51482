use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::chains::law::InvariantLaws;
use crate::error::{Error, Result};
use crate::rng::{self, SimRng};
use crate::walk_core::weight::TransitionTable;

/// Orientation of a directed edge `(i, i + 1)` or `(i, i - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeDir {
    Plus,
    Minus,
}

impl EdgeDir {
    pub fn step(self) -> i64 {
        match self {
            EdgeDir::Plus => 1,
            EdgeDir::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            EdgeDir::Plus => EdgeDir::Minus,
            EdgeDir::Minus => EdgeDir::Plus,
        }
    }
}

/// Ring buffer of recent positions, indexed by absolute time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionLog {
    capacity: usize,
    start: u64,
    positions: VecDeque<i64>,
}

impl PositionLog {
    fn new(capacity: usize, time: u64, position: i64) -> Self {
        let mut positions = VecDeque::with_capacity(capacity.min(1 << 24));
        positions.push_back(position);
        Self {
            capacity: capacity.max(1),
            start: time,
            positions,
        }
    }

    #[inline]
    fn push(&mut self, position: i64) {
        if self.positions.len() == self.capacity {
            self.positions.pop_front();
            self.start += 1;
        }
        self.positions.push_back(position);
    }

    /// First time still held in the buffer.
    pub fn first_time(&self) -> u64 {
        self.start
    }

    /// Last time held in the buffer.
    pub fn last_time(&self) -> u64 {
        self.start + self.positions.len() as u64 - 1
    }

    pub fn position_at(&self, time: u64) -> Option<i64> {
        time.checked_sub(self.start)
            .and_then(|k| self.positions.get(k as usize).copied())
    }

    pub fn covers(&self, from: u64, to: u64) -> bool {
        from >= self.first_time() && to <= self.last_time()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.positions
            .iter()
            .enumerate()
            .map(move |(k, x)| (self.start + k as u64, *x))
    }
}

/// Random initial imbalances, independent across sites, with law `minus` to
/// the left of the origin, `plus` to the right and their mixture at 0.
#[derive(Debug, Clone)]
struct BaseEnvironment {
    laws: Arc<InvariantLaws>,
    seed: u64,
}

impl BaseEnvironment {
    fn sample(&self, site: i64) -> i64 {
        // A site's value depends only on (seed, site), never on the order in
        // which storage grows.
        let mut r = rng::stream(self.seed, site as u64);
        match site.cmp(&0) {
            std::cmp::Ordering::Less => self.laws.minus.sample_atom(&mut r),
            std::cmp::Ordering::Greater => self.laws.plus.sample_atom(&mut r),
            std::cmp::Ordering::Equal => {
                if r.random::<bool>() {
                    self.laws.minus.sample_atom(&mut r)
                } else {
                    self.laws.plus.sample_atom(&mut r)
                }
            }
        }
    }
}

/// Outcome of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub from: i64,
    pub dir: EdgeDir,
}

/// Position, time and directed-edge local times of one walk.
///
/// Sites are stored densely from `lo`; storage grows geometrically in the
/// direction the walk leaves it. The imbalance is kept incrementally:
/// `delta(i) = base(i) + ell_minus(i) - ell_plus(i)`, with `base` zero
/// unless the walk starts from a random environment.
#[derive(Debug, Clone)]
pub struct WalkLedger {
    position: i64,
    time: u64,
    lo: i64,
    plus: Vec<u64>,
    minus: Vec<u64>,
    delta: Vec<i64>,
    base_env: Option<BaseEnvironment>,
    base: Vec<i64>,
    min_site: i64,
    max_site: i64,
    log: Option<PositionLog>,
}

const INITIAL_HALF_WIDTH: i64 = 64;

impl Default for WalkLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl WalkLedger {
    /// Walk at 0 with all local times zero.
    pub fn new() -> Self {
        let len = (2 * INITIAL_HALF_WIDTH + 1) as usize;
        Self {
            position: 0,
            time: 0,
            lo: -INITIAL_HALF_WIDTH,
            plus: vec![0; len],
            minus: vec![0; len],
            delta: vec![0; len],
            base_env: None,
            base: Vec::new(),
            min_site: 0,
            max_site: 0,
            log: None,
        }
    }

    /// Walk at 0 whose initial imbalances are drawn from the invariant laws.
    pub fn with_random_environment(laws: Arc<InvariantLaws>, seed: u64) -> Self {
        let mut ledger = Self::new();
        let env = BaseEnvironment { laws, seed };
        ledger.base = (0..ledger.plus.len() as i64)
            .map(|k| env.sample(ledger.lo + k))
            .collect();
        ledger.delta = ledger.base.clone();
        ledger.base_env = Some(env);
        ledger
    }

    pub fn position(&self) -> i64 {
        self.position
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn has_random_environment(&self) -> bool {
        self.base_env.is_some()
    }

    /// Smallest and largest sites occupied so far.
    pub fn visited_range(&self) -> (i64, i64) {
        (self.min_site, self.max_site)
    }

    #[inline]
    fn index(&self, site: i64) -> Option<usize> {
        let k = site - self.lo;
        (k >= 0 && (k as usize) < self.plus.len()).then_some(k as usize)
    }

    /// Crossings of `(site, site + 1)` so far.
    pub fn ell_plus(&self, site: i64) -> u64 {
        self.index(site).map_or(0, |k| self.plus[k])
    }

    /// Crossings of `(site, site - 1)` so far.
    pub fn ell_minus(&self, site: i64) -> u64 {
        self.index(site).map_or(0, |k| self.minus[k])
    }

    pub fn ell(&self, site: i64, dir: EdgeDir) -> u64 {
        match dir {
            EdgeDir::Plus => self.ell_plus(site),
            EdgeDir::Minus => self.ell_minus(site),
        }
    }

    /// Initial imbalance at `site`.
    pub fn base(&self, site: i64) -> i64 {
        match (&self.base_env, self.index(site)) {
            (None, _) => 0,
            (Some(_), Some(k)) => self.base[k],
            (Some(env), None) => env.sample(site),
        }
    }

    pub fn delta(&self, site: i64) -> i64 {
        match self.index(site) {
            Some(k) => self.delta[k],
            None => self.base(site),
        }
    }

    pub fn delta_window(&self, first: i64, last: i64) -> Vec<i64> {
        (first..=last).map(|i| self.delta(i)).collect()
    }

    pub fn enable_log(&mut self, capacity: usize) {
        self.log = Some(PositionLog::new(capacity, self.time, self.position));
    }

    pub fn disable_log(&mut self) -> Option<PositionLog> {
        self.log.take()
    }

    pub fn log(&self) -> Option<&PositionLog> {
        self.log.as_ref()
    }

    fn grow(&mut self, site: i64) {
        let len = self.plus.len() as i64;
        let (new_lo, new_len) = if site < self.lo {
            let extra = len.max(self.lo - site);
            (self.lo - extra, len + extra)
        } else {
            let extra = len.max(site - (self.lo + len) + 1);
            (self.lo, len + extra)
        };
        let shift = (self.lo - new_lo) as usize;
        let widen_u = |v: &mut Vec<u64>| {
            let mut w = vec![0; new_len as usize];
            w[shift..shift + v.len()].copy_from_slice(v);
            *v = w;
        };
        widen_u(&mut self.plus);
        widen_u(&mut self.minus);
        let mut base = vec![0; new_len as usize];
        if let Some(env) = &self.base_env {
            for (k, b) in base.iter_mut().enumerate() {
                let k = k as i64;
                *b = if k >= shift as i64 && k < shift as i64 + len {
                    self.base[(k - shift as i64) as usize]
                } else {
                    env.sample(new_lo + k)
                };
            }
        }
        let mut delta = base.clone();
        delta[shift..shift + self.delta.len()].copy_from_slice(&self.delta);
        self.delta = delta;
        if self.base_env.is_some() {
            self.base = base;
        }
        self.lo = new_lo;
    }

    /// One step of the walk: right with probability
    /// `w(delta) / (w(delta) + w(-delta))` at the current site.
    #[inline]
    pub fn step(&mut self, table: &TransitionTable, rng: &mut SimRng) -> Move {
        let from = self.position;
        let k = (from - self.lo) as usize;
        let d = self.delta[k];
        let dir = if rng.next_u64() < table.right_threshold(d) {
            self.plus[k] += 1;
            self.delta[k] = d - 1;
            self.position = from + 1;
            if self.position > self.max_site {
                self.max_site = self.position;
            }
            EdgeDir::Plus
        } else {
            self.minus[k] += 1;
            self.delta[k] = d + 1;
            self.position = from - 1;
            if self.position < self.min_site {
                self.min_site = self.position;
            }
            EdgeDir::Minus
        };
        self.time += 1;
        if self.index(self.position).is_none() {
            self.grow(self.position);
        }
        if let Some(log) = &mut self.log {
            log.push(self.position);
        }
        Move { from, dir }
    }

    /// Runs `steps` steps.
    pub fn advance(&mut self, steps: u64, table: &TransitionTable, rng: &mut SimRng) {
        for _ in 0..steps {
            self.step(table, rng);
        }
    }

    fn overrun(&self, cap: u64) -> Error {
        Error::Overrun {
            cap,
            time: self.time,
            position: self.position,
        }
    }

    /// Advances until the oriented edge `(site, site +- 1)` has been crossed
    /// `level` times and returns that time. At most `cap` steps are taken; on
    /// overrun the ledger keeps the state reached.
    pub fn run_until_edge_count(
        &mut self,
        level: u64,
        site: i64,
        dir: EdgeDir,
        table: &TransitionTable,
        rng: &mut SimRng,
        cap: u64,
    ) -> Result<u64> {
        if level == 0 {
            return Err(Error::Contract("edge-count level must be at least 1".into()));
        }
        let current = self.ell(site, dir);
        if current == level {
            return Ok(self.time);
        }
        if current > level {
            return Err(Error::Contract(format!(
                "edge ({site}, {dir:?}) already crossed {current} > {level} times"
            )));
        }
        let mut left = cap;
        loop {
            if left == 0 {
                return Err(self.overrun(cap));
            }
            left -= 1;
            let mv = self.step(table, rng);
            if mv.from == site && mv.dir == dir && self.ell(site, dir) == level {
                return Ok(self.time);
            }
        }
    }

    /// Advances until the walk stands at `lower` or `upper` and returns the
    /// site reached. Must start strictly between them.
    pub fn run_until_exit(
        &mut self,
        lower: i64,
        upper: i64,
        table: &TransitionTable,
        rng: &mut SimRng,
        cap: u64,
    ) -> Result<i64> {
        if !(lower < self.position && self.position < upper) {
            return Err(Error::Contract(format!(
                "position {} not inside ({lower}, {upper})",
                self.position
            )));
        }
        let mut left = cap;
        while self.position != lower && self.position != upper {
            if left == 0 {
                return Err(self.overrun(cap));
            }
            left -= 1;
            self.step(table, rng);
        }
        Ok(self.position)
    }

    /// Exact consistency checks: conservation of time, the imbalance
    /// identity, non-negativity and the edge-pairing bound
    /// `|ell_minus(i + 1) - ell_plus(i)| <= 1`.
    pub fn check_invariants(&self) -> Result<()> {
        let total: u64 = self.plus.iter().chain(self.minus.iter()).sum();
        if total != self.time {
            return Err(Error::Contract(format!(
                "local times sum to {total}, time is {}",
                self.time
            )));
        }
        for k in 0..self.plus.len() {
            let site = self.lo + k as i64;
            let expected = self.base(site) + self.minus[k] as i64 - self.plus[k] as i64;
            if self.delta[k] != expected {
                return Err(Error::Contract(format!(
                    "imbalance at {site} is {} but local times give {expected}",
                    self.delta[k]
                )));
            }
        }
        for i in self.min_site - 1..=self.max_site {
            let a = self.ell_minus(i + 1) as i64;
            let b = self.ell_plus(i) as i64;
            if (a - b).abs() > 1 {
                return Err(Error::Contract(format!(
                    "edge ({i}, {}) crossed {b} times right, {a} times left",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk_core::WeightFunction;

    #[test]
    fn invariants_after_many_steps() {
        let t = WeightFunction::default().transition_table();
        let mut rng = rng::stream(7, 0);
        let mut l = WalkLedger::new();
        l.advance(100_000, &t, &mut rng);
        l.check_invariants().unwrap();
        assert_eq!(l.time(), 100_000);
    }

    #[test]
    fn first_right_crossing_of_origin() {
        let t = WeightFunction::default().transition_table();
        for seed in 0..50 {
            let mut rng = rng::stream(seed, 0);
            let mut probe = rng.clone();
            let first_right = probe.next_u64() < t.right_threshold(0);
            let mut l = WalkLedger::new();
            let time = l
                .run_until_edge_count(1, 0, EdgeDir::Plus, &t, &mut rng, 1 << 30)
                .unwrap();
            assert_eq!(time == 1, first_right);
            assert_eq!(l.ell_plus(0), 1);
        }
    }

    #[test]
    fn overrun_keeps_partial_state() {
        let t = WeightFunction::default().transition_table();
        let mut rng = rng::stream(1, 1);
        let mut l = WalkLedger::new();
        let err = l
            .run_until_edge_count(1_000_000, 0, EdgeDir::Plus, &t, &mut rng, 10)
            .unwrap_err();
        assert!(matches!(err, Error::Overrun { cap: 10, time: 10, .. }));
        assert_eq!(l.time(), 10);
    }

    #[test]
    fn random_environment_is_growth_independent() {
        let laws = Arc::new(
            InvariantLaws::new(&WeightFunction::default(), crate::chains::DEFAULT_TAIL_EPS).unwrap(),
        );
        let t = WeightFunction::default().transition_table();
        let mut l = WalkLedger::with_random_environment(laws.clone(), 11);
        let far = l.base(500);
        let mut rng = rng::stream(2, 2);
        l.advance(200_000, &t, &mut rng);
        l.check_invariants().unwrap();
        assert_eq!(l.base(500), far);
    }

    #[test]
    fn log_tracks_positions() {
        let t = WeightFunction::default().transition_table();
        let mut rng = rng::stream(4, 0);
        let mut l = WalkLedger::new();
        l.enable_log(8);
        for _ in 0..20 {
            l.step(&t, &mut rng);
        }
        let log = l.log().unwrap();
        assert_eq!(log.last_time(), 20);
        assert_eq!(log.first_time(), 13);
        assert_eq!(log.position_at(20), Some(l.position()));
    }
}
