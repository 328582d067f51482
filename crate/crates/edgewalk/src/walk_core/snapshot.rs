use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::walk_core::ledger::{EdgeDir, WalkLedger};
use crate::walk_core::weight::TransitionTable;

/// Side of a mesoscopic leg: the walk is followed until it stands `eps_n`
/// sites to the left (`Minus`) or right (`Plus`) of its starting site.
pub type Side = EdgeDir;

/// Beginning-of-leg or end-of-leg record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SnapshotKind {
    Begin,
    End,
}

/// Half-integer environment values over the window
/// `[base_site - eps_n, base_site + eps_n]`, with the leg's crossing counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaRecord {
    pub side: Side,
    pub kind: SnapshotKind,
    pub base_site: i64,
    pub first: i64,
    pub zeta: Vec<f64>,
    /// `local[k]` counts crossings `(first + k - 1, first + k)` during the
    /// leg, for `k = 0..=2 eps_n + 1` (one site past the window).
    pub local: Vec<u64>,
}

impl ZetaRecord {
    pub fn last(&self) -> i64 {
        self.first + self.zeta.len() as i64 - 1
    }

    pub fn zeta_at(&self, site: i64) -> f64 {
        self.zeta[(site - self.first) as usize]
    }

    pub fn local_at(&self, site: i64) -> u64 {
        self.local[(site - self.first) as usize]
    }
}

/// Everything recorded along one leg from time `start_time` to the exit
/// time `end_time` on the chosen side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegRecord {
    pub side: Side,
    pub start_time: u64,
    pub end_time: u64,
    pub base_site: i64,
    pub eps_n: i64,
    pub begin: ZetaRecord,
    pub end: ZetaRecord,
    /// Per window site, the imbalance chain observed at the moves that matter
    /// for this side: `-delta` after each left move on the minus side,
    /// `delta` after each right move on the plus side, starting with the
    /// value at `start_time`.
    pub eta_paths: Vec<Vec<i64>>,
}

impl LegRecord {
    pub fn first(&self) -> i64 {
        self.begin.first
    }

    pub fn last(&self) -> i64 {
        self.begin.last()
    }

    pub fn eta_path(&self, site: i64) -> &[i64] {
        &self.eta_paths[(site - self.first()) as usize]
    }

    /// Number of chain steps the end value sits at, for sites where the end
    /// record is a chain value: `L_j + 1` left of and at the base site,
    /// `L_j` to its right (minus side); `L_{j+1}` (plus side).
    pub fn observed_count(&self, site: i64) -> Option<u64> {
        match self.side {
            Side::Minus => {
                if site <= self.first() || site > self.last() {
                    None
                } else if site <= self.base_site {
                    Some(self.begin.local_at(site) + 1)
                } else {
                    Some(self.begin.local_at(site))
                }
            }
            Side::Plus => {
                if site < self.first() || site >= self.last() {
                    None
                } else {
                    Some(self.begin.local_at(site + 1))
                }
            }
        }
    }

    /// The local-time recursion linking begin and end records.
    pub fn check_recursion(&self) -> Result<()> {
        let (b, e) = (&self.begin, &self.end);
        match self.side {
            Side::Minus => {
                for i in self.first() + 1..=self.last() {
                    let lhs = b.local_at(i + 1) as f64;
                    let rhs = b.local_at(i) as f64 + e.zeta_at(i) - b.zeta_at(i);
                    if lhs != rhs {
                        return Err(Error::Contract(format!("minus recursion fails at {i}")));
                    }
                }
            }
            Side::Plus => {
                for i in self.first()..self.last() {
                    let lhs = b.local_at(i) as f64;
                    let rhs = b.local_at(i + 1) as f64 + e.zeta_at(i) - b.zeta_at(i);
                    if lhs != rhs {
                        return Err(Error::Contract(format!("plus recursion fails at {i}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// End values are chain values after the observed number of steps, and
    /// the leg length equals `eps_n + 2 * sum(L)` when no site outside the
    /// window was crossed.
    pub fn check_chain_bookkeeping(&self) -> Result<()> {
        for site in self.first()..=self.last() {
            if let Some(c) = self.observed_count(site) {
                let path = self.eta_path(site);
                if path.len() as u64 != c + 1 {
                    return Err(Error::Contract(format!(
                        "site {site}: {} chain values for count {c}",
                        path.len()
                    )));
                }
                if path[c as usize] as f64 + 0.5 != self.end.zeta_at(site) {
                    return Err(Error::Contract(format!("site {site}: end value off chain")));
                }
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> u64 {
        self.end_time - self.start_time
    }

    pub fn local_sum(&self) -> u64 {
        self.begin.local.iter().sum()
    }
}

fn zeta_begin(side: Side, delta: i64, site: i64, base: i64) -> f64 {
    let d = delta as f64;
    match (side, site <= base) {
        (Side::Minus, true) => -d - 0.5,
        (Side::Minus, false) => -d + 0.5,
        (Side::Plus, true) => d + 0.5,
        (Side::Plus, false) => d - 0.5,
    }
}

fn zeta_end(side: Side, delta: i64) -> f64 {
    match side {
        Side::Minus => -(delta as f64) + 0.5,
        Side::Plus => delta as f64 + 0.5,
    }
}

/// Records the environment at the current time, runs the walk to the exit
/// time on `side`, and records the environment and crossing counts there.
pub fn capture_leg(
    ledger: &mut WalkLedger,
    table: &TransitionTable,
    rng: &mut SimRng,
    eps_n: i64,
    side: Side,
    cap: u64,
) -> Result<LegRecord> {
    if eps_n < 1 {
        return Err(Error::config("eps_n", "must be at least 1"));
    }
    let start_time = ledger.time();
    let base = ledger.position();
    let (first, last) = (base - eps_n, base + eps_n);
    let width = (last - first + 1) as usize;
    let plus_before: Vec<u64> = (first - 1..=last).map(|i| ledger.ell_plus(i)).collect();
    let begin_zeta: Vec<f64> = (first..=last)
        .map(|i| zeta_begin(side, ledger.delta(i), i, base))
        .collect();
    let mut eta_paths: Vec<Vec<i64>> = (first..=last)
        .map(|i| {
            let d = ledger.delta(i);
            vec![if side == Side::Minus { -d } else { d }]
        })
        .collect();
    let target = base + side.step() * eps_n;
    let mut left = cap;
    while ledger.position() != target {
        if left == 0 {
            return Err(Error::Overrun {
                cap,
                time: ledger.time(),
                position: ledger.position(),
            });
        }
        left -= 1;
        let mv = ledger.step(table, rng);
        if mv.dir == side && mv.from >= first && mv.from <= last {
            let d = ledger.delta(mv.from);
            eta_paths[(mv.from - first) as usize].push(if side == Side::Minus { -d } else { d });
        }
    }
    let local: Vec<u64> = (first..=last + 1)
        .map(|i| ledger.ell_plus(i - 1) - plus_before[(i - first) as usize])
        .collect();
    debug_assert_eq!(local.len(), width + 1);
    let end_zeta: Vec<f64> = (first..=last).map(|i| zeta_end(side, ledger.delta(i))).collect();
    Ok(LegRecord {
        side,
        start_time,
        end_time: ledger.time(),
        base_site: base,
        eps_n,
        begin: ZetaRecord {
            side,
            kind: SnapshotKind::Begin,
            base_site: base,
            first,
            zeta: begin_zeta,
            local: local.clone(),
        },
        end: ZetaRecord {
            side,
            kind: SnapshotKind::End,
            base_site: base,
            first,
            zeta: end_zeta,
            local,
        },
        eta_paths,
    })
}

/// Beginning-of-leg record alone, taken from the current ledger state.
pub fn snapshot_begin(ledger: &WalkLedger, eps_n: i64, side: Side) -> ZetaRecord {
    let base = ledger.position();
    let first = base - eps_n;
    ZetaRecord {
        side,
        kind: SnapshotKind::Begin,
        base_site: base,
        first,
        zeta: (first..=base + eps_n)
            .map(|i| zeta_begin(side, ledger.delta(i), i, base))
            .collect(),
        local: Vec::new(),
    }
}
