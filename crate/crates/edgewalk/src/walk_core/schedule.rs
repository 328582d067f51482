use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::walk_core::ledger::WalkLedger;
use crate::walk_core::weight::TransitionTable;

/// Mesoscopic times `T_0 < T_1 < ... < T_K` and the sites occupied then.
///
/// `beta_minus[k]` and `beta_plus[k]` are the first times after `T_k` at
/// which the walk stands `eps_n` sites left or right of `X_{T_k}`; the side
/// not reached before the schedule stopped is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub eps_n: i64,
    pub times: Vec<u64>,
    pub sites: Vec<i64>,
    pub beta_minus: Vec<Option<u64>>,
    pub beta_plus: Vec<Option<u64>>,
}

impl TrajectoryRecord {
    pub fn legs(&self) -> usize {
        self.times.len() - 1
    }

    /// `(X_{T_k} - X_{T_0}) / eps_n`.
    pub fn z(&self, k: usize) -> i64 {
        (self.sites[k] - self.sites[0]) / self.eps_n
    }

    pub fn z_values(&self) -> Vec<i64> {
        (0..self.times.len()).map(|k| self.z(k)).collect()
    }

    /// `T_{k+1} - T_k` for every leg.
    pub fn increments(&self) -> Vec<u64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Columns `k,T_k,X_{T_k},Z_k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,T_k,X_T_k,Z_k\n");
        for k in 0..self.times.len() {
            out.push_str(&format!("{k},{},{},{}\n", self.times[k], self.sites[k], self.z(k)));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    /// Exact structural checks: strictly increasing times, displacement
    /// `eps_n` per leg, and `T_{k+1} = min(beta-, beta+)`.
    pub fn check(&self) -> Result<()> {
        for k in 0..self.legs() {
            if self.times[k + 1] <= self.times[k] {
                return Err(Error::Contract(format!("T_{} not after T_{k}", k + 1)));
            }
            if (self.sites[k + 1] - self.sites[k]).abs() != self.eps_n {
                return Err(Error::Contract(format!("leg {k} displacement is not {}", self.eps_n)));
            }
            let first = match (self.beta_minus[k], self.beta_plus[k]) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => return Err(Error::Contract(format!("leg {k} has no exit time"))),
            };
            if first != self.times[k + 1] {
                return Err(Error::Contract(format!("leg {k} exit time mismatch")));
            }
        }
        Ok(())
    }
}

/// Runs `k_legs` mesoscopic legs from the ledger's current state, which is
/// taken as `T_0`. Each leg is capped at `cap` steps.
pub fn mesoscopic_schedule(
    ledger: &mut WalkLedger,
    table: &TransitionTable,
    rng: &mut SimRng,
    eps_n: i64,
    k_legs: usize,
    cap: u64,
) -> Result<TrajectoryRecord> {
    if eps_n < 1 {
        return Err(Error::config("eps_n", "must be at least 1"));
    }
    let mut rec = TrajectoryRecord {
        eps_n,
        times: vec![ledger.time()],
        sites: vec![ledger.position()],
        beta_minus: Vec::with_capacity(k_legs),
        beta_plus: Vec::with_capacity(k_legs),
    };
    // Far-side targets of completed legs: (leg, site, is_minus).
    let mut pending: Vec<(usize, i64, bool)> = Vec::new();
    for k in 0..k_legs {
        let base = ledger.position();
        let (lo, hi) = (base - eps_n, base + eps_n);
        rec.beta_minus.push(None);
        rec.beta_plus.push(None);
        let mut left = cap;
        while ledger.position() != lo && ledger.position() != hi {
            if left == 0 {
                return Err(Error::Overrun {
                    cap,
                    time: ledger.time(),
                    position: ledger.position(),
                });
            }
            left -= 1;
            ledger.step(table, rng);
            if !pending.is_empty() {
                resolve(&mut pending, &mut rec, ledger);
            }
        }
        let t = ledger.time();
        if ledger.position() == lo {
            rec.beta_minus[k] = Some(t);
            pending.push((k, hi, false));
        } else {
            rec.beta_plus[k] = Some(t);
            pending.push((k, lo, true));
        }
        // The exit site of this leg may also be a pending far-side target.
        resolve(&mut pending, &mut rec, ledger);
        rec.times.push(t);
        rec.sites.push(ledger.position());
    }
    Ok(rec)
}

fn resolve(pending: &mut Vec<(usize, i64, bool)>, rec: &mut TrajectoryRecord, ledger: &WalkLedger) {
    let x = ledger.position();
    let t = ledger.time();
    pending.retain(|&(k, site, is_minus)| {
        if site != x {
            return true;
        }
        let slot = if is_minus {
            &mut rec.beta_minus[k]
        } else {
            &mut rec.beta_plus[k]
        };
        if slot.is_none() {
            *slot = Some(t);
        }
        false
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::walk_core::WeightFunction;

    #[test]
    fn zero_legs_keeps_anchor_only() {
        let t = WeightFunction::default().transition_table();
        let mut l = WalkLedger::new();
        let mut r = rng::stream(0, 0);
        let rec = mesoscopic_schedule(&mut l, &t, &mut r, 5, 0, 1000).unwrap();
        assert_eq!(rec.times, vec![0]);
        assert_eq!(rec.sites, vec![0]);
    }

    #[test]
    fn schedule_is_consistent() {
        let t = WeightFunction::default().transition_table();
        for seed in 0..20 {
            let mut l = WalkLedger::new();
            let mut r = rng::stream(seed, 0);
            let rec = mesoscopic_schedule(&mut l, &t, &mut r, 7, 6, 1 << 30).unwrap();
            rec.check().unwrap();
        }
    }
}
