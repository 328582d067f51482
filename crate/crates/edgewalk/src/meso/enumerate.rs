use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meso::board::PathGamma;
use crate::meso::machine::{run_machine, ScriptedOutcomes, StateMachine, ThetaSequence, ThetaValue};

/// Largest path length enumerated exhaustively by default.
pub const EXHAUSTIVE_CAP: usize = 14;

/// Every `{0,1,*}^K` sequence the machine can produce on `path`.
pub fn enumerate_admissible(path: &PathGamma) -> Result<BTreeSet<Vec<ThetaValue>>> {
    enumerate_admissible_capped(path, EXHAUSTIVE_CAP)
}

pub fn enumerate_admissible_capped(path: &PathGamma, cap: usize) -> Result<BTreeSet<Vec<ThetaValue>>> {
    Ok(enumerate_runs(path, cap)?.into_iter().map(|t| t.values).collect())
}

/// Admissible sequences with their type tags. Each stage asks at most two
/// questions, so the four two-answer scripts cover every branch; scripts
/// that consumed the same answers are the same branch.
pub fn enumerate_runs(path: &PathGamma, cap: usize) -> Result<Vec<ThetaSequence>> {
    if path.len() > cap {
        return Err(Error::Size { size: path.len(), cap });
    }
    let mut out = Vec::new();
    let mut stack = vec![StateMachine::new(path.clone())];
    while let Some(m) = stack.pop() {
        if m.is_finished() {
            out.push(m.finish().theta);
            continue;
        }
        let mut seen: Vec<Vec<bool>> = Vec::with_capacity(4);
        for script in [[false, false], [false, true], [true, false], [true, true]] {
            let mut src = ScriptedOutcomes::new(script.to_vec());
            let mut next = m.clone();
            next.advance(&mut src)?;
            let used = script[..src.used()].to_vec();
            if !seen.contains(&used) {
                seen.push(used);
                stack.push(next);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceStats {
    pub bad: bool,
    pub zeros: usize,
    pub good_count: usize,
}

impl SequenceStats {
    /// At least `K/20` certified steps.
    pub fn enough_good(&self, len: usize) -> bool {
        20 * self.good_count >= len
    }
}

/// Replays `sequence` through the machine; fails when it is not admissible.
pub fn admissible_run(path: &PathGamma, sequence: &[ThetaValue]) -> Result<ThetaSequence> {
    if sequence.len() != path.len() {
        return Err(Error::Contract(format!(
            "sequence of length {} for a path of length {}",
            sequence.len(),
            path.len()
        )));
    }
    let mut src = |q: &crate::meso::machine::ThetaQuery| match sequence[q.index] {
        ThetaValue::Star => None,
        v => Some(v == ThetaValue::One),
    };
    let run = run_machine(path, &mut src).map_err(|_| Error::Contract("sequence is not admissible".into()))?;
    if run.theta.values != sequence {
        return Err(Error::Contract("sequence is not admissible".into()));
    }
    Ok(run.theta)
}

/// Bad flag (`#zeros >= K/20`) and the number of type A/B/C/D ones.
pub fn sequence_stats(path: &PathGamma, sequence: &[ThetaValue]) -> Result<SequenceStats> {
    let run = admissible_run(path, sequence)?;
    Ok(stats_of(&run))
}

fn stats_of(t: &ThetaSequence) -> SequenceStats {
    let zeros = t.values.iter().filter(|v| **v == ThetaValue::Zero).count();
    let good_count = t
        .values
        .iter()
        .zip(&t.types)
        .filter(|(v, ty)| **v == ThetaValue::One && ty.is_some_and(|ty| ty.is_good()))
        .count();
    SequenceStats {
        bad: 20 * zeros >= t.len(),
        zeros,
        good_count,
    }
}

/// Per-path enumeration summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub path: Vec<i64>,
    pub admissible_count: usize,
    /// Smallest `good_count / K` over non-bad sequences; `None` when every
    /// sequence is bad.
    pub worst_good_fraction: Option<f64>,
}

pub fn enumeration_report(path: &PathGamma) -> Result<EnumerationReport> {
    let runs = enumerate_runs(path, EXHAUSTIVE_CAP)?;
    let k = path.len() as f64;
    let worst = runs
        .iter()
        .map(stats_of)
        .filter(|s| !s.bad)
        .map(|s| s.good_count as f64 / k)
        .min_by(f64::total_cmp);
    Ok(EnumerationReport {
        path: path.positions().to_vec(),
        admissible_count: runs.len(),
        worst_good_fraction: worst,
    })
}

/// No two admissible sequences first differ at a `*`: whether `Theta_k` is
/// `*` is fixed by the path and `Theta_0..Theta_{k-1}`.
pub fn stars_are_prefix_determined(sequences: &BTreeSet<Vec<ThetaValue>>) -> bool {
    let v: Vec<&Vec<ThetaValue>> = sequences.iter().collect();
    v.iter().enumerate().all(|(i, a)| {
        v[i + 1..].iter().all(|b| match a.iter().zip(b.iter()).position(|(x, y)| x != y) {
            Some(p) => a[p] != ThetaValue::Star && b[p] != ThetaValue::Star,
            None => true,
        })
    })
}

/// Exhaustive check over all paths of one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSweep {
    pub len: usize,
    pub paths: usize,
    pub max_admissible: usize,
    pub count_violations: usize,
    pub good_violations: usize,
    pub star_violations: usize,
    pub accounting_violations: usize,
    pub worst_good_fraction: Option<f64>,
}

impl PathSweep {
    pub fn passed(&self) -> bool {
        self.count_violations == 0
            && self.good_violations == 0
            && self.star_violations == 0
            && self.accounting_violations == 0
    }
}

/// Counts, good-step bounds, star determinism and stage accounting for every
/// path of length `len`.
pub fn sweep_paths(len: usize) -> Result<PathSweep> {
    if len == 0 {
        return Err(Error::config("K", "must be at least 1"));
    }
    let per_path: Vec<Result<(usize, bool, bool, bool, Option<f64>)>> = PathGamma::all(len)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|p| {
            let runs = enumerate_runs(p, EXHAUSTIVE_CAP)?;
            let count = runs.len();
            let mut good_ok = true;
            let mut worst: Option<f64> = None;
            let mut accounting_ok = true;
            for t in &runs {
                let s = stats_of(t);
                if !s.bad {
                    good_ok &= s.enough_good(len);
                    let f = s.good_count as f64 / len as f64;
                    worst = Some(worst.map_or(f, |w| w.min(f)));
                }
                let mut src = ScriptedOutcomes::new(
                    t.values.iter().filter(|v| **v != ThetaValue::Star).map(|v| *v == ThetaValue::One).collect(),
                );
                let run = run_machine(p, &mut src)?;
                accounting_ok &= run.theta == *t && run.stages.iter().all(|r| r.accounting_holds());
            }
            let set: BTreeSet<Vec<ThetaValue>> = runs.into_iter().map(|t| t.values).collect();
            let stars_ok = set.len() == count && stars_are_prefix_determined(&set);
            Ok((count, good_ok, stars_ok, accounting_ok, worst))
        })
        .collect();
    let mut sweep = PathSweep {
        len,
        paths: per_path.len(),
        max_admissible: 0,
        count_violations: 0,
        good_violations: 0,
        star_violations: 0,
        accounting_violations: 0,
        worst_good_fraction: None,
    };
    for r in per_path {
        let (count, good_ok, stars_ok, accounting_ok, worst) = r?;
        sweep.max_admissible = sweep.max_admissible.max(count);
        sweep.count_violations += usize::from(count > 1 << len);
        sweep.good_violations += usize::from(!good_ok);
        sweep.star_violations += usize::from(!stars_ok);
        sweep.accounting_violations += usize::from(!accounting_ok);
        if let Some(w) = worst {
            sweep.worst_good_fraction = Some(sweep.worst_good_fraction.map_or(w, |x: f64| x.min(w)));
        }
    }
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_has_two_sequences() {
        let p = PathGamma::from_steps(&[1]).unwrap();
        let s = enumerate_admissible(&p).unwrap();
        let want: BTreeSet<Vec<ThetaValue>> = [vec![ThetaValue::Zero], vec![ThetaValue::One]].into();
        assert_eq!(s, want);
    }

    #[test]
    fn over_cap_is_a_size_error() {
        let p = PathGamma::from_bits(0, 15);
        assert!(matches!(enumerate_admissible(&p), Err(Error::Size { size: 15, cap: 14 })));
    }

    #[test]
    fn non_admissible_sequence_rejected() {
        let p = PathGamma::from_steps(&[1, 1]).unwrap();
        // Theta_1 is * on this path, so a 1 there is not realizable.
        assert!(sequence_stats(&p, &[ThetaValue::One, ThetaValue::One]).is_err());
        let s = sequence_stats(&p, &[ThetaValue::One, ThetaValue::Star]).unwrap();
        assert!(!s.bad);
        assert_eq!(s.good_count, 1);
    }

    #[test]
    fn small_sweeps_pass() {
        for k in 1..=8 {
            let s = sweep_paths(k).unwrap();
            assert!(s.passed(), "{s:?}");
        }
    }
}
