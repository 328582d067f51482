use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::chains::law::DiscreteLaw;
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::walk_core::{TransitionTable, WeightFunction};

/// Which auxiliary chain a [`ChainState`] follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainKind {
    /// The imbalance jump chain: up with probability `w(-x) / (w(x) + w(-x))`.
    Xi,
    /// `xi` observed at its downward steps.
    EtaMinus,
    /// `-xi` observed at the upward steps of `xi`.
    EtaPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainState {
    pub kind: ChainKind,
    pub value: i64,
    /// Number of embedded `xi` moves performed so far.
    pub xi_moves: u64,
}

impl ChainState {
    pub fn new(kind: ChainKind, value: i64) -> Self {
        Self {
            kind,
            value,
            xi_moves: 0,
        }
    }
}

/// One move of `xi` from `x`.
#[inline]
pub fn xi_step(x: i64, table: &TransitionTable, rng: &mut SimRng) -> i64 {
    if rng.next_u64() < table.up_threshold(x) {
        x + 1
    } else {
        x - 1
    }
}

/// One step of the `eta` chain: runs `xi` from `x` until its next downward
/// move and returns the value reached. Also returns the number of `xi` moves.
#[inline]
pub fn eta_step(x: i64, table: &TransitionTable, rng: &mut SimRng) -> (i64, u64) {
    let mut v = x;
    let mut moves = 1;
    while rng.next_u64() < table.up_threshold(v) {
        v += 1;
        moves += 1;
    }
    (v - 1, moves)
}

pub fn chain_step(state: ChainState, table: &TransitionTable, rng: &mut SimRng) -> ChainState {
    let (value, moves) = match state.kind {
        ChainKind::Xi => (xi_step(state.value, table, rng), 1),
        ChainKind::EtaMinus => eta_step(state.value, table, rng),
        ChainKind::EtaPlus => {
            // -xi from -value until its next upward move, mirrored back.
            let (v, m) = eta_step(-state.value, table, rng);
            (-v, m)
        }
    };
    ChainState {
        kind: state.kind,
        value,
        xi_moves: state.xi_moves + moves,
    }
}

/// Runs `eta` for `steps` steps from `start` and returns the final value.
pub fn run_eta(start: i64, steps: u64, table: &TransitionTable, rng: &mut SimRng) -> i64 {
    let mut v = start;
    for _ in 0..steps {
        v = eta_step(v, table, rng).0;
    }
    v
}

/// Probability that `xi` moves up from `j`.
pub fn up_probability(weight: &WeightFunction, j: i64) -> f64 {
    weight.p_right(-j)
}

/// `P(eta(1) >= i | eta(0) = a)`: the product of up-probabilities over
/// `a..=i` when `i >= a`, and 1 below `a`.
pub fn eta_survival(weight: &WeightFunction, a: i64, i: i64) -> f64 {
    if i < a {
        1.0
    } else {
        (a..=i).map(|j| up_probability(weight, j)).product()
    }
}

/// Exact one-step law of `eta` from `a`, obtained by summing over the `xi`
/// excursions (`u` up-moves then one down-move) until the leftover mass drops
/// below `tail_eps`.
pub fn eta_one_step_law(weight: &WeightFunction, a: i64, tail_eps: f64) -> Result<DiscreteLaw> {
    let mut masses = Vec::new();
    let mut reach = 1.0;
    let mut v = a;
    loop {
        let up = up_probability(weight, v);
        masses.push(reach * (1.0 - up));
        reach *= up;
        v += 1;
        if reach < tail_eps {
            break;
        }
        if masses.len() > 1 << 20 {
            return Err(Error::Numeric("eta one-step law does not concentrate".into()));
        }
    }
    DiscreteLaw::new(a - 1, false, masses, reach)
}

/// Law of `eta(1)` when `eta(0)` has law `law`.
pub fn push_forward(law: &DiscreteLaw, weight: &WeightFunction, tail_eps: f64) -> Result<DiscreteLaw> {
    if law.is_half_integer() {
        return Err(Error::Contract("eta lives on the integers".into()));
    }
    let rows: Vec<(f64, DiscreteLaw)> = law
        .atoms()
        .filter(|(_, m)| *m > 0.0)
        .map(|(a, m)| eta_one_step_law(weight, a, tail_eps).map(|l| (m, l)))
        .collect::<Result<_>>()?;
    let lo = rows.iter().map(|(_, l)| l.first_atom()).min().unwrap_or(0);
    let hi = rows.iter().map(|(_, l)| l.last_atom()).max().unwrap_or(0);
    let mut masses = vec![0.0; (hi - lo + 1) as usize];
    let mut slack = law.slack();
    for (m, row) in &rows {
        for (a, p) in row.atoms() {
            masses[(a - lo) as usize] += m * p;
        }
        slack += m * row.slack();
    }
    DiscreteLaw::new(lo, false, masses, slack)
}

/// Law of `eta(h)` given `eta(0) = start`, truncating each one-step law at
/// `tail_eps` and atoms lighter than `tail_eps` after each step.
pub fn h_step_law(weight: &WeightFunction, start: i64, h: u64, tail_eps: f64) -> Result<DiscreteLaw> {
    let mut law = DiscreteLaw::point(start, false);
    for _ in 0..h {
        law = prune(&push_forward(&law, weight, tail_eps)?, tail_eps)?;
    }
    Ok(law)
}

fn prune(law: &DiscreteLaw, tail_eps: f64) -> Result<DiscreteLaw> {
    let dropped: f64 = law.masses().iter().filter(|m| **m < tail_eps).sum();
    let masses = law
        .masses()
        .iter()
        .map(|m| if *m < tail_eps { 0.0 } else { *m })
        .collect();
    DiscreteLaw::new(law.first_atom(), false, masses, law.slack() + dropped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::law::{stationary_law, tv_distance, LawMode};

    #[test]
    fn one_step_law_matches_survival_product() {
        let w = WeightFunction::default();
        let law = eta_one_step_law(&w, 1, 1e-16).unwrap();
        for i in -1..5 {
            assert!((law.survival(i) - eta_survival(&w, 1, i)).abs() < 1e-12);
        }
    }

    #[test]
    fn invariant_law_is_fixed_by_push_forward() {
        let w = WeightFunction::default();
        let rho = stationary_law(&w, LawMode::Minus, 1e-15).unwrap();
        let pushed = push_forward(&rho, &w, 1e-16).unwrap();
        let tv = tv_distance(&rho, &pushed).unwrap();
        assert!(tv.distance <= 1e-12 + tv.slack);
    }

    #[test]
    fn eta_never_drops_more_than_one() {
        let t = WeightFunction::default().transition_table();
        let mut rng = crate::rng::stream(3, 3);
        for a in -4..4 {
            for _ in 0..200 {
                assert!(eta_step(a, &t, &mut rng).0 >= a - 1);
            }
        }
    }
}
