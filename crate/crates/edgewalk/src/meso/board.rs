use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nearest-neighbour path `z_0 = 0, z_1, ..., z_K` on the mesoscopic lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathGamma {
    z: Vec<i64>,
}

impl PathGamma {
    pub fn new(z: Vec<i64>) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::Contract("a path needs at least one step".into()));
        }
        if z[0] != 0 {
            return Err(Error::Contract("a path starts at 0".into()));
        }
        if let Some(k) = z.windows(2).position(|w| (w[1] - w[0]).abs() != 1) {
            return Err(Error::Contract(format!("step {k} is not nearest-neighbour")));
        }
        Ok(Self { z })
    }

    /// Path from its steps, each `+1` or `-1`.
    pub fn from_steps(steps: &[i64]) -> Result<Self> {
        let mut z = Vec::with_capacity(steps.len() + 1);
        z.push(0);
        for s in steps {
            z.push(z.last().unwrap() + s);
        }
        Self::new(z)
    }

    /// The path whose `k`-th step is `+1` when bit `k` of `bits` is set.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        let steps: Vec<i64> = (0..len).map(|k| if bits >> k & 1 == 1 { 1 } else { -1 }).collect();
        Self::from_steps(&steps).expect("bit patterns give valid paths")
    }

    /// All `2^K` paths of length `K`.
    pub fn all(len: usize) -> impl Iterator<Item = PathGamma> {
        (0..1u64 << len).map(move |b| Self::from_bits(b, len))
    }

    /// Number of steps `K`.
    pub fn len(&self) -> usize {
        self.z.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn z(&self, k: usize) -> i64 {
        self.z[k]
    }

    pub fn positions(&self) -> &[i64] {
        &self.z
    }

    /// Direction of step `k`: `z_{k+1} - z_k`.
    pub fn step(&self, k: usize) -> i64 {
        self.z[k + 1] - self.z[k]
    }
}

/// Edge `(z, z+1)` is identified by its left end `z`.
pub fn edge_key(a: i64, b: i64) -> i64 {
    a.min(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeState {
    Clean,
    /// Granted at the recorded time.
    Usable { since: usize },
    UsableClean { since: usize },
    Dirty,
}

/// States of all edges of the lattice; edges never written are clean.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EdgeStateBoard {
    states: BTreeMap<i64, EdgeState>,
    next_stage: usize,
}

impl EdgeStateBoard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self, edge: i64) -> EdgeState {
        self.states.get(&edge).copied().unwrap_or(EdgeState::Clean)
    }

    /// First step of the next stage.
    pub fn next_stage(&self) -> usize {
        self.next_stage
    }

    pub fn dirty_count(&self) -> usize {
        self.states.values().filter(|s| **s == EdgeState::Dirty).count()
    }

    /// Edges in a state other than clean, in lattice order.
    pub fn marked(&self) -> impl Iterator<Item = (i64, EdgeState)> + '_ {
        self.states.iter().map(|(k, v)| (*k, *v)).filter(|(_, v)| *v != EdgeState::Clean)
    }

    pub(super) fn set(&mut self, edge: i64, state: EdgeState) {
        if state == EdgeState::Clean {
            self.states.remove(&edge);
        } else {
            self.states.insert(edge, state);
        }
    }

    pub(super) fn finish_stage(&mut self, next: usize) {
        self.next_stage = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_are_validated() {
        assert!(PathGamma::new(vec![0, 2]).is_err());
        assert!(PathGamma::new(vec![1, 2]).is_err());
        let p = PathGamma::from_steps(&[1, 1, -1]).unwrap();
        assert_eq!(p.positions(), &[0, 1, 2, 1]);
        assert_eq!(PathGamma::all(5).count(), 32);
    }

    #[test]
    fn board_starts_clean() {
        let b = EdgeStateBoard::new();
        assert_eq!(b.state(-7), EdgeState::Clean);
        assert_eq!(b.dirty_count(), 0);
        assert_eq!(edge_key(3, 2), 2);
    }
}
