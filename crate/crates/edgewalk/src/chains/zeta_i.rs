use serde::{Deserialize, Serialize};

use crate::chains::chain::{h_step_law, run_eta};
use crate::chains::coupling::optimal_coupling;
use crate::chains::law::{DiscreteLaw, InvariantLaws};
use crate::error::{Error, Result};
use crate::rng::{open_unit, SimRng};
use crate::walk_core::{LegRecord, Side, TransitionTable, WeightFunction};

/// Precomputed ingredients of the independent environment stream at scale `n`.
#[derive(Debug, Clone)]
pub struct ZetaIBuilder {
    n: u64,
    /// `(ln n)^2 / 2`.
    threshold: f64,
    /// `floor((ln n)^2 / 2)`.
    lag: u64,
    /// Law of `eta(lag)` started from 0.
    lag_law: DiscreteLaw,
    minus: DiscreteLaw,
    zero: DiscreteLaw,
    table: TransitionTable,
}

/// How one coordinate of the stream was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZetaIOrigin {
    /// Independent draw from the centred law.
    Fresh,
    /// The observed chain was kept after the coupling step.
    Kept,
    /// The coupling moved the chain; an independent continuation was run.
    Resampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaIStream {
    pub first: i64,
    pub values: Vec<f64>,
    pub origins: Vec<ZetaIOrigin>,
}

impl ZetaIStream {
    pub fn value_at(&self, site: i64) -> f64 {
        self.values[(site - self.first) as usize]
    }
}

impl ZetaIBuilder {
    pub fn new(weight: &WeightFunction, laws: &InvariantLaws, n: u64, tail_eps: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::config("n", "must be at least 2"));
        }
        let ln = (n as f64).ln();
        let threshold = ln * ln / 2.0;
        let lag = threshold.floor() as u64;
        Ok(Self {
            n,
            threshold,
            lag,
            lag_law: h_step_law(weight, 0, lag, tail_eps)?,
            minus: laws.minus.clone(),
            zero: laws.zero.clone(),
            table: weight.transition_table(),
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn lag(&self) -> u64 {
        self.lag
    }

    /// Builds the stream over the leg's window. Coordinates outside the
    /// reach of the observed chains, or whose chain hits 0 too late, are
    /// fresh draws; the rest follow the observed chain from the coupling
    /// time on, unless the coupling moves it.
    pub fn build(&self, leg: &LegRecord, rng: &mut SimRng) -> Result<ZetaIStream> {
        let mut values = Vec::with_capacity(leg.eps_n as usize * 2 + 1);
        let mut origins = Vec::with_capacity(values.capacity());
        for site in leg.first()..=leg.last() {
            let fresh_region = match leg.side {
                Side::Minus => site <= leg.first(),
                Side::Plus => site >= leg.last(),
            };
            let count = if fresh_region { None } else { leg.observed_count(site) };
            let (v, o) = match count {
                None => (self.zero.sample(rng), ZetaIOrigin::Fresh),
                Some(c) => self.coordinate(leg.eta_path(site), c, rng)?,
            };
            values.push(v);
            origins.push(o);
        }
        Ok(ZetaIStream {
            first: leg.first(),
            values,
            origins,
        })
    }

    fn coordinate(&self, path: &[i64], count: u64, rng: &mut SimRng) -> Result<(f64, ZetaIOrigin)> {
        let c = count as usize;
        let hit = path[..=c.min(path.len() - 1)].iter().position(|&v| v == 0);
        let Some(t) = hit else {
            return Ok((self.zero.sample(rng), ZetaIOrigin::Fresh));
        };
        if ((c - t) as f64) < self.threshold {
            return Ok((self.zero.sample(rng), ZetaIOrigin::Fresh));
        }
        let at_lag = path[t + self.lag as usize];
        let u = open_unit(rng);
        let coupled = if self.lag_law.mass(at_lag) > 0.0 {
            optimal_coupling(&self.lag_law, &self.minus, at_lag, u)?
        } else {
            // Atom beyond the truncated support of the lag law.
            self.minus.quantile_atom(u.min(1.0 - f64::EPSILON))
        };
        if coupled == at_lag {
            Ok((path[c] as f64 + 0.5, ZetaIOrigin::Kept))
        } else {
            let remaining = (c - t) as u64 - self.lag;
            let end = run_eta(coupled, remaining, &self.table, rng);
            Ok((end as f64 + 0.5, ZetaIOrigin::Resampled))
        }
    }
}

/// One-shot form of [`ZetaIBuilder::build`].
pub fn zeta_i_stream(
    leg: &LegRecord,
    weight: &WeightFunction,
    laws: &InvariantLaws,
    n: u64,
    rng: &mut SimRng,
) -> Result<ZetaIStream> {
    ZetaIBuilder::new(weight, laws, n, crate::chains::DEFAULT_TAIL_EPS)?.build(leg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::walk_core::{capture_leg, WalkLedger};

    #[test]
    fn stream_covers_window_with_fresh_boundary() {
        let w = WeightFunction::default();
        let laws = InvariantLaws::new(&w, 1e-15).unwrap();
        let b = ZetaIBuilder::new(&w, &laws, 1000, 1e-15).unwrap();
        let t = w.transition_table();
        let mut r = rng::stream(8, 8);
        let mut l = WalkLedger::new();
        l.advance(50_000, &t, &mut r);
        let leg = capture_leg(&mut l, &t, &mut r, 10, Side::Minus, 1 << 30).unwrap();
        let s = b.build(&leg, &mut r).unwrap();
        assert_eq!(s.values.len(), 21);
        assert_eq!(s.origins[0], ZetaIOrigin::Fresh);
        assert!(s.values.iter().all(|v| (v - 0.5).fract() == 0.0));
    }
}
