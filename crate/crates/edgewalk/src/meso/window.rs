use std::collections::HashMap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::chains::DiscreteLaw;
use crate::error::{Error, Result};
use crate::meso::board::PathGamma;
use crate::meso::machine::{OutcomeSource, ThetaQuery, ThetaType};
use crate::rng::SimRng;

/// The four upper bounds on `eps_tilde` as multiples of `eps`, with names.
pub fn eps_tilde_bounds(eps: f64) -> [(&'static str, f64); 4] {
    [
        ("eps/8", eps / 8.0),
        ("eps/(2^15*61*ln2)", eps / (32768.0 * 61.0 * LN_2)),
        ("-ln(31/32)*eps/(2^9*61*ln2)", -(31.0f64 / 32.0).ln() * eps / (512.0 * 61.0 * LN_2)),
        ("-ln(1-2^-10)*eps/(240*ln2)", -(-(2.0f64.powi(-10))).ln_1p() * eps / (240.0 * LN_2)),
    ]
}

/// Supremum of admissible `eps_tilde` for a given `eps`.
pub fn eps_tilde_bound(eps: f64) -> f64 {
    eps_tilde_bounds(eps).iter().map(|b| b.1).fold(f64::INFINITY, f64::min)
}

/// `0 < eps_tilde` below all four bounds; the error names every bound
/// violated.
pub fn check_eps_tilde(eps: f64, eps_tilde: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config("eps", "must be a positive real"));
    }
    if !(eps_tilde > 0.0) {
        return Err(Error::config("eps_tilde", "must be positive"));
    }
    let violated: Vec<String> = eps_tilde_bounds(eps)
        .iter()
        .filter(|(_, b)| eps_tilde >= *b)
        .map(|(name, b)| format!("{name} = {b:.6e}"))
        .collect();
    if violated.is_empty() {
        Ok(())
    } else {
        Err(Error::config("eps_tilde", format!("must be < {}", violated.join(", < "))))
    }
}

/// Summation orientation of a window statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// `sum_i sum_{j <= i} zeta_j`.
    Leftward,
    /// `sum_i sum_{j >= i} zeta_j`.
    Rightward,
}

impl Orientation {
    pub fn reversed(self) -> Self {
        match self {
            Orientation::Leftward => Orientation::Rightward,
            Orientation::Rightward => Orientation::Leftward,
        }
    }
}

pub fn window_length(n: u64, eps_tilde: f64) -> usize {
    (eps_tilde * n as f64).ceil() as usize
}

/// `(r2 / 6) (eps_tilde n)^{3/2}`.
pub fn window_threshold(n: u64, eps_tilde: f64, r2: f64) -> f64 {
    r2 / 6.0 * (eps_tilde * n as f64).powf(1.5)
}

/// The double sum, written as the weighted single sum.
pub fn window_statistic(draws: &[f64], orientation: Orientation) -> f64 {
    let len = draws.len();
    draws
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let w = match orientation {
                Orientation::Leftward => len - j,
                Orientation::Rightward => j + 1,
            };
            w as f64 * z
        })
        .sum()
}

/// Whether the window statistic reaches the threshold.
pub fn window_score(draws: &[f64], n: u64, eps_tilde: f64, r2: f64, orientation: Orientation) -> Result<bool> {
    let len = window_length(n, eps_tilde);
    if draws.len() != len {
        return Err(Error::Contract(format!("window needs {len} draws, got {}", draws.len())));
    }
    Ok(window_statistic(draws, orientation) >= window_threshold(n, eps_tilde, r2))
}

const LEFT: u8 = 1;
const RIGHT: u8 = 2;

/// Answers machine queries by evaluating their window events on i.i.d.
/// draws from `rho_0`. `zeta^{gamma,k}` is drawn afresh for each step `k`;
/// the rescaled initial environment is one i.i.d. field whose sign follows
/// the direction of the step that reads it. Leftward stages read the
/// mirrored events: orientations reversed and the two interval halves
/// exchanged.
#[derive(Debug)]
pub struct WindowEventSource<'a> {
    law: &'a DiscreteLaw,
    rng: SimRng,
    dirs: Vec<i64>,
    len: usize,
    half: usize,
    need: f64,
    threshold: f64,
    fresh: HashMap<(usize, i64), Vec<u8>>,
    initial: HashMap<i64, Vec<(f64, f64)>>,
}

impl<'a> WindowEventSource<'a> {
    pub fn new(path: &PathGamma, rho0: &'a DiscreteLaw, n: u64, eps: f64, eps_tilde: f64, rng: SimRng) -> Result<Self> {
        if !(eps_tilde > 0.0 && eps_tilde < eps) {
            return Err(Error::config("eps_tilde", "must lie in (0, eps)"));
        }
        let half = (eps / (4.0 * eps_tilde)).floor() as usize;
        let len = window_length(n, eps_tilde);
        if half == 0 || len == 0 {
            return Err(Error::config("eps_tilde", "leaves no window intervals"));
        }
        Ok(Self {
            law: rho0,
            rng,
            dirs: (0..path.len()).map(|k| path.step(k)).collect(),
            len,
            half,
            need: eps / (512.0 * eps_tilde),
            threshold: window_threshold(n, eps_tilde, rho0.variance()),
            fresh: HashMap::new(),
            initial: HashMap::new(),
        })
    }

    /// Intervals per half edge.
    pub fn half_count(&self) -> usize {
        self.half
    }

    fn sums(&mut self) -> (f64, f64) {
        let mut left = 0.0;
        let mut right = 0.0;
        for j in 0..self.len {
            let z = self.law.sample(&mut self.rng);
            left += (self.len - j) as f64 * z;
            right += (j + 1) as f64 * z;
        }
        (left, right)
    }

    /// Event flags of `zeta^{gamma,k}` on every interval of `edge`.
    fn fresh_flags(&mut self, k: usize, edge: i64) -> &[u8] {
        if !self.fresh.contains_key(&(k, edge)) {
            let thr = self.threshold;
            let flags = (0..2 * self.half)
                .map(|_| {
                    let (l, r) = self.sums();
                    (if l >= thr { LEFT } else { 0 }) | (if r >= thr { RIGHT } else { 0 })
                })
                .collect();
            self.fresh.insert((k, edge), flags);
        }
        &self.fresh[&(k, edge)]
    }

    fn initial_sums(&mut self, edge: i64) -> &[(f64, f64)] {
        if !self.initial.contains_key(&edge) {
            let v = (0..2 * self.half).map(|_| self.sums()).collect();
            self.initial.insert(edge, v);
        }
        &self.initial[&edge]
    }

    fn fresh_event(&mut self, k: usize, edge: i64, m: usize, o: Orientation) -> bool {
        let bit = match o {
            Orientation::Leftward => LEFT,
            Orientation::Rightward => RIGHT,
        };
        self.fresh_flags(k, edge)[m] & bit != 0
    }

    /// `W^{+,o}` (`sign = 1`) or `W^{-,o}` (`sign = -1`) read at step `k`.
    fn initial_event(&mut self, k: usize, edge: i64, m: usize, o: Orientation, sign: f64) -> bool {
        let s = sign * self.dirs[k] as f64;
        let thr = self.threshold;
        let (l, r) = self.initial_sums(edge)[m];
        let v = match o {
            Orientation::Leftward => l,
            Orientation::Rightward => r,
        };
        s * v >= thr
    }

    fn evaluate(&mut self, q: &ThetaQuery) -> bool {
        let h = self.half;
        let mirror = q.dir < 0;
        let o = |base: Orientation| if mirror { base.reversed() } else { base };
        let (lhalf, rhalf) = if mirror { (h..2 * h, 0..h) } else { (0..h, h..2 * h) };
        let (e, j) = (q.edge, q.index);
        let left = o(Orientation::Leftward);
        let right = o(Orientation::Rightward);
        match q.ty {
            ThetaType::C => (0..2 * h).any(|m| self.fresh_event(j, e, m, right) && self.initial_event(j, e, m, right, -1.0)),
            ThetaType::D => (0..2 * h).any(|m| self.fresh_event(j - 1, e, m, left) && self.fresh_event(j, e, m, left)),
            ThetaType::APrime => {
                let a = lhalf.filter(|&m| self.fresh_event(j - 1, e, m, left)).count() as f64;
                let b = rhalf.filter(|&m| self.fresh_event(j, e, m, left)).count() as f64;
                a >= self.need && b >= self.need
            }
            ThetaType::BPrime => {
                let a = lhalf.filter(|&m| self.initial_event(j, e, m, left, 1.0)).count() as f64;
                let b = rhalf.filter(|&m| self.fresh_event(j, e, m, left)).count() as f64;
                a >= self.need && b >= self.need
            }
            ThetaType::A | ThetaType::B => {
                let g = q.grant.expect("usable edges carry their grant time");
                let base = g.since - 2;
                let (el, er): (Vec<usize>, Vec<usize>) = if g.clean {
                    (
                        lhalf.filter(|&m| self.fresh_event(base, e, m, right)).collect(),
                        rhalf.filter(|&m| self.initial_event(base, e, m, right, 1.0)).collect(),
                    )
                } else {
                    (
                        lhalf.filter(|&m| self.fresh_event(base + 1, e, m, right)).collect(),
                        rhalf.filter(|&m| self.fresh_event(base, e, m, right)).collect(),
                    )
                };
                el.iter().any(|&m| self.fresh_event(j, e, m, right)) && er.iter().any(|&m| self.fresh_event(j, e, m, right))
            }
        }
    }
}

impl OutcomeSource for WindowEventSource<'_> {
    fn outcome(&mut self, query: &ThetaQuery) -> Option<bool> {
        Some(self.evaluate(query))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_draws_never_score() {
        let d = vec![0.0; 4];
        assert!(!window_score(&d, 64, 1.0 / 16.0, 0.5, Orientation::Leftward).unwrap());
        assert!(window_score(&d, 65, 1.0 / 16.0, 0.5, Orientation::Leftward).is_err());
    }

    #[test]
    fn threshold_scales_by_two_to_three_halves() {
        let a = window_threshold(256, 0.01, 0.5);
        let b = window_threshold(512, 0.01, 0.5);
        assert!((b / a - 2f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn statistic_matches_double_sum() {
        let d = [0.5, -1.5, 2.5, 0.5];
        let mut left = 0.0;
        let mut right = 0.0;
        for i in 0..4 {
            left += d[..=i].iter().sum::<f64>();
            right += d[i..].iter().sum::<f64>();
        }
        assert_eq!(window_statistic(&d, Orientation::Leftward), left);
        assert_eq!(window_statistic(&d, Orientation::Rightward), right);
    }

    #[test]
    fn admissibility_names_the_binding_bound() {
        let b = eps_tilde_bound(0.25);
        assert!((b / 0.25 - 1.0 / (32768.0 * 61.0 * LN_2)).abs() < 1e-18);
        assert!(check_eps_tilde(0.25, 0.99 * b).is_ok());
        match check_eps_tilde(0.25, 1.0 / 16.0) {
            Err(Error::Config { reason, .. }) => assert!(reason.contains("2^15")),
            other => panic!("{other:?}"),
        }
        match check_eps_tilde(0.25, 1e-6) {
            Err(Error::Config { reason, .. }) => assert!(reason.contains("2^15") && !reason.contains("eps/8")),
            other => panic!("{other:?}"),
        }
    }
}
