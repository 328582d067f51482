use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk_core::ledger::EdgeDir;

/// Default mesoscopic scale: the largest `n` with `n^3 <= N^2`, that is
/// `floor(N^(2/3))` computed in exact integer arithmetic.
pub fn phi(big_n: u64) -> u64 {
    let target = u128::from(big_n) * u128::from(big_n);
    let mut n = (target as f64).cbrt() as u128;
    while n * n * n > target {
        n -= 1;
    }
    while (n + 1) * (n + 1) * (n + 1) <= target {
        n += 1;
    }
    n as u64
}

/// Scales and anchoring of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Macroscopic scale `N`.
    pub big_n: u64,
    /// Mesoscopic scale `n`.
    pub n: u64,
    /// Exponent with `n <= N^(1/alpha)`.
    pub alpha: f64,
    pub eps: f64,
    pub theta: f64,
    pub x: f64,
    /// Direction of the anchoring edge.
    pub anchor_dir: EdgeDir,
    pub seed: u64,
    /// Step cap per stopping time, as a multiple of `N^2`.
    pub cap_factor: f64,
}

impl SimConfig {
    /// Configuration at scale `N` with `n = phi(N)` and the remaining
    /// parameters at their defaults.
    pub fn at_scale(big_n: u64) -> Self {
        Self {
            big_n,
            n: phi(big_n),
            alpha: 1.5,
            eps: 0.25,
            theta: 1.0,
            x: 0.0,
            anchor_dir: EdgeDir::Minus,
            seed: 0,
            cap_factor: 64.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.big_n == 0 {
            return Err(Error::config("N", "must be positive"));
        }
        if self.n == 0 {
            return Err(Error::config("n", "must be positive"));
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::config("alpha", "must exceed 1"));
        }
        let bound = (self.big_n as f64).powf(1.0 / self.alpha);
        if self.n as f64 > bound * (1.0 + 1e-12) {
            return Err(Error::config(
                "n",
                format!("n = {} exceeds N^(1/alpha) = {bound:.3}", self.n),
            ));
        }
        for (key, v) in [("eps", self.eps), ("theta", self.theta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, "must be a positive real"));
            }
        }
        if !self.x.is_finite() {
            return Err(Error::config("x", "must be finite"));
        }
        if self.eps * (self.n as f64) < 2.0 {
            return Err(Error::config("eps", "eps * n must be at least 2"));
        }
        if !(self.cap_factor.is_finite() && self.cap_factor > 0.0) {
            return Err(Error::config("cap_factor", "must be positive"));
        }
        Ok(())
    }

    /// `floor(eps * n)`.
    pub fn eps_n(&self) -> i64 {
        (self.eps * self.n as f64).floor() as i64
    }

    /// `floor(N * theta)`: the crossing count that defines the anchor time.
    pub fn anchor_level(&self) -> u64 {
        (self.big_n as f64 * self.theta).floor() as u64
    }

    /// `floor(N * x)`: the site of the anchoring edge.
    pub fn anchor_site(&self) -> i64 {
        (self.big_n as f64 * self.x).floor() as i64
    }

    pub fn step_cap(&self) -> u64 {
        let n2 = (self.big_n as f64).powi(2);
        (self.cap_factor * n2).min(u64::MAX as f64 / 2.0) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_is_exact_on_cubes() {
        assert_eq!(phi(1000), 100);
        assert_eq!(phi(8), 4);
        assert_eq!(phi(2000), 158);
        assert_eq!(phi(64_000), 1600);
    }

    #[test]
    fn default_config_is_valid() {
        SimConfig::at_scale(2000).validate().unwrap();
    }

    #[test]
    fn oversized_n_is_rejected() {
        let mut c = SimConfig::at_scale(1000);
        c.n = 101;
        assert!(c.validate().is_err());
    }

    #[test]
    fn tiny_eps_rejected() {
        let mut c = SimConfig::at_scale(1000);
        c.eps = 0.01;
        assert!(c.validate().is_err());
    }
}
