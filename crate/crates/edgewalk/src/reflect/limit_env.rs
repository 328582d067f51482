use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridPath;
use crate::reflect::absorb::{sample_absorbed, Direction};
use crate::reflect::brownian::fill_increments;
use crate::reflect::zstat::absorption_frequency;
use crate::rng::SimRng;

/// Numerical settings of the limiting environment process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEnvConfig {
    pub eps: f64,
    /// Variance per unit time of every Brownian motion.
    pub variance: f64,
    /// Grid nodes per unit time.
    pub nodes_per_unit: usize,
    /// Replications of the nested absorption-probability estimate.
    pub inner_reps: u64,
    /// Attempts allowed when sampling a path conditioned to be absorbed.
    pub rejection_cap: u64,
}

impl LimitEnvConfig {
    pub fn new(eps: f64, variance: f64) -> Self {
        Self {
            eps,
            variance,
            nodes_per_unit: 1 << 12,
            inner_reps: 512,
            rejection_cap: 1_000_000,
        }
    }

    fn eps_nodes(&self) -> Result<usize> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::config("eps", "must be a positive real"));
        }
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(Error::config("variance", "must be positive"));
        }
        if self.inner_reps == 0 || self.rejection_cap == 0 {
            return Err(Error::config("inner_reps", "replication counts must be positive"));
        }
        let e = (self.eps * self.nodes_per_unit as f64).round() as usize;
        if e < 2 {
            return Err(Error::config("grid", "eps must span at least two grid cells"));
        }
        Ok(e)
    }
}

/// Outcome of one transition of the limit process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitStep {
    /// Position of the embedded walk after the step.
    pub z: i64,
    /// Waiting time of the step.
    pub t: f64,
    /// Nested estimate of the left-absorption probability used for the step.
    pub p_minus: f64,
    /// Rejection attempts spent on the conditioned path.
    pub attempts: u64,
}

/// The environment `W^k` held in absolute coordinates: `W^k_t` is
/// `abs(center + t) - abs(center)`. A step replaces the window around the
/// centre by the absorbed path and moves the centre by `eps`, which is the
/// recentred splice of the definition.
#[derive(Debug, Clone)]
pub struct LimitEnvironment {
    cfg: LimitEnvConfig,
    eps_nodes: usize,
    dt: f64,
    abs: Vec<f64>,
    center: usize,
    z: i64,
    history: Vec<LimitStep>,
}

impl LimitEnvironment {
    /// Fresh two-sided Brownian motion pinned at 0, held on `[-2 eps, 2 eps]`.
    pub fn new(cfg: LimitEnvConfig, rng: &mut SimRng) -> Result<Self> {
        let e = cfg.eps_nodes()?;
        let dt = cfg.eps / e as f64;
        let mut env = Self {
            cfg,
            eps_nodes: e,
            dt,
            abs: vec![0.0; 4 * e + 1],
            center: 2 * e,
            z: 0,
            history: Vec::new(),
        };
        let sd = env.sd();
        fill_increments(&mut env.abs[2 * e..], sd, rng);
        let left = &mut env.abs[..=2 * e];
        left.reverse();
        fill_increments(left, sd, rng);
        left.reverse();
        Ok(env)
    }

    fn sd(&self) -> f64 {
        (self.cfg.variance * self.dt).sqrt()
    }

    pub fn config(&self) -> &LimitEnvConfig {
        &self.cfg
    }

    pub fn history(&self) -> &[LimitStep] {
        &self.history
    }

    pub fn position(&self) -> i64 {
        self.z
    }

    /// Extends the stored path with fresh increments so that
    /// `[center - eps, center + eps]` is available.
    fn ensure_window(&mut self, rng: &mut SimRng) {
        let e = self.eps_nodes;
        let sd = self.sd();
        if self.center < e {
            let extra = (e - self.center).max(self.abs.len());
            let mut front = vec![0.0; extra + 1];
            front[0] = self.abs[0];
            fill_increments(&mut front, sd, rng);
            front.reverse();
            front.pop();
            front.extend_from_slice(&self.abs);
            self.abs = front;
            self.center += extra;
        }
        if self.center + e >= self.abs.len() {
            let extra = (self.center + e + 1 - self.abs.len()).max(self.abs.len());
            let start = self.abs.len() - 1;
            self.abs.resize(start + extra + 1, 0.0);
            fill_increments(&mut self.abs[start..], sd, rng);
        }
    }

    /// `W^k` on `[-eps, eps]`; the stored path always covers it between steps.
    pub fn window(&self) -> GridPath {
        let e = self.eps_nodes;
        let c = self.abs[self.center];
        let values = self.abs[self.center - e..=self.center + e].iter().map(|v| v - c).collect();
        GridPath::new(-self.cfg.eps, self.cfg.eps, values).expect("window is a valid grid path")
    }

    /// `W^k` on `[-span, span]`, extending the stored path as needed.
    pub fn view(&mut self, span: f64, rng: &mut SimRng) -> GridPath {
        let s = ((span / self.dt).round() as usize).max(1);
        while self.center < s || self.center + s >= self.abs.len() {
            let saved = self.eps_nodes;
            self.eps_nodes = s;
            self.ensure_window(rng);
            self.eps_nodes = saved;
        }
        let c = self.abs[self.center];
        let values = self.abs[self.center - s..=self.center + s].iter().map(|v| v - c).collect();
        GridPath::new(-(s as f64) * self.dt, s as f64 * self.dt, values).expect("valid view")
    }

    /// One transition `k -> k + 1`.
    pub fn step(&mut self, rng: &mut SimRng) -> Result<LimitStep> {
        self.ensure_window(rng);
        let barrier = self.window();
        let p_minus = absorption_frequency(
            &barrier,
            self.cfg.variance,
            Direction::Forward,
            self.cfg.inner_reps,
            rng,
        )?;
        let left = rng.random::<f64>() < p_minus;
        let direction = if left { Direction::Forward } else { Direction::Backward };
        let mut attempts = 0;
        let bar = loop {
            if attempts == self.cfg.rejection_cap {
                return Err(Error::Sampling { attempts });
            }
            attempts += 1;
            let r = sample_absorbed(&barrier, self.cfg.variance, direction, rng)?;
            if r.absorbed {
                break r.path;
            }
        };
        let gap: Vec<f64> = bar
            .values()
            .iter()
            .zip(barrier.values())
            .map(|(a, b)| a - b)
            .collect();
        let t = 2.0 * GridPath::new(barrier.start(), barrier.end(), gap)?.integral();
        let e = self.eps_nodes;
        let c = self.abs[self.center];
        for (k, v) in bar.values().iter().enumerate() {
            self.abs[self.center - e + k] = v + c;
        }
        if left {
            self.center -= e;
            self.z -= 1;
        } else {
            self.center += e;
            self.z += 1;
        }
        self.ensure_window(rng);
        let step = LimitStep {
            z: self.z,
            t,
            p_minus,
            attempts,
        };
        self.history.push(step);
        Ok(step)
    }
}

/// `(Z_1..Z_K, T_1..T_K)` of the limit process started from a fresh
/// two-sided Brownian motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSequence {
    pub z: Vec<i64>,
    pub t: Vec<f64>,
    pub p_minus: Vec<f64>,
}

pub fn limit_env_sequence(k_steps: usize, cfg: &LimitEnvConfig, rng: &mut SimRng) -> Result<LimitSequence> {
    if k_steps == 0 {
        return Err(Error::config("K", "must be at least 1"));
    }
    let mut env = LimitEnvironment::new(cfg.clone(), rng)?;
    let mut seq = LimitSequence {
        z: Vec::with_capacity(k_steps),
        t: Vec::with_capacity(k_steps),
        p_minus: Vec::with_capacity(k_steps),
    };
    for _ in 0..k_steps {
        let s = env.step(rng)?;
        seq.z.push(s.z);
        seq.t.push(s.t);
        seq.p_minus.push(s.p_minus);
    }
    Ok(seq)
}

/// Applies one step to an existing environment; see [`LimitEnvironment::step`].
pub fn limit_env_step(env: &mut LimitEnvironment, rng: &mut SimRng) -> Result<LimitStep> {
    env.step(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn small_cfg() -> LimitEnvConfig {
        LimitEnvConfig {
            eps: 0.25,
            variance: 0.5,
            nodes_per_unit: 256,
            inner_reps: 64,
            rejection_cap: 100_000,
        }
    }

    #[test]
    fn steps_are_nearest_neighbour_with_positive_times() {
        let mut r = rng::stream(1, 2);
        let seq = limit_env_sequence(6, &small_cfg(), &mut r).unwrap();
        let mut prev = 0;
        for (z, t) in seq.z.iter().zip(&seq.t) {
            assert_eq!((z - prev).abs(), 1);
            assert!(*t > 0.0);
            prev = *z;
        }
    }

    #[test]
    fn window_is_recentred_and_continuous() {
        let mut r = rng::stream(1, 3);
        let mut env = LimitEnvironment::new(small_cfg(), &mut r).unwrap();
        for _ in 0..5 {
            env.step(&mut r).unwrap();
            let w = env.window();
            assert_eq!(w.values()[w.intervals() / 2], 0.0);
        }
    }
}
