//! Experiments on the limit objects, the window events and the coupling.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::chains::{optimal_coupling, tv_distance, DiscreteLaw, InvariantLaws, DEFAULT_TAIL_EPS};
use crate::error::{Error, Result};
use crate::grid::GridPath;
use crate::harness::report::ExperimentReport;
use crate::harness::stats::{self, binomial_radius};
use crate::harness::{replicate, replicate_indexed, stream_ids, streams};
use crate::meso::{check_eps_tilde, eps_tilde_bound, window_length, window_score, Orientation};
use crate::reflect::{
    absorption_prob_mc, limit_env_sequence, quartic_root_barrier, sample_brownian_grid, Anchor, LimitEnvConfig,
};
use crate::rng::open_unit;
use crate::walk_core::WeightFunction;

/// Largest jump of the empirical cdf.
pub fn atom_check(samples: &[f64]) -> Result<f64> {
    if samples.len() < 1000 {
        return Err(Error::config("samples", "the atom check needs at least 1000 samples"));
    }
    stats::max_cdf_jump(samples)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomParams {
    pub samples: u32,
    pub tol: f64,
    pub limit: LimitEnvConfig,
}

impl Default for AtomParams {
    fn default() -> Self {
        Self {
            samples: 5000,
            tol: 0.01,
            limit: LimitEnvConfig::new(0.25, default_r2()),
        }
    }
}

fn default_r2() -> f64 {
    InvariantLaws::new(&WeightFunction::default(), DEFAULT_TAIL_EPS).map_or(0.5, |l| l.r2())
}

/// Atom check on samples of the first waiting time of the limit process,
/// with continuous uniforms as a control.
pub fn limit_atoms(p: &AtomParams, seed: u64) -> Result<ExperimentReport> {
    let t = replicate(seed, streams::ATOMS, 0, p.samples, |g| Ok(limit_env_sequence(1, &p.limit, g)?.t[0]))?;
    let u = replicate(seed, streams::ATOMS, 1, p.samples, |g| Ok(g.random::<f64>()))?;
    let reps = u64::from(p.samples);
    let mut r = ExperimentReport::new("limit_atoms", streams::ATOMS, seed);
    r.echo("samples", p.samples).echo("tol", p.tol).echo("limit", &p.limit);
    r.replication_streams.extend(stream_ids(streams::ATOMS, 0, p.samples));
    r.replication_streams.extend(stream_ids(streams::ATOMS, 1, p.samples));
    let jump = atom_check(&t)?;
    let control = atom_check(&u)?;
    r.stat("median_waiting_time", stats::median(&t)?, reps);
    r.stat("min_waiting_time", t.iter().cloned().fold(f64::INFINITY, f64::min), reps);
    r.check("max_cdf_jump", jump, &format!("<= {}", p.tol), reps, jump <= p.tol);
    r.check("uniform_control_jump", control, "<= 0.003", reps, control <= 0.003);
    Ok(r)
}

/// Barrier families of the absorption experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierKind {
    Brownian,
    Zero,
    QuarticRoot,
    Linear,
}

impl BarrierKind {
    pub const ALL: [BarrierKind; 4] = [Self::Brownian, Self::Zero, Self::QuarticRoot, Self::Linear];

    pub fn name(self) -> &'static str {
        match self {
            Self::Brownian => "brownian",
            Self::Zero => "zero",
            Self::QuarticRoot => "quartic_root",
            Self::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbsorptionParams {
    pub kinds: Vec<BarrierKind>,
    pub brownian_barriers: u32,
    pub reps: u64,
    /// Half-width `L` of the barrier domain `[-L, L]`.
    pub half_width: f64,
    pub intervals: usize,
    pub variance: f64,
    pub tol: f64,
    pub sigma_mult: f64,
}

impl Default for AbsorptionParams {
    fn default() -> Self {
        Self {
            kinds: BarrierKind::ALL.to_vec(),
            brownian_barriers: 4,
            reps: 5000,
            half_width: 0.25,
            intervals: 2048,
            variance: default_r2(),
            tol: 0.05,
            sigma_mult: 4.0,
        }
    }
}

/// Forward and backward absorption probabilities on Brownian and
/// deterministic barriers.
pub fn absorption_duality(p: &AbsorptionParams, seed: u64) -> Result<ExperimentReport> {
    if !p.intervals.is_multiple_of(2) {
        return Err(Error::config("grid", "the barrier grid needs an even number of intervals"));
    }
    if p.kinds.is_empty() {
        return Err(Error::config("barrier", "at least one barrier family is required"));
    }
    let l = p.half_width;
    let mut fixed: Vec<(&str, GridPath)> = Vec::new();
    for &k in &p.kinds {
        let path = match k {
            BarrierKind::Brownian => continue,
            BarrierKind::Zero => GridPath::constant(-l, l, p.intervals, 0.0)?,
            BarrierKind::QuarticRoot => GridPath::from_fn(-l, l, p.intervals, quartic_root_barrier)?,
            BarrierKind::Linear => GridPath::from_fn(-l, l, p.intervals, |s| s)?,
        };
        fixed.push((k.name(), path));
    }
    let with_brownian = p.kinds.contains(&BarrierKind::Brownian);
    // Barriers and estimates use separate blocks, so adding barriers never
    // shifts the streams of earlier ones.
    let brownian = if with_brownian && p.brownian_barriers > 0 {
        replicate(seed, streams::ABSORPTION, 0, p.brownian_barriers, |g| {
            sample_brownian_grid(p.variance, -l, l, p.intervals, Anchor::Node { at: 0.0, value: 0.0 }, g)
        })?
    } else {
        Vec::new()
    };
    let mut barriers: Vec<(String, bool, GridPath)> = brownian
        .into_iter()
        .enumerate()
        .map(|(i, b)| (format!("brownian_{i}"), true, b))
        .collect();
    barriers.extend(fixed.into_iter().map(|(n, b)| (n.to_string(), false, b)));
    let reversed: Vec<GridPath> = barriers.iter().map(|b| b.2.reversed()).collect();
    let all: Vec<&GridPath> = barriers.iter().map(|b| &b.2).chain(reversed.iter()).collect();
    let estimates = replicate_indexed(seed, streams::ABSORPTION, 1, all.len() as u32, |i, g| {
        absorption_prob_mc(all[i], p.variance, p.reps, g)
    })?;
    let nb = barriers.len();
    let mut r = ExperimentReport::new("absorption_duality", streams::ABSORPTION, seed);
    r.echo("kinds", &p.kinds);
    r.echo("brownian_barriers", p.brownian_barriers).echo("reps", p.reps).echo("half_width", p.half_width);
    r.echo("intervals", p.intervals).echo("variance", p.variance).echo("tol", p.tol);
    r.echo("sigma_mult", p.sigma_mult);
    let drawn = if with_brownian { p.brownian_barriers } else { 0 };
    r.replication_streams.extend(stream_ids(streams::ABSORPTION, 0, drawn));
    r.replication_streams.extend(stream_ids(streams::ABSORPTION, 1, all.len() as u32));
    let reps = 2 * p.reps;
    let mut worst_brownian = 0.0f64;
    let mut worst_floor = f64::INFINITY;
    let mut worst_reversal = 0.0f64;
    for (i, (name, brownian, _)) in barriers.iter().enumerate() {
        let e = &estimates[i];
        let rev = &estimates[nb + i];
        r.stat(&format!("p_minus[{name}]"), e.p_minus, p.reps);
        r.stat(&format!("p_plus[{name}]"), e.p_plus, p.reps);
        r.stat(&format!("sum[{name}]"), e.sum(), reps);
        r.stat(&format!("se_sum[{name}]"), e.se_sum(), reps);
        if *brownian {
            worst_brownian = worst_brownian.max((e.sum() - 1.0).abs());
        }
        worst_floor = worst_floor.min((e.sum() - (1.0 - p.sigma_mult * e.se_sum())) / e.se_sum().max(1e-12));
        // p_plus of f against p_minus of the time-reversed barrier.
        let se = (e.se_plus.powi(2) + rev.se_minus.powi(2)).sqrt().max(1e-12);
        worst_reversal = worst_reversal.max((e.p_plus - rev.p_minus).abs() / se);
    }
    r.check(
        "brownian_sum_deviation",
        worst_brownian,
        &format!("<= {}", p.tol),
        reps,
        worst_brownian <= p.tol,
    );
    r.check(
        "sum_floor_margin_in_se",
        worst_floor,
        &format!(">= 0 (sum >= 1 - {} se)", p.sigma_mult),
        reps,
        worst_floor >= 0.0,
    );
    r.diagnostic("time_reversal_z", worst_reversal, "<= 4", p.reps, worst_reversal <= 4.0);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowFloorParams {
    pub ns: Vec<u64>,
    pub eps: f64,
    pub eps_tilde: f64,
    pub windows: u32,
    pub floor: f64,
    pub weight: WeightFunction,
}

impl Default for WindowFloorParams {
    fn default() -> Self {
        Self {
            ns: vec![256, 1024],
            eps: 0.25,
            eps_tilde: eps_tilde_bound(0.25) / 2.0,
            windows: 100_000,
            floor: 1.0 / 32.0,
            weight: WeightFunction::default(),
        }
    }
}

const WINDOW_CHUNK: u32 = 1000;

/// Empirical probability that a window of i.i.d. centred environment draws
/// reaches the window threshold, in both orientations.
pub fn window_floor(p: &WindowFloorParams, seed: u64) -> Result<ExperimentReport> {
    if p.ns.is_empty() {
        return Err(Error::config("n", "at least one scale is required"));
    }
    if !(p.eps_tilde > 0.0) {
        return Err(Error::config("eps_tilde", "must be positive"));
    }
    let laws = InvariantLaws::new(&p.weight, DEFAULT_TAIL_EPS)?;
    let r2 = laws.r2();
    let chunks = p.windows.div_ceil(WINDOW_CHUNK);
    let mut r = ExperimentReport::new("window_floor", streams::WINDOW, seed);
    r.echo("n", &p.ns).echo("eps", p.eps).echo("eps_tilde", p.eps_tilde).echo("windows", p.windows);
    r.echo("floor", p.floor).echo("weight", &p.weight);
    r.echo("eps_tilde_admissible", check_eps_tilde(p.eps, p.eps_tilde).is_ok());
    let mut worst = f64::INFINITY;
    let total = u64::from(chunks * WINDOW_CHUNK);
    for (b, &n) in p.ns.iter().enumerate() {
        let len = window_length(n, p.eps_tilde);
        let counts = replicate(seed, streams::WINDOW, b as u32, chunks, |g| {
            let mut draws = vec![0.0; len];
            let (mut left, mut right) = (0u64, 0u64);
            for _ in 0..WINDOW_CHUNK {
                draws.iter_mut().for_each(|d| *d = laws.zero.sample(g));
                left += u64::from(window_score(&draws, n, p.eps_tilde, r2, Orientation::Leftward)?);
                right += u64::from(window_score(&draws, n, p.eps_tilde, r2, Orientation::Rightward)?);
            }
            Ok((left, right))
        })?;
        r.replication_streams.extend(stream_ids(streams::WINDOW, b as u32, chunks));
        let (l, rt) = counts.iter().fold((0, 0), |a, c| (a.0 + c.0, a.1 + c.1));
        for (name, c) in [("leftward", l), ("rightward", rt)] {
            let f = c as f64 / total as f64;
            r.stat(&format!("p_{name}[n={n}]"), f, total);
            r.stat(&format!("radius_{name}[n={n}]"), binomial_radius(f, total, 1.96), total);
            worst = worst.min(f);
        }
        r.stat(&format!("window_length[n={n}]"), len as f64, 0);
    }
    r.check("min_window_probability", worst, &format!(">= {}", p.floor), total, worst >= p.floor);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingParams {
    pub pairs: u32,
    pub draws: u64,
    pub support: usize,
    pub sigma_mult: f64,
}

impl Default for CouplingParams {
    fn default() -> Self {
        Self {
            pairs: 20,
            draws: 20_000,
            support: 8,
            sigma_mult: 4.0,
        }
    }
}

fn random_law(support: usize, rng: &mut crate::rng::SimRng) -> Result<DiscreteLaw> {
    let origin = rng.random_range(-2..=2);
    let masses: Vec<f64> = (0..support).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    DiscreteLaw::new(origin, false, masses, 0.0)
}

/// Mismatch frequency of the optimal coupling against the total-variation
/// distance, on random law pairs.
pub fn coupling_optimality(p: &CouplingParams, seed: u64) -> Result<ExperimentReport> {
    if p.support < 2 || p.draws == 0 {
        return Err(Error::config("support", "need at least two atoms and one draw"));
    }
    let out = replicate(seed, streams::COUPLING, 0, p.pairs, |g| {
        let mu = random_law(p.support, g)?;
        let nu = random_law(p.support, g)?;
        let tv = tv_distance(&mu, &nu)?.distance;
        let mut mismatches = 0u64;
        let lo = nu.first_atom();
        let mut counts = vec![0u64; (nu.last_atom() - lo + 1) as usize];
        for _ in 0..p.draws {
            let v = mu.sample_atom(g);
            let w = optimal_coupling(&mu, &nu, v, open_unit(g))?;
            mismatches += u64::from(v != w);
            match counts.get_mut((w - lo) as usize) {
                Some(c) => *c += 1,
                None => return Err(Error::Contract(format!("coupled value {w} outside the target support"))),
            }
        }
        let expected: Vec<f64> = (0..counts.len()).map(|k| nu.mass(lo + k as i64) * p.draws as f64).collect();
        let keep: Vec<usize> = (0..counts.len()).filter(|&k| expected[k] > 0.0).collect();
        let obs: Vec<u64> = keep.iter().map(|&k| counts[k]).collect();
        let exp: Vec<f64> = keep.iter().map(|&k| expected[k]).collect();
        let pval = if obs.len() >= 2 { stats::chi_square(&obs, &exp, 0)?.1 } else { 1.0 };
        Ok((tv, mismatches as f64 / p.draws as f64, pval))
    })?;
    let mut r = ExperimentReport::new("coupling_optimality", streams::COUPLING, seed);
    r.echo("pairs", p.pairs).echo("draws", p.draws).echo("support", p.support).echo("sigma_mult", p.sigma_mult);
    r.replication_streams.extend(stream_ids(streams::COUPLING, 0, p.pairs));
    let mut worst_z = 0.0f64;
    let mut min_p = 1.0f64;
    for (i, (tv, f, pval)) in out.iter().enumerate() {
        r.stat(&format!("tv[{i}]"), *tv, 0);
        r.stat(&format!("mismatch[{i}]"), *f, p.draws);
        let se = binomial_radius(*tv, p.draws, 1.0);
        let z = if se > 0.0 { (f - tv).abs() / se } else if (f - tv).abs() < 1e-12 { 0.0 } else { f64::INFINITY };
        worst_z = worst_z.max(z);
        min_p = min_p.min(*pval);
    }
    r.check(
        "worst_mismatch_z",
        worst_z,
        &format!("<= {}", p.sigma_mult),
        p.draws,
        worst_z <= p.sigma_mult,
    );
    r.diagnostic("min_marginal_chi_square_p", min_p, ">= 1e-4", p.draws, min_p >= 1e-4);
    Ok(r)
}
