//! Experiments that simulate the walk itself.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chains::{InvariantLaws, ZetaIBuilder, DEFAULT_TAIL_EPS};
use crate::error::{Error, Result};
use crate::harness::report::ExperimentReport;
use crate::harness::stats::{self, ks_critical, ks_one_sample, ks_two_sample, ks_two_sample_critical};
use crate::harness::{replicate, stream_id, stream_ids, streams};
use crate::meso::check_eps_tilde;
use crate::reflect::{
    env_process_from_snapshot, increment_variance_rate, limit_env_sequence, partial_sums, reflect_recursion,
    LimitEnvConfig,
};
use crate::rng::{self, SimRng};
use crate::walk_core::{
    capture_leg, mesoscopic_schedule, stationary_env_walk, EdgeDir, Side, SimConfig, TrajectoryRecord,
    TransitionTable, WalkLedger, WeightFunction,
};

fn laws_of(weight: &WeightFunction) -> Result<Arc<InvariantLaws>> {
    Ok(Arc::new(InvariantLaws::new(weight, DEFAULT_TAIL_EPS)?))
}

/// Walk started from independent invariant-law imbalances.
fn stationary_start(laws: &Arc<InvariantLaws>, rng: &mut SimRng) -> WalkLedger {
    WalkLedger::with_random_environment(laws.clone(), rng.random())
}

/// Side through which the walk first leaves `(X - e, X + e)`, found on a
/// copy so that the caller's ledger and generator are untouched; replaying
/// with them reproduces the same exit.
pub(crate) fn first_exit_side(l: &WalkLedger, table: &TransitionTable, rng: &SimRng, e: i64, cap: u64) -> Result<Side> {
    let mut copy = l.clone();
    let mut g = rng.clone();
    let x = copy.position();
    let site = copy.run_until_exit(x - e, x + e, table, &mut g, cap)?;
    Ok(if site < x { Side::Minus } else { Side::Plus })
}

/// Attempts at drawing a stationary start whose first exit is leftward.
const LEFT_EXIT_ATTEMPTS: u64 = 64;

fn eps_n(eps: f64, n: u64) -> Result<i64> {
    let e = (eps * n as f64).floor() as i64;
    if e < 1 {
        return Err(Error::config("eps", format!("floor(eps * n) = 0 at n = {n}")));
    }
    Ok(e)
}

fn cap_for(cap_factor: f64, scale: u64) -> u64 {
    (cap_factor * (scale as f64).powi(2)).min(u64::MAX as f64 / 2.0) as u64
}

fn non_increasing_violations(v: &[f64]) -> usize {
    v.windows(2).filter(|w| w[1] > w[0]).count()
}

#[derive(Debug, Clone, Copy)]
struct AnchorOutcome {
    t_over_n2: f64,
    profile_error: f64,
}

/// Runs to the `floor(N theta)`-th crossing of `(0, -1)` from a zero
/// environment and measures the edge local-time profile against the
/// triangle `(theta - |y|/2)_+`.
fn anchor_outcome(big_n: u64, theta: f64, cap_factor: f64, table: &TransitionTable, rng: &mut SimRng) -> Result<AnchorOutcome> {
    let level = (big_n as f64 * theta).floor() as u64;
    if level == 0 {
        return Err(Error::config("theta", "floor(N * theta) must be at least 1"));
    }
    let mut ledger = WalkLedger::new();
    let t0 = ledger.run_until_edge_count(level, 0, EdgeDir::Minus, table, rng, cap_for(cap_factor, big_n))?;
    let nf = big_n as f64;
    let reach = (2.0 * theta * nf).ceil() as i64 + 1;
    let (lo, hi) = ledger.visited_range();
    let mut sup = 0.0f64;
    for i in lo.min(-reach)..=hi.max(reach) {
        let y = i as f64 / nf;
        let target = (theta - y.abs() / 2.0).max(0.0);
        sup = sup.max((ledger.ell_plus(i) as f64 / nf - target).abs());
    }
    Ok(AnchorOutcome {
        t_over_n2: t0 as f64 / (nf * nf),
        profile_error: sup,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HittingParams {
    pub big_ns: Vec<u64>,
    pub theta: f64,
    pub reps: u32,
    /// Accepted relative deviation of the median at the largest `N`.
    pub rel_tol: f64,
    /// Step cap as a multiple of `N^2`.
    pub cap_factor: f64,
    pub weight: WeightFunction,
}

impl Default for HittingParams {
    fn default() -> Self {
        Self {
            big_ns: vec![500, 1000, 2000],
            theta: 1.0,
            reps: 200,
            rel_tol: 0.15,
            cap_factor: 64.0,
            weight: WeightFunction::default(),
        }
    }
}

/// Median of `T_0 / N^2` per `N` against the limit `4 theta^2`.
pub fn estimate_hitting_constant(p: &HittingParams, seed: u64) -> Result<ExperimentReport> {
    if p.big_ns.is_empty() {
        return Err(Error::config("N", "at least one scale is required"));
    }
    let table = p.weight.transition_table();
    let target = 4.0 * p.theta * p.theta;
    let mut r = ExperimentReport::new("hitting_constant", streams::HITTING, seed);
    r.echo("N", &p.big_ns).echo("theta", p.theta).echo("reps", p.reps).echo("rel_tol", p.rel_tol);
    r.echo("cap_factor", p.cap_factor).echo("weight", &p.weight).stat("target", target, 0);
    let mut devs = Vec::new();
    let mut last = f64::NAN;
    for (b, &big_n) in p.big_ns.iter().enumerate() {
        let out = replicate(seed, streams::HITTING, b as u32, p.reps, |g| {
            anchor_outcome(big_n, p.theta, p.cap_factor, &table, g)
        })?;
        r.replication_streams.extend(stream_ids(streams::HITTING, b as u32, p.reps));
        let x: Vec<f64> = out.iter().map(|o| o.t_over_n2).collect();
        let m = stats::median(&x)?;
        let reps = u64::from(p.reps);
        r.stat(&format!("median_t_over_n2[N={big_n}]"), m, reps);
        r.stat(&format!("deviation[N={big_n}]"), m - target, reps);
        r.stat(&format!("q10_t_over_n2[N={big_n}]"), stats::quantile(&x, 0.1)?, reps);
        r.stat(&format!("q90_t_over_n2[N={big_n}]"), stats::quantile(&x, 0.9)?, reps);
        devs.push((m - target).abs());
        last = m;
    }
    let (lo, hi) = (target * (1.0 - p.rel_tol), target * (1.0 + p.rel_tol));
    r.check(
        "median_at_largest_N",
        last,
        &format!("in [{lo:.3}, {hi:.3}]"),
        u64::from(p.reps),
        (lo..=hi).contains(&last),
    );
    let v = non_increasing_violations(&devs);
    r.diagnostic("deviation_trend_increases", v as f64, "== 0", u64::from(p.reps), v == 0);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileParams {
    pub big_ns: Vec<u64>,
    pub theta: f64,
    pub reps: u32,
    pub quantile: f64,
    pub tol: f64,
    pub cap_factor: f64,
    pub weight: WeightFunction,
}

impl Default for ProfileParams {
    fn default() -> Self {
        Self {
            big_ns: vec![500, 1000, 2000],
            theta: 1.0,
            reps: 100,
            quantile: 0.9,
            tol: 0.1,
            cap_factor: 64.0,
            weight: WeightFunction::default(),
        }
    }
}

/// Sup-distance of the rescaled edge local-time profile at `T_0` from the
/// triangle `(theta - |y|/2)_+`.
pub fn triangle_profile_error(p: &ProfileParams, seed: u64) -> Result<ExperimentReport> {
    if p.big_ns.is_empty() {
        return Err(Error::config("N", "at least one scale is required"));
    }
    let table = p.weight.transition_table();
    let mut r = ExperimentReport::new("triangle_profile", streams::PROFILE, seed);
    r.echo("N", &p.big_ns).echo("theta", p.theta).echo("reps", p.reps).echo("quantile", p.quantile);
    r.echo("tol", p.tol).echo("cap_factor", p.cap_factor).echo("weight", &p.weight);
    let mut qs = Vec::new();
    let reps = u64::from(p.reps);
    for (b, &big_n) in p.big_ns.iter().enumerate() {
        let out = replicate(seed, streams::PROFILE, b as u32, p.reps, |g| {
            anchor_outcome(big_n, p.theta, p.cap_factor, &table, g)
        })?;
        r.replication_streams.extend(stream_ids(streams::PROFILE, b as u32, p.reps));
        let e: Vec<f64> = out.iter().map(|o| o.profile_error).collect();
        let q = stats::quantile(&e, p.quantile)?;
        r.stat(&format!("median_sup_error[N={big_n}]"), stats::median(&e)?, reps);
        r.stat(&format!("quantile_sup_error[N={big_n}]"), q, reps);
        qs.push(q);
    }
    let last = *qs.last().expect("non-empty");
    r.check("sup_error_quantile_at_largest_N", last, &format!("<= {}", p.tol), reps, last <= p.tol);
    let v = non_increasing_violations(&qs);
    r.diagnostic("error_trend_increases", v as f64, "== 0", reps, v == 0);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformParams {
    pub n: u64,
    pub reps: u32,
    pub ks_tol: f64,
    pub tail_level: f64,
    pub tail_tol: f64,
    pub weight: WeightFunction,
}

impl Default for UniformParams {
    fn default() -> Self {
        Self {
            n: 10_000,
            reps: 2000,
            ks_tol: 0.05,
            tail_level: 1.2,
            tail_tol: 0.02,
            weight: WeightFunction::default(),
        }
    }
}

/// KS distance of `X_n / sqrt(n)` from the uniform law on `[-1, 1]`.
pub fn uniform_limit_ks(p: &UniformParams, seed: u64) -> Result<ExperimentReport> {
    if p.reps < 500 {
        return Err(Error::config("reps", "the uniform-limit test needs at least 500 replications"));
    }
    let table = p.weight.transition_table();
    let scale = (p.n as f64).sqrt();
    let x = replicate(seed, streams::UNIFORM, 0, p.reps, |g| {
        let mut l = WalkLedger::new();
        l.advance(p.n, &table, g);
        Ok(l.position() as f64 / scale)
    })?;
    let reps = u64::from(p.reps);
    let mut r = ExperimentReport::new("uniform_limit", streams::UNIFORM, seed);
    r.echo("n", p.n).echo("reps", p.reps).echo("ks_tol", p.ks_tol).echo("tail_level", p.tail_level);
    r.echo("tail_tol", p.tail_tol).echo("weight", &p.weight);
    r.replication_streams.extend(stream_ids(streams::UNIFORM, 0, p.reps));
    let ks = ks_one_sample(&x, |t| ((t + 1.0) / 2.0).clamp(0.0, 1.0))?;
    let mean = stats::mean(&x);
    let se = stats::std_dev(&x) / (x.len() as f64).sqrt();
    let tail = x.iter().filter(|v| v.abs() > p.tail_level).count() as f64 / x.len() as f64;
    r.stat("ks", ks, reps).stat("ks_critical_5pct", ks_critical(x.len(), 0.05), reps);
    r.stat("mean", mean, reps).stat("mean_se", se, reps).stat("tail_fraction", tail, reps);
    r.check("ks", ks, &format!("<= {}", p.ks_tol), reps, ks <= p.ks_tol);
    r.check("mean_within_4se", mean.abs() / se, "<= 4", reps, mean.abs() <= 4.0 * se);
    r.diagnostic("tail_fraction", tail, &format!("<= {}", p.tail_tol), reps, tail <= p.tail_tol);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentParams {
    pub ns: Vec<u64>,
    pub eps: f64,
    pub reps: u32,
    pub slope_lo: f64,
    pub slope_hi: f64,
    /// Per-leg step cap as a multiple of `n^2`.
    pub cap_factor: f64,
    pub weight: WeightFunction,
}

impl Default for ExponentParams {
    fn default() -> Self {
        Self {
            ns: vec![200, 400, 800, 1600],
            eps: 0.25,
            reps: 100,
            slope_lo: 1.35,
            slope_hi: 1.65,
            cap_factor: 64.0,
            weight: WeightFunction::default(),
        }
    }
}

/// Log-log slope of the median first mesoscopic waiting time against `n`,
/// from the stationary start.
pub fn superdiffusive_exponent(p: &ExponentParams, seed: u64) -> Result<ExperimentReport> {
    if p.ns.len() < 2 {
        return Err(Error::config("n", "a slope needs at least two scales"));
    }
    let table = p.weight.transition_table();
    let laws = laws_of(&p.weight)?;
    let mut r = ExperimentReport::new("superdiffusive_exponent", streams::EXPONENT, seed);
    r.echo("n", &p.ns).echo("eps", p.eps).echo("reps", p.reps).echo("slope_band", [p.slope_lo, p.slope_hi]);
    r.echo("cap_factor", p.cap_factor).echo("weight", &p.weight).echo("start", "stationary");
    let reps = u64::from(p.reps);
    let (mut lx, mut ly, mut scaled) = (Vec::new(), Vec::new(), Vec::new());
    let mut floor_violations = 0usize;
    for (b, &n) in p.ns.iter().enumerate() {
        let e = eps_n(p.eps, n)?;
        let cap = cap_for(p.cap_factor, n);
        let inc = replicate(seed, streams::EXPONENT, b as u32, p.reps, |g| {
            let mut l = stationary_start(&laws, g);
            let rec = mesoscopic_schedule(&mut l, &table, g, e, 1, cap)?;
            Ok(rec.times[1] - rec.times[0])
        })?;
        r.replication_streams.extend(stream_ids(streams::EXPONENT, b as u32, p.reps));
        floor_violations += inc.iter().filter(|&&d| d < e as u64).count();
        let x: Vec<f64> = inc.iter().map(|&d| d as f64).collect();
        let m = stats::median(&x)?;
        let s = m / (n as f64).powf(1.5);
        r.stat(&format!("median_increment[n={n}]"), m, reps);
        r.stat(&format!("median_over_n1.5[n={n}]"), s, reps);
        lx.push((n as f64).ln());
        ly.push(m.ln());
        scaled.push(s);
    }
    let (slope, _) = stats::ols(&lx, &ly)?;
    r.stat("slope", slope, reps);
    r.check(
        "slope",
        slope,
        &format!("in [{}, {}]", p.slope_lo, p.slope_hi),
        reps,
        (p.slope_lo..=p.slope_hi).contains(&slope),
    );
    r.check("increment_floor_violations", floor_violations as f64, "== 0", reps, floor_violations == 0);
    let ratio = scaled.iter().cloned().fold(f64::MIN, f64::max) / scaled.iter().cloned().fold(f64::MAX, f64::min);
    r.diagnostic("scaled_median_spread", ratio, "<= 2", reps, ratio <= 2.0);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MesoParams {
    pub n: u64,
    pub k_legs: usize,
    pub eps: f64,
    pub reps: u32,
    pub limit_reps: u32,
    pub ks_tol: f64,
    pub prop_tol: f64,
    pub limit: LimitEnvConfig,
    pub cap_factor: f64,
    pub weight: WeightFunction,
}

impl Default for MesoParams {
    fn default() -> Self {
        let weight = WeightFunction::default();
        let r2 = InvariantLaws::new(&weight, DEFAULT_TAIL_EPS).map(|l| l.r2()).unwrap_or(0.5);
        Self {
            n: 1600,
            k_legs: 2,
            eps: 0.25,
            reps: 500,
            limit_reps: 500,
            ks_tol: 0.1,
            prop_tol: 0.05,
            limit: LimitEnvConfig::new(0.25, r2),
            cap_factor: 64.0,
            weight,
        }
    }
}

/// Mesoscopic increments of the walk against samples of the limit process.
pub fn meso_increment_table(p: &MesoParams, seed: u64) -> Result<ExperimentReport> {
    if p.k_legs == 0 || p.k_legs > 4 {
        return Err(Error::config("K", "must lie in 1..=4"));
    }
    if (p.limit.eps - p.eps).abs() > 1e-12 {
        return Err(Error::config("eps", "walk and limit process must share eps"));
    }
    let table = p.weight.transition_table();
    let laws = laws_of(&p.weight)?;
    let e = eps_n(p.eps, p.n)?;
    let cap = cap_for(p.cap_factor, p.n);
    let scale = (p.n as f64).powf(1.5);
    let k = p.k_legs;
    let walk = replicate(seed, streams::MESO_WALK, 0, p.reps, |g| {
        let mut l = stationary_start(&laws, g);
        mesoscopic_schedule(&mut l, &table, g, e, k, cap)
    })?;
    let limit = replicate(seed, streams::MESO_LIMIT, 0, p.limit_reps, |g| limit_env_sequence(k, &p.limit, g))?;

    let mut r = ExperimentReport::new("meso_increments", streams::MESO_WALK, seed);
    r.echo("n", p.n).echo("K", k).echo("eps", p.eps).echo("reps", p.reps).echo("limit_reps", p.limit_reps);
    r.echo("ks_tol", p.ks_tol).echo("prop_tol", p.prop_tol).echo("limit", &p.limit);
    r.echo("cap_factor", p.cap_factor).echo("weight", &p.weight).echo("start", "stationary");
    r.echo("limit_stream_namespace", streams::MESO_LIMIT);
    r.replication_streams.extend(stream_ids(streams::MESO_WALK, 0, p.reps));
    r.replication_streams.extend(stream_ids(streams::MESO_LIMIT, 0, p.limit_reps));
    let (wr, lr) = (u64::from(p.reps), u64::from(p.limit_reps));

    let mut bad_steps = 0usize;
    for rec in &walk {
        bad_steps += rec.sites.windows(2).filter(|w| (w[1] - w[0]).abs() != e).count();
    }
    r.check("z_increments_not_unit", bad_steps as f64, "== 0", wr, bad_steps == 0);

    let crit = ks_two_sample_critical(walk.len(), limit.len(), 0.05);
    r.stat("ks_critical_5pct", crit, wr.min(lr));
    let mut first_ks = f64::NAN;
    for j in 0..k {
        let tw: Vec<f64> = walk.iter().map(|rec| (rec.times[j + 1] - rec.times[j]) as f64 / scale).collect();
        let tl: Vec<f64> = limit.iter().map(|s| s.t[j]).collect();
        let ks = ks_two_sample(&tw, &tl)?;
        r.stat(&format!("median_walk_t[{}]", j + 1), stats::median(&tw)?, wr);
        r.stat(&format!("median_limit_t[{}]", j + 1), stats::median(&tl)?, lr);
        r.stat(&format!("ks_t[{}]", j + 1), ks, wr.min(lr));
        if j == 0 {
            first_ks = ks;
        }
        let zw = walk.iter().filter(|rec| rec.sites[j + 1] < rec.sites[j]).count() as f64 / walk.len() as f64;
        let zl = limit
            .iter()
            .filter(|s| s.z[j] < if j == 0 { 0 } else { s.z[j - 1] })
            .count() as f64
            / limit.len() as f64;
        r.stat(&format!("p_down_walk[{}]", j + 1), zw, wr);
        r.stat(&format!("p_down_limit[{}]", j + 1), zl, lr);
        if j == 0 {
            let d = (zw - zl).abs();
            r.diagnostic("p_down_difference", d, &format!("<= {}", p.prop_tol), wr.min(lr), d <= p.prop_tol);
        }
    }
    r.check("ks_first_waiting_time", first_ks, &format!("<= {}", p.ks_tol), wr.min(lr), first_ks <= p.ks_tol);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymParams {
    pub ns: Vec<u64>,
    pub eps: f64,
    pub reps: u32,
    /// Scale at which the exceedance fraction is gated.
    pub gate_n: u64,
    pub exceed_tol: f64,
    pub cap_factor: f64,
    pub weight: WeightFunction,
}

impl Default for SymParams {
    fn default() -> Self {
        Self {
            ns: vec![250, 1000, 4000],
            eps: 0.25,
            reps: 100,
            gate_n: 1000,
            exceed_tol: 0.05,
            cap_factor: 64.0,
            weight: WeightFunction::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct SymOutcome {
    sup: f64,
    crude: f64,
    below: bool,
    above: bool,
}

/// One leftward leg from the stationary start, conditioned on the first
/// exit being leftward (the stationary start has no mechanism that brings a
/// walker back after it leaves to the right): the end-of-leg partial sums
/// against the reflection of the independent stream on the beginning-of-leg
/// partial sums, over the sites `(X - eps n, X]`.
fn sym_outcome(
    laws: &Arc<InvariantLaws>,
    builder: &ZetaIBuilder,
    table: &TransitionTable,
    e: i64,
    cap: u64,
    rng: &mut SimRng,
) -> Result<SymOutcome> {
    let mut attempts = 0;
    let mut l = loop {
        if attempts == LEFT_EXIT_ATTEMPTS {
            return Err(Error::Sampling { attempts });
        }
        attempts += 1;
        let l = stationary_start(laws, rng);
        if first_exit_side(&l, table, rng, e, cap)? == Side::Minus {
            break l;
        }
        // Consume a draw so the next attempt does not replay this walk.
        let _: u64 = rng.random();
    };
    let leg = capture_leg(&mut l, table, rng, e, Side::Minus, cap)?;
    let zi = builder.build(&leg, rng)?;
    let sites: Vec<i64> = (leg.first() + 1..leg.base_site).collect();
    let steps = |f: &dyn Fn(i64) -> f64| sites.iter().map(|&i| f(i)).collect::<Vec<f64>>();
    let zb = steps(&|i| leg.begin.zeta_at(i));
    let ze = steps(&|i| leg.end.zeta_at(i));
    let zs = steps(&|i| zi.value_at(i));
    let sb = partial_sums(&zb);
    let se = partial_sums(&ze);
    let si = reflect_recursion(0.0, &zs, &sb)?;
    let n = builder.n() as f64;
    let ln = n.ln();
    let lower = ln.powi(8) * n.powf(0.25);
    let upper = ln.powi(3).ceil();
    let mut sup = 0.0f64;
    let (mut below, mut above) = (false, false);
    for (a, b) in se.iter().zip(&si) {
        sup = sup.max((a - b).abs());
        below |= *a < b - lower;
        above |= *a > b + upper;
    }
    let zmax = zb.iter().chain(&ze).chain(&zs).fold(0.0f64, |m, z| m.max(z.abs()));
    Ok(SymOutcome {
        sup,
        crude: 2.0 * sb.len() as f64 * zmax,
        below,
        above,
    })
}

/// Distance between the end-of-leg environment sums and the reflected
/// independent stream.
pub fn sym_closeness(p: &SymParams, seed: u64) -> Result<ExperimentReport> {
    if p.ns.is_empty() {
        return Err(Error::config("n", "at least one scale is required"));
    }
    let table = p.weight.transition_table();
    let laws = laws_of(&p.weight)?;
    let mut r = ExperimentReport::new("sym_closeness", streams::SYMMETRIC, seed);
    r.echo("n", &p.ns).echo("eps", p.eps).echo("reps", p.reps).echo("gate_n", p.gate_n);
    r.echo("exceed_tol", p.exceed_tol).echo("cap_factor", p.cap_factor).echo("weight", &p.weight);
    r.echo("start", "stationary").echo("side", "minus, conditioned on a leftward first exit");
    let reps = u64::from(p.reps);
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    let mut crude_violations = 0usize;
    let mut gated = None;
    for (b, &n) in p.ns.iter().enumerate() {
        let e = eps_n(p.eps, n)?;
        let builder = ZetaIBuilder::new(&p.weight, &laws, n, DEFAULT_TAIL_EPS)?;
        let cap = cap_for(p.cap_factor, n);
        let out = replicate(seed, streams::SYMMETRIC, b as u32, p.reps, |g| {
            sym_outcome(&laws, &builder, &table, e, cap, g)
        })?;
        r.replication_streams.extend(stream_ids(streams::SYMMETRIC, b as u32, p.reps));
        let sups: Vec<f64> = out.iter().map(|o| o.sup).collect();
        let nf = n as f64;
        let bound = nf.ln().powi(8) * nf.powf(0.25);
        let exceed = sups.iter().filter(|&&s| s > bound).count() as f64 / sups.len() as f64;
        let below = out.iter().filter(|o| o.below).count() as f64 / out.len() as f64;
        let above = out.iter().filter(|o| o.above).count() as f64 / out.len() as f64;
        crude_violations += out.iter().filter(|o| o.sup > o.crude).count();
        let m = stats::median(&sups)?;
        r.stat(&format!("median_sup[n={n}]"), m, reps);
        r.stat(&format!("q90_sup[n={n}]"), stats::quantile(&sups, 0.9)?, reps);
        r.stat(&format!("max_sup[n={n}]"), sups.iter().cloned().fold(0.0, f64::max), reps);
        r.stat(&format!("bound[n={n}]"), bound, 0);
        r.stat(&format!("exceed_fraction[n={n}]"), exceed, reps);
        r.stat(&format!("lower_side_violations[n={n}]"), below, reps);
        r.stat(&format!("upper_side_violations[n={n}]"), above, reps);
        if n == p.gate_n {
            gated = Some(exceed);
        }
        lx.push(nf.ln());
        ly.push(m.max(f64::MIN_POSITIVE).ln());
    }
    match gated {
        Some(x) => r.check("exceed_fraction", x, &format!("<= {}", p.exceed_tol), reps, x <= p.exceed_tol),
        None => r.diagnostic("exceed_fraction", f64::NAN, "gate_n not in the n list", 0, false),
    };
    r.check("crude_bound_violations", crude_violations as f64, "== 0", reps, crude_violations == 0);
    if lx.len() >= 2 {
        let (slope, _) = stats::ols(&lx, &ly)?;
        r.diagnostic("median_sup_growth_exponent", slope, "< 0.5", reps, slope < 0.5);
    }
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TLowerParams {
    pub n: u64,
    pub ks: Vec<usize>,
    pub eps: f64,
    pub eps_tilde: f64,
    pub reps: u32,
    /// Diagnostic ceiling of the frequency at the largest `K`.
    pub freq_tol: f64,
    pub cap_factor: f64,
    pub weight: WeightFunction,
}

impl Default for TLowerParams {
    fn default() -> Self {
        Self {
            n: 800,
            ks: vec![1, 2, 4],
            eps: 0.25,
            eps_tilde: crate::meso::eps_tilde_bound(0.25) / 2.0,
            reps: 200,
            freq_tol: 0.2,
            cap_factor: 64.0,
            weight: WeightFunction::default(),
        }
    }
}

/// Frequency of `T_K - T_0 < K (r2 / 120) (eps_tilde n)^{3/2}`. There is
/// no conditioning on the complements of the bad events, so this is a
/// trend check only.
pub fn t_lowerbound_trend(p: &TLowerParams, seed: u64) -> Result<ExperimentReport> {
    check_eps_tilde(p.eps, p.eps_tilde)?;
    let kmax = *p.ks.iter().max().ok_or_else(|| Error::config("K", "at least one K is required"))?;
    if p.ks.contains(&0) {
        return Err(Error::config("K", "must be at least 1"));
    }
    let table = p.weight.transition_table();
    let laws = laws_of(&p.weight)?;
    let r2 = laws.r2();
    let e = eps_n(p.eps, p.n)?;
    let cap = cap_for(p.cap_factor, p.n);
    let recs = replicate(seed, streams::T_LOWER, 0, p.reps, |g| {
        let mut l = stationary_start(&laws, g);
        mesoscopic_schedule(&mut l, &table, g, e, kmax, cap)
    })?;
    let mut r = ExperimentReport::new("t_lowerbound_trend", streams::T_LOWER, seed);
    r.echo("n", p.n).echo("K", &p.ks).echo("eps", p.eps).echo("eps_tilde", p.eps_tilde).echo("reps", p.reps);
    r.echo("freq_tol", p.freq_tol).echo("cap_factor", p.cap_factor).echo("weight", &p.weight);
    r.echo("start", "stationary");
    r.replication_streams.extend(stream_ids(streams::T_LOWER, 0, p.reps));
    let reps = u64::from(p.reps);
    let unit = r2 / 120.0 * (p.eps_tilde * p.n as f64).powf(1.5);
    r.stat("threshold_per_leg", unit, 0);
    let mut freqs = Vec::new();
    let mut floor_violations = 0usize;
    let mut ks = p.ks.clone();
    ks.sort_unstable();
    for &k in &ks {
        let thr = k as f64 * unit;
        let mut hits = 0usize;
        for rec in &recs {
            let d = rec.times[k] - rec.times[0];
            hits += usize::from((d as f64) < thr);
            floor_violations += usize::from(d < k as u64 * e as u64);
        }
        let f = hits as f64 / recs.len() as f64;
        r.stat(&format!("frequency[K={k}]"), f, reps);
        r.stat(&format!("benchmark[K={k}]"), 0.5f64.powi(k as i32), 0);
        freqs.push(f);
    }
    let last = *freqs.last().expect("non-empty");
    r.diagnostic("frequency_at_largest_K", last, &format!("<= {}", p.freq_tol), reps, last <= p.freq_tol);
    let v = non_increasing_violations(&freqs);
    r.diagnostic("frequency_trend_increases", v as f64, "== 0", reps, v == 0);
    r.check("step_count_floor_violations", floor_violations as f64, "== 0", reps, floor_violations == 0);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvVarianceParams {
    pub n: u64,
    pub eps: f64,
    pub reps: u32,
    pub rel_tol: f64,
    pub weight: WeightFunction,
}

impl Default for EnvVarianceParams {
    fn default() -> Self {
        Self {
            n: 1000,
            eps: 0.25,
            reps: 200,
            rel_tol: 0.1,
            weight: WeightFunction::default(),
        }
    }
}

/// Increment variance rate of the rescaled environment process seen from
/// the walker after `n^{3/2}` steps of the stationary start, against `r2`.
pub fn env_variance(p: &EnvVarianceParams, seed: u64) -> Result<ExperimentReport> {
    let table = p.weight.transition_table();
    let laws = laws_of(&p.weight)?;
    let w = eps_n(p.eps, p.n)?;
    let t = (p.n as f64).powf(1.5).round() as u64;
    let rates = replicate(seed, streams::ENV_VARIANCE, 0, p.reps, |g| {
        let env_seed = g.random();
        let snap = stationary_env_walk(laws.clone(), &table, env_seed, &[t], w, g);
        Ok(increment_variance_rate(&env_process_from_snapshot(&snap[0], w, p.n)?))
    })?;
    let reps = u64::from(p.reps);
    let m = stats::mean(&rates);
    let r2 = laws.r2();
    let mut r = ExperimentReport::new("env_variance", streams::ENV_VARIANCE, seed);
    r.echo("n", p.n).echo("eps", p.eps).echo("reps", p.reps).echo("rel_tol", p.rel_tol).echo("weight", &p.weight);
    r.replication_streams.extend(stream_ids(streams::ENV_VARIANCE, 0, p.reps));
    r.stat("r2", r2, 0).stat("mean_rate", m, reps);
    let rel = (m / r2 - 1.0).abs();
    r.diagnostic("relative_rate_error", rel, &format!("<= {}", p.rel_tol), reps, rel <= p.rel_tol);
    Ok(r)
}

/// One anchored trajectory: from a zero environment to the anchor time of
/// `cfg`, then `k_legs` mesoscopic legs. Drawn from stream 0 of the
/// trajectory namespace.
pub fn anchored_trajectory(cfg: &SimConfig, k_legs: usize, weight: &WeightFunction) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let level = cfg.anchor_level();
    if level == 0 {
        return Err(Error::config("theta", "floor(N * theta) must be at least 1"));
    }
    let id = stream_id(streams::TRAJECTORY, 0, 0);
    let mut g = rng::stream(cfg.seed, id);
    let table = weight.transition_table();
    let run = |g: &mut SimRng| -> Result<TrajectoryRecord> {
        let mut l = WalkLedger::new();
        l.run_until_edge_count(level, cfg.anchor_site(), cfg.anchor_dir, &table, g, cfg.step_cap())?;
        let rec = mesoscopic_schedule(&mut l, &table, g, cfg.eps_n(), k_legs, cfg.step_cap())?;
        rec.check()?;
        Ok(rec)
    };
    run(&mut g).map_err(|e| Error::Replication {
        stream: id,
        source: Box::new(e),
    })
}
