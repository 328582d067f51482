//! Identities that must hold on every sample path.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chains::{monotone_pair_step, InvariantLaws, DEFAULT_TAIL_EPS};
use crate::error::Result;
use crate::harness::report::ExperimentReport;
use crate::harness::walk::first_exit_side;
use crate::harness::{replicate, stream_ids, streams};
use crate::meso::sweep_paths;
use crate::reflect::{reflect_max_formula, reflect_recursion};
use crate::walk_core::{capture_leg, WalkLedger, WeightFunction};

fn weight_panel() -> Vec<WeightFunction> {
    let mut v: Vec<WeightFunction> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&b| WeightFunction::exponential(b).expect("positive rate"))
        .collect();
    v.push(WeightFunction::step(0, 1.0, 3.0).expect("valid step weight"));
    v
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerParams {
    pub runs: u32,
    pub max_prefix: u64,
    pub max_eps_n: i64,
}

impl Default for LedgerParams {
    fn default() -> Self {
        Self {
            runs: 10_000,
            max_prefix: 3000,
            max_eps_n: 12,
        }
    }
}

/// Conservation, imbalance and per-site chain recursion on randomized
/// windows: random weight, zero or invariant-law initial environment, a
/// random prefix, then one captured leg.
pub fn ledger_identities(p: &LedgerParams, seed: u64) -> Result<ExperimentReport> {
    let weights = weight_panel();
    let tables: Vec<_> = weights.iter().map(|w| w.transition_table()).collect();
    let laws: Vec<Arc<InvariantLaws>> = weights
        .iter()
        .map(|w| InvariantLaws::new(w, DEFAULT_TAIL_EPS).map(Arc::new))
        .collect::<Result<_>>()?;
    let out = replicate(seed, streams::LEDGER, 0, p.runs, |g| {
        let k = g.random_range(0..weights.len());
        let mut l = if g.random::<bool>() {
            WalkLedger::with_random_environment(laws[k].clone(), g.random())
        } else {
            WalkLedger::new()
        };
        let prefix = g.random_range(0..=p.max_prefix);
        l.advance(prefix, &tables[k], g);
        let mut bad = u64::from(l.check_invariants().is_err());
        let eps_n = g.random_range(2..=p.max_eps_n.max(2));
        // From an invariant-law start the walk may leave for good on one
        // side, so the leg follows the side of the first exit.
        let side = first_exit_side(&l, &tables[k], g, eps_n, 1 << 40)?;
        let leg = capture_leg(&mut l, &tables[k], g, eps_n, side, 1 << 40)?;
        bad += u64::from(l.check_invariants().is_err());
        bad += u64::from(leg.check_recursion().is_err());
        bad += u64::from(leg.check_chain_bookkeeping().is_err());
        Ok((bad, l.time()))
    })?;
    let violations: u64 = out.iter().map(|o| o.0).sum();
    let steps: u64 = out.iter().map(|o| o.1).sum();
    let reps = u64::from(p.runs);
    let mut r = ExperimentReport::new("ledger_identities", streams::LEDGER, seed);
    r.echo("runs", p.runs).echo("max_prefix", p.max_prefix).echo("max_eps_n", p.max_eps_n);
    r.echo("weights", &weights);
    r.replication_streams.extend(stream_ids(streams::LEDGER, 0, p.runs));
    r.stat("total_steps", steps as f64, reps);
    r.check("violations", violations as f64, "== 0", reps, violations == 0);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReflectionParams {
    pub instances: u32,
    pub len: usize,
}

impl Default for ReflectionParams {
    fn default() -> Self {
        Self {
            instances: 10_000,
            len: 1000,
        }
    }
}

/// Step recursion against the running-maximum formula on half-integer
/// data, where floating-point sums are exact.
pub fn reflection_equivalence(p: &ReflectionParams, seed: u64) -> Result<ExperimentReport> {
    let out = replicate(seed, streams::REFLECTION, 0, p.instances, |g| {
        let half = |g: &mut crate::rng::SimRng, m: i64| g.random_range(-m..=m) as f64 / 2.0;
        let steps: Vec<f64> = (0..p.len).map(|_| half(g, 8)).collect();
        let mut barrier = Vec::with_capacity(p.len + 1);
        let mut b = half(g, 10);
        for _ in 0..=p.len {
            barrier.push(b);
            b += half(g, 4);
        }
        let start = barrier[0] + half(g, 6).abs();
        let a = reflect_recursion(start, &steps, &barrier)?;
        let m = reflect_max_formula(start, &steps, &barrier)?;
        let above = a.iter().zip(&barrier).skip(1).all(|(s, f)| s >= f);
        Ok(u64::from(a != m) + u64::from(!above))
    })?;
    let violations: u64 = out.iter().sum();
    let reps = u64::from(p.instances);
    let mut r = ExperimentReport::new("reflection_equivalence", streams::REFLECTION, seed);
    r.echo("instances", p.instances).echo("len", p.len);
    r.replication_streams.extend(stream_ids(streams::REFLECTION, 0, p.instances));
    r.check("violations", violations as f64, "== 0", reps, violations == 0);
    Ok(r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichParams {
    pub chains: u32,
    pub steps_per_chain: u64,
}

impl Default for SandwichParams {
    fn default() -> Self {
        Self {
            chains: 20,
            steps_per_chain: 50_000,
        }
    }
}

/// `eta - 1 <= eta' <= eta` along shared-uniform coupled chains.
pub fn coupling_sandwich(p: &SandwichParams, seed: u64) -> Result<ExperimentReport> {
    let weights = weight_panel();
    let out = replicate(seed, streams::SANDWICH, 0, p.chains, |g| {
        let w = &weights[g.random_range(0..weights.len())];
        let mut eta = g.random_range(-5..=5);
        let mut eta_p = eta - i64::from(g.random::<bool>());
        let mut bad = 0u64;
        for _ in 0..p.steps_per_chain {
            let (a, b) = monotone_pair_step(eta, eta_p, w, g)?;
            if !(a - 1 <= b && b <= a) {
                bad += 1;
                eta_p = a;
            } else {
                eta_p = b;
            }
            eta = a;
        }
        Ok(bad)
    })?;
    let violations: u64 = out.iter().sum();
    let total = u64::from(p.chains) * p.steps_per_chain;
    let mut r = ExperimentReport::new("coupling_sandwich", streams::SANDWICH, seed);
    r.echo("chains", p.chains).echo("steps_per_chain", p.steps_per_chain).echo("weights", &weights);
    r.replication_streams.extend(stream_ids(streams::SANDWICH, 0, p.chains));
    r.stat("total_steps", total as f64, total);
    r.check("violations", violations as f64, "== 0", total, violations == 0);
    Ok(r)
}

/// Exhaustive admissible-sequence checks for every path of length
/// `1..=max_k`.
pub fn meso_combinatorics(max_k: usize) -> Result<ExperimentReport> {
    let mut r = ExperimentReport::new("meso_combinatorics", 0, 0);
    r.echo("max_K", max_k);
    let mut total = 0usize;
    let mut paths = 0u64;
    for k in 1..=max_k {
        let s = sweep_paths(k)?;
        let v = s.count_violations + s.good_violations + s.star_violations + s.accounting_violations;
        r.stat(&format!("max_admissible[K={k}]"), s.max_admissible as f64, s.paths as u64);
        if let Some(w) = s.worst_good_fraction {
            r.stat(&format!("worst_good_fraction[K={k}]"), w, s.paths as u64);
        }
        total += v;
        paths += s.paths as u64;
    }
    r.check("violations", total as f64, "== 0", paths, total == 0);
    Ok(r)
}

/// Symmetry of the minus law about `-1/2`, the unit shift to the plus law
/// and the zero mean of the centred law, on a panel of weights.
pub fn rho_structure() -> Result<ExperimentReport> {
    const TOL: f64 = 1e-12;
    let weights = weight_panel();
    let mut r = ExperimentReport::new("rho_structure", 0, 0);
    r.echo("weights", &weights).echo("tail_eps", DEFAULT_TAIL_EPS);
    let (mut sym, mut shift, mut mean) = (0.0f64, 0.0f64, 0.0f64);
    for w in &weights {
        let l = InvariantLaws::new(w, DEFAULT_TAIL_EPS)?;
        let (lo, hi) = (l.minus.first_atom(), l.minus.last_atom());
        for k in lo.min(-1 - hi)..=hi.max(-1 - lo) {
            sym = sym.max((l.minus.mass(k) - l.minus.mass(-1 - k)).abs());
            shift = shift.max((l.plus.mass(k + 1) - l.minus.mass(k)).abs());
        }
        mean = mean.max(l.zero.mean().abs());
    }
    let n = weights.len() as u64;
    r.check("minus_symmetry_defect", sym, &format!("<= {TOL:e}"), n, sym <= TOL);
    r.check("plus_shift_defect", shift, &format!("<= {TOL:e}"), n, shift <= TOL);
    r.check("zero_mean", mean, &format!("<= {TOL:e}"), n, mean <= TOL);
    Ok(r)
}
