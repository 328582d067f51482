use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridPath;
use crate::rng::SimRng;

/// Time direction of a reflect-then-absorb construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Start on the barrier at the left end, reflect up to the middle node,
    /// then run free until absorbed.
    Forward,
    /// The time mirror of `Forward`: start at the right end.
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionResult {
    pub path: GridPath,
    /// Absorption time, refined by the linear-interpolation root inside the
    /// first crossing cell.
    pub sigma: Option<f64>,
    pub absorbed: bool,
}

/// Forward kernel on node values. `barrier[0]` is the start, `mid` the node
/// where reflection stops. `increment(k)` is the free increment from node
/// `k - 1` to node `k`. Writes the path into `out` when given and returns
/// the fractional node index of absorption.
pub(crate) fn absorb_kernel(
    barrier: &[f64],
    mid: usize,
    mut increment: impl FnMut(usize) -> f64,
    mut out: Option<&mut Vec<f64>>,
) -> Option<f64> {
    let mut v = barrier[0];
    if let Some(o) = out.as_deref_mut() {
        o.clear();
        o.push(v);
    }
    // Reflection: v_k = max(v_{k-1} + dW_k, f_k), the node form of the
    // running-supremum formula.
    for k in 1..=mid {
        v = (v + increment(k)).max(barrier[k]);
        if let Some(o) = out.as_deref_mut() {
            o.push(v);
        }
    }
    let mut sigma = None;
    for k in mid + 1..barrier.len() {
        let prev = v - barrier[k - 1];
        v += increment(k);
        let gap = v - barrier[k];
        if gap <= 0.0 {
            let frac = if prev > 0.0 { prev / (prev - gap) } else { 0.0 };
            sigma = Some((k - 1) as f64 + frac);
            if let Some(o) = out.as_deref_mut() {
                o.extend_from_slice(&barrier[k..]);
            }
            break;
        }
        if let Some(o) = out.as_deref_mut() {
            o.push(v);
        }
    }
    sigma
}

fn middle_node(path: &GridPath) -> Result<usize> {
    let mid = path.node_of(0.0);
    if (path.time(mid)).abs() > 1e-9 * path.dt() || mid == 0 || mid == path.intervals() {
        return Err(Error::Contract("time 0 must be an interior grid node".into()));
    }
    Ok(mid)
}

/// Reflects `free` on `barrier` over `[a, 0]` and lets it run free on
/// `(0, b]` until it meets the barrier, after which it follows the barrier.
/// The free path must start on the barrier (`Forward`) or end on it
/// (`Backward`); only its increments are used.
pub fn reflect_absorb(free: &GridPath, barrier: &GridPath, direction: Direction) -> Result<AbsorptionResult> {
    if !free.same_grid(barrier) {
        return Err(Error::Contract("path and barrier are on different grids".into()));
    }
    let (w, f) = match direction {
        Direction::Forward => (free.clone(), barrier.clone()),
        Direction::Backward => (free.reversed(), barrier.reversed()),
    };
    let mid = middle_node(&f)?;
    let wv = w.values();
    let scale = 1.0 + wv[0].abs().max(f.values()[0].abs());
    if (wv[0] - f.values()[0]).abs() > 1e-9 * scale {
        return Err(Error::Contract("free path is not anchored on the barrier".into()));
    }
    let mut out = Vec::with_capacity(wv.len());
    let sigma_node = absorb_kernel(f.values(), mid, |k| wv[k] - wv[k - 1], Some(&mut out));
    let path = GridPath::new(f.start(), f.end(), out)?;
    let sigma_fwd = sigma_node.map(|s| f.start() + s * f.dt());
    Ok(match direction {
        Direction::Forward => AbsorptionResult {
            path,
            sigma: sigma_fwd,
            absorbed: sigma_fwd.is_some(),
        },
        Direction::Backward => AbsorptionResult {
            path: path.reversed(),
            // Reversal maps time t to start + end - t.
            sigma: sigma_fwd.map(|s| f.start() + f.end() - s),
            absorbed: sigma_fwd.is_some(),
        },
    })
}

/// Whether one Brownian path with the given variance, reflected and then
/// absorbed on `barrier` in `direction`, is absorbed. Nothing is allocated.
pub fn absorbed_once(barrier: &GridPath, variance: f64, direction: Direction, rng: &mut SimRng) -> Result<bool> {
    let sd = (variance * barrier.dt()).sqrt();
    let mid = middle_node(barrier)?;
    let v = barrier.values();
    let sigma = match direction {
        Direction::Forward => absorb_kernel(v, mid, |_| sd * rng.sample::<f64, _>(StandardNormal), None),
        Direction::Backward => {
            let rev: Vec<f64> = v.iter().rev().copied().collect();
            absorb_kernel(&rev, v.len() - 1 - mid, |_| sd * rng.sample::<f64, _>(StandardNormal), None)
        }
    };
    Ok(sigma.is_some())
}

/// Samples a reflected-then-absorbed Brownian path in `direction`.
pub fn sample_absorbed(
    barrier: &GridPath,
    variance: f64,
    direction: Direction,
    rng: &mut SimRng,
) -> Result<AbsorptionResult> {
    let start = match direction {
        Direction::Forward => super::Anchor::Start(barrier.values()[0]),
        Direction::Backward => super::Anchor::End(barrier.values()[barrier.intervals()]),
    };
    let free = super::sample_brownian_grid(
        variance,
        barrier.start(),
        barrier.end(),
        barrier.intervals(),
        start,
        rng,
    )?;
    reflect_absorb(&free, barrier, direction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_barrier_is_never_hit() {
        let f = GridPath::from_fn(-1.0, 1.0, 8, |t| if t <= 0.0 { 0.0 } else { -100.0 }).unwrap();
        let w = GridPath::from_fn(-1.0, 1.0, 8, |t| t.abs() * 0.0).unwrap();
        let r = reflect_absorb(&w, &f, Direction::Forward).unwrap();
        assert!(!r.absorbed);
        assert!(r.sigma.is_none());
    }

    #[test]
    fn contact_at_first_interior_node() {
        // Barrier flat at 0, free path flat: the first node after 0 touches.
        let f = GridPath::constant(-1.0, 1.0, 8, 0.0).unwrap();
        let w = GridPath::constant(-1.0, 1.0, 8, 0.0).unwrap();
        let r = reflect_absorb(&w, &f, Direction::Forward).unwrap();
        assert_eq!(r.sigma, Some(0.0));
        let rb = reflect_absorb(&w, &f, Direction::Backward).unwrap();
        assert_eq!(rb.sigma, Some(0.0));
    }

    #[test]
    fn exact_touch_gives_node_time() {
        let f = GridPath::constant(-1.0, 1.0, 4, 0.0).unwrap();
        let w = GridPath::new(-1.0, 1.0, vec![0.0, 0.5, 1.0, 0.0, 3.0]).unwrap();
        let r = reflect_absorb(&w, &f, Direction::Forward).unwrap();
        assert_eq!(r.sigma, Some(0.5));
    }

    #[test]
    fn crossing_is_interpolated() {
        let f = GridPath::constant(-1.0, 1.0, 4, 0.0).unwrap();
        // Reflected part ends at 1 at time 0; then drops by 3 over one cell.
        let w = GridPath::new(-1.0, 1.0, vec![0.0, 0.5, 1.0, -2.0, -2.0]).unwrap();
        let r = reflect_absorb(&w, &f, Direction::Forward).unwrap();
        let s = r.sigma.unwrap();
        assert!((s - 0.5 / 3.0).abs() < 1e-12);
        assert_eq!(r.path.values()[3], 0.0);
    }
}
