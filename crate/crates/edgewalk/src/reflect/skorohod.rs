use crate::error::{Error, Result};
use crate::grid::GridPath;

/// How the free path relates to the barrier at the start of the range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    /// The free path starts on the barrier and is pushed up from time `a`.
    AtBarrier,
    /// The free path starts above the barrier and runs free until it first
    /// meets it; reflection starts there.
    Above,
}

const START_TOL: f64 = 1e-9;

/// Skorohod reflection of `free` on `barrier` at the grid nodes:
/// `W'_t = W_t + sup_{t0 <= s <= t} (f(s) - W_s)`, with `t0 = a` at the
/// barrier and `t0` the first contact time otherwise.
pub fn skorohod_reflect(free: &GridPath, barrier: &GridPath, mode: StartMode) -> Result<GridPath> {
    if !free.same_grid(barrier) {
        return Err(Error::Contract("path and barrier are on different grids".into()));
    }
    let w = free.values();
    let f = barrier.values();
    let gap0 = w[0] - f[0];
    let scale = 1.0 + w[0].abs().max(f[0].abs());
    let t0 = match mode {
        StartMode::AtBarrier => {
            if gap0.abs() > START_TOL * scale {
                return Err(Error::Contract(format!("path starts {gap0} away from the barrier")));
            }
            0
        }
        StartMode::Above => {
            if gap0 < -START_TOL * scale {
                return Err(Error::Contract("path starts below the barrier".into()));
            }
            w.iter().zip(f).position(|(a, b)| a <= b).unwrap_or(w.len())
        }
    };
    let mut out = w.to_vec();
    let mut push = f64::NEG_INFINITY;
    for k in t0..w.len() {
        push = push.max(f[k] - w[k]);
        out[k] = w[k] + push;
    }
    GridPath::new(free.start(), free.end(), out)
}

/// Discrete reflection by recursion: `s[0] = start` and
/// `s[i+1] = s[i] + steps[i]` unless that falls below `barrier[i+1]`, in
/// which case `s[i+1] = barrier[i+1]`.
pub fn reflect_recursion(start: f64, steps: &[f64], barrier: &[f64]) -> Result<Vec<f64>> {
    check_lengths(steps, barrier)?;
    let mut s = Vec::with_capacity(barrier.len());
    s.push(start);
    for (i, z) in steps.iter().enumerate() {
        let next = s[i] + z;
        s.push(if next >= barrier[i + 1] { next } else { barrier[i + 1] });
    }
    Ok(s)
}

/// Discrete reflection by the running-maximum formula:
/// `s[i] = P_i + max(start, max_{1 <= j <= i} (barrier[j] - P_j))` with
/// `P_i = steps[0] + ... + steps[i-1]`.
pub fn reflect_max_formula(start: f64, steps: &[f64], barrier: &[f64]) -> Result<Vec<f64>> {
    check_lengths(steps, barrier)?;
    let mut s = Vec::with_capacity(barrier.len());
    let mut partial = 0.0;
    let mut best = start;
    s.push(start);
    for (i, z) in steps.iter().enumerate() {
        partial += z;
        best = best.max(barrier[i + 1] - partial);
        s.push(partial + best);
    }
    Ok(s)
}

fn check_lengths(steps: &[f64], barrier: &[f64]) -> Result<()> {
    if barrier.len() != steps.len() + 1 {
        return Err(Error::Contract(format!(
            "{} steps need {} barrier values, got {}",
            steps.len(),
            steps.len() + 1,
            barrier.len()
        )));
    }
    Ok(())
}

/// Partial sums `0, x0, x0 + x1, ...`.
pub fn partial_sums(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for x in xs {
        acc += x;
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_barrier_leaves_path_unchanged() {
        let w = GridPath::new(0.0, 1.0, vec![0.0, 1.0, -1.0, 0.5]).unwrap();
        let f = GridPath::constant(0.0, 1.0, 3, -1e9).unwrap();
        assert_eq!(skorohod_reflect(&w, &f, StartMode::Above).unwrap(), w);
    }

    #[test]
    fn downward_steps_are_held_at_zero() {
        let w = GridPath::new(0.0, 2.0, vec![0.0, -1.0, -2.0]).unwrap();
        let f = GridPath::constant(0.0, 2.0, 2, 0.0).unwrap();
        let r = skorohod_reflect(&w, &f, StartMode::AtBarrier).unwrap();
        assert_eq!(r.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn recursion_matches_max_formula_by_hand() {
        let steps = [0.5, -1.5, 0.5, -0.5];
        let barrier = [0.0, 0.5, -0.5, 1.5, 0.0];
        let a = reflect_recursion(0.0, &steps, &barrier).unwrap();
        let b = reflect_max_formula(0.0, &steps, &barrier).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, vec![0.0, 0.5, -0.5, 1.5, 1.0]);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(reflect_recursion(0.0, &[1.0], &[0.0]).is_err());
    }
}
