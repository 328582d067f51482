use crate::chains::law::DiscreteLaw;
use crate::error::{Error, Result};
use crate::rng::{open_unit, SimRng};
use crate::walk_core::WeightFunction;

/// Maximal coupling driven by one uniform: given `v_mu ~ mu` and an
/// independent `u` on `[0, 1]`, returns `v_nu ~ nu` with
/// `P(v_mu != v_nu) = sum_j (mu(j) - nu(j))_+`.
///
/// `v_mu` is kept outright when `mu(v_mu) <= nu(v_mu)` and otherwise with
/// probability `nu(v_mu) / mu(v_mu)`; the remaining uniform mass is spread
/// over the atoms where `nu` exceeds `mu`, in proportion to the excess.
pub fn optimal_coupling(mu: &DiscreteLaw, nu: &DiscreteLaw, v_mu: i64, u: f64) -> Result<i64> {
    if mu.is_half_integer() != nu.is_half_integer() {
        return Err(Error::Contract("coupled laws live on different lattices".into()));
    }
    let pm = mu.mass(v_mu);
    if pm <= 0.0 {
        return Err(Error::Contract(format!("atom {v_mu} has zero mass under the source law")));
    }
    let pn = nu.mass(v_mu);
    if pm <= pn {
        return Ok(v_mu);
    }
    let keep = pn / pm;
    if u <= keep {
        return Ok(v_mu);
    }
    let lo = mu.first_atom().min(nu.first_atom());
    let hi = mu.last_atom().max(nu.last_atom());
    let excess = |j: i64| (nu.mass(j) - mu.mass(j)).max(0.0);
    let total: f64 = (lo..=hi).map(excess).sum();
    if total <= 0.0 {
        return Err(Error::Numeric("laws differ but carry no excess mass".into()));
    }
    // Position of u inside the redistribution band, rescaled to (0, 1].
    let s = ((u - keep) / (1.0 - keep)).clamp(0.0, 1.0);
    let mut acc = 0.0;
    let mut last = None;
    for j in lo..=hi {
        let e = excess(j);
        if e <= 0.0 {
            continue;
        }
        acc += e / total;
        last = Some(j);
        if s <= acc {
            return Ok(j);
        }
    }
    last.ok_or_else(|| Error::Numeric("empty redistribution band".into()))
}

/// Coupled one-step move of two `eta` chains with `eta' in [eta - 1, eta]`,
/// using the shared-uniform quantile construction: each coordinate is set to
/// the largest `i` with `P(eta(1) >= i) >= U`.
pub fn monotone_pair_step(
    eta: i64,
    eta_prime: i64,
    weight: &WeightFunction,
    rng: &mut SimRng,
) -> Result<(i64, i64)> {
    if !(eta - 1 <= eta_prime && eta_prime <= eta) {
        return Err(Error::Contract(format!(
            "sandwich violated on input: eta = {eta}, eta' = {eta_prime}"
        )));
    }
    let u = open_unit(rng);
    Ok((quantile_step(eta, u, weight), quantile_step(eta_prime, u, weight)))
}

/// `max { i : P(eta(1) >= i | eta(0) = a) >= u }` for `u` in `(0, 1]`.
pub fn quantile_step(a: i64, u: f64, weight: &WeightFunction) -> i64 {
    // Survival is 1 up to a - 1 and multiplies by the up-probability at each
    // further level.
    let mut i = a - 1;
    let mut s = 1.0;
    loop {
        let next = s * weight.p_right(-(i + 1));
        if next >= u {
            s = next;
            i += 1;
        } else {
            return i;
        }
    }
}

/// Total-variation distance; see [`crate::chains::law::tv_distance`].
pub use crate::chains::law::tv_distance;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::chain::eta_survival;

    #[test]
    fn identical_laws_never_move() {
        let mu = DiscreteLaw::new(0, false, vec![0.3, 0.7], 0.0).unwrap();
        for u in [0.01, 0.5, 1.0] {
            assert_eq!(optimal_coupling(&mu, &mu, 1, u).unwrap(), 1);
        }
    }

    #[test]
    fn disjoint_points_always_move() {
        let mu = DiscreteLaw::point(0, false);
        let nu = DiscreteLaw::point(1, false);
        assert_eq!(optimal_coupling(&mu, &nu, 0, 0.3).unwrap(), 1);
    }

    #[test]
    fn zero_mass_input_rejected() {
        let mu = DiscreteLaw::point(0, false);
        assert!(optimal_coupling(&mu, &mu, 5, 0.5).is_err());
    }

    #[test]
    fn quantile_step_inverts_survival() {
        let w = WeightFunction::default();
        for a in -3..3 {
            for k in 1..200 {
                let u = k as f64 / 200.0;
                let i = quantile_step(a, u, &w);
                assert!(eta_survival(&w, a, i) >= u);
                assert!(eta_survival(&w, a, i + 1) < u);
            }
        }
    }
}
