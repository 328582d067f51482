use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::walk_core::WeightFunction;

/// A probability mass function on a finite window of `Z` or of `1/2 + Z`.
///
/// Atoms are addressed by integers: atom `a` carries the value `a` on an
/// integer law and `a + 1/2` on a half-integer law. Masses are normalized
/// over the retained support; `slack` bounds the mass that truncation removed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteLaw {
    origin: i64,
    half: bool,
    masses: Vec<f64>,
    slack: f64,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl DiscreteLaw {
    /// Builds a law whose first atom is `origin`. Masses are renormalized.
    pub fn new(origin: i64, half: bool, masses: Vec<f64>, slack: f64) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Contract("law with empty support".into()));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Numeric("law masses must be finite and non-negative".into()));
        }
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Numeric("law has zero total mass".into()));
        }
        let masses: Vec<f64> = masses.iter().map(|m| m / total).collect();
        let mut law = Self {
            origin,
            half,
            masses,
            slack: slack.max(0.0),
            cdf: Vec::new(),
        };
        law.rebuild_cdf();
        law.trim();
        Ok(law)
    }

    pub fn point(atom: i64, half: bool) -> Self {
        Self::new(atom, half, vec![1.0], 0.0).expect("point mass is valid")
    }

    /// Empirical law of a sample of atoms.
    pub fn empirical(atoms: &[i64], half: bool) -> Result<Self> {
        let (Some(&lo), Some(&hi)) = (atoms.iter().min(), atoms.iter().max()) else {
            return Err(Error::Contract("empirical law of an empty sample".into()));
        };
        let mut counts = vec![0.0; (hi - lo + 1) as usize];
        for &a in atoms {
            counts[(a - lo) as usize] += 1.0;
        }
        Self::new(lo, half, counts, 0.0)
    }

    fn rebuild_cdf(&mut self) {
        let mut acc = 0.0;
        self.cdf = self
            .masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        if let Some(last) = self.cdf.last_mut() {
            *last = 1.0;
        }
    }

    /// Drops exact-zero masses at both ends of the support.
    fn trim(&mut self) {
        let first = self.masses.iter().position(|m| *m > 0.0).unwrap_or(0);
        let last = self.masses.iter().rposition(|m| *m > 0.0).unwrap_or(0);
        if first > 0 || last + 1 < self.masses.len() {
            self.masses = self.masses[first..=last].to_vec();
            self.origin += first as i64;
            self.rebuild_cdf();
        }
    }

    pub fn is_half_integer(&self) -> bool {
        self.half
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }

    pub fn first_atom(&self) -> i64 {
        self.origin
    }

    pub fn last_atom(&self) -> i64 {
        self.origin + self.masses.len() as i64 - 1
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn value_of(&self, atom: i64) -> f64 {
        atom as f64 + if self.half { 0.5 } else { 0.0 }
    }

    pub fn mass(&self, atom: i64) -> f64 {
        let k = atom - self.origin;
        if k < 0 || k >= self.masses.len() as i64 {
            0.0
        } else {
            self.masses[k as usize]
        }
    }

    /// `(atom, mass)` pairs over the retained support.
    pub fn atoms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(move |(k, m)| (self.origin + k as i64, *m))
    }

    /// `(value, mass)` pairs over the retained support.
    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms().map(move |(a, m)| (self.value_of(a), m))
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(v, m)| v * m).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.support().map(|(v, m)| (v - mu) * (v - mu) * m).sum()
    }

    /// `P(atom >= a)`.
    pub fn survival(&self, a: i64) -> f64 {
        let k = a - self.origin;
        if k <= 0 {
            1.0
        } else if k as usize >= self.masses.len() {
            0.0
        } else {
            1.0 - self.cdf[k as usize - 1]
        }
    }

    /// The same law moved by `by` atoms.
    pub fn shifted(&self, by: i64) -> Self {
        let mut law = self.clone();
        law.origin += by;
        law
    }

    /// Law of the negated value: atom `a` maps to `-a` on integer laws and to
    /// `-a - 1` on half-integer laws.
    pub fn negated(&self) -> Self {
        let mut masses = self.masses.clone();
        masses.reverse();
        let origin = if self.half {
            -self.last_atom() - 1
        } else {
            -self.last_atom()
        };
        Self::new(origin, self.half, masses, self.slack).expect("negation keeps validity")
    }

    /// Reinterprets the atoms as half-integers (`a` becomes `a + 1/2`).
    pub fn as_half_integer(&self) -> Self {
        let mut law = self.clone();
        law.half = true;
        law
    }

    /// Inverse-CDF sampling of an atom.
    pub fn sample_atom(&self, rng: &mut SimRng) -> i64 {
        self.quantile_atom(rng.random::<f64>())
    }

    /// Smallest atom whose CDF exceeds `u`, for `u` in `[0, 1)`.
    pub fn quantile_atom(&self, u: f64) -> i64 {
        let k = self.cdf.partition_point(|c| *c <= u).min(self.masses.len() - 1);
        self.origin + k as i64
    }

    pub fn sample(&self, rng: &mut SimRng) -> f64 {
        let a = self.sample_atom(rng);
        self.value_of(a)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,mass\n");
        for (v, m) in self.support() {
            out.push_str(&format!("{v},{m:e}\n"));
        }
        out
    }
}

/// Result of a total-variation comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvReport {
    pub distance: f64,
    /// Mass removed by truncation from either law; the true distance lies
    /// within `distance +- slack`.
    pub slack: f64,
}

pub fn tv_distance(a: &DiscreteLaw, b: &DiscreteLaw) -> Result<TvReport> {
    if a.half != b.half {
        return Err(Error::Contract("laws live on different lattices".into()));
    }
    let lo = a.first_atom().min(b.first_atom());
    let hi = a.last_atom().max(b.last_atom());
    let distance = 0.5 * (lo..=hi).map(|x| (a.mass(x) - b.mass(x)).abs()).sum::<f64>();
    Ok(TvReport {
        distance,
        slack: a.slack + b.slack,
    })
}

/// Which invariant law to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LawMode {
    /// Invariant law of the imbalance chain, symmetric about -1/2.
    Minus,
    /// Mirror image of `Minus`, symmetric about 1/2.
    Plus,
    /// Centred half-integer law, `Minus` moved by +1/2.
    Zero,
}

pub const DEFAULT_TAIL_EPS: f64 = 1e-15;
const MAX_TERMS: usize = 1 << 20;

/// Invariant law with weights `q(k) = prod_{j=1..k} w(-j)/w(j)` at the atoms
/// `k` and `-k-1`, truncated once the omitted mass is below `tail_eps`.
pub fn stationary_law(weight: &WeightFunction, mode: LawMode, tail_eps: f64) -> Result<DiscreteLaw> {
    if !(tail_eps > 0.0 && tail_eps <= 1e-6) {
        return Err(Error::config("tail_eps", "must lie in (0, 1e-6]"));
    }
    // q[k] for k = 0..=K; the ratio w(-j)/w(j) is non-increasing in j, so
    // once it drops below 1 the tail beyond K is dominated by a geometric
    // series with ratio r_{K+1}.
    let mut q = vec![1.0f64];
    let mut total = 1.0f64;
    let tail = loop {
        let k = q.len() as i64;
        let r = weight.ratio(k);
        let next = q[q.len() - 1] * r;
        if r < 1.0 {
            let bound = next / (1.0 - r);
            if bound <= 0.5 * tail_eps * total {
                break bound;
            }
        }
        if q.len() >= MAX_TERMS || !next.is_finite() {
            return Err(Error::Numeric("normalizer of the invariant law does not converge".into()));
        }
        q.push(next);
        total += next;
    };
    let kmax = q.len() as i64 - 1;
    // Atoms -kmax-1..=kmax, mass at atom i is q[|2i+1| / 2].
    let masses: Vec<f64> = (-kmax - 1..=kmax)
        .map(|i| q[((2 * i + 1).unsigned_abs() / 2) as usize])
        .collect();
    let slack = tail / total;
    let minus = DiscreteLaw::new(-kmax - 1, false, masses, slack)?;
    Ok(match mode {
        LawMode::Minus => minus,
        LawMode::Plus => minus.shifted(1),
        LawMode::Zero => minus.as_half_integer(),
    })
}

/// Draws one value from `law`.
pub fn sample_law(law: &DiscreteLaw, rng: &mut SimRng) -> f64 {
    law.sample(rng)
}

/// The three invariant laws of a weight, built once and shared.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantLaws {
    pub minus: DiscreteLaw,
    pub plus: DiscreteLaw,
    pub zero: DiscreteLaw,
}

impl InvariantLaws {
    pub fn new(weight: &WeightFunction, tail_eps: f64) -> Result<Self> {
        let minus = stationary_law(weight, LawMode::Minus, tail_eps)?;
        Ok(Self {
            plus: minus.shifted(1),
            zero: minus.as_half_integer(),
            minus,
        })
    }

    /// `E(zeta^2)` under the centred law.
    pub fn r2(&self) -> f64 {
        self.zero.variance()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn laws() -> InvariantLaws {
        InvariantLaws::new(&WeightFunction::default(), DEFAULT_TAIL_EPS).unwrap()
    }

    #[test]
    fn exponential_masses_match_product_formula() {
        let l = laws();
        let z: f64 = 2.0 * (0..10).map(|k| (-(k * (k + 1)) as f64).exp()).sum::<f64>();
        assert!((l.minus.mass(0) - 1.0 / z).abs() < 1e-15);
        assert!((l.minus.mass(-1) - 1.0 / z).abs() < 1e-15);
        assert!((l.minus.mass(1) - (-2f64).exp() / z).abs() < 1e-15);
    }

    #[test]
    fn means_and_symmetry() {
        let l = laws();
        assert!((l.minus.mean() + 0.5).abs() < 1e-12);
        assert!((l.plus.mean() - 0.5).abs() < 1e-12);
        assert!(l.zero.mean().abs() < 1e-12);
        for (a, m) in l.minus.atoms() {
            assert_eq!(m, l.minus.mass(-a - 1));
        }
    }

    #[test]
    fn negation_round_trips() {
        let l = laws();
        assert!(tv_distance(&l.minus.negated(), &l.plus).unwrap().distance < 1e-15);
        assert!(tv_distance(&l.zero.negated(), &l.zero).unwrap().distance < 1e-15);
        assert_eq!(l.zero.negated().first_atom(), l.zero.first_atom());
    }

    #[test]
    fn point_mass_always_sampled() {
        let mut r = rng::stream(1, 0);
        let p = DiscreteLaw::point(3, false);
        assert!((0..100).all(|_| p.sample_atom(&mut r) == 3));
    }

    #[test]
    fn tail_eps_is_range_checked() {
        let w = WeightFunction::default();
        assert!(stationary_law(&w, LawMode::Minus, 0.0).is_err());
        assert!(stationary_law(&w, LawMode::Minus, 1e-3).is_err());
    }

    #[test]
    fn tv_of_disjoint_points_is_one() {
        let a = DiscreteLaw::point(0, false);
        let b = DiscreteLaw::point(1, false);
        assert_eq!(tv_distance(&a, &b).unwrap().distance, 1.0);
        assert_eq!(tv_distance(&a, &a).unwrap().distance, 0.0);
    }
}
