use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a weight function. Evaluation goes through the logarithm so that
/// extreme arguments never overflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightKind {
    /// `w(k) = exp(beta * k)`.
    Exponential { beta: f64 },
    /// `w(k) = low` for `k < threshold`, `high` otherwise.
    Step { threshold: i64, low: f64, high: f64 },
    /// Tabulated values on `first..first + values.len()`, extended
    /// geometrically with log-slopes `left_slope` and `right_slope`.
    Table {
        first: i64,
        values: Vec<f64>,
        left_slope: f64,
        right_slope: f64,
    },
}

/// A positive, non-decreasing, non-constant weight on the integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    kind: WeightKind,
}

impl Default for WeightFunction {
    fn default() -> Self {
        Self {
            kind: WeightKind::Exponential { beta: 1.0 },
        }
    }
}

impl WeightFunction {
    pub fn exponential(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::config("weight.beta", "must be a positive finite real"));
        }
        Ok(Self {
            kind: WeightKind::Exponential { beta },
        })
    }

    pub fn step(threshold: i64, low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && low > 0.0) {
            return Err(Error::config("weight.low", "must be positive"));
        }
        if !(high.is_finite() && high > low) {
            return Err(Error::config("weight.high", "must exceed the low value"));
        }
        Ok(Self {
            kind: WeightKind::Step {
                threshold,
                low,
                high,
            },
        })
    }

    pub fn table(first: i64, values: Vec<f64>, left_slope: f64, right_slope: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("weight.table", "needs at least one value"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config("weight.table", "values must be positive"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::config("weight.table", "values must be non-decreasing"));
        }
        for (key, s) in [("weight.left_slope", left_slope), ("weight.right_slope", right_slope)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::config(key, "tail log-slopes must be non-negative"));
            }
        }
        let flat = values.windows(2).all(|w| w[0] == w[1]);
        if flat && left_slope == 0.0 && right_slope == 0.0 {
            return Err(Error::config("weight.table", "weight must not be constant"));
        }
        Ok(Self {
            kind: WeightKind::Table {
                first,
                values,
                left_slope,
                right_slope,
            },
        })
    }

    /// Builds a weight from a family name and its numeric parameters:
    /// `exponential [beta]`, `step [threshold, low, high]`,
    /// `table [first, left_slope, right_slope, v0, v1, ...]`.
    pub fn from_params(kind: &str, params: &[f64]) -> Result<Self> {
        match (kind, params) {
            ("exponential", [beta]) => Self::exponential(*beta),
            ("step", [t, low, high]) => Self::step(integer_param(*t, "weight.threshold")?, *low, *high),
            ("table", [first, ls, rs, values @ ..]) => {
                Self::table(integer_param(*first, "weight.first")?, values.to_vec(), *ls, *rs)
            }
            _ => Err(Error::config(
                "weight",
                format!("unknown family `{kind}` or wrong parameter count {}", params.len()),
            )),
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn ln_w(&self, k: i64) -> f64 {
        match &self.kind {
            WeightKind::Exponential { beta } => beta * k as f64,
            WeightKind::Step {
                threshold,
                low,
                high,
            } => {
                if k < *threshold {
                    low.ln()
                } else {
                    high.ln()
                }
            }
            WeightKind::Table {
                first,
                values,
                left_slope,
                right_slope,
            } => {
                let last = first + values.len() as i64 - 1;
                if k < *first {
                    values[0].ln() - left_slope * (first - k) as f64
                } else if k > last {
                    values[values.len() - 1].ln() + right_slope * (k - last) as f64
                } else {
                    values[(k - first) as usize].ln()
                }
            }
        }
    }

    pub fn eval(&self, k: i64) -> f64 {
        self.ln_w(k).exp()
    }

    /// `w(d) / (w(d) + w(-d))`: the probability that the walk steps right
    /// from a site whose imbalance is `d`.
    pub fn p_right(&self, d: i64) -> f64 {
        if d == 0 {
            return 0.5;
        }
        let gap = self.ln_w(-d) - self.ln_w(d);
        1.0 / (1.0 + gap.exp())
    }

    /// `w(-j) / w(j)`.
    pub fn ratio(&self, j: i64) -> f64 {
        (self.ln_w(-j) - self.ln_w(j)).exp()
    }

    pub fn transition_table(&self) -> TransitionTable {
        TransitionTable::new(self)
    }
}

fn integer_param(x: f64, key: &str) -> Result<i64> {
    if x.fract() != 0.0 || !x.is_finite() {
        return Err(Error::config(key, "must be an integer"));
    }
    Ok(x as i64)
}

/// Precomputed 64-bit acceptance thresholds for the right-step probability.
///
/// A step goes right when a uniform `u64` is below the threshold, which
/// realizes `p_right` to within `2^-64`; the symmetric case is exactly 1/2.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    weight: WeightFunction,
    radius: i64,
    thresholds: Vec<u64>,
}

const TABLE_RADIUS: i64 = 1024;

impl TransitionTable {
    pub fn new(weight: &WeightFunction) -> Self {
        let thresholds = (-TABLE_RADIUS..=TABLE_RADIUS)
            .map(|d| probability_to_threshold(weight.p_right(d)))
            .collect();
        Self {
            weight: weight.clone(),
            radius: TABLE_RADIUS,
            thresholds,
        }
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    #[inline]
    pub fn right_threshold(&self, d: i64) -> u64 {
        if d.abs() <= self.radius {
            self.thresholds[(d + self.radius) as usize]
        } else {
            probability_to_threshold(self.weight.p_right(d))
        }
    }

    /// Threshold for an upward step of the imbalance jump chain at `x`,
    /// whose up-probability is `w(-x) / (w(x) + w(-x))`.
    #[inline]
    pub fn up_threshold(&self, x: i64) -> u64 {
        self.right_threshold(-x)
    }
}

fn probability_to_threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else if p <= 0.0 {
        0
    } else {
        // 2^64 * p, exact for dyadic p such as 1/2.
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_matches_formula() {
        let w = WeightFunction::exponential(1.0).unwrap();
        assert!((w.eval(2) - 1f64.exp().powi(2)).abs() < 1e-12);
        let e = 1f64.exp();
        assert!((w.p_right(1) - e / (e + 1.0 / e)).abs() < 1e-15);
    }

    #[test]
    fn step_weight_sides() {
        let w = WeightFunction::step(0, 1.0, 2.0).unwrap();
        assert_eq!(w.eval(-5), 1.0);
        assert_eq!(w.eval(5), 2.0);
    }

    #[test]
    fn constant_table_rejected() {
        assert!(WeightFunction::table(-2, vec![1.0; 5], 0.0, 0.0).is_err());
        assert!(WeightFunction::table(-2, vec![1.0, 0.5], 0.0, 0.0).is_err());
        assert!(WeightFunction::table(0, vec![1.0, 0.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn symmetric_threshold_is_exactly_half() {
        let t = WeightFunction::default().transition_table();
        assert_eq!(t.right_threshold(0), 1u64 << 63);
    }

    #[test]
    fn table_tails_extend_monotonically() {
        let w = WeightFunction::table(0, vec![1.0, 2.0], 0.5, 0.25).unwrap();
        assert!(w.eval(-3) < w.eval(-1) && w.eval(-1) < w.eval(0));
        assert!(w.eval(5) > w.eval(2) && w.eval(2) > w.eval(1));
    }
}
