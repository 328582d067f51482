//! Piecewise-linear paths on uniform grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real function on `[a, b]` given by its values at `intervals + 1`
/// uniformly spaced nodes and linear interpolation in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    a: f64,
    b: f64,
    values: Vec<f64>,
}

impl GridPath {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Contract(format!("grid interval [{a}, {b}] is empty")));
        }
        if values.len() < 2 {
            return Err(Error::Contract("a grid path needs at least two nodes".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("grid path holds a non-finite value".into()));
        }
        Ok(Self { a, b, values })
    }

    /// Samples `f` at the nodes of a grid with `intervals` cells.
    pub fn from_fn(a: f64, b: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = (b - a) / intervals as f64;
        let values = (0..=intervals).map(|k| f(a + dt * k as f64)).collect();
        Self::new(a, b, values)
    }

    pub fn constant(a: f64, b: f64, intervals: usize, c: f64) -> Result<Self> {
        Self::new(a, b, vec![c; intervals + 1])
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.b
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        (self.b - self.a) / self.intervals() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self, k: usize) -> f64 {
        self.a + self.dt() * k as f64
    }

    /// Index of the node closest to `t`.
    pub fn node_of(&self, t: f64) -> usize {
        let k = ((t - self.a) / self.dt()).round();
        (k.max(0.0) as usize).min(self.intervals())
    }

    /// Linear interpolation at `t`, clamped to the interval.
    pub fn eval(&self, t: f64) -> f64 {
        let x = ((t - self.a) / self.dt()).clamp(0.0, self.intervals() as f64);
        let k = (x.floor() as usize).min(self.intervals() - 1);
        let frac = x - k as f64;
        self.values[k] * (1.0 - frac) + self.values[k + 1] * frac
    }

    pub fn same_grid(&self, other: &GridPath) -> bool {
        self.values.len() == other.values.len()
            && (self.a - other.a).abs() <= 1e-12 * (1.0 + self.a.abs())
            && (self.b - other.b).abs() <= 1e-12 * (1.0 + self.b.abs())
    }

    /// Path reversed in time: the value at `t` becomes the value at `a + b - t`.
    pub fn reversed(&self) -> GridPath {
        let mut values = self.values.clone();
        values.reverse();
        GridPath { a: self.a, b: self.b, values }
    }

    /// Trapezoid integral over the whole interval.
    pub fn integral(&self) -> f64 {
        let v = &self.values;
        let inner: f64 = v[1..v.len() - 1].iter().sum();
        self.dt() * (inner + 0.5 * (v[0] + v[v.len() - 1]))
    }

    /// Writes `t,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (k, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.time(k), v));
        }
        out
    }
}
