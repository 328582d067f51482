//! Summary statistics, goodness-of-fit tests and confidence radii.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::Range("statistic of an empty sample".into()));
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Numeric("sample contains NaN".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Linear-interpolation quantile (type 7) for `q` in `[0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Range(format!("quantile level {q} outside [0, 1]")));
    }
    let v = sorted(xs)?;
    Ok(quantile_sorted(&v, q))
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(xs: &[f64]) -> Result<f64> {
    quantile(xs, 0.5)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous cdf.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let v = sorted(xs)?;
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// `c(alpha) = sqrt(-ln(alpha / 2) / 2)`.
fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Asymptotic one-sample KS critical value at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    ks_coefficient(alpha) / (n as f64).sqrt()
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

/// Pearson chi-square statistic and its upper-tail p-value with
/// `bins - 1 - fitted` degrees of freedom.
pub fn chi_square(observed: &[u64], expected: &[f64], fitted: usize) -> Result<(f64, f64)> {
    if observed.len() != expected.len() || observed.len() < fitted + 2 {
        return Err(Error::Contract("chi-square needs matching bins and positive degrees of freedom".into()));
    }
    if expected.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Range("chi-square expected counts must be positive".into()));
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (*o as f64 - e).powi(2) / e)
        .sum();
    let df = (observed.len() - 1 - fitted) as f64;
    let dist = ChiSquared::new(df).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok((stat, 1.0 - dist.cdf(stat)))
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Contract("regression needs at least two paired points".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric("regressor has zero spread".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Normal-approximation radius `z sqrt(p (1 - p) / n)`.
pub fn binomial_radius(p: f64, n: u64, z: f64) -> f64 {
    z * (p * (1.0 - p) / n as f64).sqrt()
}

/// Largest jump of the empirical cdf: the highest multiplicity of a value,
/// divided by the sample size.
pub fn max_cdf_jump(xs: &[f64]) -> Result<f64> {
    let v = sorted(xs)?;
    let mut best = 1;
    let mut run = 1;
    for w in v.windows(2) {
        if w[0] == w[1] {
            run += 1;
            best = best.max(run);
        } else {
            run = 1;
        }
    }
    Ok(best as f64 / v.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let x = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(median(&x).unwrap(), 2.5);
        assert_eq!(quantile(&x, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&x, 1.0).unwrap(), 4.0);
        assert!(median(&[]).is_err());
    }

    #[test]
    fn ks_of_perfect_grid_is_one_over_n() {
        let x: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        let d = ks_one_sample(&x, |t| t.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.05).abs() < 1e-12);
    }

    #[test]
    fn two_sample_ks_handles_ties() {
        assert_eq!(ks_two_sample(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!((ks_two_sample(&[1.0, 2.0], &[2.0, 3.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn critical_values_match_tables() {
        assert!((ks_coefficient(0.05) - 1.3581).abs() < 1e-3);
        assert!((ks_two_sample_critical(500, 500, 0.05) - 0.0859).abs() < 1e-3);
    }

    #[test]
    fn slope_of_a_line() {
        let x = [1.0, 2.0, 3.0];
        let (s, c) = ols(&x, &[3.0, 5.0, 7.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_of_exact_counts_is_zero() {
        let (s, p) = chi_square(&[10, 20], &[10.0, 20.0], 0).unwrap();
        assert_eq!(s, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_sample_jumps_by_one() {
        assert_eq!(max_cdf_jump(&[2.0; 1000]).unwrap(), 1.0);
        assert_eq!(max_cdf_jump(&[1.0, 2.0, 2.0, 3.0]).unwrap(), 0.5);
    }
}
