//! Interval estimates and goodness-of-fit helpers.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.5758293035489004;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Running mean and variance (Welford), mergeable across blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (`n - 1` denominator).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    /// Normal-approximation interval for the mean.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        let h = z * self.std_error();
        (self.mean - h, self.mean + h)
    }
}

/// Quantile with linear interpolation between order statistics of an
/// ascending slice (`q` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins after pooling, as `(first value, last value)` index ranges.
    pub bins: Vec<(usize, usize)>,
}

/// Pearson goodness of fit of `observed` counts against `probs`. Adjacent
/// categories are pooled left to right until every bin expects at least 5.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareTest {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let mut bins: Vec<(usize, usize, f64, u64)> = Vec::new();
    let mut start = 0;
    let mut exp = 0.0;
    let mut obs = 0;
    for j in 0..observed.len() {
        exp += probs[j] * total as f64;
        obs += observed[j];
        if exp >= 5.0 {
            bins.push((start, j, exp, obs));
            start = j + 1;
            exp = 0.0;
            obs = 0;
        }
    }
    if start < observed.len() {
        match bins.last_mut() {
            Some(last) => {
                last.1 = observed.len() - 1;
                last.2 += exp;
                last.3 += obs;
            }
            None => bins.push((start, observed.len() - 1, exp, obs)),
        }
    }
    if bins.len() < 2 {
        return ChiSquareTest { statistic: 0.0, dof: 0, p_value: 1.0, bins: bins.iter().map(|b| (b.0, b.1)).collect() };
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(_, _, e, o)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64).map(|c| c.sf(statistic)).unwrap_or(f64::NAN);
    ChiSquareTest { statistic, dof, p_value, bins: bins.iter().map(|b| (b.0, b.1)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_values() {
        // 50/100 at z = 1.96: centre 0.5, half-width 0.0961...
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!((lo - 0.40383).abs() < 1e-4 && (hi - 0.59617).abs() < 1e-4);
        let (lo, hi) = wilson_interval(0, 1000, Z99);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
    }

    #[test]
    fn accumulator_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.5).collect();
        let mut all = MeanAccumulator::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = MeanAccumulator::default();
        let mut b = MeanAccumulator::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count(), all.count());
        assert!((a.mean() - all.mean()).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-9);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.5), Some(2.5));
        assert_eq!(quantile_sorted(&v, 0.0), Some(1.0));
        assert_eq!(quantile_sorted(&v, 1.0), Some(4.0));
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(quantile_sorted(&[], 0.5), None);
    }

    #[test]
    fn chi_square_pools_sparse_tail() {
        let probs = [0.5, 0.3, 0.17, 0.02, 0.01];
        let observed = [50, 30, 17, 2, 1];
        let t = chi_square_gof(&observed, &probs);
        // expected counts 50, 30, 17, 2, 1: the last two join the third bin
        assert_eq!(t.bins, vec![(0, 0), (1, 1), (2, 4)]);
        assert_eq!(t.dof, 2);
        assert!(t.statistic.abs() < 1e-12);
        assert!((t.p_value - 1.0).abs() < 1e-12);

        let skewed = chi_square_gof(&[80, 10, 5, 4, 1], &probs);
        assert!(skewed.p_value < 1e-3);
    }
}
