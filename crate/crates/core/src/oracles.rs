//! Exact (non-sampling) laws used as ground truth: Poisson-binomial and
//! binomial pmfs, gap and optimum probabilities, and the law of
//! `| |x1|_1 - |x2|_1 |` for two independent samples.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::fitness::FrequencyVector;

/// Largest dimension for which the O(n^2) exact laws are computed.
pub const DEFAULT_EXACT_LIMIT: usize = 512;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A pmf on the integers `support_offset, support_offset + 1, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    pub support_offset: i64,
    pub probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn point_mass(at: i64) -> Self {
        Self { support_offset: at, probabilities: vec![1.0] }
    }

    pub fn prob(&self, value: i64) -> f64 {
        let idx = value - self.support_offset;
        if idx < 0 {
            return 0.0;
        }
        self.probabilities.get(idx as usize).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probabilities.iter().copied())
    }

    /// `Pr[X >= value]`, summed directly over the tail.
    pub fn prob_ge(&self, value: i64) -> f64 {
        let start = (value - self.support_offset).max(0) as usize;
        compensated_sum(self.probabilities.iter().skip(start).copied())
    }

    /// `Pr[X <= value]`.
    pub fn prob_le(&self, value: i64) -> f64 {
        let end = value - self.support_offset;
        if end < 0 {
            return 0.0;
        }
        compensated_sum(self.probabilities.iter().take(end as usize + 1).copied())
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(
            self.probabilities.iter().enumerate().map(|(j, &p)| p * (j as i64 + self.support_offset) as f64),
        )
    }

    pub fn support_max(&self) -> i64 {
        self.support_offset + self.probabilities.len() as i64 - 1
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")))
    }
}

/// Law of a sum of independent Bernoulli(`p_i`) variables, by iterative
/// convolution.
pub fn poisson_binomial_pmf(p: &[f64]) -> Result<DiscreteDistribution> {
    let mut pmf = Vec::with_capacity(p.len() + 1);
    pmf.push(1.0);
    for &pi in p {
        check_probability(pi)?;
        let q = 1.0 - pi;
        pmf.push(0.0);
        for j in (1..pmf.len()).rev() {
            pmf[j] = pmf[j] * q + pmf[j - 1] * pi;
        }
        pmf[0] *= q;
    }
    Ok(DiscreteDistribution { support_offset: 0, probabilities: pmf })
}

/// `Bin(n, p)` from the closed form.
pub fn binomial_pmf(n: u64, p: f64) -> Result<DiscreteDistribution> {
    check_probability(p)?;
    let probabilities = (0..=n)
        .map(|j| {
            if p == 0.0 {
                return if j == 0 { 1.0 } else { 0.0 };
            }
            if p == 1.0 {
                return if j == n { 1.0 } else { 0.0 };
            }
            (ln_binomial(n, j) + j as f64 * p.ln() + (n - j) as f64 * (-p).ln_1p()).exp()
        })
        .collect();
    Ok(DiscreteDistribution { support_offset: 0, probabilities })
}

/// Law of `d(x) = n - |x|_1` for `x ~ Sample(f)`.
pub fn zeros_distribution(f: &[f64]) -> Result<DiscreteDistribution> {
    let q: Vec<f64> = f.iter().map(|&fi| 1.0 - fi).collect();
    poisson_binomial_pmf(&q)
}

/// `Pr[x in G_{nk}] = sum_{j=1}^{k-1} Pr[d(x) = j]`.
pub fn gap_probability(f: &[f64], k: usize) -> Result<f64> {
    let n = f.len();
    if k == 0 || k > n {
        return Err(Error::InvalidJumpSize { n, k });
    }
    if k == 1 {
        return Ok(0.0);
    }
    let d = zeros_distribution(f)?;
    Ok(compensated_sum((1..k as i64).map(|j| d.prob(j))))
}

pub fn gap_probability_exact(f: &FrequencyVector, k: usize) -> Result<f64> {
    gap_probability(&f.to_f64_vec(), k)
}

/// `Pr[x = (1, ..., 1)] = prod_i f_i`.
pub fn optimum_probability(f: &[f64]) -> f64 {
    f.iter().product()
}

pub fn optimum_probability_exact(f: &FrequencyVector) -> f64 {
    optimum_probability(&f.to_f64_vec())
}

/// `c^{(n - |f|_1)/(1 - c)}`; requires `0 < c < 1` and every `f_i >= c`.
pub fn optimum_probability_bound(f: &[f64], c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidArgument(format!("c={c} must lie in (0, 1)")));
    }
    if let Some((i, &fi)) = f.iter().enumerate().find(|(_, &fi)| fi < c || fi > 1.0) {
        return Err(Error::Precondition(format!("f_{i}={fi} outside [{c}, 1]")));
    }
    let distance = compensated_sum(f.iter().map(|&fi| 1.0 - fi));
    Ok(c.powf(distance / (1.0 - c)))
}

/// Same bound with `D` taken exactly from the grid representation.
pub fn optimum_probability_bound_exact(f: &FrequencyVector, c: f64) -> Result<f64> {
    let values = f.to_f64_vec();
    optimum_probability_bound(&values, c)?;
    Ok(c.powf(f.distance_f64() / (1.0 - c)))
}

/// Law of `| |x1|_1 - |x2|_1 |` for independent `x1, x2 ~ Sample(f)`, by
/// cross-correlating the one-sample pmf with itself.
pub fn abs_diff_distribution(f: &[f64], limit: usize) -> Result<DiscreteDistribution> {
    if f.len() > limit {
        return Err(Error::OracleLimit { n: f.len(), limit });
    }
    let p = poisson_binomial_pmf(f)?.probabilities;
    let probabilities = (0..p.len())
        .map(|d| {
            let s = compensated_sum((0..p.len() - d).map(|j| p[j] * p[j + d]));
            if d == 0 {
                s
            } else {
                2.0 * s
            }
        })
        .collect();
    Ok(DiscreteDistribution { support_offset: 0, probabilities })
}
