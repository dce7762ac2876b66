//! Bit strings, frequency vectors on the exact grid, product-law sampling and
//! the OneMax / Jump benchmarks.
//!
//! Frequencies are never stored as floats. A [`FrequencyVector`] holds one
//! integer index per position, and the represented frequency is
//! `1/n + index/mu`. Under the well-behaved assumption (`(1 - 2/n) mu` even)
//! the indices run over `[0..n_mu]`, so clamping to `[1/n, 1 - 1/n]` is an
//! integer clamp and long runs accumulate no rounding error.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sampled search point. The number of one-bits is cached at construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
    ones: usize,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::DimensionTooSmall { n: 0, min: 1 });
        }
        let ones = bits.iter().filter(|&&b| b).count();
        Ok(Self { bits, ones })
    }

    pub fn all_ones(n: usize) -> Result<Self> {
        Self::new(vec![true; n])
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![false; n])
    }

    /// Parses a string of `0`/`1` characters, e.g. `"10110"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!("not a bit: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn is_all_ones(&self) -> bool {
        self.ones == self.bits.len()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// `OneMax(x) = |x|_1`.
pub fn onemax(x: &BitString) -> i64 {
    x.ones() as i64
}

/// True iff `n - k < |x|_1 < n`. The all-ones string is never in the gap.
pub fn in_gap(x: &BitString, k: usize) -> bool {
    ones_in_gap(x.ones(), x.len(), k)
}

/// Membership in the gap extended by the optimum.
pub fn in_gap_plus(x: &BitString, k: usize) -> bool {
    x.is_all_ones() || in_gap(x, k)
}

#[inline]
pub(crate) fn ones_in_gap(ones: usize, n: usize, k: usize) -> bool {
    ones < n && ones + k > n
}

#[inline]
fn jump_value(ones: usize, n: usize, k: usize) -> i64 {
    if ones_in_gap(ones, n, k) {
        (n - ones) as i64
    } else {
        (ones + k) as i64
    }
}

/// Benchmark objective. Both variants depend on `x` only through `|x|_1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FitnessFunction {
    OneMax { n: usize },
    Jump { n: usize, k: usize },
}

impl FitnessFunction {
    pub fn onemax(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionTooSmall { n, min: 1 });
        }
        Ok(Self::OneMax { n })
    }

    pub fn jump(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionTooSmall { n, min: 1 });
        }
        if k == 0 || k > n {
            return Err(Error::InvalidJumpSize { n, k });
        }
        Ok(Self::Jump { n, k })
    }

    pub fn n(&self) -> usize {
        match *self {
            Self::OneMax { n } | Self::Jump { n, .. } => n,
        }
    }

    /// Jump size; `None` for OneMax.
    pub fn k(&self) -> Option<usize> {
        match *self {
            Self::OneMax { .. } => None,
            Self::Jump { k, .. } => Some(k),
        }
    }

    /// Value of the all-ones string.
    pub fn optimum_value(&self) -> i64 {
        self.evaluate_ones(self.n())
    }

    pub fn evaluate(&self, x: &BitString) -> Result<i64> {
        if x.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), got: x.len() });
        }
        Ok(self.evaluate_ones(x.ones()))
    }

    #[inline]
    pub fn evaluate_ones(&self, ones: usize) -> i64 {
        match *self {
            Self::OneMax { .. } => ones as i64,
            Self::Jump { n, k } => jump_value(ones, n, k),
        }
    }

    /// Whether a point with `ones` one-bits lies in the gap (always false for
    /// OneMax). Telemetry only; the cGA update never consults it.
    #[inline]
    pub fn ones_in_gap(&self, ones: usize) -> bool {
        match *self {
            Self::OneMax { .. } => false,
            Self::Jump { n, k } => ones_in_gap(ones, n, k),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::OneMax { .. } => "onemax".to_string(),
            Self::Jump { k, .. } => format!("jump{k}"),
        }
    }
}

/// True iff `(1 - 2/n) mu` is an even non-negative integer.
pub fn is_well_behaved(n: usize, mu: u64) -> bool {
    if n < 3 || mu == 0 {
        return false;
    }
    let n = n as u128;
    let scaled = mu as u128 * (n - 2);
    scaled.is_multiple_of(2 * n)
}

/// Smallest `mu >= mu_requested` satisfying the well-behaved frequency
/// assumption for dimension `n`. Multiples of `2n` always qualify, so the
/// scan is bounded by `2n` steps.
pub fn make_well_behaved(n: usize, mu_requested: u64) -> Result<u64> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { n, min: 3 });
    }
    if mu_requested == 0 {
        return Err(Error::InvalidArgument("requested mu must be at least 1".into()));
    }
    let mut mu = mu_requested;
    while !is_well_behaved(n, mu) {
        mu += 1;
    }
    Ok(mu)
}

/// The frequency grid `F_mu = {1/n + i/mu | i in [0..n_mu]}` for one `(n, mu)`,
/// together with the fixed-point sampling thresholds of each grid point.
#[derive(Debug, PartialEq, Eq)]
pub struct FrequencyGrid {
    n: usize,
    mu: u64,
    n_mu: u32,
    /// `thresholds[i] = floor(f_i * 2^64)`; a bit is one iff a uniform `u64`
    /// is below it.
    thresholds: Vec<u64>,
    /// Largest index whose frequency is `< 1/3`, if any.
    below_third_max: Option<u32>,
}

impl FrequencyGrid {
    pub fn new(n: usize, mu: u64) -> Result<Arc<Self>> {
        if n < 3 {
            return Err(Error::DimensionTooSmall { n, min: 3 });
        }
        if !is_well_behaved(n, mu) {
            return Err(Error::NotWellBehaved { n, mu });
        }
        let n_mu = (mu as u128 * (n as u128 - 2) / n as u128) as u32;
        let denom = n as u128 * mu as u128;
        let thresholds = (0..=n_mu)
            .map(|i| {
                let numer = mu as u128 + n as u128 * i as u128;
                ((numer << 64) / denom) as u64
            })
            .collect();
        // 1/n + i/mu < 1/3  <=>  3 mu + 3 n i < n mu
        let below_third_max = (0..=n_mu).take_while(|&i| 3 * mu as u128 + 3 * n as u128 * (i as u128) < denom).last();
        Ok(Arc::new(Self { n, mu, n_mu, thresholds, below_third_max }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> u64 {
        self.mu
    }

    /// Number of grid steps between the two boundaries.
    pub fn n_mu(&self) -> u32 {
        self.n_mu
    }

    /// Index of the frequency `1/2`.
    pub fn half_index(&self) -> u32 {
        self.n_mu / 2
    }

    pub fn frequency(&self, index: u32) -> Ratio<i64> {
        Ratio::new(1, self.n as i64) + Ratio::new(index as i64, self.mu as i64)
    }

    pub fn frequency_f64(&self, index: u32) -> f64 {
        (self.mu as f64 + self.n as f64 * index as f64) / (self.n as f64 * self.mu as f64)
    }

    /// Grid index representing `freq` exactly, if it is a grid point.
    pub fn index_of(&self, freq: Ratio<i64>) -> Option<u32> {
        let steps = (freq - Ratio::new(1, self.n as i64)) * Ratio::from_integer(self.mu as i64);
        if !steps.is_integer() {
            return None;
        }
        let i = steps.to_integer();
        (0..=self.n_mu as i64).contains(&i).then_some(i as u32)
    }

    /// Nearest grid index to a real frequency.
    pub fn nearest_index(&self, freq: f64) -> u32 {
        let steps = (freq - 1.0 / self.n as f64) * self.mu as f64;
        steps.round().clamp(0.0, self.n_mu as f64) as u32
    }

    #[inline]
    pub fn is_below_one_third(&self, index: u32) -> bool {
        self.below_third_max.is_some_and(|m| index <= m)
    }

    #[inline]
    pub(crate) fn threshold(&self, index: u32) -> u64 {
        self.thresholds[index as usize]
    }
}

/// The cGA's probabilistic model: `n` frequencies on the grid of one
/// well-behaved `(n, mu)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyVector {
    grid: Arc<FrequencyGrid>,
    indices: Vec<u32>,
}

impl FrequencyVector {
    pub fn from_indices(grid: Arc<FrequencyGrid>, indices: Vec<u32>) -> Result<Self> {
        if indices.len() != grid.n {
            return Err(Error::LengthMismatch { expected: grid.n, got: indices.len() });
        }
        if let Some((position, &index)) = indices.iter().enumerate().find(|(_, &i)| i > grid.n_mu) {
            return Err(Error::IndexOutOfGrid { position, index, max: grid.n_mu });
        }
        Ok(Self { grid, indices })
    }

    pub fn constant(grid: Arc<FrequencyGrid>, index: u32) -> Result<Self> {
        let n = grid.n;
        Self::from_indices(grid, vec![index; n])
    }

    /// All frequencies `1/2`, the cGA's initial model.
    pub fn uniform(grid: Arc<FrequencyGrid>) -> Self {
        let half = grid.half_index();
        let n = grid.n;
        Self { grid, indices: vec![half; n] }
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn mu(&self) -> u64 {
        self.grid.mu
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn index(&self, i: usize) -> u32 {
        self.indices[i]
    }

    pub fn set_index(&mut self, i: usize, index: u32) -> Result<()> {
        if index > self.grid.n_mu {
            return Err(Error::IndexOutOfGrid { position: i, index, max: self.grid.n_mu });
        }
        self.indices[i] = index;
        Ok(())
    }

    pub(crate) fn indices_mut(&mut self) -> &mut [u32] {
        &mut self.indices
    }

    pub fn frequency(&self, i: usize) -> Ratio<i64> {
        self.grid.frequency(self.indices[i])
    }

    pub fn frequency_f64(&self, i: usize) -> f64 {
        self.grid.frequency_f64(self.indices[i])
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.indices.iter().map(|&i| self.grid.frequency_f64(i)).collect()
    }

    pub fn index_sum(&self) -> i64 {
        self.indices.iter().map(|&i| i as i64).sum()
    }

    /// `mu * D` where `D = n - |f|_1`; always an integer on the grid.
    pub fn scaled_distance(&self) -> i64 {
        let n = self.grid.n as i64;
        (n - 1) * self.grid.mu as i64 - self.index_sum()
    }

    /// `D = n - |f|_1 = sum_i (1 - f_i)`, exact.
    pub fn distance(&self) -> Ratio<i64> {
        Ratio::new(self.scaled_distance(), self.grid.mu as i64)
    }

    pub fn distance_f64(&self) -> f64 {
        self.scaled_distance() as f64 / self.grid.mu as f64
    }

    pub fn min_frequency_f64(&self) -> f64 {
        let min = self.indices.iter().copied().min().unwrap_or(0);
        self.grid.frequency_f64(min)
    }

    pub fn min_frequency(&self) -> Ratio<i64> {
        let min = self.indices.iter().copied().min().unwrap_or(0);
        self.grid.frequency(min)
    }

    /// Draws `X ~ Sample(f)`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> BitString {
        let mut bits = vec![false; self.n()];
        let ones = self.sample_into(rng, &mut bits);
        BitString { bits, ones }
    }

    /// Fills `out` with one sample and returns its number of one-bits.
    #[inline]
    pub fn sample_into<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [bool]) -> usize {
        debug_assert_eq!(out.len(), self.indices.len());
        let mut ones = 0;
        for (slot, &idx) in out.iter_mut().zip(&self.indices) {
            let bit = rng.next_u64() < self.grid.threshold(idx);
            *slot = bit;
            ones += bit as usize;
        }
        ones
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn bits(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    #[test]
    fn onemax_examples() {
        assert_eq!(onemax(&bits("0000")), 0);
        assert_eq!(onemax(&bits("10110")), 3);
        assert_eq!(onemax(&BitString::all_ones(17).unwrap()), 17);
    }

    fn with_ones(n: usize, ones: usize) -> BitString {
        BitString::new((0..n).map(|i| i < ones).collect()).unwrap()
    }

    #[test]
    fn jump_examples() {
        let f = FitnessFunction::jump(10, 3).unwrap();
        assert_eq!(f.evaluate(&with_ones(10, 10)).unwrap(), 13);
        assert_eq!(f.evaluate(&with_ones(10, 7)).unwrap(), 10);
        assert_eq!(f.evaluate(&with_ones(10, 9)).unwrap(), 1);
        assert_eq!(f.evaluate(&with_ones(10, 8)).unwrap(), 2);
        assert_eq!(f.optimum_value(), 13);
    }

    #[test]
    fn jump_with_k1_is_shifted_onemax() {
        let f = FitnessFunction::jump(6, 1).unwrap();
        for ones in 0..=6 {
            let x = with_ones(6, ones);
            assert_eq!(f.evaluate(&x).unwrap(), onemax(&x) + 1);
            assert!(!in_gap(&x, 1));
        }
    }

    #[test]
    fn gap_membership() {
        assert!(in_gap(&with_ones(10, 9), 3));
        assert!(in_gap(&with_ones(10, 8), 3));
        assert!(!in_gap(&with_ones(10, 7), 3));
        assert!(!in_gap(&with_ones(10, 10), 3));
        assert!(in_gap_plus(&with_ones(10, 10), 3));
        assert!(!in_gap_plus(&with_ones(10, 7), 3));
    }

    #[test]
    fn invalid_jump_size_rejected() {
        assert_eq!(FitnessFunction::jump(10, 0), Err(Error::InvalidJumpSize { n: 10, k: 0 }));
        assert_eq!(FitnessFunction::jump(10, 11), Err(Error::InvalidJumpSize { n: 10, k: 11 }));
        assert!(FitnessFunction::jump(10, 10).is_ok());
    }

    #[test]
    fn length_mismatch_rejected() {
        let f = FitnessFunction::onemax(4).unwrap();
        assert!(matches!(f.evaluate(&bits("101")), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn well_behaved_examples() {
        assert_eq!(make_well_behaved(4, 5).unwrap(), 8);
        assert_eq!(make_well_behaved(10, 3).unwrap(), 5);
        assert_eq!(make_well_behaved(4, 4).unwrap(), 4);
        assert!(make_well_behaved(2, 4).is_err());
        assert!(make_well_behaved(4, 0).is_err());
    }

    #[test]
    fn well_behaved_scan_matches_definition() {
        // independent check: (n-2) mu / n must be an even integer
        for n in 3..40usize {
            for req in 1..100u64 {
                let mu = make_well_behaved(n, req).unwrap();
                assert!(mu >= req && mu <= req + 2 * n as u64);
                let num = (n as u64 - 2) * mu;
                assert_eq!(num % n as u64, 0);
                assert_eq!((num / n as u64) % 2, 0);
                for smaller in req..mu {
                    let num = (n as u64 - 2) * smaller;
                    assert!(!num.is_multiple_of(n as u64) || (num / n as u64) % 2 == 1);
                }
            }
        }
    }

    #[test]
    fn grid_shape() {
        let g = FrequencyGrid::new(4, 4).unwrap();
        assert_eq!(g.n_mu(), 2);
        assert_eq!(g.frequency(0), Ratio::new(1, 4));
        assert_eq!(g.frequency(1), Ratio::new(1, 2));
        assert_eq!(g.frequency(2), Ratio::new(3, 4));
        assert_eq!(g.half_index(), 1);
        assert!(g.is_below_one_third(0));
        assert!(!g.is_below_one_third(1));
        assert!(FrequencyGrid::new(4, 5).is_err());
        assert!(FrequencyGrid::new(2, 4).is_err());
    }

    #[test]
    fn below_third_boundary_is_exact() {
        // n=3, mu=6: frequencies 1/3, 1/2, 2/3; 1/3 is not below 1/3
        let g = FrequencyGrid::new(3, 6).unwrap();
        assert_eq!(g.frequency(0), Ratio::new(1, 3));
        assert!(!g.is_below_one_third(0));
    }

    #[test]
    fn distance_examples() {
        let g = FrequencyGrid::new(4, 4).unwrap();
        let f = FrequencyVector::from_indices(g.clone(), vec![1, 2, 1, 1]).unwrap();
        assert_eq!(f.frequency(1), Ratio::new(3, 4));
        assert_eq!(f.distance(), Ratio::new(7, 4));

        let top = FrequencyVector::constant(g.clone(), g.n_mu()).unwrap();
        assert_eq!(top.distance(), Ratio::from_integer(1));

        let g = FrequencyGrid::new(10, 10).unwrap();
        assert_eq!(FrequencyVector::uniform(g).distance(), Ratio::from_integer(5));
    }

    #[test]
    fn index_lookup() {
        let g = FrequencyGrid::new(10, 10).unwrap();
        assert_eq!(g.index_of(Ratio::new(4, 5)), Some(7));
        assert_eq!(g.index_of(Ratio::new(1, 2)), Some(4));
        assert_eq!(g.index_of(Ratio::new(1, 3)), None);
        assert_eq!(g.index_of(Ratio::new(1, 1)), None);
        assert_eq!(g.nearest_index(0.8), 7);
    }

    #[test]
    fn out_of_grid_rejected() {
        let g = FrequencyGrid::new(4, 4).unwrap();
        assert!(FrequencyVector::from_indices(g.clone(), vec![0, 3, 0, 0]).is_err());
        assert!(FrequencyVector::from_indices(g, vec![0, 0, 0]).is_err());
    }

    #[test]
    fn thresholds_track_frequencies() {
        let g = FrequencyGrid::new(64, 320).unwrap();
        for i in 0..=g.n_mu() {
            let t = g.threshold(i) as f64 / 2f64.powi(64);
            assert!((t - g.frequency_f64(i)).abs() < 1e-15);
        }
    }

    #[test]
    fn top_frequency_sampling() {
        // every bit one with probability 1 - 1/n
        let g = FrequencyGrid::new(10, 10).unwrap();
        let f = FrequencyVector::constant(g.clone(), g.n_mu()).unwrap();
        let mut rng = rng_from_seed(3);
        let trials = 200_000;
        let ones: usize = (0..trials).map(|_| f.sample(&mut rng).ones()).sum();
        let rate = ones as f64 / (trials * 10) as f64;
        let se = (0.9f64 * 0.1 / (trials * 10) as f64).sqrt();
        assert!((rate - 0.9).abs() < 4.0 * se, "rate {rate}");
    }

    #[test]
    fn fair_product_law_on_small_grid() {
        // n=3, mu=6: n_mu = 2, index 1 is 1/2; each of the 8 strings has mass 1/8
        let g = FrequencyGrid::new(3, 6).unwrap();
        let f = FrequencyVector::uniform(g);
        let mut rng = rng_from_seed(11);
        let mut counts = [0usize; 8];
        let trials = 160_000;
        for _ in 0..trials {
            let x = f.sample(&mut rng);
            let code = x.bits().iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
            counts[code] += 1;
        }
        let se = (0.125f64 * 0.875 / trials as f64).sqrt();
        for c in counts {
            assert!((c as f64 / trials as f64 - 0.125).abs() < 4.0 * se);
        }
    }

    #[test]
    fn marginals_within_four_standard_errors() {
        let g = FrequencyGrid::new(8, 8).unwrap();
        let f = FrequencyVector::from_indices(g, vec![0, 1, 2, 3, 4, 5, 6, 3]).unwrap();
        let mut rng = rng_from_seed(5);
        let trials = 1_000_000;
        let mut counts = [0usize; 8];
        let mut buf = vec![false; 8];
        for _ in 0..trials {
            f.sample_into(&mut rng, &mut buf);
            for (c, &b) in counts.iter_mut().zip(&buf) {
                *c += b as usize;
            }
        }
        for (i, &c) in counts.iter().enumerate() {
            let p = f.frequency_f64(i);
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((c as f64 / trials as f64 - p).abs() < 4.0 * se, "position {i}");
        }
    }

    proptest! {
        #[test]
        fn jump_matches_onemax_outside_gap(n in 1usize..40, k_raw in 1usize..40, ones_raw in 0usize..40) {
            let k = 1 + (k_raw - 1) % n;
            let ones = ones_raw % (n + 1);
            let f = FitnessFunction::jump(n, k).unwrap();
            let x = with_ones(n, ones);
            if !in_gap(&x, k) {
                prop_assert_eq!(f.evaluate(&x).unwrap(), onemax(&x) + k as i64);
            }
            // unique strict maximizer
            if ones < n {
                prop_assert!(f.evaluate(&x).unwrap() < f.optimum_value());
            }
        }

        #[test]
        fn sampling_is_deterministic(seed in any::<u64>(), idx in 0u32..=4) {
            let g = FrequencyGrid::new(6, 6).unwrap();
            let f = FrequencyVector::constant(g, idx).unwrap();
            let a = f.sample(&mut rng_from_seed(seed));
            let b = f.sample(&mut rng_from_seed(seed));
            prop_assert_eq!(a, b);
        }
    }
}
