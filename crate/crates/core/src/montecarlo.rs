//! Monte-Carlo estimate of the expected bound: the sample mean of the
//! category bound over seeded uniform demands.

use std::collections::BTreeMap;

use crate::bound::{CategoryBounder, EnvelopeOrder, NetworkConfig};
use crate::combinatorics::Rational;
use crate::demand::sample_demands;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonteCarloEstimate {
    pub samples: u64,
    /// Exact sample mean.
    pub mean: Rational,
    /// Exact unbiased sample variance (zero for a single sample).
    pub variance: Rational,
    /// Number of sampled demands per distinct count.
    pub histogram: BTreeMap<u32, u64>,
}

impl MonteCarloEstimate {
    pub fn standard_error(&self) -> f64 {
        (self.variance.to_f64() / self.samples as f64).sqrt()
    }

    /// Whether `|mean - exact| <= k * standard error`, decided exactly.
    pub fn within_standard_errors(&self, exact: &Rational, k: u32) -> bool {
        let diff = &self.mean - exact;
        let lhs = &diff * &diff;
        let rhs = Rational::from(k * k) * &self.variance / Rational::integer(self.samples as i64);
        lhs <= rhs
    }
}

/// Estimates the expected bound from `samples` demands drawn with `seed`.
pub fn monte_carlo_expected(
    config: &NetworkConfig,
    samples: u64,
    seed: u64,
    order: EnvelopeOrder,
) -> Result<MonteCarloEstimate> {
    if samples == 0 || samples > i64::MAX as u64 {
        return Err(Error::InvalidConfig("sample count must be positive".into()));
    }
    let mut sampler = sample_demands(config.files(), config.receivers(), samples, seed)?;
    let mut histogram: BTreeMap<u32, u64> = BTreeMap::new();
    let mut scratch = Vec::with_capacity(config.receivers() as usize);
    while let Some(s) = sampler.next_distinct_count(&mut scratch) {
        *histogram.entry(s).or_default() += 1;
    }
    let t = config.t();
    let mut sum = Rational::zero();
    let mut sum_sq = Rational::zero();
    for (&s, &count) in &histogram {
        let value = CategoryBounder::new(config.transmitters(), s)?.evaluate(&t, order)?;
        let count = Rational::integer(count as i64);
        sum_sq = sum_sq + &count * &value * &value;
        sum = sum + count * value;
    }
    let n = Rational::integer(samples as i64);
    let mean = &sum / &n;
    let variance = if samples > 1 {
        (sum_sq - &mean * &sum) / Rational::integer(samples as i64 - 1)
    } else {
        Rational::zero()
    };
    Ok(MonteCarloEstimate { samples, mean, variance, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::{expected_ndt_lower_bound, per_category_bound};

    #[test]
    fn single_file_estimate_is_exact() {
        let c = NetworkConfig::new(3, 4, 1, Rational::new(1, 2)).unwrap();
        let est = monte_carlo_expected(&c, 100, 9, EnvelopeOrder::Theorem).unwrap();
        assert_eq!(est.mean, Rational::one());
        assert_eq!(est.variance, Rational::zero());
        assert!(est.within_standard_errors(&expected_ndt_lower_bound(&c).unwrap(), 3));
    }

    #[test]
    fn mean_matches_direct_average() {
        let c = NetworkConfig::new(3, 5, 4, Rational::new(1, 2)).unwrap();
        let est = monte_carlo_expected(&c, 500, 11, EnvelopeOrder::Theorem).unwrap();
        let direct: Rational = sample_demands(4, 5, 500, 11)
            .unwrap()
            .map(|d| per_category_bound(3, d.distinct_count(), &c.t()).unwrap())
            .sum::<Rational>()
            / Rational::integer(500);
        assert_eq!(est.mean, direct);
        assert_eq!(est.histogram.values().sum::<u64>(), 500);
    }

    #[test]
    fn deterministic_for_seed() {
        let c = NetworkConfig::new(5, 20, 100, Rational::new(2, 5)).unwrap();
        let a = monte_carlo_expected(&c, 1000, 42, EnvelopeOrder::Theorem).unwrap();
        let b = monte_carlo_expected(&c, 1000, 42, EnvelopeOrder::Theorem).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_zero_samples() {
        let c = NetworkConfig::new(2, 2, 2, Rational::one()).unwrap();
        assert!(monte_carlo_expected(&c, 0, 0, EnvelopeOrder::Theorem).is_err());
    }
}
