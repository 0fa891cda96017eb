//! Peak and expected NDT lower bounds.
//!
//! For a demand with `s` distinct files and a cut of size `sigma`, the bound
//! at integer replication `t` is
//!
//! ```text
//!     ( t C(K_T, t) + (s - sigma) C(sigma - 1, t - 1) ) / ( t C(K_T, t) )
//! ```
//!
//! Each `sigma` curve is extended to fractional `t` by its lower convex
//! envelope over `t = 1..K_T`, then the maximum over
//! `1 <= sigma <= min(K_T, s)` is taken. The expected bound averages this
//! category bound over the distribution of the number of distinct requests.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binom, binom_signed, Rational};
use crate::demand::{distinct_distribution, DistinctCountDistribution};
use crate::envelope::ConvexEnvelope;
use crate::error::{Error, Result};

/// One network instance: `K_T` transmitters, `K_R` receivers, `N` files and
/// normalized cache size `mu`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkConfig {
    transmitters: u32,
    receivers: u32,
    files: u32,
    mu: Rational,
}

impl NetworkConfig {
    /// Validates `1/K_T <= mu <= 1` and positive counts. Out-of-range cache
    /// sizes are rejected, never clamped.
    pub fn new(transmitters: u32, receivers: u32, files: u32, mu: Rational) -> Result<Self> {
        check_counts(transmitters, receivers, files)?;
        check_mu(transmitters, &mu)?;
        Ok(NetworkConfig { transmitters, receivers, files, mu })
    }

    pub fn transmitters(&self) -> u32 {
        self.transmitters
    }

    pub fn receivers(&self) -> u32 {
        self.receivers
    }

    pub fn files(&self) -> u32 {
        self.files
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    /// Cache replication parameter `t = K_T * mu`, in `[1, K_T]`.
    pub fn t(&self) -> Rational {
        Rational::from(self.transmitters) * &self.mu
    }

    pub fn with_mu(&self, mu: Rational) -> Result<Self> {
        NetworkConfig::new(self.transmitters, self.receivers, self.files, mu)
    }
}

fn check_counts(transmitters: u32, receivers: u32, files: u32) -> Result<()> {
    if transmitters == 0 || receivers == 0 || files == 0 {
        return Err(Error::InvalidConfig(format!(
            "K_T, K_R and N must be positive (got {transmitters}, {receivers}, {files})"
        )));
    }
    Ok(())
}

fn check_mu(transmitters: u32, mu: &Rational) -> Result<()> {
    let lo = Rational::new(1, transmitters.into());
    if *mu < lo || *mu > 1 {
        return Err(Error::InvalidConfig(format!(
            "normalized cache size {mu} outside [1/{transmitters}, 1]"
        )));
    }
    Ok(())
}

/// How fractional `t` is handled when combining the cut sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeOrder {
    /// Convex envelope in `t` for each `sigma`, then the maximum over `sigma`.
    /// This is the canonical bound.
    #[default]
    Theorem,
    /// Maximum over `sigma` at integer `t`, then one convex envelope.
    Proof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Peak,
    Expected,
}

/// The raw bound for category `s`, cut size `sigma` and integer `t`.
pub fn bound_expression(transmitters: u32, s: u32, sigma: u32, t: u32) -> Result<Rational> {
    if sigma == 0 || sigma > transmitters.min(s) {
        return Err(Error::Domain(format!(
            "sigma = {sigma} outside [1, min(K_T = {transmitters}, s = {s})]"
        )));
    }
    if t == 0 || t > transmitters {
        return Err(Error::Domain(format!("t = {t} outside [1, {transmitters}]")));
    }
    let base = binom(transmitters.into(), t.into()) * t;
    let excess = binom_signed(i64::from(sigma) - 1, i64::from(t) - 1) * (s - sigma);
    Ok(Rational::from_biguints(&base + excess, base))
}

/// Lower convex envelope over `t = 1..K_T` of `bound_expression` at fixed `sigma`.
pub fn envelope_for_sigma(transmitters: u32, s: u32, sigma: u32) -> Result<ConvexEnvelope> {
    let points = (1..=transmitters)
        .map(|t| Ok((i64::from(t), bound_expression(transmitters, s, sigma, t)?)))
        .collect::<Result<Vec<_>>>()?;
    ConvexEnvelope::new(points)
}

/// A category bound together with the cut size attaining it and the envelope
/// segment `(t1, t2)` that `t` falls in (`t1 == t2` at a vertex).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryBound {
    pub value: Rational,
    pub sigma: u32,
    pub segment: (u32, u32),
}

/// Envelopes for one `(K_T, s)` pair, built once and evaluated at many `t`.
#[derive(Debug, Clone)]
pub struct CategoryBounder {
    transmitters: u32,
    s: u32,
    per_sigma: Vec<ConvexEnvelope>,
    of_max: ConvexEnvelope,
}

impl CategoryBounder {
    pub fn new(transmitters: u32, s: u32) -> Result<Self> {
        if transmitters == 0 || s == 0 {
            return Err(Error::Domain("K_T and s must be positive".into()));
        }
        let per_sigma = (1..=transmitters.min(s))
            .map(|sigma| envelope_for_sigma(transmitters, s, sigma))
            .collect::<Result<Vec<_>>>()?;
        let max_points = (1..=transmitters as usize)
            .map(|t| {
                let best = per_sigma
                    .iter()
                    .map(|env| &env.points()[t - 1].1)
                    .max()
                    .expect("at least one sigma")
                    .clone();
                (t as i64, best)
            })
            .collect();
        let of_max = ConvexEnvelope::new(max_points)?;
        Ok(CategoryBounder { transmitters, s, per_sigma, of_max })
    }

    pub fn transmitters(&self) -> u32 {
        self.transmitters
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn evaluate(&self, t: &Rational, order: EnvelopeOrder) -> Result<Rational> {
        Ok(self.detail(t, order)?.value)
    }

    /// Value, maximizing `sigma` (smallest on ties) and active segment.
    ///
    /// Under `EnvelopeOrder::Proof` the reported `sigma` is the maximizer of
    /// the raw bound at the left vertex of the active segment.
    pub fn detail(&self, t: &Rational, order: EnvelopeOrder) -> Result<CategoryBound> {
        if *t < 1 || *t > i64::from(self.transmitters) {
            return Err(Error::Domain(format!("t = {t} outside [1, {}]", self.transmitters)));
        }
        match order {
            EnvelopeOrder::Theorem => {
                let mut best: Option<(usize, Rational)> = None;
                for (i, env) in self.per_sigma.iter().enumerate() {
                    let v = env.evaluate(t)?;
                    if best.as_ref().map_or(true, |(_, b)| v > *b) {
                        best = Some((i, v));
                    }
                }
                let (i, value) = best.expect("at least one sigma");
                let (t1, t2) = self.per_sigma[i].segment(t)?;
                Ok(CategoryBound { value, sigma: i as u32 + 1, segment: (t1 as u32, t2 as u32) })
            }
            EnvelopeOrder::Proof => {
                let value = self.of_max.evaluate(t)?;
                let (t1, t2) = self.of_max.segment(t)?;
                let sigma = self
                    .per_sigma
                    .iter()
                    .enumerate()
                    .fold((0usize, None::<&Rational>), |acc, (i, env)| {
                        let v = &env.points()[t1 as usize - 1].1;
                        match acc.1 {
                            Some(b) if b >= v => acc,
                            _ => (i, Some(v)),
                        }
                    })
                    .0;
                Ok(CategoryBound { value, sigma: sigma as u32 + 1, segment: (t1 as u32, t2 as u32) })
            }
        }
    }
}

/// Bound for a demand with `s` distinct files at replication `t in [1, K_T]`.
pub fn per_category_bound(transmitters: u32, s: u32, t: &Rational) -> Result<Rational> {
    CategoryBounder::new(transmitters, s)?.evaluate(t, EnvelopeOrder::Theorem)
}

pub fn per_category_bound_with_order(
    transmitters: u32,
    s: u32,
    t: &Rational,
    order: EnvelopeOrder,
) -> Result<CategoryBound> {
    CategoryBounder::new(transmitters, s)?.detail(t, order)
}

fn check_peak_library(config: &NetworkConfig) -> Result<()> {
    if config.files < config.receivers {
        return Err(Error::InfeasibleLibrary { files: config.files, receivers: config.receivers });
    }
    Ok(())
}

/// Lower bound on the peak NDT, where every receiver requests a distinct file.
pub fn peak_ndt_lower_bound(config: &NetworkConfig) -> Result<Rational> {
    Ok(peak_detail(config, EnvelopeOrder::Theorem)?.value)
}

pub fn peak_detail(config: &NetworkConfig, order: EnvelopeOrder) -> Result<CategoryBound> {
    check_peak_library(config)?;
    per_category_bound_with_order(config.transmitters, config.receivers, &config.t(), order)
}

/// Lower bound on the expected NDT under uniform popularity.
pub fn expected_ndt_lower_bound(config: &NetworkConfig) -> Result<Rational> {
    expected_ndt_lower_bound_with_order(config, EnvelopeOrder::Theorem)
}

pub fn expected_ndt_lower_bound_with_order(config: &NetworkConfig, order: EnvelopeOrder) -> Result<Rational> {
    let dist = distinct_distribution(config.files, config.receivers)?;
    expected_with_distribution(config.transmitters, &config.t(), &dist, order)
}

/// Averages the category bound at `t` over an arbitrary pmf of `S(d)`.
pub fn expected_with_distribution(
    transmitters: u32,
    t: &Rational,
    dist: &DistinctCountDistribution,
    order: EnvelopeOrder,
) -> Result<Rational> {
    dist.iter()
        .map(|(s, p)| Ok(p * CategoryBounder::new(transmitters, s)?.evaluate(t, order)?))
        .sum()
}

/// Per-category breakdown of the expected bound.
#[derive(Debug, Clone)]
pub struct ExpectedBreakdown {
    pub categories: Vec<(u32, Rational, CategoryBound)>,
    pub value: Rational,
}

pub fn expected_breakdown(config: &NetworkConfig, order: EnvelopeOrder) -> Result<ExpectedBreakdown> {
    let dist = distinct_distribution(config.files, config.receivers)?;
    let t = config.t();
    let mut categories = Vec::new();
    let mut value = Rational::zero();
    for (s, p) in dist.iter() {
        let detail = CategoryBounder::new(config.transmitters, s)?.detail(&t, order)?;
        value = value + p * &detail.value;
        categories.push((s, p.clone(), detail));
    }
    Ok(ExpectedBreakdown { categories, value })
}

/// Sampled bound curve over a grid of cache sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub transmitters: u32,
    pub receivers: u32,
    pub files: u32,
    pub samples: Vec<(Rational, Rational)>,
}

impl BoundCurve {
    pub fn values(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.samples.iter().map(|(_, v)| v)
    }

    pub fn is_non_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].1 <= w[0].1)
    }

    /// Slopes between consecutive samples are non-decreasing.
    pub fn is_convex(&self) -> bool {
        let slopes: Vec<Rational> = self
            .samples
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
            .collect();
        slopes.windows(2).all(|w| w[0] <= w[1])
    }
}

/// `count` evenly spaced exact values from `start` to `stop`, endpoints included.
pub fn linear_grid(start: &Rational, stop: &Rational, count: usize) -> Result<Vec<Rational>> {
    if count == 0 {
        return Err(Error::InvalidConfig("grid needs at least one point".into()));
    }
    if count == 1 {
        if start != stop {
            return Err(Error::InvalidConfig("a one-point grid needs start == stop".into()));
        }
        return Ok(vec![start.clone()]);
    }
    if start >= stop {
        return Err(Error::InvalidConfig(format!("grid start {start} must be below stop {stop}")));
    }
    let step = (stop - start) / Rational::integer(count as i64 - 1);
    Ok((0..count)
        .map(|i| start + &step * Rational::integer(i as i64))
        .collect())
}

/// Checks that a grid is strictly increasing and inside `[1/K_T, 1]`.
pub fn validate_grid(transmitters: u32, grid: &[Rational]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty cache-size grid".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("cache-size grid must be strictly increasing".into()));
    }
    for mu in grid {
        check_mu(transmitters, mu)?;
    }
    Ok(())
}

/// Evaluates the peak or expected bound at every grid point. Points are
/// computed in parallel; the output keeps grid order.
pub fn sweep(
    transmitters: u32,
    receivers: u32,
    files: u32,
    grid: &[Rational],
    kind: BoundKind,
    order: EnvelopeOrder,
) -> Result<BoundCurve> {
    check_counts(transmitters, receivers, files)?;
    validate_grid(transmitters, grid)?;
    let dist = match kind {
        BoundKind::Peak => {
            if files < receivers {
                return Err(Error::InfeasibleLibrary { files, receivers });
            }
            DistinctCountDistribution::point_mass(receivers)?
        }
        BoundKind::Expected => distinct_distribution(files, receivers)?,
    };
    let bounders = dist
        .iter()
        .map(|(s, p)| Ok((p.clone(), CategoryBounder::new(transmitters, s)?)))
        .collect::<Result<Vec<_>>>()?;
    let kt = Rational::from(transmitters);
    let values = grid
        .par_iter()
        .map(|mu| {
            let t = &kt * mu;
            bounders
                .iter()
                .map(|(p, b)| Ok(p * b.evaluate(&t, order)?))
                .sum::<Result<Rational>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve {
        kind,
        transmitters,
        receivers,
        files,
        samples: grid.iter().cloned().zip(values).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn cfg(kt: u32, kr: u32, n: u32, mu: Rational) -> NetworkConfig {
        NetworkConfig::new(kt, kr, n, mu).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(NetworkConfig::new(3, 3, 3, r(1, 4)).is_err());
        assert!(NetworkConfig::new(3, 3, 3, r(5, 4)).is_err());
        assert!(NetworkConfig::new(0, 3, 3, r(1, 1)).is_err());
        assert!(NetworkConfig::new(3, 0, 3, r(1, 1)).is_err());
        assert!(NetworkConfig::new(3, 3, 0, r(1, 1)).is_err());
        let c = cfg(5, 20, 100, r(2, 5));
        assert_eq!(c.t(), Rational::integer(2));
    }

    #[test]
    fn bound_expression_examples() {
        assert_eq!(bound_expression(3, 3, 1, 1).unwrap(), r(5, 3));
        assert_eq!(bound_expression(3, 3, 2, 2).unwrap(), r(7, 6));
        assert_eq!(bound_expression(3, 3, 3, 3).unwrap(), r(1, 1));
    }

    #[test]
    fn bound_expression_domain_errors() {
        assert!(matches!(bound_expression(3, 2, 3, 1), Err(Error::Domain(_))));
        assert!(matches!(bound_expression(3, 5, 4, 1), Err(Error::Domain(_))));
        assert!(matches!(bound_expression(3, 3, 0, 1), Err(Error::Domain(_))));
        assert!(matches!(bound_expression(3, 3, 1, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn envelope_examples() {
        let env = envelope_for_sigma(3, 3, 1).unwrap();
        let vals: Vec<_> = (1..=3).map(|t| env.evaluate(&Rational::integer(t)).unwrap()).collect();
        assert_eq!(vals, vec![r(5, 3), r(1, 1), r(1, 1)]);

        let env = envelope_for_sigma(3, 3, 2).unwrap();
        let vals: Vec<_> = (1..=3).map(|t| env.evaluate(&Rational::integer(t)).unwrap()).collect();
        assert_eq!(vals, vec![r(4, 3), r(7, 6), r(1, 1)]);

        let env = envelope_for_sigma(2, 1, 1).unwrap();
        for q in 4..=8 {
            assert_eq!(env.evaluate(&r(q, 4)).unwrap(), r(1, 1));
        }
    }

    #[test]
    fn per_category_examples() {
        assert_eq!(per_category_bound(3, 3, &r(1, 1)).unwrap(), r(5, 3));
        assert_eq!(per_category_bound(3, 3, &r(2, 1)).unwrap(), r(7, 6));
        assert_eq!(per_category_bound(3, 3, &r(3, 1)).unwrap(), r(1, 1));
        let d = per_category_bound_with_order(3, 3, &r(1, 1), EnvelopeOrder::Theorem).unwrap();
        assert_eq!(d.sigma, 1);
        let d = per_category_bound_with_order(3, 3, &r(2, 1), EnvelopeOrder::Theorem).unwrap();
        assert_eq!(d.sigma, 2);
        assert!(per_category_bound(3, 3, &r(1, 2)).is_err());
        assert!(per_category_bound(3, 0, &r(1, 1)).is_err());
    }

    #[test]
    fn peak_examples() {
        assert_eq!(peak_ndt_lower_bound(&cfg(3, 3, 3, r(1, 3))).unwrap(), r(5, 3));
        assert_eq!(peak_ndt_lower_bound(&cfg(3, 3, 3, r(1, 1))).unwrap(), r(1, 1));
        assert_eq!(peak_ndt_lower_bound(&cfg(2, 4, 4, r(1, 2))).unwrap(), r(5, 2));
        // sigma = 2 alone is smaller
        assert_eq!(envelope_for_sigma(2, 4, 2).unwrap().evaluate(&r(1, 1)).unwrap(), r(2, 1));
        assert!(matches!(
            peak_ndt_lower_bound(&cfg(3, 5, 3, r(1, 2))),
            Err(Error::InfeasibleLibrary { files: 3, receivers: 5 })
        ));
    }

    #[test]
    fn peak_at_full_cache_with_more_receivers_than_transmitters() {
        // t = K_T and s > K_T: sigma = K_T leaves (s - K_T) C(K_T-1, K_T-1) in the numerator.
        assert_eq!(peak_ndt_lower_bound(&cfg(2, 4, 4, r(1, 1))).unwrap(), r(2, 1));
    }

    #[test]
    fn expected_examples() {
        assert_eq!(expected_ndt_lower_bound(&cfg(2, 2, 2, r(1, 2))).unwrap(), r(5, 4));
        assert_eq!(expected_ndt_lower_bound(&cfg(2, 2, 1, r(1, 2))).unwrap(), r(1, 1));
        assert_eq!(expected_ndt_lower_bound(&cfg(2, 2, 2, r(1, 1))).unwrap(), r(1, 1));
    }

    #[test]
    fn single_transmitter_needs_s_slots() {
        for s in 1..=12 {
            assert_eq!(per_category_bound(1, s, &r(1, 1)).unwrap(), Rational::from(s));
        }
    }

    #[test]
    fn sweep_examples() {
        let grid = vec![r(1, 3), r(2, 3), r(1, 1)];
        let curve = sweep(3, 3, 3, &grid, BoundKind::Peak, EnvelopeOrder::Theorem).unwrap();
        let vals: Vec<_> = curve.values().cloned().collect();
        assert_eq!(vals, vec![r(5, 3), r(7, 6), r(1, 1)]);

        let curve = sweep(4, 3, 5, &[r(1, 1)], BoundKind::Peak, EnvelopeOrder::Theorem).unwrap();
        assert_eq!(curve.samples, vec![(r(1, 1), r(1, 1))]);

        let grid = linear_grid(&r(1, 5), &r(1, 1), 21).unwrap();
        let curve = sweep(5, 20, 100, &grid, BoundKind::Expected, EnvelopeOrder::Theorem).unwrap();
        assert_eq!(curve.samples.len(), 21);
        assert!(curve.is_non_increasing());
        assert!(curve.is_convex());

        assert!(matches!(
            sweep(3, 5, 3, &grid, BoundKind::Peak, EnvelopeOrder::Theorem),
            Err(Error::InvalidConfig(_))
        ));
        let grid3 = vec![r(1, 3), r(1, 1)];
        assert!(matches!(
            sweep(3, 5, 3, &grid3, BoundKind::Peak, EnvelopeOrder::Theorem),
            Err(Error::InfeasibleLibrary { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(3, &[]).is_err());
        assert!(validate_grid(3, &[r(1, 2), r(1, 2)]).is_err());
        assert!(validate_grid(3, &[r(1, 4)]).is_err());
        assert_eq!(linear_grid(&r(1, 3), &r(1, 1), 3).unwrap(), vec![r(1, 3), r(2, 3), r(1, 1)]);
        assert!(linear_grid(&r(1, 1), &r(1, 3), 3).is_err());
        assert!(linear_grid(&r(1, 3), &r(1, 1), 0).is_err());
    }

    #[test]
    fn form_equivalence() {
        for kt in 1..=8u32 {
            for sigma in 1..=kt {
                for t in 1..=sigma {
                    for s in sigma..=12 {
                        let lhs = bound_expression(kt, s, sigma, t).unwrap() - Rational::one();
                        let rhs = r(i64::from(s - sigma), i64::from(sigma))
                            * crate::combinatorics::binom_ratio(sigma.into(), t.into(), kt.into(), t.into());
                        assert_eq!(lhs, rhs, "kt={kt} sigma={sigma} t={t} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn orders_agree_at_integers_and_theorem_never_exceeds_proof() {
        for kt in 1..=7u32 {
            for s in 1..=10u32 {
                let b = CategoryBounder::new(kt, s).unwrap();
                for q in 4..=(4 * kt as i64) {
                    let t = r(q, 4);
                    let th = b.evaluate(&t, EnvelopeOrder::Theorem).unwrap();
                    let pr = b.evaluate(&t, EnvelopeOrder::Proof).unwrap();
                    assert!(th <= pr, "kt={kt} s={s} t={t}");
                }
            }
        }
    }

    #[test]
    fn point_mass_at_k_r_reproduces_peak() {
        let c = cfg(4, 6, 10, r(5, 8));
        let dist = DistinctCountDistribution::point_mass(6).unwrap();
        let via_expected = expected_with_distribution(4, &c.t(), &dist, EnvelopeOrder::Theorem).unwrap();
        assert_eq!(via_expected, peak_ndt_lower_bound(&c).unwrap());
    }

    #[test]
    fn expected_allows_small_libraries() {
        let c = cfg(3, 5, 2, r(1, 2));
        let v = expected_ndt_lower_bound(&c).unwrap();
        assert!(v >= 1);
    }

    #[test]
    fn breakdown_sums_to_expected() {
        let c = cfg(4, 5, 6, r(3, 8));
        let b = expected_breakdown(&c, EnvelopeOrder::Theorem).unwrap();
        assert_eq!(b.value, expected_ndt_lower_bound(&c).unwrap());
        assert_eq!(b.categories.len(), 5);
    }
}
