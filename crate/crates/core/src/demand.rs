//! Uniform random demands and the distribution of the number of distinct
//! files they contain.
//!
//! The distribution is available three ways: in closed form through
//! surjection counts, by exhaustive enumeration of `[N]^{K_R}`, and by
//! seeded Monte-Carlo sampling. The sampler uses ChaCha8 (`rand_chacha`)
//! seeded through `SeedableRng::seed_from_u64`, drawing each request with
//! `Rng::gen_range(1..=N)`; streams for a given seed are stable and are part
//! of the test contract.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{binom, surjection_count, Rational};
use crate::error::{Error, Result};

/// Default upper limit on the number of vectors `enumerate_demands` will produce.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// The requests of all receivers; entry `j` is the (1-based) file index
/// requested by receiver `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DemandVector(Vec<u32>);

impl DemandVector {
    pub fn new(entries: Vec<u32>, files: u32) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("demand vector must have at least one receiver".into()));
        }
        if let Some(bad) = entries.iter().find(|&&d| d == 0 || d > files) {
            return Err(Error::Domain(format!("file index {bad} outside [1, {files}]")));
        }
        Ok(DemandVector(entries))
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn receivers(&self) -> usize {
        self.0.len()
    }

    /// Number of distinct files requested.
    pub fn distinct_count(&self) -> u32 {
        self.0.iter().collect::<BTreeSet<_>>().len() as u32
    }
}

pub fn distinct_count(demand: &DemandVector) -> u32 {
    demand.distinct_count()
}

/// Probability mass function of the number of distinct files in a demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinctCountDistribution {
    masses: BTreeMap<u32, Rational>,
}

impl DistinctCountDistribution {
    /// Builds a pmf from explicit masses. Zero masses are dropped; the
    /// remaining masses must be positive, sit on `s >= 1` and sum to one.
    pub fn from_masses(masses: impl IntoIterator<Item = (u32, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (s, p) in masses {
            if s == 0 {
                return Err(Error::Domain("distinct count must be at least 1".into()));
            }
            if p.is_negative() {
                return Err(Error::Domain(format!("negative mass {p} at s = {s}")));
            }
            if !p.is_zero() {
                let slot = map.entry(s).or_insert_with(Rational::zero);
                *slot = &*slot + p;
            }
        }
        let total: Rational = map.values().sum();
        if total != 1 {
            return Err(Error::Domain(format!("masses sum to {total}, not 1")));
        }
        Ok(DistinctCountDistribution { masses: map })
    }

    /// All mass on a single category.
    pub fn point_mass(s: u32) -> Result<Self> {
        Self::from_masses([(s, Rational::one())])
    }

    pub fn mass(&self, s: u32) -> Rational {
        self.masses.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Rational)> + '_ {
        self.masses.iter().map(|(&s, p)| (s, p))
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.masses.keys().copied()
    }

    pub fn max_support(&self) -> u32 {
        self.masses.keys().next_back().copied().unwrap_or(0)
    }

    pub fn mean(&self) -> Rational {
        self.masses.iter().map(|(&s, p)| Rational::from(s) * p).sum()
    }

    /// `P(S < s)`.
    pub fn mass_below(&self, s: u32) -> Rational {
        self.masses.range(..s).map(|(_, p)| p).sum()
    }
}

/// Closed-form pmf of the number of distinct files among `receivers`
/// independent uniform requests over `files` files:
/// `P(S = s) = C(N, s) * Surj(K_R, s) / N^{K_R}`.
pub fn distinct_distribution(files: u32, receivers: u32) -> Result<DistinctCountDistribution> {
    if files == 0 || receivers == 0 {
        return Err(Error::Domain("N and K_R must be positive".into()));
    }
    let total = BigUint::from(files).pow(receivers);
    let masses = (1..=files.min(receivers)).map(|s| {
        let count = binom(files.into(), s.into()) * surjection_count(receivers, s);
        (s, Rational::from_biguints(count, total.clone()))
    });
    DistinctCountDistribution::from_masses(masses)
}

/// Iterator over every vector of `[N]^{K_R}` in lexicographic order.
#[derive(Debug, Clone)]
pub struct DemandEnumerator {
    files: u32,
    current: Option<Vec<u32>>,
}

impl Iterator for DemandEnumerator {
    type Item = DemandVector;

    fn next(&mut self) -> Option<DemandVector> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        let mut pos = next.len();
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            if next[pos] < self.files {
                next[pos] += 1;
                self.current = Some(next);
                break;
            }
            next[pos] = 1;
        }
        Some(DemandVector(out))
    }
}

fn demand_space_size(files: u32, receivers: u32) -> u128 {
    let mut size: u128 = 1;
    for _ in 0..receivers {
        size = size.saturating_mul(files.into());
    }
    size
}

/// Exhaustively enumerates all demand vectors, refusing when there are
/// more than `cap` of them.
pub fn enumerate_demands(files: u32, receivers: u32, cap: u128) -> Result<DemandEnumerator> {
    if files == 0 || receivers == 0 {
        return Err(Error::Domain("N and K_R must be positive".into()));
    }
    let requested = demand_space_size(files, receivers);
    if requested > cap {
        return Err(Error::CapExceeded { requested, cap });
    }
    Ok(DemandEnumerator {
        files,
        current: Some(vec![1; receivers as usize]),
    })
}

/// Histogram of `distinct_count` over the full enumeration, normalized by `N^{K_R}`.
pub fn enumerated_distribution(files: u32, receivers: u32, cap: u128) -> Result<DistinctCountDistribution> {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    let mut total = 0u64;
    for demand in enumerate_demands(files, receivers, cap)? {
        *counts.entry(demand.distinct_count()).or_default() += 1;
        total += 1;
    }
    let total = total as i64;
    DistinctCountDistribution::from_masses(
        counts
            .into_iter()
            .map(|(s, c)| (s, Rational::new(c as i64, total))),
    )
}

/// Seeded stream of i.i.d. uniform demand vectors.
#[derive(Debug, Clone)]
pub struct DemandSampler {
    rng: ChaCha8Rng,
    files: u32,
    receivers: u32,
    remaining: u64,
}

impl DemandSampler {
    /// Draws only the distinct count of the next demand, skipping the allocation.
    pub fn next_distinct_count(&mut self, scratch: &mut Vec<u32>) -> Option<u32> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        scratch.clear();
        for _ in 0..self.receivers {
            scratch.push(self.rng.gen_range(1..=self.files));
        }
        scratch.sort_unstable();
        scratch.dedup();
        Some(scratch.len() as u32)
    }
}

impl Iterator for DemandSampler {
    type Item = DemandVector;

    fn next(&mut self) -> Option<DemandVector> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let entries = (0..self.receivers)
            .map(|_| self.rng.gen_range(1..=self.files))
            .collect();
        Some(DemandVector(entries))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

pub fn sample_demands(files: u32, receivers: u32, count: u64, seed: u64) -> Result<DemandSampler> {
    if files == 0 || receivers == 0 {
        return Err(Error::Domain("N and K_R must be positive".into()));
    }
    if count == 0 {
        return Err(Error::Domain("sample count must be positive".into()));
    }
    Ok(DemandSampler {
        rng: ChaCha8Rng::seed_from_u64(seed),
        files,
        receivers,
        remaining: count,
    })
}

/// Derives an independent sub-seed for worker or grid-point `index`
/// (SplitMix64 finalizer over `seed + index * golden-gamma`).
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
