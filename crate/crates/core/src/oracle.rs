//! Brute-force checks of the combinatorial steps behind the bound: the
//! uncoded-placement LP, discrete convexity of its objective coefficients,
//! the subset-averaging identities, and the demand distribution.
//!
//! Every check returns [`CheckRecord`]s gathered into a [`Report`] that can be
//! rendered as text or JSON lines.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bound::bound_expression;
use crate::combinatorics::{binom, binom_ratio, Rational};
use crate::demand::{distinct_distribution, enumerated_distribution, DEFAULT_ENUMERATION_CAP};
use crate::envelope::ConvexEnvelope;
use crate::error::{Error, Result};

pub const MAX_IDENTITY_LIMIT: u32 = 16;
pub const MAX_SUBSET_ENUMERATION: u32 = 8;
pub const MAX_CORNER_TRANSMITTERS: u32 = 10;

/// Objective coefficient `f_n = C(sigma, n) / C(K_T, n)`: the probability
/// that a bit cached at exactly `n` transmitters is cached only inside a
/// random `sigma`-subset.
pub fn f_coefficient(transmitters: u32, sigma: u32, n: u32) -> Result<Rational> {
    if n == 0 || n > transmitters || sigma == 0 || sigma > transmitters {
        return Err(Error::Domain(format!(
            "need 1 <= n, sigma <= K_T (n = {n}, sigma = {sigma}, K_T = {transmitters})"
        )));
    }
    Ok(binom_ratio(sigma.into(), n.into(), transmitters.into(), n.into()))
}

fn coefficients(transmitters: u32, sigma: u32) -> Result<Vec<Rational>> {
    (1..=transmitters).map(|n| f_coefficient(transmitters, sigma, n)).collect()
}

/// Fractions `alphas[n-1]` of library bits stored at exactly `n` transmitters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementProfile {
    pub t: Rational,
    pub alphas: Vec<Rational>,
}

impl PlacementProfile {
    /// Nonnegative, sums to one, and has mean replication `t`.
    pub fn validate(&self) -> Result<()> {
        if self.alphas.iter().any(Rational::is_negative) {
            return Err(Error::Infeasible("negative placement fraction".into()));
        }
        let total: Rational = self.alphas.iter().sum();
        if total != 1 {
            return Err(Error::Infeasible(format!("fractions sum to {total}")));
        }
        let mean: Rational = self
            .alphas
            .iter()
            .enumerate()
            .map(|(i, a)| Rational::integer(i as i64 + 1) * a)
            .sum();
        if mean != self.t {
            return Err(Error::Infeasible(format!("mean replication {mean} differs from t = {}", self.t)));
        }
        Ok(())
    }

    pub fn objective(&self, coefficients: &[Rational]) -> Rational {
        self.alphas.iter().zip(coefficients).map(|(a, f)| a * f).sum()
    }

    pub fn support(&self) -> BTreeSet<u32> {
        self.alphas
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_positive())
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub optimum: Rational,
    pub profile: PlacementProfile,
    pub support: BTreeSet<u32>,
}

/// Minimizes `sum_n alpha_n f_n` subject to `sum alpha_n = 1`,
/// `sum n alpha_n = t`, `alpha >= 0`, by enumerating every basic feasible
/// solution: singletons `{t}` at integer `t` and pairs `n1 < t < n2`.
/// Ties go to the smaller support, then to the lexicographically smallest
/// index pair.
pub fn lp_min_placement(transmitters: u32, sigma: u32, t: &Rational) -> Result<LpSolution> {
    if sigma == 0 || sigma > transmitters {
        return Err(Error::Domain(format!("sigma = {sigma} outside [1, {transmitters}]")));
    }
    if *t < 1 || *t > i64::from(transmitters) {
        return Err(Error::Infeasible(format!("t = {t} outside [1, {transmitters}]")));
    }
    let f = coefficients(transmitters, sigma)?;
    let kt = transmitters as usize;
    let mut best: Option<((usize, u32, u32), Rational, Vec<Rational>)> = None;
    let mut consider = |key: (usize, u32, u32), alphas: Vec<Rational>| {
        let value: Rational = alphas.iter().zip(&f).map(|(a, c)| a * c).sum();
        let better = match &best {
            None => true,
            Some((k, v, _)) => value < *v || (value == *v && key < *k),
        };
        if better {
            best = Some((key, value, alphas));
        }
    };
    if let Some(ti) = t.to_i64() {
        let mut alphas = vec![Rational::zero(); kt];
        alphas[ti as usize - 1] = Rational::one();
        consider((1, ti as u32, ti as u32), alphas);
    }
    for n1 in 1..=transmitters {
        for n2 in n1 + 1..=transmitters {
            let (r1, r2) = (Rational::from(n1), Rational::from(n2));
            if !(r1 < *t && *t < r2) {
                continue;
            }
            let width = &r2 - &r1;
            let mut alphas = vec![Rational::zero(); kt];
            alphas[n1 as usize - 1] = (&r2 - t) / &width;
            alphas[n2 as usize - 1] = (t - &r1) / &width;
            consider((2, n1, n2), alphas);
        }
    }
    let (_, optimum, alphas) = best.expect("t in [1, K_T] always admits a vertex");
    let profile = PlacementProfile { t: t.clone(), alphas };
    let support = profile.support();
    Ok(LpSolution { optimum, profile, support })
}

/// Outcome of the discrete-convexity checks on `f_n` for one `(K_T, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvexityReport {
    /// `f_{n+1} + f_{n-1} >= 2 f_n` for `2 <= n <= sigma - 1`.
    pub in_region: bool,
    /// `f_{n+1} <= f_n` across all of `1..K_T`.
    pub non_increasing: bool,
    /// The second-difference condition for every interior `n` in `2..K_T-1`,
    /// including across `n = sigma` where `f` drops to zero.
    pub across_boundary: bool,
}

pub fn convexity_report(transmitters: u32, sigma: u32) -> Result<ConvexityReport> {
    let f = coefficients(transmitters, sigma)?;
    let convex_at = |n: usize| &f[n] + &f[n - 2] >= Rational::integer(2) * &f[n - 1];
    let in_region = (2..sigma as usize).all(convex_at);
    let across_boundary = (2..transmitters as usize).all(convex_at);
    let non_increasing = f.windows(2).all(|w| w[1] <= w[0]);
    Ok(ConvexityReport { in_region, non_increasing, across_boundary })
}

/// Convexity inside `1 <= n <= sigma` and monotonicity on `1..K_T`.
pub fn check_discrete_convexity(transmitters: u32, sigma: u32) -> Result<bool> {
    let r = convexity_report(transmitters, sigma)?;
    Ok(r.in_region && r.non_increasing)
}

/// One checked family of tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub range: String,
    pub checked: u64,
    pub passed: bool,
    pub counterexample: Option<String>,
}

impl CheckRecord {
    fn new(name: &str, range: String) -> Self {
        CheckRecord { name: name.into(), range, checked: 0, passed: true, counterexample: None }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            if self.passed {
                self.counterexample = Some(describe());
            }
            self.passed = false;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let status = if r.passed { "PASS" } else { "FAIL" };
            let _ = write!(out, "[{status}] {:<30} {:<40} {:>8} tuples", r.name, r.range, r.checked);
            if let Some(c) = &r.counterexample {
                let _ = write!(out, "  counterexample: {c}");
            }
            out.push('\n');
        }
        let failed = self.records.iter().filter(|r| !r.passed).count();
        let _ = writeln!(out, "{} checks, {} failed", self.records.len(), failed);
        out
    }

    pub fn render_json_lines(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }
}

/// The subset-counting identities used when averaging the cut bound:
///
/// * `C(K-n, l) / C(K, l) = C(K-l, n) / C(K, n)` for `0 <= n, l <= K`;
/// * `C(s-1, s-sigma-1) / C(s, sigma) = (s - sigma) / s`;
/// * the probability that a uniform `sigma`-subset of `[K_T]` contains a
///   fixed `k`-set is `C(K_T-k, K_T-sigma) / C(K_T, K_T-sigma)`, checked in
///   closed form up to `limit` and by enumerating subsets up to `K_T = 8`.
pub fn check_averaging_identities(limit: u32) -> Result<Report> {
    if limit == 0 || limit > MAX_IDENTITY_LIMIT {
        return Err(Error::Domain(format!("identity limit must be in [1, {MAX_IDENTITY_LIMIT}]")));
    }
    let lim = i64::from(limit);

    let mut swap = CheckRecord::new("binomial_ratio_swap", format!("0<=n,l<=K<={limit}"));
    for k in 0..=lim {
        for n in 0..=k {
            for l in 0..=k {
                let lhs = binom_ratio(k - n, l, k, l);
                let rhs = binom_ratio(k - l, n, k, n);
                swap.check(lhs == rhs, || format!("K={k} n={n} l={l}: {lhs} != {rhs}"));
            }
        }
    }

    let mut counting = CheckRecord::new("receiver_subset_counting", format!("1<=sigma<=s<={limit}"));
    for s in 1..=lim {
        for sigma in 1..=s {
            let lhs = binom_ratio(s - 1, s - sigma - 1, s, sigma);
            let rhs = Rational::new(s - sigma, s);
            counting.check(lhs == rhs, || format!("s={s} sigma={sigma}: {lhs} != {rhs}"));
        }
    }

    let mut closed = CheckRecord::new("subset_probability_closed", format!("1<=k,sigma<=K_T<={limit}"));
    for kt in 1..=lim {
        for sigma in 1..=kt {
            for k in 1..=kt {
                let lhs = binom_ratio(kt - k, kt - sigma, kt, kt - sigma);
                let rhs = f_coefficient(kt as u32, sigma as u32, k as u32)?;
                closed.check(lhs == rhs, || format!("K_T={kt} sigma={sigma} k={k}: {lhs} != {rhs}"));
            }
        }
    }

    let enum_limit = limit.min(MAX_SUBSET_ENUMERATION);
    let mut enumerated = CheckRecord::new(
        "subset_probability_enumerated",
        format!("all K, S_t subsets of [K_T], K_T<={enum_limit}"),
    );
    for kt in 1..=enum_limit {
        let full = 1u32 << kt;
        for sigma in 1..=kt {
            let total = binom(kt.into(), sigma.into());
            for marked in 1..full {
                let k = marked.count_ones();
                // complement of S_t avoids the marked set iff the marked set lies in S_t
                let hits = (0..full)
                    .filter(|st| st.count_ones() == sigma && marked & !st == 0)
                    .count() as u64;
                let lhs = Rational::from_biguints(hits.into(), total.clone());
                let rhs = binom_ratio(
                    i64::from(kt - k),
                    i64::from(kt - sigma),
                    kt.into(),
                    i64::from(kt - sigma),
                );
                enumerated.check(lhs == rhs, || {
                    format!("K_T={kt} sigma={sigma} K={marked:#b}: {lhs} != {rhs}")
                });
            }
        }
    }

    Ok(Report { records: vec![swap, counting, closed, enumerated] })
}

/// Checks that the LP optimum sits at the corner `alpha_t = 1` for integer
/// `t` and interpolates the two neighbouring corners (on the convex
/// envelope of `f`) for quarter-step fractional `t`.
pub fn lp_matches_corner_claim(max_transmitters: u32) -> Result<Report> {
    if max_transmitters == 0 || max_transmitters > MAX_CORNER_TRANSMITTERS {
        return Err(Error::Domain(format!(
            "corner check supports 1 <= K_T <= {MAX_CORNER_TRANSMITTERS}"
        )));
    }
    let mut integer = CheckRecord::new("lp_integer_corner", format!("K_T<={max_transmitters}, integer t"));
    let mut fractional =
        CheckRecord::new("lp_fractional_interpolation", format!("K_T<={max_transmitters}, t on quarters"));
    let mut support = CheckRecord::new("lp_support_size", format!("K_T<={max_transmitters}, t on quarters"));
    for kt in 1..=max_transmitters {
        for sigma in 1..=kt {
            let f = coefficients(kt, sigma)?;
            let env = ConvexEnvelope::new(
                f.iter().enumerate().map(|(i, v)| (i as i64 + 1, v.clone())).collect(),
            )?;
            for q in 4..=4 * i64::from(kt) {
                let t = Rational::new(q, 4);
                let sol = lp_min_placement(kt, sigma, &t)?;
                support.check(sol.support.len() <= 2 && sol.profile.validate().is_ok(), || {
                    format!("K_T={kt} sigma={sigma} t={t}: support {:?}", sol.support)
                });
                if q % 4 == 0 {
                    let corner = binom_ratio(sigma.into(), q / 4, kt.into(), q / 4);
                    integer.check(sol.optimum == corner, || {
                        format!("K_T={kt} sigma={sigma} t={t}: {} != {corner}", sol.optimum)
                    });
                } else {
                    let lo = q / 4;
                    let w = Rational::new(q % 4, 4);
                    let a = &f[lo as usize - 1];
                    let b = &f[lo as usize];
                    let interp = a + &w * (b - a);
                    let on_env = env.evaluate(&t)?;
                    fractional.check(sol.optimum == interp && sol.optimum == on_env, || {
                        format!("K_T={kt} sigma={sigma} t={t}: {} vs {interp} / {on_env}", sol.optimum)
                    });
                }
            }
        }
    }
    Ok(Report { records: vec![integer, fractional, support] })
}

fn lattice_profiles(parts: usize, denom: u32, mut visit: impl FnMut(&[u32])) {
    fn go(buf: &mut Vec<u32>, parts: usize, left: u32, visit: &mut dyn FnMut(&[u32])) {
        if buf.len() + 1 == parts {
            buf.push(left);
            visit(buf);
            buf.pop();
            return;
        }
        for c in 0..=left {
            buf.push(c);
            go(buf, parts, left - c, visit);
            buf.pop();
        }
    }
    go(&mut Vec::with_capacity(parts), parts, denom, &mut visit);
}

/// Compares the vertex-enumeration optimum against two brute-force scans:
/// every lattice profile with `alpha_n` in multiples of `1/12` over the full
/// simplex, and pair-supported profiles at step `1/64`. Feasible scan points
/// can never beat the vertex optimum, and the scans reach it exactly on
/// quarter-step `t`.
pub fn check_lp_brute_force(max_transmitters: u32) -> Result<Report> {
    let max_transmitters = max_transmitters.clamp(1, 6);
    let mut lattice = CheckRecord::new("lp_lattice_scan", format!("K_T<={max_transmitters}, step 1/12"));
    let mut pairs = CheckRecord::new("lp_pair_grid_scan", format!("K_T<={max_transmitters}, step 1/64"));
    for kt in 1..=max_transmitters {
        for sigma in 1..=kt {
            let f = coefficients(kt, sigma)?;
            for q in 4..=4 * i64::from(kt) {
                let t = Rational::new(q, 4);
                let opt = lp_min_placement(kt, sigma, &t)?.optimum;

                let denom = 12u32;
                let target = q * i64::from(denom) / 4;
                let mut best: Option<Rational> = None;
                lattice_profiles(kt as usize, denom, |c| {
                    let mean: i64 = c.iter().enumerate().map(|(i, &x)| (i as i64 + 1) * i64::from(x)).sum();
                    if mean == target {
                        let v: Rational = c
                            .iter()
                            .zip(&f)
                            .map(|(&x, fv)| Rational::new(x.into(), denom.into()) * fv)
                            .sum();
                        if best.as_ref().map_or(true, |b| v < *b) {
                            best = Some(v);
                        }
                    }
                });
                let scan = best.expect("quarter-step t is reachable on a 1/12 lattice");
                lattice.check(scan == opt, || format!("K_T={kt} sigma={sigma} t={t}: scan {scan} vs vertex {opt}"));

                let mut best: Option<Rational> = None;
                for n1 in 1..=kt as usize {
                    for n2 in n1..=kt as usize {
                        for k in 0..=64i64 {
                            let a = Rational::new(k, 64);
                            let b = Rational::one() - &a;
                            let mean = &a * Rational::integer(n1 as i64) + &b * Rational::integer(n2 as i64);
                            if mean != t {
                                continue;
                            }
                            let v = &a * &f[n1 - 1] + &b * &f[n2 - 1];
                            if best.as_ref().map_or(true, |x| v < *x) {
                                best = Some(v);
                            }
                        }
                    }
                }
                let scan = best.expect("adjacent pair reaches quarter-step t");
                let gap = &scan - &opt;
                pairs.check(!gap.is_negative() && gap <= Rational::new(1, 64), || {
                    format!("K_T={kt} sigma={sigma} t={t}: scan {scan} vs vertex {opt}")
                });
            }
        }
    }
    Ok(Report { records: vec![lattice, pairs] })
}

/// Discrete convexity and monotonicity of `f_n` for all `sigma <= K_T <= max`.
/// Convexity across `n = sigma` is reported as its own record.
pub fn check_convexity_family(max_transmitters: u32) -> Result<Report> {
    let mut region = CheckRecord::new("f_convex_in_region", format!("1<=sigma<=K_T<={max_transmitters}"));
    let mut boundary = CheckRecord::new("f_convex_across_boundary", format!("1<=sigma<=K_T<={max_transmitters}"));
    for kt in 1..=max_transmitters {
        for sigma in 1..=kt {
            let r = convexity_report(kt, sigma)?;
            region.check(r.in_region && r.non_increasing, || format!("K_T={kt} sigma={sigma}: {r:?}"));
            boundary.check(r.across_boundary, || format!("K_T={kt} sigma={sigma}"));
        }
    }
    Ok(Report { records: vec![region, boundary] })
}

/// Wires the LP optimum back into the cut bound: for integer `t <= sigma`,
/// `bound_expression = 1 + (s - sigma)/sigma * LP optimum`, and the two
/// algebraic forms of the bound agree.
pub fn check_bound_wiring(max_transmitters: u32, max_s: u32) -> Result<Report> {
    let mut wiring = CheckRecord::new("lp_optimum_into_bound", format!("K_T<={max_transmitters}, s<={max_s}"));
    for kt in 1..=max_transmitters {
        for sigma in 1..=kt {
            for t in 1..=sigma {
                let opt = lp_min_placement(kt, sigma, &Rational::from(t))?.optimum;
                for s in sigma..=max_s.max(sigma) {
                    let lhs = bound_expression(kt, s, sigma, t)?;
                    let rhs = Rational::one() + Rational::new(i64::from(s - sigma), i64::from(sigma)) * &opt;
                    wiring.check(lhs == rhs, || format!("K_T={kt} sigma={sigma} t={t} s={s}: {lhs} != {rhs}"));
                }
            }
        }
    }
    Ok(Report { records: vec![wiring] })
}

/// Demand-distribution oracles: exhaustive enumeration against the closed
/// form, the occupancy mean `N (1 - (1 - 1/N)^{K_R})`, and the all-distinct
/// mass `N! / ((N - K_R)! N^{K_R})`.
pub fn check_demand_distribution(enum_limit: u32, mean_limit: u32) -> Result<Report> {
    let mut exhaustive = CheckRecord::new("demand_pmf_enumerated", format!("N,K_R<={enum_limit}"));
    let mut distinct = CheckRecord::new("demand_all_distinct_mass", format!("K_R<=N<={enum_limit}"));
    for n in 1..=enum_limit {
        for kr in 1..=enum_limit {
            let analytic = distinct_distribution(n, kr)?;
            let counted = enumerated_distribution(n, kr, DEFAULT_ENUMERATION_CAP)?;
            exhaustive.check(analytic == counted, || format!("N={n} K_R={kr}: {analytic:?} vs {counted:?}"));
            if n >= kr {
                let falling: Rational = (0..kr).map(|i| Rational::from(n - i)).product();
                let expected = falling / Rational::from(n).pow(kr);
                distinct.check(analytic.mass(kr) == expected, || format!("N={n} K_R={kr}"));
            }
        }
    }
    let mut mean = CheckRecord::new("demand_occupancy_mean", format!("N,K_R<={mean_limit}"));
    for n in 1..=mean_limit {
        for kr in 1..=mean_limit {
            let analytic = distinct_distribution(n, kr)?.mean();
            let miss = Rational::one() - Rational::new(1, n.into());
            let expected = Rational::from(n) * (Rational::one() - miss.pow(kr));
            mean.check(analytic == expected, || format!("N={n} K_R={kr}: {analytic} != {expected}"));
        }
    }
    Ok(Report { records: vec![exhaustive, distinct, mean] })
}

/// All oracle suites, sized by `limit` (each suite clamps to its own maximum).
pub fn verify_all(limit: u32) -> Result<Report> {
    if limit == 0 || limit > MAX_IDENTITY_LIMIT {
        return Err(Error::Domain(format!("verify limit must be in [1, {MAX_IDENTITY_LIMIT}]")));
    }
    let mut report = check_demand_distribution(limit.min(4), limit.min(12))?;
    report.extend(check_averaging_identities(limit)?);
    report.extend(check_convexity_family(limit.min(MAX_CORNER_TRANSMITTERS))?);
    report.extend(lp_matches_corner_claim(limit.min(MAX_CORNER_TRANSMITTERS))?);
    report.extend(check_lp_brute_force(limit.min(6))?);
    report.extend(check_bound_wiring(limit.min(8), 12)?);
    Ok(report)
}
