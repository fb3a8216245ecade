//! Seeded random streams, exact categorical sampling, and fit statistics.
//!
//! Samplers draw from rational probability vectors without ever rounding the
//! law: a uniform variable is revealed 64 bits at a time and its dyadic
//! interval is refined only until every threshold comparison is settled. The
//! goodness-of-fit side (chi-square with tail pooling, total variation
//! against an exact law) is what the simulation checks in the higher modules
//! report through.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::numeric::{Int, Rat};

/// The crate-wide generator: ChaCha12, addressed by `(seed, stream)` so that
/// independent experiment arms never share a bit stream.
pub type StreamRng = ChaCha12Rng;

/// A deterministic stream: same `(seed, stream)` always yields the same
/// draws, distinct `stream` values are independent for a fixed seed.
pub fn rng_stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Errors from samplers and fit statistics.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    /// No categories supplied.
    #[error("empty weight vector")]
    EmptyWeights,
    /// A sampling weight was negative.
    #[error("negative weight at index {0}")]
    NegativeWeight(usize),
    /// All weights were zero.
    #[error("weights sum to zero")]
    ZeroTotal,
    /// An observation fell outside the declared support.
    #[error("observed value outside declared support: {0}")]
    OutsideSupport(String),
    /// The supplied probabilities do not sum to one.
    #[error("probabilities sum to {0}, not 1")]
    NotAPmf(String),
    /// Too few cells remain after pooling to test anything.
    #[error("fewer than two cells after pooling")]
    DegenerateTest,
}

// ---------------------------------------------------------------------------
// Exact categorical sampling
// ---------------------------------------------------------------------------

/// A uniform variable on `[0,1)` revealed lazily: after `bits` refinements it
/// is known to lie in `[num/2^bits, (num+1)/2^bits)`.
struct DyadicUniform {
    num: Int,
    bits: u32,
}

impl DyadicUniform {
    fn new() -> Self {
        Self {
            num: Int::zero(),
            bits: 0,
        }
    }

    fn refine<R: RngCore + ?Sized>(&mut self, rng: &mut R) {
        self.num = (&self.num << 64) | Int::from(rng.next_u64());
        self.bits += 64;
    }

    /// Decides `U < t` for a threshold `t` in `[0, 1]`, drawing more bits
    /// only while the current interval straddles `t`.
    fn less_than<R: RngCore + ?Sized>(&mut self, rng: &mut R, t: &Rat) -> bool {
        let p = t.numer();
        let q = t.denom();
        loop {
            if self.bits > 0 {
                let rhs = p << self.bits;
                if (&self.num + Int::one()) * q <= rhs {
                    return true;
                }
                if &self.num * q >= rhs {
                    return false;
                }
            }
            self.refine(rng);
        }
    }
}

/// Samples indices in proportion to a fixed vector of nonnegative rational
/// weights, exactly.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    // Normalized cumulative sums; thresholds[i] = P(index <= i), last = 1.
    thresholds: Vec<Rat>,
}

impl ExactSampler {
    /// Precomputes cumulative thresholds. Weights must be nonnegative with a
    /// positive total; zero-weight categories are never drawn.
    pub fn new(weights: &[Rat]) -> Result<Self, StatsError> {
        if weights.is_empty() {
            return Err(StatsError::EmptyWeights);
        }
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(StatsError::NegativeWeight(i));
        }
        let total: Rat = weights.iter().sum();
        if total.is_zero() {
            return Err(StatsError::ZeroTotal);
        }
        let mut acc = Rat::zero();
        let thresholds = weights
            .iter()
            .map(|w| {
                acc += w;
                &acc / &total
            })
            .collect();
        Ok(Self { thresholds })
    }

    /// Number of categories.
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    /// Whether the sampler has no categories (never true after `new`).
    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// Draws one index: `i` with probability `w_i / sum w`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        let mut u = DyadicUniform::new();
        // Binary search for the smallest i with U < thresholds[i]; all
        // comparisons refine the same underlying uniform.
        let mut lo = 0usize;
        let mut hi = self.thresholds.len() - 1;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if u.less_than(rng, &self.thresholds[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }
}

/// One-shot draw from a weight vector; see [`ExactSampler`].
pub fn sample_index<R: RngCore + ?Sized>(
    rng: &mut R,
    weights: &[Rat],
) -> Result<usize, StatsError> {
    Ok(ExactSampler::new(weights)?.sample(rng))
}

/// Decides a single Bernoulli event of exact rational probability `p`.
pub fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: &Rat) -> bool {
    assert!(
        !p.is_negative() && p <= &Rat::one(),
        "probability out of range"
    );
    DyadicUniform::new().less_than(rng, p)
}

// ---------------------------------------------------------------------------
// Empirical distributions and fit statistics
// ---------------------------------------------------------------------------

/// Counts of observed values over an ordered support.
#[derive(Debug, Clone, Default)]
pub struct EmpiricalDist<T: Ord> {
    counts: BTreeMap<T, u64>,
    total: u64,
}

impl<T: Ord + Clone> EmpiricalDist<T> {
    /// Empty tally.
    pub fn new() -> Self {
        Self {
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    /// Records one observation.
    pub fn observe(&mut self, value: T) {
        *self.counts.entry(value).or_insert(0) += 1;
        self.total += 1;
    }

    /// Number of observations.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Count for one value.
    pub fn count(&self, value: &T) -> u64 {
        self.counts.get(value).copied().unwrap_or(0)
    }

    /// Iterates `(value, count)` in value order.
    pub fn iter(&self) -> impl Iterator<Item = (&T, u64)> {
        self.counts.iter().map(|(t, &c)| (t, c))
    }

    /// Exact empirical frequency of one value.
    pub fn frequency(&self, value: &T) -> Rat {
        Rat::new(Int::from(self.count(value)), Int::from(self.total.max(1)))
    }
}

/// Exact total variation distance between an empirical distribution and a
/// rational law: `(1/2) sum |count/total - p|` over the union of supports.
pub fn tv_distance<T: Ord + Clone>(emp: &EmpiricalDist<T>, law: &BTreeMap<T, Rat>) -> Rat {
    let mut acc = Rat::zero();
    for (v, p) in law {
        acc += (emp.frequency(v) - p).abs();
    }
    for (v, _) in emp.iter() {
        if !law.contains_key(v) {
            acc += emp.frequency(v);
        }
    }
    acc / crate::numeric::rat(2)
}

/// Exact total variation distance between two rational laws on a discrete
/// support.
pub fn tv_distance_laws<T: Ord>(a: &BTreeMap<T, Rat>, b: &BTreeMap<T, Rat>) -> Rat {
    let mut acc = Rat::zero();
    for (v, p) in a {
        match b.get(v) {
            Some(q) => acc += (p - q).abs(),
            None => acc += p.abs(),
        }
    }
    for (v, q) in b {
        if !a.contains_key(v) {
            acc += q.abs();
        }
    }
    acc / crate::numeric::rat(2)
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone)]
pub struct GofReport {
    /// Pearson statistic after pooling.
    pub statistic: f64,
    /// Degrees of freedom (`cells - 1`).
    pub dof: u32,
    /// Upper tail probability of the statistic.
    pub p_value: f64,
    /// Number of cells actually tested after pooling.
    pub cells: usize,
    /// Number of low-expectation categories folded into the pooled cell.
    pub pooled: usize,
}

impl GofReport {
    /// Conventional alpha for "the simulation matches the law" checks; a
    /// three-sigma two-sided band.
    pub const THREE_SIGMA_ALPHA: f64 = 2.7e-3;

    /// Whether the fit is accepted at the given significance level.
    pub fn accepts(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Pearson chi-square test of observed counts against an exact law.
///
/// Categories with expected count below `min_expected` are pooled into a
/// single tail cell (per common practice for sparse cells); observations
/// outside the declared support are an error, since the laws under test have
/// known support. Degrees of freedom are `cells - 1`.
pub fn chi_square_gof<T: Ord + Clone + std::fmt::Debug>(
    emp: &EmpiricalDist<T>,
    law: &BTreeMap<T, Rat>,
    min_expected: f64,
) -> Result<GofReport, StatsError> {
    if law.is_empty() {
        return Err(StatsError::EmptyWeights);
    }
    let total_p: Rat = law.values().cloned().sum();
    if !total_p.is_one() {
        return Err(StatsError::NotAPmf(crate::numeric::format_rat(&total_p)));
    }
    for (v, _) in emp.iter() {
        if !law.contains_key(v) {
            return Err(StatsError::OutsideSupport(format!("{v:?}")));
        }
    }
    let n = emp.total() as f64;
    // Partition categories into kept cells and a pooled tail.
    let mut kept: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut pool_obs = 0.0;
    let mut pool_exp = 0.0;
    let mut pooled = 0usize;
    for (v, p) in law {
        let e = crate::numeric::to_f64(p) * n;
        let o = emp.count(v) as f64;
        if e < min_expected {
            pool_obs += o;
            pool_exp += e;
            pooled += 1;
        } else {
            kept.push((o, e));
        }
    }
    if pooled > 0 {
        if pool_exp >= min_expected || kept.is_empty() {
            kept.push((pool_obs, pool_exp));
        } else {
            // Tail still too thin: merge it into the smallest kept cell.
            let (i, _) = kept
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                .expect("kept nonempty");
            kept[i].0 += pool_obs;
            kept[i].1 += pool_exp;
        }
    }
    if kept.len() < 2 {
        return Err(StatsError::DegenerateTest);
    }
    let statistic: f64 = kept
        .iter()
        .map(|(o, e)| {
            if *e == 0.0 {
                if *o == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (o - e) * (o - e) / e
            }
        })
        .sum();
    let dof = (kept.len() - 1) as u32;
    let p_value = if statistic.is_finite() {
        let chi = ChiSquared::new(dof as f64).expect("dof >= 1");
        1.0 - chi.cdf(statistic)
    } else {
        0.0
    };
    Ok(GofReport {
        statistic,
        dof,
        p_value,
        cells: kept.len(),
        pooled,
    })
}

/// Standard score of a sample mean against an exact mean and per-draw
/// standard deviation.
pub fn z_score(sample_mean: f64, exact_mean: f64, exact_sd: f64, n: u64) -> f64 {
    (sample_mean - exact_mean) / (exact_sd / (n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, ratio};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut r = rng_stream(7, 0);
            (0..4).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = rng_stream(7, 0);
            (0..4).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = rng_stream(7, 1);
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampler_rejects_bad_weights() {
        assert_eq!(ExactSampler::new(&[]).unwrap_err(), StatsError::EmptyWeights);
        assert_eq!(
            ExactSampler::new(&[rat(1), rat(-1)]).unwrap_err(),
            StatsError::NegativeWeight(1)
        );
        assert_eq!(
            ExactSampler::new(&[rat(0), rat(0)]).unwrap_err(),
            StatsError::ZeroTotal
        );
    }

    #[test]
    fn sampler_respects_zero_weights_and_frequencies() {
        let weights = [rat(1), rat(0), rat(2), rat(3)];
        let sampler = ExactSampler::new(&weights).unwrap();
        let mut rng = rng_stream(0xC0FFEE, 11);
        let mut emp = EmpiricalDist::new();
        let n = 60_000;
        for _ in 0..n {
            emp.observe(sampler.sample(&mut rng));
        }
        assert_eq!(emp.count(&1), 0);
        let law: BTreeMap<usize, Rat> = [
            (0usize, ratio(1, 6)),
            (2, ratio(2, 6)),
            (3, ratio(3, 6)),
        ]
        .into_iter()
        .collect();
        let report = chi_square_gof(&emp, &law, 5.0).unwrap();
        assert_eq!(report.dof, 2);
        assert!(
            report.accepts(GofReport::THREE_SIGMA_ALPHA),
            "p={}",
            report.p_value
        );
    }

    #[test]
    fn bernoulli_matches_probability() {
        let mut rng = rng_stream(0xC0FFEE, 12);
        let p = ratio(3, 7);
        let n = 70_000u64;
        let hits = (0..n).filter(|_| bernoulli(&mut rng, &p)).count() as f64;
        let mean = 3.0f64 / 7.0;
        let sd = (mean * (1.0 - mean)).sqrt();
        assert!(z_score(hits / n as f64, mean, sd, n).abs() < 4.0);
    }

    #[test]
    fn tv_distance_hand_example() {
        let mut emp = EmpiricalDist::new();
        for _ in 0..3 {
            emp.observe('a');
        }
        emp.observe('b');
        // Empirical (3/4, 1/4, 0) against (1/2, 1/4, 1/4): TV = 1/4.
        let law: BTreeMap<char, Rat> = [('a', ratio(1, 2)), ('b', ratio(1, 4)), ('c', ratio(1, 4))]
            .into_iter()
            .collect();
        assert_eq!(tv_distance(&emp, &law), ratio(1, 4));
        // |1/2 - 1/4| + |1/4 - 3/4| + |1/4 - 0| = 1, halved.
        let other: BTreeMap<char, Rat> = [('a', ratio(1, 4)), ('b', ratio(3, 4))].into_iter().collect();
        assert_eq!(tv_distance_laws(&law, &other), ratio(1, 2));
    }

    #[test]
    fn chi_square_pools_sparse_cells() {
        // Geometric-ish law with a thin tail; with n = 100 the tail cells
        // fall below the threshold and must be pooled.
        let law: BTreeMap<u32, Rat> = [
            (1u32, ratio(1, 2)),
            (2, ratio(1, 4)),
            (3, ratio(1, 8)),
            (4, ratio(1, 16)),
            (5, ratio(1, 32)),
            (6, ratio(1, 32)),
        ]
        .into_iter()
        .collect();
        let mut emp = EmpiricalDist::new();
        for (v, c) in [(1u32, 52u64), (2, 24), (3, 12), (4, 7), (5, 3), (6, 2)] {
            for _ in 0..c {
                emp.observe(v);
            }
        }
        let report = chi_square_gof(&emp, &law, 5.0).unwrap();
        // Cells 4, 5, 6 have expectations 6.25, 3.125, 3.125; the last two
        // pool into one cell of expectation 6.25.
        assert_eq!(report.pooled, 2);
        assert_eq!(report.cells, 5);
        assert_eq!(report.dof, 4);
        assert!(report.accepts(1e-3));
        // Outside-support observations are rejected rather than mis-scored.
        emp.observe(9);
        assert!(matches!(
            chi_square_gof(&emp, &law, 5.0),
            Err(StatsError::OutsideSupport(_))
        ));
    }

    #[test]
    fn exact_sampler_is_deterministic_per_stream() {
        let weights = [rat(2), rat(5), rat(3)];
        let sampler = ExactSampler::new(&weights).unwrap();
        let draw = |seed, stream| {
            let mut rng = rng_stream(seed, stream);
            (0..12).map(|_| sampler.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(1, 2), draw(1, 2));
        assert_ne!(draw(1, 2), draw(1, 3));
    }
}
