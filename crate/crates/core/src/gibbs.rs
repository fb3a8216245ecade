//! Canonical and microcanonical Gibbs laws on partitions.
//!
//! The microcanonical law on set partitions of `{1..n}` with `k` blocks puts
//! mass `prod_i w_{#A_i} / B_{n,k}(w)` on each partition; projected to shapes
//! it becomes `(n!/B_{n,k}) prod_i (1/c_i!)(w_i/i!)^{c_i}`. The canonical law
//! drops the block-count conditioning and normalizes by `Y_n = sum_k B_{n,k}`,
//! which also exhibits it as a mixture of the microcanonical laws with
//! weights `B_{n,k}/Y_n`.
//!
//! Everything here is exact: pmfs are rationals, the sampler draws against
//! rational thresholds, and the sampler's induced law can be expanded in
//! closed form for audits.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::numeric::{binomial, factorial, pow, Rat};
use crate::partition::{
    enumerate_integer_partitions, IntegerPartition, PartitionError, SetPartition,
};
use crate::stats::{tv_distance_laws, ExactSampler, StatsError};
use crate::weights::{BellTable, WeightSequence};

/// Errors from Gibbs-law construction and sampling.
#[derive(Debug, Error)]
pub enum GibbsError {
    /// Block count outside `1..=n`.
    #[error("block count k={0} outside 1..={1}")]
    InvalidK(u32, u32),
    /// The weight prefix does not cover the sizes the law touches.
    #[error("weights stop at w_{0} but w_{1} is needed")]
    WeightsTooShort(u32, u32),
    /// A weight relevant to the law is negative.
    #[error("negative weight w_{0}")]
    NegativeWeight(u32),
    /// The normalizer vanishes, so no law exists.
    #[error("normalizing constant is zero")]
    ZeroNormalizer,
    /// The mixing parameter of the conditioned i.i.d. representation must be
    /// positive.
    #[error("tilt parameter must be positive")]
    NonpositiveTilt,
    /// Propagated partition-level failure.
    #[error(transparent)]
    Partition(#[from] PartitionError),
    /// Propagated sampling failure.
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// A pmf evaluation: the probability together with a support flag, so that
/// out-of-support queries (wrong block count, wrong total) read as an exact
/// zero rather than an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmfResult {
    /// The probability; zero when out of support.
    pub prob: Rat,
    /// Whether the queried outcome lies in the law's support universe.
    pub in_support: bool,
}

impl PmfResult {
    fn out_of_support() -> Self {
        Self {
            prob: Rat::zero(),
            in_support: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Exact finite distributions
// ---------------------------------------------------------------------------

/// A finite distribution with exact rational probabilities over an ordered
/// support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalDist<T: Ord> {
    map: BTreeMap<T, Rat>,
}

impl<T: Ord> RationalDist<T> {
    /// Validates that the probabilities are nonnegative and sum to exactly 1.
    pub fn new(map: BTreeMap<T, Rat>) -> Result<Self, StatsError> {
        if map.is_empty() {
            return Err(StatsError::EmptyWeights);
        }
        if let Some((i, _)) = map.values().enumerate().find(|(_, p)| p.is_negative()) {
            return Err(StatsError::NegativeWeight(i));
        }
        let total: Rat = map.values().cloned().sum();
        if !total.is_one() {
            return Err(StatsError::NotAPmf(crate::numeric::format_rat(&total)));
        }
        Ok(Self { map })
    }

    /// Normalizes nonnegative rational masses into a distribution.
    pub fn from_masses(masses: BTreeMap<T, Rat>) -> Result<Self, StatsError> {
        if masses.is_empty() {
            return Err(StatsError::EmptyWeights);
        }
        if let Some((i, _)) = masses.values().enumerate().find(|(_, p)| p.is_negative()) {
            return Err(StatsError::NegativeWeight(i));
        }
        let total: Rat = masses.values().cloned().sum();
        if total.is_zero() {
            return Err(StatsError::ZeroTotal);
        }
        Ok(Self {
            map: masses.into_iter().map(|(t, m)| (t, m / &total)).collect(),
        })
    }

    /// Probability of one outcome (zero off support).
    pub fn prob(&self, t: &T) -> Rat {
        self.map.get(t).cloned().unwrap_or_else(Rat::zero)
    }

    /// The support with probabilities, in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&T, &Rat)> {
        self.map.iter()
    }

    /// Number of support points.
    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// Whether the support is empty (never true after construction).
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Borrow as a plain map, the shape the fit statistics take.
    pub fn as_map(&self) -> &BTreeMap<T, Rat> {
        &self.map
    }

    /// Exact total variation distance to another law.
    pub fn tv(&self, other: &RationalDist<T>) -> Rat {
        tv_distance_laws(&self.map, &other.map)
    }

    /// Image law under a map (probabilities of equal images accumulate).
    pub fn push_forward<U: Ord, F: FnMut(&T) -> U>(&self, mut f: F) -> RationalDist<U> {
        let mut out: BTreeMap<U, Rat> = BTreeMap::new();
        for (t, p) in &self.map {
            *out.entry(f(t)).or_insert_with(Rat::zero) += p;
        }
        RationalDist { map: out }
    }
}

impl<T: Ord + Clone> RationalDist<T> {
    /// Prepares an exact sampler over the support.
    pub fn to_sampler(&self) -> DistSampler<T> {
        let support: Vec<T> = self.map.keys().cloned().collect();
        let weights: Vec<Rat> = self.map.values().cloned().collect();
        DistSampler {
            support,
            sampler: ExactSampler::new(&weights).expect("validated distribution"),
        }
    }
}

/// Sampler over the support of a [`RationalDist`].
#[derive(Debug, Clone)]
pub struct DistSampler<T> {
    support: Vec<T>,
    sampler: ExactSampler,
}

impl<T: Clone> DistSampler<T> {
    /// Draws one outcome exactly per the source distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.support[self.sampler.sample(rng)].clone()
    }
}

// ---------------------------------------------------------------------------
// Gibbs specifications
// ---------------------------------------------------------------------------

/// A Gibbs law on partitions of `{1..n}`: microcanonical when a block count
/// is fixed, canonical otherwise.
#[derive(Debug, Clone)]
pub struct GibbsSpec {
    n: u32,
    k: Option<u32>,
    weights: WeightSequence,
    table: BellTable,
}

impl GibbsSpec {
    /// Microcanonical law on partitions with exactly `k` blocks.
    ///
    /// For `k >= 2` the law touches only `w_1..w_{n-k+1}`, so the sequence
    /// may stop there; in particular `w_n` is never needed unless `k = 1`.
    pub fn micro(n: u32, k: u32, w: &WeightSequence) -> Result<Self, GibbsError> {
        if k == 0 || k > n {
            return Err(GibbsError::InvalidK(k, n));
        }
        let needed = n - k + 1;
        Self::with_weights(n, Some(k), w, needed)
    }

    /// Canonical law on all partitions of `{1..n}`; needs `w_1..w_n`.
    pub fn canonical(n: u32, w: &WeightSequence) -> Result<Self, GibbsError> {
        if n == 0 {
            return Err(GibbsError::InvalidK(0, 0));
        }
        Self::with_weights(n, None, w, n)
    }

    fn with_weights(
        n: u32,
        k: Option<u32>,
        w: &WeightSequence,
        needed: u32,
    ) -> Result<Self, GibbsError> {
        if w.n_max() < needed {
            return Err(GibbsError::WeightsTooShort(w.n_max(), needed));
        }
        for j in 1..=needed {
            if w.w(j).is_negative() {
                return Err(GibbsError::NegativeWeight(j));
            }
        }
        let padded = w.padded_to(n);
        let table = BellTable::build(&padded, n);
        let normalizer = match k {
            Some(k) => table.bell(n, k).clone(),
            None => table.y(n),
        };
        if normalizer.is_zero() {
            return Err(GibbsError::ZeroNormalizer);
        }
        Ok(Self {
            n,
            k,
            weights: padded,
            table,
        })
    }

    /// Ground-set size.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Fixed block count, if microcanonical.
    pub fn k(&self) -> Option<u32> {
        self.k
    }

    /// The weight sequence in use (zero-padded to `n`).
    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    /// The Bell table underlying the normalizers.
    pub fn table(&self) -> &BellTable {
        &self.table
    }

    /// The normalizing constant: `B_{n,k}` or `Y_n`.
    pub fn normalizer(&self) -> Rat {
        match self.k {
            Some(k) => self.table.bell(self.n, k).clone(),
            None => self.table.y(self.n),
        }
    }

    /// Probability of a specific set partition.
    pub fn pmf_set(&self, pi: &SetPartition) -> PmfResult {
        if pi.n() != self.n || self.k.is_some_and(|k| k != pi.k()) {
            return PmfResult::out_of_support();
        }
        let mut num = Rat::one();
        for s in pi.block_sizes() {
            num *= self.weights.w(s);
        }
        PmfResult {
            prob: num / self.normalizer(),
            in_support: true,
        }
    }

    /// Probability that the induced shape equals `lambda`; equals
    /// `pmf_set` times the number of set partitions of that shape.
    pub fn pmf_int(&self, lambda: &IntegerPartition) -> PmfResult {
        if lambda.n() != self.n || self.k.is_some_and(|k| k != lambda.k()) {
            return PmfResult::out_of_support();
        }
        let mut num = Rat::from_integer(factorial(self.n as u64));
        for (size, mult) in lambda.counts() {
            let ratio = self.weights.w(size) / Rat::from_integer(factorial(size as u64));
            num *= pow(&ratio, mult) / Rat::from_integer(factorial(mult as u64));
        }
        PmfResult {
            prob: num / self.normalizer(),
            in_support: true,
        }
    }

    /// The mixture decomposition of the canonical law over block counts:
    /// `P(K = k) = B_{n,k}/Y_n`. Identity when already microcanonical.
    pub fn mixture(&self) -> MixtureSpec {
        let q = match self.k {
            Some(k) => (1..=self.n)
                .map(|j| if j == k { Rat::one() } else { Rat::zero() })
                .collect(),
            None => {
                let y = self.table.y(self.n);
                (1..=self.n)
                    .map(|k| self.table.bell(self.n, k) / &y)
                    .collect()
            }
        };
        MixtureSpec { n: self.n, q }
    }

    /// Exact sampler for the law.
    ///
    /// Microcanonical case: the block containing the least unassigned
    /// element is drawn first, its size `l` chosen with probability
    /// `C(m-1, l-1) w_l B_{m-l, k-1} / B_{m,k}` and its other members chosen
    /// uniformly, then the remainder recurses. Canonical case: the block
    /// count is drawn from the mixture first.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SetPartition {
        let k = match self.k {
            Some(k) => k,
            None => {
                let q: Vec<Rat> = (1..=self.n)
                    .map(|k| self.table.bell(self.n, k).clone())
                    .collect();
                let sampler = ExactSampler::new(&q).expect("positive normalizer");
                sampler.sample(rng) as u32 + 1
            }
        };
        let mut pool: Vec<u32> = (1..=self.n).collect();
        let mut blocks: Vec<Vec<u32>> = Vec::with_capacity(k as usize);
        let mut kk = k;
        while kk > 0 {
            let m = pool.len() as u32;
            if kk == 1 {
                blocks.push(pool.split_off(0));
                break;
            }
            // Size of the block containing pool[0].
            let mut size_weights = Vec::with_capacity((m - kk + 1) as usize);
            for l in 1..=(m - kk + 1) {
                size_weights.push(
                    Rat::from_integer(binomial(m as u64 - 1, l as u64 - 1))
                        * self.weights.w(l)
                        * self.table.bell(m - l, kk - 1),
                );
            }
            let l = ExactSampler::new(&size_weights)
                .expect("B_{m,k} > 0 along the recursion")
                .sample(rng) as u32
                + 1;
            // Uniform (l-1)-subset of pool[1..] joins pool[0]: partial
            // Fisher-Yates on the tail.
            let mut block = vec![pool[0]];
            for pick in 0..(l - 1) as usize {
                let j = rng.gen_range(1 + pick..pool.len());
                pool.swap(1 + pick, j);
                block.push(pool[1 + pick]);
            }
            pool.drain(0..l as usize);
            blocks.push(block);
            kk -= 1;
        }
        SetPartition::from_blocks(self.n, &blocks).expect("sampler emits disjoint covering blocks")
    }

    /// The exact law induced by [`Self::sample`], expanded analytically.
    ///
    /// The recursive construction reaches each partition through exactly one
    /// choice sequence, so its path probability is a finite product that can
    /// be compared with `pmf_set` outcome by outcome. Enumeration-capped.
    pub fn induced_sampler_law(&self) -> Result<RationalDist<SetPartition>, GibbsError> {
        let parts = crate::partition::enumerate_set_partitions(self.n, self.k)?;
        let mut map = BTreeMap::new();
        for pi in parts {
            map.insert(pi.clone(), self.sampler_path_probability(&pi));
        }
        Ok(RationalDist::new(map)?)
    }

    /// Probability that the sampler's unique choice path produces `pi`.
    fn sampler_path_probability(&self, pi: &SetPartition) -> Rat {
        // The mixture factor for canonical specs.
        let mut acc = match self.k {
            Some(_) => Rat::one(),
            None => self.table.bell(self.n, pi.k()) / self.table.y(self.n),
        };
        // Blocks in least-element order, as the sampler would emit them.
        let mut blocks = pi.blocks();
        blocks.sort_by_key(|b| b[0]);
        let mut m = self.n;
        let mut kk = pi.k();
        for block in blocks {
            if kk == 1 {
                break;
            }
            let l = block.len() as u32;
            // P(size = l) has the C(m-1, l-1) orderings factor; the uniform
            // membership choice then divides it back out.
            acc *= self.weights.w(l) * self.table.bell(m - l, kk - 1) / self.table.bell(m, kk);
            m -= l;
            kk -= 1;
        }
        acc
    }
}

/// Mixing weights of the canonical law over block counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixtureSpec {
    n: u32,
    // q[k-1] = P(K = k).
    q: Vec<Rat>,
}

impl MixtureSpec {
    /// Ground-set size.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `P(K = k)`.
    pub fn q(&self, k: u32) -> Rat {
        assert!(k >= 1 && k <= self.n);
        self.q[(k - 1) as usize].clone()
    }

    /// The block-count law as a distribution over `k`.
    pub fn dist(&self) -> RationalDist<u32> {
        let map: BTreeMap<u32, Rat> = (1..=self.n).map(|k| (k, self.q(k))).collect();
        RationalDist::new(map).expect("mixture weights sum to 1")
    }
}

// ---------------------------------------------------------------------------
// Conditioned i.i.d. block sizes
// ---------------------------------------------------------------------------

/// The conditioned i.i.d. representation of microcanonical block sizes: take
/// `Y_1..Y_k` i.i.d. with `P(Y = m)` proportional to `w_m xi^m / m!` and
/// condition on `Y_1 + ... + Y_k = n`. The result is a law over ordered size
/// vectors (compositions of `n` into `k` positive parts) and is independent
/// of the tilt `xi`, which cancels after conditioning; it must agree with
/// reading the microcanonical blocks in uniformly random order.
pub fn kolchin_block_size_dist(
    spec: &GibbsSpec,
    xi: &Rat,
) -> Result<RationalDist<Vec<u32>>, GibbsError> {
    if !xi.is_positive() {
        return Err(GibbsError::NonpositiveTilt);
    }
    let k = spec
        .k()
        .ok_or(GibbsError::InvalidK(0, spec.n()))?;
    let n = spec.n();
    let mut masses: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
    let mut sizes = Vec::with_capacity(k as usize);
    fn rec(
        remaining: u32,
        slots: u32,
        max_size: u32,
        spec: &GibbsSpec,
        xi: &Rat,
        sizes: &mut Vec<u32>,
        masses: &mut BTreeMap<Vec<u32>, Rat>,
    ) {
        if slots == 0 {
            if remaining == 0 {
                let mut mass = Rat::one();
                for &s in sizes.iter() {
                    mass *= spec.weights().w(s) * pow(xi, s)
                        / Rat::from_integer(factorial(s as u64));
                }
                masses.insert(sizes.clone(), mass);
            }
            return;
        }
        let hi = remaining.saturating_sub(slots - 1).min(max_size);
        for s in 1..=hi {
            sizes.push(s);
            rec(remaining - s, slots - 1, max_size, spec, xi, sizes, masses);
            sizes.pop();
        }
    }
    rec(n, k, n - k + 1, spec, xi, &mut sizes, &mut masses);
    Ok(RationalDist::from_masses(masses)?)
}

/// The exchangeable block-size law read off the microcanonical measure: the
/// shape law divided equally among the distinct orderings of each shape.
pub fn exchangeable_size_dist(spec: &GibbsSpec) -> Result<RationalDist<Vec<u32>>, GibbsError> {
    let k = spec.k().ok_or(GibbsError::InvalidK(0, spec.n()))?;
    let mut map: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
    for lambda in enumerate_integer_partitions(spec.n(), k) {
        let p = spec.pmf_int(&lambda).prob;
        // Number of distinct orderings of the multiset of parts.
        let mut orders = Rat::from_integer(factorial(k as u64));
        for (_, mult) in lambda.counts() {
            orders /= Rat::from_integer(factorial(mult as u64));
        }
        let per_order = p / &orders;
        permute_distinct(lambda.parts(), &mut |perm| {
            map.insert(perm.to_vec(), per_order.clone());
        });
    }
    Ok(RationalDist::new(map)?)
}

/// Calls `f` on every distinct permutation of `items` (which may repeat).
fn permute_distinct(items: &[u32], f: &mut impl FnMut(&[u32])) {
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    let mut current = Vec::with_capacity(items.len());
    fn rec(pool: &mut Vec<u32>, current: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if pool.is_empty() {
            f(current);
            return;
        }
        let mut last: Option<u32> = None;
        for i in 0..pool.len() {
            if last == Some(pool[i]) {
                continue;
            }
            last = Some(pool[i]);
            let v = pool.remove(i);
            current.push(v);
            rec(pool, current, f);
            current.pop();
            pool.insert(i, v);
        }
    }
    rec(&mut sorted, &mut current, f);
}

/// Tabulates the full set-partition law of a spec (enumeration-capped); the
/// reference object the sampler audits and path-law marginals compare with.
pub fn tabulate_set_law(spec: &GibbsSpec) -> Result<RationalDist<SetPartition>, GibbsError> {
    let parts = crate::partition::enumerate_set_partitions(spec.n(), spec.k())?;
    let mut map = BTreeMap::new();
    for pi in parts {
        let p = spec.pmf_set(&pi);
        debug_assert!(p.in_support);
        map.insert(pi, p.prob);
    }
    Ok(RationalDist::new(map)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, ratio};
    use crate::partition::count_set_partitions_of_shape;
    use crate::stats::{chi_square_gof, rng_stream, EmpiricalDist, GofReport};
    use crate::weights::weights_bc;

    #[test]
    fn micro_set_pmf_examples() {
        let seg = WeightSequence::segments(4);
        let spec = GibbsSpec::micro(4, 2, &seg).unwrap();
        let pi = SetPartition::parse("{1,2,3}{4}").unwrap();
        assert_eq!(spec.pmf_set(&pi).prob, ratio(1, 6));
        // Wrong block count: zero with the flag cleared.
        let r = spec.pmf_set(&SetPartition::singletons(4));
        assert!(!r.in_support);
        assert!(r.prob.is_zero());

        let uni = WeightSequence::uniform(4);
        let spec = GibbsSpec::micro(4, 2, &uni).unwrap();
        let pi = SetPartition::parse("{1,2}{3,4}").unwrap();
        assert_eq!(spec.pmf_set(&pi).prob, ratio(1, 7));

        // k = n leaves a single partition of mass one.
        let spec = GibbsSpec::micro(5, 5, &uni.padded_to(5)).unwrap();
        assert_eq!(spec.pmf_set(&SetPartition::singletons(5)).prob, rat(1));
    }

    #[test]
    fn micro_int_pmf_examples_and_consistency() {
        let seg = WeightSequence::segments(4);
        let spec = GibbsSpec::micro(4, 2, &seg).unwrap();
        let l31 = IntegerPartition::from_parts(vec![3, 1]).unwrap();
        let l22 = IntegerPartition::from_parts(vec![2, 2]).unwrap();
        assert_eq!(spec.pmf_int(&l31).prob, ratio(2, 3));
        assert_eq!(spec.pmf_int(&l22).prob, ratio(1, 3));
        // Shape pmf = set pmf times the shape count, across families and n.
        for w in [
            WeightSequence::uniform(7),
            WeightSequence::cycles(7),
            weights_bc(7, &rat(1), &rat(1)),
        ] {
            for n in 1..=7u32 {
                for k in 1..=n {
                    let spec = GibbsSpec::micro(n, k, &w).unwrap();
                    for pi in crate::partition::enumerate_set_partitions(n, Some(k)).unwrap() {
                        let shape = pi.shape();
                        let lhs = spec.pmf_int(&shape).prob;
                        let rhs = spec.pmf_set(&pi).prob
                            * Rat::from_integer(count_set_partitions_of_shape(&shape));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn micro_set_and_int_normalize() {
        for w in [
            WeightSequence::uniform(7),
            WeightSequence::segments(7),
            weights_bc(7, &ratio(1, 2), &ratio(1, 3)),
        ] {
            for n in 1..=7u32 {
                for k in 1..=n {
                    let spec = GibbsSpec::micro(n, k, &w).unwrap();
                    let set_total: Rat = crate::partition::enumerate_set_partitions(n, Some(k))
                        .unwrap()
                        .iter()
                        .map(|pi| spec.pmf_set(pi).prob)
                        .sum();
                    assert!(set_total.is_one(), "set n={n} k={k}");
                    let int_total: Rat = enumerate_integer_partitions(n, k)
                        .iter()
                        .map(|l| spec.pmf_int(l).prob)
                        .sum();
                    assert!(int_total.is_one(), "int n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn canonical_examples_and_mixture() {
        let uni = WeightSequence::uniform(2);
        let spec = GibbsSpec::canonical(2, &uni).unwrap();
        let l2 = IntegerPartition::from_parts(vec![2]).unwrap();
        let l11 = IntegerPartition::from_parts(vec![1, 1]).unwrap();
        assert_eq!(spec.pmf_int(&l2).prob, ratio(1, 2));
        assert_eq!(spec.pmf_int(&l11).prob, ratio(1, 2));

        let one = GibbsSpec::canonical(1, &WeightSequence::uniform(1)).unwrap();
        let l1 = IntegerPartition::from_parts(vec![1]).unwrap();
        assert_eq!(one.pmf_int(&l1).prob, rat(1));

        // Canonical = mixture over k of microcanonical.
        let w = weights_bc(6, &rat(1), &rat(1));
        let spec = GibbsSpec::canonical(6, &w).unwrap();
        let mix = spec.mixture();
        let total: Rat = (1..=6).map(|k| mix.q(k)).sum();
        assert!(total.is_one());
        for lambda in (1..=6u32).flat_map(|k| enumerate_integer_partitions(6, k)) {
            let k = lambda.k();
            let micro = GibbsSpec::micro(6, k, &w).unwrap();
            assert_eq!(
                spec.pmf_int(&lambda).prob,
                mix.q(k) * micro.pmf_int(&lambda).prob
            );
        }
    }

    #[test]
    fn weights_only_needed_up_to_largest_block() {
        // k = 3 on n = 6 touches sizes up to 4 only.
        let short = WeightSequence::from_values(vec![rat(1), rat(2), rat(6), rat(24)]).unwrap();
        let spec = GibbsSpec::micro(6, 3, &short).unwrap();
        let full = GibbsSpec::micro(6, 3, &WeightSequence::segments(6)).unwrap();
        for pi in crate::partition::enumerate_set_partitions(6, Some(3)).unwrap() {
            assert_eq!(spec.pmf_set(&pi), full.pmf_set(&pi));
        }
        // But k = 1 does need w_n.
        assert!(matches!(
            GibbsSpec::micro(6, 1, &short),
            Err(GibbsError::WeightsTooShort(4, 6))
        ));
    }

    #[test]
    fn sampler_induced_law_is_the_target_law() {
        for w in [
            WeightSequence::uniform(5),
            WeightSequence::cycles(5),
            weights_bc(5, &rat(1), &rat(1)),
        ] {
            for n in 1..=5u32 {
                for k in 1..=n {
                    let spec = GibbsSpec::micro(n, k, &w).unwrap();
                    let induced = spec.induced_sampler_law().unwrap();
                    let target = tabulate_set_law(&spec).unwrap();
                    assert_eq!(induced, target, "n={n} k={k}");
                }
                let spec = GibbsSpec::canonical(n, &w).unwrap();
                assert_eq!(
                    spec.induced_sampler_law().unwrap(),
                    tabulate_set_law(&spec).unwrap()
                );
            }
        }
    }

    #[test]
    fn sampler_frequencies_match_pmf() {
        let spec = GibbsSpec::micro(4, 2, &WeightSequence::segments(4)).unwrap();
        let law = tabulate_set_law(&spec).unwrap();
        let mut rng = rng_stream(0xC0FFEE, 21);
        let mut emp = EmpiricalDist::new();
        for _ in 0..40_000 {
            emp.observe(spec.sample(&mut rng));
        }
        let report = chi_square_gof(&emp, law.as_map(), 5.0).unwrap();
        assert!(
            report.accepts(GofReport::THREE_SIGMA_ALPHA),
            "p={}",
            report.p_value
        );
        // Shape marginal: P(2+2) = 1/3.
        let shape22 = IntegerPartition::from_parts(vec![2, 2]).unwrap();
        let two_two = emp
            .iter()
            .filter(|(pi, _)| pi.shape() == shape22)
            .map(|(_, c)| c)
            .sum::<u64>() as f64;
        let z = crate::stats::z_score(
            two_two / 40_000.0,
            1.0 / 3.0,
            (1.0f64 / 3.0 * 2.0 / 3.0).sqrt(),
            40_000,
        );
        assert!(z.abs() < 4.0, "z={z}");
    }

    #[test]
    fn canonical_sampler_block_count_matches_mixture() {
        let w = WeightSequence::cycles(5);
        let spec = GibbsSpec::canonical(5, &w).unwrap();
        let mix = spec.mixture().dist();
        let mut rng = rng_stream(0xC0FFEE, 22);
        let mut emp = EmpiricalDist::new();
        for _ in 0..30_000 {
            emp.observe(spec.sample(&mut rng).k());
        }
        let report = chi_square_gof(&emp, mix.as_map(), 5.0).unwrap();
        assert!(
            report.accepts(GofReport::THREE_SIGMA_ALPHA),
            "p={}",
            report.p_value
        );
    }

    #[test]
    fn kolchin_matches_exchangeable_sizes_and_ignores_tilt() {
        let seg = WeightSequence::segments(5);
        let spec = GibbsSpec::micro(5, 2, &seg).unwrap();
        let at_one = kolchin_block_size_dist(&spec, &rat(1)).unwrap();
        let at_half = kolchin_block_size_dist(&spec, &ratio(1, 2)).unwrap();
        assert_eq!(at_one, at_half);
        assert_eq!(at_one, exchangeable_size_dist(&spec).unwrap());

        // Broad agreement across families and (n, k).
        for w in [WeightSequence::uniform(6), WeightSequence::cycles(6)] {
            for n in 2..=6u32 {
                for k in 1..=n {
                    let spec = GibbsSpec::micro(n, k, &w).unwrap();
                    let kol = kolchin_block_size_dist(&spec, &ratio(2, 3)).unwrap();
                    assert_eq!(kol, exchangeable_size_dist(&spec).unwrap(), "n={n} k={k}");
                }
            }
        }

        // k = 1: point mass at (n).
        let spec = GibbsSpec::micro(4, 1, &WeightSequence::segments(4)).unwrap();
        let kol = kolchin_block_size_dist(&spec, &rat(1)).unwrap();
        assert_eq!(kol.prob(&vec![4]), rat(1));

        // The (1,3)/(3,1) orders split the {1,3} shape mass evenly.
        let spec = GibbsSpec::micro(4, 2, &WeightSequence::segments(4)).unwrap();
        let kol = kolchin_block_size_dist(&spec, &rat(1)).unwrap();
        assert_eq!(kol.prob(&vec![1, 3]), ratio(1, 3));
        assert_eq!(kol.prob(&vec![3, 1]), ratio(1, 3));
        assert_eq!(kol.prob(&vec![2, 2]), ratio(1, 3));
    }

    #[test]
    fn rational_dist_push_forward_and_tv() {
        let spec = GibbsSpec::micro(4, 2, &WeightSequence::segments(4)).unwrap();
        let law = tabulate_set_law(&spec).unwrap();
        let shapes = law.push_forward(|pi| pi.shape());
        let l31 = IntegerPartition::from_parts(vec![3, 1]).unwrap();
        assert_eq!(shapes.prob(&l31), ratio(2, 3));
        assert!(law.tv(&law).is_zero());
    }
}
