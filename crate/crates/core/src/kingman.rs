//! Kingman's n-coalescent, Poissonian cutting, and the Ewens sampling
//! formula.
//!
//! A [`CoalescentTree`] is built by merging uniform pairs at exponential
//! rates. A [`CutSchedule`] decorates every edge with the level at which its
//! first cut appears, coupled so that the cut set only grows with the level;
//! [`allelic_partition`] reads off the leaf partition at any level, and the
//! earliest cut overall yields the first binary split of `[n]`.
//!
//! The law of that first split is computed three independent ways: exact
//! partial-fraction integration over the level of the first cut (values live
//! in [`LogCombo`], so cancellations are detected exactly), adaptive
//! quadrature of the same integral, and Monte Carlo over simulated trees.
//! A fourth closed form, [`j_theta_general`], evaluates an alternating
//! binomial sum over logarithms; it does not agree with the other three
//! paths (see the module tests), and the integral is the value the
//! simulation reproduces.

use std::collections::BTreeMap;

use num_traits::Signed;
use rand::Rng;
use thiserror::Error;

use crate::bigdec::LogCombo;
use crate::gibbs::{GibbsError, GibbsSpec, RationalDist};
use crate::numeric::{binomial, factorial, format_rat, pow, rat, ratio, rising, to_f64};
use crate::partition::{enumerate_set_partitions, PartitionError, Permutation, SetPartition};
use crate::quad::{self, QuadError};
use crate::stats::{bernoulli, StatsError};
use crate::weights::{BellTable, WeightSequence};
use crate::Rat;

/// Absolute tolerance for the half-line quadratures in this module.
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum KingmanError {
    #[error("need at least two leaves, got n = {0}")]
    TooFewLeaves(u32),
    #[error("theta must be positive, got {0}")]
    NonpositiveTheta(String),
    #[error("cluster count {k} out of range for n = {n}")]
    InvalidK { n: u32, k: u32 },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Gibbs(#[from] GibbsError),
}

/// A realization of Kingman's n-coalescent.
///
/// Vertices `0..n` are the leaves (clusters `{1}, ..., {n}` at time 0) and
/// vertices `n..2n-1` are the mergers in time order, so the root is
/// `2n - 2`. Every non-root vertex has an edge to the merger that absorbs
/// its cluster; the edge exists during `[t(v), t(parent))`.
#[derive(Debug, Clone)]
pub struct CoalescentTree {
    n: u32,
    parent: Vec<Option<usize>>,
    children: Vec<Option<(usize, usize)>>,
    time: Vec<f64>,
    members: Vec<Vec<u32>>,
}

impl CoalescentTree {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `2n - 1`: leaves plus mergers.
    pub fn vertex_count(&self) -> usize {
        2 * self.n as usize - 1
    }

    pub fn root(&self) -> usize {
        self.vertex_count() - 1
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Formation time of the cluster at `v` (0 for leaves).
    pub fn time(&self, v: usize) -> f64 {
        self.time[v]
    }

    /// Sorted contents of the cluster at `v`.
    pub fn members(&self, v: usize) -> &[u32] {
        &self.members[v]
    }

    /// `T_k`, the time at which the process first has `k` clusters.
    /// `T_n = 0` and `T_1` is the root time.
    pub fn time_to_k_clusters(&self, k: u32) -> f64 {
        assert!(k >= 1 && k <= self.n, "cluster count out of range");
        if k == self.n {
            0.0
        } else {
            self.time[2 * self.n as usize - 1 - k as usize]
        }
    }

    /// Length of the edge above `v`; panics at the root.
    pub fn edge_length(&self, v: usize) -> f64 {
        let p = self.parent[v].expect("root has no edge");
        self.time[p] - self.time[v]
    }

    /// Total length of all edges.
    pub fn total_length(&self) -> f64 {
        (0..self.vertex_count() - 1)
            .map(|v| self.edge_length(v))
            .sum()
    }

    /// Stratum lengths `S_i = (i+1)(T_i - T_{i+1})` for `i = 1..n-1`,
    /// indexed by `i - 1`. Stratum `i` is the band of the tree during which
    /// `i + 1` clusters are alive, so the lengths sum to the total length.
    pub fn strata_lengths(&self) -> Vec<f64> {
        (1..self.n)
            .map(|i| {
                (i + 1) as f64
                    * (self.time_to_k_clusters(i) - self.time_to_k_clusters(i + 1))
            })
            .collect()
    }

    /// The partition of `[n]` into the clusters alive when `k` of them
    /// remain: the discrete skeleton state with `k` blocks.
    pub fn skeleton_partition(&self, k: u32) -> Result<SetPartition, KingmanError> {
        if k < 1 || k > self.n {
            return Err(KingmanError::InvalidK { n: self.n, k });
        }
        let mut active: Vec<usize> = (0..self.n as usize).collect();
        let mut next = self.n as usize;
        while active.len() as u32 > k {
            let (a, b) = self.children[next].expect("merger has two children");
            active.retain(|&v| v != a && v != b);
            active.push(next);
            next += 1;
        }
        let blocks: Vec<Vec<u32>> = active.iter().map(|&v| self.members[v].clone()).collect();
        Ok(SetPartition::from_blocks(self.n, &blocks)?)
    }
}

fn exp_variate<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return -u.ln() / rate;
        }
    }
}

/// Runs the n-coalescent: with `m` clusters alive the next merger arrives
/// after an `Exp(m(m-1)/2)` wait and hits a uniform pair.
pub fn simulate_kingman_tree<R: Rng + ?Sized>(n: u32, rng: &mut R) -> CoalescentTree {
    assert!(n >= 2, "coalescent needs at least two leaves");
    let total = 2 * n as usize - 1;
    let mut parent = vec![None; total];
    let mut children = vec![None; total];
    let mut time = vec![0.0; total];
    let mut members: Vec<Vec<u32>> = (1..=n).map(|i| vec![i]).collect();
    members.resize(total, Vec::new());

    let mut active: Vec<usize> = (0..n as usize).collect();
    let mut t = 0.0;
    let mut next = n as usize;
    while active.len() > 1 {
        let m = active.len();
        t += exp_variate(rng, (m * (m - 1)) as f64 / 2.0);
        let i = rng.gen_range(0..m);
        let j = loop {
            let j = rng.gen_range(0..m);
            if j != i {
                break j;
            }
        };
        let (a, b) = (active[i], active[j]);
        parent[a] = Some(next);
        parent[b] = Some(next);
        children[next] = Some((a, b));
        time[next] = t;
        let mut merged = Vec::with_capacity(members[a].len() + members[b].len());
        merged.extend_from_slice(&members[a]);
        merged.extend_from_slice(&members[b]);
        merged.sort_unstable();
        members[next] = merged;
        active.retain(|&v| v != a && v != b);
        active.push(next);
        next += 1;
    }
    CoalescentTree {
        n,
        parent,
        children,
        time,
        members,
    }
}

/// Per-edge first-cut marks, coupled across all levels at once.
///
/// Cuts on an edge of length `l` form a Poisson process of rate `l/2` in
/// the level, so the first cut sits at `2 E / l` for a standard exponential
/// `E`; its position along the edge is uniform and independent. Storing the
/// pair makes the cut set monotone in the level by construction.
#[derive(Debug, Clone)]
pub struct CutSchedule {
    level: Vec<f64>,
    frac: Vec<f64>,
}

impl CutSchedule {
    /// Level of the first cut on the edge above `v` (infinite at the root).
    pub fn first_cut_level(&self, v: usize) -> f64 {
        self.level[v]
    }

    /// Position of that cut along the edge, as a fraction from the child.
    pub fn position_frac(&self, v: usize) -> f64 {
        self.frac[v]
    }

    /// Whether the edge above `v` is cut at level `theta`.
    pub fn is_cut(&self, v: usize, theta: f64) -> bool {
        self.level[v] <= theta
    }
}

pub fn sample_cut_schedule<R: Rng + ?Sized>(tree: &CoalescentTree, rng: &mut R) -> CutSchedule {
    let total = tree.vertex_count();
    let mut level = vec![f64::INFINITY; total];
    let mut frac = vec![0.0; total];
    for v in 0..total {
        if tree.parent(v).is_some() {
            level[v] = 2.0 * exp_variate(rng, 1.0) / tree.edge_length(v);
            frac[v] = rng.gen();
        }
    }
    CutSchedule { level, frac }
}

/// Leaves `i` and `j` share a block iff the path between them through the
/// tree crosses no edge cut at or below `theta`. At `theta = 0` this is the
/// single block `[n]`; as `theta` grows blocks only split.
pub fn allelic_partition(tree: &CoalescentTree, cuts: &CutSchedule, theta: f64) -> SetPartition {
    assert!(theta >= 0.0, "level must be nonnegative");
    let total = tree.vertex_count();
    let mut uf: Vec<usize> = (0..total).collect();
    fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for v in 0..total {
        if let Some(p) = tree.parent(v) {
            if !cuts.is_cut(v, theta) {
                let (a, b) = (find(&mut uf, v), find(&mut uf, p));
                uf[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for leaf in 0..tree.n() as usize {
        let root = find(&mut uf, leaf);
        groups.entry(root).or_default().push(leaf as u32 + 1);
    }
    let blocks: Vec<Vec<u32>> = groups.into_values().collect();
    SetPartition::from_blocks(tree.n(), &blocks).expect("leaf groups partition [n]")
}

/// The earliest cut over the whole tree.
#[derive(Debug, Clone, Copy)]
pub struct FirstCut {
    /// Level at which it appears.
    pub theta: f64,
    /// Child endpoint of the cut edge.
    pub vertex: usize,
    /// Index `i` of the stratum containing the cut point, meaning the cut
    /// time falls in `[T_{i+1}, T_i)`.
    pub stratum: u32,
}

pub fn first_cut(tree: &CoalescentTree, cuts: &CutSchedule) -> FirstCut {
    let root = tree.root();
    let vertex = (0..tree.vertex_count())
        .filter(|&v| v != root)
        .min_by(|&a, &b| cuts.level[a].total_cmp(&cuts.level[b]))
        .expect("n >= 2 gives at least one edge");
    let t = tree.time(vertex) + cuts.position_frac(vertex) * tree.edge_length(vertex);
    let mut stratum = 1;
    for i in (1..tree.n()).rev() {
        if t >= tree.time_to_k_clusters(i + 1) && t < tree.time_to_k_clusters(i) {
            stratum = i;
            break;
        }
    }
    FirstCut {
        theta: cuts.level[vertex],
        vertex,
        stratum,
    }
}

/// The two-block partition produced by cutting the edge above `v`: the
/// cluster at `v` against the rest of `[n]`.
pub fn split_partition(tree: &CoalescentTree, v: usize) -> SetPartition {
    assert!(v != tree.root(), "cutting above the root splits nothing");
    let inside = tree.members(v).to_vec();
    let outside: Vec<u32> = (1..=tree.n())
        .filter(|e| !inside.contains(e))
        .collect();
    SetPartition::from_blocks(tree.n(), &[inside, outside]).expect("two complementary blocks")
}

/// Simulates one tree with cuts and returns the first split with its cut.
pub fn sample_first_split<R: Rng + ?Sized>(n: u32, rng: &mut R) -> (SetPartition, FirstCut) {
    let tree = simulate_kingman_tree(n, rng);
    let cuts = sample_cut_schedule(&tree, rng);
    let fc = first_cut(&tree, &cuts);
    (split_partition(&tree, fc.vertex), fc)
}

/// The Ewens sampling formula with a fixed rational parameter.
#[derive(Debug, Clone)]
pub struct EwensSpec {
    n: u32,
    theta: Rat,
}

impl EwensSpec {
    pub fn new(n: u32, theta: Rat) -> Result<Self, KingmanError> {
        if n < 1 {
            return Err(KingmanError::TooFewLeaves(n));
        }
        if !theta.is_positive() {
            return Err(KingmanError::NonpositiveTheta(format_rat(&theta)));
        }
        Ok(Self { n, theta })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn theta(&self) -> &Rat {
        &self.theta
    }

    pub fn pmf(&self, pi: &SetPartition) -> Rat {
        assert_eq!(pi.n(), self.n, "partition size mismatch");
        ewens_pmf(pi, &self.theta)
    }

    /// The full law, exact; feasible for small `n`.
    pub fn law(&self) -> Result<RationalDist<SetPartition>, KingmanError> {
        let mut map = BTreeMap::new();
        for pi in enumerate_set_partitions(self.n, None)? {
            let p = self.pmf(&pi);
            map.insert(pi, p);
        }
        Ok(RationalDist::new(map)?)
    }
}

/// `theta^{k-1} / [theta+1]_{n-1} * prod_i (n_i - 1)!` for a partition with
/// `k` blocks of sizes `n_i`.
pub fn ewens_pmf(pi: &SetPartition, theta: &Rat) -> Rat {
    assert!(theta.is_positive(), "parameter must be positive");
    let mut num = pow(theta, pi.k() - 1);
    for b in pi.block_sizes() {
        num *= Rat::from_integer(factorial(b as u64 - 1));
    }
    num / rising(&(theta + rat(1)), pi.n() - 1)
}

/// Laplace transform of the total tree length at `theta/2`:
/// `E[exp(-theta L_n / 2)] = (n-1)! / [theta+1]_{n-1}`.
pub fn total_length_laplace(n: u32, theta: &Rat) -> Rat {
    assert!(n >= 2, "need at least two leaves");
    Rat::from_integer(factorial(n as u64 - 1))
        / rising(&(theta + rat(1)), n - 1)
}

/// Density of the level of the first cut:
/// `((n-1)!/[theta+1]_{n-1}) * sum_{i=1}^{n-1} 1/(i+theta)`.
pub fn theta_density(theta: f64, n: u32) -> f64 {
    assert!(n >= 2 && theta > 0.0);
    let mut poch = 1.0;
    for m in 1..n {
        poch *= theta + m as f64;
    }
    let mut s = 0.0;
    for i in 1..n {
        s += 1.0 / (i as f64 + theta);
    }
    let fact = to_f64(&Rat::from_integer(factorial(n as u64 - 1)));
    fact / poch * s
}

/// Exact rational value of the same density at a rational level.
pub fn theta_density_rat(theta: &Rat, n: u32) -> Rat {
    assert!(n >= 2 && theta.is_positive());
    let mut s = rat(0);
    for i in 1..n {
        s += (theta + rat(i as i64)).recip();
    }
    Rat::from_integer(factorial(n as u64 - 1)) / rising(&(theta + rat(1)), n - 1) * s
}

/// Partial-fraction coefficients of
/// `1 / ((theta + i) * prod_{m=1}^{n-1} (theta + m))`:
/// simple-pole coefficients `a_m` for each `m`, and the double-pole
/// coefficient `b` at `theta = -i`.
fn pole_coefficients(n: u32, i: u32) -> (Vec<Rat>, Rat) {
    assert!(n >= 2 && i >= 1 && i < n);
    let ir = rat(i as i64);
    let mut b = rat(1);
    for m in 1..n {
        if m != i {
            b /= rat(m as i64) - &ir;
        }
    }
    let mut a = vec![rat(0); n as usize];
    for m in 1..n {
        if m == i {
            let mut s = rat(0);
            for l in 1..n {
                if l != i {
                    s += (rat(l as i64) - &ir).recip();
                }
            }
            a[i as usize] = -&b * s;
        } else {
            let mr = rat(m as i64);
            let mut v = (&ir - &mr) * (&ir - &mr);
            for l in 1..n {
                if l != i && l != m {
                    v *= rat(l as i64) - &mr;
                }
            }
            a[m as usize] = v.recip();
        }
    }
    debug_assert_eq!(
        a.iter().fold(rat(0), |acc, x| acc + x),
        rat(0),
        "simple-pole coefficients must sum to zero"
    );
    (a, b)
}

/// `int_0^U dtheta / ((theta + i) [theta+1]_{n-1})` exactly, as a rational
/// combination of logarithms of integers. `None` integrates over the whole
/// half-line.
pub fn stratum_integral(n: u32, i: u32, upper: Option<u64>) -> LogCombo {
    let (a, b) = pole_coefficients(n, i);
    let mut out = LogCombo::zero();
    match upper {
        None => {
            // Antiderivative sum_m a_m ln(theta+m) - b/(theta+i); the log
            // terms cancel at infinity because the a_m sum to zero.
            for m in 1..n as usize {
                out.add_log(m as u64, &-&a[m]);
            }
            out.add_constant(&(&b / rat(i as i64)));
        }
        Some(u) => {
            for m in 1..n as u64 {
                out.add_log(u + m, &a[m as usize]);
                out.add_log(m, &-&a[m as usize]);
            }
            let at_zero = &b / rat(i as i64);
            let at_u = &b / (rat(u as i64) + rat(i as i64));
            out.add_constant(&(at_zero - at_u));
        }
    }
    out
}

/// `P(I = i, Theta <= u)`: the chance that the first cut lands in stratum
/// `i` at level at most `u`.
pub fn joint_stratum_theta_cdf(n: u32, i: u32, upper: u64) -> LogCombo {
    stratum_integral(n, i, Some(upper)).scaled(&Rat::from_integer(factorial(n as u64 - 1)))
}

/// `P(I = i)`: the marginal chance that the first cut lands in stratum `i`.
pub fn stratum_probability(n: u32, i: u32) -> LogCombo {
    stratum_integral(n, i, None).scaled(&Rat::from_integer(factorial(n as u64 - 1)))
}

/// `P(Theta <= u)` for an integer bound, exactly.
pub fn theta_cdf(n: u32, upper: u64) -> LogCombo {
    let mut out = LogCombo::zero();
    for i in 1..n {
        out = out + &joint_stratum_theta_cdf(n, i, upper);
    }
    out
}

/// Conditional stratum law of the first cut given its level:
/// `P(I = i | Theta = theta)` proportional to `1/(i + theta)`.
pub fn stratum_given_theta(n: u32, i: u32, theta: &Rat) -> Rat {
    assert!(n >= 2 && i >= 1 && i < n && theta.is_positive());
    let mut denom = rat(0);
    for j in 1..n {
        denom += (theta + rat(j as i64)).recip();
    }
    (theta + rat(i as i64)).recip() / denom
}

/// Probability that the first split equals a fixed two-block partition with
/// block sizes `(n1, n - n1)`, conditional on the cut landing in stratum
/// `i`.
pub fn split_given_stratum(n: u32, n1: u32, i: u32) -> Rat {
    assert!(n >= 2 && n1 >= 1 && n1 < n && i >= 1 && i < n);
    let n2 = n - n1;
    let beta = Rat::from_integer(
        binomial(n1 as u64 - 1, i as u64 - 1) + binomial(n2 as u64 - 1, i as u64 - 1),
    );
    beta / Rat::from_integer(binomial(n as u64, n1 as u64) * binomial(n as u64 - 1, i as u64))
}

/// `P(first split = pi | Theta = theta)` for a fixed two-block partition
/// with block sizes `(n1, n - n1)`; exact rational in `theta`.
pub fn split_given_theta(n: u32, n1: u32, theta: &Rat) -> Rat {
    let mut out = rat(0);
    for i in 1..n {
        out += split_given_stratum(n, n1, i) * stratum_given_theta(n, i, theta);
    }
    out
}

/// Probability that the first split equals a fixed two-block partition with
/// block sizes `(n1, n - n1)`, exactly, by integrating the level out.
pub fn first_split_partition_exact(n: u32, n1: u32) -> LogCombo {
    assert!(n >= 2 && n1 >= 1 && n1 < n);
    let n2 = n - n1;
    let mut out = LogCombo::zero();
    for i in 1..n {
        let beta = Rat::from_integer(
            binomial(n1 as u64 - 1, i as u64 - 1) + binomial(n2 as u64 - 1, i as u64 - 1),
        );
        let coeff = beta / Rat::from_integer(binomial(n as u64 - 1, i as u64));
        out = out + &stratum_integral(n, i, None).scaled(&coeff);
    }
    let pre = Rat::from_integer(factorial(n as u64 - 1))
        / Rat::from_integer(binomial(n as u64, n1 as u64));
    out.scaled(&pre)
}

/// Exact per-partition first-split probabilities by shape, for
/// `n1 = 1 ..= n/2`.
pub fn first_split_exact(n: u32) -> Vec<(u32, LogCombo)> {
    (1..=n / 2)
        .map(|n1| (n1, first_split_partition_exact(n, n1)))
        .collect()
}

/// Law of the size of a fair-coin-picked block of the first split:
/// `P(J = j) = C(n, j)/2 * p(pi)` for `j = 1..n-1`, where `p(pi)` is the
/// per-partition probability at shape `{j, n-j}`. The same formula covers
/// `j = n/2`, where the coin cannot matter.
pub fn first_split_j_exact(n: u32) -> Vec<LogCombo> {
    (1..n)
        .map(|j| {
            let n1 = j.min(n - j);
            let count = Rat::from_integer(binomial(n as u64, j as u64)) / rat(2);
            first_split_partition_exact(n, n1).scaled(&count)
        })
        .collect()
}

/// `P(J = 1)` for the first split, exactly.
pub fn j_theta_exact(n: u32) -> LogCombo {
    first_split_j_exact(n)
        .into_iter()
        .next()
        .expect("n >= 2 gives at least one size")
}

/// The alternating closed form for `P(J = 1)`:
/// `1/2 (n-1)! sum_{i=1}^{n-1} a_i ln i + 1/2` with
/// `a_i = (-1)^{i-1} C(n, i-1) / n!`.
///
/// This form does not reproduce [`j_theta_exact`]; quadrature and
/// simulation side with the integral. It is kept so the disagreement is
/// checkable rather than asserted.
pub fn j_theta_general(n: u32) -> LogCombo {
    assert!(n >= 3);
    let mut out = LogCombo::from_constant(ratio(1, 2));
    for i in 1..n {
        let mut coeff =
            Rat::from_integer(binomial(n as u64, i as u64 - 1)) / rat(2 * n as i64);
        if i % 2 == 0 {
            coeff = -coeff;
        }
        out.add_log(i as u64, &coeff);
    }
    out
}

/// Per-partition first-split probability by adaptive quadrature of the
/// level integral, for a shape `(n1, n - n1)`.
pub fn first_split_quadrature(n: u32, n1: u32) -> Result<f64, KingmanError> {
    assert!(n >= 2 && n1 >= 1 && n1 < n);
    let n2 = n - n1;
    let mut coeffs = Vec::new();
    for i in 1..n {
        let beta = binomial(n1 as u64 - 1, i as u64 - 1) + binomial(n2 as u64 - 1, i as u64 - 1);
        let c = to_f64(&(Rat::from_integer(beta)
            / Rat::from_integer(binomial(n as u64 - 1, i as u64))));
        coeffs.push(c);
    }
    let pre = to_f64(
        &(Rat::from_integer(factorial(n as u64 - 1))
            / Rat::from_integer(binomial(n as u64, n1 as u64))),
    );
    let r = quad::integrate_zero_to_inf(
        move |theta| {
            let mut poch = 1.0;
            for m in 1..n {
                poch *= theta + m as f64;
            }
            let mut s = 0.0;
            for (idx, c) in coeffs.iter().enumerate() {
                s += c / (theta + (idx + 1) as f64);
            }
            pre * s / poch
        },
        QUAD_TOL,
    )?;
    Ok(r.value)
}

/// The law of the first split over two-block set partitions, by quadrature.
pub fn first_split_pmf(n: u32) -> Result<BTreeMap<SetPartition, f64>, KingmanError> {
    if n < 2 {
        return Err(KingmanError::TooFewLeaves(n));
    }
    let mut by_shape = BTreeMap::new();
    for n1 in 1..=n / 2 {
        by_shape.insert(n1, first_split_quadrature(n, n1)?);
    }
    let mut out = BTreeMap::new();
    for pi in enumerate_set_partitions(n, Some(2))? {
        let smallest = *pi.shape().parts().last().expect("two blocks");
        out.insert(pi, by_shape[&smallest]);
    }
    Ok(out)
}

/// `P(J = 1)` under the two-block Gibbs law with weights `(j-1)!`:
/// `n / (2 (n-1) H_{n-1})`.
pub fn gibbs_first_split_reference(n: u32) -> Rat {
    assert!(n >= 2);
    let h: Rat = (1..n).map(|j| ratio(1, j as i64)).sum();
    ratio(n as i64, 2 * (n as i64 - 1)) / h
}

/// The full fair-coin block-size law under the same Gibbs reference,
/// indexed by `j = 1..n-1`.
pub fn gibbs_reference_j_law(n: u32) -> Result<Vec<Rat>, KingmanError> {
    let w = WeightSequence::cycles(n);
    let spec = GibbsSpec::micro(n, 2, &w)?;
    let mut out = Vec::new();
    for j in 1..n {
        let inside: Vec<u32> = (1..=j).collect();
        let outside: Vec<u32> = (j + 1..=n).collect();
        let pi = SetPartition::from_blocks(n, &[inside, outside])?;
        let p = spec.pmf_set(&pi).prob;
        out.push(Rat::from_integer(binomial(n as u64, j as u64)) / rat(2) * p);
    }
    Ok(out)
}

/// Draws a uniform permutation of `[n]` with exactly `k` cycles.
///
/// Element `m` either opens its own cycle, with probability
/// `c(m-1, j-1) / c(m, j)` for unsigned Stirling numbers `c`, or is
/// inserted after a uniform earlier element; the Stirling ratios come from
/// the Bell table of the cycle weights, since `c(m, j) = B_{m,j}((j-1)!)`.
pub fn sample_uniform_perm_with_k_cycles<R: Rng + ?Sized>(
    n: u32,
    k: u32,
    rng: &mut R,
) -> Result<Permutation, KingmanError> {
    if k < 1 || k > n {
        return Err(KingmanError::InvalidK { n, k });
    }
    let w = WeightSequence::cycles(n.max(1));
    let table = BellTable::build(&w, n);
    let mut insert_after: Vec<Option<u32>> = vec![None; n as usize + 1];
    let mut j = k;
    for m in (2..=n).rev() {
        let p_own = table.bell(m - 1, j - 1) / table.bell(m, j);
        if bernoulli(rng, &p_own) {
            j -= 1;
        } else {
            insert_after[m as usize] = Some(rng.gen_range(1..m));
        }
    }
    debug_assert_eq!(j, 1, "element 1 always opens the final cycle");
    let mut succ: Vec<u32> = (0..=n).collect();
    for m in 2..=n as usize {
        if let Some(x) = insert_after[m] {
            succ[m] = succ[x as usize];
            succ[x as usize] = m as u32;
        }
    }
    Ok(Permutation::from_one_line(succ[1..].to_vec())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigdec::{approx_eq, parse_decimal};
    use crate::gibbs::tabulate_set_law;
    use crate::stats::{chi_square_gof, rng_stream, z_score, EmpiricalDist, GofReport};
    use crate::weights::bell_two;

    const SEED: u64 = 0xC0FFEE;

    fn combo(constant: Rat, logs: &[(u64, Rat)]) -> LogCombo {
        let mut c = LogCombo::from_constant(constant);
        for (m, coeff) in logs {
            c.add_log(*m, coeff);
        }
        c
    }

    #[test]
    fn tree_structure_and_lengths() {
        let mut rng = rng_stream(SEED, 51);
        for _ in 0..50 {
            let tree = simulate_kingman_tree(6, &mut rng);
            assert_eq!(tree.vertex_count(), 11);
            assert_eq!(tree.members(tree.root()), &[1, 2, 3, 4, 5, 6]);
            for v in 0..6 {
                assert_eq!(tree.time(v), 0.0);
                assert_eq!(tree.members(v), &[v as u32 + 1]);
            }
            // Merge times increase and every merger unites its children.
            for v in 6..11 {
                if v > 6 {
                    assert!(tree.time(v) > tree.time(v - 1));
                }
                let (a, b) = (0..11)
                    .filter(|&u| tree.parent(u) == Some(v))
                    .fold((None, None), |(x, y), u| match x {
                        None => (Some(u), y),
                        Some(_) => (x, Some(u)),
                    });
                let (a, b) = (a.unwrap(), b.unwrap());
                let mut union: Vec<u32> = tree
                    .members(a)
                    .iter()
                    .chain(tree.members(b))
                    .copied()
                    .collect();
                union.sort_unstable();
                assert_eq!(tree.members(v), union.as_slice());
            }
            let strata = tree.strata_lengths();
            assert_eq!(strata.len(), 5);
            let total: f64 = strata.iter().sum();
            assert!((total - tree.total_length()).abs() < 1e-9);

            // Skeleton states refine downward from singletons to the whole.
            let mut prev = tree.skeleton_partition(6).unwrap();
            assert_eq!(prev, SetPartition::singletons(6));
            for k in (1..6).rev() {
                let cur = tree.skeleton_partition(k).unwrap();
                assert_eq!(cur.k(), k);
                assert!(prev.refines(&cur));
                prev = cur;
            }
            assert_eq!(prev, SetPartition::whole(6));
        }
    }

    #[test]
    fn pair_tree_length_and_laplace_transform() {
        let mut rng = rng_stream(SEED, 52);
        // L_2 = 2 Exp(1): mean 2, sd 2.
        let n_draws = 20_000u64;
        let mean: f64 = (0..n_draws)
            .map(|_| simulate_kingman_tree(2, &mut rng).total_length())
            .sum::<f64>()
            / n_draws as f64;
        assert!(z_score(mean, 2.0, 2.0, n_draws).abs() < 3.0, "mean {mean}");

        // E[exp(-L_4/2)] = 3!/[2]_3 = 1/4, second moment 3!/[3]_3 = 1/10.
        let m1 = to_f64(&total_length_laplace(4, &rat(1)));
        let m2 = to_f64(&total_length_laplace(4, &rat(2)));
        assert!((m1 - 0.25).abs() < 1e-12 && (m2 - 0.1).abs() < 1e-12);
        let sd = (m2 - m1 * m1).sqrt();
        let sample: f64 = (0..n_draws)
            .map(|_| (-simulate_kingman_tree(4, &mut rng).total_length() / 2.0).exp())
            .sum::<f64>()
            / n_draws as f64;
        assert!(z_score(sample, m1, sd, n_draws).abs() < 3.0, "mean {sample}");
    }

    #[test]
    fn skeleton_states_follow_factorial_weights() {
        let mut rng = rng_stream(SEED, 53);
        let w = WeightSequence::segments(5);
        let spec = GibbsSpec::micro(5, 3, &w).unwrap();
        let law = tabulate_set_law(&spec).unwrap();
        let mut emp = EmpiricalDist::new();
        for _ in 0..30_000 {
            let tree = simulate_kingman_tree(5, &mut rng);
            emp.observe(tree.skeleton_partition(3).unwrap());
        }
        let report = chi_square_gof(&emp, law.as_map(), 5.0).unwrap();
        assert!(
            report.accepts(GofReport::THREE_SIGMA_ALPHA),
            "chi2 {} dof {}",
            report.statistic,
            report.dof
        );
    }

    #[test]
    fn allelic_partitions_refine_and_follow_ewens() {
        let mut rng = rng_stream(SEED, 54);

        // Path-by-path: at level 0 the whole block; sweeping the distinct
        // cut levels refines one binary split at a time down to singletons.
        for _ in 0..200 {
            let tree = simulate_kingman_tree(5, &mut rng);
            let cuts = sample_cut_schedule(&tree, &mut rng);
            assert_eq!(allelic_partition(&tree, &cuts, 0.0), SetPartition::whole(5));
            let mut levels: Vec<f64> = (0..tree.vertex_count() - 1)
                .map(|v| cuts.first_cut_level(v))
                .collect();
            levels.sort_by(f64::total_cmp);
            let mut prev = SetPartition::whole(5);
            for level in levels {
                let cur = allelic_partition(&tree, &cuts, level);
                if cur != prev {
                    // A newly active cut is either invisible or splits one
                    // block in two.
                    assert!(cur.refines(&prev));
                    assert_eq!(cur.k(), prev.k() + 1);
                    prev = cur;
                }
            }
            assert_eq!(prev, SetPartition::singletons(5));

            // The first cut reproduces the first visible refinement.
            let fc = first_cut(&tree, &cuts);
            let at_first = allelic_partition(&tree, &cuts, fc.theta);
            assert_eq!(at_first, split_partition(&tree, fc.vertex));
            assert!(fc.stratum >= 1 && fc.stratum < 5);
        }

        // Marginal at a fixed level matches the Ewens formula.
        let law = EwensSpec::new(4, rat(1)).unwrap().law().unwrap();
        let mut emp = EmpiricalDist::new();
        for _ in 0..30_000 {
            let tree = simulate_kingman_tree(4, &mut rng);
            let cuts = sample_cut_schedule(&tree, &mut rng);
            emp.observe(allelic_partition(&tree, &cuts, 1.0));
        }
        let report = chi_square_gof(&emp, law.as_map(), 5.0).unwrap();
        assert!(
            report.accepts(GofReport::THREE_SIGMA_ALPHA),
            "chi2 {} dof {}",
            report.statistic,
            report.dof
        );
    }

    #[test]
    fn ewens_closed_forms() {
        // n = 3 over the five partitions: (2, th, th, th, th^2) divided by
        // (th+1)(th+2).
        let th = ratio(3, 7);
        let denom = (&th + rat(1)) * (&th + rat(2));
        let whole = SetPartition::whole(3);
        assert_eq!(ewens_pmf(&whole, &th), rat(2) / &denom);
        assert_eq!(
            ewens_pmf(&SetPartition::singletons(3), &th),
            &th * &th / &denom
        );
        let mut pair_mass = rat(0);
        for pi in enumerate_set_partitions(3, Some(2)).unwrap() {
            let p = ewens_pmf(&pi, &th);
            assert_eq!(p, &th / &denom);
            pair_mass += p;
        }
        assert_eq!(
            pair_mass + ewens_pmf(&whole, &th) + ewens_pmf(&SetPartition::singletons(3), &th),
            rat(1)
        );

        // n = 2, theta = 1: singletons take mass 1/2.
        assert_eq!(ewens_pmf(&SetPartition::singletons(2), &rat(1)), ratio(1, 2));

        // The law normalizes (RationalDist validates the total).
        let spec = EwensSpec::new(5, ratio(3, 2)).unwrap();
        let law = spec.law().unwrap();

        // Conditioned on the block count the law is the cycle-weight Gibbs
        // microcanonical one.
        for k in 2..=4u32 {
            let mut cond: BTreeMap<SetPartition, Rat> = BTreeMap::new();
            let mut mass = rat(0);
            for (pi, p) in law.iter() {
                if pi.k() == k {
                    cond.insert(pi.clone(), p.clone());
                    mass += p;
                }
            }
            let micro = GibbsSpec::micro(5, k, &WeightSequence::cycles(5)).unwrap();
            for (pi, p) in &cond {
                assert_eq!(p / &mass, micro.pmf_set(pi).prob, "k={k}");
            }
        }

        assert!(EwensSpec::new(4, rat(0)).is_err());
        assert!(EwensSpec::new(0, rat(1)).is_err());
    }

    #[test]
    fn density_normalizes_and_integrals_cancel() {
        // n = 2: density 1/(1+theta)^2 exactly.
        let th = ratio(3, 2);
        assert_eq!(
            theta_density_rat(&th, 2),
            ((&th + rat(1)) * (&th + rat(1))).recip()
        );

        // The stratum masses are exact and total exactly one: every log
        // term cancels across strata.
        for n in 2..=8u32 {
            let mut total = LogCombo::zero();
            for i in 1..n {
                total = total + &stratum_probability(n, i);
            }
            assert!(total.is_rational(), "n={n}: logs must cancel");
            assert_eq!(total.constant(), &rat(1), "n={n}");
        }

        // Quadrature of the density agrees.
        for n in 3..=8u32 {
            let r = quad::integrate_zero_to_inf(move |t| theta_density(t, n), 1e-10).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "n={n} got {}", r.value);
        }

        // Finite-level CDF: exact form vs quadrature on [0, 1], and
        // monotonicity in the bound.
        let cdf1 = theta_cdf(4, 1);
        let r = quad::integrate(|t| theta_density(t, 4), 1e-12, 1.0, 1e-10).unwrap();
        assert!((cdf1.eval_f64() - r.value).abs() < 1e-8);
        let cdf2 = theta_cdf(4, 2);
        assert!(cdf2.eval_f64() > cdf1.eval_f64());
        assert!(cdf2.eval_f64() < 1.0);
    }

    #[test]
    fn conditional_laws_are_probabilities() {
        let th = ratio(5, 3);
        for n in [3u32, 5, 6] {
            let total: Rat = (1..n).map(|i| stratum_given_theta(n, i, &th)).sum();
            assert_eq!(total, rat(1), "stratum law n={n}");

            // Summing the conditional split law over every two-block
            // partition gives one: C(n, n1) partitions per unordered shape,
            // halved when the two block sizes coincide.
            let mut total = rat(0);
            for n1 in 1..=n / 2 {
                let mut count = Rat::from_integer(binomial(n as u64, n1 as u64));
                if n1 * 2 == n {
                    count /= rat(2);
                }
                total += count * split_given_theta(n, n1, &th);
            }
            assert_eq!(total, rat(1), "split law n={n}");
        }
    }

    #[test]
    fn first_split_exact_matches_frozen_values() {
        // Exact per-partition values, canonical over primes.
        assert_eq!(
            first_split_partition_exact(4, 1),
            combo(ratio(1, 4), &[(2, ratio(1, 2)), (3, ratio(-3, 8))])
        );
        assert_eq!(
            first_split_partition_exact(4, 2),
            combo(rat(0), &[(2, ratio(-2, 3)), (3, ratio(1, 2))])
        );
        assert_eq!(
            first_split_partition_exact(5, 1),
            combo(ratio(1, 5), &[(2, ratio(34, 15)), (3, ratio(-3, 2))])
        );
        assert_eq!(
            first_split_partition_exact(5, 2),
            combo(rat(0), &[(2, ratio(-17, 15)), (3, ratio(3, 4))])
        );
        assert_eq!(
            first_split_partition_exact(6, 1),
            combo(
                ratio(1, 6),
                &[(2, ratio(62, 9)), (3, ratio(-7, 2)), (5, ratio(-5, 8))]
            )
        );
        assert_eq!(
            first_split_partition_exact(6, 2),
            combo(
                rat(0),
                &[(2, ratio(-76, 45)), (3, ratio(4, 5)), (5, ratio(7, 36))]
            )
        );
        assert_eq!(
            first_split_partition_exact(6, 3),
            combo(
                rat(0),
                &[(2, ratio(-8, 5)), (3, ratio(9, 10)), (5, ratio(1, 12))]
            )
        );

        // 55-digit decimal check for one value.
        let p41 = first_split_partition_exact(4, 1).eval(55);
        let fixture = parse_decimal(
            "0.1845939820294315204353990968831411447949411079965965827",
        )
        .unwrap();
        assert!(approx_eq(&p41, &fixture, 53));

        // The full law has total mass exactly one for every n up to 10.
        for n in 2..=10u32 {
            let mut total = LogCombo::zero();
            for (n1, p) in first_split_exact(n) {
                let mut count = Rat::from_integer(binomial(n as u64, n1 as u64));
                if n1 * 2 == n {
                    count /= rat(2);
                }
                total = total + &p.scaled(&count);
            }
            assert!(total.is_rational(), "n={n}");
            assert_eq!(total.constant(), &rat(1), "n={n}");
        }
    }

    #[test]
    fn picked_block_law_is_symmetric_and_pinned() {
        let js = first_split_j_exact(4);
        assert_eq!(js.len(), 3);
        assert_eq!(js[0], js[2]);
        assert_eq!(
            js[0],
            combo(ratio(1, 2), &[(2, rat(1)), (3, ratio(-3, 4))])
        );
        let j1 = parse_decimal(
            "0.3691879640588630408707981937662822895898822159931931653",
        )
        .unwrap();
        let j2 = parse_decimal(
            "0.2616240718822739182584036124674354208202355680136136694",
        )
        .unwrap();
        assert!(approx_eq(&js[0].eval(55), &j1, 53));
        assert!(approx_eq(&js[1].eval(55), &j2, 53));
        assert_eq!(j_theta_exact(4), js[0]);

        // P(J = 1) at n = 3 is 1/2 exactly.
        let j3 = j_theta_exact(3);
        assert!(j3.is_rational());
        assert_eq!(j3.constant(), &ratio(1, 2));

        // Sizes sum to one for a spread of n.
        for n in 2..=9u32 {
            let total = first_split_j_exact(n)
                .into_iter()
                .fold(LogCombo::zero(), |acc, x| acc + &x);
            assert!(total.is_rational() && total.constant() == &rat(1), "n={n}");
        }
    }

    #[test]
    fn alternating_form_disagrees_with_the_integral() {
        // The alternating sum gives 1/2 - (1/2) ln 2 + (3/4) ln 3 at n = 4,
        // about 0.9774; the integral gives 1/2 + ln 2 - (3/4) ln 3, about
        // 0.3692. Were they equal, 2 and 3 would satisfy a rational
        // log-linear relation forcing e^q rational, which transcendence of
        // e forbids; the gap is wide and checkable.
        let general = j_theta_general(4);
        assert_eq!(
            general,
            combo(ratio(1, 2), &[(2, ratio(-1, 2)), (3, ratio(3, 4))])
        );
        assert!((general.eval_f64() - 0.97738563).abs() < 1e-6);
        assert_ne!(general, j_theta_exact(4));

        let g3 = j_theta_general(3);
        assert_eq!(g3, combo(ratio(1, 2), &[(2, ratio(-1, 2))]));
        assert_ne!(g3, j_theta_exact(3));
    }

    #[test]
    fn gibbs_reference_values() {
        assert_eq!(gibbs_first_split_reference(3), ratio(1, 2));
        assert_eq!(gibbs_first_split_reference(4), ratio(4, 11));
        let law = gibbs_reference_j_law(4).unwrap();
        assert_eq!(law, vec![ratio(4, 11), ratio(3, 11), ratio(4, 11)]);
        assert_eq!(law[0], gibbs_first_split_reference(4));
        let total: Rat = gibbs_reference_j_law(6).unwrap().into_iter().sum();
        assert_eq!(total, rat(1));

        // B_{n,2} for the cycle weights is (n-1)! H_{n-1}.
        for n in 3..=10u32 {
            let w = WeightSequence::cycles(n);
            let h: Rat = (1..n).map(|j| ratio(1, j as i64)).sum();
            assert_eq!(
                bell_two(n, &w),
                Rat::from_integer(factorial(n as u64 - 1)) * h
            );
        }

        // Total variation between the exact first-split size law and the
        // Gibbs reference at n = 4: exactly 2 ln 2 - (3/2) ln 3 + 3/11,
        // about 0.0111, far below 1/4.
        let js = first_split_j_exact(4);
        let refs = gibbs_reference_j_law(4).unwrap();
        let mut tv = LogCombo::zero();
        for (j, r) in js.iter().zip(&refs) {
            let mut diff = j.clone() - &LogCombo::from_constant(r.clone());
            if diff.eval_f64() < 0.0 {
                diff = -diff;
            }
            tv = tv + &diff;
        }
        let tv = tv.scaled(&ratio(1, 2));
        assert_eq!(tv, combo(ratio(3, 11), &[(2, rat(2)), (3, ratio(-3, 2))]));
        let pinned = parse_decimal(
            "0.01110320084499880901432366025983730645249170471365905791",
        )
        .unwrap();
        assert!(approx_eq(&tv.eval(55), &pinned, 53));
        assert!(tv.eval_f64() < 0.25);
    }

    #[test]
    fn quadrature_tracks_the_exact_integrals() {
        for n in 3..=8u32 {
            for n1 in 1..=n / 2 {
                let q = first_split_quadrature(n, n1).unwrap();
                let e = first_split_partition_exact(n, n1).eval_f64();
                assert!((q - e).abs() < 1e-8, "n={n} n1={n1}: {q} vs {e}");
            }
        }
        for n in [4u32, 5, 6] {
            let pmf = first_split_pmf(n).unwrap();
            let total: f64 = pmf.values().sum();
            assert!((total - 1.0).abs() < 1e-8, "n={n} total {total}");
        }
    }

    #[test]
    fn simulated_first_splits_match_the_exact_law() {
        let mut rng = rng_stream(SEED, 55);
        let n = 4u32;
        let draws = 60_000u32;

        // Build the expected law at high precision, then absorb the
        // truncation slack into the last atom so the masses sum to one.
        let mut law: BTreeMap<SetPartition, Rat> = BTreeMap::new();
        for pi in enumerate_set_partitions(n, Some(2)).unwrap() {
            let smallest = *pi.shape().parts().last().unwrap();
            law.insert(pi, first_split_partition_exact(n, smallest).eval(40));
        }
        let total: Rat = law.values().cloned().sum();
        let slack = rat(1) - total;
        if let Some(first) = law.values_mut().next() {
            *first += slack;
        }

        // Joint stratum and level cells, same fix-up.
        let mut joint: BTreeMap<(u32, bool), Rat> = BTreeMap::new();
        for i in 1..n {
            let below = joint_stratum_theta_cdf(n, i, 1).eval(40);
            let all = stratum_probability(n, i).eval(40);
            joint.insert((i, true), below.clone());
            joint.insert((i, false), all - below);
        }
        let total: Rat = joint.values().cloned().sum();
        let slack = rat(1) - total;
        if let Some(first) = joint.values_mut().next() {
            *first += slack;
        }

        let mut split_emp = EmpiricalDist::new();
        let mut joint_emp = EmpiricalDist::new();
        for _ in 0..draws {
            let (pi, fc) = sample_first_split(n, &mut rng);
            split_emp.observe(pi);
            joint_emp.observe((fc.stratum, fc.theta <= 1.0));
        }
        let r1 = chi_square_gof(&split_emp, &law, 5.0).unwrap();
        assert!(
            r1.accepts(GofReport::THREE_SIGMA_ALPHA),
            "split chi2 {} dof {}",
            r1.statistic,
            r1.dof
        );
        let r2 = chi_square_gof(&joint_emp, &joint, 5.0).unwrap();
        assert!(
            r2.accepts(GofReport::THREE_SIGMA_ALPHA),
            "joint chi2 {} dof {}",
            r2.statistic,
            r2.dof
        );
    }

    #[test]
    fn uniform_cycle_count_permutations() {
        let mut rng = rng_stream(SEED, 56);

        for n in 1..=7u32 {
            let p = sample_uniform_perm_with_k_cycles(n, n, &mut rng).unwrap();
            assert_eq!(p, Permutation::identity(n));
        }
        assert!(sample_uniform_perm_with_k_cycles(4, 0, &mut rng).is_err());
        assert!(sample_uniform_perm_with_k_cycles(4, 5, &mut rng).is_err());

        // n = 3, k = 1: the two 3-cycles, equally likely.
        let mut counts: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        let draws = 4000u32;
        for _ in 0..draws {
            let p = sample_uniform_perm_with_k_cycles(3, 1, &mut rng).unwrap();
            assert_eq!(p.cycle_count(), 1);
            *counts.entry(p.one_line().to_vec()).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 2);
        let first = *counts.values().next().unwrap() as f64;
        // Binomial(4000, 1/2): 3 sigma is about 95.
        assert!((first - 2000.0).abs() < 95.0, "count {first}");

        // n = 6, k = 3: induced cycle types follow the microcanonical
        // cycle-weight law.
        let spec = GibbsSpec::micro(6, 3, &WeightSequence::cycles(6)).unwrap();
        let mut law = BTreeMap::new();
        for shape in crate::partition::enumerate_integer_partitions(6, 3) {
            let p = spec.pmf_int(&shape).prob;
            law.insert(shape, p);
        }
        let mut emp = EmpiricalDist::new();
        for _ in 0..30_000 {
            let p = sample_uniform_perm_with_k_cycles(6, 3, &mut rng).unwrap();
            assert_eq!(p.cycle_count(), 3);
            emp.observe(p.cycle_type());
        }
        let report = chi_square_gof(&emp, &law, 5.0).unwrap();
        assert!(
            report.accepts(GofReport::THREE_SIGMA_ALPHA),
            "chi2 {} dof {}",
            report.statistic,
            report.dof
        );
    }
}
