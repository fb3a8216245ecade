//! Existence of Gibbs fragmentation chains, decided by exact max-flow.
//!
//! A fragmentation chain with prescribed Gibbs marginals exists iff each
//! consecutive pair of marginals admits a coupling supported on one-split
//! refinements. That marginal problem is a transportation feasibility
//! question, answered here by max-flow on the bipartite graph whose left
//! nodes are integer partitions with `k` parts, right nodes those with
//! `k + 1` parts, and arcs the single-part splits. Flow value exactly 1
//! means the step is feasible; otherwise the min cut produces a set `A` of
//! coarse partitions whose probability exceeds that of every fine partition
//! reachable from `A`, a certificate that no coupling exists.
//!
//! Working on integer partitions instead of set partitions keeps the graphs
//! tiny (627 nodes at `n = 20` instead of around `5 * 10^13`); this is
//! justified by exchangeability of the Gibbs laws and cross-checked against
//! the set-partition formulation for small `n`. Stepwise feasibility is
//! treated as equivalent to existence of the whole chain: couplings for the
//! individual steps compose into a Markov chain with the right marginals.
//!
//! All arithmetic is exact: capacities are scaled to a common denominator
//! and the augmenting-path search runs on big integers, so verdicts carry
//! no rounding caveats.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::gibbs::{GibbsError, GibbsSpec};
use crate::numeric::{format_rat, rat, Int, Rat};
use crate::partition::{
    enumerate_integer_partitions, enumerate_set_partitions, IntegerPartition, PartitionError,
};
use crate::weights::WeightSequence;

/// Cap for the set-partition formulation of the feasibility check.
pub const SET_LEVEL_CAP: u32 = 7;

/// Errors from feasibility checks.
#[derive(Debug, Error)]
pub enum ExistenceError {
    /// Steps go from `k` parts to `k + 1`, so `1 <= k <= n - 1`.
    #[error("need 1 <= k <= n-1, got k={k} at n={n}")]
    InvalidK {
        /// Ground set size.
        n: u32,
        /// Coarse level.
        k: u32,
    },
    /// Gibbs marginals need positive weights.
    #[error("w_{0} must be positive")]
    NonpositiveWeight(u32),
    /// The set-partition check enumerates Bell-many nodes.
    #[error("set-partition feasibility capped at n={SET_LEVEL_CAP}, got {0}")]
    TooLarge(u32),
    /// Propagated marginal construction failure.
    #[error(transparent)]
    Gibbs(#[from] GibbsError),
    /// Propagated enumeration failure.
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

// ---------------------------------------------------------------------------
// Exact max-flow
// ---------------------------------------------------------------------------

/// A directed flow network with exact rational capacities.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    num_nodes: usize,
    source: usize,
    sink: usize,
    arcs: Vec<(usize, usize, Rat)>,
}

/// Outcome of a max-flow computation.
#[derive(Debug, Clone)]
pub struct FlowResult {
    /// The exact flow value.
    pub value: Rat,
    /// Flow on each arc, in insertion order.
    pub arc_flows: Vec<Rat>,
    /// Nodes reachable from the source in the final residual graph; the
    /// source side of a minimum cut.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    /// An empty network on `num_nodes` nodes.
    pub fn new(num_nodes: usize, source: usize, sink: usize) -> Self {
        assert!(
            source < num_nodes && sink < num_nodes && source != sink,
            "source and sink must be distinct nodes"
        );
        Self {
            num_nodes,
            source,
            sink,
            arcs: Vec::new(),
        }
    }

    /// Adds a directed arc with nonnegative capacity.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: Rat) {
        assert!(from < self.num_nodes && to < self.num_nodes && from != to);
        assert!(!cap.is_negative(), "capacities must be nonnegative");
        self.arcs.push((from, to, cap));
    }

    /// Runs breadth-first augmenting paths to optimality. Capacities are
    /// scaled by the common denominator so every intermediate quantity is an
    /// integer; arc insertion order fixes the search order, so the result is
    /// deterministic.
    pub fn solve(&self) -> FlowResult {
        let scale = self
            .arcs
            .iter()
            .fold(Int::one(), |acc, (_, _, c)| acc.lcm(c.denom()));
        // Residual arcs 2i (forward) and 2i+1 (backward) for input arc i.
        let mut residual: Vec<Int> = Vec::with_capacity(2 * self.arcs.len());
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.num_nodes];
        for (i, (from, to, cap)) in self.arcs.iter().enumerate() {
            residual.push((cap * &scale).to_integer());
            residual.push(Int::zero());
            adj[*from].push(2 * i);
            adj[*to].push(2 * i + 1);
        }
        let endpoint = |arc: usize| -> (usize, usize) {
            let (from, to, _) = self.arcs[arc / 2];
            if arc % 2 == 0 {
                (from, to)
            } else {
                (to, from)
            }
        };
        let mut total = Int::zero();
        let mut reachable = vec![false; self.num_nodes];
        loop {
            let mut prev_arc = vec![usize::MAX; self.num_nodes];
            reachable.iter_mut().for_each(|r| *r = false);
            reachable[self.source] = true;
            let mut queue = VecDeque::from([self.source]);
            while let Some(u) = queue.pop_front() {
                for &a in &adj[u] {
                    let (_, v) = endpoint(a);
                    if !reachable[v] && residual[a].is_positive() {
                        reachable[v] = true;
                        prev_arc[v] = a;
                        queue.push_back(v);
                    }
                }
            }
            if !reachable[self.sink] {
                break;
            }
            let mut bottleneck: Option<Int> = None;
            let mut cur = self.sink;
            while cur != self.source {
                let a = prev_arc[cur];
                if bottleneck.as_ref().is_none_or(|b| residual[a] < *b) {
                    bottleneck = Some(residual[a].clone());
                }
                cur = endpoint(a).0;
            }
            let push = bottleneck.expect("augmenting path has at least one arc");
            let mut cur = self.sink;
            while cur != self.source {
                let a = prev_arc[cur];
                residual[a] -= &push;
                residual[a ^ 1] += &push;
                cur = endpoint(a).0;
            }
            total += push;
        }
        let arc_flows = (0..self.arcs.len())
            .map(|i| Rat::new(residual[2 * i + 1].clone(), scale.clone()))
            .collect();
        FlowResult {
            value: Rat::new(total, scale),
            arc_flows,
            source_side: reachable,
        }
    }
}

/// The exact maximum flow value of the network.
pub fn max_flow(net: &FlowNetwork) -> Rat {
    net.solve().value
}

// ---------------------------------------------------------------------------
// Refinement graph
// ---------------------------------------------------------------------------

/// The bipartite one-split graph between integer partitions of `n` with `k`
/// parts and those with `k + 1` parts.
#[derive(Debug, Clone)]
pub struct RefinementGraph {
    n: u32,
    k: u32,
    coarse: Vec<IntegerPartition>,
    fine: Vec<IntegerPartition>,
    edges: Vec<(usize, usize)>,
}

impl RefinementGraph {
    /// Enumerates both levels and the single-part-split edges.
    pub fn build(n: u32, k: u32) -> Result<Self, ExistenceError> {
        if k == 0 || k >= n {
            return Err(ExistenceError::InvalidK { n, k });
        }
        let coarse = enumerate_integer_partitions(n, k);
        let fine = enumerate_integer_partitions(n, k + 1);
        let fine_index: BTreeMap<&IntegerPartition, usize> =
            fine.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut edges = Vec::new();
        for (i, lambda) in coarse.iter().enumerate() {
            for mu in one_split_images(lambda) {
                let j = fine_index[&mu];
                edges.push((i, j));
            }
        }
        // Merging any two parts of a fine partition yields a coarse
        // predecessor, so no fine node can be isolated.
        debug_assert!((0..fine.len()).all(|j| edges.iter().any(|&(_, e)| e == j)));
        Ok(Self {
            n,
            k,
            coarse,
            fine,
            edges,
        })
    }

    /// Ground set size.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Coarse level (number of parts).
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Partitions with `k` parts.
    pub fn coarse(&self) -> &[IntegerPartition] {
        &self.coarse
    }

    /// Partitions with `k + 1` parts.
    pub fn fine(&self) -> &[IntegerPartition] {
        &self.fine
    }

    /// One-split edges as `(coarse index, fine index)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// All partitions obtained by splitting a single part in two.
pub fn one_split_images(lambda: &IntegerPartition) -> BTreeSet<IntegerPartition> {
    let parts = lambda.parts();
    let mut out = BTreeSet::new();
    for (idx, &p) in parts.iter().enumerate() {
        if p < 2 || (idx > 0 && parts[idx - 1] == p) {
            continue;
        }
        for a in 1..=p / 2 {
            let mut next: Vec<u32> = Vec::with_capacity(parts.len() + 1);
            next.extend_from_slice(&parts[..idx]);
            next.extend_from_slice(&parts[idx + 1..]);
            next.push(a);
            next.push(p - a);
            out.insert(IntegerPartition::from_parts(next).expect("parts stay positive"));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Feasibility
// ---------------------------------------------------------------------------

/// A min-cut witness that no one-step coupling exists: the coarse partitions
/// in `coarse_set` carry strictly more probability than all fine partitions
/// reachable from them by a single split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutCertificate {
    /// The coarse level.
    pub k: u32,
    /// The violating set of `k`-part partitions.
    pub coarse_set: Vec<IntegerPartition>,
    /// Every one-split image of the violating set.
    pub fine_images: Vec<IntegerPartition>,
    /// Total `k`-marginal probability of `coarse_set`.
    pub coarse_mass: Rat,
    /// Total `k+1`-marginal probability of `fine_images`.
    pub fine_mass: Rat,
}

impl CutCertificate {
    /// Whether the recorded masses actually violate the coupling condition.
    pub fn shows_violation(&self) -> bool {
        self.coarse_mass > self.fine_mass
    }
}

/// Verdict for a single `k -> k+1` step.
#[derive(Debug, Clone)]
pub struct StepVerdict {
    /// The coarse level.
    pub k: u32,
    /// Whether a coupling exists.
    pub feasible: bool,
    /// The witness when it does not.
    pub certificate: Option<CutCertificate>,
}

/// Feasibility of all steps for one `n`.
#[derive(Debug, Clone)]
pub struct ExistenceReport {
    /// Ground set size.
    pub n: u32,
    /// Conjunction of the per-step verdicts.
    pub feasible: bool,
    /// Verdicts for `k = 1..n-1`.
    pub per_k: Vec<StepVerdict>,
}

impl ExistenceReport {
    /// JSON form of the full report, certificates nested per step.
    pub fn to_json(&self) -> serde_json::Value {
        let per_k: Vec<serde_json::Value> = self
            .per_k
            .iter()
            .map(|s| {
                serde_json::json!({
                    "k": s.k,
                    "feasible": s.feasible,
                    "certificate": s.certificate.as_ref().map(certificate_json),
                })
            })
            .collect();
        serde_json::json!({
            "n": self.n,
            "feasible": self.feasible,
            "per_k": per_k,
        })
    }
}

fn certificate_json(c: &CutCertificate) -> serde_json::Value {
    serde_json::json!({
        "k": c.k,
        "coarse_set": c.coarse_set.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "fine_images": c.fine_images.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "coarse_mass": format_rat(&c.coarse_mass),
        "fine_mass": format_rat(&c.fine_mass),
    })
}

fn check_positive(w: &WeightSequence, up_to: u32) -> Result<(), ExistenceError> {
    for j in 1..=up_to {
        if let Some(v) = w.get(j) {
            if !v.is_positive() {
                return Err(ExistenceError::NonpositiveWeight(j));
            }
        }
    }
    Ok(())
}

/// Decides whether the `k`-part Gibbs marginal can be coupled to the
/// `(k+1)`-part marginal across one-split edges. Returns the min-cut
/// certificate on failure.
pub fn one_step_feasible(
    n: u32,
    k: u32,
    w: &WeightSequence,
) -> Result<(bool, Option<CutCertificate>), ExistenceError> {
    let graph = RefinementGraph::build(n, k)?;
    check_positive(w, n - k + 1)?;
    let coarse_law = GibbsSpec::micro(n, k, w)?;
    let fine_law = GibbsSpec::micro(n, k + 1, w)?;
    let nc = graph.coarse().len();
    let nf = graph.fine().len();
    // Node layout: 0 source, 1 sink, then coarse, then fine.
    let mut net = FlowNetwork::new(2 + nc + nf, 0, 1);
    for (i, lambda) in graph.coarse().iter().enumerate() {
        net.add_arc(0, 2 + i, coarse_law.pmf_int(lambda).prob);
    }
    // Any capacity above the unit total supply acts as unbounded.
    for &(i, j) in graph.edges() {
        net.add_arc(2 + i, 2 + nc + j, rat(2));
    }
    for (j, mu) in graph.fine().iter().enumerate() {
        net.add_arc(2 + nc + j, 1, fine_law.pmf_int(mu).prob);
    }
    let result = net.solve();
    if result.value == Rat::one() {
        return Ok((true, None));
    }
    // Coarse nodes still reachable from the source sit above the cut; their
    // one-split images must also be reachable (middle arcs never saturate),
    // so those images' sink arcs are all in the cut and together carry less
    // capacity than the unserved supply.
    let coarse_set: Vec<IntegerPartition> = graph
        .coarse()
        .iter()
        .enumerate()
        .filter(|(i, _)| result.source_side[2 + i])
        .map(|(_, p)| p.clone())
        .collect();
    let mut images = BTreeSet::new();
    for lambda in &coarse_set {
        images.extend(one_split_images(lambda));
    }
    let coarse_mass: Rat = coarse_set.iter().map(|p| coarse_law.pmf_int(p).prob).sum();
    let fine_mass: Rat = images.iter().map(|p| fine_law.pmf_int(p).prob).sum();
    let certificate = CutCertificate {
        k,
        coarse_set,
        fine_images: images.into_iter().collect(),
        coarse_mass,
        fine_mass,
    };
    debug_assert!(certificate.shows_violation());
    Ok((false, Some(certificate)))
}

/// Runs every step `k = 1..n-1` and assembles the verdicts.
///
/// The first step is always feasible (the whole-set partition is the only
/// coarse node and every two-part partition is one of its splits), so it is
/// recorded without building a network; the remaining steps need weights
/// `w_1..w_{n-1}`.
pub fn exists_gibbs_frag(n: u32, w: &WeightSequence) -> Result<ExistenceReport, ExistenceError> {
    if n == 0 {
        return Err(ExistenceError::InvalidK { n, k: 0 });
    }
    let mut per_k = Vec::with_capacity(n as usize - 1);
    for k in 1..n {
        let (feasible, certificate) = if k == 1 {
            (true, None)
        } else {
            one_step_feasible(n, k, w)?
        };
        per_k.push(StepVerdict {
            k,
            feasible,
            certificate,
        });
    }
    Ok(ExistenceReport {
        n,
        feasible: per_k.iter().all(|s| s.feasible),
        per_k,
    })
}

/// Scans `n = 1..=n_max` and returns the first infeasible size, with its
/// report. Needs weights up to `n_max - 1`.
pub fn first_failing_n(
    w: &WeightSequence,
    n_max: u32,
) -> Result<Option<ExistenceReport>, ExistenceError> {
    for n in 1..=n_max {
        let report = exists_gibbs_frag(n, w)?;
        if !report.feasible {
            return Ok(Some(report));
        }
    }
    Ok(None)
}

/// The same feasibility question posed on set partitions, with arcs between
/// partitions in refinement relation. Exponentially larger than the integer
/// formulation, so capped at small `n`; exchangeability makes both answers
/// agree.
pub fn one_step_feasible_sets(n: u32, k: u32, w: &WeightSequence) -> Result<bool, ExistenceError> {
    if n > SET_LEVEL_CAP {
        return Err(ExistenceError::TooLarge(n));
    }
    if k == 0 || k >= n {
        return Err(ExistenceError::InvalidK { n, k });
    }
    check_positive(w, n - k + 1)?;
    let coarse = enumerate_set_partitions(n, Some(k))?;
    let fine = enumerate_set_partitions(n, Some(k + 1))?;
    let coarse_law = GibbsSpec::micro(n, k, w)?;
    let fine_law = GibbsSpec::micro(n, k + 1, w)?;
    let nc = coarse.len();
    let nf = fine.len();
    let mut net = FlowNetwork::new(2 + nc + nf, 0, 1);
    for (i, pi) in coarse.iter().enumerate() {
        net.add_arc(0, 2 + i, coarse_law.pmf_set(pi).prob);
    }
    for (j, sigma) in fine.iter().enumerate() {
        for (i, pi) in coarse.iter().enumerate() {
            if sigma.refines(pi) {
                net.add_arc(2 + i, 2 + nc + j, rat(2));
            }
        }
        net.add_arc(2 + nc + j, 1, fine_law.pmf_set(sigma).prob);
    }
    Ok(net.solve().value == Rat::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use crate::weights::{weights_bc, WeightSequence};

    fn uniform(n_max: u32) -> WeightSequence {
        WeightSequence::from_values(vec![Rat::one(); n_max as usize]).unwrap()
    }

    fn factorial_weights(n_max: u32) -> WeightSequence {
        let w = (1..=n_max as u64)
            .map(|j| Rat::from_integer(crate::numeric::factorial(j)))
            .collect();
        WeightSequence::from_values(w).unwrap()
    }

    #[test]
    fn max_flow_basics() {
        // Single arc carries its capacity.
        let mut net = FlowNetwork::new(2, 0, 1);
        net.add_arc(0, 1, ratio(3, 7));
        assert_eq!(max_flow(&net), ratio(3, 7));

        // Parallel arcs add.
        let mut net = FlowNetwork::new(2, 0, 1);
        net.add_arc(0, 1, ratio(1, 2));
        net.add_arc(0, 1, ratio(1, 2));
        assert_eq!(max_flow(&net), Rat::one());

        // A bottleneck in the middle limits the value, and the backward
        // residual lets flow reroute: the classic diamond.
        let mut net = FlowNetwork::new(4, 0, 3);
        net.add_arc(0, 1, rat(1));
        net.add_arc(0, 2, rat(1));
        net.add_arc(1, 2, rat(1));
        net.add_arc(1, 3, ratio(1, 3));
        net.add_arc(2, 3, ratio(5, 4));
        let result = net.solve();
        assert_eq!(result.value, ratio(1, 3) + ratio(5, 4));
        // Min cut separates the sink arcs.
        assert!(result.source_side[0] && result.source_side[1] && result.source_side[2]);
        assert!(!result.source_side[3]);
        // Flow is conserved at interior nodes.
        assert_eq!(&result.arc_flows[0] + &result.arc_flows[1], result.value);

        // Empty network.
        let net = FlowNetwork::new(2, 0, 1);
        assert_eq!(max_flow(&net), Rat::zero());
    }

    #[test]
    fn refinement_graph_structure() {
        let g = RefinementGraph::build(6, 2).unwrap();
        let parts = |p: &IntegerPartition| p.parts().to_vec();
        assert_eq!(
            g.coarse().iter().map(parts).collect::<Vec<_>>(),
            vec![vec![5, 1], vec![4, 2], vec![3, 3]]
        );
        assert_eq!(
            g.fine().iter().map(parts).collect::<Vec<_>>(),
            vec![vec![4, 1, 1], vec![3, 2, 1], vec![2, 2, 2]]
        );
        let named: BTreeSet<(Vec<u32>, Vec<u32>)> = g
            .edges()
            .iter()
            .map(|&(i, j)| (parts(&g.coarse()[i]), parts(&g.fine()[j])))
            .collect();
        let expected: BTreeSet<(Vec<u32>, Vec<u32>)> = [
            (vec![5, 1], vec![4, 1, 1]),
            (vec![5, 1], vec![3, 2, 1]),
            (vec![4, 2], vec![3, 2, 1]),
            (vec![4, 2], vec![2, 2, 2]),
            (vec![4, 2], vec![4, 1, 1]),
            (vec![3, 3], vec![3, 2, 1]),
        ]
        .into_iter()
        .collect();
        assert_eq!(named, expected);

        // Every fine partition has a predecessor, for a spread of sizes.
        for n in 2..=9u32 {
            for k in 1..n {
                let g = RefinementGraph::build(n, k).unwrap();
                for j in 0..g.fine().len() {
                    assert!(
                        g.edges().iter().any(|&(_, e)| e == j),
                        "isolated fine node at n={n} k={k}"
                    );
                }
            }
        }
        assert!(RefinementGraph::build(5, 5).is_err());
        assert!(RefinementGraph::build(5, 0).is_err());
    }

    #[test]
    fn small_cases_are_feasible() {
        // n=4, k=2, uniform: the unique 3-part partition is a split of both
        // coarse partitions.
        let w = uniform(6);
        let (ok, cert) = one_step_feasible(4, 2, &w).unwrap();
        assert!(ok && cert.is_none());

        // Factorial weights admit an explicit chain, so every step passes.
        let w = factorial_weights(8);
        for k in 1..4u32 {
            assert!(one_step_feasible(4, k, &w).unwrap().0, "k={k}");
        }
        for n in 1..=8u32 {
            assert!(exists_gibbs_frag(n, &w).unwrap().feasible, "n={n}");
        }

        // Any positive weights work for n <= 3.
        for values in [vec![rat(7)], vec![rat(1), rat(5)], vec![ratio(9, 2), rat(2)]] {
            let w = WeightSequence::from_values(values).unwrap();
            for n in 1..=3u32.min(w.n_max() + 1) {
                assert!(exists_gibbs_frag(n, &w).unwrap().feasible);
            }
        }

        // The explicit-network example: n=4, k=2, uniform.
        let report = exists_gibbs_frag(4, &uniform(4)).unwrap();
        assert!(report.feasible);
        assert_eq!(report.per_k.len(), 3);

        // An explicit k=1 run agrees with the recorded shortcut.
        let (ok, cert) = one_step_feasible(5, 1, &uniform(5)).unwrap();
        assert!(ok && cert.is_none());
    }

    #[test]
    fn product_weight_families_feasible_up_to_twelve() {
        for (b, c) in [(rat(0), rat(1)), (rat(1), rat(0)), (rat(1), rat(1))] {
            let w = weights_bc(12, &b, &c);
            for n in 1..=12u32 {
                assert!(
                    exists_gibbs_frag(n, &w).unwrap().feasible,
                    "b={b} c={c} n={n}"
                );
            }
        }
    }

    #[test]
    fn uniform_weights_fail_first_at_twenty() {
        let w = uniform(19);
        for n in [16u32, 17, 18, 19] {
            assert!(exists_gibbs_frag(n, &w).unwrap().feasible, "n={n}");
        }
        let report = exists_gibbs_frag(20, &w).unwrap();
        assert!(!report.feasible);
        let step = report
            .per_k
            .iter()
            .find(|s| !s.feasible)
            .expect("some step must fail");
        assert_eq!(step.k, 2);
        let cert = step.certificate.as_ref().unwrap();
        assert!(cert.shows_violation());

        // Independent of the solver: the halving set alone blocks the
        // coupling. Its one-split images are (10, 10-a, a).
        let coarse_law = GibbsSpec::micro(20, 2, &w).unwrap();
        let fine_law = GibbsSpec::micro(20, 3, &w).unwrap();
        let halves = IntegerPartition::from_parts(vec![10, 10]).unwrap();
        let mass_a = coarse_law.pmf_int(&halves).prob;
        assert_eq!(mass_a, ratio(92378, 524287));
        let mut mass_images = Rat::zero();
        for mu in one_split_images(&halves) {
            mass_images += fine_law.pmf_int(&mu).prob;
        }
        assert_eq!(mass_images, ratio(354926, 2182731));
        assert!(mass_a > mass_images);

        // The solver's certificate must contain that violation in substance:
        // recompute its masses from scratch.
        let recomputed_coarse: Rat = cert
            .coarse_set
            .iter()
            .map(|p| coarse_law.pmf_int(p).prob)
            .sum();
        let recomputed_fine: Rat = cert
            .fine_images
            .iter()
            .map(|p| fine_law.pmf_int(p).prob)
            .sum();
        assert_eq!(recomputed_coarse, cert.coarse_mass);
        assert_eq!(recomputed_fine, cert.fine_mass);

        // JSON report carries the verdict.
        let json = report.to_json();
        assert_eq!(json["n"], 20);
        assert_eq!(json["feasible"], false);
        assert!(json["per_k"][1]["certificate"]["coarse_set"].is_array());
    }

    #[test]
    fn spiked_weights_fail_small_and_set_level_agrees() {
        // A large w_3 concentrates the 2-part marginal on (3,3), whose only
        // refinement is (3,2,1); overloading it blocks the coupling at n=6.
        let spiked = WeightSequence::from_values(vec![
            rat(1),
            rat(1),
            rat(1000),
            rat(1),
            rat(1),
            rat(1),
        ])
        .unwrap();
        let (ok, cert) = one_step_feasible(6, 2, &spiked).unwrap();
        assert!(!ok);
        let cert = cert.unwrap();
        assert!(cert.shows_violation());
        assert!(cert
            .coarse_set
            .contains(&IntegerPartition::from_parts(vec![3, 3]).unwrap()));
        assert!(!exists_gibbs_frag(6, &spiked).unwrap().feasible);

        // The set-partition formulation agrees step by step.
        for n in 2..=6u32 {
            for k in 1..n {
                let int_verdict = one_step_feasible(n, k, &spiked).unwrap().0;
                let set_verdict = one_step_feasible_sets(n, k, &spiked).unwrap();
                assert_eq!(int_verdict, set_verdict, "spiked n={n} k={k}");
            }
        }
        let w = uniform(7);
        for n in 2..=7u32 {
            for k in 1..n {
                let int_verdict = one_step_feasible(n, k, &w).unwrap().0;
                let set_verdict = one_step_feasible_sets(n, k, &w).unwrap();
                assert_eq!(int_verdict, set_verdict, "uniform n={n} k={k}");
            }
        }
        assert!(matches!(
            one_step_feasible_sets(8, 2, &uniform(8)),
            Err(ExistenceError::TooLarge(8))
        ));
    }

    #[test]
    fn image_sets_grow_monotonically() {
        // Spot-check the structural fact behind the cut certificate: the
        // image of a union is the union of images.
        for n in 4..=8u32 {
            for k in 2..n {
                let g = RefinementGraph::build(n, k).unwrap();
                let images: Vec<BTreeSet<IntegerPartition>> =
                    g.coarse().iter().map(one_split_images).collect();
                let m = g.coarse().len();
                for mask in 0u32..(1 << m) {
                    let mut union = BTreeSet::new();
                    for (i, img) in images.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            union.extend(img.iter().cloned());
                        }
                    }
                    for (i, img) in images.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            assert!(img.is_subset(&union));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nonpositive_weights_rejected() {
        let w = WeightSequence::from_values(vec![rat(1), rat(0), rat(1)]).unwrap();
        assert!(matches!(
            one_step_feasible(4, 2, &w),
            Err(ExistenceError::NonpositiveWeight(2))
        ));
    }
}
