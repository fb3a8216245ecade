//! Conditioned Galton-Watson plane trees and random edge-cutting forests.
//!
//! A critical ingredient throughout: every unconditioned tree probability has
//! the form `rational * p_0^(#t)`, where `p_0` is the probability of zero
//! children. The `p_0` power is carried symbolically ([`ScaledProb`]), so all
//! conditioned laws, which are ratios at a fixed power, come out as exact
//! rationals even for families like Poisson whose pmf is transcendental.
//!
//! The offspring families with ratios `p_j / p_0 = (1/j!) prod (b - (i-2)c)`
//! connect these trees to the product-weight Gibbs chains: cutting random
//! edges of a size-`n` conditioned tree reproduces the fragmentation process,
//! and the module provides exact enumerative checks of that correspondence.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::frag::FragPath;
use crate::gibbs::RationalDist;
use crate::numeric::{binomial, factorial, rat, Int, Rat};
use crate::partition::SetPartition;
use crate::stats::{ExactSampler, StatsError};
use crate::weights::{BellTable, WeightSequence};

/// Cap on exhaustive plane-tree enumeration (Catalan growth).
pub const TREE_ENUM_CAP: u32 = 10;

/// Size limit for rejection sampling of conditioned trees; larger sizes use
/// the exact recursive sampler.
pub const REJECTION_CAP: u32 = 50;

const REJECTION_ATTEMPT_CAP: u32 = 100_000;

/// Errors from tree construction, offspring families, and forest laws.
#[derive(Debug, Error)]
pub enum GwError {
    /// An explicit pmf fails validation.
    #[error("offspring pmf invalid: {0}")]
    InvalidPmf(String),
    /// Parameters violate a family precondition.
    #[error("offspring parameters invalid: {0}")]
    InvalidParams(String),
    /// The ratio product turns negative, first at this index.
    #[error("offspring ratio first negative at j={0}")]
    NegativeAt(u32),
    /// Ratios grow too fast for any probability normalization.
    #[error("offspring family with c <= -1 is not normalizable")]
    NotNormalizable,
    /// No tree of the requested size has positive probability.
    #[error("no tree of size {0} has positive probability")]
    ZeroProbability(u32),
    /// The rate `r_m` needs `p_m > 0`.
    #[error("rate r_{0} undefined: p_{0} = 0")]
    UndefinedRate(u32),
    /// A ratio beyond the precomputed horizon was requested.
    #[error("offspring ratios stored up to j={horizon}, needed j={needed}")]
    HorizonExceeded {
        /// Requested index.
        needed: u32,
        /// Stored maximum.
        horizon: u32,
    },
    /// Exhaustive enumeration refused above the cap.
    #[error("plane tree enumeration needs 1 <= n <= {TREE_ENUM_CAP}, got {0}")]
    EnumerationTooLarge(u32),
    /// Unparseable serialized tree.
    #[error("cannot parse plane tree: {0}")]
    BadParens(String),
    /// Other argument errors.
    #[error("{0}")]
    InvalidArg(String),
    /// Propagated sampling failure.
    #[error(transparent)]
    Stats(#[from] StatsError),
}

// ---------------------------------------------------------------------------
// Plane trees and forests
// ---------------------------------------------------------------------------

/// A rooted tree whose children are ordered left to right.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaneTree {
    children: Vec<PlaneTree>,
}

impl PlaneTree {
    /// A single node.
    pub fn leaf() -> Self {
        Self { children: vec![] }
    }

    /// A root with the given ordered subtrees.
    pub fn node(children: Vec<PlaneTree>) -> Self {
        Self { children }
    }

    /// Ordered subtrees of the root.
    pub fn children(&self) -> &[PlaneTree] {
        &self.children
    }

    /// Number of nodes.
    pub fn size(&self) -> u32 {
        1 + self.children.iter().map(PlaneTree::size).sum::<u32>()
    }

    /// Number of edges, `size - 1`.
    pub fn edge_count(&self) -> u32 {
        self.size() - 1
    }

    /// Child counts of every node in depth-first (preorder) order.
    pub fn child_counts(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.collect_counts(&mut out);
        out
    }

    fn collect_counts(&self, out: &mut Vec<u32>) {
        out.push(self.children.len() as u32);
        for c in &self.children {
            c.collect_counts(out);
        }
    }

    /// Preorder parent index of every node; entry 0 (the root) is 0.
    fn parents_preorder(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.size() as usize];
        let mut counter = 0usize;
        self.walk_parents(0, &mut counter, &mut out);
        out
    }

    fn walk_parents(&self, my_id: usize, counter: &mut usize, out: &mut Vec<usize>) {
        for c in &self.children {
            *counter += 1;
            let cid = *counter;
            out[cid] = my_id;
            c.walk_parents(cid, counter, out);
        }
    }

    /// Balanced-parenthesis serialization: a node is `(` followed by its
    /// children and a closing `)`. A single node is `()`.
    pub fn to_parens(&self) -> String {
        let mut s = String::new();
        self.write_parens(&mut s);
        s
    }

    fn write_parens(&self, s: &mut String) {
        s.push('(');
        for c in &self.children {
            c.write_parens(s);
        }
        s.push(')');
    }

    /// Parses the balanced-parenthesis form.
    pub fn from_parens(text: &str) -> Result<Self, GwError> {
        let mut stack: Vec<Vec<PlaneTree>> = Vec::new();
        let mut root: Option<PlaneTree> = None;
        for ch in text.chars() {
            match ch {
                '(' => stack.push(Vec::new()),
                ')' => {
                    let children = stack
                        .pop()
                        .ok_or_else(|| GwError::BadParens("unmatched ')'".into()))?;
                    let node = PlaneTree::node(children);
                    if let Some(top) = stack.last_mut() {
                        top.push(node);
                    } else if root.is_none() {
                        root = Some(node);
                    } else {
                        return Err(GwError::BadParens("multiple roots".into()));
                    }
                }
                c if c.is_whitespace() => {}
                c => return Err(GwError::BadParens(format!("unexpected '{c}'"))),
            }
        }
        if !stack.is_empty() {
            return Err(GwError::BadParens("unmatched '('".into()));
        }
        root.ok_or_else(|| GwError::BadParens("empty input".into()))
    }
}

impl fmt::Display for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_parens())
    }
}

/// An ordered sequence of plane trees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaneForest {
    trees: Vec<PlaneTree>,
}

impl PlaneForest {
    /// Wraps a nonempty tree sequence.
    pub fn new(trees: Vec<PlaneTree>) -> Result<Self, GwError> {
        if trees.is_empty() {
            return Err(GwError::InvalidArg("forest needs at least one tree".into()));
        }
        Ok(Self { trees })
    }

    /// The trees in order.
    pub fn trees(&self) -> &[PlaneTree] {
        &self.trees
    }

    /// Total node count.
    pub fn total_size(&self) -> u32 {
        self.trees.iter().map(PlaneTree::size).sum()
    }
}

impl fmt::Display for PlaneForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.trees.iter().map(PlaneTree::to_parens).collect();
        f.write_str(&parts.join("|"))
    }
}

/// All plane trees with `n` nodes, sorted by their parenthesis serialization.
pub fn enumerate_plane_trees(n: u32) -> Result<Vec<PlaneTree>, GwError> {
    if n == 0 || n > TREE_ENUM_CAP {
        return Err(GwError::EnumerationTooLarge(n));
    }
    let mut memo: Vec<Vec<PlaneTree>> = vec![Vec::new(); (n + 1) as usize];
    memo[1] = vec![PlaneTree::leaf()];
    for s in 2..=n as usize {
        let trees: Vec<PlaneTree> = forests_of_total(s - 1, &memo)
            .into_iter()
            .map(PlaneTree::node)
            .collect();
        memo[s] = trees;
    }
    let mut out = memo.swap_remove(n as usize);
    out.sort_by_key(PlaneTree::to_parens);
    Ok(out)
}

fn forests_of_total(total: usize, memo: &[Vec<PlaneTree>]) -> Vec<Vec<PlaneTree>> {
    if total == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=total {
        for t in &memo[first] {
            for rest in forests_of_total(total - first, memo) {
                let mut f = Vec::with_capacity(rest.len() + 1);
                f.push(t.clone());
                f.extend(rest);
                out.push(f);
            }
        }
    }
    out
}

/// All plane forests of exactly `k` trees and `n` total nodes, sorted by
/// serialization.
pub fn enumerate_plane_forests(n: u32, k: u32) -> Result<Vec<PlaneForest>, GwError> {
    if n == 0 || n > TREE_ENUM_CAP {
        return Err(GwError::EnumerationTooLarge(n));
    }
    if k == 0 || k > n {
        return Err(GwError::InvalidArg(format!("need 1 <= k <= n, got k={k}")));
    }
    let by_size: Vec<Vec<PlaneTree>> = (0..=n)
        .map(|s| {
            if s == 0 {
                Ok(Vec::new())
            } else {
                enumerate_plane_trees(s)
            }
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    fill_forest(n, k, &by_size, &mut prefix, &mut out);
    out.sort_by_key(|f| f.to_string());
    Ok(out)
}

fn fill_forest(
    remaining: u32,
    slots: u32,
    by_size: &[Vec<PlaneTree>],
    prefix: &mut Vec<PlaneTree>,
    out: &mut Vec<PlaneForest>,
) {
    if slots == 0 {
        if remaining == 0 {
            out.push(PlaneForest {
                trees: prefix.clone(),
            });
        }
        return;
    }
    for m in 1..=remaining.saturating_sub(slots - 1) {
        for t in &by_size[m as usize] {
            prefix.push(t.clone());
            fill_forest(remaining - m, slots - 1, by_size, prefix, out);
            prefix.pop();
        }
    }
}

/// The number of plane forests with `k` trees and `n` nodes,
/// `(k/n) C(2n-k-1, n-k)`.
pub fn plane_forest_count(n: u32, k: u32) -> Int {
    assert!(1 <= k && k <= n, "need 1 <= k <= n");
    let numer = Int::from(k) * binomial((2 * n - k - 1) as u64, (n - k) as u64);
    let (q, r) = num_integer::Integer::div_rem(&numer, &Int::from(n));
    debug_assert!(r.is_zero(), "forest count must be an integer");
    q
}

// ---------------------------------------------------------------------------
// Scaled probabilities
// ---------------------------------------------------------------------------

/// A probability of the form `coeff * p0^p0_power`, with the `p0` factor
/// symbolic. Ratios at equal powers are exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledProb {
    /// The rational factor.
    pub coeff: Rat,
    /// The power of `p_0` multiplying it.
    pub p0_power: u32,
}

impl ScaledProb {
    /// Builds from parts.
    pub fn new(coeff: Rat, p0_power: u32) -> Self {
        Self { coeff, p0_power }
    }

    /// Whether the probability is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// Exact ratio to another scaled probability. `None` when the powers
    /// differ (the `p0` factor would not cancel) or the denominator is zero.
    pub fn ratio_to(&self, other: &ScaledProb) -> Option<Rat> {
        if self.p0_power != other.p0_power || other.coeff.is_zero() {
            return None;
        }
        Some(&self.coeff / &other.coeff)
    }

    /// Exact value when `p_0` itself is rational.
    pub fn exact(&self, p0: &Rat) -> Rat {
        &self.coeff * crate::numeric::pow(p0, self.p0_power)
    }

    /// Floating approximation given an approximate `p_0`.
    pub fn approx(&self, p0: f64) -> f64 {
        crate::numeric::to_f64(&self.coeff) * p0.powi(self.p0_power as i32)
    }
}

// ---------------------------------------------------------------------------
// Offspring distributions
// ---------------------------------------------------------------------------

/// Closed-form family recognized from offspring parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OffspringFamily {
    /// `c = 0`: Poisson with the given mean.
    Poisson(Rat),
    /// `c > 0`, `b = (a-1)c` for a positive integer `a`: binomial(a, p).
    Binomial(u32, Rat),
    /// `-1 < c < 0`: negative binomial(r, p) with `p = c + 1` the
    /// zero-children parameter (`p_0 = p^r`).
    NegBinomial(Rat, Rat),
    /// A valid `(b, c)` ratio prefix with no recognized global completion.
    Bc(Rat, Rat),
    /// Explicitly supplied finite pmf.
    Explicit,
}

/// An offspring distribution, stored as exact ratios `rho_j = p_j / p_0` up
/// to a horizon, with `p_0` kept symbolic (and exactly, when available).
#[derive(Debug, Clone)]
pub struct OffspringDist {
    rho: Vec<Rat>,
    j1: Option<u32>,
    p0: Option<Rat>,
    family: OffspringFamily,
}

impl OffspringDist {
    /// The product-form family `p_j/p_0 = (1/j!) prod_{i=1}^j (b - (i-2)c)`,
    /// with ratios computed for `j <= horizon`.
    ///
    /// Requires `b + c > 0`. A factor of exactly zero ends the support; a
    /// negative partial product is rejected, naming the first bad index.
    /// Recognizes Poisson (`c = 0`), binomial (`c > 0`, integer `a`), and
    /// negative binomial (`-1 < c < 0`) completions.
    pub fn bc(b: &Rat, c: &Rat, horizon: u32) -> Result<Self, GwError> {
        if !(b + c).is_positive() {
            return Err(GwError::InvalidParams(format!(
                "need b + c > 0, got b={b}, c={c}"
            )));
        }
        if *c <= rat(-1) {
            return Err(GwError::NotNormalizable);
        }
        let mut rho = vec![Rat::one()];
        let mut product = Rat::one();
        let mut j1 = None;
        for j in 1..=horizon {
            if j1.is_none() {
                let factor = b - (rat(j as i64) - rat(2)) * c;
                product *= factor;
                if product.is_negative() {
                    return Err(GwError::NegativeAt(j));
                }
                if product.is_zero() {
                    j1 = Some(j);
                }
            }
            if j1.is_some() {
                rho.push(Rat::zero());
            } else {
                rho.push(&product / Rat::from_integer(factorial(j as u64)));
            }
        }
        let family = if c.is_zero() {
            OffspringFamily::Poisson(b.clone())
        } else if c.is_positive() {
            let a = b / c + Rat::one();
            if a.is_integer() && a.is_positive() {
                let a_int = u32::try_from(a.to_integer()).map_err(|_| {
                    GwError::InvalidParams("binomial parameter overflows".into())
                })?;
                OffspringFamily::Binomial(a_int, c / (c + Rat::one()))
            } else {
                OffspringFamily::Bc(b.clone(), c.clone())
            }
        } else {
            let r = (b + c) / (-c);
            OffspringFamily::NegBinomial(r, c + Rat::one())
        };
        let p0 = match &family {
            OffspringFamily::Binomial(a, p) => {
                Some(crate::numeric::pow(&(Rat::one() - p), *a))
            }
            OffspringFamily::NegBinomial(r, p) if r.is_integer() => {
                u32::try_from(r.to_integer())
                    .ok()
                    .map(|e| crate::numeric::pow(p, e))
            }
            _ => None,
        };
        Ok(Self {
            rho,
            j1,
            p0,
            family,
        })
    }

    /// An explicit finite-support offspring law; the masses are normalized.
    ///
    /// The support must be an initial segment: a zero mass followed by a
    /// positive one is rejected, since every identity here assumes
    /// `p_j > 0` exactly for `j` below a cutoff.
    pub fn explicit(masses: &[Rat]) -> Result<Self, GwError> {
        let mut trimmed = masses.to_vec();
        while trimmed.last().is_some_and(Zero::is_zero) {
            trimmed.pop();
        }
        if trimmed.is_empty() {
            return Err(GwError::InvalidPmf("no positive mass".into()));
        }
        if trimmed.iter().any(Rat::is_negative) {
            return Err(GwError::InvalidPmf("negative mass".into()));
        }
        if trimmed[0].is_zero() {
            return Err(GwError::InvalidPmf("p_0 must be positive".into()));
        }
        if let Some(gap) = trimmed.iter().position(Zero::is_zero) {
            return Err(GwError::InvalidPmf(format!(
                "support must be an initial segment; p_{gap} = 0 with later mass"
            )));
        }
        let total: Rat = trimmed.iter().sum();
        let p0 = &trimmed[0] / &total;
        let rho: Vec<Rat> = trimmed.iter().map(|m| m / &trimmed[0]).collect();
        let j1 = Some(rho.len() as u32);
        Ok(Self {
            rho,
            j1,
            p0: Some(p0),
            family: OffspringFamily::Explicit,
        })
    }

    /// The recognized family.
    pub fn family(&self) -> &OffspringFamily {
        &self.family
    }

    /// Largest `j` with a stored ratio.
    pub fn horizon(&self) -> u32 {
        (self.rho.len() - 1) as u32
    }

    /// The support cutoff, when one was detected: `p_j > 0` iff `j < j1`.
    pub fn j1(&self) -> Option<u32> {
        self.j1
    }

    /// Exact `p_0` when the family determines it as a rational.
    pub fn p0_exact(&self) -> Option<&Rat> {
        self.p0.as_ref()
    }

    /// Approximate `p_0` for display purposes.
    pub fn p0_approx(&self) -> f64 {
        if let Some(p0) = &self.p0 {
            return crate::numeric::to_f64(p0);
        }
        match &self.family {
            OffspringFamily::Poisson(b) => (-crate::numeric::to_f64(b)).exp(),
            OffspringFamily::NegBinomial(r, p) => crate::numeric::to_f64(p)
                .powf(crate::numeric::to_f64(r)),
            _ => f64::NAN,
        }
    }

    /// `rho_j = p_j / p_0`. Zero beyond a detected support cutoff; an error
    /// beyond the horizon for families whose support may continue.
    pub fn rho(&self, j: u32) -> Result<Rat, GwError> {
        if let Some(r) = self.rho.get(j as usize) {
            return Ok(r.clone());
        }
        if self.j1.is_some() {
            return Ok(Rat::zero());
        }
        Err(GwError::HorizonExceeded {
            needed: j,
            horizon: self.horizon(),
        })
    }

    /// The ratio `r_m = (m+1) p_{m+1} / p_m`.
    pub fn r(&self, m: u32) -> Result<Rat, GwError> {
        let pm = self.rho(m)?;
        if pm.is_zero() {
            return Err(GwError::UndefinedRate(m));
        }
        Ok(rat(m as i64 + 1) * self.rho(m + 1)? / pm)
    }

    /// The weight sequence whose exponential generating function inverts
    /// `z p_0 / g(z)`: `w_j = (j-1)! [z^(j-1)] R(z)^j` with
    /// `R(z) = sum_j rho_j z^j`. Needs ratios up to `n_max - 1`.
    pub fn weight_sequence(&self, n_max: u32) -> Result<WeightSequence, GwError> {
        let degree = (n_max - 1) as usize;
        let r_poly: Vec<Rat> = (0..=degree as u32)
            .map(|j| self.rho(j))
            .collect::<Result<_, _>>()?;
        let mut w = Vec::with_capacity(n_max as usize);
        let mut power = vec![Rat::one()];
        for j in 1..=n_max {
            power = poly_mul_trunc(&power, &r_poly, degree);
            let coeff = power.get(j as usize - 1).cloned().unwrap_or_else(Rat::zero);
            w.push(Rat::from_integer(factorial(j as u64 - 1)) * coeff);
        }
        WeightSequence::from_values(w)
            .map_err(|e| GwError::InvalidArg(format!("derived weights invalid: {e}")))
    }
}

fn poly_mul_trunc(a: &[Rat], b: &[Rat], degree: usize) -> Vec<Rat> {
    let len = (a.len() + b.len() - 1).min(degree + 1);
    let mut out = vec![Rat::zero(); len];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() || i > degree {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j > degree {
                break;
            }
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Tree and progeny laws
// ---------------------------------------------------------------------------

/// `P(T = t) = prod_v p_{n(v,t)}`, as `coeff * p_0^(#t)`.
pub fn tree_prob(t: &PlaneTree, off: &OffspringDist) -> Result<ScaledProb, GwError> {
    let mut coeff = Rat::one();
    for count in t.child_counts() {
        coeff *= off.rho(count)?;
        if coeff.is_zero() {
            break;
        }
    }
    Ok(ScaledProb::new(coeff, t.size()))
}

/// `P(F = f)` for independent trees: the product of the tree probabilities.
pub fn forest_prob(f: &PlaneForest, off: &OffspringDist) -> Result<ScaledProb, GwError> {
    let mut coeff = Rat::one();
    for t in f.trees() {
        let p = tree_prob(t, off)?;
        coeff *= p.coeff;
        if coeff.is_zero() {
            break;
        }
    }
    Ok(ScaledProb::new(coeff, f.total_size()))
}

/// `q(n) = P(#T = n) = p_0^n w_n / n!`.
pub fn q_n(n: u32, off: &OffspringDist) -> Result<ScaledProb, GwError> {
    if n == 0 {
        return Err(GwError::InvalidArg("tree size must be positive".into()));
    }
    let w = off.weight_sequence(n)?;
    Ok(ScaledProb::new(
        w.w(n) / Rat::from_integer(factorial(n as u64)),
        n,
    ))
}

/// The total-progeny law for `k` independent trees:
/// `P(#T_1 + ... + #T_k = n) = (k/n) [z^(n-k)] g(z)^n` as a scaled
/// probability `p_0^n (k/n) [z^(n-k)] R(z)^n`.
pub fn total_progeny_pmf(k: u32, n: u32, off: &OffspringDist) -> Result<ScaledProb, GwError> {
    if k == 0 || n == 0 {
        return Err(GwError::InvalidArg("need k >= 1 and n >= 1".into()));
    }
    if n < k {
        return Ok(ScaledProb::new(Rat::zero(), n));
    }
    let degree = (n - k) as usize;
    let r_poly: Vec<Rat> = (0..=degree as u32)
        .map(|j| off.rho(j))
        .collect::<Result<_, _>>()?;
    let mut power = vec![Rat::one()];
    for _ in 0..n {
        power = poly_mul_trunc(&power, &r_poly, degree);
    }
    let coeff = power.get(degree).cloned().unwrap_or_else(Rat::zero);
    Ok(ScaledProb::new(
        Rat::new(Int::from(k), Int::from(n)) * coeff,
        n,
    ))
}

/// `q_2(n) = sum_m q(m) q(n-m)`, the two-tree total-progeny law.
pub fn q_two(n: u32, off: &OffspringDist) -> Result<ScaledProb, GwError> {
    if n < 2 {
        return Ok(ScaledProb::new(Rat::zero(), n));
    }
    let mut coeff = Rat::zero();
    for m in 1..n {
        coeff += q_n(m, off)?.coeff * q_n(n - m, off)?.coeff;
    }
    Ok(ScaledProb::new(coeff, n))
}

/// `Sigma(t) = sum_v r_{n(v,t)}`.
pub fn sigma(t: &PlaneTree, off: &OffspringDist) -> Result<Rat, GwError> {
    let mut total = Rat::zero();
    for count in t.child_counts() {
        total += off.r(count)?;
    }
    Ok(total)
}

/// Checks the two-tree factorization identity behind the forest
/// correspondence: over every ordered pair of trees with `n` total nodes and
/// positive probability,
/// `pi(t1) pi(t2) (Sigma(t1)+Sigma(t2)) / (2 q(n) (n-1))` must equal
/// `pi(t1) pi(t2) / q_2(n)`. True exactly for the product offspring
/// families, false somewhere below `n` for anything else.
pub fn f2_exact_check(n: u32, off: &OffspringDist) -> Result<bool, GwError> {
    if n < 2 {
        return Err(GwError::InvalidArg("need n >= 2".into()));
    }
    let qn = q_n(n, off)?;
    let q2 = q_two(n, off)?;
    if qn.is_zero() || q2.is_zero() {
        return Err(GwError::ZeroProbability(n));
    }
    let by_size: Vec<Vec<PlaneTree>> = (0..n)
        .map(|s| {
            if s == 0 {
                Ok(Vec::new())
            } else {
                enumerate_plane_trees(s)
            }
        })
        .collect::<Result<_, _>>()?;
    let two = rat(2);
    let denom_split = &two * &qn.coeff * rat(n as i64 - 1);
    for m in 1..n {
        for t1 in &by_size[m as usize] {
            let p1 = tree_prob(t1, off)?;
            if p1.is_zero() {
                continue;
            }
            let s1 = sigma(t1, off)?;
            for t2 in &by_size[(n - m) as usize] {
                let p2 = tree_prob(t2, off)?;
                if p2.is_zero() {
                    continue;
                }
                let s2 = sigma(t2, off)?;
                let pp = &p1.coeff * &p2.coeff;
                let split_side = &pp * (&s1 + &s2) / &denom_split;
                let independent_side = &pp / &q2.coeff;
                if split_side != independent_side {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The exact law of `T` conditioned on `#T = n`, over serialized trees.
pub fn conditioned_tree_law(
    n: u32,
    off: &OffspringDist,
) -> Result<RationalDist<PlaneTree>, GwError> {
    let mut masses = BTreeMap::new();
    for t in enumerate_plane_trees(n)? {
        let p = tree_prob(&t, off)?;
        if !p.is_zero() {
            masses.insert(t, p.coeff);
        }
    }
    if masses.is_empty() {
        return Err(GwError::ZeroProbability(n));
    }
    Ok(RationalDist::from_masses(masses)?)
}

// ---------------------------------------------------------------------------
// Conditioned sampling
// ---------------------------------------------------------------------------

/// Samples trees conditioned on their size.
///
/// Finite-support families with small `n` use rejection from the
/// unconditioned process, aborting early once the running size exceeds `n`;
/// everything else (transcendental pmfs, large `n`, or a rejection budget
/// blowout) goes through an exact recursive sampler that draws the root
/// degree and child subtree sizes from conditioned laws, which are rational
/// ratios of Bell polynomial values.
pub struct ConditionedSampler {
    n: u32,
    pmf_sampler: Option<ExactSampler>,
    weights: WeightSequence,
    table: BellTable,
    rho: Vec<Rat>,
}

impl ConditionedSampler {
    /// Prepares tables for drawing trees with exactly `n` nodes.
    pub fn new(n: u32, off: &OffspringDist) -> Result<Self, GwError> {
        if n == 0 {
            return Err(GwError::InvalidArg("tree size must be positive".into()));
        }
        let weights = off.weight_sequence(n)?;
        if !weights.w(n).is_positive() {
            return Err(GwError::ZeroProbability(n));
        }
        let table = BellTable::build(&weights, n.max(2) - 1);
        let pmf_sampler = match off.j1() {
            Some(j1) if n <= REJECTION_CAP => {
                let masses: Vec<Rat> = (0..j1).map(|j| off.rho(j)).collect::<Result<_, _>>()?;
                Some(ExactSampler::new(&masses)?)
            }
            _ => None,
        };
        let rho: Vec<Rat> = (0..n).map(|j| off.rho(j)).collect::<Result<_, _>>()?;
        Ok(Self {
            n,
            pmf_sampler,
            weights,
            table,
            rho,
        })
    }

    /// Draws one tree with exactly `n` nodes from the conditioned law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PlaneTree {
        if let Some(pmf) = &self.pmf_sampler {
            for _ in 0..REJECTION_ATTEMPT_CAP {
                let mut budget = self.n as i64;
                if let Some(t) = grow_unconditioned(pmf, rng, &mut budget) {
                    if budget == 0 {
                        return t;
                    }
                }
            }
        }
        self.sample_sized(self.n, rng)
    }

    fn sample_sized<R: Rng + ?Sized>(&self, size: u32, rng: &mut R) -> PlaneTree {
        if size == 1 {
            return PlaneTree::leaf();
        }
        let s = size - 1;
        // Root degree d with mass rho_d d! B_{s,d}.
        let degree_masses: Vec<Rat> = (1..=s)
            .map(|d| {
                &self.rho[d as usize]
                    * Rat::from_integer(factorial(d as u64))
                    * self.table.bell(s, d)
            })
            .collect();
        let d = ExactSampler::new(&degree_masses)
            .expect("positive w_n forces a positive degree mass")
            .sample(rng) as u32
            + 1;
        let mut children = Vec::with_capacity(d as usize);
        let mut remaining = s;
        let mut slots = d;
        while slots > 0 {
            // Leftmost remaining child size m with mass
            // C(remaining, m) w_m B_{remaining-m, slots-1}.
            let size_masses: Vec<Rat> = (1..=remaining - (slots - 1))
                .map(|m| {
                    Rat::from_integer(binomial(remaining as u64, m as u64))
                        * self.weights.w(m)
                        * self.table.bell(remaining - m, slots - 1)
                })
                .collect();
            let m = ExactSampler::new(&size_masses)
                .expect("Bell recursion keeps the child-size masses positive")
                .sample(rng) as u32
                + 1;
            children.push(self.sample_sized(m, rng));
            remaining -= m;
            slots -= 1;
        }
        PlaneTree::node(children)
    }
}

fn grow_unconditioned<R: Rng + ?Sized>(
    pmf: &ExactSampler,
    rng: &mut R,
    budget: &mut i64,
) -> Option<PlaneTree> {
    *budget -= 1;
    if *budget < 0 {
        return None;
    }
    let d = pmf.sample(rng);
    let mut children = Vec::with_capacity(d);
    for _ in 0..d {
        children.push(grow_unconditioned(pmf, rng, budget)?);
    }
    Some(PlaneTree::node(children))
}

/// One-shot convenience for [`ConditionedSampler`].
pub fn sample_conditioned_tree<R: Rng + ?Sized>(
    n: u32,
    off: &OffspringDist,
    rng: &mut R,
) -> Result<PlaneTree, GwError> {
    Ok(ConditionedSampler::new(n, off)?.sample(rng))
}

// ---------------------------------------------------------------------------
// Edge cutting
// ---------------------------------------------------------------------------

/// Cuts `k - 1` edges of the tree, chosen uniformly without replacement, and
/// returns the resulting `k` subtrees in uniformly random order (the order
/// independent of the cut choice and the tree).
pub fn cut_forest<R: Rng + ?Sized>(
    tree: &PlaneTree,
    k: u32,
    rng: &mut R,
) -> Result<PlaneForest, GwError> {
    let n = tree.size();
    if k == 0 || k > n {
        return Err(GwError::InvalidArg(format!(
            "need 1 <= k <= {n} trees, got {k}"
        )));
    }
    // Edges are identified by the preorder id of their child endpoint.
    let mut ids: Vec<u32> = (1..n).collect();
    for pick in 0..(k - 1) as usize {
        let j = rng.gen_range(pick..ids.len());
        ids.swap(pick, j);
    }
    let cuts: Vec<u32> = ids[..(k - 1) as usize].to_vec();
    let mut trees = split_at_edges(tree, &cuts);
    // Uniform order over the k trees.
    for i in (1..trees.len()).rev() {
        let j = rng.gen_range(0..=i);
        trees.swap(i, j);
    }
    PlaneForest::new(trees)
}

/// Deterministic split: removes the edges whose child endpoints (preorder
/// ids) are listed, returning the root component first and the detached
/// fringe subtrees in discovery order.
fn split_at_edges(tree: &PlaneTree, cuts: &[u32]) -> Vec<PlaneTree> {
    let mut detached = Vec::new();
    let mut counter = 0u32;
    let root = rebuild(tree, cuts, &mut counter, &mut detached);
    let mut out = vec![root];
    out.extend(detached);
    out
}

fn rebuild(
    node: &PlaneTree,
    cuts: &[u32],
    counter: &mut u32,
    detached: &mut Vec<PlaneTree>,
) -> PlaneTree {
    let mut kept = Vec::new();
    for child in node.children() {
        *counter += 1;
        let child_id = *counter;
        let sub = rebuild(child, cuts, counter, detached);
        if cuts.contains(&child_id) {
            detached.push(sub);
        } else {
            kept.push(sub);
        }
    }
    PlaneTree::node(kept)
}

/// The exact law of [`cut_forest`] applied to a size-`n` conditioned tree:
/// enumerates trees, cut sets, and orders.
pub fn cut_forest_exact_law(
    n: u32,
    k: u32,
    off: &OffspringDist,
) -> Result<RationalDist<PlaneForest>, GwError> {
    if k == 0 || k > n {
        return Err(GwError::InvalidArg(format!("need 1 <= k <= n, got k={k}")));
    }
    let qn = q_n(n, off)?;
    if qn.is_zero() {
        return Err(GwError::ZeroProbability(n));
    }
    let cut_count = Rat::from_integer(binomial(n as u64 - 1, k as u64 - 1));
    let orders = permutations(k as usize);
    let order_count = Rat::from_integer(factorial(k as u64));
    let mut masses: BTreeMap<PlaneForest, Rat> = BTreeMap::new();
    for t in enumerate_plane_trees(n)? {
        let p = tree_prob(&t, off)?;
        if p.is_zero() {
            continue;
        }
        let tree_mass = &p.coeff / &qn.coeff / &cut_count / &order_count;
        for cuts in combinations(n - 1, k - 1) {
            let pieces = split_at_edges(&t, &cuts);
            for order in &orders {
                let forest = PlaneForest {
                    trees: order.iter().map(|&i| pieces[i].clone()).collect(),
                };
                *masses.entry(forest).or_insert_with(Rat::zero) += &tree_mass;
            }
        }
    }
    Ok(RationalDist::new(masses)?)
}

/// The law of `k` independent unconditioned trees given total size `n`, over
/// ordered forests.
pub fn independent_forest_law(
    n: u32,
    k: u32,
    off: &OffspringDist,
) -> Result<RationalDist<PlaneForest>, GwError> {
    let total = total_progeny_pmf(k, n, off)?;
    if total.is_zero() {
        return Err(GwError::ZeroProbability(n));
    }
    let mut masses: BTreeMap<PlaneForest, Rat> = BTreeMap::new();
    for forest in enumerate_plane_forests(n, k)? {
        let p = forest_prob(&forest, off)?;
        if !p.is_zero() {
            masses.insert(forest, &p.coeff / &total.coeff);
        }
    }
    Ok(RationalDist::new(masses)?)
}

// Edge ids are 1..=n-1; yields all (k-1)-subsets.
fn combinations(pool: u32, choose: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: u32, pool: u32, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..=pool.saturating_sub(left - 1) {
            cur.push(v);
            rec(v + 1, pool, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(1, pool, choose, &mut cur, &mut out);
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut items: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    heap_permute(&mut items, k, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

// ---------------------------------------------------------------------------
// From forests to partition chains
// ---------------------------------------------------------------------------

/// The exact law of the partition path obtained by labelling the nodes of a
/// size-`n` conditioned tree with a uniform random permutation, then cutting
/// its edges one at a time in uniform random order and reading off the label
/// sets of the components after each cut.
pub fn labelled_fragmentation_law(
    n: u32,
    off: &OffspringDist,
) -> Result<RationalDist<FragPath>, GwError> {
    if n == 0 || n > 6 {
        return Err(GwError::InvalidArg(
            "label/cut-order enumeration supported for 1 <= n <= 6".into(),
        ));
    }
    let qn = q_n(n, off)?;
    if qn.is_zero() {
        return Err(GwError::ZeroProbability(n));
    }
    let labelings = permutations(n as usize);
    let edge_orders = permutations(n as usize - 1);
    let per_tree = Rat::from_integer(factorial(n as u64) * factorial(n as u64 - 1));
    let mut masses: BTreeMap<FragPath, Rat> = BTreeMap::new();
    for t in enumerate_plane_trees(n)? {
        let p = tree_prob(&t, off)?;
        if p.is_zero() {
            continue;
        }
        let parents = t.parents_preorder();
        // Integer path counts first; one rational division per tree.
        let mut counts: BTreeMap<FragPath, u64> = BTreeMap::new();
        for labeling in &labelings {
            // labeling[id] + 1 is the label of preorder node id.
            for order in &edge_orders {
                let path = path_from_cut_order(n, &parents, labeling, order);
                *counts.entry(path).or_insert(0) += 1;
            }
        }
        let tree_mass = &p.coeff / &qn.coeff / &per_tree;
        for (path, count) in counts {
            *masses.entry(path).or_insert_with(Rat::zero) +=
                &tree_mass * Rat::from_integer(Int::from(count));
        }
    }
    Ok(RationalDist::new(masses)?)
}

// Builds the partition path by adding edges in reverse cut order (merging up
// from singletons), then flipping into fragmentation order.
fn path_from_cut_order(
    n: u32,
    parents: &[usize],
    labeling: &[usize],
    order: &[usize],
) -> FragPath {
    let mut uf: Vec<u32> = (0..n).collect();
    fn find(uf: &mut Vec<u32>, x: u32) -> u32 {
        let mut root = x;
        while uf[root as usize] != root {
            root = uf[root as usize];
        }
        let mut cur = x;
        while uf[cur as usize] != root {
            let next = uf[cur as usize];
            uf[cur as usize] = root;
            cur = next;
        }
        root
    }
    let mut states_rev = Vec::with_capacity(n as usize);
    states_rev.push(partition_from_uf(n, &uf));
    for &edge_pos in order.iter().rev() {
        let child_id = edge_pos + 1;
        let a = labeling[child_id] as u32;
        let b = labeling[parents[child_id]] as u32;
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        uf[ra as usize] = rb;
        states_rev.push(partition_from_uf(n, &uf));
    }
    states_rev.reverse();
    FragPath::from_states_unchecked(states_rev)
}

fn partition_from_uf(n: u32, uf: &[u32]) -> SetPartition {
    let mut block_of_root: BTreeMap<u32, u32> = BTreeMap::new();
    let mut rgs = Vec::with_capacity(n as usize);
    for e in 0..n {
        let mut root = e;
        while uf[root as usize] != root {
            root = uf[root as usize];
        }
        let next = block_of_root.len() as u32;
        rgs.push(*block_of_root.entry(root).or_insert(next));
    }
    SetPartition::from_rgs(rgs).expect("first-occurrence numbering is canonical")
}

// ---------------------------------------------------------------------------
// Affine rate tables
// ---------------------------------------------------------------------------

/// If `sum_i r(n_i)` takes the same value over every `n`-tuple with entries
/// in `{0, ..., r.len()-1}` summing to `n - 2`, returns that value.
pub fn constant_sum_over_tuples(r: &[Rat], n: u32) -> Option<Rat> {
    assert!(
        n >= 2 && !r.is_empty() && r.len() as u32 <= n - 1,
        "table domain must be {{0..j}} with 1 <= j <= n-2"
    );
    let mut seen: Option<Rat> = None;
    // Entries are exchangeable in the sum, so scanning non-increasing
    // tuples covers every case.
    let mut stack: Vec<(u32, u32, u32, Rat)> = vec![(n, n - 2, (r.len() - 1) as u32, Rat::zero())];
    while let Some((slots, target, max_entry, acc)) = stack.pop() {
        if slots == 0 {
            if target != 0 {
                continue;
            }
            match &seen {
                None => seen = Some(acc),
                Some(c) if *c != acc => return None,
                _ => {}
            }
            continue;
        }
        let cap = max_entry.min(target);
        for v in 0..=cap {
            // Remaining entries are at most v; prune when they cannot reach
            // the target.
            if (target - v) > v * (slots - 1) {
                continue;
            }
            stack.push((slots - 1, target - v, v, &acc + &r[v as usize]));
        }
    }
    seen
}

/// Whether the table is affine: `r(m) = r(0) + m (r(1) - r(0))`.
pub fn is_affine_table(r: &[Rat]) -> bool {
    if r.len() <= 2 {
        return true;
    }
    let step = &r[1] - &r[0];
    r.windows(2).all(|w| &w[1] - &w[0] == step)
}
