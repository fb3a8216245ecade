//! Set partitions, integer partitions, and permutations of `{1, ..., n}`.
//!
//! Ground sets are 1-based everywhere. A [`SetPartition`] is kept in canonical
//! form: elements ascending inside each block, blocks ordered by least
//! element. The canonical *order* on partitions of the same set is the
//! lexicographic order of their restricted-growth strings, which is also the
//! order in which [`enumerate_set_partitions`] yields them.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::numeric::{factorial, Int};

/// Largest `n` for which unguarded full enumeration of set partitions is
/// allowed by default; `B_12 = 4 213 597` is the practical ceiling.
pub const ENUMERATION_CAP: u32 = 12;

/// Errors from constructing or enumerating partition objects.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    /// The blocks do not form a partition of `{1, ..., n}`.
    #[error("blocks do not partition 1..={0}: {1}")]
    NotAPartition(u32, String),
    /// The ground set must be nonempty.
    #[error("empty ground set")]
    EmptyGroundSet,
    /// Enumeration request exceeds the guard cap.
    #[error("enumeration of n={0} exceeds cap {1}; raise the cap explicitly")]
    EnumerationTooLarge(u32, u32),
    /// Parts must be positive and sum to `n`.
    #[error("invalid integer partition: {0}")]
    InvalidParts(String),
    /// One-line permutation data is not a bijection on `1..=n`.
    #[error("not a permutation of 1..={0}")]
    NotAPermutation(u32),
    /// Element outside the ground set.
    #[error("element {0} outside 1..={1}")]
    OutOfRange(u32, u32),
}

// ---------------------------------------------------------------------------
// Set partitions
// ---------------------------------------------------------------------------

/// A partition of `{1, ..., n}` into nonempty blocks, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    n: u32,
    // Restricted growth string: rgs[i] is the block index of element i+1,
    // blocks numbered 0.. in order of least element. This is the canonical
    // representation; block lists are derived views.
    rgs: Vec<u32>,
}

impl SetPartition {
    /// Builds a partition from blocks, canonicalizing the input.
    pub fn from_blocks(n: u32, blocks: &[Vec<u32>]) -> Result<Self, PartitionError> {
        if n == 0 {
            return Err(PartitionError::EmptyGroundSet);
        }
        let mut owner: Vec<Option<usize>> = vec![None; n as usize];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(PartitionError::NotAPartition(n, "empty block".into()));
            }
            for &e in block {
                if e == 0 || e > n {
                    return Err(PartitionError::OutOfRange(e, n));
                }
                let slot = &mut owner[(e - 1) as usize];
                if slot.is_some() {
                    return Err(PartitionError::NotAPartition(
                        n,
                        format!("element {e} appears twice"),
                    ));
                }
                *slot = Some(b);
            }
        }
        if owner.iter().any(Option::is_none) {
            return Err(PartitionError::NotAPartition(n, "element missing".into()));
        }
        // Renumber blocks by least element to get the restricted growth string.
        let mut relabel: Vec<Option<u32>> = vec![None; blocks.len()];
        let mut next = 0u32;
        let mut rgs = Vec::with_capacity(n as usize);
        for e in 0..n as usize {
            let b = owner[e].unwrap();
            let lab = *relabel[b].get_or_insert_with(|| {
                let l = next;
                next += 1;
                l
            });
            rgs.push(lab);
        }
        Ok(Self { n, rgs })
    }

    /// The partition of `{1,...,n}` into singletons.
    pub fn singletons(n: u32) -> Self {
        Self {
            n,
            rgs: (0..n).collect(),
        }
    }

    /// The one-block partition `{{1,...,n}}`.
    pub fn whole(n: u32) -> Self {
        Self {
            n,
            rgs: vec![0; n as usize],
        }
    }

    /// Builds directly from a restricted growth string (`rgs[0] = 0`,
    /// `rgs[i] <= 1 + max(rgs[..i])`).
    pub fn from_rgs(rgs: Vec<u32>) -> Result<Self, PartitionError> {
        if rgs.is_empty() {
            return Err(PartitionError::EmptyGroundSet);
        }
        let n = rgs.len() as u32;
        let mut seen = 0u32;
        for &v in &rgs {
            if v > seen {
                return Err(PartitionError::NotAPartition(n, "not restricted-growth".into()));
            }
            if v == seen {
                seen += 1;
            }
        }
        Ok(Self { n, rgs })
    }

    /// Ground set size.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of blocks.
    pub fn k(&self) -> u32 {
        self.rgs.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// The restricted growth string (block index of each element, blocks
    /// numbered by least element).
    pub fn rgs(&self) -> &[u32] {
        &self.rgs
    }

    /// Blocks in canonical order (by least element), elements ascending.
    pub fn blocks(&self) -> Vec<Vec<u32>> {
        let k = self.k() as usize;
        let mut blocks = vec![Vec::new(); k];
        for (i, &b) in self.rgs.iter().enumerate() {
            blocks[b as usize].push(i as u32 + 1);
        }
        blocks
    }

    /// Block index (0-based, canonical numbering) containing element `e`.
    pub fn block_of(&self, e: u32) -> Result<u32, PartitionError> {
        if e == 0 || e > self.n {
            return Err(PartitionError::OutOfRange(e, self.n));
        }
        Ok(self.rgs[(e - 1) as usize])
    }

    /// Block sizes in canonical block order.
    pub fn block_sizes(&self) -> Vec<u32> {
        let k = self.k() as usize;
        let mut sizes = vec![0u32; k];
        for &b in &self.rgs {
            sizes[b as usize] += 1;
        }
        sizes
    }

    /// The multiset of block sizes as an integer partition.
    pub fn shape(&self) -> IntegerPartition {
        IntegerPartition::from_parts(self.block_sizes()).expect("block sizes partition n")
    }

    /// Whether every block of `self` is contained in a block of `other`
    /// (refinement partial order; reflexive).
    pub fn refines(&self, other: &SetPartition) -> bool {
        if self.n != other.n {
            return false;
        }
        // Two elements in one block of self must share a block in other.
        // Equivalently each self-block maps into a single other-block.
        let mut target: Vec<Option<u32>> = vec![None; self.k() as usize];
        for (i, &b) in self.rgs.iter().enumerate() {
            let o = other.rgs[i];
            match target[b as usize] {
                None => target[b as usize] = Some(o),
                Some(t) if t == o => {}
                Some(_) => return false,
            }
        }
        true
    }

    /// The partition with blocks `i` and `j` (canonical indices) merged.
    pub fn merge_blocks(&self, i: u32, j: u32) -> SetPartition {
        assert!(i != j && i < self.k() && j < self.k(), "invalid block pair");
        let (lo, hi) = (i.min(j), i.max(j));
        let rgs = self
            .rgs
            .iter()
            .map(|&b| if b == hi { lo } else { b })
            .collect::<Vec<_>>();
        // Relabeling may be needed: indices above hi shift down, and the
        // merged block keeps label lo only if lo is still first-seen in order.
        Self::from_rgs(renumber(rgs)).expect("merge preserves partition")
    }

    /// Replaces block `b` (canonical index) by the two halves of a split.
    /// `half` must be a nonempty proper subset of block `b`.
    pub fn split_block(&self, b: u32, half: &[u32]) -> Result<SetPartition, PartitionError> {
        let blocks = self.blocks();
        let block = blocks
            .get(b as usize)
            .ok_or(PartitionError::OutOfRange(b + 1, self.k()))?;
        let mut in_half = vec![false; self.n as usize + 1];
        for &e in half {
            if !block.contains(&e) {
                return Err(PartitionError::NotAPartition(
                    self.n,
                    format!("{e} not in block {b}"),
                ));
            }
            in_half[e as usize] = true;
        }
        if half.is_empty() || half.len() == block.len() {
            return Err(PartitionError::NotAPartition(
                self.n,
                "split half must be proper and nonempty".into(),
            ));
        }
        let mut new_blocks: Vec<Vec<u32>> = Vec::with_capacity(blocks.len() + 1);
        for (idx, blk) in blocks.iter().enumerate() {
            if idx as u32 == b {
                let (a, c): (Vec<u32>, Vec<u32>) =
                    blk.iter().partition(|&&e| in_half[e as usize]);
                new_blocks.push(a);
                new_blocks.push(c);
            } else {
                new_blocks.push(blk.clone());
            }
        }
        SetPartition::from_blocks(self.n, &new_blocks)
    }

    /// Parses the canonical text form `"{1,3}{2,4}"`.
    pub fn parse(s: &str) -> Result<Self, PartitionError> {
        let s = s.trim();
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        let mut max = 0u32;
        let inner = s
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| PartitionError::NotAPartition(0, format!("bad text: {s}")))?;
        for part in inner.split("}{") {
            let mut block = Vec::new();
            for tok in part.split(',') {
                let e: u32 = tok
                    .trim()
                    .parse()
                    .map_err(|_| PartitionError::NotAPartition(0, format!("bad element: {tok}")))?;
                max = max.max(e);
                block.push(e);
            }
            blocks.push(block);
        }
        SetPartition::from_blocks(max, &blocks)
    }
}

fn renumber(rgs: Vec<u32>) -> Vec<u32> {
    let mut relabel: BTreeMap<u32, u32> = BTreeMap::new();
    let mut next = 0;
    rgs.into_iter()
        .map(|b| {
            *relabel.entry(b).or_insert_with(|| {
                let l = next;
                next += 1;
                l
            })
        })
        .collect()
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in self.blocks() {
            write!(f, "{{")?;
            for (i, e) in block.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// All set partitions of `{1,...,n}`, optionally restricted to exactly `k`
/// blocks, in lexicographic restricted-growth-string order. Guards against
/// runaway enumeration beyond [`ENUMERATION_CAP`].
pub fn enumerate_set_partitions(
    n: u32,
    k: Option<u32>,
) -> Result<Vec<SetPartition>, PartitionError> {
    enumerate_set_partitions_with_cap(n, k, ENUMERATION_CAP)
}

/// As [`enumerate_set_partitions`] with an explicit cap.
pub fn enumerate_set_partitions_with_cap(
    n: u32,
    k: Option<u32>,
    cap: u32,
) -> Result<Vec<SetPartition>, PartitionError> {
    if n == 0 {
        return Err(PartitionError::EmptyGroundSet);
    }
    if n > cap {
        return Err(PartitionError::EnumerationTooLarge(n, cap));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0u32; n as usize];
    fn rec(rgs: &mut Vec<u32>, pos: usize, used: u32, n: u32, k: Option<u32>, out: &mut Vec<SetPartition>) {
        if pos == n as usize {
            if k.is_none_or(|k| used == k) {
                out.push(SetPartition {
                    n,
                    rgs: rgs.clone(),
                });
            }
            return;
        }
        let remaining = (n as usize - pos) as u32;
        for b in 0..=used {
            // Prune: blocks already open plus those still creatable must reach k.
            if let Some(k) = k {
                let will_open = if b == used { used + 1 } else { used };
                if will_open > k || will_open + remaining - 1 < k {
                    continue;
                }
            }
            rgs[pos] = b;
            rec(rgs, pos + 1, used.max(b + 1), n, k, out);
        }
    }
    rec(&mut rgs, 0, 0, n, k, &mut out);
    Ok(out)
}

/// Number of set partitions of `{1,...,n}` whose block-size multiset is
/// `shape`: `n! / prod_j c_j! (j!)^{c_j}` over multiplicities `c_j`.
pub fn count_set_partitions_of_shape(shape: &IntegerPartition) -> Int {
    let n = shape.n() as u64;
    let mut denom = Int::from(1);
    for (part, mult) in shape.counts() {
        denom *= factorial(mult as u64);
        let fp = factorial(part as u64);
        for _ in 0..mult {
            denom *= &fp;
        }
    }
    factorial(n) / denom
}

// ---------------------------------------------------------------------------
// Integer partitions
// ---------------------------------------------------------------------------

/// A partition of the integer `n` into positive parts, stored descending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerPartition {
    parts: Vec<u32>,
}

impl IntegerPartition {
    /// Builds from parts in any order; zero parts are rejected.
    pub fn from_parts(mut parts: Vec<u32>) -> Result<Self, PartitionError> {
        if parts.is_empty() {
            return Err(PartitionError::InvalidParts("no parts".into()));
        }
        if parts.iter().any(|&p| p == 0) {
            return Err(PartitionError::InvalidParts("zero part".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    /// The partitioned integer `n`.
    pub fn n(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Number of parts.
    pub fn k(&self) -> u32 {
        self.parts.len() as u32
    }

    /// Parts, descending.
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// `(part, multiplicity)` pairs, parts descending.
    pub fn counts(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Multiplicity of `part`.
    pub fn multiplicity(&self, part: u32) -> u32 {
        self.parts.iter().filter(|&&p| p == part).count() as u32
    }

    /// Parses the canonical text form `"3^1 1^2"` (also accepts bare parts
    /// like `"3 1 1"`).
    pub fn parse(s: &str) -> Result<Self, PartitionError> {
        let mut parts = Vec::new();
        for tok in s.split_whitespace() {
            let (p, m) = match tok.split_once('^') {
                Some((p, m)) => (
                    p.parse::<u32>()
                        .map_err(|_| PartitionError::InvalidParts(tok.into()))?,
                    m.parse::<u32>()
                        .map_err(|_| PartitionError::InvalidParts(tok.into()))?,
                ),
                None => (
                    tok.parse::<u32>()
                        .map_err(|_| PartitionError::InvalidParts(tok.into()))?,
                    1,
                ),
            };
            for _ in 0..m {
                parts.push(p);
            }
        }
        Self::from_parts(parts)
    }
}

impl fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, c)) in self.counts().iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{p}^{c}")?;
        }
        Ok(())
    }
}

/// All integer partitions of `n` with exactly `k` parts, in descending
/// lexicographic order of the part vectors.
pub fn enumerate_integer_partitions(n: u32, k: u32) -> Vec<IntegerPartition> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut acc: Vec<u32> = Vec::with_capacity(k as usize);
    fn rec(n: u32, k: u32, maxpart: u32, acc: &mut Vec<u32>, out: &mut Vec<IntegerPartition>) {
        if k == 0 {
            if n == 0 {
                out.push(IntegerPartition { parts: acc.clone() });
            }
            return;
        }
        // Each remaining part is >= 1 and <= maxpart; keep feasibility.
        let hi = maxpart.min(n - (k - 1));
        let lo = n.div_ceil(k);
        for p in (lo.max(1)..=hi).rev() {
            acc.push(p);
            rec(n - p, k - 1, p, acc, out);
            acc.pop();
        }
    }
    rec(n, k, n, &mut acc, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Permutations
// ---------------------------------------------------------------------------

/// A permutation of `{1, ..., n}` in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    // images[i] = sigma(i+1), 1-based values.
    images: Vec<u32>,
}

impl Permutation {
    /// Identity on `{1,...,n}`.
    pub fn identity(n: u32) -> Self {
        Self {
            images: (1..=n).collect(),
        }
    }

    /// Builds from one-line notation `[sigma(1), ..., sigma(n)]`.
    pub fn from_one_line(images: Vec<u32>) -> Result<Self, PartitionError> {
        let n = images.len() as u32;
        let mut seen = vec![false; n as usize + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v as usize] {
                return Err(PartitionError::NotAPermutation(n));
            }
            seen[v as usize] = true;
        }
        Ok(Self { images })
    }

    /// Ground set size.
    pub fn n(&self) -> u32 {
        self.images.len() as u32
    }

    /// `sigma(e)`.
    pub fn apply(&self, e: u32) -> u32 {
        self.images[(e - 1) as usize]
    }

    /// One-line notation.
    pub fn one_line(&self) -> &[u32] {
        &self.images
    }

    /// Cycles in canonical form: each cycle starts at its least element,
    /// cycles sorted by least element. Fixed points appear as 1-cycles.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let n = self.n();
        let mut seen = vec![false; n as usize + 1];
        let mut out = Vec::new();
        for start in 1..=n {
            if seen[start as usize] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start as usize] = true;
            let mut cur = self.apply(start);
            while cur != start {
                seen[cur as usize] = true;
                cyc.push(cur);
                cur = self.apply(cur);
            }
            out.push(cyc);
        }
        out
    }

    /// Number of cycles (fixed points included).
    pub fn cycle_count(&self) -> u32 {
        self.cycles().len() as u32
    }

    /// The set partition whose blocks are the cycle supports.
    pub fn orbit_partition(&self) -> SetPartition {
        SetPartition::from_blocks(self.n(), &self.cycles()).expect("cycles partition the set")
    }

    /// Cycle type as an integer partition of `n`.
    pub fn cycle_type(&self) -> IntegerPartition {
        IntegerPartition::from_parts(self.cycles().iter().map(|c| c.len() as u32).collect())
            .expect("cycle lengths partition n")
    }

    /// Left-multiplies by the transposition `(x y)`, returning `(x y) . sigma`
    /// (apply `sigma` first, then swap `x` and `y`).
    ///
    /// If `x` and `y` lie in one cycle of `sigma` that cycle splits in two;
    /// if they lie in different cycles those merge. The cycle count always
    /// changes by exactly one.
    pub fn apply_transposition(&self, x: u32, y: u32) -> Result<Permutation, PartitionError> {
        let n = self.n();
        if x == 0 || x > n {
            return Err(PartitionError::OutOfRange(x, n));
        }
        if y == 0 || y > n {
            return Err(PartitionError::OutOfRange(y, n));
        }
        assert!(x != y, "transposition needs distinct points");
        let mut images = self.images.clone();
        for v in images.iter_mut() {
            if *v == x {
                *v = y;
            } else if *v == y {
                *v = x;
            }
        }
        Ok(Permutation { images })
    }

    /// Minimal number of transpositions taking `self` to `other`:
    /// `n - #cycles(other . self^{-1})`.
    pub fn cayley_distance(&self, other: &Permutation) -> u32 {
        assert_eq!(self.n(), other.n(), "size mismatch");
        let n = self.n();
        // tau = other . self^{-1}: tau(self(e)) = other(e).
        let mut images = vec![0u32; n as usize];
        for e in 1..=n {
            images[(self.apply(e) - 1) as usize] = other.apply(e);
        }
        let tau = Permutation { images };
        n - tau.cycle_count()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, cyc) in self.cycles().iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "(")?;
            for (j, e) in cyc.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_and_display() {
        let p = SetPartition::from_blocks(4, &[vec![4], vec![3, 1], vec![2]]).unwrap();
        assert_eq!(p.to_string(), "{1,3}{2}{4}");
        assert_eq!(p.k(), 3);
        assert_eq!(p.rgs(), &[0, 1, 0, 2]);
        assert_eq!(SetPartition::parse("{1,3}{2}{4}").unwrap(), p);
    }

    #[test]
    fn from_blocks_rejects_garbage() {
        assert!(SetPartition::from_blocks(3, &[vec![1, 2]]).is_err());
        assert!(SetPartition::from_blocks(3, &[vec![1, 2, 2], vec![3]]).is_err());
        assert!(SetPartition::from_blocks(3, &[vec![1, 2, 4]]).is_err());
        assert!(SetPartition::from_blocks(0, &[]).is_err());
    }

    #[test]
    fn enumeration_counts_match_stirling_and_bell() {
        // Stirling numbers of the second kind, rows 1..=8.
        let stirling: [&[u64]; 8] = [
            &[1],
            &[1, 1],
            &[1, 3, 1],
            &[1, 7, 6, 1],
            &[1, 15, 25, 10, 1],
            &[1, 31, 90, 65, 15, 1],
            &[1, 63, 301, 350, 140, 21, 1],
            &[1, 127, 966, 1701, 1050, 266, 28, 1],
        ];
        for n in 1..=8u32 {
            let all = enumerate_set_partitions(n, None).unwrap();
            let bell: u64 = stirling[n as usize - 1].iter().sum();
            assert_eq!(all.len() as u64, bell);
            // Lexicographic on restricted growth strings, no duplicates.
            for w in all.windows(2) {
                assert!(w[0].rgs() < w[1].rgs());
            }
            for k in 1..=n {
                let some = enumerate_set_partitions(n, Some(k)).unwrap();
                assert_eq!(some.len() as u64, stirling[n as usize - 1][k as usize - 1]);
                assert!(some.iter().all(|p| p.k() == k));
            }
        }
        assert!(matches!(
            enumerate_set_partitions(13, None),
            Err(PartitionError::EnumerationTooLarge(13, 12))
        ));
    }

    #[test]
    fn shape_counting_covers_each_level() {
        // Sum of shape counts over shapes with k parts = number of set
        // partitions with k blocks.
        for n in 1..=9u32 {
            for k in 1..=n {
                let via_shapes: Int = enumerate_integer_partitions(n, k)
                    .iter()
                    .map(count_set_partitions_of_shape)
                    .sum();
                let direct = enumerate_set_partitions(n, Some(k)).unwrap().len();
                assert_eq!(via_shapes, Int::from(direct));
            }
        }
        // Spot value: shape 2^2 of n=4 has 4!/ (2! * (2!)^2) = 3 partitions.
        let lam = IntegerPartition::parse("2^2").unwrap();
        assert_eq!(count_set_partitions_of_shape(&lam), Int::from(3));
    }

    #[test]
    fn refinement_is_a_partial_order_on_small_n() {
        for n in 1..=5u32 {
            let all = enumerate_set_partitions(n, None).unwrap();
            for a in &all {
                assert!(a.refines(a));
                for b in &all {
                    if a.refines(b) && b.refines(a) {
                        assert_eq!(a, b);
                    }
                    for c in &all {
                        if a.refines(b) && b.refines(c) {
                            assert!(a.refines(c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn split_and_merge_are_inverse() {
        let p = SetPartition::parse("{1,2,5}{3,4}").unwrap();
        let q = p.split_block(0, &[2, 5]).unwrap();
        assert_eq!(q.to_string(), "{1}{2,5}{3,4}");
        let back = q.merge_blocks(0, 1);
        assert_eq!(back, p);
        assert!(p.split_block(0, &[1, 2, 5]).is_err());
        assert!(p.split_block(0, &[3]).is_err());
    }

    #[test]
    fn integer_partition_text_and_enumeration() {
        let lam = IntegerPartition::parse("3^1 1^2").unwrap();
        assert_eq!(lam.parts(), &[3, 1, 1]);
        assert_eq!(lam.to_string(), "3^1 1^2");
        assert_eq!(IntegerPartition::parse("1 3 1").unwrap(), lam);
        // Partition counts of n=8: p(8, k) for k=1..8.
        let expect = [1usize, 4, 5, 5, 3, 2, 1, 1];
        for k in 1..=8u32 {
            assert_eq!(enumerate_integer_partitions(8, k).len(), expect[k as usize - 1]);
        }
        let total: usize = (1..=8).map(|k| enumerate_integer_partitions(8, k).len()).sum();
        assert_eq!(total, 22); // p(8)
    }

    #[test]
    fn transposition_splits_and_merges_cycles() {
        // sigma = (1 2 3 4): multiplying by (1 3) splits into (1 2)(3 4).
        let sigma = Permutation::from_one_line(vec![2, 3, 4, 1]).unwrap();
        let tau_sigma = sigma.apply_transposition(1, 3).unwrap();
        assert_eq!(tau_sigma.to_string(), "(1 2) (3 4)");
        assert_eq!(sigma.cycle_count() + 1, tau_sigma.cycle_count());
        // Applying the same transposition again merges back.
        assert_eq!(tau_sigma.apply_transposition(1, 3).unwrap(), sigma);
        // Cycle count always moves by exactly 1.
        let all_pairs = [(1, 2), (1, 4), (2, 3), (2, 4), (3, 4)];
        for (x, y) in all_pairs {
            let t = sigma.apply_transposition(x, y).unwrap();
            let d = t.cycle_count() as i64 - sigma.cycle_count() as i64;
            assert_eq!(d.abs(), 1);
        }
    }

    #[test]
    fn cayley_distance_counts_transpositions() {
        let id = Permutation::identity(5);
        let sigma = Permutation::from_one_line(vec![2, 3, 1, 5, 4]).unwrap(); // (1 2 3)(4 5)
        assert_eq!(id.cayley_distance(&sigma), 3); // (3-1) + (2-1)
        assert_eq!(sigma.cayley_distance(&sigma), 0);
        assert_eq!(sigma.cayley_distance(&id), 3);
    }
}
