//! Weight sequences and partial Bell polynomials.
//!
//! A weight sequence `w = (w_1, w_2, ...)` assigns a rational weight to every
//! block size. The partial Bell polynomial
//! `B_{n,k}(w) = sum over partitions of {1..n} into k blocks of prod_i w_{#block_i}`
//! is the normalizing constant of the Gibbs laws in [`crate::gibbs`].
//!
//! The two-parameter product family `w_j(b,c) = prod_{i=2}^j (ic + jb)` is the
//! exactly solvable case: its Bell polynomials factor in closed form and it is
//! the unique family whose fragmentation chain keeps Gibbs marginals at every
//! level (see [`crate::frag`]).

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::numeric::{factorial, rat, Binomials, Int, Rat};
use crate::partition::enumerate_set_partitions_with_cap;

/// Errors from weight construction and Bell evaluation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightError {
    /// A weight sequence needs at least `w_1`.
    #[error("weight sequence must contain at least w_1")]
    Empty,
    /// Requested index exceeds the stored prefix.
    #[error("weight index {0} exceeds n_max {1}")]
    IndexTooLarge(u32, u32),
    /// The two-parameter family is not valid for this `n`.
    #[error("parameters b={0}, c={1} violate the validity inequality for n={2}")]
    InvalidBc(String, String, u32),
}

// ---------------------------------------------------------------------------
// Weight sequences
// ---------------------------------------------------------------------------

/// Provenance note recorded when a sequence is built from `(b, c)`
/// parameters: the parameters themselves and the largest ground-set size the
/// validity inequality admits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BcParams {
    /// Slope parameter.
    pub b: Rat,
    /// Offset parameter.
    pub c: Rat,
    /// Largest `n` satisfying [`bc_valid`], or `None` when every `n` does.
    pub valid_to: Option<u32>,
}

/// A finite prefix `w_1, ..., w_{n_max}` of a block-size weight sequence.
///
/// Equality compares the stored values only, not the `(b, c)` provenance
/// note.
#[derive(Debug, Clone)]
pub struct WeightSequence {
    w: Vec<Rat>,
    bc: Option<BcParams>,
}

impl PartialEq for WeightSequence {
    fn eq(&self, other: &Self) -> bool {
        self.w == other.w
    }
}

impl Eq for WeightSequence {}

impl WeightSequence {
    /// Wraps explicit values `w_1, ..., w_{n_max}`.
    pub fn from_values(w: Vec<Rat>) -> Result<Self, WeightError> {
        if w.is_empty() {
            return Err(WeightError::Empty);
        }
        Ok(Self { w, bc: None })
    }

    /// `w_j = 1` for all `j` (uniform over set partitions at each level).
    pub fn uniform(n_max: u32) -> Self {
        Self {
            w: vec![Rat::one(); n_max as usize],
            bc: None,
        }
    }

    /// `w_j = (j-1)!` (blocks weighted as cycles).
    pub fn cycles(n_max: u32) -> Self {
        Self {
            w: (1..=n_max).map(|j| Rat::from_integer(factorial(j as u64 - 1))).collect(),
            bc: None,
        }
    }

    /// `w_j = j!` (blocks weighted as linear orders).
    pub fn segments(n_max: u32) -> Self {
        Self {
            w: (1..=n_max).map(|j| Rat::from_integer(factorial(j as u64))).collect(),
            bc: None,
        }
    }

    /// `w_j = j^{j-1}` (blocks weighted as rooted labelled trees).
    pub fn trees(n_max: u32) -> Self {
        Self {
            w: (1..=n_max)
                .map(|j| Rat::from_integer(Int::from(j).pow(j - 1)))
                .collect(),
            bc: None,
        }
    }

    /// Largest stored index.
    pub fn n_max(&self) -> u32 {
        self.w.len() as u32
    }

    /// `w_j`, 1-based. Panics if `j` is out of range; use [`Self::get`] to
    /// probe.
    pub fn w(&self, j: u32) -> &Rat {
        &self.w[(j - 1) as usize]
    }

    /// `w_j` if stored.
    pub fn get(&self, j: u32) -> Option<&Rat> {
        if j == 0 {
            return None;
        }
        self.w.get((j - 1) as usize)
    }

    /// All stored values `w_1..w_{n_max}` in order.
    pub fn values(&self) -> &[Rat] {
        &self.w
    }

    /// Whether `w_j > 0` for every `j <= m` (required for the weights to
    /// drive a fragmentation process on `n = m + 1` or fewer elements).
    pub fn all_positive_up_to(&self, m: u32) -> bool {
        m <= self.n_max() && self.w[..m as usize].iter().all(|x| x.is_positive())
    }

    /// The `(b, c)` provenance note, present when built by [`weights_bc`].
    pub fn bc_params(&self) -> Option<&BcParams> {
        self.bc.as_ref()
    }

    /// Copy extended with zero weights up to `n_max`. The zeros are inert
    /// fillers for Bell evaluations whose answer provably never touches them
    /// (block counts of two or more cap block sizes at `n - 1`).
    pub fn padded_to(&self, n_max: u32) -> WeightSequence {
        let mut w = self.w.clone();
        while (w.len() as u32) < n_max {
            w.push(Rat::zero());
        }
        WeightSequence {
            w,
            bc: self.bc.clone(),
        }
    }
}

/// The two-parameter product weights `w_j = prod_{i=2}^j (ic + jb)`, `w_1 = 1`,
/// with the validity range recorded on the result.
pub fn weights_bc(n_max: u32, b: &Rat, c: &Rat) -> WeightSequence {
    let mut w = Vec::with_capacity(n_max as usize);
    for j in 1..=n_max {
        let jb = rat(j as i64) * b;
        let mut acc = Rat::one();
        for i in 2..=j {
            acc *= rat(i as i64) * c + &jb;
        }
        w.push(acc);
    }
    let valid_to = if !(b + c).is_positive() {
        Some(0)
    } else if b.is_negative() {
        // Largest n with c > -(n-1)b/2, i.e. n - 1 strictly below 2c/(-b).
        let q = rat(2) * c / -b;
        let whole = q.to_integer();
        let cutoff = if q.is_integer() { whole - 1 } else { whole };
        Some(u32::try_from(cutoff).unwrap_or(0).saturating_add(1))
    } else {
        None
    };
    WeightSequence {
        w,
        bc: Some(BcParams {
            b: b.clone(),
            c: c.clone(),
            valid_to,
        }),
    }
}

/// The validity inequality for running the two-parameter family on `n`
/// elements: `b + c > 0`, and when `b < 0` additionally `c > -(n-1)b/2`.
///
/// Within this region every `w_j` with `j <= n - 1` is positive.
pub fn bc_valid(n: u32, b: &Rat, c: &Rat) -> bool {
    if !(b + c).is_positive() {
        return false;
    }
    if b.is_negative() {
        let bound = -rat(n as i64 - 1) * b / rat(2);
        if c <= &bound {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Bell polynomials
// ---------------------------------------------------------------------------

/// `B_{n,k}(w)` summed literally over all set partitions of `{1..n}` with `k`
/// blocks. Exponential cost; the oracle the fast paths are tested against.
pub fn bell_brute(n: u32, k: u32, w: &WeightSequence) -> Rat {
    if n == 0 {
        return if k == 0 { Rat::one() } else { Rat::zero() };
    }
    assert!(n <= w.n_max(), "weights too short for n={n}");
    let parts = enumerate_set_partitions_with_cap(n, Some(k), 12)
        .expect("brute-force Bell bounded at n=12");
    let mut acc = Rat::zero();
    for p in parts {
        let mut term = Rat::one();
        for s in p.block_sizes() {
            term *= w.w(s);
        }
        acc += term;
    }
    acc
}

/// `B_{n,k}(w)` by the one-block recursion on the element `1`:
/// `B_{n,k} = sum_{l=1}^{n-k+1} C(n-1, l-1) w_l B_{n-l, k-1}`, `B_{0,0} = 1`.
pub fn bell_recursive(n: u32, k: u32, w: &WeightSequence) -> Rat {
    BellTable::build(w, n).bell(n, k).clone()
}

/// `B_{n,2}(w) = (1/2) sum_{l=1}^{n-1} C(n,l) w_l w_{n-l}`, the two-block case
/// used by split probabilities.
pub fn bell_two(n: u32, w: &WeightSequence) -> Rat {
    assert!(n >= 2 && n - 1 <= w.n_max(), "need w_1..w_{}", n - 1);
    let mut acc = Rat::zero();
    for l in 1..n {
        acc += Rat::from_integer(crate::numeric::binomial(n as u64, l as u64)) * w.w(l) * w.w(n - l);
    }
    acc / rat(2)
}

/// Closed form for the two-parameter family:
/// `B_{n,k} = C(n-1, k-1) prod_{i=k+1}^n (ic + nb)`.
pub fn bell_closed_bc(n: u32, k: u32, b: &Rat, c: &Rat) -> Rat {
    if n == 0 || k == 0 || k > n {
        return if n == 0 && k == 0 { Rat::one() } else { Rat::zero() };
    }
    let nb = rat(n as i64) * b;
    let mut acc = Rat::from_integer(crate::numeric::binomial(n as u64 - 1, k as u64 - 1));
    for i in (k + 1)..=n {
        acc *= rat(i as i64) * c + &nb;
    }
    acc
}

/// Dense table of `B_{n,k}(w)` for `0 <= k <= n <= n_max`, with the Pascal
/// triangle cached alongside.
#[derive(Debug, Clone)]
pub struct BellTable {
    weights: WeightSequence,
    // bell[n][k], 0 <= k <= n.
    bell: Vec<Vec<Rat>>,
}

impl BellTable {
    /// Computes the full table up to `n_max` (which must not exceed the
    /// stored weight prefix).
    pub fn build(w: &WeightSequence, n_max: u32) -> Self {
        assert!(
            n_max <= w.n_max(),
            "weights stop at {} but table needs {}",
            w.n_max(),
            n_max
        );
        let mut binom = Binomials::with_rows(n_max as usize);
        let mut bell: Vec<Vec<Rat>> = Vec::with_capacity(n_max as usize + 1);
        bell.push(vec![Rat::one()]); // B_{0,0}
        for n in 1..=n_max as usize {
            let mut row = Vec::with_capacity(n + 1);
            row.push(Rat::zero()); // B_{n,0}
            for k in 1..=n {
                let mut acc = Rat::zero();
                for l in 1..=(n - k + 1) {
                    let term = Rat::from_integer(binom.c(n - 1, l - 1))
                        * w.w(l as u32)
                        * &bell[n - l][k - 1];
                    acc += term;
                }
                row.push(acc);
            }
            bell.push(row);
        }
        Self {
            weights: w.clone(),
            bell,
        }
    }

    /// Largest `n` stored.
    pub fn n_max(&self) -> u32 {
        self.bell.len() as u32 - 1
    }

    /// The weight sequence the table was built from.
    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    /// `B_{n,k}(w)`; zero outside `0 <= k <= n`.
    pub fn bell(&self, n: u32, k: u32) -> &Rat {
        static ZERO: std::sync::OnceLock<Rat> = std::sync::OnceLock::new();
        if k > n || n > self.n_max() {
            return ZERO.get_or_init(Rat::zero);
        }
        &self.bell[n as usize][k as usize]
    }

    /// `Y_n = sum_{k=1}^n B_{n,k}`, the canonical normalizer.
    pub fn y(&self, n: u32) -> Rat {
        (1..=n).map(|k| self.bell(n, k).clone()).sum()
    }

    /// JSON export: `{"n_max": N, "weights": [...], "bell": [[...]]}` with all
    /// rationals in `"p/q"` text form and row `n` of `bell` holding
    /// `B_{n,0..=n}`.
    pub fn to_json(&self) -> serde_json::Value {
        use crate::numeric::format_rat;
        serde_json::json!({
            "n_max": self.n_max(),
            "weights": self.weights.values().iter().map(format_rat).collect::<Vec<_>>(),
            "bell": self.bell.iter()
                .map(|row| row.iter().map(format_rat).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// Convolution polynomials
// ---------------------------------------------------------------------------

/// The convolution polynomial family attached to parameters `(b, c)`:
/// `C_m(x) = (1/m!) prod_{j=0}^{m-1} ((b+c) x - c j)`.
///
/// It satisfies the binomial convolution identity
/// `C_m(x + y) = sum_{l=0}^m C_l(x) C_{m-l}(y)` and reproduces both the
/// product weights and their Bell polynomials by evaluation at integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvolutionFamily {
    b: Rat,
    c: Rat,
}

impl ConvolutionFamily {
    /// Family with parameters `(b, c)`.
    pub fn new(b: Rat, c: Rat) -> Self {
        Self { b, c }
    }

    /// `b`.
    pub fn b(&self) -> &Rat {
        &self.b
    }

    /// `c`.
    pub fn c(&self) -> &Rat {
        &self.c
    }

    /// Evaluates `C_m(x)`.
    pub fn eval(&self, m: u32, x: &Rat) -> Rat {
        conv_poly_bc(m, &self.b, &self.c, x)
    }

    /// `w_n = (n-1)! C_{n-1}(n)`, the product weights recovered from the
    /// polynomial family.
    pub fn weight_from_conv(&self, n: u32) -> Rat {
        assert!(n >= 1);
        Rat::from_integer(factorial(n as u64 - 1)) * self.eval(n - 1, &rat(n as i64))
    }

    /// `B_{n,k} = ((n-1)!/(k-1)!) C_{n-k}(n)`, the Bell polynomial recovered
    /// from the polynomial family.
    pub fn bell_from_conv(&self, n: u32, k: u32) -> Rat {
        assert!(k >= 1 && k <= n);
        Rat::from_integer(factorial(n as u64 - 1)) / Rat::from_integer(factorial(k as u64 - 1))
            * self.eval(n - k, &rat(n as i64))
    }
}

/// Evaluates the convolution polynomial
/// `C_m^{b,c}(x) = (1/m!) prod_{j=0}^{m-1} ((b+c) x - c j)` at rational `x`.
pub fn conv_poly_bc(m: u32, b: &Rat, c: &Rat, x: &Rat) -> Rat {
    let bc_x = (b + c) * x;
    let mut acc = Rat::one();
    for j in 0..m {
        acc *= &bc_x - c * rat(j as i64);
    }
    acc / Rat::from_integer(factorial(m as u64))
}

/// Checks the characterizing recursion
/// `w_m = ((2c + mb)/(m-1)) B_{m,2}(w_1..w_{m-1})` for `2 <= m <= n_max`,
/// together with `w_1 = 1`. Returns the first failing index, or `None` if the
/// sequence is the `(b,c)` product family on its whole stored prefix.
pub fn check_unique_recursion(w: &WeightSequence, b: &Rat, c: &Rat) -> Option<u32> {
    if !w.w(1).is_one() {
        return Some(1);
    }
    for m in 2..=w.n_max() {
        let predicted = if m == 2 {
            // B_{2,2} side: w_2 = 2b + 2c directly.
            rat(2) * (b + c)
        } else {
            (rat(2) * c + rat(m as i64) * b) / rat(m as i64 - 1) * bell_two(m, w)
        };
        if &predicted != w.w(m) {
            return Some(m);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{binomial, ratio};

    fn grid() -> Vec<(Rat, Rat)> {
        vec![
            (rat(0), rat(1)),
            (rat(1), rat(0)),
            (rat(1), rat(1)),
            (rat(-1), rat(2)),
            (ratio(1, 2), ratio(1, 3)),
        ]
    }

    #[test]
    fn named_families_start_as_expected() {
        assert_eq!(WeightSequence::uniform(4).values(), &[rat(1), rat(1), rat(1), rat(1)]);
        assert_eq!(WeightSequence::cycles(4).values(), &[rat(1), rat(1), rat(2), rat(6)]);
        assert_eq!(WeightSequence::segments(4).values(), &[rat(1), rat(2), rat(6), rat(24)]);
        assert_eq!(WeightSequence::trees(4).values(), &[rat(1), rat(2), rat(9), rat(64)]);
        // w_3 at b = c = 1: (2c + 3b)(3c + 3b) = 5 * 6.
        assert_eq!(weights_bc(3, &rat(1), &rat(1)).w(3), &rat(30));
    }

    #[test]
    fn product_family_specializes_to_segments_and_trees() {
        let seg = weights_bc(8, &rat(0), &rat(1));
        assert_eq!(seg, WeightSequence::segments(8));
        let tre = weights_bc(8, &rat(1), &rat(0));
        assert_eq!(tre, WeightSequence::trees(8));
    }

    #[test]
    fn recursive_matches_brute_for_assorted_weights() {
        let fams = [
            WeightSequence::uniform(8),
            WeightSequence::cycles(8),
            WeightSequence::segments(8),
            WeightSequence::trees(8),
            weights_bc(8, &rat(1), &rat(1)),
            weights_bc(8, &ratio(1, 2), &ratio(1, 3)),
        ];
        for w in &fams {
            for n in 1..=8 {
                for k in 1..=n {
                    assert_eq!(bell_recursive(n, k, w), bell_brute(n, k, w), "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn closed_form_and_special_families() {
        // Linear-order weights: B_{n,k} = C(n-1,k-1) n!/k!.
        let seg = WeightSequence::segments(10);
        for n in 1..=10u32 {
            for k in 1..=n {
                let expect = Rat::from_integer(
                    binomial(n as u64 - 1, k as u64 - 1) * factorial(n as u64),
                ) / Rat::from_integer(factorial(k as u64));
                assert_eq!(bell_recursive(n, k, &seg), expect);
                assert_eq!(bell_closed_bc(n, k, &rat(0), &rat(1)), expect);
            }
        }
        assert_eq!(bell_recursive(5, 2, &seg), rat(240));
        // Tree weights: B_{n,k} = C(n-1,k-1) n^{n-k}.
        let tre = WeightSequence::trees(10);
        for n in 1..=10u32 {
            for k in 1..=n {
                let expect = Rat::from_integer(
                    binomial(n as u64 - 1, k as u64 - 1) * Int::from(n).pow(n - k),
                );
                assert_eq!(bell_recursive(n, k, &tre), expect);
                assert_eq!(bell_closed_bc(n, k, &rat(1), &rat(0)), expect);
            }
        }
        // Closed form is a polynomial identity: holds on the whole grid,
        // validity inequality or not.
        for (b, c) in grid() {
            let w = weights_bc(10, &b, &c);
            for n in 1..=10u32 {
                for k in 1..=n {
                    assert_eq!(bell_recursive(n, k, &w), bell_closed_bc(n, k, &b, &c));
                }
            }
        }
    }

    #[test]
    fn two_block_bell_agrees_and_cycles_give_harmonic_numbers() {
        let cyc = WeightSequence::cycles(12);
        for n in 2..=12u32 {
            assert_eq!(bell_two(n, &cyc), bell_recursive(n, 2, &cyc));
            // B_{n,2}((j-1)!) = (n-1)! H_{n-1}.
            let h: Rat = (1..n).map(|i| ratio(1, i as i64)).sum();
            assert_eq!(bell_two(n, &cyc), Rat::from_integer(factorial(n as u64 - 1)) * h);
        }
        assert_eq!(bell_two(4, &cyc), rat(11));
    }

    #[test]
    fn validity_inequality_tracks_positivity() {
        // (b, c) = (-1, 2): valid for n <= 4 only, and indeed w_4 = 0.
        let b = rat(-1);
        let c = rat(2);
        assert!(bc_valid(4, &b, &c));
        assert!(!bc_valid(5, &b, &c));
        let w = weights_bc(6, &b, &c);
        assert!(w.all_positive_up_to(3));
        assert!(!w.all_positive_up_to(4));
        assert!(w.w(4).is_zero());
        // b + c <= 0 is always out.
        assert!(!bc_valid(4, &rat(-2), &rat(2)));
        // Positive b: valid for every n, weights positive throughout.
        for n in 2..=30 {
            assert!(bc_valid(n, &ratio(1, 2), &ratio(1, 3)));
        }
        assert!(weights_bc(30, &ratio(1, 2), &ratio(1, 3)).all_positive_up_to(30));
        // The recorded validity range agrees with the pointwise check.
        assert_eq!(w.bc_params().unwrap().valid_to, Some(4));
        assert_eq!(
            weights_bc(3, &ratio(1, 2), &ratio(1, 3)).bc_params().unwrap().valid_to,
            None
        );
        assert_eq!(
            weights_bc(3, &rat(-2), &rat(2)).bc_params().unwrap().valid_to,
            Some(0)
        );
        // Non-integer cutoff: b = -2, c = 5 gives 2c/|b| = 5, so n <= 5;
        // b = -2, c = 11/2 gives 11/2, so n <= 6.
        assert_eq!(weights_bc(3, &rat(-2), &rat(5)).bc_params().unwrap().valid_to, Some(5));
        assert_eq!(
            weights_bc(3, &rat(-2), &ratio(11, 2)).bc_params().unwrap().valid_to,
            Some(6)
        );
        assert!(bc_valid(6, &rat(-2), &ratio(11, 2)));
        assert!(!bc_valid(7, &rat(-2), &ratio(11, 2)));
        assert!(bc_valid(5, &rat(-2), &rat(5)));
        assert!(!bc_valid(6, &rat(-2), &rat(5)));
    }

    #[test]
    fn convolution_identity_on_grid() {
        for (b, c) in grid() {
            let fam = ConvolutionFamily::new(b, c);
            for m in 0..=7u32 {
                for (x, y) in [(rat(2), rat(3)), (ratio(1, 2), rat(-1)), (rat(5), ratio(2, 7))] {
                    let lhs = fam.eval(m, &(&x + &y));
                    let rhs: Rat = (0..=m).map(|l| fam.eval(l, &x) * fam.eval(m - l, &y)).sum();
                    assert_eq!(lhs, rhs, "m={m}");
                }
            }
        }
    }

    #[test]
    fn conv_family_reproduces_weights_and_bell() {
        for (b, c) in grid() {
            let fam = ConvolutionFamily::new(b.clone(), c.clone());
            let w = weights_bc(9, &b, &c);
            for n in 1..=9u32 {
                assert_eq!(fam.weight_from_conv(n), *w.w(n), "w_{n}");
                for k in 1..=n {
                    assert_eq!(fam.bell_from_conv(n, k), bell_closed_bc(n, k, &b, &c));
                }
            }
        }
    }

    #[test]
    fn unique_recursion_accepts_product_family_only() {
        for (b, c) in grid() {
            let w = weights_bc(9, &b, &c);
            assert_eq!(check_unique_recursion(&w, &b, &c), None);
        }
        // Cycle weights match no (b, c): solving the m = 2, 3 constraints
        // forces (b, c) = (1/3, 1/6), which the m = 4 constraint rejects
        // (predicted 55/9, actual 6).
        let cyc = WeightSequence::cycles(6);
        let b = ratio(1, 3);
        let c = ratio(1, 6);
        let predicted = (rat(2) * &c + rat(4) * &b) / rat(3) * bell_two(4, &cyc);
        assert_eq!(predicted, ratio(55, 9));
        assert_eq!(check_unique_recursion(&cyc, &b, &c), Some(4));
        // Uniform weights share w_2 = 1 with the cycle weights, so the same
        // candidate passes m = 2 and fails at m = 3 (predicted 2, actual 1).
        assert_eq!(check_unique_recursion(&WeightSequence::uniform(4), &b, &c), Some(3));
    }
}
