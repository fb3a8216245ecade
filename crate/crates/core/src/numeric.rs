//! Exact integer and rational arithmetic helpers shared across the crate.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision signed integer.
pub type Int = BigInt;
/// Arbitrary-precision unsigned integer.
pub type Nat = BigUint;
/// Arbitrary-precision rational. All pmf values in this crate are `Rat`.
pub type Rat = BigRational;

/// `i` as a rational.
pub fn rat(i: i64) -> Rat {
    Rat::from_integer(Int::from(i))
}

/// `p/q` as a rational. Panics if `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(Int::from(p), Int::from(q))
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> Int {
    let mut acc = Int::one();
    for i in 2..=n {
        acc *= Int::from(i);
    }
    acc
}

/// Binomial coefficient `C(n, k)` by the multiplicative formula.
///
/// For repeated dense queries prefer [`Binomials`], which caches a Pascal
/// triangle.
pub fn binomial(n: u64, k: u64) -> Int {
    if k > n {
        return Int::zero();
    }
    let k = k.min(n - k);
    let mut acc = Int::one();
    for i in 0..k {
        acc = acc * Int::from(n - i) / Int::from(i + 1);
    }
    acc
}

/// Cached Pascal triangle. Row `n` holds `C(n, 0..=n)`.
#[derive(Debug, Clone, Default)]
pub struct Binomials {
    rows: Vec<Vec<Int>>,
}

impl Binomials {
    /// Table with rows `0..=n_max` precomputed.
    pub fn with_rows(n_max: usize) -> Self {
        let mut t = Self { rows: Vec::new() };
        t.grow_to(n_max);
        t
    }

    fn grow_to(&mut self, n_max: usize) {
        if self.rows.is_empty() {
            self.rows.push(vec![Int::one()]);
        }
        while self.rows.len() <= n_max {
            let prev = self.rows.last().unwrap();
            let mut row = Vec::with_capacity(prev.len() + 1);
            row.push(Int::one());
            for w in prev.windows(2) {
                row.push(&w[0] + &w[1]);
            }
            row.push(Int::one());
            self.rows.push(row);
        }
    }

    /// `C(n, k)`, growing the cached triangle as needed.
    pub fn c(&mut self, n: usize, k: usize) -> Int {
        if k > n {
            return Int::zero();
        }
        self.grow_to(n);
        self.rows[n][k].clone()
    }
}

/// Rising factorial `[x]_m = x (x+1) ... (x+m-1)`, with `[x]_0 = 1`.
pub fn rising(x: &Rat, m: u32) -> Rat {
    let mut acc = Rat::one();
    for i in 0..m {
        acc *= x + rat(i as i64);
    }
    acc
}

/// `x^k` for a rational base and small unsigned exponent.
pub fn pow(x: &Rat, k: u32) -> Rat {
    let mut acc = Rat::one();
    let mut base = x.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Canonical text form of a rational: `"p"` for integers, `"p/q"` otherwise,
/// always in lowest terms with the sign on the numerator.
pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses the `"p"` / `"p/q"` form produced by [`format_rat`].
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<Int>().ok().map(Rat::from_integer),
        Some((p, q)) => {
            let p = p.trim().parse::<Int>().ok()?;
            let q = q.trim().parse::<Int>().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rat::new(p, q))
            }
        }
    }
}

/// Nearest `f64` to the rational, for display and statistics only.
pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fall back for extreme magnitudes: scale mantissas manually.
        let num = x.numer().abs().bits() as i64;
        let den = x.denom().bits() as i64;
        let sign = if x.is_negative() { -1.0 } else { 1.0 };
        sign * (num - den) as f64 * std::f64::consts::LN_2
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial(0), Int::one());
        assert_eq!(factorial(5), Int::from(120));
        assert_eq!(binomial(10, 3), Int::from(120));
        assert_eq!(binomial(3, 10), Int::zero());
        let mut t = Binomials::with_rows(12);
        for n in 0..=12u64 {
            for k in 0..=n {
                assert_eq!(t.c(n as usize, k as usize), binomial(n, k));
            }
        }
    }

    #[test]
    fn rising_factorial_matches_products() {
        let x = ratio(3, 2);
        assert_eq!(rising(&x, 0), rat(1));
        assert_eq!(rising(&x, 3), &x * (&x + rat(1)) * (&x + rat(2)));
    }

    #[test]
    fn rat_text_roundtrip() {
        for s in ["0", "7", "-3", "22/7", "-5/9"] {
            let x = parse_rat(s).unwrap();
            assert_eq!(format_rat(&x), s);
        }
        assert_eq!(parse_rat("4/6").map(|x| format_rat(&x)).unwrap(), "2/3");
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("abc").is_none());
    }
}
