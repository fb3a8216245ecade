//! Rational approximations of logarithms and exponentials with proven error
//! bounds, plus exact bookkeeping for values of the form
//! `rational + sum of rational * ln(prime)`.
//!
//! Everything here returns `Rat`, so callers can keep comparing exactly:
//! `ln_rat(x, d)` and `exp_rat(x, d)` are within `10^-d` of the true value,
//! and [`approx_eq`] turns that into assertions at any digit count. The
//! [`LogCombo`] type stores log coefficients per prime, which makes
//! cancellation checks exact: an expression whose logs cancel reduces to a
//! plain rational, no floating point involved.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::numeric::{format_rat, rat, ratio};
use crate::{Int, Rat};

fn pow10_neg(digits: u32) -> Rat {
    Rat::new(Int::one(), Int::from(10u32).pow(digits))
}

/// True when `|x - y| <= 10^-digits`, compared in exact arithmetic.
pub fn approx_eq(x: &Rat, y: &Rat, digits: u32) -> bool {
    (x - y).abs() <= pow10_neg(digits)
}

/// Natural logarithm of a positive rational, within `10^-digits`.
///
/// The argument is scaled into `[3/4, 3/2)` by powers of two, where the
/// atanh series converges at better than a digit per term; the removed
/// exponent comes back as a multiple of `ln 2`.
pub fn ln_rat(x: &Rat, digits: u32) -> Rat {
    assert!(x.is_positive(), "logarithm needs a positive argument");
    let guard = digits + 10;
    let mut m = x.clone();
    let mut e: i64 = 0;
    let lo = ratio(3, 4);
    let hi = ratio(3, 2);
    while m >= hi {
        m /= rat(2);
        e += 1;
    }
    while m < lo {
        m *= rat(2);
        e -= 1;
    }
    let ln_m = atanh_series(&m, guard);
    if e == 0 {
        ln_m
    } else {
        ln_m + rat(e) * atanh_series(&rat(2), guard)
    }
}

/// `ln x` via `2 atanh((x-1)/(x+1))`, for `x` in roughly `[1/3, 3]`.
fn atanh_series(x: &Rat, digits: u32) -> Rat {
    let t = (x - Rat::one()) / (x + Rat::one());
    debug_assert!(t.abs() <= ratio(1, 2), "argument outside the fast range");
    let t2 = &t * &t;
    let eps = pow10_neg(digits);
    let one_minus_t2 = Rat::one() - &t2;

    let mut term = t;
    let mut sum = Rat::zero();
    let mut odd: i64 = 1;
    loop {
        sum += &term / rat(odd);
        term *= &t2;
        odd += 2;
        // Remaining tail of 2 * sum_{j} t^(2j+1)/(2j+1), bounded geometrically.
        let tail = rat(2) * term.abs() / (rat(odd) * &one_minus_t2);
        if tail <= eps {
            return rat(2) * sum;
        }
    }
}

/// `exp x` for a rational `x` with `|x| <= 64`, within `10^-digits`.
pub fn exp_rat(x: &Rat, digits: u32) -> Rat {
    assert!(x.abs() <= rat(64), "argument out of the supported range");
    if x.is_negative() {
        // exp(x) = 1 / exp(-x); the reciprocal of a value >= 1 only
        // shrinks the absolute error.
        return Rat::one() / exp_rat(&-x, digits + 2);
    }
    let eps = pow10_neg(digits + 5);
    let mut term = Rat::one();
    let mut sum = Rat::one();
    let mut k: i64 = 1;
    loop {
        term = term * x / rat(k);
        sum += &term;
        // Once the term ratio x/(k+1) drops below 1/2 the tail is at most
        // twice the next term.
        if x <= &ratio(k + 1, 2) && rat(2) * &term <= eps {
            return sum;
        }
        k += 1;
    }
}

/// Decimal rendering with exactly `digits` places, rounding half away
/// from zero.
pub fn to_decimal_string(x: &Rat, digits: u32) -> String {
    let neg = x.is_negative();
    let scale = Int::from(10u32).pow(digits);
    let scaled = (x.abs() * Rat::from_integer(scale.clone()) + ratio(1, 2)).floor();
    let (int_part, frac_part) = scaled.to_integer().div_rem(&scale);
    let frac = frac_part.to_string();
    format!(
        "{}{}.{}{}",
        if neg { "-" } else { "" },
        int_part,
        "0".repeat(digits as usize - frac.len()),
        frac
    )
}

/// Parses either a fraction `p/q` or a decimal literal into an exact
/// rational. Fractions take arbitrary-precision integer parts; a zero
/// denominator is rejected.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: Int = num.trim().parse().ok()?;
        let d: Int = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    parse_decimal(s)
}

/// Parses a plain signed decimal literal such as `-12.0625` into an exact
/// rational. No exponent notation.
pub fn parse_decimal(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits_ok = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if !digits_ok(int_part) || !digits_ok(frac_part) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: Int = if joined.is_empty() { Int::zero() } else { joined.parse().ok()? };
    let denom = Int::from(10u32).pow(frac_part.len() as u32);
    let v = Rat::new(numer, denom);
    Some(if neg { -v } else { v })
}

fn prime_factors(mut m: u64) -> Vec<(u64, u32)> {
    assert!(m >= 1, "cannot factor zero");
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// A value `constant + sum_p coeff_p * ln p` with the sum running over
/// primes.
///
/// Storing log coefficients per prime makes the representation canonical:
/// `ln 12` and `2 ln 2 + ln 3` build the same object, and combinations
/// whose logs cancel are recognized exactly by [`LogCombo::is_rational`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LogCombo {
    constant: Rat,
    logs: BTreeMap<u64, Rat>,
}

impl LogCombo {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_constant(c: Rat) -> Self {
        Self {
            constant: c,
            logs: BTreeMap::new(),
        }
    }

    /// Adds `coeff * ln m` for an integer `m >= 1`. The argument is
    /// factored, so `m = 1` contributes nothing.
    pub fn add_log(&mut self, m: u64, coeff: &Rat) {
        if coeff.is_zero() {
            return;
        }
        for (p, e) in prime_factors(m) {
            let entry = self.logs.entry(p).or_insert_with(Rat::zero);
            *entry += coeff * rat(e as i64);
            if entry.is_zero() {
                self.logs.remove(&p);
            }
        }
    }

    pub fn add_constant(&mut self, c: &Rat) {
        self.constant += c;
    }

    pub fn constant(&self) -> &Rat {
        &self.constant
    }

    /// Coefficient of `ln p`; zero for primes not present.
    pub fn log_coeff(&self, p: u64) -> Rat {
        self.logs.get(&p).cloned().unwrap_or_else(Rat::zero)
    }

    /// The `(prime, coefficient)` pairs with nonzero coefficient.
    pub fn log_terms(&self) -> impl Iterator<Item = (u64, &Rat)> {
        self.logs.iter().map(|(&p, c)| (p, c))
    }

    /// True when every log coefficient cancelled.
    pub fn is_rational(&self) -> bool {
        self.logs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.logs.is_empty()
    }

    pub fn scaled(&self, f: &Rat) -> Self {
        if f.is_zero() {
            return Self::zero();
        }
        Self {
            constant: &self.constant * f,
            logs: self.logs.iter().map(|(&p, c)| (p, c * f)).collect(),
        }
    }

    /// Double-precision value, for display and quick sanity checks.
    pub fn eval_f64(&self) -> f64 {
        let mut acc = crate::numeric::to_f64(&self.constant);
        for (&p, c) in &self.logs {
            acc += crate::numeric::to_f64(c) * (p as f64).ln();
        }
        acc
    }

    /// Rational approximation within `10^-digits` of the true value.
    pub fn eval(&self, digits: u32) -> Rat {
        // Budget the per-log error against the total coefficient mass.
        let mass: Rat = self
            .logs
            .values()
            .fold(Rat::one(), |acc, c| acc + c.abs());
        let mut extra = 0u32;
        let mut bound = Rat::one();
        while bound < mass {
            bound *= rat(10);
            extra += 1;
        }
        let guard = digits + extra + 2;
        let mut acc = self.constant.clone();
        for (&p, c) in &self.logs {
            acc += c * ln_rat(&rat(p as i64), guard);
        }
        acc
    }
}

impl From<Rat> for LogCombo {
    fn from(c: Rat) -> Self {
        Self::from_constant(c)
    }
}

impl Add<&LogCombo> for LogCombo {
    type Output = LogCombo;
    fn add(mut self, rhs: &LogCombo) -> LogCombo {
        self.constant += &rhs.constant;
        for (&p, c) in &rhs.logs {
            let entry = self.logs.entry(p).or_insert_with(Rat::zero);
            *entry += c;
            if entry.is_zero() {
                self.logs.remove(&p);
            }
        }
        self
    }
}

impl Sub<&LogCombo> for LogCombo {
    type Output = LogCombo;
    fn sub(self, rhs: &LogCombo) -> LogCombo {
        self + &(-rhs.clone())
    }
}

impl Neg for LogCombo {
    type Output = LogCombo;
    fn neg(self) -> LogCombo {
        Self {
            constant: -self.constant,
            logs: self.logs.into_iter().map(|(p, c)| (p, -c)).collect(),
        }
    }
}

impl fmt::Display for LogCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        if !self.constant.is_zero() || self.logs.is_empty() {
            write!(f, "{}", format_rat(&self.constant))?;
            wrote = true;
        }
        for (&p, c) in &self.logs {
            if wrote {
                if c.is_negative() {
                    write!(f, " - {}*ln({})", format_rat(&c.abs()), p)?;
                } else {
                    write!(f, " + {}*ln({})", format_rat(c), p)?;
                }
            } else {
                write!(f, "{}*ln({})", format_rat(c), p)?;
                wrote = true;
            }
        }
        Ok(())
    }
}
