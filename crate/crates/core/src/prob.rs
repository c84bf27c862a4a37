//! Probability values used by the solvers.
//!
//! Every solver is generic over [`Probability`]. Two carriers exist: exact
//! rationals ([`Exact`], the default everywhere) and `f64` for quick runs.
//! Edge parameters are always stored exactly and converted on entry.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact probability.
pub type Exact = BigRational;

/// Default tie tolerance for inexact arithmetic.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Arithmetic needed by the success recursion.
///
/// Values stay in `[0, 1]`: the solvers only multiply, add convex
/// combinations and take complements.
pub trait Probability: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_exact(p: &Exact) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn add(&self, other: &Self) -> Self;
    /// `1 - self`.
    fn complement(&self) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    /// Three-way comparison. Exact values ignore `tol`; floats within `tol`
    /// of each other compare equal.
    fn compare(&self, other: &Self, tol: f64) -> Ordering;
    /// Human-readable rendering: the exact fraction (when there is one)
    /// followed by a 12-significant-digit decimal.
    fn render(&self) -> String;
}

impl Probability for Exact {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_exact(p: &Exact) -> Self {
        p.clone()
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn complement(&self) -> Self {
        <Exact as One>::one() - self
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn compare(&self, other: &Self, _tol: f64) -> Ordering {
        self.cmp(other)
    }

    fn render(&self) -> String {
        format!("{} ({})", self, format_significant(Probability::to_f64(self), 12))
    }
}

impl Probability for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_exact(p: &Exact) -> Self {
        ToPrimitive::to_f64(p).unwrap_or(f64::NAN)
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn complement(&self) -> Self {
        1.0 - self
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn compare(&self, other: &Self, tol: f64) -> Ordering {
        if (self - other).abs() <= tol {
            Ordering::Equal
        } else if self < other {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    fn render(&self) -> String {
        format_significant(*self, 12)
    }
}

/// Parses a probability written as a decimal (`"0.25"`, `".5"`, `"1"`) or a
/// fraction (`"3/4"`). No binary rounding happens on the way in.
pub fn parse_probability(text: &str) -> Result<Exact, Error> {
    let s = text.trim();
    let bad = |why: &str| Error::BadProbability(text.to_string(), why.to_string());
    let value = if s.contains('/') {
        Exact::from_str(s).map_err(|_| bad("not a fraction"))?
    } else {
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if (int_part.is_empty() && frac_part.is_empty()) || !all_digits(int_part) || !all_digits(frac_part) {
            return Err(bad("not a decimal"));
        }
        let digits = format!("{int_part}{frac_part}");
        let numer = BigInt::from_str(&digits).map_err(|_| bad("not a decimal"))?;
        let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
        Exact::new(numer, denom)
    };
    if value.is_negative() || value > <Exact as One>::one() {
        return Err(bad("outside [0, 1]"));
    }
    Ok(value)
}

/// Writes an exact probability back out: as a terminating decimal when one
/// exists, otherwise as `numer/denom`. Inverse of [`parse_probability`].
pub fn format_exact(p: &Exact) -> String {
    let mut den = p.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_multiple_of(&two) {
        den /= &two;
        twos += 1;
    }
    while den.is_multiple_of(&five) {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", p.numer(), p.denom());
    }
    let scale = twos.max(fives);
    if scale == 0 {
        return p.numer().to_string();
    }
    let scaled = p * Exact::from_integer(num_traits::pow(BigInt::from(10u32), scale));
    let digits = scaled.to_integer().abs().to_string();
    let padded = format!("{digits:0>width$}", width = scale + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - scale);
    let sign = if p.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

/// Fixed-point rendering with `sig` significant digits.
pub fn format_significant(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.prec$}", prec = sig.saturating_sub(1));
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Arithmetic carrier selected at run time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Rational,
    Float,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown mode {other:?}, expected rational|float")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        })
    }
}
