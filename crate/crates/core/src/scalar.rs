//! Coefficient fields used by the series types.
//!
//! Algebraic routines run over exact rationals ([`Q`]); Monte Carlo and
//! Fourier evaluation run over `f64`. Both implement [`Scalar`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational coefficients.
pub type Q = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_q(q: &Q) -> Self;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
    /// Equality used by the group-like tests: exact for rationals, relative
    /// tolerance for floats.
    fn near(&self, other: &Self) -> bool;
    fn is_negative(&self) -> bool;
    /// Text form used by the series printer.
    fn fmt_coeff(&self) -> String;
}

impl Scalar for Q {
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn from_i64(n: i64) -> Self {
        Q::from_integer(BigInt::from(n))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs_f64(&self) -> f64 {
        Scalar::to_f64(&self.abs())
    }
    fn near(&self, other: &Self) -> bool {
        self == other
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn fmt_coeff(&self) -> String {
        format_q(self)
    }
}

impl Scalar for f64 {
    fn from_q(q: &Q) -> Self {
        Scalar::to_f64(q)
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn near(&self, other: &Self) -> bool {
        let scale = 1.0f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= 1e-9 * scale
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn fmt_coeff(&self) -> String {
        format!("{self}")
    }
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational value of a finite double.
pub fn q_from_f64(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| Error::domain(format!("non-finite value {x}")))
}

/// Round `x` to the nearest multiple of `2^-bits` and return it exactly.
pub fn dyadic(x: f64, bits: u32) -> Q {
    let scale = (bits as f64).exp2();
    let n = (x * scale).round() as i64;
    Q::new(BigInt::from(n), BigInt::one() << bits as usize)
}

/// Parse `p/q`, an integer, or a decimal such as `2.5` into an exact rational.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::parse(s, 0, "expected a rational number");
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::parse(s, 0, "zero denominator"));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) || !ip.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{ip}{fp}");
        let n: BigInt = if digits.is_empty() {
            return Err(bad());
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let d = num::pow(BigInt::from(10), fp.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

/// `p/q` or `p` when the denominator is one.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}
