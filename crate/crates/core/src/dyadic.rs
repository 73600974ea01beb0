//! Exact dyadic rationals `a / 2^b`.
//!
//! Every kernel, partial sum and `L_1` quantity in this crate is a dyadic
//! rational, so a 128-bit numerator over a power-of-two denominator is enough
//! to keep them exact. Values are kept in lowest terms: either the numerator
//! is odd or the shift is zero.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest shift accepted anywhere; keeps `2^shift` inside an `i128`.
pub const MAX_SHIFT: u32 = 126;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    numer: i128,
    shift: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { numer: 0, shift: 0 };
    pub const ONE: Dyadic = Dyadic { numer: 1, shift: 0 };

    /// `numer / 2^shift`, reduced to lowest terms.
    pub fn new(numer: i128, shift: u32) -> Self {
        if numer == 0 {
            return Self::ZERO;
        }
        let tz = numer.trailing_zeros().min(shift);
        Dyadic {
            numer: numer >> tz,
            shift: shift - tz,
        }
    }

    pub fn from_int(v: i128) -> Self {
        Dyadic { numer: v, shift: 0 }
    }

    /// `2^e` for a (possibly negative) integer exponent.
    pub fn pow2(e: i32) -> Result<Self> {
        if e >= 0 {
            if e as u32 > MAX_SHIFT {
                return Err(Error::Overflow("pow2"));
            }
            Ok(Dyadic::from_int(1i128 << e))
        } else {
            let s = e.unsigned_abs();
            if s > MAX_SHIFT {
                return Err(Error::Overflow("pow2"));
            }
            Ok(Dyadic { numer: 1, shift: s })
        }
    }

    pub fn numer(&self) -> i128 {
        self.numer
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn is_zero(&self) -> bool {
        self.numer == 0
    }

    pub fn signum(&self) -> i32 {
        self.numer.signum() as i32
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            numer: self.numer.abs(),
            shift: self.shift,
        }
    }

    /// Numerator rescaled to the (larger) shift `s`.
    fn numer_at(&self, s: u32) -> Result<i128> {
        debug_assert!(s >= self.shift);
        let up = s - self.shift;
        if up == 0 {
            return Ok(self.numer);
        }
        if up > MAX_SHIFT {
            return Err(Error::Overflow("dyadic rescale"));
        }
        self.numer
            .checked_mul(1i128 << up)
            .ok_or(Error::Overflow("dyadic rescale"))
    }

    pub fn checked_add(&self, rhs: &Dyadic) -> Result<Dyadic> {
        let s = self.shift.max(rhs.shift);
        let a = self.numer_at(s)?;
        let b = rhs.numer_at(s)?;
        Ok(Dyadic::new(
            a.checked_add(b).ok_or(Error::Overflow("dyadic add"))?,
            s,
        ))
    }

    pub fn checked_sub(&self, rhs: &Dyadic) -> Result<Dyadic> {
        self.checked_add(&rhs.neg())
    }

    pub fn checked_mul(&self, rhs: &Dyadic) -> Result<Dyadic> {
        let shift = self.shift + rhs.shift;
        if shift > MAX_SHIFT {
            return Err(Error::Overflow("dyadic mul"));
        }
        let numer = self
            .numer
            .checked_mul(rhs.numer)
            .ok_or(Error::Overflow("dyadic mul"))?;
        Ok(Dyadic::new(numer, shift))
    }

    /// Division by `2^k`.
    pub fn div_pow2(&self, k: u32) -> Result<Dyadic> {
        let shift = self.shift + k;
        if shift > MAX_SHIFT {
            return Err(Error::Overflow("dyadic div_pow2"));
        }
        Ok(Dyadic::new(self.numer, shift))
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            numer: -self.numer,
            shift: self.shift,
        }
    }

    pub fn to_f64(&self) -> f64 {
        // The power of two is exact in binary floating point.
        (self.numer as f64) * (-(self.shift as f64)).exp2()
    }

    pub fn to_ratio(&self) -> Ratio<i128> {
        Ratio::new(self.numer, 1i128 << self.shift)
    }

    /// Exact conversion of a finite float (every finite `f64` is dyadic).
    pub fn from_f64(x: f64) -> Result<Dyadic> {
        if !x.is_finite() {
            return Err(Error::NotExact(format!("{x} is not finite")));
        }
        if x == 0.0 {
            return Ok(Self::ZERO);
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i128 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1i128 << 52), exp - 1075)
        };
        if e >= 0 {
            if e > 70 {
                return Err(Error::Overflow("from_f64"));
            }
            Ok(Dyadic::from_int(sign * (mant << e)))
        } else {
            let tz = mant.trailing_zeros().min(e.unsigned_abs());
            let shift = e.unsigned_abs() - tz;
            if shift > MAX_SHIFT {
                return Err(Error::NotExact(format!("{x} needs shift {shift}")));
            }
            Ok(Dyadic::new(sign * (mant >> tz), shift))
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let s = self.shift.max(other.shift);
        match (self.numer_at(s), other.numer_at(s)) {
            (Ok(a), Ok(b)) => a.cmp(&b),
            // Rescaling overflowed: fall back to the rational comparison.
            _ => self.to_ratio().cmp(&other.to_ratio()),
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numer, self.shift)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `a/2^b` and bare integers.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("expected `a/2^b`, got {s:?}"));
        match s.split_once('/') {
            None => s.parse::<i128>().map(Dyadic::from_int).map_err(|_| bad()),
            Some((a, rest)) => {
                let b = rest.trim().strip_prefix("2^").ok_or_else(bad)?;
                let numer = a.trim().parse::<i128>().map_err(|_| bad())?;
                let shift = b.parse::<u32>().map_err(|_| bad())?;
                if shift > MAX_SHIFT {
                    return Err(bad());
                }
                Ok(Dyadic::new(numer, shift))
            }
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A number that is either exact or a double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Number {
    Exact(Dyadic),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(d) => d.to_f64(),
            Number::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<Dyadic> {
        match self {
            Number::Exact(d) => Some(*d),
            Number::Float(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }
}

impl From<Dyadic> for Number {
    fn from(d: Dyadic) -> Self {
        Number::Exact(d)
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Float(x)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(d) => write!(f, "{d}"),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Number::Exact(d) => d.serialize(serializer),
            Number::Float(x) => serializer.serialize_f64(*x),
        }
    }
}
