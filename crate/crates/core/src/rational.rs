//! Exact rational coordinates and the exact phase reduction used by every
//! exponential evaluated on an atom.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

/// Formats as `num/den`, or `num` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Malformed(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

/// Exact rational value of a finite double (every double is dyadic).
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    BigRational::from_f64(x).ok_or_else(|| Error::Malformed(format!("non-finite value {x}")))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A point of `Q^d`, ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RationalPoint(pub Vec<Rational>);

impl RationalPoint {
    pub fn zero(dim: usize) -> Self {
        RationalPoint(vec![Rational::zero(); dim])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        RationalPoint(v.iter().map(|&x| int(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn add(&self, other: &RationalPoint) -> RationalPoint {
        RationalPoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RationalPoint) -> RationalPoint {
        RationalPoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> RationalPoint {
        RationalPoint(self.0.iter().map(|a| -a).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn norm_sq(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, c| acc + c * c)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }

    pub fn norm_f64(&self) -> f64 {
        self.to_f64().iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for RationalPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.0.iter().map(format_rational).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map(RationalPoint)
            .map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a single rational stored as a `"num/den"` string.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        format_rational(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// A rational coordinate prepared for repeated phase evaluation.
#[derive(Clone, Debug)]
pub enum PhaseCoord {
    Small { num: i128, den: i128 },
    Big { num: BigInt, den: BigInt },
}

impl PhaseCoord {
    pub fn new(r: &Rational) -> Self {
        match (r.numer().to_i128(), r.denom().to_i128()) {
            (Some(num), Some(den)) => PhaseCoord::Small { num, den },
            _ => PhaseCoord::Big {
                num: r.numer().clone(),
                den: r.denom().clone(),
            },
        }
    }

    /// Fractional part of `freq * self` in `[0, 1)`, reduced exactly before
    /// rounding to a double.
    pub fn frac_times(&self, freq: f64) -> f64 {
        if freq == 0.0 {
            return 0.0;
        }
        let (mant, exp, sign) = num_traits::float::FloatCore::integer_decode(freq);
        let mant = i128::from(mant) * i128::from(sign);
        if let PhaseCoord::Small { num, den } = self {
            if let Some(f) = small_frac(mant, exp, *num, *den) {
                return f;
            }
        }
        let (num, den) = match self {
            PhaseCoord::Small { num, den } => (BigInt::from(*num), BigInt::from(*den)),
            PhaseCoord::Big { num, den } => (num.clone(), den.clone()),
        };
        let mut n = BigInt::from(mant) * num;
        let mut d = den;
        if exp >= 0 {
            n <<= exp as usize;
        } else {
            d <<= (-exp) as usize;
        }
        let r = n.mod_floor(&d);
        BigRational::new(r, d).to_f64().unwrap_or(0.0)
    }
}

fn small_frac(mant: i128, exp: i16, num: i128, den: i128) -> Option<f64> {
    let pow2 = |e: u32| 1i128.checked_shl(e).filter(|v| *v > 0);
    let mut n = mant.checked_mul(num)?;
    let mut d = den;
    if exp >= 0 {
        n = n.checked_mul(pow2(exp as u32)?)?;
    } else {
        d = d.checked_mul(pow2((-exp) as u32)?)?;
    }
    Some(n.rem_euclid(d) as f64 / d as f64)
}

/// Fractional part of `<freq, x>` in `[0, 1)` for an exact point `x`.
pub fn phase_turns(freq: &[f64], coords: &[PhaseCoord]) -> f64 {
    let mut acc = 0.0;
    for (f, c) in freq.iter().zip(coords) {
        acc += c.frac_times(*f);
    }
    acc - acc.floor()
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Default, Debug)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `sqrt` of a nonnegative rational when it is a perfect square.
pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}
