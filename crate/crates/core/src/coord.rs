//! Exact coordinates and operator indices.
//!
//! Domain coordinates are arbitrary-precision rationals so that interval
//! algebra stays exact at the depths the construction reaches (member
//! lengths fall far below `f64` spacing after a few levels). Kernel
//! evaluation converts to `f64` at the last moment.

use std::fmt;
use std::str::FromStr;

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Coord = BigRational;

/// Exact rational value of a finite double.
pub fn from_f64(x: f64) -> Coord {
    BigRational::from_float(x).expect("finite coordinate")
}

pub fn to_f64(x: &Coord) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn int(n: i64) -> Coord {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Coord {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> Coord {
    let p = BigInt::one() << (e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

pub fn half(x: &Coord) -> Coord {
    x / int(2)
}

/// Largest power of two not exceeding `x > 0`, returned as its exponent.
pub fn floor_log2(x: &Coord) -> i64 {
    debug_assert!(x.is_positive());
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let mut e = nb - db;
    // 2^(nb-1) <= numer < 2^nb, same for denom: e-1 <= log2 x < e+1
    if &pow2(e) > x {
        e -= 1;
    }
    e
}

/// Parse `"p/q"`, an integer, or a decimal string into an exact rational.
pub fn parse(s: &str) -> Result<Coord> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("{s}: zero denominator")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (
            &s[..i],
            s[i + 1..]
                .parse::<i64>()
                .map_err(|e| Error::Parse(format!("{s}: {e}")))?,
        ),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let n = BigInt::from_str(&digits).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u8);
    let v = if scale >= 0 {
        BigRational::from_integer(n * num::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num::pow(ten, (-scale) as usize))
    };
    Ok(v)
}

/// Serialized form of a coordinate: a JSON number when the value is exactly
/// a double, otherwise a `"p/q"` string.
pub fn to_json_value(x: &Coord) -> serde_json::Value {
    let f = to_f64(x);
    if f.is_finite() && &from_f64(f) == x {
        serde_json::json!(f)
    } else {
        serde_json::Value::String(format!("{}/{}", x.numer(), x.denom()))
    }
}

pub fn from_json_value(v: &serde_json::Value) -> Result<Coord> {
    match v {
        serde_json::Value::Number(n) => {
            let f = n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("non-finite number {n}")))?;
            Ok(from_f64(f))
        }
        serde_json::Value::String(s) => parse(s),
        other => Err(Error::Parse(format!("expected coordinate, got {other}"))),
    }
}

/// Serde adapter for [`Coord`] fields.
pub mod serde_coord {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Coord, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_json_value(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Coord, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        from_json_value(&v).map_err(de::Error::custom)
    }
}

/// Serde adapter for `Vec<Coord>`.
pub mod serde_coords {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Coord], s: S) -> std::result::Result<S::Ok, S::Error> {
        xs.iter().map(to_json_value).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Coord>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter()
            .map(|x| from_json_value(x).map_err(de::Error::custom))
            .collect()
    }
}

/// Serde adapter for `Option<Coord>`.
pub mod serde_coord_opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Coord>, s: S) -> std::result::Result<S::Ok, S::Error> {
        x.as_ref().map(to_json_value).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Coord>, D::Error> {
        Option::<serde_json::Value>::deserialize(d)?
            .map(|v| from_json_value(&v).map_err(de::Error::custom))
            .transpose()
    }
}

/// Operator index `n` of a sequence `U_n`.
///
/// Haar indices reach `2^300` and beyond in deep constructions, so the
/// index is a big unsigned integer; it serializes as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Index(pub BigUint);

impl Index {
    pub fn new(n: u64) -> Self {
        Index(BigUint::from(n))
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn succ(&self) -> Self {
        Index(&self.0 + 1u32)
    }

    pub fn pred(&self) -> Option<Self> {
        if self.0.is_zero() {
            None
        } else {
            Some(Index(&self.0 - 1u32))
        }
    }

    pub fn pow2(e: u64) -> Self {
        Index(BigUint::one() << e as usize)
    }

    /// Floor of log2, `None` for zero.
    pub fn log2(&self) -> Option<u64> {
        if self.0.is_zero() {
            None
        } else {
            Some(self.0.bits() - 1)
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }
}

impl From<u64> for Index {
    fn from(n: u64) -> Self {
        Index::new(n)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Index {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BigUint::from_str(s.trim())
            .map(Index)
            .map_err(|e| Error::Parse(format!("index {s}: {e}")))
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Index;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative integer or decimal string")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Index, E> {
                Ok(Index::new(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Index, E> {
                u64::try_from(v)
                    .map(Index::new)
                    .map_err(|_| E::custom("negative index"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Index, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse("-1.5e-1").unwrap(), ratio(-3, 20));
        assert_eq!(parse("7").unwrap(), int(7));
        assert!(parse("1/0").is_err());
    }

    #[test]
    fn json_roundtrip_keeps_exactness() {
        for x in [ratio(1, 3), ratio(3, 8), from_f64(std::f64::consts::PI)] {
            let v = to_json_value(&x);
            assert_eq!(from_json_value(&v).unwrap(), x);
        }
        assert!(to_json_value(&ratio(3, 8)).is_number());
        assert!(to_json_value(&ratio(1, 3)).is_string());
    }

    #[test]
    fn floor_log2_matches_powers() {
        assert_eq!(floor_log2(&ratio(1, 3)), -2);
        assert_eq!(floor_log2(&int(8)), 3);
        assert_eq!(floor_log2(&ratio(7, 8)), -1);
        assert_eq!(floor_log2(&pow2(-300)), -300);
    }

    #[test]
    fn index_serde_and_arith() {
        let n = Index::pow2(200);
        let s = serde_json::to_string(&n).unwrap();
        let back: Index = serde_json::from_str(&s).unwrap();
        assert_eq!(back, n);
        let small: Index = serde_json::from_str("12").unwrap();
        assert_eq!(small, Index::new(12));
        assert_eq!(Index::new(0).pred(), None);
        assert_eq!(Index::new(9).log2(), Some(3));
    }
}
