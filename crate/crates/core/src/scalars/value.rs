use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

use crate::error::Error;

/// An element of the value group, or +∞.
///
/// Finite values are `a + b√2` with exact rationals; `b` is zero for every
/// value of a rational-mode field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Finite { a: BigRational, b: BigRational },
    Infinity,
}

/// Sign of `x + y√2`, decided exactly.
pub(crate) fn quad_sign(x: &BigRational, y: &BigRational) -> Ordering {
    let zero = BigRational::zero();
    match (x.cmp(&zero), y.cmp(&zero)) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
        (Ordering::Less, Ordering::Less) => Ordering::Less,
        (Ordering::Greater, Ordering::Less) => {
            let two = BigRational::from_integer(2.into());
            (x * x).cmp(&(two * y * y))
        }
        (Ordering::Less, Ordering::Greater) => {
            let two = BigRational::from_integer(2.into());
            (two * y * y).cmp(&(x * x))
        }
    }
}

impl Value {
    pub fn zero() -> Self {
        Value::int(0)
    }

    pub fn int(n: i64) -> Self {
        Value::rat(BigRational::from_integer(n.into()))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Value::rat(BigRational::new(n.into(), d.into()))
    }

    pub fn rat(a: BigRational) -> Self {
        Value::Finite { a, b: BigRational::zero() }
    }

    pub fn quad(a: BigRational, b: BigRational) -> Self {
        Value::Finite { a, b }
    }

    /// a + b√2 with integer parts.
    pub fn quad_int(a: i64, b: i64) -> Self {
        Value::quad(BigRational::from_integer(a.into()), BigRational::from_integer(b.into()))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Value::Finite { .. })
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Value::Infinity)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Finite { a, b } if a.is_zero() && b.is_zero())
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, Value::Finite { b, .. } if !b.is_zero())
    }

    /// Rational and √2 parts; `None` for ∞.
    pub fn parts(&self) -> Option<(&BigRational, &BigRational)> {
        match self {
            Value::Finite { a, b } => Some((a, b)),
            Value::Infinity => None,
        }
    }

    /// The rational part of a rational-mode value.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Value::Finite { a, b } if b.is_zero() => Some(a),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational()
            .filter(|a| a.is_integer())
            .map(|a| a.to_integer())
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Finite { a, b }, Value::Finite { a: c, b: d }) => Value::Finite { a: a + c, b: b + d },
            _ => Value::Infinity,
        }
    }

    /// `self − other`; the subtrahend must be finite.
    pub fn sub(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Finite { a, b }, Value::Finite { a: c, b: d }) => Value::Finite { a: a - c, b: b - d },
            (Value::Infinity, Value::Finite { .. }) => Value::Infinity,
            (_, Value::Infinity) => panic!("cannot subtract an infinite value"),
        }
    }

    pub fn neg(&self) -> Value {
        match self {
            Value::Finite { a, b } => Value::Finite { a: -a, b: -b },
            Value::Infinity => panic!("cannot negate an infinite value"),
        }
    }

    /// `n·self`, with the convention `0·∞ = 0`.
    pub fn mul_int(&self, n: i64) -> Value {
        self.mul_big(&BigInt::from(n))
    }

    pub fn mul_big(&self, n: &BigInt) -> Value {
        if n.is_zero() {
            return Value::zero();
        }
        match self {
            Value::Finite { a, b } => {
                let n = BigRational::from_integer(n.clone());
                Value::Finite { a: a * &n, b: b * &n }
            }
            Value::Infinity if n.is_positive() => Value::Infinity,
            Value::Infinity => panic!("negative multiple of an infinite value"),
        }
    }

    pub fn mul_rat(&self, q: &BigRational) -> Value {
        if q.is_zero() {
            return Value::zero();
        }
        match self {
            Value::Finite { a, b } => Value::Finite { a: a * q, b: b * q },
            Value::Infinity if q.is_positive() => Value::Infinity,
            Value::Infinity => panic!("negative multiple of an infinite value"),
        }
    }

    pub fn div_int(&self, n: i64) -> Value {
        self.mul_rat(&BigRational::new(1.into(), n.into()))
    }

    pub fn min(self, other: Value) -> Value {
        std::cmp::min(self, other)
    }

    /// Decimal approximation for display only.
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Finite { a, b } => {
                a.to_f64().unwrap_or(f64::NAN) + b.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
            }
            Value::Infinity => f64::INFINITY,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Infinity => json!("inf"),
            Value::Finite { a, b } if b.is_zero() => rational_json(a),
            Value::Finite { a, b } => json!({"a": rational_text(a), "b": rational_text(b), "mode": "quadratic"}),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Value, Error> {
        match v {
            serde_json::Value::String(s) if s == "inf" => Ok(Value::Infinity),
            serde_json::Value::String(s) => parse_rational(s).map(Value::rat),
            serde_json::Value::Number(_) => json_rational(v).map(Value::rat),
            serde_json::Value::Object(map) => {
                if map.contains_key("a") {
                    let a = json_rational(&map["a"])?;
                    let b = map.get("b").map(json_rational).transpose()?.unwrap_or_else(BigRational::zero);
                    Ok(Value::quad(a, b))
                } else {
                    json_rational(v).map(Value::rat)
                }
            }
            _ => Err(Error::Json(format!("not a value: {v}"))),
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Infinity, Value::Infinity) => Ordering::Equal,
            (Value::Infinity, _) => Ordering::Greater,
            (_, Value::Infinity) => Ordering::Less,
            (Value::Finite { a, b }, Value::Finite { a: c, b: d }) => quad_sign(&(a - c), &(b - d)),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Infinity => write!(f, "∞"),
            Value::Finite { a, b } if b.is_zero() => write!(f, "{a}"),
            Value::Finite { a, b } if a.is_zero() => write!(f, "{b}√2"),
            Value::Finite { a, b } => write!(f, "{a}+{b}√2"),
        }
    }
}

fn big_json(n: &BigInt) -> serde_json::Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

/// `{"num":…,"den":…}` with integers when they fit, strings otherwise.
pub fn rational_json(q: &BigRational) -> serde_json::Value {
    json!({"num": big_json(q.numer()), "den": big_json(q.denom())})
}

pub fn rational_text(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    let bad = || Error::Json(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

fn json_int(v: &serde_json::Value) -> Result<BigInt, Error> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| Error::Json(format!("not an integer: {n}"))),
        serde_json::Value::String(s) => s.trim().parse().map_err(|_| Error::Json(format!("not an integer: {s:?}"))),
        _ => Err(Error::Json(format!("not an integer: {v}"))),
    }
}

/// Accepts `{"num","den"}`, an integer, or a `"n/d"` string.
pub fn json_rational(v: &serde_json::Value) -> Result<BigRational, Error> {
    match v {
        serde_json::Value::Object(map) => {
            let n = json_int(map.get("num").ok_or_else(|| Error::Json("missing num".into()))?)?;
            let d = match map.get("den") {
                Some(d) => json_int(d)?,
                None => BigInt::one(),
            };
            if d.is_zero() {
                return Err(Error::Json("zero denominator".into()));
            }
            Ok(BigRational::new(n, d))
        }
        serde_json::Value::String(s) => parse_rational(s),
        _ => json_int(v).map(BigRational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Value {
        Value::quad(BigRational::from_integer(a.into()), BigRational::from_integer(b.into()))
    }

    #[test]
    fn rational_order() {
        assert!(Value::frac(1, 2) < Value::int(1));
        assert!(Value::int(5) < Value::Infinity);
        assert_eq!(Value::Infinity, Value::Infinity);
        assert_eq!(Value::frac(2, 4), Value::frac(1, 2));
    }

    #[test]
    fn quadratic_order() {
        // √2 ≈ 1.414
        assert!(q(1, 0) < q(0, 1));
        assert!(q(0, 1) < q(2, 0));
        assert!(q(3, -2) > q(0, 0)); // 3 − 2.828
        assert!(q(-3, 2) < q(0, 0));
        assert!(q(7, -5) < q(0, 0)); // 7 − 7.07
    }

    #[test]
    fn infinity_absorbs() {
        assert_eq!(Value::Infinity.add(&Value::int(3)), Value::Infinity);
        assert_eq!(Value::Infinity.mul_int(0), Value::zero());
    }

    #[test]
    fn json_round_trip() {
        for v in [Value::frac(-3, 7), Value::Infinity, q(1, -1), Value::int(0)] {
            assert_eq!(Value::from_json(&v.to_json()).unwrap(), v);
        }
        assert_eq!(Value::frac(3, 2).to_json(), json!({"num": 3, "den": 2}));
    }

    proptest::proptest! {
        #[test]
        fn quadratic_order_is_total(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50, e in -50i64..50, f in -50i64..50) {
            let (x, y, z) = (q(a, b), q(c, d), q(e, f));
            let lt = (x < y) as u8 + (x == y) as u8 + (x > y) as u8;
            proptest::prop_assert_eq!(lt, 1);
            if x <= y && y <= z { proptest::prop_assert!(x <= z); }
            let fx = x.to_f64(); let fy = y.to_f64();
            if (fx - fy).abs() > 1e-9 { proptest::prop_assert_eq!(x < y, fx < fy); }
        }
    }
}
