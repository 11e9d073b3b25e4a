use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::json;

use super::ValuationOracle;
use crate::chain::KPoly;
use crate::error::{Error, Result};
use crate::poly::PolyOps;
use crate::scalars::{int_val, is_irreducible, PAdic, Rationals, TElem, TowerField, Value, ValuedField, RATIONAL_DEGREE_BOUND};

/// Largest p-adic precision tried before giving up.
const MAX_PRECISION: i64 = 1 << 12;

/// ν′(f) = ν(f(θ)) for θ ∈ ℤ_p the root of `m` congruent to `start`, with
/// `ν(m(start)) > 2ν(m′(start))`. `m` must be irreducible over ℚ.
#[derive(Clone, Debug)]
pub struct HenselRootOracle {
    field: PAdic,
    min_poly: KPoly<PAdic>,
    /// m scaled to primitive integer coefficients.
    m_int: Vec<BigInt>,
    dm_int: Vec<BigInt>,
    start: BigInt,
    /// ν(m′(θ)).
    s: i64,
}

fn to_integer_poly(f: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let den = f.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    (f.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect(), den)
}

fn eval_int(f: &[BigInt], a: &BigInt, modulus: &BigInt) -> BigInt {
    f.iter().rev().fold(BigInt::zero(), |acc, c| (acc * a + c).mod_floor(modulus))
}

fn big_val(n: &BigInt, p: u64) -> i64 {
    if n.is_zero() {
        i64::MAX
    } else {
        int_val(n, p)
    }
}

impl HenselRootOracle {
    pub fn new(field: PAdic, min_poly: KPoly<PAdic>, start: BigInt) -> Result<Self> {
        let p = field.prime();
        if min_poly.deg() < 1 {
            return Err(Error::InvalidOracle("min_poly must have positive degree".into()));
        }
        let q = TowerField::new(Rationals);
        let mq = q.pmake_monic(&q.poly(min_poly.coeffs().iter().map(|c| TElem::Base(c.clone())).collect()));
        match is_irreducible(&q, &mq, RATIONAL_DEGREE_BOUND) {
            Ok(true) => {}
            Ok(false) => return Err(Error::InvalidOracle("min_poly must be irreducible over Q".into())),
            Err(e) => return Err(Error::InvalidOracle(format!("cannot certify min_poly irreducible: {e}"))),
        }
        let (m_int, _) = to_integer_poly(min_poly.coeffs());
        let dm_int: Vec<BigInt> = m_int.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
        let big = BigInt::from(p).pow(64);
        let vm = big_val(&eval_int(&m_int, &start, &big), p);
        let s = big_val(&eval_int(&dm_int, &start, &big), p);
        if s >= 32 || vm <= 2 * s {
            return Err(Error::InvalidOracle(format!("start {start} does not satisfy the Hensel condition")));
        }
        Ok(HenselRootOracle { field, min_poly, m_int, dm_int, start, s })
    }

    pub fn from_json(field: PAdic, spec: &serde_json::Value) -> Result<Self> {
        let m = field.decode_poly(spec.get("min_poly").ok_or_else(|| Error::Json("hensel oracle needs \"min_poly\"".into()))?)?;
        let start = crate::scalars::json_rational(spec.get("start").ok_or_else(|| Error::Json("hensel oracle needs \"start\"".into()))?)?;
        if !start.is_integer() {
            return Err(Error::Json("hensel start must be an integer".into()));
        }
        HenselRootOracle::new(field, m, start.to_integer())
    }

    /// θ mod p^n.
    fn root_mod(&self, n: i64) -> BigInt {
        let p = BigInt::from(self.field.prime());
        let prec = n + 2 * self.s + 1;
        let modulus = p.pow(prec as u32);
        let ps = p.pow(self.s as u32);
        let mut theta = self.start.mod_floor(&modulus);
        loop {
            let r = eval_int(&self.m_int, &theta, &modulus);
            if r.is_zero() || big_val(&r, self.field.prime()) - self.s >= n {
                return theta;
            }
            let d = eval_int(&self.dm_int, &theta, &modulus) / &ps;
            let inv = d.extended_gcd(&modulus).x.mod_floor(&modulus);
            theta = (theta - (r / &ps) * inv).mod_floor(&modulus);
        }
    }
}

impl ValuationOracle<PAdic> for HenselRootOracle {
    fn evaluate(&self, f: &KPoly<PAdic>) -> Result<Value> {
        if f.is_zero() {
            return Ok(Value::Infinity);
        }
        let k = &self.field;
        let g = k.pgcd(f, &self.min_poly);
        if g.deg() >= 1 {
            // m is irreducible, so m divides f.
            return Ok(Value::Infinity);
        }
        let p = k.prime();
        let (fi, den) = to_integer_poly(f.coeffs());
        let dv = int_val(&den, p);
        let mut n = 16i64;
        while n <= MAX_PRECISION {
            let modulus = BigInt::from(p).pow(n as u32);
            let theta = self.root_mod(n);
            let r = eval_int(&fi, &theta, &modulus);
            if !r.is_zero() {
                let v = int_val(&r, p);
                if v < n {
                    return Ok(Value::int(v - dv));
                }
            }
            n *= 2;
        }
        Err(Error::PrecisionExhausted { frontier: Value::int(MAX_PRECISION) })
    }

    fn describe(&self) -> serde_json::Value {
        let start = match self.start.to_i64() {
            Some(s) => json!(s),
            None => json!(self.start.to_string()),
        };
        json!({
            "kind": "hensel",
            "field": self.field.descriptor().to_json(),
            "min_poly": self.field.encode_poly(&self.min_poly),
            "start": start,
        })
    }
}
