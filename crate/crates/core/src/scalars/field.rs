use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde_json::json;

use super::value::{json_rational, rational_json};
use crate::error::{Error, Result};

/// A field given by a context object; elements carry no context of their own.
pub trait Field: Clone + Debug + Send + Sync {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn from_int(&self, n: &BigInt) -> Self::Elem;
    /// 0 in characteristic zero.
    fn characteristic(&self) -> u64;
    fn show(&self, a: &Self::Elem) -> String;

    fn is_one(&self, a: &Self::Elem) -> bool {
        self.is_zero(&self.sub(a, &self.one()))
    }

    fn from_i64(&self, n: i64) -> Self::Elem {
        self.from_int(&BigInt::from(n))
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        let bi = self.inv(b).ok_or(Error::DivisionByZero)?;
        Ok(self.mul(a, &bi))
    }

    fn pow(&self, a: &Self::Elem, e: &BigUint) -> Self::Elem {
        let mut result = self.one();
        let mut base = a.clone();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                result = self.mul(&result, &base);
            }
            if i + 1 < bits {
                base = self.mul(&base, &base);
            }
        }
        result
    }
}

/// Fields that may serve as the bottom of a residue tower: F_p or ℚ.
pub trait ResidueBase: Field {
    /// Smallest non-negative integer over F_p, identity over ℚ.
    fn canonical_rational(&self, a: &Self::Elem) -> BigRational;
    fn from_rational(&self, q: &BigRational) -> Option<Self::Elem>;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
    /// Every element, for finite fields.
    fn elements(&self) -> Option<Vec<Self::Elem>>;

    fn to_json(&self, a: &Self::Elem) -> serde_json::Value {
        let q = self.canonical_rational(a);
        if q.is_integer() {
            match q.numer().to_i64() {
                Some(n) => json!(n),
                None => json!(q.numer().to_string()),
            }
        } else {
            rational_json(&q)
        }
    }

    fn from_json(&self, v: &serde_json::Value) -> Result<Self::Elem> {
        let q = json_rational(v)?;
        self.from_rational(&q).ok_or_else(|| Error::Json(format!("{q} is not in the residue field")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p >= 1 << 31 || !is_prime(p) {
            return Err(Error::Json(format!("{p} is not a supported prime")));
        }
        Ok(PrimeField { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn reduce(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.p)).to_u64().unwrap()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a) % self.p
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        let e = (*a as i64).extended_gcd(&(self.p as i64));
        Some(e.x.rem_euclid(self.p as i64) as u64)
    }
    fn from_int(&self, n: &BigInt) -> u64 {
        self.reduce(n)
    }
    fn characteristic(&self) -> u64 {
        self.p
    }
    fn show(&self, a: &u64) -> String {
        a.to_string()
    }
}

impl ResidueBase for PrimeField {
    fn canonical_rational(&self, a: &u64) -> BigRational {
        BigRational::from_integer((*a).into())
    }
    fn from_rational(&self, q: &BigRational) -> Option<u64> {
        let d = self.reduce(q.denom());
        let di = self.inv(&d)?;
        Some(self.mul(&self.reduce(q.numer()), &di))
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }
    fn elements(&self) -> Option<Vec<u64>> {
        Some((0..self.p).collect())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn from_int(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }
    fn characteristic(&self) -> u64 {
        0
    }
    fn show(&self, a: &BigRational) -> String {
        if a.is_integer() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
}

impl ResidueBase for Rationals {
    fn canonical_rational(&self, a: &BigRational) -> BigRational {
        a.clone()
    }
    fn from_rational(&self, q: &BigRational) -> Option<BigRational> {
        Some(q.clone())
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        BigRational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=4).into())
    }
    fn elements(&self) -> Option<Vec<BigRational>> {
        None
    }
}

/// p-adic value of a non-zero integer.
pub fn int_val(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// The p-adic value used by character computations: ν_p(0) = ∞ (`None`), and
/// `p = 1` (characteristic zero) gives 0 for every non-zero integer.
pub fn p_val(n: u64, p: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    if p <= 1 {
        return Some(0);
    }
    let (mut n, mut k) = (n, 0);
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    Some(k)
}

pub fn is_p_power(n: u64, p: u64) -> bool {
    if n == 0 {
        return false;
    }
    if p <= 1 {
        return n == 1;
    }
    let mut n = n;
    while n % p == 0 {
        n /= p;
    }
    n == 1
}
