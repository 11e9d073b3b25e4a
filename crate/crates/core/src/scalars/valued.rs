use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde_json::json;

use super::field::{int_val, Field, PrimeField, Rationals, ResidueBase};
use super::value::{json_rational, rational_json, Value};
use crate::error::{Error, Result};
use crate::poly::{Poly, PolyOps};

/// A field with a rank-one valuation whose graded pieces are one-dimensional
/// over the residue field, each spanned by a canonical monomial.
pub trait ValuedField: Field {
    type Res: ResidueBase;

    fn residue_field(&self) -> Self::Res;
    /// ν(a); ν(0) = ∞.
    fn val(&self, a: &Self::Elem) -> Value;
    /// Image in k_ν of an element of value 0.
    fn residue(&self, a: &Self::Elem) -> Result<<Self::Res as Field>::Elem>;
    fn from_rational(&self, q: &BigRational) -> Option<Self::Elem>;
    /// Generators of ν(K*).
    fn value_group_gens(&self) -> Vec<Value>;
    /// The canonical element of value γ: p^a, t^a or u^a·v^b.
    fn monomial(&self, gamma: &Value) -> Result<Self::Elem>;
    fn descriptor(&self) -> FieldDescriptor;
    /// Names of the transcendental generators, if any.
    fn symbols(&self) -> &'static [&'static str];
    fn symbol(&self, name: &str) -> Option<Self::Elem>;
    fn to_json(&self, a: &Self::Elem) -> serde_json::Value;
    fn from_json(&self, v: &serde_json::Value) -> Result<Self::Elem>;
    /// A small random element, for self-tests.
    fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;

    fn lift_residue(&self, r: &<Self::Res as Field>::Elem) -> Self::Elem {
        let q = self.residue_field().canonical_rational(r);
        self.from_rational(&q).expect("canonical residue representatives are integral")
    }

    /// `{"coeffs":[c0,c1,…]}`.
    fn encode_poly(&self, f: &Poly<Self::Elem>) -> serde_json::Value {
        json!({"coeffs": f.coeffs().iter().map(|c| self.to_json(c)).collect::<Vec<_>>()})
    }

    fn decode_poly(&self, v: &serde_json::Value) -> Result<Poly<Self::Elem>> {
        let cs = v
            .get("coeffs")
            .and_then(|c| c.as_array())
            .ok_or_else(|| Error::Json("polynomial needs a \"coeffs\" list".into()))?;
        let cs = cs.iter().map(|c| self.from_json(c)).collect::<Result<Vec<_>>>()?;
        Ok(self.poly(cs))
    }

    /// `p = char k_ν`, or 1 when the residue characteristic is zero.
    fn p(&self) -> u64 {
        match self.residue_field().characteristic() {
            0 => 1,
            c => c,
        }
    }
}

/// The serializable description of a supported base field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldDescriptor {
    PAdic { p: u64 },
    FpT { p: u64 },
    QT,
    FpUV { p: u64 },
}

impl FieldDescriptor {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            FieldDescriptor::PAdic { p } => json!({"base": "Q", "p": p}),
            FieldDescriptor::FpT { p } => json!({"base": "Fp_t", "p": p}),
            FieldDescriptor::QT => json!({"base": "Q_t"}),
            FieldDescriptor::FpUV { p } => json!({"base": "Fp_uv", "p": p}),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let base = v.get("base").and_then(|b| b.as_str()).ok_or_else(|| Error::Json("missing field base".into()))?;
        let p = || {
            v.get("p")
                .and_then(|p| p.as_u64())
                .ok_or_else(|| Error::Json(format!("field {base} needs a prime p")))
        };
        let d = match base {
            "Q" => FieldDescriptor::PAdic { p: p()? },
            "Fp_t" => FieldDescriptor::FpT { p: p()? },
            "Q_t" => FieldDescriptor::QT,
            "Fp_uv" => FieldDescriptor::FpUV { p: p()? },
            other => return Err(Error::Json(format!("unknown base field {other:?}"))),
        };
        if let FieldDescriptor::PAdic { p } | FieldDescriptor::FpT { p } | FieldDescriptor::FpUV { p } = d {
            PrimeField::new(p)?;
        }
        Ok(d)
    }
}

fn integer_value(gamma: &Value) -> Result<i64> {
    gamma
        .as_integer()
        .and_then(|n| n.to_i64())
        .ok_or_else(|| Error::NotInGroup(gamma.clone()))
}

/// ℚ with the p-adic valuation, ν(p) = 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAdic {
    p: u64,
    residue: PrimeField,
}

impl PAdic {
    pub fn new(p: u64) -> Result<Self> {
        Ok(PAdic { p, residue: PrimeField::new(p)? })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn rational(&self, n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }
}

impl Field for PAdic {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        Rationals.zero()
    }
    fn one(&self) -> BigRational {
        Rationals.one()
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
        Rationals.inv(a)
    }
    fn from_int(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }
    fn characteristic(&self) -> u64 {
        0
    }
    fn show(&self, a: &BigRational) -> String {
        Rationals.show(a)
    }
}

impl ValuedField for PAdic {
    type Res = PrimeField;

    fn residue_field(&self) -> PrimeField {
        self.residue
    }
    fn val(&self, a: &BigRational) -> Value {
        if a.is_zero() {
            return Value::Infinity;
        }
        Value::int(int_val(a.numer(), self.p) - int_val(a.denom(), self.p))
    }
    fn residue(&self, a: &BigRational) -> Result<u64> {
        let v = self.val(a);
        if !v.is_zero() {
            return Err(Error::NonUnitValue(v));
        }
        Ok(self.residue.from_rational(a).expect("unit"))
    }
    fn from_rational(&self, q: &BigRational) -> Option<BigRational> {
        Some(q.clone())
    }
    fn value_group_gens(&self) -> Vec<Value> {
        vec![Value::int(1)]
    }
    fn monomial(&self, gamma: &Value) -> Result<BigRational> {
        let n = integer_value(gamma)?;
        let p = BigRational::from_integer(self.p.into());
        Ok(if n >= 0 { num_traits::pow(p, n as usize) } else { num_traits::pow(p.recip(), (-n) as usize) })
    }
    fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor::PAdic { p: self.p }
    }
    fn symbols(&self) -> &'static [&'static str] {
        &[]
    }
    fn symbol(&self, _: &str) -> Option<BigRational> {
        None
    }
    fn to_json(&self, a: &BigRational) -> serde_json::Value {
        rational_json(a)
    }
    fn from_json(&self, v: &serde_json::Value) -> Result<BigRational> {
        json_rational(v)
    }
    fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        let n: i64 = rng.gen_range(-40..=40);
        let d: i64 = [1, 1, 1, 2, 3, 4, 5, 6][rng.gen_range(0..8)];
        BigRational::new(n.into(), d.into())
    }
}

/// A reduced rational function `num/den` with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFn<E> {
    pub num: Poly<E>,
    pub den: Poly<E>,
}

/// C(t) with the t-adic valuation, for C = F_p or ℚ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TAdic<C> {
    coef: C,
}

pub type FpT = TAdic<PrimeField>;
pub type QT = TAdic<Rationals>;

impl FpT {
    pub fn fp(p: u64) -> Result<Self> {
        Ok(TAdic { coef: PrimeField::new(p)? })
    }
}

impl QT {
    pub fn q() -> Self {
        TAdic { coef: Rationals }
    }
}

fn t_order<C: Field>(f: &Poly<C::Elem>, c: &C) -> usize {
    f.coeffs().iter().position(|x| !c.is_zero(x)).expect("non-zero polynomial")
}

impl<C: ResidueBase> TAdic<C> {
    pub fn coefficient_field(&self) -> &C {
        &self.coef
    }

    pub fn make(&self, num: Poly<C::Elem>, den: Poly<C::Elem>) -> RatFn<C::Elem> {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFn { num, den: self.coef.pone() };
        }
        let g = self.coef.pgcd(&num, &den);
        let (num, den) = if g.deg() > 0 {
            (self.coef.pdivrem(&num, &g).unwrap().0, self.coef.pdivrem(&den, &g).unwrap().0)
        } else {
            (num, den)
        };
        let l = self.coef.inv(den.lead().unwrap()).unwrap();
        RatFn { num: self.coef.pscale(&num, &l), den: self.coef.pscale(&den, &l) }
    }

    pub fn from_poly(&self, num: Poly<C::Elem>) -> RatFn<C::Elem> {
        RatFn { num, den: self.coef.pone() }
    }

    pub fn t_power(&self, n: i64) -> RatFn<C::Elem> {
        let m = self.coef.pmonomial(self.coef.one(), n.unsigned_abs() as usize);
        if n >= 0 {
            self.from_poly(m)
        } else {
            RatFn { num: self.coef.pone(), den: m }
        }
    }

    fn poly_json(&self, f: &Poly<C::Elem>) -> serde_json::Value {
        serde_json::Value::Array(f.map(|c| self.coef.to_json(c)))
    }

    fn poly_from_json(&self, v: &serde_json::Value) -> Result<Poly<C::Elem>> {
        let arr = v.as_array().ok_or_else(|| Error::Json("expected coefficient array".into()))?;
        Ok(self.coef.poly(arr.iter().map(|c| self.coef.from_json(c)).collect::<Result<_>>()?))
    }
}

impl<C: ResidueBase> Field for TAdic<C> {
    type Elem = RatFn<C::Elem>;

    fn zero(&self) -> Self::Elem {
        self.from_poly(Poly::zero())
    }
    fn one(&self) -> Self::Elem {
        self.from_poly(self.coef.pone())
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.num.is_zero()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let c = &self.coef;
        if a.den == b.den {
            return self.make(c.padd(&a.num, &b.num), a.den.clone());
        }
        self.make(c.padd(&c.pmul(&a.num, &b.den), &c.pmul(&b.num, &a.den)), c.pmul(&a.den, &b.den))
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let c = &self.coef;
        self.make(c.pmul(&a.num, &b.num), c.pmul(&a.den, &b.den))
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        RatFn { num: self.coef.pneg(&a.num), den: a.den.clone() }
    }
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        (!a.num.is_zero()).then(|| self.make(a.den.clone(), a.num.clone()))
    }
    fn from_int(&self, n: &BigInt) -> Self::Elem {
        self.from_poly(self.coef.pconst(self.coef.from_int(n)))
    }
    fn characteristic(&self) -> u64 {
        self.coef.characteristic()
    }
    fn show(&self, a: &Self::Elem) -> String {
        let n = self.coef.pshow(&a.num, "t");
        if a.den.deg() == 0 {
            return n;
        }
        let wrap = |s: String| if s.contains(' ') { format!("({s})") } else { s };
        format!("{}/{}", wrap(n), wrap(self.coef.pshow(&a.den, "t")))
    }
}

impl<C: ResidueBase> ValuedField for TAdic<C> {
    type Res = C;

    fn residue_field(&self) -> C {
        self.coef.clone()
    }
    fn val(&self, a: &Self::Elem) -> Value {
        if a.num.is_zero() {
            return Value::Infinity;
        }
        Value::int(t_order(&a.num, &self.coef) as i64 - t_order(&a.den, &self.coef) as i64)
    }
    fn residue(&self, a: &Self::Elem) -> Result<C::Elem> {
        let v = self.val(a);
        if !v.is_zero() {
            return Err(Error::NonUnitValue(v));
        }
        let n = &a.num.coeffs()[t_order(&a.num, &self.coef)];
        let d = &a.den.coeffs()[t_order(&a.den, &self.coef)];
        self.coef.div(n, d)
    }
    fn from_rational(&self, q: &BigRational) -> Option<Self::Elem> {
        Some(self.from_poly(self.coef.pconst(self.coef.from_rational(q)?)))
    }
    fn value_group_gens(&self) -> Vec<Value> {
        vec![Value::int(1)]
    }
    fn monomial(&self, gamma: &Value) -> Result<Self::Elem> {
        Ok(self.t_power(integer_value(gamma)?))
    }
    fn descriptor(&self) -> FieldDescriptor {
        match self.coef.characteristic() {
            0 => FieldDescriptor::QT,
            p => FieldDescriptor::FpT { p },
        }
    }
    fn symbols(&self) -> &'static [&'static str] {
        &["t"]
    }
    fn symbol(&self, name: &str) -> Option<Self::Elem> {
        (name == "t").then(|| self.t_power(1))
    }
    fn to_json(&self, a: &Self::Elem) -> serde_json::Value {
        if a.den.deg() == 0 && a.num.deg() == 0 {
            return self.coef.to_json(&self.coeff_or_zero_c(&a.num));
        }
        json!({"num": self.poly_json(&a.num), "den": self.poly_json(&a.den)})
    }
    fn from_json(&self, v: &serde_json::Value) -> Result<Self::Elem> {
        match v.get("num").filter(|n| n.is_array()) {
            Some(n) => {
                let num = self.poly_from_json(n)?;
                let den = match v.get("den") {
                    Some(d) => self.poly_from_json(d)?,
                    None => self.coef.pone(),
                };
                if den.is_zero() {
                    return Err(Error::Json("zero denominator".into()));
                }
                Ok(self.make(num, den))
            }
            None => Ok(self.from_poly(self.coef.pconst(self.coef.from_json(v)?))),
        }
    }
    fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem {
        let poly = |rng: &mut R, n: usize| {
            let v = (0..n).map(|_| self.coef.random(rng)).collect();
            self.coef.poly(v)
        };
        let n = rng.gen_range(0..4);
        let num = poly(rng, n);
        let n = rng.gen_range(1..3);
        let mut den = poly(rng, n);
        if den.is_zero() {
            den = self.coef.pone();
        }
        let shift = rng.gen_range(-2i64..=3);
        self.mul(&self.make(num, den), &self.t_power(shift))
    }
}

impl<C: ResidueBase> TAdic<C> {
    fn coeff_or_zero_c(&self, f: &Poly<C::Elem>) -> C::Elem {
        self.coef.coeff_or_zero(f, 0)
    }
}
