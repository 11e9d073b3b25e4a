//! F_p(u, v) with the monomial valuation ν(u) = 1, ν(v) = √2.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use serde_json::json;

use super::field::{Field, PrimeField, ResidueBase};
use super::valued::{FieldDescriptor, ValuedField};
use super::value::Value;
use crate::error::{Error, Result};
use crate::poly::{Poly, PolyOps};

/// A polynomial in v whose coefficients are polynomials in u.
pub type BiPoly = Vec<Poly<u64>>;

/// `num/den`, coprime, with the lexicographically leading coefficient of `den` equal to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BiRat {
    pub num: BiPoly,
    pub den: BiPoly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialField {
    k: PrimeField,
}

impl MonomialField {
    pub fn new(p: u64) -> Result<Self> {
        Ok(MonomialField { k: PrimeField::new(p)? })
    }

    fn trim(&self, mut a: BiPoly) -> BiPoly {
        while a.last().is_some_and(|c| c.is_zero()) {
            a.pop();
        }
        a
    }

    fn bconst(&self, c: u64) -> BiPoly {
        self.trim(vec![self.k.pconst(c)])
    }

    fn badd(&self, a: &BiPoly, b: &BiPoly) -> BiPoly {
        let n = a.len().max(b.len());
        let zero = Poly::zero();
        self.trim((0..n).map(|i| self.k.padd(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero))).collect())
    }

    fn bneg(&self, a: &BiPoly) -> BiPoly {
        a.iter().map(|c| self.k.pneg(c)).collect()
    }

    fn bmul(&self, a: &BiPoly, b: &BiPoly) -> BiPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![Poly::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = self.k.padd(&out[i + j], &self.k.pmul(x, y));
            }
        }
        self.trim(out)
    }

    fn bscale_u(&self, a: &BiPoly, c: &Poly<u64>) -> BiPoly {
        self.trim(a.iter().map(|x| self.k.pmul(x, c)).collect())
    }

    /// Content in F_p[u] (monic gcd of the v-coefficients).
    fn content(&self, a: &BiPoly) -> Poly<u64> {
        a.iter().fold(Poly::zero(), |g, c| self.k.pgcd(&g, c))
    }

    fn divide_u(&self, a: &BiPoly, c: &Poly<u64>) -> BiPoly {
        a.iter().map(|x| self.k.pdivrem(x, c).unwrap().0).collect()
    }

    fn primitive(&self, a: &BiPoly) -> BiPoly {
        let c = self.content(a);
        self.divide_u(a, &c)
    }

    /// Pseudo-remainder of `a` by `b` as polynomials in v.
    fn prem_v(&self, a: &BiPoly, b: &BiPoly) -> BiPoly {
        let mut r = a.clone();
        let db = b.len() - 1;
        let lb = b[db].clone();
        while r.len() > db {
            let dr = r.len() - 1;
            let lr = r[dr].clone();
            let mut shifted: BiPoly = vec![Poly::zero(); dr - db];
            shifted.extend(b.iter().map(|c| self.k.pmul(c, &lr)));
            r = self.badd(&self.bscale_u(&r, &lb), &self.bneg(&shifted));
        }
        r
    }

    fn bgcd(&self, a: &BiPoly, b: &BiPoly) -> BiPoly {
        if a.is_empty() {
            return b.clone();
        }
        if b.is_empty() {
            return a.clone();
        }
        let c = self.k.pgcd(&self.content(a), &self.content(b));
        let (mut x, mut y) = (self.primitive(a), self.primitive(b));
        if x.len() < y.len() {
            std::mem::swap(&mut x, &mut y);
        }
        while !y.is_empty() && y.len() > 1 {
            let r = self.prem_v(&x, &y);
            x = y;
            y = if r.is_empty() { r } else { self.primitive(&r) };
        }
        // A non-zero remainder of v-degree 0 means the primitive parts are coprime.
        let g = if y.is_empty() { x } else { vec![self.k.pone()] };
        self.bscale_u(&g, &c)
    }

    /// Exact division in F_p[u][v].
    fn bdiv_exact(&self, a: &BiPoly, b: &BiPoly) -> BiPoly {
        let mut r = a.clone();
        let db = b.len() - 1;
        let mut q = vec![Poly::zero(); a.len().saturating_sub(db).max(1)];
        while !r.is_empty() {
            let dr = r.len() - 1;
            assert!(dr >= db, "inexact bivariate division");
            let (t, rem) = self.k.pdivrem(&r[dr], &b[db]).unwrap();
            assert!(rem.is_zero(), "inexact bivariate division");
            let mut shifted: BiPoly = vec![Poly::zero(); dr - db];
            shifted.extend(b.iter().map(|c| self.k.pmul(c, &t)));
            q[dr - db] = t;
            r = self.badd(&r, &self.bneg(&shifted));
        }
        self.trim(q)
    }

    fn make(&self, num: BiPoly, den: BiPoly) -> BiRat {
        assert!(!den.is_empty(), "zero denominator");
        if num.is_empty() {
            return BiRat { num, den: self.bconst(1) };
        }
        let g = self.bgcd(&num, &den);
        let (num, den) = if g.len() == 1 && g[0].deg() == 0 {
            (num, den)
        } else {
            (self.bdiv_exact(&num, &g), self.bdiv_exact(&den, &g))
        };
        let l = self.k.inv(den.last().unwrap().lead().unwrap()).unwrap();
        let lp = self.k.pconst(l);
        BiRat { num: self.bscale_u(&num, &lp), den: self.bscale_u(&den, &lp) }
    }

    pub fn monomial_elem(&self, a: i64, b: i64) -> BiRat {
        let mono = |i: u64, j: u64| -> BiPoly {
            let mut v = vec![Poly::zero(); j as usize];
            v.push(self.k.pmonomial(1, i as usize));
            v
        };
        let (na, da) = if a >= 0 { (a as u64, 0) } else { (0, a.unsigned_abs()) };
        let (nb, db) = if b >= 0 { (b as u64, 0) } else { (0, b.unsigned_abs()) };
        BiRat { num: mono(na, nb), den: mono(da, db) }
    }

    /// Value and coefficient of the minimal-value monomial.
    fn lowest(&self, a: &BiPoly) -> (Value, u64) {
        let mut best: Option<(Value, u64)> = None;
        for (j, c) in a.iter().enumerate() {
            if let Some(i) = c.coeffs().iter().position(|x| *x != 0) {
                let v = Value::quad(BigRational::from_integer(i.into()), BigRational::from_integer(j.into()));
                if best.as_ref().map_or(true, |(b, _)| v < *b) {
                    best = Some((v, c.coeffs()[i]));
                }
            }
        }
        best.expect("non-zero")
    }

    fn terms(&self, a: &BiPoly) -> Vec<(usize, usize, u64)> {
        let mut out = Vec::new();
        for (j, c) in a.iter().enumerate() {
            for (i, x) in c.coeffs().iter().enumerate() {
                if *x != 0 {
                    out.push((i, j, *x));
                }
            }
        }
        out
    }

    fn from_terms(&self, terms: &[(usize, usize, u64)]) -> BiPoly {
        let mut out: BiPoly = Vec::new();
        for &(i, j, c) in terms {
            if out.len() <= j {
                out.resize(j + 1, Poly::zero());
            }
            out[j] = self.k.padd(&out[j], &self.k.pmonomial(c % self.k.p(), i));
        }
        self.trim(out)
    }

    fn show_poly(&self, a: &BiPoly) -> String {
        let mut parts = Vec::new();
        for (i, j, c) in self.terms(a).into_iter().rev() {
            let mut s = String::new();
            if c != 1 || (i == 0 && j == 0) {
                s.push_str(&c.to_string());
            }
            let mut factor = |name: &str, e: usize| {
                if e == 0 {
                    return;
                }
                if !s.is_empty() {
                    s.push('*');
                }
                s.push_str(name);
                if e > 1 {
                    s.push_str(&format!("^{e}"));
                }
            };
            factor("u", i);
            factor("v", j);
            parts.push(s);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    fn terms_json(&self, a: &BiPoly) -> serde_json::Value {
        serde_json::Value::Array(self.terms(a).into_iter().map(|(i, j, c)| json!([i, j, c])).collect())
    }

    fn terms_from_json(&self, v: &serde_json::Value) -> Result<BiPoly> {
        let bad = || Error::Json(format!("expected [[i, j, c], …], got {v}"));
        let arr = v.as_array().ok_or_else(bad)?;
        let mut terms = Vec::new();
        for t in arr {
            let t = t.as_array().filter(|t| t.len() == 3).ok_or_else(bad)?;
            let i = t[0].as_u64().ok_or_else(bad)? as usize;
            let j = t[1].as_u64().ok_or_else(bad)? as usize;
            let c = self.k.from_json(&t[2])?;
            terms.push((i, j, c));
        }
        Ok(self.from_terms(&terms))
    }
}

impl Field for MonomialField {
    type Elem = BiRat;

    fn zero(&self) -> BiRat {
        BiRat { num: Vec::new(), den: self.bconst(1) }
    }
    fn one(&self) -> BiRat {
        BiRat { num: self.bconst(1), den: self.bconst(1) }
    }
    fn is_zero(&self, a: &BiRat) -> bool {
        a.num.is_empty()
    }
    fn add(&self, a: &BiRat, b: &BiRat) -> BiRat {
        if a.den == b.den {
            return self.make(self.badd(&a.num, &b.num), a.den.clone());
        }
        let n = self.badd(&self.bmul(&a.num, &b.den), &self.bmul(&b.num, &a.den));
        self.make(n, self.bmul(&a.den, &b.den))
    }
    fn sub(&self, a: &BiRat, b: &BiRat) -> BiRat {
        self.add(a, &self.neg(b))
    }
    fn mul(&self, a: &BiRat, b: &BiRat) -> BiRat {
        self.make(self.bmul(&a.num, &b.num), self.bmul(&a.den, &b.den))
    }
    fn neg(&self, a: &BiRat) -> BiRat {
        BiRat { num: self.bneg(&a.num), den: a.den.clone() }
    }
    fn inv(&self, a: &BiRat) -> Option<BiRat> {
        (!a.num.is_empty()).then(|| self.make(a.den.clone(), a.num.clone()))
    }
    fn from_int(&self, n: &BigInt) -> BiRat {
        let c = self.k.from_int(n);
        BiRat { num: self.bconst(c), den: self.bconst(1) }
    }
    fn characteristic(&self) -> u64 {
        self.k.p()
    }
    fn show(&self, a: &BiRat) -> String {
        let n = self.show_poly(&a.num);
        if a.den.len() == 1 && a.den[0].deg() == 0 {
            return n;
        }
        let wrap = |s: String| if s.contains(' ') { format!("({s})") } else { s };
        format!("{}/{}", wrap(n), wrap(self.show_poly(&a.den)))
    }
}

impl ValuedField for MonomialField {
    type Res = PrimeField;

    fn residue_field(&self) -> PrimeField {
        self.k
    }
    fn val(&self, a: &BiRat) -> Value {
        if a.num.is_empty() {
            return Value::Infinity;
        }
        self.lowest(&a.num).0.sub(&self.lowest(&a.den).0)
    }
    fn residue(&self, a: &BiRat) -> Result<u64> {
        let v = self.val(a);
        if !v.is_zero() {
            return Err(Error::NonUnitValue(v));
        }
        self.k.div(&self.lowest(&a.num).1, &self.lowest(&a.den).1)
    }
    fn from_rational(&self, q: &BigRational) -> Option<BiRat> {
        let c = self.k.from_rational(q)?;
        Some(BiRat { num: self.bconst(c), den: self.bconst(1) })
    }
    fn value_group_gens(&self) -> Vec<Value> {
        vec![Value::int(1), Value::quad_int(0, 1)]
    }
    fn monomial(&self, gamma: &Value) -> Result<BiRat> {
        let (a, b) = gamma.parts().ok_or(Error::InfiniteValue)?;
        let int = |q: &BigRational| q.is_integer().then(|| q.to_integer().to_i64()).flatten();
        match (int(a), int(b)) {
            (Some(a), Some(b)) => Ok(self.monomial_elem(a, b)),
            _ => Err(Error::NotInGroup(gamma.clone())),
        }
    }
    fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor::FpUV { p: self.k.p() }
    }
    fn symbols(&self) -> &'static [&'static str] {
        &["u", "v"]
    }
    fn symbol(&self, name: &str) -> Option<BiRat> {
        match name {
            "u" => Some(self.monomial_elem(1, 0)),
            "v" => Some(self.monomial_elem(0, 1)),
            _ => None,
        }
    }
    fn to_json(&self, a: &BiRat) -> serde_json::Value {
        json!({"num": self.terms_json(&a.num), "den": self.terms_json(&a.den)})
    }
    fn from_json(&self, v: &serde_json::Value) -> Result<BiRat> {
        match v.get("num").filter(|n| n.is_array()) {
            Some(n) => {
                let num = self.terms_from_json(n)?;
                let den = match v.get("den") {
                    Some(d) => self.terms_from_json(d)?,
                    None => self.bconst(1),
                };
                if den.is_empty() {
                    return Err(Error::Json("zero denominator".into()));
                }
                Ok(self.make(num, den))
            }
            None => {
                let c = self.k.from_json(v)?;
                Ok(BiRat { num: self.bconst(c), den: self.bconst(1) })
            }
        }
    }
    fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> BiRat {
        let poly = |rng: &mut R, n: usize| {
            let terms: Vec<_> =
                (0..n).map(|_| (rng.gen_range(0..3), rng.gen_range(0..3), self.k.random(rng))).collect();
            self.from_terms(&terms)
        };
        let n = rng.gen_range(0..4);
        let num = poly(rng, n);
        let n = rng.gen_range(1..3);
        let mut den = poly(rng, n);
        if den.is_empty() {
            den = self.bconst(1);
        }
        let shift = self.monomial_elem(rng.gen_range(-2..=2), rng.gen_range(-2..=2));
        self.mul(&self.make(num, den), &shift)
    }
}
