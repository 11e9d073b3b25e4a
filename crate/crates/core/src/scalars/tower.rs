use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use rand::Rng;

use super::field::{Field, ResidueBase};
use crate::error::{Error, Result};
use crate::poly::{Poly, PolyOps};

/// An element of k_ν[y₁,…,y_m]/(λ₁,…,λ_m): a base element at depth 0, otherwise
/// the `deg λ_m` coefficients of a polynomial in y_m over the previous depth.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TElem<E> {
    Base(E),
    Ext(Vec<TElem<E>>),
}

pub type ResiduePoly<E> = Poly<TElem<E>>;

/// A residue field tower truncated at `depth`.
#[derive(Clone, Debug)]
pub struct TowerField<B: Field> {
    base: B,
    mins: Arc<Vec<Poly<TElem<B::Elem>>>>,
    depth: usize,
}

impl<B: ResidueBase> TowerField<B> {
    pub fn new(base: B) -> Self {
        TowerField { base, mins: Arc::new(Vec::new()), depth: 0 }
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The same tower viewed at a lower depth.
    pub fn level(&self, depth: usize) -> Self {
        assert!(depth <= self.mins.len());
        TowerField { base: self.base.clone(), mins: self.mins.clone(), depth }
    }

    /// This depth as a tower of its own, so it can be extended again.
    pub fn truncated(&self) -> Self {
        TowerField { base: self.base.clone(), mins: Arc::new(self.mins[..self.depth].to_vec()), depth: self.depth }
    }

    pub fn top(&self) -> Self {
        self.level(self.mins.len())
    }

    /// The defining polynomial of depth `k + 1` over depth `k`.
    pub fn min_poly(&self, k: usize) -> &Poly<TElem<B::Elem>> {
        &self.mins[k]
    }

    /// Appends `λ`, monic of degree ≥ 2 over this field, as a new level.
    pub fn extend(&self, lambda: Poly<TElem<B::Elem>>) -> Result<Self> {
        if self.depth != self.mins.len() {
            return Err(Error::InvalidChain("tower can only grow at its top".into()));
        }
        if !self.is_monic(&lambda) || lambda.deg() < 2 {
            return Err(Error::NotIrreducible);
        }
        let mut mins = (*self.mins).clone();
        mins.push(lambda);
        Ok(TowerField { base: self.base.clone(), mins: Arc::new(mins), depth: self.depth + 1 })
    }

    /// Degree over the base field.
    pub fn degree(&self) -> usize {
        self.mins[..self.depth].iter().map(|m| m.deg()).product()
    }

    /// Number of elements, for finite towers.
    pub fn size(&self) -> Option<BigUint> {
        match self.base.characteristic() {
            0 => None,
            p => Some(BigUint::from(p).pow(self.degree() as u32)),
        }
    }

    fn lower(&self) -> Self {
        self.level(self.depth - 1)
    }

    fn ext_degree(&self) -> usize {
        self.mins[self.depth - 1].deg()
    }

    fn parts<'a>(&self, a: &'a TElem<B::Elem>) -> &'a [TElem<B::Elem>] {
        match a {
            TElem::Ext(v) => v,
            TElem::Base(_) => panic!("tower element of the wrong depth"),
        }
    }

    fn from_poly(&self, f: Poly<TElem<B::Elem>>) -> TElem<B::Elem> {
        let lower = self.lower();
        let mut v = f.into_coeffs();
        v.resize(self.ext_degree(), lower.zero());
        TElem::Ext(v)
    }

    fn to_poly(&self, a: &TElem<B::Elem>) -> Poly<TElem<B::Elem>> {
        self.lower().poly(self.parts(a).to_vec())
    }

    pub fn from_base(&self, c: B::Elem) -> TElem<B::Elem> {
        self.embed(&TElem::Base(c), 0)
    }

    /// Embeds an element of depth `from` into this depth.
    pub fn embed(&self, a: &TElem<B::Elem>, from: usize) -> TElem<B::Elem> {
        assert!(from <= self.depth, "cannot embed downwards");
        if from == self.depth {
            return a.clone();
        }
        let lower = self.lower();
        let mut v = vec![lower.embed(a, from)];
        v.resize(self.ext_degree(), lower.zero());
        TElem::Ext(v)
    }

    /// Recovers a depth-`to` element when `a` lies in that subfield.
    pub fn restrict(&self, a: &TElem<B::Elem>, to: usize) -> Option<TElem<B::Elem>> {
        if to == self.depth {
            return Some(a.clone());
        }
        let p = self.parts(a);
        if p[1..].iter().any(|c| !self.lower().is_zero(c)) {
            return None;
        }
        self.lower().restrict(&p[0], to)
    }

    /// The class of y at this depth (depth ≥ 1).
    pub fn generator(&self) -> TElem<B::Elem> {
        let lower = self.lower();
        self.from_poly(lower.px())
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> TElem<B::Elem> {
        if self.depth == 0 {
            return TElem::Base(self.base.random(rng));
        }
        let lower = self.lower();
        TElem::Ext((0..self.ext_degree()).map(|_| lower.random(rng)).collect())
    }

    /// All elements of a finite tower.
    pub fn elements(&self) -> Option<Vec<TElem<B::Elem>>> {
        if self.depth == 0 {
            return Some(self.base.elements()?.into_iter().map(TElem::Base).collect());
        }
        let lower = self.lower().elements()?;
        let mut out: Vec<Vec<TElem<B::Elem>>> = vec![Vec::new()];
        for _ in 0..self.ext_degree() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    lower.iter().map(move |c| {
                        let mut v = prefix.clone();
                        v.push(c.clone());
                        v
                    })
                })
                .collect();
        }
        Some(out.into_iter().map(TElem::Ext).collect())
    }

    /// `a^(1/p)` in a finite tower of characteristic p.
    pub fn pth_root(&self, a: &TElem<B::Elem>) -> TElem<B::Elem> {
        let q = self.size().expect("finite tower");
        let p = BigUint::from(self.characteristic());
        self.pow(a, &(q / p))
    }

    pub fn to_json(&self, a: &TElem<B::Elem>) -> serde_json::Value {
        match a {
            TElem::Base(c) => self.base.to_json(c),
            TElem::Ext(v) => {
                let lower = self.lower();
                serde_json::Value::Array(v.iter().map(|c| lower.to_json(c)).collect())
            }
        }
    }

    pub fn from_json(&self, v: &serde_json::Value) -> Result<TElem<B::Elem>> {
        if self.depth == 0 {
            return Ok(TElem::Base(self.base.from_json(v)?));
        }
        match v.as_array() {
            Some(arr) if arr.len() <= self.ext_degree() => {
                let lower = self.lower();
                let coeffs = arr.iter().map(|c| lower.from_json(c)).collect::<Result<Vec<_>>>()?;
                Ok(self.from_poly(lower.poly(coeffs)))
            }
            _ => Ok(self.embed(&self.lower().from_json(v)?, self.depth - 1)),
        }
    }

    pub fn poly_to_json(&self, f: &ResiduePoly<B::Elem>) -> serde_json::Value {
        serde_json::Value::Array(f.map(|c| self.to_json(c)))
    }
}

impl<B: ResidueBase> Field for TowerField<B> {
    type Elem = TElem<B::Elem>;

    fn zero(&self) -> Self::Elem {
        self.from_base(self.base.zero())
    }
    fn one(&self) -> Self::Elem {
        self.from_base(self.base.one())
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        match a {
            TElem::Base(c) => self.base.is_zero(c),
            TElem::Ext(v) => {
                let lower = self.lower();
                v.iter().all(|c| lower.is_zero(c))
            }
        }
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        match (a, b) {
            (TElem::Base(x), TElem::Base(y)) => TElem::Base(self.base.add(x, y)),
            (TElem::Ext(x), TElem::Ext(y)) => {
                let lower = self.lower();
                TElem::Ext(x.iter().zip(y).map(|(c, d)| lower.add(c, d)).collect())
            }
            _ => panic!("tower elements of different depths"),
        }
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if self.depth == 0 {
            return match (a, b) {
                (TElem::Base(x), TElem::Base(y)) => TElem::Base(self.base.mul(x, y)),
                _ => panic!("tower elements of different depths"),
            };
        }
        let lower = self.lower();
        let prod = lower.pmul(&self.to_poly(a), &self.to_poly(b));
        self.from_poly(lower.prem(&prod, &self.mins[self.depth - 1]).unwrap())
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        match a {
            TElem::Base(x) => TElem::Base(self.base.neg(x)),
            TElem::Ext(v) => {
                let lower = self.lower();
                TElem::Ext(v.iter().map(|c| lower.neg(c)).collect())
            }
        }
    }
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        if self.depth == 0 {
            return match a {
                TElem::Base(x) => self.base.inv(x).map(TElem::Base),
                _ => panic!("tower element of the wrong depth"),
            };
        }
        let lower = self.lower();
        let f = self.to_poly(a);
        if f.is_zero() {
            return None;
        }
        lower.pinv_mod(&f, &self.mins[self.depth - 1]).map(|g| self.from_poly(g))
    }
    fn from_int(&self, n: &BigInt) -> Self::Elem {
        self.from_base(self.base.from_int(n))
    }
    fn characteristic(&self) -> u64 {
        self.base.characteristic()
    }
    fn show(&self, a: &Self::Elem) -> String {
        match a {
            TElem::Base(c) => self.base.show(c),
            TElem::Ext(_) => {
                let s = self.lower().pshow(&self.to_poly(a), &format!("y{}", self.depth));
                if s.contains(' ') {
                    format!("({s})")
                } else {
                    s
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::PrimeField;

    fn f4() -> TowerField<PrimeField> {
        let k = TowerField::new(PrimeField::new(2).unwrap());
        let lam = k.poly(vec![k.one(), k.one(), k.one()]);
        k.extend(lam).unwrap()
    }

    #[test]
    fn four_element_field() {
        let k = f4();
        assert_eq!(k.size(), Some(BigUint::from(4u32)));
        let y = k.generator();
        let y2 = k.mul(&y, &y);
        assert_eq!(y2, k.add(&y, &k.one()));
        assert_eq!(k.mul(&y, &k.inv(&y).unwrap()), k.one());
        assert_eq!(k.elements().unwrap().len(), 4);
        for a in k.elements().unwrap() {
            assert_eq!(k.pow(&k.pth_root(&a), &BigUint::from(2u32)), a);
        }
    }

    #[test]
    fn embedding_and_restriction() {
        let k = f4();
        let one = k.embed(&TElem::Base(1), 0);
        assert_eq!(one, k.one());
        assert_eq!(k.restrict(&one, 0), Some(TElem::Base(1)));
        assert_eq!(k.restrict(&k.generator(), 0), None);
    }

    #[test]
    fn json_round_trip() {
        let k = f4();
        for a in k.elements().unwrap() {
            assert_eq!(k.from_json(&k.to_json(&a)).unwrap(), a);
        }
    }
}
