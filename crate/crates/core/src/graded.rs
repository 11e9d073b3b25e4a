//! Initial forms relative to a truncation, residues in the residue tower, and
//! lifts of residual polynomials back to K[x].

use serde_json::json;

use crate::chain::{KPoly, KeyChain, RElem, RPoly};
use crate::error::{Error, Result};
use crate::poly::PolyOps;
use crate::scalars::{is_irreducible, Field, TElem, Value, ValuedField};

/// A formal product `c_γ · Π Q_j^{e_j}` where `c_γ` is the canonical constant of
/// value `base`. Only its value and its class in the graded algebra matter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mono {
    pub exps: Vec<i64>,
    pub base: Value,
}

impl Mono {
    pub fn constant(base: Value) -> Self {
        Mono { exps: Vec::new(), base }
    }

    fn combine(&self, other: &Mono, sign: i64) -> Mono {
        let n = self.exps.len().max(other.exps.len());
        let exps = (0..n)
            .map(|j| self.exps.get(j).copied().unwrap_or(0) + sign * other.exps.get(j).copied().unwrap_or(0))
            .collect();
        let base = if sign > 0 { self.base.add(&other.base) } else { self.base.sub(&other.base) };
        Mono { exps, base }
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        self.combine(other, 1)
    }

    pub fn div(&self, other: &Mono) -> Mono {
        self.combine(other, -1)
    }

    pub fn pow(&self, k: i64) -> Mono {
        Mono { exps: self.exps.iter().map(|e| e * k).collect(), base: self.base.mul_int(k) }
    }
}

/// The level-i initial form of h: `in h = C(v − mβ)·Q̄^m·Σ c_k Z^k` with
/// `Z = Q̄^abar / y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualExpansion<E> {
    pub value: Value,
    pub shift: usize,
    pub step: usize,
    /// Indices j of the expansion attaining the value.
    pub support: Vec<usize>,
    pub coeffs: Vec<E>,
}

/// A homogeneous element of the graded algebra of ν_i: its value and its
/// residual polynomial in Q̄_i.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedElement<E> {
    pub level: usize,
    pub value: Value,
    /// Coefficients of Q̄^j, lowest first.
    pub residual: Vec<E>,
}

impl<F: ValuedField> KeyChain<F> {
    /// The canonical monomial of value γ in the levels below i.
    pub fn canon(&self, i: usize, gamma: &Value) -> Result<Mono> {
        if !self.groups[i].contains(gamma) {
            return Err(Error::NotInGroup(gamma.clone()));
        }
        let mut exps = vec![0i64; i];
        let mut rest = gamma.clone();
        for j in (0..i).rev() {
            let b = &self.entries[j].beta;
            let m = (0..self.abar[j])
                .find(|&m| self.groups[j].contains(&rest.sub(&b.mul_int(m as i64))))
                .ok_or_else(|| Error::NotInGroup(gamma.clone()))?;
            exps[j] = m as i64;
            rest = rest.sub(&b.mul_int(m as i64));
        }
        Ok(Mono { exps, base: rest })
    }

    /// Residue in k_L of a value-0 monomial in the levels below L.
    pub fn mono_residue(&self, l_top: usize, mono: &Mono) -> Result<RElem<F>> {
        let k = self.residue_field(l_top);
        let mut acc = k.one();
        let mut m = mono.clone();
        m.exps.resize(l_top, 0);
        for l in (0..l_top).rev() {
            let e = m.exps[l];
            let a = self.abar[l] as i64;
            if e.rem_euclid(a) != 0 {
                return Err(Error::NotInGroup(m.base.clone()));
            }
            let q = e / a;
            m.exps[l] = 0;
            if q != 0 {
                let z = k.embed(&self.zgen[l], self.tdepth[l + 1]);
                let z = if q > 0 { z } else { k.inv(&z).ok_or(Error::DivisionByZero)? };
                acc = k.mul(&acc, &k.pow(&z, &(q.unsigned_abs()).into()));
                let y = self.ywit[l].pow(q);
                for (j, ye) in y.exps.iter().enumerate() {
                    m.exps[j] += ye;
                }
                m.base = m.base.add(&y.base);
            }
        }
        if !m.base.is_zero() {
            return Err(Error::NotInGroup(mono.base.clone()));
        }
        Ok(acc)
    }

    /// `r ∈ k_i` with `in_i a = r·C(i, ν_i a)`, for `a ≠ 0` of degree below Q_i.
    pub fn coefficient_residue(&self, i: usize, a: &KPoly<F>) -> Result<RElem<F>> {
        let k = self.residue_field(i);
        if a.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if a.deg() == 0 {
            let c = &a.coeffs()[0];
            let u = self.field.div(c, &self.field.monomial(&self.field.val(c))?)?;
            return Ok(k.from_base(self.field.residue(&u)?));
        }
        let l = (0..i).rev().find(|&l| self.entries[l].q.deg() <= a.deg()).expect("deg a ≥ 1 = deg x");
        let ex = self.expand_residual(l, a)?;
        let kl = self.residue_field(l + 1);
        let z = &self.zgen[l];
        let mut r = kl.zero();
        for c in ex.coeffs.iter().rev() {
            r = kl.add(&kl.mul(&r, z), &kl.embed(c, self.tdepth[l]));
        }
        Ok(k.embed(&r, self.tdepth[l + 1]))
    }

    /// Level-i expansion of h ≠ 0 with its residual coefficients.
    pub fn expand_residual(&self, i: usize, h: &KPoly<F>) -> Result<ResidualExpansion<RElem<F>>> {
        if h.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let ds = self.standard_expansion(h, i)?;
        let beta = self.entries[i].beta.clone();
        let cvals: Vec<Option<Value>> = ds
            .iter()
            .map(|d| (!d.is_zero()).then(|| self.coefficient_value(d, i)))
            .collect();
        if beta.is_infinite() {
            // Only the constant term survives; Q_i itself has value ∞.
            let Some(v) = cvals[0].clone() else {
                return Ok(ResidualExpansion { value: Value::Infinity, shift: 0, step: 1, support: vec![], coeffs: vec![] });
            };
            let c = self.coefficient_residue(i, &ds[0])?;
            return Ok(ResidualExpansion { value: v, shift: 0, step: 1, support: vec![0], coeffs: vec![c] });
        }
        let vals: Vec<Option<Value>> = cvals
            .iter()
            .enumerate()
            .map(|(j, c)| c.as_ref().map(|c| c.add(&beta.mul_int(j as i64))))
            .collect();
        let v = vals.iter().flatten().min().cloned().expect("h is nonzero");
        let support: Vec<usize> = (0..ds.len()).filter(|&j| vals[j].as_ref() == Some(&v)).collect();
        let a = self.abar[i];
        let shift = support[0] % a;
        let lower = self.canon(i, &v.sub(&beta.mul_int(shift as i64)))?;
        let k = self.residue_field(i);
        let top = (support[support.len() - 1] - shift) / a;
        let mut coeffs = vec![k.zero(); top + 1];
        for &j in &support {
            let kk = (j - shift) / a;
            let cm = self.canon(i, cvals[j].as_ref().unwrap())?;
            let mono = cm.mul(&self.ywit[i].pow(kk as i64)).div(&lower);
            let r = self.coefficient_residue(i, &ds[j])?;
            coeffs[kk] = k.mul(&r, &self.mono_residue(i, &mono)?);
        }
        Ok(ResidualExpansion { value: v, shift, step: a, support, coeffs })
    }

    /// `S_i(h, β_i)`.
    pub fn support(&self, h: &KPoly<F>, i: usize) -> Result<Vec<usize>> {
        Ok(self.expand_residual(i, h)?.support)
    }

    /// The initial form of h ≠ 0 for ν_i.
    pub fn initial_form(&self, h: &KPoly<F>, i: usize) -> Result<GradedElement<RElem<F>>> {
        let ex = self.expand_residual(i, h)?;
        let k = self.residue_field(i);
        let mut residual = vec![k.zero(); ex.shift];
        for (n, c) in ex.coeffs.into_iter().enumerate() {
            if n > 0 {
                residual.extend((1..ex.step).map(|_| k.zero()));
            }
            residual.push(c);
        }
        Ok(GradedElement { level: i, value: ex.value, residual })
    }

    /// `Σ c_k Z^k` from the level-i expansion: the residual polynomial of h.
    pub fn residual_polynomial(&self, h: &KPoly<F>, i: usize) -> Result<RPoly<F>> {
        let ex = self.expand_residual(i, h)?;
        Ok(self.residue_field(i).poly(ex.coeffs))
    }

    fn base_lift(&self, r: &<F::Res as Field>::Elem) -> F::Elem {
        let res = self.field.residue_field();
        self.field.neg(&self.field.lift_residue(&res.neg(r)))
    }

    /// A polynomial of degree below Q_i whose level-i initial form is `r·C(i, γ)`.
    pub fn lift(&self, i: usize, gamma: &Value, r: &RElem<F>) -> Result<KPoly<F>> {
        let k = self.residue_field(i);
        if k.is_zero(r) {
            return Ok(self.field.poly(vec![]));
        }
        if i == 0 {
            let TElem::Base(b) = r else { unreachable!("k_0 is the base residue field") };
            let c = self.field.mul(&self.base_lift(b), &self.field.monomial(gamma)?);
            return Ok(self.field.pconst(c));
        }
        let l = i - 1;
        let beta = self.entries[l].beta.clone();
        let a = self.abar[l];
        let shift = (0..a)
            .find(|&m| self.groups[l].contains(&gamma.sub(&beta.mul_int(m as i64))))
            .ok_or_else(|| Error::NotInGroup(gamma.clone()))?;
        let g1 = gamma.sub(&beta.mul_int(shift as i64));
        let parts: Vec<RElem<F>> = if self.tdepth[i] > self.tdepth[l] {
            match r {
                TElem::Ext(v) => v.clone(),
                TElem::Base(_) => unreachable!("extension level holds extension elements"),
            }
        } else {
            vec![r.clone()]
        };
        let kl = self.residue_field(l);
        let c1 = self.canon(l, &g1)?;
        let q = &self.entries[l].q;
        let mut out = self.field.poly(vec![]);
        for (n, rn) in parts.iter().enumerate() {
            if kl.is_zero(rn) {
                continue;
            }
            let gk = g1.sub(&beta.mul_int((n * a) as i64));
            let mu = self.mono_residue(l, &self.canon(l, &gk)?.mul(&self.ywit[l].pow(n as i64)).div(&c1))?;
            let piece = self.lift(l, &gk, &kl.div(rn, &mu)?)?;
            out = self.field.padd(&out, &self.field.pmul(&piece, &self.field.ppow(q, shift + n * a)));
        }
        Ok(out)
    }

    /// The monic lift of `λ(Z)`, monic irreducible over k_i, to a candidate
    /// key polynomial `Q_i^{d·abar} + …` of degree `d·abar·deg Q_i`.
    pub fn integral_relation_lift(&self, i: usize, lambda: &RPoly<F>) -> Result<KPoly<F>> {
        let k = self.residue_field(i);
        if !k.is_monic(lambda) || lambda.deg() == 0 || !is_irreducible(&k, lambda, self.rational_bound)? {
            return Err(Error::NotIrreducible);
        }
        let beta = self.entries[i].beta.clone();
        if beta.is_infinite() {
            return Err(Error::InfiniteValue);
        }
        let a = self.abar[i];
        let d = lambda.deg();
        let q = &self.entries[i].q;
        let mut out = self.field.ppow(q, d * a);
        for (n, c) in lambda.coeffs()[..d].iter().enumerate() {
            if k.is_zero(c) {
                continue;
            }
            let g = beta.mul_int(((d - n) * a) as i64);
            let rho = self.mono_residue(i, &self.ywit[i].pow((d - n) as i64).div(&self.canon(i, &g)?))?;
            let piece = self.lift(i, &g, &k.mul(c, &rho))?;
            out = self.field.padd(&out, &self.field.pmul(&piece, &self.field.ppow(q, n * a)));
        }
        Ok(out)
    }

    pub fn graded_json(&self, g: &GradedElement<RElem<F>>) -> serde_json::Value {
        let k = self.residue_field(g.level);
        json!({
            "value": g.value.to_json(),
            "residual": {
                "tower_level": g.level + 1,
                "coeffs": g.residual.iter().map(|c| k.to_json(c)).collect::<Vec<_>>(),
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{FpT, PAdic, TowerField};
    use proptest::prelude::*;

    fn q2() -> PAdic {
        PAdic::new(2).unwrap()
    }

    fn qp(k: &PAdic, v: &[i64]) -> KPoly<PAdic> {
        k.poly(v.iter().map(|&c| k.from_i64(c)).collect())
    }

    fn base(v: &[u64]) -> Vec<TElem<u64>> {
        v.iter().map(|&c| TElem::Base(c)).collect()
    }

    #[test]
    fn residual_of_quadratic_at_one() {
        let k = q2();
        let c = KeyChain::start(k.clone(), Value::int(1)).unwrap();
        let g = c.initial_form(&qp(&k, &[4, 2, 1]), 0).unwrap();
        assert_eq!(g.value, Value::int(2));
        assert_eq!(g.residual, base(&[1, 1, 1]));
        let g = c.initial_form(&qp(&k, &[12]), 0).unwrap();
        assert_eq!((g.value, g.residual), (Value::int(2), base(&[1])));
    }

    #[test]
    fn residual_at_half() {
        let k = q2();
        let c = KeyChain::start(k.clone(), Value::frac(1, 2)).unwrap();
        let h = qp(&k, &[-2, 0, 1]);
        let g = c.initial_form(&h, 0).unwrap();
        assert_eq!(g.value, Value::int(1));
        assert_eq!(g.residual, base(&[1, 0, 1]));
        assert_eq!(c.support(&h, 0).unwrap(), vec![0, 2]);
        let json = c.graded_json(&g);
        assert_eq!(json["residual"]["tower_level"], 1);
    }

    #[test]
    fn lifts_reproduce_known_key_polynomials() {
        let k = q2();
        let f2 = TowerField::new(crate::scalars::PrimeField::new(2).unwrap());
        let c = KeyChain::start(k.clone(), Value::frac(1, 2)).unwrap();
        assert_eq!(c.integral_relation_lift(0, &f2.poly(base(&[1, 1]))).unwrap(), qp(&k, &[-2, 0, 1]));

        let k5 = PAdic::new(5).unwrap();
        let f5 = TowerField::new(crate::scalars::PrimeField::new(5).unwrap());
        let c = KeyChain::start(k5.clone(), Value::int(1)).unwrap();
        let q = c.integral_relation_lift(0, &f5.poly(base(&[4, 1]))).unwrap();
        assert_eq!(q.deg(), 1);
        assert!(c.push(q, Value::int(2)).is_ok());

        let ft = FpT::fp(3).unwrap();
        let f3 = TowerField::new(crate::scalars::PrimeField::new(3).unwrap());
        let c = KeyChain::start(ft.clone(), Value::frac(2, 3)).unwrap();
        let q = c.integral_relation_lift(0, &f3.poly(base(&[2, 1]))).unwrap();
        let expect = ft.poly(vec![ft.neg(&ft.t_power(2)), ft.zero(), ft.zero(), ft.one()]);
        assert_eq!(q, expect);
    }

    #[test]
    fn lift_rejects_reducible() {
        let k = q2();
        let f2 = TowerField::new(crate::scalars::PrimeField::new(2).unwrap());
        let c = KeyChain::start(k, Value::int(1)).unwrap();
        assert_eq!(c.integral_relation_lift(0, &f2.poly(base(&[1, 0, 1]))), Err(Error::NotIrreducible));
    }

    // [x@1], then the lift of Z²+Z+1, then a lift of a linear factor over F₄.
    fn tower_chain() -> KeyChain<PAdic> {
        let k = q2();
        let f2 = TowerField::new(crate::scalars::PrimeField::new(2).unwrap());
        let c = KeyChain::start(k, Value::int(1)).unwrap();
        let q1 = c.integral_relation_lift(0, &f2.poly(base(&[1, 1, 1]))).unwrap();
        let c = c.push(q1, Value::frac(5, 2)).unwrap();
        let k1 = c.residue_field(1);
        assert_eq!(k1.degree(), 2);
        let lam = k1.poly(vec![k1.generator(), k1.one()]);
        let q2 = c.integral_relation_lift(1, &lam).unwrap();
        assert_eq!(q2.deg(), 4);
        c.push(q2, Value::int(6)).unwrap()
    }

    #[test]
    fn tower_levels_and_residuals() {
        let c = tower_chain();
        assert_eq!(c.abar(1), 2);
        assert_eq!(c.alpha(2), 2);
        let ex = c.expand_residual(1, c.q(2)).unwrap();
        assert_eq!(ex.value, Value::int(5));
        let k1 = c.residue_field(1);
        let r = k1.pmake_monic(&k1.poly(ex.coeffs));
        assert_eq!(r, k1.poly(vec![k1.generator(), k1.one()]));
    }

    fn proportional<E: Clone + PartialEq, K: Field<Elem = E>>(k: &K, a: &[E], b: &[E]) -> bool {
        if a.len() != b.len() {
            return false;
        }
        let Some(i) = a.iter().position(|x| !k.is_zero(x)) else { return false };
        if k.is_zero(&b[i]) {
            return false;
        }
        let r = k.div(&b[i], &a[i]).unwrap();
        a.iter().zip(b).all(|(x, y)| k.mul(x, &r) == *y)
    }

    fn small_poly() -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(-20i64..21, 1..9).prop_filter("nonzero", |v| v.iter().any(|&c| c != 0))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn initial_forms_are_multiplicative(f in small_poly(), g in small_poly(), lvl in 0usize..3) {
            let c = tower_chain();
            let k = c.field().clone();
            let (f, g) = (qp(&k, &f), qp(&k, &g));
            let fg = k.pmul(&f, &g);
            let (a, b, ab) = (c.initial_form(&f, lvl).unwrap(), c.initial_form(&g, lvl).unwrap(), c.initial_form(&fg, lvl).unwrap());
            prop_assert_eq!(ab.value.clone(), a.value.add(&b.value));
            prop_assert_eq!(ab.value.clone(), c.truncation_value(&fg, lvl));
            let kk = c.residue_field(lvl);
            let prod = kk.pmul(&kk.poly(a.residual), &kk.poly(b.residual));
            prop_assert!(proportional(&kk, prod.coeffs(), &ab.residual));
        }

        #[test]
        fn lifts_have_the_requested_initial_form(v in -6i64..7, lvl in 0usize..3, seed in 0u64..500) {
            use rand::SeedableRng;
            let c = tower_chain();
            let k = c.residue_field(lvl);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let r = k.random(&mut rng);
            prop_assume!(!k.is_zero(&r));
            let gamma = Value::frac(v, 2);
            prop_assume!(c.group(lvl).contains(&gamma));
            let h = c.lift(lvl, &gamma, &r).unwrap();
            prop_assert!(h.deg() < c.q(lvl).deg());
            prop_assert_eq!(c.truncation_value(&h, lvl), gamma.clone());
            let m = c.canon(lvl, &gamma).unwrap();
            prop_assert_eq!(m.base.clone(), gamma.sub(&c.beta(0).mul_int(m.exps.first().copied().unwrap_or(0))).sub(&c.beta(1).mul_int(m.exps.get(1).copied().unwrap_or(0))));
            prop_assert_eq!(c.coefficient_residue(lvl, &h).unwrap(), r);
        }
    }
}
