//! Dense univariate polynomials over a [`Field`].

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;

use crate::error::{Error, Result};
use crate::scalars::Field;

/// Coefficients in ascending degree, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly<E> {
    coeffs: Vec<E>,
}

impl<E> Poly<E> {
    /// Wraps coefficients that are known to be trimmed.
    pub(crate) fn from_trimmed(coeffs: Vec<E>) -> Self {
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<E> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0; callers use it for bounds only.
    pub fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Option<&E> {
        self.coeffs.last()
    }

    pub fn coeff(&self, i: usize) -> Option<&E> {
        self.coeffs.get(i)
    }

    pub fn map<F, T>(&self, f: F) -> Vec<T>
    where
        F: FnMut(&E) -> T,
    {
        self.coeffs.iter().map(f).collect()
    }
}

/// Polynomial arithmetic, available on every field.
pub trait PolyOps: Field {
    fn poly(&self, mut coeffs: Vec<Self::Elem>) -> Poly<Self::Elem> {
        while coeffs.last().is_some_and(|c| self.is_zero(c)) {
            coeffs.pop();
        }
        Poly::from_trimmed(coeffs)
    }

    fn pconst(&self, c: Self::Elem) -> Poly<Self::Elem> {
        self.poly(vec![c])
    }

    /// `c·x^n`.
    fn pmonomial(&self, c: Self::Elem, n: usize) -> Poly<Self::Elem> {
        let mut v = vec![self.zero(); n];
        v.push(c);
        self.poly(v)
    }

    fn px(&self) -> Poly<Self::Elem> {
        self.pmonomial(self.one(), 1)
    }

    fn pone(&self) -> Poly<Self::Elem> {
        self.pconst(self.one())
    }

    fn coeff_or_zero(&self, f: &Poly<Self::Elem>, i: usize) -> Self::Elem {
        f.coeff(i).cloned().unwrap_or_else(|| self.zero())
    }

    fn is_monic(&self, f: &Poly<Self::Elem>) -> bool {
        f.lead().is_some_and(|c| self.is_one(c))
    }

    fn padd(&self, a: &Poly<Self::Elem>, b: &Poly<Self::Elem>) -> Poly<Self::Elem> {
        let n = a.coeffs().len().max(b.coeffs().len());
        let v = (0..n)
            .map(|i| match (a.coeff(i), b.coeff(i)) {
                (Some(x), Some(y)) => self.add(x, y),
                (Some(x), None) | (None, Some(x)) => x.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        self.poly(v)
    }

    fn pneg(&self, a: &Poly<Self::Elem>) -> Poly<Self::Elem> {
        Poly::from_trimmed(a.map(|c| self.neg(c)))
    }

    fn psub(&self, a: &Poly<Self::Elem>, b: &Poly<Self::Elem>) -> Poly<Self::Elem> {
        self.padd(a, &self.pneg(b))
    }

    fn pscale(&self, a: &Poly<Self::Elem>, c: &Self::Elem) -> Poly<Self::Elem> {
        if self.is_zero(c) {
            return Poly::zero();
        }
        self.poly(a.map(|x| self.mul(x, c)))
    }

    /// `a·x^n`.
    fn pshift(&self, a: &Poly<Self::Elem>, n: usize) -> Poly<Self::Elem> {
        if a.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![self.zero(); n];
        v.extend(a.coeffs().iter().cloned());
        Poly::from_trimmed(v)
    }

    fn pmul(&self, a: &Poly<Self::Elem>, b: &Poly<Self::Elem>) -> Poly<Self::Elem> {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![self.zero(); a.coeffs().len() + b.coeffs().len() - 1];
        for (i, x) in a.coeffs().iter().enumerate() {
            if self.is_zero(x) {
                continue;
            }
            for (j, y) in b.coeffs().iter().enumerate() {
                v[i + j] = self.add(&v[i + j], &self.mul(x, y));
            }
        }
        self.poly(v)
    }

    fn ppow(&self, a: &Poly<Self::Elem>, n: usize) -> Poly<Self::Elem> {
        let mut result = self.pone();
        for _ in 0..n {
            result = self.pmul(&result, a);
        }
        result
    }

    /// Division by a monic divisor of positive degree.
    fn euclid_div(&self, f: &Poly<Self::Elem>, g: &Poly<Self::Elem>) -> Result<(Poly<Self::Elem>, Poly<Self::Elem>)> {
        match g.degree() {
            Some(d) if d >= 1 && self.is_monic(g) => Ok(self.divrem_by_lead(f, g, &self.one())),
            _ => Err(Error::NonMonicDivisor),
        }
    }

    /// Division by any non-zero polynomial.
    fn pdivrem(&self, f: &Poly<Self::Elem>, g: &Poly<Self::Elem>) -> Result<(Poly<Self::Elem>, Poly<Self::Elem>)> {
        let lead = g.lead().ok_or(Error::DivisionByZero)?;
        let li = self.inv(lead).ok_or(Error::DivisionByZero)?;
        Ok(self.divrem_by_lead(f, g, &li))
    }

    #[doc(hidden)]
    fn divrem_by_lead(
        &self,
        f: &Poly<Self::Elem>,
        g: &Poly<Self::Elem>,
        lead_inv: &Self::Elem,
    ) -> (Poly<Self::Elem>, Poly<Self::Elem>) {
        let dg = g.deg();
        let Some(df) = f.degree().filter(|&d| d >= dg) else {
            return (Poly::zero(), f.clone());
        };
        let mut r: Vec<Self::Elem> = f.coeffs().to_vec();
        let mut q = vec![self.zero(); df - dg + 1];
        for k in (0..=df - dg).rev() {
            let c = self.mul(&r[k + dg], lead_inv);
            if self.is_zero(&c) {
                continue;
            }
            for (i, gc) in g.coeffs().iter().enumerate() {
                r[k + i] = self.sub(&r[k + i], &self.mul(&c, gc));
            }
            q[k] = c;
        }
        r.truncate(dg);
        (self.poly(q), self.poly(r))
    }

    fn prem(&self, f: &Poly<Self::Elem>, g: &Poly<Self::Elem>) -> Result<Poly<Self::Elem>> {
        Ok(self.pdivrem(f, g)?.1)
    }

    fn pmake_monic(&self, f: &Poly<Self::Elem>) -> Poly<Self::Elem> {
        match f.lead() {
            Some(l) => self.pscale(f, &self.inv(l).expect("non-zero lead")),
            None => Poly::zero(),
        }
    }

    /// Monic gcd; zero only when both inputs are zero.
    fn pgcd(&self, a: &Poly<Self::Elem>, b: &Poly<Self::Elem>) -> Poly<Self::Elem> {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = self.prem(&a, &b).expect("non-zero divisor");
            a = b;
            b = r;
        }
        self.pmake_monic(&a)
    }

    /// `(g, s, t)` with `g = s·a + t·b` monic.
    fn pxgcd(
        &self,
        a: &Poly<Self::Elem>,
        b: &Poly<Self::Elem>,
    ) -> (Poly<Self::Elem>, Poly<Self::Elem>, Poly<Self::Elem>) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (self.pone(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), self.pone());
        while !r1.is_zero() {
            let (q, r) = self.pdivrem(&r0, &r1).expect("non-zero divisor");
            let s = self.psub(&s0, &self.pmul(&q, &s1));
            let t = self.psub(&t0, &self.pmul(&q, &t1));
            (r0, r1) = (r1, r);
            (s0, s1) = (s1, s);
            (t0, t1) = (t1, t);
        }
        match r0.lead().cloned() {
            Some(l) => {
                let li = self.inv(&l).unwrap();
                (self.pscale(&r0, &li), self.pscale(&s0, &li), self.pscale(&t0, &li))
            }
            None => (r0, s0, t0),
        }
    }

    /// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
    fn pinv_mod(&self, a: &Poly<Self::Elem>, m: &Poly<Self::Elem>) -> Option<Poly<Self::Elem>> {
        let (g, s, _) = self.pxgcd(a, m);
        (g.degree() == Some(0)).then(|| self.prem(&s, m).unwrap())
    }

    fn pmulmod(&self, a: &Poly<Self::Elem>, b: &Poly<Self::Elem>, m: &Poly<Self::Elem>) -> Poly<Self::Elem> {
        self.prem(&self.pmul(a, b), m).expect("non-zero modulus")
    }

    fn ppowmod(&self, a: &Poly<Self::Elem>, e: &BigUint, m: &Poly<Self::Elem>) -> Poly<Self::Elem> {
        let mut result = self.prem(&self.pone(), m).unwrap();
        let mut base = self.prem(a, m).unwrap();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                result = self.pmulmod(&result, &base, m);
            }
            if i + 1 < bits {
                base = self.pmulmod(&base, &base, m);
            }
        }
        result
    }

    fn pderiv(&self, f: &Poly<Self::Elem>) -> Poly<Self::Elem> {
        self.hasse_derivative(f, 1)
    }

    /// `∂_b x^n = C(n, b)·x^(n−b)`, the binomial taken in ℤ and mapped into the field.
    fn hasse_derivative(&self, f: &Poly<Self::Elem>, b: usize) -> Poly<Self::Elem> {
        if f.coeffs().len() <= b {
            return Poly::zero();
        }
        let v = f.coeffs()[b..]
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let n = k + b;
                let binom = binomial(BigInt::from(n), BigInt::from(b));
                self.mul(c, &self.from_int(&binom))
            })
            .collect();
        self.poly(v)
    }

    fn peval(&self, f: &Poly<Self::Elem>, a: &Self::Elem) -> Self::Elem {
        f.coeffs()
            .iter()
            .rev()
            .fold(self.zero(), |acc, c| self.add(&self.mul(&acc, a), c))
    }

    /// `f(g)`.
    fn pcompose(&self, f: &Poly<Self::Elem>, g: &Poly<Self::Elem>) -> Poly<Self::Elem> {
        f.coeffs()
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, c| self.padd(&self.pmul(&acc, g), &self.pconst(c.clone())))
    }

    fn pshow(&self, f: &Poly<Self::Elem>, var: &str) -> String {
        if f.is_zero() {
            return "0".into();
        }
        let mut terms = Vec::new();
        for (i, c) in f.coeffs().iter().enumerate().rev() {
            if self.is_zero(c) {
                continue;
            }
            let cs = self.show(c);
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            terms.push(match (i, cs.as_str()) {
                (0, _) => cs,
                (_, "1") => mono,
                (_, "-1") => format!("-{mono}"),
                _ if cs.contains(['+', ' ']) || cs[1..].contains('-') => format!("({cs})*{mono}"),
                _ => format!("{cs}*{mono}"),
            });
        }
        terms.join(" + ").replace("+ -", "- ")
    }
}

impl<F: Field> PolyOps for F {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{PrimeField, Rationals};
    use num_rational::BigRational;

    fn qp(v: &[i64]) -> Poly<BigRational> {
        Rationals.poly(v.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    #[test]
    fn division_examples() {
        let (q, r) = Rationals.euclid_div(&qp(&[0, 1, 0, 1]), &qp(&[-2, 0, 1])).unwrap();
        assert_eq!((q, r), (qp(&[0, 1]), qp(&[0, 3])));
        let (q, r) = Rationals.euclid_div(&qp(&[-2, 0, 1]), &qp(&[-2, 0, 1])).unwrap();
        assert_eq!((q, r), (qp(&[1]), qp(&[])));
        let (q, r) = Rationals.euclid_div(&qp(&[1, 1]), &qp(&[-2, 0, 1])).unwrap();
        assert_eq!((q, r), (qp(&[]), qp(&[1, 1])));
        assert_eq!(Rationals.euclid_div(&qp(&[1, 1]), &qp(&[1, 2])), Err(Error::NonMonicDivisor));
    }

    #[test]
    fn hasse_examples() {
        assert_eq!(Rationals.hasse_derivative(&qp(&[0, 0, 0, 0, 0, 1]), 2), qp(&[0, 0, 0, 10]));
        let f2 = PrimeField::new(2).unwrap();
        let x2 = f2.pmonomial(1, 2);
        assert!(f2.hasse_derivative(&x2, 1).is_zero());
        assert_eq!(f2.hasse_derivative(&x2, 2), f2.pone());
    }

    #[test]
    fn evaluation() {
        let f = qp(&[-2, 0, 1]);
        assert_eq!(Rationals.peval(&f, &BigRational::from_integer(3.into())), BigRational::from_integer(7.into()));
        // θ = y in ℚ[y]/(y² − 2)
        assert!(Rationals.prem(&Rationals.pcompose(&f, &Rationals.px()), &f).unwrap().is_zero());
    }

    #[test]
    fn gcd_and_inverse() {
        let f = PrimeField::new(7).unwrap();
        let a = f.poly(vec![1, 0, 1]);
        let b = f.poly(vec![6, 1]);
        let inv = f.pinv_mod(&b, &a).unwrap();
        assert_eq!(f.pmulmod(&inv, &b, &a), f.pone());
        assert_eq!(f.pgcd(&f.pmul(&a, &b), &f.pmul(&b, &b)), b);
    }

    fn arb_poly() -> impl proptest::strategy::Strategy<Value = Poly<BigRational>> {
        proptest::collection::vec(-5i64..6, 0..7).prop_map(|v| qp(&v))
    }
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn division_round_trip(f in arb_poly(), g in proptest::collection::vec(-5i64..6, 1..4)) {
            let mut g = g; g.push(1);
            let g = qp(&g);
            let (q, r) = Rationals.euclid_div(&f, &g).unwrap();
            prop_assert_eq!(Rationals.padd(&Rationals.pmul(&q, &g), &r), f);
            prop_assert!(r.coeffs().len() < g.coeffs().len());
        }

        #[test]
        fn hasse_composition_mod_p(v in proptest::collection::vec(0u64..3, 0..12), a in 0usize..5, b in 0usize..5) {
            let k = PrimeField::new(3).unwrap();
            let f = k.poly(v);
            let lhs = k.hasse_derivative(&k.hasse_derivative(&f, b), a);
            let c = k.from_int(&binomial(BigInt::from(a + b), BigInt::from(a)));
            prop_assert_eq!(lhs, k.pscale(&k.hasse_derivative(&f, a + b), &c));
        }

        #[test]
        fn hasse_product_rule(f in arb_poly(), g in arb_poly(), b in 0usize..6) {
            let lhs = Rationals.hasse_derivative(&Rationals.pmul(&f, &g), b);
            let rhs = (0..=b).fold(Poly::zero(), |acc, a| {
                Rationals.padd(&acc, &Rationals.pmul(&Rationals.hasse_derivative(&f, a), &Rationals.hasse_derivative(&g, b - a)))
            });
            prop_assert_eq!(lhs, rhs);
        }
    }
}
