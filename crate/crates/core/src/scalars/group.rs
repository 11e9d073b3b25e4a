//! Finitely generated subgroups of ℚ + ℚ√2.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Value;

/// Integer Bezout data for two rationals: `g = u·r + v·s`, `g` generating `rℤ + sℤ`.
fn rat_xgcd(r: &BigRational, s: &BigRational) -> (BigRational, BigInt, BigInt) {
    let d = r.denom().lcm(s.denom());
    let rn = (r * BigRational::from_integer(d.clone())).to_integer();
    let sn = (s * BigRational::from_integer(d.clone())).to_integer();
    let e = rn.extended_gcd(&sn);
    (BigRational::new(e.gcd, d), e.x, e.y)
}

fn rat_gcd(r: &BigRational, s: &BigRational) -> BigRational {
    rat_xgcd(r, s).0
}

/// A lattice in ℚ² (coordinates: rational part, √2 part) in echelon form
/// `{(a, b), (0, c)}` with `a, c ≥ 0`; a zero entry means the vector is absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueGroup {
    a: BigRational,
    b: BigRational,
    c: BigRational,
}

impl ValueGroup {
    pub fn trivial() -> Self {
        ValueGroup { a: BigRational::zero(), b: BigRational::zero(), c: BigRational::zero() }
    }

    pub fn generated_by<'a>(gens: impl IntoIterator<Item = &'a Value>) -> Self {
        let mut g = Self::trivial();
        for v in gens {
            g.insert(v);
        }
        g
    }

    pub fn with(&self, v: &Value) -> Self {
        let mut g = self.clone();
        g.insert(v);
        g
    }

    fn insert(&mut self, v: &Value) {
        let (x, y) = v.parts().expect("group generators must be finite");
        let (x, y) = (x.clone(), y.clone());
        if x.is_zero() {
            self.c = rat_gcd(&self.c, &y);
        } else if self.a.is_zero() {
            let s = if x.is_negative() { -BigRational::one() } else { BigRational::one() };
            self.a = x * &s;
            self.b = y * s;
        } else {
            let (g, u, w) = rat_xgcd(&self.a, &x);
            let (u, w) = (BigRational::from_integer(u), BigRational::from_integer(w));
            let nb = &u * &self.b + &w * &y;
            // (x/g)(a,b) − (a/g)(x,y) has vanishing first coordinate.
            let k = (&x / &g) * &self.b - (&self.a / &g) * &y;
            self.c = rat_gcd(&self.c, &k);
            self.a = g;
            self.b = nb;
        }
        self.reduce();
    }

    fn reduce(&mut self) {
        self.c = self.c.abs();
        if !self.c.is_zero() {
            let q = (&self.b / &self.c).floor();
            self.b = &self.b - q * &self.c;
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero() && self.c.is_zero()
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.index_of(v) == Some(BigInt::one())
    }

    /// The least `n ≥ 1` with `n·v` in the group, `None` for ∞.
    pub fn index_of(&self, v: &Value) -> Option<BigInt> {
        let (x, y) = v.parts().expect("index of an infinite value");
        if x.is_zero() && y.is_zero() {
            return Some(BigInt::one());
        }
        let (n1, w) = if self.a.is_zero() {
            if !x.is_zero() {
                return None;
            }
            (BigInt::one(), y.clone())
        } else {
            let t = x / &self.a;
            (t.denom().clone(), y - t * &self.b)
        };
        let n2 = if w.is_zero() {
            BigInt::one()
        } else if self.c.is_zero() {
            return None;
        } else {
            (w / &self.c).denom().clone()
        };
        Some(n1.lcm(&n2))
    }
}

/// `min{α ≥ 1 : α·β ∈ ⟨gens⟩}`, or `None` when no multiple lands in the group.
pub fn group_index(gens: &[Value], beta: &Value) -> Option<BigInt> {
    ValueGroup::generated_by(gens.iter()).index_of(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Value {
        Value::quad(BigRational::from_integer(a.into()), BigRational::from_integer(b.into()))
    }

    #[test]
    fn integer_group() {
        assert_eq!(group_index(&[Value::int(1)], &Value::frac(3, 2)), Some(2.into()));
        assert_eq!(group_index(&[Value::int(1)], &Value::zero()), Some(1.into()));
    }

    #[test]
    fn two_rational_generators() {
        let gens = [Value::frac(1, 2), Value::frac(1, 3)];
        assert_eq!(group_index(&gens, &Value::frac(1, 5)), Some(5.into()));
        assert!(ValueGroup::generated_by(gens.iter()).contains(&Value::frac(1, 6)));
    }

    #[test]
    fn quadratic_lattice() {
        let g = ValueGroup::generated_by([q(1, 0), q(0, 1)].iter());
        assert!(g.contains(&q(3, -2)));
        assert_eq!(g.index_of(&Value::frac(1, 2)), Some(2.into()));
        let half = Value::quad(BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 2.into()));
        assert_eq!(g.index_of(&half), Some(2.into()));
        assert_eq!(ValueGroup::generated_by([Value::int(1)].iter()).index_of(&q(0, 1)), None);
    }

    #[test]
    fn generators_with_relations() {
        let g = ValueGroup::generated_by([q(2, 2), q(4, 0), q(0, 6)].iter());
        assert!(g.contains(&q(2, -4)));
        assert!(g.contains(&q(0, 2)));
        assert_eq!(g.index_of(&q(0, 1)), Some(2.into()));
        assert_eq!(g.index_of(&q(1, 0)), Some(2.into()));
    }

    proptest::proptest! {
        #[test]
        fn index_multiple_is_member(gs in proptest::collection::vec((-6i64..7, -6i64..7, 1i64..5), 1..4), bn in -9i64..10, bd in 1i64..9, cn in -9i64..10) {
            let gens: Vec<Value> = gs.iter().map(|&(a, b, d)| Value::quad(BigRational::new(a.into(), d.into()), BigRational::new(b.into(), d.into()))).collect();
            let beta = Value::quad(BigRational::new(bn.into(), bd.into()), BigRational::new(cn.into(), bd.into()));
            let g = ValueGroup::generated_by(gens.iter());
            for v in &gens { proptest::prop_assert!(g.contains(v)); }
            if let Some(n) = g.index_of(&beta) {
                proptest::prop_assert!(g.contains(&beta.mul_big(&n)));
                let small: i64 = num_traits::ToPrimitive::to_i64(&n).unwrap();
                for k in 1..small.min(40) { proptest::prop_assert!(!g.contains(&beta.mul_int(k))); }
            }
        }
    }
}
