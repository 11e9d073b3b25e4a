use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::json;

use super::ValuationOracle;
use crate::chain::KPoly;
use crate::error::{Error, Result};
use crate::poly::{Poly, PolyOps};
use crate::scalars::{json_rational, rational_json, Field, ResidueBase, TAdic, Value, ValuedField};

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTerm<E> {
    pub exp: BigRational,
    pub coeff: E,
}

/// θ = Σ c_k t^{q_k} + (terms of order ≥ frontier). Without a frontier the
/// sum is exact.
#[derive(Clone, Debug)]
pub struct SeriesOracle<C: ResidueBase> {
    field: TAdic<C>,
    terms: Vec<SeriesTerm<C::Elem>>,
    frontier: Option<BigRational>,
}

/// A finite Puiseux sum, exponent → nonzero coefficient.
type Puiseux<E> = BTreeMap<BigRational, E>;

impl<C: ResidueBase> SeriesOracle<C> {
    pub fn new(field: TAdic<C>, terms: Vec<SeriesTerm<C::Elem>>, frontier: Option<BigRational>) -> Result<Self> {
        let c = field.coefficient_field();
        if let Some(f) = &frontier {
            if terms.iter().any(|t| &t.exp >= f) {
                return Err(Error::InvalidOracle("series terms must lie below the frontier".into()));
            }
        }
        let terms = terms.into_iter().filter(|t| !c.is_zero(&t.coeff)).collect();
        Ok(SeriesOracle { field, terms, frontier })
    }

    pub fn from_json(field: TAdic<C>, spec: &serde_json::Value) -> Result<Self> {
        let c = field.coefficient_field().clone();
        let list = spec
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Json("series oracle needs a \"terms\" list".into()))?;
        let mut terms = Vec::new();
        for t in list {
            let exp = json_rational(t.get("exp").ok_or_else(|| Error::Json("series term needs \"exp\"".into()))?)?;
            let coeff = c.from_json(t.get("coeff").ok_or_else(|| Error::Json("series term needs \"coeff\"".into()))?)?;
            terms.push(SeriesTerm { exp, coeff });
        }
        let frontier = match spec.get("frontier") {
            None | Some(serde_json::Value::Null) => None,
            Some(f) => Some(json_rational(f)?),
        };
        SeriesOracle::new(field, terms, frontier)
    }

    fn coef(&self) -> &C {
        self.field.coefficient_field()
    }

    fn add_into(&self, acc: &mut Puiseux<C::Elem>, exp: BigRational, c: C::Elem) {
        let k = self.coef();
        let sum = match acc.get(&exp) {
            Some(old) => k.add(old, &c),
            None => c,
        };
        if k.is_zero(&sum) {
            acc.remove(&exp);
        } else {
            acc.insert(exp, sum);
        }
    }

    fn mul(&self, a: &Puiseux<C::Elem>, b: &Puiseux<C::Elem>) -> Puiseux<C::Elem> {
        let mut out = Puiseux::new();
        for (ea, ca) in a {
            for (eb, cb) in b {
                self.add_into(&mut out, ea + eb, self.coef().mul(ca, cb));
            }
        }
        out
    }

    fn from_tpoly(&self, p: &Poly<C::Elem>) -> Puiseux<C::Elem> {
        let mut out = Puiseux::new();
        for (i, c) in p.coeffs().iter().enumerate() {
            if !self.coef().is_zero(c) {
                out.insert(BigRational::from_integer(i.into()), c.clone());
            }
        }
        out
    }

    /// f(θ₀) for f with coefficients in C[t].
    fn eval(&self, f: &[Poly<C::Elem>], theta: &Puiseux<C::Elem>) -> Puiseux<C::Elem> {
        let mut acc = Puiseux::new();
        for c in f.iter().rev() {
            acc = self.mul(&acc, theta);
            for (e, v) in self.from_tpoly(c) {
                self.add_into(&mut acc, e, v);
            }
        }
        acc
    }

    fn order(p: &Puiseux<C::Elem>) -> Value {
        p.keys().next().map(|e| Value::rat(e.clone())).unwrap_or(Value::Infinity)
    }
}

fn t_order<C: Field>(c: &C, p: &Poly<C::Elem>) -> usize {
    p.coeffs().iter().position(|x| !c.is_zero(x)).unwrap_or(0)
}

impl<C: ResidueBase> ValuationOracle<TAdic<C>> for SeriesOracle<C> {
    fn evaluate(&self, f: &KPoly<TAdic<C>>) -> Result<Value> {
        if f.is_zero() {
            return Ok(Value::Infinity);
        }
        let k = self.coef();
        // Clear denominators: D·f has coefficients in C[t].
        let mut den = k.pone();
        for a in f.coeffs() {
            let g = k.pgcd(&den, &a.den);
            den = k.pmul(&den, &k.pdivrem(&a.den, &g)?.0);
        }
        let shift = t_order(k, &den) as i64;
        let cleared: Vec<Poly<C::Elem>> = f
            .coeffs()
            .iter()
            .map(|a| Ok(k.pmul(&a.num, &k.pdivrem(&den, &a.den)?.0)))
            .collect::<Result<_>>()?;
        let theta: Puiseux<C::Elem> = self.terms.iter().map(|t| (t.exp.clone(), t.coeff.clone())).collect();
        let v0 = Self::order(&self.eval(&cleared, &theta));
        if let Some(front) = &self.frontier {
            // f(θ₀ + ε) − f(θ₀) = Σ_{k≥1} f^{[k]}(θ₀)·ε^k with ord ε ≥ frontier.
            let mut bound = Value::Infinity;
            for kk in 1..cleared.len() {
                let hasse: Vec<Poly<C::Elem>> = (0..cleared.len() - kk)
                    .map(|j| {
                        let b = binomial(j + kk, kk);
                        k.pscale(&cleared[j + kk], &k.from_int(&b))
                    })
                    .collect();
                let o = Self::order(&self.eval(&hasse, &theta));
                bound = bound.min(o.add(&Value::rat(front * BigRational::from_integer(kk.into()))));
            }
            if v0 >= bound {
                return Err(Error::PrecisionExhausted { frontier: Value::rat(front.clone()) });
            }
        }
        Ok(match v0 {
            Value::Infinity => Value::Infinity,
            v => v.sub(&Value::int(shift)),
        })
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "kind": "series",
            "field": self.field.descriptor().to_json(),
            "terms": self.terms.iter().map(|t| json!({"exp": rational_json(&t.exp), "coeff": self.coef().to_json(&t.coeff)})).collect::<Vec<_>>(),
            "frontier": self.frontier.as_ref().map(rational_json),
        })
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::from(1);
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::axioms_selftest;
    use crate::scalars::FpT;

    fn theta_two_thirds() -> (FpT, SeriesOracle<crate::scalars::PrimeField>) {
        let f = FpT::fp(3).unwrap();
        let o = SeriesOracle::new(f.clone(), vec![SeriesTerm { exp: BigRational::new(2.into(), 3.into()), coeff: 1 }], None).unwrap();
        (f, o)
    }

    #[test]
    fn exact_puiseux_root() {
        let (f, o) = theta_two_thirds();
        let q = f.poly(vec![f.neg(&f.t_power(2)), f.zero(), f.zero(), f.one()]);
        assert_eq!(o.evaluate(&q).unwrap(), Value::Infinity);
        assert_eq!(o.evaluate(&f.px()).unwrap(), Value::frac(2, 3));
        let lin = f.poly(vec![f.neg(&f.t_power(1)), f.one()]);
        assert_eq!(o.evaluate(&lin).unwrap(), Value::frac(2, 3));
        let inv = f.poly(vec![f.t_power(-1)]);
        assert_eq!(o.evaluate(&inv).unwrap(), Value::int(-1));
        assert!(axioms_selftest(&f, &o, 30, 3).passed);
    }

    #[test]
    fn frontier_certifies_or_refuses() {
        let f = FpT::fp(2).unwrap();
        // θ = t + t³ + O(t^5).
        let terms = vec![
            SeriesTerm { exp: BigRational::from_integer(1.into()), coeff: 1 },
            SeriesTerm { exp: BigRational::from_integer(3.into()), coeff: 1 },
        ];
        let o = SeriesOracle::new(f.clone(), terms, Some(BigRational::from_integer(5.into()))).unwrap();
        let x_minus_t = f.poly(vec![f.neg(&f.t_power(1)), f.one()]);
        assert_eq!(o.evaluate(&x_minus_t).unwrap(), Value::int(3));
        let close = f.poly(vec![f.neg(&f.add(&f.t_power(1), &f.t_power(3))), f.one()]);
        assert!(matches!(o.evaluate(&close), Err(Error::PrecisionExhausted { .. })));
        let wider = SeriesOracle::new(
            f.clone(),
            vec![
                SeriesTerm { exp: BigRational::from_integer(1.into()), coeff: 1 },
                SeriesTerm { exp: BigRational::from_integer(3.into()), coeff: 1 },
                SeriesTerm { exp: BigRational::from_integer(6.into()), coeff: 1 },
            ],
            Some(BigRational::from_integer(9.into())),
        )
        .unwrap();
        assert_eq!(wider.evaluate(&x_minus_t).unwrap(), Value::int(3));
        assert_eq!(wider.evaluate(&close).unwrap(), Value::int(6));
    }
}
