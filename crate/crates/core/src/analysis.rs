//! Hasse-derivative numerics along a chain, and the numerical characters δ, ε.

use serde_json::json;

use crate::chain::{KPoly, KeyChain};
use crate::error::{Error, Result};
use crate::poly::PolyOps;
use crate::scalars::{p_val, Value, ValuedField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectiveBound {
    pub level: usize,
    /// Smallest maximizer of `(β_i − ν′(∂_b Q_i))/b`.
    pub b: usize,
    /// `b = p^e`; 0 in residue characteristic 0.
    pub e: u32,
    pub i_max: Vec<usize>,
    pub ratio: Value,
    /// `ν′(∂_b Q_i)` for the chosen b.
    pub derivative_value: Value,
}

impl EffectiveBound {
    /// `β_i − ν′(∂_{b_i} Q_i)`.
    pub fn slope(&self) -> Value {
        self.ratio.mul_int(self.b as i64)
    }
}

fn log_p(b: usize, p: u64) -> Option<u32> {
    if p <= 1 {
        return (b == 1).then_some(0);
    }
    let mut n = b as u64;
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    (n == 1).then_some(e)
}

/// ν_p(j) with the conventions ν_p(0) = ∞ (None) and, for p = 1, ν_p(j) = 1.
fn nu_p(j: usize, p: u64) -> Option<u32> {
    match (j, p) {
        (0, _) => None,
        (_, 0 | 1) => Some(1),
        _ => p_val(j as u64, p),
    }
}

/// ν′ of a polynomial of degree below Q_i, through level i−1.
fn lower_value<F: ValuedField>(chain: &KeyChain<F>, i: usize, f: &KPoly<F>) -> Value {
    chain.coefficient_value(f, i)
}

pub fn effective_bound<F: ValuedField>(chain: &KeyChain<F>, i: usize) -> Result<EffectiveBound> {
    let entry = chain.entry(i)?;
    if entry.beta.is_infinite() {
        return Err(Error::InfiniteValue);
    }
    let field = chain.field();
    let mut best: Option<Value> = None;
    let mut rows = Vec::new();
    for b in 1..=entry.q.deg() {
        let d = field.hasse_derivative(&entry.q, b);
        if d.is_zero() {
            continue;
        }
        let v = lower_value(chain, i, &d);
        let ratio = entry.beta.sub(&v).div_int(b as i64);
        if best.as_ref().map_or(true, |m| ratio > *m) {
            best = Some(ratio.clone());
        }
        rows.push((b, ratio, v));
    }
    let ratio = best.expect("Q_i is monic of positive degree");
    let i_max: Vec<usize> = rows.iter().filter(|r| r.1 == ratio).map(|r| r.0).collect();
    let (b, _, derivative_value) = rows.into_iter().find(|r| r.1 == ratio).unwrap();
    let e = log_p(b, field.p()).unwrap_or(u32::MAX);
    Ok(EffectiveBound { level: i, b, e, i_max, ratio, derivative_value })
}

impl EffectiveBound {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "level": self.level + 1,
            "b": self.b,
            "e": if self.e == u32::MAX { serde_json::Value::Null } else { json!(self.e) },
            "I_max": self.i_max,
            "ratio": self.ratio.to_json(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeRow {
    pub b: usize,
    pub value: Value,
    /// `(b/b_i)(β_i − ν′(∂_{b_i} Q_i))`.
    pub bound: Value,
    pub holds: bool,
    pub equality: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeReport {
    pub level: usize,
    pub value: Value,
    pub bound: EffectiveBound,
    pub rows: Vec<DerivativeRow>,
    /// `b(i,h)` and whether equality holds there; None when the minimizing
    /// index is 0.
    pub equality_at: Option<(usize, bool)>,
    /// Indices j of the support for which the exact formula for ν_i(∂_{j b_i} h)
    /// applies, with the verdict.
    pub exact_derivatives: Vec<(usize, bool)>,
    /// `min_j ν_i(∂_{j b_i} h) + j(β_i − ν′(∂_{b_i} Q_i))`.
    pub reconstructed: Value,
}

impl DerivativeReport {
    pub fn bound_holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn equality_holds(&self) -> bool {
        self.equality_at.map_or(true, |(_, ok)| ok)
    }

    pub fn exact_derivatives_hold(&self) -> bool {
        self.exact_derivatives.iter().all(|(_, ok)| *ok)
    }

    pub fn reconstruction_holds(&self) -> bool {
        self.reconstructed == self.value
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "level": self.level + 1,
            "value": self.value.to_json(),
            "rows": self.rows.iter().map(|r| json!({
                "b": r.b, "value": r.value.to_json(), "bound": r.bound.to_json(), "holds": r.holds, "equality": r.equality,
            })).collect::<Vec<_>>(),
            "equality_at": self.equality_at.map(|(b, ok)| json!({"b": b, "holds": ok})),
            "exact_derivatives": self.exact_derivatives.iter().map(|(j, ok)| json!({"j": j, "holds": ok})).collect::<Vec<_>>(),
            "reconstructed": self.reconstructed.to_json(),
        })
    }
}

/// Default probe set: `p^k·b_i ≤ deg h` together with `1..=min(8, deg h)`.
pub fn default_probes(deg: usize, b: usize, p: u64) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=deg.min(8)).collect();
    let mut q = b;
    while q <= deg {
        out.push(q);
        if p <= 1 {
            break;
        }
        q *= p as usize;
    }
    out.sort_unstable();
    out.dedup();
    out
}

pub fn derivative_value_report<F: ValuedField>(h: &KPoly<F>, chain: &KeyChain<F>, i: usize, probes: Option<&[usize]>) -> Result<DerivativeReport> {
    if h.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let field = chain.field();
    let p = field.p();
    let eb = effective_bound(chain, i)?;
    let slope = eb.slope();
    let value = chain.truncation_value(h, i);
    let dval = |b: usize| chain.truncation_value(&field.hasse_derivative(h, b), i);
    let probes = match probes {
        Some(ps) => ps.to_vec(),
        None => default_probes(h.deg(), eb.b, p),
    };
    let row = |b: usize| {
        let v = dval(b);
        let bound = eb.ratio.mul_int(b as i64);
        let (holds, equality) = match &v {
            Value::Infinity => (true, false),
            fv => {
                let lhs = value.sub(fv);
                (lhs <= bound, lhs == bound)
            }
        };
        DerivativeRow { b, value: v, bound, holds, equality }
    };
    let rows: Vec<DerivativeRow> = probes.iter().map(|&b| row(b)).collect();

    let ds = chain.standard_expansion(h, i)?;
    let beta = chain.beta(i).clone();
    let terms: Vec<(usize, Value)> = ds
        .iter()
        .enumerate()
        .filter(|(_, d)| !d.is_zero())
        .map(|(j, d)| (j, chain.coefficient_value(d, i).add(&beta.mul_int(j as i64))))
        .collect();
    let equality_at = if ds.len() > 1 {
        let key = |(j, v): &(usize, Value)| (v.clone(), nu_p(*j, p).map_or(u64::MAX, u64::from), *j);
        let best = terms.iter().min_by_key(|t| key(t)).unwrap();
        match nu_p(best.0, p) {
            None => None,
            Some(e) => {
                let pe = if p <= 1 { 1 } else { (p as usize).pow(e) };
                let b = eb.b * pe;
                Some((b, row(b).equality))
            }
        }
    } else {
        None
    };

    let support: Vec<usize> = terms.iter().filter(|t| t.1 == value).map(|t| t.0).collect();
    let mut exact_derivatives = Vec::new();
    for &j in &support {
        if j == 0 {
            continue;
        }
        let e = if p <= 1 { 0 } else { p_val(j as u64, p).unwrap_or(0) };
        let applies = p <= 1 || support.iter().filter(|&&jp| jp < j).all(|&jp| jp % (p as usize).pow(e + 1) == 0);
        if applies {
            let want = value.sub(&slope.mul_int(j as i64));
            exact_derivatives.push((j, dval(j * eb.b) == want));
        }
    }

    let s = ds.len().saturating_sub(1);
    let reconstructed = (0..=s)
        .map(|j| dval(j * eb.b).add(&slope.mul_int(j as i64)))
        .min()
        .unwrap_or(Value::Infinity);
    Ok(DerivativeReport { level: i, value, bound: eb, rows, equality_at, exact_derivatives, reconstructed })
}

/// δ, ε and the vertices of the level-i Newton polygon of h.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterPair {
    pub level: usize,
    pub delta: usize,
    /// None stands for ∞.
    pub epsilon: Option<usize>,
    pub nu_plus: Value,
    /// `(ν′(d_δ), δ)`.
    pub pivotal: (Value, usize),
    /// `(ν′(d_θ), θ)` at level i+1, when that level exists.
    pub characteristic: Option<(Value, usize)>,
}

impl CharacterPair {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "level": self.level + 1,
            "delta": self.delta,
            "epsilon": self.epsilon.map_or(json!("inf"), |e| json!(e)),
            "nu_plus": self.nu_plus.to_json(),
            "pivotal": [self.pivotal.0.to_json(), self.pivotal.1],
            "characteristic": self.characteristic.as_ref().map(|(v, t)| json!([v.to_json(), t])),
        })
    }
}

pub fn delta_epsilon<F: ValuedField>(h: &KPoly<F>, chain: &KeyChain<F>, i: usize) -> Result<CharacterPair> {
    if h.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let ds = chain.standard_expansion(h, i)?;
    let beta = chain.beta(i).clone();
    let cvals: Vec<Option<Value>> = ds.iter().map(|d| (!d.is_zero()).then(|| chain.coefficient_value(d, i))).collect();
    let vals: Vec<Option<Value>> = cvals.iter().enumerate().map(|(j, c)| c.as_ref().map(|c| c.add(&beta.mul_int(j as i64)))).collect();
    let v = vals.iter().flatten().min().cloned().unwrap();
    // ν_i(h) = ∞ only when β_i = ∞; δ is then the Q_i-adic order of h.
    let delta = if v.is_infinite() {
        (0..vals.len()).find(|&j| vals[j].is_some()).unwrap()
    } else {
        (0..vals.len()).rev().find(|&j| vals[j].as_ref() == Some(&v)).unwrap()
    };
    let above: Vec<(usize, Value)> = (delta + 1..vals.len()).filter_map(|j| vals[j].clone().map(|x| (j, x))).collect();
    let nu_plus = above.iter().map(|a| a.1.clone()).min().unwrap_or(Value::Infinity);
    let epsilon = if nu_plus.is_infinite() {
        None
    } else {
        above.iter().filter(|a| a.1 == nu_plus).map(|a| a.0).max()
    };
    let pivotal = (cvals[delta].clone().unwrap(), delta);
    let characteristic = if i + 1 < chain.len() { Some(characteristic_vertex(h, chain, i)?) } else { None };
    Ok(CharacterPair { level: i, delta, epsilon, nu_plus, pivotal, characteristic })
}

/// `S_{i,i+1}`: indices of the level-(i+1) expansion whose terms attain ν_i(h).
pub fn support_between<F: ValuedField>(h: &KPoly<F>, chain: &KeyChain<F>, i: usize) -> Result<(Vec<usize>, Vec<Option<Value>>)> {
    let ds = chain.standard_expansion(h, i + 1)?;
    let q_val = chain.beta(i).mul_int(chain.alpha(i + 1) as i64);
    let cvals: Vec<Option<Value>> = ds.iter().map(|d| (!d.is_zero()).then(|| chain.coefficient_value(d, i + 1))).collect();
    let vals: Vec<Option<Value>> = cvals.iter().enumerate().map(|(j, c)| c.as_ref().map(|c| c.add(&q_val.mul_int(j as i64)))).collect();
    let m = vals.iter().flatten().min().cloned().ok_or(Error::ZeroPolynomial)?;
    Ok(((0..vals.len()).filter(|&j| vals[j].as_ref() == Some(&m)).collect(), cvals))
}

fn characteristic_vertex<F: ValuedField>(h: &KPoly<F>, chain: &KeyChain<F>, i: usize) -> Result<(Value, usize)> {
    let (s, cvals) = support_between(h, chain, i)?;
    let theta = s[0];
    Ok((cvals[theta].clone().unwrap(), theta))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceCheck {
    pub level: usize,
    pub lex_monotone: bool,
    /// `α_{i+1} δ_{i+1} ≤ δ_i`.
    pub alpha_delta: bool,
    /// `δ_i = α_{i+1}·max S_{i,i+1} + δ_i(d_{j₀,i+1})`.
    pub delta_decomposition: bool,
    /// The characteristic vertex sits at an index ≥ the pivotal one.
    pub characteristic_above: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterTrace {
    pub pairs: Vec<CharacterPair>,
    pub checks: Vec<TraceCheck>,
}

impl CharacterTrace {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.lex_monotone && c.alpha_delta && c.delta_decomposition && c.characteristic_above)
    }
}

fn lex_key(c: &CharacterPair) -> (usize, usize) {
    (c.delta, c.epsilon.unwrap_or(usize::MAX))
}

/// Characters of h at every level, with the consistency checks between
/// consecutive levels. Stops after the first level where δ = 0.
pub fn character_trace<F: ValuedField>(h: &KPoly<F>, chain: &KeyChain<F>) -> Result<CharacterTrace> {
    let mut pairs = Vec::new();
    for i in 0..chain.len() {
        let c = delta_epsilon(h, chain, i)?;
        let stop = c.delta == 0;
        pairs.push(c);
        if stop {
            break;
        }
    }
    let mut checks = Vec::new();
    for w in pairs.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let i = a.level;
        let alpha = chain.alpha(i + 1);
        let (s, _) = support_between(h, chain, i)?;
        let j0 = *s.last().unwrap();
        let ds = chain.standard_expansion(h, i + 1)?;
        let dj = delta_epsilon(&ds[j0], chain, i)?.delta;
        let theta = a.characteristic.as_ref().map_or(0, |c| c.1);
        checks.push(TraceCheck {
            level: i,
            lex_monotone: lex_key(b) <= lex_key(a),
            alpha_delta: alpha * b.delta <= a.delta,
            delta_decomposition: a.delta == alpha * j0 + dj,
            characteristic_above: theta >= b.delta,
        });
    }
    Ok(CharacterTrace { pairs, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{Field, FpT, PAdic};

    fn q2() -> PAdic {
        PAdic::new(2).unwrap()
    }

    fn qp(k: &PAdic, v: &[i64]) -> KPoly<PAdic> {
        k.poly(v.iter().map(|&c| k.from_i64(c)).collect())
    }

    #[test]
    fn bound_at_x_is_one() {
        let k = q2();
        let c = KeyChain::start(k, Value::frac(1, 2)).unwrap();
        let eb = effective_bound(&c, 0).unwrap();
        assert_eq!((eb.b, eb.e, eb.ratio.clone()), (1, 0, Value::frac(1, 2)));
    }

    #[test]
    fn characteristic_three_bound() {
        let f = FpT::fp(3).unwrap();
        let q = f.poly(vec![f.neg(&f.t_power(2)), f.zero(), f.zero(), f.one()]);
        let c = KeyChain::from_entries(f.clone(), vec![(f.px(), Value::frac(2, 3)), (q.clone(), Value::int(3))]).unwrap();
        let eb = effective_bound(&c, 1).unwrap();
        assert_eq!((eb.b, eb.e), (3, 1));
        assert_eq!(eb.i_max, vec![3]);
        let r = derivative_value_report(&q, &c, 1, Some(&[1, 2, 3])).unwrap();
        assert!(r.bound_holds());
        assert!(r.rows[2].equality);
        assert!(!r.rows[0].equality && !r.rows[1].equality);
    }

    #[test]
    fn rational_characteristic_zero_bound_is_one() {
        let f = crate::scalars::QT::q();
        let q = f.poly(vec![f.neg(&f.t_power(2)), f.zero(), f.zero(), f.one()]);
        let c = KeyChain::from_entries(f.clone(), vec![(f.px(), Value::frac(2, 3)), (q, Value::int(3))]).unwrap();
        let eb = effective_bound(&c, 1).unwrap();
        assert_eq!((eb.b, eb.e, eb.i_max.clone()), (1, 0, vec![1]));
    }

    #[test]
    fn derivative_report_at_half() {
        let k = q2();
        let c = KeyChain::start(k.clone(), Value::frac(1, 2)).unwrap();
        let h = qp(&k, &[-2, 0, 1]);
        let r = derivative_value_report(&h, &c, 0, None).unwrap();
        assert_eq!(r.value, Value::int(1));
        assert_eq!(r.rows.iter().find(|r| r.b == 1).unwrap().value, Value::frac(3, 2));
        assert_eq!(r.rows.iter().find(|r| r.b == 2).unwrap().value, Value::int(0));
        assert_eq!(r.equality_at, Some((2, true)));
        assert!(r.rows.iter().find(|r| r.b == 2).unwrap().equality);
        assert_eq!(r.reconstructed, Value::int(1));
        assert!(r.bound_holds() && r.exact_derivatives_hold());
        let r = derivative_value_report(&qp(&k, &[6]), &c, 0, None).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.equality_at.is_none());
    }

    #[test]
    fn delta_and_epsilon() {
        let k = q2();
        let c = KeyChain::start(k.clone(), Value::frac(1, 2)).unwrap();
        let d = delta_epsilon(&qp(&k, &[-2, 0, 1]), &c, 0).unwrap();
        assert_eq!((d.delta, d.epsilon, d.nu_plus), (2, None, Value::Infinity));
        let c = KeyChain::start(k.clone(), Value::int(2)).unwrap();
        let d = delta_epsilon(&qp(&k, &[8, 2, 0, 1]), &c, 0).unwrap();
        assert_eq!((d.delta, d.epsilon, d.nu_plus), (1, Some(3), Value::int(6)));
        let d = delta_epsilon(&qp(&k, &[5]), &c, 0).unwrap();
        assert_eq!((d.delta, d.epsilon), (0, None));
    }

    #[test]
    fn trace_over_square_root_chain() {
        let k = q2();
        let h = qp(&k, &[-2, 0, 1]);
        let c = KeyChain::from_entries(k.clone(), vec![(k.px(), Value::frac(1, 2)), (h.clone(), Value::Infinity)]).unwrap();
        let t = character_trace(&h, &c).unwrap();
        assert_eq!(t.pairs[0].delta, 2);
        assert!(t.pairs[1].delta <= 1);
        assert!(t.all_hold(), "{t:?}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn bound_and_reconstruction(coeffs in proptest::collection::vec(-40i64..40, 1..7), beta_num in 1i64..7) {
            let k = q2();
            let h = qp(&k, &coeffs);
            proptest::prop_assume!(!h.is_zero());
            let c = KeyChain::start(k.clone(), Value::frac(beta_num, 3)).unwrap();
            let r = derivative_value_report(&h, &c, 0, None).unwrap();
            proptest::prop_assert!(r.bound_holds());
            proptest::prop_assert!(r.reconstruction_holds());
            proptest::prop_assert!(r.equality_holds());
            proptest::prop_assert!(r.exact_derivatives_hold());
        }

        #[test]
        fn trace_checks_over_sqrt2(coeffs in proptest::collection::vec(-20i64..20, 1..6)) {
            let k = q2();
            let q = qp(&k, &[-2, 0, 1]);
            let h = qp(&k, &coeffs);
            proptest::prop_assume!(!h.is_zero());
            let c = KeyChain::from_entries(k.clone(), vec![(k.px(), Value::frac(1, 2)), (q, Value::int(3))]).unwrap();
            let t = character_trace(&h, &c).unwrap();
            proptest::prop_assert!(t.all_hold(), "{:?}", t);
            for i in 0..c.len() {
                let r = derivative_value_report(&h, &c, i, None).unwrap();
                proptest::prop_assert!(r.bound_holds() && r.reconstruction_holds() && r.equality_holds() && r.exact_derivatives_hold(), "{:?}", r);
            }
        }
    }
}
