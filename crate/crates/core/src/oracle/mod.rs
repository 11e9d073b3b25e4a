//! Target valuations ν′ on K[x] and their backends.

mod hensel;
mod series;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::chain::{KPoly, KeyChain};
use crate::error::{Error, Result};
use crate::poly::PolyOps;
use crate::scalars::{FieldDescriptor, MonomialField, PAdic, ResidueBase, TAdic, Value, ValuedField};

pub use hensel::HenselRootOracle;
pub use series::{SeriesOracle, SeriesTerm};

/// ν′: a valuation on K[x] extending ν.
pub trait ValuationOracle<F: ValuedField>: Send + Sync {
    fn evaluate(&self, f: &KPoly<F>) -> Result<Value>;
    /// The oracle spec this was built from.
    fn describe(&self) -> serde_json::Value;
}

/// ν′ given by a stored chain: its top truncation, or its limit value.
#[derive(Clone, Debug)]
pub struct ChainOracle<F: ValuedField> {
    chain: KeyChain<F>,
}

impl<F: ValuedField> ChainOracle<F> {
    pub fn new(chain: KeyChain<F>) -> Self {
        ChainOracle { chain }
    }

    pub fn chain(&self) -> &KeyChain<F> {
        &self.chain
    }
}

impl<F: ValuedField> ValuationOracle<F> for ChainOracle<F> {
    fn evaluate(&self, f: &KPoly<F>) -> Result<Value> {
        Ok(self.chain.value(f))
    }

    fn describe(&self) -> serde_json::Value {
        json!({"kind": "chain", "chain": self.chain.to_json()})
    }
}

/// `w(f(θ))` for θ a root of a monic `m` of degree e, with
/// `w(Σ a_i θ^i) = min(ν(a_i) + i/e)`.
#[derive(Clone, Debug)]
pub struct EisensteinRootOracle<F: ValuedField> {
    field: F,
    min_poly: KPoly<F>,
    e: usize,
}

impl<F: ValuedField> EisensteinRootOracle<F> {
    /// Only checks that `m` is monic of degree e, so that the exponents i/e
    /// are distinct mod 1. Whether the formula is a valuation is left to
    /// [`axioms_selftest`].
    pub fn new(field: F, min_poly: KPoly<F>, e: usize) -> Result<Self> {
        if !field.is_monic(&min_poly) || min_poly.deg() != e || e == 0 {
            return Err(Error::InvalidOracle(format!("min_poly must be monic of degree e = {e}")));
        }
        Ok(EisensteinRootOracle { field, min_poly, e })
    }
}

impl<F: ValuedField> ValuationOracle<F> for EisensteinRootOracle<F> {
    fn evaluate(&self, f: &KPoly<F>) -> Result<Value> {
        let r = self.field.prem(f, &self.min_poly)?;
        Ok(r.coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !self.field.is_zero(c))
            .map(|(i, c)| self.field.val(c).add(&Value::frac(i as i64, self.e as i64)))
            .min()
            .unwrap_or(Value::Infinity))
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "kind": "eisenstein",
            "field": self.field.descriptor().to_json(),
            "min_poly": self.field.encode_poly(&self.min_poly),
            "e": self.e,
        })
    }
}

/// Field-specific oracle kinds. Fields without the backend reject the spec.
pub trait OracleBackends: ValuedField + 'static {
    fn series_oracle(&self, _spec: &serde_json::Value) -> Result<Box<dyn ValuationOracle<Self>>> {
        Err(Error::InvalidOracle("series oracles need a t-adic base field".into()))
    }

    fn hensel_oracle(&self, _spec: &serde_json::Value) -> Result<Box<dyn ValuationOracle<Self>>> {
        Err(Error::InvalidOracle("hensel oracles need a p-adic base field".into()))
    }
}

impl OracleBackends for PAdic {
    fn hensel_oracle(&self, spec: &serde_json::Value) -> Result<Box<dyn ValuationOracle<Self>>> {
        Ok(Box::new(HenselRootOracle::from_json(self.clone(), spec)?))
    }
}

impl<C: ResidueBase + 'static> OracleBackends for TAdic<C> {
    fn series_oracle(&self, spec: &serde_json::Value) -> Result<Box<dyn ValuationOracle<Self>>> {
        Ok(Box::new(SeriesOracle::from_json(self.clone(), spec)?))
    }
}

impl OracleBackends for MonomialField {}

/// The field named by an oracle spec: its `field` key, or the chain's.
pub fn spec_field(spec: &serde_json::Value) -> Result<FieldDescriptor> {
    let f = spec
        .get("field")
        .or_else(|| spec.get("chain").and_then(|c| c.get("field")))
        .ok_or_else(|| Error::Json("oracle spec needs a \"field\"".into()))?;
    FieldDescriptor::from_json(f)
}

/// Builds an oracle from its JSON spec.
pub fn oracle_from_json<F: OracleBackends>(field: &F, spec: &serde_json::Value) -> Result<Box<dyn ValuationOracle<F>>> {
    let kind = spec.get("kind").and_then(|k| k.as_str()).ok_or_else(|| Error::Json("oracle spec needs a \"kind\"".into()))?;
    match kind {
        "chain" => {
            let c = spec.get("chain").ok_or_else(|| Error::Json("chain oracle needs \"chain\"".into()))?;
            Ok(Box::new(ChainOracle::new(KeyChain::from_json(field.clone(), c)?)))
        }
        "eisenstein" => {
            let m = field.decode_poly(spec.get("min_poly").ok_or_else(|| Error::Json("eisenstein oracle needs \"min_poly\"".into()))?)?;
            let e = spec
                .get("e")
                .and_then(|e| e.as_u64())
                .ok_or_else(|| Error::Json("eisenstein oracle needs an integer \"e\"".into()))?;
            Ok(Box::new(EisensteinRootOracle::new(field.clone(), m, e as usize)?))
        }
        "series" => field.series_oracle(spec),
        "hensel" => field.hensel_oracle(spec),
        other => Err(Error::Json(format!("unknown oracle kind {other:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestReport {
    pub passed: bool,
    pub checked: usize,
    /// Samples skipped because the backend ran out of precision.
    pub skipped: usize,
    pub failure: Option<String>,
}

impl SelftestReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({"passed": self.passed, "checked": self.checked, "skipped": self.skipped, "failure": self.failure})
    }
}

fn random_poly<F: ValuedField>(field: &F, rng: &mut ChaCha8Rng) -> KPoly<F> {
    let d = rng.gen_range(0..4);
    let mut cs: Vec<_> = (0..=d).map(|_| field.random_elem(rng)).collect();
    if rng.gen_bool(0.5) {
        cs[d] = field.one();
    }
    field.poly(cs)
}

/// Randomized checks of ν′(fg) = ν′(f)+ν′(g), ν′(f+g) ≥ min, ν′(c) = ν(c) and
/// ν′(x) > 0, plus products of small linear polynomials `x ± c`.
pub fn axioms_selftest<F: ValuedField>(field: &F, oracle: &dyn ValuationOracle<F>, budget: usize, seed: u64) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SelftestReport { passed: true, checked: 0, skipped: 0, failure: None };
    let show = |f: &KPoly<F>| field.pshow(f, "x");
    let fail = |report: &mut SelftestReport, msg: String| {
        if report.failure.is_none() {
            report.passed = false;
            report.failure = Some(msg);
        }
    };
    match oracle.evaluate(&field.px()) {
        Ok(v) if v > Value::zero() => {}
        Ok(v) => fail(&mut report, format!("value of x is {v}, not positive")),
        Err(e) if e.is_resource() => report.skipped += 1,
        Err(e) => fail(&mut report, format!("x: {e}")),
    }
    let mut pairs: Vec<(KPoly<F>, KPoly<F>)> = Vec::new();
    let p = field.p().max(2) as i64;
    let smalls: Vec<i64> = vec![1, 2, 3, 4, p, p * p];
    for &c in &smalls {
        let plus = field.poly(vec![field.from_i64(c), field.one()]);
        let minus = field.poly(vec![field.from_i64(-c), field.one()]);
        pairs.push((plus, minus));
    }
    for _ in 0..budget {
        pairs.push((random_poly(field, &mut rng), random_poly(field, &mut rng)));
    }
    for (f, g) in pairs {
        if report.failure.is_some() {
            break;
        }
        let vals = (|| -> Result<_> {
            Ok((
                oracle.evaluate(&f)?,
                oracle.evaluate(&g)?,
                oracle.evaluate(&field.pmul(&f, &g))?,
                oracle.evaluate(&field.padd(&f, &g))?,
            ))
        })();
        let (vf, vg, vfg, vsum) = match vals {
            Ok(v) => v,
            Err(e) if e.is_resource() => {
                report.skipped += 1;
                continue;
            }
            Err(e) => {
                fail(&mut report, format!("evaluation failed: {e}"));
                break;
            }
        };
        report.checked += 1;
        if vfg != vf.add(&vg) {
            fail(&mut report, format!("multiplicativity: ν′({}) = {vf}, ν′({}) = {vg}, product has {vfg}", show(&f), show(&g)));
        } else if vsum < vf.clone().min(vg.clone()) {
            fail(&mut report, format!("ultrametric: ν′({}) = {vf}, ν′({}) = {vg}, sum has {vsum}", show(&f), show(&g)));
        }
        if f.deg() == 0 && !f.is_zero() && vf != field.val(&f.coeffs()[0]) {
            fail(&mut report, format!("constant {} has ν′ = {vf}, ν = {}", show(&f), field.val(&f.coeffs()[0])));
        }
    }
    report
}
