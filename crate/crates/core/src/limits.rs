//! Stalled α = 1 tails: stable δ, coefficient congruences, bad monomials and
//! weakly affine limit candidates.
//!
//! Statements quantified over the whole infinite tail are only certified over
//! the observed window of levels.

use num_bigint::BigInt;
use serde_json::json;

use crate::analysis::delta_epsilon;
use crate::chain::{KPoly, KeyChain};
use crate::error::{Error, Result};
use crate::poly::PolyOps;
use crate::scalars::{is_p_power, p_val, Value, ValuedField};

/// First level of the trailing run of α = 1 entries.
pub fn tail_start<F: ValuedField>(chain: &KeyChain<F>) -> usize {
    (1..chain.len()).rev().find(|&i| chain.alpha(i) != 1).unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StallRow {
    pub level: usize,
    pub delta: usize,
    pub epsilon: Option<usize>,
    pub value: Value,
    pub nu_plus: Value,
}

/// An observed α = 1 tail with a probe that stays defective along it.
#[derive(Clone, Debug)]
pub struct StallTrace<F: ValuedField> {
    chain: KeyChain<F>,
    start: usize,
    probe: KPoly<F>,
    rows: Vec<StallRow>,
    bound: Option<Value>,
}

impl<F: ValuedField> StallTrace<F> {
    /// `bound` is the declared β̄; without one it is extrapolated from the
    /// last three values.
    pub fn new(chain: KeyChain<F>, probe: KPoly<F>, bound: Option<Value>) -> Result<Self> {
        let start = tail_start(&chain);
        Self::with_start(chain, start, probe, bound)
    }

    pub fn with_start(chain: KeyChain<F>, start: usize, probe: KPoly<F>, bound: Option<Value>) -> Result<Self> {
        if probe.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if start >= chain.len() {
            return Err(Error::NoSuchLevel(start));
        }
        for i in start + 1..chain.len() {
            if chain.alpha(i) != 1 {
                return Err(Error::InvalidChain(format!("level {} has α = {}", i + 1, chain.alpha(i))));
            }
            if chain.beta(i) <= chain.beta(i - 1) || chain.beta(i).is_infinite() {
                return Err(Error::InvalidChain("tail values must increase strictly and stay finite".into()));
            }
        }
        let rows = (start..chain.len())
            .map(|i| {
                let c = delta_epsilon(&probe, &chain, i)?;
                Ok(StallRow { level: i, delta: c.delta, epsilon: c.epsilon, value: chain.truncation_value(&probe, i), nu_plus: c.nu_plus })
            })
            .collect::<Result<_>>()?;
        Ok(StallTrace { chain, start, probe, rows, bound })
    }

    pub fn chain(&self) -> &KeyChain<F> {
        &self.chain
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn probe(&self) -> &KPoly<F> {
        &self.probe
    }

    pub fn rows(&self) -> &[StallRow] {
        &self.rows
    }

    pub fn with_probe(&self, probe: KPoly<F>) -> Result<Self> {
        Self::with_start(self.chain.clone(), self.start, probe, self.bound.clone())
    }

    fn row(&self, level: usize) -> Result<&StallRow> {
        level.checked_sub(self.start).and_then(|k| self.rows.get(k)).ok_or(Error::NoSuchLevel(level))
    }

    /// Declared β̄, or a geometric extrapolation of the last three values.
    pub fn bound(&self) -> Option<Value> {
        self.bound.clone().or_else(|| self.estimate_bound())
    }

    pub fn estimate_bound(&self) -> Option<Value> {
        let n = self.chain.len();
        if n < self.start + 3 {
            return None;
        }
        let b = |i: usize| self.chain.beta(i).as_rational().cloned();
        let (b0, b1, b2) = (b(n - 3)?, b(n - 2)?, b(n - 1)?);
        let (g1, g2) = (&b1 - &b0, &b2 - &b1);
        if g2 >= g1 {
            return None;
        }
        let r = &g2 / &g1;
        let one = num_rational::BigRational::from_integer(1.into());
        Some(Value::rat(&b2 + &g2 * &r / (one - &r)))
    }

    /// `ν_i⁺(h) − ν_i(h)` is non-decreasing once δ is stable.
    pub fn gap_monotone(&self) -> bool {
        let Some(last) = self.rows.last() else { return true };
        let tail: Vec<&StallRow> = self.rows.iter().filter(|r| r.delta == last.delta).collect();
        tail.windows(2).all(|w| match (&w[0].nu_plus, &w[1].nu_plus) {
            (_, Value::Infinity) => true,
            (Value::Infinity, _) => false,
            (a, b) => b.sub(&w[1].value) >= a.sub(&w[0].value),
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let field = self.chain.field();
        json!({
            "start": self.start + 1,
            "probe": field.encode_poly(&self.probe),
            "bound": self.bound().map(|b| b.to_json()),
            "rows": self.rows.iter().map(|r| json!({
                "level": r.level + 1,
                "beta": self.chain.beta(r.level).to_json(),
                "delta": r.delta,
                "epsilon": r.epsilon.map_or(json!("inf"), |e| json!(e)),
                "value": r.value.to_json(),
                "nu_plus": r.nu_plus.to_json(),
            })).collect::<Vec<_>>(),
            "gap_monotone": self.gap_monotone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaReport {
    pub delta: usize,
    /// `δ = p^e`, when it is a p-power.
    pub e: Option<u32>,
    pub window: usize,
}

impl DeltaReport {
    pub fn is_p_power(&self) -> bool {
        self.e.is_some()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({"delta": self.delta, "e": self.e, "p_power": self.is_p_power(), "window": self.window})
    }
}

fn p_exponent(n: usize, p: u64) -> Option<u32> {
    if p <= 1 {
        return (n == 1).then_some(0);
    }
    is_p_power(n as u64, p).then(|| p_val(n as u64, p).unwrap())
}

/// δ over the last `window` levels; a stable δ that is not a p-power is
/// returned with `e = None`.
pub fn stable_delta<F: ValuedField>(trace: &StallTrace<F>, window: usize) -> Result<DeltaReport> {
    let rows = trace.rows();
    if window == 0 || window > rows.len() {
        return Err(Error::NotStabilized);
    }
    let tail = &rows[rows.len() - window..];
    let delta = tail[0].delta;
    if tail.iter().any(|r| r.delta != delta) {
        return Err(Error::NotStabilized);
    }
    Ok(DeltaReport { delta, e: p_exponent(delta, trace.chain().field().p()), window })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceReport {
    pub v: usize,
    pub from: usize,
    pub to: usize,
    pub difference_value: Value,
    pub threshold: Value,
    pub holds: bool,
    pub strict: bool,
}

impl CongruenceReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "v": self.v, "from": self.from + 1, "to": self.to + 1,
            "difference_value": self.difference_value.to_json(), "threshold": self.threshold.to_json(),
            "holds": self.holds, "strict": self.strict,
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

/// Compares `d_{v,i}` with `Σ_j (−1)^j C(v+j, j) d_{v+j,ℓ₁} Z^j`, where
/// `Z = Q_i − Q_{ℓ₁}`, against the threshold
/// `(ν_{ℓ₁}(h) − vβ_{ℓ₁}) + min(ν⁺_{ℓ₁}(h) − ν_{ℓ₁}(h), β_i − β_ℓ)`.
pub fn coefficient_congruence_check<F: ValuedField>(trace: &StallTrace<F>, v: usize, l1: usize, i: usize) -> Result<CongruenceReport> {
    let chain = trace.chain();
    let start = trace.start();
    if l1 <= start || i < l1 {
        return Err(Error::NoSuchLevel(l1));
    }
    let end = (i + 1).min(chain.top());
    let delta = trace.row(start)?.delta;
    for lv in start..=end {
        if trace.row(lv)?.delta != delta {
            return Err(Error::NotStabilized);
        }
    }
    let p = chain.field().p();
    let pe = if p <= 1 { 1 } else { (p as usize).pow(p_val(delta as u64, p).unwrap_or(0)) };
    if delta == 0 || v > delta || v + pe < delta {
        return Err(Error::InvalidChain(format!("v = {v} outside [δ − p^e, δ] with δ = {delta}")));
    }
    let k = chain.field();
    let h = trace.probe();
    let di = chain.standard_expansion(h, i)?;
    let dl = chain.standard_expansion(h, l1)?;
    let z = k.psub(chain.q(i), chain.q(l1));
    let mut rhs = KPoly::<F>::zero();
    for j in 0..=delta - v {
        let Some(d) = dl.get(v + j) else { continue };
        let c = k.from_int(&binomial(v + j, j));
        let c = if j % 2 == 1 { k.neg(&c) } else { c };
        rhs = k.padd(&rhs, &k.pscale(&k.pmul(d, &k.ppow(&z, j)), &c));
    }
    let lhs = di.get(v).cloned().unwrap_or_else(KPoly::<F>::zero);
    let diff = k.psub(&lhs, &rhs);
    let difference_value = chain.truncation_value(&diff, chain.top());
    let row = trace.row(l1)?;
    let gain = row.nu_plus.sub(&row.value).min(chain.beta(i).sub(chain.beta(start)));
    let threshold = row.value.sub(&chain.beta(l1).mul_int(v as i64)).add(&gain);
    Ok(CongruenceReport {
        v,
        from: l1,
        to: i,
        holds: difference_value >= threshold,
        strict: difference_value > threshold,
        difference_value,
        threshold,
    })
}

/// `β_i − α_ℓβ_{ℓ−1} > 2p^{e₀}(β̄ − β_i)`, with `α_ℓβ_{ℓ−1} = 0` when the
/// tail starts at x.
pub fn gap_condition<F: ValuedField>(chain: &KeyChain<F>, start: usize, i: usize, e0: u32, bound: &Value) -> bool {
    let base = if start == 0 { Value::zero() } else { chain.beta(start - 1).mul_int(chain.alpha(start) as i64) };
    let pe = chain.field().p().pow(e0) as i64;
    chain.beta(i).sub(&base) > bound.sub(chain.beta(i)).mul_int(2 * pe)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialClass {
    pub j: usize,
    pub value: Value,
    /// `(p^{e₀} − j)β̄`.
    pub line: Value,
    pub under_threshold: bool,
    pub below_line: bool,
    pub not_p_power: bool,
    pub above_line: bool,
    pub bad: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadMonomialReport {
    pub level: usize,
    pub e0: u32,
    /// `2p^{e₀}β̄ − p^{e₀}β_i`.
    pub threshold: Value,
    pub classes: Vec<MonomialClass>,
    /// Greatest bad index.
    pub j_max: Option<usize>,
    /// Bad index minimizing `(ν′(a_j) + jβ_i, −j)`.
    pub j_bullet: Option<usize>,
}

impl BadMonomialReport {
    pub fn bad(&self) -> Vec<usize> {
        self.classes.iter().filter(|c| c.bad).map(|c| c.j).collect()
    }

    fn class(&self, j: usize) -> Option<&MonomialClass> {
        self.classes.iter().find(|c| c.j == j)
    }

    /// Neither extreme bad index lies below the critical line.
    pub fn extremes_not_below_line(&self) -> bool {
        [self.j_max, self.j_bullet].iter().flatten().all(|&j| !self.class(j).unwrap().below_line)
    }

    /// The greatest bad index lies strictly above the critical line.
    pub fn greatest_above_line(&self) -> bool {
        self.j_max.map_or(true, |j| self.class(j).unwrap().above_line)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "level": self.level + 1,
            "e0": self.e0,
            "threshold": self.threshold.to_json(),
            "classes": self.classes.iter().map(|c| json!({
                "j": c.j, "value": c.value.to_json(), "line": c.line.to_json(),
                "under_threshold": c.under_threshold, "below_line": c.below_line,
                "not_p_power": c.not_p_power, "above_line": c.above_line, "bad": c.bad,
            })).collect::<Vec<_>>(),
            "j_max": self.j_max,
            "j_bullet": self.j_bullet,
            "extremes_not_below_line": self.extremes_not_below_line(),
            "greatest_above_line": self.greatest_above_line(),
        })
    }
}

/// Classifies the monomials `a_j Q_i^j`, `1 ≤ j < p^{e₀}`, of the level-i
/// expansion of f. The constant term is never bad.
pub fn classify_bad_monomials<F: ValuedField>(trace: &StallTrace<F>, f: &KPoly<F>, i: usize, bound: &Value, e0: u32) -> Result<BadMonomialReport> {
    let chain = trace.chain();
    if i < trace.start() || i >= chain.len() {
        return Err(Error::NoSuchLevel(i));
    }
    if !gap_condition(chain, trace.start(), i, e0, bound) {
        return Err(Error::GapConditionUnmet { level: i + 1 });
    }
    let p = chain.field().p().max(1);
    let pe = p.pow(e0) as usize;
    let beta = chain.beta(i);
    let threshold = bound.mul_int(2 * pe as i64).sub(&beta.mul_int(pe as i64));
    let ds = chain.standard_expansion(f, i)?;
    let mut classes = Vec::new();
    for j in 1..pe.min(ds.len()) {
        if ds[j].is_zero() {
            continue;
        }
        let value = chain.coefficient_value(&ds[j], i);
        let line = bound.mul_int((pe - j) as i64);
        let under_threshold = value.add(&bound.mul_int(j as i64)) < threshold;
        let below_line = value < line;
        let not_p_power = !is_p_power(j as u64, p);
        let above_line = value > line;
        let bad = under_threshold && (below_line || not_p_power || above_line);
        classes.push(MonomialClass { j, value, line, under_threshold, below_line, not_p_power, above_line, bad });
    }
    let bad: Vec<&MonomialClass> = classes.iter().filter(|c| c.bad).collect();
    let j_max = bad.iter().map(|c| c.j).max();
    let j_bullet = bad
        .iter()
        .min_by(|a, b| {
            let ka = a.value.add(&beta.mul_int(a.j as i64));
            let kb = b.value.add(&beta.mul_int(b.j as i64));
            ka.cmp(&kb).then(b.j.cmp(&a.j))
        })
        .map(|c| c.j);
    Ok(BadMonomialReport { level: i, e0, threshold, classes, j_max, j_bullet })
}

#[derive(Clone, Debug)]
pub struct LimitCandidate<F: ValuedField> {
    pub base_level: usize,
    pub e0: u32,
    /// `(j, c_j)` for the nonzero coefficients of the expansion in `Q_base`.
    pub coeffs: Vec<(usize, KPoly<F>)>,
    pub polynomial: KPoly<F>,
    pub bound: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateChecks {
    pub weakly_affine: bool,
    pub monic_degree: bool,
    pub critical_line: bool,
    pub exponent_divisibility: bool,
    pub defective_over_window: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitStep {
    Normalized,
    /// Terms above δ and the unit part of the leading coefficient dropped at this level.
    Truncated { level: usize },
    /// A bad monomial `a_j Q^j` removed at this level.
    BadRemoved { level: usize, j: usize },
    /// A monomial above the threshold removed.
    HighRemoved { level: usize, j: usize },
}

impl LimitStep {
    fn to_json(&self) -> serde_json::Value {
        match self {
            LimitStep::Normalized => json!({"step": "normalize"}),
            LimitStep::Truncated { level } => json!({"step": "truncate", "level": level + 1}),
            LimitStep::BadRemoved { level, j } => json!({"step": "remove_bad", "level": level + 1, "j": j}),
            LimitStep::HighRemoved { level, j } => json!({"step": "remove_high", "level": level + 1, "j": j}),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LimitOutcome<F: ValuedField> {
    pub field: F,
    pub candidate: LimitCandidate<F>,
    pub checks: CandidateChecks,
    pub steps: Vec<LimitStep>,
    pub probe: KPoly<F>,
    pub delta: DeltaReport,
    /// Levels `base_level..=top` over which the checks were certified.
    pub window: (usize, usize),
}

impl<F: ValuedField> LimitOutcome<F> {
    pub fn to_json(&self) -> serde_json::Value {
        let c = &self.candidate;
        json!({
            "base_level": c.base_level + 1,
            "e0": c.e0,
            "bound": c.bound.to_json(),
            "coeffs": c.coeffs_json(&self.field),
            "polynomial": self.field.encode_poly(&c.polynomial),
            "checks": {
                "weakly_affine": self.checks.weakly_affine,
                "monic_degree": self.checks.monic_degree,
                "critical_line": self.checks.critical_line,
                "exponent_divisibility": self.checks.exponent_divisibility,
                "defective_over_window": self.checks.defective_over_window,
            },
            "steps": self.steps.iter().map(LimitStep::to_json).collect::<Vec<_>>(),
            "delta": self.delta.to_json(),
            "window": [self.window.0 + 1, self.window.1 + 1],
        })
    }
}

impl<F: ValuedField> LimitCandidate<F> {
    /// `{"j": c_j}` with keys in increasing order of j.
    pub fn coeffs_json(&self, field: &F) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        for (j, c) in &self.coeffs {
            m.insert(j.to_string(), field.encode_poly(c));
        }
        serde_json::Value::Object(m)
    }
}

#[derive(Clone, Debug)]
pub struct LimitConfig {
    pub degree_cap: usize,
    /// Number of trailing levels over which δ must be constant.
    pub window: usize,
    pub max_rounds: usize,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig { degree_cap: 64, window: 3, max_rounds: 64 }
    }
}

fn defective_over<F: ValuedField>(chain: &KeyChain<F>, h: &KPoly<F>, from: usize) -> Result<bool> {
    for i in from..chain.len() {
        if delta_epsilon(h, chain, i)?.delta == 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn expansion_poly<F: ValuedField>(k: &F, q: &KPoly<F>, ds: &[KPoly<F>]) -> KPoly<F> {
    ds.iter().rev().fold(KPoly::<F>::zero(), |acc, d| k.padd(&k.pmul(&acc, q), d))
}

/// Builds a weakly affine candidate from the smallest defective probe.
pub fn build_limit_candidate<F: ValuedField>(
    chain: &KeyChain<F>,
    probes: &[KPoly<F>],
    bound: Option<Value>,
    config: &LimitConfig,
) -> Result<LimitOutcome<F>> {
    let k = chain.field();
    let p = k.p();
    if p <= 1 {
        return Err(Error::InvalidChain("residue characteristic 0: an α = 1 tail has unbounded values".into()));
    }
    let start = tail_start(chain);
    let mut candidates = Vec::new();
    for h in probes.iter().filter(|h| !h.is_zero() && h.deg() <= config.degree_cap) {
        if !defective_over(chain, h, start)? {
            continue;
        }
        let trace = StallTrace::with_start(chain.clone(), start, h.clone(), bound.clone())?;
        let Ok(d) = stable_delta(&trace, config.window) else { continue };
        candidates.push((d.delta, h.deg(), trace, d));
    }
    candidates.sort_by_key(|c| (c.0, c.1));
    let Some((_, _, trace, delta)) = candidates.into_iter().next() else {
        return Err(Error::NoDefectiveProbe);
    };
    let e0 = delta.e.ok_or_else(|| Error::InvalidChain(format!("stable δ = {} is not a power of p", delta.delta)))?;
    if e0 == 0 {
        return Err(Error::InvalidChain("stable δ = 1: an α = 1 tail with δ = 1 has unbounded values".into()));
    }
    let bound = trace.bound().ok_or(Error::NotStabilized)?;
    let probe = trace.probe().clone();
    let d = delta.delta;
    let mut steps = Vec::new();

    // Normalize the leading expansion coefficient and truncate at level ℓ₁.
    let l1 = chain.len() - config.window;
    let ds = chain.standard_expansion(&probe, l1)?;
    let lead = &ds[d];
    let mut f = probe.clone();
    if !(lead.deg() == 0 && k.is_one(&lead.coeffs()[0])) {
        let inv = if lead.deg() == 0 {
            k.pconst(k.inv(&lead.coeffs()[0]).ok_or(Error::DivisionByZero)?)
        } else {
            k.pinv_mod(lead, chain.q(l1)).ok_or(Error::DivisionByZero)?
        };
        f = k.pmul(&f, &inv);
        steps.push(LimitStep::Normalized);
    }
    let mut ds = chain.standard_expansion(&f, l1)?;
    ds.truncate(d + 1);
    ds[d] = k.pone();
    let truncated = expansion_poly(k, chain.q(l1), &ds);
    if truncated != f {
        steps.push(LimitStep::Truncated { level: l1 });
    }
    f = truncated;

    let mut i = (l1..chain.len()).find(|&i| gap_condition(chain, start, i, e0, &bound)).ok_or(Error::GapConditionUnmet { level: chain.len() })?;
    let pe = p.pow(e0) as usize;
    let mut rounds = 0;
    loop {
        let report = classify_bad_monomials(&trace, &f, i, &bound, e0)?;
        let Some(j) = report.j_max else { break };
        rounds += 1;
        if rounds > config.max_rounds {
            return Err(Error::BudgetExhausted(format!("{} bad-monomial rounds", config.max_rounds)));
        }
        let a = &chain.standard_expansion(&f, i)?[j];
        let va = chain.coefficient_value(a, i);
        let clears = |i1: usize| {
            let lhs = va.add(&chain.beta(i1).mul_int(j as i64));
            lhs > bound.mul_int(2 * pe as i64).sub(&chain.beta(i1).mul_int(pe as i64))
        };
        let i1 = (i..chain.len())
            .find(|&i1| clears(i1))
            .ok_or_else(|| Error::BudgetExhausted(format!("bad monomial Q^{j} persists through the window")))?;
        let a1 = chain.standard_expansion(&f, i1)?[j].clone();
        f = k.psub(&f, &k.pmul(&a1, &k.ppow(chain.q(i1), j)));
        steps.push(LimitStep::BadRemoved { level: i1, j });
        i = i1;
    }

    let report = classify_bad_monomials(&trace, &f, i, &bound, e0)?;
    let mut ds = chain.standard_expansion(&f, i)?;
    for c in &report.classes {
        if !c.under_threshold {
            ds[c.j] = KPoly::<F>::zero();
            steps.push(LimitStep::HighRemoved { level: i, j: c.j });
        }
    }
    let f = expansion_poly(k, chain.q(i), &ds);
    let coeffs: Vec<(usize, KPoly<F>)> = ds.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, c)| (j, c.clone())).collect();
    let candidate = LimitCandidate { base_level: i, e0, coeffs, polynomial: f.clone(), bound: bound.clone() };

    let weakly_affine = candidate.coeffs.iter().all(|(j, _)| *j == 0 || is_p_power(*j as u64, p));
    let monic_degree = ds.len() == pe + 1 && k.is_monic(&ds[pe]) && ds[pe].deg() == 0;
    let critical_line = (0..e0).all(|s| {
        let j = p.pow(s) as usize;
        chain.coefficient_value(&ds[j], i) == bound.mul_int((pe - j) as i64)
    });
    let fin = trace.with_probe(f.clone())?;
    let exponent_divisibility = exponent_divisibility_check(&fin, e0)?.passes();
    let defective_over_window = defective_over(chain, &f, i)?;
    Ok(LimitOutcome {
        field: k.clone(),
        candidate,
        checks: CandidateChecks { weakly_affine, monic_degree, critical_line, exponent_divisibility, defective_over_window },
        steps,
        probe,
        delta,
        window: (i, chain.top()),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisibilityReport {
    pub e: u32,
    /// Per level, the exponents attaining `ν_t(f)` that `p^e` does not divide.
    pub offending: Vec<(usize, Vec<usize>)>,
    /// Per level, every nonzero exponent `p^e` does not divide.
    pub off_support: Vec<(usize, Vec<usize>)>,
}

impl DivisibilityReport {
    pub fn passes(&self) -> bool {
        self.offending.iter().all(|(_, v)| v.is_empty())
    }

    /// Every monomial exponent, not only those of minimal value, is divisible.
    pub fn exact(&self) -> bool {
        self.off_support.iter().all(|(_, v)| v.is_empty())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let lv = |v: &Vec<(usize, Vec<usize>)>| v.iter().map(|(l, e)| json!({"level": l + 1, "exponents": e})).collect::<Vec<_>>();
        json!({"e": self.e, "passes": self.passes(), "exact": self.exact(), "offending": lv(&self.offending), "off_support": lv(&self.off_support)})
    }
}

/// Along the window, the exponents of the trace probe's expansions that carry
/// its initial form are divisible by `p^e`.
pub fn exponent_divisibility_check<F: ValuedField>(trace: &StallTrace<F>, e: u32) -> Result<DivisibilityReport> {
    let chain = trace.chain();
    let p = chain.field().p().max(1) as usize;
    let m = p.pow(e);
    let f = trace.probe();
    let mut offending = Vec::new();
    let mut off_support = Vec::new();
    for t in trace.start()..chain.len() {
        let ds = chain.standard_expansion(f, t)?;
        let nz: Vec<usize> = (0..ds.len()).filter(|&j| !ds[j].is_zero() && j % m != 0).collect();
        let support = chain.support_set(f, t, chain.beta(t))?;
        offending.push((t, support.into_iter().filter(|j| j % m != 0).collect()));
        off_support.push((t, nz));
    }
    Ok(DivisibilityReport { e, offending, off_support })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowInvariants {
    /// `j(i+1) ≤ j(i)` and `j•(i+1) ≤ j•(i)`.
    pub indices_non_increasing: bool,
    /// For j ∈ {j(i), j•(i)}: `ν′(a_{j,i+1} − a_{j,i}) > ν′(a_{j,i})`.
    pub initial_coefficients_stable: bool,
    /// The on-line index set and its values do not change.
    pub online_set_stable: bool,
    pub levels: Vec<usize>,
}

/// Checks the level-to-level behaviour of bad and on-line monomials of f over
/// the levels of the window where the gap condition holds.
pub fn window_invariants<F: ValuedField>(trace: &StallTrace<F>, f: &KPoly<F>, bound: &Value, e0: u32) -> Result<WindowInvariants> {
    let chain = trace.chain();
    let k = chain.field();
    let levels: Vec<usize> = (trace.start()..chain.len()).filter(|&i| gap_condition(chain, trace.start(), i, e0, bound)).collect();
    let mut reports = Vec::new();
    for &i in &levels {
        reports.push(classify_bad_monomials(trace, f, i, bound, e0)?);
    }
    let mut indices_non_increasing = true;
    let mut initial_coefficients_stable = true;
    let mut online_set_stable = true;
    let online = |r: &BadMonomialReport| -> Vec<(usize, Value)> { r.classes.iter().filter(|c| c.value == c.line).map(|c| (c.j, c.value.clone())).collect() };
    for w in reports.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        indices_non_increasing &= b.j_max.unwrap_or(0) <= a.j_max.unwrap_or(0) && b.j_bullet.unwrap_or(0) <= a.j_bullet.unwrap_or(0);
        let da = chain.standard_expansion(f, a.level)?;
        let db = chain.standard_expansion(f, b.level)?;
        for j in [a.j_max, a.j_bullet].into_iter().flatten() {
            let diff = k.psub(&db[j], &da[j]);
            initial_coefficients_stable &= chain.coefficient_value(&diff, b.level) > chain.coefficient_value(&da[j], a.level);
        }
        online_set_stable &= online(a) == online(b);
    }
    Ok(WindowInvariants { indices_non_increasing, initial_coefficients_stable, online_set_stable, levels })
}
