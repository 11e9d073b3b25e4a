//! Building a chain of key polynomials for an oracle, one augmentation at a time.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::chain::{KPoly, KeyChain, RPoly};
use crate::error::{Error, Result};
use crate::oracle::ValuationOracle;
use crate::poly::PolyOps;
use crate::scalars::{factor_residual, Field, Value, ValuedField};

/// A level where the witness is still defective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Defect {
    pub level: usize,
    pub truncated: Value,
    pub target: Value,
}

/// Compares ν_top(h) with ν′(h). Lower truncations never exceed the top one,
/// so a defect is always reported at the top level.
pub fn detect_defect<F: ValuedField>(h: &KPoly<F>, chain: &KeyChain<F>, oracle: &dyn ValuationOracle<F>) -> Result<Option<Defect>> {
    if h.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let level = chain.top();
    let truncated = chain.truncation_value(h, level);
    let target = oracle.evaluate(h)?;
    Ok((truncated < target).then_some(Defect { level, truncated, target }))
}

#[derive(Clone, Debug)]
pub struct AugmentReport<F: ValuedField> {
    pub witness: KPoly<F>,
    pub level: usize,
    pub support: Vec<usize>,
    pub lambda: RPoly<F>,
    pub abar: usize,
    pub d: usize,
    pub alpha: usize,
    pub q: KPoly<F>,
    pub beta: Value,
}

impl<F: ValuedField> AugmentReport<F> {
    /// Levels are numbered from 1 in reports.
    pub fn to_json(&self, chain: &KeyChain<F>) -> serde_json::Value {
        let k = chain.residue_field(self.level);
        let field = chain.field();
        json!({
            "witness": field.encode_poly(&self.witness),
            "level": self.level + 1,
            "support": self.support,
            "lambda": k.poly_to_json(&self.lambda),
            "abar": self.abar,
            "d": self.d,
            "alpha": self.alpha,
            "Q": field.encode_poly(&self.q),
            "beta": self.beta.to_json(),
        })
    }
}

/// One augmentation at the top level ℓ: factor the residual polynomial of the
/// witness, lift every factor, and keep the one whose lift gains value.
pub fn augment_step<F: ValuedField>(
    chain: &KeyChain<F>,
    oracle: &dyn ValuationOracle<F>,
    h: &KPoly<F>,
    rng: &mut ChaCha8Rng,
) -> Result<(KeyChain<F>, AugmentReport<F>)> {
    let l = chain.top();
    let beta = chain.beta(l).clone();
    if beta.is_infinite() {
        return Err(Error::InvalidChain("the top value is already infinite".into()));
    }
    let ex = chain.expand_residual(l, h)?;
    let k = chain.residue_field(l);
    let r = k.poly(ex.coeffs);
    let fac = factor_residual(&k, &r, rng, chain.rational_bound())?;
    let abar = chain.abar(l);
    let mut found = Vec::new();
    for (lambda, _) in fac.factors {
        if lambda.deg() == 1 && k.is_zero(&lambda.coeffs()[0]) {
            continue;
        }
        let q = chain.integral_relation_lift(l, &lambda)?;
        let d = lambda.deg();
        let v = oracle.evaluate(&q)?;
        if v > beta.mul_int((d * abar) as i64) {
            found.push((lambda, q, v, d));
        }
    }
    if found.len() > 1 {
        return Err(Error::InvalidOracle("several residual factors gain value".into()));
    }
    let (lambda, q, v, d) = found.pop().ok_or(Error::NoVanishingFactor)?;
    let next = chain.push(q.clone(), v.clone())?;
    let report = AugmentReport { witness: h.clone(), level: l, support: ex.support, lambda, abar, d, alpha: d * abar, q, beta: v };
    Ok((next, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefineCase {
    /// No further α = 1 step: the top entry is kept.
    Case1,
    /// Values passed the threshold.
    Case2a,
    /// The step budget ran out with values below the threshold.
    Case2b,
}

impl RefineCase {
    pub fn name(&self) -> &'static str {
        match self {
            RefineCase::Case1 => "case1",
            RefineCase::Case2a => "case2a",
            RefineCase::Case2b => "case2b",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Consecutive α = 1 steps before declaring a stall.
    pub max_steps: usize,
    /// Values above this count as unbounded.
    pub value_threshold: Value,
    /// Total number of chain entries allowed.
    pub max_entries: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { max_steps: 32, value_threshold: Value::int(64), max_entries: 256, seed: 0 }
    }
}

/// Repeats α = 1 augmentations `Q ← Q + z` while the witness stays defective.
/// A step with α > 1 is kept and ends the run with `Case1`.
pub fn refine_alpha_one<F: ValuedField>(
    mut chain: KeyChain<F>,
    oracle: &dyn ValuationOracle<F>,
    h: &KPoly<F>,
    config: &RunConfig,
    rng: &mut ChaCha8Rng,
    trace: &mut Vec<AugmentReport<F>>,
) -> Result<(KeyChain<F>, RefineCase)> {
    let mut steps = 0;
    loop {
        let l = chain.top();
        if chain.beta(l).is_infinite() || detect_defect(h, &chain, oracle)?.is_none() {
            return Ok((chain, RefineCase::Case1));
        }
        if chain.beta(l) > &config.value_threshold {
            return Ok((chain, RefineCase::Case2a));
        }
        if steps >= config.max_steps {
            return Ok((chain, RefineCase::Case2b));
        }
        if chain.len() >= config.max_entries {
            return Err(Error::BudgetExhausted(format!("{} chain entries", chain.len())));
        }
        let (next, report) = augment_step(&chain, oracle, h, rng)?;
        let alpha = report.alpha;
        trace.push(report);
        chain = next;
        if alpha != 1 {
            return Ok((chain, RefineCase::Case1));
        }
        steps += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    OutsideGamma1,
    StallDetected,
    BudgetExhausted,
}

impl RunStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RunStatus::Complete => "Complete",
            RunStatus::OutsideGamma1 => "OutsideGamma1",
            RunStatus::StallDetected => "StallDetected",
            RunStatus::BudgetExhausted => "BudgetExhausted",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome<F: ValuedField> {
    pub status: RunStatus,
    pub chain: KeyChain<F>,
    pub trace: Vec<AugmentReport<F>>,
    /// The probe that drove the last α = 1 run, when it stalled.
    pub stall_witness: Option<KPoly<F>>,
}

impl<F: ValuedField> RunOutcome<F> {
    pub fn to_json(&self) -> serde_json::Value {
        let field = self.chain.field();
        json!({
            "status": self.status.name(),
            "chain": self.chain.to_json(),
            "trace": self.trace.iter().map(|r| r.to_json(&self.chain)).collect::<Vec<_>>(),
            "stall_witness": self.stall_witness.as_ref().map(|h| field.encode_poly(h)),
        })
    }
}

/// Builds the chain of `oracle` until every probe is matched.
pub fn run<F: ValuedField>(field: &F, oracle: &dyn ValuationOracle<F>, probes: &[KPoly<F>], config: &RunConfig) -> Result<RunOutcome<F>> {
    let beta0 = oracle.evaluate(&field.px())?;
    if beta0 <= Value::zero() {
        return Err(Error::NonPositiveValueOfX(beta0));
    }
    let mut probes: Vec<KPoly<F>> = probes.iter().filter(|p| !p.is_zero()).cloned().collect();
    probes.sort_by_key(|p| p.deg());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut chain = KeyChain::start(field.clone(), beta0)?;
    let mut trace = Vec::new();
    let done = |chain: KeyChain<F>, trace, status| Ok(RunOutcome { status, chain, trace, stall_witness: None });
    loop {
        let mut witness = None;
        for p in &probes {
            if detect_defect(p, &chain, oracle)?.is_some() {
                witness = Some(p.clone());
                break;
            }
        }
        let Some(h) = witness else {
            return done(chain, trace, RunStatus::Complete);
        };
        if chain.beta(chain.top()).is_infinite() {
            return done(chain, trace, RunStatus::OutsideGamma1);
        }
        if chain.len() >= config.max_entries {
            return done(chain, trace, RunStatus::BudgetExhausted);
        }
        let (next, report) = augment_step(&chain, oracle, &h, &mut rng)?;
        let alpha = report.alpha;
        trace.push(report);
        chain = next;
        if alpha == 1 {
            let (next, case) = match refine_alpha_one(chain.clone(), oracle, &h, config, &mut rng, &mut trace) {
                Err(Error::BudgetExhausted(_)) => return done(chain, trace, RunStatus::BudgetExhausted),
                r => r?,
            };
            chain = next;
            match case {
                RefineCase::Case1 => {}
                RefineCase::Case2a => return done(chain, trace, RunStatus::BudgetExhausted),
                RefineCase::Case2b => {
                    return Ok(RunOutcome { status: RunStatus::StallDetected, chain, trace, stall_witness: Some(h) });
                }
            }
        }
    }
}
