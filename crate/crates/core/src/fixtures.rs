//! Reference chains and oracles shared by tests, benches and the CLI.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::augment::{run, RunConfig};
use crate::chain::{KPoly, KeyChain};
use crate::error::Result;
use crate::oracle::{ChainOracle, EisensteinRootOracle, HenselRootOracle, SeriesOracle, SeriesTerm};
use crate::poly::PolyOps;
use crate::scalars::{is_irreducible, Field, FpT, PAdic, PrimeField, Value, ValuedField};

pub fn int_poly(k: &PAdic, coeffs: &[i64]) -> KPoly<PAdic> {
    k.poly(coeffs.iter().map(|&c| k.from_i64(c)).collect())
}

/// θ = √2 over ℚ with the 2-adic valuation.
pub fn sqrt2() -> (PAdic, EisensteinRootOracle<PAdic>, KeyChain<PAdic>) {
    let k = PAdic::new(2).unwrap();
    let m = int_poly(&k, &[-2, 0, 1]);
    let oracle = EisensteinRootOracle::new(k.clone(), m.clone(), 2).unwrap();
    let chain = KeyChain::from_entries(k.clone(), vec![(k.px(), Value::frac(1, 2)), (m, Value::Infinity)]).unwrap();
    (k, oracle, chain)
}

/// The 2-adic root of x² + x + 2 of value 1, with `steps` α = 1 refinements.
pub fn hensel(steps: usize) -> (PAdic, HenselRootOracle, KeyChain<PAdic>) {
    let k = PAdic::new(2).unwrap();
    let m = int_poly(&k, &[2, 1, 1]);
    let oracle = HenselRootOracle::new(k.clone(), m.clone(), BigInt::from(0)).unwrap();
    let cfg = RunConfig { max_steps: steps.saturating_sub(1), value_threshold: Value::int(1 << 20), ..RunConfig::default() };
    let out = run(&k, &oracle, &[m], &cfg).expect("hensel fixture runs");
    (k, oracle, out.chain)
}

/// θ = 2 exactly.
pub fn theta_two() -> (PAdic, KeyChain<PAdic>) {
    let k = PAdic::new(2).unwrap();
    let c = KeyChain::from_entries(k.clone(), vec![(k.px(), Value::int(1)), (int_poly(&k, &[-2, 1]), Value::Infinity)]).unwrap();
    (k, c)
}

/// θ = t^{2/3} over F₃(t).
pub fn puiseux_f3() -> (FpT, SeriesOracle<PrimeField>, KeyChain<FpT>) {
    let f = FpT::fp(3).unwrap();
    let term = SeriesTerm { exp: BigRational::new(2.into(), 3.into()), coeff: 1 };
    let oracle = SeriesOracle::new(f.clone(), vec![term], None).unwrap();
    let q = f.poly(vec![f.neg(&f.t_power(2)), f.zero(), f.zero(), f.one()]);
    let chain = KeyChain::from_entries(f.clone(), vec![(f.px(), Value::frac(2, 3)), (q, Value::Infinity)]).unwrap();
    (f, oracle, chain)
}

/// A chain over ℚ₂ with α > 1 at every step, ending in a pseudo-valuation:
/// degrees 1, 2, 4, 12.
pub fn alpha_jumps() -> (PAdic, KeyChain<PAdic>) {
    let k = PAdic::new(2).unwrap();
    let c = KeyChain::start(k.clone(), Value::frac(1, 2)).unwrap();
    let k0 = c.residue_field(0);
    let q1 = c.integral_relation_lift(0, &k0.poly(vec![k0.one(), k0.one()])).unwrap();
    let c = c.push(q1, Value::frac(5, 2)).unwrap();
    let k1 = c.residue_field(1);
    let q2 = c.integral_relation_lift(1, &k1.poly(vec![k1.one(), k1.one(), k1.one()])).unwrap();
    let c = c.push(q2, Value::frac(16, 3)).unwrap();
    let k2 = c.residue_field(2);
    let q3 = c.integral_relation_lift(2, &k2.poly(vec![k2.one(), k2.one()])).unwrap();
    let c = c.push(q3, Value::Infinity).unwrap();
    (k, c)
}

fn random_positive<R: Rng + ?Sized>(rng: &mut R) -> Value {
    Value::frac(rng.gen_range(1..=3), rng.gen_range(1..=3))
}

/// A random chain: β₀ > 0, then lifts of random irreducible residual
/// polynomials with `β_{i+1} > α_{i+1}β_i`. Degrees stay below `max_deg`.
pub fn random_chain<F: ValuedField, R: Rng + ?Sized>(field: &F, rng: &mut R, max_len: usize, max_deg: usize) -> KeyChain<F> {
    let mut c = KeyChain::start(field.clone(), random_positive(rng)).unwrap();
    while c.len() < max_len {
        let i = c.top();
        let k = c.residue_field(i);
        let base = c.q(i).deg() * c.abar(i);
        if base > max_deg {
            break;
        }
        let d = if 2 * base <= max_deg && rng.gen_bool(0.4) { 2 } else { 1 };
        let mut lambda = None;
        for _ in 0..64 {
            let mut coeffs: Vec<_> = (0..d).map(|_| k.random(rng)).collect();
            coeffs.push(k.one());
            if k.is_zero(&coeffs[0]) {
                continue;
            }
            let l = k.poly(coeffs);
            if is_irreducible(&k, &l, c.rational_bound()).unwrap_or(false) {
                lambda = Some(l);
                break;
            }
        }
        let Some(lambda) = lambda else { break };
        let q = c.integral_relation_lift(i, &lambda).unwrap();
        let alpha = (q.deg() / c.q(i).deg()) as i64;
        let beta = c.beta(i).mul_int(alpha).add(&random_positive(rng));
        c = c.push(q, beta).unwrap();
    }
    c
}

/// A scripted stall over F₂(t).
///
/// `w_k = t^{m − 2^{T−k}}` and `s_t = w_0 + … + w_{t−1}` with `m = 2^T + 4`.
/// The entries `x − s_t` carry `β_t = m − 2^{T−t}` for `t ≤ T`, which rise
/// towards `β̄ = m` by halving gaps. The declared chain then closes with
/// `x − s_{T+1}` at `m − 1/2` and `Q_ω = x² + t^m x + w_0²` at ∞, so inside
/// the window every `ν_t(Q_ω) = 2β_t` stays below `ν′(Q_ω)`.
#[derive(Clone, Debug)]
pub struct StallFixture {
    pub field: FpT,
    pub window: usize,
    pub m: i64,
    /// The full declared chain, window plus closing entries.
    pub chain: KeyChain<FpT>,
    pub q_omega: KPoly<FpT>,
}

impl StallFixture {
    pub fn new(window: usize) -> Result<Self> {
        assert!((1..=12).contains(&window), "window must be in 1..=12");
        let f = FpT::fp(2)?;
        let t = window as i64;
        let m = (1i64 << t) + 4;
        let w = |k: i64| f.t_power(m - (1i64 << (t - k)));
        let mut entries = vec![(f.px(), Value::int(m - (1 << t)))];
        let mut s = f.zero();
        for k in 0..=t {
            s = f.add(&s, &w(k));
            let beta = if k < t { Value::int(m - (1 << (t - k - 1))) } else { Value::frac(2 * m - 1, 2) };
            entries.push((f.poly(vec![f.neg(&s), f.one()]), beta));
        }
        let w0 = w(0);
        let q_omega = f.poly(vec![f.mul(&w0, &w0), f.t_power(m), f.one()]);
        entries.push((q_omega.clone(), Value::Infinity));
        let chain = KeyChain::from_entries(f.clone(), entries)?;
        Ok(StallFixture { field: f, window, m, chain, q_omega })
    }

    pub fn oracle(&self) -> ChainOracle<FpT> {
        ChainOracle::new(self.chain.clone())
    }

    /// Levels `0..=T`: the part of the chain a bounded run can observe.
    pub fn trace_chain(&self) -> KeyChain<FpT> {
        self.chain.prefix(self.window)
    }

    pub fn bound(&self) -> Value {
        Value::int(self.m)
    }
}
