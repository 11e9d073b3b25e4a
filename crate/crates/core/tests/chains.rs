use keypoly::augment::{run, RunConfig, RunStatus};
use keypoly::chain::{KPoly, KeyChain};
use keypoly::fixtures::{hensel, int_poly, random_chain, sqrt2};
use keypoly::oracle::{oracle_from_json, ChainOracle, ValuationOracle};
use keypoly::poly::PolyOps;
use keypoly::scalars::{FpT, PAdic, Value, ValuedField};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn ints(k: &PAdic, v: &[i64]) -> KPoly<PAdic> {
    int_poly(k, v)
}

fn v2(n: &BigInt) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let mut n = n.clone();
    let mut e = 0;
    while n.is_even() {
        n /= 2;
        e += 1;
    }
    Some(e)
}

/// ν′ for θ = √2 by hand: f(θ) = a + b√2 with integer a, b, and
/// ν(a + b√2) = min(ν(a), ν(b) + 1/2) since the two values never tie.
fn sqrt2_by_hand(coeffs: &[i64]) -> Value {
    let (mut a, mut b) = (BigInt::zero(), BigInt::zero());
    let (mut pa, mut pb) = (BigInt::from(1), BigInt::zero());
    for &c in coeffs {
        a += &pa * c;
        b += &pb * c;
        let na = &pb * 2;
        pb = pa;
        pa = na;
    }
    let va = v2(&a).map(Value::int).unwrap_or(Value::Infinity);
    let vb = v2(&b).map(|e| Value::frac(2 * e + 1, 2)).unwrap_or(Value::Infinity);
    va.min(vb)
}

/// The value-1 root of x² + x + 2 modulo 2^n, by digit search.
fn hensel_root(n: u32) -> BigInt {
    let mut r = BigInt::zero();
    for k in 1..n {
        let m = BigInt::from(1) << (k + 1);
        let f = |x: &BigInt| (x * x + x + BigInt::from(2)).mod_floor(&m);
        if !f(&r).is_zero() {
            r += BigInt::from(1) << k;
        }
        assert!(f(&r).is_zero());
    }
    r
}

fn hensel_by_hand(coeffs: &[i64], root: &BigInt, precision: i64) -> Value {
    let m = BigInt::from(1) << precision;
    let mut acc = BigInt::zero();
    for &c in coeffs.iter().rev() {
        acc = (acc * root + c).mod_floor(&m);
    }
    match v2(&acc) {
        Some(e) => Value::int(e),
        None => Value::Infinity,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sqrt2_oracle_matches_hand_computation(c in proptest::collection::vec(-40i64..40, 1..7)) {
        prop_assume!(c.iter().any(|&x| x != 0));
        let (k, o, chain) = sqrt2();
        let f = ints(&k, &c);
        let want = sqrt2_by_hand(&c);
        prop_assert_eq!(o.evaluate(&f).unwrap(), want.clone());
        prop_assert_eq!(chain.value(&f), want);
    }

    #[test]
    fn hensel_oracle_matches_digit_search(c in proptest::collection::vec(-40i64..40, 1..5)) {
        prop_assume!(c.iter().any(|&x| x != 0));
        let (k, o, _) = hensel(2);
        let f = ints(&k, &c);
        let root = hensel_root(96);
        let got = o.evaluate(&f).unwrap();
        let want = hensel_by_hand(&c, &root, 96);
        // Values at or above the working precision are indistinguishable from ∞.
        if want < Value::int(60) {
            prop_assert_eq!(got, want);
        } else {
            prop_assert!(got >= Value::int(60));
        }
    }

    #[test]
    fn expansions_reconstruct_and_truncations_increase(seed in 0u64..1000, deg in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = PAdic::new(3).unwrap();
        let chain = random_chain(&k, &mut rng, 4, 12);
        let f = k.poly((0..=deg).map(|_| k.random_elem(&mut rng)).collect());
        prop_assume!(!f.is_zero());
        let mut last = Value::zero().sub(&Value::int(1 << 20));
        for i in 0..chain.len() {
            let ds = chain.standard_expansion(&f, i).unwrap();
            let mut back = KPoly::<PAdic>::zero();
            for (j, d) in ds.iter().enumerate() {
                prop_assert!(d.is_zero() || d.deg() < chain.q(i).deg());
                back = k.padd(&back, &k.pmul(d, &k.ppow(chain.q(i), j)));
            }
            prop_assert_eq!(&back, &f);
            let v = chain.truncation_value(&f, i);
            prop_assert!(v >= last);
            last = v;
        }
        prop_assert!(chain.value(&f) >= last);
    }

    #[test]
    fn chain_json_round_trips(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = FpT::fp(2).unwrap();
        let chain = random_chain(&k, &mut rng, 4, 8);
        let back = KeyChain::from_json(k.clone(), &chain.to_json()).unwrap();
        prop_assert_eq!(back.entries(), chain.entries());
        prop_assert_eq!(back.to_json(), chain.to_json());
    }

    #[test]
    fn newton_polygon_is_lower_convex(seed in 0u64..500, deg in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = PAdic::new(2).unwrap();
        let chain = random_chain(&k, &mut rng, 3, 8);
        let f = k.poly((0..=deg).map(|_| k.random_elem(&mut rng)).collect());
        prop_assume!(!f.is_zero());
        let np = chain.newton_polygon(&f, chain.top()).unwrap();
        for w in np.sides.windows(2) {
            prop_assert!(w[0].slope < w[1].slope);
        }
    }
}

#[test]
fn oracle_specs_round_trip_through_json() {
    let (k, o, _) = sqrt2();
    let rebuilt = oracle_from_json(&k, &o.describe()).unwrap();
    let f = ints(&k, &[3, -4, 6, 1]);
    assert_eq!(rebuilt.evaluate(&f).unwrap(), o.evaluate(&f).unwrap());
    let spec = json!({"field": {"base": "Q", "p": 2}, "kind": "hensel", "min_poly": {"coeffs": [2, 1, 1]}, "start": 0});
    let h = oracle_from_json(&k, &spec).unwrap();
    assert_eq!(h.evaluate(&k.px()).unwrap(), Value::int(1));
}

#[test]
fn runs_reach_the_declared_pseudo_valuation() {
    let (k, o, want) = sqrt2();
    let out = run(&k, &o, &[want.q(1).clone()], &RunConfig::default()).unwrap();
    assert_eq!(out.status, RunStatus::Complete);
    assert_eq!(out.chain.entries(), want.entries());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let chain = random_chain(&FpT::fp(3).unwrap(), &mut rng, 3, 9);
    let kf = chain.field().clone();
    let probes: Vec<_> = (0..chain.len()).map(|i| chain.q(i).clone()).collect();
    let cfg = RunConfig { value_threshold: Value::int(1 << 16), ..RunConfig::default() };
    let out = run(&kf, &ChainOracle::new(chain.clone()), &probes, &cfg).unwrap();
    for (a, b) in out.chain.entries().iter().zip(chain.entries()) {
        assert_eq!((&a.beta, a.alpha), (&b.beta, b.alpha));
    }
}

#[test]
fn hensel_digits_are_consistent() {
    let root = hensel_root(40);
    let m = BigInt::from(1) << 40;
    assert!((&root * &root + &root + BigInt::from(2)).mod_floor(&m).is_zero());
    assert!(!root.is_negative());
    assert_eq!(v2(&root), Some(1));
}
