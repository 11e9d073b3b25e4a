use keypoly::augment::{run, RunConfig, RunStatus};
use keypoly::fixtures::StallFixture;
use keypoly::limits::{build_limit_candidate, exponent_divisibility_check, stable_delta, LimitConfig, StallTrace};
use keypoly::oracle::ValuationOracle;
use keypoly::scalars::Value;
use keypoly::Error;

#[test]
fn candidate_is_the_declared_limit_for_every_window() {
    for window in 3..=8 {
        let fx = StallFixture::new(window).unwrap();
        let out = build_limit_candidate(&fx.trace_chain(), &[fx.q_omega.clone()], Some(fx.bound()), &LimitConfig::default()).unwrap();
        assert_eq!(out.candidate.polynomial, fx.q_omega, "window {window}");
        assert_eq!(out.candidate.e0, 1);
        assert!(out.checks.weakly_affine && out.checks.monic_degree && out.checks.critical_line);
        assert_eq!(fx.oracle().evaluate(&out.candidate.polynomial).unwrap(), Value::Infinity);
    }
}

#[test]
fn bound_is_estimated_from_the_gaps() {
    let fx = StallFixture::new(7).unwrap();
    let trace = StallTrace::new(fx.trace_chain(), fx.q_omega.clone(), None).unwrap();
    assert!(trace.gap_monotone());
    assert_eq!(trace.estimate_bound(), Some(fx.bound()));
    let out = build_limit_candidate(&fx.trace_chain(), &[fx.q_omega.clone()], None, &LimitConfig::default()).unwrap();
    assert_eq!(out.candidate.bound, fx.bound());
}

#[test]
fn a_bounded_run_stalls_and_feeds_the_limit_builder() {
    let fx = StallFixture::new(6).unwrap();
    let cfg = RunConfig { max_steps: 4, value_threshold: Value::int(1000), ..RunConfig::default() };
    let out = run(&fx.field, &fx.oracle(), &[fx.q_omega.clone()], &cfg).unwrap();
    assert_eq!(out.status, RunStatus::StallDetected);
    let witness = out.stall_witness.clone().expect("stall witness");
    let limit = build_limit_candidate(&out.chain, &[witness], Some(fx.bound()), &LimitConfig::default()).unwrap();
    assert_eq!(limit.candidate.polynomial, fx.q_omega);
}

#[test]
fn delta_and_divisibility_on_the_window() {
    let fx = StallFixture::new(6).unwrap();
    let trace = StallTrace::new(fx.trace_chain(), fx.q_omega.clone(), Some(fx.bound())).unwrap();
    let d = stable_delta(&trace, 3).unwrap();
    assert_eq!((d.delta, d.e), (2, Some(1)));
    assert!(exponent_divisibility_check(&trace, 1).unwrap().passes());
}

#[test]
fn degree_cap_is_enforced() {
    let fx = StallFixture::new(5).unwrap();
    let cfg = LimitConfig { degree_cap: 1, ..LimitConfig::default() };
    let err = build_limit_candidate(&fx.trace_chain(), &[fx.q_omega.clone()], Some(fx.bound()), &cfg).unwrap_err();
    // Probes above the cap are ignored, leaving nothing defective.
    assert!(matches!(err, Error::NoDefectiveProbe));
}
