use coded_inference::latency::{hs_latency_closed, mc_latency_closed};
use coded_inference::montecarlo::{run_trials, simulate};
use coded_inference::optimizer::optimize;
use coded_inference::oracle::verify::Verifier;
use coded_inference::placement::{cyclic_schedule, validate_hybrid};
use coded_inference::{HybridParams, SchemeSpec, SystemConfig, SystemParams};

fn small(nodes: usize, rows: usize, mu: f64) -> SystemConfig {
    SystemConfig::new(SystemParams {
        nodes,
        users: nodes,
        rows,
        mu,
        ..SystemParams::default()
    })
    .unwrap()
}

#[test]
fn every_scheme_decodes_on_random_instances() {
    let c = small(6, 12, 0.5);
    let v = Verifier::new(&c).unwrap();
    let hs = (1..=16)
        .map(|g| HybridParams::new(4, 15 * g, 2))
        .find(|p| validate_hybrid(&c, p).is_ok())
        .expect("a valid q=4, rho2=2 design");
    let reports = [
        v.uncoded(&cyclic_schedule(&c), 100, 5).unwrap(),
        v.mds(100, 5).unwrap(),
        v.hybrid(&hs, 100, 5).unwrap(),
        v.mds_subsets().unwrap(),
        v.hybrid_subsets(&hs).unwrap(),
    ];
    for r in &reports {
        assert!(r.all_passed(), "{}: {:?}", r.scheme, r.failures.first());
    }
    assert_eq!(reports[0].total, 100);
}

#[test]
fn reference_mds_latency() {
    let c = SystemConfig::new(SystemParams::default()).unwrap();
    let b = mc_latency_closed(&c);
    assert!((b.delta_c - 121.666_666_666_666_67).abs() < 1e-9, "{b:?}");
    assert_eq!(b.delta_d, 60.0);
}

#[test]
fn hybrid_simulation_tracks_closed_form() {
    let c = SystemConfig::new(SystemParams {
        gamma: 1.0,
        ..SystemParams::default()
    })
    .unwrap();
    let best = optimize(&c).unwrap().best;
    let closed = hs_latency_closed(&c, &best.params).unwrap();
    let sim = run_trials(&c, &SchemeSpec::Hybrid(best.params), 20_000, 3).unwrap();
    assert!((sim.mean_delta_d - closed.breakdown.delta_d).abs() < 1e-9);
    let err = (sim.mean_delta - closed.breakdown.delta).abs();
    assert!(err < 3.0 * sim.ci95_delta, "{err} vs ci {}", sim.ci95_delta);
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let c = SystemConfig::new(SystemParams::default()).unwrap();
    let a = simulate(&c, &SchemeSpec::Uncoded, 500, 11).unwrap();
    let b = simulate(&c, &SchemeSpec::Uncoded, 500, 11).unwrap();
    assert_eq!(a.delta_c, b.delta_c);
    assert_eq!(a.delta_d, b.delta_d);
    let other = simulate(&c, &SchemeSpec::Uncoded, 500, 12).unwrap();
    assert_ne!(a.delta_c, other.delta_c);
}
