use chshlab::chsh::{chsh_expectation, hurwitz_coords, hurwitz_violates, violates};
use chshlab::ensembles::{haar_state, worker_rng};
use chshlab::experiments::{self, ExperimentConfig};
use chshlab::ChshSpec;

#[test]
fn hurwitz_region_matches_direct_evaluation() {
    let mut rng = worker_rng(21, 0);
    let mut disagreements = 0;
    let mut hits = 0;
    for _ in 0..1_000_000 {
        let psi = haar_state(&mut rng);
        let b = chsh_expectation(&ChshSpec::B0, &psi);
        let v = hurwitz_violates(hurwitz_coords(&psi));
        hits += usize::from(v);
        if v != violates(b) && (b.abs() - 2.0).abs() >= 1e-9 {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);
    // Sanity: the region is neither empty nor everything.
    assert!((20_000..30_000).contains(&hits), "{hits}");
}

#[test]
fn sampling_drivers_are_reproducible() {
    let cfg = ExperimentConfig {
        samples: 5_000,
        bins: 10,
        seed: 3,
        ..Default::default()
    };
    assert_eq!(
        experiments::fig4(&cfg).unwrap(),
        experiments::fig4(&cfg).unwrap()
    );
    let other = ExperimentConfig {
        seed: 4,
        ..cfg.clone()
    };
    assert_ne!(
        experiments::fig4(&cfg).unwrap(),
        experiments::fig4(&other).unwrap()
    );
}

#[test]
fn worker_split_preserves_totals() {
    let one = ExperimentConfig {
        samples: 20_000,
        bins: 10,
        seed: 5,
        workers: 1,
        ..Default::default()
    };
    let four = ExperimentConfig {
        workers: 4,
        ..one.clone()
    };
    let (a, b) = (
        experiments::haar_conditionals(&one).unwrap(),
        experiments::haar_conditionals(&four).unwrap(),
    );
    for h in [&a.s1, &b.s1] {
        assert_eq!(h.total, 20_000);
        assert_eq!(
            h.counts.iter().sum::<u64>() + h.underflow + h.overflow,
            20_000
        );
    }
    // Both partitions estimate the same violation rate.
    let rate = |h: &chshlab::stats::BinnedConditional| {
        h.violations.iter().sum::<u64>() as f64 / h.total as f64
    };
    let se = (0.025f64 * 0.975 / 20_000.0).sqrt();
    assert!((rate(&a.s1) - rate(&b.s1)).abs() < 7.0 * se);
}

#[test]
fn joint_marginal_passes_goodness_of_fit() {
    let cfg = ExperimentConfig {
        samples: 200_000,
        seed: 6,
        ..Default::default()
    };
    let h = experiments::haar_conditionals(&cfg).unwrap();
    assert_eq!(
        h.joint_nl.b_marginal.iter().sum::<u64>() + h.joint_nl.out_of_range,
        200_000
    );
    let t = experiments::b_marginal_chi_square(&h.joint_nl).unwrap();
    assert!(t.passes(0.001), "{t:?}");
}
