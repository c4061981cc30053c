use approx::assert_abs_diff_eq;
use chshlab::chsh::{chsh_expectation, chsh_family, exchange_parties, horodecki_max, TSIRELSON};
use chshlab::ensembles::{
    cache, clifford_on, haar_state, haar_unitary, local_clifford_pairs, worker_rng,
};
use chshlab::resources::{
    entanglement_capacity, local_magic, nonlocal_magic, stabilizer_entropy_mixed,
    stabilizer_entropy_pure,
};
use chshlab::stats::{conditional_violation, ConditionalAccumulator};
use chshlab::twirling::{form_factors, haar_mean_b, haar_var_b, parse_angle, Moments};
use chshlab::{DensityMatrix, Qubit, StateVec};
use proptest::prelude::*;

fn state(seed: u64) -> StateVec {
    haar_state(&mut worker_rng(seed, 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chsh_values_within_tsirelson(seed in any::<u64>()) {
        let psi = state(seed);
        let h = horodecki_max(&psi);
        prop_assert!(h <= TSIRELSON + 1e-12);
        for spec in chsh_family() {
            prop_assert!(chsh_expectation(&spec, &psi).abs() <= h + 1e-9);
        }
    }

    #[test]
    fn magic_decomposes(seed in any::<u64>()) {
        let psi = state(seed);
        let m2 = stabilizer_entropy_pure(&psi);
        let nl = nonlocal_magic(&psi);
        prop_assert!(nl >= -1e-12 && nl <= m2 + 1e-9);
        prop_assert!(local_magic(&psi).unwrap() >= 0.0);
        prop_assert!(entanglement_capacity(&psi) >= 0.0);
    }

    #[test]
    fn pure_and_mixed_entropies_agree(seed in any::<u64>()) {
        let psi = state(seed);
        assert_abs_diff_eq!(stabilizer_entropy_mixed(&psi.density()), stabilizer_entropy_pure(&psi), epsilon = 1e-10);
    }

    #[test]
    fn local_cliffords_preserve_magic(seed in any::<u64>(), k in 0usize..576) {
        let psi = state(seed);
        let moved = psi.apply(&local_clifford_pairs()[k]);
        assert_abs_diff_eq!(stabilizer_entropy_pure(&moved), stabilizer_entropy_pure(&psi), epsilon = 1e-10);
        assert_abs_diff_eq!(nonlocal_magic(&moved), nonlocal_magic(&psi), epsilon = 1e-10);
    }

    #[test]
    fn local_unitaries_preserve_nonlocal_magic(seed in any::<u64>()) {
        let mut rng = worker_rng(seed, 1);
        let psi = state(seed);
        let g = haar_unitary::<2, _>(&mut rng).kron(&haar_unitary::<2, _>(&mut rng));
        assert_abs_diff_eq!(nonlocal_magic(&psi.apply(&g)), nonlocal_magic(&psi), epsilon = 1e-10);
    }

    #[test]
    fn single_qubit_cliffords_act_on_one_side(k in 0usize..24, seed in any::<u64>()) {
        let psi = state(seed);
        let rho_b = psi.reduced(Qubit::B);
        let moved = psi.apply(&clifford_on(Qubit::A)[k]).reduced(Qubit::B);
        prop_assert!((moved.matrix() - rho_b.matrix()).norm() < 1e-12);
    }

    #[test]
    fn haar_moments_are_exchange_invariant(seed in any::<u64>()) {
        let u = haar_unitary::<4, _>(&mut worker_rng(seed, 2));
        let m = exchange_parties(&u);
        assert_abs_diff_eq!(haar_mean_b(&m), haar_mean_b(&u), epsilon = 1e-12);
        assert_abs_diff_eq!(haar_var_b(&m), haar_var_b(&u), epsilon = 1e-12);
        let (a, b) = (form_factors(&u), form_factors(&m));
        assert_abs_diff_eq!(a.c2, b.c2, epsilon = 1e-12);
        assert_abs_diff_eq!(a.c4, b.c4, epsilon = 1e-12);
    }

    #[test]
    fn haar_variance_is_nonnegative(seed in any::<u64>()) {
        let u = haar_unitary::<4, _>(&mut worker_rng(seed, 3));
        let mean = haar_mean_b(&u);
        prop_assert!(haar_var_b(&u) >= -1e-12);
        prop_assert!(mean.abs() <= TSIRELSON);
    }

    #[test]
    fn moments_merge_matches_sequential(xs in prop::collection::vec(-3.0f64..3.0, 2..200), cut in 0usize..200) {
        let cut = cut.min(xs.len());
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..cut].iter().for_each(|&x| a.push(x));
        xs[cut..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        prop_assert_eq!(a.n, all.n);
        prop_assert_eq!(a.violations, all.violations);
        assert_abs_diff_eq!(a.mean, all.mean, epsilon = 1e-12);
        assert_abs_diff_eq!(a.variance(), all.variance(), epsilon = 1e-10);
    }

    #[test]
    fn conditional_counts_ignore_order(pairs in prop::collection::vec((-2.9f64..2.9, -0.1f64..1.1), 1..300)) {
        let fwd = conditional_violation(pairs.iter().copied(), 10, (0.0, 1.0)).unwrap();
        let rev = conditional_violation(pairs.iter().rev().copied(), 10, (0.0, 1.0)).unwrap();
        prop_assert_eq!(&fwd.counts, &rev.counts);
        prop_assert_eq!(&fwd.violations, &rev.violations);
        prop_assert_eq!(fwd.underflow + fwd.overflow + fwd.counts.iter().sum::<u64>(), pairs.len() as u64);
        let mut split = ConditionalAccumulator::new(10, (0.0, 1.0)).unwrap();
        let mut other = split.clone();
        let half = pairs.len() / 2;
        pairs[..half].iter().for_each(|&(b, y)| split.push(b, y));
        pairs[half..].iter().for_each(|&(b, y)| other.push(b, y));
        split.merge(&other);
        prop_assert_eq!(split.finish(), fwd);
    }

    #[test]
    fn angle_labels_parse(num in 1u32..8, den in prop::sample::select(vec![1u32, 2, 3, 4, 6, 8])) {
        let label = format!("{num}pi/{den}");
        let v = parse_angle(&label).unwrap();
        assert_abs_diff_eq!(v, num as f64 * std::f64::consts::PI / den as f64, epsilon = 1e-14);
        assert_abs_diff_eq!(parse_angle(&format!("-{label}")).unwrap(), -v, epsilon = 0.0);
    }

    #[test]
    fn cache_decode_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = cache::decode(&bytes);
    }
}

#[test]
fn maximally_mixed_state_carries_no_violation() {
    let rho = DensityMatrix::<4>::maximally_mixed();
    for spec in chsh_family() {
        assert_abs_diff_eq!(
            chshlab::chsh::chsh_expectation_mixed(&spec, &rho),
            0.0,
            epsilon = 1e-15
        );
    }
}
