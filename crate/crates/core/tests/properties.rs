//! Property checks over random states, seeded through proptest.

use entbounds::bounds::{chain_check, proof_chain_check};
use entbounds::io::{load_state, save_state};
use entbounds::linalg::{max_abs_diff, CMatrix};
use entbounds::random::random_isometry;
use entbounds::*;
use proptest::prelude::*;

fn split_strategy() -> impl Strategy<Value = BipartiteSplit> {
    (1usize..=3, 1usize..=3).prop_map(|(a, b)| BipartiteSplit::new(a, b).unwrap())
}

fn state_strategy(max_dim: usize) -> impl Strategy<Value = QuantumState> {
    (1..=max_dim, any::<u64>()).prop_flat_map(|(d, seed)| {
        (1..=d).prop_map(move |rank| {
            random_density(d, rank, SeedSpec::new(seed, rank as u64)).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn purity_lies_between_inverse_dimension_and_one(rho in state_strategy(8)) {
        let p = purity(&rho);
        prop_assert!(p >= 1.0 / rho.dim() as f64 - 1e-12);
        prop_assert!(p <= 1.0 + 1e-12);
    }

    #[test]
    fn pure_density_has_unit_purity(d in 1usize..=16, seed in any::<u64>()) {
        let psi = haar_pure(d, SeedSpec::new(seed, 0));
        prop_assert!((purity(&density_from_pure(&psi)) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pure_marginals_have_equal_purity(split in split_strategy(), seed in any::<u64>()) {
        let psi = haar_pure(split.total(), SeedSpec::new(seed, 1));
        let pa = purity(&psi.reduced(split, Subsystem::A).unwrap());
        let pb = purity(&psi.reduced(split, Subsystem::B).unwrap());
        prop_assert!((pa - pb).abs() <= 1e-10);
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(split in split_strategy(), seed in any::<u64>(), rank_pick in 0usize..9) {
        let d = split.total();
        let rho = random_density(d, 1 + rank_pick % d, SeedSpec::new(seed, 2)).unwrap();
        for keep in [Subsystem::A, Subsystem::B] {
            let r = partial_trace(&rho, split, keep).unwrap();
            prop_assert!((r.matrix().trace().re - 1.0).abs() <= 1e-12);
            prop_assert!(*r.eigenvalues().unwrap().last().unwrap() >= -1e-12);
        }
    }

    #[test]
    fn partial_trace_is_linear(seed in any::<u64>(), w in 0.0f64..1.0) {
        let split = BipartiteSplit::new(2, 3).unwrap();
        let a = random_density(6, 6, SeedSpec::new(seed, 3)).unwrap();
        let b = random_density(6, 2, SeedSpec::new(seed, 4)).unwrap();
        let mix = QuantumState::new(a.matrix().scale(w) + b.matrix().scale(1.0 - w)).unwrap();
        let lhs = partial_trace(&mix, split, Subsystem::A).unwrap();
        let rhs = partial_trace(&a, split, Subsystem::A).unwrap().matrix().scale(w)
            + partial_trace(&b, split, Subsystem::A).unwrap().matrix().scale(1.0 - w);
        prop_assert!(max_abs_diff(lhs.matrix(), &rhs) <= 1e-14);
    }

    #[test]
    fn purification_round_trip(rho in state_strategy(8)) {
        let (psi, split) = purify(&rho).unwrap();
        prop_assert_eq!(split.dim_a(), rho.dim());
        let back = psi.reduced(split, Subsystem::A).unwrap();
        prop_assert!(max_abs_diff(back.matrix(), rho.matrix()) <= 1e-10);
    }

    #[test]
    fn overlap_is_symmetric_and_reflexive(d in 1usize..=8, seed in any::<u64>()) {
        let a = haar_pure(d, SeedSpec::new(seed, 5));
        let b = haar_pure(d, SeedSpec::new(seed, 6));
        prop_assert!((overlap(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!((overlap(&a, &b).unwrap() - overlap(&b, &a).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn tensor_purity_is_multiplicative(seed in any::<u64>(), da in 1usize..=4, db in 1usize..=4) {
        let a = random_density(da, da, SeedSpec::new(seed, 7)).unwrap();
        let b = random_density(db, 1 + db / 2, SeedSpec::new(seed, 8)).unwrap();
        let ab = tensor(&a, &b);
        // direct multiplication oracle: Tr((A⊗B)²) = Σ_ij |(A⊗B)_ij|² built entry by entry
        let mut direct = 0.0;
        for i in 0..da * db {
            for j in 0..da * db {
                let z = a.matrix()[(i / db, j / db)] * b.matrix()[(i % db, j % db)];
                direct += z.norm_sqr();
            }
        }
        prop_assert!((purity(&ab) - direct).abs() <= 1e-13);
        prop_assert!((purity(&ab) - purity(&a) * purity(&b)).abs() <= 1e-12);
        prop_assert!((ab.matrix().trace().re - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn fidelity_ordering(rho1 in state_strategy(4), seed in any::<u64>()) {
        let d = rho1.dim();
        let rho2 = random_density(d, d, SeedSpec::new(seed, 9)).unwrap();
        let f = fidelity(&rho1, &rho2).unwrap();
        let g = super_fidelity(&rho1, &rho2).unwrap();
        prop_assert!(f >= 0.0 && g <= 1.0);
        prop_assert!(g - f >= -1e-8);
    }

    #[test]
    fn fidelity_chain_on_pure_pairs(split in split_strategy(), seed in any::<u64>()) {
        let a = haar_pure(split.total(), SeedSpec::new(seed, 10));
        let b = haar_pure(split.total(), SeedSpec::new(seed, 11));
        let r = chain_check(&a, &b, split).unwrap();
        prop_assert!(r.holds(1e-8), "{:?}", r);
    }

    #[test]
    fn proof_identities_hold_for_isometry_ensembles(split in split_strategy(), seed in any::<u64>(), pick in 0usize..9) {
        let d = split.total();
        let rank = 1 + pick % d;
        let rho = random_density(d, rank, SeedSpec::new(seed, 12)).unwrap();
        let v = random_isometry(rank * rank, rank, SeedSpec::new(seed, 13)).unwrap();
        let dec = from_isometry(&rho, &v).unwrap();
        prop_assert!(max_abs_diff(&dec.reconstruct_matrix(), rho.matrix()) <= 1e-9);
        let report = proof_chain_check(&dec, split).unwrap();
        prop_assert!(report.passed(), "{:?}", report.checks);
    }

    #[test]
    fn bounds_are_ordered(split in split_strategy(), seed in any::<u64>(), pick in 0usize..9) {
        let d = split.total();
        let rho = random_density(d, 1 + pick % d, SeedSpec::new(seed, 14)).unwrap();
        let lo = lower_bound(&rho, split).unwrap();
        let hi = upper_bound(&rho, split).unwrap();
        prop_assert!(lo - hi <= 1e-12);
        prop_assert!((-1e-12..=2.0).contains(&hi));
    }

    #[test]
    fn two_qubit_concurrence_in_unit_interval(seed in any::<u64>(), pick in 0usize..4) {
        let rho = random_density(4, 1 + pick, SeedSpec::new(seed, 15)).unwrap();
        let c = concurrence_two_qubit(&rho).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
    }
}

#[test]
fn random_density_has_requested_rank() {
    for s in 0..1000u64 {
        let d = 2 + (s as usize % 5);
        let rank = 1 + (s as usize / 5) % d;
        let rho = random_density(d, rank, SeedSpec::new(77, s)).unwrap();
        let eig = rho.eigenvalues().unwrap();
        assert_eq!(eig.iter().filter(|&&v| v > 1e-12).count(), rank, "seed {s}");
    }
}

#[test]
fn isometry_columns_are_unit_vectors() {
    for s in 0..1000u64 {
        let m = 1 + (s as usize % 6);
        let r = 1 + (s as usize / 6) % m;
        let v = random_isometry(m, r, SeedSpec::new(78, s)).unwrap();
        for j in 0..r {
            assert!((v.entries().column(j).norm() - 1.0).abs() <= 1e-12);
        }
        let gram = v.entries().adjoint() * v.entries();
        assert!(max_abs_diff(&gram, &CMatrix::identity(r, r)) <= 1e-12);
    }
}

#[test]
fn from_isometry_reconstructs_over_many_draws() {
    for s in 0..1000u64 {
        let r = 1 + (s as usize % 4);
        let rho = random_density(4, r, SeedSpec::new(79, s)).unwrap();
        let v = random_isometry(r * r, r, SeedSpec::new(80, s)).unwrap();
        let dec = from_isometry(&rho, &v).unwrap();
        assert!(
            max_abs_diff(&dec.reconstruct_matrix(), rho.matrix()) <= 1e-9,
            "seed {s}"
        );
    }
}

#[test]
fn distinct_streams_are_uncorrelated() {
    let n = 10_000u64;
    let functional = |stream: u64| {
        let psi = haar_pure(4, SeedSpec::new(2024, stream));
        psi.amplitudes()[0].norm_sqr()
    };
    let xs: Vec<f64> = (0..n).map(|i| functional(2 * i)).collect();
    let ys: Vec<f64> = (0..n).map(|i| functional(2 * i + 1)).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r = cov / (vx * vy).sqrt();
    assert!(r.abs() < 0.05, "correlation {r}");
}

#[test]
fn equal_seeds_give_identical_bytes() {
    let a = random_density(5, 3, SeedSpec::new(5, 9)).unwrap();
    let b = random_density(5, 3, SeedSpec::new(5, 9)).unwrap();
    let bits = |m: &CMatrix| {
        m.iter()
            .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(a.matrix()), bits(b.matrix()));
}

#[test]
fn werner_purity_matches_analytic_spectrum() {
    let p = 0.8;
    let s = 0.5f64.sqrt();
    let singlet = PureState::from_slice(&[
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(0.0, 0.0),
    ])
    .unwrap();
    let m = density_from_pure(&singlet).matrix().scale(p)
        + CMatrix::identity(4, 4).scale((1.0 - p) / 4.0);
    let rho = QuantumState::new(m).unwrap();
    // eigenvalues (1+3p)/4 once and (1-p)/4 three times
    let analytic = ((1.0 + 3.0 * p) / 4.0).powi(2) + 3.0 * ((1.0 - p) / 4.0).powi(2);
    assert!((analytic - 0.73).abs() < 1e-15);
    let eig = rho.eigenvalues().unwrap();
    assert!((eig[0] - (1.0 + 3.0 * p) / 4.0).abs() < 1e-14);
    assert!((purity(&rho) - analytic).abs() < 1e-14);
}

#[test]
fn state_file_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for s in 0..100u64 {
        let d = 2 + (s as usize % 5);
        let rho = random_density(d, 1 + (s as usize / 5) % d, SeedSpec::new(81, s)).unwrap();
        let path = dir.path().join(format!("s{s}.json"));
        save_state(&rho, &path).unwrap();
        let back = load_state(&path).unwrap();
        assert_eq!(back.matrix(), rho.matrix(), "seed {s}");
    }
}
