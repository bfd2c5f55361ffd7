use ising_lab::circuit_sim::{amplitude, enlarged_model, layered_program, simulate_protocol, Boundary, Protocol};
use ising_lab::error_stats::hoeffding_m;
use ising_lab::fpras::sample_count;
use ising_lab::ising_core::{partition_function, xi_coefficients, IsingModel, Lattice, Method};
use ising_lab::knots::{catalog_names, knot_invariant};
use num_complex::Complex64;
use proptest::prelude::*;

/// A 2×w grid model with couplings and fields drawn from `vals`.
fn grid_model(w: usize, vals: &[f64]) -> IsingModel {
    let lattice = Lattice::grid(&[2, w], &[false, false]).unwrap();
    let e = lattice.edge_count();
    let n = lattice.vertex_count();
    let j = (0..e).map(|i| vals[i % vals.len()]).collect();
    let h = (0..n).map(|i| vals[(e + i) % vals.len()]).collect();
    IsingModel::new(lattice, j, h).unwrap()
}

fn integer_model(w: usize, vals: &[i8]) -> IsingModel {
    grid_model(w, &vals.iter().map(|&v| v as f64).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zero_beta_counts_configurations(w in 1usize..6, vals in prop::collection::vec(-2.0f64..2.0, 1..12)) {
        let m = grid_model(w, &vals);
        let z = partition_function(&m, Complex64::new(0.0, 0.0), Method::Enumerate).unwrap();
        prop_assert!((z - Complex64::new((2 * w) as f64, 0.0).exp2()).norm() < 1e-9 * z.norm());
    }

    #[test]
    fn transfer_matches_enumeration(
        w in 1usize..6,
        vals in prop::collection::vec(-1.5f64..1.5, 1..12),
        re in 0.0f64..1.5,
        im in -1.5f64..1.5,
    ) {
        let m = grid_model(w, &vals);
        let beta = Complex64::new(re, im);
        let a = partition_function(&m, beta, Method::Enumerate).unwrap();
        let b = partition_function(&m, beta, Method::Transfer).unwrap();
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn field_reversal_leaves_z_unchanged(w in 1usize..5, vals in prop::collection::vec(-1.5f64..1.5, 1..10), beta in 0.0f64..2.0) {
        let m = grid_model(w, &vals);
        let flipped = IsingModel::new(m.lattice().clone(), m.couplings().to_vec(), m.fields().iter().map(|h| -h).collect()).unwrap();
        let b = Complex64::new(beta, 0.0);
        let (a, c) = (partition_function(&m, b, Method::Enumerate).unwrap(), partition_function(&flipped, b, Method::Enumerate).unwrap());
        prop_assert!((a - c).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn degeneracies_resum_to_z(w in 1usize..5, vals in prop::collection::vec(-2i8..=2, 1..10), beta in 0.0f64..1.5) {
        let m = integer_model(w, &vals);
        let xi = xi_coefficients(&m).unwrap();
        prop_assert_eq!(xi.values().sum::<u64>(), 1u64 << m.site_count());
        let resummed: f64 = xi.iter().map(|(&k, &g)| g as f64 * (-(k as f64) * beta).exp()).sum();
        let z = partition_function(&m, Complex64::new(beta, 0.0), Method::Enumerate).unwrap();
        prop_assert!((resummed - z.re).abs() <= 1e-10 * z.re);
    }

    #[test]
    fn layered_programs_match_their_ising_dual(
        n in 1usize..4,
        slices in 1usize..4,
        alpha in 0.1f64..1.2,
        vals in prop::collection::vec(-1.0f64..1.0, 24),
        thetas in prop::collection::vec(0.15f64..1.4, 12),
    ) {
        let lattice = Lattice::chain(n, false).unwrap();
        let e = lattice.edge_count();
        let mut it = vals.iter().cycle().copied();
        let layers: Vec<(Vec<f64>, Vec<f64>)> =
            (0..slices).map(|_| ((&mut it).take(e).collect(), (&mut it).take(n).collect())).collect();
        let th: Vec<Vec<f64>> = thetas.chunks(n).take(slices - 1).map(|c| c.to_vec()).collect();
        let p = layered_program(&lattice, alpha, &layers, &th).unwrap();
        let a = amplitude(&p).unwrap();
        let dual = enlarged_model(&p, Boundary::Open).unwrap().amplitude(Method::Enumerate).unwrap();
        prop_assert!((a - dual).norm() <= 1e-10 * a.norm(), "{a} vs {dual}");
    }

    #[test]
    fn protocol_runs_are_seed_deterministic(seed in any::<u64>(), proto in 1u8..=2) {
        let lattice = Lattice::chain(2, false).unwrap();
        let p = layered_program(&lattice, 0.4, &[(vec![0.3], vec![0.1, -0.2]), (vec![-0.5], vec![0.2, 0.0])], &[vec![0.7, 0.9]]).unwrap();
        let protocol = Protocol::try_from(proto).unwrap();
        let a = simulate_protocol(&p, protocol, 50, seed).unwrap();
        let b = simulate_protocol(&p, protocol, 50, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sample_count_shrinks_with_looser_delta(steps in 1usize..200, eta in 0.05f64..3.0, d in 0.01f64..0.5) {
        let tight = sample_count(steps, eta, d).unwrap();
        let loose = sample_count(steps, eta, (2.0 * d).min(0.99)).unwrap();
        prop_assert!(loose <= tight);
        prop_assert!(sample_count(steps + 1, eta, d).unwrap() >= tight);
    }

    #[test]
    fn hoeffding_count_meets_confidence(eps in 0.005f64..0.5, conf in 0.01f64..0.999) {
        let m = hoeffding_m(eps, conf).unwrap();
        prop_assert!(1.0 - 2.0 * (-2.0 * eps * eps * m as f64).exp() >= conf - 1e-12);
        if m > 1 {
            prop_assert!(1.0 - 2.0 * (-2.0 * eps * eps * (m - 1) as f64).exp() < conf);
        }
    }
}

#[test]
fn trivial_potts_invariants_have_unit_modulus() {
    for name in catalog_names() {
        let v = knot_invariant(name, 1).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-9, "{name}: {v}");
    }
}
