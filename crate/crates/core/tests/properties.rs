use hmle::classical::{
    classical_hedged_log_likelihood, classical_log_likelihood, classical_mle, kl_divergence,
    lidstone_estimate, CountVector, ProbabilityVector,
};
use hmle::estimators::{hmle, mle, projective_hmle_closed_form, SolverConfig};
use hmle::likelihood::{hedged_log_likelihood, log_likelihood, pool_measurements};
use hmle::linalg::{frobenius_norm, hermitize, CMatrix, C64};
use hmle::metrics::{hs_distance, infidelity, quantum_relative_entropy, trace_distance};
use hmle::montecarlo::{sample_hs_state, sample_unitary, simulate_pauli_data};
use hmle::state::{from_bloch, probabilities, to_bloch};
use hmle::verification::{random_direction, random_interior_state, random_record};
use hmle::{BlochVector, DensityMatrix, HedgingParameter, MeasurementRecord, Povm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn beta(b: f64) -> HedgingParameter {
    HedgingParameter::new(b).unwrap()
}

fn mix(a: &DensityMatrix, b: &DensityMatrix, t: f64) -> DensityMatrix {
    DensityMatrix::new(a.matrix().scale(1.0 - t) + b.matrix().scale(t)).unwrap()
}

fn pauli_record(seed: u64, shots: u64) -> (DensityMatrix, MeasurementRecord) {
    let mut r = rng(seed);
    let truth = sample_hs_state(&mut r);
    let rec = simulate_pauli_data(&truth, shots, &mut r).unwrap();
    (truth, rec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bloch_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let n = (x * x + y * y + z * z).sqrt();
        let s = if n > 1.0 { 1.0 / n } else { 1.0 };
        let b = BlochVector::new(x * s, y * s, z * s);
        let rho = from_bloch(b).unwrap();
        prop_assert!(rho.min_eigenvalue() >= -1e-12);
        let back = to_bloch(&rho).unwrap();
        for (u, v) in back.components().iter().zip(b.components()) {
            prop_assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn sampled_states_are_states(seed in any::<u64>(), d in 2usize..5) {
        let mut r = rng(seed);
        let rho = random_interior_state(d, 0.0, &mut r);
        let tr: C64 = rho.matrix().trace();
        prop_assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
        prop_assert!(rho.min_eigenvalue() >= -1e-12);
        prop_assert!(rho.purity() <= 1.0 + 1e-12 && rho.purity() >= 1.0 / d as f64 - 1e-12);
        let p = probabilities(&rho, &Povm::computational(d)).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distances_are_metrics(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = sample_hs_state(&mut r);
        let b = sample_hs_state(&mut r);
        let c = sample_hs_state(&mut r);
        let t = |x: &DensityMatrix, y: &DensityMatrix| trace_distance(x, y).unwrap();
        prop_assert!(t(&a, &a) < 1e-12);
        prop_assert!((t(&a, &b) - t(&b, &a)).abs() < 1e-12);
        prop_assert!(t(&a, &c) <= t(&a, &b) + t(&b, &c) + 1e-12);
        prop_assert!(t(&a, &b) <= 2.0 + 1e-12);
        let h = hs_distance(&a, &b).unwrap();
        prop_assert!((h - frobenius_norm(&(a.matrix() - b.matrix()))).abs() < 1e-14);
        let f = infidelity(&a, &b).unwrap();
        prop_assert!((-1e-12..=1.0).contains(&f));
        prop_assert!(quantum_relative_entropy(&a, &b).unwrap() >= -1e-12);
    }

    #[test]
    fn log_likelihood_is_concave_along_segments(seed in any::<u64>(), t in 0.05f64..0.95) {
        let mut r = rng(seed);
        let rec = random_record(2, &mut r).unwrap();
        let a = random_interior_state(2, 0.01, &mut r);
        let b = random_interior_state(2, 0.01, &mut r);
        let m = mix(&a, &b, t);
        let b5 = beta(0.5);
        let f = |x: &DensityMatrix| hedged_log_likelihood(x, &rec, b5).unwrap();
        prop_assert!(f(&m) >= (1.0 - t) * f(&a) + t * f(&b) - 1e-9);
        let g = |x: &DensityMatrix| log_likelihood(x, &rec).unwrap();
        prop_assert!(g(&m) >= (1.0 - t) * g(&a) + t * g(&b) - 1e-9);
    }

    #[test]
    fn estimates_maximize_their_objectives(seed in any::<u64>(), b in 0.05f64..1.5) {
        let (_, rec) = pauli_record(seed, 10);
        let cfg = SolverConfig::default();
        let (rho_h, dh) = hmle(&rec, beta(b), &cfg).unwrap();
        let (rho_m, dm) = mle(&rec, &cfg).unwrap();
        prop_assert!(dh.converged && dm.converged);
        let fh = hedged_log_likelihood(&rho_h, &rec, beta(b)).unwrap();
        let fm = log_likelihood(&rho_m, &rec).unwrap();
        let mut r = rng(seed ^ 0xabcdef);
        for _ in 0..10 {
            let other = sample_hs_state(&mut r);
            prop_assert!(fh >= hedged_log_likelihood(&other, &rec, beta(b)).unwrap() - 1e-9);
            prop_assert!(fm >= log_likelihood(&other, &rec).unwrap() - 1e-9);
            // Nearby points along the segment toward a random state.
            prop_assert!(fh >= hedged_log_likelihood(&mix(&rho_h, &other, 1e-3), &rec, beta(b)).unwrap() - 1e-9);
            prop_assert!(fm >= log_likelihood(&mix(&rho_m, &other, 1e-3), &rec).unwrap() - 1e-9);
        }
        prop_assert!(rho_h.min_eigenvalue() > 0.0);
    }

    #[test]
    fn hmle_is_unitarily_covariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rec = random_record(3, &mut r).unwrap();
        let u = sample_unitary(3, &mut r);
        let cfg = SolverConfig::default();
        let (rho, _) = hmle(&rec, beta(0.5), &cfg).unwrap();
        let (rho_u, _) = hmle(&rec.conjugate_by(&u), beta(0.5), &cfg).unwrap();
        let expected = rho.conjugate_by(&u);
        prop_assert!(hs_distance(&rho_u, &expected).unwrap() < 1e-7);
    }

    #[test]
    fn pooling_repeated_runs_is_invariant(a in 0u64..20, b in 0u64..20, c in 0u64..20, d in 0u64..20, x in 1u64..20) {
        prop_assume!(a + b + c + d > 0);
        let z = Povm::pauli_axis(2);
        let xb = Povm::pauli_axis(0);
        let split = pool_measurements(&[(z.clone(), vec![a, b]), (xb.clone(), vec![x, 3]), (z.clone(), vec![c, d])]).unwrap();
        let merged = pool_measurements(&[(z, vec![a + c, b + d]), (xb, vec![x, 3])]).unwrap();
        let cfg = SolverConfig::default();
        let (s, _) = hmle(&split, beta(0.3), &cfg).unwrap();
        let (m, _) = hmle(&merged, beta(0.3), &cfg).unwrap();
        prop_assert!(hs_distance(&s, &m).unwrap() < 1e-7);
    }

    #[test]
    fn single_basis_estimate_ignores_rotations_inside_tied_counts(seed in any::<u64>(), n in 0u64..15, m in 0u64..15) {
        let mut r = rng(seed);
        let w = sample_unitary(3, &mut r);
        let v = sample_unitary(2, &mut r);
        let mut block = CMatrix::identity(3, 3);
        block.view_mut((0, 0), (2, 2)).copy_from(&v);
        let rotated = &w * &block;
        let counts = vec![n, n, m];
        prop_assume!(2 * n + m > 0);
        let b = beta(0.5);
        let c = CountVector::new(counts.clone()).unwrap();
        let a = projective_hmle_closed_form(&c, &w, b).unwrap();
        let a2 = projective_hmle_closed_form(&c, &rotated, b).unwrap();
        prop_assert!(hs_distance(&a, &a2).unwrap() < 1e-12);
        let rec = MeasurementRecord::from_povm(&Povm::from_basis(&rotated).unwrap(), &counts).unwrap();
        let (h, _) = hmle(&rec, b, &SolverConfig::default()).unwrap();
        prop_assert!(hs_distance(&h, &a).unwrap() < 1e-8);
    }

    #[test]
    fn likelihood_gradient_matches_directional_derivative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_interior_state(2, 0.05, &mut r);
        let rec = random_record(2, &mut r).unwrap();
        let dir = random_direction(2, &mut r);
        let g = hmle::likelihood::likelihood_gradient(&rho, &rec).unwrap();
        let h = 1e-6;
        let plus = DensityMatrix::new(hermitize(&(rho.matrix() + dir.scale(h)))).unwrap();
        let minus = DensityMatrix::new(hermitize(&(rho.matrix() - dir.scale(h)))).unwrap();
        let fd = (log_likelihood(&plus, &rec).unwrap() - log_likelihood(&minus, &rec).unwrap()) / (2.0 * h);
        let an = hmle::linalg::trace_product_re(&g, &dir);
        prop_assert!((an - fd).abs() <= 1e-5 * an.abs().max(fd.abs()).max(1.0), "{an} vs {fd}");
    }

    #[test]
    fn lidstone_is_a_distribution_maximizing_the_hedged_likelihood(
        counts in prop::collection::vec(0u64..30, 2..6),
        b in 0.01f64..2.0,
        eps in 1e-4f64..1e-2,
    ) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let c = CountVector::new(counts.clone()).unwrap();
        let p = lidstone_estimate(&c, b).unwrap();
        prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.probs().iter().all(|&x| x > 0.0));
        let best = classical_hedged_log_likelihood(&p, &c, b).unwrap();
        // Move mass between two letters; the hedged likelihood must not rise.
        let k = p.probs().len();
        for i in 0..k {
            let j = (i + 1) % k;
            let mut q = p.probs().to_vec();
            let shift = eps * q[i];
            q[i] -= shift;
            q[j] += shift;
            let total: f64 = q.iter().sum();
            let q = ProbabilityVector::new(q.iter().map(|x| x / total).collect()).unwrap();
            prop_assert!(classical_hedged_log_likelihood(&q, &c, b).unwrap() <= best + 1e-12);
        }
        let m = classical_mle(&c).unwrap();
        prop_assert!(classical_log_likelihood(&m, &c).unwrap() >= classical_log_likelihood(&p, &c).unwrap());
        prop_assert!(kl_divergence(&m, &p).unwrap() >= 0.0);
        prop_assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-15);
    }
}
