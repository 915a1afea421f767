//! Random qubit states and simulated Pauli measurements.

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::likelihood::{pool_measurements, MeasurementRecord};
use crate::linalg::{CMatrix, C64};
use crate::state::{from_bloch, to_bloch, BlochVector, DensityMatrix, Povm};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one (state, dataset) cell, independent of execution order:
/// `mix(mix(mix(master) ^ state_id) ^ dataset_id)`.
pub fn trial_seed(master_seed: u64, state_id: u64, dataset_id: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ state_id) ^ dataset_id)
}

/// Seed used to draw the true state itself.
pub fn state_seed(master_seed: u64, state_id: u64) -> u64 {
    trial_seed(master_seed, state_id, u64::MAX)
}

fn unit_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

/// Qubit drawn from the Hilbert-Schmidt measure: Bloch vector uniform in
/// the unit ball (uniform direction, radius `u^{1/3}`).
pub fn sample_hs_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let [x, y, z] = unit_direction(rng);
    let u: f64 = rng.random();
    let r = u.cbrt();
    from_bloch(BlochVector::new(r * x, r * y, r * z)).expect("radius at most one")
}

/// Pure qubit state, uniform on the Bloch sphere.
pub fn sample_pure_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let [x, y, z] = unit_direction(rng);
    let b = BlochVector::new(x, y, z);
    let n = b.norm();
    from_bloch(BlochVector::new(x / n, y / n, z / n)).expect("unit vector")
}

/// Haar-random `d × d` unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn sample_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for x in q.column_mut(k).iter_mut() {
            *x *= phase;
        }
    }
    q
}

/// `shots` measurements of each of σ_x, σ_y, σ_z, pooled with weight 1/3 each.
/// The +1 count on axis `a` is Binomial(shots, (1 + b_a)/2).
pub fn simulate_pauli_data<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    shots: u64,
    rng: &mut R,
) -> crate::Result<MeasurementRecord> {
    if shots == 0 {
        return Err(crate::Error::NoData);
    }
    let b = to_bloch(rho)?;
    let runs: Vec<(Povm, Vec<u64>)> = b
        .components()
        .iter()
        .enumerate()
        .map(|(axis, &c)| {
            let p = (0.5 * (1.0 + c)).clamp(0.0, 1.0);
            let plus = Binomial::new(shots, p).expect("valid binomial").sample(rng);
            (Povm::pauli_axis(axis), vec![plus, shots - plus])
        })
        .collect();
    pool_measurements(&runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_entry};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampled_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 1..5 {
            let u = sample_unitary(d, &mut rng);
            assert!(max_abs_entry(&(u.adjoint() * &u - identity(d))) < 1e-12);
        }
    }

    #[test]
    fn hs_samples_fill_the_ball_uniformly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mut mean = [0.0; 3];
        let mut cube = 0.0;
        for _ in 0..n {
            let b = to_bloch(&sample_hs_state(&mut rng)).unwrap();
            let r = b.norm();
            assert!(r <= 1.0 + 1e-12);
            for (m, c) in mean.iter_mut().zip(b.components()) {
                *m += c / n as f64;
            }
            cube += r.powi(3) / n as f64;
        }
        for m in mean {
            assert!(m.abs() < 0.02, "{mean:?}");
        }
        // E|b|³ = ∫ r³ · 3r² dr = 1/2
        assert!((cube - 0.5).abs() < 0.01, "{cube}");
    }

    #[test]
    fn pure_samples_are_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let b = to_bloch(&sample_pure_state(&mut rng)).unwrap();
            assert!((b.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenstate_gives_deterministic_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let up = from_bloch(BlochVector::new(0.0, 0.0, 1.0)).unwrap();
        for _ in 0..50 {
            let rec = simulate_pauli_data(&up, 25, &mut rng).unwrap();
            assert_eq!(rec.items()[4].count, 25);
            assert_eq!(rec.items()[5].count, 0);
            assert!(rec
                .items()
                .iter()
                .all(|i| (i.weight - 1.0 / 3.0).abs() < 1e-15));
        }
    }

    fn plus_frequency(rho: &DensityMatrix, axis: usize, shots: u64, reps: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut total = 0u64;
        for _ in 0..reps {
            total += simulate_pauli_data(rho, shots, &mut rng).unwrap().items()[2 * axis].count;
        }
        total as f64 / (shots as f64 * reps as f64)
    }

    #[test]
    fn binomial_means() {
        let shots = 10;
        let reps = 10_000;
        let trials = (shots * reps as u64) as f64;
        let mixed = DensityMatrix::maximally_mixed(2);
        let sigma = (0.25 / trials).sqrt();
        for axis in 0..3 {
            let f = plus_frequency(&mixed, axis, shots, reps, 4 + axis as u64);
            assert!((f - 0.5).abs() < 3.0 * sigma, "axis {axis}: {f}");
        }
        let rho = from_bloch(BlochVector::new(0.0, 0.0, 0.6)).unwrap();
        let f = plus_frequency(&rho, 2, shots, reps, 9);
        let sigma = (0.8 * 0.2 / trials).sqrt();
        assert!((f - 0.8).abs() < 3.0 * sigma, "{f}");
    }

    #[test]
    fn seeds_depend_on_every_key() {
        let base = trial_seed(42, 1, 2);
        assert_eq!(base, trial_seed(42, 1, 2));
        assert_ne!(base, trial_seed(43, 1, 2));
        assert_ne!(base, trial_seed(42, 2, 1));
        assert_ne!(base, trial_seed(42, 1, 3));
    }
}
