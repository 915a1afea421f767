//! Classical probability estimation: maximum likelihood, Lidstone's
//! add-β rule, and the predictive (coding / gambling) cost of an estimate.
//!
//! The hedged likelihood is `Π p_k^(n_k+β)`, i.e. the likelihood of the data
//! with β dummy observations of every letter added. Its log is
//! `Σ (n_k+β) ln p_k` and the add-β rule is its maximizer.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

/// Observed letter counts over an alphabet of size `K ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    counts: Vec<u64>,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::LengthMismatch {
                expected: 2,
                found: counts.len(),
            });
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidProbabilities(format!("negative entry {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilities(format!("sum is {sum}")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    Ok(())
}

/// `p̂_k = n_k / N`.
pub fn classical_mle(c: &CountVector) -> Result<ProbabilityVector> {
    let n = c.total();
    if n == 0 {
        return Err(Error::NoData);
    }
    let n = n as f64;
    Ok(ProbabilityVector {
        probs: c.counts.iter().map(|&k| k as f64 / n).collect(),
    })
}

/// Lidstone's law: `p̂_k = (n_k + β)/(N + Kβ)`. With no data this is uniform.
pub fn lidstone_estimate(c: &CountVector, beta: f64) -> Result<ProbabilityVector> {
    check_beta(beta)?;
    let denom = c.total() as f64 + c.len() as f64 * beta;
    Ok(ProbabilityVector {
        probs: c
            .counts
            .iter()
            .map(|&k| (k as f64 + beta) / denom)
            .collect(),
    })
}

/// `Σ n_k ln p_k`, with `0 · ln 0 = 0`.
pub fn classical_log_likelihood(p: &ProbabilityVector, c: &CountVector) -> Result<f64> {
    check_len(c.len(), p.len())?;
    Ok(weighted_log_sum(p, c.counts.iter().map(|&k| k as f64)))
}

/// `Σ (n_k + β) ln p_k`; `-∞` on the boundary of the simplex.
pub fn classical_hedged_log_likelihood(
    p: &ProbabilityVector,
    c: &CountVector,
    beta: f64,
) -> Result<f64> {
    check_beta(beta)?;
    check_len(c.len(), p.len())?;
    Ok(weighted_log_sum(
        p,
        c.counts.iter().map(|&k| k as f64 + beta),
    ))
}

fn weighted_log_sum(p: &ProbabilityVector, weights: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0;
    for (&pk, w) in p.probs.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        if pk == 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += w * pk.ln();
    }
    acc
}

/// `D(p‖q) = Σ p_k (ln p_k − ln q_k)` in nats.
pub fn kl_divergence(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    check_len(p.len(), q.len())?;
    let mut acc = 0.0;
    for (&pk, &qk) in p.probs.iter().zip(&q.probs) {
        if pk == 0.0 {
            continue;
        }
        if qk == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += pk * (pk.ln() - qk.ln());
    }
    Ok(acc.max(0.0))
}

/// `H(p) = −Σ p_k ln p_k` in nats.
pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    -p.probs
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// Extra nats per symbol paid by a coder (or lost by a gambler) who uses
/// `p_hat` when symbols are really drawn from `p_true`.
pub fn excess_predictive_cost(
    p_true: &ProbabilityVector,
    p_hat: &ProbabilityVector,
) -> Result<f64> {
    kl_divergence(p_true, p_hat)
}

/// Draws `n` symbols from `p_true` and returns the realized mean excess code
/// length `(1/n) Σ_t ln(p_true(x_t) / p_hat(x_t))`. Ideal code lengths are
/// accounted in the log domain; no codewords are built.
pub fn simulate_excess_code_length<R: Rng + ?Sized>(
    p_true: &ProbabilityVector,
    p_hat: &ProbabilityVector,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    check_len(p_true.len(), p_hat.len())?;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let dist = WeightedIndex::new(&p_true.probs)
        .map_err(|e| Error::InvalidProbabilities(e.to_string()))?;
    let mut total = 0.0;
    for _ in 0..n {
        let k = dist.sample(rng);
        let q = p_hat.probs[k];
        if q == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += p_true.probs[k].ln() - q.ln();
    }
    Ok(total / n as f64)
}

/// Likelihood ratio `L(p')/L(p_MLE)` for the hedged assignment that gives
/// every unseen letter `β/N` and scales the others by `(1 − M β/N)`, where `M`
/// is the number of unseen letters. For one unseen letter this is
/// `(1 − β/N)^N ≈ e^{−β}`.
pub fn unseen_letter_likelihood_ratio(c: &CountVector, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let mle = classical_mle(c)?;
    let n = c.total() as f64;
    let unseen = c.counts.iter().filter(|&&k| k == 0).count() as f64;
    let keep = 1.0 - unseen * beta / n;
    if keep <= 0.0 {
        return Err(Error::InvalidBeta(beta));
    }
    let hedged = ProbabilityVector {
        probs: c
            .counts
            .iter()
            .map(|&k| {
                if k == 0 {
                    beta / n
                } else {
                    keep * k as f64 / n
                }
            })
            .collect(),
    };
    let diff = classical_log_likelihood(&hedged, c)? - classical_log_likelihood(&mle, c)?;
    Ok(diff.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cv(c: &[u64]) -> CountVector {
        CountVector::new(c.to_vec()).unwrap()
    }

    fn pv(p: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(p.to_vec()).unwrap()
    }

    #[test]
    fn mle_examples() {
        assert_eq!(classical_mle(&cv(&[3, 7])).unwrap().probs(), &[0.3, 0.7]);
        assert_eq!(classical_mle(&cv(&[0, 10])).unwrap().probs(), &[0.0, 1.0]);
        assert_eq!(
            classical_mle(&cv(&[5, 5, 0])).unwrap().probs(),
            &[0.5, 0.5, 0.0]
        );
        assert!(matches!(classical_mle(&cv(&[0, 0])), Err(Error::NoData)));
    }

    #[test]
    fn lidstone_examples() {
        let p = lidstone_estimate(&cv(&[0, 10]), 1.0).unwrap();
        assert!((p.probs()[0] - 1.0 / 12.0).abs() < 1e-15);
        assert!((p.probs()[1] - 11.0 / 12.0).abs() < 1e-15);
        let p = lidstone_estimate(&cv(&[3, 7]), 0.5).unwrap();
        assert!((p.probs()[0] - 3.5 / 11.0).abs() < 1e-15);
        assert!((p.probs()[1] - 7.5 / 11.0).abs() < 1e-15);
        let p = lidstone_estimate(&cv(&[0, 0, 0]), 0.5).unwrap();
        for &x in p.probs() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(matches!(
            lidstone_estimate(&cv(&[1, 1]), 0.0),
            Err(Error::InvalidBeta(_))
        ));
        assert!(matches!(
            lidstone_estimate(&cv(&[1, 1]), -1.0),
            Err(Error::InvalidBeta(_))
        ));
    }

    #[test]
    fn likelihood_examples() {
        let ll = classical_log_likelihood(&pv(&[0.5, 0.5]), &cv(&[1, 1])).unwrap();
        assert!((ll - 0.25f64.ln()).abs() < 1e-15);
        let boundary = pv(&[0.0, 1.0]);
        assert_eq!(
            classical_hedged_log_likelihood(&boundary, &cv(&[0, 10]), 0.5).unwrap(),
            f64::NEG_INFINITY
        );
        // Unhedged: unseen letter with zero probability is fine.
        assert_eq!(
            classical_log_likelihood(&boundary, &cv(&[0, 10])).unwrap(),
            0.0
        );
        assert_eq!(
            classical_log_likelihood(&boundary, &cv(&[1, 9])).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(classical_log_likelihood(&pv(&[0.5, 0.5]), &cv(&[1, 1, 1])).is_err());
    }

    #[test]
    fn hedged_argmax_on_a_line() {
        // For K = 2 the simplex is one-dimensional; scan it finely.
        let c = cv(&[0, 10]);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 1..100_000 {
            let p0 = i as f64 / 100_000.0;
            let v = classical_hedged_log_likelihood(&pv(&[p0, 1.0 - p0]), &c, 1.0).unwrap();
            if v > best.0 {
                best = (v, p0);
            }
        }
        assert!((best.1 - 1.0 / 12.0).abs() <= 1e-5);
    }

    #[test]
    fn kl_and_entropy() {
        let p = pv(&[0.8, 0.2]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert_eq!(
            kl_divergence(&pv(&[1.0, 0.0]), &pv(&[0.0, 1.0])).unwrap(),
            f64::INFINITY
        );
        let d = kl_divergence(&p, &pv(&[0.5, 0.5])).unwrap();
        assert!((d - (0.8 * 1.6f64.ln() + 0.2 * 0.4f64.ln())).abs() < 1e-15);
        assert!((d - 0.19274).abs() < 1e-5);
        assert!((shannon_entropy(&pv(&[0.5, 0.5])) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(shannon_entropy(&pv(&[1.0, 0.0])), 0.0);
    }

    #[test]
    fn excess_cost_examples() {
        let p = pv(&[0.9, 0.1]);
        assert_eq!(excess_predictive_cost(&p, &p).unwrap(), 0.0);
        assert_eq!(
            excess_predictive_cost(&pv(&[0.5, 0.5]), &pv(&[1.0, 0.0])).unwrap(),
            f64::INFINITY
        );
        let hat = lidstone_estimate(&cv(&[9, 1]), 0.5).unwrap();
        let d = excess_predictive_cost(&p, &hat).unwrap();
        let want = 0.9 * (0.9f64 / (9.5 / 11.0)).ln() + 0.1 * (0.1f64 / (1.5 / 11.0)).ln();
        assert!((d - want).abs() < 1e-15);
        // Independent scalar evaluation gives 0.0061032 nats.
        assert!((d - 0.006_103_17).abs() < 1e-8);
    }

    #[test]
    fn sequential_cost_converges() {
        let p = pv(&[0.7, 0.2, 0.1]);
        let hat = pv(&[0.5, 0.3, 0.2]);
        let exact = excess_predictive_cost(&p, &hat).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let realized = simulate_excess_code_length(&p, &hat, 400_000, &mut rng).unwrap();
        // Per-symbol std dev is below 1 nat, so 400k draws give ~2e-3.
        assert!((realized - exact).abs() < 5e-3, "{realized} vs {exact}");
    }

    #[test]
    fn unseen_letter_ratio_matches_power() {
        for &(n, beta) in &[(100u64, 0.5), (100, 1.0), (37, 0.3)] {
            let c = cv(&[0, n / 2, n - n / 2]);
            let r = unseen_letter_likelihood_ratio(&c, beta).unwrap();
            let want = (1.0 - beta / n as f64).powf(n as f64);
            assert!((r - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn rejects_bad_probability_vectors() {
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(CountVector::new(vec![3]).is_err());
    }
}
