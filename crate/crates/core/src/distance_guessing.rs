//! Variational distance and guessing probability over classical ensembles.
//!
//! An adversary's side information is modelled by a [`CondEnsemble`]: a
//! distribution over her observations `y` together with the conditional key
//! distribution `p(k|y)` for each one. The average distance to uniform of that
//! ensemble is the classical value of the trace-distance criterion, and it
//! bounds her average guessing probability from above by `1/N + d`.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Finite probability vector over outcome indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidConfig("distribution needs at least one outcome".into()));
        }
        if let Some(&bad) = probs.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(Error::OutOfRange { name: "probability", value: bad, range: "[0, 1]" });
        }
        let total: f64 = probs.iter().sum();
        check_range("probability sum", total, "1 +/- 1e-12", (total - 1.0).abs() <= SUM_TOL)?;
        Ok(Self { probs })
    }

    pub fn uniform(n_outcomes: usize) -> Result<Self> {
        if n_outcomes == 0 {
            return Err(Error::InvalidConfig("distribution needs at least one outcome".into()));
        }
        Ok(Self { probs: vec![1.0 / n_outcomes as f64; n_outcomes] })
    }

    pub fn point_mass(n_outcomes: usize, at: usize) -> Result<Self> {
        if at >= n_outcomes {
            return Err(Error::LengthMismatch { what: "point mass index", expected: n_outcomes, actual: at });
        }
        let mut probs = vec![0.0; n_outcomes];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// Normalises non-negative weights; at least one must be positive.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 || weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::InvalidConfig("weights must be non-negative with positive sum".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// Flat Dirichlet draw: independent unit exponentials, normalised.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_outcomes: usize) -> Self {
        let weights: Vec<f64> = (0..n_outcomes).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        Self::from_weights(&weights).expect("exponential variates are positive")
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Push-forward through a map on outcomes (`map[i]` is the image of `i`).
    pub fn image(&self, map: &[usize], n_image: usize) -> Result<Self> {
        if map.len() != self.len() {
            return Err(Error::LengthMismatch { what: "outcome map", expected: self.len(), actual: map.len() });
        }
        let mut probs = vec![0.0; n_image];
        for (&p, &target) in self.probs.iter().zip(map) {
            if target >= n_image {
                return Err(Error::LengthMismatch { what: "map target", expected: n_image, actual: target });
            }
            probs[target] += p;
        }
        Ok(Self { probs })
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            probs: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        Distribution::new(raw.probs).map_err(serde::de::Error::custom)
    }
}

/// Observation marginal plus one conditional key distribution per observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondEnsemble {
    y_marginal: Distribution,
    conditionals: Vec<Distribution>,
}

impl CondEnsemble {
    pub fn new(y_marginal: Distribution, conditionals: Vec<Distribution>) -> Result<Self> {
        if conditionals.len() != y_marginal.len() {
            return Err(Error::LengthMismatch {
                what: "conditionals per observation",
                expected: y_marginal.len(),
                actual: conditionals.len(),
            });
        }
        let n_keys = conditionals[0].len();
        if let Some(c) = conditionals.iter().find(|c| c.len() != n_keys) {
            return Err(Error::LengthMismatch { what: "key alphabet", expected: n_keys, actual: c.len() });
        }
        Ok(Self { y_marginal, conditionals })
    }

    /// Ensemble with a single (certain) observation.
    pub fn single(conditional: Distribution) -> Self {
        Self { y_marginal: Distribution { probs: vec![1.0] }, conditionals: vec![conditional] }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_keys: usize, n_obs: usize) -> Self {
        let y_marginal = Distribution::random(rng, n_obs);
        let conditionals = (0..n_obs).map(|_| Distribution::random(rng, n_keys)).collect();
        Self { y_marginal, conditionals }
    }

    pub fn n_keys(&self) -> usize {
        self.conditionals[0].len()
    }

    pub fn y_marginal(&self) -> &Distribution {
        &self.y_marginal
    }

    pub fn conditionals(&self) -> &[Distribution] {
        &self.conditionals
    }

    fn weighted<F: Fn(&Distribution) -> f64>(&self, f: F) -> f64 {
        self.y_marginal.probs.iter().zip(&self.conditionals).map(|(py, c)| py * f(c)).sum()
    }
}

/// `½ Σ |p_i − q_i|`.
pub fn variational_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { what: "distribution support", expected: p.len(), actual: q.len() });
    }
    Ok(0.5 * p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

fn distance_to_uniform(p: &Distribution) -> f64 {
    let u = 1.0 / p.len() as f64;
    0.5 * p.probs.iter().map(|a| (a - u).abs()).sum::<f64>()
}

/// First half of the outcomes at `(1+2ε)/N`, second half at `(1−2ε)/N`.
pub fn skewed_pair(n_outcomes: usize, eps: f64) -> Result<Distribution> {
    if n_outcomes == 0 || !n_outcomes.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("skewed pair needs an even outcome count, got {n_outcomes}")));
    }
    check_range("eps", eps, "[0, 0.5]", (0.0..=0.5).contains(&eps))?;
    let n = n_outcomes as f64;
    let hi = (1.0 + 2.0 * eps) / n;
    let lo = (1.0 - 2.0 * eps) / n;
    let half = n_outcomes / 2;
    Ok(Distribution { probs: (0..n_outcomes).map(|i| if i < half { hi } else { lo }).collect() })
}

/// Distribution with one outcome raised to `1/N + d` and the rest level.
/// Attains the guessing bound with equality.
pub fn equality_case(n_outcomes: usize, d: f64) -> Result<Distribution> {
    if n_outcomes < 2 {
        return Err(Error::InvalidConfig("equality case needs at least two outcomes".into()));
    }
    let n = n_outcomes as f64;
    check_range("d", d, "[0, 1 - 1/N]", d >= 0.0 && d <= 1.0 - 1.0 / n)?;
    let top = 1.0 / n + d;
    let rest = (1.0 - top) / (n - 1.0);
    let mut probs = vec![rest; n_outcomes];
    probs[0] = top;
    Ok(Distribution { probs })
}

/// `max_i p_i`.
pub fn guessing_prob(p: &Distribution) -> f64 {
    p.probs.iter().copied().fold(0.0, f64::max)
}

/// `Σ_y p(y) max_k p(k|y)`.
pub fn ensemble_guessing_prob(e: &CondEnsemble) -> f64 {
    e.weighted(guessing_prob)
}

/// `Σ_y p(y) v(p(·|y), U)`.
pub fn ensemble_distance_to_uniform(e: &CondEnsemble) -> f64 {
    e.weighted(distance_to_uniform)
}

/// `(1/N + d) − p̄₁`; never below zero up to rounding.
pub fn theorem1_gap(e: &CondEnsemble) -> f64 {
    1.0 / e.n_keys() as f64 + ensemble_distance_to_uniform(e) - ensemble_guessing_prob(e)
}

/// Smallest distance compatible with guessing probability `p1_bar`.
pub fn d_lower_bound(p1_bar: f64, n_keys: usize) -> Result<f64> {
    if n_keys == 0 {
        return Err(Error::InvalidConfig("key alphabet must be nonempty".into()));
    }
    let floor = 1.0 / n_keys as f64;
    check_range("p1_bar", p1_bar, "[1/N, 1]", p1_bar >= floor && p1_bar <= 1.0)?;
    Ok(p1_bar - floor)
}

/// Individual guarantee `d^(1/3) + 1/N` from an averaged distance, capped at 1.
pub fn operational_guarantee(d_avg: f64, n_keys: usize) -> Result<f64> {
    check_range("d_avg", d_avg, "[0, 1]", (0.0..=1.0).contains(&d_avg))?;
    if n_keys == 0 {
        return Err(Error::InvalidConfig("key alphabet must be nonempty".into()));
    }
    Ok((d_avg.cbrt() + 1.0 / n_keys as f64).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dist(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let p = dist(&[0.1, 0.2, 0.7]);
        assert_eq!(variational_distance(&p, &p).unwrap(), 0.0);
        let pm = Distribution::point_mass(4, 2).unwrap();
        let u4 = Distribution::uniform(4).unwrap();
        assert!((variational_distance(&pm, &u4).unwrap() - 0.75).abs() < 1e-15);
        let s = skewed_pair(4, 0.1).unwrap();
        assert!((variational_distance(&s, &u4).unwrap() - 0.1).abs() < 1e-15);
        assert!(variational_distance(&p, &u4).is_err());
    }

    #[test]
    fn skewed_pair_examples() {
        let s = skewed_pair(4, 0.1).unwrap();
        for (a, b) in s.probs().iter().zip([0.3, 0.3, 0.2, 0.2]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(skewed_pair(2, 0.0).unwrap().probs(), &[0.5, 0.5]);
        let edge = skewed_pair(6, 0.5).unwrap();
        assert_eq!(&edge.probs()[3..], &[0.0, 0.0, 0.0]);
        assert!(edge.probs()[..3].iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
        assert!(skewed_pair(4, 0.51).is_err());
        assert!(skewed_pair(5, 0.1).is_err());
    }

    #[test]
    fn guessing_examples() {
        assert_eq!(guessing_prob(&Distribution::uniform(8).unwrap()), 0.125);
        assert_eq!(guessing_prob(&dist(&[0.3, 0.3, 0.2, 0.2])), 0.3);
        assert_eq!(guessing_prob(&Distribution::point_mass(5, 1).unwrap()), 1.0);
    }

    #[test]
    fn ensemble_examples() {
        let uni = CondEnsemble::single(Distribution::uniform(4).unwrap());
        assert_eq!(ensemble_guessing_prob(&uni), 0.25);
        assert_eq!(ensemble_distance_to_uniform(&uni), 0.0);
        assert_eq!(theorem1_gap(&uni), 0.0);

        let skew = CondEnsemble::single(skewed_pair(4, 0.1).unwrap());
        assert!((ensemble_guessing_prob(&skew) - 0.3).abs() < 1e-15);
        assert!((ensemble_distance_to_uniform(&skew) - 0.1).abs() < 1e-15);
        assert!((theorem1_gap(&skew) - 0.05).abs() < 1e-15);

        let revealed = CondEnsemble::new(
            Distribution::uniform(2).unwrap(),
            vec![Distribution::point_mass(2, 0).unwrap(), Distribution::point_mass(2, 1).unwrap()],
        )
        .unwrap();
        assert_eq!(ensemble_guessing_prob(&revealed), 1.0);

        let pm = CondEnsemble::single(Distribution::point_mass(4, 0).unwrap());
        assert_eq!(ensemble_distance_to_uniform(&pm), 0.75);
    }

    #[test]
    fn equality_case_closes_the_gap() {
        let p = equality_case(4, 0.1).unwrap();
        let expected = [0.35, 0.65 / 3.0, 0.65 / 3.0, 0.65 / 3.0];
        for (a, b) in p.probs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let e = CondEnsemble::single(p);
        assert!((ensemble_distance_to_uniform(&e) - 0.1).abs() < 1e-15);
        assert!(theorem1_gap(&e).abs() < 1e-15);
    }

    #[test]
    fn uniform_ensembles_sit_on_the_bound() {
        let e = CondEnsemble::new(dist(&[0.2, 0.5, 0.3]), vec![Distribution::uniform(8).unwrap(); 3]).unwrap();
        assert_eq!(theorem1_gap(&e), 0.0);
    }

    #[test]
    fn lower_bound_and_guarantee_examples() {
        assert_eq!(d_lower_bound(1.0, 2).unwrap(), 0.5);
        assert_eq!(d_lower_bound(0.25, 4).unwrap(), 0.0);
        assert!((d_lower_bound(0.3, 4).unwrap() - 0.05).abs() < 1e-15);
        assert!(d_lower_bound(0.2, 4).is_err());

        assert_eq!(operational_guarantee(0.0, 4).unwrap(), 0.25);
        assert!((operational_guarantee(1e-6, 1024).unwrap() - 0.010_976_562_5).abs() < 1e-12);
        assert_eq!(operational_guarantee(1.0, 2).unwrap(), 1.0);
    }

    #[test]
    fn validation() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![1.5, -0.5]).is_err());
        assert!(Distribution::new(vec![]).is_err());
        assert!(CondEnsemble::new(Distribution::uniform(2).unwrap(), vec![Distribution::uniform(2).unwrap()]).is_err());
        assert!(CondEnsemble::new(
            Distribution::uniform(2).unwrap(),
            vec![Distribution::uniform(2).unwrap(), Distribution::uniform(3).unwrap()],
        )
        .is_err());
        let json = r#"{"probs":[0.5,0.4]}"#;
        assert!(serde_json::from_str::<Distribution>(json).is_err());
    }

    #[test]
    fn gap_nonnegative_on_seeded_random_ensembles() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.random_range(1..=16);
            let ny = rng.random_range(1..=16);
            let e = CondEnsemble::random(&mut rng, n, ny);
            assert!(theorem1_gap(&e) >= -1e-12);
        }
    }

    fn random_dist(n: usize, seed: u64) -> Distribution {
        Distribution::random(&mut ChaCha8Rng::seed_from_u64(seed), n)
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(n in 1usize..=16, s1: u64, s2: u64, s3: u64) {
            let (a, b, c) = (random_dist(n, s1), random_dist(n, s2), random_dist(n, s3));
            let ab = variational_distance(&a, &b).unwrap();
            let ba = variational_distance(&b, &a).unwrap();
            let bc = variational_distance(&b, &c).unwrap();
            let ac = variational_distance(&a, &c).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12);
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert_eq!(variational_distance(&a, &a).unwrap(), 0.0);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        }

        #[test]
        fn skewed_pair_distance_is_eps(half in 1usize..=32, eps in 0.0f64..=0.5) {
            let n = 2 * half;
            let s = skewed_pair(n, eps).unwrap();
            let d = variational_distance(&s, &Distribution::uniform(n).unwrap()).unwrap();
            prop_assert!((d - eps).abs() <= 1e-12);
        }

        #[test]
        fn compression_never_lowers_guessing(n in 1usize..=16, seed: u64, map_seed: u64) {
            let p = random_dist(n, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(map_seed);
            let n_image = rng.random_range(1..=n);
            let map: Vec<usize> = (0..n).map(|_| rng.random_range(0..n_image)).collect();
            let img = p.image(&map, n_image).unwrap();
            prop_assert!(guessing_prob(&img) >= guessing_prob(&p) - 1e-15);
        }
    }
}
