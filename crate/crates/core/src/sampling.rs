//! Subsample selection.
//!
//! The sample is redrawn every `m` iterations. Two samplers are provided:
//! uniform subsets drawn without replacement, and adaptive importance
//! sampling (AIS), which draws i.i.d. indices from probabilities that blend
//! stored gradient-norm scores with the uniform distribution,
//!
//! ```text
//! p_j = k^{-ε} π_j / Σ π_i + (1 − k^{-ε}) / N,
//! ```
//!
//! so the bias toward high-score components fades as `k` grows.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

/// Floor applied to stored scores so their sum never vanishes.
pub const SCORE_FLOOR: f64 = 1e-12;

/// True iff a new sample is drawn at iteration `k`.
pub fn should_resample(k: usize, m: usize) -> bool {
    assert!(m >= 1, "inner iteration count must be positive");
    k.is_multiple_of(m)
}

/// Index multiset used at one iteration. Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleBatch {
    pub indices: Vec<usize>,
    pub drawn_at: usize,
    pub resampled: bool,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The full index set `0..n`.
    pub fn full(n: usize, drawn_at: usize) -> Self {
        SampleBatch {
            indices: (0..n).collect(),
            drawn_at,
            resampled: true,
        }
    }

    /// Same indices reused at a later iteration.
    pub fn carried(&self) -> Self {
        SampleBatch {
            indices: self.indices.clone(),
            drawn_at: self.drawn_at,
            resampled: false,
        }
    }
}

/// `S` distinct indices, uniform over all size-`S` subsets, sorted.
pub fn uniform_draw<R: Rng + ?Sized>(n: usize, size: usize, k: usize, rng: &mut R) -> Result<SampleBatch> {
    if size == 0 || size > n {
        return Err(Error::config(format!("sample size {size} must lie in 1..={n}")));
    }
    let mut indices = if size == n {
        (0..n).collect()
    } else {
        rand::seq::index::sample(rng, n, size).into_vec()
    };
    indices.sort_unstable();
    Ok(SampleBatch {
        indices,
        drawn_at: k,
        resampled: true,
    })
}

/// Score vector and decay exponent for adaptive importance sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct AisState {
    scores: Vec<f64>,
    eps: f64,
}

impl AisState {
    /// All scores start at `initial`.
    pub fn new(n: usize, initial: f64, eps: f64) -> Result<Self> {
        Self::from_scores(vec![initial; n], eps)
    }

    pub fn from_scores(scores: Vec<f64>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::config(format!("AIS exponent must be > 0, got {eps}")));
        }
        if scores.is_empty() || scores.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::config("AIS scores must be finite and nonnegative"));
        }
        if scores.iter().sum::<f64>() <= 0.0 {
            return Err(Error::config("AIS scores must not all be zero"));
        }
        Ok(AisState { scores, eps })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Sampling probabilities at iteration `k` (clamped to `k ≥ 1`).
    pub fn probabilities(&self, k: usize) -> Vec<f64> {
        let n = self.scores.len() as f64;
        let w = (k.max(1) as f64).powf(-self.eps);
        let total: f64 = self.scores.iter().sum();
        self.scores
            .iter()
            .map(|&s| w * (s / total) + (1.0 - w) / n)
            .collect()
    }

    /// `S` i.i.d. indices from [`AisState::probabilities`].
    pub fn draw<R: Rng + ?Sized>(&self, k: usize, size: usize, rng: &mut R) -> Result<SampleBatch> {
        if size == 0 {
            return Err(Error::config("sample size must be positive"));
        }
        let probs = self.probabilities(k);
        let dist = WeightedIndex::new(&probs)
            .map_err(|e| Error::Numerical(format!("AIS probabilities unusable: {e}")))?;
        Ok(SampleBatch {
            indices: (0..size).map(|_| dist.sample(rng)).collect(),
            drawn_at: k,
            resampled: true,
        })
    }

    /// Overwrites the scores of the previous sample's indices with their
    /// component gradient norms. Other scores are left alone.
    pub fn update_scores(&mut self, previous: &[usize], grad_norms: &[f64]) {
        assert_eq!(previous.len(), grad_norms.len(), "one norm per sampled index");
        // keeps Σπ finite when a run diverges
        let ceiling = f64::MAX / (4.0 * self.scores.len() as f64);
        for (&i, &g) in previous.iter().zip(grad_norms) {
            self.scores[i] = if g.is_nan() { ceiling } else { g.clamp(SCORE_FLOOR, ceiling) };
        }
    }
}

/// Sampler choice for a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Sampler {
    Uniform,
    Ais(AisState),
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, size: usize, k: usize, rng: &mut R) -> Result<SampleBatch> {
        match self {
            Sampler::Uniform => uniform_draw(n, size, k, rng),
            Sampler::Ais(state) => state.draw(k, size, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn resample_schedule() {
        assert!(should_resample(0, 3));
        assert!(!should_resample(4, 3));
        assert!(should_resample(6, 3));
        assert!((0..20).all(|k| should_resample(k, 1)));
    }

    #[test]
    fn full_size_uniform_is_whole_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for seed in 0..5 {
            rng = ChaCha8Rng::seed_from_u64(seed);
            let b = uniform_draw(5, 5, 0, &mut rng).unwrap();
            assert_eq!(b.indices, vec![0, 1, 2, 3, 4]);
        }
        assert!(uniform_draw(3, 4, 0, &mut rng).is_err());
        assert!(uniform_draw(3, 0, 0, &mut rng).is_err());
    }

    #[test]
    fn uniform_subsets_are_equally_likely() {
        // exhaustive list of the 6 subsets of size 2 from 4 items
        let subsets = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
        let mut counts = [0usize; 6];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 40_000;
        for _ in 0..draws {
            let b = uniform_draw(4, 2, 0, &mut rng).unwrap();
            let pos = subsets.iter().position(|s| s[..] == b.indices[..]).unwrap();
            counts[pos] += 1;
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 6.0).abs() <= 0.01, "frequency {freq}");
        }
    }

    #[test]
    fn ais_probability_values() {
        let s = AisState::from_scores(vec![1.0, 1.0], 1.0).unwrap();
        assert_eq!(s.probabilities(7), vec![0.5, 0.5]);
        let s = AisState::from_scores(vec![3.0, 1.0], 1.0).unwrap();
        let p = s.probabilities(2);
        assert!((p[0] - 5.0 / 8.0).abs() < 1e-15 && (p[1] - 3.0 / 8.0).abs() < 1e-15);
        let p = s.probabilities(1000);
        assert!((p[0] - 0.50025).abs() < 1e-15 && (p[1] - 0.49975).abs() < 1e-15);
    }

    #[test]
    fn huge_exponent_is_uniform() {
        let s = AisState::from_scores(vec![5.0, 0.1, 2.0, 9.0], 1e6).unwrap();
        for k in 2..10 {
            for p in s.probabilities(k) {
                assert!((p - 0.25).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn ais_first_iteration_follows_scores() {
        let s = AisState::from_scores(vec![2.0, 1.0, 1.0], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut counts = [0usize; 3];
        let draws = 60_000;
        for _ in 0..draws {
            counts[s.draw(1, 1, &mut rng).unwrap().indices[0]] += 1;
        }
        let expect = [0.5, 0.25, 0.25];
        for (c, e) in counts.iter().zip(expect) {
            assert!((*c as f64 / draws as f64 - e).abs() <= 0.01);
        }
    }

    #[test]
    fn ais_default_configuration() {
        let s = AisState::new(10, 1.0, 1.0).unwrap();
        assert_eq!(s.eps(), 1.0);
        assert!(s.scores().iter().all(|&p| p == 1.0));
    }

    #[test]
    fn score_updates() {
        let mut s = AisState::new(3, 1.0, 1.0).unwrap();
        s.update_scores(&[1], &[4.0]);
        assert_eq!(s.scores(), &[1.0, 4.0, 1.0]);
        s.update_scores(&[0], &[0.0]);
        assert_eq!(s.scores(), &[SCORE_FLOOR, 4.0, 1.0]);
        s.update_scores(&[2, 2], &[7.0, 3.0]);
        assert_eq!(s.scores()[2], 3.0);
        s.update_scores(&[2], &[5.0]);
        assert_eq!(s.scores()[2], 5.0);
    }

    #[test]
    fn invalid_ais_states() {
        assert!(AisState::from_scores(vec![0.0, 0.0], 1.0).is_err());
        assert!(AisState::from_scores(vec![1.0, -1.0], 1.0).is_err());
        assert!(AisState::from_scores(vec![1.0], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn probabilities_are_a_distribution_close_to_uniform(
            scores in prop::collection::vec(0.0f64..100.0, 1..40),
            k in 1usize..=10_000,
            eps in 0.1f64..3.0,
        ) {
            prop_assume!(scores.iter().sum::<f64>() > 0.0);
            let n = scores.len() as f64;
            let s = AisState::from_scores(scores, eps).unwrap();
            let p = s.probabilities(k);
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            let decay = (k as f64).powf(-eps);
            for &pj in &p {
                prop_assert!(pj >= 0.0);
                prop_assert!((pj - 1.0 / n).abs() <= decay + 1e-15);
                if k >= 2 {
                    prop_assert!(pj >= (1.0 - decay) / n - 1e-15);
                }
            }
        }

        #[test]
        fn draws_are_deterministic(seed in any::<u64>(), k in 1usize..50, size in 1usize..6) {
            let s = AisState::from_scores(vec![1.0, 3.0, 0.5, 2.0, 2.0, 9.0], 1.0).unwrap();
            let a = s.draw(k, size, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = s.draw(k, size, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.len(), size);
            let u1 = uniform_draw(6, size, k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let u2 = uniform_draw(6, size, k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(&u1, &u2);
            let mut sorted = u1.indices.clone();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), size);
        }
    }
}
