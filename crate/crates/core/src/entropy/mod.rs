//! Discrete beliefs and maximum-likelihood (plug-in) entropy estimation.
//!
//! The plug-in estimator `Ĥ = -Σ b̂ ln b̂` over `M` samples is negatively
//! biased. Two bounds make it usable inside confidence intervals:
//!
//! * concentration: `P(|Ĥ - E[Ĥ]| >= η) <= δ_η = 2 exp(-(M/2) η² (ln M)⁻²)`
//! * bias: `μ_M(b) <= E[Ĥ] - H(b) <= 0` with `μ_M(b) = -ln(1 + (ψ - 1)/M)`,
//!   where `ψ` is the support size of `b`.
//!
//! All logarithms are natural.

mod hoeffding;

pub use hoeffding::{hoeffding_radius, HoeffdingBounds, DEFAULT_HOEFFDING_BATCH};

use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::rng::Rng;

const SUM_TOLERANCE: f64 = 1e-9;

/// A normalized probability vector over states `0..num_states`.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidBelief("no states".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidBelief(format!("entry {p} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidBelief(format!("entries sum to {sum}")));
        }
        Ok(Belief { probs })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidBelief(format!("weights sum to {sum}")));
        }
        Belief::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn uniform(num_states: usize) -> Self {
        assert!(num_states > 0, "uniform belief needs at least one state");
        Belief {
            probs: vec![1.0 / num_states as f64; num_states],
        }
    }

    pub fn point(num_states: usize, state: usize) -> Self {
        assert!(state < num_states);
        let mut probs = vec![0.0; num_states];
        probs[state] = 1.0;
        Belief { probs }
    }

    pub(crate) fn from_counts(counts: &[usize], total: usize) -> Self {
        let m = total as f64;
        Belief {
            probs: counts.iter().map(|&c| c as f64 / m).collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    /// Number of strictly positive entries.
    pub fn support(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn entropy(&self) -> f64 {
        exact_entropy(self)
    }

    /// The most probable state, lowest id on ties.
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (s, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = s;
            }
        }
        best
    }

    pub fn sampler(&self) -> BeliefSampler {
        BeliefSampler {
            alias: WeightedAliasIndex::new(self.probs.clone()).expect("valid belief has positive mass"),
        }
    }
}

/// Constant-time sampling from a fixed belief (alias method). States with
/// zero mass are never drawn.
#[derive(Debug, Clone)]
pub struct BeliefSampler {
    alias: WeightedAliasIndex<f64>,
}

impl BeliefSampler {
    pub fn sample(&self, rng: &mut Rng) -> usize {
        self.alias.sample(rng)
    }
}

/// `M >= 1` state ids drawn from some belief.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    states: Vec<usize>,
}

impl SampleSet {
    pub fn new(states: Vec<usize>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::param("M", "sample set must be non-empty"));
        }
        Ok(SampleSet { states })
    }

    pub fn draw(belief: &Belief, m: usize, rng: &mut Rng) -> Result<Self> {
        let sampler = belief.sampler();
        SampleSet::new((0..m).map(|_| sampler.sample(rng)).collect())
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn counts(&self, num_states: usize) -> Result<Vec<usize>> {
        let mut counts = vec![0usize; num_states];
        for &s in &self.states {
            *counts
                .get_mut(s)
                .ok_or(Error::StateOutOfRange { state: s, num_states })? += 1;
        }
        Ok(counts)
    }
}

/// `b̂(s) = count(s) / M`.
pub fn mle_belief(samples: &SampleSet, num_states: usize) -> Result<Belief> {
    let counts = samples.counts(num_states)?;
    Ok(Belief::from_counts(&counts, samples.len()))
}

/// `-Σ b ln b` in nats, with `0 ln 0 = 0`.
pub fn exact_entropy(belief: &Belief) -> f64 {
    -belief
        .probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Plug-in entropy of a histogram with `total = Σ counts`.
pub fn entropy_from_counts(counts: impl IntoIterator<Item = usize>, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let m = total as f64;
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / m;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of the empirical distribution of `samples`.
pub fn plugin_entropy(samples: &SampleSet, num_states: usize) -> Result<f64> {
    let counts = samples.counts(num_states)?;
    Ok(entropy_from_counts(counts, samples.len()))
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::param("M", format!("need M >= 2, got {m}")));
    }
    Ok(())
}

/// Tail probability `δ_η` of the plug-in estimate deviating from its mean
/// by at least `eta`, clipped to 1.
pub fn paninski_delta(m: usize, eta: f64) -> Result<f64> {
    check_m(m)?;
    if !(eta > 0.0) {
        return Err(Error::param("eta", "must be > 0"));
    }
    let mf = m as f64;
    let ln_m = mf.ln();
    Ok((2.0 * (-(mf / 2.0) * eta * eta / (ln_m * ln_m)).exp()).min(1.0))
}

/// Deviation radius `η` at which the tail probability equals `delta`.
pub fn paninski_eta(m: usize, delta: f64) -> Result<f64> {
    check_m(m)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must be in (0, 1)"));
    }
    let mf = m as f64;
    Ok(mf.ln() * ((2.0 / mf) * (2.0 / delta).ln()).sqrt())
}

/// Lower bound `μ_M = -ln(1 + (support - 1)/M)` on the plug-in bias.
pub fn bias_floor(m: usize, support: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::param("M", "must be >= 1"));
    }
    if support < 1 {
        return Err(Error::param("support", "must be >= 1"));
    }
    Ok(-((support - 1) as f64 / m as f64).ln_1p())
}

/// Concentration radius, its confidence, and the bias floor for one
/// `(M, support)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBound {
    pub eta: f64,
    pub delta_eta: f64,
    pub mu_floor: f64,
}

impl EntropyBound {
    pub fn from_eta(m: usize, support: usize, eta: f64) -> Result<Self> {
        Ok(EntropyBound {
            eta,
            delta_eta: paninski_delta(m, eta)?,
            mu_floor: bias_floor(m, support)?,
        })
    }

    pub fn from_delta(m: usize, support: usize, delta: f64) -> Result<Self> {
        Ok(EntropyBound {
            eta: paninski_eta(m, delta)?,
            delta_eta: delta,
            mu_floor: bias_floor(m, support)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ss(v: &[usize]) -> SampleSet {
        SampleSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn belief_validation() {
        assert!(Belief::new(vec![]).is_err());
        assert!(Belief::new(vec![0.5, 0.6]).is_err());
        assert!(Belief::new(vec![-0.1, 1.1]).is_err());
        assert!(Belief::new(vec![0.3, 0.7 + 5e-10]).is_ok());
        assert_eq!(Belief::new(vec![0.0, 1.0, 0.0]).unwrap().support(), 1);
    }

    #[test]
    fn mle_examples() {
        assert_eq!(mle_belief(&ss(&[0, 0, 1, 1]), 2).unwrap().probs(), &[0.5, 0.5]);
        assert_eq!(mle_belief(&ss(&[2, 2, 2]), 3).unwrap().probs(), &[0.0, 0.0, 1.0]);
        assert_eq!(
            mle_belief(&ss(&[0, 3]), 3),
            Err(Error::StateOutOfRange { state: 3, num_states: 3 })
        );
        assert!(SampleSet::new(vec![]).is_err());
    }

    #[test]
    fn mle_converges() {
        let b = Belief::new(vec![0.3, 0.7]).unwrap();
        let mut r = rng::from_seed(11);
        let s = SampleSet::draw(&b, 100_000, &mut r).unwrap();
        let est = mle_belief(&s, 2).unwrap();
        assert_abs_diff_eq!(est.probs()[0], 0.3, epsilon = 0.01);
        assert_abs_diff_eq!(est.probs()[1], 0.7, epsilon = 0.01);
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(exact_entropy(&Belief::uniform(4)), 4f64.ln(), epsilon = 1e-12);
        assert_eq!(exact_entropy(&Belief::point(5, 2)), 0.0);
        let h = exact_entropy(&Belief::new(vec![0.9, 0.1]).unwrap());
        // -(0.9 ln 0.9 + 0.1 ln 0.1)
        assert_abs_diff_eq!(h, 0.325_082_973_391_448_2, epsilon = 1e-12);
    }

    #[test]
    fn plugin_examples() {
        assert_eq!(plugin_entropy(&ss(&[4, 4, 4]), 5).unwrap(), 0.0);
        assert_abs_diff_eq!(plugin_entropy(&ss(&[0, 1]), 2).unwrap(), 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn plugin_bias_on_uniform_ten() {
        let b = Belief::uniform(10);
        let mut r = rng::from_seed(5);
        let reps = 10_000;
        let mean = (0..reps)
            .map(|_| plugin_entropy(&SampleSet::draw(&b, 50, &mut r).unwrap(), 10).unwrap())
            .sum::<f64>()
            / reps as f64;
        let h = 10f64.ln();
        assert!(mean < h);
        assert!(mean > h + bias_floor(50, 10).unwrap());
    }

    #[test]
    fn paninski_values() {
        // 2 exp(-(1e6/2)(0.01)/ln(1e6)^2)
        let d = paninski_delta(1_000_000, 0.1).unwrap();
        let ln_m = 1e6f64.ln();
        let oracle = 2.0 * (-5000.0 / (ln_m * ln_m)).exp();
        assert_abs_diff_eq!(d, oracle, epsilon = 1e-20);
        assert!((d - 8.5e-12).abs() < 5e-12);
        assert_eq!(paninski_delta(100, 0.3).unwrap(), 1.0);
        assert!(paninski_delta(100, 1e6).unwrap() < 1e-300);
        assert!(paninski_delta(1, 0.1).is_err());
    }

    #[test]
    fn paninski_eta_values() {
        for (m, d) in [(100, 0.1), (10_000, 0.05)] {
            let eta = paninski_eta(m, d).unwrap();
            assert_abs_diff_eq!(paninski_delta(m, eta).unwrap(), d, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(paninski_eta(1_000_000, 1e-11).unwrap(), 0.0997, epsilon = 5e-4);
        let m = 500usize;
        let near_one = paninski_eta(m, 1.0 - 1e-12).unwrap();
        let limit = (m as f64).ln() * ((2.0 / m as f64) * 2f64.ln()).sqrt();
        assert_abs_diff_eq!(near_one, limit, epsilon = 1e-9);
        assert!(paninski_eta(100, 1.0).is_err());
        assert!(paninski_eta(1, 0.5).is_err());
    }

    #[test]
    fn bias_floor_values() {
        assert_eq!(bias_floor(50, 1).unwrap(), 0.0);
        assert_abs_diff_eq!(bias_floor(50, 10).unwrap(), -(1.18f64).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(bias_floor(50, 10).unwrap(), -0.1655, epsilon = 1e-4);
        assert!(bias_floor(1 << 40, 10).unwrap() > -1e-10);
        assert!(bias_floor(10, 0).is_err());
    }

    #[test]
    fn entropy_bound_consistency() {
        let b = EntropyBound::from_delta(200, 7, 0.05).unwrap();
        assert_abs_diff_eq!(b.mu_floor, -(1.0 + 6.0 / 200.0f64).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(paninski_delta(200, b.eta).unwrap(), 0.05, epsilon = 1e-12);
        let b2 = EntropyBound::from_eta(200, 7, b.eta).unwrap();
        assert_abs_diff_eq!(b2.delta_eta, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn sampler_skips_zero_mass() {
        let b = Belief::new(vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let s = b.sampler();
        let mut r = rng::from_seed(1);
        for _ in 0..10_000 {
            let x = s.sample(&mut r);
            assert!(x == 1 || x == 3);
        }
    }

    proptest! {
        #[test]
        fn plugin_bounded_by_log_states(states in prop::collection::vec(0usize..6, 1..40)) {
            let h = plugin_entropy(&SampleSet::new(states.clone()).unwrap(), 6).unwrap();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= 6f64.ln() + 1e-12);
            let all_same = states.iter().all(|&s| s == states[0]);
            prop_assert_eq!(h == 0.0, all_same);
        }

        #[test]
        fn bias_floor_monotone(m in 1usize..10_000, support in 1usize..500) {
            let f = bias_floor(m, support).unwrap();
            prop_assert!(f <= 0.0);
            prop_assert!(bias_floor(m + 1, support).unwrap() >= f);
            prop_assert!(bias_floor(m, support + 1).unwrap() <= f);
        }
    }
}
