use std::collections::HashMap;
use std::sync::Arc;

use super::{estimate_conditional_entropy, CoarseLadder, Weighting};
use crate::entropy::{bias_floor, paninski_eta, Belief};
use crate::error::{Error, Result};
use crate::rng;
use crate::submodular::{set_key, BoundProvider, ElementId};

/// Budgets and confidence targets for [`EntropyBoundProvider`].
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyBoundConfig {
    /// Prior samples behind the fine (upper) estimate.
    pub m_fine: usize,
    /// Prior samples behind the coarse (lower) estimate.
    pub m_coarse: usize,
    /// Initial draws for the fine estimate; doubled by each tighten.
    pub draws_fine: usize,
    /// Initial draws for the coarse estimate; doubled by each tighten.
    pub draws_coarse: usize,
    /// Initial cluster count; doubled by each tighten up to the alphabet.
    pub d0: usize,
    pub delta_upper: f64,
    pub delta_lower: f64,
    /// Ceiling for either draw budget.
    pub max_draws: usize,
    /// `ψ` in the bias term; defaults to the number of states.
    pub support: Option<usize>,
    pub weighting: Weighting,
    pub seed: u64,
}

impl Default for EntropyBoundConfig {
    fn default() -> Self {
        EntropyBoundConfig {
            m_fine: 256,
            m_coarse: 4096,
            draws_fine: 1024,
            draws_coarse: 1024,
            d0: 2,
            delta_upper: 0.05,
            delta_lower: 0.05,
            max_draws: 1 << 20,
            support: None,
            weighting: Weighting::Empirical,
            seed: 0,
        }
    }
}

impl EntropyBoundConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m_fine", self.m_fine),
            ("m_coarse", self.m_coarse),
            ("draws_fine", self.draws_fine),
            ("draws_coarse", self.draws_coarse),
            ("d0", self.d0),
        ] {
            if v == 0 {
                return Err(Error::param(name, "must be >= 1"));
            }
        }
        if self.max_draws < self.draws_fine.max(self.draws_coarse) {
            return Err(Error::param("max_draws", "below the initial draw budgets"));
        }
        Ok(())
    }
}

/// Cached bounds and budgets for one subset.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub upper: f64,
    pub lower: f64,
    pub draws_fine: usize,
    pub draws_coarse: usize,
    /// Current cluster count on the coarse side.
    pub d: usize,
    pub round: u64,
    level: usize,
}

/// Confidence bounds on `F(A) = -H_b^A(s|z)` from sampled entropies.
///
/// `U(A) = -(Ĥ(s|z) - η_u)` with `Ĥ` from the full model at `m_fine` prior
/// samples, and `L(A) = -(Ĥ(s|r) + η_l + ln(1 + (ψ-1)/m_coarse))` with `Ĥ`
/// from the coarsened model at `m_coarse` prior samples. The radii are held
/// fixed; tightening only spends more draws and finer clusters.
#[derive(Debug)]
pub struct EntropyBoundProvider {
    ladder: Arc<CoarseLadder>,
    belief: Belief,
    config: EntropyBoundConfig,
    eta_upper: f64,
    eta_lower: f64,
    bias_term: f64,
    states: HashMap<Vec<ElementId>, BoundState>,
    belief_updates: u64,
    prior_samples: u64,
}

const FINE: u64 = 0;
const COARSE: u64 = 1;

impl EntropyBoundProvider {
    pub fn new(ladder: Arc<CoarseLadder>, belief: Belief, config: EntropyBoundConfig) -> Result<Self> {
        config.validate()?;
        ladder.model().check_belief(&belief)?;
        let support = config.support.unwrap_or(belief.num_states());
        let eta_upper = paninski_eta(config.m_fine, config.delta_upper)?;
        let eta_lower = paninski_eta(config.m_coarse, config.delta_lower)?;
        let bias_term = -bias_floor(config.m_coarse, support)?;
        let first = ladder.level(0).0;
        if first != config.d0.min(ladder.model().max_alphabet()) {
            return Err(Error::param("d0", "ladder was built for a different d0"));
        }
        Ok(EntropyBoundProvider {
            ladder,
            belief,
            config,
            eta_upper,
            eta_lower,
            bias_term,
            states: HashMap::new(),
            belief_updates: 0,
            prior_samples: 0,
        })
    }

    pub fn eta_upper(&self) -> f64 {
        self.eta_upper
    }

    pub fn eta_lower(&self) -> f64 {
        self.eta_lower
    }

    /// `ln(1 + (ψ-1)/m_coarse)`.
    pub fn bias_term(&self) -> f64 {
        self.bias_term
    }

    /// Deterministic part of `U - L`: `η_u + η_l + ln(1 + (ψ-1)/m_coarse)`.
    pub fn fixed_width(&self) -> f64 {
        self.eta_upper + self.eta_lower + self.bias_term
    }

    pub fn state(&self, set: &[ElementId]) -> Option<&BoundState> {
        self.states.get(&set_key(set))
    }

    pub fn prior_samples(&self) -> u64 {
        self.prior_samples
    }

    #[allow(clippy::too_many_arguments)]
    fn estimate(
        &mut self,
        key: &[ElementId],
        side: u64,
        level: usize,
        m: usize,
        draws: usize,
        round: u64,
        attempt: u64,
    ) -> Result<f64> {
        let model = match side {
            FINE => self.ladder.model().as_ref(),
            _ => self.ladder.level(level).1,
        };
        let mut path: Vec<u64> = key.iter().map(|&i| i as u64).collect();
        path.extend([u64::MAX, round, side, attempt]);
        let mut r = rng::stream(self.config.seed, &path);
        let e = estimate_conditional_entropy(model, &self.belief, key, m, draws, self.config.weighting, &mut r)?;
        self.belief_updates += e.belief_updates;
        self.prior_samples += e.prior_samples;
        Ok(e.entropy)
    }

    fn compute(&mut self, key: &[ElementId], state: &mut BoundState) -> Result<()> {
        let cap = self.config.max_draws;
        for attempt in 0..2u64 {
            let scale = 1usize << attempt;
            let fine = self.estimate(
                key,
                FINE,
                state.level,
                self.config.m_fine,
                (state.draws_fine * scale).min(cap),
                state.round,
                attempt,
            )?;
            let coarse = self.estimate(
                key,
                COARSE,
                state.level,
                self.config.m_coarse,
                (state.draws_coarse * scale).min(cap),
                state.round,
                attempt,
            )?;
            state.upper = -(fine - self.eta_upper);
            state.lower = -(coarse + self.eta_lower + self.bias_term);
            if state.upper >= state.lower {
                return Ok(());
            }
        }
        Err(Error::BoundOrder {
            subset: key.to_vec(),
            upper: state.upper,
            lower: state.lower,
        })
    }

    fn entry(&mut self, set: &[ElementId]) -> Result<&BoundState> {
        let key = set_key(set);
        if !self.states.contains_key(&key) {
            self.ladder.model().check_selection(&key)?;
            let mut state = BoundState {
                upper: f64::NAN,
                lower: f64::NAN,
                draws_fine: self.config.draws_fine,
                draws_coarse: self.config.draws_coarse,
                d: self.ladder.level(0).0,
                round: 0,
                level: 0,
            };
            self.compute(&key, &mut state)?;
            self.states.insert(key.clone(), state);
        }
        Ok(&self.states[&key])
    }
}

impl BoundProvider for EntropyBoundProvider {
    fn ground_size(&self) -> usize {
        self.ladder.model().num_sensors()
    }

    fn upper(&mut self, set: &[ElementId]) -> Result<f64> {
        Ok(self.entry(set)?.upper)
    }

    fn lower(&mut self, set: &[ElementId]) -> Result<f64> {
        Ok(self.entry(set)?.lower)
    }

    fn tighten(&mut self, set: &[ElementId]) -> Result<()> {
        let mut state = self.entry(set)?.clone();
        let key = set_key(set);
        let cap = self.config.max_draws;
        state.draws_fine = (state.draws_fine * 2).min(cap);
        state.draws_coarse = (state.draws_coarse * 2).min(cap);
        state.level = (state.level + 1).min(self.ladder.levels() - 1);
        state.d = self.ladder.level(state.level).0;
        state.round += 1;
        self.compute(&key, &mut state)?;
        self.states.insert(key, state);
        Ok(())
    }

    fn work(&self) -> u64 {
        self.belief_updates
    }
}

#[cfg(test)]
mod tests {
    use super::super::{exact_conditional_entropy, worlds, SensorModel};
    use super::*;
    use crate::submodular::{pac_max, PacParams, Subset};

    fn provider(model: SensorModel, belief: Belief, config: EntropyBoundConfig) -> EntropyBoundProvider {
        let ladder = Arc::new(CoarseLadder::new(Arc::new(model), config.d0).unwrap());
        EntropyBoundProvider::new(ladder, belief, config).unwrap()
    }

    #[test]
    fn perfect_sensor_brackets_zero() {
        for seed in 0..20 {
            for draws in [1, 16, 1024] {
                let config = EntropyBoundConfig {
                    seed,
                    draws_fine: draws,
                    draws_coarse: draws,
                    m_fine: 16,
                    m_coarse: 64,
                    ..Default::default()
                };
                let mut p = provider(worlds::perfect_and_uninformative(), Belief::uniform(2), config);
                assert!(p.upper(&[0]).unwrap() >= 0.0);
                assert!(p.lower(&[0]).unwrap() <= 0.0);
                p.tighten(&[0]).unwrap();
                assert!(p.upper(&[0]).unwrap() >= 0.0 && p.lower(&[0]).unwrap() <= 0.0);
            }
        }
    }

    #[test]
    fn width_approaches_fixed_part_with_large_budgets() {
        let mut r = rng::from_seed(5);
        let model = worlds::random_world(4, 2, 4..=4, &mut r);
        let config = EntropyBoundConfig {
            d0: 4,
            draws_fine: 1 << 17,
            draws_coarse: 1 << 17,
            m_fine: 4096,
            m_coarse: 4096,
            ..Default::default()
        };
        let mut p = provider(model, worlds::random_belief(4, &mut r), config);
        let width = p.upper(&[0, 1]).unwrap() - p.lower(&[0, 1]).unwrap();
        assert!((width - p.fixed_width()).abs() < 0.02, "{width} vs {}", p.fixed_width());
    }

    #[test]
    fn tighten_doubles_budgets_and_clusters() {
        let model = SensorModel::new(2, vec![(8, vec![0.125; 16])]).unwrap();
        let mut p = provider(model, Belief::uniform(2), EntropyBoundConfig::default());
        p.upper(&[0]).unwrap();
        let before = p.work();
        assert_eq!(before, 2048);
        let ds: Vec<_> = (0..4)
            .map(|_| {
                p.tighten(&[0]).unwrap();
                let s = p.state(&[0]).unwrap();
                (s.d, s.draws_fine, s.round)
            })
            .collect();
        assert_eq!(ds, vec![(4, 2048, 1), (8, 4096, 2), (8, 8192, 3), (8, 16384, 4)]);
        assert!(p.work() > before);
    }

    #[test]
    fn cached_until_tightened() {
        let model = worlds::flip_noise_world(4, 3, 0.1);
        let mut p = provider(model, Belief::uniform(4), EntropyBoundConfig::default());
        let u = p.upper(&[2, 0]).unwrap();
        let w = p.work();
        assert_eq!(p.upper(&[0, 2]).unwrap(), u);
        p.lower(&[0, 2]).unwrap();
        assert_eq!(p.work(), w);
    }

    #[test]
    fn coverage_on_flip_noise_world() {
        let model = worlds::flip_noise_world(4, 3, 0.1);
        let b = Belief::uniform(4);
        let sets = [vec![0], vec![0, 1], vec![0, 1, 2]];
        let truth: Vec<f64> = sets
            .iter()
            .map(|s| -exact_conditional_entropy(&model, &b, s).unwrap())
            .collect();
        let trials = 200;
        let mut misses = [0, 0];
        for seed in 0..trials {
            let config = EntropyBoundConfig { seed, ..Default::default() };
            let mut p = provider(model.clone(), b.clone(), config);
            for (s, &f) in sets.iter().zip(&truth) {
                misses[0] += (p.upper(s).unwrap() < f) as u32;
                misses[1] += (p.lower(s).unwrap() > f) as u32;
            }
        }
        let n = (trials as f64) * 3.0;
        let allowed = 0.05 + 3.0 * (0.05f64 * 0.95 / n).sqrt();
        assert!(misses[0] as f64 / n <= allowed);
        assert!(misses[1] as f64 / n <= allowed);
    }

    #[test]
    fn drives_pac_selection() {
        let model = worlds::perfect_and_uninformative();
        let mut p = provider(model, Belief::uniform(2), EntropyBoundConfig::default());
        let params = PacParams::new(2.0, 1e-3, 8).unwrap();
        let (best, log) = pac_max(&mut p, &Subset::with_limit(1), &params).unwrap();
        assert_eq!(best, 0);
        assert!(log.work > 0);
    }

    #[test]
    fn rejects_bad_configs() {
        let ladder = Arc::new(CoarseLadder::new(Arc::new(worlds::perfect_and_uninformative()), 2).unwrap());
        for config in [
            EntropyBoundConfig { m_fine: 1, ..Default::default() },
            EntropyBoundConfig { draws_coarse: 0, ..Default::default() },
            EntropyBoundConfig { delta_upper: 0.0, ..Default::default() },
            EntropyBoundConfig { max_draws: 10, ..Default::default() },
            EntropyBoundConfig { d0: 1, ..Default::default() },
        ] {
            assert!(EntropyBoundProvider::new(Arc::clone(&ladder), Belief::uniform(2), config).is_err());
        }
    }
}
