use std::collections::HashMap;

use super::{estimate_conditional_entropy, information_gain, SensorModel, Weighting};
use crate::entropy::Belief;
use crate::error::Result;
use crate::rng;
use crate::submodular::{set_key, ElementId, ExactOracle};

/// Exact information gain `H(b) - H_b^A(s|z)` as a set function.
#[derive(Debug, Clone)]
pub struct InformationGainOracle<'a> {
    model: &'a SensorModel,
    belief: Belief,
    evaluations: u64,
}

impl<'a> InformationGainOracle<'a> {
    pub fn new(model: &'a SensorModel, belief: Belief) -> Result<Self> {
        model.check_belief(&belief)?;
        Ok(InformationGainOracle {
            model,
            belief,
            evaluations: 0,
        })
    }
}

impl ExactOracle for InformationGainOracle<'_> {
    fn ground_size(&self) -> usize {
        self.model.num_sensors()
    }

    fn evaluate(&mut self, set: &[ElementId]) -> Result<f64> {
        self.evaluations += 1;
        information_gain(self.model, &self.belief, set)
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// `F̂(A) = -Ĥ_b̂^A(s|z)` at a fixed budget, treated as if exact.
///
/// Each subset gets its own random stream derived from `seed`, so values do
/// not depend on query order, and repeated queries are served from a cache.
#[derive(Debug, Clone)]
pub struct EstimatedObjective<'a> {
    model: &'a SensorModel,
    belief: Belief,
    m: usize,
    draws: usize,
    weighting: Weighting,
    seed: u64,
    cache: HashMap<Vec<ElementId>, f64>,
    evaluations: u64,
    belief_updates: u64,
    prior_samples: u64,
}

impl<'a> EstimatedObjective<'a> {
    pub fn new(model: &'a SensorModel, belief: Belief, m: usize, draws: usize, seed: u64) -> Result<Self> {
        model.check_belief(&belief)?;
        Ok(EstimatedObjective {
            model,
            belief,
            m,
            draws,
            weighting: Weighting::Empirical,
            seed,
            cache: HashMap::new(),
            evaluations: 0,
            belief_updates: 0,
            prior_samples: 0,
        })
    }

    pub fn with_weighting(mut self, weighting: Weighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn belief_updates(&self) -> u64 {
        self.belief_updates
    }

    pub fn prior_samples(&self) -> u64 {
        self.prior_samples
    }
}

impl ExactOracle for EstimatedObjective<'_> {
    fn ground_size(&self) -> usize {
        self.model.num_sensors()
    }

    fn evaluate(&mut self, set: &[ElementId]) -> Result<f64> {
        let key = set_key(set);
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        self.evaluations += 1;
        let path: Vec<u64> = key.iter().map(|&i| i as u64).collect();
        let mut r = rng::stream(self.seed, &path);
        let e = estimate_conditional_entropy(
            self.model,
            &self.belief,
            &key,
            self.m,
            self.draws,
            self.weighting,
            &mut r,
        )?;
        self.belief_updates += e.belief_updates;
        self.prior_samples += e.prior_samples;
        self.cache.insert(key, -e.entropy);
        Ok(-e.entropy)
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}
