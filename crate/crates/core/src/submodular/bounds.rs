use std::collections::HashMap;

use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{set_key, BoundProvider, ElementId, ExactOracle};
use crate::error::{Error, Result};
use crate::rng;

/// Exposes an exact oracle through the bound contract: `U = L = F`, and
/// tightening does nothing.
#[derive(Debug)]
pub struct ExactBounds<O> {
    oracle: O,
    cache: HashMap<Vec<ElementId>, f64>,
}

impl<O: ExactOracle> ExactBounds<O> {
    pub fn new(oracle: O) -> Self {
        ExactBounds {
            oracle,
            cache: HashMap::new(),
        }
    }

    pub fn into_inner(self) -> O {
        self.oracle
    }

    fn value(&mut self, set: &[ElementId]) -> Result<f64> {
        let key = set_key(set);
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let v = self.oracle.evaluate(&key)?;
        self.cache.insert(key, v);
        Ok(v)
    }
}

impl<O: ExactOracle> BoundProvider for ExactBounds<O> {
    fn ground_size(&self) -> usize {
        self.oracle.ground_size()
    }

    fn upper(&mut self, set: &[ElementId]) -> Result<f64> {
        self.value(set)
    }

    fn lower(&mut self, set: &[ElementId]) -> Result<f64> {
        self.value(set)
    }

    fn tighten(&mut self, _set: &[ElementId]) -> Result<()> {
        Ok(())
    }

    fn work(&self) -> u64 {
        self.oracle.evaluations()
    }
}

#[derive(Debug, Clone)]
struct NoisyMean {
    truth: f64,
    sum: f64,
    count: u64,
    rounds: u64,
}

/// Synthetic bounds with an exactly known per-query confidence.
///
/// The estimate of `F(A)` is a running mean of `F(A) + N(0, σ²)` samples.
/// With `N` samples, `U = mean + z_u σ/√N` and `L = mean - z_l σ/√N`, where
/// `z` is the standard normal quantile at `1 - δ`, so each query satisfies
/// `P(U >= F) = 1 - δ_u` and `P(F >= L) = 1 - δ_l` exactly. Tightening folds
/// in another batch of samples.
#[derive(Debug)]
pub struct GaussianBounds<O> {
    oracle: O,
    sigma: f64,
    batch: u64,
    z_upper: f64,
    z_lower: f64,
    seed: u64,
    states: HashMap<Vec<ElementId>, NoisyMean>,
    draws: u64,
}

impl<O: ExactOracle> GaussianBounds<O> {
    pub fn new(
        oracle: O,
        sigma: f64,
        delta_upper: f64,
        delta_lower: f64,
        batch: u64,
        seed: u64,
    ) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::param("sigma", "must be > 0"));
        }
        for (name, d) in [("delta_u", delta_upper), ("delta_l", delta_lower)] {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::param(name, "must be in (0, 1)"));
            }
        }
        if batch == 0 {
            return Err(Error::param("batch", "must be >= 1"));
        }
        let std = Normal::standard();
        Ok(GaussianBounds {
            oracle,
            sigma,
            batch,
            z_upper: std.inverse_cdf(1.0 - delta_upper),
            z_lower: std.inverse_cdf(1.0 - delta_lower),
            seed,
            states: HashMap::new(),
            draws: 0,
        })
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    fn fold(&mut self, key: &[ElementId]) {
        let state = self.states.get_mut(key).expect("initialized");
        let mut path: Vec<u64> = key.iter().map(|&i| i as u64).collect();
        path.push(u64::MAX);
        path.push(state.rounds);
        let mut rng = rng::stream(self.seed, &path);
        for _ in 0..self.batch {
            let noise: f64 = StandardNormal.sample(&mut rng);
            state.sum += state.truth + self.sigma * noise;
        }
        state.count += self.batch;
        state.rounds += 1;
        self.draws += self.batch;
    }

    fn state(&mut self, set: &[ElementId]) -> Result<(f64, f64)> {
        let key = set_key(set);
        if !self.states.contains_key(&key) {
            let truth = self.oracle.evaluate(&key)?;
            self.states.insert(
                key.clone(),
                NoisyMean {
                    truth,
                    sum: 0.0,
                    count: 0,
                    rounds: 0,
                },
            );
            self.fold(&key);
        }
        let s = &self.states[&key];
        let n = s.count as f64;
        Ok((s.sum / n, self.sigma / n.sqrt()))
    }
}

impl<O: ExactOracle> BoundProvider for GaussianBounds<O> {
    fn ground_size(&self) -> usize {
        self.oracle.ground_size()
    }

    fn upper(&mut self, set: &[ElementId]) -> Result<f64> {
        let (mean, se) = self.state(set)?;
        Ok(mean + self.z_upper * se)
    }

    fn lower(&mut self, set: &[ElementId]) -> Result<f64> {
        let (mean, se) = self.state(set)?;
        Ok(mean - self.z_lower * se)
    }

    fn tighten(&mut self, set: &[ElementId]) -> Result<()> {
        self.state(set)?;
        self.fold(&set_key(set));
        Ok(())
    }

    fn work(&self) -> u64 {
        self.draws
    }
}
