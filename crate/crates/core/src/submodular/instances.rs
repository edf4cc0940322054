//! Small exact set functions used as test beds and benchmark scenarios.

use rand::Rng as _;

use super::{ElementId, ExactOracle};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Weighted-free set cover: `F(A) = |∪_{i∈A} sets[i]|`.
#[derive(Debug, Clone)]
pub struct CoverageOracle {
    sets: Vec<Vec<usize>>,
    universe: usize,
    evaluations: u64,
}

impl CoverageOracle {
    pub fn new(sets: Vec<Vec<usize>>, universe: usize) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::param("sets", "need at least one set"));
        }
        if let Some(&bad) = sets.iter().flatten().find(|&&x| x >= universe) {
            return Err(Error::param(
                "sets",
                format!("item {bad} outside universe of {universe}"),
            ));
        }
        Ok(CoverageOracle {
            sets,
            universe,
            evaluations: 0,
        })
    }

    /// Each of the `n` sets includes every universe item independently with
    /// probability `density`.
    pub fn random(n: usize, universe: usize, density: f64, rng: &mut Rng) -> Self {
        let sets = (0..n)
            .map(|_| (0..universe).filter(|_| rng.random::<f64>() < density).collect())
            .collect();
        CoverageOracle {
            sets,
            universe,
            evaluations: 0,
        }
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn value(&self, set: &[ElementId]) -> f64 {
        let mut seen = vec![false; self.universe];
        let mut count = 0usize;
        for &i in set {
            for &x in &self.sets[i] {
                if !seen[x] {
                    seen[x] = true;
                    count += 1;
                }
            }
        }
        count as f64
    }
}

impl ExactOracle for CoverageOracle {
    fn ground_size(&self) -> usize {
        self.sets.len()
    }

    fn evaluate(&mut self, set: &[ElementId]) -> Result<f64> {
        let n = self.sets.len();
        if let Some(&id) = set.iter().find(|&&i| i >= n) {
            return Err(Error::OutOfRange { id, n });
        }
        self.evaluations += 1;
        Ok(self.value(set))
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// Additive weights: `F(A) = Σ_{i∈A} w_i`.
#[derive(Debug, Clone)]
pub struct ModularOracle {
    weights: Vec<f64>,
    evaluations: u64,
}

impl ModularOracle {
    pub fn new(weights: Vec<f64>) -> Self {
        ModularOracle {
            weights,
            evaluations: 0,
        }
    }
}

impl ExactOracle for ModularOracle {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn evaluate(&mut self, set: &[ElementId]) -> Result<f64> {
        let n = self.weights.len();
        let mut total = 0.0;
        for &i in set {
            total += *self.weights.get(i).ok_or(Error::OutOfRange { id: i, n })?;
        }
        self.evaluations += 1;
        Ok(total)
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// Wraps a closure as a counted oracle.
pub struct FnOracle<F> {
    n: usize,
    f: F,
    evaluations: u64,
}

impl<F: FnMut(&[ElementId]) -> f64> FnOracle<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnOracle {
            n,
            f,
            evaluations: 0,
        }
    }
}

impl<F: FnMut(&[ElementId]) -> f64> ExactOracle for FnOracle<F> {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn evaluate(&mut self, set: &[ElementId]) -> Result<f64> {
        if let Some(&id) = set.iter().find(|&&i| i >= self.n) {
            return Err(Error::OutOfRange { id, n: self.n });
        }
        self.evaluations += 1;
        Ok((self.f)(set))
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}
