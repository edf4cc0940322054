//! Confidence bounds for objectives that are means of bounded i.i.d. draws.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::submodular::{set_key, BoundProvider, ElementId};

pub const DEFAULT_HOEFFDING_BATCH: usize = 32;

/// `(hi - lo) · sqrt(ln(2/δ) / (2N))`.
pub fn hoeffding_radius(range: f64, n: u64, delta: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    range * ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

#[derive(Debug, Clone, Default)]
struct Running {
    sum: f64,
    count: u64,
    rounds: u64,
}

/// Hoeffding bounds over a per-subset sampler with values in `[lo, hi]`.
///
/// Before any samples are folded in, the bounds are the range itself.
/// `tighten` draws another batch.
pub struct HoeffdingBounds<S> {
    n: usize,
    sampler: S,
    lo: f64,
    hi: f64,
    delta: f64,
    batch: usize,
    seed: u64,
    states: HashMap<Vec<ElementId>, Running>,
    samples: u64,
}

impl<S> HoeffdingBounds<S>
where
    S: FnMut(&[ElementId], &mut Rng) -> f64,
{
    pub fn new(n: usize, sampler: S, range: (f64, f64), delta: f64, seed: u64) -> Result<Self> {
        let (lo, hi) = range;
        if !(hi > lo) {
            return Err(Error::param("range", "need lo < hi"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", "must be in (0, 1)"));
        }
        Ok(HoeffdingBounds {
            n,
            sampler,
            lo,
            hi,
            delta,
            batch: DEFAULT_HOEFFDING_BATCH,
            seed,
            states: HashMap::new(),
            samples: 0,
        })
    }

    pub fn with_batch(mut self, batch: usize) -> Result<Self> {
        if batch == 0 {
            return Err(Error::param("batch", "must be >= 1"));
        }
        self.batch = batch;
        Ok(self)
    }

    pub fn count(&self, set: &[ElementId]) -> u64 {
        self.states.get(&set_key(set)).map_or(0, |s| s.count)
    }

    fn interval(&self, set: &[ElementId]) -> (f64, f64) {
        match self.states.get(&set_key(set)) {
            Some(s) if s.count > 0 => {
                let mean = s.sum / s.count as f64;
                let r = hoeffding_radius(self.hi - self.lo, s.count, self.delta);
                (mean - r, mean + r)
            }
            _ => (self.lo, self.hi),
        }
    }
}

impl<S> BoundProvider for HoeffdingBounds<S>
where
    S: FnMut(&[ElementId], &mut Rng) -> f64,
{
    fn ground_size(&self) -> usize {
        self.n
    }

    fn upper(&mut self, set: &[ElementId]) -> Result<f64> {
        Ok(self.interval(set).1)
    }

    fn lower(&mut self, set: &[ElementId]) -> Result<f64> {
        Ok(self.interval(set).0)
    }

    fn tighten(&mut self, set: &[ElementId]) -> Result<()> {
        let key = set_key(set);
        let state = self.states.entry(key.clone()).or_default();
        let mut path: Vec<u64> = key.iter().map(|&i| i as u64).collect();
        path.push(u64::MAX);
        path.push(state.rounds);
        let mut rng = rng::stream(self.seed, &path);
        for _ in 0..self.batch {
            let x = (self.sampler)(&key, &mut rng);
            if !(x >= self.lo && x <= self.hi) {
                return Err(Error::Contract(format!(
                    "sample {x} outside [{}, {}]",
                    self.lo, self.hi
                )));
            }
            state.sum += x;
            state.count += 1;
        }
        state.rounds += 1;
        self.samples += self.batch as u64;
        Ok(())
    }

    fn work(&self) -> u64 {
        self.samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng as _;

    #[test]
    fn constant_sampler_shrinks_like_inverse_sqrt() {
        let mut b = HoeffdingBounds::new(1, |_: &[ElementId], _: &mut Rng| 0.25, (0.0, 1.0), 0.1, 0)
            .unwrap();
        assert_eq!(b.upper(&[0]).unwrap(), 1.0);
        assert_eq!(b.lower(&[0]).unwrap(), 0.0);
        b.tighten(&[0]).unwrap();
        let w1 = b.upper(&[0]).unwrap() - b.lower(&[0]).unwrap();
        for _ in 0..3 {
            b.tighten(&[0]).unwrap();
        }
        let w4 = b.upper(&[0]).unwrap() - b.lower(&[0]).unwrap();
        assert_abs_diff_eq!(w4, w1 / 2.0, epsilon = 1e-12);
        let mid = (b.upper(&[0]).unwrap() + b.lower(&[0]).unwrap()) / 2.0;
        assert_abs_diff_eq!(mid, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn single_sample_radius() {
        let delta = 0.05;
        let mut b = HoeffdingBounds::new(1, |_: &[ElementId], _: &mut Rng| 3.0, (2.0, 6.0), delta, 0)
            .unwrap()
            .with_batch(1)
            .unwrap();
        b.tighten(&[0]).unwrap();
        assert_eq!(b.count(&[0]), 1);
        let r = b.upper(&[0]).unwrap() - 3.0;
        assert_abs_diff_eq!(r, 4.0 * ((2.0f64 / delta).ln() / 2.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn out_of_range_sample_is_a_contract_violation() {
        let mut b =
            HoeffdingBounds::new(1, |_: &[ElementId], _: &mut Rng| 2.0, (0.0, 1.0), 0.1, 0).unwrap();
        assert!(matches!(b.tighten(&[0]), Err(Error::Contract(_))));
    }

    #[test]
    fn bernoulli_coverage() {
        let trials = 10_000u64;
        let delta = 0.05;
        let mut covered = 0u64;
        for seed in 0..trials {
            let mut b = HoeffdingBounds::new(
                1,
                |_: &[ElementId], r: &mut Rng| if r.random::<bool>() { 1.0 } else { 0.0 },
                (0.0, 1.0),
                delta,
                seed,
            )
            .unwrap();
            b.tighten(&[0]).unwrap();
            let (l, u) = (b.lower(&[0]).unwrap(), b.upper(&[0]).unwrap());
            covered += (l <= 0.5 && 0.5 <= u) as u64;
        }
        let p = 1.0 - delta;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(covered as f64 / trials as f64 >= p - 3.0 * se);
    }

    #[test]
    fn tighten_moves_bounds_inward_in_expectation() {
        let reps = 2000;
        let (mut du, mut dl) = (0.0, 0.0);
        for seed in 0..reps {
            let mut b = HoeffdingBounds::new(
                1,
                |_: &[ElementId], r: &mut Rng| r.random::<f64>(),
                (0.0, 1.0),
                0.1,
                seed,
            )
            .unwrap();
            b.tighten(&[0]).unwrap();
            let (l0, u0) = (b.lower(&[0]).unwrap(), b.upper(&[0]).unwrap());
            b.tighten(&[0]).unwrap();
            du += b.upper(&[0]).unwrap() - u0;
            dl += b.lower(&[0]).unwrap() - l0;
        }
        assert!(du / (reps as f64) < 0.0);
        assert!(dl / (reps as f64) > 0.0);
    }
}
