//! Small sensor worlds for tests and benchmarks.

use std::ops::RangeInclusive;

use rand::Rng as _;

use super::SensorModel;
use crate::entropy::Belief;
use crate::rng::Rng;

/// Two states; sensor 0 reports the state exactly, sensor 1 is a fair coin.
pub fn perfect_and_uninformative() -> SensorModel {
    SensorModel::new(2, vec![(2, vec![1.0, 0.0, 0.0, 1.0]), (2, vec![0.5; 4])])
        .expect("valid tables")
}

/// Binary sensors over `num_states` states: sensor `i` reports bit
/// `i mod bits` of the state id, flipped with probability `flip`.
pub fn flip_noise_world(num_states: usize, n: usize, flip: f64) -> SensorModel {
    let bits = (usize::BITS - (num_states.max(2) - 1).leading_zeros()) as usize;
    let tables = (0..n)
        .map(|i| {
            let bit = i % bits;
            let probs = (0..num_states)
                .flat_map(|s| {
                    if (s >> bit) & 1 == 0 {
                        [1.0 - flip, flip]
                    } else {
                        [flip, 1.0 - flip]
                    }
                })
                .collect();
            (2, probs)
        })
        .collect();
    SensorModel::new(num_states, tables).expect("valid tables")
}

/// Random tables with alphabets drawn from `alphabet`. Rows are skewed
/// (cubed uniforms, normalized) so that sensors carry information.
pub fn random_world(num_states: usize, n: usize, alphabet: RangeInclusive<usize>, rng: &mut Rng) -> SensorModel {
    let tables = (0..n)
        .map(|_| {
            let a = rng.random_range(alphabet.clone());
            let mut probs = Vec::with_capacity(num_states * a);
            for _ in 0..num_states {
                let row: Vec<f64> = (0..a).map(|_| rng.random::<f64>().powi(3) + 1e-3).collect();
                let sum: f64 = row.iter().sum();
                probs.extend(row.iter().map(|w| w / sum));
            }
            (a, probs)
        })
        .collect();
    SensorModel::new(num_states, tables).expect("normalized rows")
}

/// A random belief; each state is dropped from the support with
/// probability 0.2, keeping at least one.
pub fn random_belief(num_states: usize, rng: &mut Rng) -> Belief {
    let keep = rng.random_range(0..num_states);
    let weights: Vec<f64> = (0..num_states)
        .map(|s| {
            if s != keep && rng.random::<f64>() < 0.2 {
                0.0
            } else {
                rng.random::<f64>() + 1e-3
            }
        })
        .collect();
    Belief::from_weights(&weights).expect("positive mass")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_world_tables() {
        let m = flip_noise_world(4, 3, 0.1);
        assert_eq!(m.sensor(0).row(1), &[0.1, 0.9]);
        assert_eq!(m.sensor(1).row(1), &[0.9, 0.1]);
        assert_eq!(m.sensor(2).row(3), &[0.1, 0.9]);
    }
}
