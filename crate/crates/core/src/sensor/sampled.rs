use rand::Rng as _;

use super::{observation_likelihood, SensorModel, DEFAULT_OBSERVATION_CAP};
use crate::entropy::{entropy_from_counts, Belief};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::submodular::ElementId;

/// How observation groups are weighted in a sampled estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Group frequency among the drawn pairs.
    #[default]
    Empirical,
    /// `Pr(z | b, A)`, computed exactly. Needs an enumerable `Ω`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub entropy: f64,
    /// Draws from the prior belief (`M`).
    pub prior_samples: u64,
    /// Simulated `(s, z')` pairs, each one posterior sample.
    pub belief_updates: u64,
    pub groups: usize,
}

/// Dense count arrays are used while `|Ω|·|S|` stays below this.
const DENSE_CELLS: u128 = 1 << 18;

/// `Ĥ_b̂^A(s|z)` with empirical group weights and a fresh generator from
/// `seed`.
pub fn sampled_conditional_entropy(
    model: &SensorModel,
    belief: &Belief,
    set: &[ElementId],
    m: usize,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    let mut r = rng::from_seed(seed);
    estimate_conditional_entropy(model, belief, set, m, draws, Weighting::Empirical, &mut r)
        .map(|e| e.entropy)
}

/// Draws `m` prior samples to form `b̂`, then `draws` pairs `s ~ b̂`,
/// `z' ~ Pr(·|s, A)`; groups the pairs by `z'` and averages the plug-in
/// entropy of each group's states.
pub fn estimate_conditional_entropy(
    model: &SensorModel,
    belief: &Belief,
    set: &[ElementId],
    m: usize,
    draws: usize,
    weighting: Weighting,
    rng: &mut Rng,
) -> Result<Estimate> {
    model.check_belief(belief)?;
    model.check_selection(set)?;
    if m == 0 {
        return Err(Error::param("M", "need at least one prior sample"));
    }
    if draws == 0 {
        return Err(Error::param("N_draws", "need at least one draw"));
    }
    let omega = model.observation_count(set);
    if weighting == Weighting::Exact && omega > DEFAULT_OBSERVATION_CAP {
        return Err(Error::EnumerationCap {
            required: omega,
            cap: DEFAULT_OBSERVATION_CAP,
        });
    }
    let num_states = model.num_states();
    let sampler = belief.sampler();
    let prior: Vec<u32> = (0..m).map(|_| sampler.sample(rng) as u32).collect();

    if set.is_empty() {
        let mut counts = vec![0usize; num_states];
        prior.iter().for_each(|&s| counts[s as usize] += 1);
        return Ok(Estimate {
            entropy: entropy_from_counts(counts, m),
            prior_samples: m as u64,
            belief_updates: 0,
            groups: 1,
        });
    }

    let tables: Vec<_> = set.iter().map(|&i| model.sensor(i)).collect();
    let mixed_radix = omega <= u64::MAX as u128;
    let draw = |r: &mut Rng| -> (u64, u32) {
        let s = prior[r.random_range(0..m)];
        let key = tables.iter().fold(0u64, |key, t| {
            let v = t.sample(s as usize, r) as u64;
            if mixed_radix {
                key * t.alphabet() as u64 + v
            } else {
                rng::derive_seed(key, &[v])
            }
        });
        (key, s)
    };

    // (weight, state counts, group size) per non-empty group
    let mut total = 0.0;
    let mut groups = 0usize;
    let mut add_group = |key: u64, counts: &mut dyn Iterator<Item = usize>, size: usize| -> Result<()> {
        groups += 1;
        let h = entropy_from_counts(counts, size);
        let weight = match weighting {
            Weighting::Empirical => size as f64 / draws as f64,
            Weighting::Exact => {
                let z = decode(model, set, key);
                observation_likelihood(model, belief, set, &z)?
            }
        };
        total += weight * h;
        Ok(())
    };

    if omega * num_states as u128 <= DENSE_CELLS {
        let omega = omega as usize;
        let mut cells = vec![0u32; omega * num_states];
        let mut sizes = vec![0u32; omega];
        for _ in 0..draws {
            let (key, s) = draw(rng);
            cells[key as usize * num_states + s as usize] += 1;
            sizes[key as usize] += 1;
        }
        for (key, &size) in sizes.iter().enumerate().filter(|(_, &n)| n > 0) {
            let row = &cells[key * num_states..(key + 1) * num_states];
            add_group(key as u64, &mut row.iter().map(|&c| c as usize), size as usize)?;
        }
    } else {
        let mut pairs: Vec<(u64, u32)> = (0..draws).map(|_| draw(rng)).collect();
        pairs.sort_unstable();
        for group in pairs.chunk_by(|a, b| a.0 == b.0) {
            let mut counts = group.chunk_by(|a, b| a.1 == b.1).map(|run| run.len());
            add_group(group[0].0, &mut counts, group.len())?;
        }
    }
    Ok(Estimate {
        entropy: total,
        prior_samples: m as u64,
        belief_updates: draws as u64,
        groups,
    })
}

fn decode(model: &SensorModel, set: &[ElementId], mut key: u64) -> Vec<Option<usize>> {
    let mut z = vec![None; model.num_sensors()];
    for &i in set.iter().rev() {
        let a = model.alphabet(i) as u64;
        z[i] = Some((key % a) as usize);
        key /= a;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::super::{exact_conditional_entropy, worlds};
    use super::*;
    use crate::entropy::{plugin_entropy, SampleSet};
    use approx::assert_abs_diff_eq;

    const H_FLIP: f64 = 0.325_082_973_391_448_2;

    fn flip() -> SensorModel {
        SensorModel::new(2, vec![(2, vec![0.9, 0.1, 0.1, 0.9])]).unwrap()
    }

    #[test]
    fn perfect_sensor_is_always_zero() {
        let m = worlds::perfect_and_uninformative();
        for seed in 0..50 {
            let h = sampled_conditional_entropy(&m, &Belief::uniform(2), &[0], 16, 64, seed).unwrap();
            assert_eq!(h, 0.0);
        }
    }

    #[test]
    fn empty_selection_is_plugin_of_prior_samples() {
        let m = flip();
        let b = Belief::new(vec![0.3, 0.7]).unwrap();
        for seed in 0..10 {
            let h = sampled_conditional_entropy(&m, &b, &[], 40, 1, seed).unwrap();
            let samples = SampleSet::draw(&b, 40, &mut rng::from_seed(seed)).unwrap();
            assert_abs_diff_eq!(h, plugin_entropy(&samples, 2).unwrap(), epsilon = 1e-15);
        }
    }

    #[test]
    fn flip_sensor_mean_is_close_and_biased_low() {
        let m = flip();
        let b = Belief::uniform(2);
        let runs: Vec<f64> = (0..100)
            .map(|seed| sampled_conditional_entropy(&m, &b, &[0], 1000, 10_000, seed).unwrap())
            .collect();
        let mean = runs.iter().sum::<f64>() / runs.len() as f64;
        assert!((mean - H_FLIP).abs() < 0.02, "mean {mean}");
        assert!(mean <= H_FLIP, "mean {mean}");
    }

    #[test]
    fn mean_stays_below_exact_on_random_worlds() {
        for world in 0..5 {
            let mut r = rng::from_seed(100 + world);
            let m = worlds::random_world(6, 3, 2..=4, &mut r);
            let b = worlds::random_belief(6, &mut r);
            let exact = exact_conditional_entropy(&m, &b, &[0, 2]).unwrap();
            let runs: Vec<f64> = (0..200)
                .map(|seed| sampled_conditional_entropy(&m, &b, &[0, 2], 50, 500, seed).unwrap())
                .collect();
            let mean = runs.iter().sum::<f64>() / 200.0;
            let var = runs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 199.0;
            assert!(mean <= exact + 3.0 * (var / 200.0).sqrt(), "{mean} vs {exact}");
        }
    }

    #[test]
    fn large_observation_spaces_use_sorted_grouping() {
        // 10 ternary sensors push |Ω|·|S| past the dense limit.
        let mut r = rng::from_seed(8);
        let m = worlds::random_world(8, 12, 3..=3, &mut r);
        let b = worlds::random_belief(8, &mut r);
        let big: Vec<usize> = (0..12).collect();
        let e = estimate_conditional_entropy(&m, &b, &big, 100, 2000, Weighting::Empirical, &mut r).unwrap();
        assert!(e.entropy >= 0.0 && e.entropy <= 8f64.ln());
        assert_eq!(e.belief_updates, 2000);
        let small = [0, 1];
        let a = estimate_conditional_entropy(&m, &b, &small, 100, 2000, Weighting::Empirical, &mut rng::from_seed(1)).unwrap();
        assert!(a.groups <= 9);
    }

    #[test]
    fn exact_weights_converge_to_exact_value() {
        let mut r = rng::from_seed(4);
        let m = worlds::random_world(4, 3, 2..=3, &mut r);
        let b = worlds::random_belief(4, &mut r);
        let exact = exact_conditional_entropy(&m, &b, &[0, 1, 2]).unwrap();
        let e = estimate_conditional_entropy(&m, &b, &[0, 1, 2], 1 << 16, 1 << 18, Weighting::Exact, &mut r).unwrap();
        assert!((e.entropy - exact).abs() < 0.02, "{} vs {exact}", e.entropy);
    }

    #[test]
    fn rejects_zero_budgets() {
        let m = flip();
        let b = Belief::uniform(2);
        assert!(sampled_conditional_entropy(&m, &b, &[0], 0, 10, 0).is_err());
        assert!(sampled_conditional_entropy(&m, &b, &[0], 10, 0, 0).is_err());
    }

    #[test]
    fn decode_inverts_mixed_radix() {
        let m = SensorModel::new(1, vec![(3, vec![1.0, 0.0, 0.0]), (2, vec![1.0, 0.0]), (4, vec![0.25; 4])]).unwrap();
        assert_eq!(decode(&m, &[0, 2], 2 * 4 + 3), vec![Some(2), None, Some(3)]);
    }
}
