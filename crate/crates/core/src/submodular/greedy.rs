//! Exact-oracle maximizers: greedy, lazy greedy, lazier (sampled) greedy, and
//! exhaustive search.
//!
//! All of them break ties on the lowest element id, so lazy greedy and
//! greedy agree exactly on submodular inputs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use itertools::Itertools;

use super::{ElementId, ExactOracle, GroundSet, IterationLog, SelectionResult, Subset};
use crate::error::{Error, Result};
use crate::rng;

/// Default cap on the number of subsets `brute_force_max` will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

fn check_oracle<O: ExactOracle + ?Sized>(oracle: &O, ground: GroundSet) -> Result<()> {
    if oracle.ground_size() != ground.len() {
        return Err(Error::param(
            "ground",
            format!(
                "oracle has {} elements, ground set has {}",
                oracle.ground_size(),
                ground.len()
            ),
        ));
    }
    Ok(())
}

/// Picks the best gain among `candidates` (ascending ids). Returns
/// `(id, F(A ∪ {id}))`.
fn argmax_gain<O: ExactOracle + ?Sized>(
    oracle: &mut O,
    chosen: &Subset,
    current: f64,
    candidates: impl IntoIterator<Item = ElementId>,
    log: &mut IterationLog,
) -> Result<Option<(ElementId, f64)>> {
    let mut best: Option<(ElementId, f64, f64)> = None;
    for i in candidates {
        let value = oracle.evaluate(&chosen.with(i))?;
        let gain = value - current;
        log.candidates += 1;
        log.gain_evaluations += 1;
        if best.is_none_or(|(_, g, _)| gain > g) {
            best = Some((i, gain, value));
        }
    }
    Ok(best.map(|(i, _, v)| (i, v)))
}

/// Adds the element with the largest marginal gain, `k` times.
pub fn greedy_max<O: ExactOracle + ?Sized>(
    oracle: &mut O,
    ground: GroundSet,
    k: usize,
) -> Result<SelectionResult> {
    check_oracle(oracle, ground)?;
    let k = k.min(ground.len());
    let start = oracle.evaluations();
    let mut chosen = Subset::with_limit(k);
    let mut iterations = Vec::with_capacity(k);
    if k == 0 {
        return Ok(SelectionResult {
            chosen,
            iterations,
            work: 0,
        });
    }
    // F(A) is carried from the previous pick.
    let mut current = oracle.evaluate(&[])?;
    for _ in 0..k {
        let before = oracle.evaluations();
        let mut log = IterationLog::default();
        let remaining: Vec<_> = ground.ids().filter(|&i| !chosen.contains(i)).collect();
        let (pick, value) = argmax_gain(oracle, &chosen, current, remaining, &mut log)?
            .ok_or(Error::EmptyCandidates)?;
        chosen.push(pick)?;
        current = value;
        log.picked = pick;
        log.work = oracle.evaluations() - before;
        iterations.push(log);
    }
    Ok(SelectionResult {
        chosen,
        iterations,
        work: oracle.evaluations() - start,
    })
}

#[derive(Debug)]
struct Entry {
    gain: f64,
    id: ElementId,
    /// Iteration in which `gain` was computed.
    stamp: usize,
    value: f64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // max-heap: larger gain first, then lower id
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Greedy with stale marginal gains kept in a priority queue.
///
/// An element popped with a gain computed in the current iteration is the
/// true argmax, because submodularity makes every stale priority an upper
/// bound on that element's current gain.
pub fn lazy_greedy_max<O: ExactOracle + ?Sized>(
    oracle: &mut O,
    ground: GroundSet,
    k: usize,
) -> Result<SelectionResult> {
    check_oracle(oracle, ground)?;
    let k = k.min(ground.len());
    let start = oracle.evaluations();
    let mut chosen = Subset::with_limit(k);
    let mut iterations = Vec::with_capacity(k);
    if k == 0 {
        return Ok(SelectionResult {
            chosen,
            iterations,
            work: 0,
        });
    }

    let mut current = oracle.evaluate(&[])?;
    let mut heap = BinaryHeap::with_capacity(ground.len());
    let mut first = IterationLog::default();
    for i in ground.ids() {
        let value = oracle.evaluate(&[i])?;
        first.gain_evaluations += 1;
        heap.push(Entry {
            gain: value - current,
            id: i,
            stamp: 0,
            value,
        });
    }

    let mut log = first;
    let mut before = start;
    for it in 0..k {
        log.candidates = heap.len();
        loop {
            let top = heap.pop().ok_or(Error::EmptyCandidates)?;
            if top.stamp == it {
                chosen.push(top.id)?;
                current = top.value;
                log.picked = top.id;
                break;
            }
            let value = oracle.evaluate(&chosen.with(top.id))?;
            log.gain_evaluations += 1;
            heap.push(Entry {
                gain: value - current,
                id: top.id,
                stamp: it,
                value,
            });
        }
        log.work = oracle.evaluations() - before;
        before = oracle.evaluations();
        iterations.push(std::mem::take(&mut log));
    }
    Ok(SelectionResult {
        chosen,
        iterations,
        work: oracle.evaluations() - start,
    })
}

/// Greedy restricted, in each iteration, to `sample_size` candidates drawn
/// uniformly without replacement from the unselected elements.
pub fn lazier_greedy_max<O: ExactOracle + ?Sized>(
    oracle: &mut O,
    ground: GroundSet,
    k: usize,
    sample_size: usize,
    seed: u64,
) -> Result<SelectionResult> {
    check_oracle(oracle, ground)?;
    if sample_size < 1 || sample_size > ground.len() {
        return Err(Error::param(
            "R",
            format!("sample size must be in 1..={}, got {sample_size}", ground.len()),
        ));
    }
    let k = k.min(ground.len());
    let start = oracle.evaluations();
    let mut chosen = Subset::with_limit(k);
    let mut iterations = Vec::with_capacity(k);
    if k == 0 {
        return Ok(SelectionResult {
            chosen,
            iterations,
            work: 0,
        });
    }
    let mut rng = rng::from_seed(seed);
    let mut current = oracle.evaluate(&[])?;
    for _ in 0..k {
        let before = oracle.evaluations();
        let remaining: Vec<_> = ground.ids().filter(|&i| !chosen.contains(i)).collect();
        let mut sampled: Vec<ElementId> = if remaining.len() <= sample_size {
            remaining
        } else {
            rand::seq::index::sample(&mut rng, remaining.len(), sample_size)
                .into_iter()
                .map(|j| remaining[j])
                .collect()
        };
        sampled.sort_unstable();
        let mut log = IterationLog::default();
        let (pick, value) = argmax_gain(oracle, &chosen, current, sampled.iter().copied(), &mut log)?
            .ok_or(Error::EmptyCandidates)?;
        chosen.push(pick)?;
        current = value;
        log.picked = pick;
        log.sampled = sampled;
        log.work = oracle.evaluations() - before;
        iterations.push(log);
    }
    Ok(SelectionResult {
        chosen,
        iterations,
        work: oracle.evaluations() - start,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, j| {
        acc.saturating_mul((n - j) as u128) / (j as u128 + 1)
    })
}

/// Exhaustive search over all subsets of size at most `k`.
///
/// Ties go to the lexicographically smallest sorted id list.
pub fn brute_force_max<O: ExactOracle + ?Sized>(
    oracle: &mut O,
    ground: GroundSet,
    k: usize,
) -> Result<(Subset, f64)> {
    brute_force_max_with_cap(oracle, ground, k, DEFAULT_ENUMERATION_CAP)
}

pub fn brute_force_max_with_cap<O: ExactOracle + ?Sized>(
    oracle: &mut O,
    ground: GroundSet,
    k: usize,
    cap: u128,
) -> Result<(Subset, f64)> {
    check_oracle(oracle, ground)?;
    let n = ground.len();
    let k = k.min(n);
    let required = (0..=k).fold(0u128, |acc, j| acc.saturating_add(binomial(n, j)));
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }
    let mut best_set: Vec<ElementId> = Vec::new();
    let mut best = oracle.evaluate(&[])?;
    for size in 1..=k {
        for combo in ground.ids().combinations(size) {
            let value = oracle.evaluate(&combo)?;
            if value > best || (value == best && combo < best_set) {
                best = value;
                best_set = combo;
            }
        }
    }
    Ok((Subset::from_ids(&best_set, k)?, best))
}

#[cfg(test)]
mod tests {
    use super::super::instances::{CoverageOracle, ModularOracle};
    use super::*;

    fn toy() -> CoverageOracle {
        CoverageOracle::new(vec![vec![0, 1], vec![1, 2], vec![2]], 3).unwrap()
    }

    fn g(n: usize) -> GroundSet {
        GroundSet::new(n).unwrap()
    }

    /// Independent brute force: every subset of size exactly `k` via bitmasks.
    fn best_of_size(o: &CoverageOracle, k: usize) -> f64 {
        let n = o.sets().len();
        (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| {
                let ids: Vec<_> = (0..n).filter(|i| m >> i & 1 == 1).collect();
                o.value(&ids)
            })
            .fold(f64::MIN, f64::max)
    }

    #[test]
    fn greedy_on_toy_coverage() {
        let mut o = toy();
        let r = greedy_max(&mut o, g(3), 2).unwrap();
        assert_eq!(r.chosen.ids(), &[0, 1]);
        assert_eq!(o.value(r.chosen.ids()), 3.0);
        assert_eq!(best_of_size(&o, 2), 3.0);
        assert_eq!(r.iterations.len(), 2);
    }

    #[test]
    fn greedy_edge_cases() {
        let mut o = toy();
        let r = greedy_max(&mut o, g(3), 0).unwrap();
        assert!(r.chosen.is_empty());
        assert_eq!(r.work, 0);
        let r = greedy_max(&mut o, g(3), 3).unwrap();
        assert_eq!(r.sorted(), vec![0, 1, 2]);
        assert_eq!(o.value(r.chosen.ids()), o.value(&[0, 1, 2]));
        let r = greedy_max(&mut o, g(3), 10).unwrap();
        assert_eq!(r.chosen.len(), 3);
    }

    #[test]
    fn greedy_rejects_mismatched_ground_set() {
        let mut o = toy();
        assert!(greedy_max(&mut o, g(4), 1).is_err());
    }

    #[test]
    fn lazy_matches_greedy_on_toy() {
        let mut o = toy();
        let r = lazy_greedy_max(&mut o, g(3), 2).unwrap();
        assert_eq!(r.chosen.ids(), &[0, 1]);
    }

    #[test]
    fn lazy_on_modular_reevaluates_once_per_later_iteration() {
        let mut lazy = ModularOracle::new(vec![3.0, 2.0, 1.0]);
        let r = lazy_greedy_max(&mut lazy, g(3), 2).unwrap();
        assert_eq!(r.chosen.ids(), &[0, 1]);
        assert_eq!(r.iterations[0].gain_evaluations, 3);
        assert_eq!(r.iterations[1].gain_evaluations, 1);

        let mut plain = ModularOracle::new(vec![3.0, 2.0, 1.0]);
        let rg = greedy_max(&mut plain, g(3), 2).unwrap();
        assert!(r.work <= rg.work);
    }

    #[test]
    fn lazy_k_zero_does_no_work() {
        let mut o = toy();
        let r = lazy_greedy_max(&mut o, g(3), 0).unwrap();
        assert!(r.chosen.is_empty());
        assert_eq!(o.evaluations(), 0);
    }

    #[test]
    fn lazier_full_sample_is_greedy() {
        for seed in 0..20 {
            let mut o = toy();
            let r = lazier_greedy_max(&mut o, g(3), 2, 3, seed).unwrap();
            assert_eq!(r.chosen.ids(), &[0, 1]);
        }
    }

    #[test]
    fn lazier_single_sample_picks_the_sample() {
        let mut o = toy();
        let r = lazier_greedy_max(&mut o, g(3), 3, 1, 42).unwrap();
        for log in &r.iterations {
            assert_eq!(log.sampled, vec![log.picked]);
        }
        assert_eq!(r.chosen.len(), 3);
    }

    #[test]
    fn lazier_is_seed_deterministic_and_validates() {
        let mut o = toy();
        let a = lazier_greedy_max(&mut o, g(3), 2, 2, 5).unwrap();
        let b = lazier_greedy_max(&mut o, g(3), 2, 2, 5).unwrap();
        assert_eq!(a.chosen, b.chosen);
        assert!(lazier_greedy_max(&mut o, g(3), 2, 0, 5).is_err());
        assert!(lazier_greedy_max(&mut o, g(3), 2, 4, 5).is_err());
    }

    #[test]
    fn lazier_mean_gap_to_greedy() {
        let mut o = toy();
        let greedy_value = 3.0;
        let total: f64 = (0..1000)
            .map(|seed| {
                let r = lazier_greedy_max(&mut o, g(3), 2, 2, seed).unwrap();
                o.value(r.chosen.ids())
            })
            .sum();
        let mean = total / 1000.0;
        // Gap is reported, not asserted beyond the trivial bound.
        eprintln!("lazier R=2 mean {mean:.3} vs greedy {greedy_value}");
        assert!(mean <= greedy_value);
    }

    #[test]
    fn brute_force_examples() {
        let mut o = toy();
        let (s, v) = brute_force_max(&mut o, g(3), 2).unwrap();
        assert_eq!(v, 3.0);
        assert_eq!(o.value(s.ids()), 3.0);

        let (s, v) = brute_force_max(&mut o, g(3), 0).unwrap();
        assert!(s.is_empty());
        assert_eq!(v, 0.0);

        let mut m = ModularOracle::new(vec![3.0, 2.0, 1.0]);
        let (s, v) = brute_force_max(&mut m, g(3), 2).unwrap();
        assert_eq!(s.ids(), &[0, 1]);
        assert_eq!(v, 5.0);
    }

    #[test]
    fn brute_force_refuses_over_cap() {
        let mut m = ModularOracle::new(vec![1.0; 40]);
        let err = brute_force_max(&mut m, g(40), 10).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { .. }));
        let err = brute_force_max_with_cap(&mut m, g(40), 1, 10).unwrap_err();
        assert_eq!(err, Error::EnumerationCap { required: 41, cap: 10 });
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(12, 4), 495);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(3, 3), 1);
    }
}
