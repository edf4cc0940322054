use std::sync::Arc;

use super::SensorModel;
use crate::error::{Error, Result};

/// Deterministic per-sensor map from observation values to cluster ids.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningMap {
    maps: Vec<Vec<usize>>,
    clusters: Vec<usize>,
}

impl CoarseningMap {
    /// Contiguous equal-width grouping of each alphabet into
    /// `min(d, alphabet)` clusters.
    pub fn equal_width(model: &SensorModel, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "need at least one cluster"));
        }
        let (maps, clusters) = (0..model.num_sensors())
            .map(|i| {
                let a = model.alphabet(i);
                let k = d.min(a);
                ((0..a).map(|v| v * k / a).collect(), k)
            })
            .unzip();
        Ok(CoarseningMap { maps, clusters })
    }

    /// Explicit maps, one per sensor; cluster ids must be dense from 0.
    pub fn from_maps(model: &SensorModel, maps: Vec<Vec<usize>>) -> Result<Self> {
        if maps.len() != model.num_sensors() {
            return Err(Error::Shape(format!(
                "{} maps for {} sensors",
                maps.len(),
                model.num_sensors()
            )));
        }
        let mut clusters = Vec::with_capacity(maps.len());
        for (i, map) in maps.iter().enumerate() {
            if map.len() != model.alphabet(i) {
                return Err(Error::Shape(format!(
                    "map for sensor {i} covers {} values, alphabet has {}",
                    map.len(),
                    model.alphabet(i)
                )));
            }
            let k = map.iter().max().map_or(0, |m| m + 1);
            let mut used = vec![false; k];
            map.iter().for_each(|&c| used[c] = true);
            if used.contains(&false) {
                return Err(Error::Shape(format!("sensor {i} has an unused cluster id")));
            }
            clusters.push(k);
        }
        Ok(CoarseningMap { maps, clusters })
    }

    pub fn cluster(&self, sensor: usize, value: usize) -> usize {
        self.maps[sensor][value]
    }

    pub fn clusters(&self, sensor: usize) -> usize {
        self.clusters[sensor]
    }
}

/// `Pr(r_i = c | s) = Σ_{v: f(v) = c} Pr(z_i = v | s)`.
pub fn coarse_model(model: &SensorModel, map: &CoarseningMap) -> SensorModel {
    let s_count = model.num_states();
    let sensors = (0..model.num_sensors())
        .map(|i| {
            let k = map.clusters(i);
            let table = model.sensor(i);
            let mut probs = vec![0.0; s_count * k];
            for s in 0..s_count {
                for (v, &p) in table.row(s).iter().enumerate() {
                    probs[s * k + map.cluster(i, v)] += p;
                }
            }
            (k, probs)
        })
        .collect();
    SensorModel::new(s_count, sensors).expect("marginalizing valid rows keeps them valid")
}

/// A model together with its equal-width coarsenings at `d0, 2·d0, …` up to
/// the largest alphabet. Built once and shared across beliefs.
#[derive(Debug)]
pub struct CoarseLadder {
    model: Arc<SensorModel>,
    levels: Vec<(usize, Arc<SensorModel>)>,
}

impl CoarseLadder {
    pub fn new(model: Arc<SensorModel>, d0: usize) -> Result<Self> {
        if d0 == 0 {
            return Err(Error::param("d0", "need at least one cluster"));
        }
        let top = model.max_alphabet();
        let mut levels = Vec::new();
        let mut d = d0.min(top);
        loop {
            let coarse = if d >= top {
                Arc::clone(&model)
            } else {
                Arc::new(coarse_model(&model, &CoarseningMap::equal_width(&model, d)?))
            };
            levels.push((d, coarse));
            if d >= top {
                break;
            }
            d = (2 * d).min(top);
        }
        Ok(CoarseLadder { model, levels })
    }

    pub fn model(&self) -> &Arc<SensorModel> {
        &self.model
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    /// Cluster count and coarse model at `level`, saturating at the finest.
    pub fn level(&self, level: usize) -> (usize, &SensorModel) {
        let (d, m) = &self.levels[level.min(self.levels.len() - 1)];
        (*d, m)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{exact_conditional_entropy, worlds};
    use super::*;
    use crate::entropy::Belief;
    use crate::rng;
    use rand::Rng as _;

    #[test]
    fn identity_and_trivial_maps() {
        let mut r = rng::from_seed(3);
        let m = worlds::random_world(4, 3, 2..=5, &mut r);
        let id = CoarseningMap::equal_width(&m, m.max_alphabet()).unwrap();
        assert_eq!(coarse_model(&m, &id), m);
        let one = coarse_model(&m, &CoarseningMap::equal_width(&m, 1).unwrap());
        for i in 0..3 {
            assert_eq!(one.alphabet(i), 1);
            for s in 0..4 {
                assert!((one.sensor(i).row(s)[0] - 1.0).abs() < 1e-12);
            }
        }
        assert!(CoarseningMap::equal_width(&m, 0).is_err());
    }

    #[test]
    fn pairing_sums_rows() {
        let m = SensorModel::new(1, vec![(4, vec![0.4, 0.3, 0.2, 0.1])]).unwrap();
        let map = CoarseningMap::from_maps(&m, vec![vec![0, 0, 1, 1]]).unwrap();
        let c = coarse_model(&m, &map);
        let row = c.sensor(0).row(0);
        assert!((row[0] - 0.7).abs() < 1e-15 && (row[1] - 0.3).abs() < 1e-15);
        assert_eq!(map, CoarseningMap::equal_width(&m, 2).unwrap());
        assert!(CoarseningMap::from_maps(&m, vec![vec![0, 0, 2, 2]]).is_err());
        assert!(CoarseningMap::from_maps(&m, vec![vec![0, 0, 1]]).is_err());
    }

    #[test]
    fn coarsening_never_lowers_conditional_entropy() {
        for seed in 0..200 {
            let mut r = rng::from_seed(seed);
            let m = worlds::random_world(5, 4, 2..=6, &mut r);
            let b = worlds::random_belief(5, &mut r);
            let maps = (0..4)
                .map(|i| {
                    let k = r.random_range(1..=m.alphabet(i));
                    // every cluster used at least once, the rest random
                    (0..m.alphabet(i))
                        .map(|v| if v < k { v } else { r.random_range(0..k) })
                        .collect()
                })
                .collect();
            let map = CoarseningMap::from_maps(&m, maps).unwrap();
            let c = coarse_model(&m, &map);
            for set in [vec![0], vec![1, 2], vec![0, 1, 3]] {
                let fine = exact_conditional_entropy(&m, &b, &set).unwrap();
                let coarse = exact_conditional_entropy(&c, &b, &set).unwrap();
                assert!(coarse >= fine - 1e-9, "seed {seed}: {coarse} < {fine}");
            }
        }
    }

    #[test]
    fn ladder_doubles_to_the_alphabet() {
        let m = Arc::new(SensorModel::new(2, vec![(5, vec![0.2; 10]), (2, vec![0.5; 4])]).unwrap());
        let ladder = CoarseLadder::new(Arc::clone(&m), 2).unwrap();
        let ds: Vec<_> = (0..ladder.levels()).map(|l| ladder.level(l).0).collect();
        assert_eq!(ds, vec![2, 4, 5]);
        assert_eq!(ladder.level(99).1, &*m);
        assert_eq!(ladder.level(0).1.alphabet(1), 2);
        let b = Belief::uniform(2);
        assert!(exact_conditional_entropy(ladder.level(0).1, &b, &[0]).is_ok());
    }
}
