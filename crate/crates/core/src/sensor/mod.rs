//! Finite sensor models with observations that are conditionally independent
//! given the hidden state.
//!
//! For a selection `A` and joint observation `z`,
//! `Pr(z | s, A) = Π_{i∈A} Pr(z_i | s)`. Selecting `A` under prior `b`
//! leaves an expected posterior entropy `H_b^A(s|z)`; the objective is
//! `F(A) = -H_b^A(s|z)`, and the information gain `H(b) - H_b^A(s|z)` is its
//! non-negative shift.

mod coarse;
pub mod io;
mod oracle;
mod provider;
mod sampled;
pub mod worlds;

pub use coarse::{coarse_model, CoarseLadder, CoarseningMap};
pub use oracle::{EstimatedObjective, InformationGainOracle};
pub use provider::{EntropyBoundConfig, EntropyBoundProvider};
pub use sampled::{
    estimate_conditional_entropy, sampled_conditional_entropy, Estimate, Weighting,
};

use rand::Rng as _;

use crate::entropy::{exact_entropy, Belief};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::submodular::ElementId;

/// Default cap on `|Ω|` for exact enumeration.
pub const DEFAULT_OBSERVATION_CAP: u128 = 1_000_000;

const ROW_TOLERANCE: f64 = 1e-9;

/// A joint observation: `Some(v)` for selected sensors, `None` (the null
/// observation) elsewhere. Length equals the number of sensors.
pub type Observation = Vec<Option<usize>>;

#[derive(Debug, Clone, PartialEq)]
pub struct SensorTable {
    alphabet: usize,
    /// Row-major `[state][value]`.
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SensorTable {
    fn new(num_states: usize, alphabet: usize, probs: Vec<f64>, sensor: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidModel(format!("sensor {sensor} has an empty alphabet")));
        }
        if probs.len() != num_states * alphabet {
            return Err(Error::InvalidModel(format!(
                "sensor {sensor}: expected {} table entries, got {}",
                num_states * alphabet,
                probs.len()
            )));
        }
        let mut cumulative = Vec::with_capacity(probs.len());
        for (s, row) in probs.chunks(alphabet).enumerate() {
            if let Some(p) = row.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                return Err(Error::InvalidModel(format!(
                    "sensor {sensor}, state {s}: entry {p} is not a probability"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidModel(format!(
                    "sensor {sensor}, state {s}: row sums to {sum}"
                )));
            }
            let mut acc = 0.0;
            cumulative.extend(row.iter().map(|p| {
                acc += p;
                acc
            }));
        }
        Ok(SensorTable {
            alphabet,
            probs,
            cumulative,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.probs[state * self.alphabet..(state + 1) * self.alphabet]
    }

    #[inline]
    pub fn prob(&self, state: usize, value: usize) -> f64 {
        self.probs[state * self.alphabet + value]
    }

    #[inline]
    pub fn sample(&self, state: usize, rng: &mut Rng) -> usize {
        let row = &self.cumulative[state * self.alphabet..(state + 1) * self.alphabet];
        let u = rng.random::<f64>() * row[self.alphabet - 1];
        row.partition_point(|&c| c <= u).min(self.alphabet - 1)
    }

    /// Largest likelihood any state assigns to `value`.
    pub fn max_prob(&self, value: usize) -> f64 {
        (0..self.probs.len() / self.alphabet)
            .map(|s| self.prob(s, value))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    num_states: usize,
    sensors: Vec<SensorTable>,
}

impl SensorModel {
    /// Builds a model from `(alphabet, row-major table)` pairs.
    pub fn new(num_states: usize, tables: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::InvalidModel("need at least one state".into()));
        }
        let sensors = tables
            .into_iter()
            .enumerate()
            .map(|(i, (alphabet, probs))| SensorTable::new(num_states, alphabet, probs, i))
            .collect::<Result<_>>()?;
        Ok(SensorModel {
            num_states,
            sensors,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_sensors(&self) -> usize {
        self.sensors.len()
    }

    pub fn sensor(&self, i: usize) -> &SensorTable {
        &self.sensors[i]
    }

    pub fn alphabet(&self, i: usize) -> usize {
        self.sensors[i].alphabet
    }

    pub fn max_alphabet(&self) -> usize {
        self.sensors.iter().map(|t| t.alphabet).max().unwrap_or(1)
    }

    /// `|Ω|` for a selection, saturating.
    pub fn observation_count(&self, set: &[ElementId]) -> u128 {
        set.iter()
            .fold(1u128, |acc, &i| acc.saturating_mul(self.sensors[i].alphabet as u128))
    }

    pub fn check_selection(&self, set: &[ElementId]) -> Result<()> {
        let n = self.sensors.len();
        for (j, &i) in set.iter().enumerate() {
            if i >= n {
                return Err(Error::OutOfRange { id: i, n });
            }
            if set[..j].contains(&i) {
                return Err(Error::DuplicateElement(i));
            }
        }
        Ok(())
    }

    pub fn check_belief(&self, belief: &Belief) -> Result<()> {
        if belief.num_states() != self.num_states {
            return Err(Error::InvalidBelief(format!(
                "belief has {} states, model has {}",
                belief.num_states(),
                self.num_states
            )));
        }
        Ok(())
    }

    /// `Π_{i∈A} Pr(z_i | s)` for the selected values `values[j]` of `set[j]`.
    #[inline]
    pub fn joint_likelihood(&self, set: &[ElementId], values: &[usize], state: usize) -> f64 {
        set.iter()
            .zip(values)
            .map(|(&i, &v)| self.sensors[i].prob(state, v))
            .product()
    }

    /// Draws the observation of every sensor in `set` for a true `state`.
    pub fn sample_observation(&self, set: &[ElementId], state: usize, rng: &mut Rng) -> Observation {
        let mut z = vec![None; self.sensors.len()];
        for &i in set {
            z[i] = Some(self.sensors[i].sample(state, rng));
        }
        z
    }

    /// Extracts the values of `set` from a joint observation, checking shape.
    pub fn selected_values(&self, set: &[ElementId], z: &[Option<usize>]) -> Result<Vec<usize>> {
        self.check_selection(set)?;
        if z.len() != self.sensors.len() {
            return Err(Error::Shape(format!(
                "observation has {} entries, model has {} sensors",
                z.len(),
                self.sensors.len()
            )));
        }
        for (i, zi) in z.iter().enumerate() {
            let selected = set.contains(&i);
            match (selected, zi) {
                (true, None) => {
                    return Err(Error::Shape(format!("selected sensor {i} has no value")))
                }
                (false, Some(_)) => {
                    return Err(Error::Shape(format!("unselected sensor {i} reports a value")))
                }
                (true, Some(v)) if *v >= self.sensors[i].alphabet => {
                    return Err(Error::Shape(format!(
                        "sensor {i} value {v} outside alphabet of {}",
                        self.sensors[i].alphabet
                    )))
                }
                _ => {}
            }
        }
        Ok(set.iter().map(|&i| z[i].expect("checked")).collect())
    }
}

/// `Pr(z | b, A) = Σ_s b(s) Pr(z | s, A)`.
pub fn observation_likelihood(
    model: &SensorModel,
    belief: &Belief,
    set: &[ElementId],
    z: &[Option<usize>],
) -> Result<f64> {
    model.check_belief(belief)?;
    let values = model.selected_values(set, z)?;
    Ok(belief
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(s, &p)| p * model.joint_likelihood(set, &values, s))
        .sum())
}

/// Bayes posterior `b_z^A(s) ∝ Pr(z | s, A) b(s)`.
pub fn posterior_belief(
    model: &SensorModel,
    belief: &Belief,
    set: &[ElementId],
    z: &[Option<usize>],
) -> Result<Belief> {
    model.check_belief(belief)?;
    let values = model.selected_values(set, z)?;
    let weights: Vec<f64> = belief
        .probs()
        .iter()
        .enumerate()
        .map(|(s, &p)| p * model.joint_likelihood(set, &values, s))
        .collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::ImpossibleObservation);
    }
    Belief::from_weights(&weights)
}

/// Visits every joint observation of `set` with its unnormalized posterior
/// weights `w(s) = b(s) Pr(z | s, A)`.
pub fn for_each_observation(
    model: &SensorModel,
    belief: &Belief,
    set: &[ElementId],
    cap: u128,
    mut visit: impl FnMut(&[usize], &[f64]),
) -> Result<()> {
    model.check_belief(belief)?;
    model.check_selection(set)?;
    let required = model.observation_count(set);
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(set.len() + 1);
    levels.push(belief.probs().to_vec());
    for _ in set {
        levels.push(vec![0.0; model.num_states]);
    }
    let mut values = vec![0usize; set.len()];
    fn recurse(
        model: &SensorModel,
        set: &[ElementId],
        depth: usize,
        levels: &mut [Vec<f64>],
        values: &mut [usize],
        visit: &mut dyn FnMut(&[usize], &[f64]),
    ) {
        if depth == set.len() {
            visit(values, &levels[depth]);
            return;
        }
        let table = &model.sensors[set[depth]];
        for v in 0..table.alphabet {
            let (head, tail) = levels.split_at_mut(depth + 1);
            let mut any = false;
            for (s, (c, &p)) in tail[0].iter_mut().zip(head[depth].iter()).enumerate() {
                *c = if p > 0.0 { p * table.prob(s, v) } else { 0.0 };
                any |= *c > 0.0;
            }
            if !any {
                continue;
            }
            values[depth] = v;
            recurse(model, set, depth + 1, levels, values, visit);
        }
    }
    recurse(model, set, 0, &mut levels, &mut values, &mut visit);
    Ok(())
}

/// `H_b^A(s|z) = Σ_z Pr(z | b, A) H(b_z^A)`, enumerating `Ω`.
pub fn exact_conditional_entropy(model: &SensorModel, belief: &Belief, set: &[ElementId]) -> Result<f64> {
    exact_conditional_entropy_with_cap(model, belief, set, DEFAULT_OBSERVATION_CAP)
}

pub fn exact_conditional_entropy_with_cap(
    model: &SensorModel,
    belief: &Belief,
    set: &[ElementId],
    cap: u128,
) -> Result<f64> {
    if set.is_empty() {
        model.check_belief(belief)?;
        return Ok(exact_entropy(belief));
    }
    let mut total = 0.0;
    for_each_observation(model, belief, set, cap, |_, w| {
        let p: f64 = w.iter().sum();
        if p > 0.0 {
            // Pr(z) H(b_z) = -Σ w ln(w / p)
            total -= w
                .iter()
                .filter(|&&x| x > 0.0)
                .map(|&x| x * (x / p).ln())
                .sum::<f64>();
        }
    })?;
    Ok(total.max(0.0))
}

/// `H(b) - H_b^A(s|z)`, clamped at zero against round-off.
pub fn information_gain(model: &SensorModel, belief: &Belief, set: &[ElementId]) -> Result<f64> {
    if set.is_empty() {
        model.check_belief(belief)?;
        return Ok(0.0);
    }
    let ce = exact_conditional_entropy(model, belief, set)?;
    Ok((exact_entropy(belief) - ce).max(0.0))
}

/// `F(A) = -H_b^A(s|z)`.
pub fn objective_f(model: &SensorModel, belief: &Belief, set: &[ElementId]) -> Result<f64> {
    Ok(-exact_conditional_entropy(model, belief, set)?)
}
