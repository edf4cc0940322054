//! Single-target tracking on a torus grid with selectable noisy sensors.
//!
//! Each timestep the tracker forms a belief from its particles, selects `k`
//! sensors with one of the maximizers, observes, filters, and predicts the
//! most likely cell.

mod ingest;

pub use ingest::{parse_trajectories, read_trajectories};

use std::sync::Arc;
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;

use crate::entropy::{mle_belief, Belief, SampleSet};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::sensor::{
    CoarseLadder, EntropyBoundConfig, EntropyBoundProvider, EstimatedObjective, Observation,
    SensorModel,
};
use crate::submodular::{
    greedy_max, lazier_greedy_max, lazy_greedy_max, pac_greedy_max, BoundProvider, ElementId, GroundSet, PacParams,
    SelectionResult, Termination,
};

/// Layout of the synthetic coverage-sensor world.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    pub sensors: usize,
    /// Coverage radius in cells (Euclidean, wrapping).
    pub radius: f64,
    /// Probability a sensor reports the wrong coverage indicator.
    pub flip: f64,
    pub stay: f64,
    /// Seed for the sensor centers.
    pub layout_seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            width: 16,
            height: 16,
            sensors: 20,
            radius: 3.0,
            flip: 0.1,
            stay: 0.4,
            layout_seed: 0,
        }
    }
}

/// Torus grid, random-walk motion, and a sensor model over its cells.
#[derive(Debug, Clone)]
pub struct Environment {
    width: usize,
    height: usize,
    stay: f64,
    model: Arc<SensorModel>,
}

impl Environment {
    /// Coverage sensors at random centers; sensor `i` reports 1 when the
    /// target is within `radius` of its center, flipped with `flip`.
    pub fn coverage_grid(config: &GridConfig) -> Result<Self> {
        if !(0.0..=1.0).contains(&config.flip) {
            return Err(Error::param("flip", "must be in [0, 1]"));
        }
        let (w, h) = (config.width, config.height);
        if w == 0 || h == 0 {
            return Err(Error::param("width", "grid must be non-empty"));
        }
        let mut r = rng::stream(config.layout_seed, &[0x5e75]);
        let tables = (0..config.sensors)
            .map(|_| {
                let (cx, cy) = (r.random_range(0..w), r.random_range(0..h));
                let probs = (0..w * h)
                    .flat_map(|cell| {
                        let dx = wrap_distance(cell % w, cx, w) as f64;
                        let dy = wrap_distance(cell / w, cy, h) as f64;
                        if dx * dx + dy * dy <= config.radius * config.radius {
                            [config.flip, 1.0 - config.flip]
                        } else {
                            [1.0 - config.flip, config.flip]
                        }
                    })
                    .collect();
                (2, probs)
            })
            .collect();
        Environment::new(w, h, config.stay, SensorModel::new(w * h, tables)?)
    }

    pub fn new(width: usize, height: usize, stay: f64, model: SensorModel) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("width", "grid must be non-empty"));
        }
        if !(0.0..=1.0).contains(&stay) {
            return Err(Error::param("stay", "must be in [0, 1]"));
        }
        if model.num_states() != width * height {
            return Err(Error::InvalidModel(format!(
                "model has {} states, grid has {} cells",
                model.num_states(),
                width * height
            )));
        }
        Ok(Environment {
            width,
            height,
            stay,
            model: Arc::new(model),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_states(&self) -> usize {
        self.width * self.height
    }

    pub fn model(&self) -> &Arc<SensorModel> {
        &self.model
    }

    pub fn cell(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Same cell, or one of the four wrapping neighbors.
    fn neighbors(&self, cell: usize) -> [usize; 4] {
        let (x, y) = (cell % self.width, cell / self.width);
        let (w, h) = (self.width, self.height);
        [
            self.cell((x + 1) % w, y),
            self.cell((x + w - 1) % w, y),
            self.cell(x, (y + 1) % h),
            self.cell(x, (y + h - 1) % h),
        ]
    }

    /// `(next cell, probability)` pairs with repeated cells merged.
    pub fn transition_row(&self, cell: usize) -> Vec<(usize, f64)> {
        let mut row: Vec<(usize, f64)> = vec![(cell, self.stay)];
        for next in self.neighbors(cell) {
            let p = (1.0 - self.stay) / 4.0;
            match row.iter_mut().find(|(c, _)| *c == next) {
                Some(entry) => entry.1 += p,
                None => row.push((next, p)),
            }
        }
        row
    }

    pub fn can_move(&self, from: usize, to: usize) -> bool {
        self.transition_row(from).iter().any(|&(c, p)| c == to && p > 0.0)
    }

    pub fn step(&self, cell: usize, rng: &mut Rng) -> usize {
        if rng.random::<f64>() < self.stay {
            cell
        } else {
            self.neighbors(cell)[rng.random_range(0..4)]
        }
    }
}

fn wrap_distance(a: usize, b: usize, len: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(len - d)
}

/// True cells visited by the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    cells: Vec<usize>,
}

impl Trajectory {
    pub fn new(env: &Environment, cells: Vec<usize>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::param("T", "trajectory must be non-empty"));
        }
        if let Some(&c) = cells.iter().find(|&&c| c >= env.num_states()) {
            return Err(Error::StateOutOfRange {
                state: c,
                num_states: env.num_states(),
            });
        }
        if let Some(t) = (1..cells.len()).find(|&t| !env.can_move(cells[t - 1], cells[t])) {
            return Err(Error::Contract(format!(
                "step {t}: cell {} cannot follow cell {}",
                cells[t],
                cells[t - 1]
            )));
        }
        Ok(Trajectory { cells })
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Uniform start cell followed by `t_len - 1` motion steps.
pub fn generate_trajectory(env: &Environment, t_len: usize, seed: u64) -> Result<Trajectory> {
    if t_len == 0 {
        return Err(Error::param("T", "must be >= 1"));
    }
    let mut r = rng::from_seed(seed);
    let mut cells = Vec::with_capacity(t_len);
    cells.push(r.random_range(0..env.num_states()));
    for _ in 1..t_len {
        let next = env.step(*cells.last().expect("non-empty"), &mut r);
        cells.push(next);
    }
    Ok(Trajectory { cells })
}

/// Outcome of one filter update.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterStep {
    pub particles: SampleSet,
    /// The acceptance cap ran out and particles were reset uniformly.
    pub reinitialized: bool,
    /// Proposals examined by the rejection sampler.
    pub proposals: u64,
}

/// Proposals allowed per particle before the filter gives up.
pub const ACCEPTANCE_CAP_PER_PARTICLE: usize = 1000;

/// Moves every particle one motion step.
pub fn propagate(particles: &SampleSet, env: &Environment, rng: &mut Rng) -> SampleSet {
    SampleSet::new(particles.states().iter().map(|&s| env.step(s, rng)).collect())
        .expect("same size as input")
}

/// Resamples `particles` by rejection against `z`: a uniformly chosen
/// particle is kept with probability `Pr(z|s,A) / max_s Pr(z|s,A)` until
/// as many have been accepted as there are particles.
pub fn condition(
    particles: &SampleSet,
    env: &Environment,
    set: &[ElementId],
    z: &[Option<usize>],
    rng: &mut Rng,
) -> Result<FilterStep> {
    let model = env.model();
    let values = model.selected_values(set, z)?;
    let p_count = particles.len();
    if set.is_empty() {
        return Ok(FilterStep {
            particles: particles.clone(),
            reinitialized: false,
            proposals: 0,
        });
    }
    let bound: f64 = set
        .iter()
        .zip(&values)
        .map(|(&i, &v)| model.sensor(i).max_prob(v))
        .product();
    let mut accept = vec![f64::NAN; env.num_states()];
    let mut kept = Vec::with_capacity(p_count);
    let mut proposals = 0u64;
    let cap = (p_count * ACCEPTANCE_CAP_PER_PARTICLE) as u64;
    if bound > 0.0 {
        while kept.len() < p_count && proposals < cap {
            proposals += 1;
            let s = particles.states()[rng.random_range(0..p_count)];
            if accept[s].is_nan() {
                accept[s] = model.joint_likelihood(set, &values, s) / bound;
            }
            if rng.random::<f64>() < accept[s] {
                kept.push(s);
            }
        }
    }
    if kept.len() < p_count {
        let fresh = (0..p_count).map(|_| rng.random_range(0..env.num_states())).collect();
        return Ok(FilterStep {
            particles: SampleSet::new(fresh)?,
            reinitialized: true,
            proposals,
        });
    }
    Ok(FilterStep {
        particles: SampleSet::new(kept)?,
        reinitialized: false,
        proposals,
    })
}

/// Motion step followed by conditioning on `z`.
pub fn particle_filter_step(
    particles: &SampleSet,
    env: &Environment,
    set: &[ElementId],
    z: &[Option<usize>],
    seed: u64,
) -> Result<FilterStep> {
    let mut r = rng::from_seed(seed);
    let moved = propagate(particles, env, &mut r);
    condition(&moved, env, set, z, &mut r)
}

/// Mode of the particle histogram, lowest cell on ties.
pub fn predict_state(particles: &SampleSet, num_states: usize) -> Result<usize> {
    Ok(mle_belief(particles, num_states)?.mode())
}

/// Sensor-selection strategy used at every timestep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Maximizer {
    /// Greedy over sampled entropy estimates at a fixed budget.
    Greedy,
    /// Lazy greedy over the same estimates.
    Lazy,
    /// Lazier greedy over the same estimates, `sample_size` candidates per step.
    Lazier { sample_size: usize },
    /// PAC greedy driven by sampled confidence bounds.
    Pac,
}

impl Maximizer {
    pub fn name(&self) -> &'static str {
        match self {
            Maximizer::Greedy => "greedy",
            Maximizer::Lazy => "lazy",
            Maximizer::Lazier { .. } => "lazier",
            Maximizer::Pac => "pac",
        }
    }
}

/// Budgets for the tracker and its maximizers.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingParams {
    pub particles: usize,
    /// Prior samples per estimate for greedy and lazier.
    pub estimate_m: usize,
    /// Draws per estimate for greedy and lazier.
    pub estimate_draws: usize,
    /// Budgets for the pac bounds; the seed is replaced per timestep.
    pub bounds: EntropyBoundConfig,
    /// `None` picks `ε₁` from the bound widths, see [`auto_epsilon`].
    pub epsilon1: Option<f64>,
    pub threshold: f64,
    pub max_tighten_rounds: usize,
}

impl Default for TrackingParams {
    fn default() -> Self {
        TrackingParams {
            particles: 1024,
            estimate_m: 1024,
            estimate_draws: 4096,
            bounds: EntropyBoundConfig::default(),
            epsilon1: None,
            threshold: 0.05,
            max_tighten_rounds: 3,
        }
    }
}

/// `η_u + η_l + ln(1 + (ψ-1)/m_coarse) + ln(1 + (ψ-1)/m_fine)`: the fixed
/// part of the bound width plus the largest downward bias of the fine-side
/// estimate.
pub fn auto_epsilon(provider: &EntropyBoundProvider, config: &EntropyBoundConfig, support: usize) -> f64 {
    let fine_bias = ((support.max(1) - 1) as f64 / config.m_fine as f64).ln_1p();
    provider.fixed_width() + fine_bias
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub truth: usize,
    pub selected: Vec<ElementId>,
    pub observation: Observation,
    pub prediction: usize,
    pub correct: bool,
    /// Belief updates spent by the maximizer.
    pub work: u64,
    /// Prior samples drawn by the maximizer.
    pub prior_samples: u64,
    pub reinitialized: bool,
    /// Pac iterations that stopped before a single candidate remained.
    pub unconverged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub trajectory: usize,
    pub steps: Vec<StepRecord>,
    pub correct: usize,
    pub work: u64,
    pub wall_ms: f64,
}

impl RunRecord {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.steps.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub maximizer: Maximizer,
    pub k: usize,
    pub runs: Vec<RunRecord>,
}

impl ExperimentRecord {
    pub fn accuracy(&self) -> f64 {
        let steps: usize = self.runs.iter().map(|r| r.steps.len()).sum();
        let correct: usize = self.runs.iter().map(|r| r.correct).sum();
        correct as f64 / steps.max(1) as f64
    }

    pub fn work(&self) -> u64 {
        self.runs.iter().map(|r| r.work).sum()
    }
}

// Stream labels. Observations and filtering depend only on (trajectory, t),
// so runs with different maximizers share them.
const TRAJECTORY: u64 = 1;
const OBSERVE: u64 = 2;
const FILTER: u64 = 3;
const SELECT: u64 = 4;
const INIT: u64 = 5;

/// Generates `num_trajectories` trajectories of length `t_len` and tracks
/// each with `maximizer`.
pub fn run_tracking_experiment(
    env: &Environment,
    maximizer: Maximizer,
    k: usize,
    params: &TrackingParams,
    t_len: usize,
    num_trajectories: usize,
    seed: u64,
) -> Result<ExperimentRecord> {
    let trajectories = (0..num_trajectories)
        .map(|j| generate_trajectory(env, t_len, rng::derive_seed(seed, &[TRAJECTORY, j as u64])))
        .collect::<Result<Vec<_>>>()?;
    track_trajectories(env, &trajectories, maximizer, k, params, seed)
}

/// Tracks each supplied trajectory independently; trajectories run in
/// parallel with isolated random streams.
pub fn track_trajectories(
    env: &Environment,
    trajectories: &[Trajectory],
    maximizer: Maximizer,
    k: usize,
    params: &TrackingParams,
    seed: u64,
) -> Result<ExperimentRecord> {
    if k > env.model().num_sensors() {
        return Err(Error::param(
            "k",
            format!("k = {k} exceeds the {} sensors", env.model().num_sensors()),
        ));
    }
    if params.particles == 0 {
        return Err(Error::param("particles", "must be >= 1"));
    }
    if let Maximizer::Lazier { sample_size } = maximizer {
        if sample_size == 0 || sample_size > env.model().num_sensors() {
            return Err(Error::param("sample_size", "must be in 1..=n"));
        }
    }
    params.bounds.validate()?;
    let ladder = match maximizer {
        Maximizer::Pac => Some(Arc::new(CoarseLadder::new(Arc::clone(env.model()), params.bounds.d0)?)),
        _ => None,
    };
    let runs = trajectories
        .par_iter()
        .enumerate()
        .map(|(j, traj)| track_one(env, traj, j, maximizer, k, params, ladder.as_ref(), seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentRecord { maximizer, k, runs })
}

#[allow(clippy::too_many_arguments)]
fn track_one(
    env: &Environment,
    traj: &Trajectory,
    j: usize,
    maximizer: Maximizer,
    k: usize,
    params: &TrackingParams,
    ladder: Option<&Arc<CoarseLadder>>,
    seed: u64,
) -> Result<RunRecord> {
    let start = Instant::now();
    let model = env.model();
    let s_count = env.num_states();
    let mut init = rng::stream(seed, &[INIT, j as u64]);
    let mut particles =
        SampleSet::new((0..params.particles).map(|_| init.random_range(0..s_count)).collect())?;
    let mut steps = Vec::with_capacity(traj.len());
    for (t, &truth) in traj.cells().iter().enumerate() {
        let path = [j as u64, t as u64];
        let mut filter_rng = rng::stream(seed, &[FILTER, path[0], path[1]]);
        if t > 0 {
            particles = propagate(&particles, env, &mut filter_rng);
        }
        let belief = mle_belief(&particles, s_count)?;
        let select_seed = rng::derive_seed(seed, &[SELECT, path[0], path[1]]);
        let (selected, work, prior_samples, unconverged) =
            select(model, ladder, belief, maximizer, k, params, select_seed)?;
        // one stream per (trajectory, t, sensor): common random numbers
        let mut z = vec![None; model.num_sensors()];
        for &i in &selected {
            let mut r = rng::stream(seed, &[OBSERVE, path[0], path[1], i as u64]);
            z[i] = Some(model.sensor(i).sample(truth, &mut r));
        }
        let filtered = condition(&particles, env, &selected, &z, &mut filter_rng)?;
        particles = filtered.particles;
        let prediction = predict_state(&particles, s_count)?;
        steps.push(StepRecord {
            truth,
            selected,
            observation: z,
            prediction,
            correct: prediction == truth,
            work,
            prior_samples,
            reinitialized: filtered.reinitialized,
            unconverged,
        });
    }
    Ok(RunRecord {
        trajectory: j,
        correct: steps.iter().filter(|s| s.correct).count(),
        work: steps.iter().map(|s| s.work).sum(),
        steps,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn select(
    model: &SensorModel,
    ladder: Option<&Arc<CoarseLadder>>,
    belief: Belief,
    maximizer: Maximizer,
    k: usize,
    params: &TrackingParams,
    seed: u64,
) -> Result<(Vec<ElementId>, u64, u64, usize)> {
    if k == 0 || model.num_sensors() == 0 {
        return Ok((Vec::new(), 0, 0, 0));
    }
    let ground = GroundSet::new(model.num_sensors())?;
    let support = belief.support();
    let chosen = |r: SelectionResult| r.chosen.ids().to_vec();
    match maximizer {
        Maximizer::Greedy | Maximizer::Lazy | Maximizer::Lazier { .. } => {
            let mut oracle =
                EstimatedObjective::new(model, belief, params.estimate_m, params.estimate_draws, seed)?;
            let result = match maximizer {
                Maximizer::Lazier { sample_size } => {
                    lazier_greedy_max(&mut oracle, ground, k, sample_size, seed)?
                }
                Maximizer::Lazy => lazy_greedy_max(&mut oracle, ground, k)?,
                _ => greedy_max(&mut oracle, ground, k)?,
            };
            Ok((chosen(result), oracle.belief_updates(), oracle.prior_samples(), 0))
        }
        Maximizer::Pac => {
            let ladder = ladder.expect("built for pac runs");
            let config = EntropyBoundConfig {
                seed,
                ..params.bounds.clone()
            };
            let mut provider = EntropyBoundProvider::new(Arc::clone(ladder), belief, config.clone())?;
            let epsilon1 = match params.epsilon1 {
                Some(e) => e,
                None => auto_epsilon(&provider, &config, config.support.unwrap_or(support)),
            };
            let pac = PacParams::new(epsilon1, params.threshold, params.max_tighten_rounds)?;
            let result = pac_greedy_max(&mut provider, ground, k, &pac)?;
            let unconverged = result
                .iterations
                .iter()
                .filter(|it| it.termination != Some(Termination::SingleCandidate))
                .count();
            let prior = provider.prior_samples();
            Ok((chosen(result), provider.work(), prior, unconverged))
        }
    }
}
