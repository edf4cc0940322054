use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use pacgreedy::rng;
use pacgreedy::sensor::{
    information_gain, worlds, CoarseLadder, EntropyBoundConfig, EntropyBoundProvider,
    EstimatedObjective, InformationGainOracle,
};
use pacgreedy::submodular::instances::CoverageOracle;
use pacgreedy::submodular::{
    brute_force_max, greedy_max, lazier_greedy_max, lazy_greedy_max, pac_greedy_max,
    BoundProvider, ElementId, ExactBounds, ExactOracle, GaussianBounds, GroundSet, PacParams,
};
use pacgreedy::tracking::{self, auto_epsilon, Environment, GridConfig, Maximizer, TrackingParams};

use crate::config::{MaximizerKind, OracleKind, Resolved, Scenario};
use crate::output::Row;
use crate::BenchError;

/// Metrics of one trial (instance or trajectory).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub metrics: Vec<(&'static str, f64)>,
}

impl TrialOutcome {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(m, _)| *m == name).map(|&(_, v)| v)
    }
}

/// All trials of one (maximizer, k) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub maximizer: MaximizerKind,
    pub k: usize,
    pub trials: Vec<TrialOutcome>,
}

/// Batch size for noisy synthetic coverage bounds.
const GAUSSIAN_BATCH: u64 = 4;

/// Runs every (maximizer, k) combination on shared seeds.
pub fn run_cells(res: &Resolved) -> Result<Vec<Cell>, BenchError> {
    let mut cells = Vec::new();
    let env = match res.scenario {
        Scenario::Tracking => Some(environment(res)?),
        _ => None,
    };
    for &maximizer in &res.maximizers {
        for &k in &res.ks {
            let trials = match res.scenario {
                Scenario::Tracking => tracking_trials(res, env.as_ref().expect("built"), maximizer, k)?,
                scenario => (0..res.raw.trials)
                    .into_par_iter()
                    .map(|trial| {
                        let start = Instant::now();
                        let mut metrics = match scenario {
                            Scenario::Coverage => coverage_trial(res, maximizer, k, trial)?,
                            _ => sensor_trial(res, maximizer, k, trial)?,
                        };
                        if res.raw.timing {
                            metrics.push(("wall-ms", start.elapsed().as_secs_f64() * 1e3));
                        }
                        Ok(TrialOutcome { trial, metrics })
                    })
                    .collect::<Result<Vec<_>, BenchError>>()?,
            };
            cells.push(Cell { maximizer, k, trials });
        }
    }
    Ok(cells)
}

fn trial_seed(res: &Resolved, trial: usize) -> u64 {
    rng::derive_seed(res.raw.seed, &[trial as u64])
}

fn pac_params(res: &Resolved, epsilon1: f64) -> Result<PacParams, BenchError> {
    Ok(PacParams::new(epsilon1, res.raw.threshold, res.raw.max_tighten_rounds)?)
}

fn bound_config(res: &Resolved, seed: u64) -> EntropyBoundConfig {
    let c = &res.raw;
    EntropyBoundConfig {
        m_fine: c.m_fine,
        m_coarse: c.m_coarse,
        draws_fine: c.draws_fine,
        draws_coarse: c.draws_coarse,
        d0: c.d0,
        delta_upper: c.delta_upper,
        delta_lower: c.delta_lower,
        seed,
        ..EntropyBoundConfig::default()
    }
}

/// Greedy, lazy, lazier, or brute force on an exact oracle.
fn select_exact<O: ExactOracle>(
    res: &Resolved,
    oracle: &mut O,
    kind: MaximizerKind,
    k: usize,
    seed: u64,
) -> Result<Vec<ElementId>, BenchError> {
    let ground = GroundSet::new(res.n)?;
    let chosen = match kind {
        MaximizerKind::Greedy => greedy_max(oracle, ground, k)?.chosen,
        MaximizerKind::Lazy => lazy_greedy_max(oracle, ground, k)?.chosen,
        MaximizerKind::Lazier => lazier_greedy_max(oracle, ground, k, res.sample_size, seed)?.chosen,
        MaximizerKind::Brute => brute_force_max(oracle, ground, k)?.0,
        MaximizerKind::Pac => unreachable!("pac runs on bounds"),
    };
    Ok(chosen.ids().to_vec())
}

fn coverage_trial(
    res: &Resolved,
    kind: MaximizerKind,
    k: usize,
    trial: usize,
) -> Result<Vec<(&'static str, f64)>, BenchError> {
    let seed = trial_seed(res, trial);
    let mut r = rng::from_seed(seed);
    let oracle = CoverageOracle::random(res.n, res.raw.universe, res.raw.density, &mut r);
    let select_seed = rng::derive_seed(seed, &[1]);
    let (chosen, work) = if kind == MaximizerKind::Pac {
        let params = pac_params(res, res.raw.epsilon1.unwrap_or(0.0))?;
        let ground = GroundSet::new(res.n)?;
        if res.raw.sigma > 0.0 {
            let mut b = GaussianBounds::new(
                oracle.clone(),
                res.raw.sigma,
                res.raw.delta_upper,
                res.raw.delta_lower,
                GAUSSIAN_BATCH,
                select_seed,
            )?;
            let chosen = pac_greedy_max(&mut b, ground, k, &params)?.chosen;
            (chosen.ids().to_vec(), b.work())
        } else {
            let mut b = ExactBounds::new(oracle.clone());
            let chosen = pac_greedy_max(&mut b, ground, k, &params)?.chosen;
            (chosen.ids().to_vec(), b.work())
        }
    } else {
        let mut o = oracle.clone();
        let chosen = select_exact(res, &mut o, kind, k, select_seed)?;
        (chosen, o.evaluations())
    };
    let mut metrics = vec![("objective", oracle.value(&chosen)), ("work", work as f64)];
    metrics.extend(selection_mask(&chosen));
    Ok(metrics)
}

fn sensor_trial(
    res: &Resolved,
    kind: MaximizerKind,
    k: usize,
    trial: usize,
) -> Result<Vec<(&'static str, f64)>, BenchError> {
    let seed = trial_seed(res, trial);
    let mut r = rng::from_seed(seed);
    let model = worlds::random_world(res.raw.states, res.n, 2..=3, &mut r);
    let belief = worlds::random_belief(res.raw.states, &mut r);
    let select_seed = rng::derive_seed(seed, &[1]);
    let (chosen, work) = match (kind, res.raw.oracle) {
        (MaximizerKind::Pac, _) => {
            let config = bound_config(res, select_seed);
            let ladder = Arc::new(CoarseLadder::new(Arc::new(model.clone()), config.d0)?);
            let mut p = EntropyBoundProvider::new(ladder, belief.clone(), config.clone())?;
            let epsilon1 = res
                .raw
                .epsilon1
                .unwrap_or_else(|| auto_epsilon(&p, &config, belief.support()));
            let ground = GroundSet::new(res.n)?;
            let chosen = pac_greedy_max(&mut p, ground, k, &pac_params(res, epsilon1)?)?.chosen;
            (chosen.ids().to_vec(), p.work())
        }
        (MaximizerKind::Brute, _) | (_, OracleKind::Exact) => {
            let mut o = InformationGainOracle::new(&model, belief.clone())?;
            let chosen = select_exact(res, &mut o, kind, k, select_seed)?;
            (chosen, o.evaluations())
        }
        (_, OracleKind::Sampled) => {
            let mut o = EstimatedObjective::new(
                &model,
                belief.clone(),
                res.raw.estimate_m,
                res.raw.estimate_draws,
                select_seed,
            )?;
            let chosen = select_exact(res, &mut o, kind, k, select_seed)?;
            (chosen, o.belief_updates())
        }
    };
    let mut metrics = vec![
        ("objective", information_gain(&model, &belief, &chosen)?),
        ("work", work as f64),
    ];
    metrics.extend(selection_mask(&chosen));
    Ok(metrics)
}

/// `Σ 2^i` over the chosen ids, while it is exact in an `f64`.
fn selection_mask(chosen: &[ElementId]) -> Option<(&'static str, f64)> {
    if chosen.iter().any(|&i| i >= 53) {
        return None;
    }
    Some(("selection", chosen.iter().map(|&i| (1u64 << i) as f64).sum()))
}

fn environment(res: &Resolved) -> Result<Environment, BenchError> {
    let c = &res.raw;
    Ok(Environment::coverage_grid(&GridConfig {
        width: c.width,
        height: c.height,
        sensors: res.n,
        radius: c.radius,
        flip: c.flip,
        stay: c.stay,
        layout_seed: c.layout_seed,
    })?)
}

fn tracking_trials(
    res: &Resolved,
    env: &Environment,
    kind: MaximizerKind,
    k: usize,
) -> Result<Vec<TrialOutcome>, BenchError> {
    let c = &res.raw;
    let maximizer = match kind {
        MaximizerKind::Greedy => Maximizer::Greedy,
        MaximizerKind::Lazy => Maximizer::Lazy,
        MaximizerKind::Lazier => Maximizer::Lazier {
            sample_size: res.sample_size,
        },
        MaximizerKind::Pac => Maximizer::Pac,
        MaximizerKind::Brute => {
            return Err(BenchError::Config("maximizer: brute is not available for tracking".into()))
        }
    };
    let params = TrackingParams {
        particles: c.particles,
        estimate_m: c.estimate_m,
        estimate_draws: c.estimate_draws,
        bounds: bound_config(res, 0),
        epsilon1: c.epsilon1,
        threshold: c.threshold,
        max_tighten_rounds: c.max_tighten_rounds,
    };
    let record = tracking::run_tracking_experiment(env, maximizer, k, &params, c.steps, c.trajectories, c.seed)?;
    Ok(record
        .runs
        .iter()
        .map(|run| {
            let mut metrics = vec![
                ("accuracy", run.accuracy()),
                ("work", run.work as f64),
                ("prior-samples", run.steps.iter().map(|s| s.prior_samples).sum::<u64>() as f64),
                ("reinitializations", run.steps.iter().filter(|s| s.reinitialized).count() as f64),
            ];
            if c.timing {
                metrics.push(("wall-ms", run.wall_ms));
            }
            TrialOutcome {
                trial: run.trajectory,
                metrics,
            }
        })
        .collect())
}

/// Long-format rows for every trial metric.
pub fn run_rows(res: &Resolved, cells: &[Cell]) -> Vec<Row> {
    let mut rows = Vec::new();
    for cell in cells {
        for t in &cell.trials {
            for &(metric, value) in &t.metrics {
                rows.push(Row {
                    scenario: res.scenario.name().into(),
                    maximizer: cell.maximizer.name().into(),
                    k: cell.k,
                    seed: res.raw.seed,
                    trial: t.trial.to_string(),
                    metric: metric.into(),
                    value,
                });
            }
        }
    }
    rows
}

/// Paired rows of every maximizer against the first one listed:
/// per trial `work-ratio` and `accuracy-delta` (tracking) or
/// `objective-delta`, then `mean` rows for both plus `work-wins`, the
/// fraction of trials where the challenger did strictly less work.
pub fn compare_rows(res: &Resolved, cells: &[Cell]) -> Result<Vec<Row>, BenchError> {
    if res.maximizers.len() < 2 {
        return Err(BenchError::Config("maximizer: compare needs at least two".into()));
    }
    let quality = match res.scenario {
        Scenario::Tracking => "accuracy",
        _ => "objective",
    };
    let delta_name = match res.scenario {
        Scenario::Tracking => "accuracy-delta",
        _ => "objective-delta",
    };
    let baseline = res.maximizers[0];
    let mut rows = run_rows(res, cells);
    for &k in &res.ks {
        let find = |m: MaximizerKind| cells.iter().find(|c| c.maximizer == m && c.k == k).expect("ran");
        let base = find(baseline);
        for &challenger in &res.maximizers[1..] {
            let cell = find(challenger);
            let label = format!("{}-vs-{}", challenger.name(), baseline.name());
            let row = |trial: String, metric: &str, value: f64| Row {
                scenario: res.scenario.name().into(),
                maximizer: label.clone(),
                k,
                seed: res.raw.seed,
                trial,
                metric: metric.into(),
                value,
            };
            let mut ratios = Vec::new();
            let mut deltas = Vec::new();
            let mut wins = 0usize;
            for (b, c) in base.trials.iter().zip(&cell.trials) {
                let (bw, cw) = (b.metric("work").unwrap_or(0.0), c.metric("work").unwrap_or(0.0));
                let ratio = if bw == 0.0 && cw == 0.0 { 1.0 } else { cw / bw };
                let delta = c.metric(quality).unwrap_or(0.0) - b.metric(quality).unwrap_or(0.0);
                wins += (cw < bw) as usize;
                rows.push(row(b.trial.to_string(), "work-ratio", ratio));
                rows.push(row(b.trial.to_string(), delta_name, delta));
                ratios.push(ratio);
                deltas.push(delta);
            }
            let n = ratios.len().max(1) as f64;
            rows.push(row("mean".into(), "work-ratio", ratios.iter().sum::<f64>() / n));
            rows.push(row("mean".into(), delta_name, deltas.iter().sum::<f64>() / n));
            rows.push(row("mean".into(), "work-wins", wins as f64 / n));
        }
    }
    Ok(rows)
}
