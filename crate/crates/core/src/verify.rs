//! Statistical and exact property suites over the library's guarantees.
//!
//! Every suite is deterministic given its seed and reports the statistics
//! it measured alongside a pass/fail verdict.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::entropy::{bias_floor, exact_entropy, paninski_delta, plugin_entropy, Belief, SampleSet};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::sensor::{
    coarse_model, exact_conditional_entropy, worlds, CoarseLadder, CoarseningMap,
    EntropyBoundConfig, EntropyBoundProvider, InformationGainOracle, SensorModel,
};
use crate::submodular::instances::CoverageOracle;
use crate::submodular::{
    brute_force_max, greedy_max, lazy_greedy_max, pac_greedy_max, BoundProvider, ExactOracle,
    GaussianBounds, GroundSet, PacParams,
};

const NEMHAUSER: f64 = 1.0 - 1.0 / std::f64::consts::E;

/// One measured statistic and the limit it was held to.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub observed: f64,
    pub limit: f64,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: observed {:.6}, limit {:.6}",
            if self.passed { "PASS" } else { "FAIL" },
            self.label,
            self.observed,
            self.limit
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "{}: {}", self.suite, if self.passed() { "pass" } else { "fail" })
    }
}

fn at_least(label: impl Into<String>, observed: f64, limit: f64) -> Check {
    Check {
        label: label.into(),
        observed,
        limit,
        passed: observed >= limit,
    }
}

fn at_most(label: impl Into<String>, observed: f64, limit: f64) -> Check {
    Check {
        label: label.into(),
        observed,
        limit,
        passed: observed <= limit,
    }
}

fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Nemhauser,
    PacBound,
    EntropyBias,
    Concentration,
    Coarsening,
    CoverageOfBounds,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Nemhauser,
        Suite::PacBound,
        Suite::EntropyBias,
        Suite::Concentration,
        Suite::Coarsening,
        Suite::CoverageOfBounds,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Nemhauser => "nemhauser",
            Suite::PacBound => "pac-bound",
            Suite::EntropyBias => "entropy-bias",
            Suite::Concentration => "concentration",
            Suite::Coarsening => "coarsening",
            Suite::CoverageOfBounds => "coverage-of-bounds",
        }
    }

    /// Runs the suite at its default size.
    pub fn run(&self, seed: u64) -> Result<SuiteReport> {
        match self {
            Suite::Nemhauser => nemhauser(&NemhauserConfig { seed, ..Default::default() }),
            Suite::PacBound => pac_bound(&PacBoundConfig { seed, ..Default::default() }),
            Suite::EntropyBias => entropy_bias(&EntropyBiasConfig { seed, ..Default::default() }),
            Suite::Concentration => concentration(&ConcentrationConfig { seed, ..Default::default() }),
            Suite::Coarsening => coarsening(&CoarseningConfig { seed, ..Default::default() }),
            Suite::CoverageOfBounds => coverage_of_bounds(&CoverageConfig { seed, ..Default::default() }),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::param("suite", format!("unknown suite `{s}`")))
    }
}

/// Random sensor world with a random belief, small enough to enumerate.
pub fn random_sensor_instance(n: usize, rng: &mut Rng) -> (SensorModel, Belief) {
    let states = rng.random_range(3..=6);
    let model = worlds::random_world(states, n, 2..=3, rng);
    let belief = worlds::random_belief(states, rng);
    (model, belief)
}

#[derive(Debug, Clone)]
pub struct NemhauserConfig {
    pub instances: usize,
    pub max_n: usize,
    pub max_k: usize,
    pub seed: u64,
}

impl Default for NemhauserConfig {
    fn default() -> Self {
        NemhauserConfig {
            instances: 200,
            max_n: 12,
            max_k: 4,
            seed: 0,
        }
    }
}

/// Greedy against brute force on coverage and information-gain instances.
/// Also checks that lazy greedy makes the same picks.
pub fn nemhauser(config: &NemhauserConfig) -> Result<SuiteReport> {
    let mut min_ratio = f64::INFINITY;
    let mut violations = 0usize;
    let mut lazy_mismatches = 0usize;
    for i in 0..config.instances {
        let mut r = rng::stream(config.seed, &[i as u64]);
        let n = r.random_range(2..=config.max_n);
        let k = r.random_range(1..=config.max_k.min(n));
        let outcome = if i % 2 == 0 {
            greedy_vs_optimum(CoverageOracle::random(n, 30, 0.2, &mut r), k)?
        } else {
            let (model, belief) = random_sensor_instance(n, &mut r);
            greedy_vs_optimum(InformationGainOracle::new(&model, belief)?, k)?
        };
        if outcome.greedy < NEMHAUSER * outcome.best - 1e-9 {
            violations += 1;
        }
        if outcome.best > 0.0 {
            min_ratio = min_ratio.min(outcome.greedy / outcome.best);
        }
        lazy_mismatches += !outcome.lazy_agrees as usize;
    }
    Ok(SuiteReport {
        suite: Suite::Nemhauser,
        checks: vec![
            at_most("violations of F(greedy) >= (1-1/e) F(opt)", violations as f64, 0.0),
            at_least("min F(greedy)/F(opt)", min_ratio, NEMHAUSER),
            at_most("lazy/greedy pick mismatches", lazy_mismatches as f64, 0.0),
        ],
    })
}

struct GreedyOutcome {
    greedy: f64,
    best: f64,
    lazy_agrees: bool,
}

fn greedy_vs_optimum<O: ExactOracle + Clone>(oracle: O, k: usize) -> Result<GreedyOutcome> {
    let ground = GroundSet::new(oracle.ground_size())?;
    let greedy = greedy_max(&mut oracle.clone(), ground, k)?;
    let lazy = lazy_greedy_max(&mut oracle.clone(), ground, k)?;
    let (_, best) = brute_force_max(&mut oracle.clone(), ground, k)?;
    Ok(GreedyOutcome {
        greedy: oracle.clone().evaluate(greedy.chosen.ids())?,
        best,
        lazy_agrees: greedy.chosen.ids() == lazy.chosen.ids(),
    })
}

#[derive(Debug, Clone)]
pub struct PacBoundConfig {
    pub trials: usize,
    pub max_n: usize,
    pub max_k: usize,
    /// Per-query failure probability of each bound.
    pub delta: f64,
    pub sigma: f64,
    pub epsilon1: f64,
    pub seed: u64,
}

impl Default for PacBoundConfig {
    fn default() -> Self {
        PacBoundConfig {
            trials: 500,
            max_n: 8,
            max_k: 3,
            delta: 0.002,
            sigma: 0.1,
            epsilon1: 0.02,
            seed: 0,
        }
    }
}

/// PAC greedy on noisy bounds of known confidence against the optimum.
///
/// A trial violates when `F(A) < (1-1/e) F(A*) - k ε₁`. Each iteration's
/// failure probability `δ₁` is bounded by a union over the bound states it
/// consulted, `(candidates + tightens) (δ_u + δ_l)`; the violation rate
/// must stay below the mean of `Σ δ₁` plus three binomial standard errors.
pub fn pac_bound(config: &PacBoundConfig) -> Result<SuiteReport> {
    let mut violations = 0usize;
    let mut budget = 0.0;
    for trial in 0..config.trials {
        let mut r = rng::stream(config.seed, &[trial as u64]);
        let n = r.random_range(2..=config.max_n);
        let k = r.random_range(1..=config.max_k.min(n));
        let (model, belief) = random_sensor_instance(n, &mut r);
        let oracle = InformationGainOracle::new(&model, belief)?;
        let ground = GroundSet::new(n)?;
        let (_, best) = brute_force_max(&mut oracle.clone(), ground, k)?;
        let mut bounds = GaussianBounds::new(
            oracle.clone(),
            config.sigma,
            config.delta,
            config.delta,
            4,
            rng::derive_seed(config.seed, &[trial as u64, 1]),
        )?;
        let params = PacParams::new(config.epsilon1, 1e-4, 64)?;
        let result = pac_greedy_max(&mut bounds, ground, k, &params)?;
        let value = oracle.clone().evaluate(result.chosen.ids())?;
        if value < NEMHAUSER * best - k as f64 * config.epsilon1 - 1e-9 {
            violations += 1;
        }
        budget += result
            .iterations
            .iter()
            .map(|it| ((it.candidates + it.tighten_calls) as f64 * 2.0 * config.delta).min(1.0))
            .sum::<f64>()
            .min(1.0);
    }
    let allowed_rate = budget / config.trials as f64;
    let rate = violations as f64 / config.trials as f64;
    Ok(SuiteReport {
        suite: Suite::PacBound,
        checks: vec![at_most(
            "violation rate of F(A) >= (1-1/e) F(A*) - k eps1",
            rate,
            allowed_rate + 3.0 * binomial_se(allowed_rate.min(1.0), config.trials),
        )],
    })
}

#[derive(Debug, Clone)]
pub struct EntropyBiasConfig {
    pub supports: Vec<usize>,
    pub sample_sizes: Vec<usize>,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for EntropyBiasConfig {
    fn default() -> Self {
        EntropyBiasConfig {
            supports: vec![2, 10, 50],
            sample_sizes: vec![20, 50, 200],
            resamples: 10_000,
            seed: 0,
        }
    }
}

/// A belief with exactly `support` states of random positive mass.
pub fn belief_with_support(support: usize, rng: &mut Rng) -> Belief {
    let weights: Vec<f64> = (0..support).map(|_| rng.random::<f64>() + 0.05).collect();
    Belief::from_weights(&weights).expect("positive weights")
}

/// Monte Carlo mean of the plug-in entropy lies in `[H + μ_M, H]` within
/// three standard errors.
pub fn entropy_bias(config: &EntropyBiasConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for &support in &config.supports {
        let mut r = rng::stream(config.seed, &[support as u64]);
        let belief = belief_with_support(support, &mut r);
        let h = exact_entropy(&belief);
        for &m in &config.sample_sizes {
            let (mean, se) = plugin_mean(&belief, m, config.resamples, &mut r)?;
            let floor = bias_floor(m, support)?;
            let bias = mean - h;
            checks.push(at_most(
                format!("support {support}, M {m}: mean bias - 3 SE"),
                bias - 3.0 * se,
                0.0,
            ));
            checks.push(at_least(
                format!("support {support}, M {m}: mean bias + 3 SE - mu_M"),
                bias + 3.0 * se - floor,
                0.0,
            ));
        }
    }
    Ok(SuiteReport {
        suite: Suite::EntropyBias,
        checks,
    })
}

fn plugin_mean(belief: &Belief, m: usize, resamples: usize, r: &mut Rng) -> Result<(f64, f64)> {
    let values = plugin_samples(belief, m, resamples, r)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

fn plugin_samples(belief: &Belief, m: usize, resamples: usize, r: &mut Rng) -> Result<Vec<f64>> {
    (0..resamples)
        .map(|_| plugin_entropy(&SampleSet::draw(belief, m, r)?, belief.num_states()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct ConcentrationConfig {
    pub sample_sizes: Vec<usize>,
    pub etas: Vec<f64>,
    pub support: usize,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        ConcentrationConfig {
            sample_sizes: vec![20, 100, 500, 2000],
            etas: vec![0.02, 0.05, 0.1, 0.2, 0.5, 1.0],
            support: 10,
            resamples: 10_000,
            seed: 0,
        }
    }
}

/// Frequency of `|Ĥ - mean(Ĥ)| >= η` never exceeds the clipped tail bound.
pub fn concentration(config: &ConcentrationConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut r = rng::stream(config.seed, &[0xc0]);
    let belief = belief_with_support(config.support, &mut r);
    for &m in &config.sample_sizes {
        let values = plugin_samples(&belief, m, config.resamples, &mut r)?;
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        for &eta in &config.etas {
            let freq = values.iter().filter(|v| (*v - mean).abs() >= eta).count() as f64
                / values.len() as f64;
            checks.push(at_most(format!("M {m}, eta {eta}: deviation frequency"), freq, paninski_delta(m, eta)?));
        }
    }
    Ok(SuiteReport {
        suite: Suite::Concentration,
        checks,
    })
}

#[derive(Debug, Clone)]
pub struct CoarseningConfig {
    pub instances: usize,
    pub seed: u64,
}

impl Default for CoarseningConfig {
    fn default() -> Self {
        CoarseningConfig {
            instances: 1000,
            seed: 0,
        }
    }
}

/// A random total map of each alphabet onto `1..=alphabet` clusters.
pub fn random_coarsening(model: &SensorModel, rng: &mut Rng) -> Result<CoarseningMap> {
    let maps = (0..model.num_sensors())
        .map(|i| {
            let a = model.alphabet(i);
            let k = rng.random_range(1..=a);
            let mut map: Vec<usize> = (0..a).map(|v| if v < k { v } else { rng.random_range(0..k) }).collect();
            // shuffle which values land in which cluster
            for v in (1..a).rev() {
                map.swap(v, rng.random_range(0..=v));
            }
            map
        })
        .collect();
    CoarseningMap::from_maps(model, maps)
}

/// Coarsened observations never lower the exact conditional entropy.
pub fn coarsening(config: &CoarseningConfig) -> Result<SuiteReport> {
    let mut violations = 0usize;
    let mut min_gap = f64::INFINITY;
    for i in 0..config.instances {
        let mut r = rng::stream(config.seed, &[i as u64]);
        let n = r.random_range(1..=5);
        let states = r.random_range(2..=6);
        let model = worlds::random_world(states, n, 2..=5, &mut r);
        let belief = worlds::random_belief(states, &mut r);
        let coarse = coarse_model(&model, &random_coarsening(&model, &mut r)?);
        let size = r.random_range(1..=n);
        let mut set: Vec<usize> = (0..n).collect();
        for j in 0..size {
            set.swap(j, r.random_range(j..n));
        }
        set.truncate(size);
        let gap = exact_conditional_entropy(&coarse, &belief, &set)?
            - exact_conditional_entropy(&model, &belief, &set)?;
        min_gap = min_gap.min(gap);
        violations += (gap < -1e-9) as usize;
    }
    Ok(SuiteReport {
        suite: Suite::Coarsening,
        checks: vec![
            at_most("violations of H(s|r) >= H(s|z)", violations as f64, 0.0),
            at_least("min H(s|r) - H(s|z)", min_gap, -1e-9),
        ],
    })
}

#[derive(Debug, Clone)]
pub struct CoverageConfig {
    pub seeds: usize,
    pub bounds: EntropyBoundConfig,
    pub seed: u64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            seeds: 500,
            bounds: EntropyBoundConfig::default(),
            seed: 0,
        }
    }
}

/// `U >= F` and `F >= L` each hold with frequency at least
/// `1 - δ - 3 SE`, with `F` computed exactly, on a flip-noise world and a
/// random world with a coarsened side.
pub fn coverage_of_bounds(config: &CoverageConfig) -> Result<SuiteReport> {
    let mut r = rng::stream(config.seed, &[0xb0]);
    let cases = [
        ("flip-noise", worlds::flip_noise_world(4, 3, 0.1), Belief::uniform(4)),
        ("random", worlds::random_world(6, 3, 4..=6, &mut r), worlds::random_belief(6, &mut r)),
    ];
    let mut checks = Vec::new();
    for (name, model, belief) in cases {
        let sets: Vec<Vec<usize>> = vec![vec![0], vec![1, 2], vec![0, 1, 2]];
        let truth = sets
            .iter()
            .map(|s| Ok(-exact_conditional_entropy(&model, &belief, s)?))
            .collect::<Result<Vec<f64>>>()?;
        let ladder = std::sync::Arc::new(CoarseLadder::new(std::sync::Arc::new(model), config.bounds.d0)?);
        let mut upper_ok = 0usize;
        let mut lower_ok = 0usize;
        for seed in 0..config.seeds {
            let bounds = EntropyBoundConfig {
                seed: rng::derive_seed(config.seed, &[seed as u64]),
                ..config.bounds.clone()
            };
            let mut provider = EntropyBoundProvider::new(ladder.clone(), belief.clone(), bounds)?;
            // one subset per seed, cycling, so trials are independent
            let j = seed % sets.len();
            upper_ok += (provider.upper(&sets[j])? >= truth[j]) as usize;
            lower_ok += (provider.lower(&sets[j])? <= truth[j]) as usize;
        }
        let n = config.seeds;
        for (side, ok, delta) in [
            ("U >= F", upper_ok, config.bounds.delta_upper),
            ("F >= L", lower_ok, config.bounds.delta_lower),
        ] {
            checks.push(at_least(
                format!("{name}: frequency of {side}"),
                ok as f64 / n as f64,
                1.0 - delta - 3.0 * binomial_se(delta, n),
            ));
        }
    }
    Ok(SuiteReport {
        suite: Suite::CoverageOfBounds,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suites_pass() {
        let reports = [
            nemhauser(&NemhauserConfig { instances: 20, ..Default::default() }).unwrap(),
            pac_bound(&PacBoundConfig { trials: 30, ..Default::default() }).unwrap(),
            entropy_bias(&EntropyBiasConfig { resamples: 500, ..Default::default() }).unwrap(),
            concentration(&ConcentrationConfig { resamples: 500, ..Default::default() }).unwrap(),
            coarsening(&CoarseningConfig { instances: 50, seed: 3 }).unwrap(),
            coverage_of_bounds(&CoverageConfig { seeds: 60, ..Default::default() }).unwrap(),
        ];
        for r in reports {
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn report_formatting() {
        let r = SuiteReport {
            suite: Suite::Coarsening,
            checks: vec![at_most("x", 1.0, 0.0)],
        };
        assert!(!r.passed());
        assert_eq!(r.to_string(), "FAIL x: observed 1.000000, limit 0.000000\ncoarsening: fail");
    }
}
