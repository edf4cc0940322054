//! Experiment configuration files.
//!
//! A config is a flat TOML table. Unknown keys are rejected. `maximizer`
//! and `k` take a single value or a list; `run` and `compare` iterate over
//! every combination with shared seeds.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Random set-cover instances with exact (or noisy) oracles.
    Coverage,
    /// Small random sensor worlds scored by information gain.
    SensorToy,
    /// Target tracking on a torus grid.
    Tracking,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Coverage => "coverage",
            Scenario::SensorToy => "sensor-toy",
            Scenario::Tracking => "tracking",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaximizerKind {
    Greedy,
    Lazy,
    Lazier,
    Pac,
    Brute,
}

impl MaximizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            MaximizerKind::Greedy => "greedy",
            MaximizerKind::Lazy => "lazy",
            MaximizerKind::Lazier => "lazier",
            MaximizerKind::Pac => "pac",
            MaximizerKind::Brute => "brute",
        }
    }
}

/// How the sensor-toy greedy variants score subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Exact,
    #[default]
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: Option<Scenario>,
    pub maximizer: Option<OneOrMany<MaximizerKind>>,
    pub k: Option<OneOrMany<usize>>,
    /// Ground-set size; defaults per scenario (coverage 10, sensor-toy 6,
    /// tracking 20).
    pub n: Option<usize>,
    pub seed: u64,
    /// Independent instances for coverage and sensor-toy.
    pub trials: usize,
    pub output: Option<PathBuf>,
    /// Adds `wall-ms` rows, which are not reproducible.
    pub timing: bool,

    /// Lazier greedy candidates per step (`R`); defaults to `n`.
    pub sample_size: Option<usize>,
    /// `ε₁`; omitted means the width-based default for entropy bounds and 0
    /// otherwise.
    pub epsilon1: Option<f64>,
    /// Stall threshold `t` for pac.
    pub threshold: f64,
    pub max_tighten_rounds: usize,
    pub delta_upper: f64,
    pub delta_lower: f64,

    pub m_fine: usize,
    pub m_coarse: usize,
    pub d0: usize,
    pub draws_fine: usize,
    pub draws_coarse: usize,
    /// Greedy-on-estimates budgets.
    pub estimate_m: usize,
    pub estimate_draws: usize,

    /// Coverage universe size and inclusion density.
    pub universe: usize,
    pub density: f64,
    /// Noise of synthetic coverage bounds; 0 means exact bounds.
    pub sigma: f64,

    pub states: usize,
    pub oracle: OracleKind,

    pub width: usize,
    pub height: usize,
    pub radius: f64,
    pub flip: f64,
    pub stay: f64,
    pub layout_seed: u64,
    pub particles: usize,
    /// Timesteps per trajectory (`T`).
    pub steps: usize,
    pub trajectories: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let bounds = pacgreedy::sensor::EntropyBoundConfig::default();
        let grid = pacgreedy::tracking::GridConfig::default();
        let tracking = pacgreedy::tracking::TrackingParams::default();
        ExperimentConfig {
            scenario: None,
            maximizer: None,
            k: None,
            n: None,
            seed: 0,
            trials: 20,
            output: None,
            timing: false,
            sample_size: None,
            epsilon1: None,
            threshold: tracking.threshold,
            max_tighten_rounds: tracking.max_tighten_rounds,
            delta_upper: bounds.delta_upper,
            delta_lower: bounds.delta_lower,
            m_fine: bounds.m_fine,
            m_coarse: bounds.m_coarse,
            d0: bounds.d0,
            draws_fine: bounds.draws_fine,
            draws_coarse: bounds.draws_coarse,
            estimate_m: tracking.estimate_m,
            estimate_draws: tracking.estimate_draws,
            universe: 40,
            density: 0.15,
            sigma: 0.0,
            states: 6,
            oracle: OracleKind::default(),
            width: grid.width,
            height: grid.height,
            radius: grid.radius,
            flip: grid.flip,
            stay: grid.stay,
            layout_seed: grid.layout_seed,
            particles: tracking.particles,
            steps: 100,
            trajectories: 50,
        }
    }
}

/// A checked config with its scenario-dependent defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub scenario: Scenario,
    pub maximizers: Vec<MaximizerKind>,
    pub ks: Vec<usize>,
    pub n: usize,
    pub sample_size: usize,
    pub raw: ExperimentConfig,
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> BenchError {
    BenchError::Config(format!("{field}: {reason}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn resolve(&self) -> Result<Resolved, BenchError> {
        let scenario = self.scenario.ok_or_else(|| invalid("scenario", "missing"))?;
        let maximizers = self
            .maximizer
            .as_ref()
            .ok_or_else(|| invalid("maximizer", "missing"))?
            .to_vec();
        let ks = self.k.as_ref().ok_or_else(|| invalid("k", "missing"))?.to_vec();
        if maximizers.is_empty() {
            return Err(invalid("maximizer", "list is empty"));
        }
        if ks.is_empty() {
            return Err(invalid("k", "list is empty"));
        }
        let n = self.n.unwrap_or(match scenario {
            Scenario::Coverage => 10,
            Scenario::SensorToy => 6,
            Scenario::Tracking => 20,
        });
        if n == 0 && scenario != Scenario::Tracking {
            return Err(invalid("n", "must be >= 1"));
        }
        if let Some(&k) = ks.iter().find(|&&k| k > n) {
            return Err(invalid("k", format!("k = {k} exceeds n = {n}")));
        }
        let sample_size = self.sample_size.unwrap_or(n);
        if maximizers.contains(&MaximizerKind::Lazier) && !(1..=n).contains(&sample_size) {
            return Err(invalid("sample_size", format!("must be in 1..={n}")));
        }
        if scenario == Scenario::Tracking && maximizers.contains(&MaximizerKind::Brute) {
            return Err(invalid("maximizer", "brute is not available for tracking"));
        }
        if let Some(e) = self.epsilon1 {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(invalid("epsilon1", "must be a finite value >= 0"));
            }
        }
        if !(self.threshold >= 0.0) {
            return Err(invalid("threshold", "must be >= 0"));
        }
        for (field, d) in [("delta_upper", self.delta_upper), ("delta_lower", self.delta_lower)] {
            if !(d > 0.0 && d < 1.0) {
                return Err(invalid(field, "must be in (0, 1)"));
            }
        }
        for (field, m) in [("m_fine", self.m_fine), ("m_coarse", self.m_coarse)] {
            if m < 2 {
                return Err(invalid(field, "must be >= 2"));
            }
        }
        for (field, v) in [
            ("trials", self.trials),
            ("d0", self.d0),
            ("draws_fine", self.draws_fine),
            ("draws_coarse", self.draws_coarse),
            ("estimate_m", self.estimate_m),
            ("estimate_draws", self.estimate_draws),
            ("universe", self.universe),
            ("states", self.states),
            ("width", self.width),
            ("height", self.height),
            ("particles", self.particles),
            ("steps", self.steps),
            ("trajectories", self.trajectories),
        ] {
            if v == 0 {
                return Err(invalid(field, "must be >= 1"));
            }
        }
        for (field, p) in [("density", self.density), ("flip", self.flip), ("stay", self.stay)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(field, "must be in [0, 1]"));
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", "must be a finite value >= 0"));
        }
        if !(self.radius >= 0.0) {
            return Err(invalid("radius", "must be >= 0"));
        }
        Ok(Resolved {
            scenario,
            maximizers,
            ks,
            n,
            sample_size,
            raw: self.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_values_and_lists() {
        let c = ExperimentConfig::parse("scenario = \"tracking\"\nmaximizer = [\"greedy\", \"pac\"]\nk = 2\n").unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.maximizers, vec![MaximizerKind::Greedy, MaximizerKind::Pac]);
        assert_eq!(r.ks, vec![2]);
        assert_eq!(r.n, 20);
    }

    #[test]
    fn k_above_n_names_the_field() {
        let c = ExperimentConfig::parse("scenario = \"coverage\"\nmaximizer = \"greedy\"\nk = 5\nn = 3\n").unwrap();
        let err = c.resolve().unwrap_err().to_string();
        assert!(err.contains("k = 5 exceeds n = 3"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::parse("scenario = \"coverage\"\ncolour = 1\n").unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn range_checks() {
        for (extra, field) in [
            ("delta_upper = 1.5", "delta_upper"),
            ("m_fine = 1", "m_fine"),
            ("epsilon1 = -1.0", "epsilon1"),
            ("trials = 0", "trials"),
            ("sample_size = 0\nmaximizer = \"lazier\"", "sample_size"),
        ] {
            let text = if extra.contains("maximizer") {
                format!("scenario = \"coverage\"\nk = 1\n{extra}\n")
            } else {
                format!("scenario = \"coverage\"\nmaximizer = \"greedy\"\nk = 1\n{extra}\n")
            };
            let err = ExperimentConfig::parse(&text).unwrap().resolve().unwrap_err().to_string();
            assert!(err.contains(&format!(": {field}: ")), "{extra}: {err}");
        }
    }
}
