// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration: a JSON document plus command-line overrides.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use cohwalk_core::walk::{chiral_spinor, ChiralSign, SpinAmplitude, NORM_TOLERANCE};
use cohwalk_core::C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PhaseDiagram,
    MomentsSweep,
    CssSweep,
    Reconstruct,
    OracleCheck,
    CompileCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::PhaseDiagram => "phase-diagram",
            Experiment::MomentsSweep => "moments-sweep",
            Experiment::CssSweep => "css-sweep",
            Experiment::Reconstruct => "reconstruct",
            Experiment::OracleCheck => "oracle-check",
            Experiment::CompileCheck => "compile-check",
        }
    }

    /// Whether the experiment evolves walks (and so needs `steps`).
    pub fn runs_walks(self) -> bool {
        !matches!(self, Experiment::PhaseDiagram | Experiment::CompileCheck)
    }

    pub fn needs_alphas(self) -> bool {
        matches!(
            self,
            Experiment::CssSweep
                | Experiment::Reconstruct
                | Experiment::OracleCheck
                | Experiment::CompileCheck
        )
    }
}

/// Angle in radians, written either as a number or as an expression such
/// as `"pi/8"`, `"3pi/8"`, `"-pi"` or `"0.25*pi"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(pub f64);

impl Angle {
    pub fn parse(text: &str) -> Option<Angle> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = compact.to_ascii_lowercase();
        let Some(at) = lower.find("pi") else {
            return lower.parse().ok().map(Angle);
        };
        let coefficient = lower[..at].trim_end_matches('*');
        let coefficient = match coefficient {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().ok()?,
        };
        let rest = &lower[at + 2..];
        let denominator = match rest {
            "" => 1.0,
            r => r.strip_prefix('/')?.parse::<f64>().ok()?,
        };
        Some(Angle(coefficient * PI / denominator))
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Angle(v)),
            Raw::Text(t) => Angle::parse(&t)
                .ok_or_else(|| serde::de::Error::custom(format!("cannot read angle {t:?}"))),
        }
    }
}

/// A list of sample values, either explicit or generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    Values(Vec<Angle>),
    /// `count` evenly spaced points including both ends, or the `count`
    /// cell centres of `[start, stop]` when `centred` is set.
    Count {
        start: Angle,
        stop: Angle,
        count: usize,
        #[serde(default)]
        centred: bool,
    },
    /// `start, start + step, …` up to `stop` (inclusive, to rounding).
    Step {
        start: Angle,
        stop: Angle,
        step: Angle,
    },
}

impl Sweep {
    pub fn single(value: f64) -> Sweep {
        Sweep::Values(vec![Angle(value)])
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::Values(v) => v.iter().map(|a| a.0).collect(),
            &Sweep::Count {
                start,
                stop,
                count,
                centred,
            } => {
                let (a, b) = (start.0, stop.0);
                if centred {
                    (0..count)
                        .map(|i| a + (b - a) * (i as f64 + 0.5) / count as f64)
                        .collect()
                } else if count == 1 {
                    vec![a]
                } else {
                    (0..count)
                        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
                        .collect()
                }
            }
            &Sweep::Step { start, stop, step } => {
                if step.0.is_nan() || step.0 <= 0.0 || stop.0 < start.0 {
                    return Vec::new();
                }
                let count = ((stop.0 - start.0) / step.0 + 1e-9).floor() as usize + 1;
                (0..count)
                    .map(|i| (start.0 + i as f64 * step.0).min(stop.0))
                    .collect()
            }
        }
    }
}

/// Initial coin state: a named state or explicit `[re, im]` components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpinChoice {
    Named(NamedSpin),
    Explicit { up: [f64; 2], down: [f64; 2] },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedSpin {
    Up,
    Down,
    /// Eigenvector of `A·σ` with eigenvalue +1 at the walk's θ1.
    ChiralPlus,
    /// Eigenvector of `A·σ` with eigenvalue −1 at the walk's θ1.
    ChiralMinus,
}

impl SpinChoice {
    pub fn amplitude(&self, theta1: f64) -> SpinAmplitude {
        match self {
            SpinChoice::Named(NamedSpin::Up) => SpinAmplitude::spin_up(),
            SpinChoice::Named(NamedSpin::Down) => SpinAmplitude::spin_down(),
            SpinChoice::Named(NamedSpin::ChiralPlus) => chiral_spinor(theta1, ChiralSign::Plus),
            SpinChoice::Named(NamedSpin::ChiralMinus) => chiral_spinor(theta1, ChiralSign::Minus),
            SpinChoice::Explicit { up, down } => {
                SpinAmplitude::new(C64::new(up[0], up[1]), C64::new(down[0], down[1]))
            }
        }
    }

    /// The chirality, when the state is a chiral eigenstate by construction.
    pub fn chirality(&self) -> Option<ChiralSign> {
        match self {
            SpinChoice::Named(NamedSpin::ChiralPlus) => Some(ChiralSign::Plus),
            SpinChoice::Named(NamedSpin::ChiralMinus) => Some(ChiralSign::Minus),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    Overlap,
    Monomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadoutChoice {
    TwistPair,
    Untwisted,
}

fn default_theta1() -> Sweep {
    Sweep::single(PI / 4.0)
}

fn default_theta2() -> Sweep {
    Sweep::Step {
        start: Angle(0.0),
        stop: Angle(PI),
        step: Angle(PI / 100.0),
    }
}

fn default_steps() -> Vec<usize> {
    vec![20]
}

fn default_phis() -> Vec<Angle> {
    vec![Angle(0.0)]
}

fn default_spins() -> Vec<SpinChoice> {
    vec![SpinChoice::Named(NamedSpin::Up)]
}

fn default_k_grid() -> usize {
    4096
}

fn default_shift() -> i64 {
    2
}

fn default_degree() -> usize {
    4
}

fn default_sites() -> [i64; 2] {
    [-6, 6]
}

fn default_basis() -> BasisChoice {
    BasisChoice::Overlap
}

fn default_readout() -> ReadoutChoice {
    ReadoutChoice::TwistPair
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default = "default_theta1")]
    pub theta1: Sweep,
    #[serde(default = "default_theta2")]
    pub theta2: Sweep,
    #[serde(default = "default_steps")]
    pub steps: Vec<usize>,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default = "default_phis")]
    pub phis: Vec<Angle>,
    #[serde(default)]
    pub initial_position: i64,
    #[serde(default = "default_spins")]
    pub initial_spins: Vec<SpinChoice>,
    #[serde(default = "default_k_grid")]
    pub k_grid: usize,
    /// Fixed cavity dimension; automatic when absent.
    #[serde(default)]
    pub fock_dim: Option<usize>,
    /// Shift `m` of the `|±m⟩` pair in css-sweep.
    #[serde(default = "default_shift")]
    pub shift: i64,
    #[serde(default = "default_readout")]
    pub pair_readout: ReadoutChoice,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_basis")]
    pub fit_basis: BasisChoice,
    /// Inclusive site range for compile-check.
    #[serde(default = "default_sites")]
    pub sites: [i64; 2],
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        ExperimentConfig::from_json(&text)
    }
}

/// One schema or range problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Schema and range checks; never runs any physics.
pub fn validate(config: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |field: &'static str, message: String| out.push(Diagnostic { field, message });

    let Some(experiment) = config.experiment else {
        push("experiment", "experiment must be set".into());
        return out;
    };

    for (field, sweep) in [("theta1", &config.theta1), ("theta2", &config.theta2)] {
        let values = sweep.values();
        if values.is_empty() {
            push(field, "sweep range must not be empty".into());
        }
        for v in values {
            if !(0.0..=PI).contains(&v) {
                push(field, format!("theta {v} outside [0, π]"));
            }
        }
    }

    if experiment.runs_walks() {
        if config.steps.is_empty() {
            push("steps", "steps list must not be empty".into());
        }
        if config.steps.contains(&0) {
            push("steps", "steps must be ≥ 1".into());
        }
        if config.initial_spins.is_empty() {
            push(
                "initial_spins",
                "at least one initial spin is required".into(),
            );
        }
        for spin in &config.initial_spins {
            if let SpinChoice::Explicit { .. } = spin {
                let norm = spin.amplitude(0.0).norm_sqr();
                if (norm - 1.0).abs() > NORM_TOLERANCE || !norm.is_finite() {
                    push(
                        "initial_spins",
                        format!("explicit spin has norm² {norm}, expected 1"),
                    );
                }
            }
        }
    }

    if experiment.needs_alphas() {
        if config.alphas.is_empty() {
            push("alphas", "alphas list must not be empty".into());
        }
        for &a in &config.alphas {
            if !(a.is_finite() && a > 0.0) {
                push("alphas", format!("alpha {a} must be positive and finite"));
            }
        }
    }

    if experiment == Experiment::OracleCheck {
        if config.phis.is_empty() {
            push("phis", "phis list must not be empty".into());
        }
        if config.phis.iter().any(|p| !p.0.is_finite()) {
            push("phis", "phi must be finite".into());
        }
    }

    if matches!(
        experiment,
        Experiment::PhaseDiagram | Experiment::MomentsSweep
    ) && (config.k_grid < 2 || !config.k_grid.is_multiple_of(2))
    {
        push(
            "k_grid",
            format!("k-grid count must be even and ≥ 2, got {}", config.k_grid),
        );
    }

    if experiment == Experiment::CssSweep && config.shift == 0 {
        push("shift", "shift must be nonzero".into());
    }

    if experiment == Experiment::Reconstruct && config.degree < 2 {
        push(
            "degree",
            format!("degree must be ≥ 2, got {}", config.degree),
        );
    }

    if experiment == Experiment::CompileCheck && config.sites[0] > config.sites[1] {
        push("sites", "site range is empty".into());
    }

    if config.fock_dim == Some(0) {
        push("fock_dim", "cavity dimension must be ≥ 1".into());
    }
    if config.workers == Some(0) {
        push("workers", "worker count must be ≥ 1".into());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_expressions() {
        assert_eq!(Angle::parse("pi/8"), Some(Angle(PI / 8.0)));
        assert_eq!(Angle::parse("3pi/8"), Some(Angle(3.0 * PI / 8.0)));
        assert_eq!(Angle::parse(" 3 * pi / 8 "), Some(Angle(3.0 * PI / 8.0)));
        assert_eq!(Angle::parse("-pi"), Some(Angle(-PI)));
        assert_eq!(Angle::parse("0.25"), Some(Angle(0.25)));
        assert_eq!(Angle::parse("pi/"), None);
        assert_eq!(Angle::parse("tau"), None);
    }

    #[test]
    fn sweep_forms() {
        let step: Sweep =
            serde_json::from_str(r#"{"start": 0, "stop": "pi", "step": "pi/100"}"#).unwrap();
        let v = step.values();
        assert_eq!(v.len(), 101);
        assert!((v[100] - PI).abs() < 1e-12);

        let centred: Sweep =
            serde_json::from_str(r#"{"start": 0, "stop": "pi", "count": 4, "centred": true}"#)
                .unwrap();
        assert_eq!(centred.values()[0], PI / 8.0);

        let list: Sweep = serde_json::from_str(r#"["pi/8", 1.0]"#).unwrap();
        assert_eq!(list.values(), vec![PI / 8.0, 1.0]);
    }

    fn with(experiment: Experiment, json: &str) -> ExperimentConfig {
        let mut config = ExperimentConfig::from_json(json).unwrap();
        config.experiment = Some(experiment);
        config
    }

    #[test]
    fn zero_steps_is_diagnosed() {
        let config = with(Experiment::MomentsSweep, r#"{"steps": [10, 0]}"#);
        let diags = validate(&config);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].message, "steps must be ≥ 1");
    }

    #[test]
    fn theta_out_of_range_is_diagnosed() {
        let config = with(Experiment::PhaseDiagram, r#"{"theta1": [4.0]}"#);
        let diags = validate(&config);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].field, "theta1");
    }

    #[test]
    fn valid_config_has_no_diagnostics() {
        let config = with(
            Experiment::CssSweep,
            r#"{"alphas": [1.5, 1.0, 0.8], "steps": [20], "initial_spins": ["up", "chiral-minus"]}"#,
        );
        assert!(validate(&config).is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"stpes": [1]}"#).is_err());
    }

    #[test]
    fn explicit_spin_must_be_normalized() {
        let config = with(
            Experiment::MomentsSweep,
            r#"{"initial_spins": [{"up": [1, 0], "down": [1, 0]}]}"#,
        );
        assert_eq!(validate(&config)[0].field, "initial_spins");
    }
}
