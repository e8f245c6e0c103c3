//! Run configuration, sweep specification and the named scenario presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bath::BathSpec;
use crate::dynamics::{CovarianceState, Method};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::states::{
    asymmetric_initial_covariance, ghz_initial_covariance, AsymmetricStateSpec, GhzStateSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialState {
    Ghz { r: f64 },
    Asymmetric { r0: f64, rs: f64 },
}

impl InitialState {
    pub fn covariance(&self, n_modes: usize) -> Result<CovarianceState> {
        match *self {
            InitialState::Ghz { r } => ghz_initial_covariance(&GhzStateSpec { n_modes, r }),
            InitialState::Asymmetric { r0, rs } => {
                if n_modes != 3 {
                    return Err(Error::UnsupportedModeCount(n_modes));
                }
                asymmetric_initial_covariance(&AsymmetricStateSpec { r0, rs })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Trajectory,
    Entanglement,
    Coefficients,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integration {
    pub t_max: f64,
    pub dt: f64,
    /// Spacing of stored samples; a multiple of dt.
    #[serde(default = "default_sample_dt")]
    pub sample_dt: f64,
    #[serde(default)]
    pub method: Method,
}

fn default_sample_dt() -> f64 {
    0.01
}

impl Default for Integration {
    fn default() -> Self {
        Integration {
            t_max: 30.0,
            dt: 1e-3,
            sample_dt: 0.01,
            method: Method::Lyapunov,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub plots: bool,
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Trajectory, OutputKind::Entanglement]
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            outputs: default_outputs(),
            dir: default_dir(),
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemParams,
    pub bath: BathSpec,
    pub initial_state: InitialState,
    #[serde(default)]
    pub integration: Integration,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemParams::default(),
            bath: BathSpec::default(),
            initial_state: InitialState::Ghz { r: 1.0 },
            integration: Integration::default(),
            output: OutputSpec::default(),
        }
    }
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: x,
            reason: "must be positive",
        })
    }
}

/// Number of dt steps per stored sample.
pub fn sample_stride(dt: f64, sample_dt: f64) -> Result<usize> {
    let k = (sample_dt / dt).round();
    if k < 1.0 || (k * dt - sample_dt).abs() > 1e-9 * sample_dt {
        return Err(Error::InvalidParameter {
            name: "sample_dt",
            value: sample_dt,
            reason: "must be a positive multiple of dt",
        });
    }
    Ok(k as usize)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.bath.validate()?;
        positive("t_max", self.integration.t_max)?;
        positive("dt", self.integration.dt)?;
        positive("sample_dt", self.integration.sample_dt)?;
        sample_stride(self.integration.dt, self.integration.sample_dt)?;
        crate::dynamics::step_count(0.0, self.integration.t_max, self.integration.dt)?;
        self.initial_state.covariance(self.system.n_modes)?;
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    R,
    R0,
    Rs,
    Gamma0,
    Lambda,
    Temperature,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::R => "r",
            SweepParameter::R0 => "r0",
            SweepParameter::Rs => "rs",
            SweepParameter::Gamma0 => "gamma0",
            SweepParameter::Lambda => "lambda",
            SweepParameter::Temperature => "temperature",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        toml::Value::String(s.to_string())
            .try_into()
            .map_err(|_| Error::Config(format!("unknown sweep parameter {s:?}")))
    }

    /// True when the parameter leaves the bath and system, hence the coefficient table, unchanged.
    pub fn keeps_table(self) -> bool {
        matches!(self, SweepParameter::R | SweepParameter::R0 | SweepParameter::Rs)
    }

    pub fn apply(self, base: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut c = base.clone();
        let wrong = || Error::Config(format!("sweep parameter {} does not fit the initial state", self.name()));
        match (self, &mut c.initial_state) {
            (SweepParameter::R, InitialState::Ghz { r }) => *r = value,
            (SweepParameter::R0, InitialState::Asymmetric { r0, .. }) => *r0 = value,
            (SweepParameter::Rs, InitialState::Asymmetric { rs, .. }) => *rs = value,
            (SweepParameter::R | SweepParameter::R0 | SweepParameter::Rs, _) => return Err(wrong()),
            (SweepParameter::Gamma0, _) => c.bath.gamma0 = value,
            (SweepParameter::Lambda, _) => c.system.lambda = value,
            (SweepParameter::Temperature, _) => c.bath.temperature = value,
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub base: RunConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    parameter: SweepParameter,
    values: Vec<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep value list is empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        self.base.validate()?;
        // Reject parameter/state mismatches up front.
        self.parameter.apply(&self.base, self.values[0]).map(|_| ())
    }

    /// A run config plus a `[sweep]` table with `parameter` and `values`.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let mut v: toml::Table = toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        let section = v
            .remove("sweep")
            .ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
        let section: SweepSection = section
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let base: RunConfig = toml::Value::Table(v)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let spec = SweepSpec {
            parameter: section.parameter,
            values: section.values,
            base,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Values in increasing order, as the summary rows are written.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Named reference scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            _ => Err(Error::Config(format!("unknown preset {s:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    /// (label, config) for every curve of the scenario.
    pub fn runs(self) -> Vec<(String, RunConfig)> {
        let base = RunConfig::default();
        let ghz = |lambda: f64, gamma0: f64, r: f64| RunConfig {
            system: SystemParams {
                lambda,
                ..base.system
            },
            bath: BathSpec {
                gamma0,
                ..base.bath
            },
            initial_state: InitialState::Ghz { r },
            ..base.clone()
        };
        match self {
            Preset::Fig2 => [1.0, 1.498, 2.0]
                .iter()
                .map(|&r| (format!("r_{r}"), ghz(0.0, 0.05, r)))
                .collect(),
            Preset::Fig3 => [0.05, 1.0, 5.0]
                .iter()
                .map(|&g| (format!("gamma0_{g}"), ghz(0.0, g, 1.6)))
                .collect(),
            Preset::Fig4 => [1.0, 1.498, 2.0]
                .iter()
                .map(|&r| (format!("r_{r}"), ghz(0.8, 0.05, r)))
                .collect(),
            Preset::Fig5 => [1.0, 1.489, 2.0]
                .iter()
                .map(|&r0| {
                    (
                        format!("r0_{r0}"),
                        RunConfig {
                            initial_state: InitialState::Asymmetric { r0, rs: 1.489 },
                            ..base.clone()
                        },
                    )
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
[system]
n_modes = 3
lambda = 0.0

[bath]
gamma0 = 0.05
cutoff = 100.0
temperature = 10.0

[initial_state]
family = "ghz"
r = 1.5

[integration]
t_max = 30.0
dt = 0.001
"#;

    #[test]
    fn parse_and_round_trip() {
        let c = RunConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(c.initial_state, InitialState::Ghz { r: 1.5 });
        assert_eq!(c.system.mass, 1.0);
        assert_eq!(c.integration.sample_dt, 0.01);
        let again = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml_str(&EXAMPLE.replace("dt = 0.001", "dt = -1.0")).is_err());
        assert!(RunConfig::from_toml_str(&EXAMPLE.replace("gamma0", "gama0")).is_err());
        assert!(RunConfig::from_toml_str(&EXAMPLE.replace("lambda = 0.0", "lambda = 1.0")).is_err());
        assert!(RunConfig::from_toml_str(&EXAMPLE.replace("t_max = 30.0", "t_max = 30.0005")).is_err());
    }

    #[test]
    fn sweep_spec_parsing() {
        let s = format!("{EXAMPLE}\n[sweep]\nparameter = \"r\"\nvalues = [2.0, 1.0]\n");
        let spec = SweepSpec::from_toml_str(&s).unwrap();
        assert_eq!(spec.parameter, SweepParameter::R);
        assert_eq!(spec.sorted_values(), vec![1.0, 2.0]);
        let empty = format!("{EXAMPLE}\n[sweep]\nparameter = \"r\"\nvalues = []\n");
        assert!(matches!(SweepSpec::from_toml_str(&empty), Err(Error::Config(_))));
        let wrong = format!("{EXAMPLE}\n[sweep]\nparameter = \"r0\"\nvalues = [1.0]\n");
        assert!(SweepSpec::from_toml_str(&wrong).is_err());
    }

    #[test]
    fn presets_validate() {
        for p in [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5] {
            for (_, c) in p.runs() {
                c.validate().unwrap();
            }
        }
        assert_eq!(SweepParameter::parse("gamma0").unwrap(), SweepParameter::Gamma0);
    }
}
