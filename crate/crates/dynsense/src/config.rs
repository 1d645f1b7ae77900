//! Experiment configuration.
//!
//! Each scenario has a preset; a TOML file only needs the keys it changes.
//! The resolved configuration is echoed next to the results.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use dynsense_core::dictionary::LearnerParams;
use dynsense_core::filter::{FilterSpec, SpectralResponse};
use dynsense_core::placement::{HopLimit, Schedule};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    SyntheticBl,
    SyntheticPc,
    Real,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::SyntheticBl => "synthetic-bl",
            ScenarioKind::SyntheticPc => "synthetic-pc",
            ScenarioKind::Real => "real",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Online dictionary and relocation with the configured hop limit.
    Dynamic,
    /// Online dictionary and relocation anywhere in the Voronoi region.
    DynamicPinf,
    /// Fixed sensors, dictionary from the training data only.
    Static1,
    /// Fixed sensors, dictionary recomputed from the reconstructed window.
    Static2,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Dynamic => "dynamic",
            Method::DynamicPinf => "dynamic-pinf",
            Method::Static1 => "static1",
            Method::Static2 => "static2",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `placement.hop_limit`: a hop count or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HopRepr", into = "HopRepr")]
pub struct HopSetting(pub HopLimit);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum HopRepr {
    Hops(usize),
    Word(String),
}

impl TryFrom<HopRepr> for HopSetting {
    type Error = String;

    fn try_from(r: HopRepr) -> std::result::Result<Self, String> {
        match r {
            HopRepr::Hops(p) => Ok(HopSetting(HopLimit::Hops(p))),
            HopRepr::Word(w) if w == "inf" => Ok(HopSetting(HopLimit::Unbounded)),
            HopRepr::Word(w) => Err(format!("hop_limit must be an integer or \"inf\", got {w:?}")),
        }
    }
}

impl From<HopSetting> for HopRepr {
    fn from(h: HopSetting) -> Self {
        match h.0 {
            HopLimit::Hops(p) => HopRepr::Hops(p),
            HopLimit::Unbounded => HopRepr::Word("inf".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleSetting {
    Sequential,
    Parallel,
}

impl From<ScheduleSetting> for Schedule {
    fn from(s: ScheduleSetting) -> Self {
        match s {
            ScheduleSetting::Sequential => Schedule::Sequential,
            ScheduleSetting::Parallel => Schedule::Parallel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    Identity,
    LowpassCosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub nodes: usize,
    /// Neighbours per node for the gridded-data graph.
    pub knn: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub sampling_period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    /// Number of low-frequency eigenvectors in the bandlimited model.
    pub bandwidth: usize,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningConfig {
    pub mu: f64,
    pub eta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementConfig {
    pub hop_limit: HopSetting,
    pub schedule: ScheduleSetting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub kind: FilterKind,
    /// `0` applies the filter exactly through the eigenbasis.
    pub chebyshev_order: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Grid CSV `lat,lon,t_0,...`; the built-in stand-in is used when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lat_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lon_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub replicates: usize,
    pub methods: Vec<Method>,
    pub noise_variance: f64,
    pub graph: GraphConfig,
    pub sensors: SensorConfig,
    pub window: WindowConfig,
    pub horizon: HorizonConfig,
    pub signal: SignalConfig,
    pub learning: LearningConfig,
    pub placement: PlacementConfig,
    pub filter: FilterConfig,
    #[serde(default)]
    pub data: DataConfig,
}

const ALL_METHODS: [Method; 4] = [Method::Dynamic, Method::DynamicPinf, Method::Static1, Method::Static2];

impl ExperimentConfig {
    pub fn preset(scenario: ScenarioKind) -> Self {
        match scenario {
            ScenarioKind::SyntheticBl | ScenarioKind::SyntheticPc => ExperimentConfig {
                scenario,
                seed: 1,
                replicates: 50,
                methods: ALL_METHODS.to_vec(),
                noise_variance: 0.1,
                graph: GraphConfig { nodes: 256, knn: 6 },
                sensors: SensorConfig { count: 8 },
                window: WindowConfig { size: 20 },
                horizon: HorizonConfig { n_train: 20, n_test: 20, sampling_period: PI / 30.0 },
                signal: SignalConfig { bandwidth: 16, clusters: 3 },
                learning: LearningConfig { mu: 1.0, eta: 3.0, gamma: 1e-4, epsilon: 1e-8, max_iters: 1000 },
                placement: PlacementConfig { hop_limit: HopSetting(HopLimit::Hops(1)), schedule: ScheduleSetting::Parallel },
                filter: FilterConfig { kind: FilterKind::LowpassCosine, chebyshev_order: 20 },
                data: DataConfig::default(),
            },
            ScenarioKind::Real => ExperimentConfig {
                scenario,
                seed: 1,
                replicates: 20,
                methods: ALL_METHODS.to_vec(),
                noise_variance: 0.1,
                graph: GraphConfig { nodes: 100, knn: 5 },
                sensors: SensorConfig { count: 10 },
                window: WindowConfig { size: 5 },
                horizon: HorizonConfig { n_train: 5, n_test: 55, sampling_period: 1.0 },
                signal: SignalConfig { bandwidth: 16, clusters: 3 },
                learning: LearningConfig { mu: 1.0, eta: 1.0, gamma: 1e-3, epsilon: 1e-8, max_iters: 1000 },
                placement: PlacementConfig { hop_limit: HopSetting(HopLimit::Hops(1)), schedule: ScheduleSetting::Parallel },
                filter: FilterConfig { kind: FilterKind::LowpassCosine, chebyshev_order: 20 },
                data: DataConfig::default(),
            },
        }
    }

    /// Preset for `scenario` overlaid with the keys of a TOML document.
    pub fn from_toml_overlay(scenario: ScenarioKind, overlay: &str) -> Result<Self> {
        let overlay: toml::Table = toml::from_str(overlay).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(v) = overlay.get("scenario") {
            if v.as_str() != Some(&scenario.to_string()) {
                return Err(Error::Config(format!("file is for scenario {v}, command is {scenario}")));
            }
        }
        let mut base = toml::Table::try_from(Self::preset(scenario)).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut base, overlay);
        let cfg: Self = base.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(scenario: ScenarioKind, path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Self::from_toml_overlay(scenario, &text)
            }
            None => Ok(Self::preset(scenario)),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        let n = self.graph.nodes;
        if n < 2 {
            return fail("graph.nodes must be at least 2");
        }
        if self.sensors.count == 0 || self.sensors.count > n {
            return fail("sensors.count must be in 1..=graph.nodes");
        }
        if self.window.size == 0 {
            return fail("window.size must be positive");
        }
        if self.horizon.n_train < self.window.size {
            return fail("horizon.n_train must be at least window.size");
        }
        if self.horizon.n_test == 0 {
            return fail("horizon.n_test must be positive");
        }
        if !(self.horizon.sampling_period > 0.0) {
            return fail("horizon.sampling_period must be positive");
        }
        if self.replicates == 0 {
            return fail("replicates must be positive");
        }
        if self.methods.is_empty() {
            return fail("methods must not be empty");
        }
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return fail("noise_variance must be nonnegative");
        }
        match self.scenario {
            ScenarioKind::SyntheticBl if self.signal.bandwidth == 0 || self.signal.bandwidth > n => {
                return fail("signal.bandwidth must be in 1..=graph.nodes");
            }
            ScenarioKind::SyntheticPc if self.signal.clusters != dynsense_core::signal::PC_CLUSTERS => {
                return fail("signal.clusters must be 3");
            }
            ScenarioKind::Real if self.graph.knn == 0 || self.graph.knn >= n => {
                return fail("graph.knn must be in 1..graph.nodes");
            }
            _ => {}
        }
        self.learner_params().validate()?;
        Ok(())
    }

    pub fn learner_params(&self) -> LearnerParams {
        let l = &self.learning;
        LearnerParams { mu: l.mu, eta: l.eta, gamma: l.gamma, epsilon: l.epsilon, max_iters: l.max_iters }
    }

    pub fn filter_spec(&self) -> FilterSpec {
        let response = match self.filter.kind {
            FilterKind::Identity => SpectralResponse::Identity,
            FilterKind::LowpassCosine => SpectralResponse::LowpassCosine,
        };
        FilterSpec::chebyshev(response, self.filter.chebyshev_order)
    }

    pub fn hop_limit(&self) -> HopLimit {
        self.placement.hop_limit.0
    }

    pub fn schedule(&self) -> Schedule {
        self.placement.schedule.into()
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
