//! JSON experiment files.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::convergence::ReferenceSpec;
use crate::dislocation::{periodic_config, DislocationSpec, PeriodicProfile, RescaleParams, RunControls};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, Topology};
use crate::ic::MonotoneProfile;
use crate::matrix::Matrix;
use crate::solver::{InitialData, RunConfig};
use crate::systems::{BoxU, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersParams {
    #[serde(default)]
    pub lo: f64,
    #[serde(default = "one")]
    pub hi: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearParams {
    pub a: Vec<Vec<f64>>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportParams {
    pub speed: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Burgers(BurgersParams),
    Crossing,
    Linear(LinearParams),
    Transport(TransportParams),
    Dislocation(DislocationSpec),
}

impl SystemConfig {
    fn build(&self) -> Result<SystemSpec> {
        match self {
            SystemConfig::Burgers(p) => SystemSpec::burgers_on(p.lo, p.hi),
            SystemConfig::Crossing => Ok(SystemSpec::crossing()),
            SystemConfig::Linear(p) => {
                SystemSpec::linear(Matrix::from_rows(&p.a)?, BoxU::new(p.lo.clone(), p.hi.clone())?)
            }
            SystemConfig::Transport(p) => {
                SystemSpec::transport(p.speed, BoxU::new(p.lo.clone(), p.hi.clone())?)
            }
            SystemConfig::Dislocation(_) => unreachable!("built by the dislocation module"),
        }
    }
}

/// A profile entry: one of the bounded monotone kinds, or `"periodic"`
/// (slope plus sinusoid) for the dislocation model.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileEntry {
    Monotone(MonotoneProfile),
    Periodic(PeriodicProfile),
}

impl Serialize for ProfileEntry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ProfileEntry::Monotone(p) => p.serialize(s),
            ProfileEntry::Periodic(p) => {
                let mut v = serde_json::to_value(p).map_err(serde::ser::Error::custom)?;
                if let serde_json::Value::Object(map) = &mut v {
                    map.insert("kind".into(), "periodic".into());
                }
                v.serialize(s)
            }
        }
    }
}

impl<'de> Deserialize<'de> for ProfileEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut v = serde_json::Value::deserialize(d)?;
        let periodic = v.get("kind").and_then(|k| k.as_str()) == Some("periodic");
        if periodic {
            if let serde_json::Value::Object(map) = &mut v {
                map.remove("kind");
            }
            serde_json::from_value(v)
                .map(ProfileEntry::Periodic)
                .map_err(|e| D::Error::custom(format!("periodic profile: {e}")))
        } else {
            serde_json::from_value(v)
                .map(ProfileEntry::Monotone)
                .map_err(|e| D::Error::custom(format!("profile: {e}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub topology: Topology,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    0.45
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    pub fields_csv: String,
    pub monitors_csv: String,
    pub snapshots: usize,
}

/// The δ values of a rescale experiment; every run uses the spacing of `grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaleConfig {
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: SystemConfig,
    pub profile: Vec<ProfileEntry>,
    pub grid: GridConfig,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub mollify_eps: f64,
    pub time: TimeConfig,
    #[serde(default = "default_monitor_every")]
    pub monitor_every: usize,
    pub outputs: OutputsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescale: Option<RescaleConfig>,
}

fn default_monitor_every() -> usize {
    1
}

/// What a configuration file describes.
#[derive(Debug, Clone)]
pub enum Experiment {
    Standard {
        config: RunConfig,
        reference: Option<ReferenceSpec>,
    },
    Periodic {
        spec: DislocationSpec,
        profiles: Vec<PeriodicProfile>,
        config: RunConfig,
    },
    Rescale {
        spec: DislocationSpec,
        profiles: Vec<MonotoneProfile>,
        params: RescaleParams,
    },
}

impl Experiment {
    /// The single run this experiment performs, if it has one.
    pub fn run_config(&self) -> Option<&RunConfig> {
        match self {
            Experiment::Standard { config, .. } | Experiment::Periodic { config, .. } => Some(config),
            Experiment::Rescale { .. } => None,
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes") + "\n"
    }

    fn monotone_profiles(&self) -> Result<Vec<MonotoneProfile>> {
        self.profile
            .iter()
            .enumerate()
            .map(|(k, p)| match p {
                ProfileEntry::Monotone(m) => Ok(m.clone()),
                ProfileEntry::Periodic(_) => Err(Error::Config(format!(
                    "profile[{k}]: periodic profiles need the dislocation system and a periodic grid"
                ))),
            })
            .collect()
    }

    /// Validates the whole document and builds the experiment it describes.
    pub fn build(&self) -> Result<Experiment> {
        let grid = Grid1D::new(self.grid.x_min, self.grid.x_max, self.grid.n, self.grid.topology)
            .map_err(|e| Error::Config(format!("grid: {e}")))?;
        let controls = RunControls {
            cfl: self.time.cfl,
            monitor_every: self.monitor_every,
            snapshots: self.outputs.snapshots,
        };
        let experiment = match &self.system {
            SystemConfig::Dislocation(spec) => {
                if self.reference.is_some() {
                    return Err(Error::Config("reference: not available for the dislocation model".into()));
                }
                if let Some(r) = &self.rescale {
                    let params = RescaleParams {
                        deltas: r.deltas.clone(),
                        dx: grid.dx(),
                        eps: self.eps,
                        t_end: self.time.t_end,
                        cfl: self.time.cfl,
                    };
                    if self.mollify_eps != 0.0 {
                        return Err(Error::Config("mollify_eps: not supported for rescale runs".into()));
                    }
                    spec.validate()?;
                    Experiment::Rescale {
                        spec: spec.clone(),
                        profiles: self.monotone_profiles()?,
                        params,
                    }
                } else {
                    if self.mollify_eps != 0.0 {
                        return Err(Error::Config("mollify_eps: not supported for periodic runs".into()));
                    }
                    let profiles = self
                        .profile
                        .iter()
                        .enumerate()
                        .map(|(k, p)| match p {
                            ProfileEntry::Periodic(p) => Ok(p.clone()),
                            ProfileEntry::Monotone(_) => Err(Error::Config(format!(
                                "profile[{k}]: the periodic dislocation model takes periodic profiles"
                            ))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let config = periodic_config(spec, &profiles, grid, self.eps, self.time.t_end, controls)?;
                    config.validate()?;
                    Experiment::Periodic {
                        spec: spec.clone(),
                        profiles,
                        config,
                    }
                }
            }
            other => {
                if self.rescale.is_some() {
                    return Err(Error::Config("rescale: only the dislocation model has a rescale experiment".into()));
                }
                let config = RunConfig {
                    system: other.build()?,
                    initial: InitialData::Profiles(self.monotone_profiles()?),
                    grid,
                    eps: self.eps,
                    mollify_eps: self.mollify_eps,
                    t_end: self.time.t_end,
                    cfl: self.time.cfl,
                    monitor_every: self.monitor_every,
                    snapshots: self.outputs.snapshots,
                };
                config.validate()?;
                if let InitialData::Profiles(p) = &config.initial {
                    for (k, prof) in p.iter().enumerate() {
                        prof.validate()
                            .map_err(|e| Error::Config(format!("profile[{k}]: {e}")))?;
                    }
                }
                Experiment::Standard {
                    config,
                    reference: self.reference.clone(),
                }
            }
        };
        Ok(experiment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BURGERS: &str = r#"{
        "system": {"kind": "burgers", "params": {"lo": 0.0, "hi": 1.0}},
        "profile": [{"kind": "smoothstep", "lo": 0.0, "hi": 1.0, "center": 0.0, "width": 0.0}],
        "grid": {"x_min": -1.0, "x_max": 2.0, "n": 400, "topology": "line"},
        "eps": 0.0075,
        "time": {"t_end": 0.5, "cfl": 0.45},
        "outputs": {"fields_csv": "fields.csv", "monitors_csv": "monitors.csv", "snapshots": 3},
        "reference": {"kind": "burgers_riemann", "ul": 0.0, "ur": 1.0}
    }"#;

    #[test]
    fn parses_and_builds() {
        let c = ConfigFile::parse(BURGERS).unwrap();
        assert_eq!(c.monitor_every, 1);
        match c.build().unwrap() {
            Experiment::Standard { config, reference } => {
                assert_eq!(config.grid.cells(), 400);
                assert!(reference.is_some());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trips() {
        let c = ConfigFile::parse(BURGERS).unwrap();
        assert_eq!(ConfigFile::parse(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_keys_with_location() {
        let bad = BURGERS.replace("\"eps\"", "\"epsilon\"");
        let err = ConfigFile::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("epsilon") && err.contains("line"), "{err}");
        let bad = BURGERS.replace("\"width\": 0.0", "\"width\": 0.0, \"sharp\": true");
        assert!(ConfigFile::parse(&bad).is_err());
    }

    #[test]
    fn rejects_single_cell_grid() {
        let bad = BURGERS.replace("\"n\": 400", "\"n\": 1");
        let c = ConfigFile::parse(&bad).unwrap();
        assert!(matches!(c.build(), Err(Error::Config(_))));
    }

    #[test]
    fn periodic_profiles_round_trip() {
        let text = r#"{
            "system": {"kind": "dislocation", "params": {"n_slip": 1, "a_half": [[1.0]], "q_half": [[0.5]]}},
            "profile": [
                {"kind": "periodic", "slope": 1.0, "amplitude": 0.1},
                {"kind": "periodic", "slope": 1.0, "offset": 0.2, "amplitude": 0.05, "phase": 0.3}
            ],
            "grid": {"x_min": 0.0, "x_max": 1.0, "n": 64, "topology": "periodic"},
            "time": {"t_end": 0.1},
            "outputs": {"fields_csv": "f.csv", "monitors_csv": "m.csv", "snapshots": 2}
        }"#;
        let c = ConfigFile::parse(text).unwrap();
        assert_eq!(ConfigFile::parse(&c.to_json()).unwrap(), c);
        assert!(matches!(c.build().unwrap(), Experiment::Periodic { .. }));
    }
}
