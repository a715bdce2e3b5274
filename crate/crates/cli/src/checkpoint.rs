//! Versioned JSON checkpoints. Beyond the field state this carries the
//! integrator's dt and step counter so a resumed run reproduces the
//! uninterrupted one exactly.

use serde::{Deserialize, Serialize};

use crate::config::{BackgroundSpec, ConfigError};
use l2flow_core::flow::FlowState;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "kind")]
pub enum BackgroundJson {
    #[serde(rename = "flat_torus")]
    FlatTorus { lx: f64, ly: f64, nx: usize, ny: usize },
    #[serde(rename = "sphere_axisym")]
    SphereAxisym { ntheta: usize },
}

impl BackgroundJson {
    pub fn of(spec: &BackgroundSpec) -> Self {
        match *spec {
            BackgroundSpec::FlatTorus { lx, ly, nx, ny } => {
                BackgroundJson::FlatTorus { lx, ly, nx, ny }
            }
            BackgroundSpec::SphereAxisym { ntheta } => BackgroundJson::SphereAxisym { ntheta },
        }
    }

    pub fn build(&self) -> Result<std::sync::Arc<l2flow_core::Background>, ConfigError> {
        self.spec().build()
    }

    pub fn spec(&self) -> BackgroundSpec {
        match *self {
            BackgroundJson::FlatTorus { lx, ly, nx, ny } => {
                BackgroundSpec::FlatTorus { lx, ly, nx, ny }
            }
            BackgroundJson::SphereAxisym { ntheta } => BackgroundSpec::SphereAxisym { ntheta },
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config_echo: String,
    pub t: f64,
    pub background: BackgroundJson,
    /// Conformal exponent u, row-major.
    pub u: Vec<f64>,
    pub dt: f64,
    pub step_count: u64,
    #[serde(default)]
    pub accepts_since_growth: u32,
}

impl Checkpoint {
    pub fn of_state(state: &FlowState, spec: &BackgroundSpec, config_echo: &str) -> Self {
        Checkpoint {
            format_version: FORMAT_VERSION,
            config_echo: config_echo.to_string(),
            t: state.t,
            background: BackgroundJson::of(spec),
            u: state.metric.u().values().to_vec(),
            dt: state.dt,
            step_count: state.step_count,
            accepts_since_growth: state.accepts_since_growth(),
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), ConfigError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| ConfigError(format!("checkpoint encode: {e}")))?;
        std::fs::write(path, json.as_bytes())
            .map_err(|e| ConfigError(format!("cannot write `{}`: {e}", path.display())))
    }

    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read `{path}`: {e}")))?;
        let ck: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("checkpoint decode: {e}")))?;
        if ck.format_version != FORMAT_VERSION {
            return Err(ConfigError(format!(
                "unsupported checkpoint format_version {}",
                ck.format_version
            )));
        }
        Ok(ck)
    }
}
