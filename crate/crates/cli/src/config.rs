//! Experiment configuration: a flat key-value text format with dotted
//! section keys (`background.*`, `init.*`, `flow.*`, `output.*`, `sweep.*`).
//! Lines are `key = value`; `#` starts a comment; unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use l2flow_core::background::Background;
use l2flow_core::flow::{FlowConfig, Scheme};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum BackgroundSpec {
    FlatTorus { lx: f64, ly: f64, nx: usize, ny: usize },
    SphereAxisym { ntheta: usize },
}

impl BackgroundSpec {
    pub fn build(&self) -> Result<Arc<Background>, ConfigError> {
        match *self {
            BackgroundSpec::FlatTorus { lx, ly, nx, ny } => Background::flat_torus(lx, ly, nx, ny),
            BackgroundSpec::SphereAxisym { ntheta } => Background::sphere(ntheta),
        }
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, BackgroundSpec::SphereAxisym { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    /// Torus modes: (kx, ky, amplitude, phase).
    FourierModes(Vec<(i32, i32, f64, f64)>),
    /// Sphere modes: (l, amplitude) on P_l(cos θ).
    LegendreModes(Vec<(u32, f64)>),
    /// Seeded Gaussian field with spectrum e^{−|k|²/k0²}, max-normalized.
    RandomSmooth { seed: u64, amplitude: f64, k0: f64 },
    FromCheckpoint { path: String },
}

#[derive(Clone, Debug)]
pub struct OutputSpec {
    pub dir: String,
    /// Write an intermediate checkpoint every this many accepted steps
    /// (0 = final checkpoint only).
    pub checkpoint_every: u64,
    pub svg: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub background: BackgroundSpec,
    pub init: InitSpec,
    pub flow: FlowConfig,
    pub output: OutputSpec,
    pub sweep_amplitudes: Vec<f64>,
    /// The raw config text, echoed into checkpoints.
    pub echo: String,
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return err(format!("line {}: expected `key = value`", lineno + 1));
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if key.is_empty() || value.is_empty() {
            return err(format!("line {}: empty key or value", lineno + 1));
        }
        if map.insert(key.clone(), value).is_some() {
            return err(format!("line {}: duplicate key `{key}`", lineno + 1));
        }
    }
    Ok(map)
}

struct Keys {
    map: BTreeMap<String, String>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl Keys {
    fn get(&self, key: &str) -> Option<&str> {
        if self.map.contains_key(key) {
            self.used.borrow_mut().insert(key.to_string());
        }
        self.map.get(key).map(|s| s.as_str())
    }

    fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key)
            .ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| ConfigError(format!("key `{key}`: cannot parse `{v}`"))),
        }
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn parse_required<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let v = self.require(key)?;
        v.parse::<T>()
            .map_err(|_| ConfigError(format!("key `{key}`: cannot parse `{v}`")))
    }

    fn reject_unused(&self) -> Result<(), ConfigError> {
        let used = self.used.borrow();
        for k in self.map.keys() {
            if !used.contains(k) {
                return err(format!("unknown key `{k}`"));
            }
        }
        Ok(())
    }
}

fn parse_bool(keys: &Keys, key: &str, default: bool) -> Result<bool, ConfigError> {
    match keys.get(key) {
        None => Ok(default),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(v) => err(format!("key `{key}`: expected true/false, got `{v}`")),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let keys = Keys {
            map: parse_kv(text)?,
            used: Default::default(),
        };

        let background = match keys.require("background.kind")? {
            "flat_torus" => {
                let tau = 2.0 * std::f64::consts::PI;
                let nx: usize = keys.parse_required("background.nx")?;
                let ny = keys.parse_or("background.ny", nx)?;
                BackgroundSpec::FlatTorus {
                    lx: keys.parse_or("background.lx", tau)?,
                    ly: keys.parse_or("background.ly", tau)?,
                    nx,
                    ny,
                }
            }
            "sphere_axisym" => BackgroundSpec::SphereAxisym {
                ntheta: keys.parse_required("background.ntheta")?,
            },
            other => return err(format!("background.kind: unknown kind `{other}`")),
        };

        let init = match keys.require("init.kind")? {
            "fourier_modes" => {
                if background.is_sphere() {
                    return err("fourier_modes needs a flat_torus background");
                }
                let spec = keys.require("init.modes")?;
                let mut modes = Vec::new();
                for part in spec.split(';') {
                    let f: Vec<&str> = part.split(',').map(|s| s.trim()).collect();
                    if f.len() != 4 {
                        return err(format!(
                            "init.modes: expected `kx,ky,amp,phase`, got `{part}`"
                        ));
                    }
                    modes.push((
                        f[0].parse().map_err(|_| ConfigError(format!("bad kx `{}`", f[0])))?,
                        f[1].parse().map_err(|_| ConfigError(format!("bad ky `{}`", f[1])))?,
                        f[2].parse().map_err(|_| ConfigError(format!("bad amp `{}`", f[2])))?,
                        f[3].parse().map_err(|_| ConfigError(format!("bad phase `{}`", f[3])))?,
                    ));
                }
                InitSpec::FourierModes(modes)
            }
            "legendre_modes" => {
                if !background.is_sphere() {
                    return err("legendre_modes needs a sphere_axisym background");
                }
                let spec = keys.require("init.modes")?;
                let mut modes = Vec::new();
                for part in spec.split(';') {
                    let f: Vec<&str> = part.split(',').map(|s| s.trim()).collect();
                    if f.len() != 2 {
                        return err(format!("init.modes: expected `l,amp`, got `{part}`"));
                    }
                    modes.push((
                        f[0].parse().map_err(|_| ConfigError(format!("bad l `{}`", f[0])))?,
                        f[1].parse().map_err(|_| ConfigError(format!("bad amp `{}`", f[1])))?,
                    ));
                }
                InitSpec::LegendreModes(modes)
            }
            "random_smooth" => InitSpec::RandomSmooth {
                seed: keys.parse_required("init.seed")?,
                amplitude: keys.parse_or("init.amplitude", 0.1)?,
                k0: keys.parse_or("init.k0", 1.2)?,
            },
            "from_checkpoint" => InitSpec::FromCheckpoint {
                path: keys.require("init.checkpoint")?.to_string(),
            },
            other => return err(format!("init.kind: unknown kind `{other}`")),
        };
        // seed may be present for non-random kinds; mark it read.
        let _ = keys.get("init.seed");

        let scheme = match keys.get("flow.scheme").unwrap_or("semi_implicit") {
            "semi_implicit" => Scheme::SemiImplicit,
            "rk4" => Scheme::ExplicitRk4,
            other => return err(format!("flow.scheme: unknown scheme `{other}`")),
        };
        let flow = FlowConfig {
            normalized: parse_bool(&keys, "flow.normalized", false)?,
            scheme,
            dt_init: keys.parse_or("flow.dt_init", 1e-4)?,
            dt_max: keys.parse_or("flow.dt_max", 1e-2)?,
            t_end: keys.parse_required("flow.t_end")?,
            safety: keys.parse_or("flow.safety", 0.9)?,
            record_every: keys.parse_or("flow.record_every", 1)?,
            stop_calabi_below: keys.parse("flow.stop_calabi_below")?,
        };
        flow.validate().map_err(|e| ConfigError(e.to_string()))?;

        let output = OutputSpec {
            dir: keys.get("output.dir").unwrap_or("out").to_string(),
            checkpoint_every: keys.parse_or("output.checkpoint_every", 0)?,
            svg: parse_bool(&keys, "output.svg", false)?,
        };

        let sweep_amplitudes = match keys.get("sweep.amplitudes") {
            None => Vec::new(),
            Some(list) => {
                let mut amps = Vec::new();
                for part in list.split(',') {
                    amps.push(part.trim().parse::<f64>().map_err(|_| {
                        ConfigError(format!("sweep.amplitudes: bad entry `{part}`"))
                    })?);
                }
                amps
            }
        };

        keys.reject_unused()?;
        Ok(ExperimentConfig {
            background,
            init,
            flow,
            output,
            sweep_amplitudes,
            echo: text.to_string(),
        })
    }

    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read `{path}`: {e}")))?;
        Self::parse(&text)
    }

    /// Override the grid resolution (torus: nx = ny = n; sphere: nθ = n).
    pub fn set_resolution(&mut self, n: usize) {
        match &mut self.background {
            BackgroundSpec::FlatTorus { nx, ny, .. } => {
                *nx = n;
                *ny = n;
            }
            BackgroundSpec::SphereAxisym { ntheta } => *ntheta = n,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        if let InitSpec::RandomSmooth { seed: s, .. } = &mut self.init {
            *s = seed;
        }
    }

    /// Rescale the initial-data amplitude (used by sweeps): mode profiles are
    /// scaled so their largest amplitude equals `a`; random fields get
    /// `amplitude = a` directly.
    pub fn set_amplitude(&mut self, a: f64) {
        match &mut self.init {
            InitSpec::FourierModes(modes) => {
                let m = modes
                    .iter()
                    .map(|&(_, _, amp, _)| amp.abs())
                    .fold(0.0f64, f64::max)
                    .max(1e-300);
                for mode in modes {
                    mode.2 *= a / m;
                }
            }
            InitSpec::LegendreModes(modes) => {
                let m = modes
                    .iter()
                    .map(|&(_, amp)| amp.abs())
                    .fold(0.0f64, f64::max)
                    .max(1e-300);
                for mode in modes {
                    mode.1 *= a / m;
                }
            }
            InitSpec::RandomSmooth { amplitude, .. } => *amplitude = a,
            InitSpec::FromCheckpoint { .. } => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "\
background.kind = flat_torus
background.nx = 32
init.kind = fourier_modes
init.modes = 1,0,0.3,0
flow.t_end = 1.0
output.dir = /tmp/x
";

    #[test]
    fn parses_minimal_torus_config() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(
            cfg.background,
            BackgroundSpec::FlatTorus {
                lx: 2.0 * std::f64::consts::PI,
                ly: 2.0 * std::f64::consts::PI,
                nx: 32,
                ny: 32
            }
        );
        assert_eq!(cfg.init, InitSpec::FourierModes(vec![(1, 0, 0.3, 0.0)]));
        assert_eq!(cfg.flow.record_every, 1);
        assert!(!cfg.output.svg);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let text = format!("{BASE}background.bogus = 7\n");
        assert!(ExperimentConfig::parse(&text).is_err());
        let text = format!("{BASE}background.nx = 64\n");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn random_smooth_requires_seed() {
        let text = "\
background.kind = flat_torus
background.nx = 32
init.kind = random_smooth
flow.t_end = 1.0
";
        let e = ExperimentConfig::parse(text).unwrap_err();
        assert!(e.0.contains("init.seed"), "{e}");
    }

    #[test]
    fn comments_and_spacing_are_tolerated() {
        let text = "\
# experiment
background.kind = sphere_axisym   # round sphere
background.ntheta = 64

init.kind   =   legendre_modes
init.modes  = 2, 0.1 ; 4, 0.05
flow.t_end  = 0.5
flow.scheme = rk4
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.init, InitSpec::LegendreModes(vec![(2, 0.1), (4, 0.05)]));
        assert_eq!(cfg.flow.scheme, Scheme::ExplicitRk4);
    }

    #[test]
    fn amplitude_rescaling() {
        let mut cfg = ExperimentConfig::parse(BASE).unwrap();
        cfg.set_amplitude(0.12);
        assert_eq!(cfg.init, InitSpec::FourierModes(vec![(1, 0, 0.12, 0.0)]));
    }
}
