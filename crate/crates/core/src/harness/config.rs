//! Run configuration: a flat `key = value` document with dotted keys,
//! e.g. `params.lambda = 1.0`, parsed as TOML.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nsa::ModeTable;
use crate::qstate::io::load_binary;
use crate::qstate::{render_gaussian, GaussianState, GridSpec, PhysicalParams, WaveFunction, DEFAULT_BOUNDARY_TOLERANCE};
use crate::sde::{Diagnostics, MAX_STEP_EXPONENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Linear,
    Nonlinear,
    GaussianFlow,
    NsaGrid,
    FiniteDim,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Linear => "linear",
            SchemeKind::Nonlinear => "nonlinear",
            SchemeKind::GaussianFlow => "gaussian_flow",
            SchemeKind::NsaGrid => "nsa_grid",
            SchemeKind::FiniteDim => "finite_dim",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Gaussian {
        alpha_re: f64,
        alpha_im: f64,
        x: f64,
        k: f64,
    },
    NsaMode {
        n: usize,
    },
    /// Σ w_n u_n over the listed mode indices.
    ModeMixture {
        modes: Vec<usize>,
        weights_re: Vec<f64>,
        weights_im: Vec<f64>,
    },
    /// √w₁ G(x₁) + √(1 − w₁) G(x₂) with attractor-width Gaussians.
    TwoBump {
        x1: f64,
        x2: f64,
        w1: f64,
    },
    File {
        path: PathBuf,
    },
}

impl InitialState {
    /// Unit-norm state on `grid`.
    pub fn render(&self, params: &PhysicalParams, grid: &GridSpec) -> Result<WaveFunction> {
        let psi = match self {
            InitialState::Gaussian { alpha_re, alpha_im, x, k } => {
                let alpha = Complex64::new(*alpha_re, *alpha_im);
                render_gaussian(&GaussianState::normalized(alpha, *x, *k), grid)?
            }
            InitialState::NsaMode { n } => ModeTable::new(*n, params, grid)?.mode(*n)?.profile,
            InitialState::ModeMixture {
                modes,
                weights_re,
                weights_im,
            } => {
                if weights_re.len() != modes.len() || weights_im.len() != modes.len() {
                    return Err(Error::ConfigInvalid(
                        "initial.modes, initial.weights_re and initial.weights_im must have equal length".into(),
                    ));
                }
                let n_max = modes.iter().copied().max().unwrap_or(0);
                let table = ModeTable::new(n_max, params, grid)?;
                let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
                for ((&n, &re), &im) in modes.iter().zip(weights_re).zip(weights_im) {
                    c[n] += Complex64::new(re, im);
                }
                table.reconstruct(&c)?
            }
            InitialState::TwoBump { x1, x2, w1 } => {
                if !(0.0..=1.0).contains(w1) {
                    return Err(Error::BadWeights(*w1));
                }
                let g1 = GaussianState::coherent(params, *x1, 0.0);
                let g2 = GaussianState::coherent(params, *x2, 0.0);
                let (a1, a2) = (w1.sqrt(), (1.0 - w1).sqrt());
                WaveFunction::from_fn(*grid, |x| a1 * g1.value(x) + a2 * g2.value(x))?
            }
            InitialState::File { path } => {
                let (psi, _) = load_binary(path)?;
                if psi.grid() != grid {
                    return Err(Error::InvalidGrid(format!(
                        "state file {} was written on a different grid",
                        path.display()
                    )));
                }
                psi
            }
        };
        psi.check_boundary(DEFAULT_BOUNDARY_TOLERANCE)?;
        psi.normalized()
    }
}

/// Spectrum and populations for the finite-dimensional scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSection {
    pub spectrum: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    /// Drive with noise; `false` runs the noiseless flow.
    #[serde(default = "default_true")]
    pub noise: bool,
    /// Keep nonlinear states centred by lattice translations and boosts.
    #[serde(default = "default_true")]
    pub recenter: bool,
    /// Cut points splitting the line into outcome regions.
    #[serde(default = "default_edges")]
    pub born_edges: Vec<f64>,
    pub params: PhysicalParams,
    pub grid: GridSpec,
    pub initial: InitialState,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite: Option<FiniteSection>,
}

fn default_true() -> bool {
    true
}

fn default_edges() -> Vec<f64> {
    vec![0.0]
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::Nonlinear,
            dt: 2.5e-4,
            t_end: 1.0,
            record_stride: 40,
            n_trajectories: 1,
            seed: 1,
            noise: true,
            recenter: true,
            born_edges: default_edges(),
            params: PhysicalParams::natural(),
            grid: GridSpec::symmetric(16.0, 128).expect("default grid"),
            initial: InitialState::Gaussian {
                alpha_re: 1.0,
                alpha_im: 0.0,
                x: 0.0,
                k: 0.0,
            },
            diagnostics: Diagnostics::default(),
            finite: None,
        }
    }
}

impl RunConfig {
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) {
            return bad(format!("t_end must be >= dt, got {}", self.t_end));
        }
        if self.n_trajectories == 0 {
            return bad("n_trajectories must be >= 1".into());
        }
        if self.record_stride == 0 {
            return bad("record_stride must be >= 1".into());
        }
        if self.seed > i64::MAX as u64 {
            return bad("seed must fit in a signed 64-bit integer".into());
        }
        self.params.validated()?;
        self.grid.validated()?;
        if matches!(self.scheme, SchemeKind::Linear | SchemeKind::Nonlinear) {
            let exponent = self.params.lambda * self.grid.x_abs_max().powi(2) * self.dt;
            if exponent > MAX_STEP_EXPONENT {
                return bad(format!(
                    "dt too large for the grid: lambda * x_max^2 * dt = {exponent:.3e} > {MAX_STEP_EXPONENT}"
                ));
            }
        }
        match (self.scheme, &self.initial) {
            (SchemeKind::GaussianFlow, InitialState::Gaussian { .. }) => {}
            (SchemeKind::GaussianFlow, _) => return bad("gaussian_flow needs initial.kind = \"gaussian\"".into()),
            (SchemeKind::FiniteDim, _) => {
                let f = self
                    .finite
                    .as_ref()
                    .ok_or_else(|| Error::ConfigInvalid("finite_dim needs finite.spectrum and finite.weights".into()))?;
                if f.spectrum.len() != f.weights.len() || f.spectrum.is_empty() {
                    return bad("finite.spectrum and finite.weights must be non-empty and equal length".into());
                }
                return Ok(());
            }
            _ => {}
        }
        self.initial.render(&self.params, &self.grid).map(|_| ())
    }

    /// Flat `key = value` text; parsing it back gives the same config.
    pub fn to_flat_string(&self) -> Result<String> {
        let value = toml::Value::try_from(self).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        let mut out = String::new();
        flatten("", &value, &mut out);
        Ok(out)
    }

    pub fn from_flat_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        for (key, value) in overrides {
            set_dotted(&mut table, key, value)?;
        }
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::ConfigInvalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file layered key by key over [`RunConfig::default`].
    /// An `initial` section in the file replaces the default one whole,
    /// since its keys depend on `initial.kind`.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: toml::Table = toml::from_str(&text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        let mut table: toml::Table = toml::from_str(&Self::default().to_flat_string()?)
            .map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        if file.contains_key("initial") {
            table.remove("initial");
        }
        merge(&mut table, file);
        Self::from_flat_str(&toml::to_string(&table).map_err(|e| Error::ConfigInvalid(e.to_string()))?, overrides)
    }

    /// Applies overrides to this config and revalidates.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self> {
        Self::from_flat_str(&self.to_flat_string()?, overrides)
    }

    /// SHA-256 of the flat serialization, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_flat_string()?.as_bytes())))
    }
}

fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut String) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => {
            let _ = writeln!(out, "{prefix} = {other}");
        }
    }
}

/// Sets `a.b.c` to `raw`, read as a TOML value or else as a bare string.
pub fn set_dotted(table: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::ConfigInvalid(format!("bad key '{key}'")));
    }
    let mut node = table;
    for p in &parts[..parts.len() - 1] {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::ConfigInvalid(format!("'{p}' in '{key}' is not a section")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::ConfigInvalid(format!("override '{s}' is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}
