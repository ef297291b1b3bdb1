//! Experiment configuration: JSON on disk, command-line overrides, and
//! resolution into library types.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stabfield::analysis::{DEFAULT_DEFECT_DELTA, DEFAULT_DELTA_GRID, DEFAULT_LEVEL};
use stabfield::{builtin, EvolutionConfig, ModelSpec, NoiseParams, StabilizerModel, Window};

use crate::error::CliError;

/// A model given by built-in name, by file path, or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Name(String),
    Inline(ModelSpec),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_ave: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_ave: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wx_ave: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wz_ave: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
}

/// A window by preset name (`"short"`, `"long"`) or explicit bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowRef {
    Preset(String),
    Explicit(Window),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<WindowRef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_level: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<ModelRef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Command-line values that replace config fields when given.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub alpha: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = &o.model {
            self.model = Some(ModelRef::Name(m.clone()));
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(v) = o.dt {
            self.evolution.dt = v;
        }
        if let Some(v) = o.t_max {
            self.evolution.t_max = v;
        }
        if let Some(v) = o.alpha {
            self.evolution.alpha = v;
        }
    }

    /// Replaces model names and paths by their inline specs, so the result
    /// no longer depends on files. `base` resolves relative paths.
    pub fn inline_models(&mut self, base: &Path) -> Result<(), CliError> {
        if let Some(m) = &mut self.model {
            *m = ModelRef::Inline(resolve_model(m, base, "model")?);
        }
        if let Some(ms) = &mut self.models {
            for (i, m) in ms.iter_mut().enumerate() {
                *m = ModelRef::Inline(resolve_model(m, base, &format!("models[{i}]"))?);
            }
        }
        Ok(())
    }

    pub fn out_dir(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Config("out: no output directory given (set `out` or pass --out)".into()))
    }

    pub fn evolution(&self) -> Result<EvolutionConfig, CliError> {
        self.evolution
            .validate()
            .map_err(|e| CliError::Config(format!("evolution: {e}")))?;
        Ok(self.evolution)
    }

    pub fn model(&self) -> Result<StabilizerModel, CliError> {
        match &self.model {
            Some(m) => build_model(m, "model"),
            None => Err(CliError::Config("model: required".into())),
        }
    }

    pub fn models(&self) -> Result<Vec<StabilizerModel>, CliError> {
        let Some(ms) = &self.models else {
            return Err(CliError::Config("models: required for scaling".into()));
        };
        ms.iter()
            .enumerate()
            .map(|(i, m)| build_model(m, &format!("models[{i}]")))
            .collect()
    }

    /// Noise bounds. `default_delta` is used when the section or all bounds
    /// are absent; `None` makes them required.
    pub fn noise(&self, default_delta: Option<f64>) -> Result<NoiseParams, CliError> {
        let n = self.noise.clone().unwrap_or_default();
        let n_samples = n.n_samples.unwrap_or(10);
        let bounds = [n.g_ave, n.h_ave, n.wx_ave, n.wz_ave];
        let params = match (n.delta, bounds.iter().filter(|b| b.is_some()).count()) {
            (Some(d), 0) => NoiseParams::from_delta(d, n_samples, self.seed),
            (Some(_), _) => {
                return Err(CliError::Config(
                    "noise: give either delta or the four bounds g_ave, h_ave, wx_ave, wz_ave, not both".into(),
                ))
            }
            (None, 4) => NoiseParams {
                g_ave: n.g_ave.unwrap(),
                h_ave: n.h_ave.unwrap(),
                wx_ave: n.wx_ave.unwrap(),
                wz_ave: n.wz_ave.unwrap(),
                n_samples,
                seed: self.seed,
            },
            (None, 0) => match default_delta {
                Some(d) => NoiseParams::from_delta(d, n_samples, self.seed),
                None => return Err(CliError::Config("noise: give delta or the four bounds".into())),
            },
            (None, _) => {
                let missing: Vec<&str> = ["g_ave", "h_ave", "wx_ave", "wz_ave"]
                    .iter()
                    .zip(bounds)
                    .filter(|(_, b)| b.is_none())
                    .map(|(name, _)| *name)
                    .collect();
                return Err(CliError::Config(format!("noise: missing {}", missing.join(", "))));
            }
        };
        params
            .validate()
            .map_err(|e| CliError::Config(format!("noise: {e}")))?;
        Ok(params)
    }

    /// Windows, checked against the integration time.
    pub fn windows(&self) -> Result<Vec<Window>, CliError> {
        let refs = self
            .analysis
            .windows
            .clone()
            .unwrap_or_else(|| vec![WindowRef::Preset("short".into()), WindowRef::Preset("long".into())]);
        if refs.is_empty() {
            return Err(CliError::Config("analysis.windows: empty".into()));
        }
        let t_max = self.evolution.t_max;
        let mut out: Vec<Window> = Vec::new();
        for r in refs {
            let w = match r {
                WindowRef::Preset(name) => Window::preset(&name).ok_or_else(|| {
                    CliError::Config(format!("analysis.windows: unknown preset {name:?} (use short or long)"))
                })?,
                WindowRef::Explicit(w) => w,
            };
            if !(w.t0 >= 0.0 && w.t1 > w.t0) {
                return Err(CliError::Config(format!("analysis.windows: {:?} needs 0 <= t0 < t1", w.name)));
            }
            if w.t1 > t_max + 1e-9 {
                return Err(CliError::Config(format!(
                    "analysis.windows: {:?} ends at {} beyond evolution.t_max {t_max}",
                    w.name, w.t1
                )));
            }
            if w.name.is_empty() || !w.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(CliError::Config(format!(
                    "analysis.windows: name {:?} must be non-empty [A-Za-z0-9_-]",
                    w.name
                )));
            }
            if out.iter().any(|o| o.name == w.name) {
                return Err(CliError::Config(format!("analysis.windows: duplicate name {:?}", w.name)));
            }
            out.push(w);
        }
        Ok(out)
    }

    pub fn delta_grid(&self) -> Result<Vec<f64>, CliError> {
        let grid = self.analysis.delta_grid.clone().unwrap_or_else(|| DEFAULT_DELTA_GRID.to_vec());
        if grid.is_empty() || grid.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(CliError::Config("analysis.delta_grid: needs finite values >= 0".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("analysis.delta_grid: must be strictly ascending".into()));
        }
        Ok(grid)
    }

    pub fn defect_grid(&self, n_qubits: usize) -> Result<Vec<usize>, CliError> {
        let grid = self.analysis.defect_grid.clone().unwrap_or_else(|| (0..=n_qubits).collect());
        if grid.is_empty() {
            return Err(CliError::Config("analysis.defect_grid: empty".into()));
        }
        if let Some(k) = grid.iter().find(|&&k| k > n_qubits) {
            return Err(CliError::Config(format!(
                "analysis.defect_grid: {k} exceeds the model's {n_qubits} qubits"
            )));
        }
        Ok(grid)
    }

    pub fn threshold_level(&self) -> Result<f64, CliError> {
        let level = self.analysis.threshold_level.unwrap_or(DEFAULT_LEVEL);
        if !(level > 0.0 && level < 1.0) {
            return Err(CliError::Config("analysis.threshold_level: must lie in (0, 1)".into()));
        }
        Ok(level)
    }

    /// Hex SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub const DEFECT_DELTA: f64 = DEFAULT_DEFECT_DELTA;

fn resolve_model(m: &ModelRef, base: &Path, field: &str) -> Result<ModelSpec, CliError> {
    match m {
        ModelRef::Inline(spec) => Ok(spec.clone()),
        ModelRef::Name(name) => {
            let path = base.join(name);
            if path.is_file() {
                ModelSpec::load(&path).map_err(|e| CliError::Config(format!("{field}: {}: {e}", path.display())))
            } else {
                builtin(name).map_err(|_| {
                    CliError::Config(format!("{field}: {name:?} is neither a file nor a built-in model"))
                })
            }
        }
    }
}

fn build_model(m: &ModelRef, field: &str) -> Result<StabilizerModel, CliError> {
    let ModelRef::Inline(spec) = m else {
        return Err(CliError::Config(format!("{field}: unresolved model reference")));
    };
    spec.build().map_err(|e| CliError::Config(format!("{field}: {e}")))
}
