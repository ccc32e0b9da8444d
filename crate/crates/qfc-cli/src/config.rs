//! Versioned scenario configuration. One TOML tree per run; unknown keys are
//! hard errors so misspellings cannot silently corrupt physics runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{AppError, AppResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Cw,
    Pulsed,
    Study,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSection {
    /// Nonlinear coefficient γ, (W·m)⁻¹.
    pub gamma: f64,
    /// Raman fraction.
    pub f_r: f64,
    /// Pump power (CW) or peak power (pulsed), W.
    pub pump_power: f64,
    /// Fiber length, m; ignored when collision geometry sets it.
    #[serde(default)]
    pub length: f64,
    /// Scalar phase mismatch, rad/m.
    #[serde(default)]
    pub delta_beta: f64,
    /// Group-velocity coefficients, ps/m.
    #[serde(default)]
    pub beta1_s: f64,
    #[serde(default)]
    pub beta1_i: f64,
    /// Group-velocity dispersion, ps²/m.
    #[serde(default)]
    pub beta2_s: f64,
    #[serde(default)]
    pub beta2_i: f64,
    /// Fiber temperature, K.
    pub temperature: f64,
    /// Detuning Ω/2π in THz; negative = Stokes.
    pub detuning_thz: f64,
    /// "copolarized" or "anisotropic".
    pub polarization: String,
    /// Pump separation in THz for the pump-pump Raman term.
    #[serde(default = "default_pump_separation_thz")]
    pub pump_separation_thz: f64,
}

fn default_pump_separation_thz() -> f64 {
    80.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    /// Sample spacing, ps.
    pub dt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    /// Pump duration τ_p, ps.
    pub tau_p: f64,
    /// Initial pump separation Δt, ps; defaults to 6·τ_p.
    #[serde(default)]
    pub delta_t: Option<f64>,
    /// Collision geometry: walk-off ±Δn_eff/2c and ℓ = 2Δt·c/Δn_eff.
    #[serde(default = "default_true")]
    pub collision_geometry: bool,
    #[serde(default = "default_delta_n_eff")]
    pub delta_n_eff: f64,
}

fn default_true() -> bool {
    true
}

fn default_delta_n_eff() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// "gaussian", "schmidt" or "file".
    pub kind: String,
    /// Photon duration for the gaussian input, ps.
    #[serde(default)]
    pub tau_p: Option<f64>,
    /// Center time of the gaussian input, ps; defaults to -Δt/2 (pulsed).
    #[serde(default)]
    pub center: Option<f64>,
    /// Schmidt mode index for kind = "schmidt".
    #[serde(default)]
    pub mode_index: usize,
    /// Source: a modes CSV from a previous run (schmidt) or a sampled
    /// amplitude CSV with columns t,re,im (file).
    #[serde(default)]
    pub source: Option<PathBuf>,
}

impl Default for InputSection {
    fn default() -> Self {
        InputSection {
            kind: "gaussian".into(),
            tau_p: None,
            center: None,
            mode_index: 0,
            source: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    /// Full width Δω, rad/ps.
    pub width: f64,
    #[serde(default)]
    pub center: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    /// Detection window T, ps.
    pub window: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    /// Split-step count; 0 = automatic from the nonlinear length.
    #[serde(default)]
    pub steps: usize,
    #[serde(default = "default_raman_iterations")]
    pub raman_iterations: usize,
    /// Simpson nodes of the CW z-integral.
    #[serde(default = "default_z_nodes")]
    pub z_nodes: usize,
    /// Simpson nodes for the pulsed noise integral (0 = no noise pipeline).
    #[serde(default = "default_suffix_nodes")]
    pub suffix_nodes: usize,
    /// Compute the singular values of the full discretized Green matrix.
    #[serde(default)]
    pub unitarity_check: bool,
    #[serde(default)]
    pub dump_green: bool,
    #[serde(default)]
    pub dump_pumps: bool,
}

fn default_raman_iterations() -> usize {
    3
}
fn default_z_nodes() -> usize {
    65
}
fn default_suffix_nodes() -> usize {
    17
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            steps: 0,
            raman_iterations: default_raman_iterations(),
            z_nodes: default_z_nodes(),
            suffix_nodes: default_suffix_nodes(),
            unitarity_check: false,
            dump_green: false,
            dump_pumps: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// One of: pump_power, length, temperature, detuning_thz, window.
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub mode: Mode,
    /// Study name for mode = "study" (fig2 … fig7).
    #[serde(default)]
    pub study: Option<String>,
    /// Directory holding the Raman response tables.
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    pub fiber: FiberSection,
    pub grid: GridSection,
    #[serde(default)]
    pub pumps: Option<PumpSection>,
    #[serde(default)]
    pub input: InputSection,
    pub filter: FilterSection,
    pub detector: DetectorSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    pub output: OutputSection,
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

impl ScenarioConfig {
    pub fn validate(&self) -> AppResult<()> {
        let err = |m: String| Err(AppError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        for (name, v) in [
            ("fiber.gamma", self.fiber.gamma),
            ("fiber.pump_power", self.fiber.pump_power),
            ("fiber.temperature", self.fiber.temperature),
            ("filter.width", self.filter.width),
            ("detector.window", self.detector.window),
            ("grid.dt", self.grid.dt),
        ] {
            if !v.is_finite() {
                return err(format!("{name} must be finite, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.fiber.f_r) {
            return err(format!("fiber.f_r must be in [0,1], got {}", self.fiber.f_r));
        }
        if !matches!(self.fiber.polarization.as_str(), "copolarized" | "anisotropic") {
            return err(format!(
                "fiber.polarization must be copolarized|anisotropic, got {:?}",
                self.fiber.polarization
            ));
        }
        if self.grid.n < 8 || self.grid.dt <= 0.0 {
            return err(format!(
                "grid must have n ≥ 8 and dt > 0, got n={} dt={}",
                self.grid.n, self.grid.dt
            ));
        }
        match self.mode {
            Mode::Pulsed => {
                if self.pumps.is_none() {
                    return err("pulsed mode requires a [pumps] section".into());
                }
            }
            Mode::Cw => {
                if self.fiber.length <= 0.0 {
                    return err("cw mode requires fiber.length > 0".into());
                }
            }
            Mode::Study => {
                let name = self.study.as_deref().unwrap_or("");
                if !matches!(name, "fig2" | "fig3" | "fig4" | "fig5" | "fig6" | "fig7") {
                    return err(format!(
                        "study must be one of fig2…fig7, got {:?}",
                        self.study
                    ));
                }
            }
        }
        if !matches!(self.input.kind.as_str(), "gaussian" | "schmidt" | "file") {
            return err(format!(
                "input.kind must be gaussian|schmidt|file, got {:?}",
                self.input.kind
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.count == 0 {
                return err("sweep.count must be at least 1".into());
            }
            if !matches!(
                sweep.parameter.as_str(),
                "pump_power" | "length" | "temperature" | "detuning_thz" | "window"
            ) {
                return err(format!("unknown sweep.parameter {:?}", sweep.parameter));
            }
        }
        Ok(())
    }
}

/// Parsed config plus the content hash of its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub hash_hex: String,
    pub hash: [u8; 32],
    pub source_path: PathBuf,
}

pub fn load_config(path: impl AsRef<Path>) -> AppResult<LoadedConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ScenarioConfig = toml::from_str(&text).map_err(|e| {
        AppError::Config(format!("parse error in {}: {e}", path.display()))
    })?;
    config.validate()?;
    let digest = Sha256::digest(text.as_bytes());
    let mut hash = [0u8; 32];
    hash.copy_from_slice(&digest);
    let hash_hex = hash.iter().map(|b| format!("{b:02x}")).collect();
    Ok(LoadedConfig {
        config,
        hash_hex,
        hash,
        source_path: path.to_path_buf(),
    })
}
