//! Builders translating a parsed config into core scenario objects.

use num_complex::Complex64;
use qfc_core::cw::FiberScenario;
use qfc_core::grid::{FieldDomain, SampledField, TimeGrid};
use qfc_core::pump::{init_gaussian_pumps, PumpPair};
use qfc_core::raman::{silica_tables_from_dir, PolarizationConfig, RamanResponse};
use qfc_core::schmidt::SchmidtDecomposition;

use crate::config::ScenarioConfig;
use crate::{AppError, AppResult};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn polarization(cfg: &ScenarioConfig) -> PolarizationConfig {
    match cfg.fiber.polarization.as_str() {
        "anisotropic" => PolarizationConfig::Anisotropic,
        _ => PolarizationConfig::Copolarized,
    }
}

pub fn build_grid(cfg: &ScenarioConfig) -> AppResult<TimeGrid> {
    Ok(TimeGrid::centered(cfg.grid.n, cfg.grid.dt)?)
}

/// Pump separation Δt, ps (pulsed only).
pub fn pump_delta_t(cfg: &ScenarioConfig) -> f64 {
    let pumps = cfg.pumps.as_ref().expect("pulsed config");
    pumps.delta_t.unwrap_or(6.0 * pumps.tau_p)
}

/// Build the fiber scenario; in collision geometry the length and the
/// walk-off follow from Δt and Δn_eff, with the idler/pump-p pair moving
/// against the signal/pump-q pair in the mean frame.
pub fn build_scenario(cfg: &ScenarioConfig) -> AppResult<FiberScenario> {
    let f = &cfg.fiber;
    let mut length = f.length;
    let mut beta1_i = f.beta1_i;
    let mut beta1_s = f.beta1_s;
    if let Some(p) = &cfg.pumps {
        if p.collision_geometry {
            let delta_t = pump_delta_t(cfg);
            length = 2.0 * delta_t * qfc_core::C_M_PER_PS / p.delta_n_eff;
            let walkoff = p.delta_n_eff / qfc_core::C_M_PER_PS;
            beta1_i = -0.5 * walkoff;
            beta1_s = 0.5 * walkoff;
        }
    }
    let mut scn = FiberScenario::new(
        f.gamma,
        f.f_r,
        f.pump_power,
        length,
        f.temperature,
        TWO_PI * f.detuning_thz,
        polarization(cfg),
    )?;
    scn.delta_beta = f.delta_beta;
    scn.beta1_i = beta1_i;
    scn.beta1_s = beta1_s;
    scn.beta2_i = f.beta2_i;
    scn.beta2_s = f.beta2_s;
    scn.pump_separation = TWO_PI * f.pump_separation_thz;
    Ok(scn)
}

pub fn build_response(cfg: &ScenarioConfig, scn: &FiberScenario) -> AppResult<RamanResponse> {
    let (h_par, h_b) = silica_tables_from_dir(&cfg.data_dir)?;
    Ok(scn.response(h_par, h_b)?)
}

/// Gaussian pumps positioned for the collision geometry. Pump p co-moves
/// with the idler (β₁p = β₁i), pump q with the signal; the β₂ pairing is
/// (p,s) and (q,i) per the symmetric placement around the zero-dispersion
/// frequency.
pub fn build_pumps(cfg: &ScenarioConfig, scn: &FiberScenario, grid: TimeGrid) -> AppResult<PumpPair> {
    let p = cfg
        .pumps
        .as_ref()
        .ok_or_else(|| AppError::Config("pulsed run needs a [pumps] section".into()))?;
    let delta_t = pump_delta_t(cfg);
    let mut pumps = init_gaussian_pumps(cfg.fiber.pump_power, p.tau_p, delta_t, grid)?;
    pumps.beta1_p = scn.beta1_i;
    pumps.beta1_q = scn.beta1_s;
    pumps.beta2_p = scn.beta2_s;
    pumps.beta2_q = scn.beta2_i;
    Ok(pumps)
}

/// Normalized Gaussian photon amplitude.
pub fn gaussian_input(grid: TimeGrid, tau: f64, center: f64) -> SampledField {
    let norm = 1.0 / (tau.sqrt() * (2.0 * std::f64::consts::PI).powf(0.25));
    SampledField::from_fn(grid, |t| {
        let x = t - center;
        Complex64::new(norm * (-x * x / (4.0 * tau * tau)).exp(), 0.0)
    })
}

/// Unit-normalized state from a Schmidt decomposition's input mode.
pub fn schmidt_input(dec: &SchmidtDecomposition, index: usize) -> AppResult<SampledField> {
    let mode = dec.input_state(index)?;
    Ok(SampledField::new(dec.grid, FieldDomain::Time, mode))
}

/// Read a sampled amplitude CSV `t (ps),re,im` and renormalize to unit norm.
pub fn file_input(grid: TimeGrid, path: &std::path::Path) -> AppResult<SampledField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read input state {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            return Err(AppError::Config(format!(
                "{}: row {} needs t,re,im",
                path.display(),
                i + 1
            )));
        }
        let re: f64 = cols[1]
            .trim()
            .parse()
            .map_err(|e| AppError::Config(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        let im: f64 = cols[2]
            .trim()
            .parse()
            .map_err(|e| AppError::Config(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        values.push(Complex64::new(re, im));
    }
    if values.len() != grid.len() {
        return Err(AppError::Config(format!(
            "input state in {} has {} samples, grid needs {}",
            path.display(),
            values.len(),
            grid.len()
        )));
    }
    let mut field = SampledField::new(grid, FieldDomain::Time, values.into());
    let norm = field.energy().sqrt();
    if norm > 0.0 {
        field.values.mapv_inplace(|v| v / norm);
    }
    Ok(field)
}

/// The default input-photon center: riding with pump q so the photon meets
/// the collision at the fiber midpoint.
pub fn default_input_center(cfg: &ScenarioConfig) -> f64 {
    if cfg.pumps.is_some() {
        -0.5 * pump_delta_t(cfg)
    } else {
        0.0
    }
}

pub fn input_tau(cfg: &ScenarioConfig) -> f64 {
    cfg.input
        .tau_p
        .or(cfg.pumps.as_ref().map(|p| p.tau_p))
        .unwrap_or(0.1)
}
