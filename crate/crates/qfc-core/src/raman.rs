//! Electronic tensor, causal Raman response functions, thermal phonon
//! population and the spontaneous-noise spectrum.
//!
//! The delayed response is parameterized as a sum of damped harmonic
//! oscillators, `h(t) = Θ(t) Σ_i F_i d_i sin(ω_i t) e^{-d_i t}`, normalized
//! so ∫h dt = 1, which makes the Raman fraction f_R a clean partition of the
//! total nonlinearity (h̃(0) = 1). Spectra are evaluated in closed form, so
//! propagation grids never need to resolve the oscillator frequencies; the
//! detuning modulation e^{iΩt} stays attached analytically and only shows up
//! as the frequency shift ω → ω + Ω of the baseband spectra.

use std::path::Path;

use ndarray::Array1;
use num_complex::Complex64;

use crate::error::CoreError;
use crate::grid::{SampledField, TimeGrid, SQRT_2PI};
use crate::HBAR_OVER_KB;

/// One damped-oscillator row of a response table: amplitude, center frequency
/// and decay rate (rad/ps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub amplitude: f64,
    pub omega: f64,
    pub decay: f64,
}

/// Damped-oscillator parameterization of a causal response function.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorTable {
    rows: Vec<Oscillator>,
}

impl OscillatorTable {
    pub fn new(rows: Vec<Oscillator>) -> Result<Self, CoreError> {
        if rows.is_empty() {
            return Err(CoreError::Parameter("oscillator table is empty".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if !(r.decay > 0.0) || !(r.omega > 0.0) {
                return Err(CoreError::Parameter(format!(
                    "oscillator {i} must have positive frequency and decay, got ω={}, d={}",
                    r.omega, r.decay
                )));
            }
        }
        Ok(OscillatorTable { rows })
    }

    /// Parse a CSV table with header `F,omega_THz,d_THz`; frequencies are
    /// converted THz → rad/ps with a 2π factor.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self, CoreError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::Data {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_csv_str(&text).map_err(|e| match e {
            CoreError::Data { reason, .. } => CoreError::Data {
                path: path.display().to_string(),
                reason,
            },
            other => other,
        })
    }

    pub fn from_csv_str(text: &str) -> Result<Self, CoreError> {
        let data_err = |reason: String| CoreError::Data {
            path: "<string>".into(),
            reason,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| data_err("empty file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["F", "omega_THz", "d_THz"] {
            return Err(data_err(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for (ln, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(data_err(format!("row {}: expected 3 columns", ln + 2)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| data_err(format!("row {}: {e}", ln + 2)))
            };
            let two_pi = 2.0 * std::f64::consts::PI;
            rows.push(Oscillator {
                amplitude: parse(fields[0])?,
                omega: two_pi * parse(fields[1])?,
                decay: two_pi * parse(fields[2])?,
            });
        }
        OscillatorTable::new(rows)
    }

    pub fn rows(&self) -> &[Oscillator] {
        &self.rows
    }

    /// ∫₀^∞ h(t) dt = Σ F d ω/(ω²+d²), in closed form.
    pub fn integral(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.amplitude * r.decay * r.omega / (r.omega * r.omega + r.decay * r.decay))
            .sum()
    }

    /// Rescale all amplitudes by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        OscillatorTable {
            rows: self
                .rows
                .iter()
                .map(|r| Oscillator {
                    amplitude: r.amplitude * s,
                    ..*r
                })
                .collect(),
        }
    }

    /// Time-domain kernel value; exactly zero for t < 0.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        self.rows
            .iter()
            .map(|r| r.amplitude * r.decay * (r.omega * t).sin() * (-r.decay * t).exp())
            .sum()
    }

    /// Closed-form spectrum `h̃(ν) = ∫₀^∞ h(t) e^{+iνt} dt`.
    pub fn spectrum(&self, nu: f64) -> Complex64 {
        let mut s = Complex64::default();
        for r in &self.rows {
            let denom = Complex64::new(r.decay, -nu).powi(2) + r.omega * r.omega;
            s += r.amplitude * r.decay * r.omega / denom;
        }
        s
    }

    /// Far-detuned estimate of Im h̃(ν) from the leading Laurent term,
    /// `(2/ν³) Σ F ω d²`.
    pub fn laurent_im_spectrum(&self, nu: f64) -> f64 {
        let sum: f64 = self
            .rows
            .iter()
            .map(|r| r.amplitude * r.omega * r.decay * r.decay)
            .sum();
        2.0 * sum / (nu * nu * nu)
    }
}

/// Builds the sampled parallel response on a grid; the grid must resolve the
/// fastest oscillator (dt·max ω_i < π/4). The result is rescaled so that
/// ∫h dt = 1 in the continuum sense (closed-form integral).
pub fn build_h_parallel(table: &OscillatorTable, grid: TimeGrid) -> Result<SampledField, CoreError> {
    let max_omega = table
        .rows()
        .iter()
        .map(|r| r.omega)
        .fold(0.0f64, f64::max);
    if grid.dt() * max_omega >= std::f64::consts::FRAC_PI_4 {
        return Err(CoreError::Bandwidth(format!(
            "dt·max(ω_i) = {:.3} exceeds π/4; the grid under-resolves the response",
            grid.dt() * max_omega
        )));
    }
    let scale = 1.0 / table.integral();
    Ok(SampledField::from_fn(grid, |t| {
        Complex64::new(scale * table.eval(t), 0.0)
    }))
}

/// Polarization configuration of the four fields. Copolarized maximizes the
/// delayed response (parallel h); anisotropic (Raman-coupled pairs crossed)
/// minimizes it (orthogonal h_b/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizationConfig {
    Copolarized,
    Anisotropic,
}

/// Linear polarization label for tensor lookups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    X,
    Y,
}

/// Electronic tensor γ_ijkl = ½γ(1-f_R)(δ_ij δ_kl + δ_ik δ_jl + δ_il δ_jk).
pub fn gamma_tensor(gamma: f64, f_r: f64, indices: [Pol; 4]) -> Result<f64, CoreError> {
    if !(0.0..=1.0).contains(&f_r) {
        return Err(CoreError::Parameter(format!("f_R must be in [0,1], got {f_r}")));
    }
    let d = |a: Pol, b: Pol| if a == b { 1.0 } else { 0.0 };
    let [i, j, k, l] = indices;
    let delta_sum = d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k);
    Ok(0.5 * gamma * (1.0 - f_r) * delta_sum)
}

impl PolarizationConfig {
    /// Polarizations of (i, q, p, s) in this configuration.
    pub fn field_pols(self) -> [Pol; 4] {
        match self {
            PolarizationConfig::Copolarized => [Pol::X, Pol::X, Pol::X, Pol::X],
            // Raman-coupled pairs (i,q) and (s,p) are crossed
            PolarizationConfig::Anisotropic => [Pol::X, Pol::Y, Pol::Y, Pol::X],
        }
    }

    /// δ-sum weight of the cross-coupling element γ_iqps: 3 copolarized,
    /// 1 anisotropic.
    fn electronic_weight(self) -> f64 {
        let [i, q, p, s] = self.field_pols();
        let d = |a: Pol, b: Pol| if a == b { 1.0 } else { 0.0 };
        d(i, q) * d(p, s) + d(i, p) * d(q, s) + d(i, s) * d(q, p)
    }
}

/// The full Raman model for one scenario: configuration, Raman fraction,
/// detuning, nonlinear coefficient and the ingested oscillator tables.
///
/// `h_par` is normalized to unit integral; `h_b` shares the same scale. The
/// effective response entering the field equations is h_par (copolarized) or
/// h_b/2 (anisotropic); both the NPM and Bragg-scattering Raman couplings
/// reduce to the same element in these configurations, so the response is
/// balanced by construction.
#[derive(Debug, Clone)]
pub struct RamanResponse {
    pub config: PolarizationConfig,
    pub f_r: f64,
    /// Signed detuning Ω = ω_i - ω_q in rad/ps; negative selects the Stokes
    /// side (idler below its pump).
    pub detuning: f64,
    pub gamma: f64,
    h_par: OscillatorTable,
    h_b: OscillatorTable,
}

impl RamanResponse {
    pub fn new(
        config: PolarizationConfig,
        gamma: f64,
        f_r: f64,
        detuning: f64,
        h_par: OscillatorTable,
        h_b: OscillatorTable,
    ) -> Result<Self, CoreError> {
        if !(0.0..=1.0).contains(&f_r) {
            return Err(CoreError::Parameter(format!("f_R must be in [0,1], got {f_r}")));
        }
        let scale = 1.0 / h_par.integral();
        Ok(RamanResponse {
            config,
            f_r,
            detuning,
            gamma,
            h_par: h_par.scaled(scale),
            h_b: h_b.scaled(scale),
        })
    }

    /// Load the parallel and orthogonal tables from CSV files.
    pub fn from_csv_files(
        config: PolarizationConfig,
        gamma: f64,
        f_r: f64,
        detuning: f64,
        h_par_path: impl AsRef<Path>,
        h_b_path: impl AsRef<Path>,
    ) -> Result<Self, CoreError> {
        let h_par = OscillatorTable::from_csv(h_par_path)?;
        let h_b = OscillatorTable::from_csv(h_b_path)?;
        RamanResponse::new(config, gamma, f_r, detuning, h_par, h_b)
    }

    pub fn h_parallel(&self) -> &OscillatorTable {
        &self.h_par
    }

    pub fn h_b(&self) -> &OscillatorTable {
        &self.h_b
    }

    /// The isotropic part h_a(t) = h(t) - h_b(t).
    pub fn h_a_eval(&self, t: f64) -> f64 {
        self.h_par.eval(t) - self.h_b.eval(t)
    }

    /// Baseband spectrum of the configuration's effective response kernel
    /// without the detuning shift: h̃_eff(ν).
    pub fn h_eff_spectrum(&self, nu: f64) -> Complex64 {
        match self.config {
            PolarizationConfig::Copolarized => self.h_par.spectrum(nu),
            PolarizationConfig::Anisotropic => 0.5 * self.h_b.spectrum(nu),
        }
    }

    /// Electronic cross-coupling element γ_iqps for this configuration.
    pub fn gamma_iqps(&self) -> f64 {
        0.5 * self.gamma * (1.0 - self.f_r) * self.config.electronic_weight()
    }

    /// `f(ω) = (1/√2π) ∫ f_eff(t) e^{iωt} dt = (γ f_R/√2π) h̃_eff(ω + Ω)`:
    /// the paper-convention spectrum of the detuning-modulated kernel.
    pub fn response_spectrum_at(&self, omega: f64) -> Complex64 {
        self.gamma * self.f_r / SQRT_2PI * self.h_eff_spectrum(omega + self.detuning)
    }

    /// Convolution symbol `∫ f_eff(t) e^{iωt} dt = γ f_R h̃_eff(ω + Ω)` used
    /// by the split-step Raman kernels (equals √2π·response_spectrum_at).
    pub fn kernel_symbol(&self, omega: f64) -> Complex64 {
        self.gamma * self.f_r * self.h_eff_spectrum(omega + self.detuning)
    }

    /// `R(ω)` defined through Im f(ω) = √2π γ f_R R(ω).
    pub fn r_of(&self, omega: f64) -> f64 {
        self.h_eff_spectrum(omega + self.detuning).im / (2.0 * std::f64::consts::PI)
    }

    /// Leading Laurent-tail estimate of R(0) for far detunings.
    pub fn laurent_r0(&self) -> f64 {
        let im = match self.config {
            PolarizationConfig::Copolarized => self.h_par.laurent_im_spectrum(self.detuning),
            PolarizationConfig::Anisotropic => 0.5 * self.h_b.laurent_im_spectrum(self.detuning),
        };
        im / (2.0 * std::f64::consts::PI)
    }

    /// Noise spectrum `F(ω) = √2π Im[f(ω)] n_th(ω + Ω)`; non-negative for a
    /// passive response on both Stokes and anti-Stokes sides.
    ///
    /// At ω + Ω = 0 the thermal pole cancels against the vanishing Im f,
    /// leaving the finite classical limit; evaluated a hair off the pole.
    pub fn noise_spectrum_at(&self, omega: f64, temperature: f64) -> f64 {
        if self.f_r == 0.0 {
            return 0.0;
        }
        let mut arg = omega + self.detuning;
        if arg == 0.0 {
            arg = 1e-9;
        }
        let im_f = (self.gamma * self.f_r / SQRT_2PI * self.h_eff_spectrum(arg)).im;
        SQRT_2PI * im_f * thermal_population(arg, temperature)
    }
}

/// Evaluate `response_spectrum_at` on an array of frequencies.
pub fn response_spectrum(response: &RamanResponse, omegas: &Array1<f64>) -> Array1<Complex64> {
    omegas.mapv(|w| response.response_spectrum_at(w))
}

/// Evaluate the noise spectrum F(ω) on an array of frequencies.
pub fn noise_spectrum(
    response: &RamanResponse,
    temperature: f64,
    omegas: &Array1<f64>,
) -> Array1<f64> {
    omegas.mapv(|w| response.noise_spectrum_at(w, temperature))
}

/// Load the parallel and orthogonal silica tables from a data directory
/// holding `raman_silica.csv` and `raman_silica_hb.csv`.
pub fn silica_tables_from_dir(
    dir: impl AsRef<Path>,
) -> Result<(OscillatorTable, OscillatorTable), CoreError> {
    let dir = dir.as_ref();
    Ok((
        OscillatorTable::from_csv(dir.join("raman_silica.csv"))?,
        OscillatorTable::from_csv(dir.join("raman_silica_hb.csv"))?,
    ))
}

/// Bose-Einstein population n_th(ω) = 1/(e^{ħω/k_B T} - 1).
///
/// Negative frequencies return -1 - n_th(|ω|); T = 0 gives 0 for ω > 0 and
/// -1 for ω < 0. ω = 0 is a pole and panics in debug/propagates NaN guard.
pub fn thermal_population(omega: f64, temperature: f64) -> f64 {
    assert!(omega != 0.0, "thermal population has a pole at ω = 0");
    assert!(temperature >= 0.0, "temperature must be non-negative");
    if temperature == 0.0 {
        return if omega > 0.0 { 0.0 } else { -1.0 };
    }
    let x = HBAR_OVER_KB * omega / temperature;
    1.0 / x.exp_m1()
}
