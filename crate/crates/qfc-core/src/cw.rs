//! Closed-form frequency-domain Green functions and derived observables for
//! continuous-wave pumps.
//!
//! The two-flavor system `∂_z â = i[[κ_i, g],[g, κ_s]]â + noise` has the
//! exact solution
//!
//! ```text
//! G_ii = e^{iμz} [cos(kz) + i·(δ/k)·sin(kz)]     μ = (κ_i + κ_s)/2
//! G_is = i (g/k) e^{iμz} sin(kz)                 δ = (κ_i - κ_s)/2
//! k = √(g² + δ²) = ½√(4g² + Δβ(ω)²)
//! ```
//!
//! with the scalar phase mismatch folded into the couplings (κ_i carries
//! +Δβ/2, κ_s carries -Δβ/2), so all Green functions here live in the
//! phase-matched rotating frame. `cos(kz)` and `sin(kz)/k` are even in k,
//! making the square-root branch irrelevant; the k → 0 degeneracy is handled
//! by the series limit.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::CoreError;
use crate::grid::{
    forward_fft, inverse_fft, FftEngine, FieldDomain, SampledField, TimeGrid, SQRT_2PI,
};
use crate::raman::{thermal_population, PolarizationConfig, RamanResponse};
use crate::stats::SpectralFilter;

/// Physical parameters of one fiber run. Dispersion coefficients are
/// per-flavor expansions around the respective carrier; `delta_beta` is the
/// scalar carrier phase mismatch.
#[derive(Debug, Clone)]
pub struct FiberScenario {
    /// Nonlinear coefficient γ in (W·m)⁻¹.
    pub gamma: f64,
    /// Raman fraction of the nonlinearity.
    pub f_r: f64,
    /// Power per pump in W.
    pub pump_power: f64,
    /// Fiber length in m.
    pub length: f64,
    /// Scalar phase mismatch in rad/m.
    pub delta_beta: f64,
    /// Optional tabulated Δβ(ω) on the working grid, rad/m; overrides the
    /// scalar inside k(ω) when present.
    pub delta_beta_curve: Option<Array1<f64>>,
    /// Group-velocity coefficients, ps/m.
    pub beta1_s: f64,
    pub beta1_i: f64,
    /// Group-velocity dispersion, ps²/m.
    pub beta2_s: f64,
    pub beta2_i: f64,
    /// Fiber temperature in K.
    pub temperature: f64,
    /// Detuning Ω = ω_i - ω_q in rad/ps (negative = Stokes).
    pub detuning: f64,
    /// Separation between the two pumps in rad/ps; only enters the pump-pump
    /// Raman term and defaults far outside the response support.
    pub pump_separation: f64,
    pub config: PolarizationConfig,
}

impl FiberScenario {
    /// Dispersionless template; fill in dispersion fields as needed.
    pub fn new(
        gamma: f64,
        f_r: f64,
        pump_power: f64,
        length: f64,
        temperature: f64,
        detuning: f64,
        config: PolarizationConfig,
    ) -> Result<Self, CoreError> {
        if !(length > 0.0) {
            return Err(CoreError::Parameter(format!("length must be positive, got {length}")));
        }
        if pump_power < 0.0 {
            return Err(CoreError::Parameter(format!(
                "pump power must be non-negative, got {pump_power}"
            )));
        }
        if !(0.0..=1.0).contains(&f_r) {
            return Err(CoreError::Parameter(format!("f_R must be in [0,1], got {f_r}")));
        }
        Ok(FiberScenario {
            gamma,
            f_r,
            pump_power,
            length,
            delta_beta: 0.0,
            delta_beta_curve: None,
            beta1_s: 0.0,
            beta1_i: 0.0,
            beta2_s: 0.0,
            beta2_i: 0.0,
            temperature,
            detuning,
            pump_separation: 2.0 * std::f64::consts::PI * 80.0,
            config,
        })
    }

    pub fn beta_i(&self, omega: f64) -> f64 {
        self.beta1_i * omega + 0.5 * self.beta2_i * omega * omega
    }

    pub fn beta_s(&self, omega: f64) -> f64 {
        self.beta1_s * omega + 0.5 * self.beta2_s * omega * omega
    }

    fn delta_beta_at(&self, bin: usize) -> f64 {
        match &self.delta_beta_curve {
            Some(curve) => curve[bin],
            None => self.delta_beta,
        }
    }

    /// The i↔s, q↔p, Δβ→-Δβ exchanged scenario.
    pub fn exchanged(&self) -> FiberScenario {
        FiberScenario {
            delta_beta: -self.delta_beta,
            delta_beta_curve: self.delta_beta_curve.as_ref().map(|c| c.mapv(|v| -v)),
            beta1_s: self.beta1_i,
            beta1_i: self.beta1_s,
            beta2_s: self.beta2_i,
            beta2_i: self.beta2_s,
            ..self.clone()
        }
    }

    /// Build the Raman model bound to this scenario's γ, f_R, Ω and
    /// polarization configuration.
    pub fn response(
        &self,
        h_par: crate::raman::OscillatorTable,
        h_b: crate::raman::OscillatorTable,
    ) -> Result<RamanResponse, CoreError> {
        RamanResponse::new(self.config, self.gamma, self.f_r, self.detuning, h_par, h_b)
    }
}

/// Frequency-sampled coupling functions and Green functions at z = length.
#[derive(Debug, Clone)]
pub struct CwGreens {
    pub omegas: Array1<f64>,
    pub kappa_i: Array1<Complex64>,
    pub kappa_s: Array1<Complex64>,
    pub g: Array1<Complex64>,
    pub k: Array1<Complex64>,
    pub g_ii: Array1<Complex64>,
    pub g_is: Array1<Complex64>,
    pub g_ss: Array1<Complex64>,
}

/// sin(kz)/k with the removable k → 0 singularity handled by series.
fn sinc_kz(k: Complex64, z: f64) -> Complex64 {
    let kz = k * z;
    if kz.norm() < 1e-6 {
        let kz2 = kz * kz;
        z * (Complex64::new(1.0, 0.0) - kz2 / 6.0 + kz2 * kz2 / 120.0)
    } else {
        (kz).sin() / k
    }
}

/// Coupling functions at one frequency:
/// `κ_i = β_i(ω) + √2π P₀ f(ω) + Δβ/2`, `κ_s` with i↔s and -Δβ/2,
/// `g = 2 P₀ γ_iqps + √2π P₀ f(ω)` (balanced response).
pub fn coupling_at(
    scn: &FiberScenario,
    response: &RamanResponse,
    omega: f64,
    delta_beta: f64,
) -> (Complex64, Complex64, Complex64) {
    let p0 = scn.pump_power;
    let raman = SQRT_2PI * p0 * response.response_spectrum_at(omega);
    let kappa_i = Complex64::new(scn.beta_i(omega) + 0.5 * delta_beta, 0.0) + raman;
    let kappa_s = Complex64::new(scn.beta_s(omega) - 0.5 * delta_beta, 0.0) + raman;
    let g = Complex64::new(2.0 * p0 * response.gamma_iqps(), 0.0) + raman;
    (kappa_i, kappa_s, g)
}

/// Green functions of one frequency bin after propagation distance z.
///
/// The common electronic nonlinear phase 2γ_c(P_p + P_q) — a pure gauge for
/// every observable — is included in the propagation phase so that CW and
/// pulsed Green functions live in the same frame.
pub fn cw_green_at(
    scn: &FiberScenario,
    response: &RamanResponse,
    omega: f64,
    delta_beta: f64,
    z: f64,
) -> (Complex64, Complex64, Complex64) {
    let (kappa_i, kappa_s, g) = coupling_at(scn, response, omega, delta_beta);
    let npm_common = 2.0 * scn.pump_power * response.gamma_iqps();
    let mu = 0.5 * (kappa_i + kappa_s) + npm_common;
    let delta = 0.5 * (kappa_i - kappa_s);
    let k = (g * g + delta * delta).sqrt();
    let phase = (Complex64::i() * mu * z).exp();
    let sinc = sinc_kz(k, z);
    let cos = (k * z).cos();
    let g_ii = phase * (cos + Complex64::i() * delta * sinc);
    let g_is = Complex64::i() * g * sinc * phase;
    let g_ss = phase * (cos - Complex64::i() * delta * sinc);
    (g_ii, g_is, g_ss)
}

/// Evaluate coupling and Green functions on a frequency array at z = length.
pub fn cw_greens(scn: &FiberScenario, response: &RamanResponse, omegas: &Array1<f64>) -> CwGreens {
    let n = omegas.len();
    let mut out = CwGreens {
        omegas: omegas.clone(),
        kappa_i: Array1::zeros(n),
        kappa_s: Array1::zeros(n),
        g: Array1::zeros(n),
        k: Array1::zeros(n),
        g_ii: Array1::zeros(n),
        g_is: Array1::zeros(n),
        g_ss: Array1::zeros(n),
    };
    for (idx, &w) in omegas.iter().enumerate() {
        let db = scn.delta_beta_at(idx);
        let (ki, ks, g) = coupling_at(scn, response, w, db);
        let delta = 0.5 * (ki - ks);
        out.kappa_i[idx] = ki;
        out.kappa_s[idx] = ks;
        out.g[idx] = g;
        out.k[idx] = (g * g + delta * delta).sqrt();
        let (gii, gis, gss) = cw_green_at(scn, response, w, db, scn.length);
        out.g_ii[idx] = gii;
        out.g_is[idx] = gis;
        out.g_ss[idx] = gss;
    }
    out
}

/// Output temporal amplitude of the converted photon,
/// `ψ_out = F⁻¹[H(ω) G_is(ℓ,ω) ψ̃(ω)]`.
pub fn filtered_psi_out(
    scn: &FiberScenario,
    response: &RamanResponse,
    psi_in: &SampledField,
    filter: &SpectralFilter,
) -> Result<SampledField, CoreError> {
    let grid = psi_in.grid;
    filter.check_grid(&grid)?;
    let engine = FftEngine::new(grid.len());
    let mut spec = match psi_in.domain {
        FieldDomain::Time => forward_fft(&engine, psi_in),
        FieldDomain::Frequency => psi_in.clone(),
    };
    for k in 0..grid.len() {
        let w = grid.omega(k);
        let db = scn.delta_beta_at(k);
        let (_, gis, _) = cw_green_at(scn, response, w, db, scn.length);
        spec.values[k] *= gis * filter.transmission(w);
    }
    Ok(inverse_fft(&engine, &spec))
}

/// Composite-Simpson nodes and weights over [0, length].
pub(crate) fn simpson_nodes(length: f64, min_nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = min_nodes.max(3);
    if m % 2 == 0 {
        m += 1;
    }
    let intervals = m - 1;
    let dz = length / intervals as f64;
    let nodes: Vec<f64> = (0..m).map(|j| j as f64 * dz).collect();
    let weights: Vec<f64> = (0..m)
        .map(|j| {
            let w = if j == 0 || j == m - 1 {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * dz / 3.0
        })
        .collect();
    (nodes, weights)
}

/// Phonon expectation E(t₁,t₂) for CW pumps:
/// `(P₀/2π) ∫₀^ℓ dz ∫dω |H|² |G_ii(z,ω)+G_is(z,ω)|² F(ω) e^{+iω(t₁-t₂)}`,
/// the normalization that follows from the stated noise correlator and the
/// unitary transform pair.
///
/// Stationary under CW pumps, so it is assembled from a single correlation
/// vector; the z-integral uses composite Simpson with `z_nodes` nodes
/// (default 65 when 0 is passed).
pub fn phonon_expectation_cw(
    scn: &FiberScenario,
    response: &RamanResponse,
    filter: &SpectralFilter,
    grid: TimeGrid,
    z_nodes: usize,
) -> Array2<Complex64> {
    let corr = phonon_correlation_cw(scn, response, filter, grid, z_nodes);
    let n = grid.len();
    Array2::from_shape_fn((n, n), |(t1, t2)| corr[(n + t1 - t2) % n])
}

/// The stationary correlation vector Ẽ(τ_j) on FFT-ordered relative times.
///
/// Assembled with the e^{+iω(t₁-t₂)} kernel so the matrix is the physical
/// ⟨M̂†(t₁)M̂(t₂)⟩ ordering, matching the pulsed assembly; the opposite sign
/// gives the transpose, which leaves every correlation observable unchanged
/// by Hermiticity.
pub fn phonon_correlation_cw(
    scn: &FiberScenario,
    response: &RamanResponse,
    filter: &SpectralFilter,
    grid: TimeGrid,
    z_nodes: usize,
) -> Array1<Complex64> {
    let n = grid.len();
    let nodes = if z_nodes == 0 { 65 } else { z_nodes };
    let (zs, ws) = simpson_nodes(scn.length, nodes);
    let mut spectral = vec![Complex64::default(); n];
    for k in 0..n {
        let w = grid.omega(k);
        let h = filter.transmission(w);
        if h == 0.0 {
            continue;
        }
        let f_noise = response.noise_spectrum_at(w, scn.temperature);
        if f_noise == 0.0 {
            continue;
        }
        let db = scn.delta_beta_at(k);
        let mut zint = 0.0;
        for (z, wz) in zs.iter().zip(&ws) {
            let (gii, gis, _) = cw_green_at(scn, response, w, db, *z);
            zint += (gii + gis).norm_sqr() * wz;
        }
        spectral[k] = Complex64::new(h * h * f_noise * zint, 0.0);
    }
    let engine = FftEngine::new(n);
    engine.plus_inplace(&mut spectral);
    let scale = scn.pump_power / (2.0 * std::f64::consts::PI) * grid.d_omega();
    Array1::from_iter(spectral.into_iter().map(|v| v * scale))
}

/// First-order-in-Δω output flux relative to the input flux:
/// `|G_is(ℓ,0)|² + (Δω/I_in)·(1 - e^{-8π f_R R(0) γ P₀ ℓ})·n_th(Ω)/(8π)`,
/// normalized consistently with the phonon expectation.
///
/// `delta_omega_over_i_in` is the dimensionless ratio of filter width to
/// input photon flux (rad per photon).
pub fn output_flux_relative(
    scn: &FiberScenario,
    response: &RamanResponse,
    delta_omega_over_i_in: f64,
) -> f64 {
    let db = scn.delta_beta;
    let (gii_unused, gis, _) = cw_green_at(scn, response, 0.0, db, scn.length);
    let _ = gii_unused;
    let signal = gis.norm_sqr();
    signal + noise_flux_formula(scn, response) * delta_omega_over_i_in
}

/// The noise term of the flux expansion per unit Δω/I_in.
pub fn noise_flux_formula(scn: &FiberScenario, response: &RamanResponse) -> f64 {
    let r0 = response.r_of(0.0);
    let expo = -8.0 * std::f64::consts::PI * scn.f_r * r0 * scn.gamma * scn.pump_power * scn.length;
    let n_th = if scn.f_r == 0.0 {
        0.0
    } else {
        thermal_population(scn.detuning, scn.temperature)
    };
    (1.0 - expo.exp()) * n_th / (8.0 * std::f64::consts::PI)
}

/// Exact narrowband noise flux by direct quadrature of the phonon
/// expectation at t₁ = t₂, per unit I_in and normalized by Δω/I_in so it is
/// directly comparable with [`noise_flux_formula`].
pub fn noise_flux_exact(
    scn: &FiberScenario,
    response: &RamanResponse,
    delta_omega: f64,
    n_quad: usize,
    z_nodes: usize,
) -> f64 {
    let (zs, ws) = simpson_nodes(scn.length, z_nodes.max(65));
    let mut m = n_quad.max(33);
    if m % 2 == 0 {
        m += 1;
    }
    let dw = delta_omega / (m - 1) as f64;
    let mut total = 0.0;
    for j in 0..m {
        let w = -0.5 * delta_omega + j as f64 * dw;
        let simpson_w = if j == 0 || j == m - 1 {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let f_noise = response.noise_spectrum_at(w, scn.temperature);
        let mut zint = 0.0;
        for (z, wz) in zs.iter().zip(&ws) {
            let (gii, gis, _) = cw_green_at(scn, response, w, scn.delta_beta, *z);
            zint += (gii + gis).norm_sqr() * wz;
        }
        total += simpson_w * dw / 3.0 * f_noise * zint;
    }
    total * scn.pump_power / (2.0 * std::f64::consts::PI) / delta_omega
}

/// Regime checks attached to the approximate windowed g² value.
#[derive(Debug, Clone, Default)]
pub struct ApproxG2 {
    pub value: f64,
    pub warnings: Vec<String>,
}

/// Approximate windowed second-order correlation,
/// `g²_click ≈ (TΔω + 2π) √2π R(0) n_th(Ω) f_R γ P₀ ℓ`.
pub fn g2_click_approx(
    scn: &FiberScenario,
    response: &RamanResponse,
    window: f64,
    delta_omega: f64,
) -> ApproxG2 {
    let mut out = ApproxG2::default();
    if scn.f_r == 0.0 {
        return out;
    }
    let r0 = response.r_of(0.0);
    let n_th = thermal_population(scn.detuning, scn.temperature);
    out.value = (window * delta_omega + 2.0 * std::f64::consts::PI)
        * SQRT_2PI
        * r0
        * n_th
        * scn.f_r
        * scn.gamma
        * scn.pump_power
        * scn.length;
    let t_dw = window * delta_omega;
    if t_dw < 10.0 {
        out.warnings.push(format!("TΔω = {t_dw:.2} is not ≫ 1"));
    }
    let min_decay = response
        .h_parallel()
        .rows()
        .iter()
        .map(|r| r.decay)
        .fold(f64::INFINITY, f64::min);
    if delta_omega > 0.5 * min_decay {
        out.warnings.push(format!(
            "filter width {delta_omega:.2} rad/ps is not ≪ min d_i = {min_decay:.2}"
        ));
    }
    let weak = (t_dw * scn.f_r * scn.gamma * scn.pump_power * scn.length * r0).abs();
    if weak > 0.3 {
        out.warnings
            .push(format!("weak-noise parameter TΔω f_R γP₀ℓ R(0) = {weak:.2}"));
    }
    out
}

/// Same estimate with the far-detuned Laurent tail for R(0).
pub fn g2_click_approx_laurent(
    scn: &FiberScenario,
    response: &RamanResponse,
    window: f64,
    delta_omega: f64,
) -> f64 {
    if scn.f_r == 0.0 {
        return 0.0;
    }
    let r0 = response.laurent_r0();
    let n_th = thermal_population(scn.detuning, scn.temperature);
    (window * delta_omega + 2.0 * std::f64::consts::PI)
        * SQRT_2PI
        * r0
        * n_th
        * scn.f_r
        * scn.gamma
        * scn.pump_power
        * scn.length
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raman::silica_tables_from_dir;
    use approx::assert_relative_eq;

    fn data_dir() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .parent()
            .unwrap()
            .parent()
            .unwrap()
            .join("data")
    }

    fn silica_response(scn: &FiberScenario) -> RamanResponse {
        let (h_par, h_b) = silica_tables_from_dir(data_dir()).unwrap();
        scn.response(h_par, h_b).unwrap()
    }

    fn electronic_scenario(g_l: f64) -> FiberScenario {
        // f_R = 0, g = 2γ_iqps P0 = 3γP0 copolarized; choose γP0 so g·ℓ = g_l
        let length = 1.0;
        let gamma = 1.0;
        let p0 = g_l / (3.0 * gamma * length);
        FiberScenario::new(gamma, 0.0, p0, length, 300.0, 0.0, PolarizationConfig::Copolarized)
            .unwrap()
    }

    #[test]
    fn coupling_reduces_to_electronic_constants() {
        let scn = electronic_scenario(1.0);
        let resp = silica_response(&scn);
        let (ki, ks, g) = coupling_at(&scn, &resp, 0.0, 0.0);
        assert_relative_eq!(g.re, 2.0 * scn.pump_power * 1.5, epsilon = 1e-15);
        assert_eq!(g.im, 0.0);
        assert_eq!(ki, Complex64::default());
        assert_eq!(ks, Complex64::default());
    }

    #[test]
    fn coupling_with_no_pump_is_linear_propagation() {
        let mut scn = electronic_scenario(1.0);
        scn.pump_power = 0.0;
        scn.delta_beta = 2.0;
        scn.beta1_i = 0.3;
        scn.beta2_i = 0.01;
        let resp = silica_response(&scn);
        let (ki, _, g) = coupling_at(&scn, &resp, 5.0, scn.delta_beta);
        assert_eq!(g, Complex64::default());
        assert_relative_eq!(ki.re, scn.beta_i(5.0) + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn stokes_coupling_has_negative_imaginary_part() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut scn = electronic_scenario(1.0);
        scn.f_r = 0.18;
        scn.detuning = -two_pi * 17.0;
        let resp = silica_response(&scn);
        let (ki, _, _) = coupling_at(&scn, &resp, 0.0, 0.0);
        assert!(ki.im < 0.0, "Stokes κ_i should have gain (Im < 0), got {}", ki.im);
    }

    #[test]
    fn full_and_back_conversion_points() {
        let scn = electronic_scenario(std::f64::consts::FRAC_PI_2);
        let resp = silica_response(&scn);
        let (gii, gis, _) = cw_green_at(&scn, &resp, 0.0, 0.0, scn.length);
        assert_relative_eq!(gis.norm_sqr(), 1.0, epsilon = 1e-12);
        assert!(gii.norm_sqr() < 1e-24);

        let scn = electronic_scenario(std::f64::consts::PI);
        let (gii, gis, _) = cw_green_at(&scn, &resp, 0.0, 0.0, scn.length);
        assert!(gis.norm_sqr() < 1e-24);
        assert_relative_eq!(gii.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unitary_without_raman_for_random_draws() {
        // 100 random (γP0ℓ, Δβ) pairs, all grid frequencies
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let grid = TimeGrid::centered(64, 0.05).unwrap();
        for _ in 0..100 {
            let mut scn = electronic_scenario(0.1 + 6.0 * next());
            scn.delta_beta = (next() - 0.5) * 40.0;
            scn.beta1_i = -0.5 * 3.336e-3;
            scn.beta1_s = 0.5 * 3.336e-3;
            let resp = silica_response(&scn);
            let greens = cw_greens(&scn, &resp, &grid.omegas());
            for k in 0..grid.len() {
                let sum = greens.g_ii[k].norm_sqr() + greens.g_is[k].norm_sqr();
                assert!(
                    (sum - 1.0).abs() < 1e-12,
                    "unitarity violated: {sum} at bin {k}"
                );
            }
        }
    }

    #[test]
    fn k_definition_invariant() {
        let mut scn = electronic_scenario(2.0);
        scn.f_r = 0.18;
        scn.detuning = -2.0 * std::f64::consts::PI * 13.0;
        scn.delta_beta = 3.0;
        let resp = silica_response(&scn);
        let grid = TimeGrid::centered(32, 0.02).unwrap();
        let greens = cw_greens(&scn, &resp, &grid.omegas());
        for k in 0..grid.len() {
            let lhs = greens.k[k];
            let rhs = 0.5
                * (4.0 * greens.g[k] * greens.g[k]
                    + (greens.kappa_i[k] - greens.kappa_s[k]).powi(2))
                .sqrt();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn flux_identity_matches_closed_form() {
        // |G_is|² = e^{-2 Im κ ℓ}(cosh(2 Im g ℓ) - cos(2 Re g ℓ))/2 at Δβ(ω)=0
        let two_pi = 2.0 * std::f64::consts::PI;
        for &(f_r, det_thz, gpl) in &[
            (0.18, -17.0, 0.4),
            (0.18, 17.0, 1.3),
            (0.18, -13.0, 2.2),
            (1.0, 13.0, 0.9),
            (0.0, 17.0, 1.571),
        ] {
            let length = 1.0;
            let gamma = 1.0;
            let p0: f64 = gpl;
            let mut scn =
                FiberScenario::new(gamma, f_r, p0, length, 300.0, two_pi * det_thz,
                    PolarizationConfig::Copolarized)
                .unwrap();
            scn.delta_beta = 0.0;
            let resp = silica_response(&scn);
            for &w in &[0.0, 3.0, -11.0, 40.0] {
                let (kappa, _, g) = coupling_at(&scn, &resp, w, 0.0);
                let (_, gis, _) = cw_green_at(&scn, &resp, w, 0.0, length);
                let expect = (-2.0 * kappa.im * length).exp() / 2.0
                    * ((2.0 * g.im * length).cosh() - (2.0 * g.re * length).cos());
                assert_relative_eq!(gis.norm_sqr(), expect, max_relative = 1e-12, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn exchange_symmetry_maps_idler_onto_signal() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut scn = electronic_scenario(1.2);
        scn.f_r = 0.18;
        scn.detuning = two_pi * 15.0;
        scn.delta_beta = 4.0;
        scn.beta1_i = -1.6e-3;
        scn.beta1_s = 1.6e-3;
        scn.beta2_i = 1e-4;
        let resp = silica_response(&scn);
        let swapped = scn.exchanged();
        for &w in &[0.0, 2.0, -7.0] {
            let (gii, gis, gss) = cw_green_at(&scn, &resp, w, scn.delta_beta, scn.length);
            let (gii2, gis2, gss2) =
                cw_green_at(&swapped, &resp, w, swapped.delta_beta, swapped.length);
            assert!((gii - gss2).norm() < 1e-12);
            assert!((gss - gii2).norm() < 1e-12);
            assert!((gis - gis2).norm() < 1e-12);
        }
    }

    #[test]
    fn depletion_and_gain_sides_bracket_unity() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut anti = electronic_scenario(1.0);
        anti.f_r = 0.18;
        anti.detuning = two_pi * 17.0;
        let resp_a = silica_response(&anti);
        let mut stokes = anti.clone();
        stokes.detuning = -two_pi * 17.0;
        let resp_s = silica_response(&stokes);
        for &w in &[0.0, 1.5, -2.5] {
            let (gii, gis, _) = cw_green_at(&anti, &resp_a, w, 0.0, anti.length);
            assert!(gii.norm_sqr() + gis.norm_sqr() <= 1.0 + 1e-12);
            let (gii, gis, _) = cw_green_at(&stokes, &resp_s, w, 0.0, stokes.length);
            assert!(gii.norm_sqr() + gis.norm_sqr() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn filtered_output_flat_conversion_is_identity_times_i() {
        // H ≡ 1 and G_is ≡ i at full conversion with zero dispersion:
        // ψ_out = i ψ_in
        let scn = electronic_scenario(std::f64::consts::FRAC_PI_2);
        let resp = silica_response(&scn);
        let grid = TimeGrid::centered(256, 0.02).unwrap();
        let psi = SampledField::from_fn(grid, |t| {
            Complex64::new((-t * t / (4.0 * 0.01)).exp(), 0.0)
        });
        let filter = SpectralFilter::rectangular(2.0 * grid.nyquist() - 1e-9);
        let out = filtered_psi_out(&scn, &resp, &psi, &filter).unwrap();
        // G_is at full conversion is i times the frame's common nonlinear
        // phase, flat across the filter band
        let (_, gis, _) = cw_green_at(&scn, &resp, 0.0, 0.0, scn.length);
        assert_relative_eq!(gis.norm(), 1.0, epsilon = 1e-12);
        for k in 0..grid.len() {
            let expect = gis * psi.values[k];
            assert!((out.values[k] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn filtered_output_vanishes_without_pumps() {
        let mut scn = electronic_scenario(1.0);
        scn.pump_power = 0.0;
        let resp = silica_response(&scn);
        let grid = TimeGrid::centered(128, 0.02).unwrap();
        let psi = SampledField::from_fn(grid, |t| Complex64::new((-t * t).exp(), 0.0));
        let out =
            filtered_psi_out(&scn, &resp, &psi, &SpectralFilter::rectangular(20.0)).unwrap();
        for v in out.values.iter() {
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn gaussian_two_sigma_spectral_capture() {
        // Δω = 2/τ_p captures erf(√2) ≈ 0.9545 of the photon at full
        // conversion; oracle = direct quadrature of the filtered spectrum.
        let tau: f64 = 0.1;
        let scn = electronic_scenario(std::f64::consts::FRAC_PI_2);
        let resp = silica_response(&scn);
        let grid = TimeGrid::centered(2048, 0.005).unwrap();
        let norm = 1.0 / (tau.sqrt() * (2.0 * std::f64::consts::PI).powf(0.25));
        let psi = SampledField::from_fn(grid, |t| {
            Complex64::new(norm * (-t * t / (4.0 * tau * tau)).exp(), 0.0)
        });
        assert_relative_eq!(psi.energy(), 1.0, epsilon = 1e-9);
        let filter = SpectralFilter::rectangular(2.0 / tau);
        let out = filtered_psi_out(&scn, &resp, &psi, &filter).unwrap();

        // independent oracle: fine trapezoid of the analytic power spectrum
        // |ψ̃|² ∝ e^{-2τ²ω²} over the filter band
        let mut captured = 0.0;
        let mut total = 0.0;
        let m = 400_001;
        let wmax = 12.0 / tau;
        let dw = 2.0 * wmax / (m - 1) as f64;
        for j in 0..m {
            let w = -wmax + j as f64 * dw;
            let p = (-2.0 * tau * tau * w * w).exp();
            total += p * dw;
            if w.abs() <= 1.0 / tau {
                captured += p * dw;
            }
        }
        let expect = captured / total;
        assert_relative_eq!(expect, 0.9545, epsilon = 5e-4);
        // the discrete rectangular filter differs from the continuum by the
        // edge-bin weight, O(dω)
        assert_relative_eq!(out.energy(), expect, epsilon = 6e-3);
    }

    #[test]
    fn phonon_expectation_zeroes() {
        let grid = TimeGrid::centered(64, 0.05).unwrap();
        let filter = SpectralFilter::rectangular(20.0);
        // f_R = 0
        let scn = electronic_scenario(1.0);
        let resp = silica_response(&scn);
        let e = phonon_expectation_cw(&scn, &resp, &filter, grid, 17);
        assert!(e.iter().all(|v| v.norm() == 0.0));
        // T = 0, anti-Stokes
        let mut scn = electronic_scenario(1.0);
        scn.f_r = 0.18;
        scn.detuning = 2.0 * std::f64::consts::PI * 17.0;
        scn.temperature = 0.0;
        let resp = silica_response(&scn);
        let e = phonon_expectation_cw(&scn, &resp, &filter, grid, 17);
        let max = e.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max < 1e-14, "max {max}");
    }

    #[test]
    fn phonon_expectation_is_stationary_hermitian_psd() {
        use ndarray_linalg::Eigh;
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut scn = electronic_scenario(1.0);
        scn.f_r = 0.18;
        scn.detuning = -two_pi * 17.0;
        let resp = silica_response(&scn);
        let grid = TimeGrid::centered(64, 0.1).unwrap();
        let filter = SpectralFilter::rectangular(20.0);
        let e = phonon_expectation_cw(&scn, &resp, &filter, grid, 33);
        let n = grid.len();
        // stationarity: E(t1,t2) depends only on t1-t2
        for t1 in 1..n {
            for t2 in 1..n {
                let a = e[[t1, t2]];
                let b = e[[t1 - 1, t2 - 1]];
                assert!((a - b).norm() <= 1e-10 * e[[0, 0]].norm());
            }
        }
        // hermitian
        for t1 in 0..n {
            for t2 in 0..n {
                assert!((e[[t1, t2]] - e[[t2, t1]].conj()).norm() < 1e-12 * e[[0, 0]].norm());
            }
        }
        // PSD: all eigenvalues ≥ -1e-10 · trace
        let (vals, _) = e.eigh(ndarray_linalg::UPLO::Upper).unwrap();
        let trace: f64 = (0..n).map(|k| e[[k, k]].re).sum();
        for v in vals.iter() {
            assert!(*v >= -1e-10 * trace, "eigenvalue {v} vs trace {trace}");
        }
    }

    #[test]
    fn flux_formula_full_conversion_without_raman() {
        let scn = electronic_scenario(std::f64::consts::FRAC_PI_2);
        let resp = silica_response(&scn);
        assert_relative_eq!(output_flux_relative(&scn, &resp, 1.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn stokes_gain_anti_stokes_depletion_in_flux() {
        let two_pi = 2.0 * std::f64::consts::PI;
        // sweep the interaction strength; Stokes peak flux must exceed 1,
        // anti-Stokes must stay below 1
        let mut peak_stokes: f64 = 0.0;
        let mut peak_anti: f64 = 0.0;
        for j in 1..40 {
            let gpl = 0.05 * j as f64;
            let gamma = 1.0;
            let p0 = gpl;
            let mut scn = FiberScenario::new(
                gamma,
                0.18,
                p0,
                1.0,
                300.0,
                -two_pi * 17.0,
                PolarizationConfig::Copolarized,
            )
            .unwrap();
            let resp = silica_response(&scn);
            peak_stokes = peak_stokes.max(output_flux_relative(&scn, &resp, 1.0));
            scn.detuning = two_pi * 17.0;
            let resp = silica_response(&scn);
            peak_anti = peak_anti.max(output_flux_relative(&scn, &resp, 1.0));
        }
        assert!(peak_stokes > 1.0, "stokes peak {peak_stokes}");
        assert!(peak_anti < 1.0, "anti-stokes peak {peak_anti}");
    }

    #[test]
    fn flux_formula_agrees_with_direct_quadrature_to_first_order() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut scn = electronic_scenario(1.2);
        scn.f_r = 0.18;
        scn.detuning = -two_pi * 17.0;
        let resp = silica_response(&scn);
        let formula = noise_flux_formula(&scn, &resp);
        // error should shrink ~linearly with Δω
        let e1 = (noise_flux_exact(&scn, &resp, 0.4, 200, 65) - formula).abs() / formula;
        let e2 = (noise_flux_exact(&scn, &resp, 0.1, 200, 65) - formula).abs() / formula;
        assert!(e1 < 0.05, "relative error {e1} at Δω = 0.4");
        assert!(e2 < e1, "error must shrink with Δω: {e2} vs {e1}");
    }

    #[test]
    fn g2_approx_limits() {
        let scn = electronic_scenario(1.0);
        let resp = silica_response(&scn);
        assert_eq!(g2_click_approx(&scn, &resp, 10.0, 20.0).value, 0.0);

        let two_pi = 2.0 * std::f64::consts::PI;
        let mut scn = electronic_scenario(1.0);
        scn.gamma = 1e-3;
        scn.pump_power = 1.0;
        scn.length = 640.0;
        scn.f_r = 0.18;
        scn.detuning = two_pi * 17.0;
        scn.temperature = 300.0;
        let resp = silica_response(&scn);
        let approx = g2_click_approx(&scn, &resp, 10.0, 20.0);
        assert!(approx.value > 0.0);
        // 4 K: still positive, accuracy not asserted
        scn.temperature = 4.0;
        let resp = silica_response(&scn);
        assert!(g2_click_approx(&scn, &resp, 10.0, 20.0).value > 0.0);
        // far-detuned laurent version stays within a factor ~2 at 25 THz
        scn.temperature = 300.0;
        scn.detuning = two_pi * 60.0;
        let resp = silica_response(&scn);
        let exact = g2_click_approx(&scn, &resp, 10.0, 20.0).value;
        let laurent = g2_click_approx_laurent(&scn, &resp, 10.0, 20.0);
        assert!(laurent > 0.0);
        assert!(
            laurent / exact < 2.0 && exact / laurent < 2.0,
            "laurent {laurent:.3e} vs exact {exact:.3e}"
        );
    }
}
