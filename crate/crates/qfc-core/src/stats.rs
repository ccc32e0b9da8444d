//! Output photon statistics: spectral filtering, the phonon expectation
//! matrix E(t₁,t₂), the normalized correlation map g²(t₁,t₂) and the
//! window-integrated g²_click.
//!
//! The four-point correlator of the filtered idler splits into the converted
//! single-photon amplitude ψ_out and the thermal phonon contribution E; the
//! numerator terms are
//! `|ψ(t₁)|²E(t₂,t₂) + |ψ(t₂)|²E(t₁,t₁) + E(t₁,t₁)E(t₂,t₂)
//!  + 2Re{ψ*(t₁)ψ(t₂)E(t₂,t₁)} + |E(t₁,t₂)|²`,
//! normalized by I_out(t) = |ψ_out(t)|² + E(t,t).

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::CoreError;
use crate::green::SuffixNode;
use crate::grid::{FftEngine, GreenMatrix, SampledField, TimeGrid};
use crate::raman::RamanResponse;

/// Rectangular spectral filter with a center offset and full width (rad/ps).
#[derive(Debug, Clone, Copy)]
pub struct SpectralFilter {
    pub center: f64,
    pub width: f64,
}

impl SpectralFilter {
    pub fn rectangular(width: f64) -> Self {
        SpectralFilter { center: 0.0, width }
    }

    pub fn transmission(&self, omega: f64) -> f64 {
        if (omega - self.center).abs() <= 0.5 * self.width {
            1.0
        } else {
            0.0
        }
    }

    /// The filter band must fit inside the grid's Nyquist range.
    pub fn check_grid(&self, grid: &TimeGrid) -> Result<(), CoreError> {
        if self.center.abs() + 0.5 * self.width > grid.nyquist() {
            return Err(CoreError::Bandwidth(format!(
                "filter (center {:.2}, width {:.2}) exceeds the grid Nyquist {:.2} rad/ps",
                self.center,
                self.width,
                grid.nyquist()
            )));
        }
        Ok(())
    }
}

/// Apply the filter to a time-domain field: multiply by H(ω) in frequency.
pub fn apply_filter_field(
    engine: &FftEngine,
    field: &SampledField,
    filter: &SpectralFilter,
) -> Result<SampledField, CoreError> {
    filter.check_grid(&field.grid)?;
    let grid = field.grid;
    let mut out = field.clone();
    let buf = out.values.as_slice_mut().expect("contiguous");
    match field.domain {
        crate::grid::FieldDomain::Time => {
            engine.plus_inplace(buf);
            let inv_n = 1.0 / grid.len() as f64;
            for (k, v) in buf.iter_mut().enumerate() {
                *v *= filter.transmission(grid.omega(k)) * inv_n;
            }
            engine.minus_inplace(buf);
        }
        crate::grid::FieldDomain::Frequency => {
            for (k, v) in buf.iter_mut().enumerate() {
                *v *= filter.transmission(grid.omega(k));
            }
        }
    }
    Ok(out)
}

/// Apply the filter to the output (first) time index of every Green block.
pub fn apply_filter_green(
    engine: &FftEngine,
    green: &GreenMatrix,
    filter: &SpectralFilter,
) -> Result<GreenMatrix, CoreError> {
    filter.check_grid(&green.grid)?;
    let grid = green.grid;
    let n = grid.len();
    let h: Vec<f64> = (0..n).map(|k| filter.transmission(grid.omega(k))).collect();
    let mut out = green.clone();
    for block in [&mut out.ii, &mut out.is, &mut out.si, &mut out.ss] {
        for mut row in block.outer_iter_mut() {
            let buf = row.as_slice_mut().expect("contiguous row");
            engine.plus_inplace(buf);
            let inv_n = 1.0 / n as f64;
            for (v, hh) in buf.iter_mut().zip(&h) {
                *v *= hh * inv_n;
            }
            engine.minus_inplace(buf);
        }
    }
    Ok(out)
}

/// ψ_out(t) = ∫ G_is(ℓ,t,t′) ψ(t′) dt′ from a pulsed Green matrix, with the
/// filter applied on the output index.
pub fn psi_out_from_green(
    engine: &FftEngine,
    green: &GreenMatrix,
    psi_in: &SampledField,
    filter: Option<&SpectralFilter>,
) -> Result<SampledField, CoreError> {
    assert_eq!(psi_in.grid, green.grid, "input must share the Green grid");
    let grid = green.grid;
    let n = grid.len();
    // storage rows are t′: ψ_out(t) = Σ_tp ψ(tp)·block[[tp, t]]·dt
    let mut values = Array1::<Complex64>::zeros(n);
    for (tp, row) in green.is.outer_iter().enumerate() {
        let w = psi_in.values[tp] * grid.dt();
        if w.norm_sqr() == 0.0 {
            continue;
        }
        for t in 0..n {
            values[t] += w * row[t];
        }
    }
    let field = SampledField::new(grid, crate::grid::FieldDomain::Time, values);
    match filter {
        Some(f) => apply_filter_field(engine, &field, f),
        None => Ok(field),
    }
}

/// Spectral samples of the noise correlation kernel, `F(+ω_k)` on the FFT
/// bins, for [`FftEngine::convolve_spectral`].
///
/// This orientation pairs the noise spectrum F(ω) with the Green transfer at
/// the same physical frequency in the CW limit (the opposite orientation
/// would pair F(ω) with the mirrored |G(-ω)|²), and the overall scale makes
/// the assembled matrix carry the correlator-consistent (P₀/2π)∫dω…
/// normalization of the CW expression.
fn noise_kernel_spectral(
    response: &RamanResponse,
    temperature: f64,
    grid: &TimeGrid,
) -> Vec<Complex64> {
    (0..grid.len())
        .map(|k| {
            Complex64::new(response.noise_spectrum_at(grid.omega(k), temperature), 0.0)
        })
        .collect()
}

/// Pulsed phonon expectation
/// `E(t₁,t₂) = ∫₀^ℓ dz ∬ dt dt′ Q*(z,t₁,t) Q(z,t₂,t′) F(t-t′)` with
/// `Q(z,t_out,t_c) = A_q(z,t_c) G_ii(z→ℓ)(t_out,t_c) + A_p(z,t_c) G_is(z→ℓ)(t_out,t_c)`
/// assembled over the suffix Green functions, filter applied on the output
/// index. The z-integral reuses the propagation's Simpson node set.
pub fn pulsed_phonon_expectation(
    suffix: &[SuffixNode],
    response: &RamanResponse,
    temperature: f64,
    filter: &SpectralFilter,
) -> Result<Array2<Complex64>, CoreError> {
    let first = suffix.first().ok_or_else(|| {
        CoreError::numerics(
            "pulsed phonon expectation",
            "no suffix Green functions: propagate with suffix_nodes > 0",
        )
    })?;
    let grid = first.green.grid;
    let n = grid.len();
    let dt = grid.dt();
    let engine = FftEngine::new(n);
    let kernel = noise_kernel_spectral(response, temperature, &grid);
    if kernel.iter().all(|v| v.norm_sqr() == 0.0) {
        return Ok(Array2::zeros((n, n)));
    }
    let h: Vec<f64> = (0..n).map(|k| filter.transmission(grid.omega(k))).collect();

    let mut e = Array2::<Complex64>::zeros((n, n));
    for node in suffix {
        if node.weight == 0.0 {
            continue;
        }
        // Q in storage orientation [t_c, t_out], then filtered along t_out
        let mut q = Array2::<Complex64>::zeros((n, n));
        for tc in 0..n {
            let aq = node.pump_q[tc];
            let ap = node.pump_p[tc];
            let gii = node.green.ii.row(tc);
            let gis = node.green.is.row(tc);
            let mut row = q.row_mut(tc);
            for t in 0..n {
                row[t] = aq * gii[t] + ap * gis[t];
            }
            let buf = row.as_slice_mut().expect("contiguous");
            engine.plus_inplace(buf);
            let inv_n = 1.0 / n as f64;
            for (v, hh) in buf.iter_mut().zip(&h) {
                *v *= hh * inv_n;
            }
            engine.minus_inplace(buf);
        }
        // math orientation Qm[t_out, t_c], forced into row-major layout
        let qm = q.t().as_standard_layout().into_owned();
        // B(t₁, t') = Σ_t conj(Qm(t₁,t)) F(t-t') dt : convolve each row
        let mut b = qm.mapv(|v| v.conj());
        for mut row in b.outer_iter_mut() {
            engine.convolve_spectral(&kernel, row.as_slice_mut().expect("contiguous"));
        }
        // E += w · B · Qmᵀ · dt
        let m = b.dot(&qm.t());
        let w = Complex64::new(node.weight * dt, 0.0);
        e.zip_mut_with(&m, |acc, v| *acc += w * v);
    }
    Ok(e)
}

/// Flux, correlation map and windowed correlation of one output state.
#[derive(Debug, Clone)]
pub struct CorrelationResult {
    pub grid: TimeGrid,
    /// I_out(t) = |ψ_out(t)|² + E(t,t), 1/ps.
    pub i_out: Array1<f64>,
    /// g²(t₁,t₂); entries where either flux is below the floor are zero.
    pub g2: Array2<f64>,
    pub g2_click: f64,
    /// Detection window (ps) of the click value, centered on t = 0.
    pub window: f64,
}

fn g2_numerator_at(
    psi: &Array1<Complex64>,
    e: &Array2<Complex64>,
    t1: usize,
    t2: usize,
) -> f64 {
    let p1 = psi[t1].norm_sqr();
    let p2 = psi[t2].norm_sqr();
    let e11 = e[[t1, t1]].re;
    let e22 = e[[t2, t2]].re;
    let e12 = e[[t1, t2]];
    // pairing per the thermal factorization: ψ*(t₁)ψ(t₂) multiplies E(t₂,t₁)
    let cross = 2.0 * (psi[t1].conj() * psi[t2] * e[[t2, t1]]).re;
    p1 * e22 + p2 * e11 + e11 * e22 + cross + e12.norm_sqr()
}

/// Normalized second-order correlation map g²(t₁,t₂).
///
/// Entries where I_out falls below `1e-12·max I_out` are masked to zero.
pub fn g2_matrix(
    psi_out: &SampledField,
    e: &Array2<Complex64>,
) -> Result<(Array2<f64>, Array1<f64>), CoreError> {
    let n = psi_out.grid.len();
    assert_eq!(e.dim(), (n, n), "E matrix must match the grid");
    let psi = &psi_out.values;
    let i_out = Array1::from_shape_fn(n, |t| psi[t].norm_sqr() + e[[t, t]].re);
    let max_i = i_out.iter().cloned().fold(0.0, f64::max);
    if max_i <= 0.0 {
        return Err(CoreError::numerics("g2", "output flux is identically zero"));
    }
    let floor = 1e-12 * max_i;
    let g2 = Array2::from_shape_fn((n, n), |(t1, t2)| {
        if i_out[t1] < floor || i_out[t2] < floor {
            0.0
        } else {
            g2_numerator_at(psi, e, t1, t2) / (i_out[t1] * i_out[t2])
        }
    });
    Ok((g2, i_out))
}

/// Window-integrated correlation
/// `g²_click = ∬_W dt₁dt₂ numerator / (∫_W I_out dt)²` over the window
/// |t| ≤ T/2.
pub fn g2_click(
    psi_out: &SampledField,
    e: &Array2<Complex64>,
    window: f64,
) -> Result<f64, CoreError> {
    let grid = psi_out.grid;
    let n = grid.len();
    assert_eq!(e.dim(), (n, n), "E matrix must match the grid");
    let idx: Vec<usize> = (0..n)
        .filter(|&k| grid.time(k).abs() <= 0.5 * window)
        .collect();
    if idx.is_empty() {
        return Err(CoreError::Parameter(format!(
            "window {window} ps contains no grid samples"
        )));
    }
    let psi = &psi_out.values;
    let dt = grid.dt();
    let mut flux = 0.0;
    for &t in &idx {
        flux += (psi[t].norm_sqr() + e[[t, t]].re) * dt;
    }
    if flux <= 0.0 {
        return Err(CoreError::numerics("g2_click", "windowed flux is zero"));
    }
    let mut num = 0.0;
    for &t1 in &idx {
        for &t2 in &idx {
            num += g2_numerator_at(psi, e, t1, t2) * dt * dt;
        }
    }
    Ok(num / (flux * flux))
}

/// Windowed flux split into the photon and phonon contributions.
pub fn windowed_flux_parts(
    psi_out: &SampledField,
    e: &Array2<Complex64>,
    window: f64,
) -> (f64, f64) {
    let grid = psi_out.grid;
    let dt = grid.dt();
    let mut photon = 0.0;
    let mut phonon = 0.0;
    for k in 0..grid.len() {
        if grid.time(k).abs() <= 0.5 * window {
            photon += psi_out.values[k].norm_sqr() * dt;
            phonon += e[[k, k]].re * dt;
        }
    }
    (photon, phonon)
}

/// Bundle the pieces into a result with CSV/JSON export hooks.
pub fn correlation_result(
    psi_out: &SampledField,
    e: &Array2<Complex64>,
    window: f64,
) -> Result<CorrelationResult, CoreError> {
    let (g2, i_out) = g2_matrix(psi_out, e)?;
    let click = g2_click(psi_out, e, window)?;
    Ok(CorrelationResult {
        grid: psi_out.grid,
        i_out,
        g2,
        g2_click: click,
        window,
    })
}

impl CorrelationResult {
    /// CSV of the g² map: `t1 (ps),t2 (ps),g2`.
    pub fn write_g2_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "t1 (ps),t2 (ps),g2")?;
        let n = self.grid.len();
        for t1 in 0..n {
            for t2 in 0..n {
                writeln!(
                    w,
                    "{},{},{}",
                    self.grid.time(t1),
                    self.grid.time(t2),
                    self.g2[[t1, t2]]
                )?;
            }
        }
        Ok(())
    }

    /// Scalar summary as a small JSON object.
    pub fn write_summary_json(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        let dt = self.grid.dt();
        let total_flux: f64 = self.i_out.iter().sum::<f64>() * dt;
        let peak = self.i_out.iter().cloned().fold(0.0, f64::max);
        writeln!(
            w,
            "{{\n  \"g2_click\": {},\n  \"window_ps\": {},\n  \"total_flux\": {},\n  \"peak_flux\": {}\n}}",
            self.g2_click, self.window, total_flux, peak
        )
    }
}
