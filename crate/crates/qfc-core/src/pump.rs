//! Split-step Fourier integration of the two classical pump envelopes under
//! dispersion, SPM/XPM and delayed Raman self/cross modulation.
//!
//! The nonlinear sub-step applies the instantaneous phase exactly and the
//! delayed (Raman) potential with one explicit trapezoidal (Heun) update;
//! the symmetric dispersion splitting makes the scheme second order in the
//! step size. Pump-pump Raman coupling is evaluated at the pump separation,
//! far outside the response support, so it contributes no energy exchange.

use ndarray::Array1;
use num_complex::Complex64;

use crate::cw::FiberScenario;
use crate::error::CoreError;
use crate::grid::{FftEngine, TimeGrid};
use crate::raman::RamanResponse;

/// The two classical pump envelopes (√W) with their dispersion parameters.
#[derive(Debug, Clone)]
pub struct PumpPair {
    pub grid: TimeGrid,
    pub a_p: Array1<Complex64>,
    pub a_q: Array1<Complex64>,
    /// ps/m
    pub beta1_p: f64,
    pub beta1_q: f64,
    /// ps²/m
    pub beta2_p: f64,
    pub beta2_q: f64,
}

impl PumpPair {
    /// Photon-number-like invariant ∫(|A_p|² + |A_q|²)dt.
    pub fn total_energy(&self) -> f64 {
        let dt = self.grid.dt();
        self.a_p
            .iter()
            .chain(self.a_q.iter())
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            * dt
    }

    pub fn energy_p(&self) -> f64 {
        self.a_p.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    pub fn energy_q(&self) -> f64 {
        self.a_q.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dt()
    }
}

/// Identical Gaussian pumps `√P exp[-(t ∓ Δt/2)²/4τ_p²]`: pump p advanced to
/// +Δt/2, pump q delayed to -Δt/2, so with the collision walk-off signs
/// (β₁p < β₁q in the mean frame) they meet at t = 0.
pub fn init_gaussian_pumps(
    peak_power: f64,
    tau_p: f64,
    delta_t: f64,
    grid: TimeGrid,
) -> Result<PumpPair, CoreError> {
    if grid.span() < 4.0 * (delta_t + 6.0 * tau_p) {
        return Err(CoreError::Grid(format!(
            "grid span {:.2} ps is too small for pump separation {delta_t} ps (need ≥ {:.2})",
            grid.span(),
            4.0 * (delta_t + 6.0 * tau_p)
        )));
    }
    let amp = peak_power.sqrt();
    let shape = |center: f64| {
        Array1::from_iter((0..grid.len()).map(|k| {
            let t = grid.time(k) - center;
            Complex64::new(amp * (-t * t / (4.0 * tau_p * tau_p)).exp(), 0.0)
        }))
    };
    Ok(PumpPair {
        grid,
        a_p: shape(0.5 * delta_t),
        a_q: shape(-0.5 * delta_t),
        beta1_p: 0.0,
        beta1_q: 0.0,
        beta2_p: 0.0,
        beta2_q: 0.0,
    })
}

/// Reusable stepper advancing a [`PumpPair`] along z.
pub struct PumpStepper {
    engine: FftEngine,
    gamma_spm: f64,
    gamma_xpm: f64,
    /// Spectral symbol of the self-Raman kernel on the grid bins.
    kernel_self: Vec<Complex64>,
    /// Spectral symbol of the pump-pump Raman kernel (evaluated at the pump
    /// separation).
    kernel_cross: Vec<Complex64>,
    disp_p_half: Vec<Complex64>,
    disp_q_half: Vec<Complex64>,
    half_h: f64,
}

impl PumpStepper {
    pub fn new(
        pumps: &PumpPair,
        scn: &FiberScenario,
        response: &RamanResponse,
        h: f64,
    ) -> Result<Self, CoreError> {
        if !(h > 0.0) {
            return Err(CoreError::Parameter(format!("step must be positive, got {h}")));
        }
        let grid = pumps.grid;
        let n = grid.len();
        let engine = FftEngine::new(n);
        // each pump is copolarized with itself: parallel response, δ-sum 3
        let gamma_el = 1.5 * scn.gamma * (1.0 - scn.f_r);
        let g = scn.gamma * scn.f_r;
        let kernel_self: Vec<Complex64> = (0..n)
            .map(|k| g * response.h_parallel().spectrum(grid.omega(k)))
            .collect();
        let kernel_cross: Vec<Complex64> = (0..n)
            .map(|k| g * response.h_parallel().spectrum(grid.omega(k) + scn.pump_separation))
            .collect();
        let half_phase = |b1: f64, b2: f64| {
            (0..n)
                .map(|k| {
                    let w = grid.omega(k);
                    Complex64::from_polar(1.0, (b1 * w + 0.5 * b2 * w * w) * 0.5 * h)
                })
                .collect()
        };
        Ok(PumpStepper {
            engine,
            gamma_spm: gamma_el,
            gamma_xpm: gamma_el,
            kernel_self,
            kernel_cross,
            disp_p_half: half_phase(pumps.beta1_p, pumps.beta2_p),
            disp_q_half: half_phase(pumps.beta1_q, pumps.beta2_q),
            half_h: 0.5 * h,
        })
    }

    fn dispersion_half(&self, field: &mut Array1<Complex64>, phases: &[Complex64]) {
        let buf = field.as_slice_mut().expect("contiguous");
        self.engine.plus_inplace(buf);
        let n = buf.len() as f64;
        for (v, ph) in buf.iter_mut().zip(phases) {
            *v *= ph / n;
        }
        self.engine.minus_inplace(buf);
    }

    /// Complex nonlinear potential for one pump: SPM + XPM + delayed terms.
    fn potential(
        &self,
        own: &Array1<Complex64>,
        other: &Array1<Complex64>,
    ) -> Array1<Complex64> {
        let n = own.len();
        let mut self_pow: Vec<Complex64> = own
            .iter()
            .map(|v| Complex64::new(v.norm_sqr(), 0.0))
            .collect();
        let mut cross_pow: Vec<Complex64> = other
            .iter()
            .map(|v| Complex64::new(v.norm_sqr(), 0.0))
            .collect();
        self.engine.convolve_spectral(&self.kernel_self, &mut self_pow);
        self.engine.convolve_spectral(&self.kernel_cross, &mut cross_pow);
        Array1::from_iter((0..n).map(|k| {
            let spm = self.gamma_spm * own[k].norm_sqr();
            let xpm = 2.0 * self.gamma_xpm * other[k].norm_sqr();
            Complex64::new(spm + xpm, 0.0) + self_pow[k] + cross_pow[k]
        }))
    }

    /// Advance both pumps by one full step h (dispersion ½h, nonlinear h,
    /// dispersion ½h). The nonlinear potential uses a Heun (explicit
    /// trapezoidal) evaluation of the delayed terms.
    pub fn step(&self, pumps: &mut PumpPair) -> Result<(), CoreError> {
        self.dispersion_half(&mut pumps.a_p, &self.disp_p_half);
        self.dispersion_half(&mut pumps.a_q, &self.disp_q_half);

        let h = 2.0 * self.half_h;
        let v_p0 = self.potential(&pumps.a_p, &pumps.a_q);
        let v_q0 = self.potential(&pumps.a_q, &pumps.a_p);
        let apply = |a: &Array1<Complex64>, v: &Array1<Complex64>| {
            Array1::from_iter(
                a.iter()
                    .zip(v.iter())
                    .map(|(x, pot)| x * (Complex64::i() * pot * h).exp()),
            )
        };
        // predictor
        let p_pred = apply(&pumps.a_p, &v_p0);
        let q_pred = apply(&pumps.a_q, &v_q0);
        // corrector with the trapezoidal average of the potential
        let v_p1 = self.potential(&p_pred, &q_pred);
        let v_q1 = self.potential(&q_pred, &p_pred);
        let avg = |v0: &Array1<Complex64>, v1: &Array1<Complex64>| {
            Array1::from_iter(v0.iter().zip(v1.iter()).map(|(a, b)| 0.5 * (a + b)))
        };
        pumps.a_p = apply(&pumps.a_p, &avg(&v_p0, &v_p1));
        pumps.a_q = apply(&pumps.a_q, &avg(&v_q0, &v_q1));

        for v in pumps.a_p.iter().chain(pumps.a_q.iter()) {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(CoreError::numerics(
                    "pump propagation",
                    "NaN/overflow in pump envelope; reduce the step size",
                ));
            }
        }

        self.dispersion_half(&mut pumps.a_p, &self.disp_p_half);
        self.dispersion_half(&mut pumps.a_q, &self.disp_q_half);
        Ok(())
    }
}

/// Propagate the pumps over distance `z` with step `h` (the last step is
/// shortened to land exactly on z).
pub fn propagate_pumps(
    pumps: &PumpPair,
    scn: &FiberScenario,
    response: &RamanResponse,
    z: f64,
    h: f64,
) -> Result<PumpPair, CoreError> {
    if h > z {
        return Err(CoreError::Parameter(format!("step {h} exceeds distance {z}")));
    }
    let peak = pumps
        .a_p
        .iter()
        .chain(pumps.a_q.iter())
        .map(|v| v.norm_sqr())
        .fold(0.0, f64::max);
    if h * scn.gamma * peak >= 0.05 {
        return Err(CoreError::Parameter(format!(
            "step does not resolve the nonlinear length: h·γ·P = {:.3} ≥ 0.05",
            h * scn.gamma * peak
        )));
    }
    let mut out = pumps.clone();
    let steps = (z / h).round().max(1.0) as usize;
    let h_eff = z / steps as f64;
    let stepper = PumpStepper::new(&out, scn, response, h_eff)?;
    for _ in 0..steps {
        stepper.step(&mut out)?;
    }
    Ok(out)
}

/// Binary snapshot dump: header (magic, n, dt, t0, count) then per-z records
/// of (z, A_p, A_q) as little-endian f64 pairs.
pub fn write_snapshots(
    mut w: impl std::io::Write,
    grid: TimeGrid,
    snapshots: &[(f64, Array1<Complex64>, Array1<Complex64>)],
) -> std::io::Result<()> {
    w.write_all(b"QFCPUMP1")?;
    w.write_all(&(grid.len() as u64).to_le_bytes())?;
    w.write_all(&grid.dt().to_le_bytes())?;
    w.write_all(&grid.t0().to_le_bytes())?;
    w.write_all(&(snapshots.len() as u64).to_le_bytes())?;
    for (z, a_p, a_q) in snapshots {
        w.write_all(&z.to_le_bytes())?;
        for arr in [a_p, a_q] {
            for v in arr.iter() {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Read back a snapshot dump written by [`write_snapshots`].
#[allow(clippy::type_complexity)]
pub fn read_snapshots(
    mut r: impl std::io::Read,
) -> Result<(TimeGrid, Vec<(f64, Array1<Complex64>, Array1<Complex64>)>), CoreError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != b"QFCPUMP1" {
        return Err(CoreError::Data {
            path: "<pump dump>".into(),
            reason: "bad magic".into(),
        });
    }
    let mut b8 = [0u8; 8];
    let read_u64 = |r: &mut dyn std::io::Read| -> Result<u64, CoreError> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    };
    let n = read_u64(&mut r)? as usize;
    r.read_exact(&mut b8)?;
    let dt = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let t0 = f64::from_le_bytes(b8);
    let count = read_u64(&mut r)? as usize;
    let grid = TimeGrid::new(n, dt, t0)?;
    let read_f64 = move |r: &mut dyn std::io::Read| -> Result<f64, CoreError> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let z = read_f64(&mut r)?;
        let mut fields = [Array1::zeros(n), Array1::zeros(n)];
        for arr in fields.iter_mut() {
            for k in 0..n {
                let re = read_f64(&mut r)?;
                let im = read_f64(&mut r)?;
                arr[k] = Complex64::new(re, im);
            }
        }
        let [a_p, a_q] = fields;
        out.push((z, a_p, a_q));
    }
    Ok((grid, out))
}
