//! Uniform time/frequency grids, complex field containers and the Fourier
//! transform convention shared by every numerical module.
//!
//! The forward transform maps a time-domain field to
//! `a(ω) = (1/√2π) ∫ a(t) e^{+iωt} dt`, discretized with the grid measure
//! `dt`; the inverse uses the `e^{-iωt}` kernel with measure `dω` so that
//! inverse∘forward is the identity. All spectral operations in the crate go
//! through [`FftEngine`] so the sign convention is fixed in one place.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::CoreError;

pub const SQRT_2PI: f64 = 2.5066282746310002;

/// Uniform time grid with its implied FFT-ordered angular-frequency grid.
///
/// The grid covers `t0, t0+dt, …, t0+(n-1)·dt`; the paired frequency grid has
/// spacing `dω = 2π/(n·dt)` and spans `[-π/dt, π/dt)` in FFT ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    n: usize,
    dt: f64,
    t0: f64,
}

impl TimeGrid {
    pub fn new(n: usize, dt: f64, t0: f64) -> Result<Self, CoreError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(CoreError::Grid(format!("dt must be positive, got {dt}")));
        }
        if n < 8 {
            return Err(CoreError::Grid(format!("need at least 8 points, got {n}")));
        }
        Ok(TimeGrid { n, dt, t0 })
    }

    /// Grid of `n` points centered on t = 0.
    pub fn centered(n: usize, dt: f64) -> Result<Self, CoreError> {
        let t0 = -(n as f64 / 2.0) * dt;
        TimeGrid::new(n, dt, t0)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|k| self.time(k)))
    }

    pub fn d_omega(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 * self.dt)
    }

    /// Nyquist angular frequency π/dt (half-span of the frequency grid).
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dt
    }

    /// FFT-ordered angular frequency of bin `k`.
    pub fn omega(&self, k: usize) -> f64 {
        let k = k % self.n;
        if k < self.n.div_ceil(2) {
            k as f64 * self.d_omega()
        } else {
            (k as f64 - self.n as f64) * self.d_omega()
        }
    }

    pub fn omegas(&self) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|k| self.omega(k)))
    }

    /// Total time span `n·dt`.
    pub fn span(&self) -> f64 {
        self.n as f64 * self.dt
    }

    /// Index of the sample closest to t = 0.
    pub fn index_of_zero(&self) -> usize {
        let k = (-self.t0 / self.dt).round();
        (k.max(0.0) as usize).min(self.n - 1)
    }

    /// Check that the Nyquist frequency exceeds four times every listed
    /// bandwidth (rad/ps). Returns a per-entry report string on success.
    pub fn check_bandwidths(&self, required: &[(&str, f64)]) -> Result<String, CoreError> {
        let nyq = self.nyquist();
        let mut report = String::new();
        for (name, bw) in required {
            let ratio = nyq / bw;
            report.push_str(&format!(
                "{name}: bandwidth {bw:.3} rad/ps, nyquist/bandwidth = {ratio:.2}\n"
            ));
            if 4.0 * bw >= nyq {
                return Err(CoreError::Bandwidth(format!(
                    "{name} needs 4×{bw:.3} rad/ps but the grid Nyquist is {nyq:.3} rad/ps"
                )));
            }
        }
        Ok(report)
    }
}

/// Domain tag for a [`SampledField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldDomain {
    Time,
    Frequency,
}

/// Complex envelope sampled on a [`TimeGrid`], in either domain.
///
/// Pump envelopes carry units of √W; photon amplitudes √(1/ps).
#[derive(Debug, Clone)]
pub struct SampledField {
    pub grid: TimeGrid,
    pub domain: FieldDomain,
    pub values: Array1<Complex64>,
}

impl SampledField {
    pub fn new(grid: TimeGrid, domain: FieldDomain, values: Array1<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "field length must match its grid");
        SampledField {
            grid,
            domain,
            values,
        }
    }

    pub fn zeros(grid: TimeGrid, domain: FieldDomain) -> Self {
        let n = grid.len();
        SampledField::new(grid, domain, Array1::zeros(n))
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = Array1::from_iter((0..grid.len()).map(|k| f(grid.time(k))));
        SampledField::new(grid, FieldDomain::Time, values)
    }

    /// ∫|a|² dμ with the measure of the current domain (dt or dω).
    pub fn energy(&self) -> f64 {
        let measure = match self.domain {
            FieldDomain::Time => self.grid.dt(),
            FieldDomain::Frequency => self.grid.d_omega(),
        };
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * measure
    }
}

/// Shared FFT plans fixing the crate-wide sign convention: the forward
/// (time→frequency) kernel is `e^{+iωt}`.
pub struct FftEngine {
    n: usize,
    plus: Arc<dyn Fft<f64>>,
    minus: Arc<dyn Fft<f64>>,
}

impl FftEngine {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftEngine {
            n,
            // rustfft "inverse" applies the e^{+i…} kernel
            plus: planner.plan_fft_inverse(n),
            minus: planner.plan_fft_forward(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized Σ_j x_j e^{+iω_k t_j} over relative time indices.
    pub fn plus_inplace(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.plus.process(buf);
    }

    /// Unnormalized Σ_k X_k e^{-iω_k t_j} over relative time indices.
    pub fn minus_inplace(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.minus.process(buf);
    }

    /// Circular convolution `y_j = dt · Σ_m kernel(t_j - t_m) x_m` where the
    /// kernel is given by its spectral samples `K_k = ∫ kernel(t) e^{+iω_k t} dt`
    /// evaluated on the FFT-ordered grid frequencies.
    pub fn convolve_spectral(&self, kernel_freq: &[Complex64], buf: &mut [Complex64]) {
        self.plus_inplace(buf);
        let scale = 1.0 / self.n as f64;
        for (v, k) in buf.iter_mut().zip(kernel_freq) {
            *v *= k * scale;
        }
        self.minus_inplace(buf);
    }
}

/// Forward transform per the crate convention (see module docs).
pub fn forward_fft(engine: &FftEngine, field: &SampledField) -> SampledField {
    assert_eq!(field.domain, FieldDomain::Time, "forward_fft expects a time-domain field");
    let grid = field.grid;
    let mut buf: Vec<Complex64> = field.values.to_vec();
    engine.plus_inplace(&mut buf);
    let scale = grid.dt() / SQRT_2PI;
    let values = Array1::from_iter((0..grid.len()).map(|k| {
        // phases account for the grid origin t0
        let phase = Complex64::from_polar(1.0, grid.omega(k) * grid.t0());
        buf[k] * scale * phase
    }));
    SampledField::new(grid, FieldDomain::Frequency, values)
}

/// Inverse transform; `inverse_fft(forward_fft(a)) == a` to machine precision.
pub fn inverse_fft(engine: &FftEngine, field: &SampledField) -> SampledField {
    assert_eq!(
        field.domain,
        FieldDomain::Frequency,
        "inverse_fft expects a frequency-domain field"
    );
    let grid = field.grid;
    let mut buf: Vec<Complex64> = (0..grid.len())
        .map(|k| {
            let phase = Complex64::from_polar(1.0, -grid.omega(k) * grid.t0());
            field.values[k] * phase
        })
        .collect();
    engine.minus_inplace(&mut buf);
    let scale = grid.d_omega() / SQRT_2PI;
    let values = Array1::from_iter(buf.into_iter().map(|v| v * scale));
    SampledField::new(grid, FieldDomain::Time, values)
}

/// Discrete delta: 1/dt at the sample closest to t = 0, zero elsewhere, so
/// that ∫ δ dt = 1 and convolution with it is the identity.
pub fn discrete_delta(grid: TimeGrid) -> SampledField {
    let mut f = SampledField::zeros(grid, FieldDomain::Time);
    let k0 = grid.index_of_zero();
    f.values[k0] = Complex64::new(1.0 / grid.dt(), 0.0);
    f
}

/// Which Green-function block: output flavor ← input flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreenBlock {
    /// idler ← idler
    II,
    /// idler ← signal
    IS,
    /// signal ← idler
    SI,
    /// signal ← signal
    SS,
}

/// Discretized two-flavor Green function G_{xy}(z; t, t′) on a shared grid.
///
/// Storage is transposed for cache-friendly spectral operations along the
/// output time: `block[[tp, t]] = G(t, t′ = tp)`, i.e. each storage row holds
/// one input time t′ and runs contiguously over the output time t.
#[derive(Debug, Clone)]
pub struct GreenMatrix {
    pub grid: TimeGrid,
    /// Propagation distance this matrix represents, in m.
    pub z: f64,
    pub ii: Array2<Complex64>,
    pub is: Array2<Complex64>,
    pub si: Array2<Complex64>,
    pub ss: Array2<Complex64>,
}

impl GreenMatrix {
    /// Identity at z = 0: diagonal blocks are the discrete delta 1/dt, the
    /// cross blocks vanish.
    pub fn identity(grid: TimeGrid) -> Self {
        let n = grid.len();
        let mut ii = Array2::zeros((n, n));
        let inv_dt = Complex64::new(1.0 / grid.dt(), 0.0);
        for k in 0..n {
            ii[[k, k]] = inv_dt;
        }
        GreenMatrix {
            grid,
            z: 0.0,
            ss: ii.clone(),
            ii,
            is: Array2::zeros((n, n)),
            si: Array2::zeros((n, n)),
        }
    }

    pub fn block(&self, which: GreenBlock) -> &Array2<Complex64> {
        match which {
            GreenBlock::II => &self.ii,
            GreenBlock::IS => &self.is,
            GreenBlock::SI => &self.si,
            GreenBlock::SS => &self.ss,
        }
    }

    /// G(t, t′) of one block in math orientation.
    pub fn value(&self, which: GreenBlock, t_idx: usize, tp_idx: usize) -> Complex64 {
        self.block(which)[[tp_idx, t_idx]]
    }

    /// One block as an (t, t′)-oriented matrix (transposed copy of storage).
    pub fn block_math(&self, which: GreenBlock) -> Array2<Complex64> {
        self.block(which).t().to_owned()
    }

    /// The measure-weighted 2N×2N matrix `dt·[[G_ii, G_is], [G_si, G_ss]]`
    /// in math orientation; unitary when the dynamics conserve photons.
    pub fn stacked_weighted(&self) -> Array2<Complex64> {
        let n = self.grid.len();
        let dt = Complex64::new(self.grid.dt(), 0.0);
        let mut m = Array2::zeros((2 * n, 2 * n));
        for tp in 0..n {
            for t in 0..n {
                m[[t, tp]] = self.ii[[tp, t]] * dt;
                m[[t, tp + n]] = self.is[[tp, t]] * dt;
                m[[t + n, tp]] = self.si[[tp, t]] * dt;
                m[[t + n, tp + n]] = self.ss[[tp, t]] * dt;
            }
        }
        m
    }

    /// Frequency-domain diagonal of one block,
    /// `λ_k = (dt/n) Σ_{t,t′} G(t,t′) e^{+iω_k (t-t′)}`.
    ///
    /// For translation-invariant kernels (CW pumps on a periodic grid) this
    /// is the exact transfer function G(ω_k).
    pub fn frequency_diagonal(&self, which: GreenBlock, engine: &FftEngine) -> Array1<Complex64> {
        let n = self.grid.len();
        let dt = self.grid.dt();
        let block = self.block(which);
        let mut acc = vec![Complex64::default(); n];
        let mut buf = vec![Complex64::default(); n];
        for tp in 0..n {
            buf.copy_from_slice(block.row(tp).as_slice().expect("contiguous row"));
            engine.plus_inplace(&mut buf);
            for k in 0..n {
                // e^{-iω_k t'_rel}
                let phase = Complex64::from_polar(1.0, -self.grid.omega(k) * (tp as f64) * dt);
                acc[k] += buf[k] * phase;
            }
        }
        let scale = dt / n as f64;
        Array1::from_iter(acc.into_iter().map(|v| v * scale))
    }

    /// Restrict the channel's input side to the resolved envelope band with
    /// a smooth super-Gaussian spectral window `exp[-(ω/ω_c)⁴]`,
    /// ω_c = Nyquist/2.
    ///
    /// The delta-seeded discrete kernel carries oscillatory band-limit tails
    /// (the sampled identity is a periodic sinc); they cancel against smooth
    /// inputs but pollute a raw singular-value analysis with spurious
    /// near-Nyquist modes. The guard leaves every physically resolved input
    /// untouched (the window is flat to <0.2% over a quarter of the band)
    /// and suppresses the sub-grid content, so Schmidt data of the guarded
    /// channel is the physical one. Propagation, unitarity checks and
    /// smooth-input responses use the unguarded matrix.
    pub fn input_band_guard(&self, engine: &FftEngine) -> GreenMatrix {
        let n = self.grid.len();
        let omega_c = 0.5 * self.grid.nyquist();
        let window: Vec<f64> = (0..n)
            .map(|k| {
                let x = self.grid.omega(k) / omega_c;
                (-x.powi(4)).exp()
            })
            .collect();
        let mut out = self.clone();
        let mut buf = vec![Complex64::default(); n];
        for block in [&mut out.ii, &mut out.is, &mut out.si, &mut out.ss] {
            for t in 0..n {
                for tp in 0..n {
                    buf[tp] = block[[tp, t]];
                }
                engine.plus_inplace(&mut buf);
                for (v, w) in buf.iter_mut().zip(&window) {
                    *v *= w / n as f64;
                }
                engine.minus_inplace(&mut buf);
                for tp in 0..n {
                    block[[tp, t]] = buf[tp];
                }
            }
        }
        out
    }

    /// Relative amount of |G|² mass of a block outside the band
    /// `t ∈ [t′ + lo, t′ + hi]`.
    pub fn mass_outside_band(&self, which: GreenBlock, lo: f64, hi: f64) -> f64 {
        let n = self.grid.len();
        let block = self.block(which);
        let mut outside = 0.0;
        let mut total = 0.0;
        for tp in 0..n {
            let t_in = self.grid.time(tp);
            for t in 0..n {
                let w = block[[tp, t]].norm_sqr();
                total += w;
                let rel = self.grid.time(t) - t_in;
                if rel < lo || rel > hi {
                    outside += w;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }
}
