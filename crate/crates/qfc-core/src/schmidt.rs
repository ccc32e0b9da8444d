//! Schmidt (singular-value) decomposition of the cross Green function,
//! `G_is(t,t′) = Σ_n λ_n v_n(t) u_n(t′)`, with dt-measure weighting so the
//! modes are orthonormal under ∫|·|²dt and λ_n² is the conversion efficiency
//! of mode n.

use ndarray::{Array1, Array2};
use ndarray_linalg::SVD;
use num_complex::Complex64;

use crate::error::CoreError;
use crate::grid::{GreenBlock, GreenMatrix, TimeGrid};

/// Schmidt data: descending coefficients with paired output/input modes.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub grid: TimeGrid,
    /// Non-negative, sorted descending.
    pub coefficients: Vec<f64>,
    /// Output modes v_n(t), orthonormal under the dt measure; modes are the
    /// rows of the matrix.
    pub output_modes: Array2<Complex64>,
    /// Input modes u_n(t′) as they appear in the kernel expansion; the state
    /// to feed for conversion into v_n is the conjugate of row n.
    pub input_modes: Array2<Complex64>,
}

fn center_of_mass(grid: &TimeGrid, mode: ndarray::ArrayView1<Complex64>) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, v) in mode.iter().enumerate() {
        let w = v.norm_sqr();
        num += grid.time(k) * w;
        den += w;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Measure-weighted SVD of the cross block of a Green matrix.
pub fn decompose(green: &GreenMatrix) -> Result<SchmidtDecomposition, CoreError> {
    decompose_block(green, GreenBlock::IS)
}

/// Measure-weighted SVD of any block.
pub fn decompose_block(
    green: &GreenMatrix,
    which: GreenBlock,
) -> Result<SchmidtDecomposition, CoreError> {
    let grid = green.grid;
    let n = grid.len();
    let dt = grid.dt();
    // math orientation, weighted by the dt measure
    let m = green.block_math(which).mapv(|v| v * dt);
    let (u, s, vt) = m
        .svd(true, true)
        .map_err(|e| CoreError::numerics("schmidt decomposition", e.to_string()))?;
    let u = u.expect("left vectors requested");
    let vt = vt.expect("right vectors requested");

    let sqrt_dt = dt.sqrt();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
    // near-degenerate runs are ordered by the input-mode center of mass so
    // the decomposition is deterministic
    let tol = 1e-9 * s.iter().cloned().fold(0.0, f64::max);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (s[order[start]] - s[order[end]]).abs() <= tol {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].sort_by(|&a, &b| {
                let ca = center_of_mass(&grid, vt.row(a));
                let cb = center_of_mass(&grid, vt.row(b));
                ca.partial_cmp(&cb).unwrap()
            });
        }
        start = end;
    }

    let mut coefficients = Vec::with_capacity(n);
    let mut output_modes = Array2::<Complex64>::zeros((n, n));
    let mut input_modes = Array2::<Complex64>::zeros((n, n));
    for (rank, &j) in order.iter().enumerate() {
        coefficients.push(s[j]);
        // v_n(t) = U[:,j]/√dt, u_n(t') = Vᴴ[j,:]/√dt
        let mut v: Array1<Complex64> = u.column(j).mapv(|x| x / sqrt_dt);
        let mut w: Array1<Complex64> = vt.row(j).mapv(|x| x / sqrt_dt);
        // fix the global phase: peak sample of v_n real positive
        let peak = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .map(|(k, _)| k)
            .unwrap_or(0);
        let mag = v[peak].norm();
        if mag > 0.0 {
            let rot = v[peak].conj() / mag;
            v.mapv_inplace(|x| x * rot);
            w.mapv_inplace(|x| x * rot.conj());
        }
        output_modes.row_mut(rank).assign(&v);
        input_modes.row_mut(rank).assign(&w);
    }
    Ok(SchmidtDecomposition {
        grid,
        coefficients,
        output_modes,
        input_modes,
    })
}

/// Singular values (descending) of the full measure-weighted 2N×2N Green
/// matrix; all equal to 1 when the dynamics conserve the field commutators.
pub fn stacked_singular_values(green: &GreenMatrix) -> Result<Vec<f64>, CoreError> {
    let m = green.stacked_weighted();
    let (_, s, _) = m
        .svd(false, false)
        .map_err(|e| CoreError::numerics("stacked singular values", e.to_string()))?;
    let mut vals: Vec<f64> = s.to_vec();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

impl SchmidtDecomposition {
    /// Conversion efficiency λ_n² of mode `n`.
    pub fn conversion_efficiency(&self, n: usize) -> Result<f64, CoreError> {
        self.coefficients
            .get(n)
            .map(|l| l * l)
            .ok_or_else(|| CoreError::Parameter(format!("mode index {n} out of range")))
    }

    /// The input state that converts into output mode `n` (conjugated input
    /// kernel mode, unit norm).
    pub fn input_state(&self, n: usize) -> Result<Array1<Complex64>, CoreError> {
        if n >= self.grid.len() {
            return Err(CoreError::Parameter(format!("mode index {n} out of range")));
        }
        Ok(self.input_modes.row(n).mapv(|v| v.conj()))
    }

    /// Relative Frobenius error of the rank-`k` reconstruction against the
    /// measure-weighted kernel.
    pub fn reconstruction_error(&self, green: &GreenMatrix, which: GreenBlock, k: usize) -> f64 {
        let dt = self.grid.dt();
        let m = green.block_math(which).mapv(|v| v * dt);
        let n = self.grid.len();
        let mut rec = Array2::<Complex64>::zeros((n, n));
        for rank in 0..k.min(n) {
            let lam = self.coefficients[rank] * dt;
            let v = self.output_modes.row(rank);
            let u = self.input_modes.row(rank);
            for a in 0..n {
                if v[a].norm_sqr() == 0.0 {
                    continue;
                }
                let va = lam * v[a];
                for b in 0..n {
                    rec[[a, b]] += va * u[b];
                }
            }
        }
        let num: f64 = (&m - &rec).iter().map(|v| v.norm_sqr()).sum();
        let den: f64 = m.iter().map(|v| v.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// CSV export `n,lambda,efficiency`.
    pub fn write_coefficients_csv(
        &self,
        mut w: impl std::io::Write,
        max_modes: usize,
    ) -> std::io::Result<()> {
        writeln!(w, "n,lambda,efficiency")?;
        for (n, l) in self.coefficients.iter().take(max_modes).enumerate() {
            writeln!(w, "{},{},{}", n, l, l * l)?;
        }
        Ok(())
    }

    /// CSV export of the first `count` mode pairs:
    /// `t (ps),re_v<n>,im_v<n>,re_u<n>,im_u<n>,...`.
    pub fn write_modes_csv(&self, mut w: impl std::io::Write, count: usize) -> std::io::Result<()> {
        write!(w, "t (ps)")?;
        for n in 0..count {
            write!(w, ",re_v{n},im_v{n},re_u{n},im_u{n}")?;
        }
        writeln!(w)?;
        for k in 0..self.grid.len() {
            write!(w, "{}", self.grid.time(k))?;
            for n in 0..count {
                let v = self.output_modes[[n, k]];
                let u = self.input_modes[[n, k]];
                write!(w, ",{},{},{},{}", v.re, v.im, u.re, u.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// RMS duration of an input mode around its center of mass.
    pub fn input_mode_rms_duration(&self, n: usize) -> f64 {
        let mode = self.input_modes.row(n);
        let com = center_of_mass(&self.grid, mode);
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, v) in mode.iter().enumerate() {
            let w = v.norm_sqr();
            let d = self.grid.time(k) - com;
            num += d * d * w;
            den += w;
        }
        (num / den).sqrt()
    }
}
