use num_complex::Complex64;
use qfc_core::cw::{self, FiberScenario};
use qfc_core::grid::{SampledField, TimeGrid};
use qfc_core::raman::{silica_tables_from_dir, PolarizationConfig};
use qfc_core::stats::{self, SpectralFilter};

fn main() {
    let two_pi = 2.0 * std::f64::consts::PI;
    let tau: f64 = 0.1;
    let mut scn = FiberScenario::new(1e-3, 0.18, 1.0, 1.0, 300.0, -two_pi * 17.0,
        PolarizationConfig::Copolarized).unwrap();
    let (h_par, h_b) = silica_tables_from_dir("/root/crate/data").unwrap();
    let resp = scn.response(h_par, h_b).unwrap();
    let (_, _, g) = cw::coupling_at(&scn, &resp, 0.0, 0.0);
    scn.length = std::f64::consts::FRAC_PI_2 / g.re;
    let grid = TimeGrid::centered(2048, 0.005).unwrap();
    let filter = SpectralFilter::rectangular(2.0 / tau);
    let psi_in = SampledField::from_fn(grid, |t| {
        let norm = 1.0 / (tau.sqrt() * (2.0 * std::f64::consts::PI).powf(0.25));
        Complex64::new(norm * (-t * t / (4.0 * tau * tau)).exp(), 0.0)
    });
    let psi_out = cw::filtered_psi_out(&scn, &resp, &psi_in, &filter).unwrap();
    let e = cw::phonon_expectation_cw(&scn, &resp, &filter, grid, 65);
    let (g2, i_out) = stats::g2_matrix(&psi_out, &e).unwrap();
    println!("E(0,0) = {:.5}, |psi(0)|^2 = {:.5}", e[[1024,1024]].re, psi_out.values[1024].norm_sqr());
    for k in (1024..1260).step_by(10) {
        let t = grid.time(k);
        println!("t={:+.3} ps  |psi|^2={:.6e}  E={:.5e}  g2={:.4}  I={:.5e}",
            t, psi_out.values[k].norm_sqr(), e[[k,k]].re, g2[[k,k]], i_out[k]);
    }
}
