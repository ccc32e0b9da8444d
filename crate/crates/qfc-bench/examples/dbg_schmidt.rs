use qfc_core::cw::FiberScenario;
use qfc_core::green::{self, PropagationConfig};
use qfc_core::grid::TimeGrid;
use qfc_core::pump::init_gaussian_pumps;
use qfc_core::raman::{silica_tables_from_dir, PolarizationConfig};
use qfc_core::schmidt;

fn main() {
    let two_pi = 2.0 * std::f64::consts::PI;
    let delta_t = 0.6;
    let length = 2.0 * delta_t * qfc_core::C_M_PER_PS / 1e-3;
    let gamma = 1e-2;
    for (f_r, strength) in [(0.0, 31.4), (0.0, 37.7)] {
        let power = strength / (gamma * length);
        let mut scn = FiberScenario::new(gamma, f_r, power, length, 300.0, two_pi * 13.2,
            PolarizationConfig::Copolarized).unwrap();
        let walkoff = 1e-3 / qfc_core::C_M_PER_PS;
        scn.beta1_i = -0.5 * walkoff;
        scn.beta1_s = 0.5 * walkoff;
        let grid = TimeGrid::centered(512, 0.01).unwrap();
        let mut pumps = init_gaussian_pumps(power, 0.1, delta_t, grid).unwrap();
        pumps.beta1_p = scn.beta1_i;
        pumps.beta1_q = scn.beta1_s;
        let (h_par, h_b) = silica_tables_from_dir("/root/crate/data").unwrap();
        let resp = scn.response(h_par, h_b).unwrap();
        let r = green::propagate_green(&scn, &resp, &pumps, &PropagationConfig {
            steps: 640, ..Default::default()
        }).unwrap();
        let engine = qfc_core::grid::FftEngine::new(grid.len());
        let guarded = r.green.input_band_guard(&engine);
        let dec = schmidt::decompose(&guarded).unwrap();
        let lams: Vec<String> = dec.coefficients.iter().take(6).map(|l| format!("{l:.4}")).collect();
        println!("f_R={f_r} strength={strength:.2}: λ = [{}]", lams.join(", "));
        for n in 0..3 {
            let m = dec.input_modes.row(n);
            let com: f64 = {
                let mut num = 0.0; let mut den = 0.0;
                for (k, v) in m.iter().enumerate() {
                    num += grid.time(k) * v.norm_sqr(); den += v.norm_sqr();
                }
                num / den
            };
            println!("   mode {n}: input com {com:+.3} ps, rms {:.3} ps", dec.input_mode_rms_duration(n));
        }
    }
}
