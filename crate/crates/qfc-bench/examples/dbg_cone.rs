use qfc_core::cw::FiberScenario;
use qfc_core::green::{self, PropagationConfig};
use qfc_core::grid::{GreenBlock, TimeGrid};
use qfc_core::pump::init_gaussian_pumps;
use qfc_core::raman::{silica_tables_from_dir, PolarizationConfig};

fn main() {
    let two_pi = 2.0 * std::f64::consts::PI;
    let delta_t = 0.6;
    let length = 2.0 * delta_t * qfc_core::C_M_PER_PS / 1e-3;
    let gamma = 1e-2;
    let power = 4.0 * std::f64::consts::PI / (gamma * length);
    let mut scn = FiberScenario::new(gamma, 0.0, power, length, 300.0, -two_pi * 17.0,
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
    for steps in [256usize, 512] {
        let r = green::propagate_green(&scn, &resp, &pumps, &PropagationConfig {
            steps, ..Default::default()
        }).unwrap();
        let g = &r.green;
        let n = grid.len();
        // histogram of |G_is|^2 mass vs (t - t') in bins of 0.1 ps
        let mut hist = vec![0.0f64; 60];
        let mut total = 0.0;
        let block = g.block(GreenBlock::IS);
        for tp in 0..n {
            for t in 0..n {
                let w = block[[tp, t]].norm_sqr();
                total += w;
                let rel = grid.time(t) - grid.time(tp);
                let bin = ((rel + 3.0) / 0.1).floor() as isize;
                if (0..60).contains(&bin) {
                    hist[bin as usize] += w;
                }
            }
        }
        println!("steps {steps}: total {total:.3e}");
        for (i, h) in hist.iter().enumerate() {
            let lo = -3.0 + i as f64 * 0.1;
            if *h > 0.0 {
                println!("  rel [{:+.1},{:+.1}): {:.3e}", lo, lo + 0.1, h / total);
            }
        }
    }
}
