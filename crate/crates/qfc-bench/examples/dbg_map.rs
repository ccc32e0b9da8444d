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
    let strength = 0.05;
    let power = strength / (gamma * length);
    let mut scn = FiberScenario::new(gamma, 0.0, power, length, 300.0, -two_pi * 13.2,
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
        steps: 128, ..Default::default()
    }).unwrap();
    let g = &r.green;
    // |G_is| on a coarse lattice: rows t' from -0.9..0.1, cols t from -0.9..0.9
    let b = g.block(GreenBlock::IS);
    let max = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    println!("max |G_is| = {max:.3e}");
    print!("t'\\t  ");
    for tc in (76..436).step_by(30) {
        print!("{:+.2} ", grid.time(tc));
    }
    println!();
    for tp in (76..436).step_by(30) {
        print!("{:+.2}: ", grid.time(tp));
        for tc in (76..436).step_by(30) {
            let v = b[[tp, tc]].norm() / max;
            let ch = if v > 0.3 { '#' } else if v > 0.1 { '*' } else if v > 0.03 { '+' }
                else if v > 0.01 { '.' } else if v > 0.003 { ',' } else { ' ' };
            print!("{ch}    ");
        }
        println!();
    }
}
