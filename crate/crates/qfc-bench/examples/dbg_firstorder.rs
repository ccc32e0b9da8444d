use ndarray::Array2;
use num_complex::Complex64;
use qfc_core::grid::{GreenMatrix, TimeGrid};
use qfc_core::schmidt;

fn main() {
    // analytic first-order collision kernel on the acceptance grid:
    // G1(t,t') = 2i γ_c ∫dz A_p*(z, t_c) A_q(z, t_c) δ(t - t' - rel(z)) with
    // rel(z) = β_s z + β_i (ℓ-z), t_c = t' + β_s z; the δ becomes 1/|w| on
    // the cone, w = β_s - β_i.
    let grid = TimeGrid::centered(512, 0.01).unwrap();
    let n = grid.len();
    let tau = 0.1f64;
    let delta_t = 0.6;
    let length = 2.0 * delta_t * qfc_core::C_M_PER_PS / 1e-3;
    let w = 1e-3 / qfc_core::C_M_PER_PS; // beta1_s - beta1_i
    let gamma_c = 1.5e-2;
    let strength: f64 = 0.05;
    let power = strength / (1e-2 * length);

    let mut g = GreenMatrix::identity(grid);
    let mut block = Array2::<Complex64>::zeros((n, n));
    for tp in 0..n {
        let t_in = grid.time(tp);
        for t in 0..n {
            let rel = grid.time(t) - t_in;
            // z from rel: rel = -wℓ/2 + w z
            let z = (rel + 0.5 * w * length) / w;
            if !(0.0..=length).contains(&z) {
                continue;
            }
            let t_c = t_in + 0.5 * w * z; // beta_s = +w/2
            let p_center = 0.5 * delta_t - 0.5 * w * z;
            let q_center = -0.5 * delta_t + 0.5 * w * z;
            let a_p = (-(t_c - p_center).powi(2) / (4.0 * tau * tau)).exp();
            let a_q = (-(t_c - q_center).powi(2) / (4.0 * tau * tau)).exp();
            block[[tp, t]] = Complex64::i() * 2.0 * gamma_c * power * a_p * a_q / w;
        }
    }
    g.is = block;
    let dec = schmidt::decompose(&g).unwrap();
    let lams: Vec<String> = dec.coefficients.iter().take(6).map(|l| format!("{l:.5}")).collect();
    println!("analytic first-order: λ = [{}]", lams.join(", "));
    println!("ratio λ2/λ1 = {:.4}", dec.coefficients[1] / dec.coefficients[0]);
}
