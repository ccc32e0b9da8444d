//! Multi-curve study runners behind `mode = "study"`: flux curves, g² maps,
//! detuning/temperature scans, cross-Green maps, Schmidt-coefficient scans
//! and the input-optimization comparison.

use qfc_core::cw;
use qfc_core::green::{self, PropagationConfig};
use qfc_core::grid::{FftEngine, GreenBlock};
use qfc_core::schmidt;
use qfc_core::stats::{self};

use crate::config::ScenarioConfig;
use crate::outputs::{fmt, OutputSink};
use crate::runner::spectral_filter;
use crate::scenario::*;
use crate::{AppError, AppResult};

pub fn run_study(cfg: &ScenarioConfig, sink: &mut OutputSink) -> AppResult<()> {
    let name = cfg.study.as_deref().unwrap_or_default();
    sink.record_setting("study", name);
    match name {
        "fig2" => flux_curves(cfg, sink),
        "fig3" => g2_map(cfg, sink),
        "fig4" => g2_click_scans(cfg, sink),
        "fig5" => cross_green_maps(cfg, sink),
        "fig6" => schmidt_scan(cfg, sink),
        "fig7" => input_optimization(cfg, sink),
        other => Err(AppError::Config(format!("unknown study {other:?}"))),
    }
}

/// Conversion-optimal fiber length: first maximum of |G_is|, Re g(0)·ℓ = π/2.
fn optimal_length(scn: &cw::FiberScenario, response: &qfc_core::RamanResponse) -> f64 {
    let (_, _, g) = cw::coupling_at(scn, response, 0.0, scn.delta_beta);
    std::f64::consts::FRAC_PI_2 / g.re
}

/// Relative output flux vs interaction strength for Stokes and anti-Stokes
/// detunings, with and without the delayed response.
fn flux_curves(cfg: &ScenarioConfig, sink: &mut OutputSink) -> AppResult<()> {
    let base = build_scenario(cfg)?;
    let detunings = [-cfg.fiber.detuning_thz.abs(), cfg.fiber.detuning_thz.abs()];
    let points = 60;
    let mut rows = Vec::new();
    for j in 1..=points {
        let x = 2.2 * j as f64 / points as f64; // γ_iqps·P₀·ℓ
        let mut row = vec![x];
        // electronic-only reference
        {
            let mut scn = base.clone();
            scn.f_r = 0.0;
            let gamma_iqps = 1.5 * scn.gamma;
            scn.pump_power = x / (gamma_iqps * scn.length);
            let resp = build_response(cfg, &scn)?;
            row.push(cw::output_flux_relative(&scn, &resp, 1.0));
        }
        for det in detunings {
            let mut scn = base.clone();
            scn.detuning = TWO_PI * det;
            let gamma_iqps = 1.5 * scn.gamma * (1.0 - scn.f_r);
            scn.pump_power = x / (gamma_iqps * scn.length);
            let resp = build_response(cfg, &scn)?;
            row.push(cw::output_flux_relative(&scn, &resp, 1.0));
        }
        rows.push(row);
    }
    let det_label = cfg.fiber.detuning_thz.abs();
    sink.write_file("fig2_flux.csv", "study", |w| {
        writeln!(
            w,
            "gamma_iqps_P0_l,flux_electronic,flux_stokes_{det_label}THz,flux_antistokes_{det_label}THz"
        )?;
        for row in &rows {
            let cells: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    })?;
    sink.record_metric("curves", 3.0);
    Ok(())
}

/// The time-resolved correlation map of a converted photon under CW pumps at
/// the conversion-optimal length.
fn g2_map(cfg: &ScenarioConfig, sink: &mut OutputSink) -> AppResult<()> {
    let mut point = cfg.clone();
    point.mode = crate::config::Mode::Cw;
    let mut scn = build_scenario(&point)?;
    let resp = build_response(&point, &scn)?;
    scn.length = optimal_length(&scn, &resp);
    point.fiber.length = scn.length;
    let eval = crate::runner::evaluate_cw(&point)?;
    sink.record_setting("optimal_length_m", scn.length);
    for (k, v) in &eval.metrics {
        sink.record_metric(k, *v);
    }
    let tau = input_tau(&point);
    let grid = eval.corr.grid;
    let crop = 8.0 * tau;
    let idx: Vec<usize> = (0..grid.len())
        .filter(|&k| grid.time(k).abs() <= crop)
        .collect();
    let stride = idx.len().div_ceil(400).max(1);
    let idx: Vec<usize> = idx.into_iter().step_by(stride).collect();
    sink.write_file("fig3_g2_map.csv", "study", |w| {
        writeln!(w, "t1 (ps),t2 (ps),g2")?;
        for &a in &idx {
            for &b in &idx {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt(grid.time(a)),
                    fmt(grid.time(b)),
                    fmt(eval.corr.g2[[a, b]])
                )?;
            }
        }
        Ok(())
    })?;
    sink.write_file("fig3_sections.csv", "study", |w| {
        writeln!(w, "t (ps),g2_zero_delay,g2_vs_delay_at_peak,i_out (1/ps)")?;
        let peak = grid.index_of_zero();
        for k in 0..grid.len() {
            if grid.time(k).abs() > crop {
                continue;
            }
            writeln!(
                w,
                "{},{},{},{}",
                fmt(grid.time(k)),
                fmt(eval.corr.g2[[k, k]]),
                fmt(eval.corr.g2[[peak, k]]),
                fmt(eval.corr.i_out[k])
            )?;
        }
        Ok(())
    })?;
    Ok(())
}

/// Windowed g² scans: (a) vs interaction strength at fixed γP₀ by varying
/// the length; (b) vs detuning at the optimal length for three temperatures
/// and both polarization configurations, with the closed-form estimate.
fn g2_click_scans(cfg: &ScenarioConfig, sink: &mut OutputSink) -> AppResult<()> {
    use qfc_core::raman::PolarizationConfig as Pc;
    let window = cfg.detector.window;
    let width = cfg.filter.width;

    // (a): vary length at fixed γP₀
    let strengths: Vec<f64> = (1..=40).map(|j| 0.05 * j as f64).collect();
    let mut rows_a = Vec::new();
    for &x in &strengths {
        let mut row = vec![x];
        for sign in [-1.0, 1.0] {
            for pol in ["copolarized", "anisotropic"] {
                let mut point = cfg.clone();
                point.mode = crate::config::Mode::Cw;
                point.fiber.polarization = pol.into();
                point.fiber.detuning_thz = sign * cfg.fiber.detuning_thz.abs();
                point.fiber.length = x / (point.fiber.gamma * point.fiber.pump_power);
                let eval = crate::runner::evaluate_cw(&point)?;
                row.push(eval.metrics["g2_click"]);
            }
        }
        rows_a.push(row);
    }
    let det = cfg.fiber.detuning_thz.abs();
    sink.write_file("fig4a_g2_vs_strength.csv", "study", |w| {
        writeln!(
            w,
            "gamma_P0_l,g2_copol_minus{det}THz,g2_aniso_minus{det}THz,g2_copol_plus{det}THz,g2_aniso_plus{det}THz"
        )?;
        for row in &rows_a {
            let cells: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    })?;

    // (b): vs detuning at the optimal length
    let temps = [300.0, 77.0, 4.0];
    let mut rows_b = Vec::new();
    let mut det_thz = 5.0;
    while det_thz <= 40.0 + 1e-9 {
        let mut row = vec![det_thz];
        for &temp in &temps {
            for pol in [Pc::Copolarized, Pc::Anisotropic] {
                let mut point = cfg.clone();
                point.mode = crate::config::Mode::Cw;
                point.fiber.polarization = match pol {
                    Pc::Copolarized => "copolarized".into(),
                    Pc::Anisotropic => "anisotropic".into(),
                };
                point.fiber.detuning_thz = det_thz;
                point.fiber.temperature = temp;
                let scn0 = build_scenario(&point)?;
                let resp0 = build_response(&point, &scn0)?;
                point.fiber.length = optimal_length(&scn0, &resp0);
                let eval = crate::runner::evaluate_cw(&point)?;
                row.push(eval.metrics["g2_click"]);
            }
        }
        // far-detuned closed-form estimate, copolarized, per temperature
        for &temp in &temps {
            let mut point = cfg.clone();
            point.fiber.polarization = "copolarized".into();
            point.fiber.detuning_thz = det_thz;
            point.fiber.temperature = temp;
            let mut scn = build_scenario(&point)?;
            let resp = build_response(&point, &scn)?;
            scn.length = optimal_length(&scn, &resp);
            row.push(cw::g2_click_approx_laurent(&scn, &resp, window, width));
        }
        rows_b.push(row);
        det_thz += 1.0;
    }
    sink.write_file("fig4b_g2_vs_detuning.csv", "study", |w| {
        write!(w, "detuning_THz")?;
        for t in temps {
            write!(w, ",g2_copol_{t}K,g2_aniso_{t}K")?;
        }
        for t in temps {
            write!(w, ",approx_laurent_{t}K")?;
        }
        writeln!(w)?;
        for row in &rows_b {
            let cells: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    })?;
    sink.record_metric("scan_points", (rows_a.len() + rows_b.len()) as f64);
    Ok(())
}

fn write_cross_green_map(
    sink: &mut OutputSink,
    name: &str,
    green: &qfc_core::GreenMatrix,
    crop: f64,
) -> AppResult<()> {
    let grid = green.grid;
    let idx: Vec<usize> = (0..grid.len())
        .filter(|&k| grid.time(k).abs() <= crop)
        .collect();
    let stride = idx.len().div_ceil(256).max(1);
    let idx: Vec<usize> = idx.into_iter().step_by(stride).collect();
    let mut max = 0.0f64;
    for &tp in &idx {
        for &t in &idx {
            max = max.max(green.value(GreenBlock::IS, t, tp).norm());
        }
    }
    let max = max.max(1e-300);
    sink.write_file(name, "study", |w| {
        writeln!(w, "t (ps),t_in (ps),abs_G_is_normalized")?;
        for &t in &idx {
            for &tp in &idx {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt(grid.time(t)),
                    fmt(grid.time(tp)),
                    fmt(green.value(GreenBlock::IS, t, tp).norm() / max)
                )?;
            }
        }
        Ok(())
    })
}

/// Cross Green function maps for the collision scenario: electronic only,
/// with second-order dispersion, silica Raman fraction and pure Raman.
fn cross_green_maps(cfg: &ScenarioConfig, sink: &mut OutputSink) -> AppResult<()> {
    let beta2 = if cfg.fiber.beta2_s != 0.0 {
        cfg.fiber.beta2_s
    } else {
        0.01
    };
    let panels: [(&str, f64, f64); 4] = [
        ("fig5a_electronic.csv", 0.0, 0.0),
        ("fig5b_dispersion.csv", 0.0, beta2),
        ("fig5c_silica.csv", 0.18, 0.0),
        ("fig5d_pure_raman.csv", 1.0, 0.0),
    ];
    for (name, f_r, b2) in panels {
        let mut point = cfg.clone();
        point.mode = crate::config::Mode::Pulsed;
        point.fiber.f_r = f_r;
        point.fiber.beta2_s = b2;
        point.fiber.beta2_i = -b2;
        point.numerics.suffix_nodes = 0;
        let scn = build_scenario(&point)?;
        let resp = build_response(&point, &scn)?;
        let grid = build_grid(&point)?;
        let pumps = build_pumps(&point, &scn, grid)?;
        let result = green::propagate_green(
            &scn,
            &resp,
            &pumps,
            &PropagationConfig {
                steps: point.numerics.steps,
                raman_iterations: point.numerics.raman_iterations,
                suffix_nodes: 0,
            },
        )?;
        let tau = point.pumps.as_ref().map(|p| p.tau_p).unwrap_or(0.1);
        let band = 0.5 * (scn.beta1_s - scn.beta1_i).abs() * scn.length + 6.0 * tau;
        write_cross_green_map(sink, name, &result.green, band)?;
        let t_lo = (scn.beta1_i * scn.length).min(scn.beta1_s * scn.length);
        let t_hi = (scn.beta1_i * scn.length).max(scn.beta1_s * scn.length);
        sink.record_metric(
            &format!("outside_mass_{}", name.trim_end_matches(".csv")),
            result
                .green
                .mass_outside_band(GreenBlock::IS, t_lo - 4.0 * tau, t_hi + 4.0 * tau),
        );
    }
    Ok(())
}

/// First two Schmidt coefficients vs interaction strength for three Raman
/// fractions, plus the leading input modes at γPℓ = 4π.
fn schmidt_scan(cfg: &ScenarioConfig, sink: &mut OutputSink) -> AppResult<()> {
    let fractions = [0.0, 0.18, 1.0];
    let points = 12;
    let max_strength = 8.0 * std::f64::consts::PI;
    let mut rows = Vec::new();
    for j in 1..=points {
        let x = max_strength * j as f64 / points as f64;
        let mut row = vec![x];
        for &f_r in &fractions {
            let mut point = cfg.clone();
            point.mode = crate::config::Mode::Pulsed;
            point.fiber.f_r = f_r;
            point.numerics.suffix_nodes = 0;
            let scn0 = build_scenario(&point)?;
            point.fiber.pump_power = x / (point.fiber.gamma * scn0.length);
            let eval = crate::runner::evaluate_pulsed(&point)?;
            row.push(eval.metrics["lambda1"]);
            row.push(eval.metrics["lambda2"]);
            if (x - 4.0 * std::f64::consts::PI).abs() < 1e-9 {
                let label = format!("fig6_input_mode_fr{}.csv", f_r);
                let dec = eval.decomposition;
                sink.write_file(&label, "study", |w| dec.write_modes_csv(w, 2))?;
                sink.record_metric(
                    &format!("input_mode_rms_fr{f_r}"),
                    dec.input_mode_rms_duration(0),
                );
            }
        }
        rows.push(row);
    }
    sink.write_file("fig6_schmidt_coefficients.csv", "study", |w| {
        write!(w, "gamma_P_l")?;
        for f_r in fractions {
            write!(w, ",lambda1_fr{f_r},lambda2_fr{f_r}")?;
        }
        writeln!(w)?;
        for row in &rows {
            let cells: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    })?;
    Ok(())
}

/// Windowed g² and conversion probability vs detuning for four input-state
/// choices (pump-matched Gaussian, electronic-optimized, Raman-optimized,
/// filter-optimized) against the CW-pump reference.
fn input_optimization(cfg: &ScenarioConfig, sink: &mut OutputSink) -> AppResult<()> {
    let detunings: Vec<f64> = vec![5.0, 9.0, 13.0, 17.0, 21.0, 26.0, 32.0];
    let filter = spectral_filter(cfg);
    let window = cfg.detector.window;

    // electronic-optimized input: leading Schmidt mode of the f_R = 0 run
    // (detuning-independent)
    let electronic_input = {
        let mut point = cfg.clone();
        point.mode = crate::config::Mode::Pulsed;
        point.fiber.f_r = 0.0;
        point.numerics.suffix_nodes = 0;
        let eval = crate::runner::evaluate_pulsed(&point)?;
        schmidt_input(&eval.decomposition, 0)?
    };

    let mut rows = Vec::new();
    for &det in &detunings {
        let mut point = cfg.clone();
        point.mode = crate::config::Mode::Pulsed;
        point.fiber.detuning_thz = det;
        if point.numerics.suffix_nodes == 0 {
            point.numerics.suffix_nodes = 17;
        }
        let scn = build_scenario(&point)?;
        let resp = build_response(&point, &scn)?;
        let grid = build_grid(&point)?;
        let pumps = build_pumps(&point, &scn, grid)?;
        let result = green::propagate_green(
            &scn,
            &resp,
            &pumps,
            &PropagationConfig {
                steps: point.numerics.steps,
                raman_iterations: point.numerics.raman_iterations,
                suffix_nodes: point.numerics.suffix_nodes,
            },
        )?;
        let engine = FftEngine::new(grid.len());
        let e = stats::pulsed_phonon_expectation(&result.suffix, &resp, scn.temperature, &filter)?;

        let raman_dec = schmidt::decompose(&result.green)?;
        let filtered_green = stats::apply_filter_green(&engine, &result.green, &filter)?;
        let filtered_dec = schmidt::decompose(&filtered_green)?;

        let tau = point.pumps.as_ref().map(|p| p.tau_p).unwrap_or(0.1);
        let inputs = [
            ("gaussian", gaussian_input(grid, tau, default_input_center(&point))),
            ("electronic", electronic_input.clone()),
            ("raman", schmidt_input(&raman_dec, 0)?),
            ("filtered", schmidt_input(&filtered_dec, 0)?),
        ];
        let mut row = vec![det];
        for (_, psi_in) in &inputs {
            let psi_out =
                stats::psi_out_from_green(&engine, &result.green, psi_in, Some(&filter))?;
            let click = stats::g2_click(&psi_out, &e, window)?;
            row.push(click);
            row.push(psi_out.energy());
        }
        // CW-pump reference at its own optimal length
        {
            let mut cw_point = cfg.clone();
            cw_point.mode = crate::config::Mode::Cw;
            cw_point.pumps = None;
            cw_point.fiber.detuning_thz = det;
            cw_point.input.center = Some(0.0);
            let scn0 = build_scenario(&cw_point)?;
            let resp0 = build_response(&cw_point, &scn0)?;
            cw_point.fiber.length = optimal_length(&scn0, &resp0);
            let eval = crate::runner::evaluate_cw(&cw_point)?;
            row.push(eval.metrics["g2_click"]);
            row.push(eval.metrics["conversion_probability"]);
        }
        rows.push(row);
    }
    sink.write_file("fig7_input_comparison.csv", "study", |w| {
        write!(w, "detuning_THz")?;
        for name in ["gaussian", "electronic", "raman", "filtered", "cw"] {
            write!(w, ",g2_{name},conversion_{name}")?;
        }
        writeln!(w)?;
        for row in &rows {
            let cells: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    })?;
    sink.record_setting(
        "conversion_probability_definition",
        "integral of |psi_out|^2 dt after the spectral filter",
    );
    Ok(())
}
