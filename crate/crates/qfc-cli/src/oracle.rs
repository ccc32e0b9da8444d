//! Cross-validation of the pulsed propagator against the closed-form CW
//! Green functions with flat-top pumps on the periodic grid.

use std::path::PathBuf;

use ndarray::Array1;
use num_complex::Complex64;
use qfc_core::cw;
use qfc_core::green::{self, PropagationConfig};
use qfc_core::grid::{FftEngine, GreenBlock};
use qfc_core::pump::PumpPair;

use crate::config::LoadedConfig;
use crate::outputs::{fmt, OutputSink};
use crate::scenario::*;
use crate::AppResult;

pub struct OracleReport {
    pub deviations: Vec<(GreenBlock, f64)>,
    pub threshold: f64,
    pub pass: bool,
}

/// Run flat pumps through the split-step propagator and compare the
/// frequency-domain Green diagonals against the analytic CW solution.
/// Threshold: 1e-3 without the delayed response, 5e-3 with it.
pub fn cw_vs_pulsed_oracle(loaded: &LoadedConfig) -> AppResult<(PathBuf, OracleReport)> {
    let cfg = &loaded.config;
    let mut sink = OutputSink::create(&cfg.output.directory, &loaded.hash_hex)?;
    let grid = build_grid(cfg)?;
    let scn = build_scenario(cfg)?;
    let resp = build_response(cfg, &scn)?;

    let amp = Complex64::new(scn.pump_power.sqrt(), 0.0);
    let pumps = PumpPair {
        grid,
        a_p: Array1::from_elem(grid.len(), amp),
        a_q: Array1::from_elem(grid.len(), amp),
        beta1_p: scn.beta1_i,
        beta1_q: scn.beta1_s,
        beta2_p: scn.beta2_s,
        beta2_q: scn.beta2_i,
    };
    let steps = if cfg.numerics.steps == 0 {
        128
    } else {
        cfg.numerics.steps
    };
    let result = green::propagate_green(
        &scn,
        &resp,
        &pumps,
        &PropagationConfig {
            steps,
            raman_iterations: cfg.numerics.raman_iterations,
            suffix_nodes: 0,
        },
    )?;
    let engine = FftEngine::new(grid.len());
    let analytic = cw::cw_greens(&scn, &resp, &grid.omegas());

    let threshold = if scn.f_r == 0.0 { 1e-3 } else { 5e-3 };
    let mut deviations = Vec::new();
    let mut table: Vec<Vec<f64>> = vec![Vec::new(); grid.len()];
    for (block, reference) in [
        (GreenBlock::II, &analytic.g_ii),
        (GreenBlock::IS, &analytic.g_is),
        (GreenBlock::SS, &analytic.g_ss),
    ] {
        let diag = result.green.frequency_diagonal(block, &engine);
        let sup = reference.iter().map(|v| v.norm()).fold(1e-30, f64::max);
        let mut worst = 0.0f64;
        for k in 0..grid.len() {
            let dev = (diag[k] - reference[k]).norm() / sup;
            worst = worst.max(dev);
            table[k].push(reference[k].norm());
            table[k].push(diag[k].norm());
            table[k].push(dev);
        }
        deviations.push((block, worst));
    }
    let pass = deviations.iter().all(|(_, d)| *d <= threshold);

    sink.write_file("oracle.csv", "oracle", |w| {
        writeln!(
            w,
            "omega (rad/ps),abs_ii_cw,abs_ii_pulsed,dev_ii,abs_is_cw,abs_is_pulsed,dev_is,abs_ss_cw,abs_ss_pulsed,dev_ss"
        )?;
        for k in 0..grid.len() {
            let cells: Vec<String> = table[k].iter().map(|v| fmt(*v)).collect();
            writeln!(w, "{},{}", fmt(grid.omega(k)), cells.join(","))?;
        }
        Ok(())
    })?;
    for (block, dev) in &deviations {
        sink.record_metric(&format!("max_dev_{block:?}").to_lowercase(), *dev);
    }
    sink.record_metric("threshold", threshold);
    sink.record_metric("pass", if pass { 1.0 } else { 0.0 });
    sink.record_setting("steps", steps);
    let dir = sink.finalize()?;
    Ok((
        dir,
        OracleReport {
            deviations,
            threshold,
            pass,
        },
    ))
}
