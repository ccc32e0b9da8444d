//! Step-size and grid-resolution convergence study for the pulsed
//! propagator, with fitted observed orders.

use std::path::PathBuf;

use qfc_core::green::{self, PropagationConfig};
use qfc_core::grid::{FftEngine, GreenBlock, GreenMatrix, TimeGrid};

use crate::config::{LoadedConfig, Mode};
use crate::outputs::{fmt, OutputSink};
use crate::scenario::*;
use crate::{AppError, AppResult};

fn block_diff(a: &GreenMatrix, b: &GreenMatrix) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in [
        (&a.ii, &b.ii),
        (&a.is, &b.is),
        (&a.si, &b.si),
        (&a.ss, &b.ss),
    ] {
        for (u, v) in x.iter().zip(y.iter()) {
            num += (u - v).norm_sqr();
            den += v.norm_sqr();
        }
    }
    (num / den).sqrt()
}

pub struct ConvergenceReport {
    pub errors: Vec<(usize, f64, f64)>,
    pub orders: Vec<f64>,
    pub min_order: f64,
    pub monotone: bool,
    pub grid_check: Option<f64>,
    pub single_iteration_order: Option<f64>,
    pub pass: bool,
}

/// Run the study: levels of step-halving, a grid-doubling check and a
/// single-Raman-iteration comparison, reporting fitted orders against the
/// ≥ 1.8 requirement.
pub fn convergence_study(loaded: &LoadedConfig, levels: usize) -> AppResult<(PathBuf, ConvergenceReport)> {
    let cfg = &loaded.config;
    if cfg.mode != Mode::Pulsed {
        return Err(AppError::Config("convergence study requires mode = \"pulsed\"".into()));
    }
    let levels = levels.max(2);
    let mut sink = OutputSink::create(&cfg.output.directory, &loaded.hash_hex)?;

    let scn = build_scenario(cfg)?;
    let resp = build_response(cfg, &scn)?;
    let grid = build_grid(cfg)?;
    let pumps = build_pumps(cfg, &scn, grid)?;

    let base_steps = if cfg.numerics.steps == 0 {
        64
    } else {
        cfg.numerics.steps
    };
    let run = |steps: usize, iterations: usize| -> AppResult<GreenMatrix> {
        let result = green::propagate_green(
            &scn,
            &resp,
            &pumps,
            &PropagationConfig {
                steps,
                raman_iterations: iterations,
                suffix_nodes: 0,
            },
        )?;
        Ok(result.green)
    };

    // successive step-halvings
    let mut greens = Vec::new();
    for j in 0..=levels {
        greens.push((base_steps << j, run(base_steps << j, cfg.numerics.raman_iterations)?));
    }
    let mut errors = Vec::new();
    for j in 0..levels {
        let e = block_diff(&greens[j].1, &greens[j + 1].1);
        errors.push((greens[j].0, scn.length / greens[j].0 as f64, e));
    }
    let mut orders = Vec::new();
    for j in 0..errors.len().saturating_sub(1) {
        orders.push((errors[j].2 / errors[j + 1].2).log2());
    }
    let monotone = errors.windows(2).all(|w| w[0].2 > w[1].2);
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);

    // grid-resolution check: doubling N at fixed dt and steps should move
    // the shared frequency bins by less than the step error
    let grid_check = {
        let fine_grid = TimeGrid::centered(2 * cfg.grid.n, cfg.grid.dt)?;
        let fine_pumps = build_pumps(cfg, &scn, fine_grid)?;
        let fine = green::propagate_green(
            &scn,
            &resp,
            &fine_pumps,
            &PropagationConfig {
                steps: base_steps,
                raman_iterations: cfg.numerics.raman_iterations,
                suffix_nodes: 0,
            },
        )?;
        let coarse = &greens[0].1;
        let engine_c = FftEngine::new(grid.len());
        let engine_f = FftEngine::new(fine_grid.len());
        let dc = coarse.frequency_diagonal(GreenBlock::IS, &engine_c);
        let df = fine.green.frequency_diagonal(GreenBlock::IS, &engine_f);
        let sup = dc.iter().map(|v| v.norm()).fold(1e-30, f64::max);
        let mut worst = 0.0f64;
        for k in 0..grid.len() {
            let fine_bin = if k < grid.len() / 2 {
                2 * k
            } else {
                2 * k + fine_grid.len() - 2 * grid.len()
            };
            worst = worst.max((dc[k] - df[fine_bin]).norm() / sup);
        }
        Some(worst)
    };

    // a single Raman iteration degrades the order toward 1 when the delayed
    // response carries weight
    let single_iteration_order = if scn.f_r > 0.0 {
        let a = run(base_steps, 1)?;
        let b = run(base_steps * 2, 1)?;
        let c = run(base_steps * 4, 1)?;
        let e1 = block_diff(&a, &b);
        let e2 = block_diff(&b, &c);
        Some((e1 / e2).log2())
    } else {
        None
    };

    let pass = min_order >= 1.8 && monotone;
    sink.write_file("convergence.csv", "convergence", |w| {
        writeln!(w, "steps,h (m),error,fitted_order")?;
        for (j, (steps, h, e)) in errors.iter().enumerate() {
            let order = if j < orders.len() {
                fmt(orders[j])
            } else {
                String::new()
            };
            writeln!(w, "{},{},{},{}", steps, fmt(*h), fmt(*e), order)?;
        }
        Ok(())
    })?;
    sink.record_metric("min_fitted_order", min_order);
    sink.record_metric("monotone", if monotone { 1.0 } else { 0.0 });
    if let Some(g) = grid_check {
        sink.record_metric("grid_doubling_deviation", g);
        if let Some((_, _, e)) = errors.last() {
            sink.record_metric("grid_check_vs_step_error", g / e);
        }
    }
    if let Some(o) = single_iteration_order {
        sink.record_metric("single_iteration_order", o);
    }
    sink.record_metric("pass", if pass { 1.0 } else { 0.0 });
    sink.record_setting("base_steps", base_steps);
    sink.record_setting("levels", levels);
    if !monotone {
        sink.notes.push("non-monotone convergence".into());
    }

    let report = ConvergenceReport {
        errors,
        orders,
        min_order,
        monotone,
        grid_check,
        single_iteration_order,
        pass,
    };
    let dir = sink.finalize()?;
    Ok((dir, report))
}
