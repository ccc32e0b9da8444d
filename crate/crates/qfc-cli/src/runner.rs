//! Single-scenario runs (CW and pulsed) and one-axis parameter sweeps.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use qfc_core::cw::{self, FiberScenario};
use qfc_core::green::{self, PropagationConfig};
use qfc_core::grid::{FftEngine, GreenBlock, SampledField, TimeGrid};
use qfc_core::raman::RamanResponse;
use qfc_core::schmidt;
use qfc_core::stats::{self, SpectralFilter};

use crate::config::{LoadedConfig, Mode, ScenarioConfig};
use crate::outputs::{fmt, OutputSink};
use crate::scenario::*;
use crate::{AppError, AppResult};

pub fn spectral_filter(cfg: &ScenarioConfig) -> SpectralFilter {
    SpectralFilter {
        center: cfg.filter.center,
        width: cfg.filter.width,
    }
}

fn write_field_csv(
    sink: &mut OutputSink,
    name: &str,
    field: &SampledField,
) -> AppResult<()> {
    let grid = field.grid;
    sink.write_file(name, "field", |w| {
        writeln!(w, "t (ps),re (1/sqrt(ps)),im (1/sqrt(ps)),abs2 (1/ps)")?;
        for k in 0..grid.len() {
            let v = field.values[k];
            writeln!(
                w,
                "{},{},{},{}",
                fmt(grid.time(k)),
                fmt(v.re),
                fmt(v.im),
                fmt(v.norm_sqr())
            )?;
        }
        Ok(())
    })
}

fn write_g2_outputs(
    sink: &mut OutputSink,
    corr: &stats::CorrelationResult,
    crop: f64,
) -> AppResult<()> {
    let grid = corr.grid;
    let n = grid.len();
    // keep the exported map manageable: crop to |t| ≤ crop and stride so
    // each axis has at most 512 samples
    let idx: Vec<usize> = (0..n).filter(|&k| grid.time(k).abs() <= crop).collect();
    let stride = idx.len().div_ceil(512).max(1);
    let idx: Vec<usize> = idx.into_iter().step_by(stride).collect();
    sink.write_file("g2_map.csv", "g2", |w| {
        writeln!(w, "t1 (ps),t2 (ps),g2")?;
        for &a in &idx {
            for &b in &idx {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt(grid.time(a)),
                    fmt(grid.time(b)),
                    fmt(corr.g2[[a, b]])
                )?;
            }
        }
        Ok(())
    })?;
    sink.write_file("g2_sections.csv", "g2", |w| {
        writeln!(w, "t (ps),g2_diagonal,g2_antidiagonal,i_out (1/ps)")?;
        let t0 = grid.index_of_zero();
        for k in 0..n {
            let anti = if 2 * t0 >= k && 2 * t0 - k < n {
                corr.g2[[k, 2 * t0 - k]]
            } else {
                0.0
            };
            writeln!(
                w,
                "{},{},{},{}",
                fmt(grid.time(k)),
                fmt(corr.g2[[k, k]]),
                fmt(anti),
                fmt(corr.i_out[k])
            )?;
        }
        Ok(())
    })?;
    sink.write_file("summary.json", "summary", |w| corr.write_summary_json(w))?;
    Ok(())
}

/// Everything the CW pipeline produces for one parameter point.
pub struct CwEvaluation {
    pub scn: FiberScenario,
    pub psi_out: SampledField,
    pub e: Array2<Complex64>,
    pub corr: stats::CorrelationResult,
    pub metrics: BTreeMap<String, f64>,
}

pub fn evaluate_cw(cfg: &ScenarioConfig) -> AppResult<CwEvaluation> {
    let grid = build_grid(cfg)?;
    let scn = build_scenario(cfg)?;
    let response = build_response(cfg, &scn)?;
    let filter = spectral_filter(cfg);
    let tau = input_tau(cfg);
    grid.check_bandwidths(&[
        ("filter half-width", 0.5 * cfg.filter.width),
        ("photon bandwidth", 1.0 / tau),
    ])?;
    let center = cfg.input.center.unwrap_or(0.0);
    let psi_in = gaussian_input(grid, tau, center);
    let psi_out = cw::filtered_psi_out(&scn, &response, &psi_in, &filter)?;
    let e = cw::phonon_expectation_cw(&scn, &response, &filter, grid, cfg.numerics.z_nodes);
    let corr = stats::correlation_result(&psi_out, &e, cfg.detector.window)?;

    let mut metrics = BTreeMap::new();
    metrics.insert("g2_click".into(), corr.g2_click);
    let peak_idx = (0..grid.len())
        .max_by(|&a, &b| {
            psi_out.values[a]
                .norm_sqr()
                .partial_cmp(&psi_out.values[b].norm_sqr())
                .unwrap()
        })
        .unwrap_or(0);
    metrics.insert("g2_at_photon_peak".into(), corr.g2[[peak_idx, peak_idx]]);
    metrics.insert("conversion_probability".into(), psi_out.energy());
    metrics.insert(
        "relative_flux".into(),
        cw::output_flux_relative(&scn, &response, 1.0),
    );
    metrics.insert(
        "noise_flux_term".into(),
        cw::noise_flux_formula(&scn, &response),
    );
    let approx = cw::g2_click_approx(&scn, &response, cfg.detector.window, cfg.filter.width);
    metrics.insert("g2_click_approx".into(), approx.value);
    Ok(CwEvaluation {
        scn,
        psi_out,
        e,
        corr,
        metrics,
    })
}

/// Everything the pulsed pipeline produces for one parameter point.
pub struct PulsedEvaluation {
    pub scn: FiberScenario,
    pub response: RamanResponse,
    pub grid: TimeGrid,
    pub result: green::GreenResult,
    pub decomposition: schmidt::SchmidtDecomposition,
    pub psi_out: SampledField,
    pub e: Option<Array2<Complex64>>,
    pub corr: Option<stats::CorrelationResult>,
    pub metrics: BTreeMap<String, f64>,
}

pub fn evaluate_pulsed(cfg: &ScenarioConfig) -> AppResult<PulsedEvaluation> {
    let grid = build_grid(cfg)?;
    let scn = build_scenario(cfg)?;
    let response = build_response(cfg, &scn)?;
    let filter = spectral_filter(cfg);
    let tau = cfg.pumps.as_ref().map(|p| p.tau_p).unwrap_or(0.1);
    grid.check_bandwidths(&[
        ("filter half-width", 0.5 * cfg.filter.width),
        ("pump bandwidth", 1.0 / tau),
    ])?;
    let pumps = build_pumps(cfg, &scn, grid)?;
    let prop_cfg = PropagationConfig {
        steps: cfg.numerics.steps,
        raman_iterations: cfg.numerics.raman_iterations,
        suffix_nodes: cfg.numerics.suffix_nodes,
    };
    let result = green::propagate_green(&scn, &response, &pumps, &prop_cfg)?;
    let engine = FftEngine::new(grid.len());
    let decomposition = schmidt::decompose(&result.green)?;

    let psi_in = match cfg.input.kind.as_str() {
        "gaussian" => {
            let center = cfg.input.center.unwrap_or_else(|| default_input_center(cfg));
            gaussian_input(grid, input_tau(cfg), center)
        }
        "schmidt" => match cfg.input.source.as_deref() {
            None => schmidt_input(&decomposition, cfg.input.mode_index)?,
            Some(p) if p == std::path::Path::new("self") => {
                schmidt_input(&decomposition, cfg.input.mode_index)?
            }
            Some(p) if p == std::path::Path::new("self-filtered") => {
                let filtered = stats::apply_filter_green(&engine, &result.green, &filter)?;
                let dec = schmidt::decompose(&filtered)?;
                schmidt_input(&dec, cfg.input.mode_index)?
            }
            Some(path) => load_mode_csv(grid, path, cfg.input.mode_index)?,
        },
        "file" => {
            let path = cfg.input.source.as_ref().ok_or_else(|| {
                AppError::Config("input.kind = \"file\" needs input.source".into())
            })?;
            file_input(grid, path)?
        }
        other => return Err(AppError::Config(format!("unknown input kind {other:?}"))),
    };

    let psi_out = stats::psi_out_from_green(&engine, &result.green, &psi_in, Some(&filter))?;

    let mut metrics = BTreeMap::new();
    metrics.insert("conversion_probability".into(), psi_out.energy());
    metrics.insert(
        "lambda1".into(),
        decomposition.coefficients.first().copied().unwrap_or(0.0),
    );
    metrics.insert(
        "lambda2".into(),
        decomposition.coefficients.get(1).copied().unwrap_or(0.0),
    );
    // causality: cross-Green mass outside the group-delay band
    let t_lo = (scn.beta1_i * scn.length).min(scn.beta1_s * scn.length);
    let t_hi = (scn.beta1_i * scn.length).max(scn.beta1_s * scn.length);
    let pad = 4.0 * tau;
    metrics.insert(
        "cross_mass_outside_causality".into(),
        result
            .green
            .mass_outside_band(GreenBlock::IS, t_lo - pad, t_hi + pad),
    );

    let (e, corr) = if cfg.numerics.suffix_nodes > 0 {
        let e = stats::pulsed_phonon_expectation(
            &result.suffix,
            &response,
            scn.temperature,
            &filter,
        )?;
        let corr = stats::correlation_result(&psi_out, &e, cfg.detector.window)?;
        metrics.insert("g2_click".into(), corr.g2_click);
        (Some(e), Some(corr))
    } else {
        (None, None)
    };

    if cfg.numerics.unitarity_check {
        let svs = schmidt::stacked_singular_values(&result.green)?;
        metrics.insert("max_singular_value".into(), svs.first().copied().unwrap_or(0.0));
        metrics.insert("min_singular_value".into(), svs.last().copied().unwrap_or(0.0));
    }

    Ok(PulsedEvaluation {
        scn,
        response,
        grid,
        result,
        decomposition,
        psi_out,
        e,
        corr,
        metrics,
    })
}

/// Read an input Schmidt mode (conjugated u_n) from a modes CSV written by a
/// previous run.
pub fn load_mode_csv(
    grid: TimeGrid,
    path: &std::path::Path,
    index: usize,
) -> AppResult<SampledField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| AppError::Config(format!("{} is empty", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    let re_name = format!("re_u{index}");
    let im_name = format!("im_u{index}");
    let re_col = cols.iter().position(|c| *c == re_name);
    let im_col = cols.iter().position(|c| *c == im_name);
    let (re_col, im_col) = match (re_col, im_col) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(AppError::Config(format!(
                "{} has no columns {re_name}/{im_name}",
                path.display()
            )))
        }
    };
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| -> AppResult<f64> {
            s.trim()
                .parse()
                .map_err(|e| AppError::Config(format!("{} row {}: {e}", path.display(), i + 2)))
        };
        values.push(Complex64::new(parse(fields[re_col])?, parse(fields[im_col])?));
    }
    if values.len() != grid.len() {
        return Err(AppError::Config(format!(
            "{} holds {} samples, grid needs {}",
            path.display(),
            values.len(),
            grid.len()
        )));
    }
    // the state to feed is the conjugated kernel mode, unit-normalized
    let mut field = SampledField::new(
        grid,
        qfc_core::grid::FieldDomain::Time,
        values.into_iter().map(|v| v.conj()).collect::<Vec<_>>().into(),
    );
    let norm = field.energy().sqrt();
    if norm > 0.0 {
        field.values.mapv_inplace(|v| v / norm);
    }
    Ok(field)
}

fn apply_sweep_value(cfg: &mut ScenarioConfig, parameter: &str, value: f64) {
    match parameter {
        "pump_power" => cfg.fiber.pump_power = value,
        "length" => cfg.fiber.length = value,
        "temperature" => cfg.fiber.temperature = value,
        "detuning_thz" => cfg.fiber.detuning_thz = value,
        "window" => cfg.detector.window = value,
        _ => unreachable!("validated"),
    }
}

fn run_single(cfg: &ScenarioConfig, sink: &mut OutputSink) -> AppResult<()> {
    match cfg.mode {
        Mode::Cw => {
            let eval = evaluate_cw(cfg)?;
            write_field_csv(sink, "psi_out.csv", &eval.psi_out)?;
            let crop = 12.0 * input_tau(cfg);
            write_g2_outputs(sink, &eval.corr, crop)?;
            for (k, v) in &eval.metrics {
                sink.record_metric(k, *v);
            }
            sink.record_setting("mode", "cw");
            sink.record_setting("z_nodes", cfg.numerics.z_nodes);
        }
        Mode::Pulsed => {
            let eval = evaluate_pulsed(cfg)?;
            write_field_csv(sink, "psi_out.csv", &eval.psi_out)?;
            sink.write_file("schmidt_coefficients.csv", "schmidt", |w| {
                eval.decomposition.write_coefficients_csv(w, 16)
            })?;
            sink.write_file("schmidt_modes.csv", "schmidt", |w| {
                eval.decomposition.write_modes_csv(w, 4)
            })?;
            if let Some(corr) = &eval.corr {
                let crop = 0.75 * eval.grid.span() / 2.0;
                write_g2_outputs(sink, corr, crop)?;
            }
            if cfg.numerics.dump_green {
                let green = &eval.result.green;
                let hash = [0u8; 32];
                sink.write_file("green.bin", "green-dump", |w| {
                    green::write_green_dump(w, green, &hash)
                })?;
            }
            if cfg.numerics.dump_pumps {
                let snaps: Vec<_> = eval
                    .result
                    .suffix
                    .iter()
                    .map(|n| (n.z, n.pump_p.clone(), n.pump_q.clone()))
                    .collect();
                let grid = eval.grid;
                sink.write_file("pumps.bin", "pump-dump", |w| {
                    qfc_core::pump::write_snapshots(w, grid, &snaps)
                })?;
            }
            for (k, v) in &eval.metrics {
                sink.record_metric(k, *v);
            }
            sink.record_setting("mode", "pulsed");
            sink.record_setting("steps", eval.result.steps);
            sink.record_setting("raman_iterations", cfg.numerics.raman_iterations);
            sink.record_setting("suffix_nodes", cfg.numerics.suffix_nodes);
        }
        Mode::Study => unreachable!("studies dispatched earlier"),
    }
    sink.record_setting("grid_n", cfg.grid.n);
    sink.record_setting("grid_dt_ps", cfg.grid.dt);
    Ok(())
}

fn run_sweep(cfg: &ScenarioConfig, sink: &mut OutputSink) -> AppResult<()> {
    let sweep = cfg.sweep.as_ref().expect("caller checked");
    let values: Vec<f64> = (0..sweep.count)
        .map(|i| {
            if sweep.count == 1 {
                sweep.start
            } else {
                sweep.start
                    + (sweep.stop - sweep.start) * i as f64 / (sweep.count - 1) as f64
            }
        })
        .collect();
    let rows: Vec<AppResult<(f64, BTreeMap<String, f64>)>> = values
        .par_iter()
        .map(|&v| {
            let mut point = cfg.clone();
            point.sweep = None;
            apply_sweep_value(&mut point, &sweep.parameter, v);
            let metrics = match point.mode {
                Mode::Cw => evaluate_cw(&point)?.metrics,
                Mode::Pulsed => evaluate_pulsed(&point)?.metrics,
                Mode::Study => return Err(AppError::Config("study cannot be swept".into())),
            };
            Ok((v, metrics))
        })
        .collect();
    let mut collected = Vec::with_capacity(rows.len());
    for row in rows {
        collected.push(row?);
    }
    let mut keys: Vec<String> = Vec::new();
    for (_, m) in &collected {
        for k in m.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys.sort();
    let param = sweep.parameter.clone();
    sink.write_file("sweep.csv", "sweep", |w| {
        write!(w, "{param}")?;
        for k in &keys {
            write!(w, ",{k}")?;
        }
        writeln!(w)?;
        for (v, m) in &collected {
            write!(w, "{}", fmt(*v))?;
            for k in &keys {
                write!(w, ",{}", m.get(k).map(|x| fmt(*x)).unwrap_or_default())?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    sink.record_setting("sweep_parameter", &param);
    sink.record_setting("sweep_points", sweep.count);
    Ok(())
}

/// Entry point for `qfc run`.
pub fn run(loaded: &LoadedConfig) -> AppResult<PathBuf> {
    let cfg = &loaded.config;
    let mut sink = OutputSink::create(&cfg.output.directory, &loaded.hash_hex)?;
    if cfg.mode == Mode::Study {
        crate::studies::run_study(cfg, &mut sink)?;
    } else if cfg.sweep.is_some() {
        run_sweep(cfg, &mut sink)?;
    } else {
        run_single(cfg, &mut sink)?;
    }
    sink.finalize()
}
