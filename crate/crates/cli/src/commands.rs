//! `sweep`, `map` and `chern` runs. Each writes its artifacts plus a
//! `summary.json` into the output directory.

use std::path::Path;
use std::time::Instant;

use serde_json::{json, Map, Value};
use uhlmann_core::chern::{curvature_map, first_order_diagnostics, temperature_sweep_with};
use uhlmann_core::{
    pure_chern_fhs, second_chern_pure, Beta, ChernOrder, GridSpec, Hamiltonian, Manifold, ModelSpec, SweepResult,
};

use crate::config::{RunConfig, RunKind};
use crate::output::{csv, number, version, write_json, write_text};
use crate::{verify, CliError};

pub const SWEEP_HEADER: [&str; 4] = ["T_over_R0", "n_U", "imag_residual", "route_disagreement"];
pub const CURVATURE_HEADER: [&str; 3] = ["kx", "ky", "Im_Tr_rhoFU"];
pub const BERRY_HEADER: [&str; 3] = ["kx", "ky", "Im_F_B"];

pub fn dispatch(cfg: &RunConfig, out: &Path, workers: usize) -> Result<(), CliError> {
    if cfg.run.kind == RunKind::Verify {
        return verify::run(cfg);
    }
    let started = Instant::now();
    let model = cfg.model.as_ref().expect("validated").build()?;
    let grid = cfg.grid.as_ref().expect("validated").build(&model)?;
    let mut summary = match cfg.run.kind {
        RunKind::Sweep => sweep(cfg, &model, &grid, out)?,
        RunKind::Map => map(cfg, &model, &grid, out)?,
        RunKind::Chern => chern(cfg, &model, &grid, out)?,
        RunKind::Verify => unreachable!(),
    };
    let common = json!({
        "run": cfg.run.kind,
        "version": version(),
        "model": cfg.model,
        "model_id": model.id(),
        "R0": model.energy_unit(),
        "grid": {
            "manifold": model.manifold().name(),
            "resolution": grid.resolution,
        },
        "tolerances": cfg.tolerances,
        "workers": workers,
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    if let Value::Object(c) = common {
        summary.extend(c);
    }
    write_json(out, "summary.json", &Value::Object(summary))
}

fn sweep_maxima(result: &SweepResult) -> Map<String, Value> {
    let max = |f: fn(&uhlmann_core::SweepPoint) -> f64| result.points.iter().map(f).fold(0.0f64, f64::max);
    let mut m = Map::new();
    m.insert("route_disagreement_max".into(), json!(max(|p| p.route_disagreement)));
    m.insert("trace_residual_max".into(), json!(max(|p| p.trace_residual)));
    m.insert("imag_residual_max".into(), json!(max(|p| p.imag_residual)));
    m
}

fn sweep(cfg: &RunConfig, model: &ModelSpec, grid: &GridSpec, out: &Path) -> Result<Map<String, Value>, CliError> {
    let temps = cfg.temperatures()?;
    let order = cfg.order(model);
    let result = temperature_sweep_with(model, &temps, grid, order, &cfg.tolerances.sweep_options())?;
    let rows: Vec<[f64; 4]> = result
        .points
        .iter()
        .map(|p| [p.t_over_r0, p.value, p.imag_residual, p.route_disagreement])
        .collect();
    write_text(out, "sweep.csv", &csv(&SWEEP_HEADER, rows.iter().map(|r| &r[..])))?;
    let mut summary = sweep_maxima(&result);
    summary.insert("order".into(), json!(order.as_u8()));
    summary.insert("points".into(), json!(result.points.len()));
    Ok(summary)
}

fn map(cfg: &RunConfig, model: &ModelSpec, grid: &GridSpec, out: &Path) -> Result<Map<String, Value>, CliError> {
    let t = cfg.temperatures()?[0];
    let beta = Beta::from_temperature(t, model.energy_unit())?;
    let opts = cfg.tolerances.sweep_options();
    let cells = curvature_map(model, beta, grid, opts.degeneracy_tol)?;
    let diagnostics = first_order_diagnostics(model, &[beta], grid, &opts)?[0];
    let coords: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.coords(i)).collect();
    let table = |col: usize| -> Vec<[f64; 3]> { coords.iter().zip(&cells).map(|(k, c)| [k[0], k[1], c[col]]).collect() };
    let curvature = table(0);
    let berry = table(1);
    write_text(out, "curvature.csv", &csv(&CURVATURE_HEADER, curvature.iter().map(|r| &r[..])))?;
    write_text(out, "berry.csv", &csv(&BERRY_HEADER, berry.iter().map(|r| &r[..])))?;
    let max = |f: &dyn Fn(&[f64; 2]) -> f64| cells.iter().map(f).fold(0.0f64, f64::max);
    let mut summary = Map::new();
    summary.insert("T_over_R0".into(), json!(number(t)));
    summary.insert("max_abs_curvature".into(), json!(max(&|c| c[0].abs())));
    summary.insert("max_abs_berry".into(), json!(max(&|c| c[1].abs())));
    summary.insert("max_abs_difference".into(), json!(max(&|c| (c[0] - c[1]).abs())));
    summary.insert("trace_residual_max".into(), json!(diagnostics.0));
    summary.insert("route_disagreement_max".into(), json!(diagnostics.1));
    Ok(summary)
}

fn chern(cfg: &RunConfig, model: &ModelSpec, grid: &GridSpec, out: &Path) -> Result<Map<String, Value>, CliError> {
    let opts = cfg.tolerances.sweep_options();
    let order = cfg.order(model);
    let zero = temperature_sweep_with(model, &[0.0], grid, order, &opts)?;
    let (degeneracy, pure, method) = match (order, model) {
        (ChernOrder::Second, ModelSpec::FourBandGamma(fb)) => {
            (2, json!(second_chern_pure(fb, grid)?.value), "wilczek_zee_integral")
        }
        _ if matches!(model.manifold(), Manifold::ComplexPlane { .. }) => (1, Value::Null, "none"),
        _ => (1, json!(pure_chern_fhs(model, 0..1, grid)?), "plaquette"),
    };
    let temps = cfg.temperatures()?;
    let thermal: Vec<Value> = if temps.is_empty() {
        Vec::new()
    } else {
        temperature_sweep_with(model, &temps, grid, order, &opts)?
            .points
            .iter()
            .map(|p| json!({ "T_over_R0": number(p.t_over_r0), "n_U": p.value }))
            .collect()
    };
    let report = json!({
        "model_id": model.id(),
        "order": order.as_u8(),
        "ground_degeneracy": degeneracy,
        "chern_number": pure,
        "chern_number_method": method,
        "n_U_zero_temperature": zero.points[0].value,
        "thermal": thermal,
    });
    write_json(out, "chern.json", &report)?;
    let mut summary = sweep_maxima(&zero);
    summary.insert("order".into(), json!(order.as_u8()));
    Ok(summary)
}
