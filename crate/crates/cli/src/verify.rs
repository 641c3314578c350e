//! The invariant suite behind `kind = "verify"`.

use std::f64::consts::FRAC_PI_2;

use uhlmann_core::chern::temperature_sweep_with;
use uhlmann_core::geometry::{projector_limit_curvature_from, wz_curvature_from, UhlmannStencil};
use uhlmann_core::linalg::ONE;
use uhlmann_core::models::{clifford_deviation, gamma_matrices};
use uhlmann_core::{
    uhlmann_connection_sqrt_fd, Beta, CoherentOscillator, ComplexMatrix, CurvatureComponents, FourBandGamma, GridSpec,
    Haldane, Hamiltonian, ModelSpec, ParamPoint, TwoLevelSphere, BETA_INF,
};

use crate::config::{Fixture, RunConfig};
use crate::CliError;

/// Points per model used by the pointwise checks.
const SAMPLES: usize = 16;

/// Grid resolution when the run file has no `[grid]`.
const DEFAULT_RESOLUTION: usize = 8;

/// `beta (E_max - E_min)` values probed at each point.
const BETA_SPREADS: [f64; 3] = [0.5, 2.0, 8.0];

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub model: String,
    pub module: &'static str,
    pub invariant: &'static str,
    pub worst: f64,
    pub limit: f64,
}

impl CheckRow {
    pub fn pass(&self) -> bool {
        self.worst <= self.limit
    }
}

struct Rows {
    model: String,
    rows: Vec<CheckRow>,
}

impl Rows {
    fn record(&mut self, module: &'static str, invariant: &'static str, value: f64, limit: f64) {
        // NaN must fail
        let value = if value.is_nan() { f64::INFINITY } else { value };
        match self.rows.iter_mut().find(|r| r.module == module && r.invariant == invariant) {
            Some(r) => r.worst = r.worst.max(value),
            None => self.rows.push(CheckRow {
                model: self.model.clone(),
                module,
                invariant,
                worst: value,
                limit,
            }),
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let rows = checks(cfg)?;
    println!("{:<20} {:<9} {:<40} {:>10} {:>8}  result", "model", "module", "invariant", "worst", "limit");
    for r in &rows {
        println!(
            "{:<20} {:<9} {:<40} {:>10.2e} {:>8.0e}  {}",
            r.model,
            r.module,
            r.invariant,
            r.worst,
            r.limit,
            if r.pass() { "PASS" } else { "FAIL" }
        );
    }
    let mut failed: Vec<String> = Vec::new();
    for r in rows.iter().filter(|r| !r.pass()) {
        let name = format!("{}: {}", r.module, r.invariant);
        if !failed.contains(&name) {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("all {} checks passed", rows.len());
        Ok(())
    } else {
        Err(CliError::Verify(failed))
    }
}

fn default_models() -> Result<Vec<ModelSpec>, CliError> {
    Ok(vec![
        TwoLevelSphere::new(1.0)?.into(),
        Haldane::new(1.0, 0.5, FRAC_PI_2, 0.0)?.into(),
        FourBandGamma::new(1.5)?.into(),
        CoherentOscillator::new(1.0, 16)?.into(),
    ])
}

/// Runs every check and returns one row per (model, invariant).
pub fn checks(cfg: &RunConfig) -> Result<Vec<CheckRow>, CliError> {
    let mut gammas = gamma_matrices();
    if cfg.run.fixture == Some(Fixture::CorruptGamma4) {
        gammas[3][(0, 1)] += ONE.scale(0.1);
        gammas[3][(1, 0)] += ONE.scale(0.1);
    }
    let mut all = Rows {
        model: "-".into(),
        rows: Vec::new(),
    };
    all.record("models", "gamma anticommutation", clifford_deviation(&gammas), 1e-12);
    let mut rows = all.rows;
    let models = match &cfg.model {
        Some(m) => vec![m.build()?],
        None => default_models()?,
    };
    for model in &models {
        let grid = match &cfg.grid {
            Some(g) => g.build(model)?,
            None => GridSpec::uniform(model.manifold(), DEFAULT_RESOLUTION)?,
        };
        rows.extend(model_checks(cfg, model, &grid)?);
    }
    Ok(rows)
}

fn expected_group_sizes(model: &ModelSpec) -> Vec<usize> {
    match model {
        ModelSpec::FourBandGamma(_) => vec![2, 2],
        _ => vec![1; model.dim()],
    }
}

fn fd_gradient(model: &ModelSpec, p: &ParamPoint, mu: usize, h: f64) -> Result<ComplexMatrix, CliError> {
    let plus = model.hamiltonian(&p.shifted(mu, h))?;
    let minus = model.hamiltonian(&p.shifted(mu, -h))?;
    Ok((&plus - &minus).scale_real(0.5 / h))
}

fn relative(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

fn model_checks(cfg: &RunConfig, model: &ModelSpec, grid: &GridSpec) -> Result<Vec<CheckRow>, CliError> {
    let tol = cfg.tolerances.degeneracy_tol;
    let h = cfg.tolerances.fd_step;
    let mut r = Rows {
        model: model.id().into(),
        rows: Vec::new(),
    };
    let expected = expected_group_sizes(model);
    for idx in grid.subsample(SAMPLES) {
        let p = grid.point(idx)?;
        let stencil = UhlmannStencil::new(model, &p, h, tol)?;
        let frame = &stencil.center;
        let spec = &frame.spectrum;
        let hm = model.hamiltonian(&p)?;
        r.record("linalg", "eigendecomposition residual", relative(spec.reconstruct().max_abs_diff(&hm), hm.max_abs()), 1e-10);

        // Grouping is only meaningful where the expected blocks are well separated.
        let ev = &spec.eigenvalues;
        let mut boundary = 0;
        let mut gap = f64::INFINITY;
        for size in &expected[..expected.len() - 1] {
            boundary += size;
            gap = gap.min(ev[boundary] - ev[boundary - 1]);
        }
        if gap > 2.0 * tol {
            let sizes: Vec<usize> = spec.groups.iter().map(|g| g.len()).collect();
            r.record("linalg", "degeneracy grouping", f64::from(u8::from(sizes != expected)), 0.0);
        }

        for mu in 0..model.manifold().dim() {
            let exact = model.gradient(&p, mu)?;
            let fd = fd_gradient(model, &p, mu, 1e-5)?;
            r.record("models", "gradient vs finite differences", relative(exact.max_abs_diff(&fd), exact.max_abs()), 1e-6);
        }

        let spread = ev[ev.len() - 1] - ev[0];
        for u in BETA_SPREADS {
            let beta = Beta::Finite(u / spread);
            let a = frame.uhlmann_connection(beta);
            r.record("geometry", "connection anti-hermiticity", relative(a.anti_hermiticity_error(), a.max_abs()), 1e-12);
            let mut null: f64 = 0.0;
            for c in &a.components {
                let t = spec.to_eigenbasis(c);
                for g in &spec.groups {
                    for i in g.clone() {
                        for j in g.clone() {
                            null = null.max(t[(i, j)].norm());
                        }
                    }
                }
            }
            r.record("geometry", "degeneracy null", relative(null, a.max_abs()), 1e-12);
            let sqrt = uhlmann_connection_sqrt_fd(model, &p, beta, h)?;
            r.record("geometry", "route equivalence (connection)", sqrt.field.max_abs_diff(&a), 1e-6);
            let (f, _) = stencil.curvature(beta);
            let fmax = f.max_abs();
            r.record("geometry", "curvature tracelessness", if fmax > 0.0 { f.max_trace() / fmax } else { 0.0 }, 1e-8);
            let traced = f.weighted_trace(&stencil.rho(beta));
            r.record("geometry", "route equivalence (thermal trace)", traced.max_abs_diff(&frame.thermal_trace(beta)), 1e-5);
        }

        let ground: Vec<usize> = spec.groups[0].clone().collect();
        if ev[ground.len()] - ev[ground.len() - 1] > 1e-3 {
            let wz = wz_curvature_from(frame, &ground)?;
            let d = ground.len() as f64;
            let n = wz.n_dirs();
            let want = CurvatureComponents::scalar(n, |mu, nu| wz.component(mu, nu).trace() / d);
            r.record("geometry", "zero-temperature correspondence", frame.thermal_trace(BETA_INF).max_abs_diff(&want), 1e-9);
            let pl = projector_limit_curvature_from(frame, &ground)?;
            r.record("geometry", "projector limit", pl.projected.max_abs_diff(&wz), 1e-10);
        }
    }

    let opts = cfg.tolerances.sweep_options();
    let order = cfg.order(model);
    let hot = temperature_sweep_with(model, &[f64::INFINITY], grid, order, &opts)?;
    r.record("chern", "high-temperature vanishing", hot.points[0].value.abs(), 1e-10);
    let mut runs = Vec::new();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        runs.push(pool.install(|| temperature_sweep_with(model, &[0.5], grid, order, &opts))?.points[0].value);
    }
    r.record("chern", "deterministic reduction", f64::from(u8::from(runs[0].to_bits() != runs[1].to_bits())), 0.0);
    Ok(r.rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let cfg = RunConfig::from_toml("[run]\nkind = \"verify\"").unwrap();
        let rows = checks(&cfg).unwrap();
        assert!(rows.iter().all(CheckRow::pass), "{rows:#?}");
        assert_eq!(rows.iter().filter(|r| r.invariant == "degeneracy grouping").count(), 4);
    }

    #[test]
    fn corrupt_gamma_fails_by_name() {
        let cfg = RunConfig::from_toml("[run]\nkind = \"verify\"\nfixture = \"corrupt_gamma4\"\n[model]\nkind = \"two_level_sphere\"").unwrap();
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("gamma anticommutation"), "{err}");
    }
}
