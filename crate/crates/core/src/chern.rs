//! Quadrature of curvature fields into (thermal) Chern numbers.
//!
//! Grid points are evaluated in parallel with an order-preserving map and
//! reduced serially by pairwise summation, so every number is independent of
//! the worker count.

use std::f64::consts::PI;
use std::ops::Range;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{berry_curvature_from, wz_curvature_from, CurvatureComponents, PointFrame, UhlmannStencil, DEFAULT_FD_STEP, MIN_GAP};
use crate::linalg::{ComplexMatrix, DEFAULT_DEGENERACY_TOL, ONE, ZERO};
use crate::models::{Beta, FourBandGamma, Hamiltonian, Manifold, ModelSpec, ParamPoint};

/// Smallest resolution accepted along any direction.
pub const MIN_RESOLUTION: usize = 8;

/// Below this per-direction resolution a 4D run logs a warning.
pub const RECOMMENDED_4D_RESOLUTION: usize = 16;

/// Distance from an integer tolerated by the plaquette method.
pub const FHS_THRESHOLD: f64 = 0.05;

/// Largest number of points used for per-point diagnostics.
pub const DIAGNOSTIC_SAMPLES: usize = 256;

/// Midpoint grid over the integration cell of a manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub manifold: Manifold,
    pub resolution: Vec<usize>,
    /// Half-cell shift of the sample points; always on for the sphere.
    pub offset: bool,
}

impl GridSpec {
    pub fn new(manifold: Manifold, resolution: Vec<usize>) -> Result<Self> {
        if resolution.len() != manifold.dim() {
            return Err(Error::DimensionMismatch {
                expected: manifold.dim(),
                actual: resolution.len(),
            });
        }
        if let Some(&n) = resolution.iter().find(|&&n| n < MIN_RESOLUTION) {
            return Err(Error::InvalidGrid(format!("resolution {n} below minimum {MIN_RESOLUTION}")));
        }
        if let Manifold::Torus2 { shear, .. } = manifold {
            if shear != 0.0 && !resolution[1].is_multiple_of(2) {
                return Err(Error::InvalidGrid(format!(
                    "sheared torus needs an even second resolution, got {}",
                    resolution[1]
                )));
            }
        }
        Ok(Self {
            manifold,
            resolution,
            offset: true,
        })
    }

    /// Same resolution along every direction.
    pub fn uniform(manifold: Manifold, n: usize) -> Result<Self> {
        Self::new(manifold, vec![n; manifold.dim()])
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn steps(&self) -> Vec<f64> {
        self.manifold
            .extents()
            .iter()
            .zip(&self.resolution)
            .map(|(&(a, b), &n)| (b - a) / n as f64)
            .collect()
    }

    /// Coordinate measure of one cell.
    pub fn cell_measure(&self) -> f64 {
        self.steps().iter().product()
    }

    /// Coordinates of the `index`-th sample, last direction fastest.
    pub fn coords(&self, index: usize) -> Vec<f64> {
        let ext = self.manifold.extents();
        let steps = self.steps();
        let mut rem = index;
        let mut out = vec![0.0; self.resolution.len()];
        for d in (0..self.resolution.len()).rev() {
            let i = rem % self.resolution[d];
            rem /= self.resolution[d];
            out[d] = ext[d].0 + (i as f64 + 0.5) * steps[d];
        }
        out
    }

    pub fn point(&self, index: usize) -> Result<ParamPoint> {
        ParamPoint::new(self.manifold, self.coords(index))
    }

    /// Evenly spread subset of sample indices, at most `max` of them.
    pub fn subsample(&self, max: usize) -> Vec<usize> {
        let n = self.len();
        if n <= max {
            return (0..n).collect();
        }
        // A stride coprime to the grid avoids sampling a single line.
        let mut stride = n / max;
        while gcd(stride, n) != 1 {
            stride += 1;
        }
        (0..max).map(|k| (k * stride + stride / 2) % n).collect()
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Order-preserving parallel map over `0..n`.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

fn par_try_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    par_map(n, f).into_iter().collect()
}

/// Pairwise (cascade) summation with a fixed split, hence a fixed rounding.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// Column sums of a row-major `rows x cols` table.
fn column_sums(table: &[f64], cols: usize) -> Vec<f64> {
    (0..cols)
        .map(|c| {
            let col: Vec<f64> = table.iter().skip(c).step_by(cols).copied().collect();
            pairwise_sum(&col)
        })
        .collect()
}

/// A real Chern-type number with the size of its discarded imaginary part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernEstimate {
    pub value: f64,
    pub imag_residual: f64,
}

fn check_grid<M: Hamiltonian + ?Sized>(model: &M, grid: &GridSpec, dim: usize) -> Result<()> {
    let m = model.manifold();
    if m.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: m.dim(),
        });
    }
    if !m.accepts(&grid.manifold) {
        return Err(Error::ManifoldMismatch {
            expected: m.name().to_string(),
            actual: grid.manifold.name().to_string(),
        });
    }
    Ok(())
}

/// `(i / 2 pi) Int Tr(rho F_U)` from the per-point integral of the scalar
/// two-form component `F_{01}`.
fn first_order_number<M: Hamiltonian + ?Sized>(model: &M, grid: &GridSpec, integral: Complex64) -> ChernEstimate {
    let n = Complex64::new(0.0, 1.0) * integral / (2.0 * PI) * model.orientation() / grid.manifold.cover();
    ChernEstimate {
        value: n.re,
        imag_residual: n.im.abs(),
    }
}

/// First thermal Uhlmann-Chern number `n_U^(1) = (i / 2 pi) Int Tr(rho F_U)`.
pub fn first_thermal_uc<M: Hamiltonian + ?Sized>(model: &M, beta: Beta, grid: &GridSpec) -> Result<ChernEstimate> {
    check_grid(model, grid, 2)?;
    let w = grid.cell_measure();
    let samples = par_try_map(grid.len(), |i| {
        let frame = PointFrame::new(model, &grid.point(i)?, DEFAULT_DEGENERACY_TOL)?;
        Ok(frame.thermal_trace(beta).value(0, 1) * w)
    })?;
    Ok(first_order_number(model, grid, pairwise_sum_complex(&samples)))
}

/// `Tr(W (F_01 F_23 + F_23 F_01 - F_02 F_13 - F_13 F_02 + F_03 F_12 + F_12 F_03))`,
/// the coefficient of `d^4x` in `Tr(W F ^ F)`.
pub fn wedge_trace(f: &CurvatureComponents, weight: Option<&ComplexMatrix>) -> Complex64 {
    let terms = [((0, 1), (2, 3), 1.0), ((0, 2), (1, 3), -1.0), ((0, 3), (1, 2), 1.0)];
    let mut x = ComplexMatrix::zeros(f.dim());
    for (a, b, s) in terms {
        let fa = f.component(a.0, a.1);
        let fb = f.component(b.0, b.1);
        let sym = &(fa * fb) + &(fb * fa);
        x += &sym.scale_real(s);
    }
    match weight {
        Some(w) => w.trace_of_product(&x),
        None => x.trace(),
    }
}

/// Prefactor turning `Int Tr(W F ^ F)` into a second Chern number.
fn second_order_prefactor<M: Hamiltonian + ?Sized>(model: &M) -> f64 {
    -model.orientation() / (8.0 * PI * PI)
}

/// Closed-form density of the four-band second thermal Uhlmann-Chern number:
/// `(3 / pi^2) (m s1 s2 s3 s4 + sum of triple products) tanh^5(beta R) / R^5`
/// with `s_i = sin 2k_i`.
pub fn four_band_closed_form_density(model: &FourBandGamma, k: &[f64], beta: Beta) -> f64 {
    let s: Vec<f64> = k.iter().map(|x| (2.0 * x).sin()).collect();
    let r = model.r_vector(k);
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let triples = s[0] * s[1] * s[2] + s[0] * s[1] * s[3] + s[0] * s[2] * s[3] + s[1] * s[2] * s[3];
    let numerator = model.m() * s[0] * s[1] * s[2] * s[3] + triples;
    let t = match beta {
        Beta::Infinite => 1.0,
        Beta::Finite(b) => (b * norm).tanh(),
    };
    3.0 / (PI * PI) * numerator * t.powi(5) / norm.powi(5)
}

/// Both evaluations of the second thermal Uhlmann-Chern number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondChernReport {
    /// From the finite-difference Uhlmann curvature and the epsilon contraction.
    pub contraction: ChernEstimate,
    /// From the closed-form integrand.
    pub closed_form: f64,
    /// Largest `|Tr F_{mu nu}| / max |F|` over the grid.
    pub trace_residual: f64,
}

impl SecondChernReport {
    pub fn route_disagreement(&self) -> f64 {
        (self.contraction.value - self.closed_form).abs()
    }
}

/// Second thermal Uhlmann-Chern number
/// `n_U^(2) = -(1 / 8 pi^2) Int Tr(rho F_U ^ F_U)` of the four-band model.
pub fn second_thermal_uc(model: &FourBandGamma, beta: Beta, grid: &GridSpec) -> Result<SecondChernReport> {
    Ok(second_order_sweep(model, &[beta], grid, &SweepOptions::default())?.remove(0))
}

fn second_order_sweep(
    model: &FourBandGamma,
    betas: &[Beta],
    grid: &GridSpec,
    opts: &SweepOptions,
) -> Result<Vec<SecondChernReport>> {
    check_grid(model, grid, 4)?;
    if grid.resolution.iter().any(|&n| n < RECOMMENDED_4D_RESOLUTION) {
        warn!(
            "4D resolution {:?} below the recommended {RECOMMENDED_4D_RESOLUTION} per direction",
            grid.resolution
        );
    }
    let w = grid.cell_measure();
    let nb = betas.len();
    // Per point and temperature: Re, Im of the contraction, closed form, trace residual.
    let rows = par_try_map(grid.len(), |i| {
        let p = grid.point(i)?;
        let stencil = UhlmannStencil::new(model, &p, opts.fd_step, opts.degeneracy_tol)?;
        let mut row = Vec::with_capacity(4 * nb);
        for &beta in betas {
            let (f, _) = stencil.curvature(beta);
            let rho = stencil.rho(beta);
            let wedge = wedge_trace(&f, Some(&rho)) * w;
            let fmax = f.max_abs();
            let residual = if fmax > 0.0 { f.max_trace() / fmax } else { 0.0 };
            row.extend([
                wedge.re,
                wedge.im,
                four_band_closed_form_density(model, p.coords(), beta) * w,
                residual,
            ]);
        }
        Ok(row)
    })?;
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let sums = column_sums(&flat, 4 * nb);
    let pref = second_order_prefactor(model);
    Ok((0..nb)
        .map(|b| {
            let trace_residual = flat.iter().skip(4 * b + 3).step_by(4 * nb).fold(0.0, |a: f64, &x| a.max(x));
            SecondChernReport {
                contraction: ChernEstimate {
                    value: pref * sums[4 * b],
                    imag_residual: (pref * sums[4 * b + 1]).abs(),
                },
                closed_form: sums[4 * b + 2],
                trace_residual,
            }
        })
        .collect())
}

/// Second Chern number of the degenerate ground doublet from its
/// Wilczek-Zee curvature, `-(1 / 8 pi^2) Int tr(F ^ F)`.
pub fn second_chern_pure(model: &FourBandGamma, grid: &GridSpec) -> Result<ChernEstimate> {
    check_grid(model, grid, 4)?;
    let w = grid.cell_measure();
    let samples = par_try_map(grid.len(), |i| {
        let frame = PointFrame::new(model, &grid.point(i)?, DEFAULT_DEGENERACY_TOL)?;
        let ground = frame.spectrum.groups[0].clone();
        let gap = frame.spectrum.eigenvalues[ground.end] - frame.spectrum.eigenvalues[ground.end - 1];
        if gap <= MIN_GAP {
            return Err(Error::GapClosed { gap });
        }
        let indices: Vec<usize> = ground.collect();
        let f = wz_curvature_from(&frame, &indices)?;
        Ok(wedge_trace(&f, None) * w)
    })?;
    let total = pairwise_sum_complex(&samples) * second_order_prefactor(model);
    Ok(ChernEstimate {
        value: total.re,
        imag_residual: total.im.abs(),
    })
}

/// Vertices of the closed lattice used by the plaquette method, including the
/// far edges, which the periodicity of `H` identifies with the near ones.
fn vertex_coords(manifold: &Manifold, resolution: &[usize], i: usize, j: usize) -> Result<Vec<f64>> {
    let (nx, ny) = (resolution[0] as f64, resolution[1] as f64);
    match *manifold {
        Manifold::Torus2 { periods, .. } => Ok(vec![i as f64 * periods[0] / nx, j as f64 * periods[1] / ny]),
        Manifold::Sphere2 { .. } => Ok(vec![i as f64 * PI / nx, j as f64 * 2.0 * PI / ny]),
        _ => Err(Error::InvalidGrid(format!(
            "plaquette method needs a closed two-dimensional manifold, got {}",
            manifold.name()
        ))),
    }
}

fn det(m: &mut [Complex64], d: usize) -> Complex64 {
    let mut acc = ONE;
    for c in 0..d {
        let pivot = (c..d)
            .max_by(|&a, &b| m[a * d + c].norm().total_cmp(&m[b * d + c].norm()))
            .unwrap_or(c);
        if m[pivot * d + c] == ZERO {
            return ZERO;
        }
        if pivot != c {
            for k in 0..d {
                m.swap(pivot * d + k, c * d + k);
            }
            acc = -acc;
        }
        let p = m[c * d + c];
        acc *= p;
        for r in c + 1..d {
            let f = m[r * d + c] / p;
            for k in c..d {
                let t = m[c * d + k];
                m[r * d + k] -= f * t;
            }
        }
    }
    acc
}

/// `det(U^dagger V)` for two `n x d` column blocks stored row-major.
fn link(u: &[Complex64], v: &[Complex64], n: usize, d: usize) -> Complex64 {
    let mut overlap = vec![ZERO; d * d];
    for a in 0..d {
        for b in 0..d {
            let mut acc = ZERO;
            for i in 0..n {
                acc += u[i * d + a].conj() * v[i * d + b];
            }
            overlap[a * d + b] = acc;
        }
    }
    det(&mut overlap, d)
}

/// Integer Chern number of the band cluster `bands` by the lattice
/// field-strength (plaquette) method.
pub fn pure_chern_fhs<M: Hamiltonian + ?Sized>(model: &M, bands: Range<usize>, grid: &GridSpec) -> Result<i64> {
    check_grid(model, grid, 2)?;
    let n = model.dim();
    if bands.is_empty() || bands.end > n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bands.end,
        });
    }
    let d = bands.len();
    let (nx, ny) = (grid.resolution[0], grid.resolution[1]);
    let cols: Vec<usize> = bands.clone().collect();
    let blocks = par_try_map((nx + 1) * (ny + 1), |idx| {
        let (i, j) = (idx / (ny + 1), idx % (ny + 1));
        let p = ParamPoint::new(grid.manifold, vertex_coords(&grid.manifold, &grid.resolution, i, j)?)?;
        let frame = PointFrame::new(model, &p, DEFAULT_DEGENERACY_TOL)?;
        let ev = &frame.spectrum.eigenvalues;
        let mut gap = f64::INFINITY;
        if bands.start > 0 {
            gap = gap.min(ev[bands.start] - ev[bands.start - 1]);
        }
        if bands.end < n {
            gap = gap.min(ev[bands.end] - ev[bands.end - 1]);
        }
        if gap <= MIN_GAP {
            return Err(Error::GapClosed { gap });
        }
        Ok(frame.spectrum.eigenvectors.column_block(&cols))
    })?;
    let at = |i: usize, j: usize| &blocks[i * (ny + 1) + j];
    let phases = par_map(nx * ny, |idx| {
        let (i, j) = (idx / ny, idx % ny);
        let u = link(at(i, j), at(i + 1, j), n, d)
            * link(at(i + 1, j), at(i + 1, j + 1), n, d)
            * link(at(i + 1, j + 1), at(i, j + 1), n, d)
            * link(at(i, j + 1), at(i, j), n, d);
        u.arg()
    });
    let raw = -pairwise_sum(&phases) / (2.0 * PI);
    let value = model.orientation() * raw / grid.manifold.cover();
    let rounded = value.round();
    if (value - rounded).abs() > FHS_THRESHOLD {
        return Err(Error::NonIntegerPlaquetteSum {
            value,
            threshold: FHS_THRESHOLD,
        });
    }
    Ok(rounded as i64)
}

/// Which thermal Uhlmann-Chern number a sweep evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChernOrder {
    First,
    Second,
}

impl ChernOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            ChernOrder::First => 1,
            ChernOrder::Second => 2,
        }
    }
}

/// One temperature of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    /// Temperature in units of the model's `R0`.
    pub t_over_r0: f64,
    pub beta: Beta,
    pub value: f64,
    pub imag_residual: f64,
    /// Largest `|Tr F_U| / max |F_U|` over the diagnostic points.
    pub trace_residual: f64,
    /// Largest disagreement between the two independent evaluations.
    pub route_disagreement: f64,
}

/// Thermal Uhlmann-Chern numbers over a temperature grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub model_id: String,
    pub energy_unit: f64,
    pub order: ChernOrder,
    pub grid: GridSpec,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn temperatures(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t_over_r0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

/// Validates a temperature list in units of `R0` and converts it to inverse
/// temperatures. Zero is exact zero temperature, `+inf` is `beta = 0`.
pub fn temperatures_to_betas(temperatures: &[f64], energy_unit: f64) -> Result<Vec<Beta>> {
    if temperatures.is_empty() {
        return Err(Error::InvalidTemperature("temperatures: empty".into()));
    }
    if temperatures.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::InvalidTemperature(format!(
            "temperatures must be strictly ascending: {temperatures:?}"
        )));
    }
    temperatures
        .iter()
        .map(|&t| Beta::from_temperature(t, energy_unit))
        .collect()
}

/// Numerical knobs of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    /// Eigenvalues closer than this form one cluster.
    pub degeneracy_tol: f64,
    /// Central-difference step for the Uhlmann curvature.
    pub fd_step: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            fd_step: DEFAULT_FD_STEP,
        }
    }
}

/// Thermal Uhlmann-Chern number at every temperature of `temperatures`
/// (units of `R0`), sharing the diagonalizations across temperatures.
pub fn temperature_sweep(
    model: &ModelSpec,
    temperatures: &[f64],
    grid: &GridSpec,
    order: ChernOrder,
) -> Result<SweepResult> {
    temperature_sweep_with(model, temperatures, grid, order, &SweepOptions::default())
}

pub fn temperature_sweep_with(
    model: &ModelSpec,
    temperatures: &[f64],
    grid: &GridSpec,
    order: ChernOrder,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let betas = temperatures_to_betas(temperatures, model.energy_unit())?;
    if let ModelSpec::CoherentOscillator(c) = model {
        if let Some(beta) = betas.iter().find(|&&b| c.tail_weight(b) >= 1e-12) {
            warn!(
                "thermal weight beyond level {} is {:e} at beta = {beta}; truncation may matter",
                c.fock_dim() / 2,
                c.tail_weight(*beta)
            );
        }
    }
    let points = match order {
        ChernOrder::First => first_order_sweep(model, &betas, grid, opts)?,
        ChernOrder::Second => {
            let ModelSpec::FourBandGamma(fb) = model else {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    actual: model.manifold().dim(),
                });
            };
            second_order_sweep(fb, &betas, grid, opts)?
                .into_iter()
                .map(|r| (r.contraction.value, r.contraction.imag_residual, r.trace_residual, r.route_disagreement()))
                .collect()
        }
    };
    Ok(SweepResult {
        model_id: model.id().to_string(),
        energy_unit: model.energy_unit(),
        order,
        grid: grid.clone(),
        points: temperatures
            .iter()
            .zip(&betas)
            .zip(points)
            .map(|((&t, &beta), (value, imag, trace, route))| SweepPoint {
                t_over_r0: t,
                beta,
                value,
                imag_residual: imag,
                trace_residual: trace,
                route_disagreement: route,
            })
            .collect(),
    })
}

type SweepRow = (f64, f64, f64, f64);

fn first_order_sweep<M: Hamiltonian + ?Sized>(
    model: &M,
    betas: &[Beta],
    grid: &GridSpec,
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    check_grid(model, grid, 2)?;
    let w = grid.cell_measure();
    let nb = betas.len();
    let rows = par_try_map(grid.len(), |i| {
        let frame = PointFrame::new(model, &grid.point(i)?, opts.degeneracy_tol)?;
        let mut row = Vec::with_capacity(2 * nb);
        for &beta in betas {
            let v = frame.thermal_trace(beta).value(0, 1) * w;
            row.extend([v.re, v.im]);
        }
        Ok(row)
    })?;
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let sums = column_sums(&flat, 2 * nb);
    let diagnostics = first_order_diagnostics(model, betas, grid, opts)?;
    Ok((0..nb)
        .map(|b| {
            let est = first_order_number(model, grid, Complex64::new(sums[2 * b], sums[2 * b + 1]));
            (est.value, est.imag_residual, diagnostics[b].0, diagnostics[b].1)
        })
        .collect())
}

/// Per temperature, over a subsample of the grid: the largest relative trace
/// of the finite-difference Uhlmann curvature, and the largest gap between
/// `Tr(rho F_U)` from that curvature and from the spectral formula.
pub fn first_order_diagnostics<M: Hamiltonian + ?Sized>(
    model: &M,
    betas: &[Beta],
    grid: &GridSpec,
    opts: &SweepOptions,
) -> Result<Vec<(f64, f64)>> {
    let sample = grid.subsample(DIAGNOSTIC_SAMPLES);
    let per_point = par_try_map(sample.len(), |s| {
        let p = grid.point(sample[s])?;
        let stencil = UhlmannStencil::new(model, &p, opts.fd_step, opts.degeneracy_tol)?;
        Ok(betas
            .iter()
            .map(|&beta| {
                let (f, _) = stencil.curvature(beta);
                let fmax = f.max_abs();
                let residual = if fmax > 0.0 { f.max_trace() / fmax } else { 0.0 };
                let fd = f.weighted_trace(&stencil.rho(beta));
                let spectral = stencil.center.thermal_trace(beta);
                (residual, fd.max_abs_diff(&spectral))
            })
            .collect::<Vec<_>>())
    })?;
    Ok((0..betas.len())
        .map(|b| {
            per_point
                .iter()
                .fold((0.0f64, 0.0f64), |acc, row| (acc.0.max(row[b].0), acc.1.max(row[b].1)))
        })
        .collect())
}

/// Per grid point, `Im Tr(rho F_U)_{01}` at `beta` next to the Berry
/// curvature `Im F_01` of the lowest band, both in raw coordinates.
pub fn curvature_map<M: Hamiltonian + ?Sized>(
    model: &M,
    beta: Beta,
    grid: &GridSpec,
    degeneracy_tol: f64,
) -> Result<Vec<[f64; 2]>> {
    check_grid(model, grid, 2)?;
    par_try_map(grid.len(), |i| {
        let frame = PointFrame::new(model, &grid.point(i)?, degeneracy_tol)?;
        let berry = berry_curvature_from(&frame, 0)?;
        Ok([frame.thermal_trace(beta).value(0, 1).im, berry.value(0, 1).im])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CoherentOscillator, Haldane, TwoLevelSphere, BETA_INF};
    use std::f64::consts::FRAC_PI_2;

    fn haldane(m: f64) -> Haldane {
        Haldane::new(1.0, 0.5, FRAC_PI_2, m).unwrap()
    }

    #[test]
    fn grid_validation() {
        let h = haldane(0.0);
        assert!(GridSpec::new(h.manifold(), vec![8, 9]).is_err());
        assert!(GridSpec::new(h.manifold(), vec![4, 8]).is_err());
        assert!(GridSpec::new(h.manifold(), vec![8]).is_err());
        let g = GridSpec::new(h.manifold(), vec![8, 10]).unwrap();
        assert_eq!(g.len(), 80);
        assert!(g.offset);
    }

    #[test]
    fn grid_coordinates_are_midpoints() {
        let g = GridSpec::uniform(Manifold::Torus4 { period: PI }, 8).unwrap();
        let c = g.coords(0);
        assert!(c.iter().all(|&x| (x - PI / 16.0).abs() < 1e-15));
        let last = g.coords(g.len() - 1);
        assert!(last.iter().all(|&x| (x - PI * 15.0 / 16.0).abs() < 1e-15));
        let sub = g.subsample(256);
        assert_eq!(sub.len(), 256);
        let mut uniq = sub.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 256);
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let v: Vec<f64> = (0..1000).map(|k| 0.1 * k as f64).collect();
        assert!((pairwise_sum(&v) - 49950.0).abs() < 1e-9);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn determinant_small_matrices() {
        let mut m = vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(0.0, 1.0), ONE];
        let want = Complex64::new(2.0, 0.0) - Complex64::new(1.0, 1.0) * Complex64::new(0.0, 1.0);
        assert!((det(&mut m, 2) - want).norm() < 1e-14);
    }

    #[test]
    fn sphere_first_number_follows_tanh_cubed() {
        let m = TwoLevelSphere::new(1.0).unwrap();
        let g = GridSpec::uniform(m.manifold(), 64).unwrap();
        let zero = first_thermal_uc(&m, BETA_INF, &g).unwrap();
        assert!((zero.value - 1.0).abs() < 0.005);
        assert!(zero.imag_residual < 1e-10);
        let one = first_thermal_uc(&m, Beta::Finite(1.0), &g).unwrap();
        assert!((one.value / zero.value - 1f64.tanh().powi(3)).abs() < 1e-12);
    }

    #[test]
    fn haldane_first_number_small_grid() {
        let g = GridSpec::uniform(haldane(0.0).manifold(), 60).unwrap();
        let n = first_thermal_uc(&haldane(0.0), BETA_INF, &g).unwrap();
        assert!((n.value - 1.0).abs() < 0.01, "{n:?}");
        let n = first_thermal_uc(&haldane(10.0), BETA_INF, &g).unwrap();
        assert!(n.value.abs() < 0.01);
    }

    #[test]
    fn fhs_examples() {
        let g = GridSpec::uniform(haldane(0.0).manifold(), 24).unwrap();
        assert_eq!(pure_chern_fhs(&haldane(0.0), 0..1, &g).unwrap(), 1);
        assert_eq!(pure_chern_fhs(&haldane(10.0), 0..1, &g).unwrap(), 0);
        assert_eq!(pure_chern_fhs(&haldane(0.0), 1..2, &g).unwrap(), -1);
        let s = TwoLevelSphere::new(1.0).unwrap();
        let gs = GridSpec::uniform(s.manifold(), 16).unwrap();
        assert_eq!(pure_chern_fhs(&s, 0..1, &gs).unwrap(), 1);
    }

    #[test]
    fn fhs_rejects_open_manifold() {
        let c = CoherentOscillator::new(1.0, 16).unwrap();
        let g = GridSpec::uniform(c.manifold(), 8).unwrap();
        assert!(matches!(pure_chern_fhs(&c, 0..1, &g), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn second_order_at_high_temperature_vanishes() {
        let m = FourBandGamma::new(1.5).unwrap();
        let g = GridSpec::uniform(m.manifold(), 8).unwrap();
        let r = second_thermal_uc(&m, Beta::Finite(0.0), &g).unwrap();
        assert!(r.contraction.value.abs() <= 1e-10);
        assert_eq!(r.closed_form, 0.0);
    }

    #[test]
    fn closed_form_matches_contraction_pointwise() {
        let m = FourBandGamma::new(0.8).unwrap();
        for beta in [BETA_INF, Beta::Finite(0.9)] {
            for k in [[0.1, 0.5, 1.9, 2.7], [1.2, 0.3, 0.8, 2.2]] {
                let p = ParamPoint::new(m.manifold(), k.to_vec()).unwrap();
                let st = UhlmannStencil::new(&m, &p, DEFAULT_FD_STEP, DEFAULT_DEGENERACY_TOL).unwrap();
                let (f, _) = st.curvature(beta);
                let c = wedge_trace(&f, Some(&st.rho(beta))) * second_order_prefactor(&m);
                let want = four_band_closed_form_density(&m, &k, beta);
                assert!((c.re - want).abs() < 1e-6 * (1.0 + want.abs()), "{c} vs {want}");
            }
        }
    }

    #[test]
    fn sweep_rejects_empty_and_unsorted() {
        let m: ModelSpec = haldane(0.0).into();
        let g = GridSpec::uniform(m.manifold(), 8).unwrap();
        let err = temperature_sweep(&m, &[], &g, ChernOrder::First).unwrap_err();
        assert!(err.to_string().contains("temperatures: empty"));
        assert!(temperature_sweep(&m, &[1.0, 0.5], &g, ChernOrder::First).is_err());
        assert!(temperature_sweep(&m, &[0.5], &g, ChernOrder::Second).is_err());
    }

    #[test]
    fn sweep_decays_with_temperature() {
        let m: ModelSpec = haldane(0.0).into();
        let g = GridSpec::uniform(m.manifold(), 40).unwrap();
        let r = temperature_sweep(&m, &[0.0, 0.05, 0.5, 5.0, f64::INFINITY], &g, ChernOrder::First).unwrap();
        let v = r.values();
        assert!((v[0] - 1.0).abs() < 0.01);
        assert!((v[1] - v[0]).abs() < 0.02);
        assert!(v[3] < 0.2);
        assert!(v[4].abs() <= 1e-10);
        for p in &r.points {
            assert!(p.trace_residual <= 1e-8);
            assert!(p.route_disagreement <= 1e-5);
        }
    }

    #[test]
    fn curvature_map_limits() {
        let h = Haldane::new(1.0, 0.14, PI / 2.0, -0.2).unwrap();
        let g = GridSpec::uniform(h.manifold(), 16).unwrap();
        let cold = curvature_map(&h, BETA_INF, &g, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(cold.iter().all(|[u, b]| (u - b).abs() <= 1e-9));
        let warm = curvature_map(&h, Beta::from_temperature(1.2, h.energy_unit()).unwrap(), &g, DEFAULT_DEGENERACY_TOL).unwrap();
        let max = |m: &[[f64; 2]]| m.iter().fold(0.0f64, |a, c| a.max(c[0].abs()));
        assert!(max(&warm) < max(&cold));
        let hot = curvature_map(&h, Beta::Finite(0.0), &g, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(hot.iter().all(|c| c[0].abs() <= 1e-12));
    }
}
