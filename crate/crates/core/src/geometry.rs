//! Berry, Wilczek-Zee and Uhlmann connections and curvatures.
//!
//! Everything is assembled from projectors and matrix elements of `dH` in the
//! instantaneous eigenbasis, using `<i|d k> = <i|dH|k> / (E_k - E_i)` for
//! `E_i != E_k`. No eigenvector is ever differentiated across points, so no
//! phase alignment is needed.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, psd_sqrt, ComplexMatrix, SpectralDecomposition, DEFAULT_DEGENERACY_TOL, ZERO};
use crate::models::{cluster_energies, thermal_state_with_tol, Beta, Hamiltonian, ParamPoint, ThermalState};

/// Default central-difference step for derivatives of the connection field.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Smallest gap accepted between a band or cluster and the rest.
pub const MIN_GAP: f64 = 1e-8;

/// Pairs whose weights sum below this are skipped by the square-root route.
pub const VANISHING_WEIGHT: f64 = 1e-300;

/// Matrix-valued one-form at a point: `A = sum_mu A_mu dx^mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionField {
    pub components: Vec<ComplexMatrix>,
}

impl ConnectionField {
    pub fn n_dirs(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn component(&self, mu: usize) -> &ComplexMatrix {
        &self.components[mu]
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(|a| a.max_abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn anti_hermiticity_error(&self) -> f64 {
        self.components.iter().map(|a| a.anti_hermiticity_error()).fold(0.0, f64::max)
    }
}

/// Two-form components `F_{mu nu}` for `mu < nu`, stored in lexicographic
/// pair order.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureComponents {
    n_dirs: usize,
    pairs: Vec<ComplexMatrix>,
}

impl CurvatureComponents {
    pub fn from_fn(n_dirs: usize, mut f: impl FnMut(usize, usize) -> ComplexMatrix) -> Self {
        let mut pairs = Vec::with_capacity(n_dirs * (n_dirs - 1) / 2);
        for mu in 0..n_dirs {
            for nu in mu + 1..n_dirs {
                pairs.push(f(mu, nu));
            }
        }
        Self { n_dirs, pairs }
    }

    /// Scalar two-form with `1 x 1` components.
    pub fn scalar(n_dirs: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self::from_fn(n_dirs, |mu, nu| ComplexMatrix::from_fn(1, |_, _| f(mu, nu)))
    }

    pub fn n_dirs(&self) -> usize {
        self.n_dirs
    }

    pub fn dim(&self) -> usize {
        self.pairs[0].dim()
    }

    fn index(&self, mu: usize, nu: usize) -> usize {
        debug_assert!(mu < nu && nu < self.n_dirs);
        mu * (2 * self.n_dirs - mu - 1) / 2 + (nu - mu - 1)
    }

    /// `F_{mu nu}` for `mu < nu`.
    pub fn component(&self, mu: usize, nu: usize) -> &ComplexMatrix {
        &self.pairs[self.index(mu, nu)]
    }

    /// `F_{mu nu}` for any ordered pair, using antisymmetry.
    pub fn get(&self, mu: usize, nu: usize) -> ComplexMatrix {
        match mu.cmp(&nu) {
            std::cmp::Ordering::Less => self.component(mu, nu).clone(),
            std::cmp::Ordering::Greater => -self.component(nu, mu),
            std::cmp::Ordering::Equal => ComplexMatrix::zeros(self.dim()),
        }
    }

    /// Value of a scalar two-form.
    pub fn value(&self, mu: usize, nu: usize) -> Complex64 {
        let s = if mu < nu { 1.0 } else { -1.0 };
        let (a, b) = if mu < nu { (mu, nu) } else { (nu, mu) };
        self.component(a, b)[(0, 0)] * s
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), &ComplexMatrix)> {
        let n = self.n_dirs;
        (0..n)
            .flat_map(move |mu| (mu + 1..n).map(move |nu| (mu, nu)))
            .zip(self.pairs.iter())
    }

    pub fn max_abs(&self) -> f64 {
        self.pairs.iter().map(|f| f.max_abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.pairs
            .iter()
            .zip(&other.pairs)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn anti_hermiticity_error(&self) -> f64 {
        self.pairs.iter().map(|f| f.anti_hermiticity_error()).fold(0.0, f64::max)
    }

    /// Largest `|Tr F_{mu nu}|`.
    pub fn max_trace(&self) -> f64 {
        self.pairs.iter().map(|f| f.trace().norm()).fold(0.0, f64::max)
    }

    /// Scalar two-form `Tr(w F_{mu nu})`.
    pub fn weighted_trace(&self, w: &ComplexMatrix) -> Self {
        Self {
            n_dirs: self.n_dirs,
            pairs: self
                .pairs
                .iter()
                .map(|f| ComplexMatrix::from_fn(1, |_, _| w.trace_of_product(f)))
                .collect(),
        }
    }

    /// Conjugation `U^dagger F U` of every component by an isometry given as
    /// its column block, yielding `k x k` components.
    fn compress(&self, v: &ComplexMatrix, cols: &[usize]) -> Self {
        let n = v.dim();
        let k = cols.len();
        let block = v.column_block(cols);
        let pairs = self
            .pairs
            .iter()
            .map(|f| {
                ComplexMatrix::from_fn(k, |a, b| {
                    let mut acc = ZERO;
                    for i in 0..n {
                        let mut row = ZERO;
                        for j in 0..n {
                            row += f[(i, j)] * block[j * k + b];
                        }
                        acc += block[i * k + a].conj() * row;
                    }
                    acc
                })
            })
            .collect();
        Self {
            n_dirs: self.n_dirs,
            pairs,
        }
    }
}

/// Eigen-data of `H` and the matrix elements `V^dagger dH_mu V` at one point.
#[derive(Clone, Debug)]
pub struct PointFrame {
    pub spectrum: SpectralDecomposition,
    /// Cluster-averaged energies.
    pub energies: Vec<f64>,
    /// Cluster index of every eigenvector.
    pub labels: Vec<usize>,
    /// Gradient matrix elements in the eigenbasis, one per direction.
    pub elements: Vec<ComplexMatrix>,
}

impl PointFrame {
    pub fn new<M: Hamiltonian + ?Sized>(model: &M, p: &ParamPoint, degeneracy_tol: f64) -> Result<Self> {
        let (h, grads) = model.hamiltonian_and_gradients(p)?;
        let spectrum = hermitian_eig(&h, degeneracy_tol)?;
        Ok(Self::from_parts(spectrum, &grads))
    }

    pub fn from_parts(spectrum: SpectralDecomposition, grads: &[ComplexMatrix]) -> Self {
        let energies = cluster_energies(&spectrum);
        let labels = spectrum.group_labels();
        let elements = grads.iter().map(|g| spectrum.to_eigenbasis(g)).collect();
        Self {
            spectrum,
            energies,
            labels,
            elements,
        }
    }

    pub fn n_dirs(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn thermal_state(&self, beta: Beta) -> ThermalState {
        ThermalState::from_spectrum(self.spectrum.clone(), beta)
    }

    /// Uhlmann connection at inverse temperature `beta`.
    pub fn uhlmann_connection(&self, beta: Beta) -> ConnectionField {
        let n = self.dim();
        let mut coeff = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if self.labels[i] != self.labels[j] {
                    let de = self.energies[j] - self.energies[i];
                    coeff[i * n + j] = -pair_coefficient_from_gap(beta, de.abs()) / de;
                }
            }
        }
        let components = self
            .elements
            .iter()
            .map(|g| {
                let tilde = ComplexMatrix::from_fn(n, |i, j| g[(i, j)] * coeff[i * n + j]);
                self.spectrum.from_eigenbasis(&tilde)
            })
            .collect();
        ConnectionField { components }
    }

    /// `Tr(rho F_U)` from the closed spectral formula.
    pub fn thermal_trace(&self, beta: Beta) -> CurvatureComponents {
        let weights = self.thermal_state_weights(beta);
        let n = self.dim();
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            if weights[i] == 0.0 {
                continue;
            }
            for k in 0..n {
                if self.labels[i] != self.labels[k] {
                    let de = self.energies[k] - self.energies[i];
                    w[i * n + k] = weights[i] * thermal_factor(beta, de.abs()) / (de * de);
                }
            }
        }
        CurvatureComponents::scalar(self.n_dirs(), |mu, nu| {
            let (gm, gn) = (&self.elements[mu], &self.elements[nu]);
            let mut acc = 0.0;
            for i in 0..n {
                for k in 0..n {
                    let wik = w[i * n + k];
                    if wik != 0.0 {
                        acc += wik * (gm[(i, k)] * gn[(i, k)].conj()).im;
                    }
                }
            }
            Complex64::new(0.0, 2.0 * acc)
        })
    }

    fn thermal_state_weights(&self, beta: Beta) -> Vec<f64> {
        let n = self.dim();
        let mut weights = vec![0.0; n];
        match beta {
            Beta::Infinite => {
                let g = &self.spectrum.groups[0];
                for i in g.clone() {
                    weights[i] = 1.0 / g.len() as f64;
                }
            }
            Beta::Finite(b) => {
                let e0 = self.energies[0];
                for (w, &e) in weights.iter_mut().zip(&self.energies) {
                    *w = (-b * (e - e0)).exp();
                }
                let z: f64 = weights.iter().sum();
                for w in &mut weights {
                    *w /= z;
                }
            }
        }
        weights
    }

    /// Curvature of the cluster `group` by the sum over the other states.
    fn cluster_curvature(&self, group: &Range<usize>) -> CurvatureComponents {
        let d = group.len();
        let eg = self.energies[group.start];
        let outside: Vec<usize> = (0..self.dim()).filter(|k| !group.contains(k)).collect();
        CurvatureComponents::from_fn(self.n_dirs(), |mu, nu| {
            let (gm, gn) = (&self.elements[mu], &self.elements[nu]);
            ComplexMatrix::from_fn(d, |a, b| {
                let (a, b) = (group.start + a, group.start + b);
                let mut acc = ZERO;
                for &k in &outside {
                    let de = eg - self.energies[k];
                    acc += (gm[(a, k)] * gn[(k, b)] - gn[(a, k)] * gm[(k, b)]) / (de * de);
                }
                acc
            })
        })
    }

    fn cluster_gap(&self, group: &Range<usize>) -> f64 {
        let ev = &self.spectrum.eigenvalues;
        let mut gap = f64::INFINITY;
        if group.start > 0 {
            gap = gap.min(ev[group.start] - ev[group.start - 1]);
        }
        if group.end < ev.len() {
            gap = gap.min(ev[group.end] - ev[group.end - 1]);
        }
        gap
    }
}

/// `C_ij = (sqrt(l_i) - sqrt(l_j))^2 / (l_i + l_j)`; zero when both vanish.
pub fn pair_coefficient(li: f64, lj: f64) -> f64 {
    let s = li + lj;
    if s == 0.0 {
        return 0.0;
    }
    let d = li.sqrt() - lj.sqrt();
    d * d / s
}

/// `C = 1 - sech(beta gap / 2)` written as `(1 - sqrt r)^2 / (1 + r)` with
/// `r = exp(-beta gap)`, the weight ratio of the two levels.
pub fn pair_coefficient_from_gap(beta: Beta, gap: f64) -> f64 {
    match beta {
        Beta::Infinite => 1.0,
        Beta::Finite(b) => {
            let r = (-b * gap).exp();
            let d = 1.0 - r.sqrt();
            d * d / (1.0 + r)
        }
    }
}

/// `tanh^2(beta gap / 2)`, the factor `1 - 4 l_i l_k / (l_i + l_k)^2`.
fn thermal_factor(beta: Beta, gap: f64) -> f64 {
    match beta {
        Beta::Infinite => 1.0,
        Beta::Finite(b) => {
            let r = (-b * gap).exp();
            let t = (1.0 - r) / (1.0 + r);
            t * t
        }
    }
}

/// Berry curvature of a non-degenerate band.
pub fn berry_curvature<M: Hamiltonian + ?Sized>(model: &M, p: &ParamPoint, band: usize) -> Result<CurvatureComponents> {
    let frame = PointFrame::new(model, p, DEFAULT_DEGENERACY_TOL)?;
    berry_curvature_from(&frame, band)
}

pub fn berry_curvature_from(frame: &PointFrame, band: usize) -> Result<CurvatureComponents> {
    if band >= frame.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            actual: band,
        });
    }
    let gap = frame.cluster_gap(&(band..band + 1));
    if gap <= MIN_GAP {
        return Err(Error::DegenerateBand { band, gap });
    }
    let n = frame.dim();
    let e = frame.spectrum.eigenvalues[band];
    Ok(CurvatureComponents::scalar(frame.n_dirs(), |mu, nu| {
        let (gm, gn) = (&frame.elements[mu], &frame.elements[nu]);
        let mut acc = 0.0;
        for k in (0..n).filter(|&k| k != band) {
            let de = frame.spectrum.eigenvalues[k] - e;
            acc += (gm[(band, k)] * gn[(band, k)].conj()).im / (de * de);
        }
        Complex64::new(0.0, 2.0 * acc)
    }))
}

/// Non-abelian curvature of a degenerate cluster in the basis of its
/// eigenvectors.
pub fn wz_curvature<M: Hamiltonian + ?Sized>(model: &M, p: &ParamPoint, group: &[usize]) -> Result<CurvatureComponents> {
    let frame = PointFrame::new(model, p, DEFAULT_DEGENERACY_TOL)?;
    wz_curvature_from(&frame, group)
}

pub fn wz_curvature_from(frame: &PointFrame, group: &[usize]) -> Result<CurvatureComponents> {
    let range = maximal_cluster(frame, group)?;
    Ok(frame.cluster_curvature(&range))
}

fn maximal_cluster(frame: &PointFrame, group: &[usize]) -> Result<Range<usize>> {
    let fail = || Error::NotMaximalCluster {
        indices: group.to_vec(),
    };
    let first = *group.first().ok_or_else(fail)?;
    if first >= frame.dim() {
        return Err(fail());
    }
    let range = frame.spectrum.groups[frame.labels[first]].clone();
    if range.len() != group.len() || !range.clone().zip(group).all(|(a, &b)| a == b) {
        return Err(fail());
    }
    Ok(range)
}

/// Zero-temperature Uhlmann curvature `dP ^ dP` of a cluster projector.
#[derive(Clone, Debug)]
pub struct ProjectorCurvature {
    /// Full `N x N` components.
    pub full: CurvatureComponents,
    /// `<psi_a| F |psi_b>` for `a, b` in the cluster.
    pub projected: CurvatureComponents,
}

/// `F = dP dP - dP dP` (antisymmetrized) for the projector onto `group`, with
/// `dP` from first-order perturbation theory.
pub fn projector_limit_curvature<M: Hamiltonian + ?Sized>(
    model: &M,
    p: &ParamPoint,
    group: &[usize],
) -> Result<ProjectorCurvature> {
    let frame = PointFrame::new(model, p, DEFAULT_DEGENERACY_TOL)?;
    projector_limit_curvature_from(&frame, group)
}

pub fn projector_limit_curvature_from(frame: &PointFrame, group: &[usize]) -> Result<ProjectorCurvature> {
    let range = maximal_cluster(frame, group)?;
    let gap = frame.cluster_gap(&range);
    if gap <= MIN_GAP {
        return Err(Error::GapClosed { gap });
    }
    let n = frame.dim();
    let v = &frame.spectrum.eigenvectors;
    let eg = frame.energies[range.start];
    // dP = sum_{a in G, k not in G} (|k><k|dH|a><a| + h.c.) / (E_G - E_k)
    let dp: Vec<ComplexMatrix> = frame
        .elements
        .iter()
        .map(|g| {
            let mut out = ComplexMatrix::zeros(n);
            for a in range.clone() {
                for k in (0..n).filter(|k| !range.contains(k)) {
                    let c = g[(k, a)] / (eg - frame.energies[k]);
                    for i in 0..n {
                        let vik = v[(i, k)] * c;
                        for j in 0..n {
                            let t = vik * v[(j, a)].conj();
                            out[(i, j)] += t;
                            out[(j, i)] += t.conj();
                        }
                    }
                }
            }
            out
        })
        .collect();
    let full = CurvatureComponents::from_fn(frame.n_dirs(), |mu, nu| dp[mu].commutator(&dp[nu]));
    let cols: Vec<usize> = range.collect();
    let projected = full.compress(v, &cols);
    Ok(ProjectorCurvature { full, projected })
}

/// Uhlmann connection from the spectral formula
/// `A = -sum_{i != j} C_ij |i><i|d|j><j|`.
pub fn uhlmann_connection_spectral(state: &ThermalState, grads: &[ComplexMatrix]) -> ConnectionField {
    let frame = PointFrame::from_parts(state.spectrum.clone(), grads);
    frame.uhlmann_connection(state.beta)
}

/// `Tr(rho F_U)` from the spectral formula.
pub fn thermal_trace_spectral(state: &ThermalState, grads: &[ComplexMatrix]) -> CurvatureComponents {
    let frame = PointFrame::from_parts(state.spectrum.clone(), grads);
    frame.thermal_trace(state.beta)
}

/// Connection from the square-root route and the number of eigenvector
/// pairs skipped because both weights vanish.
#[derive(Clone, Debug)]
pub struct SqrtRouteConnection {
    pub field: ConnectionField,
    pub dropped_pairs: usize,
}

fn check_step<M: Hamiltonian + ?Sized>(model: &M, h: f64) -> Result<()> {
    let limit = model.manifold().coordinate_scale() / 10.0;
    if h > 0.0 && h < limit {
        Ok(())
    } else {
        Err(Error::StepTooLarge { step: h, limit })
    }
}

/// `A_mu = -sum_{n,m} P_n [d_mu sqrt(rho), sqrt(rho)] P_m / (l_n + l_m)` with
/// `d_mu sqrt(rho)` from central differences of the matrix square root.
pub fn uhlmann_connection_sqrt_fd<M: Hamiltonian + ?Sized>(
    model: &M,
    p: &ParamPoint,
    beta: Beta,
    h: f64,
) -> Result<SqrtRouteConnection> {
    check_step(model, h)?;
    let tol = DEFAULT_DEGENERACY_TOL;
    let state = thermal_state_with_tol(model, p, beta, tol)?;
    let root = psd_sqrt(&state.rho)?;
    let n = state.dim();
    let lam = &state.weights;
    let mut dropped = 0;
    let mut components = Vec::with_capacity(p.coords().len());
    for mu in 0..p.coords().len() {
        let plus = psd_sqrt(&thermal_state_with_tol(model, &p.shifted(mu, h), beta, tol)?.rho)?;
        let minus = psd_sqrt(&thermal_state_with_tol(model, &p.shifted(mu, -h), beta, tol)?.rho)?;
        let droot = (&plus - &minus).scale_real(0.5 / h);
        let x = state.spectrum.to_eigenbasis(&droot.commutator(&root));
        let tilde = ComplexMatrix::from_fn(n, |i, j| {
            let s = lam[i] + lam[j];
            if s < VANISHING_WEIGHT {
                if mu == 0 {
                    dropped += 1;
                }
                ZERO
            } else {
                -x[(i, j)] / s
            }
        });
        components.push(state.spectrum.from_eigenbasis(&tilde));
    }
    Ok(SqrtRouteConnection {
        field: ConnectionField { components },
        dropped_pairs: dropped,
    })
}

/// How the connection field is evaluated inside [`uhlmann_curvature`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConnectionRoute {
    Spectral,
    /// Square-root route with its own inner difference step.
    SqrtFiniteDifference { step: f64 },
}

/// `F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu]`, with the derivatives
/// taken by central differences of step `h`.
pub fn uhlmann_curvature<M: Hamiltonian + ?Sized>(
    model: &M,
    p: &ParamPoint,
    beta: Beta,
    route: ConnectionRoute,
    h: f64,
) -> Result<CurvatureComponents> {
    check_step(model, h)?;
    match route {
        ConnectionRoute::Spectral => Ok(UhlmannStencil::new(model, p, h, DEFAULT_DEGENERACY_TOL)?.curvature(beta).0),
        ConnectionRoute::SqrtFiniteDifference { step } => {
            let conn = |q: &ParamPoint| uhlmann_connection_sqrt_fd(model, q, beta, step).map(|c| c.field);
            let center = conn(p)?;
            let dirs = p.coords().len();
            let mut plus = Vec::with_capacity(dirs);
            let mut minus = Vec::with_capacity(dirs);
            for mu in 0..dirs {
                plus.push(conn(&p.shifted(mu, h))?);
                minus.push(conn(&p.shifted(mu, -h))?);
            }
            Ok(assemble_curvature(&center, &plus, &minus, h))
        }
    }
}

fn assemble_curvature(
    center: &ConnectionField,
    plus: &[ConnectionField],
    minus: &[ConnectionField],
    h: f64,
) -> CurvatureComponents {
    let scale = 0.5 / h;
    CurvatureComponents::from_fn(center.n_dirs(), |mu, nu| {
        let d_mu_nu = &plus[mu].components[nu] - &minus[mu].components[nu];
        let d_nu_mu = &plus[nu].components[mu] - &minus[nu].components[mu];
        let mut f = (&d_mu_nu - &d_nu_mu).scale_real(scale);
        f += &center.components[mu].commutator(&center.components[nu]);
        f
    })
}

/// Frames at a point and at its `+-h` neighbours along every direction; the
/// Uhlmann curvature at any temperature follows without re-diagonalizing.
#[derive(Clone, Debug)]
pub struct UhlmannStencil {
    pub center: PointFrame,
    pub plus: Vec<PointFrame>,
    pub minus: Vec<PointFrame>,
    pub step: f64,
}

impl UhlmannStencil {
    pub fn new<M: Hamiltonian + ?Sized>(model: &M, p: &ParamPoint, h: f64, degeneracy_tol: f64) -> Result<Self> {
        let center = PointFrame::new(model, p, degeneracy_tol)?;
        let dirs = p.coords().len();
        let mut plus = Vec::with_capacity(dirs);
        let mut minus = Vec::with_capacity(dirs);
        for mu in 0..dirs {
            plus.push(PointFrame::new(model, &p.shifted(mu, h), degeneracy_tol)?);
            minus.push(PointFrame::new(model, &p.shifted(mu, -h), degeneracy_tol)?);
        }
        Ok(Self {
            center,
            plus,
            minus,
            step: h,
        })
    }

    /// Curvature and the connection at the center.
    pub fn curvature(&self, beta: Beta) -> (CurvatureComponents, ConnectionField) {
        let center = self.center.uhlmann_connection(beta);
        let plus: Vec<_> = self.plus.iter().map(|f| f.uhlmann_connection(beta)).collect();
        let minus: Vec<_> = self.minus.iter().map(|f| f.uhlmann_connection(beta)).collect();
        (assemble_curvature(&center, &plus, &minus, self.step), center)
    }

    pub fn rho(&self, beta: Beta) -> ComplexMatrix {
        let w = self.center.thermal_state_weights(beta);
        self.center.spectrum.from_eigenbasis(&ComplexMatrix::from_real_diagonal(&w))
    }
}
