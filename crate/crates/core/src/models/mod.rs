//! Parameterized Hamiltonian families and their thermal states.

mod coherent;
mod four_band;
mod haldane;
mod two_level;

use std::f64::consts::PI;
use std::fmt;

pub use coherent::{coherent_displacement, CoherentOscillator, DEFAULT_FOCK_DIM};
pub use four_band::{clifford_deviation, gamma_matrices, FourBandGamma};
pub use haldane::{Haldane, HALDANE_A, HALDANE_B};
pub use two_level::TwoLevelSphere;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, SpectralDecomposition, DEFAULT_DEGENERACY_TOL};

/// Parameter manifold of a model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Manifold {
    /// Polar and azimuthal angle `(theta, phi)` on a sphere of the given radius.
    Sphere2 { radius: f64 },
    /// Two-torus with fundamental cell `[0, periods[0]) x [0, periods[1])`.
    ///
    /// Wrapping the first coordinate by `periods[0]` shifts the second one by
    /// `shear`. `cover` counts how many copies of the minimal Brillouin zone
    /// the cell contains.
    Torus2 {
        periods: [f64; 2],
        shear: f64,
        cover: u32,
    },
    /// Four-torus `[0, period)^4`.
    Torus4 { period: f64 },
    /// Rectangle `re x im` in the complex plane, coordinates `(Re z, Im z)`.
    ComplexPlane { re: (f64, f64), im: (f64, f64) },
}

impl Manifold {
    pub fn dim(&self) -> usize {
        match self {
            Manifold::Torus4 { .. } => 4,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Manifold::Sphere2 { .. } => "Sphere2",
            Manifold::Torus2 { .. } => "Torus2",
            Manifold::Torus4 { .. } => "Torus4",
            Manifold::ComplexPlane { .. } => "ComplexPlane",
        }
    }

    /// Number of minimal zones covered by the integration cell.
    pub fn cover(&self) -> f64 {
        match self {
            Manifold::Torus2 { cover, .. } => f64::from(*cover),
            _ => 1.0,
        }
    }

    /// Smallest coordinate extent; finite-difference steps must stay below a
    /// tenth of it.
    pub fn coordinate_scale(&self) -> f64 {
        match *self {
            Manifold::Sphere2 { .. } => PI,
            Manifold::Torus2 { periods, .. } => periods[0].min(periods[1]),
            Manifold::Torus4 { period } => period,
            Manifold::ComplexPlane { re, im } => (re.1 - re.0).min(im.1 - im.0),
        }
    }

    /// Coordinate ranges of the integration cell.
    pub fn extents(&self) -> Vec<(f64, f64)> {
        match *self {
            Manifold::Sphere2 { .. } => vec![(0.0, PI), (0.0, 2.0 * PI)],
            Manifold::Torus2 { periods, .. } => vec![(0.0, periods[0]), (0.0, periods[1])],
            Manifold::Torus4 { period } => vec![(0.0, period); 4],
            Manifold::ComplexPlane { re, im } => vec![re, im],
        }
    }

    /// Whether a point declared on `other` may be evaluated by a model living
    /// on `self`. Complex-plane rectangles only restrict grids, so any two are
    /// compatible.
    pub fn accepts(&self, other: &Manifold) -> bool {
        match (self, other) {
            (Manifold::ComplexPlane { .. }, Manifold::ComplexPlane { .. }) => true,
            _ => self == other,
        }
    }

    fn wrap(&self, coords: &mut [f64]) {
        match *self {
            Manifold::Torus2 { periods, shear, .. } => {
                let turns = (coords[0] / periods[0]).floor();
                coords[0] -= turns * periods[0];
                coords[1] -= turns * shear;
                coords[1] = coords[1].rem_euclid(periods[1]);
                // rem_euclid may round up to the period itself.
                if coords[1] >= periods[1] {
                    coords[1] = 0.0;
                }
                if coords[0] >= periods[0] {
                    coords[0] = 0.0;
                }
            }
            Manifold::Torus4 { period } => {
                for c in coords {
                    *c = c.rem_euclid(period);
                    if *c >= period {
                        *c = 0.0;
                    }
                }
            }
            _ => {}
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point on a parameter manifold. Torus coordinates are reduced into the
/// fundamental cell on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamPoint {
    coords: Vec<f64>,
    manifold: Manifold,
}

impl ParamPoint {
    pub fn new(manifold: Manifold, mut coords: Vec<f64>) -> Result<Self> {
        if coords.len() != manifold.dim() {
            return Err(Error::DimensionMismatch {
                expected: manifold.dim(),
                actual: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite coordinates {coords:?}")));
        }
        manifold.wrap(&mut coords);
        Ok(Self { coords, manifold })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    /// The point displaced by `delta` along coordinate `mu`.
    pub fn shifted(&self, mu: usize, delta: f64) -> Self {
        let mut coords = self.coords.clone();
        coords[mu] += delta;
        self.manifold.wrap(&mut coords);
        Self {
            coords,
            manifold: self.manifold,
        }
    }
}

/// Inverse temperature, with an exact zero-temperature mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

/// Exact zero temperature: the ground cluster is occupied uniformly.
pub const BETA_INF: Beta = Beta::Infinite;

impl Beta {
    pub fn finite(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta >= 0.0 {
            Ok(Beta::Finite(beta))
        } else {
            Err(Error::InvalidTemperature(format!("beta = {beta}")))
        }
    }

    /// `T / R0` in model energy units to inverse temperature. Zero maps to
    /// [`BETA_INF`], `+inf` to `beta = 0`.
    pub fn from_temperature(t_over_r0: f64, energy_unit: f64) -> Result<Self> {
        if t_over_r0.is_nan() || t_over_r0 < 0.0 {
            return Err(Error::InvalidTemperature(format!("T/R0 = {t_over_r0}")));
        }
        if t_over_r0 == 0.0 {
            Ok(BETA_INF)
        } else if t_over_r0.is_infinite() {
            Ok(Beta::Finite(0.0))
        } else {
            Beta::finite(1.0 / (t_over_r0 * energy_unit))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Beta::Infinite)
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

/// Gibbs state `exp(-beta H) / Z` resolved in the eigenbasis of `H`.
#[derive(Clone, Debug)]
pub struct ThermalState {
    pub beta: Beta,
    pub rho: ComplexMatrix,
    pub spectrum: SpectralDecomposition,
    /// Occupation of each eigenvector, aligned with `spectrum.eigenvalues`.
    pub weights: Vec<f64>,
    /// Cluster-averaged energies; exact degeneracies stay exact.
    pub energies: Vec<f64>,
}

impl ThermalState {
    pub fn from_spectrum(spectrum: SpectralDecomposition, beta: Beta) -> Self {
        let energies = cluster_energies(&spectrum);
        let n = energies.len();
        let mut weights = vec![0.0; n];
        match beta {
            Beta::Infinite => {
                let ground = spectrum.groups[0].clone();
                let d = ground.len() as f64;
                for i in ground {
                    weights[i] = 1.0 / d;
                }
            }
            Beta::Finite(b) => {
                let e0 = energies[0];
                for (w, &e) in weights.iter_mut().zip(&energies) {
                    *w = (-b * (e - e0)).exp();
                }
                let z: f64 = weights.iter().sum();
                for w in &mut weights {
                    *w /= z;
                }
            }
        }
        let rho = spectrum.from_eigenbasis(&ComplexMatrix::from_real_diagonal(&weights));
        Self {
            beta,
            rho,
            spectrum,
            weights,
            energies,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// Eigenvalues replaced by the mean of their degeneracy cluster.
pub(crate) fn cluster_energies(spectrum: &SpectralDecomposition) -> Vec<f64> {
    let mut energies = spectrum.eigenvalues.clone();
    for g in &spectrum.groups {
        let mean = spectrum.eigenvalues[g.clone()].iter().sum::<f64>() / g.len() as f64;
        for e in &mut energies[g.clone()] {
            *e = mean;
        }
    }
    energies
}

/// A smooth family of Hermitian matrices over a parameter manifold.
pub trait Hamiltonian: Send + Sync {
    /// Hilbert-space dimension.
    fn dim(&self) -> usize;

    fn manifold(&self) -> Manifold;

    fn hamiltonian(&self, p: &ParamPoint) -> Result<ComplexMatrix>;

    /// Exact partial derivative of `H` along coordinate `mu`.
    fn gradient(&self, p: &ParamPoint, mu: usize) -> Result<ComplexMatrix>;

    /// `H` together with all coordinate derivatives.
    fn hamiltonian_and_gradients(&self, p: &ParamPoint) -> Result<(ComplexMatrix, Vec<ComplexMatrix>)> {
        let h = self.hamiltonian(p)?;
        let grads = (0..self.manifold().dim())
            .map(|mu| self.gradient(p, mu))
            .collect::<Result<Vec<_>>>()?;
        Ok((h, grads))
    }

    /// Energy scale `R0` used to quote temperatures as `T / R0`.
    fn energy_unit(&self) -> f64;

    /// Sign relating the coordinate orientation of the integration chart to
    /// the orientation in which Chern numbers are reported.
    fn orientation(&self) -> f64 {
        1.0
    }

    fn check_point(&self, p: &ParamPoint) -> Result<()> {
        let m = self.manifold();
        if m.accepts(p.manifold()) {
            Ok(())
        } else {
            Err(Error::ManifoldMismatch {
                expected: m.name().to_string(),
                actual: p.manifold().name().to_string(),
            })
        }
    }

    fn check_direction(&self, mu: usize) -> Result<()> {
        let dim = self.manifold().dim();
        if mu < dim {
            Ok(())
        } else {
            Err(Error::UnsupportedDirection { mu, dim })
        }
    }
}

/// Thermal state of `model` at `p`.
pub fn thermal_state<M: Hamiltonian + ?Sized>(model: &M, p: &ParamPoint, beta: Beta) -> Result<ThermalState> {
    thermal_state_with_tol(model, p, beta, DEFAULT_DEGENERACY_TOL)
}

pub fn thermal_state_with_tol<M: Hamiltonian + ?Sized>(
    model: &M,
    p: &ParamPoint,
    beta: Beta,
    degeneracy_tol: f64,
) -> Result<ThermalState> {
    let h = model.hamiltonian(p)?;
    Ok(ThermalState::from_spectrum(hermitian_eig(&h, degeneracy_tol)?, beta))
}

/// One of the built-in model families.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    TwoLevelSphere(TwoLevelSphere),
    Haldane(Haldane),
    FourBandGamma(FourBandGamma),
    CoherentOscillator(CoherentOscillator),
}

impl ModelSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ModelSpec::TwoLevelSphere(_) => "two_level_sphere",
            ModelSpec::Haldane(_) => "haldane",
            ModelSpec::FourBandGamma(_) => "four_band_gamma",
            ModelSpec::CoherentOscillator(_) => "coherent_oscillator",
        }
    }

    fn inner(&self) -> &dyn Hamiltonian {
        match self {
            ModelSpec::TwoLevelSphere(m) => m,
            ModelSpec::Haldane(m) => m,
            ModelSpec::FourBandGamma(m) => m,
            ModelSpec::CoherentOscillator(m) => m,
        }
    }
}

impl From<TwoLevelSphere> for ModelSpec {
    fn from(m: TwoLevelSphere) -> Self {
        ModelSpec::TwoLevelSphere(m)
    }
}

impl From<Haldane> for ModelSpec {
    fn from(m: Haldane) -> Self {
        ModelSpec::Haldane(m)
    }
}

impl From<FourBandGamma> for ModelSpec {
    fn from(m: FourBandGamma) -> Self {
        ModelSpec::FourBandGamma(m)
    }
}

impl From<CoherentOscillator> for ModelSpec {
    fn from(m: CoherentOscillator) -> Self {
        ModelSpec::CoherentOscillator(m)
    }
}

impl Hamiltonian for ModelSpec {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn manifold(&self) -> Manifold {
        self.inner().manifold()
    }

    fn hamiltonian(&self, p: &ParamPoint) -> Result<ComplexMatrix> {
        self.inner().hamiltonian(p)
    }

    fn gradient(&self, p: &ParamPoint, mu: usize) -> Result<ComplexMatrix> {
        self.inner().gradient(p, mu)
    }

    fn hamiltonian_and_gradients(&self, p: &ParamPoint) -> Result<(ComplexMatrix, Vec<ComplexMatrix>)> {
        self.inner().hamiltonian_and_gradients(p)
    }

    fn energy_unit(&self) -> f64 {
        self.inner().energy_unit()
    }

    fn orientation(&self) -> f64 {
        self.inner().orientation()
    }
}
