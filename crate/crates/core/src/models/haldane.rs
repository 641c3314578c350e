use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{pauli, ComplexMatrix};

use super::{Hamiltonian, Manifold, ParamPoint};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Nearest-neighbour bond vectors.
pub const HALDANE_A: [[f64; 2]; 3] = [[SQRT3, 0.0], [-SQRT3 / 2.0, -1.5], [-SQRT3 / 2.0, 1.5]];

/// Next-nearest-neighbour vectors `a2 - a3`, `a1 - a2`, `a3 - a1`.
pub const HALDANE_B: [[f64; 2]; 3] = [
    [0.0, -3.0],
    [1.5 * SQRT3, 1.5],
    [-1.5 * SQRT3, 1.5],
];

/// Two-band Haldane model `H(k) = R(k) . sigma` on the honeycomb lattice.
///
/// `H` is periodic under `G1 = (2 pi / sqrt 3, 2 pi / 3)` and
/// `G2 = (0, 4 pi / 3)`. The integration cell `[0, 2 pi / sqrt 3) x [0, 4 pi / 3)`
/// is a fundamental domain of that lattice and holds three Brillouin zones of
/// the underlying triangular Bravais lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Haldane {
    t1: f64,
    t2: f64,
    phi: f64,
    mass: f64,
}

impl Haldane {
    pub fn new(t1: f64, t2: f64, phi: f64, mass: f64) -> Result<Self> {
        if t1 == 0.0 || ![t1, t2, phi, mass].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "Haldane parameters must be finite with t1 != 0 (t1={t1}, t2={t2}, phi={phi}, M={mass})"
            )));
        }
        Ok(Self { t1, t2, phi, mass })
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Critical Semenoff mass `3 sqrt 3 t2 |sin phi|`.
    pub fn critical_mass(&self) -> f64 {
        3.0 * SQRT3 * self.t2 * self.phi.sin().abs()
    }

    pub const CELL: [f64; 2] = [2.0 * PI / SQRT3, 4.0 * PI / 3.0];

    /// Components `(R1, R2, R3)` at momentum `k`.
    pub fn r_vector(&self, k: [f64; 2]) -> [f64; 3] {
        let mut r = [0.0, 0.0, self.mass];
        let t2s = 2.0 * self.t2 * self.phi.sin();
        for (a, b) in HALDANE_A.iter().zip(&HALDANE_B) {
            let ka = k[0] * a[0] + k[1] * a[1];
            let kb = k[0] * b[0] + k[1] * b[1];
            r[0] += self.t1 * ka.cos();
            r[1] += self.t1 * ka.sin();
            r[2] -= t2s * kb.sin();
        }
        r
    }

    /// `dR / dk_mu`.
    pub fn r_gradient(&self, k: [f64; 2], mu: usize) -> [f64; 3] {
        let mut d = [0.0; 3];
        let t2s = 2.0 * self.t2 * self.phi.sin();
        for (a, b) in HALDANE_A.iter().zip(&HALDANE_B) {
            let ka = k[0] * a[0] + k[1] * a[1];
            let kb = k[0] * b[0] + k[1] * b[1];
            d[0] -= self.t1 * a[mu] * ka.sin();
            d[1] += self.t1 * a[mu] * ka.cos();
            d[2] -= t2s * b[mu] * kb.cos();
        }
        d
    }

    /// Band gap `2 |R(k)|`.
    pub fn gap(&self, k: [f64; 2]) -> f64 {
        let r = self.r_vector(k);
        2.0 * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
    }

    fn k(p: &ParamPoint) -> [f64; 2] {
        [p.coords()[0], p.coords()[1]]
    }
}

fn sigma_dot(v: [f64; 3]) -> ComplexMatrix {
    let [s1, s2, s3] = pauli();
    let mut h = s1.scale_real(v[0]);
    h += &s2.scale_real(v[1]);
    h += &s3.scale_real(v[2]);
    h
}

impl Hamiltonian for Haldane {
    fn dim(&self) -> usize {
        2
    }

    fn manifold(&self) -> Manifold {
        Manifold::Torus2 {
            periods: Self::CELL,
            shear: Self::CELL[1] / 2.0,
            cover: 3,
        }
    }

    fn hamiltonian(&self, p: &ParamPoint) -> Result<ComplexMatrix> {
        self.check_point(p)?;
        Ok(sigma_dot(self.r_vector(Self::k(p))))
    }

    fn gradient(&self, p: &ParamPoint, mu: usize) -> Result<ComplexMatrix> {
        self.check_point(p)?;
        self.check_direction(mu)?;
        Ok(sigma_dot(self.r_gradient(Self::k(p), mu)))
    }

    /// Gap at `k = 0` with `M = 0`, i.e. `6 |t1|`.
    fn energy_unit(&self) -> f64 {
        6.0 * self.t1.abs()
    }

    /// With `(kx, ky)` ordered as given, the Berry flux of the lower band at
    /// `M = 0`, `phi = pi / 2` comes out negative; the reported sign follows the
    /// convention in which that phase carries `+1`.
    fn orientation(&self) -> f64 {
        -1.0
    }
}
