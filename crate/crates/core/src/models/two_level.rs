use crate::error::{Error, Result};
use crate::linalg::{pauli, ComplexMatrix};

use super::{Hamiltonian, Manifold, ParamPoint};

/// `H = R n(theta, phi) . sigma` with `n` the unit vector in spherical angles.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLevelSphere {
    radius: f64,
}

impl TwoLevelSphere {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidModel(format!("two-level radius must be positive, got {radius}")));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn combine(v: [f64; 3]) -> ComplexMatrix {
        let [s1, s2, s3] = pauli();
        let mut h = s1.scale_real(v[0]);
        h += &s2.scale_real(v[1]);
        h += &s3.scale_real(v[2]);
        h
    }
}

impl Hamiltonian for TwoLevelSphere {
    fn dim(&self) -> usize {
        2
    }

    fn manifold(&self) -> Manifold {
        Manifold::Sphere2 { radius: self.radius }
    }

    fn hamiltonian(&self, p: &ParamPoint) -> Result<ComplexMatrix> {
        self.check_point(p)?;
        let (t, f) = (p.coords()[0], p.coords()[1]);
        let r = self.radius;
        Ok(Self::combine([r * t.sin() * f.cos(), r * t.sin() * f.sin(), r * t.cos()]))
    }

    fn gradient(&self, p: &ParamPoint, mu: usize) -> Result<ComplexMatrix> {
        self.check_point(p)?;
        self.check_direction(mu)?;
        let (t, f) = (p.coords()[0], p.coords()[1]);
        let r = self.radius;
        let v = if mu == 0 {
            [r * t.cos() * f.cos(), r * t.cos() * f.sin(), -r * t.sin()]
        } else {
            [-r * t.sin() * f.sin(), r * t.sin() * f.cos(), 0.0]
        };
        Ok(Self::combine(v))
    }

    fn energy_unit(&self) -> f64 {
        self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, DEFAULT_DEGENERACY_TOL};
    use crate::models::test_support::assert_gradients_match;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn north_pole_is_sigma_z() {
        let m = TwoLevelSphere::new(1.0).unwrap();
        let p = ParamPoint::new(m.manifold(), vec![0.0, 0.0]).unwrap();
        assert!(m.hamiltonian(&p).unwrap().max_abs_diff(&pauli()[2]) < 1e-15);
    }

    #[test]
    fn theta_derivative_on_equator() {
        let m = TwoLevelSphere::new(1.0).unwrap();
        let p = ParamPoint::new(m.manifold(), vec![FRAC_PI_2, 0.0]).unwrap();
        let g = m.gradient(&p, 0).unwrap();
        assert!(g.max_abs_diff(&pauli()[2].scale_real(-1.0)) < 1e-15);
    }

    #[test]
    fn energies_are_plus_minus_radius() {
        let m = TwoLevelSphere::new(2.0).unwrap();
        let p = ParamPoint::new(m.manifold(), vec![1.1, 0.4]).unwrap();
        let s = hermitian_eig(&m.hamiltonian(&p).unwrap(), DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((s.eigenvalues[0] + 2.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_radius_and_direction() {
        assert!(TwoLevelSphere::new(0.0).is_err());
        let m = TwoLevelSphere::new(1.0).unwrap();
        let p = ParamPoint::new(m.manifold(), vec![0.3, 0.3]).unwrap();
        assert!(matches!(m.gradient(&p, 2), Err(Error::UnsupportedDirection { mu: 2, dim: 2 })));
        let torus = ParamPoint::new(Manifold::Torus4 { period: PI }, vec![0.0; 4]).unwrap();
        assert!(matches!(m.hamiltonian(&torus), Err(Error::ManifoldMismatch { .. })));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = TwoLevelSphere::new(1.7).unwrap();
        let pts: Vec<_> = (0..100)
            .map(|k| {
                let t = 0.03 + 3.0 * ((k * 37) % 100) as f64 / 100.0;
                let f = 6.2 * ((k * 61) % 100) as f64 / 100.0;
                ParamPoint::new(m.manifold(), vec![t, f]).unwrap()
            })
            .collect();
        assert_gradients_match(&m, &pts);
    }
}
