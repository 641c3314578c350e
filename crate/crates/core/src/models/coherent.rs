use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, UnitaryExp, I};

use super::{Beta, Hamiltonian, Manifold, ParamPoint};

pub const DEFAULT_FOCK_DIM: usize = 40;

/// Harmonic oscillator displaced over the complex plane,
/// `H(z) = D(z) H0 D(z)^dagger` with `H0 = hbar omega (n + 1/2)` and
/// `D(z) = exp(z a^dagger - conj(z) a)`, truncated to `fock_dim` levels.
///
/// Coordinates are `(Re z, Im z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentOscillator {
    hbar_omega: f64,
    fock_dim: usize,
    h0: ComplexMatrix,
    /// `a^dagger - a`, the derivative of the generator along `Re z`.
    gen_re: ComplexMatrix,
    /// `i (a^dagger + a)`, the derivative along `Im z`.
    gen_im: ComplexMatrix,
}

impl CoherentOscillator {
    pub fn new(hbar_omega: f64, fock_dim: usize) -> Result<Self> {
        if !(hbar_omega > 0.0 && hbar_omega.is_finite()) {
            return Err(Error::InvalidModel(format!("hbar_omega must be positive, got {hbar_omega}")));
        }
        if fock_dim < 8 {
            return Err(Error::InvalidModel(format!("fock_dim must be at least 8, got {fock_dim}")));
        }
        let n = fock_dim;
        let levels: Vec<f64> = (0..n).map(|k| hbar_omega * (k as f64 + 0.5)).collect();
        let mut a = ComplexMatrix::zeros(n);
        for k in 1..n {
            a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
        }
        let ad = a.adjoint();
        Ok(Self {
            hbar_omega,
            fock_dim,
            h0: ComplexMatrix::from_real_diagonal(&levels),
            gen_re: &ad - &a,
            gen_im: (&ad + &a).scale(I),
        })
    }

    pub fn hbar_omega(&self) -> f64 {
        self.hbar_omega
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    /// Largest admissible `|z|^2`.
    pub fn max_norm_sqr(&self) -> f64 {
        self.fock_dim as f64 / 8.0
    }

    /// Largest thermal occupation among levels `n >= fock_dim / 2`. Results
    /// are trustworthy only when this is negligible.
    pub fn tail_weight(&self, beta: Beta) -> f64 {
        let b = match beta {
            Beta::Infinite => return 0.0,
            Beta::Finite(b) => b,
        };
        let x = b * self.hbar_omega;
        let z: f64 = (0..self.fock_dim).map(|k| (-x * k as f64).exp()).sum();
        (-x * (self.fock_dim / 2) as f64).exp() / z
    }

    fn generator(&self, x: f64, y: f64) -> ComplexMatrix {
        let mut g = self.gen_re.scale_real(x);
        g += &self.gen_im.scale_real(y);
        g
    }

    fn displacement(&self, x: f64, y: f64) -> Result<UnitaryExp> {
        let nsq = x * x + y * y;
        if nsq > self.max_norm_sqr() {
            return Err(Error::TruncationTooSmall {
                fock_dim: self.fock_dim,
                z_norm_sqr: nsq,
            });
        }
        UnitaryExp::new(&self.generator(x, y))
    }

    fn z(p: &ParamPoint) -> (f64, f64) {
        (p.coords()[0], p.coords()[1])
    }

    fn conjugate(&self, d: &ComplexMatrix) -> ComplexMatrix {
        &(d * &self.h0) * &d.adjoint()
    }

    fn conjugate_derivative(&self, d: &ComplexMatrix, dd: &ComplexMatrix) -> ComplexMatrix {
        let left = &(dd * &self.h0) * &d.adjoint();
        &left + &left.adjoint()
    }
}

/// Truncated displacement operator `D(z)`.
pub fn coherent_displacement(spec: &CoherentOscillator, z: Complex64) -> Result<ComplexMatrix> {
    Ok(spec.displacement(z.re, z.im)?.value())
}

impl Hamiltonian for CoherentOscillator {
    fn dim(&self) -> usize {
        self.fock_dim
    }

    /// The square inscribed in `|z|^2 <= fock_dim / 8`.
    fn manifold(&self) -> Manifold {
        let half = (self.max_norm_sqr() / 2.0).sqrt();
        Manifold::ComplexPlane {
            re: (-half, half),
            im: (-half, half),
        }
    }

    fn hamiltonian(&self, p: &ParamPoint) -> Result<ComplexMatrix> {
        self.check_point(p)?;
        let (x, y) = Self::z(p);
        Ok(self.conjugate(&self.displacement(x, y)?.value()))
    }

    fn gradient(&self, p: &ParamPoint, mu: usize) -> Result<ComplexMatrix> {
        self.check_point(p)?;
        self.check_direction(mu)?;
        let (x, y) = Self::z(p);
        let exp = self.displacement(x, y)?;
        let gen = if mu == 0 { &self.gen_re } else { &self.gen_im };
        Ok(self.conjugate_derivative(&exp.value(), &exp.derivative(gen)))
    }

    fn hamiltonian_and_gradients(&self, p: &ParamPoint) -> Result<(ComplexMatrix, Vec<ComplexMatrix>)> {
        self.check_point(p)?;
        let (x, y) = Self::z(p);
        let exp = self.displacement(x, y)?;
        let d = exp.value();
        let grads = [&self.gen_re, &self.gen_im]
            .into_iter()
            .map(|g| self.conjugate_derivative(&d, &exp.derivative(g)))
            .collect();
        Ok((self.conjugate(&d), grads))
    }

    fn energy_unit(&self) -> f64 {
        self.hbar_omega
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::test_support::assert_gradients_match;

    #[test]
    fn identity_at_origin() {
        let m = CoherentOscillator::new(1.0, 40).unwrap();
        let d = coherent_displacement(&m, Complex64::new(0.0, 0.0)).unwrap();
        assert!(d.max_abs_diff(&ComplexMatrix::identity(40)) < 1e-15);
    }

    #[test]
    fn vacuum_overlap() {
        let m = CoherentOscillator::new(1.0, 40).unwrap();
        let d = coherent_displacement(&m, Complex64::new(0.5, 0.0)).unwrap();
        assert!((d[(0, 0)].re - (-0.125f64).exp()).abs() < 1e-9);
        assert!(d[(0, 0)].im.abs() < 1e-9);
    }

    #[test]
    fn inverse_displacement() {
        let m = CoherentOscillator::new(1.0, 40).unwrap();
        let z = Complex64::new(0.3, 0.2);
        let d = coherent_displacement(&m, z).unwrap();
        let dm = coherent_displacement(&m, -z).unwrap();
        assert!((&d * &dm).max_abs_diff(&ComplexMatrix::identity(40)) < 1e-8);
        let u = &d.adjoint() * &d;
        assert!(u.max_abs_diff(&ComplexMatrix::identity(40)) < 1e-8);
    }

    #[test]
    fn truncation_guard() {
        let m = CoherentOscillator::new(1.0, 16).unwrap();
        assert!(matches!(
            coherent_displacement(&m, Complex64::new(1.5, 0.0)),
            Err(Error::TruncationTooSmall { fock_dim: 16, .. })
        ));
        assert!(CoherentOscillator::new(1.0, 7).is_err());
    }

    #[test]
    fn spectrum_is_unchanged_by_displacement() {
        let m = CoherentOscillator::new(0.5, 24).unwrap();
        let p = ParamPoint::new(m.manifold(), vec![0.4, -0.3]).unwrap();
        let h = m.hamiltonian(&p).unwrap();
        let s = crate::linalg::hermitian_eig(&h, 1e-9).unwrap();
        for (k, e) in s.eigenvalues.iter().enumerate() {
            assert!((e - 0.5 * (k as f64 + 0.5)).abs() < 1e-10);
        }
    }

    #[test]
    fn tail_weight_decays_with_beta() {
        let m = CoherentOscillator::new(1.0, 40).unwrap();
        assert!(m.tail_weight(Beta::Finite(2.0)) < 1e-12);
        assert!(m.tail_weight(Beta::Finite(0.1)) > 1e-3);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = CoherentOscillator::new(1.0, 16).unwrap();
        let pts: Vec<_> = (0..100)
            .map(|k| {
                let x = 0.9 * (((k * 37) % 100) as f64 / 50.0 - 1.0);
                let y = 0.9 * (((k * 53) % 100) as f64 / 50.0 - 1.0);
                ParamPoint::new(m.manifold(), vec![x, y]).unwrap()
            })
            .collect();
        assert_gradients_match(&m, &pts);
    }
}
