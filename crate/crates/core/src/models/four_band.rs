use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{pauli, ComplexMatrix};

use super::{Hamiltonian, Manifold, ParamPoint};

/// `Gamma_i = sigma_1 (x) sigma_i` for `i = 1, 2, 3`, `Gamma_4 = sigma_2 (x) 1`,
/// `Gamma_5 = sigma_3 (x) 1`.
pub fn gamma_matrices() -> [ComplexMatrix; 5] {
    let [s1, s2, s3] = pauli();
    let id = ComplexMatrix::identity(2);
    [s1.kron(&s1), s1.kron(&s2), s1.kron(&s3), s2.kron(&id), s3.kron(&id)]
}

/// Largest entry of `{G_i, G_j} - 2 delta_ij` over all pairs.
pub fn clifford_deviation(gammas: &[ComplexMatrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, gi) in gammas.iter().enumerate() {
        for (j, gj) in gammas.iter().enumerate().skip(i) {
            let mut anti = &(gi * gj) + &(gj * gi);
            if i == j {
                anti -= &ComplexMatrix::identity(gi.dim()).scale_real(2.0);
            }
            worst = worst.max(anti.max_abs());
        }
    }
    worst
}

/// Four-band model `H = sum_i R_i Gamma_i` on the four-torus with
/// `R = (cos 2kx, cos 2ky, cos 2kz, cos 2kw, m + sum sin 2k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourBandGamma {
    m: f64,
    gammas: [ComplexMatrix; 5],
}

impl FourBandGamma {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidModel(format!("four-band mass must be finite, got {m}")));
        }
        Ok(Self {
            m,
            gammas: gamma_matrices(),
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn r_vector(&self, k: &[f64]) -> [f64; 5] {
        let mut r = [0.0, 0.0, 0.0, 0.0, self.m];
        for (i, &ki) in k.iter().enumerate() {
            let (s, c) = (2.0 * ki).sin_cos();
            r[i] = c;
            r[4] += s;
        }
        r
    }

    pub fn r_gradient(&self, k: &[f64], mu: usize) -> [f64; 5] {
        let mut d = [0.0; 5];
        let (s, c) = (2.0 * k[mu]).sin_cos();
        d[mu] = -2.0 * s;
        d[4] = 2.0 * c;
        d
    }

    fn combine(&self, v: [f64; 5]) -> ComplexMatrix {
        let mut h = ComplexMatrix::zeros(4);
        for (g, &c) in self.gammas.iter().zip(&v) {
            if c != 0.0 {
                h += &g.scale_real(c);
            }
        }
        h
    }
}

impl Hamiltonian for FourBandGamma {
    fn dim(&self) -> usize {
        4
    }

    fn manifold(&self) -> Manifold {
        Manifold::Torus4 { period: PI }
    }

    fn hamiltonian(&self, p: &ParamPoint) -> Result<ComplexMatrix> {
        self.check_point(p)?;
        Ok(self.combine(self.r_vector(p.coords())))
    }

    fn gradient(&self, p: &ParamPoint, mu: usize) -> Result<ComplexMatrix> {
        self.check_point(p)?;
        self.check_direction(mu)?;
        Ok(self.combine(self.r_gradient(p.coords(), mu)))
    }

    fn hamiltonian_and_gradients(&self, p: &ParamPoint) -> Result<(ComplexMatrix, Vec<ComplexMatrix>)> {
        self.check_point(p)?;
        let k = p.coords();
        let h = self.combine(self.r_vector(k));
        let grads = (0..4).map(|mu| self.combine(self.r_gradient(k, mu))).collect();
        Ok((h, grads))
    }

    /// `|R|` at `k_i = pi / 4`, `m = -3`, which is 1.
    fn energy_unit(&self) -> f64 {
        1.0
    }

    /// The product `Gamma_1 ... Gamma_5` of this representation is `-1`; the
    /// reported sign is that of the opposite chirality.
    fn orientation(&self) -> f64 {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, DEFAULT_DEGENERACY_TOL, ONE};
    use crate::models::test_support::assert_gradients_match;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn gammas_anticommute() {
        let g = gamma_matrices();
        assert!(clifford_deviation(&g) < 1e-15);
        for gi in &g {
            assert!(gi.is_hermitian(0.0));
        }
    }

    #[test]
    fn broken_gamma_is_detected() {
        let mut g = gamma_matrices();
        g[3] = g[0].clone();
        assert!(clifford_deviation(&g) > 1.0);
    }

    #[test]
    fn chirality_product() {
        let g = gamma_matrices();
        let prod = g.iter().skip(1).fold(g[0].clone(), |acc, x| &acc * x);
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(4).scale(-ONE)) < 1e-15);
    }

    #[test]
    fn symmetric_point() {
        let model = FourBandGamma::new(1.5).unwrap();
        let p = ParamPoint::new(model.manifold(), vec![FRAC_PI_4; 4]).unwrap();
        let h = model.hamiltonian(&p).unwrap();
        assert!(h.max_abs_diff(&gamma_matrices()[4].scale_real(5.5)) < 1e-14);
    }

    #[test]
    fn doubly_degenerate_spectrum() {
        let model = FourBandGamma::new(0.7).unwrap();
        for s in 0..100 {
            let k: Vec<f64> = (0..4).map(|i| PI * (((s * 7 + i * 13) * 31) % 97) as f64 / 97.0).collect();
            let r = model.r_vector(&k);
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            let p = ParamPoint::new(model.manifold(), k).unwrap();
            let spec = hermitian_eig(&model.hamiltonian(&p).unwrap(), DEFAULT_DEGENERACY_TOL).unwrap();
            let want = [-norm, -norm, norm, norm];
            for (e, w) in spec.eigenvalues.iter().zip(want) {
                assert!((e - w).abs() < 1e-10);
            }
            assert_eq!(spec.groups, vec![0..2, 2..4]);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let model = FourBandGamma::new(-2.5).unwrap();
        let pts: Vec<_> = (0..100)
            .map(|s| {
                let k = (0..4).map(|i| PI * (((s * 11 + i * 5) * 17) % 89) as f64 / 89.0).collect();
                ParamPoint::new(model.manifold(), k).unwrap()
            })
            .collect();
        assert_gradients_match(&model, &pts);
    }
}
