//! Inputs shared by the benchmarks.

use std::f64::consts::FRAC_PI_2;

use uhlmann_core::{ComplexMatrix, FourBandGamma, Haldane, Hamiltonian, ParamPoint};

/// The four-band Hamiltonian at a generic point, a dense 4 x 4 Hermitian matrix.
pub fn four_band_matrix() -> ComplexMatrix {
    let model = FourBandGamma::new(1.5).expect("valid mass");
    let p = ParamPoint::new(model.manifold(), vec![0.3, 0.7, 1.1, 2.3]).expect("valid point");
    model.hamiltonian(&p).expect("in range")
}

pub fn haldane() -> Haldane {
    Haldane::new(1.0, 0.5, FRAC_PI_2, 0.0).expect("valid parameters")
}

pub fn four_band() -> FourBandGamma {
    FourBandGamma::new(1.5).expect("valid mass")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert!(four_band_matrix().is_hermitian(1e-12));
        assert_eq!(haldane().dim(), 2);
        assert_eq!(four_band().dim(), 4);
    }
}
