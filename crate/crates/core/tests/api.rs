use std::f64::consts::{FRAC_PI_2, PI};

use uhlmann_core::{
    berry_curvature, pure_chern_fhs, temperature_sweep, thermal_state, uhlmann_curvature, wz_curvature, Beta,
    ChernOrder, CoherentOscillator, ConnectionRoute, Error, FourBandGamma, GridSpec, Haldane, Hamiltonian, Manifold,
    ModelSpec, ParamPoint, TwoLevelSphere, BETA_INF,
};

#[test]
fn sweep_through_model_spec() {
    let model: ModelSpec = TwoLevelSphere::new(2.0).unwrap().into();
    let grid = GridSpec::uniform(model.manifold(), 32).unwrap();
    let temps = [0.0, 0.25, 0.5, 1.0, 2.0, f64::INFINITY];
    let r = temperature_sweep(&model, &temps, &grid, ChernOrder::First).unwrap();
    assert_eq!(r.model_id, "two_level_sphere");
    assert_eq!(r.energy_unit, 2.0);
    assert_eq!(r.temperatures(), temps.to_vec());
    let v = r.values();
    assert!((v[0] - 1.0).abs() < 1e-3);
    assert!(v.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(v[5], 0.0);
    // the ratio to the zero-temperature value is tanh^3(R / T) = tanh^3(1 / t)
    for (t, x) in temps[1..5].iter().zip(&v[1..5]) {
        assert!((x / v[0] - (1.0 / t).tanh().powi(3)).abs() < 1e-9, "T = {t}");
    }
}

#[test]
fn errors_are_typed() {
    assert!(matches!(TwoLevelSphere::new(-1.0), Err(Error::InvalidModel(_))));
    let h = Haldane::new(1.0, 0.5, FRAC_PI_2, 0.0).unwrap();
    assert!(matches!(GridSpec::new(h.manifold(), vec![16, 15]), Err(Error::InvalidGrid(_))));
    assert!(matches!(GridSpec::uniform(h.manifold(), 4), Err(Error::InvalidGrid(_))));
    let sphere_grid = GridSpec::uniform(Manifold::Sphere2 { radius: 1.0 }, 16).unwrap();
    assert!(matches!(pure_chern_fhs(&h, 0..1, &sphere_grid), Err(Error::ManifoldMismatch { .. })));
    let model: ModelSpec = h.into();
    let grid = GridSpec::uniform(model.manifold(), 16).unwrap();
    assert!(matches!(
        temperature_sweep(&model, &[], &grid, ChernOrder::First),
        Err(Error::InvalidTemperature(m)) if m == "temperatures: empty"
    ));
    assert!(matches!(
        temperature_sweep(&model, &[0.0], &grid, ChernOrder::Second),
        Err(Error::DimensionMismatch { .. })
    ));
    let c = CoherentOscillator::new(1.0, 16).unwrap();
    let far = ParamPoint::new(c.manifold(), vec![1.9, 0.0]).unwrap();
    assert!(matches!(c.hamiltonian(&far), Err(Error::TruncationTooSmall { .. })));
}

#[test]
fn berry_and_wilczek_zee_agree_on_a_nondegenerate_band() {
    let h = Haldane::new(1.0, 0.5, FRAC_PI_2, 0.7).unwrap();
    let p = ParamPoint::new(h.manifold(), vec![0.4, 1.3]).unwrap();
    let fb = berry_curvature(&h, &p, 0).unwrap();
    let wz = wz_curvature(&h, &p, &[0]).unwrap();
    assert!(fb.max_abs_diff(&wz) < 1e-12);
}

#[test]
fn curvature_is_anti_hermitian_and_vanishes_when_maximally_mixed() {
    let fb = FourBandGamma::new(1.5).unwrap();
    let p = ParamPoint::new(fb.manifold(), vec![0.2, 0.9, 1.7, 2.9]).unwrap();
    for route in [ConnectionRoute::Spectral, ConnectionRoute::SqrtFiniteDifference { step: 1e-4 }] {
        let f = uhlmann_curvature(&fb, &p, Beta::Finite(0.7), route, 1e-4).unwrap();
        assert!(f.anti_hermiticity_error() < 1e-9);
        assert!(f.max_abs() > 1e-3);
        let hot = uhlmann_curvature(&fb, &p, Beta::Finite(0.0), route, 1e-4).unwrap();
        assert!(hot.max_abs() < 1e-12);
    }
}

#[test]
fn ground_state_projector_at_zero_temperature() {
    let fb = FourBandGamma::new(-2.5).unwrap();
    let p = ParamPoint::new(fb.manifold(), vec![PI / 3.0, 0.1, 0.2, 0.3]).unwrap();
    let st = thermal_state(&fb, &p, BETA_INF).unwrap();
    assert_eq!(st.weights, vec![0.5, 0.5, 0.0, 0.0]);
    assert!((&st.rho * &st.rho).max_abs_diff(&st.rho.scale_real(0.5)) < 1e-14);
}

#[test]
fn haldane_is_topological_only_inside_the_phase_boundary() {
    for (mass, want) in [(0.0, 1), (-2.0, 1), (4.0, 0)] {
        let h = Haldane::new(1.0, 0.5, FRAC_PI_2, mass).unwrap();
        let grid = GridSpec::uniform(h.manifold(), 48).unwrap();
        assert_eq!(pure_chern_fhs(&h, 0..1, &grid).unwrap(), want, "M = {mass}");
    }
    let flipped = Haldane::new(1.0, 0.5, -FRAC_PI_2, 0.0).unwrap();
    let grid = GridSpec::uniform(flipped.manifold(), 48).unwrap();
    assert_eq!(pure_chern_fhs(&flipped, 0..1, &grid).unwrap(), -1);
}
