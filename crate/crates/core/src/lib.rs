//! Berry, Wilczek-Zee and Uhlmann geometry of thermal states, and the
//! first- and second-order thermal Uhlmann-Chern numbers built from them.
//!
//! Models implement [`Hamiltonian`]; [`geometry`] turns a model and a point
//! into connections and curvatures; [`chern`] integrates them over grids.

pub mod chern;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod models;

pub use chern::{
    curvature_map, first_thermal_uc, pure_chern_fhs, second_chern_pure, second_thermal_uc, temperature_sweep,
    temperature_sweep_with, ChernEstimate,
    ChernOrder, GridSpec, SecondChernReport, SweepOptions, SweepPoint, SweepResult,
};
pub use error::{Error, Result};
pub use geometry::{
    berry_curvature, projector_limit_curvature, thermal_trace_spectral, uhlmann_connection_spectral,
    uhlmann_connection_sqrt_fd, uhlmann_curvature, wz_curvature, ConnectionField, ConnectionRoute,
    CurvatureComponents, PointFrame,
};
pub use linalg::{hermitian_eig, psd_sqrt, unitary_exp, ComplexMatrix, SpectralDecomposition};
pub use models::{
    thermal_state, Beta, CoherentOscillator, FourBandGamma, Haldane, Hamiltonian, Manifold, ModelSpec, ParamPoint,
    ThermalState, TwoLevelSphere, BETA_INF,
};
