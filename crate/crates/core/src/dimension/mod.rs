//! Lyapunov exponents, pointwise dimension and pressure roots.

mod lyapunov;

pub use lyapunov::{
    lyapunov_birkhoff, lyapunov_gls_closed_form, lyapunov_golden_closed_form, BetaMap, ExpandingMap, GaussMap,
    LyapunovEstimate, LyapunovMethod, OrbitSampler,
};

mod local;

pub use local::{
    cantor_line, gauss_orbit_cloud, lebesgue_line, lebesgue_square, local_dimension, Cloud, LocalDimensionEstimate,
    LocalDimensionParams,
};

mod gls_model;

pub use gls_model::{cell_system, CellWeighting, GlsModel, DEFAULT_CELLS};

mod checks;

pub use checks::{
    conditional_dimension_check, global_dimension_check, ConditionalDimensionReport, DimensionCheckParams,
    GlobalDimensionReport, CHECK_MAX_TAIL,
};

mod temperature;

pub use temperature::{
    hd_limit_set, temperature, PressureSettings, Probe, TemperatureResult, SUMMABILITY_TOL, TEMPERATURE_RESIDUAL,
};
