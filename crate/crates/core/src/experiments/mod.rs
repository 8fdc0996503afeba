//! Reproducible experiments: stability, instability and linear decay runs.

mod data;
mod runs;
mod spec;

pub use data::{
    fourier_envelope_constant, geodesic_glue, make_instability_data, map_x_distance, random_perturbation,
    reduced_field, Bump,
};
pub use runs::{
    fit_inverse_log, load_or_build_table, run_experiment, run_instability, run_linear_decay, run_stability,
    unit_bump, write_outputs, REFERENCE_DT,
    DecayFit, InstabilityReport, LinearDecayReport, StabilityReport, Summary,
};
pub use spec::{ExperimentKind, ExperimentSpec, INSTABILITY_DT, INSTABILITY_SMALLNESS, STABILITY_DT};
