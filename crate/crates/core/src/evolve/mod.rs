//! Linear and nonlinear evolution of the reduced field, i∂_tψ = H̃ψ + Wψ.

mod config;
mod linear;
mod potential;
mod stepper;
mod trajectory;

pub use config::{EvolutionConfig, Propagator, Scheme};
pub use linear::{linear_flow, CrankNicolson, SpectralStep};
pub use potential::{delta_a2, potential_w, potential_w_recentered};
pub use stepper::{State, Stepper};
pub use trajectory::{local_energy, run, Sample, Trajectory, CSV_COLUMNS};
