//! Numerical laboratory for 1-equivariant Schrödinger maps near the
//! harmonic-map soliton: radial operators, the gauge dictionary between maps
//! and the reduced field ψ, the distorted Fourier transform of H and H̃, and
//! the evolution of ψ.

pub mod error;
pub mod evolve;
pub mod experiments;
pub mod field;
pub mod gauge;
pub mod grid;
pub mod ops;
pub mod soliton;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{ComplexField, Parity, RadialField, RealField, Scalar};
pub use grid::{make_log_grid, GridSpec, RadialGrid};
pub use soliton::{SolitonParams, SphereProfile};
