//! Shared fixtures for the criterion benches.

use equimap::evolve::{EvolutionConfig, Stepper};
use equimap::experiments::unit_bump;
use equimap::spectral::{build_eigenbasis, EigenTable, TableConfig};
use equimap::{ComplexField, GridSpec, Parity};

/// Smaller than the default table so a bench run stays in seconds.
pub fn bench_config() -> TableConfig {
    TableConfig {
        grid: GridSpec {
            r_min: 1e-3,
            r_max: 1e3,
            n: 2048,
        },
        xi_max: 16.0,
    }
}

pub fn bench_table() -> EigenTable {
    build_eigenbasis(&bench_config()).expect("bench table")
}

pub fn bump(table: &EigenTable, amplitude: f64) -> ComplexField {
    unit_bump(table.field_grid()).map(Parity::Odd, |z| z * amplitude)
}

pub fn stepper(table: &EigenTable) -> Stepper<'_> {
    let config = EvolutionConfig {
        dt: 0.02,
        ..Default::default()
    };
    Stepper::new(table, config, bump(table, 0.05)).expect("stepper")
}
