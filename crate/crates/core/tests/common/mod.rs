#![allow(dead_code)]

use std::sync::OnceLock;

use equimap::grid::GridSpec;
use equimap::spectral::{build_eigenbasis, EigenTable, TableConfig};

/// The default 4096-node table, built once per test binary.
pub fn default_table() -> &'static EigenTable {
    static TABLE: OnceLock<EigenTable> = OnceLock::new();
    TABLE.get_or_init(|| build_eigenbasis(&TableConfig::default()).expect("default table"))
}

/// 1200 nodes on [1e-3, 1e3], frequencies below 8.
pub fn small_table() -> &'static EigenTable {
    static TABLE: OnceLock<EigenTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        build_eigenbasis(&TableConfig {
            grid: GridSpec {
                r_min: 1e-3,
                r_max: 1e3,
                n: 1200,
            },
            xi_max: 8.0,
        })
        .expect("small table")
    })
}
