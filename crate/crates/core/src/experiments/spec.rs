use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::EvolutionConfig;
use crate::gauge::ReconstructOptions;
use crate::grid::GridSpec;
use crate::spectral::TableConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Stability,
    Instability,
    LinearDecay,
    TableBuild,
}

/// Declarative description of one experiment; the config file keys are these fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Transition frequency scale of the glued instability data.
    pub eps: f64,
    pub gamma: f64,
    pub alpha0: f64,
    /// Defaults to 1 + γ for instability runs and 1 otherwise.
    pub lambda0: Option<f64>,
    pub grid: GridSpec,
    pub xi_max: f64,
    /// Table file; defaults to the cache path for (grid, xi_max).
    pub table: Option<PathBuf>,
    /// Build the table when the file is missing instead of failing.
    pub build_table: bool,
    pub output: PathBuf,
    pub seed: u64,
    /// Number of random bumps in a stability perturbation.
    pub bumps: usize,
    pub evolution: EvolutionConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            kind: ExperimentKind::Stability,
            eps: 0.05,
            gamma: 0.01,
            alpha0: 0.0,
            lambda0: None,
            grid: GridSpec::default(),
            xi_max: TableConfig::default().xi_max,
            table: None,
            build_table: false,
            output: PathBuf::from("out"),
            seed: 0,
            bumps: 3,
            evolution: EvolutionConfig {
                dt: STABILITY_DT,
                t_end: 100.0,
                monitor_every: 0.5,
                ..EvolutionConfig::default()
            },
        }
    }
}

/// Long-run steps; the exact linear propagator leaves only the splitting error.
pub const STABILITY_DT: f64 = 0.02;
pub const INSTABILITY_DT: f64 = 0.1;

/// LX gate for the instability kind.
pub const INSTABILITY_SMALLNESS: f64 = 0.2;

impl ExperimentSpec {
    /// Defaults of each kind before any user overrides.
    pub fn for_kind(kind: ExperimentKind) -> Self {
        let base = ExperimentSpec::default();
        match kind {
            ExperimentKind::Instability => ExperimentSpec {
                kind,
                gamma: 0.1,
                evolution: EvolutionConfig {
                    dt: INSTABILITY_DT,
                    t_end: 1000.0,
                    monitor_every: 1.0,
                    // the glued data sits at LX ≈ 0.13; contraction is still enforced
                    reconstruct: ReconstructOptions {
                        smallness: INSTABILITY_SMALLNESS,
                        ..base.evolution.reconstruct
                    },
                    ..base.evolution
                },
                ..base
            },
            _ => ExperimentSpec { kind, ..base },
        }
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0.unwrap_or(match self.kind {
            ExperimentKind::Instability => 1.0 + self.gamma,
            _ => 1.0,
        })
    }

    pub fn table_config(&self) -> TableConfig {
        TableConfig {
            grid: self.grid,
            xi_max: self.xi_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be non-negative, got {}", self.gamma));
        }
        self.evolution.validate()?;
        crate::grid::RadialGrid::from_spec(&self.grid)?;
        match self.kind {
            ExperimentKind::Instability => {
                if !(self.eps > 0.0 && self.eps <= 0.2) {
                    return bad(format!("eps must lie in (0, 0.2], got {}", self.eps));
                }
                if !(self.gamma > 0.0) {
                    return bad("instability runs need gamma > 0".into());
                }
                let offset = self.alpha0.abs() + (self.lambda0() - 1.0).abs();
                if offset < 0.5 * self.gamma || offset > 2.0 * self.gamma {
                    return bad(format!(
                        "|alpha0| + |lambda0 - 1| = {offset} must lie in [gamma/2, 2 gamma]"
                    ));
                }
                if !(self.lambda0() > 0.0) {
                    return bad("lambda0 must be positive".into());
                }
            }
            ExperimentKind::Stability => {
                if self.gamma > 0.05 {
                    return bad(format!("stability runs need gamma <= 0.05, got {}", self.gamma));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
