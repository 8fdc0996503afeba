use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::ReconstructOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Lie splitting.
    First,
    /// Strang splitting.
    Second,
}

/// Linear part of the split step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Propagator {
    /// Exact phases in the table's H̃ frame.
    Spectral,
    /// Crank–Nicolson on the tridiagonal H̃_d; second order in dt ξ².
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub propagator: Propagator,
    /// Steps between reconstructions of (ψ2, A2) and W.
    pub refresh_every: usize,
    /// Early refresh when the compatibility residual of the stale fields exceeds this.
    pub refresh_tolerance: f64,
    /// Time between trajectory samples.
    pub monitor_every: f64,
    /// Time between stored snapshots; `None` stores none.
    pub snapshot_every: Option<f64>,
    pub reconstruct: ReconstructOptions,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 1e-3,
            t_end: 10.0,
            scheme: Scheme::Second,
            propagator: Propagator::Spectral,
            refresh_every: 10,
            refresh_tolerance: 1e-3,
            monitor_every: 0.1,
            snapshot_every: None,
            reconstruct: ReconstructOptions::default(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.refresh_every == 0 {
            return bad("refresh_every must be at least 1".into());
        }
        if !(self.monitor_every > 0.0) {
            return bad(format!("monitor_every must be positive, got {}", self.monitor_every));
        }
        if let Some(s) = self.snapshot_every {
            if !(s > 0.0) {
                return bad(format!("snapshot_every must be positive, got {s}"));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// dt ξ_max², the phase advance of the fastest tabulated mode per step.
    pub fn phase_per_step(&self, xi_max: f64) -> f64 {
        self.dt * xi_max * xi_max
    }

    /// Steps between samples, at least one.
    pub fn cadence(&self, every: f64) -> usize {
        ((every / self.dt).round() as usize).max(1)
    }
}
