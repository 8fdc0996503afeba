use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::EvolutionConfig;
use super::stepper::Stepper;
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::gauge::{modulation_params, reconstruct_fields, GaugeFields, ReconstructOptions};
use crate::grid::RadialGrid;
use crate::spectral::io::Snapshot;
use crate::spectral::{norm_lx, EigenTable};

pub const CSV_COLUMNS: [&str; 9] = [
    "t",
    "mass",
    "lx_norm",
    "lambda",
    "alpha",
    "re_psi2_at_1",
    "im_psi2_at_1",
    "a2_at_1",
    "local_energy",
];

/// One trajectory row; field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub mass: f64,
    pub lx_norm: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub re_psi2_at_1: f64,
    pub im_psi2_at_1: f64,
    pub a2_at_1: f64,
    pub local_energy: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub snapshots: Vec<Snapshot>,
    /// Field at the last completed step.
    pub final_psi: Option<ComplexField>,
    /// Set when the run stopped early on a numerical failure.
    pub failure: Option<String>,
    pub refreshes: usize,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
        for s in &self.samples {
            w.serialize(s).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Vec<Sample>> {
        let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
        r.deserialize().map(|s| s.map_err(csv_error)).collect()
    }

    pub fn sup<F: Fn(&Sample) -> f64>(&self, f: F) -> f64 {
        self.samples.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf<F: Fn(&Sample) -> f64>(&self, f: F) -> f64 {
        self.samples.iter().map(f).fold(f64::INFINITY, f64::min)
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        k => Error::Format(format!("{k:?}")),
    }
}

/// ∫_{r<2} |ψ|² r dr.
pub fn local_energy(grid: &RadialGrid, psi: &ComplexField) -> f64 {
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .zip(psi.values())
        .filter(|((&r, _), _)| r < 2.0)
        .map(|((_, w), z)| w * z.norm_sqr())
        .sum()
}

/// Monitors at the current field with a fresh reconstruction.
fn sample(table: &EigenTable, t: f64, psi: &ComplexField, opts: &ReconstructOptions) -> Result<Sample> {
    let grid = table.field_grid();
    let lx = norm_lx(table, psi)?.value;
    let opts = ReconstructOptions {
        lx_norm: Some(lx),
        ..*opts
    };
    let (psi2, a2) = reconstruct_fields(grid, psi, &opts)?;
    let fields = GaugeFields::from_reduced(grid, psi.clone(), psi2, a2)?;
    let p = modulation_params(grid, &fields)?;
    let q: Complex64 = fields.psi2.eval(grid, 1.0)?;
    Ok(Sample {
        t,
        mass: psi.norm_l2(grid).powi(2),
        lx_norm: lx,
        lambda: p.lambda,
        alpha: p.alpha,
        re_psi2_at_1: q.re,
        im_psi2_at_1: q.im,
        a2_at_1: fields.a2.eval(grid, 1.0)?,
        local_energy: local_energy(grid, psi),
    })
}

/// Evolve `psi0` to `config.t_end`, sampling every `monitor_every`.
///
/// Errors before the first step are returned; a failure inside the loop ends
/// the run and is recorded on the trajectory together with the last state.
pub fn run(table: &EigenTable, config: &EvolutionConfig, psi0: ComplexField) -> Result<Trajectory> {
    let first = sample(table, 0.0, &psi0, &config.reconstruct)?;
    let mut stepper = Stepper::new(table, *config, psi0)?;
    let mut traj = Trajectory {
        samples: vec![first],
        ..Default::default()
    };
    let monitor = config.cadence(config.monitor_every);
    let snap = config.snapshot_every.map(|s| config.cadence(s));
    if snap.is_some() {
        traj.snapshots.push(Snapshot {
            t: 0.0,
            values: stepper.state().psi.values().to_vec(),
        });
    }
    let steps = config.steps();
    for k in 1..=steps {
        let result = stepper.step().and_then(|_| {
            if k % monitor == 0 || k == steps {
                let s = stepper.state();
                traj.samples.push(sample(table, s.t, &s.psi, &config.reconstruct)?);
            }
            Ok(())
        });
        if let Err(e) = result {
            log::error!("run stopped at t = {}: {e}", stepper.state().t);
            traj.failure = Some(e.to_string());
            break;
        }
        if snap.is_some_and(|n| k % n == 0) {
            traj.snapshots.push(Snapshot {
                t: stepper.state().t,
                values: stepper.state().psi.values().to_vec(),
            });
        }
    }
    traj.final_psi = Some(stepper.state().psi.clone());
    traj.refreshes = stepper.refreshes();
    Ok(traj)
}
