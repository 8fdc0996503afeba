use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::data::{
    fourier_envelope_constant, make_instability_data, map_x_distance, random_perturbation, reduced_field, Bump,
};
use super::spec::{ExperimentKind, ExperimentSpec};
use crate::error::{Error, Result};
use crate::evolve::{linear_flow, local_energy, run, CrankNicolson, EvolutionConfig, Sample, Trajectory};
use crate::field::{ComplexField, Parity};
use crate::gauge::{reconstruct_map, GaugeFields};
use crate::grid::{GridSpec, RadialGrid};
use crate::soliton::{hdot1_distance, soliton_profile, SolitonParams};
use crate::spectral::io::{write_snapshots, Snapshot};
use crate::spectral::{build_eigenbasis, default_cache_path, norm_lx, read_table, write_table, EigenTable, Factorization};

/// Least-squares d(t) ≈ a + b/ln t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub rms: f64,
    pub t_from: f64,
    pub t_to: f64,
}

pub fn fit_inverse_log(t: &[f64], d: &[f64]) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(d)
        .filter(|(&t, d)| t > 1.0 && d.is_finite())
        .map(|(&t, &d)| (1.0 / t.ln(), d))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rms = (pts.iter().map(|p| (a + b * p.0 - p.1).powi(2)).sum::<f64>() / n).sqrt();
    Some(DecayFit {
        a,
        b,
        rms,
        t_from: t.iter().cloned().filter(|&x| x > 1.0).fold(f64::INFINITY, f64::min),
        t_to: t.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub bumps: Vec<Bump>,
    /// ‖ū − Q̄‖_X at t = 0 and at the last step.
    pub x_distance_initial: f64,
    pub x_distance_final: Option<f64>,
    pub sup_lx: f64,
    pub sup_lambda_deviation: f64,
    pub sup_alpha: f64,
    /// max_t |mass(t) − mass(0)| / (mass(0) t).
    pub mass_drift_per_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstabilityReport {
    /// Ḣ¹ distance of u(0) to Q_{α0,λ0}, and that over εγ.
    pub initial_proximity: f64,
    pub initial_proximity_ratio: f64,
    /// ‖ψ(0)‖_{L²}, and that over γε.
    pub psi0_l2: f64,
    pub psi0_l2_ratio: f64,
    pub psi0_lx: f64,
    /// Share of ‖ψ(0)‖² outside r ∈ [1/(4ε), 4/ε].
    pub psi0_mass_outside_annulus: f64,
    /// sup |ψ(0)| over γε².
    pub psi0_sup_ratio: f64,
    pub envelope_constant: f64,
    pub lambda_initial: f64,
    pub lambda_final: f64,
    /// |λ(t_end) − 1| / |λ0 − 1|.
    pub lambda_ratio: f64,
    /// d(t) = |ψ2(1,t) − i| at the first sample with t ≥ 10 and at the end.
    pub d_start: f64,
    pub d_final: f64,
    /// Largest increase of d between consecutive samples on [10, t_end].
    pub d_max_increase: f64,
    pub fit: Option<DecayFit>,
    /// ‖ψ(100) − e^{-100iH̃}ψ(0)‖_LX / ‖e^{-100iH̃}ψ(0)‖_LX when the run reaches t = 100.
    pub linear_surrogate_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDecayReport {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub local_energy: Vec<f64>,
    /// Local energy from a Crank–Nicolson run on a grid with twice the nodes.
    pub reference_local_energy: Vec<f64>,
    /// local_energy(0) / local_energy(t_end).
    pub decay_factor: f64,
}

/// Written next to the trajectory CSV as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: ExperimentKind,
    pub spec: ExperimentSpec,
    pub grid_hash: String,
    pub table_hash: String,
    pub completed: bool,
    pub failure: Option<String>,
    pub samples: usize,
    pub refreshes: usize,
    pub stability: Option<StabilityReport>,
    pub instability: Option<InstabilityReport>,
    pub linear_decay: Option<LinearDecayReport>,
}

impl Summary {
    fn new(spec: &ExperimentSpec, table: &EigenTable, traj: &Trajectory) -> Self {
        Summary {
            kind: spec.kind,
            spec: spec.clone(),
            grid_hash: table.grid_hash(),
            table_hash: table.table_hash(),
            completed: traj.is_complete(),
            failure: traj.failure.clone(),
            samples: traj.samples.len(),
            refreshes: traj.refreshes,
            stability: None,
            instability: None,
            linear_decay: None,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }
}

fn table_path(spec: &ExperimentSpec) -> Result<PathBuf> {
    match &spec.table {
        Some(p) => Ok(p.clone()),
        None => default_cache_path(&spec.table_config()),
    }
}

/// Read the table named by the spec, or build and cache it when allowed.
pub fn load_or_build_table(spec: &ExperimentSpec) -> Result<EigenTable> {
    let path = table_path(spec)?;
    if path.exists() {
        let table = read_table(&path)?;
        let want = spec.table_config();
        if table.config().grid != want.grid || table.config().xi_max != want.xi_max {
            return Err(Error::Parameter(format!(
                "table {} was built for {:?}, xi_max {} but the spec asks for {:?}, xi_max {}",
                path.display(),
                table.config().grid,
                table.config().xi_max,
                want.grid,
                want.xi_max
            )));
        }
        return Ok(table);
    }
    if !spec.build_table {
        return Err(Error::Parameter(format!(
            "no eigen-table at {}; build it with `equimap table build` or pass --build-table",
            path.display()
        )));
    }
    let table = build_eigenbasis(&spec.table_config())?;
    write_table(&table, &path)?;
    Ok(table)
}

fn check_grid(spec: &ExperimentSpec, table: &EigenTable) -> Result<()> {
    if table.config().grid != spec.grid {
        return Err(Error::Parameter("table grid differs from the experiment grid".into()));
    }
    Ok(())
}

pub fn run_stability(spec: &ExperimentSpec, table: &EigenTable) -> Result<(Trajectory, Summary)> {
    spec.validate()?;
    check_grid(spec, table)?;
    let grid = table.field_grid();
    let (u0, bumps) = random_perturbation(table, spec.gamma, spec.seed, spec.bumps)?;
    let q = soliton_profile(&SolitonParams::unit(), grid);
    let x0 = map_x_distance(table, &u0, &q)?;
    let psi0 = reduced_field(grid, &u0)?;
    let traj = run(table, &spec.evolution, psi0)?;
    let x_final = match &traj.final_psi {
        Some(psi) if traj.is_complete() => Some(final_map_distance(table, &spec.evolution, psi)?),
        _ => None,
    };
    let mut summary = Summary::new(spec, table, &traj);
    let m0 = traj.samples[0].mass;
    summary.stability = Some(StabilityReport {
        bumps,
        x_distance_initial: x0,
        x_distance_final: x_final,
        sup_lx: traj.sup(|s| s.lx_norm),
        sup_lambda_deviation: traj.sup(|s| (s.lambda - 1.0).abs()),
        sup_alpha: traj.sup(|s| s.alpha.abs()),
        mass_drift_per_time: mass_drift(&traj.samples, m0),
    });
    Ok((traj, summary))
}

fn mass_drift(samples: &[Sample], m0: f64) -> f64 {
    if m0 == 0.0 {
        return samples.iter().map(|s| s.mass).fold(0.0, f64::max);
    }
    samples
        .iter()
        .filter(|s| s.t > 0.0)
        .map(|s| (s.mass - m0).abs() / (m0 * s.t.max(1.0)))
        .fold(0.0, f64::max)
}

fn final_map_distance(table: &EigenTable, config: &EvolutionConfig, psi: &ComplexField) -> Result<f64> {
    let grid = table.field_grid();
    let (psi2, a2) = crate::gauge::reconstruct_fields(grid, psi, &config.reconstruct)?;
    let fields = GaugeFields::from_reduced(grid, psi.clone(), psi2, a2)?;
    let (u, _) = reconstruct_map(grid, &fields)?;
    map_x_distance(table, &u, &soliton_profile(&SolitonParams::unit(), grid))
}

pub fn run_instability(spec: &ExperimentSpec, table: &EigenTable) -> Result<(Trajectory, Summary)> {
    spec.validate()?;
    check_grid(spec, table)?;
    let grid = table.field_grid();
    let (eps, gamma, lambda0) = (spec.eps, spec.gamma, spec.lambda0());
    let u0 = make_instability_data(eps, gamma, spec.alpha0, lambda0, grid)?;
    let q0 = soliton_profile(&SolitonParams::new(1, spec.alpha0, lambda0)?, grid);
    let proximity = hdot1_distance(&u0, &q0, grid)?;
    let psi0 = reduced_field(grid, &u0)?;
    let l2 = psi0.norm_l2(grid);
    let outside: f64 = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(psi0.values())
        .filter(|((&r, _), _)| r < 0.25 / eps || r > 4.0 / eps)
        .map(|((_, w), z)| w * z.norm_sqr())
        .sum();
    let envelope = fourier_envelope_constant(table, &psi0, eps, gamma)?;

    let mut config = spec.evolution;
    let surrogate_t = 100.0;
    if config.snapshot_every.is_none() && config.t_end >= surrogate_t {
        config.snapshot_every = Some(surrogate_t);
    }
    let traj = run(table, &config, psi0.clone())?;
    let surrogate = traj
        .snapshots
        .iter()
        .find(|s| (s.t - surrogate_t).abs() < 0.5 * config.dt)
        .map(|s| -> Result<f64> {
            let lin = linear_flow(table, &psi0, surrogate_t)?;
            let now = ComplexField::new(s.values.clone(), Parity::Odd);
            Ok(norm_lx(table, &now.sub(&lin))?.value / norm_lx(table, &lin)?.value)
        })
        .transpose()?;

    let d: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.t >= 10.0)
        .map(|s| (s.t, (s.re_psi2_at_1.powi(2) + (s.im_psi2_at_1 - 1.0).powi(2)).sqrt()))
        .collect();
    let (ts, ds): (Vec<f64>, Vec<f64>) = d.iter().cloned().unzip();
    let last = traj.samples.last().expect("at least the initial sample");
    let mut summary = Summary::new(spec, table, &traj);
    summary.instability = Some(InstabilityReport {
        initial_proximity: proximity,
        initial_proximity_ratio: proximity / (eps * gamma),
        psi0_l2: l2,
        psi0_l2_ratio: l2 / (gamma * eps),
        psi0_lx: norm_lx(table, &psi0)?.value,
        psi0_mass_outside_annulus: outside / (l2 * l2).max(f64::MIN_POSITIVE),
        psi0_sup_ratio: psi0.max_abs() / (gamma * eps * eps),
        envelope_constant: envelope,
        lambda_initial: traj.samples[0].lambda,
        lambda_final: last.lambda,
        lambda_ratio: (last.lambda - 1.0).abs() / (lambda0 - 1.0).abs(),
        d_start: ds.first().cloned().unwrap_or(f64::NAN),
        d_final: ds.last().cloned().unwrap_or(f64::NAN),
        d_max_increase: ds.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
        fit: fit_inverse_log(&ts, &ds),
        linear_surrogate_distance: surrogate,
    });
    Ok((traj, summary))
}

/// Unit-mass bump near r = 1 (a smooth bump in ln r times r).
pub fn unit_bump(grid: &RadialGrid) -> ComplexField {
    let f = ComplexField::from_fn(grid, Parity::Odd, |r| {
        let x = r.ln() / 0.75;
        let b = if x.abs() < 1.0 { (1.0 - 1.0 / (1.0 - x * x)).exp() } else { 0.0 };
        num_complex::Complex64::new(r * b, 0.0)
    });
    let n = f.norm_l2(grid);
    f.map(Parity::Odd, |z| z / n)
}

/// Step of the Crank–Nicolson reference in the linear decay run.
pub const REFERENCE_DT: f64 = 1e-3;

/// Linear flow of a unit bump: exact in the table's frame, with a Crank–Nicolson
/// run on a grid of twice the resolution as an independent reference.
pub fn run_linear_decay(spec: &ExperimentSpec, table: &EigenTable) -> Result<(Trajectory, Summary)> {
    spec.validate()?;
    check_grid(spec, table)?;
    let grid = table.field_grid();
    let psi0 = unit_bump(grid);
    let cfg = &spec.evolution;
    let every = cfg.cadence(cfg.monitor_every);
    let steps = cfg.steps();
    let mut times: Vec<f64> = (0..=steps).filter(|k| k % every == 0 || *k == steps).map(|k| k as f64 * cfg.dt).collect();
    times.dedup();
    let nan = f64::NAN;
    let mut traj = Trajectory::default();
    for &t in &times {
        let psi = linear_flow(table, &psi0, t)?;
        traj.samples.push(Sample {
            t,
            mass: psi.norm_l2(grid).powi(2),
            lx_norm: norm_lx(table, &psi)?.value,
            lambda: nan,
            alpha: nan,
            re_psi2_at_1: nan,
            im_psi2_at_1: nan,
            a2_at_1: nan,
            local_energy: local_energy(grid, &psi),
        });
        if cfg.snapshot_every.is_some() {
            traj.snapshots.push(Snapshot {
                t,
                values: psi.values().to_vec(),
            });
        }
    }
    traj.final_psi = traj.snapshots.last().map(|s| ComplexField::new(s.values.clone(), Parity::Odd));

    let checkpoints: Vec<f64> = [0.0, 1.0, 10.0, 100.0].into_iter().filter(|&t| t <= cfg.t_end).collect();
    let fine = RadialGrid::from_spec(&GridSpec {
        n: 2 * spec.grid.n,
        ..spec.grid
    })?;
    let reference = crank_nicolson_local_energy(&fine, REFERENCE_DT, &checkpoints);
    let mut report = LinearDecayReport {
        times: checkpoints.clone(),
        mass: Vec::new(),
        local_energy: Vec::new(),
        reference_local_energy: reference,
        decay_factor: nan,
    };
    for &t in &checkpoints {
        let psi = linear_flow(table, &psi0, t)?;
        report.mass.push(psi.norm_l2(grid).powi(2));
        report.local_energy.push(local_energy(grid, &psi));
    }
    report.decay_factor = report.local_energy[0] / report.local_energy.last().cloned().unwrap_or(nan);
    let mut summary = Summary::new(spec, table, &traj);
    summary.linear_decay = Some(report);
    Ok((traj, summary))
}

fn crank_nicolson_local_energy(grid: &RadialGrid, dt: f64, checkpoints: &[f64]) -> Vec<f64> {
    let cn = CrankNicolson::new(Factorization::new(grid).ht_matrix(), dt);
    let mut psi = unit_bump(grid);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut steps = 0usize;
    for &t in checkpoints {
        let target = (t / dt).round() as usize;
        while steps < target {
            cn.step(psi.values_mut());
            steps += 1;
        }
        out.push(local_energy(grid, &psi));
    }
    out
}

/// Dispatch on the spec's kind; table builds return no trajectory.
pub fn run_experiment(spec: &ExperimentSpec, table: &EigenTable) -> Result<(Trajectory, Summary)> {
    match spec.kind {
        ExperimentKind::Stability => run_stability(spec, table),
        ExperimentKind::Instability => run_instability(spec, table),
        ExperimentKind::LinearDecay => run_linear_decay(spec, table),
        ExperimentKind::TableBuild => Err(Error::Parameter("table builds have no trajectory".into())),
    }
}

/// trajectory.csv, summary.json and, when present, snapshots.eqs under `dir`.
pub fn write_outputs(dir: &Path, table: &EigenTable, traj: &Trajectory, summary: &Summary) -> Result<()> {
    fs::create_dir_all(dir)?;
    traj.write_csv(&dir.join("trajectory.csv"))?;
    summary.write(&dir.join("summary.json"))?;
    if !traj.snapshots.is_empty() {
        write_snapshots(&dir.join("snapshots.eqs"), table.field_grid(), &traj.snapshots)?;
    }
    Ok(())
}
