use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use equimap::experiments::*;
use equimap::spectral::io::read_snapshots;
use equimap::spectral::transform::truncation_fraction;
use equimap::spectral::*;
use equimap::{ComplexField, Parity, RadialGrid};
use num_complex::Complex64;
use serde_json::json;

use crate::args::{Cli, Command, RunKind, SpecArgs, TableAction};
use crate::config::{kind_name, resolve};

/// Bad input: exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

/// The computation ran but broke down: exit code 3.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}
impl std::error::Error for NumericalFailure {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<ConfigError>() || cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return 2;
        }
        if cause.is::<NumericalFailure>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<equimap::Error>() {
            return if e.is_configuration() { 2 } else { 3 };
        }
    }
    3
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Table {
            action: TableAction::Build { opts },
        } => table_build(opts),
        Command::Run { kind, opts } => run(*kind, opts),
        Command::Norms { field, primary, opts } => norms(field, *primary, opts),
        Command::Field { kind, out, opts } => field(*kind, out, opts),
    }
}

fn table_build(opts: &SpecArgs) -> Result<()> {
    let spec = resolve(ExperimentKind::TableBuild, opts)?;
    let path = match opts.output.clone().or(spec.table.clone()) {
        Some(p) => p,
        None => default_cache_path(&spec.table_config())?,
    };
    let t0 = Instant::now();
    let table = build_eigenbasis(&spec.table_config())?;
    let seconds = t0.elapsed().as_secs_f64();
    write_table(&table, &path).with_context(|| format!("writing {}", path.display()))?;
    let report = json!({
        "path": path,
        "modes": table.n_modes(),
        "xi_max": table.xi_max(),
        "grid_hash": table.grid_hash(),
        "table_hash": table.table_hash(),
        "seconds": seconds,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn run(kind: RunKind, opts: &SpecArgs) -> Result<()> {
    let spec = resolve(kind.into(), opts)?;
    let table = load_or_build_table(&spec)?;
    log::info!("running {} with {} modes", kind_name(spec.kind), table.n_modes());
    let (traj, summary) = run_experiment(&spec, &table)?;
    write_outputs(&spec.output, &table, &traj, &summary)
        .with_context(|| format!("writing outputs under {}", spec.output.display()))?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if !summary.completed {
        return Err(NumericalFailure(format!(
            "run stopped early: {}",
            summary.failure.unwrap_or_default()
        ))
        .into());
    }
    Ok(())
}

fn read_field(path: &Path, grid: &RadialGrid) -> Result<ComplexField> {
    if path.extension().is_some_and(|e| e == "eqs") {
        let (hash, snaps) = read_snapshots(path)?;
        if hash != grid.hash() {
            return Err(ConfigError(format!("{} was written on a different grid", path.display())).into());
        }
        let last = snaps
            .into_iter()
            .last()
            .ok_or_else(|| ConfigError(format!("{} holds no snapshots", path.display())))?;
        return Ok(ComplexField::new(last.values, Parity::Odd));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let mut values = Vec::with_capacity(grid.len());
    for (j, row) in reader.deserialize::<(f64, f64, f64)>().enumerate() {
        let (r, re, im) = row?;
        if j >= grid.len() || ((r - grid.r(j)) / grid.r(j)).abs() > 1e-9 {
            return Err(ConfigError(format!(
                "{}: row {} at r = {r} is not node {j} of the table grid",
                path.display(),
                j + 1
            ))
            .into());
        }
        values.push(Complex64::new(re, im));
    }
    if values.len() != grid.len() {
        return Err(ConfigError(format!(
            "{}: {} rows, the table grid has {} nodes",
            path.display(),
            values.len(),
            grid.len()
        ))
        .into());
    }
    Ok(ComplexField::new(values, Parity::Odd))
}

fn norms(path: &Path, primary: bool, opts: &SpecArgs) -> Result<()> {
    let spec = resolve(ExperimentKind::TableBuild, opts)?;
    let table = load_or_build_table(&spec)?;
    let (grid, frame) = if primary {
        (table.primary_grid(), Frame::H)
    } else {
        (table.field_grid(), Frame::Ht)
    };
    let f = read_field(path, grid)?;
    let mut report = json!({
        "field": path,
        "frame": if primary { "H" } else { "Ht" },
        "l2": f.norm_l2(grid),
        "untabulated_fraction": truncation_fraction(&table, &f, frame)?,
    });
    let obj = report.as_object_mut().expect("object");
    if primary {
        let x = norm_x(&table, &f)?;
        obj.insert("x".into(), json!(x.value));
        obj.insert("truncated_band_fraction".into(), json!(x.truncated_fraction));
    } else {
        let lx = norm_lx(&table, &f)?;
        obj.insert("lx".into(), json!(lx.value));
        obj.insert("lx_by_inversion".into(), json!(norm_lx_by_inversion(&table, &f)?.value));
        obj.insert("truncated_band_fraction".into(), json!(lx.truncated_fraction));
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn field(kind: RunKind, out: &PathBuf, opts: &SpecArgs) -> Result<()> {
    let spec = resolve(kind.into(), opts)?;
    let grid = RadialGrid::from_spec(&spec.grid)?;
    let psi = match kind {
        RunKind::Stability => {
            let table = load_or_build_table(&spec)?;
            let (u, _) = random_perturbation(&table, spec.gamma, spec.seed, spec.bumps)?;
            reduced_field(&grid, &u)?
        }
        RunKind::Instability => {
            let u = make_instability_data(spec.eps, spec.gamma, spec.alpha0, spec.lambda0(), &grid)?;
            reduced_field(&grid, &u)?
        }
        RunKind::LinearDecay => unit_bump(&grid),
    };
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["r", "re", "im"])?;
    for (r, z) in grid.nodes().iter().zip(psi.values()) {
        w.serialize((r, z.re, z.im))?;
    }
    w.flush()?;
    Ok(())
}
