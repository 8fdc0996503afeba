use std::fs;

use anyhow::{Context, Result};
use equimap::experiments::{ExperimentKind, ExperimentSpec};
use toml::Value;

use crate::args::{RunKind, SpecArgs};
use crate::commands::ConfigError;

impl From<RunKind> for ExperimentKind {
    fn from(k: RunKind) -> Self {
        match k {
            RunKind::Stability => ExperimentKind::Stability,
            RunKind::Instability => ExperimentKind::Instability,
            RunKind::LinearDecay => ExperimentKind::LinearDecay,
        }
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Defaults of `kind`, then the config file, then the flags.
pub fn resolve(kind: ExperimentKind, args: &SpecArgs) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::for_kind(kind);
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let file: Value = toml::from_str(&text)
            .map_err(|e| ConfigError(format!("config {}: {e}", path.display())))?;
        if let Some(k) = file.get("kind").and_then(Value::as_str) {
            let named: ExperimentKind = Value::String(k.into())
                .try_into()
                .map_err(|e| ConfigError(format!("config {}: {e}", path.display())))?;
            if named != kind {
                return Err(ConfigError(format!(
                    "config {} describes a {k} experiment, not {}",
                    path.display(),
                    kind_name(kind)
                ))
                .into());
            }
        }
        let mut merged = Value::try_from(&spec).context("serializing defaults")?;
        merge(&mut merged, file);
        spec = merged
            .try_into()
            .map_err(|e| ConfigError(format!("config {}: {e}", path.display())))?;
    }
    apply_flags(&mut spec, args);
    spec.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(spec)
}

fn apply_flags(spec: &mut ExperimentSpec, a: &SpecArgs) {
    macro_rules! set {
        ($($flag:ident => $($field:ident).+),* $(,)?) => {
            $(if let Some(v) = a.$flag.clone() { spec.$($field).+ = v; })*
        };
    }
    set!(
        eps => eps,
        gamma => gamma,
        alpha0 => alpha0,
        seed => seed,
        bumps => bumps,
        dt => evolution.dt,
        t_end => evolution.t_end,
        monitor_every => evolution.monitor_every,
        refresh_every => evolution.refresh_every,
        r_min => grid.r_min,
        r_max => grid.r_max,
        nodes => grid.n,
        xi_max => xi_max,
        output => output,
    );
    if a.lambda0.is_some() {
        spec.lambda0 = a.lambda0;
    }
    if a.snapshot_every.is_some() {
        spec.evolution.snapshot_every = a.snapshot_every;
    }
    if a.table.is_some() {
        spec.table = a.table.clone();
    }
    if a.build_table {
        spec.build_table = true;
    }
}

pub fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Stability => "stability",
        ExperimentKind::Instability => "instability",
        ExperimentKind::LinearDecay => "linear-decay",
        ExperimentKind::TableBuild => "table-build",
    }
}
