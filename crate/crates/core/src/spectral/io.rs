//! Binary cache of an `EigenTable` and companion snapshot files.
//!
//! Layout (little endian): 8-byte magic, u32 version, grid spec
//! (r_min f64, r_max f64, n u64), xi_max f64, 64 ASCII bytes of grid hash,
//! u64 mode count, then the f64 arrays xi, dxi, amplitude, phase,
//! fit_residual, match_residual, q, phi (modes × nodes), psi (modes × nodes).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::factor::Factorization;
use super::table::{EigenTable, TableConfig};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, RadialGrid};

const TABLE_MAGIC: &[u8; 8] = b"EQMTABLE";
const SNAP_MAGIC: &[u8; 8] = b"EQMSNAPS";
const VERSION: u32 = 1;

fn put_f64s(w: &mut impl Write, v: &[f64]) -> Result<()> {
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; n * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn check_magic(r: &mut impl Read, magic: &[u8; 8]) -> Result<()> {
    let mut m = [0u8; 8];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Format("unrecognized file header".into()));
    }
    let v = get_u32(r)?;
    if v != VERSION {
        return Err(Error::Format(format!("unsupported version {v}")));
    }
    Ok(())
}

pub fn write_table(table: &EigenTable, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(TABLE_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let g = table.config.grid;
    w.write_all(&g.r_min.to_le_bytes())?;
    w.write_all(&g.r_max.to_le_bytes())?;
    w.write_all(&(g.n as u64).to_le_bytes())?;
    w.write_all(&table.config.xi_max.to_le_bytes())?;
    w.write_all(table.grid_hash().as_bytes())?;
    w.write_all(&(table.n_modes() as u64).to_le_bytes())?;
    for v in [
        &table.xi,
        &table.dxi,
        &table.amplitude,
        &table.phase,
        &table.fit_residual,
        &table.match_residual,
        &table.q,
        &table.phi,
        &table.psi,
    ] {
        put_f64s(&mut w, v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<EigenTable> {
    let mut r = BufReader::new(File::open(path)?);
    check_magic(&mut r, TABLE_MAGIC)?;
    let grid = GridSpec {
        r_min: get_f64(&mut r)?,
        r_max: get_f64(&mut r)?,
        n: get_u64(&mut r)? as usize,
    };
    let xi_max = get_f64(&mut r)?;
    let mut hash = [0u8; 64];
    r.read_exact(&mut hash)?;
    let field = RadialGrid::from_spec(&grid)?;
    if field.hash().as_bytes() != hash {
        return Err(Error::Format("grid hash does not match the stored grid".into()));
    }
    let m = get_u64(&mut r)? as usize;
    let n = grid.n;
    let table = EigenTable {
        config: TableConfig { grid, xi_max },
        fact: Factorization::new(&field),
        xi: get_f64s(&mut r, m)?,
        dxi: get_f64s(&mut r, m)?,
        amplitude: get_f64s(&mut r, m)?,
        phase: get_f64s(&mut r, m)?,
        fit_residual: get_f64s(&mut r, m)?,
        match_residual: get_f64s(&mut r, m)?,
        q: get_f64s(&mut r, m)?,
        phi: get_f64s(&mut r, m * n)?,
        psi: get_f64s(&mut r, m * n)?,
    };
    Ok(table)
}

/// Default cache location: `$EQUIMAP_CACHE` or `.equimap-cache`, keyed by the
/// grid hash and xi_max.
pub fn default_cache_path(config: &TableConfig) -> Result<PathBuf> {
    let grid = RadialGrid::from_spec(&config.grid)?;
    let dir = std::env::var_os("EQUIMAP_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".equimap-cache"));
    Ok(dir.join(format!("table-{}-xi{}.eqt", &grid.hash()[..16], config.xi_max)))
}

/// Time-stamped complex field samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<Complex64>,
}

/// Companion file: magic, version, grid hash, node count, snapshot count,
/// then per snapshot t followed by interleaved (re, im) pairs.
pub fn write_snapshots(path: &Path, grid: &RadialGrid, snaps: &[Snapshot]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SNAP_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(grid.hash().as_bytes())?;
    w.write_all(&(grid.len() as u64).to_le_bytes())?;
    w.write_all(&(snaps.len() as u64).to_le_bytes())?;
    for s in snaps {
        if s.values.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: s.values.len(),
            });
        }
        w.write_all(&s.t.to_le_bytes())?;
        for z in &s.values {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Returns the stored grid hash and the snapshots.
pub fn read_snapshots(path: &Path) -> Result<(String, Vec<Snapshot>)> {
    let mut r = BufReader::new(File::open(path)?);
    check_magic(&mut r, SNAP_MAGIC)?;
    let mut hash = [0u8; 64];
    r.read_exact(&mut hash)?;
    let n = get_u64(&mut r)? as usize;
    let count = get_u64(&mut r)? as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let t = get_f64(&mut r)?;
        let raw = get_f64s(&mut r, 2 * n)?;
        out.push(Snapshot {
            t,
            values: raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect(),
        });
    }
    let hash = String::from_utf8(hash.to_vec()).map_err(|_| Error::Format("bad grid hash".into()))?;
    Ok((hash, out))
}
