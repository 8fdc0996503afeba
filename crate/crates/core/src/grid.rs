use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Parameters of a log-uniform radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            r_min: 1e-4,
            r_max: 1e4,
            n: 4096,
        }
    }
}

/// Nodes r_j = r_min e^{j h}, uniform in s = ln r.
///
/// Weights integrate f(r) r dr with the trapezoid rule in s, so
/// `w_j = r_j^2 h` except at the two ends where it is halved.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    spec: GridSpec,
    offset: f64,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub fn make_log_grid(r_min: f64, r_max: f64, n: usize) -> Result<RadialGrid> {
    if !(r_min > 0.0 && r_min < 1.0 && r_max > 1.0 && r_max.is_finite()) {
        return Err(Error::Parameter(format!(
            "grid needs 0 < r_min < 1 < r_max, got r_min={r_min}, r_max={r_max}"
        )));
    }
    if n < 16 {
        return Err(Error::Parameter(format!("grid needs at least 16 nodes, got {n}")));
    }
    Ok(RadialGrid::build(GridSpec { r_min, r_max, n }, 0.0))
}

impl RadialGrid {
    pub fn from_spec(spec: &GridSpec) -> Result<RadialGrid> {
        make_log_grid(spec.r_min, spec.r_max, spec.n)
    }

    fn build(spec: GridSpec, offset: f64) -> RadialGrid {
        let h = (spec.r_max / spec.r_min).ln() / (spec.n - 1) as f64;
        let s0 = spec.r_min.ln() + offset * h;
        let nodes: Vec<f64> = (0..spec.n).map(|j| (s0 + j as f64 * h).exp()).collect();
        let mut weights: Vec<f64> = nodes.iter().map(|r| r * r * h).collect();
        weights[0] *= 0.5;
        weights[spec.n - 1] *= 0.5;
        RadialGrid {
            spec,
            offset,
            h,
            nodes,
            weights,
        }
    }

    /// Same step, nodes shifted by `frac` steps in s.
    pub fn shifted(&self, frac: f64) -> RadialGrid {
        RadialGrid::build(self.spec, self.offset + frac)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn log_step(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.len() - 1]
    }

    /// Fractional node index of radius r.
    pub fn position(&self, r: f64) -> f64 {
        (r.ln() - self.nodes[0].ln()) / self.h
    }

    /// First node with r_j >= r.
    pub fn first_at_or_above(&self, r: f64) -> Option<usize> {
        self.nodes.iter().position(|&x| x >= r * (1.0 - 1e-14))
    }

    /// Index of the node closest to r in log distance.
    pub fn nearest(&self, r: f64) -> usize {
        let p = self.position(r).round();
        p.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Trapezoid-in-s quadrature of f(r) r dr.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// Cubic Lagrange weights in s for evaluating at radius r.
    /// Returns the first stencil index and four weights.
    pub fn interp_stencil(&self, r: f64) -> Result<(usize, [f64; 4])> {
        let p = self.position(r);
        let last = (self.len() - 1) as f64;
        if !(p >= -1e-9 && p <= last + 1e-9) {
            return Err(Error::OutOfRange(format!(
                "radius {r} outside grid [{}, {}]",
                self.r_min(),
                self.r_max()
            )));
        }
        let base = (p.floor() as isize - 1).clamp(0, self.len() as isize - 4) as usize;
        let t = p - base as f64;
        let mut w = [0.0; 4];
        for (k, wk) in w.iter_mut().enumerate() {
            let mut v = 1.0;
            for m in 0..4 {
                if m != k {
                    v *= (t - m as f64) / (k as f64 - m as f64);
                }
            }
            *wk = v;
        }
        Ok((base, w))
    }

    /// SHA-256 over the grid parameters and node bytes.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.spec.r_min.to_le_bytes());
        hasher.update(self.spec.r_max.to_le_bytes());
        hasher.update((self.spec.n as u64).to_le_bytes());
        hasher.update(self.offset.to_le_bytes());
        for r in &self.nodes {
            hasher.update(r.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}
