use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::bessel::j1_y1_large;
use super::factor::Factorization;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, RadialGrid};
use crate::soliton::h_pair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    pub grid: GridSpec,
    /// Largest tabulated frequency.
    pub xi_max: f64,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            grid: GridSpec::default(),
            xi_max: 128.0,
        }
    }
}

/// Far-field window rξ ∈ [10, 20], kept at r ≥ 4 where V ≈ 1/r².
pub const FIT_WINDOW: (f64, f64) = (10.0, 20.0);
pub const FIT_MIN_RADIUS: f64 = 4.0;
/// Largest relative RMS misfit of the far-field Bessel fit.
pub const FIT_TOLERANCE: f64 = 1e-2;
/// Largest relative mismatch between forward and backward shots.
pub const MATCH_TOLERANCE: f64 = 1e-6;

/// Sampled generalized eigenfunctions of the staggered H_d, H̃_d pair.
///
/// Modes are stored with unit discrete norm; the continuum normalization
/// divides by √Δξ_n, Δξ_n the local mode spacing (density of states).
#[derive(Debug, Clone)]
pub struct EigenTable {
    pub(crate) config: TableConfig,
    pub(crate) fact: Factorization,
    pub(crate) xi: Vec<f64>,
    pub(crate) dxi: Vec<f64>,
    pub(crate) phi: Vec<f64>,
    pub(crate) psi: Vec<f64>,
    pub(crate) amplitude: Vec<f64>,
    pub(crate) phase: Vec<f64>,
    pub(crate) fit_residual: Vec<f64>,
    pub(crate) match_residual: Vec<f64>,
    pub(crate) q: Vec<f64>,
}

fn bisect_mode(fact: &Factorization, n: usize, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if fact.sturm_count(mid.exp()) > n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Least-squares fit φ ≈ √ξ (c₁J₁(ξr) + c₂Y₁(ξr)) on the far-field window,
/// cut where the grid under-resolves the oscillation (ξ r h > 0.1).
/// Returns (√(c₁²+c₂²), phase, relative RMS residual).
fn far_field_fit(r: &[f64], phi: &[f64], xi: f64, h: f64) -> Option<(f64, f64, f64)> {
    let lo = (FIT_WINDOW.0 / xi).max(FIT_MIN_RADIUS);
    let hi = (FIT_WINDOW.1 / xi).min(0.1 / (xi * h));
    if hi - lo < std::f64::consts::PI / xi {
        return None;
    }
    let (mut s11, mut s12, mut s22, mut t1, mut t2, mut ff) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let mut count = 0;
    let sx = xi.sqrt();
    let mut basis = Vec::new();
    for (&rj, &f) in r.iter().zip(phi) {
        if rj < lo || rj > hi {
            continue;
        }
        let (j, y) = j1_y1_large(xi * rj);
        let (j, y) = (sx * j, sx * y);
        s11 += j * j;
        s12 += j * y;
        s22 += y * y;
        t1 += j * f;
        t2 += y * f;
        ff += f * f;
        count += 1;
        basis.push((j, y, f));
    }
    if count < 8 {
        return None;
    }
    let det = s11 * s22 - s12 * s12;
    let c1 = (t1 * s22 - t2 * s12) / det;
    let c2 = (s11 * t2 - s12 * t1) / det;
    let res: f64 = basis
        .iter()
        .map(|(j, y, f)| (f - c1 * j - c2 * y).powi(2))
        .sum();
    Some(((c1 * c1 + c2 * c2).sqrt(), (-c2).atan2(c1), (res / ff).sqrt()))
}

pub fn build_eigenbasis(config: &TableConfig) -> Result<EigenTable> {
    let grid = RadialGrid::from_spec(&config.grid)?;
    if !(config.xi_max > 0.0 && config.xi_max.is_finite()) {
        return Err(Error::Parameter(format!("xi_max must be positive, got {}", config.xi_max)));
    }
    let h = grid.log_step();
    if config.xi_max * grid.r_min() * h > 0.5 {
        return Err(Error::Resolution(format!(
            "xi_max = {} is not resolved at r_min = {} with step {h}",
            config.xi_max,
            grid.r_min()
        )));
    }
    let fact = Factorization::new(&grid);
    let n_nodes = fact.len();
    let total = fact.sturm_count(config.xi_max);
    if total < 3 {
        return Err(Error::Resolution("fewer than three modes below xi_max".into()));
    }
    let mut floor = 1e-3 / grid.r_max();
    while fact.sturm_count(floor) > 0 {
        floor *= 1e-3;
    }

    let xi: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|n| bisect_mode(&fact, n, floor, config.xi_max))
        .collect();

    let pairs: Vec<(Vec<f64>, Vec<f64>, f64)> =
        xi.par_iter().map(|&x| fact.eigenpair(x)).collect();

    let mut dxi = vec![0.0; total];
    for n in 0..total {
        dxi[n] = if n == 0 {
            xi[1] - xi[0]
        } else if n + 1 == total {
            xi[n] - xi[n - 1]
        } else {
            0.5 * (xi[n + 1] - xi[n - 1])
        };
    }

    let mut phi = Vec::with_capacity(total * n_nodes);
    let mut psi = Vec::with_capacity(total * n_nodes);
    let mut match_residual = Vec::with_capacity(total);
    for (p, g, m) in pairs {
        phi.extend_from_slice(&p);
        psi.extend_from_slice(&g);
        match_residual.push(m);
    }

    let p_nodes = fact.primary_grid().nodes().to_vec();
    let fits: Vec<(f64, f64, f64, f64)> = (0..total)
        .into_par_iter()
        .map(|n| {
            let s = 1.0 / dxi[n].sqrt();
            let col: Vec<f64> = phi[n * n_nodes..(n + 1) * n_nodes].iter().map(|v| v * s).collect();
            let (amp, ph, res) = far_field_fit(&p_nodes, &col, xi[n], h).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
            let rq = 1e-2 / xi[n].max(1.0);
            let j = fact.primary_grid().nearest(rq);
            let q = col[j] / h_pair(1, p_nodes[j]).0;
            (amp, ph, res, q.abs())
        })
        .collect();

    let table = EigenTable {
        config: *config,
        fact,
        xi,
        dxi,
        phi,
        psi,
        amplitude: fits.iter().map(|f| f.0).collect(),
        phase: fits.iter().map(|f| f.1).collect(),
        fit_residual: fits.iter().map(|f| f.2).collect(),
        match_residual,
        q: fits.iter().map(|f| f.3).collect(),
    };
    table.validate()?;
    Ok(table)
}

impl EigenTable {
    pub(crate) fn validate(&self) -> Result<()> {
        if let Some((n, m)) = self
            .match_residual
            .iter()
            .enumerate()
            .find(|(_, &m)| !(m <= MATCH_TOLERANCE))
        {
            return Err(Error::Resolution(format!(
                "mode {n} (xi = {}) matched with residual {m}",
                self.xi[n]
            )));
        }
        if let Some((n, r)) = self
            .fit_residual
            .iter()
            .enumerate()
            .find(|(_, r)| r.is_finite() && **r > FIT_TOLERANCE)
        {
            return Err(Error::Resolution(format!(
                "far-field fit of mode {n} (xi = {}) has residual {r}",
                self.xi[n]
            )));
        }
        Ok(())
    }

    pub fn config(&self) -> &TableConfig {
        &self.config
    }

    pub fn factorization(&self) -> &Factorization {
        &self.fact
    }

    pub fn field_grid(&self) -> &RadialGrid {
        self.fact.field_grid()
    }

    pub fn primary_grid(&self) -> &RadialGrid {
        self.fact.primary_grid()
    }

    pub fn n_modes(&self) -> usize {
        self.xi.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.fact.len()
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Quadrature weights Δξ_n in frequency.
    pub fn dxi(&self) -> &[f64] {
        &self.dxi
    }

    pub fn xi_max(&self) -> f64 {
        self.config.xi_max
    }

    /// Unit-norm discrete mode of H_d on the primary grid.
    pub fn phi_unit(&self, n: usize) -> &[f64] {
        let k = self.n_nodes();
        &self.phi[n * k..(n + 1) * k]
    }

    /// Unit-norm discrete mode of H̃_d on the field grid.
    pub fn psi_unit(&self, n: usize) -> &[f64] {
        let k = self.n_nodes();
        &self.psi[n * k..(n + 1) * k]
    }

    /// φ_ξ in the continuum normalization.
    pub fn phi(&self, n: usize) -> Vec<f64> {
        let s = 1.0 / self.dxi[n].sqrt();
        self.phi_unit(n).iter().map(|v| v * s).collect()
    }

    /// ψ_ξ in the continuum normalization.
    pub fn psi(&self, n: usize) -> Vec<f64> {
        let s = 1.0 / self.dxi[n].sqrt();
        self.psi_unit(n).iter().map(|v| v * s).collect()
    }

    /// Far-field amplitude relative to √(2/π) r^{-1/2}; NaN where no window fits.
    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn fit_residual(&self) -> &[f64] {
        &self.fit_residual
    }

    pub fn match_residual(&self) -> &[f64] {
        &self.match_residual
    }

    /// q(ξ) = φ_ξ(r)/h₁(r) read at r = 10⁻²/max(1, ξ).
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Mode index closest to ξ in log distance.
    pub fn nearest_mode(&self, xi: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (n, &x) in self.xi.iter().enumerate() {
            let d = (x / xi).ln().abs();
            if d < dist {
                dist = d;
                best = n;
            }
        }
        best
    }

    pub fn grid_hash(&self) -> String {
        self.field_grid().hash()
    }

    /// SHA-256 over the configuration, frequencies and mode matrices.
    pub fn table_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.grid_hash().as_bytes());
        h.update(self.config.xi_max.to_le_bytes());
        for v in self.xi.iter().chain(&self.dxi).chain(&self.phi).chain(&self.psi) {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_table() -> EigenTable {
        build_eigenbasis(&TableConfig {
            grid: GridSpec {
                r_min: 1e-3,
                r_max: 1e3,
                n: 1200,
            },
            xi_max: 8.0,
        })
        .unwrap()
    }

    #[test]
    fn modes_are_orthonormal_and_conjugate() {
        let t = small_table();
        let wp = t.primary_grid().weights();
        let wd = t.field_grid().weights();
        for &(a, b) in &[(0usize, 0usize), (3, 3), (3, 4), (10, 200), (t.n_modes() - 1, t.n_modes() - 1)] {
            let pa = t.phi_unit(a);
            let pb = t.phi_unit(b);
            let dot: f64 = (0..t.n_nodes()).map(|j| pa[j] * pb[j] * wp[j]).sum();
            let ga = t.psi_unit(a);
            let gb = t.psi_unit(b);
            let dg: f64 = (0..t.n_nodes()).map(|j| ga[j] * gb[j] * wd[j]).sum();
            let e = if a == b { 1.0 } else { 0.0 };
            assert!((dot - e).abs() < 1e-9, "phi {a},{b}: {dot}");
            assert!((dg - e).abs() < 1e-9, "psi {a},{b}: {dg}");
        }
        for n in [0, 7, t.n_modes() / 2, t.n_modes() - 1] {
            let l = t.factorization().apply_l(t.phi_unit(n));
            let err: f64 = l
                .iter()
                .zip(t.psi_unit(n))
                .zip(wd)
                .map(|((x, y), w)| (x - t.xi()[n] * y).powi(2) * w)
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-8 * t.xi()[n], "mode {n}: {err}");
        }
    }

    #[test]
    fn frequencies_increase_and_end_below_max() {
        let t = small_table();
        assert!(t.xi().windows(2).all(|w| w[1] > w[0]));
        assert!(*t.xi().last().unwrap() <= 8.0);
        assert_eq!(t.factorization().sturm_count(8.0), t.n_modes());
    }
}
