use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::EigenTable;
use crate::error::{Error, Result};
use crate::field::{Parity, RadialField, Scalar};

/// Spectral frame: H acts on the primary grid, H̃ on the field grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    H,
    Ht,
}

/// Values F f(ξ_n) in the continuum normalization; pair with `EigenTable::dxi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs<T> {
    pub frame: Frame,
    pub values: Vec<T>,
}

impl<T: Scalar> SpectralCoeffs<T> {
    /// Σ Δξ |F(ξ)|²
    pub fn mass(&self, table: &EigenTable) -> f64 {
        self.values
            .iter()
            .zip(table.dxi())
            .map(|(v, d)| v.abs_sqr() * d)
            .sum()
    }
}

fn modes(table: &EigenTable, frame: Frame, n: usize) -> &[f64] {
    match frame {
        Frame::H => table.phi_unit(n),
        Frame::Ht => table.psi_unit(n),
    }
}

fn weights(table: &EigenTable, frame: Frame) -> &[f64] {
    match frame {
        Frame::H => table.primary_grid().weights(),
        Frame::Ht => table.field_grid().weights(),
    }
}

/// (Σ m a, Σ m b) with four independent partial sums.
fn dot2(m: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut sa = [0.0; 4];
    let mut sb = [0.0; 4];
    let (mc, ac, bc) = (m.chunks_exact(4), a.chunks_exact(4), b.chunks_exact(4));
    let (mr, ar, br) = (mc.remainder(), ac.remainder(), bc.remainder());
    for ((m, a), b) in mc.zip(ac).zip(bc) {
        for k in 0..4 {
            sa[k] += m[k] * a[k];
            sb[k] += m[k] * b[k];
        }
    }
    let mut x = (sa[0] + sa[1]) + (sa[2] + sa[3]);
    let mut y = (sb[0] + sb[1]) + (sb[2] + sb[3]);
    for ((m, a), b) in mr.iter().zip(ar).zip(br) {
        x += m * a;
        y += m * b;
    }
    (x, y)
}

/// Discrete coefficients c_n = ⟨mode_n, f⟩ (unit-norm modes).
pub(crate) fn forward_unit<T: Scalar>(table: &EigenTable, f: &[T], frame: Frame) -> Vec<T> {
    let w = weights(table, frame);
    let (re, im): (Vec<f64>, Vec<f64>) = f
        .iter()
        .zip(w)
        .map(|(&v, &x)| {
            let (a, b) = v.parts();
            (a * x, b * x)
        })
        .unzip();
    (0..table.n_modes())
        .into_par_iter()
        .map(|n| {
            let (a, b) = dot2(modes(table, frame, n), &re, &im);
            T::from_parts(a, b)
        })
        .collect()
}

/// f_j = Σ_n c_n mode_n(j), parallel over blocks of nodes.
pub(crate) fn inverse_unit<T: Scalar>(table: &EigenTable, c: &[T], frame: Frame) -> Vec<T> {
    const BLOCK: usize = 512;
    let n_nodes = table.n_nodes();
    let parts: Vec<(f64, f64)> = c.iter().map(|v| v.parts()).collect();
    let mut out = vec![T::default(); n_nodes];
    out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
        let start = b * BLOCK;
        let len = chunk.len();
        let mut re = vec![0.0; len];
        let mut im = vec![0.0; len];
        for (n, &(cr, ci)) in parts.iter().enumerate() {
            if cr == 0.0 && ci == 0.0 {
                continue;
            }
            let m = &modes(table, frame, n)[start..start + len];
            for ((r, i), &v) in re.iter_mut().zip(im.iter_mut()).zip(m) {
                *r += cr * v;
                *i += ci * v;
            }
        }
        for ((o, r), i) in chunk.iter_mut().zip(re).zip(im) {
            *o = T::from_parts(r, i);
        }
    });
    out
}

/// F f(ξ_n) = Σ_j w_j mode_ξ(r_j) f(r_j).
pub fn ft_forward<T: Scalar>(
    table: &EigenTable,
    f: &RadialField<T>,
    frame: Frame,
) -> Result<SpectralCoeffs<T>> {
    if f.len() != table.n_nodes() {
        return Err(Error::Shape {
            expected: table.n_nodes(),
            got: f.len(),
        });
    }
    let unit = forward_unit(table, f.values(), frame);
    let values: Vec<T> = unit
        .into_iter()
        .zip(table.dxi())
        .map(|(c, d)| c * (1.0 / d.sqrt()))
        .collect();
    let out = SpectralCoeffs { frame, values };
    let total = f.norm_l2(match frame {
        Frame::H => table.primary_grid(),
        Frame::Ht => table.field_grid(),
    });
    let missing = 1.0 - out.mass(table) / (total * total).max(f64::MIN_POSITIVE);
    if total > 0.0 && missing > 1e-2 {
        log::warn!("{:.2}% of the L2 mass lies above the tabulated frequencies", 100.0 * missing);
    }
    Ok(out)
}

/// f(r) = Σ_n Δξ_n mode_ξn(r) F(ξ_n).
pub fn ft_inverse<T: Scalar>(
    table: &EigenTable,
    c: &SpectralCoeffs<T>,
    parity: Parity,
) -> Result<RadialField<T>> {
    if c.values.len() != table.n_modes() {
        return Err(Error::Shape {
            expected: table.n_modes(),
            got: c.values.len(),
        });
    }
    let unit: Vec<T> = c
        .values
        .iter()
        .zip(table.dxi())
        .map(|(&v, d)| v * d.sqrt())
        .collect();
    Ok(RadialField::new(inverse_unit(table, &unit, c.frame), parity))
}

/// Fraction of ‖f‖² not captured by the table's modes.
pub fn truncation_fraction<T: Scalar>(table: &EigenTable, f: &RadialField<T>, frame: Frame) -> Result<f64> {
    let c = ft_forward(table, f, frame)?;
    let grid = match frame {
        Frame::H => table.primary_grid(),
        Frame::Ht => table.field_grid(),
    };
    let total = f.norm_l2(grid).powi(2);
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - c.mass(table) / total).max(0.0))
}
