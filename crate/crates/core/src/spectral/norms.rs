use serde::{Deserialize, Serialize};

use super::lp::{band_range, chi, covers_band};
use super::table::EigenTable;
use super::transform::{ft_forward, Frame, SpectralCoeffs};
use crate::error::Result;
use crate::field::{RadialField, Scalar};

/// A dyadic norm together with the share of mass in bands the table only
/// partially covers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub truncated_fraction: f64,
}

/// ‖P_k f‖ for every band with support on the table, from Plancherel.
pub fn band_norms<T: Scalar>(table: &EigenTable, c: &SpectralCoeffs<T>) -> Vec<(i32, f64)> {
    let (lo, hi) = band_range(table);
    (lo..=hi)
        .map(|k| {
            let s: f64 = c
                .values
                .iter()
                .zip(table.xi())
                .zip(table.dxi())
                .map(|((v, &x), d)| {
                    let w = chi(k, x);
                    w * w * v.abs_sqr() * d
                })
                .sum();
            (k, s.sqrt())
        })
        .collect()
}

fn truncated<T: Scalar>(table: &EigenTable, c: &SpectralCoeffs<T>) -> f64 {
    let total = c.mass(table);
    if total == 0.0 {
        return 0.0;
    }
    let (_, hi) = band_range(table);
    let partial: f64 = c
        .values
        .iter()
        .zip(table.xi())
        .zip(table.dxi())
        .map(|((v, &x), d)| {
            let w: f64 = (hi - 1..=hi)
                .filter(|&k| !covers_band(table, k))
                .map(|k| chi(k, x))
                .sum();
            w * v.abs_sqr() * d
        })
        .sum();
    partial / total
}

fn report(value: f64, truncated_fraction: f64) -> NormReport {
    if truncated_fraction > 1e-2 {
        log::warn!(
            "{:.2}% of the mass sits in bands the table only partially covers",
            100.0 * truncated_fraction
        );
    }
    NormReport {
        value,
        truncated_fraction,
    }
}

/// (Σ_{k≥0} 2^{2k}‖P_k u‖²)^{1/2} + Σ_{k<0} |k|⁻¹‖P_k u‖ on transform coefficients.
pub fn norm_x_coeffs<T: Scalar>(table: &EigenTable, c: &SpectralCoeffs<T>) -> NormReport {
    let mut high = 0.0;
    let mut low = 0.0;
    for (k, b) in band_norms(table, c) {
        if k >= 0 {
            high += 4f64.powi(k) * b * b;
        } else {
            low += b / (-k) as f64;
        }
    }
    report(high.sqrt() + low, truncated(table, c))
}

/// (Σ_{k≥0}‖P_k f‖²)^{1/2} + Σ_{k<0} (2^{-k}/|k|)‖P_k f‖ on transform coefficients.
pub fn norm_lx_coeffs<T: Scalar>(table: &EigenTable, c: &SpectralCoeffs<T>) -> NormReport {
    let mut high = 0.0;
    let mut low = 0.0;
    for (k, b) in band_norms(table, c) {
        if k >= 0 {
            high += b * b;
        } else {
            low += 2f64.powi(-k) / (-k) as f64 * b;
        }
    }
    report(high.sqrt() + low, truncated(table, c))
}

/// X norm of a function sampled on the primary grid.
pub fn norm_x<T: Scalar>(table: &EigenTable, u: &RadialField<T>) -> Result<NormReport> {
    Ok(norm_x_coeffs(table, &ft_forward(table, u, Frame::H)?))
}

/// LX norm of a function sampled on the field grid.
pub fn norm_lx<T: Scalar>(table: &EigenTable, f: &RadialField<T>) -> Result<NormReport> {
    Ok(norm_lx_coeffs(table, &ft_forward(table, f, Frame::Ht)?))
}

/// ‖u‖_X for the u with Lu = f, through F_H u(ξ) = F_H̃ f(ξ)/ξ.
///
/// This is the defining LX norm; `norm_lx` is the equivalent dyadic form in
/// the H̃ frame.
pub fn norm_lx_by_inversion<T: Scalar>(table: &EigenTable, f: &RadialField<T>) -> Result<NormReport> {
    let c = ft_forward(table, f, Frame::Ht)?;
    let u = SpectralCoeffs {
        frame: Frame::H,
        values: c
            .values
            .iter()
            .zip(table.xi())
            .map(|(&v, &x)| v * (1.0 / x))
            .collect(),
    };
    Ok(norm_x_coeffs(table, &u))
}
