//! Smooth dyadic partition of unity in frequency.
//!
//! With x = log₂ξ and S a C^∞ step rising on [-δ, δ], δ = 1/4,
//! χ_k(ξ) = S(x - k + ½) - S(x - k - ½). Then χ_k = 1 for |x - k| ≤ ¼,
//! χ_k = 0 for |x - k| ≥ ¾, and Σ_k χ_k = 1 exactly (telescoping).

use super::table::EigenTable;
use super::transform::{ft_forward, ft_inverse, Frame, SpectralCoeffs};
use crate::error::{Error, Result};
use crate::field::{Parity, RadialField, Scalar};

pub const HALF_WIDTH: f64 = 0.25;

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^∞ step: 0 for y ≤ -δ, 1 for y ≥ δ.
pub fn smooth_step(y: f64) -> f64 {
    let t = (y + HALF_WIDTH) / (2.0 * HALF_WIDTH);
    let a = bump(t);
    let b = bump(1.0 - t);
    if a + b == 0.0 {
        return if t > 0.5 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

pub fn chi(k: i32, xi: f64) -> f64 {
    let x = xi.log2() - k as f64;
    smooth_step(x + 0.5) - smooth_step(x - 0.5)
}

/// All bands with support on the tabulated frequencies.
pub fn band_range(table: &EigenTable) -> (i32, i32) {
    let lo = (table.xi()[0].log2() - 0.75).ceil() as i32;
    let hi = (table.xi()[table.n_modes() - 1].log2() + 0.75).floor() as i32;
    (lo, hi)
}

/// Bands fully inside the tabulated range. The spectrum is complete below,
/// so only the top edge truncates.
pub fn covers_band(table: &EigenTable, k: i32) -> bool {
    2f64.powf(k as f64 + 0.75) <= table.xi_max()
}

pub fn band_multiplier(table: &EigenTable, k: i32) -> Vec<f64> {
    table.xi().iter().map(|&x| chi(k, x)).collect()
}

pub fn lp_project_coeffs<T: Scalar>(table: &EigenTable, c: &SpectralCoeffs<T>, k: i32) -> SpectralCoeffs<T> {
    SpectralCoeffs {
        frame: c.frame,
        values: c
            .values
            .iter()
            .zip(table.xi())
            .map(|(&v, &x)| v * chi(k, x))
            .collect(),
    }
}

/// P_k f: multiply the transform by χ_k and invert.
pub fn lp_project<T: Scalar>(
    table: &EigenTable,
    f: &RadialField<T>,
    k: i32,
    frame: Frame,
) -> Result<RadialField<T>> {
    if !covers_band(table, k) {
        return Err(Error::OutOfRange(format!(
            "band {k} reaches {:.3} above the tabulated xi_max = {}",
            2f64.powf(k as f64 + 0.75),
            table.xi_max()
        )));
    }
    let c = ft_forward(table, f, frame)?;
    ft_inverse(table, &lp_project_coeffs(table, &c, k), f.parity())
}

/// Kernel row K_k(r_i, ·) = Σ_n Δξ_n χ_k(ξ_n) mode_ξn(r_i) mode_ξn(·) in the given frame.
pub fn lp_kernel_row(table: &EigenTable, k: i32, i: usize, frame: Frame) -> Vec<f64> {
    let c: Vec<f64> = (0..table.n_modes())
        .map(|n| {
            let m = match frame {
                Frame::H => table.phi_unit(n),
                Frame::Ht => table.psi_unit(n),
            };
            chi(k, table.xi()[n]) * m[i]
        })
        .collect();
    let coeffs = SpectralCoeffs {
        frame,
        values: c
            .iter()
            .zip(table.dxi())
            .map(|(v, d)| v / d.sqrt())
            .collect(),
    };
    ft_inverse(table, &coeffs, Parity::Even)
        .map(|f| f.into_values())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(chi(2, 4.0), 1.0);
        assert_eq!(chi(2, 2f64.powf(2.24)), 1.0);
        assert_eq!(chi(2, 2f64.powf(2.76)), 0.0);
        assert_eq!(chi(2, 2f64.powf(1.24)), 0.0);
        assert!(chi(2, 2f64.powf(2.5)) > 0.0 && chi(2, 2f64.powf(2.5)) < 1.0);
    }

    proptest! {
        #[test]
        fn partition_of_unity(x in -14.0f64..9.0) {
            let xi = 2f64.powf(x);
            let s: f64 = (-20..12).map(|k| chi(k, xi)).sum();
            prop_assert!((s - 1.0).abs() < 1e-14);
        }

        #[test]
        fn bands_two_apart_are_disjoint(x in -14.0f64..9.0, k in -12i32..8) {
            let xi = 2f64.powf(x);
            prop_assert_eq!(chi(k, xi) * chi(k + 2, xi), 0.0);
        }
    }
}
