use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fields::GaugeFields;
use super::frame::CoulombFrame;
use super::{from_matrix, minimal_rotation, orthogonality_defect, polar};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Parity, RealField};
use crate::grid::RadialGrid;
use crate::ops::half_step;
use crate::soliton::{h_pair, SphereProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconstructOptions {
    /// The Picard problem is solved on [first node ≥ r_match, r_max].
    pub r_match: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Inputs whose LX norm exceeds this are refused.
    pub smallness: f64,
    /// LX norm of ψ when the caller has it; `None` skips the check.
    pub lx_norm: Option<f64>,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            r_match: 50.0,
            tolerance: 1e-10,
            max_iterations: 200,
            smallness: 0.1,
            lx_norm: None,
        }
    }
}

const SPHERE_DRIFT_LIMIT: f64 = 1e-6;
const ROW_LIMIT: f64 = 1e-5;

/// ∫_{s_j}^{s_end} f ds for j ≥ lo, 4th order, reading only f[lo..]; entry j - lo.
fn cumulative_from_right(f: &[Complex64], lo: usize, h: f64) -> Vec<Complex64> {
    let n = f.len();
    let c = h / 24.0;
    let mut out = vec![Complex64::default(); n - lo];
    let mut acc = Complex64::default();
    acc += (f[n - 4] - f[n - 3] * 5.0 + f[n - 2] * 19.0 + f[n - 1] * 9.0) * c;
    out[n - 2 - lo] = acc;
    for j in (lo + 1..n - 2).rev() {
        acc += (-f[j - 1] + f[j] * 13.0 + f[j + 1] * 13.0 - f[j + 2]) * c;
        out[j - lo] = acc;
    }
    acc += (f[lo] * 9.0 + f[lo + 1] * 19.0 - f[lo + 2] * 5.0 + f[lo + 3]) * c;
    out[0] = acc;
    out
}

/// Solve ∂_rA2 = Im(ψψ̄2) + |ψ2|²/r, ∂_rψ2 = iA2ψ − A2ψ2/r with (ψ2, A2) → (ih1, h3).
///
/// Near r_max the unknown is written ψ2 = ih1 + ig + Ψ with g = L⁻¹ψ and Ψ the
/// fixed point of Ψ = −h1∫_r^∞ h1⁻¹(i(A2−1)ψ + (h3−A2)ψ2/s) ds. Inside r_match
/// the system is integrated inward with RK4 and projected back onto the sphere.
pub fn reconstruct_fields(
    grid: &RadialGrid,
    psi: &ComplexField,
    opts: &ReconstructOptions,
) -> Result<(ComplexField, RealField)> {
    psi.check_len(grid)?;
    if !psi.all_finite() {
        return Err(Error::Parameter("reduced field has non-finite samples".into()));
    }
    if let Some(lx) = opts.lx_norm {
        if lx > opts.smallness {
            return Err(Error::Smallness(format!(
                "LX norm {lx:.3e} exceeds the admissible {:.3e}",
                opts.smallness
            )));
        }
    }
    let n = grid.len();
    let h = grid.log_step();
    let lo = grid
        .first_at_or_above(opts.r_match)
        .filter(|&j| j >= 2 && j + 8 <= n)
        .ok_or_else(|| Error::Parameter(format!("r_match = {} is not inside the grid", opts.r_match)))?;
    let r = grid.nodes();
    let p = psi.values();
    let (h1, h3): (Vec<f64>, Vec<f64>) = r.iter().map(|&x| h_pair(1, x)).unzip();
    let i = Complex64::i();

    // g = L⁻¹ψ = −h1 ∫_r^∞ ψ/h1 dr, in s the integrand is r ψ/h1.
    let weighted: Vec<Complex64> = (0..n)
        .map(|j| if j >= lo { p[j] * (r[j] / h1[j]) } else { Complex64::default() })
        .collect();
    let g: Vec<Complex64> = cumulative_from_right(&weighted, lo, h)
        .iter()
        .enumerate()
        .map(|(k, c)| -c * h1[lo + k])
        .collect();

    let m = n - lo;
    let mut big = vec![Complex64::default(); m];
    let mut psi2 = vec![Complex64::default(); m];
    let mut a2 = vec![0.0; m];
    let mut last = f64::INFINITY;
    let mut converged = false;
    for it in 0..opts.max_iterations {
        let mut f = vec![Complex64::default(); n];
        for k in 0..m {
            let j = lo + k;
            let q = i * h1[j] + i * g[k] + big[k];
            let s2 = q.norm_sqr();
            if s2 > 1.0 {
                return Err(Error::Smallness(format!(
                    "|psi2| exceeds 1 at r = {:.3e} during the fixed-point iteration",
                    r[j]
                )));
            }
            psi2[k] = q;
            a2[k] = (1.0 - s2).sqrt();
        }
        for k in 0..m {
            let j = lo + k;
            let src = i * (a2[k] - 1.0) * p[j] + psi2[k] * ((h3[j] - a2[k]) / r[j]);
            f[j] = src * (r[j] / h1[j]);
        }
        let next: Vec<Complex64> = cumulative_from_right(&f, lo, h)
            .iter()
            .enumerate()
            .map(|(k, c)| -c * h1[lo + k])
            .collect();
        let step = next
            .iter()
            .zip(&big)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        big = next;
        if step <= opts.tolerance {
            converged = true;
            break;
        }
        if it >= 3 && step >= last {
            return Err(Error::Smallness(format!(
                "fixed-point iteration stopped contracting (increment {step:.3e})"
            )));
        }
        last = step;
    }
    if !converged {
        return Err(Error::Smallness(format!(
            "fixed-point iteration did not reach {:e} in {} steps",
            opts.tolerance, opts.max_iterations
        )));
    }
    let mut out_psi2 = vec![Complex64::default(); n];
    let mut out_a2 = vec![0.0; n];
    for k in 0..m {
        let q = i * h1[lo + k] + i * g[k] + big[k];
        out_psi2[lo + k] = q;
        out_a2[lo + k] = (1.0 - q.norm_sqr()).sqrt();
    }

    // Inward RK4 in s: ψ2' = i A2 rψ − A2 ψ2, A2' = Im(rψ ψ̄2) + |ψ2|².
    let rp: Vec<Complex64> = p.iter().zip(r).map(|(z, x)| z * x).collect();
    let rp_mid = half_step(&rp, Parity::Quadratic, h, true);
    let rhs = |q: Complex64, a: f64, s: Complex64| -> (Complex64, f64) {
        (i * a * s - a * q, (s * q.conj()).im + q.norm_sqr())
    };
    let (mut q, mut a) = (out_psi2[lo], out_a2[lo]);
    for j in (1..=lo).rev() {
        let (s0, sh, s1) = (rp[j], rp_mid[j], rp[j - 1]);
        let (kq1, ka1) = rhs(q, a, s0);
        let (kq2, ka2) = rhs(q - kq1 * (0.5 * h), a - ka1 * 0.5 * h, sh);
        let (kq3, ka3) = rhs(q - kq2 * (0.5 * h), a - ka2 * 0.5 * h, sh);
        let (kq4, ka4) = rhs(q - kq3 * h, a - ka3 * h, s1);
        q -= (kq1 + kq2 * 2.0 + kq3 * 2.0 + kq4) * (h / 6.0);
        a -= (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4) * h / 6.0;
        let norm = (q.norm_sqr() + a * a).sqrt();
        if (norm - 1.0).abs() > SPHERE_DRIFT_LIMIT {
            return Err(Error::IntegrationAccuracy(format!(
                "left the sphere by {:.2e} at r = {:.3e}",
                norm - 1.0,
                r[j - 1]
            )));
        }
        q /= norm;
        a /= norm;
        out_psi2[j - 1] = q;
        out_a2[j - 1] = a;
    }
    Ok((
        ComplexField::new(out_psi2, Parity::Odd),
        RealField::new(out_a2, Parity::Even),
    ))
}

/// Integrate ∂_s O = O · rR(ψ1) inward from the frame whose last row is
/// (−Im ψ2, Re ψ2, A2) at r_max; ū is the last column.
pub fn reconstruct_map(grid: &RadialGrid, fields: &GaugeFields) -> Result<(SphereProfile, CoulombFrame)> {
    fields.psi1.check_len(grid)?;
    fields.psi2.check_len(grid)?;
    fields.a2.check_len(grid)?;
    let n = grid.len();
    let h = grid.log_step();
    let r = grid.nodes();
    let row = |j: usize| {
        let q = fields.psi2.values()[j];
        Vector3::new(-q.im, q.re, fields.a2.values()[j])
    };
    let rp1: Vec<Complex64> = fields
        .psi1
        .values()
        .iter()
        .zip(r)
        .map(|(z, x)| z * x)
        .collect();
    let mid = half_step(&rp1, Parity::Odd, h, true);
    let gen = |z: Complex64| Matrix3::new(0.0, 0.0, z.re, 0.0, 0.0, z.im, -z.re, -z.im, 0.0);

    let top = row(n - 1);
    let top_norm = top.norm();
    if (top_norm - 1.0).abs() > 1e-6 {
        return Err(Error::Reconstruction(format!(
            "(psi2, A2) at r_max is off the sphere by {:.2e}",
            top_norm - 1.0
        )));
    }
    let mut o = minimal_rotation(top / top_norm).transpose();
    let mut mats = vec![[[0.0; 3]; 3]; n];
    mats[n - 1] = from_matrix(&o);
    let mut worst: f64 = 0.0;
    for j in (1..n).rev() {
        let (g0, gh, g1) = (gen(rp1[j]), gen(mid[j]), gen(rp1[j - 1]));
        let k1 = o * g0;
        let k2 = (o - k1 * (0.5 * h)) * gh;
        let k3 = (o - k2 * (0.5 * h)) * gh;
        let k4 = (o - k3 * h) * g1;
        let next = o - (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let drift = orthogonality_defect(&next);
        if drift > SPHERE_DRIFT_LIMIT {
            return Err(Error::IntegrationAccuracy(format!(
                "frame drifted by {drift:.2e} at r = {:.3e}",
                r[j - 1]
            )));
        }
        o = polar(&next);
        worst = worst.max((o.row(2).transpose() - row(j - 1)).abs().max());
        mats[j - 1] = from_matrix(&o);
    }
    if worst > ROW_LIMIT {
        return Err(Error::Reconstruction(format!(
            "last row departs from (-Im psi2, Re psi2, A2) by {worst:.2e}"
        )));
    }
    let frame = CoulombFrame { mats };
    let u: Vec<[f64; 3]> = (0..n).map(|j| frame.u(j)).collect();
    Ok((SphereProfile::from_vectors(1, &u), frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{coulomb_frame, derive_fields};
    use crate::grid::make_log_grid;
    use crate::soliton::{soliton_profile, SolitonParams};

    #[test]
    fn zero_field_gives_unit_soliton() {
        let grid = make_log_grid(1e-4, 1e4, 2048).unwrap();
        let z = ComplexField::zeros(grid.len(), Parity::Odd);
        let (psi2, a2) = reconstruct_fields(&grid, &z, &ReconstructOptions::default()).unwrap();
        let mut e: f64 = 0.0;
        for j in 0..grid.len() {
            let (h1, h3) = h_pair(1, grid.r(j));
            e = e.max((psi2.values()[j] - Complex64::new(0.0, h1)).norm());
            e = e.max((a2.values()[j] - h3).abs());
        }
        assert!(e < 1e-9, "{e:e}");
    }

    #[test]
    fn soliton_map_rebuilt_from_its_fields() {
        let grid = make_log_grid(1e-4, 1e4, 2048).unwrap();
        let p = SolitonParams::new(1, 0.4, 1.3).unwrap();
        let u = soliton_profile(&p, &grid);
        let fields = derive_fields(&u, &coulomb_frame(&u, &grid).unwrap(), &grid).unwrap();
        let (v, _) = reconstruct_map(&grid, &fields).unwrap();
        assert!(v.max_distance(&u) < 1e-8, "{:e}", v.max_distance(&u));
    }

    #[test]
    fn large_field_is_refused() {
        let grid = make_log_grid(1e-4, 1e4, 1024).unwrap();
        let psi = ComplexField::from_fn(&grid, Parity::Odd, |r| {
            Complex64::new(50.0 * r * (-(r - 60.0).powi(2) / 50.0).exp(), 0.0)
        });
        let opts = ReconstructOptions::default();
        assert!(matches!(reconstruct_fields(&grid, &psi, &opts), Err(Error::Smallness(_))));
        let flagged = ReconstructOptions {
            lx_norm: Some(0.5),
            ..opts
        };
        let z = ComplexField::zeros(grid.len(), Parity::Odd);
        assert!(matches!(reconstruct_fields(&grid, &z, &flagged), Err(Error::Smallness(_))));
    }
}
