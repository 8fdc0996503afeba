use num_complex::Complex64;

use super::frame::CoulombFrame;
use crate::error::{Error, Result};
use crate::field::{ComplexField, Parity, RealField};
use crate::grid::RadialGrid;
use crate::ops::r_dr_inverse;
use crate::soliton::SphereProfile;

/// Differentiated fields, connection coefficients and the reduced field.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFields {
    pub psi1: ComplexField,
    pub psi2: ComplexField,
    pub a2: RealField,
    pub a0: RealField,
    pub psi: ComplexField,
}

impl GaugeFields {
    /// Assemble from (ψ, ψ2, A2): ψ1 = ψ + iψ2/r and A0 from `compute_a0`.
    pub fn from_reduced(grid: &RadialGrid, psi: ComplexField, psi2: ComplexField, a2: RealField) -> Result<Self> {
        psi.check_len(grid)?;
        psi2.check_len(grid)?;
        a2.check_len(grid)?;
        let psi1 = ComplexField::new(
            psi.values()
                .iter()
                .zip(psi2.values())
                .zip(grid.nodes())
                .map(|((p, q), r)| p + Complex64::i() * q / r)
                .collect(),
            Parity::Even,
        );
        let a0 = compute_a0(grid, &psi, &psi2)?;
        Ok(GaugeFields {
            psi1,
            psi2,
            a2,
            a0,
            psi,
        })
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// max |A2² + |ψ2|² − 1|.
    pub fn sphere_defect(&self) -> f64 {
        self.a2
            .values()
            .iter()
            .zip(self.psi2.values())
            .map(|(a, p)| (a * a + p.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Sup-norm residuals of ∂_r A2 = Im(ψ1 ψ̄2) and ∂_r ψ2 = i A2 ψ1.
    pub fn compatibility_residual(&self, grid: &RadialGrid) -> (f64, f64) {
        let da2 = crate::ops::d_r(grid, &self.a2);
        let dpsi2 = crate::ops::d_r(grid, &self.psi2);
        let mut ra: f64 = 0.0;
        let mut rp: f64 = 0.0;
        for j in 0..self.len() {
            let (p1, p2, a) = (self.psi1.values()[j], self.psi2.values()[j], self.a2.values()[j]);
            ra = ra.max((da2[j] - (p1 * p2.conj()).im).abs());
            rp = rp.max((dpsi2[j] - Complex64::i() * a * p1).norm());
        }
        (ra, rp)
    }
}

/// ψ1 = ∂_rū·v̄ + i∂_rū·w̄, ψ2 = m(w̄3 − i v̄3), A2 = m ū3, ψ = ψ1 − iψ2/r.
pub fn derive_fields(u: &SphereProfile, frame: &CoulombFrame, grid: &RadialGrid) -> Result<GaugeFields> {
    for c in &u.u {
        c.check_len(grid)?;
    }
    if frame.len() != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got: frame.len(),
        });
    }
    let m = u.m as f64;
    let ds = u.d_s(grid);
    let n = grid.len();
    let mut psi1 = Vec::with_capacity(n);
    let mut psi2 = Vec::with_capacity(n);
    let mut a2 = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    for j in 0..n {
        let r = grid.r(j);
        let (v, w) = (frame.v(j), frame.w(j));
        let d = [ds[0][j] / r, ds[1][j] / r, ds[2][j] / r];
        let dot = |a: [f64; 3]| a[0] * d[0] + a[1] * d[1] + a[2] * d[2];
        let p1 = Complex64::new(dot(v), dot(w));
        let p2 = Complex64::new(m * w[2], -m * v[2]);
        psi1.push(p1);
        psi2.push(p2);
        a2.push(m * u.u[2].values()[j]);
        psi.push(p1 - Complex64::i() * p2 / r);
    }
    let psi = ComplexField::new(psi, Parity::Odd);
    let psi2 = ComplexField::new(psi2, Parity::Odd);
    let a0 = compute_a0(grid, &psi, &psi2)?;
    Ok(GaugeFields {
        psi1: ComplexField::new(psi1, Parity::Even),
        psi2,
        a2: RealField::new(a2, Parity::Even),
        a0,
        psi,
    })
}

/// A0 = −½|ψ|² + r⁻¹Im(ψ2ψ̄) + [r∂_r]⁻¹(|ψ|² − 2r⁻¹Im(ψ2ψ̄)), zero constant at infinity.
pub fn compute_a0(grid: &RadialGrid, psi: &ComplexField, psi2: &ComplexField) -> Result<RealField> {
    psi.check_len(grid)?;
    psi2.check_len(grid)?;
    let n = grid.len();
    let mut local = Vec::with_capacity(n);
    let mut source = Vec::with_capacity(n);
    for j in 0..n {
        let r = grid.r(j);
        let (p, q) = (psi.values()[j], psi2.values()[j]);
        let cross = (q * p.conj()).im / r;
        local.push(-0.5 * p.norm_sqr() + cross);
        source.push(p.norm_sqr() - 2.0 * cross);
    }
    let integral = r_dr_inverse(grid, &RealField::new(source, Parity::Even))?;
    Ok(RealField::new(
        local.iter().zip(integral.values()).map(|(a, b)| a + b).collect(),
        Parity::Even,
    ))
}
