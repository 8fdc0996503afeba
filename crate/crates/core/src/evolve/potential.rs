use crate::error::{Error, Result};
use crate::field::{Parity, RealField};
use crate::gauge::GaugeFields;
use crate::grid::RadialGrid;
use crate::soliton::h_pair;

/// A2 − h3(λr). Where A2 and h3 share a sign away from zero the difference
/// is formed as (h1² − |ψ2|²)/(A2 + h3), free of cancellation.
pub fn delta_a2(grid: &RadialGrid, fields: &GaugeFields, lambda: f64) -> RealField {
    let v = grid
        .nodes()
        .iter()
        .zip(fields.a2.values())
        .zip(fields.psi2.values())
        .map(|((&r, &a), q)| {
            let (h1, h3) = h_pair(1, lambda * r);
            let s = a + h3;
            if s.abs() > 0.5 {
                (h1 - q.norm()) * (h1 + q.norm()) / s
            } else {
                a - h3
            }
        })
        .collect();
    RealField::new(v, Parity::Even)
}

fn assemble(grid: &RadialGrid, fields: &GaugeFields, lambda: f64) -> Result<RealField> {
    let d = delta_a2(grid, fields, lambda);
    let n = grid.len();
    let ratio: Vec<f64> = (0..6.min(n)).map(|j| d.values()[j] / (grid.r(j) * grid.r(j))).collect();
    let reference = ratio[3..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(j) = (0..3).find(|&j| ratio[j].abs() > 10.0 * reference + 1e-6) {
        return Err(Error::Consistency(format!(
            "(A2 - h3)/r^2 = {:.3e} at node {j} against {:.3e} further out",
            ratio[j], reference
        )));
    }
    let v = (0..n)
        .map(|j| {
            let r = grid.r(j);
            let (q, p) = (fields.psi2.values()[j], fields.psi.values()[j]);
            fields.a0.values()[j] - 2.0 * d.values()[j] / (r * r) - (q * p.conj()).im / r
        })
        .collect();
    Ok(RealField::new(v, Parity::Even))
}

/// W = A0 − 2(A2 − h3)/r² − r⁻¹Im(ψ2ψ̄).
pub fn potential_w(grid: &RadialGrid, fields: &GaugeFields) -> Result<RealField> {
    assemble(grid, fields, 1.0)
}

/// The same grouping recentred on the soliton of scale λ.
pub fn potential_w_recentered(grid: &RadialGrid, fields: &GaugeFields, lambda: f64) -> Result<RealField> {
    if !(lambda > 0.0) {
        return Err(Error::Parameter(format!("scale must be positive, got {lambda}")));
    }
    assemble(grid, fields, lambda)
}
