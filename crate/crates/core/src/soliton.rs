use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Parity, RealField};
use crate::grid::RadialGrid;
use crate::ops::d_s;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub m: u32,
    pub alpha: f64,
    pub lambda: f64,
}

impl SolitonParams {
    pub fn new(m: u32, alpha: f64, lambda: f64) -> Result<Self> {
        let p = SolitonParams { m, alpha, lambda };
        p.validate()?;
        Ok(p)
    }

    /// Q with m = 1, α = 0, λ = 1.
    pub fn unit() -> Self {
        SolitonParams {
            m: 1,
            alpha: 0.0,
            lambda: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Parameter("equivariance class must be at least 1".into()));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) || !self.alpha.is_finite() {
            return Err(Error::Parameter(format!(
                "need finite alpha and lambda > 0, got alpha={}, lambda={}",
                self.alpha, self.lambda
            )));
        }
        Ok(())
    }
}

/// (h1, h3) = (sech(m ln r), tanh(m ln r)), i.e. 2r^m/(r^{2m}+1) and (r^{2m}-1)/(r^{2m}+1).
pub fn h_pair(m: u32, r: f64) -> (f64, f64) {
    let x = m as f64 * r.ln();
    (1.0 / x.cosh(), x.tanh())
}

pub fn h_profiles(m: u32, grid: &RadialGrid) -> (RealField, RealField) {
    let parity = if m == 1 { Parity::Odd } else { Parity::Quadratic };
    let h1 = RealField::from_fn(grid, parity, |r| h_pair(m, r).0);
    let h3 = RealField::from_fn(grid, Parity::Even, |r| h_pair(m, r).1);
    (h1, h3)
}

/// Radial profile ū of an equivariant map, u(r, θ) = e^{mθR} ū(r).
#[derive(Debug, Clone, PartialEq)]
pub struct SphereProfile {
    pub m: u32,
    pub u: [RealField; 3],
}

impl SphereProfile {
    pub fn from_vectors(m: u32, v: &[[f64; 3]]) -> Self {
        let parity = if m == 1 { Parity::Odd } else { Parity::Quadratic };
        let comp = |k: usize, p: Parity| RealField::new(v.iter().map(|x| x[k]).collect(), p);
        SphereProfile {
            m,
            u: [comp(0, parity), comp(1, parity), comp(2, Parity::Even)],
        }
    }

    pub fn len(&self) -> usize {
        self.u[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn at(&self, j: usize) -> [f64; 3] {
        [self.u[0].values()[j], self.u[1].values()[j], self.u[2].values()[j]]
    }

    pub fn vectors(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|j| self.at(j)).collect()
    }

    pub fn max_sphere_defect(&self) -> f64 {
        (0..self.len())
            .map(|j| {
                let v = self.at(j);
                (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_distance(&self, other: &SphereProfile) -> f64 {
        (0..self.len())
            .map(|j| {
                let (a, b) = (self.at(j), other.at(j));
                (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// d_s ū, componentwise.
    pub fn d_s(&self, grid: &RadialGrid) -> [Vec<f64>; 3] {
        let h = grid.log_step();
        [
            d_s(self.u[0].values(), self.u[0].parity(), h),
            d_s(self.u[1].values(), self.u[1].parity(), h),
            d_s(self.u[2].values(), self.u[2].parity(), h),
        ]
    }
}

pub fn soliton_profile(p: &SolitonParams, grid: &RadialGrid) -> SphereProfile {
    let (c, s) = ((p.m as f64 * p.alpha).cos(), (p.m as f64 * p.alpha).sin());
    let v: Vec<[f64; 3]> = grid
        .nodes()
        .iter()
        .map(|&r| {
            let (h1, h3) = h_pair(p.m, p.lambda * r);
            [h1 * c, h1 * s, h3]
        })
        .collect();
    SphereProfile::from_vectors(p.m, &v)
}

/// Frame (v̄, w̄, ū) of a soliton, normalized to the identity at infinity.
/// Rows are returned as a row-major 3x3 matrix per node.
pub fn soliton_frame(p: &SolitonParams, grid: &RadialGrid) -> Vec<[[f64; 3]; 3]> {
    let (c, s) = ((p.m as f64 * p.alpha).cos(), (p.m as f64 * p.alpha).sin());
    grid.nodes()
        .iter()
        .map(|&r| {
            let (h1, h3) = h_pair(p.m, p.lambda * r);
            [
                [h3 * c * c + s * s, (h3 - 1.0) * s * c, h1 * c],
                [(h3 - 1.0) * s * c, h3 * s * s + c * c, h1 * s],
                [-h1 * c, -h1 * s, h3],
            ]
        })
        .collect()
}

/// Closed-form (ψ1, ψ2, A2) of a soliton.
pub fn soliton_gauge_fields(
    p: &SolitonParams,
    grid: &RadialGrid,
) -> (ComplexField, ComplexField, RealField) {
    let m = p.m as f64;
    let phase = Complex64::from_polar(1.0, m * p.alpha);
    let parity = if p.m == 1 { Parity::Odd } else { Parity::Quadratic };
    let psi1 = ComplexField::from_fn(grid, Parity::Even, |r| {
        phase * (-m * h_pair(p.m, p.lambda * r).0 / r)
    });
    let psi2 = ComplexField::from_fn(grid, parity, |r| {
        Complex64::i() * phase * (m * h_pair(p.m, p.lambda * r).0)
    });
    let a2 = RealField::from_fn(grid, Parity::Even, |r| m * h_pair(p.m, p.lambda * r).1);
    (psi1, psi2, a2)
}

/// Energy of a soliton from the analytic integrand 2m² h1(λr)²/r².
pub fn soliton_energy(p: &SolitonParams, grid: &RadialGrid) -> f64 {
    let m = p.m as f64;
    let f: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| {
            let h1 = h_pair(p.m, p.lambda * r).0;
            2.0 * m * m * h1 * h1 / (r * r)
        })
        .collect();
    PI * grid.integrate(&f)
}

/// E(u) = π ∫ (|∂_r ū|² + m²/r² (ū1² + ū2²)) r dr with finite-difference derivatives.
pub fn energy(u: &SphereProfile, grid: &RadialGrid) -> Result<f64> {
    for c in &u.u {
        c.check_len(grid)?;
    }
    let m = u.m as f64;
    let ds = u.d_s(grid);
    let n = grid.len();
    for &j in &[0, n - 1] {
        let v = u.at(j);
        if v[0] * v[0] + v[1] * v[1] > 1e-4 {
            log::warn!(
                "energy integrand does not decay at r = {}: u1^2 + u2^2 = {}",
                grid.r(j),
                v[0] * v[0] + v[1] * v[1]
            );
        }
    }
    let f: Vec<f64> = (0..n)
        .map(|j| {
            let v = u.at(j);
            let r2 = grid.r(j) * grid.r(j);
            (ds[0][j].powi(2) + ds[1][j].powi(2) + ds[2][j].powi(2) + m * m * (v[0] * v[0] + v[1] * v[1]))
                / r2
        })
        .collect();
    Ok(PI * grid.integrate(&f))
}

/// Ḣ¹-type distance (∫ |∂_r δ|² + m²/r² (δ1² + δ2²) r dr)^{1/2}, δ = u - v.
pub fn hdot1_distance(u: &SphereProfile, v: &SphereProfile, grid: &RadialGrid) -> Result<f64> {
    if u.len() != grid.len() || v.len() != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got: u.len().min(v.len()),
        });
    }
    let m = u.m as f64;
    let diff = SphereProfile {
        m: u.m,
        u: [u.u[0].sub(&v.u[0]), u.u[1].sub(&v.u[1]), u.u[2].sub(&v.u[2])],
    };
    let ds = diff.d_s(grid);
    let f: Vec<f64> = (0..grid.len())
        .map(|j| {
            let d = diff.at(j);
            let r2 = grid.r(j) * grid.r(j);
            (ds[0][j].powi(2) + ds[1][j].powi(2) + ds[2][j].powi(2) + m * m * (d[0] * d[0] + d[1] * d[1]))
                / r2
        })
        .collect();
    Ok(grid.integrate(&f).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_grid;

    fn grid() -> RadialGrid {
        make_log_grid(1e-4, 1e4, 4096).unwrap()
    }

    #[test]
    fn profile_values_at_one() {
        assert_eq!(h_pair(1, 1.0), (1.0, 0.0));
        assert_eq!(h_pair(2, 1.0), (1.0, 0.0));
        let (h1, h3) = h_pair(1, 1e8);
        assert!(h1 < 1e-7 && (h3 - 1.0).abs() < 1e-15);
        let r: f64 = 0.37;
        let (h1, h3) = h_pair(2, r);
        assert!((h1 - 2.0 * r.powi(2) / (r.powi(4) + 1.0)).abs() < 1e-15);
        assert!((h3 - (r.powi(4) - 1.0) / (r.powi(4) + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rotated_soliton_at_one() {
        let g = make_log_grid(0.5, 2.0, 17).unwrap();
        let p = SolitonParams::new(1, PI / 2.0, 1.0).unwrap();
        let u = soliton_profile(&p, &g);
        let v = u.at(8);
        assert!(v[0].abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15 && v[2].abs() < 1e-15);
        assert!(u.max_sphere_defect() < 1e-14);
    }

    #[test]
    fn energies_are_quantized() {
        let g = grid();
        for m in [1u32, 2] {
            for (a, l) in [(0.0, 1.0), (0.3, 1.2)] {
                let p = SolitonParams::new(m, a, l).unwrap();
                let e_fd = energy(&soliton_profile(&p, &g), &g).unwrap();
                let e_an = soliton_energy(&p, &g);
                let exact = 4.0 * PI * m as f64;
                assert!((e_an / exact - 1.0).abs() < 1e-5, "analytic m={m}: {e_an}");
                assert!((e_fd / exact - 1.0).abs() < 1e-5, "fd m={m}: {e_fd}");
            }
        }
    }

    #[test]
    fn gauge_fields_of_soliton() {
        let g = grid();
        let p = SolitonParams::unit();
        let (psi1, psi2, a2) = soliton_gauge_fields(&p, &g);
        let j = g.nearest(1.0);
        let z = psi2.eval(&g, 1.0).unwrap();
        assert!((z - Complex64::i()).norm() < 1e-9);
        assert!(a2.eval(&g, 1.0).unwrap().abs() < 1e-9);
        for k in 0..g.len() {
            let r = g.r(k);
            let psi = psi1.values()[k] - Complex64::i() * psi2.values()[k] / r;
            assert!(psi.norm() < 1e-12);
            assert!((psi2.values()[k].norm_sqr() + a2.values()[k].powi(2) - 1.0).abs() < 1e-14);
        }
        assert!(j > 0);
    }

    #[test]
    fn frame_columns_match_profile_and_are_orthonormal() {
        let g = make_log_grid(1e-2, 1e2, 64).unwrap();
        let p = SolitonParams::new(1, 0.7, 1.3).unwrap();
        let u = soliton_profile(&p, &g);
        let o = soliton_frame(&p, &g);
        for (j, m) in o.iter().enumerate() {
            for a in 0..3 {
                assert!((m[a][2] - u.at(j)[a]).abs() < 1e-15);
                for b in 0..3 {
                    let dot: f64 = (0..3).map(|k| m[k][a] * m[k][b]).sum();
                    let e = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - e).abs() < 1e-14);
                }
            }
        }
    }
}
