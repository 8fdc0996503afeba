use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField, Parity, RealField};
use crate::gauge::{coulomb_frame, derive_fields};
use crate::grid::RadialGrid;
use crate::soliton::{soliton_profile, SolitonParams, SphereProfile};
use crate::spectral::lp::smooth_step;
use crate::spectral::{ft_forward, norm_x, EigenTable, Frame};

/// Great-circle interpolation from a to b, t ∈ [0, 1].
fn slerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    let dot = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    let omega = dot.acos();
    let (wa, wb) = if omega < 1e-12 {
        (1.0 - t, t)
    } else {
        let s = omega.sin();
        (((1.0 - t) * omega).sin() / s, (t * omega).sin() / s)
    };
    let v = [wa * a[0] + wb * b[0], wa * a[1] + wb * b[1], wa * a[2] + wb * b[2]];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// a for r ≤ r0, b for r ≥ r1, great-circle path with a C^∞ ramp in ln r between.
pub fn geodesic_glue(grid: &RadialGrid, a: &SphereProfile, b: &SphereProfile, r0: f64, r1: f64) -> SphereProfile {
    let (s0, s1) = (r0.ln(), r1.ln());
    let v: Vec<[f64; 3]> = (0..grid.len())
        .map(|j| {
            // smooth_step runs from 0 to 1 on [-1/4, 1/4].
            let y = ((grid.r(j).ln() - s0) / (s1 - s0) - 0.5) * 0.5;
            slerp(a.at(j), b.at(j), smooth_step(y))
        })
        .collect();
    SphereProfile::from_vectors(a.m, &v)
}

/// Q_{α0,λ0} inside r = 1/(2ε), Q outside r = 2/ε.
pub fn make_instability_data(eps: f64, gamma: f64, alpha0: f64, lambda0: f64, grid: &RadialGrid) -> Result<SphereProfile> {
    if !(eps > 0.0 && eps <= 0.2) {
        return Err(Error::Parameter(format!("eps must lie in (0, 0.2], got {eps}")));
    }
    let offset = alpha0.abs() + (lambda0 - 1.0).abs();
    if offset < 0.5 * gamma || offset > 2.0 * gamma {
        return Err(Error::Parameter(format!(
            "|alpha0| + |lambda0 - 1| = {offset} must lie in [gamma/2, 2 gamma]"
        )));
    }
    let (r0, r1) = (0.5 / eps, 2.0 / eps);
    if r0 <= grid.r(4) || r1 >= grid.r(grid.len() - 5) {
        return Err(Error::OutOfRange(format!(
            "transition [{r0}, {r1}] is not inside the grid interior"
        )));
    }
    let inner = soliton_profile(&SolitonParams::new(1, alpha0, lambda0)?, grid);
    let outer = soliton_profile(&SolitonParams::unit(), grid);
    Ok(geodesic_glue(grid, &inner, &outer, r0, r1))
}

/// Smooth bump in ln r: exp(1 − 1/(1 − x²)) for |x| < 1, x = (ln r − center)/width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub direction: [f64; 3],
}

impl Bump {
    pub fn value(&self, r: f64) -> f64 {
        let x = (r.ln() - self.center) / self.width;
        if x.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - x * x)).exp()
        }
    }
}

fn perturb(grid: &RadialGrid, base: &SphereProfile, bumps: &[Bump], scale: f64) -> SphereProfile {
    let v: Vec<[f64; 3]> = (0..grid.len())
        .map(|j| {
            let mut x = base.at(j);
            for b in bumps {
                let s = scale * b.value(grid.r(j));
                for k in 0..3 {
                    x[k] += s * b.direction[k];
                }
            }
            let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            [x[0] / n, x[1] / n, x[2] / n]
        })
        .collect();
    SphereProfile::from_vectors(base.m, &v)
}

/// (Σ_k ‖ū_k − Q̄_k‖_X²)^{1/2}, components carried to the primary grid.
pub fn map_x_distance(table: &EigenTable, u: &SphereProfile, q: &SphereProfile) -> Result<f64> {
    let fact = table.factorization();
    let mut total = 0.0;
    for k in 0..3 {
        let d = u.u[k].sub(&q.u[k]);
        let p = fact.to_primary(d.values(), d.parity());
        total += norm_x(table, &RealField::new(p, d.parity()))?.value.powi(2);
    }
    Ok(total.sqrt())
}

/// Q plus seeded smooth bumps in r ∈ [0.3, 5], scaled so that ‖ū − Q̄‖_X = γ.
pub fn random_perturbation(table: &EigenTable, gamma: f64, seed: u64, count: usize) -> Result<(SphereProfile, Vec<Bump>)> {
    let grid = table.field_grid();
    let q = soliton_profile(&SolitonParams::unit(), grid);
    if gamma == 0.0 || count == 0 {
        return Ok((q, Vec::new()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (0.3f64.ln(), 5f64.ln());
    let bumps: Vec<Bump> = (0..count)
        .map(|_| {
            let width = rng.random_range(0.4..0.9);
            let center = rng.random_range(lo + width..hi - width);
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).sqrt();
            Bump {
                center,
                width,
                direction: [s * phi.cos(), s * phi.sin(), z],
            }
        })
        .collect();
    // The distance is close to linear in the scale; a few secant steps suffice.
    let dist = |s: f64| map_x_distance(table, &perturb(grid, &q, &bumps, s), &q);
    let (mut s0, mut d0) = (0.0, 0.0);
    let mut s1 = gamma;
    let mut d1 = dist(s1)?;
    for _ in 0..30 {
        if (d1 - gamma).abs() <= 1e-10 * gamma {
            break;
        }
        let s2 = s1 + (gamma - d1) * (s1 - s0) / (d1 - d0);
        (s0, d0) = (s1, d1);
        s1 = s2;
        d1 = dist(s1)?;
    }
    if (d1 - gamma).abs() > 1e-6 * gamma {
        return Err(Error::Consistency(format!("could not scale the perturbation to X distance {gamma}")));
    }
    Ok((perturb(grid, &q, &bumps, s1), bumps))
}

/// Reduced field of a map through its Coulomb frame.
pub fn reduced_field(grid: &RadialGrid, u: &SphereProfile) -> Result<ComplexField> {
    let frame = coulomb_frame(u, grid)?;
    Ok(derive_fields(u, &frame, grid)?.psi.with_parity(Parity::Odd))
}

/// max over tabulated ξ of |F_H̃ψ(ξ)| / (γ (⟨ln ε⟩/⟨ln ξ⟩) ξ^{1/2} ⟨ξ/ε⟩^{-3}), ⟨x⟩ = (1 + x²)^{1/2}.
pub fn fourier_envelope_constant(table: &EigenTable, psi: &ComplexField, eps: f64, gamma: f64) -> Result<f64> {
    let c = ft_forward(table, psi, Frame::Ht)?;
    let jb = |x: f64| (1.0 + x * x).sqrt();
    Ok(c.values
        .iter()
        .zip(table.xi())
        .map(|(v, &x): (&Complex64, &f64)| {
            let env = gamma * (jb(eps.ln()) / jb(x.ln())) * x.sqrt() / jb(x / eps).powi(3);
            v.norm() / env
        })
        .fold(0.0, f64::max))
}
