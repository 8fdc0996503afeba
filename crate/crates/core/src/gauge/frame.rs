use nalgebra::{Matrix3, Vector3};

use super::{from_matrix, minimal_rotation, orthogonality_defect, polar, to_matrix};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::ops::half_step;
use crate::soliton::{hdot1_distance, soliton_profile, SolitonParams, SphereProfile};

/// Largest admissible Ḣ¹ distance to the nearest soliton.
pub const PROXIMITY_LIMIT: f64 = 0.3;
const DRIFT_LIMIT: f64 = 1e-6;
const FAR_FIELD_LIMIT: f64 = 0.05;

/// Orthonormal frame O = (v̄ | w̄ | ū) per node, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoulombFrame {
    pub mats: Vec<[[f64; 3]; 3]>,
}

impl CoulombFrame {
    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn column(&self, j: usize, c: usize) -> [f64; 3] {
        let m = &self.mats[j];
        [m[0][c], m[1][c], m[2][c]]
    }

    pub fn v(&self, j: usize) -> [f64; 3] {
        self.column(j, 0)
    }

    pub fn w(&self, j: usize) -> [f64; 3] {
        self.column(j, 1)
    }

    pub fn u(&self, j: usize) -> [f64; 3] {
        self.column(j, 2)
    }

    pub fn max_orthogonality_defect(&self) -> f64 {
        self.mats
            .iter()
            .map(|m| orthogonality_defect(&to_matrix(m)))
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference to another frame.
    pub fn max_distance(&self, other: &[[[f64; 3]; 3]]) -> f64 {
        self.mats
            .iter()
            .zip(other)
            .map(|(a, b)| (to_matrix(a) - to_matrix(b)).abs().max())
            .fold(0.0, f64::max)
    }
}

/// Soliton through u(1): λ from ū3, α from the azimuth of (ū1, ū2).
pub(crate) fn nearest_soliton(u: &SphereProfile, grid: &RadialGrid) -> Result<SolitonParams> {
    let m = u.m as f64;
    let at = |k: usize| u.u[k].eval(grid, 1.0);
    let (u1, u2, u3) = (at(0)?, at(1)?, at(2)?);
    if u3.abs() >= 1.0 {
        return Err(Error::OutOfRange(format!("u3(1) = {u3} leaves no admissible scale")));
    }
    let lambda = ((1.0 + u3) / (1.0 - u3)).powf(0.5 / m);
    SolitonParams::new(u.m, u2.atan2(u1) / m, lambda)
}

/// Replace the third column by ū and rebuild v̄ ⟂ ū, w̄ = ū × v̄.
fn snap(o: &Matrix3<f64>, u: Vector3<f64>) -> Matrix3<f64> {
    let u = u.normalize();
    let v0 = o.column(0).into_owned();
    let v = (v0 - u * u.dot(&v0)).normalize();
    Matrix3::from_columns(&[v, u.cross(&v), u])
}

pub fn coulomb_frame(u: &SphereProfile, grid: &RadialGrid) -> Result<CoulombFrame> {
    coulomb_frame_rotated(u, grid, 0.0)
}

/// Coulomb frame with the limit frame at r_max rotated by θ about ū.
///
/// Integrates ∂_s O = (ū_s ⊗ ū − ū ⊗ ū_s) O inward with RK4 and projects
/// onto the orthogonal group after every step, keeping the third column at ū.
pub fn coulomb_frame_rotated(u: &SphereProfile, grid: &RadialGrid, theta: f64) -> Result<CoulombFrame> {
    for c in &u.u {
        c.check_len(grid)?;
    }
    let n = grid.len();
    let h = grid.log_step();
    let defect = u.max_sphere_defect();
    if defect > 1e-8 {
        return Err(Error::Parameter(format!("profile leaves the sphere by {defect:.2e}")));
    }
    let far = u.at(n - 1);
    let far_dev = (far[0].powi(2) + far[1].powi(2) + (far[2] - 1.0).powi(2)).sqrt();
    if far_dev > FAR_FIELD_LIMIT {
        return Err(Error::BoundaryCondition(format!(
            "u(r_max) is {far_dev:.3} away from the north pole"
        )));
    }
    let near = nearest_soliton(u, grid)?;
    let dist = hdot1_distance(u, &soliton_profile(&near, grid), grid)?;
    if dist > PROXIMITY_LIMIT {
        return Err(Error::Smallness(format!(
            "profile is {dist:.3} from the nearest soliton in the Ḣ¹ distance"
        )));
    }

    let ds = u.d_s(grid);
    let mid = |f: &[f64], k: usize| half_step(f, u.u[k].parity(), h, true);
    let (um, dm): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..3)
        .map(|k| {
            let pd = match u.u[k].parity() {
                crate::field::Parity::Even => crate::field::Parity::Quadratic,
                p => p,
            };
            (mid(u.u[k].values(), k), half_step(&ds[k], pd, h, true))
        })
        .unzip();
    let gen = |x: [f64; 3], d: [f64; 3]| -> Matrix3<f64> {
        let (x, d) = (Vector3::from(x), Vector3::from(d));
        d * x.transpose() - x * d.transpose()
    };
    let node = |j: usize| gen(u.at(j), [ds[0][j], ds[1][j], ds[2][j]]);
    let half = |j: usize| gen([um[0][j], um[1][j], um[2][j]], [dm[0][j], dm[1][j], dm[2][j]]);

    let far = Vector3::from(far).normalize();
    let spin = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(far), theta);
    // Rotating (v, w) by θ about ū multiplies ψ1 = ∂ū·(v + i w) by e^{-iθ}.
    let mut o = spin.matrix() * minimal_rotation(far);
    let mut mats = vec![[[0.0; 3]; 3]; n];
    mats[n - 1] = from_matrix(&o);
    for j in (1..n).rev() {
        let (m0, mh, m1) = (node(j), half(j), node(j - 1));
        let k1 = m0 * o;
        let k2 = mh * (o - k1 * (0.5 * h));
        let k3 = mh * (o - k2 * (0.5 * h));
        let k4 = m1 * (o - k3 * h);
        let next = o - (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let drift = orthogonality_defect(&next);
        if drift > DRIFT_LIMIT {
            return Err(Error::IntegrationAccuracy(format!(
                "frame drifted by {drift:.2e} at r = {:.3e}",
                grid.r(j - 1)
            )));
        }
        o = snap(&polar(&next), Vector3::from(u.at(j - 1)));
        mats[j - 1] = from_matrix(&o);
    }
    Ok(CoulombFrame { mats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_grid;
    use crate::soliton::soliton_frame;

    #[test]
    fn soliton_frames_match_closed_form() {
        let grid = make_log_grid(1e-4, 1e4, 2048).unwrap();
        for (alpha, lambda) in [(0.0, 1.0), (0.3, 1.2), (-1.0, 0.7)] {
            let p = SolitonParams::new(1, alpha, lambda).unwrap();
            let frame = coulomb_frame(&soliton_profile(&p, &grid), &grid).unwrap();
            let err = frame.max_distance(&soliton_frame(&p, &grid));
            assert!(err < 1e-8, "({alpha}, {lambda}): {err:e}");
            assert!(frame.max_orthogonality_defect() < 1e-12);
        }
    }

    #[test]
    fn third_column_is_the_map() {
        let grid = make_log_grid(1e-4, 1e4, 1024).unwrap();
        let u = soliton_profile(&SolitonParams::new(1, 0.5, 2.0).unwrap(), &grid);
        let frame = coulomb_frame(&u, &grid).unwrap();
        for j in 0..grid.len() {
            let (a, b) = (frame.u(j), u.at(j));
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-8, "{j} {:e}", a[k] - b[k]);
            }
        }
    }

    #[test]
    fn far_from_north_pole_rejected() {
        let grid = make_log_grid(1e-3, 1e3, 256).unwrap();
        let v: Vec<[f64; 3]> = grid.nodes().iter().map(|_| [1.0, 0.0, 0.0]).collect();
        let u = SphereProfile::from_vectors(1, &v);
        assert!(matches!(coulomb_frame(&u, &grid), Err(Error::BoundaryCondition(_))));
    }
}
