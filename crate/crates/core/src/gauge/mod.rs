//! Coulomb gauge: map → frame → differentiated fields → reduced field, and back.

mod frame;
mod fields;
mod modulation;
mod reconstruct;

pub use fields::{compute_a0, derive_fields, GaugeFields};
pub use frame::{coulomb_frame, coulomb_frame_rotated, CoulombFrame, PROXIMITY_LIMIT};
pub use modulation::{modulation_params, modulation_params_at, ModulationParams, Variant};
pub use reconstruct::{reconstruct_fields, reconstruct_map, ReconstructOptions};

use nalgebra::{Matrix3, Vector3};

pub(crate) fn to_matrix(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

pub(crate) fn from_matrix(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m[(i, j)];
        }
    }
    out
}

/// Nearest orthogonal matrix (polar factor).
pub(crate) fn polar(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    u * vt
}

pub(crate) fn orthogonality_defect(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).abs().max()
}

/// Rotation taking k to n along the great circle (identity if n = k).
pub(crate) fn minimal_rotation(n: Vector3<f64>) -> Matrix3<f64> {
    let k = Vector3::z();
    let axis = k.cross(&n);
    let s = axis.norm();
    let c = k.dot(&n);
    if s < 1e-300 {
        return if c > 0.0 {
            Matrix3::identity()
        } else {
            Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0))
        };
    }
    let a = axis / s;
    let kx = Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0);
    Matrix3::identity() + kx * s + kx * kx * (1.0 - c)
}
