//! Staggered discretization of the factorization H = L*L, H̃ = LL*.
//!
//! Functions in the H frame (φ) live on the primary nodes p_j = d_j e^{-h/2};
//! functions in the H̃ frame (ψ) live on the field grid d_j. With φ_N = 0 as a
//! Dirichlet wall past r_max, the discrete L is the upper bidiagonal map
//!
//!   (Lφ)_j = a_j φ_j + b_j φ_{j+1},
//!
//! a centered difference at d_j. Its weighted adjoint gives tridiagonal H_d
//! and H̃_d sharing the singular values ξ_n, so the two transforms are exactly
//! unitary and intertwined.

use crate::field::{Parity, Scalar};
use crate::grid::RadialGrid;
use crate::ops::half_step;
use crate::soliton::h_pair;

#[derive(Debug, Clone)]
pub struct Tridiag {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let mut acc = x[j] * self.diag[j];
                if j > 0 {
                    acc += x[j - 1] * self.sub[j];
                }
                if j + 1 < n {
                    acc += x[j + 1] * self.sup[j];
                }
                acc
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Factorization {
    field: RadialGrid,
    primary: RadialGrid,
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Forward and backward shooting solutions at one frequency.
#[derive(Debug, Clone)]
pub struct Shot {
    /// φ_0..φ_N (the last entry is the value at the wall).
    pub phi: Vec<f64>,
    /// g_0..g_{N-1}
    pub g: Vec<f64>,
}

const RESCALE: f64 = 1e150;

impl Factorization {
    pub fn new(field: &RadialGrid) -> Factorization {
        let primary = field.shifted(-0.5);
        let h = field.log_step();
        let (a, b) = field
            .nodes()
            .iter()
            .map(|&d| {
                let h3 = h_pair(1, d).1;
                ((-1.0 / h + 0.5 * h3) / d, (1.0 / h + 0.5 * h3) / d)
            })
            .unzip();
        Factorization {
            field: field.clone(),
            primary,
            a,
            b,
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn field_grid(&self) -> &RadialGrid {
        &self.field
    }

    pub fn primary_grid(&self) -> &RadialGrid {
        &self.primary
    }

    pub fn coefficients(&self) -> (&[f64], &[f64]) {
        (&self.a, &self.b)
    }

    fn wp(&self) -> &[f64] {
        self.primary.weights()
    }

    fn wd(&self) -> &[f64] {
        self.field.weights()
    }

    /// L: primary grid → field grid.
    pub fn apply_l<T: Scalar>(&self, phi: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let next = if j + 1 < n { phi[j + 1] } else { T::default() };
                phi[j] * self.a[j] + next * self.b[j]
            })
            .collect()
    }

    /// L* = W_P^{-1} Lᵀ W_D: field grid → primary grid.
    pub fn apply_lstar<T: Scalar>(&self, g: &[T]) -> Vec<T> {
        let (wp, wd) = (self.wp(), self.wd());
        (0..self.len())
            .map(|j| {
                let mut acc = g[j] * (wd[j] * self.a[j]);
                if j > 0 {
                    acc += g[j - 1] * (wd[j - 1] * self.b[j - 1]);
                }
                acc * (1.0 / wp[j])
            })
            .collect()
    }

    /// H_d = L* L on the primary grid.
    pub fn h_matrix(&self) -> Tridiag {
        let n = self.len();
        let (wp, wd, a, b) = (self.wp(), self.wd(), &self.a, &self.b);
        let mut t = Tridiag {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
        };
        for j in 0..n {
            let mut d = wd[j] * a[j] * a[j];
            if j > 0 {
                d += wd[j - 1] * b[j - 1] * b[j - 1];
                t.sub[j] = wd[j - 1] * b[j - 1] * a[j - 1] / wp[j];
            }
            t.diag[j] = d / wp[j];
            if j + 1 < n {
                t.sup[j] = wd[j] * a[j] * b[j] / wp[j];
            }
        }
        t
    }

    /// H̃_d = L L* on the field grid.
    pub fn ht_matrix(&self) -> Tridiag {
        let n = self.len();
        let (wp, wd, a, b) = (self.wp(), self.wd(), &self.a, &self.b);
        let mut t = Tridiag {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
        };
        for j in 0..n {
            let mut d = a[j] * a[j] * wd[j] / wp[j];
            if j + 1 < n {
                d += b[j] * b[j] * wd[j] / wp[j + 1];
                t.sup[j] = b[j] * wd[j + 1] * a[j + 1] / wp[j + 1];
            }
            if j > 0 {
                t.sub[j] = a[j] * wd[j - 1] * b[j - 1] / wp[j];
            }
            t.diag[j] = d;
        }
        t
    }

    /// Interleaved recurrence from the regular end: L*g = ξφ, Lφ = ξg.
    pub fn shoot_forward(&self, xi: f64) -> Shot {
        let n = self.len();
        let (wp, wd, a, b) = (self.wp(), self.wd(), &self.a, &self.b);
        let mut phi = vec![0.0; n + 1];
        let mut g = vec![0.0; n];
        phi[0] = 1.0;
        let mut g_prev = 0.0;
        for j in 0..n {
            let back = if j > 0 { wd[j - 1] * b[j - 1] * g_prev } else { 0.0 };
            g[j] = (xi * wp[j] * phi[j] - back) / (wd[j] * a[j]);
            phi[j + 1] = (xi * g[j] - a[j] * phi[j]) / b[j];
            g_prev = g[j];
        }
        Shot { phi, g }
    }

    /// Number of eigenvalues of H_d below ξ², from sign changes of the
    /// forward solution of (H_d - ξ²)φ = 0 with the wall value appended.
    pub fn sturm_count(&self, xi: f64) -> usize {
        let n = self.len();
        let (wp, wd, a, b) = (self.wp(), self.wd(), &self.a, &self.b);
        let mut phi = 1.0f64;
        let mut g_prev = 0.0f64;
        let mut count = 0;
        for j in 0..n {
            let back = if j > 0 { wd[j - 1] * b[j - 1] * g_prev } else { 0.0 };
            let gj = (xi * wp[j] * phi - back) / (wd[j] * a[j]);
            let mut next = (xi * gj - a[j] * phi) / b[j];
            let mut gj = gj;
            if (next < 0.0) != (phi < 0.0) && next != 0.0 {
                count += 1;
            }
            if next.abs() > RESCALE {
                next /= RESCALE;
                gj /= RESCALE;
            }
            phi = next;
            g_prev = gj;
        }
        count
    }

    /// Solution satisfying the wall condition φ_N = 0, shot inward.
    pub fn shoot_backward(&self, xi: f64) -> Shot {
        let n = self.len();
        let (wp, wd, a, b) = (self.wp(), self.wd(), &self.a, &self.b);
        let mut phi = vec![0.0; n + 1];
        let mut g = vec![0.0; n];
        g[n - 1] = 1.0;
        phi[n - 1] = xi * g[n - 1] / a[n - 1];
        for j in (1..n).rev() {
            g[j - 1] = (xi * wp[j] * phi[j] - wd[j] * a[j] * g[j]) / (wd[j - 1] * b[j - 1]);
            phi[j - 1] = (xi * g[j - 1] - b[j - 1] * phi[j]) / a[j - 1];
            let m = phi[j - 1].abs().max(g[j - 1].abs());
            if m > RESCALE {
                for v in &mut phi[j - 1..] {
                    *v /= m;
                }
                for v in &mut g[j - 1..] {
                    *v /= m;
                }
            }
        }
        Shot { phi, g }
    }

    /// ξ·r·h at which the grid stops resolving oscillations (evanescent side).
    pub const MATCH_RESOLUTION: f64 = 0.5;

    /// Eigenvector pair at an eigenvalue ξ, normalized to unit norm in the
    /// primary (φ) and field (g) weights. Returns (φ, g, matching residual).
    pub fn eigenpair(&self, xi: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let n = self.len();
        let h = self.field.log_step();
        let p = self.primary.nodes();
        let (mut phi, mut g, residual) = if xi * p[n - 1] * h < 2.0 * Self::MATCH_RESOLUTION {
            let s = self.shoot_forward(xi);
            (s.phi, s.g, 0.0)
        } else {
            let jm = p
                .iter()
                .position(|&r| xi * r * h >= Self::MATCH_RESOLUTION)
                .unwrap_or(n / 2)
                .clamp(24, n - 24);
            let fw = self.shoot_forward(xi);
            let bw = self.shoot_backward(xi);
            let (lo, hi) = (jm - 16, jm + 16);
            let num: f64 = (lo..hi).map(|j| fw.phi[j] * bw.phi[j]).sum();
            let den: f64 = (lo..hi).map(|j| bw.phi[j] * bw.phi[j]).sum();
            let c = num / den;
            let mut mis = 0.0f64;
            let mut scale = 0.0f64;
            for j in lo..hi {
                mis = mis.max((fw.phi[j] - c * bw.phi[j]).abs());
                scale = scale.max(fw.phi[j].abs());
            }
            let mut phi = fw.phi;
            let mut g = fw.g;
            for j in jm..=n {
                phi[j] = c * bw.phi[j];
            }
            for j in jm..n {
                g[j] = c * bw.g[j];
            }
            (phi, g, mis / scale)
        };
        phi.truncate(n);
        let norm = phi
            .iter()
            .zip(self.wp())
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
            .sqrt();
        for v in &mut phi {
            *v /= norm;
        }
        for v in &mut g {
            *v /= norm;
        }
        (phi, g, residual)
    }

    /// Cubic midpoint interpolation from the field grid to the primary grid.
    pub fn to_primary<T: Scalar>(&self, f: &[T], parity: Parity) -> Vec<T> {
        half_step(f, parity, self.field.log_step(), true)
    }

    /// Cubic midpoint interpolation from the primary grid to the field grid.
    pub fn to_field<T: Scalar>(&self, f: &[T], parity: Parity) -> Vec<T> {
        half_step(f, parity, self.field.log_step(), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_grid;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn small() -> Factorization {
        Factorization::new(&make_log_grid(1e-2, 1e2, 120).unwrap())
    }

    fn symmetric_dense(f: &Factorization, t: &Tridiag, w: &[f64]) -> DMatrix<f64> {
        let n = f.len();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            m[(j, j)] = t.diag[j];
            if j + 1 < n {
                // W^{1/2} T W^{-1/2}
                let v = t.sup[j] * (w[j] / w[j + 1]).sqrt();
                m[(j, j + 1)] = v;
                m[(j + 1, j)] = v;
            }
        }
        m
    }

    #[test]
    fn adjoint_identity_holds_exactly() {
        let f = small();
        let n = f.len();
        let phi: Vec<f64> = (0..n).map(|j| ((j as f64) * 0.37).sin()).collect();
        let g: Vec<f64> = (0..n).map(|j| ((j as f64) * 0.11).cos()).collect();
        let lphi = f.apply_l(&phi);
        let lsg = f.apply_lstar(&g);
        let lhs: f64 = (0..n).map(|j| lphi[j] * g[j] * f.wd()[j]).sum();
        let rhs: f64 = (0..n).map(|j| phi[j] * lsg[j] * f.wp()[j]).sum();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn tridiagonals_match_compositions() {
        let f = small();
        let n = f.len();
        let x: Vec<f64> = (0..n).map(|j| ((j as f64) * 0.21).sin() + 0.1).collect();
        let h1 = f.h_matrix().apply(&x);
        let h2 = f.apply_lstar(&f.apply_l(&x));
        let t1 = f.ht_matrix().apply(&x);
        let t2 = f.apply_l(&f.apply_lstar(&x));
        for j in 0..n {
            assert!((h1[j] - h2[j]).abs() <= 1e-9 * h2[j].abs().max(1.0));
            assert!((t1[j] - t2[j]).abs() <= 1e-9 * t2[j].abs().max(1.0));
        }
    }

    #[test]
    fn sturm_count_matches_dense_eigensolver() {
        let f = small();
        let t = f.h_matrix();
        let dense = symmetric_dense(&f, &t, f.wp());
        let mut ev: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(ev[0] > 0.0);
        for k in [0usize, 1, 5, 20, 60, 119] {
            let xi = ev[k].sqrt();
            assert_eq!(f.sturm_count(xi * (1.0 - 1e-9)), k, "below eigenvalue {k}");
            assert_eq!(f.sturm_count(xi * (1.0 + 1e-9)), k + 1, "above eigenvalue {k}");
        }
    }

    #[test]
    fn h_and_ht_share_spectrum() {
        let f = small();
        let w = f.wp().to_vec();
        let wd = f.wd().to_vec();
        let mut a: Vec<f64> = SymmetricEigen::new(symmetric_dense(&f, &f.h_matrix(), &w))
            .eigenvalues
            .iter()
            .copied()
            .collect();
        let mut b: Vec<f64> = SymmetricEigen::new(symmetric_dense(&f, &f.ht_matrix(), &wd))
            .eigenvalues
            .iter()
            .copied()
            .collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-8 * x.abs().max(1e-6), "{x} vs {y}");
        }
    }

    #[test]
    fn midpoint_interpolation_is_fourth_order() {
        let grid = make_log_grid(1e-2, 1e2, 400).unwrap();
        let f = Factorization::new(&grid);
        let u: Vec<f64> = grid.nodes().iter().map(|&r| r / (1.0 + r * r)).collect();
        let on_p = f.to_primary(&u, Parity::Odd);
        for (j, &r) in f.primary_grid().nodes().iter().enumerate() {
            assert!((on_p[j] - r / (1.0 + r * r)).abs() < 1e-6, "p node {j}");
        }
        let back = f.to_field(&on_p, Parity::Odd);
        for (j, &r) in grid.nodes().iter().enumerate() {
            assert!((back[j] - r / (1.0 + r * r)).abs() < 2e-6, "d node {j}");
        }
    }
}
