use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Parity};
use crate::spectral::factor::Tridiag;
use crate::spectral::transform::{forward_unit, inverse_unit, truncation_fraction};
use crate::spectral::{EigenTable, Frame};

/// e^{-itH̃}ψ0 applied mode by mode in the H̃ frame of the table.
///
/// Content above the tabulated frequencies is dropped (with a warning).
pub fn linear_flow(table: &EigenTable, psi0: &ComplexField, t: f64) -> Result<ComplexField> {
    if psi0.len() != table.n_nodes() {
        return Err(Error::Shape {
            expected: table.n_nodes(),
            got: psi0.len(),
        });
    }
    let lost = truncation_fraction(table, psi0, Frame::Ht)?;
    if lost > 1e-2 {
        log::warn!("linear flow drops {:.2}% of the mass above the table", 100.0 * lost);
    }
    let mut c = forward_unit(table, psi0.values(), Frame::Ht);
    for (v, &x) in c.iter_mut().zip(table.xi()) {
        *v *= Complex64::from_polar(1.0, -t * x * x);
    }
    Ok(ComplexField::new(inverse_unit(table, &c, Frame::Ht), Parity::Odd))
}

/// One step of e^{-i dt H̃} in the table frame: ψ ← ψ + Φ(e^{-i dt ξ²} − 1)Φᵀψ.
///
/// The part of ψ orthogonal to the tabulated modes is left unchanged, so the
/// step stays unitary when the modes are orthonormal.
#[derive(Debug, Clone)]
pub struct SpectralStep<'a> {
    table: &'a EigenTable,
    dt: f64,
    factors: Vec<Complex64>,
}

impl<'a> SpectralStep<'a> {
    pub fn new(table: &'a EigenTable, dt: f64) -> SpectralStep<'a> {
        let factors = table
            .xi()
            .iter()
            .map(|&x| Complex64::from_polar(1.0, -dt * x * x) - 1.0)
            .collect();
        SpectralStep { table, dt, factors }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, psi: &mut [Complex64]) {
        let mut c = forward_unit(self.table, psi, Frame::Ht);
        for (v, f) in c.iter_mut().zip(&self.factors) {
            *v *= f;
        }
        for (z, d) in psi.iter_mut().zip(inverse_unit(self.table, &c, Frame::Ht)) {
            *z += d;
        }
    }
}

/// (1 + iτT)ψ⁺ = (1 − iτT)ψ with τ = dt/2, factored once.
///
/// For T self-adjoint in the grid weights the step is unitary in the same weights.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    op: Tridiag,
    tau: f64,
    upper: Vec<Complex64>,
    pivot_inv: Vec<Complex64>,
}

impl CrankNicolson {
    pub fn new(op: Tridiag, dt: f64) -> CrankNicolson {
        let n = op.len();
        let tau = 0.5 * dt;
        let i = Complex64::i();
        let mut upper = vec![Complex64::default(); n];
        let mut pivot_inv = vec![Complex64::default(); n];
        let mut prev = Complex64::default();
        for j in 0..n {
            let lower = if j > 0 { i * tau * op.sub[j] } else { Complex64::default() };
            let pivot = 1.0 + i * tau * op.diag[j] - lower * prev;
            pivot_inv[j] = 1.0 / pivot;
            let sup = if j + 1 < n { i * tau * op.sup[j] } else { Complex64::default() };
            upper[j] = sup * pivot_inv[j];
            prev = upper[j];
        }
        CrankNicolson {
            op,
            tau,
            upper,
            pivot_inv,
        }
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.tau
    }

    pub fn step(&self, psi: &mut [Complex64]) {
        let n = psi.len();
        let i = Complex64::i();
        let t = &self.op;
        let mut rhs = vec![Complex64::default(); n];
        for j in 0..n {
            let mut acc = psi[j] * t.diag[j];
            if j > 0 {
                acc += psi[j - 1] * t.sub[j];
            }
            if j + 1 < n {
                acc += psi[j + 1] * t.sup[j];
            }
            rhs[j] = psi[j] - i * self.tau * acc;
        }
        // Forward sweep then back substitution.
        let mut prev = Complex64::default();
        for j in 0..n {
            let lower = if j > 0 { i * self.tau * t.sub[j] } else { Complex64::default() };
            prev = (rhs[j] - lower * prev) * self.pivot_inv[j];
            rhs[j] = prev;
        }
        psi[n - 1] = rhs[n - 1];
        for j in (0..n - 1).rev() {
            psi[j] = rhs[j] - self.upper[j] * psi[j + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_grid;
    use crate::spectral::Factorization;

    #[test]
    fn crank_nicolson_solves_its_system() {
        let grid = make_log_grid(1e-2, 1e2, 200).unwrap();
        let t = Factorization::new(&grid).ht_matrix();
        let cn = CrankNicolson::new(t.clone(), 0.01);
        let psi0: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&r| Complex64::new(r * (-r * r).exp(), 0.3 * r * r * (-r).exp()))
            .collect();
        let mut psi = psi0.clone();
        cn.step(&mut psi);
        let tp = t.apply(&psi);
        let t0 = t.apply(&psi0);
        let i = Complex64::i();
        for j in 0..psi.len() {
            let lhs = psi[j] + i * 0.005 * tp[j];
            let rhs = psi0[j] - i * 0.005 * t0[j];
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn crank_nicolson_is_unitary() {
        let grid = make_log_grid(1e-3, 1e3, 400).unwrap();
        let cn = CrankNicolson::new(Factorization::new(&grid).ht_matrix(), 0.05);
        let mut psi: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&r| Complex64::new(r / (1.0 + r * r * r), 0.0))
            .collect();
        let mass = |p: &[Complex64]| -> f64 { p.iter().zip(grid.weights()).map(|(z, w)| z.norm_sqr() * w).sum() };
        let m0 = mass(&psi);
        for _ in 0..100 {
            cn.step(&mut psi);
        }
        assert!((mass(&psi) / m0 - 1.0).abs() < 1e-12);
    }
}
