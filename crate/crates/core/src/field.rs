use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Leading power of a field at the origin, f ~ r^p.
/// Used to fill ghost values below r_min.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
    Quadratic,
}

impl Parity {
    pub fn exponent(self) -> f64 {
        match self {
            Parity::Even => 0.0,
            Parity::Odd => 1.0,
            Parity::Quadratic => 2.0,
        }
    }
}

pub trait Scalar:
    Copy
    + Default
    + Send
    + Sync
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + 'static
{
    fn abs_sqr(self) -> f64;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn is_finite(self) -> bool;
    fn parts(self) -> (f64, f64);
    /// Drops the imaginary part for real scalars.
    fn from_parts(re: f64, im: f64) -> Self;
    fn abs(self) -> f64 {
        self.abs_sqr().sqrt()
    }
}

impl Scalar for f64 {
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
}

impl Scalar for Complex64 {
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
}

/// Samples of a radial function on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField<T> {
    values: Vec<T>,
    parity: Parity,
}

pub type RealField = RadialField<f64>;
pub type ComplexField = RadialField<Complex64>;

impl<T: Scalar> RadialField<T> {
    pub fn new(values: Vec<T>, parity: Parity) -> Self {
        RadialField { values, parity }
    }

    pub fn zeros(n: usize, parity: Parity) -> Self {
        RadialField {
            values: vec![T::default(); n],
            parity,
        }
    }

    pub fn from_fn(grid: &RadialGrid, parity: Parity, f: impl Fn(f64) -> T) -> Self {
        RadialField {
            values: grid.nodes().iter().map(|&r| f(r)).collect(),
            parity,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn check_len(&self, grid: &RadialGrid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: self.len(),
            });
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// (int |f|^2 r dr)^{1/2}
    pub fn norm_l2(&self, grid: &RadialGrid) -> f64 {
        self.values
            .iter()
            .zip(grid.weights())
            .map(|(v, w)| v.abs_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    pub fn map<U: Scalar>(&self, parity: Parity, f: impl Fn(T) -> U) -> RadialField<U> {
        RadialField {
            values: self.values.iter().map(|&v| f(v)).collect(),
            parity,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        RadialField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a - b)
                .collect(),
            parity: self.parity,
        }
    }

    /// Value at an arbitrary radius by cubic interpolation in s.
    pub fn eval(&self, grid: &RadialGrid, r: f64) -> Result<T> {
        let (b, w) = grid.interp_stencil(r)?;
        let mut acc = T::default();
        for k in 0..4 {
            acc += self.values[b + k] * w[k];
        }
        Ok(acc)
    }
}

impl ComplexField {
    pub fn re(&self) -> RealField {
        self.map(self.parity, |z| z.re)
    }

    pub fn im(&self) -> RealField {
        self.map(self.parity, |z| z.im)
    }
}

impl RealField {
    pub fn to_complex(&self) -> ComplexField {
        self.map(self.parity, Complex64::from_real)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_grid;

    #[test]
    fn l2_norm_of_gaussian() {
        let g = make_log_grid(1e-4, 1e3, 3000).unwrap();
        let f = RealField::from_fn(&g, Parity::Even, |r| (-r * r).exp());
        // int e^{-2r^2} r dr = 1/4
        assert!((f.norm_l2(&g) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn eval_interpolates_between_nodes() {
        let g = make_log_grid(1e-3, 1e3, 2000).unwrap();
        let f = ComplexField::from_fn(&g, Parity::Odd, |r| Complex64::new(r / (1.0 + r * r), r.sin()));
        let z = f.eval(&g, 1.0).unwrap();
        assert!((z.re - 0.5).abs() < 1e-9);
        assert!((z.im - 1f64.sin()).abs() < 1e-9);
    }
}
