//! Finite-difference realizations of the radial operators on a log grid.
//!
//! With s = ln r the radial Laplacian is r^{-2} d_s^2 and d_r = r^{-1} d_s.
//! Derivatives in s are 4th order; below r_min ghost values follow the
//! parity hint f ~ r^p, at r_max the stencils are one-sided.

use crate::error::{Error, Result};
use crate::field::{Parity, RadialField, Scalar};
use crate::grid::RadialGrid;
use crate::soliton::h_pair;

/// Ghost value f(r_0 e^{-kh}) from f = r^p (c0 + c2 r^2) fitted to the first two nodes.
pub(crate) fn ghost<T: Scalar>(f: &[T], parity: Parity, h: f64, k: usize) -> T {
    let p = parity.exponent();
    let q = (2.0 * h).exp();
    // With x = r^2 / r_0^2: g(x) = f / r^p = c0 + c2' x, sampled at x = 1 and x = q.
    let g0 = f[0];
    let g1 = f[1] * (-p * h).exp();
    let slope = (g1 - g0) * (1.0 / (q - 1.0));
    let x = (-2.0 * k as f64 * h).exp();
    (g0 + slope * (x - 1.0)) * (-(k as f64) * p * h).exp()
}

/// First derivative in s.
pub fn d_s<T: Scalar>(f: &[T], parity: Parity, h: f64) -> Vec<T> {
    let n = f.len();
    assert!(n >= 6, "need at least 6 samples");
    let at = |i: isize| -> T {
        if i < 0 {
            ghost(f, parity, h, (-i) as usize)
        } else {
            f[i as usize]
        }
    };
    let c = 1.0 / (12.0 * h);
    let mut out = vec![T::default(); n];
    for (j, o) in out.iter_mut().enumerate().take(n - 2) {
        let j = j as isize;
        *o = (at(j - 2) - at(j - 1) * 8.0 + at(j + 1) * 8.0 - at(j + 2)) * c;
    }
    let m = n - 1;
    out[m] = (f[m] * 25.0 - f[m - 1] * 48.0 + f[m - 2] * 36.0 - f[m - 3] * 16.0 + f[m - 4] * 3.0) * c;
    out[m - 1] =
        (f[m] * 3.0 + f[m - 1] * 10.0 - f[m - 2] * 18.0 + f[m - 3] * 6.0 - f[m - 4]) * c;
    out
}

/// Second derivative in s.
pub fn d_ss<T: Scalar>(f: &[T], parity: Parity, h: f64) -> Vec<T> {
    let n = f.len();
    assert!(n >= 6, "need at least 6 samples");
    let at = |i: isize| -> T {
        if i < 0 {
            ghost(f, parity, h, (-i) as usize)
        } else {
            f[i as usize]
        }
    };
    let c = 1.0 / (12.0 * h * h);
    let mut out = vec![T::default(); n];
    for (j, o) in out.iter_mut().enumerate().take(n - 2) {
        let j = j as isize;
        *o = (-at(j - 2) + at(j - 1) * 16.0 - at(j) * 30.0 + at(j + 1) * 16.0 - at(j + 2)) * c;
    }
    let m = n - 1;
    out[m] = (f[m] * 45.0 - f[m - 1] * 154.0 + f[m - 2] * 214.0 - f[m - 3] * 156.0
        + f[m - 4] * 61.0
        - f[m - 5] * 10.0)
        * c;
    out[m - 1] = (f[m] * 10.0 - f[m - 1] * 15.0 - f[m - 2] * 4.0 + f[m - 3] * 14.0
        - f[m - 4] * 6.0
        + f[m - 5])
        * c;
    out
}

/// Values half a step below (`down`) or above each node, by 4-point Lagrange
/// in s. Ghosts below the first node follow r^p; the last stencils are one-sided.
pub fn half_step<T: Scalar>(f: &[T], parity: Parity, h: f64, down: bool) -> Vec<T> {
    let n = f.len();
    let at = |i: isize| -> T {
        if i < 0 {
            ghost(f, parity, h, (-i) as usize)
        } else {
            f[i as usize]
        }
    };
    let c = 1.0 / 16.0;
    (0..n)
        .map(|j| {
            // Midpoint between nodes m-1 and m.
            let m = if down { j as isize } else { j as isize + 1 };
            if (m + 1) < n as isize {
                (-at(m - 2) + at(m - 1) * 9.0 + at(m) * 9.0 - at(m + 1)) * c
            } else if m < n as isize {
                // Between n-2 and n-1: weights for nodes n-4..n-1.
                (at(m - 3) + at(m - 2) * (-5.0) + at(m - 1) * 15.0 + at(m) * 5.0) * c
            } else {
                // Half a step past the last node.
                (-at(m - 4) * 5.0 + at(m - 3) * 21.0 - at(m - 2) * 35.0 + at(m - 1) * 35.0) * c
            }
        })
        .collect()
}

/// d_r f on the grid nodes.
pub fn d_r<T: Scalar>(grid: &RadialGrid, f: &RadialField<T>) -> Vec<T> {
    let mut out = d_s(f.values(), f.parity(), grid.log_step());
    for (o, r) in out.iter_mut().zip(grid.nodes()) {
        *o = *o * (1.0 / r);
    }
    out
}

/// V(r) = 1/r^2 - 8/(1+r^2)^2, as r^2 V(r).
pub fn r2_potential_h(r: f64) -> f64 {
    let q = 1.0 + r * r;
    1.0 - 8.0 * r * r / (q * q)
}

/// Ṽ(r) = 4/(r^2(1+r^2)), as r^2 Ṽ(r).
pub fn r2_potential_ht(r: f64) -> f64 {
    4.0 / (1.0 + r * r)
}

pub fn potential_h(r: f64) -> f64 {
    r2_potential_h(r) / (r * r)
}

pub fn potential_ht(r: f64) -> f64 {
    r2_potential_ht(r) / (r * r)
}

/// L f = f' + h3 f / r
pub fn apply_l<T: Scalar>(grid: &RadialGrid, f: &RadialField<T>) -> Result<RadialField<T>> {
    f.check_len(grid)?;
    let ds = d_s(f.values(), f.parity(), grid.log_step());
    let out = grid
        .nodes()
        .iter()
        .zip(ds)
        .zip(f.values())
        .map(|((&r, d), &v)| (d + v * h_pair(1, r).1) * (1.0 / r))
        .collect();
    Ok(RadialField::new(out, raise(f.parity())))
}

/// L* g = -g' + (h3 - 1) g / r
pub fn apply_lstar<T: Scalar>(grid: &RadialGrid, g: &RadialField<T>) -> Result<RadialField<T>> {
    g.check_len(grid)?;
    let ds = d_s(g.values(), g.parity(), grid.log_step());
    let out = grid
        .nodes()
        .iter()
        .zip(ds)
        .zip(g.values())
        .map(|((&r, d), &v)| (v * (h_pair(1, r).1 - 1.0) - d) * (1.0 / r))
        .collect();
    Ok(RadialField::new(out, lower(g.parity())))
}

fn raise(p: Parity) -> Parity {
    match p {
        Parity::Odd => Parity::Quadratic,
        other => other,
    }
}

fn lower(p: Parity) -> Parity {
    match p {
        Parity::Quadratic => Parity::Odd,
        other => other,
    }
}

fn schrodinger<T: Scalar>(
    grid: &RadialGrid,
    f: &RadialField<T>,
    r2v: impl Fn(f64) -> f64,
) -> Result<RadialField<T>> {
    f.check_len(grid)?;
    let dss = d_ss(f.values(), f.parity(), grid.log_step());
    let out = grid
        .nodes()
        .iter()
        .zip(dss)
        .zip(f.values())
        .map(|((&r, d), &v)| (v * r2v(r) - d) * (1.0 / (r * r)))
        .collect();
    Ok(RadialField::new(out, f.parity()))
}

/// H f = -Δf + V f
pub fn apply_h<T: Scalar>(grid: &RadialGrid, f: &RadialField<T>) -> Result<RadialField<T>> {
    schrodinger(grid, f, r2_potential_h)
}

/// H̃ f = -Δf + Ṽ f
pub fn apply_ht<T: Scalar>(grid: &RadialGrid, f: &RadialField<T>) -> Result<RadialField<T>> {
    schrodinger(grid, f, r2_potential_ht)
}

/// -Δf + λ^2 Ṽ(λ r) f
pub fn apply_ht_lambda<T: Scalar>(
    grid: &RadialGrid,
    f: &RadialField<T>,
    lambda: f64,
) -> Result<RadialField<T>> {
    if !(lambda > 0.0) {
        return Err(Error::Parameter(format!("scale must be positive, got {lambda}")));
    }
    schrodinger(grid, f, |r| r2_potential_ht(lambda * r))
}

/// [r d_r]^{-1} f (r) = -int_r^inf f(s)/s ds.
///
/// The integral over the grid uses a 4th-order cumulative rule in ln r; beyond
/// r_max the tail is closed with a power law c r^{-p} fitted on the last decade.
pub fn r_dr_inverse<T: Scalar>(grid: &RadialGrid, f: &RadialField<T>) -> Result<RadialField<T>> {
    f.check_len(grid)?;
    let n = grid.len();
    let h = grid.log_step();
    let v = f.values();
    let tail = tail_integral(grid, v)?;

    let at = |i: isize| -> T {
        if i < 0 {
            ghost(v, f.parity(), h, (-i) as usize)
        } else {
            v[i as usize]
        }
    };
    let c = h / 24.0;
    let mut out = vec![T::default(); n];
    let mut acc = tail;
    out[n - 1] = -acc;
    // Last panel from the cubic through the final four nodes.
    acc += (v[n - 4] - v[n - 3] * 5.0 + v[n - 2] * 19.0 + v[n - 1] * 9.0) * c;
    out[n - 2] = -acc;
    for j in (0..n - 2).rev() {
        let i = j as isize;
        acc += (-at(i - 1) + at(i) * 13.0 + at(i + 1) * 13.0 - at(i + 2)) * c;
        out[j] = -acc;
    }
    Ok(RadialField::new(out, Parity::Even))
}

/// Analytic tail int_{r_max}^inf f(s)/s ds of a fitted power law.
fn tail_integral<T: Scalar>(grid: &RadialGrid, v: &[T]) -> Result<T> {
    let n = grid.len();
    let global = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if global == 0.0 {
        return Ok(T::default());
    }
    let start = grid
        .first_at_or_above(grid.r_max() / 10.0)
        .unwrap_or(0)
        .min(n - 16);
    // Envelope: maxima over sub-windows, robust to oscillation.
    let windows = 8;
    let len = (n - start) / windows;
    let mut xs = Vec::with_capacity(windows);
    let mut ys = Vec::with_capacity(windows);
    let mut local = 0.0f64;
    for k in 0..windows {
        let lo = start + k * len;
        let hi = if k + 1 == windows { n } else { lo + len };
        let (mut best, mut at) = (0.0f64, lo);
        for (j, x) in v.iter().enumerate().take(hi).skip(lo) {
            if x.abs() >= best {
                best = x.abs();
                at = j;
            }
        }
        local = local.max(best);
        if best > 0.0 {
            xs.push(grid.r(at).ln());
            ys.push(best.ln());
        }
    }
    if local == 0.0 {
        return Ok(T::default());
    }
    // Below this level the tail is noise and cannot shift the integral.
    let negligible = local <= 1e-10 * global;
    if xs.len() < 3 {
        if negligible {
            return Ok(T::default());
        }
        return Err(Error::TailExtrapolation("too few nonzero samples in the last decade".into()));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let p = -sxy / sxx;
    if !(p > 1.0) {
        if negligible {
            return Ok(T::default());
        }
        return Err(Error::TailExtrapolation(format!(
            "field decays like r^-{p:.3} near r_max; need a power above 1"
        )));
    }
    Ok(v[n - 1] * (1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RealField;
    use crate::grid::make_log_grid;
    use num_complex::Complex64;

    fn grid() -> RadialGrid {
        make_log_grid(1e-4, 1e4, 4096).unwrap()
    }

    fn phi0(r: f64) -> f64 {
        2.0 * r / (1.0 + r * r)
    }

    fn psi0(r: f64) -> f64 {
        let q = r * r;
        if q < 1e-4 {
            // Series: q/4 - q^2/12 + q^3/24
            0.25 * q - q * q / 12.0 + q * q * q / 24.0
        } else {
            0.5 * ((1.0 + q) * q.ln_1p() / q - 1.0)
        }
    }

    #[test]
    fn stencils_exact_on_low_degree_polynomials_in_s() {
        let g = make_log_grid(0.5, 2.0, 40).unwrap();
        let h = g.log_step();
        let s: Vec<f64> = g.nodes().iter().map(|r| r.ln()).collect();
        let f: Vec<f64> = s.iter().map(|s| 1.0 + s - 2.0 * s * s + 0.5 * s.powi(3) + 0.25 * s.powi(4)).collect();
        let d1 = d_s(&f, Parity::Even, h);
        let d2 = d_ss(&f, Parity::Even, h);
        for j in 2..f.len() {
            let x = s[j];
            let e1 = 1.0 - 4.0 * x + 1.5 * x * x + x.powi(3);
            let e2 = -4.0 + 3.0 * x + 3.0 * x * x;
            assert!((d1[j] - e1).abs() < 1e-9, "d1 at {j}");
            assert!((d2[j] - e2).abs() < 1e-7, "d2 at {j}");
        }
    }

    #[test]
    fn zero_resonance_is_annihilated_by_l() {
        let g = grid();
        let f = RealField::from_fn(&g, Parity::Odd, phi0);
        let lf = apply_l(&g, &f).unwrap();
        assert!(lf.max_abs() < 1e-6, "max |L phi0| = {}", lf.max_abs());
        let hf = apply_h(&g, &f).unwrap();
        assert!(hf.max_abs() < 1e-5 * f.norm_l2(&g), "max |H phi0| = {}", hf.max_abs());
    }

    #[test]
    fn lstar_maps_psi0_to_half_phi0() {
        let g = grid();
        let f = RealField::from_fn(&g, Parity::Quadratic, psi0);
        let out = apply_lstar(&g, &f).unwrap();
        let err = out
            .values()
            .iter()
            .zip(g.nodes())
            .map(|(v, &r)| (v + 0.5 * phi0(r)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "err = {err}");
    }

    #[test]
    fn linear_on_zero() {
        let g = make_log_grid(1e-2, 1e2, 64).unwrap();
        let z = RealField::zeros(g.len(), Parity::Odd);
        assert_eq!(apply_l(&g, &z).unwrap().max_abs(), 0.0);
        assert_eq!(r_dr_inverse(&g, &z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn lambda_one_matches_ht() {
        let g = make_log_grid(1e-3, 1e3, 500).unwrap();
        let f = ComplexField::from_fn(&g, Parity::Quadratic, |r| Complex64::new(r * r, r) * (-r).exp());
        let a = apply_ht(&g, &f).unwrap();
        let b = apply_ht_lambda(&g, &f, 1.0).unwrap();
        assert_eq!(a, b);
    }

    use crate::field::ComplexField;

    #[test]
    fn adjointness_of_l_and_lstar() {
        let g = grid();
        let f = RealField::from_fn(&g, Parity::Odd, |r| r * (-(r.ln() - 0.3).powi(2)).exp());
        let k = RealField::from_fn(&g, Parity::Quadratic, |r| r * r * (-(r.ln() + 0.2).powi(2) * 2.0).exp());
        let lf = apply_l(&g, &f).unwrap();
        let lsk = apply_lstar(&g, &k).unwrap();
        let a: f64 = g.integrate(&lf.values().iter().zip(k.values()).map(|(x, y)| x * y).collect::<Vec<_>>());
        let b: f64 = g.integrate(&f.values().iter().zip(lsk.values()).map(|(x, y)| x * y).collect::<Vec<_>>());
        assert!((a - b).abs() < 1e-6 * a.abs().max(b.abs()), "{a} vs {b}");
    }

    #[test]
    fn r_dr_inverse_closed_forms() {
        let g = grid();
        let f = RealField::from_fn(&g, Parity::Even, |r| r.powi(-2));
        let out = r_dr_inverse(&g, &f).unwrap();
        // The first panel leans on parity ghosts, which assume r^p behavior.
        for (j, &r) in g.nodes().iter().enumerate().skip(1).step_by(97) {
            let exact = -0.5 / (r * r);
            assert!((out.values()[j] / exact - 1.0).abs() < 1e-9, "r={r} {} {exact}", out.values()[j]);
        }
        let e = RealField::from_fn(&g, Parity::Even, |r| (-r).exp());
        let ie = r_dr_inverse(&g, &e).unwrap();
        let back = d_s(ie.values(), Parity::Even, g.log_step());
        // Interior nodes where e^{-r} is resolved in s (r h < 0.1).
        for (j, &r) in g.nodes().iter().enumerate().skip(2) {
            if r * g.log_step() < 0.1 {
                let fr = (-r).exp();
                assert!((back[j] - fr).abs() <= 1e-4 * fr, "r={r}: {} vs {fr}", back[j]);
            }
        }
    }

    #[test]
    fn r_dr_inverse_refuses_slow_tails() {
        let g = make_log_grid(1e-2, 1e3, 400).unwrap();
        let f = RealField::from_fn(&g, Parity::Even, |r| 1.0 / (1.0 + r).sqrt());
        assert!(matches!(r_dr_inverse(&g, &f), Err(Error::TailExtrapolation(_))));
    }
}
