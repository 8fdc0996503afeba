use serde::{Deserialize, Serialize};

use super::fields::GaugeFields;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::soliton::SphereProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Match (A2, ψ2) at the matching radius.
    Analytic,
    /// Match the map value ū at the matching radius.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationParams {
    pub alpha: f64,
    pub lambda: f64,
    pub variant: Variant,
}

/// λ with h3^m(λ r_m) = a, closed form of the monotone inverse.
fn scale_from_h3(m: u32, a: f64, r_m: f64) -> Result<f64> {
    if !(a.abs() < 1.0) {
        return Err(Error::OutOfRange(format!(
            "h3 value {a} at the matching radius has no admissible scale"
        )));
    }
    Ok(((1.0 + a) / (1.0 - a)).powf(0.5 / m as f64) / r_m)
}

pub fn modulation_params(grid: &RadialGrid, fields: &GaugeFields) -> Result<ModulationParams> {
    modulation_params_at(grid, fields, None, Variant::Analytic, 1.0)
}

/// (α, λ) at matching radius `r_m`. The geometric variant reads ū from `map`.
pub fn modulation_params_at(
    grid: &RadialGrid,
    fields: &GaugeFields,
    map: Option<&SphereProfile>,
    variant: Variant,
    r_m: f64,
) -> Result<ModulationParams> {
    match variant {
        Variant::Analytic => {
            let a = fields.a2.eval(grid, r_m)?;
            let q = fields.psi2.eval(grid, r_m)?;
            let lambda = scale_from_h3(1, a, r_m)?;
            // ψ2(r_m) = i e^{iα} h1(λ r_m) with h1 > 0.
            let alpha = (q * -num_complex::Complex64::i()).arg();
            Ok(ModulationParams {
                alpha,
                lambda,
                variant,
            })
        }
        Variant::Geometric => {
            let u = map.ok_or_else(|| Error::Parameter("geometric parameters need the map".into()))?;
            let m = u.m;
            let (u1, u2, u3) = (u.u[0].eval(grid, r_m)?, u.u[1].eval(grid, r_m)?, u.u[2].eval(grid, r_m)?);
            Ok(ModulationParams {
                alpha: u2.atan2(u1) / m as f64,
                lambda: scale_from_h3(m, u3, r_m)?,
                variant,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{coulomb_frame, derive_fields};
    use crate::grid::make_log_grid;
    use crate::soliton::{soliton_profile, SolitonParams};

    #[test]
    fn soliton_parameters_recovered() {
        let grid = make_log_grid(1e-4, 1e4, 4096).unwrap();
        for (alpha, lambda) in [(0.0, 1.0), (0.3, 1.2), (-2.0, 0.5)] {
            let p = SolitonParams::new(1, alpha, lambda).unwrap();
            let u = soliton_profile(&p, &grid);
            let f = derive_fields(&u, &coulomb_frame(&u, &grid).unwrap(), &grid).unwrap();
            let a = modulation_params(&grid, &f).unwrap();
            assert!((a.alpha - alpha).abs() < 1e-8 && (a.lambda - lambda).abs() < 1e-8, "{a:?}");
            let g = modulation_params_at(&grid, &f, Some(&u), Variant::Geometric, 1.0).unwrap();
            assert!((g.lambda - a.lambda).abs() < 1e-12);
            assert!((g.alpha - alpha).abs() < 1e-8);
        }
    }

    #[test]
    fn scale_inverse_matches_profile() {
        for m in [1, 2] {
            for lambda in [0.1, 1.0, 7.0] {
                let a = crate::soliton::h_pair(m, lambda * 2.0).1;
                assert!((scale_from_h3(m, a, 2.0).unwrap() - lambda).abs() < 1e-10 * lambda);
            }
        }
        assert!(scale_from_h3(1, 1.0, 1.0).is_err());
    }
}
