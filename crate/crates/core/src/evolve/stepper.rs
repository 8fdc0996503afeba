use num_complex::Complex64;

use super::config::{EvolutionConfig, Scheme};
use super::config::Propagator;
use super::linear::{CrankNicolson, SpectralStep};
use super::potential::potential_w;
use crate::error::{Error, Result};
use crate::field::{ComplexField, Parity};
use crate::gauge::{reconstruct_fields, GaugeFields};
use crate::grid::RadialGrid;
use crate::ops::d_s;
use crate::spectral::EigenTable;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub steps: usize,
    pub psi: ComplexField,
}

/// Split-step integrator: potential phases around a Crank–Nicolson step of H̃_d.
///
/// W is rebuilt from a fresh reconstruction of (ψ2, A2) every `refresh_every`
/// steps and extrapolated linearly in time between rebuilds.
#[derive(Debug)]
enum LinearStep<'a> {
    Spectral(SpectralStep<'a>),
    Cn(CrankNicolson),
}

pub struct Stepper<'a> {
    table: &'a EigenTable,
    config: EvolutionConfig,
    linear: LinearStep<'a>,
    state: State,
    fields: GaugeFields,
    w_prev: Option<(f64, Vec<f64>)>,
    w_curr: (f64, Vec<f64>),
    since_refresh: usize,
    refreshes: usize,
    /// e^{-iτW(t)} at the current time and its per-step factor e^{-iτ dt Ẇ}.
    kick: Vec<Complex64>,
    kick_step: Vec<Complex64>,
    /// (d_sψ2 + A2ψ2)/r from the stored fields; the residual is this minus iA2ψ.
    residual_base: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn new(table: &'a EigenTable, config: EvolutionConfig, psi0: ComplexField) -> Result<Self> {
        config.validate()?;
        psi0.check_len(table.field_grid())?;
        if !psi0.all_finite() {
            return Err(Error::Parameter("initial field has non-finite samples".into()));
        }
        let guard = config.phase_per_step(table.xi_max());
        if guard > std::f64::consts::PI {
            log::info!("dt xi_max^2 = {guard:.3}; the potential half-steps are unaffected");
        }
        let linear = match config.propagator {
            Propagator::Spectral => LinearStep::Spectral(SpectralStep::new(table, config.dt)),
            Propagator::CrankNicolson => {
                LinearStep::Cn(CrankNicolson::new(table.factorization().ht_matrix(), config.dt))
            }
        };
        let grid = table.field_grid();
        let fields = rebuild(grid, &psi0, &config)?;
        let w = potential_w(grid, &fields)?.into_values();
        let mut stepper = Stepper {
            table,
            config,
            linear,
            state: State {
                t: 0.0,
                steps: 0,
                psi: psi0.with_parity(Parity::Odd),
            },
            fields,
            w_prev: None,
            w_curr: (0.0, w),
            since_refresh: 0,
            refreshes: 1,
            kick: Vec::new(),
            kick_step: Vec::new(),
            residual_base: Vec::new(),
        };
        stepper.prepare();
        Ok(stepper)
    }

    /// Kick factors and residual base for the current refresh interval.
    fn prepare(&mut self) {
        let dt = self.config.dt;
        let tau = match self.config.scheme {
            Scheme::Second => 0.5 * dt,
            Scheme::First => dt,
        };
        let (t1, w1) = &self.w_curr;
        let slope: Vec<f64> = match &self.w_prev {
            Some((t0, w0)) if t1 > t0 => w1.iter().zip(w0).map(|(a, b)| (a - b) / (t1 - t0)).collect(),
            _ => vec![0.0; w1.len()],
        };
        let shift = self.state.t - t1;
        self.kick = w1
            .iter()
            .zip(&slope)
            .map(|(w, s)| Complex64::from_polar(1.0, -tau * (w + shift * s)))
            .collect();
        self.kick_step = slope.iter().map(|s| Complex64::from_polar(1.0, -tau * dt * s)).collect();

        let grid = self.table.field_grid();
        let d = d_s(self.fields.psi2.values(), Parity::Odd, grid.log_step());
        self.residual_base = (0..grid.len())
            .map(|j| (d[j] + self.fields.psi2.values()[j] * self.fields.a2.values()[j]) / grid.r(j))
            .collect();
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn table(&self) -> &EigenTable {
        self.table
    }

    pub fn grid(&self) -> &RadialGrid {
        self.table.field_grid()
    }

    /// Fields from the most recent reconstruction.
    pub fn fields(&self) -> &GaugeFields {
        &self.fields
    }

    pub fn refreshes(&self) -> usize {
        self.refreshes
    }

    /// The linearly extrapolated potential at time t.
    pub fn w_at(&self, t: f64) -> Vec<f64> {
        let (t1, w1) = &self.w_curr;
        match &self.w_prev {
            Some((t0, w0)) if t1 > t0 => {
                let s = (t - t1) / (t1 - t0);
                w1.iter().zip(w0).map(|(a, b)| a + s * (a - b)).collect()
            }
            _ => w1.clone(),
        }
    }

    fn kick(psi: &mut [Complex64], factor: &[Complex64]) {
        for (z, f) in psi.iter_mut().zip(factor) {
            *z *= f;
        }
    }

    fn advance_kick(&mut self) {
        for (k, g) in self.kick.iter_mut().zip(&self.kick_step) {
            *k *= g;
        }
    }

    /// Reconstruct (ψ2, A2) from the current ψ and rebuild W.
    pub fn refresh(&mut self) -> Result<()> {
        let grid = self.table.field_grid();
        let fields = rebuild(grid, &self.state.psi, &self.config)?;
        let w = potential_w(grid, &fields)?.into_values();
        let old = std::mem::replace(&mut self.w_curr, (self.state.t, w));
        if old.0 < self.state.t {
            self.w_prev = Some(old);
        }
        self.fields = fields;
        self.since_refresh = 0;
        self.refreshes += 1;
        self.prepare();
        Ok(())
    }

    /// sup_r |∂_rψ2 − iA2ψ + A2ψ2/r| with the stored (ψ2, A2) and the current ψ.
    pub fn stale_residual(&self) -> f64 {
        let i = Complex64::i();
        self.residual_base
            .iter()
            .zip(self.fields.a2.values())
            .zip(self.state.psi.values())
            .map(|((b, a), p)| (b - i * a * p).norm_sqr())
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub fn step(&mut self) -> Result<()> {
        let dt = self.config.dt;
        Self::kick(self.state.psi.values_mut(), &self.kick);
        match &self.linear {
            LinearStep::Spectral(s) => s.step(self.state.psi.values_mut()),
            LinearStep::Cn(c) => c.step(self.state.psi.values_mut()),
        }
        self.advance_kick();
        if self.config.scheme == Scheme::Second {
            Self::kick(self.state.psi.values_mut(), &self.kick);
        }
        self.state.steps += 1;
        self.state.t = self.state.steps as f64 * dt;
        if !self.state.psi.all_finite() {
            return Err(Error::IntegrationAccuracy(format!(
                "non-finite field at t = {}",
                self.state.t
            )));
        }
        self.since_refresh += 1;
        if self.since_refresh >= self.config.refresh_every
            || self.stale_residual() > self.config.refresh_tolerance
        {
            self.refresh()?;
        }
        Ok(())
    }
}

fn rebuild(grid: &RadialGrid, psi: &ComplexField, config: &EvolutionConfig) -> Result<GaugeFields> {
    let (psi2, a2) = reconstruct_fields(grid, psi, &config.reconstruct)?;
    GaugeFields::from_reduced(grid, psi.clone().with_parity(Parity::Odd), psi2, a2)
}
