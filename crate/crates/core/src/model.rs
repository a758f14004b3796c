//! Physical constants of the outcoupling setup and the reduced coefficients
//! that drive the mode-function equations.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grids::{GridField, MomentumGrid};
use crate::HBAR;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Atomic mass, kg.
    pub m: f64,
    /// Trap frequency, rad/s.
    pub omega_t: f64,
    /// Raman kick wavenumber (per beam in the twin-beam setup), rad/m.
    pub k_kick: f64,
    /// Coupling amplitude, rad/s.
    pub omega: f64,
    /// Optical mode frequency, rad/s.
    pub omega_a: f64,
    /// Parametric drive strength, 1/s. Only the twin-beam model reads it.
    pub chi_beta: f64,
    /// The pump is tuned so that the parametric term rotates at exactly `2*omega_a`.
    pub pump_detuning_matched: bool,
}

pub fn default_params() -> PhysicalParams {
    PhysicalParams {
        m: 1.4e-25,
        omega_t: 0.25,
        k_kick: 1.6e7,
        omega: 90.0,
        omega_a: 20.0,
        chi_beta: 0.0,
        pump_detuning_matched: true,
    }
}

pub fn opo_default_params() -> PhysicalParams {
    PhysicalParams {
        omega: 108.0,
        chi_beta: 80.0,
        ..default_params()
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let non_negative = |v: f64| v.is_finite() && v >= 0.0;
        if !positive(self.m) {
            return Err(Error::param("m", format!("must be positive, got {}", self.m)));
        }
        if !positive(self.omega_t) {
            return Err(Error::param(
                "omega_t",
                format!("must be positive, got {}", self.omega_t),
            ));
        }
        if !positive(self.k_kick) {
            return Err(Error::param("k_kick", format!("must be positive, got {}", self.k_kick)));
        }
        if !non_negative(self.omega) {
            return Err(Error::param("omega", format!("must be >= 0, got {}", self.omega)));
        }
        if !self.omega_a.is_finite() {
            return Err(Error::param("omega_a", "must be finite"));
        }
        if !non_negative(self.chi_beta) {
            return Err(Error::param("chi_beta", format!("must be >= 0, got {}", self.chi_beta)));
        }
        if !self.pump_detuning_matched {
            return Err(Error::param(
                "pump_detuning_matched",
                "only the matched pump tuning is modelled",
            ));
        }
        Ok(())
    }

    /// `m*omega_t/hbar`, the squared width parameter of the trap ground state.
    pub fn sigma_sq(&self) -> f64 {
        self.m * self.omega_t / HBAR
    }

    /// RMS width of `|phi0|^2` in momentum space.
    pub fn sigma_k(&self) -> f64 {
        (self.sigma_sq() / 2.0).sqrt()
    }

    /// Recoil speed of a kicked atom.
    pub fn kick_velocity(&self) -> f64 {
        HBAR * self.k_kick / self.m
    }
}

/// Trap ground state in momentum space, unit normalized, centred at `k = 0`.
pub fn phi0(params: &PhysicalParams, k: f64) -> f64 {
    let s2 = params.sigma_sq();
    (PI * s2).powf(-0.25) * (-k * k / (2.0 * s2)).exp()
}

pub fn condensate_phi0(params: &PhysicalParams, grid: &MomentumGrid) -> Result<GridField<MomentumGrid>> {
    let sigma_k = params.sigma_k();
    let per_sigma = sigma_k / grid.dk();
    if per_sigma < 8.0 {
        return Err(Error::Resolution(format!(
            "dk = {:e} gives {per_sigma:.2} samples per condensate width {sigma_k:e}, need at least 8",
            grid.dk()
        )));
    }
    Ok(GridField::from_fn(*grid, |k| Complex64::new(phi0(params, k), 0.0)))
}

/// `pi*hbar*k_kick / (4*m*sqrt(2*hbar/(m*omega_t)))`
pub fn optimal_omega_estimate(params: &PhysicalParams) -> f64 {
    let width = (2.0 * HBAR / (params.m * params.omega_t)).sqrt();
    PI * HBAR * params.k_kick / (4.0 * params.m * width)
}

/// Coefficients of the single-probe equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedModel {
    pub params: PhysicalParams,
    /// Constant phase applied to the coupling. Observables must not depend on it.
    pub coupling_phase: f64,
}

impl ReducedModel {
    pub fn new(params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        Ok(ReducedModel {
            params,
            coupling_phase: 0.0,
        })
    }

    pub fn with_coupling_phase(mut self, theta: f64) -> Self {
        self.coupling_phase = theta;
        self
    }

    /// Free-atom frequency, shifted so that `omega0(k_kick) == omega_a`.
    pub fn omega0(&self, k: f64) -> f64 {
        free_frequency(&self.params, k)
    }

    pub fn omega_a(&self) -> f64 {
        self.params.omega_a
    }

    pub fn phi0(&self, k: f64) -> f64 {
        phi0(&self.params, k)
    }

    pub fn coupling(&self, k: f64) -> Complex64 {
        Complex64::from_polar(
            self.params.omega * self.phi0(k - self.params.k_kick),
            self.coupling_phase,
        )
    }
}

pub(crate) fn free_frequency(p: &PhysicalParams, k: f64) -> f64 {
    // (k - kk)(k + kk) keeps the detuning exact at k = kk and accurate near it
    HBAR * (k - p.k_kick) * (k + p.k_kick) / (2.0 * p.m) + p.omega_a
}
