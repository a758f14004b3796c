//! Measured quantities computed from mode-function snapshots.
//!
//! [`single`] holds the closed-form single-probe statistics, [`gaussian`] the
//! Wick-contraction engine for the twin-beam Gaussian state and [`epr`] the
//! quadrature inference built on it.

pub mod epr;
pub mod gaussian;
pub mod single;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grids::PositionGrid;

pub use epr::{epr_inference, Carrier, EprResult, EprWindow};
pub use gaussian::{
    build_kernels, density_opo, flux_difference_variance, FluxDifference, GaussianKernels, LinearForm, Occupation,
};
pub use single::{
    density_single, flux_mean, flux_variance_from, flux_variance_single, number_stats, point_flux, v_of_j, v_of_j_from,
    FluxVariance, NumberStats, PointFlux,
};

/// Real samples on a position lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: PositionGrid,
    pub values: Vec<f64>,
}

impl Profile {
    /// Riemann sum over the window.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }
}

/// Weights `e^{ikx}/sqrt(2*pi)` (times `ik` for the gradient) that evaluate the
/// position field at `x` from unscaled momentum samples.
pub(crate) fn point_weights(k: &[f64], x: f64, gradient: bool) -> Vec<Complex64> {
    let s = 1.0 / (2.0 * PI).sqrt();
    k.iter()
        .map(|&k| {
            let w = Complex64::from_polar(s, k * x);
            if gradient {
                w * Complex64::new(0.0, k)
            } else {
                w
            }
        })
        .collect()
}

pub(crate) fn check_point(grid: &PositionGrid, x: f64) -> Result<()> {
    if !grid.contains(x) {
        return Err(Error::param(
            "x0",
            format!(
                "{x:e} m lies outside the position window of half-width {:e} m",
                0.5 * grid.width()
            ),
        ));
    }
    Ok(())
}
