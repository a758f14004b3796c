//! Number and flux statistics of a single-probe pulse.
//!
//! With the atoms initially in vacuum the outcoupled field is
//! `Psi(x) = int F(x,k') psi(k') dk' + G(x) a`, so every moment factors into
//! mode-function integrals times the photon-number moments of the probe.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_point, point_weights, Profile};
use crate::error::Result;
use crate::grids::to_position;
use crate::optics::OpticalStateMoments;
use crate::single::SingleModeSolution;
use crate::HBAR;

/// `|G(x)|^2 <a^dagger a>` over the conjugate position window.
pub fn density_single(sol: &SingleModeSolution, state: &OpticalStateMoments) -> Profile {
    let field = to_position(&sol.g_field());
    Profile {
        grid: *field.grid(),
        values: field.values().iter().map(|v| v.norm_sqr() * state.mean_n).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberStats {
    /// Outcoupled fraction `int |G|^2`.
    pub n_g: f64,
    pub mean: f64,
    pub variance: f64,
    /// `variance / mean`, absent when nothing has been outcoupled.
    pub v: Option<f64>,
}

pub fn number_stats(sol: &SingleModeSolution, state: &OpticalStateMoments) -> NumberStats {
    let n_g = sol.g_field().norm_sqr();
    let mean = n_g * state.mean_n;
    let variance = n_g * n_g * state.var_n + n_g * (1.0 - n_g) * state.mean_n;
    NumberStats {
        n_g,
        mean,
        variance,
        v: (mean > 0.0).then(|| variance / mean),
    }
}

/// State-independent flux data at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointFlux {
    pub x: f64,
    pub g: Complex64,
    pub dg: Complex64,
    /// Flux per probe photon, `(hbar/m) Im(G^* G')`.
    pub j_g: f64,
    /// `int |J_fg(x,k')|^2 dk'`.
    pub cross: f64,
}

impl PointFlux {
    /// Flux variance of a coherent probe divided by its mean photon number.
    pub fn coherent_prefactor(&self) -> f64 {
        self.j_g * self.j_g + self.cross
    }
}

/// Evaluates `G`, `G'` and the `F` integrals at `x` without a full transform.
pub fn point_flux(sol: &SingleModeSolution, mass: f64, x: f64) -> Result<PointFlux> {
    let grid = sol.grid();
    check_point(&grid.position_grid(), x)?;
    let n = grid.n();
    let k = grid.k_values();
    let h = point_weights(&k, x, false);
    let dh = point_weights(&k, x, true);
    // U[i][j] = sqrt(dk) psi-coefficient, so G = sqrt(dk) * sum h_i U[i][n]
    let sq = grid.dk().sqrt();
    let gcol = &sol.column(n)[..n];
    let g: Complex64 = h.iter().zip(gcol).map(|(a, b)| a * b).sum::<Complex64>() * sq;
    let dg: Complex64 = dh.iter().zip(gcol).map(|(a, b)| a * b).sum::<Complex64>() * sq;
    let j_g = HBAR / mass * (g.conj() * dg).im;
    let pre = Complex64::new(0.0, HBAR / (2.0 * mass));
    // collected before summing so the result does not depend on the worker count
    let terms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let col = &sol.column(j)[..n];
            let f: Complex64 = h.iter().zip(col).map(|(a, b)| a * b).sum();
            let df: Complex64 = dh.iter().zip(col).map(|(a, b)| a * b).sum();
            (pre * (df.conj() * g - f.conj() * dg)).norm_sqr()
        })
        .collect();
    let cross = terms.iter().sum::<f64>() * grid.dk();
    Ok(PointFlux { x, g, dg, j_g, cross })
}

pub fn flux_mean(sol: &SingleModeSolution, state: &OpticalStateMoments, mass: f64, x0: f64) -> Result<f64> {
    Ok(point_flux(sol, mass, x0)?.j_g * state.mean_n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxVariance {
    /// `J_g^2 V(a^dagger a)`, inherited from the probe number noise.
    pub number_term: f64,
    /// `<a^dagger a> int J_gf J_fg dk'`, from the atomic vacuum.
    pub vacuum_term: f64,
    pub total: f64,
}

pub fn flux_variance_single(
    sol: &SingleModeSolution,
    state: &OpticalStateMoments,
    mass: f64,
    x0: f64,
) -> Result<FluxVariance> {
    Ok(flux_variance_from(&point_flux(sol, mass, x0)?, state))
}

pub fn flux_variance_from(pf: &PointFlux, state: &OpticalStateMoments) -> FluxVariance {
    let number_term = pf.j_g * pf.j_g * state.var_n;
    let vacuum_term = state.mean_n * pf.cross;
    FluxVariance {
        number_term,
        vacuum_term,
        total: number_term + vacuum_term,
    }
}

/// Fock-input flux variance relative to the coherent-input one; absent at zero flux.
pub fn v_of_j(sol: &SingleModeSolution, mass: f64, x0: f64) -> Result<Option<f64>> {
    Ok(v_of_j_from(&point_flux(sol, mass, x0)?))
}

pub fn v_of_j_from(pf: &PointFlux) -> Option<f64> {
    let den = pf.coherent_prefactor();
    (den > 0.0).then(|| pf.cross / den)
}
