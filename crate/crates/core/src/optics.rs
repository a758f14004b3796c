//! Photon-number moments of the initial probe state.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Coherent,
    Fock,
    Squeezed,
    Thermal,
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateKind::Coherent => "coherent",
            StateKind::Fock => "fock",
            StateKind::Squeezed => "squeezed",
            StateKind::Thermal => "thermal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalStateMoments {
    pub mean_n: f64,
    pub var_n: f64,
    pub label: StateKind,
}

fn check_occupation(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and >= 0, got {v}")))
    }
}

/// Poissonian statistics of `|alpha>`.
pub fn coherent(alpha_sq: f64) -> Result<OpticalStateMoments> {
    check_occupation("alpha_sq", alpha_sq)?;
    Ok(OpticalStateMoments {
        mean_n: alpha_sq,
        var_n: alpha_sq,
        label: StateKind::Coherent,
    })
}

pub fn fock(n: u64) -> OpticalStateMoments {
    OpticalStateMoments {
        mean_n: n as f64,
        var_n: 0.0,
        label: StateKind::Fock,
    }
}

/// Displaced squeezed state with the displacement along the squeezed quadrature,
/// which gives sub-Poissonian number statistics for large `alpha_sq`.
pub fn squeezed(alpha_sq: f64, r: f64) -> Result<OpticalStateMoments> {
    check_occupation("alpha_sq", alpha_sq)?;
    if !r.is_finite() {
        return Err(Error::param("r", "must be finite"));
    }
    let s2 = r.sinh().powi(2);
    let c2 = r.cosh().powi(2);
    Ok(OpticalStateMoments {
        mean_n: alpha_sq + s2,
        var_n: alpha_sq * (-2.0 * r).exp() + 2.0 * s2 * c2,
        label: StateKind::Squeezed,
    })
}

/// Thermal (Bose-Einstein) occupation with mean `n_bar`.
pub fn thermal(n_bar: f64) -> Result<OpticalStateMoments> {
    check_occupation("n_bar", n_bar)?;
    Ok(OpticalStateMoments {
        mean_n: n_bar,
        var_n: n_bar * n_bar + n_bar,
        label: StateKind::Thermal,
    })
}
