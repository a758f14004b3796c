//! Column-wise fourth-order Runge-Kutta stepping shared by both propagators.
//!
//! Every system integrated here evolves a matrix whose columns are independent
//! linear ODEs with common coefficients. Columns are stepped in parallel, each
//! with its own scratch space, so the result does not depend on the worker count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest `|dt| * spectral radius` accepted, just inside the RK4 stability
/// boundary on the imaginary axis (2*sqrt(2)).
pub const STABILITY_LIMIT: f64 = 2.8;

/// Largest tolerated drift of a column's conserved norm before aborting.
pub const INVARIANT_TOLERANCE: f64 = 1e-3;

/// Largest squared column norm before aborting a run with parametric gain.
pub const GROWTH_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Integrate the full generator including the free rotation.
    Lab,
    /// Remove the free rotation analytically, step only the couplings.
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub dt: f64,
    pub frame: Frame,
}

impl Integrator {
    pub fn interaction(dt: f64) -> Self {
        Integrator {
            dt,
            frame: Frame::Interaction,
        }
    }

    pub fn lab(dt: f64) -> Self {
        Integrator { dt, frame: Frame::Lab }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::interaction(1e-4)
    }
}

/// A linear system whose state is a set of independent columns sharing the
/// same coefficients.
pub(crate) trait ColumnSystem: Sync {
    /// Coefficients frozen at one RK stage.
    type Stage: Sync;

    fn column_len(&self) -> usize;

    /// Stage coefficients at `t0 + tau` for a step starting at `t0`.
    fn stage(&self, t0: f64, tau: f64, frame: Frame) -> Self::Stage;

    /// `dy/dt` for one column.
    fn rhs(&self, stage: &Self::Stage, y: &[Complex64], dy: &mut [Complex64]);

    /// Free rotation frequency of every column component.
    fn free_frequencies(&self) -> &[f64];

    /// Upper bound on the spectral radius of the stepped generator.
    fn spectral_radius(&self, frame: Frame) -> f64;

    /// Conserved quantity of a column, equal to 1 for exact evolution.
    fn column_invariant(&self, y: &[Complex64]) -> f64;
}

pub(crate) fn check_step<S: ColumnSystem>(sys: &S, dt: f64, frame: Frame) -> Result<()> {
    let product = dt.abs() * sys.spectral_radius(frame);
    if product > STABILITY_LIMIT {
        return Err(Error::StepSize {
            dt,
            product,
            limit: STABILITY_LIMIT,
        });
    }
    Ok(())
}

struct Scratch {
    acc: Vec<Complex64>,
    k: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Scratch {
    fn new(len: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Scratch {
            acc: vec![z; len],
            k: vec![z; len],
            tmp: vec![z; len],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct StepHealth {
    drift: f64,
    norm_sq: f64,
    finite: bool,
}

impl StepHealth {
    fn merge(self, o: StepHealth) -> StepHealth {
        StepHealth {
            drift: self.drift.max(o.drift),
            norm_sq: self.norm_sq.max(o.norm_sq),
            finite: self.finite && o.finite,
        }
    }
}

/// Advances every column of `data` from `t0` by `dt` (which may be negative).
pub(crate) fn step_columns<S: ColumnSystem>(
    sys: &S,
    data: &mut [Complex64],
    t0: f64,
    dt: f64,
    frame: Frame,
) -> Result<()> {
    let len = sys.column_len();
    debug_assert_eq!(data.len() % len, 0);
    let s0 = sys.stage(t0, 0.0, frame);
    let sh = sys.stage(t0, 0.5 * dt, frame);
    let s1 = sys.stage(t0, dt, frame);
    let rotation: Option<Vec<Complex64>> = match frame {
        Frame::Lab => None,
        Frame::Interaction => Some(
            sys.free_frequencies()
                .iter()
                .map(|&w| Complex64::from_polar(1.0, -w * dt))
                .collect(),
        ),
    };

    let health = data
        .par_chunks_mut(len)
        .map_init(
            || Scratch::new(len),
            |scr, col| {
                rk4_column(sys, [&s0, &sh, &sh, &s1], col, dt, scr);
                if let Some(rot) = &rotation {
                    for (y, r) in col.iter_mut().zip(rot) {
                        *y *= r;
                    }
                }
                let norm_sq: f64 = col.iter().map(|v| v.norm_sqr()).sum();
                StepHealth {
                    drift: (sys.column_invariant(col) - 1.0).abs(),
                    norm_sq,
                    finite: norm_sq.is_finite(),
                }
            },
        )
        .reduce(
            || StepHealth {
                drift: 0.0,
                norm_sq: 0.0,
                finite: true,
            },
            StepHealth::merge,
        );

    let t = t0 + dt;
    if !health.finite {
        return Err(Error::Unstable {
            t,
            reason: "non-finite mode function".into(),
        });
    }
    if health.norm_sq > GROWTH_LIMIT {
        return Err(Error::Unstable {
            t,
            reason: format!("mode-function norm {:e} exceeds {GROWTH_LIMIT:e}", health.norm_sq),
        });
    }
    if health.drift > INVARIANT_TOLERANCE * health.norm_sq.max(1.0) {
        return Err(Error::Unstable {
            t,
            reason: format!("conserved column norm drifted by {:e}", health.drift),
        });
    }
    Ok(())
}

fn rk4_column<S: ColumnSystem>(sys: &S, stages: [&S::Stage; 4], y: &mut [Complex64], dt: f64, scr: &mut Scratch) {
    let Scratch { acc, k, tmp } = scr;
    let h = Complex64::new(dt, 0.0);
    let weights = [1.0, 2.0, 2.0, 1.0];
    let offsets = [0.5, 0.5, 1.0];

    sys.rhs(stages[0], y, k);
    for (a, &kv) in acc.iter_mut().zip(k.iter()) {
        *a = kv;
    }
    for s in 1..4 {
        let c = h * offsets[s - 1];
        for ((t, &yv), &kv) in tmp.iter_mut().zip(y.iter()).zip(k.iter()) {
            *t = yv + c * kv;
        }
        sys.rhs(stages[s], tmp, k);
        let w = weights[s];
        for (a, &kv) in acc.iter_mut().zip(k.iter()) {
            *a += w * kv;
        }
    }
    let c = h / 6.0;
    for (yv, &a) in y.iter_mut().zip(acc.iter()) {
        *yv += c * a;
    }
}

/// Splits `[t, target]` into whole steps of `dt` plus one shorter closing step.
pub(crate) fn schedule(t: f64, target: f64, dt: f64) -> (usize, f64) {
    let span = target - t;
    if span <= 0.0 {
        return (0, 0.0);
    }
    let mut whole = (span / dt).floor();
    // absorb rounding so that e.g. 0.3/0.1 counts as three steps
    if span - (whole + 1.0) * dt > -1e-9 * dt {
        whole += 1.0;
    }
    let rem = span - whole * dt;
    let rem = if rem > 1e-9 * dt { rem } else { 0.0 };
    (whole as usize, rem)
}

/// Checks that requested output times are finite, ordered and inside `[0, t_final]`.
pub(crate) fn validate_times(t_final: f64, times: &[f64]) -> Result<()> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::InvalidTimes(format!("t_final must be >= 0, got {t_final}")));
    }
    let mut last = 0.0;
    for &t in times {
        if !t.is_finite() || t < 0.0 || t > t_final * (1.0 + 1e-12) {
            return Err(Error::InvalidTimes(format!("time {t} outside [0, {t_final}]")));
        }
        if t < last {
            return Err(Error::InvalidTimes("snapshot times must be non-decreasing".into()));
        }
        last = t;
    }
    Ok(())
}
