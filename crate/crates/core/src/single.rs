//! Single-probe outcoupling: one optical mode coupled to the untrapped atomic field.
//!
//! With scaled atomic amplitudes `sqrt(dk)*psi(k_i)` the mode functions form an
//! `(n+1)x(n+1)` matrix `U` (atoms first, the optical mode last) that evolves as
//! `i dU/dt = H U` with a Hermitian arrowhead `H`. Each column of `U` is one
//! independent subsystem.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::grids::{GridField, MomentumGrid};
use crate::model::ReducedModel;
use crate::propagate::{check_step, schedule, step_columns, validate_times, ColumnSystem, Frame, Integrator};

#[derive(Debug, Clone, PartialEq)]
pub struct SingleModeSolution {
    t: f64,
    grid: MomentumGrid,
    /// Column-major `U`.
    u: Vec<Complex64>,
}

pub fn initial_solution(grid: &MomentumGrid) -> SingleModeSolution {
    let dim = grid.n() + 1;
    let mut u = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        u[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    SingleModeSolution { t: 0.0, grid: *grid, u }
}

impl SingleModeSolution {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    /// Size of `U`, `n + 1`.
    pub fn dim(&self) -> usize {
        self.grid.n() + 1
    }

    /// Entry `U[row][col]`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.u[col * self.dim() + row]
    }

    /// Column `col` of `U`.
    pub fn column(&self, col: usize) -> &[Complex64] {
        let d = self.dim();
        &self.u[col * d..(col + 1) * d]
    }

    pub fn f(&self, i: usize, j: usize) -> Complex64 {
        self.entry(i, j) / self.grid.dk()
    }

    pub fn g(&self, i: usize) -> Complex64 {
        self.entry(i, self.grid.n()) / self.grid.dk().sqrt()
    }

    pub fn q(&self, j: usize) -> Complex64 {
        self.entry(self.grid.n(), j) / self.grid.dk().sqrt()
    }

    pub fn p(&self) -> Complex64 {
        let n = self.grid.n();
        self.entry(n, n)
    }

    pub fn g_field(&self) -> GridField<MomentumGrid> {
        let values = (0..self.grid.n()).map(|i| self.g(i)).collect();
        GridField::from_parts(self.grid, values)
    }

    pub fn q_field(&self) -> GridField<MomentumGrid> {
        let values = (0..self.grid.n()).map(|j| self.q(j)).collect();
        GridField::from_parts(self.grid, values)
    }

    /// `max |(U^dagger U - I)_ij|`
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .into_par_iter()
            .map(|i| {
                let ci = self.column(i);
                (0..d)
                    .map(|j| {
                        let dot: Complex64 = ci.iter().zip(self.column(j)).map(|(a, b)| a.conj() * b).sum();
                        let target = if i == j { 1.0 } else { 0.0 };
                        (dot - target).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

pub(crate) struct SingleProbeSystem {
    n: usize,
    freq: Vec<f64>,
    coupling: Vec<Complex64>,
    detuning: Vec<f64>,
    coupling_norm: f64,
}

pub(crate) struct SingleStage {
    lab: bool,
    coupling: Vec<Complex64>,
}

impl SingleProbeSystem {
    pub(crate) fn new(model: &ReducedModel, grid: &MomentumGrid) -> Self {
        let n = grid.n();
        let sq = grid.dk().sqrt();
        let k = grid.k_values();
        let mut freq: Vec<f64> = k.iter().map(|&k| model.omega0(k)).collect();
        freq.push(model.omega_a());
        let coupling: Vec<Complex64> = k.iter().map(|&k| -model.coupling(k) * sq).collect();
        let detuning = freq[..n].iter().map(|w| w - model.omega_a()).collect();
        let coupling_norm = coupling.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        SingleProbeSystem {
            n,
            freq,
            coupling,
            detuning,
            coupling_norm,
        }
    }
}

impl ColumnSystem for SingleProbeSystem {
    type Stage = SingleStage;

    fn column_len(&self) -> usize {
        self.n + 1
    }

    fn stage(&self, _t0: f64, tau: f64, frame: Frame) -> SingleStage {
        match frame {
            Frame::Lab => SingleStage {
                lab: true,
                coupling: self.coupling.clone(),
            },
            Frame::Interaction => SingleStage {
                lab: false,
                coupling: self
                    .coupling
                    .iter()
                    .zip(&self.detuning)
                    .map(|(c, d)| c * Complex64::from_polar(1.0, d * tau))
                    .collect(),
            },
        }
    }

    fn rhs(&self, s: &SingleStage, y: &[Complex64], dy: &mut [Complex64]) {
        let n = self.n;
        let a = y[n];
        let mut back = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let c = s.coupling[i];
            back += c.conj() * y[i];
            // -i * (c * a)
            let h = c * a;
            dy[i] = Complex64::new(h.im, -h.re);
        }
        dy[n] = Complex64::new(back.im, -back.re);
        if s.lab {
            for i in 0..=n {
                let h = self.freq[i] * y[i];
                dy[i] += Complex64::new(h.im, -h.re);
            }
        }
    }

    fn free_frequencies(&self) -> &[f64] {
        &self.freq
    }

    fn spectral_radius(&self, frame: Frame) -> f64 {
        match frame {
            Frame::Lab => self.freq.iter().fold(0.0_f64, |m, w| m.max(w.abs())) + self.coupling_norm,
            Frame::Interaction => self.coupling_norm,
        }
    }

    fn column_invariant(&self, y: &[Complex64]) -> f64 {
        y.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Reusable stepper for one model, grid and integrator setting.
pub struct SingleProbePropagator {
    sys: SingleProbeSystem,
    grid: MomentumGrid,
    integrator: Integrator,
}

impl SingleProbePropagator {
    pub fn new(model: &ReducedModel, grid: &MomentumGrid, integrator: Integrator) -> Result<Self> {
        model.params.validate()?;
        integrator.validate()?;
        let sys = SingleProbeSystem::new(model, grid);
        check_step(&sys, integrator.dt, integrator.frame)?;
        Ok(SingleProbePropagator {
            sys,
            grid: *grid,
            integrator,
        })
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    /// One step of `dt`, which may be negative for backward evolution.
    pub fn step(&self, sol: &mut SingleModeSolution, dt: f64) -> Result<()> {
        assert_eq!(sol.grid, self.grid, "solution grid differs from propagator grid");
        check_step(&self.sys, dt, self.integrator.frame)?;
        step_columns(&self.sys, &mut sol.u, sol.t, dt, self.integrator.frame)?;
        sol.t += dt;
        Ok(())
    }

    /// Steps forward to exactly `t`, shortening the final step if needed.
    pub fn advance_to(&self, sol: &mut SingleModeSolution, t: f64) -> Result<()> {
        let start = sol.t;
        let dt = self.integrator.dt;
        let (whole, rem) = schedule(start, t, dt);
        for s in 0..whole {
            step_columns(&self.sys, &mut sol.u, start + s as f64 * dt, dt, self.integrator.frame)?;
        }
        if rem > 0.0 {
            step_columns(
                &self.sys,
                &mut sol.u,
                start + whole as f64 * dt,
                rem,
                self.integrator.frame,
            )?;
        }
        if whole > 0 || rem > 0.0 {
            sol.t = t;
        }
        Ok(())
    }
}

/// Single step of the mode-function equations.
pub fn step(sol: &SingleModeSolution, model: &ReducedModel, dt: f64, frame: Frame) -> Result<SingleModeSolution> {
    let prop = SingleProbePropagator::new(model, &sol.grid, Integrator { dt: dt.abs(), frame })?;
    let mut next = sol.clone();
    prop.step(&mut next, dt)?;
    Ok(next)
}

/// Evolves from the initial data and calls `observe` at every requested time.
/// An empty `times` list means just `t_final`.
pub fn evolve_observed<T>(
    model: &ReducedModel,
    grid: &MomentumGrid,
    t_final: f64,
    integrator: Integrator,
    times: &[f64],
    mut observe: impl FnMut(&SingleModeSolution) -> Result<T>,
) -> Result<Vec<T>> {
    let default = [t_final];
    let times = if times.is_empty() { &default[..] } else { times };
    validate_times(t_final, times)?;
    let prop = SingleProbePropagator::new(model, grid, integrator)?;
    let mut sol = initial_solution(grid);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        prop.advance_to(&mut sol, t)?;
        out.push(observe(&sol)?);
    }
    Ok(out)
}

/// Snapshots of the solution at the requested times.
pub fn evolve(
    model: &ReducedModel,
    grid: &MomentumGrid,
    t_final: f64,
    integrator: Integrator,
    times: &[f64],
) -> Result<Vec<SingleModeSolution>> {
    evolve_observed(model, grid, t_final, integrator, times, |s| Ok(s.clone()))
}
