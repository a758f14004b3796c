//! Twin-beam outcoupling driven by a non-degenerate parametric oscillator.
//!
//! The two optical modes `a1`, `a2` couple to atoms near `+k_beam` and
//! `-k_beam` respectively and are mixed by the parametric drive, so the
//! Heisenberg solution is a Bogoliubov transformation
//! `X(t) = A X(0) + B X(0)^dagger` of the stacked mode vector
//! `X = (sqrt(dk)*psi(k_0..k_{2n-1}), a1, a2)`. Column `j` of `A` together with
//! column `j` of `B` forms one independent subsystem.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grids::BandGrid;
use crate::model::{free_frequency, phi0, PhysicalParams};
use crate::propagate::{check_step, schedule, step_columns, validate_times, ColumnSystem, Frame, Integrator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoModel {
    pub params: PhysicalParams,
    /// Sign of the coupling between `a2` and the atoms, `+1.0` or `-1.0`.
    pub omega2_sign: f64,
}

impl OpoModel {
    pub fn new(params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        Ok(OpoModel {
            params,
            omega2_sign: 1.0,
        })
    }

    pub fn with_flipped_omega2(mut self) -> Self {
        self.omega2_sign = -self.omega2_sign;
        self
    }

    pub fn k_beam(&self) -> f64 {
        self.params.k_kick
    }

    pub fn omega0(&self, k: f64) -> f64 {
        free_frequency(&self.params, k)
    }

    pub fn omega_a(&self) -> f64 {
        self.params.omega_a
    }

    /// Coupling of `a1`, centred on the rightward beam.
    pub fn omega1(&self, k: f64) -> f64 {
        self.params.omega * phi0(&self.params, k - self.k_beam())
    }

    /// Coupling of `a2`, centred on the leftward beam.
    pub fn omega2(&self, k: f64) -> f64 {
        self.params.omega * phi0(&self.params, k + self.k_beam())
    }

    /// Parametric drive `chi*beta*exp(-2i*omega_a*t)` under matched pump tuning.
    pub fn chi_p(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.params.chi_beta, -2.0 * self.params.omega_a * t)
    }
}

/// Dense Bogoliubov pair `(A, B)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct OpoSolution {
    t: f64,
    grid: BandGrid,
    /// Column `j` holds `A[.][j]` followed by `B[.][j]`.
    data: Vec<Complex64>,
}

pub fn initial_opo(grid: &BandGrid) -> OpoSolution {
    let dim = grid.len() + 2;
    let mut data = vec![Complex64::new(0.0, 0.0); 2 * dim * dim];
    for j in 0..dim {
        data[j * 2 * dim + j] = Complex64::new(1.0, 0.0);
    }
    OpoSolution {
        t: 0.0,
        grid: grid.clone(),
        data,
    }
}

impl OpoSolution {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &BandGrid {
        &self.grid
    }

    /// Number of atomic samples, `2n`.
    pub fn n_atoms(&self) -> usize {
        self.grid.len()
    }

    /// Size of the mode vector, atoms plus two optical modes.
    pub fn dim(&self) -> usize {
        self.grid.len() + 2
    }

    /// Row/column index of `a1`.
    pub fn a1(&self) -> usize {
        self.n_atoms()
    }

    /// Row/column index of `a2`.
    pub fn a2(&self) -> usize {
        self.n_atoms() + 1
    }

    pub fn a(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * 2 * self.dim() + row]
    }

    pub fn b(&self, row: usize, col: usize) -> Complex64 {
        let d = self.dim();
        self.data[col * 2 * d + d + row]
    }

    /// Column `col` of `A` and of `B`.
    pub fn columns(&self, col: usize) -> (&[Complex64], &[Complex64]) {
        let d = self.dim();
        self.data[col * 2 * d..(col + 1) * 2 * d].split_at(d)
    }

    fn dk(&self) -> f64 {
        self.grid.dk()
    }

    pub fn f_plus(&self, i: usize, j: usize) -> Complex64 {
        self.a(i, j) / self.dk()
    }

    pub fn f_minus(&self, i: usize, j: usize) -> Complex64 {
        self.b(i, j) / self.dk()
    }

    pub fn g1_plus(&self, i: usize) -> Complex64 {
        self.a(i, self.a1()) / self.dk().sqrt()
    }

    pub fn g1_minus(&self, i: usize) -> Complex64 {
        self.b(i, self.a1()) / self.dk().sqrt()
    }

    pub fn g2_plus(&self, i: usize) -> Complex64 {
        self.a(i, self.a2()) / self.dk().sqrt()
    }

    pub fn g2_minus(&self, i: usize) -> Complex64 {
        self.b(i, self.a2()) / self.dk().sqrt()
    }

    pub fn p1_plus(&self) -> Complex64 {
        self.a(self.a1(), self.a1())
    }

    pub fn p1_minus(&self) -> Complex64 {
        self.b(self.a1(), self.a1())
    }

    pub fn p2_plus(&self) -> Complex64 {
        self.a(self.a1(), self.a2())
    }

    pub fn p2_minus(&self) -> Complex64 {
        self.b(self.a1(), self.a2())
    }

    pub fn p3_plus(&self, j: usize) -> Complex64 {
        self.a(self.a1(), j) / self.dk().sqrt()
    }

    pub fn p3_minus(&self, j: usize) -> Complex64 {
        self.b(self.a1(), j) / self.dk().sqrt()
    }

    pub fn q1_plus(&self) -> Complex64 {
        self.a(self.a2(), self.a1())
    }

    pub fn q1_minus(&self) -> Complex64 {
        self.b(self.a2(), self.a1())
    }

    pub fn q2_plus(&self) -> Complex64 {
        self.a(self.a2(), self.a2())
    }

    pub fn q2_minus(&self) -> Complex64 {
        self.b(self.a2(), self.a2())
    }

    pub fn q3_plus(&self, j: usize) -> Complex64 {
        self.a(self.a2(), j) / self.dk().sqrt()
    }

    pub fn q3_minus(&self, j: usize) -> Complex64 {
        self.b(self.a2(), j) / self.dk().sqrt()
    }

    /// Worst violation of `A A^dagger - B B^dagger = I` and `A B^T = B A^T`.
    pub fn bogoliubov_error(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .into_par_iter()
            .map(|i| {
                let mut herm = vec![Complex64::new(0.0, 0.0); d];
                let mut sym = vec![Complex64::new(0.0, 0.0); d];
                for c in 0..d {
                    let (ac, bc) = self.columns(c);
                    let (ai, bi) = (ac[i], bc[i]);
                    for j in 0..d {
                        herm[j] += ai * ac[j].conj() - bi * bc[j].conj();
                        sym[j] += ai * bc[j] - bi * ac[j];
                    }
                }
                herm[i] -= 1.0;
                herm.iter().chain(&sym).map(|v| v.norm()).fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Worst violation of the diagonal identities alone, one per mode.
    pub fn row_norm_error(&self) -> f64 {
        let d = self.dim();
        let mut rows = vec![0.0; d];
        for c in 0..d {
            let (ac, bc) = self.columns(c);
            for (r, (a, b)) in rows.iter_mut().zip(ac.iter().zip(bc)) {
                *r += a.norm_sqr() - b.norm_sqr();
            }
        }
        rows.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max)
    }
}

pub(crate) struct OpoSystem {
    nk: usize,
    freq: Vec<f64>,
    c1: Vec<Complex64>,
    c2: Vec<Complex64>,
    support1: (usize, usize),
    support2: (usize, usize),
    detuning: Vec<f64>,
    omega_a: f64,
    chi_beta: f64,
    coupling_norm: f64,
}

pub(crate) struct OpoStage {
    lab: bool,
    c1: Vec<Complex64>,
    c2: Vec<Complex64>,
    chi: Complex64,
}

fn support(c: &[Complex64]) -> (usize, usize) {
    let lo = c.iter().position(|v| v.norm_sqr() > 0.0).unwrap_or(0);
    let hi = c.iter().rposition(|v| v.norm_sqr() > 0.0).map_or(0, |i| i + 1);
    (lo, hi.max(lo))
}

impl OpoSystem {
    pub(crate) fn new(model: &OpoModel, grid: &BandGrid) -> Self {
        let nk = grid.len();
        let sq = grid.dk().sqrt();
        let k = grid.k_values();
        let mut atoms: Vec<f64> = k.iter().map(|&k| model.omega0(k)).collect();
        let detuning = atoms.iter().map(|w| w - model.omega_a()).collect();
        atoms.push(model.omega_a());
        atoms.push(model.omega_a());
        let mut freq = atoms.clone();
        freq.extend_from_slice(&atoms);
        let c1: Vec<Complex64> = k.iter().map(|&k| Complex64::new(-model.omega1(k) * sq, 0.0)).collect();
        let c2: Vec<Complex64> = k
            .iter()
            .map(|&k| Complex64::new(-model.omega2_sign * model.omega2(k) * sq, 0.0))
            .collect();
        let norm = |c: &[Complex64]| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        OpoSystem {
            nk,
            support1: support(&c1),
            support2: support(&c2),
            coupling_norm: norm(&c1) + norm(&c2),
            freq,
            c1,
            c2,
            detuning,
            omega_a: model.omega_a(),
            chi_beta: model.params.chi_beta,
        }
    }

    fn half_rhs(&self, s: &OpoStage, x: &[Complex64], partner: &[Complex64], dx: &mut [Complex64]) {
        let (a1, a2) = (self.nk, self.nk + 1);
        let mi = |h: Complex64| Complex64::new(h.im, -h.re);
        let (xa1, xa2) = (x[a1], x[a2]);
        for d in dx[..self.nk].iter_mut() {
            *d = Complex64::new(0.0, 0.0);
        }
        let mut back1 = Complex64::new(0.0, 0.0);
        let mut back2 = Complex64::new(0.0, 0.0);
        for i in self.support1.0..self.support1.1 {
            let c = s.c1[i];
            back1 += c.conj() * x[i];
            dx[i] += mi(c * xa1);
        }
        for i in self.support2.0..self.support2.1 {
            let c = s.c2[i];
            back2 += c.conj() * x[i];
            dx[i] += mi(c * xa2);
        }
        dx[a1] = mi(back1 + s.chi * partner[a2].conj());
        dx[a2] = mi(back2 + s.chi * partner[a1].conj());
        if s.lab {
            for i in 0..self.nk + 2 {
                dx[i] += mi(self.freq[i] * x[i]);
            }
        }
    }
}

impl ColumnSystem for OpoSystem {
    type Stage = OpoStage;

    fn column_len(&self) -> usize {
        2 * (self.nk + 2)
    }

    fn stage(&self, t0: f64, tau: f64, frame: Frame) -> OpoStage {
        match frame {
            Frame::Lab => OpoStage {
                lab: true,
                c1: self.c1.clone(),
                c2: self.c2.clone(),
                chi: Complex64::from_polar(self.chi_beta, -2.0 * self.omega_a * (t0 + tau)),
            },
            Frame::Interaction => {
                let rot: Vec<Complex64> = self
                    .detuning
                    .iter()
                    .map(|d| Complex64::from_polar(1.0, d * tau))
                    .collect();
                OpoStage {
                    lab: false,
                    c1: self.c1.iter().zip(&rot).map(|(c, r)| c * r).collect(),
                    c2: self.c2.iter().zip(&rot).map(|(c, r)| c * r).collect(),
                    // exp(i wa tau) chi(t0 + tau) exp(i wa tau) does not depend on tau
                    chi: Complex64::from_polar(self.chi_beta, -2.0 * self.omega_a * t0),
                }
            }
        }
    }

    fn rhs(&self, s: &OpoStage, y: &[Complex64], dy: &mut [Complex64]) {
        let d = self.nk + 2;
        let (a, b) = y.split_at(d);
        let (da, db) = dy.split_at_mut(d);
        self.half_rhs(s, a, b, da);
        self.half_rhs(s, b, a, db);
    }

    fn free_frequencies(&self) -> &[f64] {
        &self.freq
    }

    fn spectral_radius(&self, frame: Frame) -> f64 {
        let coupling = self.coupling_norm + self.chi_beta;
        match frame {
            Frame::Lab => self.freq.iter().fold(0.0_f64, |m, w| m.max(w.abs())) + coupling,
            Frame::Interaction => coupling,
        }
    }

    fn column_invariant(&self, y: &[Complex64]) -> f64 {
        let (a, b) = y.split_at(self.nk + 2);
        a.iter().map(|v| v.norm_sqr()).sum::<f64>() - b.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }
}

/// Largest overlap `|Omega1(k) Omega2(k)|` on the grid relative to the squared peak coupling.
pub fn coupling_overlap(model: &OpoModel, grid: &BandGrid) -> f64 {
    let peak = model.omega1(model.k_beam()).powi(2);
    if peak == 0.0 {
        return 0.0;
    }
    grid.k_values()
        .iter()
        .map(|&k| (model.omega1(k) * model.omega2(k)).abs())
        .fold(0.0, f64::max)
        / peak
}

pub struct OpoPropagator {
    sys: OpoSystem,
    grid: BandGrid,
    integrator: Integrator,
}

impl OpoPropagator {
    pub fn new(model: &OpoModel, grid: &BandGrid, integrator: Integrator) -> Result<Self> {
        model.params.validate()?;
        integrator.validate()?;
        if model.omega2_sign.abs() != 1.0 {
            return Err(Error::param("omega2_sign", "must be +1 or -1"));
        }
        if grid.bands().len() != 2 {
            return Err(Error::InvalidGrid("the twin-beam model needs exactly two bands".into()));
        }
        let sys = OpoSystem::new(model, grid);
        check_step(&sys, integrator.dt, integrator.frame)?;
        Ok(OpoPropagator {
            sys,
            grid: grid.clone(),
            integrator,
        })
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    pub fn step(&self, sol: &mut OpoSolution, dt: f64) -> Result<()> {
        assert_eq!(sol.grid, self.grid, "solution grid differs from propagator grid");
        check_step(&self.sys, dt, self.integrator.frame)?;
        step_columns(&self.sys, &mut sol.data, sol.t, dt, self.integrator.frame)?;
        sol.t += dt;
        Ok(())
    }

    pub fn advance_to(&self, sol: &mut OpoSolution, t: f64) -> Result<()> {
        let start = sol.t;
        let dt = self.integrator.dt;
        let (whole, rem) = schedule(start, t, dt);
        for s in 0..whole {
            step_columns(
                &self.sys,
                &mut sol.data,
                start + s as f64 * dt,
                dt,
                self.integrator.frame,
            )?;
        }
        if rem > 0.0 {
            step_columns(
                &self.sys,
                &mut sol.data,
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

pub fn step_opo(sol: &OpoSolution, model: &OpoModel, dt: f64, frame: Frame) -> Result<OpoSolution> {
    let prop = OpoPropagator::new(model, &sol.grid, Integrator { dt: dt.abs(), frame })?;
    let mut next = sol.clone();
    prop.step(&mut next, dt)?;
    Ok(next)
}

pub fn evolve_opo_observed<T>(
    model: &OpoModel,
    grid: &BandGrid,
    t_final: f64,
    integrator: Integrator,
    times: &[f64],
    mut observe: impl FnMut(&OpoSolution) -> Result<T>,
) -> Result<Vec<T>> {
    let default = [t_final];
    let times = if times.is_empty() { &default[..] } else { times };
    validate_times(t_final, times)?;
    let prop = OpoPropagator::new(model, grid, integrator)?;
    let mut sol = initial_opo(grid);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        prop.advance_to(&mut sol, t)?;
        out.push(observe(&sol)?);
    }
    Ok(out)
}

pub fn evolve_opo(
    model: &OpoModel,
    grid: &BandGrid,
    t_final: f64,
    integrator: Integrator,
    times: &[f64],
) -> Result<Vec<OpoSolution>> {
    evolve_opo_observed(model, grid, t_final, integrator, times, |s| Ok(s.clone()))
}
