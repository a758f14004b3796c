//! Quadratures of the two beams over finite windows and the inferred-variance
//! entanglement test built from them.
//!
//! `W = int L^*(x) Psi(x) dx` over a window, `X = W + W^dagger`,
//! `Y = i(W - W^dagger)`. On a band-limited grid the window mode is projected
//! onto the band and renormalized, so `[W, W^dagger] = 1` holds exactly and
//! the vacuum gives `V(X) = V(Y) = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gaussian::{anomalous, LinearForm, Occupation};
use crate::error::{Error, Result};
use crate::grids::BandGrid;
use crate::opo::OpoSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    /// Each window's carrier follows its own beam: `+k_beam` right, `-k_beam` left.
    Directional,
    /// Both windows use `+k_beam`.
    Literal,
}

/// Windows `[x2, x1]` and `[-x1, -x2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprWindow {
    pub x1: f64,
    pub x2: f64,
    pub k_carrier: f64,
    pub omega_a: f64,
    pub carrier: Carrier,
}

impl EprWindow {
    pub fn new(x1: f64, x2: f64, k_carrier: f64, omega_a: f64, carrier: Carrier) -> Result<Self> {
        if !(x2.is_finite() && x1.is_finite() && x2 > 0.0 && x1 > x2) {
            return Err(Error::param(
                "epr window",
                format!("need x1 > x2 > 0, got x1 = {x1}, x2 = {x2}"),
            ));
        }
        Ok(EprWindow {
            x1,
            x2,
            k_carrier,
            omega_a,
            carrier,
        })
    }

    fn check(&self, grid: &BandGrid) -> Result<()> {
        let xg = grid.position_grid();
        if !xg.contains(self.x1) || !xg.contains(-self.x1) {
            return Err(Error::param(
                "epr window",
                format!(
                    "x1 = {:e} m exceeds the position half-window {:e} m",
                    self.x1,
                    0.5 * xg.width()
                ),
            ));
        }
        Ok(())
    }

    /// Normalized band weights of `W` for one side and the captured fraction before normalization.
    pub fn weights(&self, grid: &BandGrid, right: bool, t: f64) -> (Vec<Complex64>, f64) {
        let (lo, hi) = if right {
            (self.x2, self.x1)
        } else {
            (-self.x1, -self.x2)
        };
        let kappa = match (self.carrier, right) {
            (Carrier::Literal, _) | (Carrier::Directional, true) => self.k_carrier,
            (Carrier::Directional, false) => -self.k_carrier,
        };
        let len = hi - lo;
        let pre = Complex64::from_polar((grid.dk() / (2.0 * PI)).sqrt() / len.sqrt(), self.omega_a * t);
        let mut w: Vec<Complex64> = grid
            .k_values()
            .iter()
            .map(|&k| pre * window_integral(k - kappa, lo, hi))
            .collect();
        let capture: f64 = w.iter().map(|v| v.norm_sqr()).sum();
        let s = 1.0 / capture.sqrt();
        for v in &mut w {
            *v *= s;
        }
        (w, capture)
    }
}

/// `int_lo^hi e^{iqx} dx`
fn window_integral(q: f64, lo: f64, hi: f64) -> Complex64 {
    let len = hi - lo;
    let h = 0.5 * q * len;
    // sinc form stays accurate as q -> 0
    let sinc = if h.abs() < 1e-8 { 1.0 - h * h / 6.0 } else { h.sin() / h };
    Complex64::from_polar(len * sinc, 0.5 * q * (hi + lo))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprResult {
    pub vx_minus: f64,
    pub vy_minus: f64,
    pub vx_plus: f64,
    pub vy_plus: f64,
    /// `V(X-, Y+)`
    pub cov_xm_yp: f64,
    /// `V(Y-, X+)`
    pub cov_ym_xp: f64,
    pub vinf_x_minus: Option<f64>,
    pub vinf_y_minus: Option<f64>,
    pub product: Option<f64>,
    /// Fraction of each window mode (right, left) representable on the band grid.
    pub capture: [f64; 2],
}

struct Quadratures {
    x: LinearForm,
    y: LinearForm,
}

fn quadratures(sol: &OpoSolution, w: &[Complex64]) -> Quadratures {
    let form = LinearForm::from_opo(sol, w);
    let dag = form.dagger();
    Quadratures {
        x: form.plus(&dag),
        y: form.scaled(Complex64::i()).plus(&dag.scaled(-Complex64::i())),
    }
}

/// Symmetrized covariance of two Hermitian zero-mean forms.
fn sym_cov(a: &LinearForm, b: &LinearForm, occ: &[f64]) -> f64 {
    0.5 * (anomalous(a, b, occ) + anomalous(b, a, occ)).re
}

pub fn epr_inference(sol: &OpoSolution, window: &EprWindow, occupation: &Occupation) -> Result<EprResult> {
    let grid = sol.grid();
    window.check(grid)?;
    let (wr, cap_r) = window.weights(grid, true, sol.t());
    let (wl, cap_l) = window.weights(grid, false, sol.t());
    let plus = quadratures(sol, &wr);
    let minus = quadratures(sol, &wl);
    let occ = occupation.per_mode(sol.n_atoms(), 2);
    let vx_minus = sym_cov(&minus.x, &minus.x, &occ);
    let vy_minus = sym_cov(&minus.y, &minus.y, &occ);
    let vx_plus = sym_cov(&plus.x, &plus.x, &occ);
    let vy_plus = sym_cov(&plus.y, &plus.y, &occ);
    let cov_xm_yp = sym_cov(&minus.x, &plus.y, &occ);
    let cov_ym_xp = sym_cov(&minus.y, &plus.x, &occ);
    let vinf_x_minus = (vy_plus > 0.0).then(|| vx_minus - cov_xm_yp * cov_xm_yp / vy_plus);
    let vinf_y_minus = (vx_plus > 0.0).then(|| vy_minus - cov_ym_xp * cov_ym_xp / vx_plus);
    Ok(EprResult {
        vx_minus,
        vy_minus,
        vx_plus,
        vy_plus,
        cov_xm_yp,
        cov_ym_xp,
        vinf_x_minus,
        vinf_y_minus,
        product: vinf_x_minus.zip(vinf_y_minus).map(|(a, b)| a * b),
        capture: [cap_r, cap_l],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{opo_default_params, PhysicalParams};
    use crate::opo::{evolve_opo, initial_opo, OpoModel};
    use crate::propagate::Integrator;

    fn window() -> EprWindow {
        EprWindow::new(1.8e-3, 0.8e-3, 1.6e7, 20.0, Carrier::Directional).unwrap()
    }

    #[test]
    fn window_validation() {
        assert!(EprWindow::new(1e-3, 2e-3, 1.6e7, 20.0, Carrier::Directional).is_err());
        assert!(EprWindow::new(1e-3, 0.0, 1.6e7, 20.0, Carrier::Directional).is_err());
        let g = BandGrid::twin(32, 1.6e7, 8e4).unwrap();
        let far = EprWindow::new(0.5, 0.1, 1.6e7, 20.0, Carrier::Directional).unwrap();
        assert!(epr_inference(&initial_opo(&g), &far, &Occupation::vacuum()).is_err());
    }

    #[test]
    fn window_integral_limits() {
        let v = window_integral(0.0, 1.0, 3.0);
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let q = 1234.5;
        let direct =
            (Complex64::from_polar(1.0, q * 3e-3) - Complex64::from_polar(1.0, q * 1e-3)) / Complex64::new(0.0, q);
        assert!((window_integral(q, 1e-3, 3e-3) - direct).norm() < 1e-15);
    }

    #[test]
    fn directional_window_captures_the_beam_band() {
        let g = BandGrid::twin(256, 1.6e7, 8e4).unwrap();
        let (_, cr) = window().weights(&g, true, 0.0);
        let (_, cl) = window().weights(&g, false, 0.0);
        assert!(cr > 0.99 && cl > 0.99);
    }

    #[test]
    fn vacuum_saturates_uncertainty() {
        let g = BandGrid::twin(128, 1.6e7, 8e4).unwrap();
        let r = epr_inference(&initial_opo(&g), &window(), &Occupation::vacuum()).unwrap();
        for v in [r.vx_minus, r.vy_minus, r.vx_plus, r.vy_plus] {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!((r.product.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncertainty_bound_under_drive() {
        let g = BandGrid::twin(128, 1.6e7, 8e4).unwrap();
        let model = OpoModel::new(opo_default_params()).unwrap();
        let times = [0.02, 0.05, 0.08];
        let sols = evolve_opo(&model, &g, 0.08, Integrator::default(), &times).unwrap();
        for s in &sols {
            let r = epr_inference(s, &window(), &Occupation::vacuum()).unwrap();
            assert!(r.vx_minus * r.vy_minus >= 1.0 - 1e-9);
            assert!(r.vx_plus * r.vy_plus >= 1.0 - 1e-9);
        }
        let quiet = OpoModel::new(PhysicalParams {
            omega: 0.0,
            ..opo_default_params()
        })
        .unwrap();
        let s = evolve_opo(&quiet, &g, 0.05, Integrator::default(), &[0.05])
            .unwrap()
            .pop()
            .unwrap();
        let r = epr_inference(&s, &window(), &Occupation::vacuum()).unwrap();
        assert!((r.vx_minus * r.vy_minus - 1.0).abs() < 1e-9);
    }
}
