//! Second and fourth moments of the twin-beam Gaussian state.
//!
//! Every field operator at time `t` is a linear form
//! `O = sum_nu u_nu a_nu + v_nu a_nu^dagger` in the initial mode operators,
//! whose state is a product of (thermal or vacuum) number states. Two-point
//! functions follow from the forms directly, and quartic moments of the
//! zero-mean Gaussian state factor into products of two-point functions:
//!
//! `Cov(A^dagger B, C^dagger D) = <A^dagger C^dagger><B D> + <A^dagger D><B C^dagger>`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_point, point_weights, Profile};
use crate::error::{Error, Result};
use crate::opo::OpoSolution;
use crate::single::SingleModeSolution;
use crate::HBAR;

/// `sum_nu u_nu a_nu + v_nu a_nu^dagger` over the initial modes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl LinearForm {
    pub fn dagger(&self) -> LinearForm {
        LinearForm {
            u: self.v.iter().map(|x| x.conj()).collect(),
            v: self.u.iter().map(|x| x.conj()).collect(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> LinearForm {
        LinearForm {
            u: self.u.iter().map(|x| c * x).collect(),
            v: self.v.iter().map(|x| c * x).collect(),
        }
    }

    pub fn plus(&self, other: &LinearForm) -> LinearForm {
        LinearForm {
            u: self.u.iter().zip(&other.u).map(|(a, b)| a + b).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| a + b).collect(),
        }
    }

    /// Atomic-field form `sum_i w_i X_i(t)` over the atom rows of a twin-beam solution.
    pub fn from_opo(sol: &OpoSolution, atom_weights: &[Complex64]) -> LinearForm {
        assert_eq!(atom_weights.len(), sol.n_atoms());
        let (u, v): (Vec<_>, Vec<_>) = (0..sol.dim())
            .into_par_iter()
            .map(|c| {
                let (a, b) = sol.columns(c);
                let dot = |col: &[Complex64]| atom_weights.iter().zip(col).map(|(w, x)| w * x).sum::<Complex64>();
                (dot(a), dot(b))
            })
            .unzip();
        LinearForm { u, v }
    }

    /// Atomic-field form over the atom rows of a single-probe solution.
    pub fn from_single(sol: &SingleModeSolution, atom_weights: &[Complex64]) -> LinearForm {
        let n = sol.grid().n();
        assert_eq!(atom_weights.len(), n);
        let u: Vec<Complex64> = (0..sol.dim())
            .into_par_iter()
            .map(|c| atom_weights.iter().zip(&sol.column(c)[..n]).map(|(w, x)| w * x).sum())
            .collect();
        let v = vec![Complex64::new(0.0, 0.0); u.len()];
        LinearForm { u, v }
    }
}

/// Thermal occupation of the two optical modes; atoms always start in vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Occupation {
    pub optical: [f64; 2],
}

impl Occupation {
    pub fn vacuum() -> Self {
        Occupation::default()
    }

    pub fn thermal(n1: f64, n2: f64) -> Self {
        Occupation { optical: [n1, n2] }
    }

    /// Per-mode occupation for a mode vector with `n_atoms` atoms followed by the optical modes.
    pub fn per_mode(&self, n_atoms: usize, n_optical: usize) -> Vec<f64> {
        let mut occ = vec![0.0; n_atoms];
        occ.extend(self.optical.iter().take(n_optical));
        occ
    }
}

/// `<O1 O2>`
pub fn anomalous(o1: &LinearForm, o2: &LinearForm, occ: &[f64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (nu, &n) in occ[..o1.u.len()].iter().enumerate() {
        s += o1.u[nu] * o2.v[nu] * (1.0 + n);
        if n != 0.0 {
            s += o1.v[nu] * o2.u[nu] * n;
        }
    }
    s
}

/// `<O1^dagger O2>`
pub fn normal(o1: &LinearForm, o2: &LinearForm, occ: &[f64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (nu, &n) in occ[..o1.u.len()].iter().enumerate() {
        s += o1.v[nu].conj() * o2.v[nu] * (1.0 + n);
        if n != 0.0 {
            s += o1.u[nu].conj() * o2.u[nu] * n;
        }
    }
    s
}

/// `<O1 O2^dagger>`
pub fn antinormal(o1: &LinearForm, o2: &LinearForm, occ: &[f64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (nu, &n) in occ[..o1.u.len()].iter().enumerate() {
        s += o1.u[nu] * o2.u[nu].conj() * (1.0 + n);
        if n != 0.0 {
            s += o1.v[nu] * o2.v[nu].conj() * n;
        }
    }
    s
}

/// `coef * O_left^dagger O_right`, indices into a kernel set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticTerm {
    pub coef: Complex64,
    pub left: usize,
    pub right: usize,
}

/// Two-point functions among a set of probe forms: the field and its gradient
/// at each requested point.
#[derive(Debug, Clone)]
pub struct GaussianKernels {
    points: Vec<f64>,
    mass: f64,
    size: usize,
    normal: Vec<Complex64>,
    anomalous: Vec<Complex64>,
    antinormal: Vec<Complex64>,
}

impl GaussianKernels {
    /// Kernels from explicit forms, two per point (field then gradient).
    pub fn from_point_forms(points: Vec<f64>, forms: &[LinearForm], occupation: &[f64], mass: f64) -> Self {
        assert_eq!(
            forms.len(),
            2 * points.len(),
            "need a field and a gradient form per point"
        );
        let p = forms.len();
        let table = |f: fn(&LinearForm, &LinearForm, &[f64]) -> Complex64| -> Vec<Complex64> {
            (0..p * p)
                .into_par_iter()
                .map(|ab| f(&forms[ab / p], &forms[ab % p], occupation))
                .collect()
        };
        GaussianKernels {
            points,
            mass,
            size: p,
            normal: table(normal),
            anomalous: table(anomalous),
            antinormal: table(antinormal),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Probe index of the field (or its gradient) at `x`.
    pub fn probe(&self, x: f64, gradient: bool) -> Option<usize> {
        self.points
            .iter()
            .position(|&p| p == x)
            .map(|i| 2 * i + usize::from(gradient))
    }

    fn require(&self, x: f64) -> Result<usize> {
        self.probe(x, false)
            .ok_or_else(|| Error::MissingProbe(format!("no kernel point at x = {x:e} m")))
    }

    fn at(&self, table: &[Complex64], a: usize, b: usize) -> Complex64 {
        table[a * self.size + b]
    }

    /// `<O_a^dagger O_b>`; with field probes this is `n(x, x')`.
    pub fn normal(&self, a: usize, b: usize) -> Complex64 {
        self.at(&self.normal, a, b)
    }

    /// `<O_a O_b>`; with field probes this is `m(x, x')`.
    pub fn anomalous(&self, a: usize, b: usize) -> Complex64 {
        self.at(&self.anomalous, a, b)
    }

    /// `<O_a O_b^dagger>`
    pub fn antinormal(&self, a: usize, b: usize) -> Complex64 {
        self.at(&self.antinormal, a, b)
    }

    /// Largest deviation from `n` Hermitian and `m` symmetric over all probe pairs.
    pub fn symmetry_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.size {
            for b in 0..self.size {
                worst = worst
                    .max((self.normal(a, b) - self.normal(b, a).conj()).norm())
                    .max((self.anomalous(a, b) - self.anomalous(b, a)).norm());
            }
        }
        worst
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        let i = self.require(x)?;
        Ok(self.normal(i, i).re)
    }

    /// Flux operator at `x` as a sum of normally ordered bilinears.
    pub fn flux_terms(&self, x: f64) -> Result<[QuadraticTerm; 2]> {
        let f = self.require(x)?;
        let alpha = Complex64::new(0.0, -HBAR / (2.0 * self.mass));
        Ok([
            QuadraticTerm {
                coef: alpha,
                left: f,
                right: f + 1,
            },
            QuadraticTerm {
                coef: -alpha,
                left: f + 1,
                right: f,
            },
        ])
    }

    pub fn mean(&self, q: &[QuadraticTerm]) -> Complex64 {
        q.iter().map(|t| t.coef * self.normal(t.left, t.right)).sum()
    }

    /// `<Q1 Q2> - <Q1><Q2>` for bilinear observables.
    pub fn covariance(&self, q1: &[QuadraticTerm], q2: &[QuadraticTerm]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for t1 in q1 {
            for t2 in q2 {
                let (a, b, c, d) = (t1.left, t1.right, t2.left, t2.right);
                let pairing =
                    self.anomalous(c, a).conj() * self.anomalous(b, d) + self.normal(a, d) * self.antinormal(b, c);
                s += t1.coef * t2.coef * pairing;
            }
        }
        s
    }

    pub fn flux(&self, x: f64) -> Result<f64> {
        Ok(self.mean(&self.flux_terms(x)?).re)
    }

    pub fn flux_variance(&self, x: f64) -> Result<f64> {
        let j = self.flux_terms(x)?;
        Ok(self.covariance(&j, &j).re)
    }
}

/// Kernels of the atomic field at `points` for a twin-beam snapshot.
pub fn build_kernels(sol: &OpoSolution, points: &[f64], occupation: &Occupation, mass: f64) -> Result<GaussianKernels> {
    let grid = sol.grid();
    let xgrid = grid.position_grid();
    let k = grid.k_values();
    let sq = grid.dk().sqrt();
    let mut forms = Vec::with_capacity(2 * points.len());
    for &x in points {
        check_point(&xgrid, x)?;
        for gradient in [false, true] {
            let w: Vec<Complex64> = point_weights(&k, x, gradient).into_iter().map(|w| w * sq).collect();
            forms.push(LinearForm::from_opo(sol, &w));
        }
    }
    let occ = occupation.per_mode(sol.n_atoms(), 2);
    Ok(GaussianKernels::from_point_forms(points.to_vec(), &forms, &occ, mass))
}

/// `rho(x) = <Psi^dagger(x) Psi(x)>` over the conjugate position window.
pub fn density_opo(sol: &OpoSolution, occupation: &Occupation) -> Profile {
    let grid = sol.grid();
    let na = sol.n_atoms();
    let occ = occupation.per_mode(na, 2);
    let scale = 1.0 / grid.dk().sqrt();
    let unscaled = |col: &[Complex64]| -> Vec<Complex64> { col[..na].iter().map(|v| v * scale).collect() };
    let parts: Vec<Vec<f64>> = (0..sol.dim())
        .into_par_iter()
        .map(|c| {
            let (a, b) = sol.columns(c);
            let n = occ[c];
            let mut rho: Vec<f64> = grid
                .to_position(&unscaled(b))
                .values()
                .iter()
                .map(|v| v.norm_sqr() * (1.0 + n))
                .collect();
            if n != 0.0 {
                for (r, v) in rho.iter_mut().zip(grid.to_position(&unscaled(a)).values()) {
                    *r += v.norm_sqr() * n;
                }
            }
            rho
        })
        .collect();
    let xgrid = grid.position_grid();
    let mut values = vec![0.0; xgrid.n()];
    for part in &parts {
        for (v, p) in values.iter_mut().zip(part) {
            *v += p;
        }
    }
    Profile { grid: xgrid, values }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxDifference {
    /// `V(J(x0) + J(-x0))`: the outward fluxes `|J(x0)|` and `|J(-x0)|` differ by this sum.
    pub outward_variance: f64,
    /// `V(J(x0) - J(-x0))` with signed fluxes.
    pub signed_variance: f64,
    /// `V(J(x0)) + V(J(-x0))`, the value for uncorrelated beams.
    pub baseline: f64,
    /// `outward_variance / baseline`
    pub ratio: Option<f64>,
    /// `signed_variance / baseline`
    pub signed_ratio: Option<f64>,
}

pub fn flux_difference_variance(kernels: &GaussianKernels, x0: f64) -> Result<FluxDifference> {
    let jp = kernels.flux_terms(x0)?;
    let jm = kernels.flux_terms(-x0)?;
    let vp = kernels.covariance(&jp, &jp).re;
    let vm = kernels.covariance(&jm, &jm).re;
    let c = kernels.covariance(&jp, &jm).re;
    let outward_variance = vp + vm + 2.0 * c;
    let signed_variance = vp + vm - 2.0 * c;
    let baseline = vp + vm;
    let ratio_of = |v: f64| (baseline > 0.0).then(|| v / baseline);
    Ok(FluxDifference {
        outward_variance,
        signed_variance,
        baseline,
        ratio: ratio_of(outward_variance),
        signed_ratio: ratio_of(signed_variance),
    })
}
