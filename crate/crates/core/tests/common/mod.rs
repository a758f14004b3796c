//! Independent reference calculations in an explicit truncated Fock basis.

#![allow(dead_code)]

use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Photon-number mean and variance of `D(alpha) S(r) |0>` for real `alpha`, `r`,
/// from its Fock amplitudes.
///
/// The state is annihilated by `cosh(r)(a - alpha) + sinh(r)(a^dagger - alpha)`,
/// which gives the three-term recurrence
/// `mu sqrt(n+1) c_{n+1} = alpha (mu + nu) c_n - nu sqrt(n) c_{n-1}`.
pub fn squeezed_number_moments(alpha_sq: f64, r: f64, cutoff: usize) -> (f64, f64) {
    let alpha = alpha_sq.sqrt();
    let (mu, nu) = (r.cosh(), r.sinh());
    let mut amp = vec![0.0_f64; cutoff + 1];
    amp[0] = 1.0;
    for n in 0..cutoff {
        let prev = if n > 0 { amp[n - 1] } else { 0.0 };
        amp[n + 1] = (alpha * (mu + nu) * amp[n] - nu * (n as f64).sqrt() * prev) / (mu * ((n + 1) as f64).sqrt());
        // amplitudes grow enormously before the peak; only ratios matter
        if amp[n + 1].abs() > 1e150 {
            for a in amp.iter_mut().take(n + 2) {
                *a *= 1e-150;
            }
        }
    }
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (n, a) in amp.iter().enumerate() {
        let p = a * a;
        let n = n as f64;
        z += p;
        m1 += n * p;
        m2 += n * n * p;
    }
    let mean = m1 / z;
    (mean, m2 / z - mean * mean)
}

/// Truncated multimode Fock space with state vectors indexed by
/// `sum_nu n_nu (cutoff + 1)^nu`.
pub struct FockSpace {
    pub modes: usize,
    pub cutoff: usize,
}

impl FockSpace {
    pub fn dim(&self) -> usize {
        (self.cutoff + 1).pow(self.modes as u32)
    }

    fn occupation(&self, idx: usize, mode: usize) -> usize {
        (idx / (self.cutoff + 1).pow(mode as u32)) % (self.cutoff + 1)
    }

    pub fn vacuum(&self) -> Vec<Complex64> {
        let mut v = vec![c(0.0, 0.0); self.dim()];
        v[0] = c(1.0, 0.0);
        v
    }

    fn ladder(&self, mode: usize, raise: bool, coef: Complex64, state: &[Complex64], out: &mut [Complex64]) {
        if coef == c(0.0, 0.0) {
            return;
        }
        let stride = (self.cutoff + 1).pow(mode as u32);
        for (idx, &amp) in state.iter().enumerate() {
            if amp == c(0.0, 0.0) {
                continue;
            }
            let n = self.occupation(idx, mode);
            if raise && n < self.cutoff {
                out[idx + stride] += coef * amp * ((n + 1) as f64).sqrt();
            } else if !raise && n > 0 {
                out[idx - stride] += coef * amp * (n as f64).sqrt();
            }
        }
    }

    /// `(sum_nu u_nu a_nu + v_nu a_nu^dagger) |state>`
    pub fn apply(&self, u: &[Complex64], v: &[Complex64], state: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); state.len()];
        for nu in 0..self.modes {
            self.ladder(nu, false, u[nu], state, &mut out);
            self.ladder(nu, true, v[nu], state, &mut out);
        }
        out
    }

    /// Hermitian conjugate of [`FockSpace::apply`]'s operator.
    pub fn apply_dagger(&self, u: &[Complex64], v: &[Complex64], state: &[Complex64]) -> Vec<Complex64> {
        let uc: Vec<Complex64> = v.iter().map(|x| x.conj()).collect();
        let vc: Vec<Complex64> = u.iter().map(|x| x.conj()).collect();
        self.apply(&uc, &vc, state)
    }
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// A single-mode form `u . a + v . a^dagger`.
#[derive(Clone, Debug)]
pub struct Form {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

/// `sum_t coef_t O_{l_t}^dagger O_{r_t}` applied to a state.
pub fn apply_quadratic(
    space: &FockSpace,
    forms: &[Form],
    terms: &[(Complex64, usize, usize)],
    state: &[Complex64],
) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); state.len()];
    for &(coef, l, r) in terms {
        let right = space.apply(&forms[r].u, &forms[r].v, state);
        let both = space.apply_dagger(&forms[l].u, &forms[l].v, &right);
        for (o, x) in out.iter_mut().zip(both) {
            *o += coef * x;
        }
    }
    out
}

/// Vacuum variance of a Hermitian quadratic operator by explicit matrix action.
pub fn vacuum_variance(space: &FockSpace, forms: &[Form], terms: &[(Complex64, usize, usize)]) -> f64 {
    let vac = space.vacuum();
    let q = apply_quadratic(space, forms, terms, &vac);
    let qq = apply_quadratic(space, forms, terms, &q);
    let mean = inner(&vac, &q);
    (inner(&vac, &qq) - mean * mean).re
}

/// Bogoliubov pair `(A, B)` with `a_out = A a + B a^dagger`, stored row-major.
#[derive(Clone, Debug)]
pub struct Bogoliubov {
    pub n: usize,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl Bogoliubov {
    pub fn identity(n: usize) -> Self {
        let mut a = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = c(1.0, 0.0);
        }
        Bogoliubov {
            n,
            a,
            b: vec![c(0.0, 0.0); n * n],
        }
    }

    fn matmul(n: usize, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    out[i * n + j] += x[i * n + k] * y[k * n + j];
                }
            }
        }
        out
    }

    /// Applies `e` after `self`.
    pub fn then(&self, e: &Bogoliubov) -> Bogoliubov {
        let n = self.n;
        let conj = |m: &[Complex64]| m.iter().map(|x| x.conj()).collect::<Vec<_>>();
        let add = |x: Vec<Complex64>, y: Vec<Complex64>| x.iter().zip(&y).map(|(a, b)| a + b).collect::<Vec<_>>();
        Bogoliubov {
            n,
            a: add(Self::matmul(n, &e.a, &self.a), Self::matmul(n, &e.b, &conj(&self.b))),
            b: add(Self::matmul(n, &e.a, &self.b), Self::matmul(n, &e.b, &conj(&self.a))),
        }
    }

    /// `a_i -> cosh r a_i + e^{i phi} sinh r a_j^dagger` and the partner relation.
    pub fn two_mode_squeezer(n: usize, i: usize, j: usize, r: f64, phi: f64) -> Self {
        let mut s = Bogoliubov::identity(n);
        let ch = c(r.cosh(), 0.0);
        let sh = Complex64::from_polar(r.sinh(), phi);
        s.a[i * n + i] = ch;
        s.a[j * n + j] = ch;
        s.b[i * n + j] = sh;
        s.b[j * n + i] = sh;
        s
    }

    pub fn beam_splitter(n: usize, i: usize, j: usize, theta: f64, phi: f64) -> Self {
        let mut s = Bogoliubov::identity(n);
        let (ct, st) = (theta.cos(), theta.sin());
        let e = Complex64::from_polar(1.0, phi);
        s.a[i * n + i] = c(ct, 0.0);
        s.a[i * n + j] = -e.conj() * st;
        s.a[j * n + i] = e * st;
        s.a[j * n + j] = c(ct, 0.0);
        s
    }

    pub fn single_squeezer(n: usize, i: usize, r: f64, phi: f64) -> Self {
        let mut s = Bogoliubov::identity(n);
        s.a[i * n + i] = c(r.cosh(), 0.0);
        s.b[i * n + i] = Complex64::from_polar(r.sinh(), phi);
        s
    }

    /// Form `sum_i w_i (a_out)_i` in terms of the input operators.
    pub fn form(&self, w: &[Complex64]) -> Form {
        let n = self.n;
        let mut u = vec![c(0.0, 0.0); n];
        let mut v = vec![c(0.0, 0.0); n];
        for (i, wi) in w.iter().enumerate().take(n) {
            for nu in 0..n {
                u[nu] += wi * self.a[i * n + nu];
                v[nu] += wi * self.b[i * n + nu];
            }
        }
        Form { u, v }
    }

    /// `max |[a_i, a_j^dagger] - delta_ij|` and `max |[a_i, a_j]|`.
    pub fn commutator_error(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut comm = c(0.0, 0.0);
                let mut anti = c(0.0, 0.0);
                for k in 0..n {
                    comm += self.a[i * n + k] * self.a[j * n + k].conj() - self.b[i * n + k] * self.b[j * n + k].conj();
                    anti += self.a[i * n + k] * self.b[j * n + k] - self.b[i * n + k] * self.a[j * n + k];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((comm - target).norm()).max(anti.norm());
            }
        }
        worst
    }
}

/// Random-looking but fixed inputs for one Wick comparison.
#[derive(Clone, Debug)]
pub struct WickCase {
    pub squeeze: [f64; 3],
    pub angles: [f64; 4],
    pub weights: Vec<(f64, f64)>,
}

/// Flux-sum, flux-difference and baseline variances for four vacuum modes,
/// computed by explicit operator algebra and by the library's Wick engine.
pub fn wick_comparison(case: &WickCase) -> ([f64; 3], [f64; 3]) {
    use atomlaser::observables::{flux_difference_variance, GaussianKernels, LinearForm};

    let n = 4;
    let [r1, r2, r3] = case.squeeze;
    let [t1, t2, p1, p2] = case.angles;
    let bog = Bogoliubov::identity(n)
        .then(&Bogoliubov::two_mode_squeezer(n, 0, 1, r1, p1))
        .then(&Bogoliubov::beam_splitter(n, 1, 2, t1, p2))
        .then(&Bogoliubov::single_squeezer(n, 3, r2, p1 - p2))
        .then(&Bogoliubov::two_mode_squeezer(n, 2, 3, r3, p2))
        .then(&Bogoliubov::beam_splitter(n, 0, 3, t2, p1));
    assert!(bog.commutator_error() < 1e-12);

    // field and gradient at +x0, then at -x0
    let forms: Vec<Form> = case
        .weights
        .chunks(n)
        .map(|w| bog.form(&w.iter().map(|&(a, b)| c(a, b)).collect::<Vec<_>>()))
        .collect();
    assert_eq!(forms.len(), 4);

    // mass chosen so that the flux prefactor -i hbar/(2m) is exactly -i
    let mass = atomlaser::HBAR / 2.0;
    let alpha = c(0.0, -1.0);
    let flux = |f: usize| vec![(alpha, f, f + 1), (-alpha, f + 1, f)];
    let sum: Vec<_> = flux(0).into_iter().chain(flux(2)).collect();
    let diff: Vec<_> = flux(0)
        .into_iter()
        .chain(flux(2).into_iter().map(|(a, l, r)| (-a, l, r)))
        .collect();
    let space = FockSpace { modes: n, cutoff: 6 };
    let oracle = [
        vacuum_variance(&space, &forms, &sum),
        vacuum_variance(&space, &forms, &diff),
        vacuum_variance(&space, &forms, &flux(0)) + vacuum_variance(&space, &forms, &flux(2)),
    ];

    let x0 = 1e-3;
    let lin: Vec<LinearForm> = forms
        .iter()
        .map(|f| LinearForm {
            u: f.u.clone(),
            v: f.v.clone(),
        })
        .collect();
    let kernels = GaussianKernels::from_point_forms(vec![x0, -x0], &lin, &[0.0; 4], mass);
    let fd = flux_difference_variance(&kernels, x0).unwrap();
    (oracle, [fd.outward_variance, fd.signed_variance, fd.baseline])
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn default_wick_case() -> WickCase {
    WickCase {
        squeeze: [0.45, 0.3, 0.6],
        angles: [0.7, 1.1, 0.4, -0.9],
        weights: (0..16)
            .map(|i| {
                let t = i as f64;
                ((1.3 * t).sin(), (0.7 * t + 0.2).cos())
            })
            .collect(),
    }
}
