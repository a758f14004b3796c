//! Uniform momentum and position lattices, quadrature and the discrete Fourier
//! pairing between them.
//!
//! A [`MomentumGrid`] samples the cell centres `k_i = k_center - k_halfwidth + (i + 1/2)*dk`,
//! so bands centred at `+k` and `-k` are exact mirror images. Its
//! conjugate [`PositionGrid`] samples `x_j = (j - n/2)*dx` with `dx = 2*pi/(n*dk)`,
//! so the continuous transform `Psi(x) = (2*pi)^{-1/2} * int psi(k) e^{ikx} dk`
//! becomes an exactly invertible DFT (up to phase factors) on the sample points.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Common surface of the two lattice kinds.
pub trait Grid: Clone {
    fn len(&self) -> usize;
    fn spacing(&self) -> f64;
    fn point(&self, i: usize) -> f64;

    fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    n: usize,
    k_center: f64,
    k_halfwidth: f64,
}

impl MomentumGrid {
    pub fn new(n: usize, k_center: f64, k_halfwidth: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "sample count must be a power of two >= 8, got {n}"
            )));
        }
        if !(k_halfwidth.is_finite() && k_halfwidth > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "k_halfwidth must be positive and finite, got {k_halfwidth}"
            )));
        }
        if !k_center.is_finite() {
            return Err(Error::InvalidGrid("k_center must be finite".into()));
        }
        Ok(MomentumGrid {
            n,
            k_center,
            k_halfwidth,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_center(&self) -> f64 {
        self.k_center
    }

    pub fn k_halfwidth(&self) -> f64 {
        self.k_halfwidth
    }

    pub fn dk(&self) -> f64 {
        2.0 * self.k_halfwidth / self.n as f64
    }

    /// First sample, half a cell inside the band edge.
    pub fn k_min(&self) -> f64 {
        self.k_center - self.k_halfwidth + 0.5 * self.dk()
    }

    pub fn k(&self, i: usize) -> f64 {
        self.k_min() + i as f64 * self.dk()
    }

    pub fn k_values(&self) -> Vec<f64> {
        self.points()
    }

    /// Same band sampled twice as densely.
    pub fn refined(&self) -> MomentumGrid {
        MomentumGrid { n: 2 * self.n, ..*self }
    }

    pub fn position_grid(&self) -> PositionGrid {
        PositionGrid { conjugate: *self }
    }
}

impl Grid for MomentumGrid {
    fn len(&self) -> usize {
        self.n
    }

    fn spacing(&self) -> f64 {
        self.dk()
    }

    fn point(&self, i: usize) -> f64 {
        self.k(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionGrid {
    conjugate: MomentumGrid,
}

impl PositionGrid {
    pub fn n(&self) -> usize {
        self.conjugate.n
    }

    /// `2*pi/(n*dk)`, written so that it does not depend on `n` for a fixed band.
    pub fn dx(&self) -> f64 {
        PI / self.conjugate.k_halfwidth
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n() / 2) as f64) * self.dx()
    }

    /// Full periodic window, `2*pi/dk`.
    pub fn width(&self) -> f64 {
        self.n() as f64 * self.dx()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x(0) && x <= self.x(self.n() - 1)
    }

    /// Index of the sample closest to `x`, if `x` lies in the window.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let j = (x / self.dx()).round() + (self.n() / 2) as f64;
        Some(j as usize)
    }

    pub fn momentum_grid(&self) -> MomentumGrid {
        self.conjugate
    }
}

impl Grid for PositionGrid {
    fn len(&self) -> usize {
        self.n()
    }

    fn spacing(&self) -> f64 {
        self.dx()
    }

    fn point(&self, i: usize) -> f64 {
        self.x(i)
    }
}

/// Complex samples of a function on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<G> {
    grid: G,
    values: Vec<Complex64>,
}

impl<G: Grid> GridField<G> {
    pub fn new(grid: G, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} samples but the grid has {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidGrid(format!("non-finite sample at index {i}")));
        }
        Ok(GridField { grid, values })
    }

    pub fn from_fn(grid: G, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        GridField { grid, values }
    }

    pub(crate) fn from_parts(grid: G, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        GridField { grid, values }
    }

    pub fn zeros(grid: G) -> Self {
        let n = grid.len();
        GridField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &G {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        GridField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// `int |field|^2`
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }
}

/// Riemann sum `sum_i values_i * spacing`.
pub fn integrate<G: Grid>(field: &GridField<G>) -> Complex64 {
    field.values.iter().sum::<Complex64>() * field.grid.spacing()
}

/// `Psi(x_j) = (2*pi)^{-1/2} * sum_i psi_i e^{i k_i x_j} dk`, evaluated with one FFT.
pub fn to_position(field: &GridField<MomentumGrid>) -> GridField<PositionGrid> {
    let kgrid = *field.grid();
    let xgrid = kgrid.position_grid();
    let n = kgrid.n();
    // e^{i k_i x_j} = e^{i k_min x_j} (-1)^i e^{2 pi i ij/n}
    let mut buf: Vec<Complex64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| if i % 2 == 0 { v } else { -v })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = kgrid.dk() / (2.0 * PI).sqrt();
    let k_min = kgrid.k_min();
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= Complex64::from_polar(scale, k_min * xgrid.x(j));
    }
    GridField::from_parts(xgrid, buf)
}

/// Exact inverse of [`to_position`].
pub fn to_momentum(field: &GridField<PositionGrid>) -> GridField<MomentumGrid> {
    let xgrid = *field.grid();
    let kgrid = xgrid.momentum_grid();
    let n = kgrid.n();
    let k_min = kgrid.k_min();
    let mut buf: Vec<Complex64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| v * Complex64::from_polar(1.0, -k_min * xgrid.x(j)))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = xgrid.dx() / (2.0 * PI).sqrt();
    for (i, v) in buf.iter_mut().enumerate() {
        *v *= if i % 2 == 0 { scale } else { -scale };
    }
    GridField::from_parts(kgrid, buf)
}

/// `d/dx` through the conjugate momentum representation.
pub fn spectral_derivative(field: &GridField<PositionGrid>) -> GridField<PositionGrid> {
    let mut psi = to_momentum(field);
    let kgrid = *psi.grid();
    for (i, v) in psi.values.iter_mut().enumerate() {
        *v *= Complex64::new(0.0, kgrid.k(i));
    }
    to_position(&psi)
}

/// Row of the transform at a single point: `e^{i k_i x} dk / sqrt(2*pi)`, so that
/// `Psi(x) = sum_i row_i * psi_i` for unscaled momentum samples `psi_i`.
pub fn fourier_row(k: &[f64], dk: f64, x: f64) -> Vec<Complex64> {
    let scale = dk / (2.0 * PI).sqrt();
    k.iter().map(|&ki| Complex64::from_polar(scale, ki * x)).collect()
}

/// Union of equally spaced, non-overlapping momentum bands that share one
/// position window. A single band is the ordinary case; the twin-beam model
/// uses two bands around `+k_beam` and `-k_beam`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandGrid {
    bands: Vec<MomentumGrid>,
}

impl BandGrid {
    pub fn new(bands: Vec<MomentumGrid>) -> Result<Self> {
        let first = *bands
            .first()
            .ok_or_else(|| Error::InvalidGrid("band grid needs at least one band".into()))?;
        for b in &bands[1..] {
            if b.n() != first.n() || b.k_halfwidth() != first.k_halfwidth() {
                return Err(Error::InvalidGrid(
                    "all bands must share sample count and halfwidth".into(),
                ));
            }
        }
        let mut sorted: Vec<_> = bands.iter().collect();
        sorted.sort_by(|a, b| a.k_center().total_cmp(&b.k_center()));
        for pair in sorted.windows(2) {
            if pair[1].k_min() < pair[0].k_min() + 2.0 * pair[0].k_halfwidth() {
                return Err(Error::InvalidGrid("momentum bands overlap".into()));
            }
        }
        Ok(BandGrid { bands })
    }

    pub fn single(grid: MomentumGrid) -> Self {
        BandGrid { bands: vec![grid] }
    }

    /// Bands of `n` samples each, centered at `+k_beam` then `-k_beam`.
    pub fn twin(n: usize, k_beam: f64, k_halfwidth: f64) -> Result<Self> {
        BandGrid::new(vec![
            MomentumGrid::new(n, k_beam, k_halfwidth)?,
            MomentumGrid::new(n, -k_beam, k_halfwidth)?,
        ])
    }

    pub fn bands(&self) -> &[MomentumGrid] {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.bands.iter().map(|b| b.n()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn dk(&self) -> f64 {
        self.bands[0].dk()
    }

    /// Flat list of sample momenta, band by band.
    pub fn k_values(&self) -> Vec<f64> {
        self.bands.iter().flat_map(|b| b.k_values()).collect()
    }

    pub fn position_grid(&self) -> PositionGrid {
        self.bands[0].position_grid()
    }

    pub fn refined(&self) -> BandGrid {
        BandGrid {
            bands: self.bands.iter().map(|b| b.refined()).collect(),
        }
    }

    /// Position-space field of flat band samples: the sum of every band's transform.
    pub fn to_position(&self, values: &[Complex64]) -> GridField<PositionGrid> {
        assert_eq!(values.len(), self.len(), "sample count does not match band grid");
        let xgrid = self.position_grid();
        let mut total = vec![Complex64::new(0.0, 0.0); xgrid.n()];
        let mut offset = 0;
        for band in &self.bands {
            let part = GridField::from_parts(*band, values[offset..offset + band.n()].to_vec());
            for (t, v) in total.iter_mut().zip(to_position(&part).values()) {
                *t += v;
            }
            offset += band.n();
        }
        GridField::from_parts(xgrid, total)
    }
}
