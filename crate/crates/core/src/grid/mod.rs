//! Periodic spatial discretisation and the wavefunction state type.
//!
//! Every axis is a periodic box `[-L/2, L/2)` sampled at `n` equispaced
//! points. Periodicity makes every smooth vector field complete, so the flows
//! generated by the kinematic momenta exist for all times without further
//! conditions, and Gauss-theorem arguments hold exactly on the grid.
//!
//! Integrals use cell-volume quadrature, `∫ f ≈ Σ f_j · h₁⋯h_d`. No other
//! normalisation of the measure is assumed anywhere in the crate.

pub mod fields;
pub mod snapshot;
pub mod spectral;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fields::{ScalarFieldSpec, TrigPoly, VectorFieldSpec};
pub use spectral::spectral_derivative;

/// Smallest accepted number of points per axis.
pub const MIN_POINTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    shape: Vec<usize>,
    lengths: Vec<f64>,
}

/// Build a `dim`-dimensional grid with the same resolution and box length on
/// every axis.
pub fn make_grid(dim: usize, n_points: usize, length: f64) -> Result<GridSpec> {
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
    }
    GridSpec::new(vec![n_points; dim], vec![length; dim])
}

impl GridSpec {
    pub fn new(shape: Vec<usize>, lengths: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&shape.len()) || shape.len() != lengths.len() {
            return Err(Error::InvalidGrid(format!(
                "need 1 or 2 axes with one length each, got {} sizes and {} lengths",
                shape.len(),
                lengths.len()
            )));
        }
        if let Some(&n) = shape.iter().find(|&&n| n < MIN_POINTS) {
            return Err(Error::InvalidGrid(format!(
                "n_points must be ≥ {MIN_POINTS}, got {n}"
            )));
        }
        if let Some(&l) = lengths.iter().find(|&&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidGrid(format!("length must be positive and finite, got {l}")));
        }
        Ok(Self { shape, lengths })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.shape[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Coordinates `-L/2 + j·h` along one axis.
    pub fn coordinates(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        let x0 = -0.5 * self.lengths[axis];
        (0..self.shape[axis]).map(|j| x0 + j as f64 * h).collect()
    }

    /// Angular DFT wavenumbers in FFT order; the Nyquist mode is listed as
    /// `+n/2 · 2π/L`.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.shape[axis] as i64;
        let dk = 2.0 * PI / self.lengths[axis];
        (0..n)
            .map(|j| if j <= n / 2 { j } else { j - n })
            .map(|j| j as f64 * dk)
            .collect()
    }

    /// Axis indices of a flat row-major index.
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        if self.dim() == 1 {
            [flat, 0]
        } else {
            [flat / self.shape[1], flat % self.shape[1]]
        }
    }

    /// Physical position of a flat index (second entry zero in 1-D).
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let idx = self.multi_index(flat);
        let mut p = [0.0; 2];
        for (a, slot) in p.iter_mut().enumerate().take(self.dim()) {
            *slot = -0.5 * self.lengths[a] + idx[a] as f64 * self.spacing(a);
        }
        p
    }

    /// Positions of every grid point, flat row-major order.
    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    grid: GridSpec,
    values: Vec<C64>,
    time: f64,
}

impl WaveFunction {
    pub fn new(grid: GridSpec, values: Vec<C64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("wavefunction samples".into()));
        }
        if !time.is_finite() {
            return Err(Error::NonFinite("wavefunction time".into()));
        }
        Ok(Self { grid, values, time })
    }

    /// Construct without the finiteness scan, for values produced by
    /// operations that already guarantee it.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<C64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, time }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    /// Same grid and time, new samples.
    pub fn with_values(&self, values: Vec<C64>) -> Self {
        Self::from_parts(self.grid.clone(), values, self.time)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        self.with_values(self.values.iter().map(|z| z * factor).collect())
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// Probability density `|ψ|²` at every point.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// `⟨ψ, φ⟩ = Σ ψ̄ φ · cell volume`, conjugate-linear in the first argument.
pub fn inner_product(psi: &WaveFunction, phi: &WaveFunction) -> Result<C64> {
    if psi.grid != phi.grid {
        return Err(Error::GridMismatch);
    }
    Ok(inner_raw(&psi.values, &phi.values) * psi.grid.cell_volume())
}

pub(crate) fn inner_raw(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(psi: &WaveFunction) -> f64 {
    psi.norm_sqr().sqrt()
}

/// Discrete L² norm of raw samples on `grid`.
pub fn l2_norm(grid: &GridSpec, values: &[C64]) -> f64 {
    (values.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume()).sqrt()
}

pub fn l2_norm_real(grid: &GridSpec, values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume()).sqrt()
}

/// Initial data for [`sample`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialState {
    /// `e^{ik·x}`; each `k` component must be a multiple of `2π/L`.
    PlaneWave { k: Vec<f64> },
    /// `exp(-|x-x₀|²/(4σ²) + ik₀·x)`, so `σ` is the position spread of `|ψ|²`.
    Gaussian { sigma: f64, center: Vec<f64>, k0: Vec<f64> },
    /// Explicit samples in row-major order.
    Samples { values: Vec<C64>, normalize: bool },
}

fn axis_vec(v: &[f64], dim: usize, what: &str) -> Result<[f64; 2]> {
    match v.len() {
        0 => Ok([0.0; 2]),
        n if n == dim => {
            let mut out = [0.0; 2];
            out[..n].copy_from_slice(v);
            Ok(out)
        }
        n => Err(Error::InvalidParameter(format!(
            "{what} has {n} components for a {dim}-dimensional grid"
        ))),
    }
}

/// Sample an initial state on `grid`. Plane waves and Gaussians are returned
/// with unit norm; explicit samples are normalised on request.
pub fn sample(grid: &GridSpec, spec: &InitialState) -> Result<WaveFunction> {
    let dim = grid.dim();
    let pts = grid.points();
    let psi = match spec {
        InitialState::PlaneWave { k } => {
            let k = axis_vec(k, dim, "plane-wave k")?;
            for a in 0..dim {
                let l = grid.lengths()[a];
                let m = k[a] * l / (2.0 * PI);
                if (m - m.round()).abs() > 1e-9 * m.abs().max(1.0) {
                    return Err(Error::Incommensurate { k: k[a], length: l });
                }
            }
            let vals = pts
                .iter()
                .map(|p| C64::from_polar(1.0, k[0] * p[0] + k[1] * p[1]))
                .collect();
            WaveFunction::from_parts(grid.clone(), vals, 0.0).normalized()?
        }
        InitialState::Gaussian { sigma, center, k0 } => {
            if !(sigma.is_finite() && *sigma > 0.0) {
                return Err(Error::InvalidParameter(format!("gaussian sigma must be positive, got {sigma}")));
            }
            let c = axis_vec(center, dim, "gaussian center")?;
            let k = axis_vec(k0, dim, "gaussian k0")?;
            let s2 = 4.0 * sigma * sigma;
            let vals = pts
                .iter()
                .map(|p| {
                    let r2: f64 = (0..dim).map(|a| (p[a] - c[a]).powi(2)).sum();
                    let phase: f64 = (0..dim).map(|a| k[a] * p[a]).sum();
                    C64::from_polar((-r2 / s2).exp(), phase)
                })
                .collect();
            WaveFunction::from_parts(grid.clone(), vals, 0.0).normalized()?
        }
        InitialState::Samples { values, normalize } => {
            let wf = WaveFunction::new(grid.clone(), values.clone(), 0.0)?;
            if wf.norm() == 0.0 {
                return Err(Error::ZeroNorm);
            }
            if *normalize {
                wf.normalized()?
            } else {
                wf
            }
        }
    };
    Ok(psi)
}
