//! Hydrodynamic fields and the nonlinear functionals of the DG family.
//!
//! All derivatives are taken spectrally from ψ itself:
//!
//! ```text
//! ∇ρ  = 2 Re(ψ̄∇ψ)           Δρ    = 2 Re(ψ̄Δψ) + 2|∇ψ|²
//! j⁰  = (ħ/m) Im(ψ̄∇ψ)       ∇·j⁰  = (ħ/m) Im(ψ̄Δψ)
//! ```
//!
//! The five real functionals are
//!
//! ```text
//! R₁ = (m/ħ) ∇·j⁰/ρ      R₂ = Δρ/ρ        R₃ = (m/ħ)² j⁰·j⁰/ρ²
//! R₄ = (m/ħ) j⁰·∇ρ/ρ²    R₅ = ∇ρ·∇ρ/ρ²
//! ```
//!
//! Each is real, rational in ψ and its derivatives up to second order,
//! Euclidean invariant and homogeneous of order zero. `R₃` and `R₄` are
//! deliberately the two distinct quadratic contractions of the current; the
//! alternative `R₃ = (m/ħ)²(∇·j⁰)²/ρ²` is available through [`R3Variant`].
//!
//! Denominators use `max(ρ, ε·max ρ)`; numerators are never modified.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{spectral, GridSpec, WaveFunction};
use crate::kinematics::DGParams;

pub const DEFAULT_EPSILON: f64 = 1e-12;
pub const MAX_EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regularisation {
    pub epsilon_rel: f64,
}

impl Default for Regularisation {
    fn default() -> Self {
        Self { epsilon_rel: DEFAULT_EPSILON }
    }
}

impl Regularisation {
    pub fn new(epsilon_rel: f64) -> Result<Self> {
        if !(epsilon_rel > 0.0 && epsilon_rel <= MAX_EPSILON) {
            return Err(Error::InvalidParameter(format!(
                "regularisation epsilon must lie in (0, {MAX_EPSILON:e}], got {epsilon_rel:e}"
            )));
        }
        Ok(Self { epsilon_rel })
    }

    /// Floored densities for use in denominators.
    pub fn floor(&self, rho: &[f64]) -> Vec<f64> {
        let max = rho.iter().copied().fold(0.0, f64::max);
        let fl = (self.epsilon_rel * max).max(f64::MIN_POSITIVE);
        rho.iter().map(|&r| r.max(fl)).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum R3Variant {
    /// `(m/ħ)² j⁰·j⁰ / ρ²`.
    #[default]
    CurrentSquared,
    /// `(m/ħ)² (∇·j⁰)² / ρ²`.
    DivergenceSquared,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HydroFields {
    pub grid: GridSpec,
    pub rho: Vec<f64>,
    /// One component per axis.
    pub j0: Vec<Vec<f64>>,
    /// `j⁰ - D∇ρ`.
    pub jd: Vec<Vec<f64>>,
}

/// Every pointwise quantity the functionals need, from one set of spectral
/// derivatives.
#[derive(Clone, Debug)]
pub struct LocalFields {
    pub rho: Vec<f64>,
    pub grad_rho: Vec<Vec<f64>>,
    pub lap_rho: Vec<f64>,
    pub j0: Vec<Vec<f64>>,
    pub div_j0: Vec<f64>,
}

impl LocalFields {
    pub fn new(psi: &WaveFunction, hbar: f64, mass: f64) -> Self {
        let grid = psi.grid();
        let v = psi.values();
        let grad = spectral::gradient(grid, v);
        let lap = spectral::laplacian(grid, v);
        let q = hbar / mass;
        let rho = psi.density();
        let grad_rho = grad
            .iter()
            .map(|g| v.iter().zip(g).map(|(p, d)| 2.0 * (p.conj() * d).re).collect())
            .collect();
        let j0 = grad
            .iter()
            .map(|g| v.iter().zip(g).map(|(p, d)| q * (p.conj() * d).im).collect())
            .collect();
        let grad_sq: Vec<f64> = (0..v.len()).map(|i| grad.iter().map(|g| g[i].norm_sqr()).sum()).collect();
        let lap_rho = v
            .iter()
            .zip(&lap)
            .zip(&grad_sq)
            .map(|((p, l), g2)| 2.0 * (p.conj() * l).re + 2.0 * g2)
            .collect();
        let div_j0 = v.iter().zip(&lap).map(|(p, l)| q * (p.conj() * l).im).collect();
        Self { rho, grad_rho, lap_rho, j0, div_j0 }
    }

    /// `∇·j⁰ - DΔρ`, the divergence of the generalised current.
    pub fn div_jd(&self, d: f64) -> Vec<f64> {
        self.div_j0.iter().zip(&self.lap_rho).map(|(a, l)| a - d * l).collect()
    }

    /// `R₁…R₅` with the given floor.
    pub fn functionals(&self, hbar: f64, mass: f64, reg: &Regularisation, variant: R3Variant) -> [Vec<f64>; 5] {
        let rr = reg.floor(&self.rho);
        let s = mass / hbar;
        let n = self.rho.len();
        let dot = |a: &[Vec<f64>], b: &[Vec<f64>], i: usize| -> f64 { a.iter().zip(b).map(|(x, y)| x[i] * y[i]).sum() };
        let r1 = (0..n).map(|i| s * self.div_j0[i] / rr[i]).collect();
        let r2 = (0..n).map(|i| self.lap_rho[i] / rr[i]).collect();
        let r3 = (0..n)
            .map(|i| {
                let num = match variant {
                    R3Variant::CurrentSquared => dot(&self.j0, &self.j0, i),
                    R3Variant::DivergenceSquared => self.div_j0[i] * self.div_j0[i],
                };
                s * s * num / (rr[i] * rr[i])
            })
            .collect();
        let r4 = (0..n).map(|i| s * dot(&self.j0, &self.grad_rho, i) / (rr[i] * rr[i])).collect();
        let r5 = (0..n)
            .map(|i| dot(&self.grad_rho, &self.grad_rho, i) / (rr[i] * rr[i]))
            .collect();
        [r1, r2, r3, r4, r5]
    }
}

pub fn hydro_fields(psi: &WaveFunction, params: &DGParams) -> HydroFields {
    let lf = LocalFields::new(psi, params.hbar, params.mass);
    let jd = lf
        .j0
        .iter()
        .zip(&lf.grad_rho)
        .map(|(j, g)| j.iter().zip(g).map(|(j, g)| j - params.d * g).collect())
        .collect();
    HydroFields { grid: psi.grid().clone(), rho: lf.rho, j0: lf.j0, jd }
}

/// `Rᵢ` for `i ∈ 1..=5`.
pub fn r_functional(i: usize, psi: &WaveFunction, params: &DGParams, reg: &Regularisation) -> Result<Vec<f64>> {
    if !(1..=5).contains(&i) {
        return Err(Error::FunctionalIndex(i));
    }
    let lf = LocalFields::new(psi, params.hbar, params.mass);
    let [r1, r2, r3, r4, r5] = lf.functionals(params.hbar, params.mass, reg, params.r3_variant);
    Ok([r1, r2, r3, r4, r5].into_iter().nth(i - 1).unwrap())
}

/// `ħ(D/2) Δρ/ρ`, the enforced imaginary part of the nonlinearity.
pub fn imaginary_term(psi: &WaveFunction, params: &DGParams, reg: &Regularisation) -> Vec<f64> {
    if params.d == 0.0 {
        return vec![0.0; psi.grid().len()];
    }
    let lf = LocalFields::new(psi, params.hbar, params.mass);
    let rr = reg.floor(&lf.rho);
    lf.lap_rho
        .iter()
        .zip(&rr)
        .map(|(l, r)| params.hbar * params.d / 2.0 * l / r)
        .collect()
}

const NAMES: [&str; 5] = ["R1", "R2", "R3", "R4", "R5"];

fn check_finite(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name.to_string()))
    }
}

/// Pointwise real multiplier `V + ħD′ Σ cᵢRᵢ`.
pub fn real_potential(
    psi: &WaveFunction,
    potential: &[f64],
    params: &DGParams,
    reg: &Regularisation,
) -> Result<Vec<f64>> {
    let w = params.nonlinear_weights();
    if w.iter().all(|&c| c == 0.0) {
        return Ok(potential.to_vec());
    }
    let lf = LocalFields::new(psi, params.hbar, params.mass);
    let rs = lf.functionals(params.hbar, params.mass, reg, params.r3_variant);
    let mut out = potential.to_vec();
    for (k, r) in rs.iter().enumerate() {
        if w[k] == 0.0 {
            continue;
        }
        check_finite(NAMES[k], r)?;
        for (o, r) in out.iter_mut().zip(r) {
            *o += params.hbar * w[k] * r;
        }
    }
    Ok(out)
}

/// `dψ/dt` of the DG equation
///
/// ```text
/// iħ ∂ₜψ = [-ħ²/2m Δ + V + iħ(D/2) Δρ/ρ + ħD′ Σ cᵢRᵢ] ψ
/// ```
///
/// The imaginary term is what turns the continuity law into
/// `∂ₜρ = -∇·j⁰ + DΔρ`.
pub fn dg_rhs(psi: &WaveFunction, params: &DGParams, reg: &Regularisation) -> Result<Vec<C64>> {
    let v = params.potential.eval_real(psi.grid())?;
    dg_rhs_with_potential(psi, &v, params, reg)
}

/// [`dg_rhs`] with the potential already sampled.
pub fn dg_rhs_with_potential(
    psi: &WaveFunction,
    potential: &[f64],
    params: &DGParams,
    reg: &Regularisation,
) -> Result<Vec<C64>> {
    let grid = psi.grid();
    let (hbar, mass) = (params.hbar, params.mass);
    let vals = psi.values();
    let lap = spectral::laplacian(grid, vals);
    let w = params.nonlinear_weights();
    let nonlinear = params.d != 0.0 || w.iter().any(|&c| c != 0.0);

    let mut real = potential.to_vec();
    let mut imag = vec![0.0; vals.len()];
    if nonlinear {
        let lf = LocalFields::new(psi, hbar, mass);
        if params.d != 0.0 {
            let rr = reg.floor(&lf.rho);
            for ((im, l), r) in imag.iter_mut().zip(&lf.lap_rho).zip(&rr) {
                *im = hbar * params.d / 2.0 * l / r;
            }
            check_finite("imaginary term", &imag)?;
        }
        if w.iter().any(|&c| c != 0.0) {
            let rs = lf.functionals(hbar, mass, reg, params.r3_variant);
            for (k, r) in rs.iter().enumerate() {
                if w[k] == 0.0 {
                    continue;
                }
                check_finite(NAMES[k], r)?;
                for (o, r) in real.iter_mut().zip(r) {
                    *o += hbar * w[k] * r;
                }
            }
        }
    }
    let kin = -hbar * hbar / (2.0 * mass);
    let out: Vec<C64> = (0..vals.len())
        .map(|i| {
            let h = kin * lap[i] + C64::new(real[i], imag[i]) * vals[i];
            h / C64::new(0.0, hbar)
        })
        .collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("DG right-hand side".into()));
    }
    Ok(out)
}
