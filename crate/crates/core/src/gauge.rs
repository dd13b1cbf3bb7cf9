//! Nonlinear gauge transformations in polar form.
//!
//! With `ψ = R e^{iS}` a member of the affine family acts as
//!
//! ```text
//! R_N = a · R^{κ+1}          S_N = γ ln R + Λ S + θ
//! ```
//!
//! The members with `κ = 0, a = 1` leave `ρ = R²` untouched. Any additive
//! constant in `S_N` is part of `θ`. Other choices of `r(S)` and `t(S)`
//! would slot into [`GaugeParams::apply_polar`].
//!
//! Three different numbers called "D" can be attached to `γ`, depending on
//! where it is measured; they are exposed separately:
//!
//! * [`GaugeParams::operator_d`], `γ/4`: the closed-form transformed momentum
//!   `-iħg·∇ + (-iħ/2 + γ/4) div g` coincides with `P^(D)` at this `D`.
//! * [`GaugeParams::kinematic_d`], `ħγ/2`: the tangent of the literal polar
//!   map at a momentum flow is `P^(D)` at this `D`.
//! * [`GaugeParams::diffusion_d`], `ħγ/(2m)`: the diffusion coefficient of
//!   the DG equation solved by a transformed linear solution.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{Propagator, Scheme};
use crate::functionals::{self, Regularisation};
use crate::grid::{l2_norm, VectorFieldSpec, WaveFunction};
use crate::kinematics::{DGParams, LinearOperatorSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeParams {
    pub kappa: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub theta: f64,
    pub amp: f64,
}

impl Default for GaugeParams {
    fn default() -> Self {
        Self::identity()
    }
}

impl GaugeParams {
    pub fn identity() -> Self {
        Self { kappa: 0.0, gamma: 0.0, lambda: 1.0, theta: 0.0, amp: 1.0 }
    }

    /// ρ-preserving member with the given phase coupling.
    pub fn phase(gamma: f64, lambda: f64, theta: f64) -> Self {
        Self { gamma, lambda, theta, ..Self::identity() }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.kappa, self.gamma, self.lambda, self.theta, self.amp].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("gauge parameters must be finite".into()));
        }
        if !(self.amp > 0.0) {
            return Err(Error::InvalidParameter(format!("gauge amp must be positive, got {}", self.amp)));
        }
        Ok(())
    }

    pub fn rho_preserving(&self) -> bool {
        self.kappa == 0.0 && self.amp == 1.0
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &GaugeParams) -> GaugeParams {
        let (k1, k2) = (first.kappa + 1.0, self.kappa + 1.0);
        GaugeParams {
            kappa: k1 * k2 - 1.0,
            amp: self.amp * first.amp.powf(k2),
            gamma: self.gamma * k1 + self.lambda * first.gamma,
            lambda: first.lambda * self.lambda,
            theta: self.gamma * first.amp.ln() + self.lambda * first.theta + self.theta,
        }
    }

    pub fn inverse(&self) -> Result<GaugeParams> {
        let k = self.kappa + 1.0;
        if k == 0.0 || self.lambda == 0.0 {
            return Err(Error::InvalidParameter("gauge transformation with κ = -1 or Λ = 0 is not invertible".into()));
        }
        let la = self.amp.ln();
        Ok(GaugeParams {
            kappa: 1.0 / k - 1.0,
            amp: (-la / k).exp(),
            gamma: -self.gamma / (k * self.lambda),
            lambda: 1.0 / self.lambda,
            theta: (self.gamma * la / k - self.theta) / self.lambda,
        })
    }

    /// `γ/4`.
    pub fn operator_d(&self) -> f64 {
        self.gamma / 4.0
    }

    /// `ħγ/2`.
    pub fn kinematic_d(&self, hbar: f64) -> f64 {
        hbar * self.gamma / 2.0
    }

    /// `ħγ/(2m)`.
    pub fn diffusion_d(&self, hbar: f64, mass: f64) -> f64 {
        hbar * self.gamma / (2.0 * mass)
    }

    /// Coupling to use in [`transformed_momentum`] so that it reproduces the
    /// tangent of this polar map: `γ' = 2ħγ`.
    pub fn closed_form_coupling(&self, hbar: f64) -> f64 {
        2.0 * hbar * self.gamma
    }

    /// New `(R, S)` from old.
    pub fn apply_polar(&self, r: f64, ln_r: f64, s: f64) -> (f64, f64) {
        let rn = if self.kappa == 0.0 { self.amp * r } else { self.amp * (ln_r * (self.kappa + 1.0)).exp() };
        (rn, self.gamma * ln_r + self.lambda * s + self.theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeOptions {
    /// Points with `R ≤ node_threshold · max R` are nodes.
    pub node_threshold: f64,
    /// Transform through nodes, flooring `ln R` at the threshold.
    pub force: bool,
}

pub const DEFAULT_NODE_THRESHOLD: f64 = 1e-200;

impl Default for GaugeOptions {
    fn default() -> Self {
        Self { node_threshold: DEFAULT_NODE_THRESHOLD, force: false }
    }
}

fn wrap(d: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    d - TAU * ((d + PI) / TAU).floor()
}

/// Amplitude and continuously unwrapped phase. The phase starts from the
/// principal argument at flat index 0 and is unwrapped along axis 0 for the
/// first column, then along axis 1 for every row.
pub fn polar(psi: &WaveFunction, opts: &GaugeOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let vals = psi.values();
    let r: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
    let rmax = r.iter().copied().fold(0.0, f64::max);
    if rmax == 0.0 {
        return Err(Error::ZeroNorm);
    }
    if !opts.force {
        let floor = opts.node_threshold * rmax;
        if let Some(index) = r.iter().position(|&x| x <= floor) {
            return Err(Error::PhaseNode { index });
        }
    }
    let arg: Vec<f64> = vals.iter().map(|z| z.arg()).collect();
    let shape = psi.grid().shape();
    let (n0, n1) = (shape[0], if shape.len() == 2 { shape[1] } else { 1 });
    let mut s = vec![0.0; vals.len()];
    s[0] = arg[0];
    for i in 1..n0 {
        let (a, b) = ((i - 1) * n1, i * n1);
        s[b] = s[a] + wrap(arg[b] - arg[a]);
    }
    for i in 0..n0 {
        for j in 1..n1 {
            let (a, b) = (i * n1 + j - 1, i * n1 + j);
            s[b] = s[a] + wrap(arg[b] - arg[a]);
        }
    }
    Ok((r, s))
}

/// `N[ψ]` with default options.
pub fn gauge_apply(gp: &GaugeParams, psi: &WaveFunction) -> Result<WaveFunction> {
    gauge_apply_with(gp, psi, &GaugeOptions::default())
}

pub fn gauge_apply_with(gp: &GaugeParams, psi: &WaveFunction, opts: &GaugeOptions) -> Result<WaveFunction> {
    gp.validate()?;
    let (r, s) = polar(psi, opts)?;
    let rmax = r.iter().copied().fold(0.0, f64::max);
    let floor = (opts.node_threshold * rmax).max(f64::MIN_POSITIVE);
    let vals = r
        .iter()
        .zip(&s)
        .map(|(&r, &s)| {
            let (rn, sn) = gp.apply_polar(r, r.max(floor).ln(), s);
            C64::from_polar(rn, sn)
        })
        .collect::<Vec<_>>();
    WaveFunction::new(psi.grid().clone(), vals, psi.time())
}

/// Generator `A` of a one-parameter group `U_t = exp(itA)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// A first-order operator from the kinematic, e.g. `P^(D)(X)`.
    Kinematic(LinearOperatorSpec),
    /// `A = -H/ħ` with `H = -ħ²/2m Δ + V` built from the linear part of the
    /// parameters.
    Hamiltonian(DGParams),
}

const TAYLOR_TOL: f64 = 1e-18;
const TAYLOR_MAX_TERMS: usize = 80;

/// `U_t ψ`.
pub fn generator_flow(gen: &GeneratorSpec, psi: &WaveFunction, t: f64) -> Result<WaveFunction> {
    match gen {
        GeneratorSpec::Kinematic(op) => {
            let scale = psi.norm();
            let mut term = psi.clone();
            let mut sum = psi.values().to_vec();
            for n in 1..=TAYLOR_MAX_TERMS {
                let applied = op.apply(&term)?;
                let f = C64::new(0.0, t / n as f64);
                term = applied.scaled(f);
                sum.iter_mut().zip(term.values()).for_each(|(s, v)| *s += v);
                if term.norm() <= TAYLOR_TOL * scale {
                    return WaveFunction::new(psi.grid().clone(), sum, psi.time());
                }
            }
            Err(Error::InvalidParameter(format!("Taylor series of the kinematic flow did not converge at t = {t}")))
        }
        GeneratorSpec::Hamiltonian(p) => {
            let linear = DGParams { d: 0.0, d_prime: 0.0, c: [0.0; 5], ..p.clone() };
            let prop = Propagator::new(psi.grid(), &linear, Regularisation::default(), Scheme::Strang)?;
            let mut out = prop.advance(psi, t, 0)?;
            out.set_time(psi.time());
            Ok(out)
        }
    }
}

pub const DEFAULT_DELTA: f64 = 1e-5;

/// `[N(U_δψ) - N(U_{-δ}ψ)] / 2δ`, an `O(δ²)` estimate of `d/dt N(U_tψ)` at
/// `t = 0`.
pub fn tangent_map_numeric(
    gp: &GaugeParams,
    gen: &GeneratorSpec,
    psi: &WaveFunction,
    delta: f64,
    opts: &GaugeOptions,
) -> Result<Vec<C64>> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let plus = gauge_apply_with(gp, &generator_flow(gen, psi, delta)?, opts)?;
    let minus = gauge_apply_with(gp, &generator_flow(gen, psi, -delta)?, opts)?;
    Ok(plus
        .values()
        .iter()
        .zip(minus.values())
        .map(|(a, b)| (a - b) / (2.0 * delta))
        .collect())
}

/// `g₁·∇ + g₀` with `g₁ = -iħg` and `g₀ = (-iħ/2 + γ/4) div g`. Equal to
/// `P^(D)(X)` when `γ = 4D`.
pub fn transformed_momentum(gp: &GaugeParams, x: &VectorFieldSpec, params: &DGParams) -> LinearOperatorSpec {
    LinearOperatorSpec {
        derivative_coeff: C64::new(0.0, -params.hbar),
        field: x.clone(),
        multiplier_coeff: C64::new(gp.operator_d(), -params.hbar / 2.0),
        multiplier: x.divergence().clone(),
    }
}

/// DG parameters solved by `N[ψ]` whenever `ψ` solves the linear equation
/// with `params` (ħ, m, V).
///
/// Substituting `S_N = (γ/2) ln ρ + ΛS + θ` into the hydrodynamic form of
/// the linear equation gives
///
/// ```text
/// ħ' = ħ/Λ     D = ħ'γ/(2m)     D′ = ħ'/(2m)
/// c = (γ, -γ²/2 - (Λ²-1)/2, 0, -γ, γ²/4 + (Λ²-1)/4)
/// ```
///
/// with the potential unchanged.
pub fn derive_dg_coefficients(gp: &GaugeParams, params: &DGParams) -> Result<DGParams> {
    gp.validate()?;
    if !gp.rho_preserving() {
        return Err(Error::NotRhoPreserving { kappa: gp.kappa, amp: gp.amp });
    }
    if gp.lambda == 0.0 {
        return Err(Error::InvalidParameter("Λ = 0 collapses the phase".into()));
    }
    let hbar = params.hbar / gp.lambda;
    if hbar < 0.0 {
        return Err(Error::InvalidParameter("Λ < 0 reverses the direction of time; use Λ > 0".into()));
    }
    let m = params.mass;
    let g = gp.gamma;
    let l2 = gp.lambda * gp.lambda - 1.0;
    Ok(DGParams {
        hbar,
        mass: m,
        d: hbar * g / (2.0 * m),
        d_prime: hbar / (2.0 * m),
        c: [g, -g * g / 2.0 - l2 / 2.0, 0.0, -g, g * g / 4.0 + l2 / 4.0],
        potential: params.potential.clone(),
        r3_variant: Default::default(),
    })
}

/// A linear reference run.
#[derive(Clone, Debug)]
pub struct LinearRun {
    pub psi0: WaveFunction,
    pub params: DGParams,
    pub dt: f64,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceOptions {
    /// Multiplies the derived `D` (1 for the real test, ≠ 1 for controls).
    pub d_scale: f64,
    /// Denominator floor for the DG functionals of the transformed states.
    pub reg: Regularisation,
    pub gauge: GaugeOptions,
}

/// Small floor: the transformed states are smooth and node-free, and a
/// large floor would bias the tails far above the time-difference error.
pub const COVARIANCE_EPSILON: f64 = 1e-24;

impl Default for CovarianceOptions {
    fn default() -> Self {
        Self {
            d_scale: 1.0,
            reg: Regularisation { epsilon_rel: COVARIANCE_EPSILON },
            gauge: GaugeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceReport {
    /// Max over interior records of `ħ'‖∂ₜφ - rhs(φ)‖/‖φ‖`, `φ = N[ψ]`.
    pub max_residual: f64,
    pub derived: DGParams,
    pub records: usize,
}

/// Evolve linearly, transform every step, and measure how well the
/// transformed trajectory solves the DG equation with derived coefficients.
pub fn gauge_covariance_residual(
    gp: &GaugeParams,
    run: &LinearRun,
    opts: &CovarianceOptions,
) -> Result<CovarianceReport> {
    if !run.params.is_linear() {
        return Err(Error::InvalidParameter("covariance runs need D = D′ = 0".into()));
    }
    if run.steps < 2 {
        return Err(Error::TooFewSnapshots(run.steps + 1));
    }
    let mut derived = derive_dg_coefficients(gp, &run.params)?;
    derived.d *= opts.d_scale;
    let grid = run.psi0.grid();
    let potential = derived.potential.eval_real(grid)?;
    let prop = Propagator::new(grid, &run.params, Regularisation::default(), Scheme::Strang)?;

    let transform = |psi: &WaveFunction, record: usize| -> Result<WaveFunction> {
        gauge_apply_with(gp, psi, &opts.gauge).map_err(|e| match e {
            Error::PhaseNode { index } => Error::NodeCrossing { record, time: psi.time(), index },
            other => other,
        })
    };
    let t0 = run.psi0.time();
    let mut psi = run.psi0.clone();
    let mut window = vec![transform(&psi, 0)?];
    let mut worst: f64 = 0.0;
    for n in 1..=run.steps {
        psi = prop.advance(&psi, run.dt, n)?;
        psi.set_time(t0 + n as f64 * run.dt);
        window.push(transform(&psi, n)?);
        if window.len() == 3 {
            let (prev, cur, next) = (&window[0], &window[1], &window[2]);
            let rhs = functionals::dg_rhs_with_potential(cur, &potential, &derived, &opts.reg)?;
            let diff: Vec<C64> = (0..rhs.len())
                .map(|i| (next.values()[i] - prev.values()[i]) / (2.0 * run.dt) - rhs[i])
                .collect();
            worst = worst.max(derived.hbar * l2_norm(grid, &diff) / cur.norm());
            window.remove(0);
        }
    }
    Ok(CovarianceReport { max_residual: worst, derived, records: run.steps + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample, InitialState, TrigPoly};
    use crate::kinematics::apply_momentum;
    use std::f64::consts::PI;

    #[test]
    fn identity_leaves_state_unchanged() {
        let g = make_grid(1, 64, 10.0).unwrap();
        let psi = sample(&g, &InitialState::Gaussian { sigma: 1.0, center: vec![0.2], k0: vec![0.5] }).unwrap();
        let out = gauge_apply(&GaugeParams::identity(), &psi).unwrap();
        let err = psi.values().iter().zip(out.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-15);
    }

    #[test]
    fn plane_wave_momentum_rescaled() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let psi = sample(&g, &InitialState::PlaneWave { k: vec![1.0] }).unwrap();
        let c = psi.values()[0].norm();
        let gp = GaugeParams::phase(0.7, 2.0, 0.3);
        let out = gauge_apply(&gp, &psi).unwrap();
        let x = g.coordinates(0);
        let s0 = psi.values()[0].arg();
        for (z, x) in out.values().iter().zip(&x) {
            let s = s0 + (x + PI);
            let want = C64::from_polar(c, 0.7 * c.ln() + 2.0 * s + 0.3);
            assert!((z - want).norm() < 1e-13);
        }
    }

    #[test]
    fn nodes_rejected_unless_forced() {
        let g = make_grid(1, 16, 2.0 * PI).unwrap();
        let vals: Vec<C64> = g.coordinates(0).iter().map(|x| C64::new(x.sin(), 0.0)).collect();
        let psi = WaveFunction::new(g, vals, 0.0).unwrap();
        let gp = GaugeParams::phase(0.5, 1.0, 0.0);
        let err = gauge_apply(&gp, &psi).unwrap_err();
        assert!(err.to_string().contains("phase undefined at node"));
        let opts = GaugeOptions { force: true, ..GaugeOptions::default() };
        assert!(gauge_apply_with(&gp, &psi, &opts).is_ok());
    }

    #[test]
    fn inverse_and_composition_algebra() {
        let a = GaugeParams { kappa: 0.2, gamma: 0.3, lambda: 1.4, theta: -0.2, amp: 1.3 };
        let b = GaugeParams { kappa: -0.1, gamma: -0.6, lambda: 0.7, theta: 0.4, amp: 0.8 };
        let id = a.compose(&a.inverse().unwrap());
        let id2 = a.inverse().unwrap().compose(&a);
        for p in [id, id2] {
            assert!(p.kappa.abs() < 1e-15 && p.gamma.abs() < 1e-15 && p.theta.abs() < 1e-15);
            assert!((p.lambda - 1.0).abs() < 1e-15 && (p.amp - 1.0).abs() < 1e-15);
        }
        let ab = a.compose(&b);
        let inv = b.inverse().unwrap().compose(&a.inverse().unwrap());
        let back = ab.compose(&inv);
        assert!(back.gamma.abs() < 1e-14 && (back.amp - 1.0).abs() < 1e-14);
    }

    #[test]
    fn transformed_momentum_is_p_of_d() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let psi = sample(&g, &InitialState::Gaussian { sigma: 0.7, center: vec![], k0: vec![1.0] }).unwrap();
        let x = VectorFieldSpec::from_trig(vec![TrigPoly::sin([1.0, 1.0], 0, 1, 1.0)]).unwrap();
        let p = DGParams::default();
        let op = transformed_momentum(&GaugeParams::phase(1.0, 1.0, 0.0), &x, &p);
        assert_eq!(op.multiplier_coeff, C64::new(0.25, -0.5));
        let a = op.apply(&psi).unwrap();
        let b = apply_momentum(&x, &psi, &p.clone().with_d(0.25)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn derived_coefficients() {
        let p = DGParams::default();
        let id = derive_dg_coefficients(&GaugeParams::identity(), &p).unwrap();
        assert_eq!(id.d, 0.0);
        assert!(id.c.iter().all(|&c| c == 0.0));
        let one = derive_dg_coefficients(&GaugeParams::phase(1.0, 1.0, 0.0), &p).unwrap();
        assert_eq!(one.d, 0.5);
        let bad = GaugeParams { kappa: 0.1, ..GaugeParams::identity() };
        assert!(matches!(derive_dg_coefficients(&bad, &p), Err(Error::NotRhoPreserving { .. })));
    }
}
