//! The quantised Borel kinematic on a flat periodic box.
//!
//! Positions act as multiplication operators, `Q(f)ψ = fψ`, and a vector
//! field `X = g·∇` is represented by the first-order operator
//!
//! ```text
//! P^(D)(X) ψ = -iħ g·∇ψ + (-iħ/2 + D) (div g) ψ
//! ```
//!
//! with a real number `D` labelling unitarily inequivalent quantisations.
//! `D` is used literally in this operator; its relation to the diffusion
//! coefficient of the dynamics is handled by the `gauge` module.

pub mod catalog;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::R3Variant;
use crate::grid::{spectral, ScalarFieldSpec, TrigPoly, VectorFieldSpec, WaveFunction};

pub use catalog::{catalog_list, catalog_lookup, CatalogEntry};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Parameters of the DG family of nonlinear Schrödinger equations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DGParams {
    pub hbar: f64,
    pub mass: f64,
    /// Diffusion coefficient D.
    pub d: f64,
    /// Scale D′ of the real nonlinearity.
    pub d_prime: f64,
    /// Coefficients c₁…c₅ of R₁…R₅.
    pub c: [f64; 5],
    pub potential: ScalarFieldSpec,
    #[serde(default)]
    pub r3_variant: R3Variant,
}

impl Default for DGParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            d: 0.0,
            d_prime: 0.0,
            c: [0.0; 5],
            potential: ScalarFieldSpec::zero(),
            r3_variant: R3Variant::default(),
        }
    }
}

impl DGParams {
    pub fn with_d(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {}", self.mass)));
        }
        if !self.d.is_finite() || !self.d_prime.is_finite() || self.c.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("D, D′ and c₁…c₅ must be finite".into()));
        }
        if !self.potential.is_real() {
            return Err(Error::InvalidParameter("potential must be real".into()));
        }
        Ok(())
    }

    /// No imaginary term and no real nonlinearity.
    pub fn is_linear(&self) -> bool {
        self.d == 0.0 && (self.d_prime == 0.0 || self.c.iter().all(|&c| c == 0.0))
    }

    /// Products `D′cᵢ` multiplying `ħRᵢ` in the equation.
    pub fn nonlinear_weights(&self) -> [f64; 5] {
        self.c.map(|c| self.d_prime * c)
    }
}

/// `a · g·∇ + b · m(x)` with complex prefactors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearOperatorSpec {
    pub derivative_coeff: C64,
    pub field: VectorFieldSpec,
    pub multiplier_coeff: C64,
    pub multiplier: ScalarFieldSpec,
}

impl LinearOperatorSpec {
    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        let grid = psi.grid();
        if self.field.dim() != grid.dim() {
            return Err(Error::GridMismatch);
        }
        let mut out: Vec<C64> = if self.multiplier.is_zero() || self.multiplier_coeff == C64::new(0.0, 0.0) {
            vec![C64::new(0.0, 0.0); grid.len()]
        } else {
            let m = self.multiplier.eval(grid)?;
            m.iter()
                .zip(psi.values())
                .map(|(m, p)| self.multiplier_coeff * m * p)
                .collect()
        };
        if self.derivative_coeff != C64::new(0.0, 0.0) {
            for (axis, comp) in self.field.components().iter().enumerate() {
                if comp.is_zero() {
                    continue;
                }
                let g = comp.eval(grid)?;
                let d = spectral::derivative_unchecked(grid, psi.values(), axis, 1);
                for ((o, g), d) in out.iter_mut().zip(&g).zip(&d) {
                    *o += self.derivative_coeff * g * d;
                }
            }
        }
        Ok(psi.with_values(out))
    }
}

/// `Q(f)ψ = fψ`.
pub fn apply_position(f: &ScalarFieldSpec, psi: &WaveFunction) -> Result<WaveFunction> {
    let vals = f.eval(psi.grid())?;
    Ok(psi.with_values(vals.iter().zip(psi.values()).map(|(f, p)| f * p).collect()))
}

/// The operator `P^(D)(X)` as a [`LinearOperatorSpec`].
pub fn momentum_operator(x: &VectorFieldSpec, params: &DGParams) -> LinearOperatorSpec {
    let hbar = params.hbar;
    LinearOperatorSpec {
        derivative_coeff: C64::new(0.0, -hbar),
        field: x.clone(),
        multiplier_coeff: C64::new(params.d, -hbar / 2.0),
        multiplier: x.divergence().clone(),
    }
}

/// `P^(D)(X)ψ = -iħ g·∇ψ + (-iħ/2 + D)(div g)ψ`.
pub fn apply_momentum(x: &VectorFieldSpec, psi: &WaveFunction, params: &DGParams) -> Result<WaveFunction> {
    momentum_operator(x, params).apply(psi)
}

/// `[X, Y]^i = X(Yⁱ) - Y(Xⁱ)` for trigonometric vector fields; the
/// divergence is carried analytically.
pub fn lie_bracket(x: &VectorFieldSpec, y: &VectorFieldSpec) -> Result<VectorFieldSpec> {
    if x.dim() != y.dim() {
        return Err(Error::InvalidField("bracket of fields with different dimensions".into()));
    }
    let ys = y
        .trig_components()
        .ok_or_else(|| Error::NotClosed("second field is not trigonometric".into()))?;
    let xs = x
        .trig_components()
        .ok_or_else(|| Error::NotClosed("first field is not trigonometric".into()))?;
    let comps = xs
        .iter()
        .zip(&ys)
        .map(|(xi, yi)| x.apply_to(yi)?.sub(&y.apply_to(xi)?))
        .collect::<Result<Vec<_>>>()?;
    VectorFieldSpec::from_trig(comps)
}

/// `grad f` of a trigonometric function.
pub fn gradient_field(f: &TrigPoly, dim: usize) -> Result<VectorFieldSpec> {
    VectorFieldSpec::from_trig((0..dim).map(|a| f.derivative(a)).collect())
}

/// Which commutator relation of the partial Lie-algebra homomorphism to test.
#[derive(Clone, Copy, Debug)]
pub enum CommutatorCheck<'a> {
    /// `[Q(f), Q(h)] = 0`.
    Positions(&'a ScalarFieldSpec, &'a ScalarFieldSpec),
    /// `[P(X), Q(f)] = -iħ Q(Xf)`.
    MomentumPosition(&'a VectorFieldSpec, &'a ScalarFieldSpec),
    /// `[P(X), P(Y)] = -iħ P([X, Y])`.
    Momenta(&'a VectorFieldSpec, &'a VectorFieldSpec),
}

fn sub_values(a: &WaveFunction, b: &WaveFunction) -> Vec<C64> {
    a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect()
}

fn relative(grid_values: &[C64], psi: &WaveFunction) -> f64 {
    crate::grid::l2_norm(psi.grid(), grid_values) / psi.norm()
}

/// `X(f)` analytically when possible, otherwise from spectral derivatives.
fn directional_derivative(x: &VectorFieldSpec, f: &ScalarFieldSpec, psi: &WaveFunction) -> Result<ScalarOrSamples> {
    if let Some(p) = f.as_trig() {
        if let Ok(xf) = x.apply_to(p) {
            return Ok(ScalarOrSamples::Spec(ScalarFieldSpec::Trig(xf)));
        }
    }
    let grid = psi.grid();
    let fv = f.eval(grid)?;
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    for (a, comp) in x.components().iter().enumerate() {
        let g = comp.eval(grid)?;
        let d = spectral::spectral_derivative(grid, &fv, a, 1)?;
        for ((o, g), d) in out.iter_mut().zip(&g).zip(&d) {
            *o += g * d;
        }
    }
    Ok(ScalarOrSamples::Samples(out))
}

enum ScalarOrSamples {
    Spec(ScalarFieldSpec),
    Samples(Vec<C64>),
}

/// Max over `states` of `‖(LHS - RHS)ψ‖ / ‖ψ‖` for the chosen relation.
pub fn homomorphism_residual(check: CommutatorCheck<'_>, params: &DGParams, states: &[WaveFunction]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let hbar = params.hbar;
    let bracket = match check {
        CommutatorCheck::Momenta(x, y) => Some(lie_bracket(x, y)?),
        _ => None,
    };
    let mut worst: f64 = 0.0;
    for psi in states {
        let defect = match check {
            CommutatorCheck::Positions(f, h) => {
                let fh = apply_position(f, &apply_position(h, psi)?)?;
                let hf = apply_position(h, &apply_position(f, psi)?)?;
                sub_values(&fh, &hf)
            }
            CommutatorCheck::MomentumPosition(x, f) => {
                let pq = apply_momentum(x, &apply_position(f, psi)?, params)?;
                let qp = apply_position(f, &apply_momentum(x, psi, params)?)?;
                let rhs: Vec<C64> = match directional_derivative(x, f, psi)? {
                    ScalarOrSamples::Spec(xf) => apply_position(&xf, psi)?.into_values(),
                    ScalarOrSamples::Samples(xf) => xf.iter().zip(psi.values()).map(|(a, b)| a * b).collect(),
                };
                pq.values()
                    .iter()
                    .zip(qp.values())
                    .zip(&rhs)
                    .map(|((a, b), r)| (a - b) + I * hbar * r)
                    .collect()
            }
            CommutatorCheck::Momenta(x, y) => {
                let xy = apply_momentum(x, &apply_momentum(y, psi, params)?, params)?;
                let yx = apply_momentum(y, &apply_momentum(x, psi, params)?, params)?;
                let rhs = apply_momentum(bracket.as_ref().unwrap(), psi, params)?;
                xy.values()
                    .iter()
                    .zip(yx.values())
                    .zip(rhs.values())
                    .map(|((a, b), r)| (a - b) + I * hbar * r)
                    .collect()
            }
        };
        worst = worst.max(relative(&defect, psi));
    }
    Ok(worst)
}

/// Whether the commutator identity of the linear dynamics is evaluated with
/// `ħ = m = 1` or with the values carried by [`DGParams`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DynamicsUnits {
    #[default]
    Natural,
    Physical,
}

/// Outcome of [`dynamics_commutator_residual`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsResidual {
    /// Relative defect of `[H, Q(f)] = -(iħ/m) P^(D)(grad f) + (iħD/m) Q(Δf)`.
    pub identity: f64,
    /// Relative defect of the naive ansatz `[H, Q(f)] = -(iħ/m) P^(D)(grad f)`;
    /// equals `(ħ|D|/m) ‖(Δf)ψ‖/‖ψ‖`, so it vanishes only for `D = 0`.
    pub ansatz_defect: f64,
}

/// Commutator of `H = -(ħ²/2m)Δ + Q(V)` with a position observable, compared
/// against the quantised momentum of `grad f`.
///
/// The correction `(iħD/m)Q(Δf)` is exactly what stops the commutator from
/// being a pure momentum operator when `D ≠ 0`.
pub fn dynamics_commutator_residual(
    f: &ScalarFieldSpec,
    psi: &WaveFunction,
    params: &DGParams,
    units: DynamicsUnits,
) -> Result<DynamicsResidual> {
    let poly = f
        .as_trig()
        .ok_or_else(|| Error::NotClosed("dynamics residual needs a trigonometric f".into()))?;
    if poly.is_constant() {
        // Q(f) is a multiple of the identity.
        return Ok(DynamicsResidual { identity: 0.0, ansatz_defect: 0.0 });
    }
    let (hbar, mass) = match units {
        DynamicsUnits::Natural => (1.0, 1.0),
        DynamicsUnits::Physical => (params.hbar, params.mass),
    };
    let local = DGParams { hbar, mass, ..params.clone() };
    let grid = psi.grid();
    let v = local.potential.eval(grid)?;
    let hamiltonian = |phi: &[C64]| -> Vec<C64> {
        let lap = spectral::laplacian(grid, phi);
        lap.iter()
            .zip(&v)
            .zip(phi)
            .map(|((l, v), p)| -hbar * hbar / (2.0 * mass) * l + v * p)
            .collect()
    };
    let fpsi = apply_position(f, psi)?;
    let h_f = hamiltonian(fpsi.values());
    let f_h = apply_position(f, &psi.with_values(hamiltonian(psi.values())))?;
    let commutator: Vec<C64> = h_f.iter().zip(f_h.values()).map(|(a, b)| a - b).collect();

    let grad = gradient_field(poly, grid.dim())?;
    let p_grad = apply_momentum(&grad, psi, &local)?;
    let lap_f = apply_position(grad.divergence(), psi)?;
    let scale = I * hbar / mass;
    let ansatz: Vec<C64> = commutator
        .iter()
        .zip(p_grad.values())
        .map(|(c, p)| c + scale * p)
        .collect();
    let identity: Vec<C64> = ansatz
        .iter()
        .zip(lap_f.values())
        .map(|(a, l)| a - scale * local.d * l)
        .collect();
    Ok(DynamicsResidual {
        identity: relative(&identity, psi),
        ansatz_defect: relative(&ansatz, psi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample, InitialState};
    use std::f64::consts::PI;

    const UNIT: [f64; 2] = [1.0, 1.0];

    fn grid() -> crate::grid::GridSpec {
        make_grid(1, 64, 2.0 * PI).unwrap()
    }

    fn constant_state(c: f64) -> WaveFunction {
        let g = grid();
        WaveFunction::new(g.clone(), vec![C64::new(c, 0.0); g.len()], 0.0).unwrap()
    }

    fn max_dev(a: &WaveFunction, want: impl Fn(f64, C64) -> C64) -> f64 {
        a.grid()
            .coordinates(0)
            .iter()
            .zip(a.values())
            .map(|(&x, v)| (v - want(x, *v)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn position_operator_examples() {
        let psi = constant_state(0.7);
        let s = ScalarFieldSpec::Trig(TrigPoly::sin(UNIT, 0, 1, 1.0));
        let out = apply_position(&s, &psi).unwrap();
        let g = grid();
        for (v, x) in out.values().iter().zip(g.coordinates(0)) {
            assert!((v - C64::new(0.7 * x.sin(), 0.0)).norm() < 1e-15);
        }
        let id = apply_position(&ScalarFieldSpec::constant(1.0), &psi).unwrap();
        assert_eq!(id, psi);

        let twice = apply_position(&s, &out).unwrap();
        let sq = ScalarFieldSpec::Trig(TrigPoly::sin(UNIT, 0, 1, 1.0).mul(&TrigPoly::sin(UNIT, 0, 1, 1.0)).unwrap());
        let once = apply_position(&sq, &psi).unwrap();
        let dev = twice.values().iter().zip(once.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-14);
    }

    #[test]
    fn momentum_of_plane_wave() {
        let g = grid();
        let psi = sample(&g, &InitialState::PlaneWave { k: vec![3.0] }).unwrap();
        let x = VectorFieldSpec::from_trig(vec![TrigPoly::constant(1.0)]).unwrap();
        let out = apply_momentum(&x, &psi, &DGParams::default().with_d(0.4)).unwrap();
        let dev = out.values().iter().zip(psi.values()).map(|(a, b)| (a - 3.0 * b).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-13);
    }

    #[test]
    fn momentum_divergence_term() {
        let psi = constant_state(0.5);
        let x = VectorFieldSpec::from_trig(vec![TrigPoly::sin(UNIT, 0, 1, 1.0)]).unwrap();
        let out = apply_momentum(&x, &psi, &DGParams::default()).unwrap();
        assert!(max_dev(&out, |x, _| C64::new(0.0, -0.5) * 0.5 * x.cos()) < 1e-14);
        let out = apply_momentum(&x, &psi, &DGParams::default().with_d(0.3)).unwrap();
        assert!(max_dev(&out, |x, _| 0.5 * C64::new(0.3, -0.5) * x.cos()) < 1e-14);
    }

    #[test]
    fn bracket_examples() {
        let dx = VectorFieldSpec::from_trig(vec![TrigPoly::constant(1.0)]).unwrap();
        let b = lie_bracket(&dx, &dx).unwrap();
        assert!(b.trig_components().unwrap()[0].is_zero());

        let x = VectorFieldSpec::from_trig(vec![TrigPoly::sin(UNIT, 0, 1, 1.0)]).unwrap();
        let y = VectorFieldSpec::from_trig(vec![TrigPoly::cos(UNIT, 0, 1, 1.0)]).unwrap();
        let b = lie_bracket(&x, &y).unwrap();
        let c = b.trig_components().unwrap()[0].clone();
        // -sin² - cos² = -1
        let diff = c.sub(&TrigPoly::constant(-1.0)).unwrap();
        assert!(diff.terms().iter().all(|t| t.coeff.norm() < 1e-15));
        assert!(b.divergence().as_trig().unwrap().terms().iter().all(|t| t.coeff.norm() < 1e-15));
    }

    #[test]
    fn bracket_needs_trig_fields() {
        let g = VectorFieldSpec::new(
            vec![ScalarFieldSpec::Gaussian { amplitude: 1.0, center: vec![], width: 1.0 }],
            ScalarFieldSpec::zero(),
        )
        .unwrap();
        let dx = VectorFieldSpec::from_trig(vec![TrigPoly::constant(1.0)]).unwrap();
        assert!(matches!(lie_bracket(&g, &dx), Err(Error::NotClosed(_))));
    }

    #[test]
    fn empty_state_set_rejected() {
        let f = ScalarFieldSpec::constant(1.0);
        let r = homomorphism_residual(CommutatorCheck::Positions(&f, &f), &DGParams::default(), &[]);
        assert!(matches!(r, Err(Error::EmptyTestSet)));
    }

    #[test]
    fn position_commutator_vanishes() {
        let g = grid();
        let psi = sample(&g, &InitialState::Gaussian { sigma: 0.6, center: vec![0.3], k0: vec![2.0] }).unwrap();
        let f = ScalarFieldSpec::Trig(TrigPoly::sin(UNIT, 0, 1, 1.0));
        let h = ScalarFieldSpec::Trig(TrigPoly::cos(UNIT, 0, 1, 1.0));
        let r = homomorphism_residual(CommutatorCheck::Positions(&f, &h), &DGParams::default(), &[psi]).unwrap();
        assert!(r < 1e-14);
    }

    #[test]
    fn commutator_with_constant_is_exactly_zero() {
        let psi = sample(&grid(), &InitialState::PlaneWave { k: vec![1.0] }).unwrap();
        let r = dynamics_commutator_residual(
            &ScalarFieldSpec::constant(2.0),
            &psi,
            &DGParams::default().with_d(0.5),
            DynamicsUnits::Natural,
        )
        .unwrap();
        assert_eq!(r.identity, 0.0);
    }

    #[test]
    fn dynamics_identity_with_diffusion_correction() {
        let psi = sample(&grid(), &InitialState::PlaneWave { k: vec![1.0] }).unwrap();
        let f = ScalarFieldSpec::Trig(TrigPoly::sin(UNIT, 0, 1, 1.0));
        let r0 = dynamics_commutator_residual(&f, &psi, &DGParams::default(), DynamicsUnits::Natural).unwrap();
        assert!(r0.identity < 1e-10 && r0.ansatz_defect < 1e-10);
        let r = dynamics_commutator_residual(&f, &psi, &DGParams::default().with_d(0.5), DynamicsUnits::Natural).unwrap();
        assert!(r.identity < 1e-8);
        // ‖Δf ψ‖/‖ψ‖ = ‖sin x‖ / √(2π) = 1/√2 for the plane wave
        assert!((r.ansatz_defect - 0.5 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dynamics_identity_with_physical_units() {
        let g = make_grid(1, 128, 2.0 * PI).unwrap();
        let psi = sample(&g, &InitialState::Gaussian { sigma: 0.3, center: vec![0.0], k0: vec![1.0] }).unwrap();
        let f = ScalarFieldSpec::Trig(TrigPoly::cos(UNIT, 0, 2, 0.3));
        let params = DGParams { hbar: 0.7, mass: 1.9, d: 0.2, ..DGParams::default() };
        let r = dynamics_commutator_residual(&f, &psi, &params, DynamicsUnits::Physical).unwrap();
        assert!(r.identity < 1e-10, "{r:?}");
        assert!(r.ansatz_defect > 1e-3);
    }
}
