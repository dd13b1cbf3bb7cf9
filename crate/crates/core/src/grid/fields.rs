//! Classical kinematic elements sampled on the grid: real functions `f` and
//! vector fields `X = g·∇`.
//!
//! Trigonometric polynomials are the workhorse: they are periodic, closed
//! under products and derivatives, and band-limited, so spectral derivatives
//! of them are exact up to rounding and brackets can be carried analytically.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{spectral, GridSpec};
use crate::error::{Error, Result};

/// `f(x) = Σ c_m exp(i (m₀ b₀ x + m₁ b₁ y))` with integer modes `m` and
/// per-axis base wavenumbers `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    base: [f64; 2],
    terms: Vec<TrigTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub mode: [i32; 2],
    pub coeff: C64,
}

impl TrigPoly {
    fn from_map(base: [f64; 2], map: BTreeMap<[i32; 2], C64>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| *c != C64::new(0.0, 0.0))
            .map(|(mode, coeff)| TrigTerm { mode, coeff })
            .collect();
        Self { base, terms }
    }

    pub fn from_terms(base: [f64; 2], terms: impl IntoIterator<Item = ([i32; 2], C64)>) -> Self {
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert(C64::new(0.0, 0.0)) += c;
        }
        Self::from_map(base, map)
    }

    pub fn zero() -> Self {
        Self { base: [1.0, 1.0], terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms([1.0, 1.0], [([0, 0], C64::new(c, 0.0))])
    }

    /// `amp · cos(m b x_axis)`.
    pub fn cos(base: [f64; 2], axis: usize, m: i32, amp: f64) -> Self {
        let mut p = [0, 0];
        p[axis] = m;
        let n = [-p[0], -p[1]];
        Self::from_terms(base, [(p, C64::new(amp / 2.0, 0.0)), (n, C64::new(amp / 2.0, 0.0))])
    }

    /// `amp · sin(m b x_axis)`.
    pub fn sin(base: [f64; 2], axis: usize, m: i32, amp: f64) -> Self {
        let mut p = [0, 0];
        p[axis] = m;
        let n = [-p[0], -p[1]];
        Self::from_terms(base, [(p, C64::new(0.0, -amp / 2.0)), (n, C64::new(0.0, amp / 2.0))])
    }

    /// Base wavenumbers `2π/L` of a grid.
    pub fn base_for(grid: &GridSpec) -> [f64; 2] {
        let mut b = [1.0, 1.0];
        for (a, slot) in b.iter_mut().enumerate().take(grid.dim()) {
            *slot = 2.0 * PI / grid.lengths()[a];
        }
        b
    }

    pub fn base(&self) -> [f64; 2] {
        self.base
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.mode == [0, 0])
    }

    fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Coefficients are Hermitian-symmetric, i.e. the function is real.
    pub fn is_real(&self) -> bool {
        let tol = 1e-14 * self.max_coeff().max(1e-300);
        let map: BTreeMap<_, _> = self.terms.iter().map(|t| (t.mode, t.coeff)).collect();
        self.terms.iter().all(|t| {
            let partner = map
                .get(&[-t.mode[0], -t.mode[1]])
                .copied()
                .unwrap_or(C64::new(0.0, 0.0));
            (partner - t.coeff.conj()).norm() <= tol
        })
    }

    fn common_base(&self, other: &Self) -> Result<[f64; 2]> {
        if self.is_constant() {
            return Ok(other.base);
        }
        if other.is_constant() {
            return Ok(self.base);
        }
        for a in 0..2 {
            let (x, y) = (self.base[a], other.base[a]);
            if (x - y).abs() > 1e-14 * x.abs().max(y.abs()) {
                return Err(Error::InvalidField(format!(
                    "trigonometric polynomials with different base wavenumbers {:?} and {:?}",
                    self.base, other.base
                )));
            }
        }
        Ok(self.base)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let base = self.common_base(other)?;
        Ok(Self::from_terms(
            base,
            self.terms.iter().chain(&other.terms).map(|t| (t.mode, t.coeff)),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_terms(self.base, self.terms.iter().map(|t| (t.mode, t.coeff * s)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let base = self.common_base(other)?;
        let mut map = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let m = [a.mode[0] + b.mode[0], a.mode[1] + b.mode[1]];
                *map.entry(m).or_insert(C64::new(0.0, 0.0)) += a.coeff * b.coeff;
            }
        }
        Ok(Self::from_map(base, map))
    }

    /// Exact partial derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let b = self.base[axis];
        Self::from_terms(
            self.base,
            self.terms
                .iter()
                .map(|t| (t.mode, t.coeff * C64::new(0.0, t.mode[axis] as f64 * b))),
        )
    }

    pub fn eval_at(&self, p: [f64; 2]) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                let ph = t.mode[0] as f64 * self.base[0] * p[0] + t.mode[1] as f64 * self.base[1] * p[1];
                t.coeff * C64::from_polar(1.0, ph)
            })
            .sum()
    }

    fn check_periodic(&self, grid: &GridSpec) -> Result<()> {
        for a in 0..2 {
            let used = self.terms.iter().any(|t| t.mode[a] != 0);
            if !used {
                continue;
            }
            if a >= grid.dim() {
                return Err(Error::InvalidField(format!(
                    "field depends on axis {a} of a {}-dimensional grid",
                    grid.dim()
                )));
            }
            let m = self.base[a] * grid.lengths()[a] / (2.0 * PI);
            if (m - m.round()).abs() > 1e-9 * m.abs().max(1.0) || m.round() == 0.0 {
                return Err(Error::InvalidField(format!(
                    "base wavenumber {} is not periodic on a box of length {}",
                    self.base[a],
                    grid.lengths()[a]
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, grid: &GridSpec) -> Result<Vec<C64>> {
        self.check_periodic(grid)?;
        let real = self.is_real();
        Ok(grid
            .points()
            .into_iter()
            .map(|p| {
                let v = self.eval_at(p);
                if real {
                    C64::new(v.re, 0.0)
                } else {
                    v
                }
            })
            .collect())
    }
}

/// A scalar function on the configuration space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarFieldSpec {
    /// Trigonometric polynomial (constants included).
    Trig(TrigPoly),
    /// Wrapped Gaussian bump `A Σ_images exp(-|x-c|²/(2w²))`.
    Gaussian { amplitude: f64, center: Vec<f64>, width: f64 },
    /// Harmonic well `½k|x-c|²` evaluated on the centred box. Not periodic;
    /// only ever used as a multiplication operator (a potential), never
    /// differentiated.
    Harmonic { stiffness: f64, center: Vec<f64> },
}

impl Default for ScalarFieldSpec {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<TrigPoly> for ScalarFieldSpec {
    fn from(p: TrigPoly) -> Self {
        Self::Trig(p)
    }
}

impl ScalarFieldSpec {
    pub fn zero() -> Self {
        Self::Trig(TrigPoly::zero())
    }

    pub fn constant(c: f64) -> Self {
        Self::Trig(TrigPoly::constant(c))
    }

    pub fn as_trig(&self) -> Option<&TrigPoly> {
        match self {
            Self::Trig(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Trig(p) if p.is_constant())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Trig(p) if p.is_zero())
    }

    pub fn is_real(&self) -> bool {
        match self {
            Self::Trig(p) => p.is_real(),
            _ => true,
        }
    }

    /// Sample on the grid (complex for non-real trig polynomials).
    pub fn eval(&self, grid: &GridSpec) -> Result<Vec<C64>> {
        let vals = match self {
            Self::Trig(p) => p.eval(grid)?,
            Self::Gaussian { amplitude, center, width } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidField(format!("gaussian width must be positive, got {width}")));
                }
                let c = center_vec(center, grid.dim())?;
                let dim = grid.dim();
                let images: Vec<[i32; 2]> = if dim == 1 {
                    (-2..=2).map(|i| [i, 0]).collect()
                } else {
                    (-2..=2).flat_map(|i| (-2..=2).map(move |j| [i, j])).collect()
                };
                grid.points()
                    .into_iter()
                    .map(|p| {
                        let v: f64 = images
                            .iter()
                            .map(|img| {
                                let r2: f64 = (0..dim)
                                    .map(|a| (p[a] - c[a] - img[a] as f64 * grid.lengths()[a]).powi(2))
                                    .sum();
                                (-r2 / (2.0 * width * width)).exp()
                            })
                            .sum();
                        C64::new(amplitude * v, 0.0)
                    })
                    .collect()
            }
            Self::Harmonic { stiffness, center } => {
                let c = center_vec(center, grid.dim())?;
                grid.points()
                    .into_iter()
                    .map(|p| {
                        let r2: f64 = (0..grid.dim()).map(|a| (p[a] - c[a]).powi(2)).sum();
                        C64::new(0.5 * stiffness * r2, 0.0)
                    })
                    .collect()
            }
        };
        if vals.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("scalar field".into()));
        }
        Ok(vals)
    }

    /// Sample a real field; fails for genuinely complex specs.
    pub fn eval_real(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        if !self.is_real() {
            return Err(Error::InvalidField("expected a real-valued field".into()));
        }
        Ok(self.eval(grid)?.into_iter().map(|z| z.re).collect())
    }
}

fn center_vec(c: &[f64], dim: usize) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    match c.len() {
        0 => {}
        n if n == dim => out[..n].copy_from_slice(c),
        n => {
            return Err(Error::InvalidField(format!(
                "center has {n} components on a {dim}-dimensional grid"
            )))
        }
    }
    Ok(out)
}

/// A vector field `X = Σ g_a ∂_a` together with its divergence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldSpec {
    components: Vec<ScalarFieldSpec>,
    divergence: ScalarFieldSpec,
}

/// Allowed mismatch between the stated divergence and the spectral one.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-8;

impl VectorFieldSpec {
    /// Components with an explicitly supplied divergence. Use
    /// [`VectorFieldSpec::check_divergence`] to validate it on a grid.
    pub fn new(components: Vec<ScalarFieldSpec>, divergence: ScalarFieldSpec) -> Result<Self> {
        if !(1..=2).contains(&components.len()) {
            return Err(Error::InvalidField(format!(
                "vector field needs 1 or 2 components, got {}",
                components.len()
            )));
        }
        Ok(Self { components, divergence })
    }

    /// Trigonometric components; the divergence is computed analytically.
    pub fn from_trig(components: Vec<TrigPoly>) -> Result<Self> {
        let mut div = TrigPoly::zero();
        for (a, c) in components.iter().enumerate() {
            div = div.add(&c.derivative(a))?;
        }
        Self::new(components.into_iter().map(ScalarFieldSpec::Trig).collect(), ScalarFieldSpec::Trig(div))
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarFieldSpec] {
        &self.components
    }

    pub fn divergence(&self) -> &ScalarFieldSpec {
        &self.divergence
    }

    pub fn trig_components(&self) -> Option<Vec<&TrigPoly>> {
        self.components.iter().map(|c| c.as_trig()).collect()
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence.is_zero()
    }

    /// `X(f) = g·∇f` for trigonometric `f` and components.
    pub fn apply_to(&self, f: &TrigPoly) -> Result<TrigPoly> {
        let comps = self
            .trig_components()
            .ok_or_else(|| Error::NotClosed("vector field components are not trigonometric".into()))?;
        let mut out = TrigPoly::zero();
        for (a, g) in comps.iter().enumerate() {
            out = out.add(&g.mul(&f.derivative(a))?)?;
        }
        Ok(out)
    }

    /// Max deviation between the stated divergence and the spectral
    /// divergence of the sampled components. Errors above
    /// [`DIVERGENCE_TOLERANCE`].
    pub fn check_divergence(&self, grid: &GridSpec) -> Result<f64> {
        if self.dim() != grid.dim() {
            return Err(Error::GridMismatch);
        }
        let stated = self.divergence.eval(grid)?;
        let mut spec = vec![C64::new(0.0, 0.0); grid.len()];
        for (a, c) in self.components.iter().enumerate() {
            let d = spectral::spectral_derivative(grid, &c.eval(grid)?, a, 1)?;
            spec.iter_mut().zip(d).for_each(|(s, v)| *s += v);
        }
        let err = stated
            .iter()
            .zip(&spec)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if err > DIVERGENCE_TOLERANCE {
            return Err(Error::InvalidField(format!(
                "stated divergence deviates from components by {err:e}"
            )));
        }
        Ok(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    const UNIT: [f64; 2] = [1.0, 1.0];

    #[test]
    fn sine_squared_matches_product() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let s = TrigPoly::sin(UNIT, 0, 1, 1.0);
        let s2 = s.mul(&s).unwrap();
        let vals = s2.eval(&g).unwrap();
        for (v, x) in vals.iter().zip(g.coordinates(0)) {
            assert!((v.re - x.sin().powi(2)).abs() < 1e-15);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn derivative_of_trig_poly() {
        let c = TrigPoly::cos(UNIT, 0, 3, 2.0);
        let d = c.derivative(0);
        let want = TrigPoly::sin(UNIT, 0, 3, -6.0);
        let diff = d.sub(&want).unwrap();
        assert!(diff.terms().iter().all(|t| t.coeff.norm() < 1e-14));
    }

    #[test]
    fn divergence_from_components() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let x = VectorFieldSpec::from_trig(vec![
            TrigPoly::sin(UNIT, 0, 1, 1.0).mul(&TrigPoly::cos(UNIT, 1, 2, 1.0)).unwrap(),
            TrigPoly::cos(UNIT, 0, 1, 0.5),
        ])
        .unwrap();
        assert!(x.check_divergence(&g).unwrap() < 1e-12);
    }

    #[test]
    fn wrong_divergence_detected() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let x = VectorFieldSpec::new(
            vec![TrigPoly::sin(UNIT, 0, 1, 1.0).into()],
            ScalarFieldSpec::constant(1.0),
        )
        .unwrap();
        assert!(x.check_divergence(&g).is_err());
    }

    #[test]
    fn non_periodic_base_rejected() {
        let g = make_grid(1, 32, 5.0).unwrap();
        assert!(TrigPoly::sin(UNIT, 0, 1, 1.0).eval(&g).is_err());
        let base = TrigPoly::base_for(&g);
        assert!(TrigPoly::sin(base, 0, 1, 1.0).eval(&g).is_ok());
    }

    #[test]
    fn wrapped_gaussian_is_periodic() {
        let g = make_grid(1, 64, 10.0).unwrap();
        let f = ScalarFieldSpec::Gaussian { amplitude: 1.0, center: vec![4.5], width: 0.7 };
        let v = f.eval_real(&g).unwrap();
        // peak wraps across the boundary
        let x = g.coordinates(0);
        let left = v[0];
        let want = (-(x[0] + 10.0 - 4.5_f64).powi(2) / (2.0 * 0.49)).exp();
        assert!((left - want).abs() < 1e-6);
    }

    #[test]
    fn complex_poly_is_not_real() {
        let p = TrigPoly::from_terms(UNIT, [([1, 0], C64::new(1.0, 0.0))]);
        assert!(!p.is_real());
        assert!(TrigPoly::cos(UNIT, 0, 2, 1.0).is_real());
        let g = make_grid(1, 16, 2.0 * PI).unwrap();
        assert!(ScalarFieldSpec::Trig(p).eval_real(&g).is_err());
    }
}
