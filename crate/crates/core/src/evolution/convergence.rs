//! Refinement studies: fit `log e = p·log h + c` over at least three levels.

use num_complex::Complex64 as C64;

use super::{Propagator, Scheme};
use crate::error::{Error, Result};
use crate::functionals::Regularisation;
use crate::grid::{inner_raw, l2_norm, GridSpec, WaveFunction};
use crate::kinematics::DGParams;

/// Errors at or below this are treated as the rounding floor.
pub const ROUNDING_FLOOR: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct OrderFit {
    /// Least-squares slope; `None` when the errors are non-monotone or sit
    /// on the rounding floor.
    pub order: Option<f64>,
    /// RMS deviation of `log e` from the fitted line.
    pub fit_residual: f64,
    /// Errors decrease strictly as the step shrinks.
    pub monotone: bool,
    /// Smallest error is at the rounding floor.
    pub at_floor: bool,
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
}

impl OrderFit {
    pub fn label(&self) -> String {
        match self.order {
            Some(p) => format!("{p:.3}"),
            None if self.at_floor => "spectral".into(),
            None => "non-monotone".into(),
        }
    }
}

/// Slope of `log errors` against `log steps`.
pub fn fit_order(steps: &[f64], errors: &[f64], floor: f64) -> Result<OrderFit> {
    if steps.len() != errors.len() {
        return Err(Error::InvalidParameter("steps and errors differ in length".into()));
    }
    if steps.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 refinement levels, got {}", steps.len())));
    }
    if steps.iter().chain(errors).any(|v| !v.is_finite() || *v < 0.0) || steps.contains(&0.0) {
        return Err(Error::InvalidParameter("steps must be positive and errors non-negative".into()));
    }
    let mut idx: Vec<usize> = (0..steps.len()).collect();
    idx.sort_by(|&a, &b| steps[b].total_cmp(&steps[a]));
    let monotone = idx.windows(2).all(|w| errors[w[1]] < errors[w[0]]);
    let at_floor = errors.iter().any(|&e| e <= floor);
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let fit_residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (my + slope * (x - mx))).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let order = (monotone && !at_floor).then_some(slope);
    Ok(OrderFit { order, fit_residual, monotone, at_floor, steps: steps.to_vec(), errors: errors.to_vec() })
}

/// `min_α ‖a - e^{iα} b‖ / ‖b‖`.
pub fn phase_aligned_error(grid: &GridSpec, a: &[C64], b: &[C64]) -> f64 {
    let ov = inner_raw(b, a);
    let rot = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
    let diff: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - rot * y).collect();
    l2_norm(grid, &diff) / l2_norm(grid, b)
}

/// What a temporal study compares against.
pub enum Reference<'a> {
    /// Exact solution sampled at the final time.
    Analytic(&'a dyn Fn(&GridSpec, f64) -> Vec<C64>),
    /// The same integrator at a much smaller step.
    TinyStep { dt: f64 },
}

pub struct TemporalProblem<'a> {
    pub psi0: &'a WaveFunction,
    pub params: &'a DGParams,
    pub reg: Regularisation,
    pub t_final: f64,
}

fn steps_for(t: f64, dt: f64) -> Result<usize> {
    let n = (t / dt).round();
    if n < 1.0 || (n * dt - t).abs() > 1e-9 * t.abs() {
        return Err(Error::InvalidParameter(format!("dt = {dt} does not divide t_final = {t}")));
    }
    Ok(n as usize)
}

/// Integrate to `t_final` with a fixed step.
pub fn integrate(prop: &Propagator, psi0: &WaveFunction, t_final: f64, dt: f64) -> Result<WaveFunction> {
    let n = steps_for(t_final, dt)?;
    let mut psi = psi0.clone();
    for k in 0..n {
        psi = prop.advance(&psi, dt, k + 1)?;
    }
    Ok(psi)
}

/// Phase-aligned errors at `t_final` for each `dt`, fitted for the
/// temporal order.
pub fn temporal_convergence(
    problem: &TemporalProblem<'_>,
    dts: &[f64],
    scheme: Scheme,
    reference: Reference<'_>,
) -> Result<OrderFit> {
    let grid = problem.psi0.grid();
    let prop = Propagator::new(grid, problem.params, problem.reg, scheme)?;
    let target = match reference {
        Reference::Analytic(f) => f(grid, problem.t_final),
        Reference::TinyStep { dt } => integrate(&prop, problem.psi0, problem.t_final, dt)?.into_values(),
    };
    let errors = dts
        .iter()
        .map(|&dt| {
            let psi = integrate(&prop, problem.psi0, problem.t_final, dt)?;
            Ok(phase_aligned_error(grid, psi.values(), &target))
        })
        .collect::<Result<Vec<_>>>()?;
    fit_order(dts, &errors, ROUNDING_FLOOR)
}

/// Spatial study: `error_at(grid)` for each resolution on a box of fixed
/// `length`, fitted against the spacing.
pub fn spatial_convergence(
    dim: usize,
    ns: &[usize],
    length: f64,
    mut error_at: impl FnMut(&GridSpec) -> Result<f64>,
) -> Result<OrderFit> {
    let mut hs = Vec::new();
    let mut errors = Vec::new();
    for &n in ns {
        let g = crate::grid::make_grid(dim, n, length)?;
        hs.push(g.spacing(0));
        errors.push(error_at(&g)?);
    }
    fit_order(&hs, &errors, ROUNDING_FLOOR)
}

/// Free Gaussian with `k₀ = 0` in one dimension:
/// `(2πσ₀²)^{-1/4} (1+iτ)^{-1/2} exp(-(x-x₀)²/(4σ₀²(1+iτ)))`, `τ = ħt/(2mσ₀²)`.
pub fn free_gaussian_exact(grid: &GridSpec, sigma0: f64, x0: f64, hbar: f64, mass: f64, t: f64) -> Vec<C64> {
    let tau = hbar * t / (2.0 * mass * sigma0 * sigma0);
    let w = C64::new(1.0, tau);
    let pref = (2.0 * std::f64::consts::PI * sigma0 * sigma0).powf(-0.25) / w.sqrt();
    grid.coordinates(0)
        .iter()
        .map(|&x| pref * (-(x - x0).powi(2) / (4.0 * sigma0 * sigma0 * w)).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_slope() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let es: Vec<f64> = hs.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        let f = fit_order(&hs, &es, ROUNDING_FLOOR).unwrap();
        assert!((f.order.unwrap() - 2.0).abs() < 1e-12);
        assert!(f.fit_residual < 1e-12);
        assert_eq!(f.label(), "2.000");
    }

    #[test]
    fn non_monotone_gives_no_order() {
        let f = fit_order(&[0.1, 0.05, 0.025], &[1e-3, 2e-3, 1e-4], ROUNDING_FLOOR).unwrap();
        assert!(!f.monotone);
        assert_eq!(f.order, None);
        assert_eq!(f.label(), "non-monotone");
    }

    #[test]
    fn floor_is_reported_as_spectral() {
        let f = fit_order(&[0.4, 0.2, 0.1], &[1e-4, 1e-9, 1e-14], ROUNDING_FLOOR).unwrap();
        assert!(f.at_floor);
        assert_eq!(f.label(), "spectral");
    }

    #[test]
    fn too_few_levels() {
        assert!(fit_order(&[0.1, 0.05], &[1.0, 0.5], ROUNDING_FLOOR).is_err());
    }
}
