//! Seeded generators for test states and trigonometric fields.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{GridSpec, TrigPoly, VectorFieldSpec, WaveFunction};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Modes `m` with `|mₐ| ≤ max_mode` on the axes the grid has.
fn modes(dim: usize, max_mode: i32) -> Vec<[i32; 2]> {
    let r = -max_mode..=max_mode;
    if dim == 1 {
        r.map(|m| [m, 0]).collect()
    } else {
        r.clone().flat_map(|a| r.clone().map(move |b| [a, b])).collect()
    }
}

fn unit_complex(rng: &mut TestRng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Normalised state with random Fourier coefficients on `|mₐ| ≤ max_mode`.
pub fn band_limited_state(grid: &GridSpec, max_mode: i32, rng: &mut TestRng) -> Result<WaveFunction> {
    let base = TrigPoly::base_for(grid);
    let p = TrigPoly::from_terms(base, modes(grid.dim(), max_mode).into_iter().map(|m| (m, unit_complex(rng))));
    let vals: Vec<C64> = grid.points().into_iter().map(|x| p.eval_at(x)).collect();
    WaveFunction::new(grid.clone(), vals, 0.0)?.normalized()
}

/// Real trigonometric polynomial with `sup |f| ≤ bound` and no constant
/// term unless `with_constant`.
pub fn real_trig_poly(grid: &GridSpec, max_mode: i32, bound: f64, with_constant: bool, rng: &mut TestRng) -> TrigPoly {
    let base = TrigPoly::base_for(grid);
    let mut terms = Vec::new();
    for m in modes(grid.dim(), max_mode) {
        let positive = m[0] > 0 || (m[0] == 0 && m[1] > 0);
        if positive {
            let c = unit_complex(rng);
            terms.push((m, c));
            terms.push(([-m[0], -m[1]], c.conj()));
        } else if m == [0, 0] && with_constant {
            terms.push((m, C64::new(rng.gen_range(-1.0..1.0), 0.0)));
        }
    }
    let total: f64 = terms.iter().map(|(_, c)| c.norm()).sum();
    let scale = if total > 0.0 { bound / total } else { 0.0 };
    TrigPoly::from_terms(base, terms.into_iter().map(|(m, c)| (m, c * scale)))
}

/// Vector field with random real trig components.
pub fn trig_vector_field(grid: &GridSpec, max_mode: i32, rng: &mut TestRng) -> Result<VectorFieldSpec> {
    let comps = (0..grid.dim())
        .map(|_| real_trig_poly(grid, max_mode, 1.0, true, rng))
        .collect();
    VectorFieldSpec::from_trig(comps)
}

/// `exp(a + ib)` with real trig polynomials `|a| ≤ 0.3`, `|b| ≤ 0.5`:
/// smooth, free of nodes, and with a phase that stays inside the principal
/// branch.
pub fn node_free_state(grid: &GridSpec, max_mode: i32, rng: &mut TestRng) -> Result<WaveFunction> {
    let a = real_trig_poly(grid, max_mode, 0.3, true, rng);
    let b = real_trig_poly(grid, max_mode, 0.5, true, rng);
    let vals = grid
        .points()
        .into_iter()
        .map(|x| C64::new(a.eval_at(x).re, b.eval_at(x).re).exp())
        .collect();
    WaveFunction::new(grid.clone(), vals, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn seeded_and_bounded() {
        let g = make_grid(2, 16, 3.0).unwrap();
        let a = node_free_state(&g, 2, &mut rng(7)).unwrap();
        let b = node_free_state(&g, 2, &mut rng(7)).unwrap();
        assert_eq!(a, b);
        for z in a.values() {
            assert!(z.arg().abs() <= 0.5 + 1e-12);
            assert!(z.norm().ln().abs() <= 0.3 + 1e-12);
        }
        let s = band_limited_state(&g, 3, &mut rng(1)).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let p = real_trig_poly(&g, 3, 1.0, false, &mut rng(2));
        assert!(p.is_real());
    }
}
