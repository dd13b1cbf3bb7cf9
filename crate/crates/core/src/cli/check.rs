//! Residual suites behind `dglab check`.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::RunConfig;
use crate::evolution::continuity::{continuity_residual_snapshots, stationary_trajectory};
use crate::gauge::{transformed_momentum, GaugeParams};
use crate::grid::{l2_norm, sample, GridSpec, InitialState, ScalarFieldSpec, WaveFunction};
use crate::kinematics::{
    apply_momentum, dynamics_commutator_residual, homomorphism_residual, CommutatorCheck, DynamicsUnits,
};
use crate::random::{band_limited_state, real_trig_poly, rng, trig_vector_field, TestRng};
use crate::Result;

pub const SUITES: [&str; 4] = ["kinematics", "dynamics-obstruction", "gauge-equivalence", "continuity"];

/// One line of the residual table.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub suite: &'static str,
    pub case: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn pass(&self) -> bool {
        self.residual < self.tolerance
    }
}

fn states(grid: &GridSpec, count: usize, modes: i32, r: &mut TestRng) -> Result<Vec<WaveFunction>> {
    (0..count).map(|_| band_limited_state(grid, modes, r)).collect()
}

/// Test-state bandwidth: well inside the grid.
fn modes(grid: &GridSpec) -> i32 {
    (grid.shape()[0] / 16).clamp(1, 8) as i32
}

/// The configured `D` followed by the fixed sweep, without repeats.
fn d_values(cfg: &RunConfig, sweep: &[f64]) -> Vec<f64> {
    let mut out = vec![cfg.d];
    for &d in sweep {
        if !out.contains(&d) {
            out.push(d);
        }
    }
    out
}

fn kinematics(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let grid = cfg.grid();
    let mut r = rng(cfg.seed);
    let tests = states(&grid, 20, modes(&grid), &mut r)?;
    let fields = (0..10)
        .map(|_| {
            let x = trig_vector_field(&grid, 3, &mut r)?;
            let y = trig_vector_field(&grid, 3, &mut r)?;
            let f = ScalarFieldSpec::Trig(real_trig_poly(&grid, 3, 1.0, true, &mut r));
            let h = ScalarFieldSpec::Trig(real_trig_poly(&grid, 3, 1.0, true, &mut r));
            Ok((x, y, f, h))
        })
        .collect::<Result<Vec<_>>>()?;
    d_values(cfg, &[0.0, 0.3, 5.0])
        .into_par_iter()
        .map(|d| {
            let params = cfg.params().with_d(d);
            let mut worst = [0.0f64; 3];
            for (x, y, f, h) in &fields {
                worst[0] = worst[0].max(homomorphism_residual(CommutatorCheck::Positions(f, h), &params, &tests)?);
                worst[1] =
                    worst[1].max(homomorphism_residual(CommutatorCheck::MomentumPosition(x, f), &params, &tests)?);
                worst[2] = worst[2].max(homomorphism_residual(CommutatorCheck::Momenta(x, y), &params, &tests)?);
            }
            Ok(["[Q(f),Q(h)]", "[P(X),Q(f)]", "[P(X),P(Y)]"]
                .iter()
                .zip(worst)
                .map(|(name, w)| CheckRow { suite: "kinematics", case: format!("{name} D={d}"), residual: w, tolerance: 1e-8 })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

fn dynamics_obstruction(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let grid = cfg.grid();
    let mut r = rng(cfg.seed.wrapping_add(1));
    let tests = states(&grid, 5, modes(&grid), &mut r)?;
    let fs: Vec<ScalarFieldSpec> =
        (0..5).map(|_| ScalarFieldSpec::Trig(real_trig_poly(&grid, 3, 1.0, true, &mut r))).collect();
    let mut rows = Vec::new();
    for d in d_values(cfg, &[0.0, 0.5]) {
        let params = cfg.params().with_d(d);
        let mut worst: f64 = 0.0;
        for f in &fs {
            for psi in &tests {
                worst = worst.max(dynamics_commutator_residual(f, psi, &params, DynamicsUnits::Physical)?.identity);
            }
        }
        rows.push(CheckRow { suite: "dynamics-obstruction", case: format!("identity D={d}"), residual: worst, tolerance: 1e-8 });
    }
    Ok(rows)
}

fn gauge_equivalence(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let grid = cfg.grid();
    let mut r = rng(cfg.seed.wrapping_add(2));
    let tests = states(&grid, 20, modes(&grid), &mut r)?;
    let x = trig_vector_field(&grid, 2, &mut r)?;
    let params = cfg.params();
    let mut rows = Vec::new();
    for d in d_values(cfg, &[0.0, 0.1, 1.0]) {
        let op = transformed_momentum(&GaugeParams::phase(4.0 * d, 1.0, 0.0), &x, &params);
        let mut worst: f64 = 0.0;
        for psi in &tests {
            let a = op.apply(psi)?;
            let b = apply_momentum(&x, psi, &params.clone().with_d(d))?;
            let diff: Vec<_> = a.values().iter().zip(b.values()).map(|(p, q)| p - q).collect();
            worst = worst.max(l2_norm(&grid, &diff) / l2_norm(&grid, b.values()).max(f64::MIN_POSITIVE));
        }
        rows.push(CheckRow {
            suite: "gauge-equivalence",
            case: format!("gamma=4D D={d}"),
            residual: worst,
            tolerance: 1e-10,
        });
    }
    Ok(rows)
}

/// Plane waves `e^{ik·x}` are stationary for the free equation at any D,
/// so the recorded trajectory `ψ₀e^{-iEt/ħ}` must satisfy the continuity
/// law exactly.
fn continuity(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let grid = cfg.grid();
    let params = cfg.params();
    let mut rows = Vec::new();
    for m in [1i32, 3, 7] {
        let k: Vec<f64> = (0..grid.dim()).map(|a| 2.0 * PI * m as f64 / grid.lengths()[a]).collect();
        let k2: f64 = k.iter().map(|v| v * v).sum();
        let psi = sample(&grid, &InitialState::PlaneWave { k })?;
        let energy = cfg.hbar * cfg.hbar * k2 / (2.0 * cfg.mass);
        let traj = stationary_trajectory(&psi, energy, cfg.hbar, 1e-3, 5);
        let worst = continuity_residual_snapshots(&traj, &params)?.iter().map(|(_, v)| *v).fold(0.0, f64::max);
        rows.push(CheckRow { suite: "continuity", case: format!("plane wave m={m}"), residual: worst, tolerance: 1e-10 });
    }
    Ok(rows)
}

pub fn run_suite(name: &str, cfg: &RunConfig) -> Option<Result<Vec<CheckRow>>> {
    Some(match name {
        "kinematics" => kinematics(cfg),
        "dynamics-obstruction" => dynamics_obstruction(cfg),
        "gauge-equivalence" => gauge_equivalence(cfg),
        "continuity" => continuity(cfg),
        _ => return None,
    })
}

/// Aligned residual table.
pub fn table(rows: &[CheckRow]) -> String {
    let w = rows.iter().map(|r| r.suite.len() + r.case.len() + 1).max().unwrap_or(4).max(4);
    let mut s = format!("{:<w$}  {:>10}  {:>9}  status\n", "case", "residual", "tolerance");
    for r in rows {
        let name = format!("{} {}", r.suite, r.case);
        s.push_str(&format!(
            "{name:<w$}  {:>10.3e}  {:>9.0e}  {}\n",
            r.residual,
            r.tolerance,
            if r.pass() { "ok" } else { "FAIL" }
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;

    #[test]
    fn suites_pass_on_small_grid() {
        let cfg = parse_config("grid.n = 64\ngrid.length = 6.283185307179586\nphysics.D = 0.25").unwrap();
        for s in SUITES {
            let rows = run_suite(s, &cfg).unwrap().unwrap();
            assert!(!rows.is_empty());
            assert!(rows.iter().all(CheckRow::pass), "{}", table(&rows));
        }
        assert!(run_suite("nope", &cfg).is_none());
    }
}
