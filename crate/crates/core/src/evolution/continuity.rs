//! Residual of the continuity law `∂ₜρ + ∇·j⁰ - DΔρ = 0` on recorded
//! snapshots.
//!
//! The spatial terms are spectral; `∂ₜρ` is a centred difference between
//! neighbouring records, so the residual of an exact trajectory is
//! `O(h²)` in the recording interval `h`.

use num_complex::Complex64 as C64;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::functionals::LocalFields;
use crate::grid::{l2_norm_real, WaveFunction};
use crate::kinematics::DGParams;

const UNIFORM_TOL: f64 = 1e-9;

/// `(t, r(t))` for every interior record.
pub fn continuity_residual(traj: &Trajectory, params: &DGParams) -> Result<Vec<(f64, f64)>> {
    continuity_residual_snapshots(&traj.snapshots, params)
}

pub fn continuity_residual_snapshots(snaps: &[WaveFunction], params: &DGParams) -> Result<Vec<(f64, f64)>> {
    if snaps.len() < 3 {
        return Err(Error::TooFewSnapshots(snaps.len()));
    }
    let grid = snaps[0].grid();
    if snaps.iter().any(|s| s.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let h = snaps[1].time() - snaps[0].time();
    if !(h > 0.0) {
        return Err(Error::NonUniformRecording);
    }
    for w in snaps.windows(2) {
        let hi = w[1].time() - w[0].time();
        if (hi - h).abs() > UNIFORM_TOL * h.abs().max(w[1].time().abs()) {
            return Err(Error::NonUniformRecording);
        }
    }
    let mut out = Vec::with_capacity(snaps.len() - 2);
    for w in snaps.windows(3) {
        let lf = LocalFields::new(&w[1], params.hbar, params.mass);
        let div = lf.div_jd(params.d);
        let span = w[2].time() - w[0].time();
        let (r0, r2) = (w[0].density(), w[2].density());
        let res: Vec<f64> = (0..div.len()).map(|i| (r2[i] - r0[i]) / span + div[i]).collect();
        out.push((w[1].time(), l2_norm_real(grid, &res)));
    }
    Ok(out)
}

/// Records `ψ₀ e^{-iEt/ħ}` at `t = k·h`, `k = 0..records`.
pub fn stationary_trajectory(psi0: &WaveFunction, energy: f64, hbar: f64, h: f64, records: usize) -> Vec<WaveFunction> {
    (0..records)
        .map(|k| {
            let t = psi0.time() + k as f64 * h;
            let mut s = psi0.scaled(C64::from_polar(1.0, -energy * (t - psi0.time()) / hbar));
            s.set_time(t);
            s
        })
        .collect()
}
