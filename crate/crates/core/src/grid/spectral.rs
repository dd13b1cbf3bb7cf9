//! FFT plumbing for periodic grids.
//!
//! Transforms are unnormalised in the forward direction and divide by `n` on
//! the way back, so `inverse(forward(f)) == f` up to rounding.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use super::GridSpec;
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Transform `data` (row-major, `shape`) along one axis in place.
pub(crate) fn fft_axis(data: &mut [C64], shape: &[usize], axis: usize, inverse: bool) {
    let n = shape[axis];
    let fft = plan(n, inverse);
    let scale = if inverse { 1.0 / n as f64 } else { 1.0 };
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();

    if stride == 1 {
        fft.process(data);
        if inverse {
            data.iter_mut().for_each(|z| *z *= scale);
        }
        return;
    }

    let mut line = vec![C64::new(0.0, 0.0); n];
    for o in 0..outer {
        let base = o * n * stride;
        for s in 0..stride {
            for (j, z) in line.iter_mut().enumerate() {
                *z = data[base + j * stride + s];
            }
            fft.process(&mut line);
            for (j, z) in line.iter().enumerate() {
                data[base + j * stride + s] = *z * scale;
            }
        }
    }
}

/// Full multi-dimensional forward transform.
pub fn forward(grid: &GridSpec, field: &[C64]) -> Vec<C64> {
    let mut out = field.to_vec();
    for axis in 0..grid.dim() {
        fft_axis(&mut out, grid.shape(), axis, false);
    }
    out
}

/// Full multi-dimensional inverse transform.
pub fn inverse(grid: &GridSpec, coeffs: &[C64]) -> Vec<C64> {
    let mut out = coeffs.to_vec();
    for axis in 0..grid.dim() {
        fft_axis(&mut out, grid.shape(), axis, true);
    }
    out
}

/// Multiply the spectrum of `field` by `symbol(k)` and transform back.
/// `k` holds the angular wavenumber of each axis (unused axes are zero).
pub fn apply_multiplier<F>(grid: &GridSpec, field: &[C64], symbol: F) -> Vec<C64>
where
    F: Fn([f64; 2]) -> C64,
{
    let mut spec = forward(grid, field);
    let kx = grid.wavenumbers(0);
    if grid.dim() == 1 {
        for (z, &k) in spec.iter_mut().zip(&kx) {
            *z *= symbol([k, 0.0]);
        }
    } else {
        let ky = grid.wavenumbers(1);
        let ny = ky.len();
        for (idx, z) in spec.iter_mut().enumerate() {
            *z *= symbol([kx[idx / ny], ky[idx % ny]]);
        }
    }
    inverse(grid, &spec)
}

/// Spectral derivative of order 1 or 2 along `axis`.
///
/// The Nyquist mode is dropped for first derivatives and kept (as `-k²`) for
/// second derivatives.
pub fn spectral_derivative(
    grid: &GridSpec,
    field: &[C64],
    axis: usize,
    order: u32,
) -> Result<Vec<C64>> {
    if field.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    if axis >= grid.dim() {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} out of range for a {}-dimensional grid",
            grid.dim()
        )));
    }
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    if field.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("spectral_derivative input".into()));
    }
    Ok(derivative_unchecked(grid, field, axis, order))
}

pub(crate) fn derivative_unchecked(grid: &GridSpec, field: &[C64], axis: usize, order: u32) -> Vec<C64> {
    let n = grid.shape()[axis];
    let ks = grid.wavenumbers(axis);
    let symbol: Vec<C64> = ks
        .iter()
        .enumerate()
        .map(|(j, &k)| match order {
            1 if n.is_multiple_of(2) && j == n / 2 => C64::new(0.0, 0.0),
            1 => C64::new(0.0, k),
            _ => C64::new(-k * k, 0.0),
        })
        .collect();

    let mut out = field.to_vec();
    fft_axis(&mut out, grid.shape(), axis, false);
    let stride: usize = grid.shape()[axis + 1..].iter().product();
    for (idx, z) in out.iter_mut().enumerate() {
        *z *= symbol[(idx / stride) % n];
    }
    fft_axis(&mut out, grid.shape(), axis, true);
    if field.iter().all(|z| z.im == 0.0) {
        out.iter_mut().for_each(|z| z.im = 0.0);
    }
    out
}

/// Gradient components, one per axis.
pub(crate) fn gradient(grid: &GridSpec, field: &[C64]) -> Vec<Vec<C64>> {
    (0..grid.dim())
        .map(|a| derivative_unchecked(grid, field, a, 1))
        .collect()
}

/// Sum of second derivatives over all axes.
pub(crate) fn laplacian(grid: &GridSpec, field: &[C64]) -> Vec<C64> {
    let mut out = derivative_unchecked(grid, field, 0, 2);
    for a in 1..grid.dim() {
        let d = derivative_unchecked(grid, field, a, 2);
        out.iter_mut().zip(d).for_each(|(o, v)| *o += v);
    }
    out
}

/// Transform on a bare row-major `shape`, forward or inverse.
pub(crate) fn transform_shape(data: &mut [C64], shape: &[usize], inverse: bool) {
    for axis in 0..shape.len() {
        fft_axis(data, shape, axis, inverse);
    }
}

/// Fine-grid slots of coarse mode `i` out of `n` when the axis is doubled.
/// An even-`n` Nyquist mode is split evenly between `±n/2`.
fn padded_slots(i: usize, n: usize) -> Vec<(usize, f64)> {
    if n.is_multiple_of(2) && i == n / 2 {
        vec![(i, 0.5), (3 * i, 0.5)]
    } else if i < n.div_ceil(2) {
        vec![(i, 1.0)]
    } else {
        vec![(n + i, 1.0)]
    }
}

/// Zero-pad a spectrum to twice the points on every axis. The fine-grid
/// samples at even indices reproduce the coarse samples.
pub(crate) fn zero_pad(coeffs: &[C64], shape: &[usize]) -> (Vec<C64>, Vec<usize>) {
    let fine: Vec<usize> = shape.iter().map(|n| 2 * n).collect();
    let mut out = vec![C64::new(0.0, 0.0); coeffs.len() << shape.len()];
    let gain = (1usize << shape.len()) as f64;
    for (flat, &c) in coeffs.iter().enumerate() {
        let mut rest = flat;
        let mut idx = vec![0; shape.len()];
        for a in (0..shape.len()).rev() {
            idx[a] = rest % shape[a];
            rest /= shape[a];
        }
        let mut targets = vec![(0usize, gain)];
        for (a, &nf) in fine.iter().enumerate() {
            targets = targets
                .iter()
                .flat_map(|&(off, w)| {
                    padded_slots(idx[a], shape[a]).into_iter().map(move |(j, v)| (off * nf + j, w * v))
                })
                .collect();
        }
        for (t, w) in targets {
            out[t] += c * w;
        }
    }
    (out, fine)
}

/// Samples of a fine-grid field at the even indices of every axis.
pub(crate) fn decimate(fine: &[C64], fine_shape: &[usize]) -> Vec<C64> {
    let coarse: Vec<usize> = fine_shape.iter().map(|n| n / 2).collect();
    let total: usize = coarse.iter().product();
    (0..total)
        .map(|flat| {
            let mut rest = flat;
            let mut off = 0;
            let mut stride = 1;
            for a in (0..coarse.len()).rev() {
                off += 2 * (rest % coarse[a]) * stride;
                rest /= coarse[a];
                stride *= fine_shape[a];
            }
            fine[off]
        })
        .collect()
}
