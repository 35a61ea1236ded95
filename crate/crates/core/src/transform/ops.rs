//! Periodic sampling and convolution kernels.
//!
//! Convolutions are direct sparse-tap accumulations. Each output row is
//! processed independently (possibly on different threads) and sums its taps
//! in the filter's index order, so results do not depend on scheduling.

use rayon::prelude::*;

use super::signal::Signal;
use crate::error::{Error, Result};
use crate::trigpoly::{MultiIndex, TrigPoly};

/// `y(k) = x(lambda k)`.
pub fn downsample(x: &Signal, lambda: usize) -> Result<Signal> {
    let shape = divided_shape(x.shape(), lambda)?;
    let lam = lambda as i64;
    Signal::from_fn(&shape, |k| {
        let src: Vec<i64> = k.iter().map(|&v| v as i64 * lam).collect();
        x.at(&src)
    })
}

/// `y(lambda k) = x(k)`, zero off the sublattice.
pub fn upsample(x: &Signal, lambda: usize) -> Signal {
    let shape: Vec<usize> = x.shape().iter().map(|s| s * lambda).collect();
    let mut out = Signal::zeros(&shape).expect("scaled shape is valid");
    let mut idx = vec![0usize; x.dim()];
    for &v in x.data() {
        let dst: Vec<i64> = idx.iter().map(|&i| (i * lambda) as i64).collect();
        let off = out.offset(&dst);
        out.data_mut()[off] = v;
        advance(&mut idx, x.shape());
    }
    out
}

/// Coset samples `y(k) = x(lambda k - nu)` (periodically).
pub fn coset_extract(x: &Signal, nu: &MultiIndex, lambda: usize) -> Result<Signal> {
    let shape = divided_shape(x.shape(), lambda)?;
    let lam = lambda as i64;
    let nu = nu.as_slice();
    Signal::from_fn(&shape, |k| {
        let src: Vec<i64> = k.iter().zip(nu).map(|(&v, &n)| v as i64 * lam - n).collect();
        x.at(&src)
    })
}

/// `target(lambda k - nu) += y(k)`.
pub fn coset_add(target: &mut Signal, y: &Signal, nu: &MultiIndex, lambda: usize) -> Result<()> {
    let expect = divided_shape(target.shape(), lambda)?;
    if y.shape() != expect.as_slice() {
        return Err(Error::Shape(format!(
            "coset signal has shape {:?}, expected {expect:?}",
            y.shape()
        )));
    }
    let lam = lambda as i64;
    let mut idx = vec![0usize; y.dim()];
    for &v in y.data() {
        let dst: Vec<i64> = idx
            .iter()
            .zip(nu.as_slice())
            .map(|(&i, &n)| i as i64 * lam - n)
            .collect();
        let off = target.offset(&dst);
        target.data_mut()[off] += v;
        advance(&mut idx, y.shape());
    }
    Ok(())
}

/// Periodic convolution `(f * x)(k) = sum_m f(m) x(k - m)`.
pub fn convolve(f: &TrigPoly, x: &Signal) -> Result<Signal> {
    convolve_counted(f, x, &mut 0)
}

/// [`convolve`], adding `nnz(f) * len(x)` to `mults`.
pub fn convolve_counted(f: &TrigPoly, x: &Signal, mults: &mut u64) -> Result<Signal> {
    if f.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: f.dim(),
        });
    }
    let shape = x.shape();
    let n = shape.len();
    let width = shape[n - 1];
    let taps: Vec<(Vec<usize>, f64)> = f
        .terms()
        .map(|(k, c)| {
            let reduced = k
                .as_slice()
                .iter()
                .zip(shape)
                .map(|(&v, &s)| v.rem_euclid(s as i64) as usize)
                .collect();
            (reduced, c)
        })
        .collect();
    *mults += (taps.len() * x.len()) as u64;

    let outer = &shape[..n - 1];
    let src = x.data();
    let mut out = Signal::zeros(shape)?;
    out.data_mut()
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(row, dst)| {
            let row_idx = unravel(row, outer);
            for (m, c) in &taps {
                let mut src_row = 0usize;
                for (a, &s) in outer.iter().enumerate() {
                    src_row = src_row * s + (row_idx[a] + s - m[a]) % s;
                }
                let base = &src[src_row * width..(src_row + 1) * width];
                let shift = m[n - 1];
                // dst[i] += c * base[(i - shift) mod width]
                for (d, s) in dst[shift..].iter_mut().zip(&base[..width - shift]) {
                    *d += c * s;
                }
                for (d, s) in dst[..shift].iter_mut().zip(&base[width - shift..]) {
                    *d += c * s;
                }
            }
        });
    Ok(out)
}

pub(crate) fn divided_shape(shape: &[usize], lambda: usize) -> Result<Vec<usize>> {
    if lambda == 0 || shape.iter().any(|s| s % lambda != 0) {
        return Err(Error::Shape(format!(
            "every size of {shape:?} must be divisible by {lambda}"
        )));
    }
    Ok(shape.iter().map(|s| s / lambda).collect())
}

fn unravel(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for a in (0..shape.len()).rev() {
        idx[a] = flat % shape[a];
        flat /= shape[a];
    }
    idx
}

fn advance(idx: &mut [usize], shape: &[usize]) {
    for a in (0..shape.len()).rev() {
        idx[a] += 1;
        if idx[a] < shape[a] {
            return;
        }
        idx[a] = 0;
    }
}
