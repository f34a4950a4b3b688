//! MISC core operators: element-wise addition and pooling.

use crate::emu::nl::{round_shift, saturate};
use crate::emu::tensor::QTensor;
use crate::error::{Error, Result};

/// Element-wise INT8 addition with a rounded output shift.
///
/// Both inputs must share a scale exponent (no per-operand rescale in this
/// version); the output scale is that plus `out_shift`.
pub fn eltwise_add(a: &QTensor, b: &QTensor, out_shift: u32) -> Result<QTensor> {
    if a.dims != b.dims {
        return Err(Error::shape(format!("eltwise dims differ: {:?} vs {:?}", a.dims, b.dims)));
    }
    if a.scale_exp != b.scale_exp {
        return Err(Error::invalid(format!(
            "eltwise operands must share a scale, got 2^{} vs 2^{}",
            a.scale_exp, b.scale_exp
        )));
    }
    let data = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| saturate(round_shift(x as i64 + y as i64, out_shift)))
        .collect();
    QTensor::new(a.dims.clone(), data, a.scale_exp + out_shift as i32)
}

fn pool_shape(input: &QTensor, k: usize, s: usize) -> Result<(usize, usize, usize, usize, usize, usize)> {
    let (n, h, w, c) = input.nhwc()?;
    if k == 0 || s == 0 {
        return Err(Error::invalid("pool kernel and stride must be >= 1"));
    }
    if k > h || k > w {
        return Err(Error::shape(format!("pool window {k} larger than input {h}x{w}")));
    }
    Ok((n, h, w, c, (h - k) / s + 1, (w - k) / s + 1))
}

/// Max pooling over k x k windows; scale passes through.
pub fn maxpool(input: &QTensor, k: usize, s: usize) -> Result<QTensor> {
    let (n, _, w, c, oh, ow) = pool_shape(input, k, s)?;
    let shape = input.nhwc()?;
    let _ = w;
    let mut out = vec![0i8; n * oh * ow * c];
    for ni in 0..n {
        for ohi in 0..oh {
            for owi in 0..ow {
                for ci in 0..c {
                    let mut best = i8::MIN;
                    for kh in 0..k {
                        for kw in 0..k {
                            best = best.max(input.at(shape, ni, ohi * s + kh, owi * s + kw, ci));
                        }
                    }
                    out[((ni * oh + ohi) * ow + owi) * c + ci] = best;
                }
            }
        }
    }
    QTensor::new(vec![n, oh, ow, c], out, input.scale_exp)
}

/// Average pooling with round-half-away-from-zero division; scale passes
/// through.
pub fn avgpool(input: &QTensor, k: usize, s: usize) -> Result<QTensor> {
    let (n, _, _, c, oh, ow) = pool_shape(input, k, s)?;
    let shape = input.nhwc()?;
    let window = (k * k) as i64;
    let mut out = vec![0i8; n * oh * ow * c];
    for ni in 0..n {
        for ohi in 0..oh {
            for owi in 0..ow {
                for ci in 0..c {
                    let mut sum = 0i64;
                    for kh in 0..k {
                        for kw in 0..k {
                            sum += input.at(shape, ni, ohi * s + kh, owi * s + kw, ci) as i64;
                        }
                    }
                    // Round half away from zero without a float detour.
                    let q = (2 * sum.abs() + window) / (2 * window);
                    let avg = if sum < 0 { -q } else { q };
                    out[((ni * oh + ohi) * ow + owi) * c + ci] = saturate(avg);
                }
            }
        }
    }
    QTensor::new(vec![n, oh, ow, c], out, input.scale_exp)
}
