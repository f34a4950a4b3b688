//! Naive wide-integer oracle.
//!
//! Deliberately shares nothing with the engine path beyond the arithmetic
//! definitions: accumulation runs in i128 with bounds-checked virtual
//! padding (no scratch buffer), and requantization rounds through integer
//! division instead of shifts. Slow and obviously correct.

use crate::emu::nl::{NlKind, NlSpec};
use crate::emu::tensor::QTensor;
use crate::error::{Error, Result};
use crate::workload::{LayerShape, OpKind};

/// Divide by 2^s rounding half away from zero, via division.
fn div_round(value: i128, s: u32) -> i128 {
    let d = 1i128 << s;
    let q = (value.abs() + d / 2) / d;
    if value < 0 {
        -q
    } else {
        q
    }
}

fn finish(value: i128, nl: &NlSpec, lane: usize) -> Result<i8> {
    let limit = 1i128 << 47;
    if value >= limit || value < -limit {
        return Err(Error::AccumulatorOverflow { lane, value: value as i64 });
    }
    let shifted = match nl.kind {
        NlKind::Identity => div_round(value, nl.requant_shift),
        NlKind::Relu => {
            if value < 0 {
                0
            } else {
                div_round(value, nl.requant_shift)
            }
        }
        NlKind::LeakyRelu { alpha_shift } => {
            if value < 0 {
                div_round(value, nl.requant_shift + alpha_shift)
            } else {
                div_round(value, nl.requant_shift)
            }
        }
    };
    Ok(if shifted > 127 {
        127
    } else if shifted < -128 {
        -128
    } else {
        shifted as i8
    })
}

/// Standard convolution, nested loops, no tiling.
pub fn reference_conv(
    input: &QTensor,
    weights: &QTensor,
    bias: &[i32],
    layer: &LayerShape,
    nl: &NlSpec,
) -> Result<QTensor> {
    if layer.kind != OpKind::Conv {
        return Err(Error::invalid("reference_conv needs a conv layer"));
    }
    let shape = input.nhwc()?;
    let (n, ih, iw, ic) = shape;
    let (k, s, pad) = (layer.k as usize, layer.s as usize, layer.pad as usize);
    let (oh, ow, oc) = (layer.oh as usize, layer.ow as usize, layer.oc as usize);
    if weights.dims != [k, k, ic, oc] || bias.len() != oc {
        return Err(Error::shape("weight or bias dims do not match the layer"));
    }

    let mut out = vec![0i8; n * oh * ow * oc];
    for ni in 0..n {
        for ohi in 0..oh {
            for owi in 0..ow {
                for o in 0..oc {
                    let mut acc = bias[o] as i128;
                    for kh in 0..k {
                        for kw in 0..k {
                            // Virtual zero padding: taps outside the input
                            // contribute nothing.
                            let hi = (ohi * s + kh) as isize - pad as isize;
                            let wi = (owi * s + kw) as isize - pad as isize;
                            if hi < 0 || wi < 0 || hi >= ih as isize || wi >= iw as isize {
                                continue;
                            }
                            for i in 0..ic {
                                let f = input.at(shape, ni, hi as usize, wi as usize, i) as i128;
                                let w = weights.data[((kh * k + kw) * ic + i) * oc + o] as i128;
                                acc += f * w;
                            }
                        }
                    }
                    out[((ni * oh + ohi) * ow + owi) * oc + o] = finish(acc, nl, o)?;
                }
            }
        }
    }
    QTensor::new(
        vec![n, oh, ow, oc],
        out,
        input.scale_exp + weights.scale_exp + nl.requant_shift as i32,
    )
}

/// Depthwise convolution, one channel at a time.
pub fn reference_dwc(
    input: &QTensor,
    weights: &QTensor,
    bias: &[i32],
    layer: &LayerShape,
    nl: &NlSpec,
) -> Result<QTensor> {
    if layer.kind != OpKind::Dwc {
        return Err(Error::invalid("reference_dwc needs a dwc layer"));
    }
    let shape = input.nhwc()?;
    let (n, ih, iw, c) = shape;
    let (k, s, pad) = (layer.k as usize, layer.s as usize, layer.pad as usize);
    let (oh, ow) = (layer.oh as usize, layer.ow as usize);
    if weights.dims != [k, k, c] || bias.len() != c {
        return Err(Error::shape("weight or bias dims do not match the layer"));
    }

    let mut out = vec![0i8; n * oh * ow * c];
    for ni in 0..n {
        for ci in 0..c {
            for ohi in 0..oh {
                for owi in 0..ow {
                    let mut acc = bias[ci] as i128;
                    for kh in 0..k {
                        for kw in 0..k {
                            let hi = (ohi * s + kh) as isize - pad as isize;
                            let wi = (owi * s + kw) as isize - pad as isize;
                            if hi < 0 || wi < 0 || hi >= ih as isize || wi >= iw as isize {
                                continue;
                            }
                            let f = input.at(shape, ni, hi as usize, wi as usize, ci) as i128;
                            let w = weights.data[(kh * k + kw) * c + ci] as i128;
                            acc += f * w;
                        }
                    }
                    out[((ni * oh + ohi) * ow + owi) * c + ci] = finish(acc, nl, ci)?;
                }
            }
        }
    }
    QTensor::new(vec![n, oh, ow, c], out, input.scale_exp + weights.scale_exp + nl.requant_shift as i32)
}
