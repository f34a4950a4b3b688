//! Engine-path convolution: the dataflow the hardware runs.
//!
//! Standard convolution walks output pixels in blocks of 8 output
//! channels. For each block, the 64-channel input direction is covered by
//! a cascade chain of four 1x16x8 MAC tiles; kernel positions and further
//! 64-channel slices accumulate on top in the ACC role, which finally adds
//! bias and hands the lanes to the NL role. Depthwise convolution walks
//! 2x8x16 output blocks and accumulates spatial taps per channel.
//!
//! Input tensors are zero padded into a scratch buffer up front, the way
//! the image loader pads frames before streaming them in.

use crate::emu::nl::{check_acc, Accumulator, NlSpec};
use crate::emu::tensor::QTensor;
use crate::error::{Error, Result};
use crate::workload::{LayerShape, OpKind};

/// One MAC intrinsic: 16-channel input vector against a 16x8 weight tile,
/// accumulated on top of `acc`.
pub fn mac_1x16x8(f: &[i8; 16], w: &[[i8; 8]; 16], mut acc: Accumulator) -> Accumulator {
    for i in 0..16 {
        let fv = f[i] as i64;
        for o in 0..8 {
            acc.lanes[o] += fv * w[i][o] as i64;
        }
    }
    acc
}

/// Chained MAC tiles: core c adds its 16-channel slice onto the partial
/// sums cascading in from core c-1.
pub fn cascade_chain(f_tiles: &[[i8; 16]], w_tiles: &[[[i8; 8]; 16]]) -> Result<Accumulator> {
    if f_tiles.is_empty() {
        return Err(Error::shape("cascade chain needs at least one tile"));
    }
    if f_tiles.len() != w_tiles.len() {
        return Err(Error::shape(format!(
            "{} feature tiles vs {} weight tiles",
            f_tiles.len(),
            w_tiles.len()
        )));
    }
    let mut acc = Accumulator::zero();
    for (f, w) in f_tiles.iter().zip(w_tiles) {
        acc = mac_1x16x8(f, w, acc);
    }
    Ok(acc)
}

/// Input channels one cascade chain covers per pass.
const CHAIN_IC: usize = 64;
const TILE_IC: usize = 16;
const OC_BLOCK: usize = 8;

struct Padded {
    data: Vec<i8>,
    h: usize,
    w: usize,
    c: usize,
}

impl Padded {
    fn build(input: &QTensor, shape: (usize, usize, usize, usize), pad: usize) -> Padded {
        let (n, h, w, c) = shape;
        let (ph, pw) = (h + 2 * pad, w + 2 * pad);
        let mut data = vec![0i8; n * ph * pw * c];
        for ni in 0..n {
            for hi in 0..h {
                for wi in 0..w {
                    let dst = ((ni * ph + hi + pad) * pw + wi + pad) * c;
                    let src = ((ni * h + hi) * w + wi) * c;
                    data[dst..dst + c].copy_from_slice(&input.data[src..src + c]);
                }
            }
        }
        Padded { data, h: ph, w: pw, c }
    }

    fn at(&self, n: usize, h: usize, w: usize, c: usize) -> i8 {
        self.data[((n * self.h + h) * self.w + w) * self.c + c]
    }
}

fn check_activation(input: &QTensor, layer: &LayerShape) -> Result<(usize, usize, usize, usize)> {
    let shape = input.nhwc()?;
    let (_, h, w, c) = shape;
    if (h as u64, w as u64, c as u64) != (layer.ih, layer.iw, layer.ic) {
        return Err(Error::shape(format!(
            "{}: input is {h}x{w}x{c}, layer wants {}x{}x{}",
            layer.name, layer.ih, layer.iw, layer.ic
        )));
    }
    Ok(shape)
}

fn out_scale(input: &QTensor, weights: &QTensor, nl: &NlSpec) -> i32 {
    input.scale_exp + weights.scale_exp + nl.requant_shift as i32
}

/// Standard convolution through the tiled MAC/cascade/ACC/NL pipeline.
pub fn conv_forward(
    input: &QTensor,
    weights: &QTensor,
    bias: &[i32],
    layer: &LayerShape,
    nl: &NlSpec,
) -> Result<QTensor> {
    if layer.kind != OpKind::Conv {
        return Err(Error::invalid(format!("conv_forward needs a conv layer, got {}", layer.kind.as_str())));
    }
    let shape = check_activation(input, layer)?;
    let (n, _, _, ic) = shape;
    let (k, s, pad) = (layer.k as usize, layer.s as usize, layer.pad as usize);
    let (oh, ow, oc) = (layer.oh as usize, layer.ow as usize, layer.oc as usize);
    if weights.dims != [k, k, ic, oc] {
        return Err(Error::shape(format!(
            "weights are {:?}, layer wants [{k}, {k}, {ic}, {oc}]",
            weights.dims
        )));
    }
    if bias.len() != oc {
        return Err(Error::shape(format!("bias has {} entries, layer wants {oc}", bias.len())));
    }

    let padded = Padded::build(input, shape, pad);
    let widx = |kh: usize, kw: usize, i: usize, o: usize| ((kh * k + kw) * ic + i) * oc + o;
    let mut out = vec![0i8; n * oh * ow * oc];

    for ni in 0..n {
        for ohi in 0..oh {
            for owi in 0..ow {
                for oc0 in (0..oc).step_by(OC_BLOCK) {
                    let mut acc = Accumulator::zero();
                    for kh in 0..k {
                        for kw in 0..k {
                            let (hi, wi) = (ohi * s + kh, owi * s + kw);
                            for ic0 in (0..ic).step_by(CHAIN_IC) {
                                let chain_ic = CHAIN_IC.min(ic - ic0);
                                let tiles = chain_ic.div_ceil(TILE_IC);
                                let mut f_tiles = vec![[0i8; TILE_IC]; tiles];
                                let mut w_tiles = vec![[[0i8; OC_BLOCK]; TILE_IC]; tiles];
                                for t in 0..tiles {
                                    for j in 0..TILE_IC {
                                        let i = ic0 + t * TILE_IC + j;
                                        if i >= ic {
                                            break;
                                        }
                                        f_tiles[t][j] = padded.at(ni, hi, wi, i);
                                        for (o, slot) in w_tiles[t][j].iter_mut().enumerate() {
                                            if oc0 + o < oc {
                                                *slot = weights.data[widx(kh, kw, i, oc0 + o)];
                                            }
                                        }
                                    }
                                }
                                let part = cascade_chain(&f_tiles, &w_tiles)?;
                                for (lane, sum) in acc.lanes.iter_mut().zip(part.lanes) {
                                    *lane += sum;
                                }
                            }
                        }
                    }
                    for (o, lane) in acc.lanes.iter_mut().enumerate() {
                        if oc0 + o < oc {
                            *lane += bias[oc0 + o] as i64;
                        }
                    }
                    acc.check()?;
                    let base = ((ni * oh + ohi) * ow + owi) * oc;
                    for o in 0..OC_BLOCK.min(oc - oc0) {
                        out[base + oc0 + o] = nl.apply(acc.lanes[o]);
                    }
                }
            }
        }
    }

    QTensor::new(vec![n, oh, ow, oc], out, out_scale(input, weights, nl))
}

/// Depthwise convolution through the MAC-RACNL pipeline: 2x8x16 output
/// blocks, per-channel tap accumulation, then bias/NL per channel.
pub fn dwc_forward(
    input: &QTensor,
    weights: &QTensor,
    bias: &[i32],
    layer: &LayerShape,
    nl: &NlSpec,
) -> Result<QTensor> {
    if layer.kind != OpKind::Dwc {
        return Err(Error::invalid(format!("dwc_forward needs a dwc layer, got {}", layer.kind.as_str())));
    }
    let shape = check_activation(input, layer)?;
    let (n, _, _, c) = shape;
    let (k, s, pad) = (layer.k as usize, layer.s as usize, layer.pad as usize);
    let (oh, ow) = (layer.oh as usize, layer.ow as usize);
    if weights.dims != [k, k, c] {
        return Err(Error::shape(format!("weights are {:?}, layer wants [{k}, {k}, {c}]", weights.dims)));
    }
    if bias.len() != c {
        return Err(Error::shape(format!("bias has {} entries, layer wants {c}", bias.len())));
    }

    let padded = Padded::build(input, shape, pad);
    let mut out = vec![0i8; n * oh * ow * c];

    // Iteration blocks: 2 output rows by 8 pixels by 16 channels. Weight
    // vectors are zero padded to the 16-byte bank width, which only
    // affects layout, not sums, so the block loop is where that shows.
    for ni in 0..n {
        for oh0 in (0..oh).step_by(2) {
            for ow0 in (0..ow).step_by(8) {
                for c0 in (0..c).step_by(16) {
                    for ohi in oh0..oh.min(oh0 + 2) {
                        for owi in ow0..ow.min(ow0 + 8) {
                            for ci in c0..c.min(c0 + 16) {
                                let mut sum = 0i64;
                                for kh in 0..k {
                                    for kw in 0..k {
                                        let f = padded.at(ni, ohi * s + kh, owi * s + kw, ci) as i64;
                                        let w = weights.data[(kh * k + kw) * c + ci] as i64;
                                        sum += f * w;
                                    }
                                }
                                sum += bias[ci] as i64;
                                check_acc(sum, ci - c0)?;
                                out[((ni * oh + ohi) * ow + owi) * c + ci] = nl.apply(sum);
                            }
                        }
                    }
                }
            }
        }
    }

    QTensor::new(vec![n, oh, ow, c], out, out_scale(input, weights, nl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emu::cases::{random_conv_case, random_dwc_case};
    use crate::emu::reference::{reference_conv, reference_dwc};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mac_all_ones() {
        let f = [1i8; 16];
        let w = [[1i8; 8]; 16];
        let acc = mac_1x16x8(&f, &w, Accumulator::zero());
        assert_eq!(acc.lanes, [16; 8]);
    }

    #[test]
    fn mac_extreme_values_fit_the_accumulator() {
        let f = [127i8; 16];
        let w = [[-128i8; 8]; 16];
        let acc = mac_1x16x8(&f, &w, Accumulator::zero());
        assert_eq!(acc.lanes, [-260096; 8]);
        assert!(acc.check().is_ok());
    }

    #[test]
    fn mac_matches_scalar_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let f: [i8; 16] = std::array::from_fn(|_| rng.random());
            let w: [[i8; 8]; 16] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random()));
            let acc = mac_1x16x8(&f, &w, Accumulator::zero());
            for o in 0..8 {
                let want: i64 = (0..16).map(|i| f[i] as i64 * w[i][o] as i64).sum();
                assert_eq!(acc.lanes[o], want);
            }
        }
    }

    #[test]
    fn chain_of_one_equals_single_mac() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f: [i8; 16] = std::array::from_fn(|_| rng.random());
        let w: [[i8; 8]; 16] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random()));
        assert_eq!(cascade_chain(&[f], &[w]).unwrap(), mac_1x16x8(&f, &w, Accumulator::zero()));
    }

    #[test]
    fn chain_of_four_ones() {
        let f = [[1i8; 16]; 4];
        let w = [[[1i8; 8]; 16]; 4];
        assert_eq!(cascade_chain(&f, &w).unwrap().lanes, [64; 8]);
    }

    #[test]
    fn chain_equals_flat_64_channel_dot() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f: Vec<[i8; 16]> = (0..4).map(|_| std::array::from_fn(|_| rng.random())).collect();
        let w: Vec<[[i8; 8]; 16]> =
            (0..4).map(|_| std::array::from_fn(|_| std::array::from_fn(|_| rng.random()))).collect();
        let acc = cascade_chain(&f, &w).unwrap();
        for o in 0..8 {
            let want: i64 =
                (0..64).map(|i| f[i / 16][i % 16] as i64 * w[i / 16][i % 16][o] as i64).sum();
            assert_eq!(acc.lanes[o], want);
        }
    }

    #[test]
    fn chain_shape_errors() {
        assert!(cascade_chain(&[], &[]).is_err());
        let f = [[0i8; 16]; 2];
        let w = [[[0i8; 8]; 16]; 3];
        assert!(cascade_chain(&f, &w).is_err());
    }

    #[test]
    fn identity_weights_pass_input_through() {
        let layer = LayerShape::new("id", OpKind::Conv, 3, 3, 8, 8, 1, 1, 0).unwrap();
        let data: Vec<i8> = (0..72).map(|v| v - 36).collect();
        let input = QTensor::new(vec![3, 3, 8], data.clone(), -1).unwrap();
        let mut wdata = vec![0i8; 64];
        for i in 0..8 {
            wdata[i * 8 + i] = 1;
        }
        let weights = QTensor::new(vec![1, 1, 8, 8], wdata, 0).unwrap();
        let out = conv_forward(&input, &weights, &[0; 8], &layer, &NlSpec::identity(0)).unwrap();
        assert_eq!(out.data, data);
        assert_eq!(out.scale_exp, -1);
        assert_eq!(out.dims, vec![1, 3, 3, 8]);
    }

    #[test]
    fn zero_input_broadcasts_requantized_bias() {
        let layer = LayerShape::new("b", OpKind::Conv, 4, 4, 3, 10, 3, 1, 1).unwrap();
        let input = QTensor::zeros(vec![4, 4, 3], 0).unwrap();
        let weights = QTensor::new(vec![3, 3, 3, 10], vec![7; 270], 0).unwrap();
        let bias: Vec<i32> = (0..10).map(|o| o * 100 - 500).collect();
        let nl = NlSpec::identity(2);
        let out = conv_forward(&input, &weights, &bias, &layer, &nl).unwrap();
        for ohi in 0..4 {
            for owi in 0..4 {
                for o in 0..10 {
                    let got = out.data[(ohi * 4 + owi) * 10 + o];
                    assert_eq!(got, nl.apply(bias[o] as i64));
                }
            }
        }
    }

    #[test]
    fn dwc_unit_weights_copy_channels() {
        let layer = LayerShape::new("u", OpKind::Dwc, 5, 6, 12, 12, 1, 1, 0).unwrap();
        let data: Vec<i8> = (0..360).map(|v| (v % 251 - 125) as i8).collect();
        let input = QTensor::new(vec![5, 6, 12], data.clone(), -2).unwrap();
        let weights = QTensor::new(vec![1, 1, 12], vec![1; 12], 0).unwrap();
        let out = dwc_forward(&input, &weights, &[0; 12], &layer, &NlSpec::identity(0)).unwrap();
        assert_eq!(out.data, data);
    }

    #[test]
    fn dwc_delta_kernel_selects_the_interior() {
        let layer = LayerShape::new("d", OpKind::Dwc, 6, 7, 4, 4, 3, 1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let data: Vec<i8> = (0..6 * 7 * 4).map(|_| rng.random()).collect();
        let input = QTensor::new(vec![6, 7, 4], data, 0).unwrap();
        let mut wdata = vec![0i8; 9 * 4];
        for ci in 0..4 {
            wdata[4 * 4 + ci] = 1; // center tap
        }
        let weights = QTensor::new(vec![3, 3, 4], wdata, 0).unwrap();
        let out = dwc_forward(&input, &weights, &[0; 4], &layer, &NlSpec::identity(0)).unwrap();
        let shape = input.nhwc().unwrap();
        let oshape = out.nhwc().unwrap();
        for ohi in 0..4 {
            for owi in 0..5 {
                for ci in 0..4 {
                    assert_eq!(out.at(oshape, 0, ohi, owi, ci), input.at(shape, 0, ohi + 1, owi + 1, ci));
                }
            }
        }
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let layer = LayerShape::new("m", OpKind::Conv, 4, 4, 3, 5, 1, 1, 0).unwrap();
        let input = QTensor::zeros(vec![4, 4, 2], 0).unwrap();
        let weights = QTensor::zeros(vec![1, 1, 3, 5], 0).unwrap();
        assert!(conv_forward(&input, &weights, &[0; 5], &layer, &NlSpec::identity(0)).is_err());
        let input = QTensor::zeros(vec![4, 4, 3], 0).unwrap();
        let bad_w = QTensor::zeros(vec![1, 1, 3, 4], 0).unwrap();
        assert!(conv_forward(&input, &bad_w, &[0; 5], &layer, &NlSpec::identity(0)).is_err());
        assert!(conv_forward(&input, &weights, &[0; 4], &layer, &NlSpec::identity(0)).is_err());
        let dwc = LayerShape::new("dw", OpKind::Dwc, 4, 4, 3, 3, 3, 1, 1).unwrap();
        assert!(conv_forward(&input, &weights, &[0; 5], &dwc, &NlSpec::identity(0)).is_err());
    }

    /// Same conv, no tiling: one flat accumulation per output channel.
    fn conv_per_oc_flat(
        input: &QTensor,
        weights: &QTensor,
        bias: &[i32],
        layer: &LayerShape,
        nl: &NlSpec,
    ) -> QTensor {
        let shape = input.nhwc().unwrap();
        let (n, _, _, ic) = shape;
        let (k, s, pad) = (layer.k as usize, layer.s as usize, layer.pad as usize);
        let (oh, ow, oc) = (layer.oh as usize, layer.ow as usize, layer.oc as usize);
        let padded = Padded::build(input, shape, pad);
        let mut out = vec![0i8; n * oh * ow * oc];
        for ni in 0..n {
            for ohi in 0..oh {
                for owi in 0..ow {
                    for o in 0..oc {
                        let mut sum = bias[o] as i64;
                        for kh in 0..k {
                            for kw in 0..k {
                                for i in 0..ic {
                                    let f = padded.at(ni, ohi * s + kh, owi * s + kw, i) as i64;
                                    let w = weights.data[((kh * k + kw) * ic + i) * oc + o] as i64;
                                    sum += f * w;
                                }
                            }
                        }
                        out[((ni * oh + ohi) * ow + owi) * oc + o] = nl.apply(sum);
                    }
                }
            }
        }
        QTensor::new(vec![n, oh, ow, oc], out, out_scale(input, weights, nl)).unwrap()
    }

    #[test]
    fn tiling_matches_flat_per_channel_accumulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let case = random_conv_case(&mut rng);
            let tiled = conv_forward(&case.input, &case.weights, &case.bias, &case.layer, &case.nl).unwrap();
            let flat = conv_per_oc_flat(&case.input, &case.weights, &case.bias, &case.layer, &case.nl);
            assert_eq!(tiled, flat, "layer {:?}", case.layer);
        }
    }

    #[test]
    fn engine_matches_oracle_on_sampled_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..10 {
            let case = random_conv_case(&mut rng);
            let got = conv_forward(&case.input, &case.weights, &case.bias, &case.layer, &case.nl).unwrap();
            let want = reference_conv(&case.input, &case.weights, &case.bias, &case.layer, &case.nl).unwrap();
            assert_eq!(got, want, "layer {:?}", case.layer);
        }
        for _ in 0..10 {
            let case = random_dwc_case(&mut rng);
            let got = dwc_forward(&case.input, &case.weights, &case.bias, &case.layer, &case.nl).unwrap();
            let want = reference_dwc(&case.input, &case.weights, &case.bias, &case.layer, &case.nl).unwrap();
            assert_eq!(got, want, "layer {:?}", case.layer);
        }
    }
}
