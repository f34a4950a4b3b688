//! Randomized test case generation for the emulator.
//!
//! Cases are drawn small enough that a debug-build equivalence run over
//! hundreds of them finishes in seconds: shapes resample until the padded
//! work (what the tiled engine actually executes, channel dims rounded up
//! to tile sizes) is under a fixed budget. Shapes still hit the
//! interesting tails: channel counts off the tile boundaries, stride 2,
//! padding, every supported kernel.

use rand::Rng;

use crate::emu::nl::NlSpec;
use crate::emu::tensor::QTensor;
use crate::workload::{LayerShape, OpKind};

/// Upper bound on padded MACs per generated case.
pub const CASE_WORK_BUDGET: u64 = 300_000;

/// One self-contained forward case; `weights` is KKIO for conv layers and
/// KKC for dwc layers.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvCase {
    pub input: QTensor,
    pub weights: QTensor,
    pub bias: Vec<i32>,
    pub layer: LayerShape,
    pub nl: NlSpec,
}

/// MACs the tiled engine executes for a conv layer, zero padding included.
fn padded_conv_work(layer: &LayerShape) -> u64 {
    layer.oh * layer.ow * layer.k * layer.k * layer.ic.div_ceil(16) * 16 * layer.oc.div_ceil(8) * 8
}

fn padded_dwc_work(layer: &LayerShape) -> u64 {
    layer.oh * layer.ow * layer.k * layer.k * layer.ic.div_ceil(16) * 16
}

fn random_nl(rng: &mut impl Rng) -> NlSpec {
    let shift = rng.random_range(0..=7);
    match rng.random_range(0..3) {
        0 => NlSpec::identity(shift),
        1 => NlSpec::relu(shift),
        _ => NlSpec::leaky(shift, rng.random_range(1..=3)),
    }
}

fn fill(rng: &mut impl Rng, len: usize) -> Vec<i8> {
    (0..len).map(|_| rng.random()).collect()
}

fn random_bias(rng: &mut impl Rng, len: usize) -> Vec<i32> {
    (0..len).map(|_| rng.random_range(-(1 << 15)..1 << 15)).collect()
}

/// Draws a standard convolution case under the work budget.
pub fn random_conv_case(rng: &mut impl Rng) -> ConvCase {
    let layer = loop {
        let k = if rng.random_bool(0.5) { 1 } else { 3 };
        let candidate = LayerShape::new(
            "case",
            OpKind::Conv,
            rng.random_range(1..=16),
            rng.random_range(1..=16),
            rng.random_range(1..=96),
            rng.random_range(1..=160),
            k,
            rng.random_range(1..=2),
            rng.random_range(0..=k / 2),
        );
        match candidate {
            Ok(l) if padded_conv_work(&l) <= CASE_WORK_BUDGET => break l,
            _ => continue,
        }
    };
    let (ih, iw, ic, oc, k) =
        (layer.ih as usize, layer.iw as usize, layer.ic as usize, layer.oc as usize, layer.k as usize);
    ConvCase {
        input: QTensor::new(vec![ih, iw, ic], fill(rng, ih * iw * ic), rng.random_range(-8..=0)).unwrap(),
        weights: QTensor::new(vec![k, k, ic, oc], fill(rng, k * k * ic * oc), rng.random_range(-8..=0))
            .unwrap(),
        bias: random_bias(rng, oc),
        nl: random_nl(rng),
        layer,
    }
}

/// Draws a depthwise case under the work budget.
pub fn random_dwc_case(rng: &mut impl Rng) -> ConvCase {
    let layer = loop {
        let k = [1, 3, 5, 7][rng.random_range(0..4)];
        let c = rng.random_range(1..=64);
        let candidate = LayerShape::new(
            "case",
            OpKind::Dwc,
            rng.random_range(1..=20),
            rng.random_range(1..=20),
            c,
            c,
            k,
            rng.random_range(1..=2),
            rng.random_range(0..=k / 2),
        );
        match candidate {
            Ok(l) if padded_dwc_work(&l) <= CASE_WORK_BUDGET => break l,
            _ => continue,
        }
    };
    let (ih, iw, c, k) = (layer.ih as usize, layer.iw as usize, layer.ic as usize, layer.k as usize);
    ConvCase {
        input: QTensor::new(vec![ih, iw, c], fill(rng, ih * iw * c), rng.random_range(-8..=0)).unwrap(),
        weights: QTensor::new(vec![k, k, c], fill(rng, k * k * c), rng.random_range(-8..=0)).unwrap(),
        bias: random_bias(rng, c),
        nl: random_nl(rng),
        layer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = random_conv_case(&mut ChaCha8Rng::seed_from_u64(42));
        let b = random_conv_case(&mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
        let c = random_conv_case(&mut ChaCha8Rng::seed_from_u64(43));
        assert_ne!(a, c);
    }

    #[test]
    fn cases_respect_the_work_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let conv = random_conv_case(&mut rng);
            assert!(padded_conv_work(&conv.layer) <= CASE_WORK_BUDGET);
            assert_eq!(conv.layer.kind, OpKind::Conv);
            let dwc = random_dwc_case(&mut rng);
            assert!(padded_dwc_work(&dwc.layer) <= CASE_WORK_BUDGET);
            assert_eq!(dwc.layer.kind, OpKind::Dwc);
            assert_eq!(dwc.layer.ic, dwc.layer.oc);
        }
    }

    #[test]
    fn cases_cover_strides_kernels_and_ragged_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cases: Vec<ConvCase> = (0..80).map(|_| random_conv_case(&mut rng)).collect();
        assert!(cases.iter().any(|c| c.layer.s == 2));
        assert!(cases.iter().any(|c| c.layer.k == 3 && c.layer.pad == 1));
        assert!(cases.iter().any(|c| c.layer.ic % 16 != 0));
        assert!(cases.iter().any(|c| c.layer.oc % 8 != 0));
        let dwcs: Vec<ConvCase> = (0..80).map(|_| random_dwc_case(&mut rng)).collect();
        for k in [1u64, 3, 5, 7] {
            assert!(dwcs.iter().any(|c| c.layer.k == k), "no dwc case with k={k}");
        }
    }
}
