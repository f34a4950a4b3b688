//! Convolution PE model: MAC core tile, ACC/NL buffer sizing and banking,
//! graph-level iteration granularity, and per-layer cycle estimation.
//!
//! One MAC core covers a 4(IH) x 16(IC) x 32(OC) tile in 16 cycles, one
//! 1x16x8 GEMM step per cycle. At the graph level 32 MAC cores cover
//! 8(IH) x 64(IC) x 128(OC) per iteration: weights broadcast to 2 cores,
//! feature maps to 4, and chains of 4 cores accumulate the IC dimension
//! over the cascade stream. Each chain ends in an ACC core (partial sum
//! and kernel-level accumulation, bias) and an NL core (activation and
//! requantization), 8 chains per PE: 32 + 8 + 8 = 48 cores.

use serde::Serialize;

use crate::arch::{BANK_BYTES, CORES_PER_PE, LOCAL_MEM_BYTES, MACS_PER_CORE_CYCLE, MEM_BANKS};
use crate::dse::BandwidthSplit;
use crate::error::{Error, Result};
use crate::estimate::CycleEstimate;
use crate::workload::{LayerShape, OpKind};
use crate::{frac, Frac};

/// Work one MAC core covers per inner iteration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MacCoreTile {
    pub ih: u64,
    pub ic: u64,
    pub oc: u64,
    pub cycles: u64,
}

/// The 16-cycle core tile: 4 pixels x 16 IC x 32 OC.
pub const CORE_TILE: MacCoreTile = MacCoreTile { ih: 4, ic: 16, oc: 32, cycles: 16 };

/// Work one PE covers per graph iteration, and how the 32 MAC cores
/// share it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GraphGranularity {
    pub ih: u64,
    pub ic: u64,
    pub oc: u64,
    /// Cores sharing one weight stream.
    pub wt_broadcast: u64,
    /// Cores sharing one feature map stream.
    pub fm_broadcast: u64,
    /// Cores chained over the cascade stream (IC accumulation).
    pub cascade_len: u64,
    pub mac_cores: u64,
}

pub const GRANULARITY: GraphGranularity = GraphGranularity {
    ih: 8,
    ic: 64,
    oc: 128,
    wt_broadcast: 2,
    fm_broadcast: 4,
    cascade_len: 4,
    mac_cores: 32,
};

/// Cascade chains per PE; each ends in one ACC and one NL core.
pub const CHAINS_PER_PE: u64 = GRANULARITY.mac_cores / GRANULARITY.cascade_len;

/// Pixels one 256-cycle group covers: the 8-pixel graph iteration swept
/// over a 16-wide tile column.
pub const GROUP_PIXELS: u64 = 128;
/// Cycles per group: 16 graph iterations of 16 cycles.
pub const GROUP_CYCLES: u64 = 256;
/// Feature map bits per group: 128 pixels x 64 IC x 8 bit.
pub const GROUP_FM_BITS: u64 = GROUP_PIXELS * GRANULARITY.ic * 8;
/// Weight bits per group: 64 IC x 128 OC x 8 bit.
pub const GROUP_WT_BITS: u64 = GRANULARITY.ic * GRANULARITY.oc * 8;
/// Distinct feature map streams into one PE (32 cores / broadcast 4).
pub const FM_STREAMS: u64 = GRANULARITY.mac_cores / GRANULARITY.fm_broadcast;
/// Distinct weight streams into one PE (32 cores / broadcast 2).
pub const WT_STREAMS: u64 = GRANULARITY.mac_cores / GRANULARITY.wt_broadcast;
/// Bias streams into one PE.
pub const BIAS_STREAMS: u64 = 2;
/// Total PL to AIE streams one conv PE occupies.
pub const PE_IN_STREAMS: u64 = FM_STREAMS + WT_STREAMS + BIAS_STREAMS;
/// AIE to PL output channels one conv PE occupies (one per chain).
pub const PE_OUT_CHANNELS: u64 = CHAINS_PER_PE;

/// No buffer role may exceed half a core's 32 KB memory, leaving room for
/// its ping-pong partner and neighbors.
pub const ROLE_CAP_BYTES: u64 = LOCAL_MEM_BYTES / 2;
/// Pooled budget of one ACC/NL pair: two local memories.
pub const PAIR_BYTES: u64 = 2 * LOCAL_MEM_BYTES;
/// Pooled banks of one ACC/NL pair.
pub const PAIR_BANKS: u64 = 2 * MEM_BANKS;
/// Nominal banks per buffer; exceeding it risks access conflicts.
pub const BANKS_PER_BUFFER: u64 = 2;

/// Buffer sizing for one ACC/NL pair serving 32 output channels at a
/// given tile. Partial sums and accumulated outputs hold 4 bytes per
/// channel per pixel; the NL output is 1 byte per channel per pixel.
#[derive(Debug, Clone, Serialize)]
pub struct BufferPlan {
    pub ih: u64,
    pub iw: u64,
    pub psum_stack: u64,
    pub acc_out: u64,
    pub bias: u64,
    pub nl_out: u64,
    /// psum + double-buffered acc/bias/nl.
    pub total_bytes: u64,
    pub banks_per_buffer: u64,
    pub banks_total: u64,
    pub feasible: bool,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

fn banks_for(bytes: u64) -> u64 {
    bytes.div_ceil(BANK_BYTES)
}

/// Sizes the ACC/NL pair buffers for an (ih, iw) tile and checks them
/// against the role cap, the pooled byte budget, and the bank budget.
/// Infeasibility is reported in the plan, never as an error.
pub fn buffer_plan(ih: u64, iw: u64) -> BufferPlan {
    assert!(ih >= 1 && iw >= 1, "tile dimensions must be >= 1");
    let pixels = ih * iw;
    let psum_stack = pixels * CORE_TILE.oc * 4;
    let acc_out = psum_stack;
    let bias = CORE_TILE.oc * 4;
    let nl_out = pixels * CORE_TILE.oc;
    let total_bytes = psum_stack + 2 * (acc_out + bias + nl_out);
    let banks_total =
        banks_for(psum_stack) + 2 * (banks_for(acc_out) + banks_for(bias) + banks_for(nl_out));

    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    for (name, size) in [
        ("psum_stack", psum_stack),
        ("acc_out", acc_out),
        ("bias", bias),
        ("nl_out", nl_out),
    ] {
        if size > ROLE_CAP_BYTES {
            violations.push(format!("{name} is {size} B, above the {ROLE_CAP_BYTES} B role cap"));
        }
        if banks_for(size) > BANKS_PER_BUFFER {
            warnings.push(format!(
                "{name} spans {} banks, above the nominal {BANKS_PER_BUFFER}; bank conflicts possible",
                banks_for(size)
            ));
        }
    }
    if total_bytes > PAIR_BYTES {
        violations.push(format!(
            "buffers total {total_bytes} B, above the {PAIR_BYTES} B ACC/NL pair budget"
        ));
    }
    if banks_total > PAIR_BANKS {
        violations.push(format!("buffers need {banks_total} banks, pair has {PAIR_BANKS}"));
    }

    BufferPlan {
        ih,
        iw,
        psum_stack,
        acc_out,
        bias,
        nl_out,
        total_bytes,
        banks_per_buffer: BANKS_PER_BUFFER,
        banks_total,
        feasible: violations.is_empty(),
        violations,
        warnings,
    }
}

/// Largest tile width whose partial sum stack fits the role cap.
pub fn max_iw(ih: u64) -> u64 {
    assert!(ih >= 1);
    ROLE_CAP_BYTES / (ih * CORE_TILE.oc * 4)
}

/// A tile choice realizing (as much as possible of) a reuse scheme.
#[derive(Debug, Clone, Serialize)]
pub struct TilePlan {
    pub ih: u64,
    pub iw: u64,
    pub warnings: Vec<String>,
}

/// Picks the feature map tile for a reuse scheme: height fixed at the
/// core tile's 4 pixels, width as wide as the scheme wants and the
/// buffers allow.
pub fn choose_tile(scheme: &crate::dse::ParallelismScheme) -> TilePlan {
    let ih = CORE_TILE.ih;
    let mut warnings = Vec::new();
    let want = scheme.pixels_required.div_ceil(ih);
    if scheme.pixels_required % ih != 0 {
        warnings.push(format!(
            "pixel target {} is not a multiple of tile height {ih}; rounding up",
            scheme.pixels_required
        ));
    }
    let cap = max_iw(ih);
    let iw = want.clamp(1, cap);
    if want > cap {
        warnings.push(format!(
            "reuse target needs iw={want} but buffers cap iw at {cap}; reuse is not fully realized"
        ));
    }
    TilePlan { ih, iw, warnings }
}

/// Per-layer estimate for one conv PE.
#[derive(Debug, Clone, Serialize)]
pub struct ConvLayerEstimate {
    /// 256-cycle work groups: pixel groups x kernel positions x channel slabs.
    pub groups: u64,
    pub cycles: CycleEstimate,
    /// Useful MACs over MAC-cycle capacity, exact.
    pub utilization: Frac,
}

/// Cycle and utilization estimate for a standard convolution layer on one
/// PE. Work is padded to the hardware's fixed vector shapes: pixels to
/// 128-pixel groups, IC to 64-channel slabs, OC to 128-channel slabs;
/// kernel positions accumulate sequentially in the ACC core. Streams are
/// modeled per group: 8 feature map streams and 16 weight streams at the
/// split's per-stream widths.
pub fn layer_cycles(layer: &LayerShape, split: BandwidthSplit) -> Result<ConvLayerEstimate> {
    if layer.kind != OpKind::Conv {
        return Err(Error::invalid(format!(
            "layer_cycles models conv layers, got {} '{}'",
            layer.kind.as_str(),
            layer.name
        )));
    }
    let pixel_groups = (layer.oh * layer.ow).div_ceil(GROUP_PIXELS);
    let ic_slabs = layer.ic.div_ceil(GRANULARITY.ic);
    let oc_slabs = layer.oc.div_ceil(GRANULARITY.oc);
    let groups = pixel_groups * layer.k * layer.k * ic_slabs * oc_slabs;

    let compute = groups * GROUP_CYCLES;
    let fm_load = groups * GROUP_FM_BITS.div_ceil(FM_STREAMS * split.bw_f);
    let wt_load = groups * GROUP_WT_BITS.div_ceil(WT_STREAMS * split.bw_w);
    let cycles = CycleEstimate::from_parts(compute, fm_load, wt_load, 0);

    let capacity = compute as u128 * (GRANULARITY.mac_cores * MACS_PER_CORE_CYCLE) as u128;
    Ok(ConvLayerEstimate {
        groups,
        cycles,
        utilization: frac(layer.macs() as u128, capacity),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dse::{min_balanced_scheme, ParallelismScheme, SELECTED_SPLIT};

    fn conv(name: &str, ih: u64, iw: u64, ic: u64, oc: u64, k: u64, s: u64, pad: u64) -> LayerShape {
        LayerShape::new(name, OpKind::Conv, ih, iw, ic, oc, k, s, pad).unwrap()
    }

    #[test]
    fn core_tile_cycle_identity() {
        let t = CORE_TILE;
        assert_eq!(t.ih * (t.ic / 16) * (t.oc / 8), t.cycles);
        assert_eq!(t.ih * t.ic * t.oc / t.cycles, MACS_PER_CORE_CYCLE);
    }

    #[test]
    fn granularity_identities() {
        let g = GRANULARITY;
        assert_eq!(g.ih, CORE_TILE.ih * g.wt_broadcast);
        assert_eq!(g.oc, CORE_TILE.oc * g.fm_broadcast);
        assert_eq!(g.ic, CORE_TILE.ic * g.cascade_len);
        assert_eq!(g.mac_cores, g.wt_broadcast * g.fm_broadcast * g.cascade_len);
        // 32 MAC cores plus an ACC and an NL core per chain fill the PE.
        assert_eq!(g.mac_cores + 2 * CHAINS_PER_PE, CORES_PER_PE);
    }

    #[test]
    fn group_streams_balance_at_selected_split() {
        assert_eq!(GROUP_FM_BITS.div_ceil(FM_STREAMS * SELECTED_SPLIT.bw_f), GROUP_CYCLES);
        assert_eq!(GROUP_WT_BITS.div_ceil(WT_STREAMS * SELECTED_SPLIT.bw_w), GROUP_CYCLES);
    }

    #[test]
    fn buffer_plan_anchor_tiles() {
        let p = buffer_plan(4, 16);
        assert!(p.feasible, "{:?}", p.violations);
        assert_eq!(p.psum_stack, 8192);
        assert_eq!(p.nl_out, 2048);
        assert_eq!(p.bias, 128);
        assert_eq!(p.banks_total, 10);
        assert!(p.warnings.is_empty());

        let p = buffer_plan(1, 1);
        assert!(p.feasible);
        assert_eq!(p.psum_stack, 128);

        let p = buffer_plan(4, 40);
        assert!(!p.feasible);
        assert_eq!(p.acc_out, 20480);
        assert!(p.violations.iter().any(|v| v.contains("acc_out")));
    }

    #[test]
    fn widest_tile_hits_every_budget_exactly() {
        let p = buffer_plan(4, 32);
        assert!(p.feasible, "{:?}", p.violations);
        assert_eq!(p.psum_stack, ROLE_CAP_BYTES);
        assert_eq!(p.banks_total, PAIR_BANKS);
        // 4-bank psum and acc buffers exceed the nominal 2-bank layout.
        assert_eq!(p.warnings.len(), 2);
    }

    #[test]
    fn feasibility_boundary_sweep() {
        for iw in 1..=32 {
            assert!(buffer_plan(4, iw).feasible, "iw={iw}");
        }
        for iw in 33..=64 {
            assert!(!buffer_plan(4, iw).feasible, "iw={iw}");
        }
    }

    #[test]
    fn max_iw_anchors() {
        assert_eq!(max_iw(4), 32);
        assert_eq!(max_iw(1), 128);
        assert_eq!(max_iw(128), 1);
    }

    #[test]
    fn choose_tile_follows_the_scheme() {
        let t = choose_tile(&min_balanced_scheme(SELECTED_SPLIT));
        assert_eq!((t.ih, t.iw), (4, 16));
        assert!(t.warnings.is_empty());

        let small = ParallelismScheme::evaluate(32, 4, SELECTED_SPLIT);
        let t = choose_tile(&small);
        assert_eq!((t.ih, t.iw), (4, 1));

        let large = ParallelismScheme::evaluate(1, 256, SELECTED_SPLIT);
        let t = choose_tile(&large);
        assert_eq!((t.ih, t.iw), (4, 32));
        assert_eq!(t.warnings.len(), 1);

        let odd = ParallelismScheme::evaluate(1, 10, SELECTED_SPLIT);
        let t = choose_tile(&odd);
        assert_eq!((t.ih, t.iw), (4, 3));
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn exact_fit_layer_reaches_full_utilization() {
        let l = conv("fit", 32, 32, 64, 128, 1, 1, 0);
        let e = layer_cycles(&l, SELECTED_SPLIT).unwrap();
        assert_eq!(e.groups, 8);
        assert_eq!(e.cycles.compute, 2048);
        assert_eq!(e.utilization, frac(1, 1));
        // Perfectly balanced streams tie with compute.
        assert_eq!(e.cycles.total, 2048);
        assert_eq!(e.cycles.bound, crate::estimate::Bound::Compute);
    }

    #[test]
    fn thin_channels_waste_the_vector_width() {
        let l = conv("thin", 32, 32, 3, 64, 1, 1, 0);
        let e = layer_cycles(&l, SELECTED_SPLIT).unwrap();
        assert_eq!(e.utilization, frac(3, 128));
    }

    #[test]
    fn first_layer_shape_utilization() {
        let l = conv("conv1", 224, 224, 3, 64, 7, 2, 3);
        assert_eq!((l.oh, l.ow), (112, 112));
        let e = layer_cycles(&l, SELECTED_SPLIT).unwrap();
        assert_eq!(e.groups, 98 * 49);
        assert_eq!(e.cycles.compute, 98 * 49 * 256);
        assert_eq!(e.utilization, frac(3, 128));
        assert!(e.utilization < frac(1, 5));
    }

    #[test]
    fn utilization_is_one_exactly_on_divisible_shapes() {
        for (pix, ic, oc) in [(128, 64, 128), (256, 128, 256), (384, 64, 128)] {
            let l = conv("d", pix / 8, 8, ic, oc, 1, 1, 0);
            let e = layer_cycles(&l, SELECTED_SPLIT).unwrap();
            assert_eq!(e.utilization, frac(1, 1), "{pix} {ic} {oc}");
        }
        for (ih, iw, ic, oc, k) in [(7, 7, 512, 2048, 1), (14, 14, 256, 256, 3), (5, 5, 64, 128, 1)] {
            let l = conv("nd", ih, iw, ic, oc, k, 1, k / 2);
            let e = layer_cycles(&l, SELECTED_SPLIT).unwrap();
            assert!(e.utilization > frac(0, 1) && e.utilization <= frac(1, 1));
        }
    }

    #[test]
    fn starved_fm_stream_moves_the_bound() {
        let l = conv("fit", 32, 32, 64, 128, 1, 1, 0);
        let e = layer_cycles(&l, BandwidthSplit { bw_f: 16, bw_w: 16 }).unwrap();
        assert_eq!(e.cycles.bound, crate::estimate::Bound::FmLoad);
        assert!(e.cycles.fm_load > e.cycles.compute);
    }

    #[test]
    fn non_conv_layers_are_rejected() {
        let l = LayerShape::new("p", OpKind::Pool, 8, 8, 16, 16, 2, 2, 0).unwrap();
        assert!(layer_cycles(&l, SELECTED_SPLIT).is_err());
    }
}
