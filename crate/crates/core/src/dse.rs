//! Stream bandwidth vs. data reuse balance for one MAC core.
//!
//! One AIE core retires a 1x16x8 INT8 GEMM step per cycle, which consumes
//! 128 bits of feature map pixels and 1024 bits of weights. An interface
//! tile sustains only 192 input bits per cycle shared among many cores, so
//! the streams cannot feed the MACs directly; the loads must be amortized
//! by reuse. Keep a feature map tile resident and apply `fm_reuse` weight
//! blocks to it; keep each weight block resident and apply it to
//! `wt_reuse` pixels. With double buffering the next tile's loads run
//! under the current tile's `t_mac = fm_reuse * wt_reuse` compute cycles,
//! so a scheme is balanced when both load times fit under t_mac.
//!
//! Reuse is not free. A weight block covers 8 output channels, so a layer
//! only realizes the scheme when `oc >= 8 * fm_reuse`, and the resident
//! tile must hold `wt_reuse` pixels, so `ih * iw >= wt_reuse`. The sweep
//! here makes that trade visible so a bandwidth split can be chosen.

use serde::Serialize;

use crate::{frac, Frac};

/// Feature map bits consumed per MAC step: 16 channels of INT8.
pub const FM_BITS_PER_STEP: u64 = 128;
/// Weight bits consumed per MAC step: 16 IC x 8 OC of INT8.
pub const WT_BITS_PER_STEP: u64 = 1024;
/// Output channels covered by one weight block.
pub const OC_PER_WT_BLOCK: u64 = 8;
/// Input stream budget per core in bits per cycle; splits beyond this are
/// flagged, not rejected, since graph-level broadcast relaxes the limit.
pub const CORE_INPUT_BUDGET_BITS: u64 = 192;

/// The split the shipped design uses: 32-bit feature map stream and
/// 16-bit weight stream per core.
pub const SELECTED_SPLIT: BandwidthSplit = BandwidthSplit { bw_f: 32, bw_w: 16 };

/// Per-core stream bandwidth allocation in bits per cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BandwidthSplit {
    /// Feature map stream bits per cycle.
    pub bw_f: u64,
    /// Weight stream bits per cycle.
    pub bw_w: u64,
}

impl BandwidthSplit {
    /// Non-fatal observations about the split, currently only the
    /// per-core input budget.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.bw_f + self.bw_w > CORE_INPUT_BUDGET_BITS {
            out.push(format!(
                "split uses {} bits/cycle, above the {}-bit per-core input budget",
                self.bw_f + self.bw_w,
                CORE_INPUT_BUDGET_BITS
            ));
        }
        out
    }
}

/// A reuse scheme evaluated at a bandwidth split, with the layer-shape
/// requirements it induces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParallelismScheme {
    pub split: BandwidthSplit,
    /// Weight blocks applied to one resident feature map tile.
    pub fm_reuse: u64,
    /// Pixels one resident weight block is applied to.
    pub wt_reuse: u64,
    /// Smallest layer OC that realizes fm_reuse: 8 channels per block.
    pub oc_required: u64,
    /// Smallest layer pixel count (ih * iw) that realizes wt_reuse.
    pub pixels_required: u64,
    /// MAC cycles per tile: every weight block meets every pixel.
    pub t_mac: u64,
    pub fm_load: u64,
    pub wt_load: u64,
    /// t_mac over the slower load; exactly 1 means perfectly balanced.
    pub ctc: Frac,
}

impl ParallelismScheme {
    /// Evaluates a reuse pair at a split, filling in the derived fields.
    pub fn evaluate(fm_reuse: u64, wt_reuse: u64, split: BandwidthSplit) -> Self {
        let t_mac = fm_reuse * wt_reuse;
        let fm_load = fm_load_cycles(wt_reuse, split.bw_f);
        let wt_load = wt_load_cycles(fm_reuse, split.bw_w);
        ParallelismScheme {
            split,
            fm_reuse,
            wt_reuse,
            oc_required: OC_PER_WT_BLOCK * fm_reuse,
            pixels_required: wt_reuse,
            t_mac,
            fm_load,
            wt_load,
            ctc: frac(t_mac as u128, fm_load.max(wt_load) as u128),
        }
    }

    /// Balanced means neither stream starves the MACs: both loads fit
    /// under the tile's compute time.
    pub fn is_balanced(&self) -> bool {
        self.fm_load <= self.t_mac && self.wt_load <= self.t_mac
    }
}

/// Cycles to stream one feature map tile of `wt_reuse` pixels.
pub fn fm_load_cycles(wt_reuse: u64, bw_f: u64) -> u64 {
    assert!(bw_f > 0, "bw_f must be positive");
    (wt_reuse * FM_BITS_PER_STEP).div_ceil(bw_f)
}

/// Cycles to stream `fm_reuse` weight blocks.
pub fn wt_load_cycles(fm_reuse: u64, bw_w: u64) -> u64 {
    assert!(bw_w > 0, "bw_w must be positive");
    (fm_reuse * WT_BITS_PER_STEP).div_ceil(bw_w)
}

/// Componentwise-minimal balanced scheme for a split.
///
/// The two constraints separate: `fm_load <= t_mac` reduces to
/// `fm_reuse >= 128 / bw_f` and `wt_load <= t_mac` reduces to
/// `wt_reuse >= 1024 / bw_w`, so rounding each up independently gives the
/// unique minimum. Less reuse in either coordinate starves the MACs no
/// matter how large the other coordinate grows.
pub fn min_balanced_scheme(split: BandwidthSplit) -> ParallelismScheme {
    assert!(split.bw_f > 0 && split.bw_w > 0, "bandwidths must be positive");
    ParallelismScheme::evaluate(
        FM_BITS_PER_STEP.div_ceil(split.bw_f),
        WT_BITS_PER_STEP.div_ceil(split.bw_w),
        split,
    )
}

/// Minimal balanced scheme per split, sorted by (bw_f, bw_w).
pub fn sweep(splits: &[BandwidthSplit]) -> Vec<ParallelismScheme> {
    let mut rows: Vec<ParallelismScheme> =
        splits.iter().map(|&s| min_balanced_scheme(s)).collect();
    rows.sort_by_key(|r| (r.split.bw_f, r.split.bw_w));
    rows
}

/// Cartesian grid of splits from candidate per-stream widths.
pub fn grid_splits(bw_f_values: &[u64], bw_w_values: &[u64]) -> Vec<BandwidthSplit> {
    let mut out = Vec::with_capacity(bw_f_values.len() * bw_w_values.len());
    for &bw_f in bw_f_values {
        for &bw_w in bw_w_values {
            out.push(BandwidthSplit { bw_f, bw_w });
        }
    }
    out
}

/// The stream widths a switch port is realistically programmed for.
pub const DEFAULT_GRID: [u64; 4] = [8, 16, 32, 64];
