//! Depthwise convolution PE model.
//!
//! Depthwise kernels give each input channel its own k x k filter, so the
//! channel-direction dot product the MAC intrinsic is built around
//! disappears and arithmetic intensity collapses. The DWC PE reorganizes
//! the same 48 cores into 3 groups of 8 MAC-RACNL pairs: the MAC core of a
//! pair computes spatial taps, the RACNL core accumulates across taps and
//! applies bias, activation, and requantization. This module counts cycles
//! for the atomic computation, the feature map tile feeding it, and whole
//! layers, and accounts the extra interface tile columns the wider output
//! side costs.

use serde::Serialize;

use crate::arch::{self, DpuConfig, PeKind};
use crate::error::{Error, Result};
use crate::estimate::CycleEstimate;
use crate::workload::{LayerShape, OpKind};
use crate::{div_ceil, frac, Frac};

/// Kernel sizes the DWC datapath supports.
pub const DWC_KERNELS: [u64; 4] = [1, 3, 5, 7];
/// Strides the DWC datapath supports.
pub const DWC_STRIDES: [u64; 2] = [1, 2];
/// Feature map stream bandwidth into one MAC-RACNL pair, bits per cycle:
/// two 32-bit stream channels.
pub const DWC_FM_BITS_PER_CYCLE: u64 = 32;
/// Output rows per atomic computation.
pub const ATOMIC_OH: u64 = 1;
/// Output pixels per row per atomic computation.
pub const ATOMIC_OW: u64 = 2;
/// Channels per atomic computation (one 16-byte vector lane).
pub const ATOMIC_CHANNELS: u64 = 16;
/// Output rows per MAC-RACNL iteration.
pub const ITER_OH: u64 = 2;
/// Output pixels per row per iteration.
pub const ITER_OW: u64 = 8;
/// Atomic computations per iteration: (2 x 8) / (1 x 2).
pub const ATOMICS_PER_ITERATION: u64 = (ITER_OH * ITER_OW) / (ATOMIC_OH * ATOMIC_OW);

fn check_params(k: u64, s: u64) -> Result<()> {
    if !DWC_KERNELS.contains(&k) {
        return Err(Error::invalid(format!("dwc kernel must be one of {DWC_KERNELS:?}, got {k}")));
    }
    if !DWC_STRIDES.contains(&s) {
        return Err(Error::invalid(format!("dwc stride must be 1 or 2, got {s}")));
    }
    Ok(())
}

/// Cycles for one atomic depthwise computation: a 1x2x16 output block.
///
/// Weight vectors are fetched in pairs, so a k-tap kernel costs k rows
/// times ceil(k/2) paired fetches at two cycles each. Stride does not
/// change the arithmetic, only which input pixels feed it.
pub fn atomic_cycles(k: u64, s: u64) -> Result<u64> {
    check_params(k, s)?;
    Ok(2 * k * k.div_ceil(2))
}

/// Cycles to stream the input tile for one 2x8x16 iteration into a pair's
/// local memory.
///
/// The tile covers (s + k) rows by (7s + k) columns of 16-channel pixels;
/// one pixel is a 16-byte memory word.
pub fn fm_load_cycles_dwc(k: u64, s: u64, bw_f: u64) -> Result<u64> {
    check_params(k, s)?;
    if bw_f == 0 {
        return Err(Error::invalid("fm bandwidth must be positive"));
    }
    let rows = s + k;
    let cols = 7 * s + k;
    Ok(div_ceil(rows * cols * 8 * arch::WORD_BYTES, bw_f))
}

/// Compute/load balance of one MAC-RACNL iteration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DwcIteration {
    pub k: u64,
    pub s: u64,
    /// Output block per iteration: (rows, pixels per row, channels).
    pub out_shape: (u64, u64, u64),
    pub atomic_ops: u64,
    pub compute_cycles: u64,
    pub fm_load_cycles: u64,
    pub ctc: Frac,
    pub bound: crate::estimate::Bound,
}

/// Evaluates one iteration at the native two-channel stream bandwidth.
pub fn iteration_ctc(k: u64, s: u64) -> Result<DwcIteration> {
    let atomic = atomic_cycles(k, s)?;
    let compute = ATOMICS_PER_ITERATION * atomic;
    let fm = fm_load_cycles_dwc(k, s, DWC_FM_BITS_PER_CYCLE)?;
    let est = CycleEstimate::from_parts(compute, fm, 0, 0);
    Ok(DwcIteration {
        k,
        s,
        out_shape: (ITER_OH, ITER_OW, ATOMIC_CHANNELS),
        atomic_ops: ATOMICS_PER_ITERATION,
        compute_cycles: compute,
        fm_load_cycles: fm,
        ctc: frac(compute as u128, fm as u128),
        bound: est.bound,
    })
}

/// Cycles for a whole depthwise layer on one DWC PE.
///
/// The layer is cut into 2x8x16 iteration blocks; the 24 pairs work on
/// distinct blocks in parallel (pairs in a cluster share weights but see
/// different feature map tiles), so the layer runs in waves of 24.
pub fn dwc_layer_cycles(layer: &LayerShape) -> Result<CycleEstimate> {
    if layer.kind != OpKind::Dwc {
        return Err(Error::invalid(format!(
            "dwc_layer_cycles needs a dwc layer, {} is {}",
            layer.name,
            layer.kind.as_str()
        )));
    }
    let iter = iteration_ctc(layer.k, layer.s)?;
    let iterations =
        div_ceil(layer.oh, ITER_OH) * div_ceil(layer.ow, ITER_OW) * div_ceil(layer.ic, ATOMIC_CHANNELS);
    let layout = layout();
    let waves = div_ceil(iterations, layout.total_pairs());
    Ok(CycleEstimate::from_parts(
        waves * iter.compute_cycles,
        waves * iter.fm_load_cycles,
        0,
        0,
    ))
}

/// How the 48 cores of a DWC PE are organized.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DwcPeLayout {
    pub groups: u64,
    pub pairs_per_group: u64,
    /// MAC cores plus RACNL cores.
    pub total_cores: u64,
    /// Shared weight stream per cluster of pairs.
    pub weight_ports_per_cluster: u64,
    /// Output channels the 24 RACNL cores produce.
    pub output_channels_needed: u64,
    /// Output channels the PE's own six interface columns provide.
    pub output_channels_native: u64,
}

impl DwcPeLayout {
    pub fn total_pairs(&self) -> u64 {
        self.groups * self.pairs_per_group
    }

    /// Interface columns borrowed from neighbors for the outputs the PE's
    /// own span cannot drive.
    pub fn borrowed_columns(&self) -> u64 {
        let extra = self.output_channels_needed - self.output_channels_native;
        div_ceil(extra, self.output_channels_native / arch::PE_COLS)
    }
}

pub fn layout() -> DwcPeLayout {
    DwcPeLayout {
        groups: 3,
        pairs_per_group: 8,
        total_cores: 48,
        weight_ports_per_cluster: 1,
        output_channels_needed: 24,
        output_channels_native: 18,
    }
}

/// Input streams one DWC PE consumes: 24 pairs at two 32-bit channels,
/// counted in 64-bit stream equivalents.
pub const DWC_PE_IN_STREAMS: u64 = 24;
/// Output channels one DWC PE drives.
pub const DWC_PE_OUT_CHANNELS: u64 = 24;
/// Interface columns one DWC PE occupies: its own six plus two borrowed
/// for the output channels beyond the native 18.
pub const DWC_PE_COLS: u64 = arch::PE_COLS + 2;

/// Interface columns PEs can be placed over. Two of the array's 50 are
/// kept for shim control and memory traffic, leaving room for exactly
/// eight conv PEs or six DWC PEs.
pub const PLACEMENT_COLS: u64 = arch::AIE_COLS - 2;
/// Output channels one interface column sustains: the native 18 channels
/// of a six-column PE span.
pub const OUT_CHANNELS_PER_COL: u64 = 3;

/// Aggregate interface demand of a DPU build, in 64-bit stream
/// equivalents and interface columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StreamDemand {
    pub in_streams: u64,
    pub out_channels: u64,
    pub columns: u64,
}

/// What the device offers: stream counts from the 39 PL-connected
/// interface tiles, placement columns from the array span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StreamBudget {
    pub in_streams: u64,
    pub out_channels: u64,
    pub columns: u64,
}

pub fn stream_demand(dpu: &DpuConfig) -> StreamDemand {
    let mut demand = StreamDemand { in_streams: 0, out_channels: 0, columns: 0 };
    for kind in dpu.kinds() {
        match kind {
            PeKind::Conv => {
                demand.in_streams += crate::conv_pe::PE_IN_STREAMS;
                demand.out_channels += crate::conv_pe::PE_OUT_CHANNELS;
                demand.columns += arch::PE_COLS;
            }
            PeKind::Dwc => {
                demand.in_streams += DWC_PE_IN_STREAMS;
                demand.out_channels += DWC_PE_OUT_CHANNELS;
                demand.columns += DWC_PE_COLS;
            }
        }
    }
    demand
}

pub fn stream_budget() -> StreamBudget {
    StreamBudget {
        in_streams: arch::PL_INTERFACE_TILES * arch::IN_STREAMS_PER_TILE,
        out_channels: arch::PL_INTERFACE_TILES * OUT_CHANNELS_PER_COL,
        columns: PLACEMENT_COLS,
    }
}

/// Demand against budget for one build, with one line per shortfall.
#[derive(Debug, Clone, Serialize)]
pub struct InterfaceReport {
    pub demand: StreamDemand,
    pub budget: StreamBudget,
    pub feasible: bool,
    pub violations: Vec<String>,
}

pub fn interface_budget(dpu: &DpuConfig) -> InterfaceReport {
    let demand = stream_demand(dpu);
    let budget = stream_budget();
    let mut violations = Vec::new();
    if demand.in_streams > budget.in_streams {
        violations.push(format!(
            "input streams: {} needed, {} available",
            demand.in_streams, budget.in_streams
        ));
    }
    if demand.out_channels > budget.out_channels {
        violations.push(format!(
            "output channels: {} needed, {} available",
            demand.out_channels, budget.out_channels
        ));
    }
    if demand.columns > budget.columns {
        violations.push(format!(
            "interface columns: {} needed, {} available",
            demand.columns, budget.columns
        ));
    }
    InterfaceReport { demand, budget, feasible: violations.is_empty(), violations }
}
