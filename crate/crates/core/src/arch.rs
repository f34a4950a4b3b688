//! Device and accelerator configuration.
//!
//! The fixed constants describe the XCVC1902 as seen from the AI Engine
//! array: array geometry, PL interface tile streams, per-tile local memory,
//! and the INT8 MAC datapath. [`ArchConfig`] holds the quantities that vary
//! between boards or clock setups, [`DpuConfig`] holds the accelerator
//! build options (PE count, PE kinds, low-channel unit, MISC placement).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AIE array rows on the XCVC1902.
pub const AIE_ROWS: u64 = 8;
/// AIE array columns on the XCVC1902.
pub const AIE_COLS: u64 = 50;
/// Interface tiles along the array's bottom edge that have PL stream
/// connections. The other 11 columns only reach the NoC.
pub const PL_INTERFACE_TILES: u64 = 39;
/// PL to AIE streams available per interface tile.
pub const IN_STREAMS_PER_TILE: u64 = 8;
/// AIE to PL streams available per interface tile.
pub const OUT_STREAMS_PER_TILE: u64 = 6;
/// Width of each interface tile stream in bits.
pub const STREAM_BITS: u64 = 64;
/// Sustained input width one interface tile can deliver per AIE cycle,
/// in bits. Feeding one core's 1024-bit appetite from a 192-bit tile is
/// what forces the data-reuse analysis in [`crate::dse`].
pub const TILE_IN_BITS_PER_CYCLE: u64 = 192;
/// Sustained output width one interface tile can accept per AIE cycle.
pub const TILE_OUT_BITS_PER_CYCLE: u64 = 128;

/// Data memory local to one AIE tile.
pub const LOCAL_MEM_BYTES: u64 = 32 * 1024;
/// Banks in one tile's data memory.
pub const MEM_BANKS: u64 = 8;
/// 128-bit words per bank.
pub const BANK_WORDS: u64 = 256;
/// Bytes per memory word.
pub const WORD_BYTES: u64 = 16;
/// Bytes per bank.
pub const BANK_BYTES: u64 = BANK_WORDS * WORD_BYTES;

/// INT8 multiply-accumulates one core retires per cycle with the
/// 1(M)x16(K)x8(N) GEMM intrinsic.
pub const MACS_PER_CORE_CYCLE: u64 = 128;
/// Accumulator lanes forwarded core-to-core on the cascade stream.
pub const CASCADE_LANES: usize = 8;
/// Accumulator width in bits.
pub const ACC_BITS: u32 = 48;
/// Cascade stream width: 8 lanes of 48-bit partial sums.
pub const CASCADE_STREAM_BITS: u64 = CASCADE_LANES as u64 * ACC_BITS as u64;

/// AIE cores in one processing engine (8 rows by 6 columns).
pub const CORES_PER_PE: u64 = 48;
/// Array columns one PE occupies.
pub const PE_COLS: u64 = 6;
/// Operations per MAC when quoting TOPS (multiply and add).
pub const OPS_PER_MAC: u64 = 2;

/// PE counts the accelerator can be built with.
pub const VALID_PE_COUNTS: [usize; 4] = [2, 4, 6, 8];
/// Largest PE count once any PE is a DWC PE; DWC PEs need extra interface
/// tile columns for their 24 output channels, which caps the build at 6.
pub const MAX_PE_WITH_DWC: usize = 6;

/// Board and clock parameters. Every field can be overridden from a config
/// file; [`ArchConfig::default`] matches the VCK5000 card.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchConfig {
    /// AIE array clock in Hz.
    pub aie_freq_hz: f64,
    /// PL fabric clock in Hz. Drives the low-channel unit and any PL-side
    /// MISC core.
    pub pl_freq_hz: f64,
    /// PL to DDR4-DIMM bandwidth in bytes per second.
    pub ddr_bw_bytes_per_s: f64,
    /// Aggregate PL to AIE stream bandwidth in bytes per second.
    pub pl_to_aie_bw_bytes_per_s: f64,
    /// Aggregate AIE to PL stream bandwidth in bytes per second.
    pub aie_to_pl_bw_bytes_per_s: f64,
}

impl Default for ArchConfig {
    fn default() -> Self {
        ArchConfig {
            aie_freq_hz: 1.333e9,
            pl_freq_hz: 333.25e6,
            ddr_bw_bytes_per_s: 102.4e9,
            pl_to_aie_bw_bytes_per_s: 1.3e12,
            aie_to_pl_bw_bytes_per_s: 1.0e12,
        }
    }
}

/// VCK5000 defaults: 1.333 GHz AIE clock, quarter-rate PL clock,
/// 102.4 GB/s DDR4.
pub fn default_arch() -> ArchConfig {
    ArchConfig::default()
}

/// What a processing engine is built to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeKind {
    /// Standard convolution only.
    Conv,
    /// Depthwise plus standard convolution; costs extra interface tiles.
    Dwc,
}

/// Where the MISC core (pooling, element-wise ops) is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MiscLocation {
    /// On spare AIE cores; conserves PL DSPs.
    Aie,
    /// In programmable logic.
    Pl,
}

/// Accelerator build options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpuConfig {
    /// Processing engine count; one image per PE, so also the batch group
    /// size. Valid values are 2, 4, 6, 8.
    pub n_pe: usize,
    /// Kind of each PE. Empty means all [`PeKind::Conv`].
    pub pe_kinds: Vec<PeKind>,
    /// Include the PL-side low-channel convolution unit.
    pub low_channel_unit: bool,
    /// MISC core placement.
    pub misc: MiscLocation,
}

impl Default for DpuConfig {
    fn default() -> Self {
        DpuConfig {
            n_pe: 8,
            pe_kinds: Vec::new(),
            low_channel_unit: false,
            misc: MiscLocation::Aie,
        }
    }
}

impl DpuConfig {
    pub fn all_conv(n_pe: usize) -> Self {
        DpuConfig { n_pe, ..Default::default() }
    }

    /// `n_dwc` DWC PEs followed by conv PEs, `n_pe` total.
    pub fn with_dwc(n_pe: usize, n_dwc: usize) -> Self {
        let mut pe_kinds = vec![PeKind::Dwc; n_dwc.min(n_pe)];
        pe_kinds.resize(n_pe, PeKind::Conv);
        DpuConfig { n_pe, pe_kinds, ..Default::default() }
    }

    /// Effective per-PE kinds; expands the empty all-conv shorthand.
    pub fn kinds(&self) -> Vec<PeKind> {
        if self.pe_kinds.is_empty() {
            vec![PeKind::Conv; self.n_pe]
        } else {
            self.pe_kinds.clone()
        }
    }

    pub fn n_dwc(&self) -> usize {
        self.kinds().iter().filter(|k| **k == PeKind::Dwc).count()
    }

    pub fn has_dwc(&self) -> bool {
        self.n_dwc() > 0
    }
}

/// Peak INT8 rate in TOPS: `n_pe * 48 cores * 128 MAC * 2 ops * f_aie`.
///
/// Rejects PE counts the accelerator cannot be built with.
pub fn peak_tops(dpu: &DpuConfig, arch: &ArchConfig) -> Result<f64> {
    if !VALID_PE_COUNTS.contains(&dpu.n_pe) {
        return Err(Error::invalid(format!(
            "n_pe must be one of {:?}, got {}",
            VALID_PE_COUNTS, dpu.n_pe
        )));
    }
    let macs_per_cycle = (dpu.n_pe as u64 * CORES_PER_PE * MACS_PER_CORE_CYCLE) as f64;
    Ok(macs_per_cycle * OPS_PER_MAC as f64 * arch.aie_freq_hz / 1e12)
}

/// Outcome of [`validate`]; empty means the configuration is buildable.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, msg: String) {
        self.violations.push(msg);
    }
}

/// Checks a configuration against every hard limit the device imposes:
/// valid PE count, PE kind list consistency, the 6-PE cap once a DWC PE
/// is present, the interface tile stream budget, and clock sanity.
pub fn validate(dpu: &DpuConfig, arch: &ArchConfig) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !VALID_PE_COUNTS.contains(&dpu.n_pe) {
        report.push(format!(
            "n_pe must be one of {:?}, got {}",
            VALID_PE_COUNTS, dpu.n_pe
        ));
    }
    if !dpu.pe_kinds.is_empty() && dpu.pe_kinds.len() != dpu.n_pe {
        report.push(format!(
            "pe_kinds lists {} entries but n_pe is {}",
            dpu.pe_kinds.len(),
            dpu.n_pe
        ));
    }
    if dpu.has_dwc() && dpu.n_pe > MAX_PE_WITH_DWC {
        report.push(format!(
            "DWC PEs limit the build to {} PEs, got {}",
            MAX_PE_WITH_DWC, dpu.n_pe
        ));
    }

    let demand = crate::dwc_pe::stream_demand(dpu);
    let budget = crate::dwc_pe::stream_budget();
    if demand.in_streams > budget.in_streams {
        report.push(format!(
            "PE array needs {} PL to AIE streams, device provides {}",
            demand.in_streams, budget.in_streams
        ));
    }
    if demand.out_channels > budget.out_channels {
        report.push(format!(
            "PE array needs {} output channels, device provides {}",
            demand.out_channels, budget.out_channels
        ));
    }
    if demand.columns > budget.columns {
        report.push(format!(
            "PE array spans {} interface columns, device provides {}",
            demand.columns, budget.columns
        ));
    }

    if !(arch.aie_freq_hz > 0.0) {
        report.push(format!("aie_freq_hz must be positive, got {}", arch.aie_freq_hz));
    }
    if !(arch.pl_freq_hz > 0.0) {
        report.push(format!("pl_freq_hz must be positive, got {}", arch.pl_freq_hz));
    }
    if !(arch.ddr_bw_bytes_per_s > 0.0) {
        report.push(format!(
            "ddr_bw_bytes_per_s must be positive, got {}",
            arch.ddr_bw_bytes_per_s
        ));
    }

    report
}
