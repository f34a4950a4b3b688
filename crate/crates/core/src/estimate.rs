//! Shared cycle-estimate types.
//!
//! Every layer-level model here reduces to a handful of parallel activities
//! (MAC compute, feature map streaming, weight streaming, off-chip traffic)
//! whose slowest member sets the pace. [`CycleEstimate`] keeps the parts so
//! reports can say not just how long a layer takes but why.

use serde::Serialize;

/// Which activity a layer is limited by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// MAC datapath is busy the whole time.
    Compute,
    /// Feature map streaming from PL outpaces everything else.
    FmLoad,
    /// Weight streaming from PL dominates.
    WtLoad,
    /// Off-chip DDR traffic dominates.
    Ddr,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Bound::Compute => "compute",
            Bound::FmLoad => "fm_load",
            Bound::WtLoad => "wt_load",
            Bound::Ddr => "ddr",
        };
        f.write_str(s)
    }
}

/// Per-layer cycle breakdown. `total` is the max of the parts, not their
/// sum: the activities overlap and the slowest one is the bottleneck.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CycleEstimate {
    pub compute: u64,
    pub fm_load: u64,
    pub wt_load: u64,
    pub ddr: u64,
    pub total: u64,
    pub bound: Bound,
}

impl CycleEstimate {
    /// Combines the parts; ties resolve in the order compute, fm_load,
    /// wt_load, ddr so a fully balanced layer reports as compute bound.
    pub fn from_parts(compute: u64, fm_load: u64, wt_load: u64, ddr: u64) -> Self {
        let total = compute.max(fm_load).max(wt_load).max(ddr);
        let bound = if compute == total {
            Bound::Compute
        } else if fm_load == total {
            Bound::FmLoad
        } else if wt_load == total {
            Bound::WtLoad
        } else {
            Bound::Ddr
        };
        CycleEstimate { compute, fm_load, wt_load, ddr, total, bound }
    }
}
