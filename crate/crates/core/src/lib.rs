//! Desk-scale model of the DPUV4E CNN accelerator for AMD Versal ACAP.
//!
//! DPUV4E maps convolution inference onto the Versal AI Engine array: AIE
//! cores do the INT8 MAC work, partial sums travel over the dedicated
//! cascade stream, and programmable logic feeds the array through the
//! PL/AIE interface tiles. The modules here cover the questions that come
//! up when sizing such a design before committing to RTL:
//!
//! * [`arch`]: device and accelerator configuration, peak rate accounting.
//! * [`dse`]: stream-bandwidth vs. data-reuse balance for a single core.
//! * [`conv_pe`]: convolution PE granularity, tiling, and buffer/bank fit.
//! * [`cascade`]: cycle-level simulation of the MAC cascade pipeline.
//! * [`dwc_pe`]: depthwise convolution PE timing and interface budget.
//! * [`emu`]: bit-accurate INT8 functional emulation of the compute path.
//! * [`workload`]: network layer descriptions and ingest.
//! * [`sched`]: layer-to-PE scheduling and utilization/latency reports.
//!
//! Cycle math is exact integer arithmetic throughout; ratios that must be
//! compared exactly (compute-to-communication, pipeline utilization) use
//! [`Frac`] rather than floats.

pub mod arch;
pub mod cascade;
pub mod config;
pub mod conv_pe;
pub mod dse;
pub mod dwc_pe;
pub mod emu;
pub mod error;
pub mod estimate;
pub mod sched;
pub mod workload;

pub use error::{Error, Result};

/// Exact non-negative rational. Utilization and compute-to-communication
/// ratios are quotients of cycle counts; keeping them rational lets tests
/// assert equality (for example a CTC of exactly 1) without float epsilons.
pub type Frac = num_rational::Ratio<u128>;

/// Shorthand constructor for [`Frac`]. Panics if `den` is zero.
pub fn frac(num: u128, den: u128) -> Frac {
    Frac::new(num, den)
}

/// Lossy view of a [`Frac`] for display purposes.
pub fn frac_to_f64(f: Frac) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

/// Ceiling division on u64, the workhorse of every cycle formula here.
pub fn div_ceil(a: u64, b: u64) -> u64 {
    debug_assert!(b > 0);
    a.div_ceil(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_compares_exactly() {
        assert_eq!(frac(96, 160), frac(3, 5));
        assert!(frac(96, 160) < frac(1, 1));
        assert_eq!(frac(448, 448), frac(1, 1));
    }

    #[test]
    fn div_ceil_basics() {
        assert_eq!(div_ceil(0, 4), 0);
        assert_eq!(div_ceil(1, 4), 1);
        assert_eq!(div_ceil(4, 4), 1);
        assert_eq!(div_ceil(5, 4), 2);
    }
}
