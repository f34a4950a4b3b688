//! Accumulator and the bias/activation/requantization stage.

use serde::{Deserialize, Serialize};

use crate::arch::{ACC_BITS, CASCADE_LANES};
use crate::error::{Error, Result};

/// The eight 48-bit partial sum lanes one MAC tile produces per cycle.
///
/// Lanes are held in i64; [`Accumulator::check`] enforces the hardware
/// width so a model that silently relied on the extra headroom would be
/// caught.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Accumulator {
    pub lanes: [i64; CASCADE_LANES],
}

impl Accumulator {
    pub fn zero() -> Self {
        Accumulator::default()
    }

    /// Errors if any lane has outgrown a signed 48-bit register.
    pub fn check(&self) -> Result<()> {
        for (lane, &v) in self.lanes.iter().enumerate() {
            check_acc(v, lane)?;
        }
        Ok(())
    }
}

/// Width check for a single accumulator lane.
pub fn check_acc(value: i64, lane: usize) -> Result<()> {
    let limit = 1i64 << (ACC_BITS - 1);
    if value >= limit || value < -limit {
        return Err(Error::AccumulatorOverflow { lane, value });
    }
    Ok(())
}

/// Activation function of the NL core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlKind {
    Identity,
    Relu,
    /// Leaky ReLU with slope 2^-alpha_shift on the negative side; the
    /// slope folds into the requant shift, so the negative branch is a
    /// single rounded shift by `requant_shift + alpha_shift`.
    LeakyRelu { alpha_shift: u32 },
}

/// Activation plus requantization parameters.
///
/// Requantization divides by 2^requant_shift with round-half-away-from-
/// zero and saturates to int8. The output tensor's scale exponent grows
/// by the shift, keeping the represented real values aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NlSpec {
    pub kind: NlKind,
    pub requant_shift: u32,
}

impl NlSpec {
    pub fn identity(requant_shift: u32) -> Self {
        NlSpec { kind: NlKind::Identity, requant_shift }
    }

    pub fn relu(requant_shift: u32) -> Self {
        NlSpec { kind: NlKind::Relu, requant_shift }
    }

    pub fn leaky(requant_shift: u32, alpha_shift: u32) -> Self {
        NlSpec { kind: NlKind::LeakyRelu { alpha_shift }, requant_shift }
    }

    /// Runs one accumulated value through activation, requantization, and
    /// saturation.
    pub fn apply(&self, value: i64) -> i8 {
        let shifted = match self.kind {
            NlKind::Identity => round_shift(value, self.requant_shift),
            NlKind::Relu => {
                if value < 0 {
                    0
                } else {
                    round_shift(value, self.requant_shift)
                }
            }
            NlKind::LeakyRelu { alpha_shift } => {
                if value < 0 {
                    round_shift(value, self.requant_shift + alpha_shift)
                } else {
                    round_shift(value, self.requant_shift)
                }
            }
        };
        saturate(shifted)
    }
}

/// Right shift by `s` with round-half-away-from-zero.
pub fn round_shift(value: i64, s: u32) -> i64 {
    if s == 0 {
        return value;
    }
    let magnitude = (value.unsigned_abs() + (1u64 << (s - 1))) >> s;
    if value < 0 {
        -(magnitude as i64)
    } else {
        magnitude as i64
    }
}

/// Clamps to the int8 range.
pub fn saturate(value: i64) -> i8 {
    value.clamp(i8::MIN as i64, i8::MAX as i64) as i8
}
