//! Bit-accurate INT8 functional emulation.
//!
//! Two independent implementations of every operator live here. The engine
//! path ([`conv`]) walks tensors the way the hardware does: 1x16x8 MAC
//! tiles, cascade accumulation over four chained cores, kernel-level
//! accumulation in the ACC core, then bias, activation, and requantization
//! in the NL core. The oracle path ([`reference`]) is plain nested loops
//! over wide integers sharing only the arithmetic definitions. Randomized
//! equivalence between the two is the correctness argument for the whole
//! dataflow model.
//!
//! Quantization is symmetric per-tensor with power-of-two scales: a tensor
//! holds int8 values and a `scale_exp`, and represents `int * 2^scale_exp`.
//! Requantization is a single right shift with round-half-away-from-zero,
//! saturating to the int8 range.

pub mod cases;
pub mod conv;
pub mod misc;
pub mod nl;
pub mod reference;
pub mod tensor;

pub use cases::{random_conv_case, random_dwc_case, ConvCase};
pub use conv::{cascade_chain, conv_forward, dwc_forward, mac_1x16x8};
pub use misc::{avgpool, eltwise_add, maxpool};
pub use nl::{Accumulator, NlKind, NlSpec};
pub use reference::{reference_conv, reference_dwc};
pub use tensor::QTensor;
