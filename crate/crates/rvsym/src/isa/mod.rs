//! RV32IM instruction set: decoding, encoding and formal semantics.

pub mod decode;
pub mod encode;
pub mod semantics;

pub use decode::{decode, DecodeError, Instr};
pub use encode::encode;
pub use semantics::{semantics_of, ByteSize, Op, Semantics, Slot};
