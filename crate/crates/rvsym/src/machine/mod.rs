//! Concolic machine state: registers, byte-granular memory, PC.
//!
//! Every stored value is a [`ConcolicWord`]: a concrete 32-bit value
//! paired with an optional solver term describing it symbolically.
//! Purely concrete values carry no term, so a program that never
//! touches symbolic input pays almost nothing over a plain emulator.
//!
//! Memory is a sparse byte map. Words are composed and decomposed
//! byte-by-byte (little-endian), including their symbolic parts, which
//! makes misaligned and partially-symbolic accesses uniform. Reads of
//! unmapped addresses yield zero by default; strict mode turns them
//! into faults.

pub mod elf;

use std::collections::HashMap;

use thiserror::Error;

use crate::expr::{BvExpr, Width};
use crate::isa::ByteSize;
use crate::solver::{Session, TermHandle};

pub use elf::ElfError;

/// A 32-bit value with an optional symbolic description.
///
/// Invariant: when `symbolic` is present its term is 32 bits wide and
/// the concrete field is the term's value under the current input
/// assignment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ConcolicWord {
    pub concrete: u32,
    pub symbolic: Option<TermHandle>,
}

impl ConcolicWord {
    pub fn concrete(value: u32) -> Self {
        ConcolicWord { concrete: value, symbolic: None }
    }

    pub fn is_symbolic(&self) -> bool {
        self.symbolic.is_some()
    }

    /// The term for this word, interning the concrete value if no
    /// symbolic part exists.
    pub fn term(&self, session: &mut Session) -> TermHandle {
        self.symbolic
            .unwrap_or_else(|| session.constant(Width::W32, u64::from(self.concrete)))
    }
}

/// One byte of memory, possibly with a symbolic description (8 bits).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ConcolicByte {
    pub concrete: u8,
    pub symbolic: Option<TermHandle>,
}

impl ConcolicByte {
    pub fn concrete(value: u8) -> Self {
        ConcolicByte { concrete: value, symbolic: None }
    }
}

#[derive(Error, Clone, Copy, PartialEq, Eq, Debug)]
pub enum MachineError {
    #[error("read of unmapped memory at {addr:#010x}")]
    UnmappedRead { addr: u32 },
    #[error("misaligned program counter {pc:#010x}")]
    MisalignedPc { pc: u32 },
}

/// Sparse byte-granular memory.
#[derive(Clone, Default, Debug)]
pub struct Memory {
    bytes: HashMap<u32, ConcolicByte>,
}

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mapped_bytes(&self) -> usize {
        self.bytes.len()
    }

    /// Every mapped byte as `(address, byte)`, in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, ConcolicByte)> + '_ {
        self.bytes.iter().map(|(&a, &b)| (a, b))
    }

    pub fn read_byte(&self, addr: u32) -> Option<ConcolicByte> {
        self.bytes.get(&addr).copied()
    }

    pub fn write_byte(&mut self, addr: u32, byte: ConcolicByte) {
        self.bytes.insert(addr, byte);
    }

    /// Load `size` bytes at `addr` and extend the result to 32 bits.
    ///
    /// The symbolic part is composed only when at least one byte is
    /// symbolic; the composition mirrors the concrete one (shift and
    /// or over zero-extended bytes, then a final sign or zero extend).
    pub fn load(
        &self,
        session: &mut Session,
        size: ByteSize,
        signed: bool,
        addr: u32,
        strict: bool,
    ) -> Result<ConcolicWord, MachineError> {
        let n = size.bytes();
        let mut raw: u32 = 0;
        let mut any_symbolic = false;
        let mut bytes = [ConcolicByte::concrete(0); 4];
        for i in 0..n {
            let a = addr.wrapping_add(i);
            let byte = match self.bytes.get(&a) {
                Some(b) => *b,
                None if strict => return Err(MachineError::UnmappedRead { addr: a }),
                None => ConcolicByte::concrete(0),
            };
            raw |= u32::from(byte.concrete) << (8 * i);
            any_symbolic |= byte.symbolic.is_some();
            bytes[i as usize] = byte;
        }
        let bits = size.bits();
        let concrete = if signed && bits < 32 {
            ((raw << (32 - bits)) as i32 >> (32 - bits)) as u32
        } else {
            raw
        };
        let symbolic = if any_symbolic {
            let mut composed: BvExpr<TermHandle> = BvExpr::int(Width::new(bits).unwrap(), 0);
            for i in 0..n {
                let b = bytes[i as usize];
                let byte_term = b
                    .symbolic
                    .unwrap_or_else(|| session.constant(Width::W8, u64::from(b.concrete)));
                let mut part = BvExpr::leaf(byte_term).zext(bits - 8);
                if i > 0 {
                    part = part.sll(BvExpr::int(Width::new(bits).unwrap(), u64::from(8 * i)));
                }
                composed = composed.or(part);
            }
            let extended = if bits < 32 {
                if signed {
                    composed.sext(32 - bits)
                } else {
                    composed.zext(32 - bits)
                }
            } else {
                composed
            };
            Some(session.lower(&extended).expect("composed load is well-formed"))
        } else {
            None
        };
        Ok(ConcolicWord { concrete, symbolic })
    }

    /// Store the low `size` bytes of `value` at `addr`, splitting the
    /// symbolic part into per-byte extracts.
    pub fn store(&mut self, session: &mut Session, size: ByteSize, addr: u32, value: ConcolicWord) {
        for i in 0..size.bytes() {
            let concrete = (value.concrete >> (8 * i)) as u8;
            let symbolic = value.symbolic.map(|term| {
                let e = BvExpr::leaf(term).extract(8 * i, Width::W8);
                session.lower(&e).expect("byte extract is well-formed")
            });
            self.write_byte(addr.wrapping_add(i), ConcolicByte { concrete, symbolic });
        }
    }
}

/// Full machine state; cheap to clone for run snapshots.
#[derive(Clone, Debug)]
pub struct MachineState {
    regs: [ConcolicWord; 32],
    pub mem: Memory,
    pub pc: u32,
    strict_memory: bool,
}

impl MachineState {
    pub fn new(strict_memory: bool) -> Self {
        MachineState {
            regs: [ConcolicWord::concrete(0); 32],
            mem: Memory::new(),
            pc: 0,
            strict_memory,
        }
    }

    pub fn strict_memory(&self) -> bool {
        self.strict_memory
    }

    /// Register read; x0 is hardwired to zero.
    pub fn reg(&self, index: u8) -> ConcolicWord {
        self.regs[usize::from(index & 0x1F)]
    }

    /// Register write; writes to x0 are discarded.
    pub fn set_reg(&mut self, index: u8, value: ConcolicWord) {
        let i = usize::from(index & 0x1F);
        if i != 0 {
            self.regs[i] = value;
        }
    }

    /// Load an ELF image, point the PC at its entry and initialize the
    /// stack pointer (x2). Returns the entry address.
    pub fn load_elf(&mut self, image: &[u8], stack_top: u32) -> Result<u32, ElfError> {
        let entry = elf::load(image, &mut self.mem)?;
        self.pc = entry;
        self.set_reg(2, ConcolicWord::concrete(stack_top));
        Ok(entry)
    }

    /// Fetch the instruction word at the current PC. Fetch ignores
    /// symbolic memory contents: the executed text is the concrete
    /// byte image.
    pub fn fetch(&self) -> Result<u32, MachineError> {
        if !self.pc.is_multiple_of(4) {
            return Err(MachineError::MisalignedPc { pc: self.pc });
        }
        let mut word = 0u32;
        for i in 0..4 {
            let a = self.pc.wrapping_add(i);
            let byte = match self.mem.read_byte(a) {
                Some(b) => b.concrete,
                None if self.strict_memory => {
                    return Err(MachineError::UnmappedRead { addr: a })
                }
                None => 0,
            };
            word |= u32::from(byte) << (8 * i);
        }
        Ok(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{Model, Session, SolverConfig, VarId};

    fn session() -> Session {
        Session::new(SolverConfig::default())
    }

    #[test]
    fn x0_is_hardwired() {
        let mut m = MachineState::new(false);
        m.set_reg(0, ConcolicWord::concrete(99));
        assert_eq!(m.reg(0), ConcolicWord::concrete(0));
        m.set_reg(5, ConcolicWord::concrete(7));
        assert_eq!(m.reg(5).concrete, 7);
    }

    #[test]
    fn store_load_round_trip_concrete() {
        let mut s = session();
        let mut mem = Memory::new();
        mem.store(&mut s, ByteSize::Word, 0x100, ConcolicWord::concrete(0xDEAD_BEEF));
        // full word
        let w = mem.load(&mut s, ByteSize::Word, true, 0x100, true).unwrap();
        assert_eq!(w, ConcolicWord::concrete(0xDEAD_BEEF));
        // byte views, little-endian
        let b0 = mem.load(&mut s, ByteSize::Byte, false, 0x100, true).unwrap();
        assert_eq!(b0.concrete, 0xEF);
        let b3 = mem.load(&mut s, ByteSize::Byte, true, 0x103, true).unwrap();
        assert_eq!(b3.concrete, 0xFFFF_FFDE, "sign-extended 0xDE");
        // misaligned halfword straddling the word
        let h = mem.load(&mut s, ByteSize::Half, false, 0x101, true).unwrap();
        assert_eq!(h.concrete, 0xADBE);
    }

    #[test]
    fn unmapped_reads_zero_or_fault() {
        let mut s = session();
        let mem = Memory::new();
        let w = mem.load(&mut s, ByteSize::Word, false, 0x100, false).unwrap();
        assert_eq!(w, ConcolicWord::concrete(0));
        assert_eq!(
            mem.load(&mut s, ByteSize::Word, false, 0x100, true),
            Err(MachineError::UnmappedRead { addr: 0x100 })
        );
    }

    #[test]
    fn symbolic_store_load_round_trip() {
        let mut s = session();
        let mut mem = Memory::new();
        let id = VarId { call: 0, offset: 0 };
        let v = s.var(id);
        let word_e = BvExpr::leaf(v).zext(24).sll(BvExpr::int(Width::W32, 8));
        let word_term = s.lower(&word_e).unwrap();
        // concrete value under input 0x5A: 0x5A00
        let w = ConcolicWord { concrete: 0x5A00, symbolic: Some(word_term) };
        mem.store(&mut s, ByteSize::Word, 0x200, w);

        let lo = mem.load(&mut s, ByteSize::Byte, false, 0x200, true).unwrap();
        assert_eq!(lo.concrete, 0);
        assert!(lo.is_symbolic(), "extract of a symbolic word stays symbolic");

        let round = mem.load(&mut s, ByteSize::Word, false, 0x200, true).unwrap();
        assert_eq!(round.concrete, 0x5A00);
        let mut model = Model::new();
        model.insert(id, 0x5A);
        assert_eq!(s.eval(round.symbolic.unwrap(), &model), 0x5A00);
        assert_eq!(s.eval(round.symbolic.unwrap(), &Model::new()), 0);
    }

    #[test]
    fn fetch_requires_alignment() {
        let mut m = MachineState::new(false);
        m.pc = 0x102;
        assert_eq!(m.fetch(), Err(MachineError::MisalignedPc { pc: 0x102 }));
        m.pc = 0x104;
        assert_eq!(m.fetch(), Ok(0), "unmapped text reads as zero when lenient");
    }
}
