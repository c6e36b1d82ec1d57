//! Formal instruction semantics as first-order effect sequences.
//!
//! Every instruction denotes a short list of [`Op`] effects over the
//! bit-vector expression language. Intermediate values flow through
//! numbered binding [`Slot`]s: an effect with a result writes its slot,
//! later expressions reference it as a leaf. The interpreter supplies
//! the meaning of each effect, so the same sequence drives both purely
//! concrete execution and concolic execution.
//!
//! Conventions:
//! - The program counter advances to `pc + 4` by default; a `WritePc`
//!   effect overrides that for the current instruction.
//! - Branches guard a `WritePc` under [`Op::RunIf`]; only the taken
//!   case appears, the fall-through is the default advance.
//! - Comparison expressions evaluate to 0 or 1 at operand width, so
//!   SLT-family results are written back without conversion.
//! - Register shift amounts are masked with `And(rhs, 31)` here, not
//!   in the expression evaluator, mirroring the ISA's use of the low
//!   five bits only.

use std::fmt;

use crate::expr::{BinOp, BvExpr, Width};

use super::decode::{BranchCond, IAluOp, Instr, LoadKind, RAluOp, StoreKind};

/// Memory access granularity.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ByteSize {
    Byte,
    Half,
    Word,
}

impl ByteSize {
    pub fn bytes(self) -> u32 {
        match self {
            ByteSize::Byte => 1,
            ByteSize::Half => 2,
            ByteSize::Word => 4,
        }
    }

    pub fn bits(self) -> u32 {
        self.bytes() * 8
    }
}

/// A binding slot holding the 32-bit result of an earlier effect in
/// the same instruction's sequence.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Slot(pub u8);

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Expression over binding slots.
pub type SlotExpr = BvExpr<Slot>;

/// One effect operation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Op {
    /// Bind the value of register `reg` to `dest`.
    ReadRegister { reg: u8, dest: Slot },
    /// Store the expression's value into register `reg`.
    WriteRegister { reg: u8, value: SlotExpr },
    /// Load `size` bytes at the address expression, extend to 32 bits
    /// (sign extension if `signed`), and bind the result to `dest`.
    LoadMem {
        size: ByteSize,
        signed: bool,
        addr: SlotExpr,
        dest: Slot,
    },
    /// Store the low `size` bytes of `value` at the address expression.
    StoreMem {
        size: ByteSize,
        addr: SlotExpr,
        value: SlotExpr,
    },
    /// Bind the current instruction's address to `dest`.
    ReadPc { dest: Slot },
    /// Set the next program counter.
    WritePc { target: SlotExpr },
    /// Run the nested sequence only when `cond` evaluates non-zero.
    RunIf { cond: SlotExpr, body: Vec<Op> },
    /// Environment call.
    Ecall,
    /// Breakpoint.
    Ebreak,
}

/// The effect sequence denoting one instruction, together with the
/// number of binding slots it uses.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Semantics {
    pub ops: Vec<Op>,
    pub slots: u8,
}

struct SeqBuilder {
    ops: Vec<Op>,
    next_slot: u8,
}

impl SeqBuilder {
    fn new() -> Self {
        SeqBuilder { ops: Vec::new(), next_slot: 0 }
    }

    fn alloc(&mut self) -> Slot {
        let s = Slot(self.next_slot);
        self.next_slot += 1;
        s
    }

    fn read_reg(&mut self, reg: u8) -> Slot {
        let dest = self.alloc();
        self.ops.push(Op::ReadRegister { reg, dest });
        dest
    }

    fn read_pc(&mut self) -> Slot {
        let dest = self.alloc();
        self.ops.push(Op::ReadPc { dest });
        dest
    }

    fn load(&mut self, size: ByteSize, signed: bool, addr: SlotExpr) -> Slot {
        let dest = self.alloc();
        self.ops.push(Op::LoadMem { size, signed, addr, dest });
        dest
    }

    fn write_reg(&mut self, reg: u8, value: SlotExpr) {
        self.ops.push(Op::WriteRegister { reg, value });
    }

    fn store(&mut self, size: ByteSize, addr: SlotExpr, value: SlotExpr) {
        self.ops.push(Op::StoreMem { size, addr, value });
    }

    fn write_pc(&mut self, target: SlotExpr) {
        self.ops.push(Op::WritePc { target });
    }

    fn run_if(&mut self, cond: SlotExpr, body: impl FnOnce(&mut SeqBuilder)) {
        let mut sub = SeqBuilder { ops: Vec::new(), next_slot: self.next_slot };
        body(&mut sub);
        self.next_slot = sub.next_slot;
        self.ops.push(Op::RunIf { cond, body: sub.ops });
    }

    fn finish(self) -> Semantics {
        Semantics { ops: self.ops, slots: self.next_slot }
    }
}

fn slot(s: Slot) -> SlotExpr {
    BvExpr::leaf(s)
}

fn imm32(v: i32) -> SlotExpr {
    BvExpr::int(Width::W32, v as u32 as u64)
}

/// Denote one instruction as its effect sequence.
pub fn semantics_of(instr: &Instr) -> Semantics {
    let mut b = SeqBuilder::new();
    match *instr {
        Instr::Lui { rd, imm } => {
            b.write_reg(rd, BvExpr::int(Width::W32, u64::from(imm)));
        }
        Instr::Auipc { rd, imm } => {
            let pc = b.read_pc();
            b.write_reg(rd, slot(pc).add(BvExpr::int(Width::W32, u64::from(imm))));
        }
        Instr::Jal { rd, imm } => {
            let pc = b.read_pc();
            b.write_reg(rd, slot(pc).add(imm32(4)));
            b.write_pc(slot(pc).add(imm32(imm)));
        }
        Instr::Jalr { rd, rs1, imm } => {
            let base = b.read_reg(rs1);
            let pc = b.read_pc();
            b.write_reg(rd, slot(pc).add(imm32(4)));
            b.write_pc(slot(base).add(imm32(imm)).and(imm32(-2)));
        }
        Instr::Branch { cond, rs1, rs2, imm } => {
            let a = b.read_reg(rs1);
            let c = b.read_reg(rs2);
            let op = match cond {
                BranchCond::Eq => BinOp::Eq,
                BranchCond::Ne => BinOp::Neq,
                BranchCond::Lt => BinOp::SltS,
                BranchCond::Ge => BinOp::SgeS,
                BranchCond::Ltu => BinOp::SltU,
                BranchCond::Geu => BinOp::SgeU,
            };
            b.run_if(BvExpr::bin(op, slot(a), slot(c)), |b| {
                let pc = b.read_pc();
                b.write_pc(slot(pc).add(imm32(imm)));
            });
        }
        Instr::Load { kind, rd, rs1, imm } => {
            let (size, signed) = match kind {
                LoadKind::Lb => (ByteSize::Byte, true),
                LoadKind::Lbu => (ByteSize::Byte, false),
                LoadKind::Lh => (ByteSize::Half, true),
                LoadKind::Lhu => (ByteSize::Half, false),
                LoadKind::Lw => (ByteSize::Word, true),
            };
            let base = b.read_reg(rs1);
            let value = b.load(size, signed, slot(base).add(imm32(imm)));
            b.write_reg(rd, slot(value));
        }
        Instr::Store { kind, rs1, rs2, imm } => {
            let size = match kind {
                StoreKind::Sb => ByteSize::Byte,
                StoreKind::Sh => ByteSize::Half,
                StoreKind::Sw => ByteSize::Word,
            };
            let base = b.read_reg(rs1);
            let value = b.read_reg(rs2);
            b.store(size, slot(base).add(imm32(imm)), slot(value));
        }
        Instr::OpImm { op, rd, rs1, imm } => {
            let a = b.read_reg(rs1);
            let rhs = imm32(imm);
            let bin = match op {
                IAluOp::Addi => BinOp::Add,
                IAluOp::Slti => BinOp::SltS,
                IAluOp::Sltiu => BinOp::SltU,
                IAluOp::Xori => BinOp::Xor,
                IAluOp::Ori => BinOp::Or,
                IAluOp::Andi => BinOp::And,
                IAluOp::Slli => BinOp::Sll,
                IAluOp::Srli => BinOp::Srl,
                IAluOp::Srai => BinOp::Sra,
            };
            b.write_reg(rd, BvExpr::bin(bin, slot(a), rhs));
        }
        Instr::OpReg { op, rd, rs1, rs2 } => {
            let a = b.read_reg(rs1);
            let c = b.read_reg(rs2);
            let value = match op {
                RAluOp::Add => BvExpr::bin(BinOp::Add, slot(a), slot(c)),
                RAluOp::Sub => BvExpr::bin(BinOp::Sub, slot(a), slot(c)),
                RAluOp::Slt => BvExpr::bin(BinOp::SltS, slot(a), slot(c)),
                RAluOp::Sltu => BvExpr::bin(BinOp::SltU, slot(a), slot(c)),
                RAluOp::Xor => BvExpr::bin(BinOp::Xor, slot(a), slot(c)),
                RAluOp::Or => BvExpr::bin(BinOp::Or, slot(a), slot(c)),
                RAluOp::And => BvExpr::bin(BinOp::And, slot(a), slot(c)),
                RAluOp::Sll | RAluOp::Srl | RAluOp::Sra => {
                    let amount = slot(c).and(imm32(31));
                    let bin = match op {
                        RAluOp::Sll => BinOp::Sll,
                        RAluOp::Srl => BinOp::Srl,
                        _ => BinOp::Sra,
                    };
                    BvExpr::bin(bin, slot(a), amount)
                }
                RAluOp::Mul => BvExpr::bin(BinOp::Mul, slot(a), slot(c)),
                RAluOp::Mulh => BvExpr::bin(BinOp::MulhSS, slot(a), slot(c)),
                RAluOp::Mulhsu => BvExpr::bin(BinOp::MulhSU, slot(a), slot(c)),
                RAluOp::Mulhu => BvExpr::bin(BinOp::MulhUU, slot(a), slot(c)),
                RAluOp::Div => BvExpr::bin(BinOp::DivS, slot(a), slot(c)),
                RAluOp::Divu => BvExpr::bin(BinOp::DivU, slot(a), slot(c)),
                RAluOp::Rem => BvExpr::bin(BinOp::RemS, slot(a), slot(c)),
                RAluOp::Remu => BvExpr::bin(BinOp::RemU, slot(a), slot(c)),
            };
            b.write_reg(rd, value);
        }
        // An in-order single-hart interpreter gives fences no work.
        Instr::Fence => {}
        Instr::Ecall => b.ops.push(Op::Ecall),
        Instr::Ebreak => b.ops.push(Op::Ebreak),
    }
    b.finish()
}

fn fmt_ops(ops: &[Op], indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for op in ops {
        write!(f, "{:indent$}", "", indent = indent)?;
        match op {
            Op::ReadRegister { reg, dest } => writeln!(f, "{dest} <- read-reg x{reg}")?,
            Op::WriteRegister { reg, value } => writeln!(f, "write-reg x{reg} {value}")?,
            Op::LoadMem { size, signed, addr, dest } => {
                let ext = if *signed { "sext" } else { "zext" };
                writeln!(f, "{dest} <- load{} {ext} {addr}", size.bytes())?
            }
            Op::StoreMem { size, addr, value } => {
                writeln!(f, "store{} {addr} {value}", size.bytes())?
            }
            Op::ReadPc { dest } => writeln!(f, "{dest} <- read-pc")?,
            Op::WritePc { target } => writeln!(f, "write-pc {target}")?,
            Op::RunIf { cond, body } => {
                writeln!(f, "run-if {cond}")?;
                fmt_ops(body, indent + 2, f)?;
            }
            Op::Ecall => writeln!(f, "ecall")?,
            Op::Ebreak => writeln!(f, "ebreak")?,
        }
    }
    Ok(())
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ops(&self.ops, 0, f)
    }
}
