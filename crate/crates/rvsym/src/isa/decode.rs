//! RV32IM instruction word decoder.

use std::fmt;

use thiserror::Error;

/// Branch comparison selector (B-type).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BranchCond {
    Eq,
    Ne,
    Lt,
    Ge,
    Ltu,
    Geu,
}

/// Load flavour: access size plus signedness of the extension.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LoadKind {
    Lb,
    Lh,
    Lw,
    Lbu,
    Lhu,
}

/// Store flavour.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StoreKind {
    Sb,
    Sh,
    Sw,
}

/// Register-immediate ALU operation (I-type, including shifts).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IAluOp {
    Addi,
    Slti,
    Sltiu,
    Xori,
    Ori,
    Andi,
    Slli,
    Srli,
    Srai,
}

/// Register-register ALU operation (R-type, base and M extension).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RAluOp {
    Add,
    Sub,
    Sll,
    Slt,
    Sltu,
    Xor,
    Srl,
    Sra,
    Or,
    And,
    Mul,
    Mulh,
    Mulhsu,
    Mulhu,
    Div,
    Divu,
    Rem,
    Remu,
}

/// A decoded RV32IM instruction.
///
/// Immediates are stored sign-extended. For `Lui` and `Auipc` the
/// immediate is the full 32-bit value with the low twelve bits zero.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Instr {
    Lui { rd: u8, imm: u32 },
    Auipc { rd: u8, imm: u32 },
    Jal { rd: u8, imm: i32 },
    Jalr { rd: u8, rs1: u8, imm: i32 },
    Branch { cond: BranchCond, rs1: u8, rs2: u8, imm: i32 },
    Load { kind: LoadKind, rd: u8, rs1: u8, imm: i32 },
    Store { kind: StoreKind, rs1: u8, rs2: u8, imm: i32 },
    OpImm { op: IAluOp, rd: u8, rs1: u8, imm: i32 },
    OpReg { op: RAluOp, rd: u8, rs1: u8, rs2: u8 },
    Fence,
    Ecall,
    Ebreak,
}

#[derive(Error, Clone, Copy, PartialEq, Eq, Debug)]
pub enum DecodeError {
    #[error("compressed encoding {word:#010x} (RVC not supported)")]
    Compressed { word: u32 },
    #[error("illegal instruction {word:#010x}")]
    Illegal { word: u32 },
}

fn rd(word: u32) -> u8 {
    ((word >> 7) & 0x1F) as u8
}

fn rs1(word: u32) -> u8 {
    ((word >> 15) & 0x1F) as u8
}

fn rs2(word: u32) -> u8 {
    ((word >> 20) & 0x1F) as u8
}

fn funct3(word: u32) -> u32 {
    (word >> 12) & 0x7
}

fn funct7(word: u32) -> u32 {
    word >> 25
}

fn imm_i(word: u32) -> i32 {
    (word as i32) >> 20
}

fn imm_s(word: u32) -> i32 {
    (((word & 0xFE00_0000) as i32) >> 20) | ((word >> 7) & 0x1F) as i32
}

fn imm_b(word: u32) -> i32 {
    (((word & 0x8000_0000) as i32) >> 19)
        | (((word >> 7) & 0x1) << 11) as i32
        | (((word >> 25) & 0x3F) << 5) as i32
        | (((word >> 8) & 0xF) << 1) as i32
}

fn imm_u(word: u32) -> u32 {
    word & 0xFFFF_F000
}

fn imm_j(word: u32) -> i32 {
    (((word & 0x8000_0000) as i32) >> 11)
        | (word & 0x000F_F000) as i32
        | (((word >> 20) & 0x1) << 11) as i32
        | (((word >> 21) & 0x3FF) << 1) as i32
}

/// Decode one 32-bit instruction word.
///
/// Compressed encodings (low two bits not `11`) and any word outside
/// the RV32IM base set are rejected; decoding never panics.
pub fn decode(word: u32) -> Result<Instr, DecodeError> {
    if word & 0b11 != 0b11 {
        return Err(DecodeError::Compressed { word });
    }
    let illegal = Err(DecodeError::Illegal { word });
    let opcode = word & 0x7F;
    match opcode {
        0b0110111 => Ok(Instr::Lui { rd: rd(word), imm: imm_u(word) }),
        0b0010111 => Ok(Instr::Auipc { rd: rd(word), imm: imm_u(word) }),
        0b1101111 => Ok(Instr::Jal { rd: rd(word), imm: imm_j(word) }),
        0b1100111 => {
            if funct3(word) != 0 {
                return illegal;
            }
            Ok(Instr::Jalr { rd: rd(word), rs1: rs1(word), imm: imm_i(word) })
        }
        0b1100011 => {
            let cond = match funct3(word) {
                0b000 => BranchCond::Eq,
                0b001 => BranchCond::Ne,
                0b100 => BranchCond::Lt,
                0b101 => BranchCond::Ge,
                0b110 => BranchCond::Ltu,
                0b111 => BranchCond::Geu,
                _ => return illegal,
            };
            Ok(Instr::Branch { cond, rs1: rs1(word), rs2: rs2(word), imm: imm_b(word) })
        }
        0b0000011 => {
            let kind = match funct3(word) {
                0b000 => LoadKind::Lb,
                0b001 => LoadKind::Lh,
                0b010 => LoadKind::Lw,
                0b100 => LoadKind::Lbu,
                0b101 => LoadKind::Lhu,
                _ => return illegal,
            };
            Ok(Instr::Load { kind, rd: rd(word), rs1: rs1(word), imm: imm_i(word) })
        }
        0b0100011 => {
            let kind = match funct3(word) {
                0b000 => StoreKind::Sb,
                0b001 => StoreKind::Sh,
                0b010 => StoreKind::Sw,
                _ => return illegal,
            };
            Ok(Instr::Store { kind, rs1: rs1(word), rs2: rs2(word), imm: imm_s(word) })
        }
        0b0010011 => {
            let (op, imm) = match funct3(word) {
                0b000 => (IAluOp::Addi, imm_i(word)),
                0b010 => (IAluOp::Slti, imm_i(word)),
                0b011 => (IAluOp::Sltiu, imm_i(word)),
                0b100 => (IAluOp::Xori, imm_i(word)),
                0b110 => (IAluOp::Ori, imm_i(word)),
                0b111 => (IAluOp::Andi, imm_i(word)),
                0b001 => {
                    if funct7(word) != 0 {
                        return illegal;
                    }
                    (IAluOp::Slli, rs2(word) as i32)
                }
                0b101 => match funct7(word) {
                    0b0000000 => (IAluOp::Srli, rs2(word) as i32),
                    0b0100000 => (IAluOp::Srai, rs2(word) as i32),
                    _ => return illegal,
                },
                _ => unreachable!(),
            };
            Ok(Instr::OpImm { op, rd: rd(word), rs1: rs1(word), imm })
        }
        0b0110011 => {
            let op = match (funct7(word), funct3(word)) {
                (0b0000000, 0b000) => RAluOp::Add,
                (0b0100000, 0b000) => RAluOp::Sub,
                (0b0000000, 0b001) => RAluOp::Sll,
                (0b0000000, 0b010) => RAluOp::Slt,
                (0b0000000, 0b011) => RAluOp::Sltu,
                (0b0000000, 0b100) => RAluOp::Xor,
                (0b0000000, 0b101) => RAluOp::Srl,
                (0b0100000, 0b101) => RAluOp::Sra,
                (0b0000000, 0b110) => RAluOp::Or,
                (0b0000000, 0b111) => RAluOp::And,
                (0b0000001, 0b000) => RAluOp::Mul,
                (0b0000001, 0b001) => RAluOp::Mulh,
                (0b0000001, 0b010) => RAluOp::Mulhsu,
                (0b0000001, 0b011) => RAluOp::Mulhu,
                (0b0000001, 0b100) => RAluOp::Div,
                (0b0000001, 0b101) => RAluOp::Divu,
                (0b0000001, 0b110) => RAluOp::Rem,
                (0b0000001, 0b111) => RAluOp::Remu,
                _ => return illegal,
            };
            Ok(Instr::OpReg { op, rd: rd(word), rs1: rs1(word), rs2: rs2(word) })
        }
        0b0001111 => {
            if funct3(word) != 0 {
                return illegal;
            }
            Ok(Instr::Fence)
        }
        0b1110011 => {
            if funct3(word) != 0 || rd(word) != 0 || rs1(word) != 0 {
                return illegal;
            }
            match word >> 20 {
                0 => Ok(Instr::Ecall),
                1 => Ok(Instr::Ebreak),
                _ => illegal,
            }
        }
        _ => illegal,
    }
}

impl fmt::Display for Instr {
    /// Canonical assembler syntax with numeric registers; PC-relative
    /// immediates (branches, JAL) print as byte offsets.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Instr::Lui { rd, imm } => write!(f, "lui x{rd}, {}", imm >> 12),
            Instr::Auipc { rd, imm } => write!(f, "auipc x{rd}, {}", imm >> 12),
            Instr::Jal { rd, imm } => write!(f, "jal x{rd}, {imm}"),
            Instr::Jalr { rd, rs1, imm } => write!(f, "jalr x{rd}, {imm}(x{rs1})"),
            Instr::Branch { cond, rs1, rs2, imm } => {
                let name = match cond {
                    BranchCond::Eq => "beq",
                    BranchCond::Ne => "bne",
                    BranchCond::Lt => "blt",
                    BranchCond::Ge => "bge",
                    BranchCond::Ltu => "bltu",
                    BranchCond::Geu => "bgeu",
                };
                write!(f, "{name} x{rs1}, x{rs2}, {imm}")
            }
            Instr::Load { kind, rd, rs1, imm } => {
                let name = match kind {
                    LoadKind::Lb => "lb",
                    LoadKind::Lh => "lh",
                    LoadKind::Lw => "lw",
                    LoadKind::Lbu => "lbu",
                    LoadKind::Lhu => "lhu",
                };
                write!(f, "{name} x{rd}, {imm}(x{rs1})")
            }
            Instr::Store { kind, rs1, rs2, imm } => {
                let name = match kind {
                    StoreKind::Sb => "sb",
                    StoreKind::Sh => "sh",
                    StoreKind::Sw => "sw",
                };
                write!(f, "{name} x{rs2}, {imm}(x{rs1})")
            }
            Instr::OpImm { op, rd, rs1, imm } => {
                let name = match op {
                    IAluOp::Addi => "addi",
                    IAluOp::Slti => "slti",
                    IAluOp::Sltiu => "sltiu",
                    IAluOp::Xori => "xori",
                    IAluOp::Ori => "ori",
                    IAluOp::Andi => "andi",
                    IAluOp::Slli => "slli",
                    IAluOp::Srli => "srli",
                    IAluOp::Srai => "srai",
                };
                write!(f, "{name} x{rd}, x{rs1}, {imm}")
            }
            Instr::OpReg { op, rd, rs1, rs2 } => {
                let name = match op {
                    RAluOp::Add => "add",
                    RAluOp::Sub => "sub",
                    RAluOp::Sll => "sll",
                    RAluOp::Slt => "slt",
                    RAluOp::Sltu => "sltu",
                    RAluOp::Xor => "xor",
                    RAluOp::Srl => "srl",
                    RAluOp::Sra => "sra",
                    RAluOp::Or => "or",
                    RAluOp::And => "and",
                    RAluOp::Mul => "mul",
                    RAluOp::Mulh => "mulh",
                    RAluOp::Mulhsu => "mulhsu",
                    RAluOp::Mulhu => "mulhu",
                    RAluOp::Div => "div",
                    RAluOp::Divu => "divu",
                    RAluOp::Rem => "rem",
                    RAluOp::Remu => "remu",
                };
                write!(f, "{name} x{rd}, x{rs1}, x{rs2}")
            }
            Instr::Fence => write!(f, "fence"),
            Instr::Ecall => write!(f, "ecall"),
            Instr::Ebreak => write!(f, "ebreak"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_words() {
        // addi x1, x0, 5
        assert_eq!(
            decode(0x0050_0093).unwrap(),
            Instr::OpImm { op: IAluOp::Addi, rd: 1, rs1: 0, imm: 5 }
        );
        // lui x5, 0x12345
        assert_eq!(
            decode(0x1234_52B7).unwrap(),
            Instr::Lui { rd: 5, imm: 0x1234_5000 }
        );
        // beq x10, x11, -16
        assert_eq!(
            decode(0xFEB5_08E3).unwrap(),
            Instr::Branch { cond: BranchCond::Eq, rs1: 10, rs2: 11, imm: -16 }
        );
        // jal x1, 2048
        assert_eq!(decode(0x0010_00EF).unwrap(), Instr::Jal { rd: 1, imm: 2048 });
        // sw x12, 40(x2)
        assert_eq!(
            decode(0x02C1_2423).unwrap(),
            Instr::Store { kind: StoreKind::Sw, rs1: 2, rs2: 12, imm: 40 }
        );
        // mulhsu x3, x4, x5
        assert_eq!(
            decode(0x0252_21B3).unwrap(),
            Instr::OpReg { op: RAluOp::Mulhsu, rd: 3, rs1: 4, rs2: 5 }
        );
        assert_eq!(decode(0x0000_0073).unwrap(), Instr::Ecall);
        assert_eq!(decode(0x0010_0073).unwrap(), Instr::Ebreak);
    }

    #[test]
    fn rejects_bad_words() {
        assert!(matches!(decode(0x0000_0001), Err(DecodeError::Compressed { .. })));
        assert!(matches!(decode(0xFFFF_FFFF), Err(DecodeError::Illegal { .. })));
        assert!(matches!(decode(0x0000_0000), Err(DecodeError::Compressed { .. })));
        // branch funct3 = 010 is unassigned
        assert!(matches!(decode(0x0000_2063), Err(DecodeError::Illegal { .. })));
        // slli with funct7 = 0100000
        assert!(matches!(decode(0x4000_1013), Err(DecodeError::Illegal { .. })));
        // csrrw (Zicsr) is outside RV32IM
        assert!(matches!(decode(0x3000_9073), Err(DecodeError::Illegal { .. })));
    }
}
