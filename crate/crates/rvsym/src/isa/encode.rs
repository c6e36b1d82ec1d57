//! RV32IM instruction encoder, the inverse of [`decode`](super::decode).
//!
//! Used by tests to round-trip randomly generated instructions and by
//! the corpus tooling. Operand values must be in range (register
//! numbers below 32, immediates representable in their field); out of
//! range values are masked the same way an assembler field would be.

use super::decode::{BranchCond, IAluOp, Instr, LoadKind, RAluOp, StoreKind};

fn r_type(funct7: u32, rs2: u8, rs1: u8, funct3: u32, rd: u8, opcode: u32) -> u32 {
    (funct7 << 25)
        | (u32::from(rs2 & 0x1F) << 20)
        | (u32::from(rs1 & 0x1F) << 15)
        | (funct3 << 12)
        | (u32::from(rd & 0x1F) << 7)
        | opcode
}

fn i_type(imm: i32, rs1: u8, funct3: u32, rd: u8, opcode: u32) -> u32 {
    ((imm as u32 & 0xFFF) << 20)
        | (u32::from(rs1 & 0x1F) << 15)
        | (funct3 << 12)
        | (u32::from(rd & 0x1F) << 7)
        | opcode
}

fn s_type(imm: i32, rs2: u8, rs1: u8, funct3: u32, opcode: u32) -> u32 {
    let imm = imm as u32;
    ((imm >> 5 & 0x7F) << 25)
        | (u32::from(rs2 & 0x1F) << 20)
        | (u32::from(rs1 & 0x1F) << 15)
        | (funct3 << 12)
        | ((imm & 0x1F) << 7)
        | opcode
}

fn b_type(imm: i32, rs2: u8, rs1: u8, funct3: u32) -> u32 {
    let imm = imm as u32;
    ((imm >> 12 & 0x1) << 31)
        | ((imm >> 5 & 0x3F) << 25)
        | (u32::from(rs2 & 0x1F) << 20)
        | (u32::from(rs1 & 0x1F) << 15)
        | (funct3 << 12)
        | ((imm >> 1 & 0xF) << 8)
        | ((imm >> 11 & 0x1) << 7)
        | 0b1100011
}

fn j_type(imm: i32, rd: u8) -> u32 {
    let imm = imm as u32;
    ((imm >> 20 & 0x1) << 31)
        | ((imm >> 1 & 0x3FF) << 21)
        | ((imm >> 11 & 0x1) << 20)
        | ((imm >> 12 & 0xFF) << 12)
        | (u32::from(rd & 0x1F) << 7)
        | 0b1101111
}

/// Encode an instruction back into its 32-bit word.
pub fn encode(instr: &Instr) -> u32 {
    match *instr {
        Instr::Lui { rd, imm } => (imm & 0xFFFF_F000) | (u32::from(rd & 0x1F) << 7) | 0b0110111,
        Instr::Auipc { rd, imm } => (imm & 0xFFFF_F000) | (u32::from(rd & 0x1F) << 7) | 0b0010111,
        Instr::Jal { rd, imm } => j_type(imm, rd),
        Instr::Jalr { rd, rs1, imm } => i_type(imm, rs1, 0b000, rd, 0b1100111),
        Instr::Branch { cond, rs1, rs2, imm } => {
            let funct3 = match cond {
                BranchCond::Eq => 0b000,
                BranchCond::Ne => 0b001,
                BranchCond::Lt => 0b100,
                BranchCond::Ge => 0b101,
                BranchCond::Ltu => 0b110,
                BranchCond::Geu => 0b111,
            };
            b_type(imm, rs2, rs1, funct3)
        }
        Instr::Load { kind, rd, rs1, imm } => {
            let funct3 = match kind {
                LoadKind::Lb => 0b000,
                LoadKind::Lh => 0b001,
                LoadKind::Lw => 0b010,
                LoadKind::Lbu => 0b100,
                LoadKind::Lhu => 0b101,
            };
            i_type(imm, rs1, funct3, rd, 0b0000011)
        }
        Instr::Store { kind, rs1, rs2, imm } => {
            let funct3 = match kind {
                StoreKind::Sb => 0b000,
                StoreKind::Sh => 0b001,
                StoreKind::Sw => 0b010,
            };
            s_type(imm, rs2, rs1, funct3, 0b0100011)
        }
        Instr::OpImm { op, rd, rs1, imm } => {
            let (funct3, imm) = match op {
                IAluOp::Addi => (0b000, imm),
                IAluOp::Slti => (0b010, imm),
                IAluOp::Sltiu => (0b011, imm),
                IAluOp::Xori => (0b100, imm),
                IAluOp::Ori => (0b110, imm),
                IAluOp::Andi => (0b111, imm),
                IAluOp::Slli => (0b001, imm & 0x1F),
                IAluOp::Srli => (0b101, imm & 0x1F),
                IAluOp::Srai => (0b101, (imm & 0x1F) | 0x400),
            };
            i_type(imm, rs1, funct3, rd, 0b0010011)
        }
        Instr::OpReg { op, rd, rs1, rs2 } => {
            let (funct7, funct3) = match op {
                RAluOp::Add => (0b0000000, 0b000),
                RAluOp::Sub => (0b0100000, 0b000),
                RAluOp::Sll => (0b0000000, 0b001),
                RAluOp::Slt => (0b0000000, 0b010),
                RAluOp::Sltu => (0b0000000, 0b011),
                RAluOp::Xor => (0b0000000, 0b100),
                RAluOp::Srl => (0b0000000, 0b101),
                RAluOp::Sra => (0b0100000, 0b101),
                RAluOp::Or => (0b0000000, 0b110),
                RAluOp::And => (0b0000000, 0b111),
                RAluOp::Mul => (0b0000001, 0b000),
                RAluOp::Mulh => (0b0000001, 0b001),
                RAluOp::Mulhsu => (0b0000001, 0b010),
                RAluOp::Mulhu => (0b0000001, 0b011),
                RAluOp::Div => (0b0000001, 0b100),
                RAluOp::Divu => (0b0000001, 0b101),
                RAluOp::Rem => (0b0000001, 0b110),
                RAluOp::Remu => (0b0000001, 0b111),
            };
            r_type(funct7, rs2, rs1, funct3, rd, 0b0110011)
        }
        Instr::Fence => 0x0FF0_000F,
        Instr::Ecall => 0x0000_0073,
        Instr::Ebreak => 0x0010_0073,
    }
}

#[cfg(test)]
mod tests {
    use super::super::decode::decode;
    use super::*;

    #[test]
    fn round_trips_known_words() {
        for word in [
            0x0050_0093u32, // addi x1, x0, 5
            0x1234_52B7,    // lui x5, 0x12345
            0xFEB5_08E3,    // beq x10, x11, -16
            0x0010_00EF,    // jal x1, 2048
            0x02C1_2423,    // sw x12, 40(x2)
            0x0252_21B3,    // mulhsu x3, x4, x5
            0x4010_D093,    // srai x1, x1, 1
            0x0000_0073,    // ecall
        ] {
            let instr = decode(word).unwrap();
            assert_eq!(encode(&instr), word, "{instr}");
        }
    }

    #[test]
    fn fence_round_trips_modulo_operands() {
        // Decoding collapses fence operand sets; re-encoding yields the
        // canonical full-fence word, which must still decode to Fence.
        let fence = decode(0x0330_000F).unwrap();
        assert_eq!(fence, Instr::Fence);
        assert_eq!(decode(encode(&fence)).unwrap(), Instr::Fence);
    }
}
