//! Reference RV32IM interpreter used as a differential oracle.
//!
//! Kept deliberately independent of the library under test: the
//! instruction words are decoded inline, state is plain integers, and
//! the ELF loader is its own parser. A defect in the engine therefore
//! surfaces as a state mismatch instead of being mirrored here.
//!
//! Conventions shared with the engine by contract: sparse memory reads
//! default to zero, the PC stays on the ECALL/fault instruction, and a
//! step is counted once an instruction starts executing.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use rvsym::engine::{run, ExitStatus, RunLimits};
use rvsym::machine::MachineState;
use rvsym::solver::{Model, Session, SolverConfig};

pub struct Oracle {
    pub regs: [u32; 32],
    pub pc: u32,
    pub mem: HashMap<u32, u8>,
    pub output: Vec<u8>,
    pub steps: u64,
}

#[derive(PartialEq, Eq, Debug)]
pub enum OracleExit {
    Exited(u32),
    Trap(String),
    StepLimit,
}

fn sext(value: u32, bits: u32) -> u32 {
    let shift = 32 - bits;
    (((value << shift) as i32) >> shift) as u32
}

pub const STACK_TOP: u32 = 0x8000_0000;

/// Every concrete guest program in the corpus. Names map to
/// `benchmarks/bin/<name>.elf`; sources live next to them.
pub const GUESTS: &[&str] = &[
    "d01_arith",
    "d02_shift_imm",
    "d03_shift_reg",
    "d04_mul",
    "d05_div",
    "d06_slt",
    "d07_lui_auipc",
    "d08_jal_jalr",
    "d09_branches",
    "d10_loads",
    "d11_stores",
    "d12_misaligned",
    "d13_x0",
    "d14_fence",
    "d15_loop_sum",
    "d16_memcpy",
    "d17_stack",
    "d18_putchar",
    "d19_pcrel",
    "d20_imm_edge",
    "d21_fib",
    "d22_recursion",
    "d23_bitops",
    "d24_sort_fixed",
];

pub fn guest_elf(name: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("benchmarks/bin")
        .join(format!("{name}.elf"));
    std::fs::read(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

/// Run `elf` concretely on both the engine and the oracle and demand
/// bit-exact agreement on exit status, step count, PC, registers,
/// output bytes, and every mapped memory byte.
pub fn compare_with_engine(name: &str, elf: &[u8]) -> Result<(), String> {
    let fail = |what: String| Err(format!("{name}: {what}"));

    let mut state = MachineState::new(false);
    state.load_elf(elf, STACK_TOP).map_err(|e| format!("{name}: engine loader: {e}"))?;
    let mut session = Session::new(SolverConfig::default());
    let engine = run(state, &mut session, &Model::new(), RunLimits::default());

    let mut oracle = Oracle::load(elf, STACK_TOP).map_err(|e| format!("{name}: oracle loader: {e}"))?;
    let oracle_exit = oracle.run(RunLimits::default().step_limit);

    match (engine.exit, &oracle_exit) {
        (ExitStatus::Exited(a), OracleExit::Exited(b)) if a == *b => {}
        (e, o) => return fail(format!("exit mismatch: engine {e:?}, oracle {o:?}")),
    }
    if engine.steps != oracle.steps {
        return fail(format!("steps: engine {}, oracle {}", engine.steps, oracle.steps));
    }
    if engine.state.pc != oracle.pc {
        return fail(format!("pc: engine {:#x}, oracle {:#x}", engine.state.pc, oracle.pc));
    }
    for r in 0..32 {
        let e = engine.state.reg(r).concrete;
        let o = oracle.regs[usize::from(r)];
        if e != o {
            return fail(format!("x{r}: engine {e:#010x}, oracle {o:#010x}"));
        }
    }
    if engine.output != oracle.output {
        return fail(format!(
            "output: engine {:?}, oracle {:?}",
            String::from_utf8_lossy(&engine.output),
            String::from_utf8_lossy(&oracle.output)
        ));
    }
    let engine_mem: BTreeMap<u32, u8> =
        engine.state.mem.iter().map(|(a, b)| (a, b.concrete)).collect();
    let oracle_mem: BTreeMap<u32, u8> = oracle.mem.into_iter().collect();
    if engine_mem != oracle_mem {
        let mut diffs = engine_mem
            .iter()
            .filter(|(a, v)| oracle_mem.get(a) != Some(v))
            .map(|(a, v)| format!("{a:#010x}: engine {v:#04x} oracle {:?}", oracle_mem.get(a)))
            .chain(
                oracle_mem
                    .iter()
                    .filter(|(a, _)| !engine_mem.contains_key(a))
                    .map(|(a, v)| format!("{a:#010x}: engine unmapped oracle {v:#04x}")),
            );
        return fail(format!("memory: first diff {}", diffs.next().unwrap()));
    }
    Ok(())
}

impl Oracle {
    pub fn load(elf: &[u8], stack_top: u32) -> Result<Oracle, String> {
        let half = |o: usize| u16::from_le_bytes(elf[o..o + 2].try_into().unwrap()) as u32;
        let word = |o: usize| u32::from_le_bytes(elf[o..o + 4].try_into().unwrap());
        if elf.len() < 52 || &elf[..4] != b"\x7fELF" {
            return Err("not an ELF image".into());
        }
        if elf[4] != 1 || elf[5] != 1 {
            return Err("not little-endian ELF32".into());
        }
        if half(18) != 243 {
            return Err("not a RISC-V image".into());
        }
        let entry = word(24);
        let phoff = word(28) as usize;
        let phentsize = half(42) as usize;
        let phnum = half(44) as usize;
        let mut mem = HashMap::new();
        for i in 0..phnum {
            let p = phoff + i * phentsize;
            if word(p) != 1 {
                continue;
            }
            let offset = word(p + 4) as usize;
            let vaddr = word(p + 8);
            let filesz = word(p + 16) as usize;
            let memsz = word(p + 20) as usize;
            for j in 0..memsz {
                let byte = if j < filesz { elf[offset + j] } else { 0 };
                mem.insert(vaddr.wrapping_add(j as u32), byte);
            }
        }
        let mut regs = [0u32; 32];
        regs[2] = stack_top;
        Ok(Oracle { regs, pc: entry, mem, output: Vec::new(), steps: 0 })
    }

    fn rd(&self, addr: u32, bytes: u32) -> u32 {
        (0..bytes).fold(0, |acc, i| {
            acc | (*self.mem.get(&addr.wrapping_add(i)).unwrap_or(&0) as u32) << (8 * i)
        })
    }

    fn wr(&mut self, addr: u32, bytes: u32, value: u32) {
        for i in 0..bytes {
            self.mem.insert(addr.wrapping_add(i), (value >> (8 * i)) as u8);
        }
    }

    fn wreg(&mut self, r: usize, value: u32) {
        if r != 0 {
            self.regs[r] = value;
        }
    }

    pub fn run(&mut self, max_steps: u64) -> OracleExit {
        loop {
            if self.steps >= max_steps {
                return OracleExit::StepLimit;
            }
            self.steps += 1;
            if !self.pc.is_multiple_of(4) {
                return OracleExit::Trap(format!("misaligned pc {:#x}", self.pc));
            }
            let w = self.rd(self.pc, 4);
            if w & 3 != 3 {
                return OracleExit::Trap(format!("compressed or zero word {w:#010x}"));
            }
            let rd = ((w >> 7) & 31) as usize;
            let rs1 = ((w >> 15) & 31) as usize;
            let rs2 = ((w >> 20) & 31) as usize;
            let f3 = (w >> 12) & 7;
            let f7 = w >> 25;
            let a = self.regs[rs1];
            let b = self.regs[rs2];
            let imm_i = ((w as i32) >> 20) as u32;
            let mut next = self.pc.wrapping_add(4);
            match w & 0x7F {
                0x37 => self.wreg(rd, w & 0xFFFF_F000),
                0x17 => self.wreg(rd, self.pc.wrapping_add(w & 0xFFFF_F000)),
                0x6F => {
                    let imm = ((w >> 31) * 0xFFF0_0000)
                        | (w & 0x000F_F000)
                        | ((w >> 9) & 0x800)
                        | ((w >> 20) & 0x7FE);
                    self.wreg(rd, next);
                    next = self.pc.wrapping_add(imm);
                }
                0x67 if f3 == 0 => {
                    self.wreg(rd, next);
                    next = a.wrapping_add(imm_i) & !1;
                }
                0x63 => {
                    let taken = match f3 {
                        0 => a == b,
                        1 => a != b,
                        4 => (a as i32) < (b as i32),
                        5 => (a as i32) >= (b as i32),
                        6 => a < b,
                        7 => a >= b,
                        _ => return OracleExit::Trap(format!("branch funct3 {f3}")),
                    };
                    if taken {
                        let imm = ((w >> 31) * 0xFFFF_F000)
                            | ((w << 4) & 0x800)
                            | ((w >> 20) & 0x7E0)
                            | ((w >> 7) & 0x1E);
                        next = self.pc.wrapping_add(imm);
                    }
                }
                0x03 => {
                    let addr = a.wrapping_add(imm_i);
                    let v = match f3 {
                        0 => sext(self.rd(addr, 1), 8),
                        1 => sext(self.rd(addr, 2), 16),
                        2 => self.rd(addr, 4),
                        4 => self.rd(addr, 1),
                        5 => self.rd(addr, 2),
                        _ => return OracleExit::Trap(format!("load funct3 {f3}")),
                    };
                    self.wreg(rd, v);
                }
                0x23 => {
                    let imm = (imm_i & 0xFFFF_FFE0) | ((w >> 7) & 0x1F);
                    let addr = a.wrapping_add(imm);
                    match f3 {
                        0 => self.wr(addr, 1, b),
                        1 => self.wr(addr, 2, b),
                        2 => self.wr(addr, 4, b),
                        _ => return OracleExit::Trap(format!("store funct3 {f3}")),
                    }
                }
                0x13 => {
                    let sh = imm_i & 31;
                    let v = match f3 {
                        0 => a.wrapping_add(imm_i),
                        1 => a << sh,
                        2 => ((a as i32) < (imm_i as i32)) as u32,
                        3 => (a < imm_i) as u32,
                        4 => a ^ imm_i,
                        5 if f7 == 0 => a >> sh,
                        5 => ((a as i32) >> sh) as u32,
                        6 => a | imm_i,
                        7 => a & imm_i,
                        _ => unreachable!(),
                    };
                    self.wreg(rd, v);
                }
                0x33 => {
                    let sh = b & 31;
                    let v = match (f7, f3) {
                        (0x00, 0) => a.wrapping_add(b),
                        (0x20, 0) => a.wrapping_sub(b),
                        (0x00, 1) => a << sh,
                        (0x00, 2) => ((a as i32) < (b as i32)) as u32,
                        (0x00, 3) => (a < b) as u32,
                        (0x00, 4) => a ^ b,
                        (0x00, 5) => a >> sh,
                        (0x20, 5) => ((a as i32) >> sh) as u32,
                        (0x00, 6) => a | b,
                        (0x00, 7) => a & b,
                        (0x01, 0) => a.wrapping_mul(b),
                        (0x01, 1) => (((a as i32 as i64) * (b as i32 as i64)) >> 32) as u32,
                        (0x01, 2) => (((a as i32 as i64).wrapping_mul(b as i64)) >> 32) as u32,
                        (0x01, 3) => (((a as u64) * (b as u64)) >> 32) as u32,
                        (0x01, 4) => {
                            if b == 0 {
                                u32::MAX
                            } else {
                                (a as i32).wrapping_div(b as i32) as u32
                            }
                        }
                        (0x01, 5) => a.checked_div(b).unwrap_or(u32::MAX),
                        (0x01, 6) => {
                            if b == 0 {
                                a
                            } else {
                                (a as i32).wrapping_rem(b as i32) as u32
                            }
                        }
                        (0x01, 7) => a.checked_rem(b).unwrap_or(a),
                        _ => return OracleExit::Trap(format!("op funct7 {f7:#x} funct3 {f3}")),
                    };
                    self.wreg(rd, v);
                }
                0x0F => {}
                0x73 if w == 0x0000_0073 => match self.regs[17] {
                    1 => return OracleExit::Exited(self.regs[10]),
                    2 => {}
                    3 => self.output.push(self.regs[10] as u8),
                    n => return OracleExit::Trap(format!("hypercall {n}")),
                },
                0x73 if w == 0x0010_0073 => {
                    return OracleExit::Trap("ebreak".into());
                }
                other => return OracleExit::Trap(format!("opcode {other:#04x}")),
            }
            self.pc = next;
        }
    }
}
