//! Mark memory as symbolic and watch branch decisions get recorded.
//!
//! The guest asks the engine to treat one byte as symbolic input,
//! then branches on its high bit and on a range test. Each branch
//! whose condition depends on the input adds one event to the trace:
//! the interned condition term plus the direction the concrete value
//! actually took. Re-running the same program under a different input
//! model steers it down another path.
//!
//! Run with: `cargo run --example concolic_trace`

use rvsym::engine::{run, RunLimits};
use rvsym::isa::decode::{BranchCond, IAluOp, LoadKind};
use rvsym::isa::{encode, Instr};
use rvsym::machine::{ConcolicByte, MachineState};
use rvsym::solver::{Model, Session, SolverConfig, VarId};

const BASE: u32 = 0x1000;
const INPUT: u32 = 0x2000;

fn addi(rd: u8, rs1: u8, imm: i32) -> Instr {
    Instr::OpImm { op: IAluOp::Addi, rd, rs1, imm }
}

fn install(state: &mut MachineState, base: u32, program: &[Instr]) {
    for (i, instr) in program.iter().enumerate() {
        let word = encode(instr);
        for b in 0..4 {
            let byte = ConcolicByte::concrete((word >> (8 * b)) as u8);
            state.mem.write_byte(base + 4 * i as u32 + b, byte);
        }
    }
    state.pc = base;
}

fn main() {
    let program = [
        Instr::Lui { rd: 10, imm: INPUT }, // a0 = input address
        addi(11, 0, 1),                    // a1 = length
        addi(17, 0, 2),                    // make_symbolic(a0, a1)
        Instr::Ecall,
        Instr::Load { kind: LoadKind::Lbu, rd: 12, rs1: 10, imm: 0 },
        Instr::OpImm { op: IAluOp::Andi, rd: 13, rs1: 12, imm: 0x80 },
        Instr::Branch { cond: BranchCond::Ne, rs1: 13, rs2: 0, imm: 8 },
        addi(14, 0, 1), // only on the low arm
        Instr::OpImm { op: IAluOp::Sltiu, rd: 15, rs1: 12, imm: 16 },
        Instr::Branch { cond: BranchCond::Eq, rs1: 15, rs2: 0, imm: 8 },
        addi(14, 14, 64), // only when the byte is below 16
        addi(10, 14, 0),
        addi(17, 0, 1), // exit(a4)
        Instr::Ecall,
    ];

    let mut base = MachineState::new(false);
    install(&mut base, BASE, &program);
    // make_symbolic adopts whatever concrete byte is already there as
    // the seed value, so plant something recognizable.
    base.mem.write_byte(INPUT, ConcolicByte::concrete(42));

    let mut session = Session::new(SolverConfig::default());

    let seed = run(base.clone(), &mut session, &Model::new(), RunLimits::default());
    println!("seed run");
    println!("  exit:      {:?}", seed.exit);
    println!("  decisions: {:?}", seed.decisions());
    for (var, value) in &seed.inputs {
        println!("  input:     {var} = {value:#04x}");
    }
    for event in &seed.trace {
        println!("  branch at pc={:#06x}: taken={}", event.pc, event.taken);
    }

    // The condition terms live in the solver session; any of them can
    // be rendered as a standalone SMT-LIB query.
    println!("\nfirst condition as SMT-LIB:");
    for line in session.render_smtlib(&[seed.trace[0].cond]).lines() {
        println!("  {line}");
    }

    // Same program, different input byte: high bit set flips the
    // first branch.
    let mut override_model = Model::new();
    override_model.insert(VarId { call: 0, offset: 0 }, 0x90);
    let steered = run(base, &mut session, &override_model, RunLimits::default());
    println!("\nsteered run (in_0_0 = 0x90)");
    println!("  exit:      {:?}", steered.exit);
    println!("  decisions: {:?}", steered.decisions());

    assert_ne!(seed.decisions(), steered.decisions());
}
