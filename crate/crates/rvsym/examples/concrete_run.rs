//! Assemble a small program in memory and run it concretely.
//!
//! No ELF file is involved: instruction words are built with the
//! encoder, written into sparse memory byte by byte, and executed by
//! the same concolic interpreter the explorer uses. With no symbolic
//! inputs the symbolic half stays idle and the run is a plain
//! emulation.
//!
//! The program sums the integers 1 through 10, prints `OK` through
//! the putchar hypercall, and exits with the sum.
//!
//! Run with: `cargo run --example concrete_run`

use rvsym::engine::{run, ExitStatus, RunLimits};
use rvsym::isa::decode::{BranchCond, IAluOp};
use rvsym::isa::{encode, Instr};
use rvsym::machine::{ConcolicByte, MachineState};
use rvsym::solver::{Model, Session, SolverConfig};

const BASE: u32 = 0x1000;

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
        addi(10, 0, 0),  // a0 = 0        (sum)
        addi(11, 0, 1),  // a1 = 1        (i)
        addi(12, 0, 10), // a2 = 10       (limit)
        // loop body: sum += i; i += 1; repeat while limit >= i
        Instr::OpReg { op: rvsym::isa::decode::RAluOp::Add, rd: 10, rs1: 10, rs2: 11 },
        addi(11, 11, 1),
        Instr::Branch { cond: BranchCond::Ge, rs1: 12, rs2: 11, imm: -8 },
        // print "OK\n", keeping the sum safe in s0
        addi(8, 10, 0),
        addi(10, 0, i32::from(b'O')),
        addi(17, 0, 3),
        Instr::Ecall,
        addi(10, 0, i32::from(b'K')),
        Instr::Ecall,
        addi(10, 0, i32::from(b'\n')),
        Instr::Ecall,
        // exit(sum)
        addi(10, 8, 0),
        addi(17, 0, 1),
        Instr::Ecall,
    ];

    let mut state = MachineState::new(false);
    install(&mut state, BASE, &program);

    let mut session = Session::new(SolverConfig::default());
    let result = run(state, &mut session, &Model::new(), RunLimits::default());

    print!("{}", String::from_utf8_lossy(&result.output));
    println!("exit:  {:?}", result.exit);
    println!("steps: {}", result.steps);
    println!("a0:    {}", result.state.reg(10).concrete);
    assert_eq!(result.exit, ExitStatus::Exited(55));
    assert!(result.trace.is_empty(), "concrete runs record no branch events");
}
