//! Drive the exploration loop by hand, one solver query at a time.
//!
//! The [`rvsym::explorer::explore`] entry point wraps this whole
//! dance; unrolling it shows the moving parts. An execution tree
//! folds in each run's branch trace, hands out the deepest unexplored
//! slot as a path target, and records the solver's verdict for slots
//! that turn out unreachable. A satisfying model becomes the input
//! for the next run.
//!
//! The guest branches on the high bit of a symbolic byte and on
//! whether it is below 16. Three of the four direction combinations
//! are feasible; `high bit set AND below 16` is not, and the tree
//! shows it as an unsat slot.
//!
//! Run with: `cargo run --example explore_tree`

use rvsym::engine::{run, RunLimits};
use rvsym::explorer::{path_condition, ExecTree, SlotState, Terminal};
use rvsym::isa::decode::{BranchCond, IAluOp, LoadKind};
use rvsym::isa::{encode, Instr};
use rvsym::machine::{ConcolicByte, MachineState};
use rvsym::solver::{Model, SatResult, Session, SolverConfig};

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

fn guest() -> [Instr; 14] {
    [
        Instr::Lui { rd: 10, imm: INPUT },
        addi(11, 0, 1),
        addi(17, 0, 2), // make_symbolic(0x2000, 1)
        Instr::Ecall,
        Instr::Load { kind: LoadKind::Lbu, rd: 12, rs1: 10, imm: 0 },
        Instr::OpImm { op: IAluOp::Andi, rd: 13, rs1: 12, imm: 0x80 },
        Instr::Branch { cond: BranchCond::Ne, rs1: 13, rs2: 0, imm: 8 },
        addi(14, 0, 1),
        Instr::OpImm { op: IAluOp::Sltiu, rd: 15, rs1: 12, imm: 16 },
        Instr::Branch { cond: BranchCond::Eq, rs1: 15, rs2: 0, imm: 8 },
        addi(14, 14, 64),
        addi(10, 14, 0),
        addi(17, 0, 1), // exit(a4)
        Instr::Ecall,
    ]
}

fn main() {
    let mut base = MachineState::new(false);
    install(&mut base, BASE, &guest());
    base.mem.write_byte(INPUT, ConcolicByte::concrete(42));

    let mut session = Session::new(SolverConfig::default());
    let limits = RunLimits::default();
    let mut tree = ExecTree::new();

    // Seed run on default inputs plants the first path.
    let seed = run(base.clone(), &mut session, &Model::new(), limits);
    println!("run 0: decisions={:?} exit={:?} (seed)", seed.decisions(), seed.exit);
    tree.insert_trace(&seed.trace, Terminal::from_exit(seed.exit)).unwrap();

    // Each target is a branch prefix with the last direction negated.
    // Sat: drive a run along it and fold the trace in. Unsat or
    // unknown: record the verdict so the slot is not handed out again.
    let mut run_id = 1;
    while let Some(target) = tree.next_target() {
        let assertions = path_condition(&mut session, &target);
        let want: String =
            target.prefix.iter().map(|&(_, d)| if d { '1' } else { '0' }).collect();
        match session.check(&assertions) {
            SatResult::Sat(model) => {
                let result = run(base.clone(), &mut session, &model, limits);
                let inputs: Vec<String> =
                    result.inputs.iter().map(|(v, x)| format!("{v}={x:#04x}")).collect();
                println!(
                    "run {run_id}: decisions={:?} exit={:?} (target {want}, inputs {})",
                    result.decisions(),
                    result.exit,
                    inputs.join(", "),
                );
                tree.insert_trace(&result.trace, Terminal::from_exit(result.exit)).unwrap();
                run_id += 1;
            }
            SatResult::Unsat => {
                println!("target {want}: unsat");
                tree.resolve(&target, SlotState::Unsat);
            }
            SatResult::Unknown(reason) => {
                println!("target {want}: unknown ({reason:?})");
                tree.resolve(&target, SlotState::Unknown);
            }
        }
    }

    println!("\n{}", tree.render());
    let (completed, truncated) = tree.leaf_counts();
    let (unsat, unknown) = tree.pruned_counts();
    println!("completed={completed} truncated={truncated} unsat={unsat} unknown={unknown}");
    assert_eq!((completed, truncated, unsat, unknown), (3, 0, 1, 0));
}
