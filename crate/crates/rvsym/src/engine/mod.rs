//! The concolic interpreter.
//!
//! A run starts from a machine state snapshot, repeatedly fetches and
//! decodes the instruction at the PC, and interprets its semantic
//! effect sequence. Expression evaluation is dual: the concrete half
//! always computes a 32-bit value, the symbolic half builds a solver
//! term whenever any operand carries one. Guarded effects (`RunIf`)
//! with a symbolic condition append to the branch trace; the direction
//! actually followed is decided by the concrete value alone.
//!
//! Programs talk to the engine through the ECALL hypercall interface:
//!
//! | a7 | call          | arguments                   |
//! |----|---------------|-----------------------------|
//! | 1  | exit          | a0 = exit code              |
//! | 2  | make_symbolic | a0 = address, a1 = length   |
//! | 3  | putchar       | a0 = byte                   |
//!
//! `make_symbolic` replaces `length` bytes of memory with fresh
//! symbolic input bytes. Their concrete values come from the run's
//! input assignment when present (solver models drive later runs) and
//! otherwise keep the bytes' existing contents, so the seed run
//! executes the program's initial data.

use std::collections::HashMap;
use std::rc::Rc;

use crate::expr::{eval_with, BvExpr, ExprError, Width};
use crate::isa::{decode, semantics_of, DecodeError, Op, Semantics, Slot};
use crate::machine::{ConcolicByte, ConcolicWord, MachineError, MachineState};
use crate::solver::{Model, Session, TermHandle, VarId};

/// Why a run stopped before reaching its step limit.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Fault {
    IllegalInstruction { pc: u32, word: u32 },
    CompressedInstruction { pc: u32, word: u32 },
    UnmappedRead { pc: u32, addr: u32 },
    MisalignedPc { pc: u32 },
    Breakpoint { pc: u32 },
    BadHypercall { pc: u32, number: u32 },
}

/// Terminal status of a run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExitStatus {
    /// The program called the exit hypercall.
    Exited(u32),
    Fault(Fault),
    /// The step limit cut the run short.
    StepLimit,
}

/// One symbolic branch decision: where it happened, the condition
/// term, and the direction the concrete state took.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BranchEvent {
    pub pc: u32,
    pub cond: TermHandle,
    pub taken: bool,
}

pub type Trace = Vec<BranchEvent>;

#[derive(Clone, Copy, Debug)]
pub struct RunLimits {
    pub step_limit: u64,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits { step_limit: 10_000_000 }
    }
}

/// Events worth surfacing but not fatal: symbolic values forced
/// concrete where the engine needs a single address or PC.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct Warnings {
    pub concretized_addresses: u64,
    pub concretized_pc_writes: u64,
}

/// Everything observable about one finished run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub exit: ExitStatus,
    pub trace: Trace,
    pub steps: u64,
    /// Concrete byte assigned to every symbolic input created by the
    /// run (model-driven or defaulted).
    pub inputs: Model,
    /// Bytes emitted through the putchar hypercall.
    pub output: Vec<u8>,
    pub warnings: Warnings,
    pub state: MachineState,
}

impl RunResult {
    /// Branch directions as a compact string, one `1`/`0` per trace
    /// entry.
    pub fn decisions(&self) -> String {
        self.trace.iter().map(|b| if b.taken { '1' } else { '0' }).collect()
    }
}

/// Evaluate an expression over concolic words.
///
/// The concrete half folds the leaves' concrete values; the symbolic
/// half is built only if at least one leaf carries a term, with
/// concrete leaves entering as constants.
pub fn eval_concolic(
    session: &mut Session,
    e: &BvExpr<ConcolicWord>,
) -> Result<ConcolicWord, ExprError> {
    let (concrete, width) = eval_with(e, &|w: &ConcolicWord| {
        (u64::from(w.concrete), Width::W32)
    })?;
    debug_assert_eq!(width, Width::W32, "machine expressions are word-sized");
    let symbolic = if e.any_leaf(&mut |w: &ConcolicWord| w.is_symbolic()) {
        let term_expr = e.map_leaves(&mut |w: &ConcolicWord| BvExpr::leaf(w.term(session)));
        Some(session.lower(&term_expr)?)
    } else {
        None
    };
    Ok(ConcolicWord { concrete: concrete as u32, symbolic })
}

struct Executor<'s> {
    state: MachineState,
    session: &'s mut Session,
    overrides: Model,
    limits: RunLimits,
    trace: Trace,
    output: Vec<u8>,
    inputs: Model,
    sym_call_seq: u32,
    steps: u64,
    warnings: Warnings,
    next_pc: u32,
    sem_cache: HashMap<u32, Rc<Semantics>>,
}

impl<'s> Executor<'s> {
    fn new(
        state: MachineState,
        session: &'s mut Session,
        overrides: Model,
        limits: RunLimits,
    ) -> Self {
        Executor {
            state,
            session,
            overrides,
            limits,
            trace: Vec::new(),
            output: Vec::new(),
            inputs: Model::new(),
            sym_call_seq: 0,
            steps: 0,
            warnings: Warnings::default(),
            next_pc: 0,
            sem_cache: HashMap::new(),
        }
    }

    fn run(mut self) -> RunResult {
        let exit = loop {
            if self.steps >= self.limits.step_limit {
                break ExitStatus::StepLimit;
            }
            match self.step() {
                Ok(()) => {}
                Err(exit) => break exit,
            }
        };
        RunResult {
            exit,
            trace: self.trace,
            steps: self.steps,
            inputs: self.inputs,
            output: self.output,
            warnings: self.warnings,
            state: self.state,
        }
    }

    fn semantics_at(&mut self, pc: u32, word: u32) -> Result<Rc<Semantics>, ExitStatus> {
        if let Some(sem) = self.sem_cache.get(&word) {
            return Ok(Rc::clone(sem));
        }
        let instr = decode(word).map_err(|e| {
            ExitStatus::Fault(match e {
                DecodeError::Compressed { word } => Fault::CompressedInstruction { pc, word },
                DecodeError::Illegal { word } => Fault::IllegalInstruction { pc, word },
            })
        })?;
        let sem = Rc::new(semantics_of(&instr));
        self.sem_cache.insert(word, Rc::clone(&sem));
        Ok(sem)
    }

    fn step(&mut self) -> Result<(), ExitStatus> {
        let pc = self.state.pc;
        let word = self.state.fetch().map_err(|e| map_machine_error(e, pc))?;
        let sem = self.semantics_at(pc, word)?;
        self.next_pc = pc.wrapping_add(4);
        self.steps += 1;
        let mut slots: Vec<Option<ConcolicWord>> = vec![None; usize::from(sem.slots)];
        self.exec_sequence(&sem.ops, pc, &mut slots)?;
        self.state.pc = self.next_pc;
        Ok(())
    }

    fn resolve(
        &mut self,
        e: &BvExpr<Slot>,
        slots: &[Option<ConcolicWord>],
    ) -> ConcolicWord {
        let filled = e.map_leaves(&mut |s: &Slot| {
            BvExpr::leaf(slots[usize::from(s.0)].expect("slot bound before use"))
        });
        eval_concolic(self.session, &filled).expect("semantics produce well-formed expressions")
    }

    /// Force a single concrete value out of a possibly-symbolic word,
    /// counting the loss when a term gets dropped.
    fn concretize(&mut self, w: ConcolicWord, counter: fn(&mut Warnings) -> &mut u64, what: &str) -> u32 {
        if w.is_symbolic() {
            *counter(&mut self.warnings) += 1;
            log::warn!(
                "concretizing symbolic {what} to {:#010x} at pc {:#010x}",
                w.concrete,
                self.state.pc
            );
        }
        w.concrete
    }

    fn exec_sequence(
        &mut self,
        ops: &[Op],
        pc: u32,
        slots: &mut Vec<Option<ConcolicWord>>,
    ) -> Result<(), ExitStatus> {
        for op in ops {
            match op {
                Op::ReadRegister { reg, dest } => {
                    slots[usize::from(dest.0)] = Some(self.state.reg(*reg));
                }
                Op::WriteRegister { reg, value } => {
                    let v = self.resolve(value, slots);
                    self.state.set_reg(*reg, v);
                }
                Op::ReadPc { dest } => {
                    slots[usize::from(dest.0)] = Some(ConcolicWord::concrete(pc));
                }
                Op::WritePc { target } => {
                    let v = self.resolve(target, slots);
                    self.next_pc =
                        self.concretize(v, |w| &mut w.concretized_pc_writes, "jump target");
                }
                Op::LoadMem { size, signed, addr, dest } => {
                    let a = self.resolve(addr, slots);
                    let a = self.concretize(a, |w| &mut w.concretized_addresses, "load address");
                    let strict = self.state.strict_memory();
                    let loaded = self
                        .state
                        .mem
                        .load(self.session, *size, *signed, a, strict)
                        .map_err(|e| map_machine_error(e, pc))?;
                    slots[usize::from(dest.0)] = Some(loaded);
                }
                Op::StoreMem { size, addr, value } => {
                    let a = self.resolve(addr, slots);
                    let a = self.concretize(a, |w| &mut w.concretized_addresses, "store address");
                    let v = self.resolve(value, slots);
                    self.state.mem.store(self.session, *size, a, v);
                }
                Op::RunIf { cond, body } => {
                    let c = self.resolve(cond, slots);
                    let taken = c.concrete != 0;
                    if let Some(term) = c.symbolic {
                        self.trace.push(BranchEvent { pc, cond: term, taken });
                    }
                    if taken {
                        self.exec_sequence(body, pc, slots)?;
                    }
                }
                Op::Ecall => self.hypercall(pc)?,
                Op::Ebreak => return Err(ExitStatus::Fault(Fault::Breakpoint { pc })),
            }
        }
        Ok(())
    }

    fn hypercall(&mut self, pc: u32) -> Result<(), ExitStatus> {
        let number = self.state.reg(17).concrete; // a7
        let a0 = self.state.reg(10).concrete;
        let a1 = self.state.reg(11).concrete;
        match number {
            1 => Err(ExitStatus::Exited(a0)),
            2 => {
                self.make_symbolic(a0, a1);
                Ok(())
            }
            3 => {
                self.output.push(a0 as u8);
                Ok(())
            }
            _ => Err(ExitStatus::Fault(Fault::BadHypercall { pc, number })),
        }
    }

    fn make_symbolic(&mut self, addr: u32, len: u32) {
        let call = self.sym_call_seq;
        self.sym_call_seq += 1;
        for offset in 0..len {
            let id = VarId { call, offset };
            let term = self.session.var(id);
            let a = addr.wrapping_add(offset);
            let existing = self.state.mem.read_byte(a).map_or(0, |b| b.concrete);
            let concrete = self.overrides.get(&id).copied().unwrap_or(existing);
            self.inputs.insert(id, concrete);
            self.state.mem.write_byte(a, ConcolicByte { concrete, symbolic: Some(term) });
        }
    }
}

fn map_machine_error(e: MachineError, pc: u32) -> ExitStatus {
    ExitStatus::Fault(match e {
        MachineError::UnmappedRead { addr } => Fault::UnmappedRead { pc, addr },
        MachineError::MisalignedPc { pc } => Fault::MisalignedPc { pc },
    })
}

/// Execute one run from `state` until exit, fault or step limit.
///
/// `overrides` assigns concrete values to symbolic input bytes by
/// variable identity; bytes not covered keep their in-memory values.
pub fn run(
    state: MachineState,
    session: &mut Session,
    overrides: &Model,
    limits: RunLimits,
) -> RunResult {
    Executor::new(state, session, overrides.clone(), limits).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::encode::encode;
    use crate::isa::Instr;
    use crate::solver::{SolverConfig, VarId};

    fn session() -> Session {
        Session::new(SolverConfig::default())
    }

    fn state_with_text(words: &[u32], base: u32) -> MachineState {
        let mut m = MachineState::new(false);
        for (i, w) in words.iter().enumerate() {
            for b in 0..4 {
                m.mem.write_byte(
                    base + 4 * i as u32 + b,
                    ConcolicByte::concrete((w >> (8 * b)) as u8),
                );
            }
        }
        m.pc = base;
        m
    }

    fn halting(words: &[u32]) -> Vec<u32> {
        // append: li a7, 1; ecall
        let mut v = words.to_vec();
        v.push(encode(&Instr::OpImm { op: crate::isa::decode::IAluOp::Addi, rd: 17, rs1: 0, imm: 1 }));
        v.push(encode(&Instr::Ecall));
        v
    }

    #[test]
    fn eval_concolic_concrete_stays_concrete() {
        let mut s = session();
        let e = BvExpr::leaf(ConcolicWord::concrete(6))
            .add(BvExpr::leaf(ConcolicWord::concrete(7)));
        let v = eval_concolic(&mut s, &e).unwrap();
        assert_eq!(v, ConcolicWord::concrete(13));
        assert_eq!(s.terms().len(), 0, "no terms interned for concrete math");
    }

    #[test]
    fn eval_concolic_mixes_symbolic() {
        let mut s = session();
        let id = VarId { call: 0, offset: 0 };
        let v = s.var(id);
        let byte = s.lower(&BvExpr::leaf(v).zext(24)).unwrap();
        let sym = ConcolicWord { concrete: 5, symbolic: Some(byte) };
        let e = BvExpr::leaf(sym).add(BvExpr::leaf(ConcolicWord::concrete(10)));
        let out = eval_concolic(&mut s, &e).unwrap();
        assert_eq!(out.concrete, 15);
        let term = out.symbolic.expect("symbolic operand taints result");
        let mut model = Model::new();
        model.insert(id, 5);
        assert_eq!(s.eval(term, &model), 15);
        assert_eq!(s.eval(term, &Model::new()), 10);
    }

    #[test]
    fn straight_line_exit() {
        // addi a0, x0, 42; li a7, 1; ecall
        let words = halting(&[encode(&Instr::OpImm {
            op: crate::isa::decode::IAluOp::Addi,
            rd: 10,
            rs1: 0,
            imm: 42,
        })]);
        let mut s = session();
        let st = state_with_text(&words, 0x1000);
        let r = run(st, &mut s, &Model::new(), RunLimits::default());
        assert_eq!(r.exit, ExitStatus::Exited(42));
        assert_eq!(r.steps, 3);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn symbolic_branch_is_traced_concrete_branch_is_not() {
        // make a1 symbolic via hypercall on address 0x2000, then
        // branch on it; also branch on a purely concrete register.
        use crate::isa::decode::{BranchCond, IAluOp};
        let words = halting(&[
            // li a0, 0x2000 ; li a1, 1 ; li a7, 2 ; ecall
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 10, rs1: 0, imm: 0x200 }),
            encode(&Instr::OpImm { op: IAluOp::Slli, rd: 10, rs1: 10, imm: 4 }),
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 11, rs1: 0, imm: 1 }),
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 17, rs1: 0, imm: 2 }),
            encode(&Instr::Ecall),
            // lb a2, 0(a0)
            encode(&Instr::Load { kind: crate::isa::decode::LoadKind::Lb, rd: 12, rs1: 10, imm: 0 }),
            // beq a2, x0, +8  (symbolic: traced)
            encode(&Instr::Branch { cond: BranchCond::Eq, rs1: 12, rs2: 0, imm: 8 }),
            // addi x5, x0, 1 (skipped when byte is zero)
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 5, rs1: 0, imm: 1 }),
            // bne x0, x0, +8 (concrete: never taken, not traced)
            encode(&Instr::Branch { cond: BranchCond::Ne, rs1: 0, rs2: 0, imm: 8 }),
        ]);
        let mut s = session();
        let mut st = state_with_text(&words, 0x1000);
        st.mem.write_byte(0x2000, ConcolicByte::concrete(0));
        let r = run(st, &mut s, &Model::new(), RunLimits::default());
        assert_eq!(r.exit, ExitStatus::Exited(0x2000), "a0 still holds the address");
        assert_eq!(r.trace.len(), 1, "only the symbolic branch is recorded");
        assert!(r.trace[0].taken, "byte defaults to zero, so beq is taken");
        assert_eq!(r.inputs.len(), 1);
        assert_eq!(r.inputs[&VarId { call: 0, offset: 0 }], 0);

        // now drive the same program down the other direction
        let mut s2 = session();
        let mut st2 = state_with_text(&words, 0x1000);
        st2.mem.write_byte(0x2000, ConcolicByte::concrete(0));
        let mut model = Model::new();
        model.insert(VarId { call: 0, offset: 0 }, 7);
        let r2 = run(st2.clone(), &mut s2, &model, RunLimits::default());
        assert!(!r2.trace[0].taken);
        assert_eq!(r2.state.reg(5).concrete, 1, "fall-through executed");
    }

    #[test]
    fn branch_condition_term_is_solvable() {
        use crate::isa::decode::{BranchCond, IAluOp};
        // x5 = symbolic byte; beq x5, 9 → exit 1 else exit 0
        let words = [
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 10, rs1: 0, imm: 0x100 }),
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 11, rs1: 0, imm: 1 }),
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 17, rs1: 0, imm: 2 }),
            encode(&Instr::Ecall),
            encode(&Instr::Load { kind: crate::isa::decode::LoadKind::Lbu, rd: 5, rs1: 10, imm: 0 }),
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 6, rs1: 0, imm: 9 }),
            encode(&Instr::Branch { cond: BranchCond::Eq, rs1: 5, rs2: 6, imm: 12 }),
            // not taken: exit(0)
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 10, rs1: 0, imm: 0 }),
            encode(&Instr::Jal { rd: 0, imm: 8 }),
            // taken: exit(1)
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 10, rs1: 0, imm: 1 }),
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 17, rs1: 0, imm: 1 }),
            encode(&Instr::Ecall),
        ];
        let mut s = session();
        let st = state_with_text(&words, 0);
        let seed = run(st.clone(), &mut s, &Model::new(), RunLimits::default());
        assert_eq!(seed.exit, ExitStatus::Exited(0));
        assert_eq!(seed.trace.len(), 1);
        assert!(!seed.trace[0].taken);

        // negate: ask the solver for an input taking the branch
        let cond = seed.trace[0].cond;
        match s.check(&[cond]) {
            crate::solver::SatResult::Sat(m) => {
                let r2 = run(st, &mut s, &m, RunLimits::default());
                assert_eq!(r2.exit, ExitStatus::Exited(1));
                assert!(r2.trace[0].taken);
                assert_eq!(r2.inputs[&VarId { call: 0, offset: 0 }], 9);
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn faults_are_reported() {
        let mut s = session();
        // empty memory, lenient: word 0 decodes as compressed → fault
        let st = state_with_text(&[], 0x1000);
        let r = run(st, &mut s, &Model::new(), RunLimits::default());
        assert_eq!(
            r.exit,
            ExitStatus::Fault(Fault::CompressedInstruction { pc: 0x1000, word: 0 })
        );

        // bad hypercall number
        let words = [
            encode(&Instr::OpImm { op: crate::isa::decode::IAluOp::Addi, rd: 17, rs1: 0, imm: 99 }),
            encode(&Instr::Ecall),
        ];
        let mut s2 = session();
        let st2 = state_with_text(&words, 0);
        let r2 = run(st2, &mut s2, &Model::new(), RunLimits::default());
        assert_eq!(
            r2.exit,
            ExitStatus::Fault(Fault::BadHypercall { pc: 4, number: 99 })
        );
    }

    #[test]
    fn step_limit_truncates() {
        // jal x0, 0 spins forever
        let words = [encode(&Instr::Jal { rd: 0, imm: 0 })];
        let mut s = session();
        let st = state_with_text(&words, 0);
        let r = run(st, &mut s, &Model::new(), RunLimits { step_limit: 100 });
        assert_eq!(r.exit, ExitStatus::StepLimit);
        assert_eq!(r.steps, 100);
    }

    #[test]
    fn division_by_symbolic_zero_follows_convention() {
        use crate::isa::decode::{IAluOp, LoadKind, RAluOp};
        let words = halting(&[
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 10, rs1: 0, imm: 0x100 }),
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 11, rs1: 0, imm: 1 }),
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 17, rs1: 0, imm: 2 }),
            encode(&Instr::Ecall),
            encode(&Instr::Load { kind: LoadKind::Lbu, rd: 5, rs1: 10, imm: 0 }),
            encode(&Instr::OpImm { op: IAluOp::Addi, rd: 6, rs1: 0, imm: 100 }),
            encode(&Instr::OpReg { op: RAluOp::Divu, rd: 7, rs1: 6, rs2: 5 }),
        ]);
        let mut s = session();
        let st = state_with_text(&words, 0);
        let r = run(st, &mut s, &Model::new(), RunLimits::default());
        // default input byte is zero → 100 / 0 = all-ones
        assert_eq!(r.state.reg(7).concrete, 0xFFFF_FFFF);
        let term = r.state.reg(7).symbolic.expect("division result is symbolic");
        assert_eq!(s.eval(term, &r.inputs), 0xFFFF_FFFF);
        let mut m = Model::new();
        m.insert(VarId { call: 0, offset: 0 }, 3);
        assert_eq!(s.eval(term, &m), 33);
    }
}
