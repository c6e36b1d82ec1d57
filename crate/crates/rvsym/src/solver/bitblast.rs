//! CNF translation of term graphs and the built-in SAT backend.
//!
//! Each term node becomes a vector of bit literals (LSB first) via
//! standard Tseitin gates: ripple-carry adders, barrel shifters,
//! shift-add multipliers and a restoring divider. Constant bits fold
//! through every gate, so fully concrete terms never touch the SAT
//! solver. The restoring divider yields the non-trapping division
//! convention for free (zero divisor: quotient all-ones, remainder
//! equals the dividend); the signed variants add an explicit
//! zero-divisor multiplex so their fixups cannot disturb it.

use std::collections::HashMap;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use varisat::{CnfFormula, ExtendFormula, Lit, Solver};

use crate::expr::BinOp;

use super::term::{Term, TermHandle, TermTable};
use super::{Model, SatResult, UnknownReason, VarId};

/// One bit of a word: a known constant or a CNF literal.
#[derive(Clone, Copy, Debug)]
enum Bit {
    Const(bool),
    Lit(Lit),
}

use Bit::{Const, Lit as L};

struct Blaster<'t> {
    table: &'t TermTable,
    formula: CnfFormula,
    bits: HashMap<u32, Vec<Bit>>,
    var_bits: Vec<(VarId, Vec<Bit>)>,
}

impl<'t> Blaster<'t> {
    fn new(table: &'t TermTable) -> Self {
        Blaster {
            table,
            formula: CnfFormula::new(),
            bits: HashMap::new(),
            var_bits: Vec::new(),
        }
    }

    fn fresh(&mut self) -> Lit {
        self.formula.new_lit()
    }

    fn not(&mut self, a: Bit) -> Bit {
        match a {
            Const(b) => Const(!b),
            L(l) => L(!l),
        }
    }

    fn and(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Const(false), _) | (_, Const(false)) => Const(false),
            (Const(true), x) | (x, Const(true)) => x,
            (L(x), L(y)) => {
                if x == y {
                    return L(x);
                }
                if x == !y {
                    return Const(false);
                }
                let g = self.fresh();
                self.formula.add_clause(&[!g, x]);
                self.formula.add_clause(&[!g, y]);
                self.formula.add_clause(&[!x, !y, g]);
                L(g)
            }
        }
    }

    fn or(&mut self, a: Bit, b: Bit) -> Bit {
        let (na, nb) = (self.not(a), self.not(b));
        let n = self.and(na, nb);
        self.not(n)
    }

    fn xor(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Const(false), x) | (x, Const(false)) => x,
            (Const(true), x) | (x, Const(true)) => self.not(x),
            (L(x), L(y)) => {
                if x == y {
                    return Const(false);
                }
                if x == !y {
                    return Const(true);
                }
                let g = self.fresh();
                self.formula.add_clause(&[!g, x, y]);
                self.formula.add_clause(&[!g, !x, !y]);
                self.formula.add_clause(&[g, !x, y]);
                self.formula.add_clause(&[g, x, !y]);
                L(g)
            }
        }
    }

    /// `if s then t else e`.
    fn mux(&mut self, s: Bit, t: Bit, e: Bit) -> Bit {
        match s {
            Const(true) => t,
            Const(false) => e,
            L(_) => {
                let a = self.and(s, t);
                let ns = self.not(s);
                let b = self.and(ns, e);
                self.or(a, b)
            }
        }
    }

    fn mux_vec(&mut self, s: Bit, t: &[Bit], e: &[Bit]) -> Vec<Bit> {
        t.iter().zip(e).map(|(&ti, &ei)| self.mux(s, ti, ei)).collect()
    }

    fn or_many(&mut self, bits: &[Bit]) -> Bit {
        let mut acc = Const(false);
        for &b in bits {
            acc = self.or(acc, b);
        }
        acc
    }

    /// Full adder; returns (sum, carry).
    fn full_add(&mut self, a: Bit, b: Bit, c: Bit) -> (Bit, Bit) {
        let ab = self.xor(a, b);
        let sum = self.xor(ab, c);
        let t1 = self.and(a, b);
        let t2 = self.and(ab, c);
        let carry = self.or(t1, t2);
        (sum, carry)
    }

    /// Ripple-carry a + b + carry_in; returns (sum bits, carry out).
    fn add_vec(&mut self, a: &[Bit], b: &[Bit], mut carry: Bit) -> (Vec<Bit>, Bit) {
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let (s, c) = self.full_add(x, y, carry);
            out.push(s);
            carry = c;
        }
        (out, carry)
    }

    /// a - b; returns (difference, no_borrow) where no_borrow means
    /// a >= b unsigned.
    fn sub_vec(&mut self, a: &[Bit], b: &[Bit]) -> (Vec<Bit>, Bit) {
        let nb: Vec<Bit> = b.iter().map(|&x| match x {
            Const(v) => Const(!v),
            L(l) => L(!l),
        }).collect();
        self.add_vec(a, &nb, Const(true))
    }

    fn negate(&mut self, a: &[Bit]) -> Vec<Bit> {
        let zero = vec![Const(false); a.len()];
        let (diff, _) = self.sub_vec(&zero, a);
        diff
    }

    fn eq_vec(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        let mut acc = Const(true);
        for (&x, &y) in a.iter().zip(b) {
            let d = self.xor(x, y);
            let nd = self.not(d);
            acc = self.and(acc, nd);
        }
        acc
    }

    fn ult_vec(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        let (_, no_borrow) = self.sub_vec(a, b);
        self.not(no_borrow)
    }

    fn slt_vec(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        // Unsigned compare with the sign bits flipped.
        let mut fa = a.to_vec();
        let mut fb = b.to_vec();
        let top = a.len() - 1;
        fa[top] = self.not(a[top]);
        fb[top] = self.not(b[top]);
        self.ult_vec(&fa, &fb)
    }

    /// Barrel shifter. `kind` 0 = sll, 1 = srl, 2 = sra; amounts at or
    /// beyond the width produce the drained value.
    fn shift(&mut self, a: &[Bit], amount: &[Bit], kind: u8) -> Vec<Bit> {
        let w = a.len();
        let fill_sra = a[w - 1];
        let mut cur = a.to_vec();
        let mut stage = 0usize;
        while (1usize << stage) < w {
            let dist = 1usize << stage;
            let sel = amount[stage];
            let mut shifted = Vec::with_capacity(w);
            for i in 0..w {
                let src = match kind {
                    0 => {
                        if i >= dist {
                            cur[i - dist]
                        } else {
                            Const(false)
                        }
                    }
                    _ => {
                        if i + dist < w {
                            cur[i + dist]
                        } else if kind == 2 {
                            fill_sra
                        } else {
                            Const(false)
                        }
                    }
                };
                shifted.push(src);
            }
            cur = self.mux_vec(sel, &shifted, &cur);
            stage += 1;
        }
        // Any set amount bit at 2^stage or above shifts everything out.
        let over = self.or_many(&amount[stage..]);
        let drained: Vec<Bit> = (0..w)
            .map(|_| if kind == 2 { fill_sra } else { Const(false) })
            .collect();
        self.mux_vec(over, &drained, &cur)
    }

    /// Product of sign- or zero-extended operands, `out` bits wide.
    fn mul_ext(&mut self, a: &[Bit], b: &[Bit], out: usize, sa: bool, sb: bool) -> Vec<Bit> {
        let ea = self.extend(a, out, sa);
        let eb = self.extend(b, out, sb);
        let mut acc = vec![Const(false); out];
        for (i, &bi) in eb.iter().enumerate() {
            if let Const(false) = bi {
                continue;
            }
            // acc += (ea << i) & {bi replicated}
            let mut partial = vec![Const(false); out];
            for j in 0..out - i {
                partial[i + j] = self.and(bi, ea[j]);
            }
            let (sum, _) = self.add_vec(&acc, &partial, Const(false));
            acc = sum;
        }
        acc
    }

    fn extend(&mut self, a: &[Bit], to: usize, signed: bool) -> Vec<Bit> {
        let mut out = a.to_vec();
        let fill = if signed { a[a.len() - 1] } else { Const(false) };
        out.resize(to, fill);
        out
    }

    /// Restoring division; returns (quotient, remainder). A zero
    /// divisor never triggers a restore subtraction, so the quotient
    /// comes out all-ones and the remainder equals the dividend. The
    /// working remainder carries one extra bit because the shifted-in
    /// value can reach twice the divisor before the restore step.
    fn divmod_u(&mut self, a: &[Bit], b: &[Bit]) -> (Vec<Bit>, Vec<Bit>) {
        let w = a.len();
        let be = self.extend(b, w + 1, false);
        let mut rem = vec![Const(false); w + 1];
        let mut quot = vec![Const(false); w];
        for i in (0..w).rev() {
            rem.rotate_right(1);
            rem[0] = a[i];
            let (diff, no_borrow) = self.sub_vec(&rem, &be);
            rem = self.mux_vec(no_borrow, &diff, &rem);
            quot[i] = no_borrow;
        }
        (quot, rem[..w].to_vec())
    }

    /// Signed division via magnitudes with sign fixups, with the
    /// zero-divisor convention multiplexed in explicitly.
    fn divmod_s(&mut self, a: &[Bit], b: &[Bit]) -> (Vec<Bit>, Vec<Bit>) {
        let w = a.len();
        let (sa, sb) = (a[w - 1], b[w - 1]);
        let na = self.negate(a);
        let nb = self.negate(b);
        let ma = self.mux_vec(sa, &na, a);
        let mb = self.mux_vec(sb, &nb, b);
        let (uq, ur) = self.divmod_u(&ma, &mb);
        let qsign = self.xor(sa, sb);
        let nq = self.negate(&uq);
        let nr = self.negate(&ur);
        let q = self.mux_vec(qsign, &nq, &uq);
        let r = self.mux_vec(sa, &nr, &ur);
        let bz = {
            let nz = self.or_many(b);
            self.not(nz)
        };
        let ones = vec![Const(true); w];
        let q = self.mux_vec(bz, &ones, &q);
        let r = self.mux_vec(bz, a, &r);
        (q, r)
    }

    fn blast_var(&mut self, id: VarId) -> Vec<Bit> {
        let bits: Vec<Bit> = (0..8).map(|_| L(self.fresh())).collect();
        self.var_bits.push((id, bits.clone()));
        bits
    }

    fn blast_bin(&mut self, op: BinOp, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        let w = a.len();
        let bool_out = |bit: Bit, w: usize| {
            let mut v = vec![Const(false); w];
            v[0] = bit;
            v
        };
        match op {
            BinOp::Add => self.add_vec(a, b, Const(false)).0,
            BinOp::Sub => self.sub_vec(a, b).0,
            BinOp::And => a.iter().zip(b).map(|(&x, &y)| self.and(x, y)).collect(),
            BinOp::Or => a.iter().zip(b).map(|(&x, &y)| self.or(x, y)).collect(),
            BinOp::Xor => a.iter().zip(b).map(|(&x, &y)| self.xor(x, y)).collect(),
            BinOp::Sll => self.shift(a, b, 0),
            BinOp::Srl => self.shift(a, b, 1),
            BinOp::Sra => self.shift(a, b, 2),
            BinOp::Mul => self.mul_ext(a, b, w, false, false),
            BinOp::MulhUU => self.mul_ext(a, b, 2 * w, false, false)[w..].to_vec(),
            BinOp::MulhSS => self.mul_ext(a, b, 2 * w, true, true)[w..].to_vec(),
            BinOp::MulhSU => self.mul_ext(a, b, 2 * w, true, false)[w..].to_vec(),
            BinOp::DivU => self.divmod_u(a, b).0,
            BinOp::RemU => self.divmod_u(a, b).1,
            BinOp::DivS => self.divmod_s(a, b).0,
            BinOp::RemS => self.divmod_s(a, b).1,
            BinOp::Eq => {
                let e = self.eq_vec(a, b);
                bool_out(e, w)
            }
            BinOp::Neq => {
                let e = self.eq_vec(a, b);
                let ne = self.not(e);
                bool_out(ne, w)
            }
            BinOp::SltU => {
                let lt = self.ult_vec(a, b);
                bool_out(lt, w)
            }
            BinOp::SgeU => {
                let lt = self.ult_vec(a, b);
                let ge = self.not(lt);
                bool_out(ge, w)
            }
            BinOp::SltS => {
                let lt = self.slt_vec(a, b);
                bool_out(lt, w)
            }
            BinOp::SgeS => {
                let lt = self.slt_vec(a, b);
                let ge = self.not(lt);
                bool_out(ge, w)
            }
        }
    }

    /// Translate every node needed by `roots`, bottom-up.
    fn blast_cone(&mut self, roots: &[TermHandle]) {
        for id in self.table.cone(roots) {
            let bits = match self.table.node(id) {
                Term::Var(v) => self.blast_var(v),
                Term::Const { width, value } => (0..width.bits())
                    .map(|i| Const(value >> i & 1 == 1))
                    .collect(),
                Term::ZExt { extra, inner } => {
                    let iv = self.bits[&inner.id()].clone();
                    let to = iv.len() + extra as usize;
                    self.extend(&iv, to, false)
                }
                Term::SExt { extra, inner } => {
                    let iv = self.bits[&inner.id()].clone();
                    let to = iv.len() + extra as usize;
                    self.extend(&iv, to, true)
                }
                Term::Extract { low, width, inner } => {
                    let iv = &self.bits[&inner.id()];
                    iv[low as usize..low as usize + width.bits() as usize].to_vec()
                }
                Term::Bin { op, lhs, rhs } => {
                    let a = self.bits[&lhs.id()].clone();
                    let b = self.bits[&rhs.id()].clone();
                    self.blast_bin(op, &a, &b)
                }
            };
            self.bits.insert(id, bits);
        }
    }
}

/// Outcome of translating a set of nonzero-assertions to CNF.
struct CnfQuery {
    formula: CnfFormula,
    var_bits: Vec<(VarId, Vec<Bit>)>,
    /// Set when constant folding already refuted some assertion.
    trivially_unsat: bool,
}

fn build_query(table: &TermTable, assertions: &[TermHandle]) -> CnfQuery {
    let mut bl = Blaster::new(table);
    bl.blast_cone(assertions);
    let mut trivially_unsat = false;
    for h in assertions {
        // Assert "term != 0": at least one bit set.
        let bits = bl.bits[&h.id()].clone();
        if bits.iter().any(|b| matches!(b, Const(true))) {
            continue;
        }
        let lits: Vec<Lit> = bits
            .iter()
            .filter_map(|b| match b {
                L(l) => Some(*l),
                Const(_) => None,
            })
            .collect();
        if lits.is_empty() {
            trivially_unsat = true;
        } else {
            bl.formula.add_clause(&lits);
        }
    }
    CnfQuery { formula: bl.formula, var_bits: bl.var_bits, trivially_unsat }
}

/// Decide the conjunction of nonzero-assertions with the built-in SAT
/// backend. Returns `Unknown` if the solve exceeds `timeout`.
pub fn check(table: &TermTable, assertions: &[TermHandle], timeout: Duration) -> SatResult {
    let query = build_query(table, assertions);
    if query.trivially_unsat {
        return SatResult::Unsat;
    }
    let formula = query.formula;
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut solver = Solver::new();
        solver.add_formula(&formula);
        let outcome = match solver.solve() {
            Ok(true) => Ok(Some(solver.model().expect("sat solve has model"))),
            Ok(false) => Ok(None),
            Err(e) => Err(e.to_string()),
        };
        let _ = tx.send(outcome);
    });
    match rx.recv_timeout(timeout) {
        Ok(Ok(Some(assignment))) => {
            let mut truth: HashMap<varisat::Var, bool> = HashMap::new();
            for lit in assignment {
                truth.insert(lit.var(), lit.is_positive());
            }
            let mut model = Model::new();
            for (var, bits) in query.var_bits {
                let mut byte = 0u8;
                for (i, b) in bits.iter().enumerate() {
                    let set = match b {
                        Const(v) => *v,
                        L(l) => truth.get(&l.var()).is_some_and(|&t| t == l.is_positive()),
                    };
                    if set {
                        byte |= 1 << i;
                    }
                }
                model.insert(var, byte);
            }
            SatResult::Sat(model)
        }
        Ok(Ok(None)) => SatResult::Unsat,
        Ok(Err(e)) => SatResult::Unknown(UnknownReason::Backend(e)),
        Err(_) => SatResult::Unknown(UnknownReason::Timeout),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Width;

    fn secs(s: u64) -> Duration {
        Duration::from_secs(s)
    }

    #[test]
    fn solves_byte_equation() {
        // zext(x, 24) + 1 == 0x80  =>  x == 0x7F
        let mut t = TermTable::new();
        let id = VarId { call: 0, offset: 0 };
        let x = t.var(id);
        let xw = t.zext(x, 24).unwrap();
        let one = t.constant(Width::W32, 1);
        let sum = t.bin(BinOp::Add, xw, one).unwrap();
        let target = t.constant(Width::W32, 0x80);
        let cond = t.bin(BinOp::Eq, sum, target).unwrap();
        match check(&t, &[cond], secs(30)) {
            SatResult::Sat(m) => assert_eq!(m[&id], 0x7F),
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn refutes_contradiction() {
        let mut t = TermTable::new();
        let id = VarId { call: 0, offset: 0 };
        let x = t.var(id);
        let xw = t.zext(x, 24).unwrap();
        let five = t.constant(Width::W32, 5);
        let nine = t.constant(Width::W32, 9);
        let is5 = t.bin(BinOp::Eq, xw, five).unwrap();
        let is9 = t.bin(BinOp::Eq, xw, nine).unwrap();
        assert!(matches!(check(&t, &[is5, is9], secs(30)), SatResult::Unsat));
    }

    #[test]
    fn constant_assertions_short_circuit() {
        let mut t = TermTable::new();
        let zero = t.constant(Width::W32, 0);
        let one = t.constant(Width::W32, 1);
        assert!(matches!(check(&t, &[zero], secs(30)), SatResult::Unsat));
        assert!(matches!(check(&t, &[one], secs(30)), SatResult::Sat(_)));
    }
}
