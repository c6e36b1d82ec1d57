//! SMT-LIB 2 (QF_BV) rendering of term graphs.
//!
//! Every arena node in the cone of the assertions becomes one
//! `define-fun`, preserving the DAG sharing of the term table.
//! Division operators are wrapped in explicit zero-divisor guards so
//! the query pins down the non-trapping convention (quotient all-ones,
//! remainder equals the dividend) rather than relying on each solver's
//! reading of the bit-vector theory's corner cases.

use std::fmt::Write;

use crate::expr::{BinOp, Width};

use super::term::{Term, TermHandle, TermTable};

fn bv(value: u64, width: Width) -> String {
    format!("(_ bv{value} {width})")
}

fn node_ref(table: &TermTable, id: u32) -> String {
    match table.node(id) {
        Term::Var(v) => v.to_string(),
        _ => format!("t{id}"),
    }
}

fn bin_smt(op: BinOp, a: &str, b: &str, w: Width) -> String {
    let bool_out = |pred: String| {
        format!("(ite {pred} {} {})", bv(1, w), bv(0, w))
    };
    match op {
        BinOp::Add => format!("(bvadd {a} {b})"),
        BinOp::Sub => format!("(bvsub {a} {b})"),
        BinOp::And => format!("(bvand {a} {b})"),
        BinOp::Or => format!("(bvor {a} {b})"),
        BinOp::Xor => format!("(bvxor {a} {b})"),
        BinOp::Sll => format!("(bvshl {a} {b})"),
        BinOp::Srl => format!("(bvlshr {a} {b})"),
        BinOp::Sra => format!("(bvashr {a} {b})"),
        BinOp::Mul => format!("(bvmul {a} {b})"),
        BinOp::MulhSS | BinOp::MulhUU | BinOp::MulhSU => {
            let bits = w.bits();
            let ext = |signed: bool, x: &str| {
                if signed {
                    format!("((_ sign_extend {bits}) {x})")
                } else {
                    format!("((_ zero_extend {bits}) {x})")
                }
            };
            let (sa, sb) = match op {
                BinOp::MulhSS => (true, true),
                BinOp::MulhSU => (true, false),
                _ => (false, false),
            };
            format!(
                "((_ extract {} {}) (bvmul {} {}))",
                2 * bits - 1,
                bits,
                ext(sa, a),
                ext(sb, b)
            )
        }
        BinOp::DivU => format!(
            "(ite (= {b} {z}) {ones} (bvudiv {a} {b}))",
            z = bv(0, w),
            ones = bv(w.mask(), w)
        ),
        BinOp::RemU => format!("(ite (= {b} {z}) {a} (bvurem {a} {b}))", z = bv(0, w)),
        BinOp::DivS => format!(
            "(ite (= {b} {z}) {ones} (bvsdiv {a} {b}))",
            z = bv(0, w),
            ones = bv(w.mask(), w)
        ),
        BinOp::RemS => format!("(ite (= {b} {z}) {a} (bvsrem {a} {b}))", z = bv(0, w)),
        BinOp::Eq => bool_out(format!("(= {a} {b})")),
        BinOp::Neq => bool_out(format!("(distinct {a} {b})")),
        BinOp::SltS => bool_out(format!("(bvslt {a} {b})")),
        BinOp::SgeS => bool_out(format!("(bvsge {a} {b})")),
        BinOp::SltU => bool_out(format!("(bvult {a} {b})")),
        BinOp::SgeU => bool_out(format!("(bvuge {a} {b})")),
    }
}

/// Render a complete `check-sat` script asserting every handle
/// nonzero, ending with a `get-value` over the input variables.
pub fn render_query(table: &TermTable, assertions: &[TermHandle]) -> String {
    let mut out = String::new();
    out.push_str("(set-option :produce-models true)\n(set-logic QF_BV)\n");
    let vars = table.vars_in(assertions);
    for v in &vars {
        let _ = writeln!(out, "(declare-const {v} (_ BitVec 8))");
    }
    for id in table.cone(assertions) {
        let w = table.node_width(id);
        let body = match table.node(id) {
            Term::Var(_) => continue,
            Term::Const { width, value } => bv(value, width),
            Term::ZExt { extra, inner } => {
                format!("((_ zero_extend {extra}) {})", node_ref(table, inner.id()))
            }
            Term::SExt { extra, inner } => {
                format!("((_ sign_extend {extra}) {})", node_ref(table, inner.id()))
            }
            Term::Extract { low, width, inner } => format!(
                "((_ extract {} {}) {})",
                u32::from(low) + width.bits() - 1,
                low,
                node_ref(table, inner.id())
            ),
            Term::Bin { op, lhs, rhs } => bin_smt(
                op,
                &node_ref(table, lhs.id()),
                &node_ref(table, rhs.id()),
                lhs.width(),
            ),
        };
        let _ = writeln!(out, "(define-fun t{id} () (_ BitVec {w}) {body})");
    }
    for h in assertions {
        let _ = writeln!(
            out,
            "(assert (distinct {} {}))",
            node_ref(table, h.id()),
            bv(0, h.width())
        );
    }
    out.push_str("(check-sat)\n");
    if !vars.is_empty() {
        let names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "(get-value ({}))", names.join(" "));
    }
    out
}
