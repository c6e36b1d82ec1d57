//! Build bit-vector constraints by hand and solve them.
//!
//! A solver session interns expressions into a hash-consed term
//! table, answers satisfiability queries through the built-in
//! bit-blasting backend, and evaluates any interned term under a
//! model. The same machinery runs under the explorer; here it is
//! driven directly.
//!
//! Run with: `cargo run --example solver_basics`

use rvsym::expr::{BinOp, BvExpr, Width};
use rvsym::solver::{SatResult, Session, SolverConfig, VarId};

fn main() {
    let mut session = Session::new(SolverConfig::default());

    // Symbolic inputs are bytes; widen to 32 bits to do word math.
    let x = VarId { call: 0, offset: 0 };
    let x_term = session.var(x);
    let x_wide = || BvExpr::leaf(x_term).zext(24);

    // 3 * x + 7 == 52 has exactly one solution over bytes.
    let goal = BvExpr::bin(BinOp::Mul, x_wide(), BvExpr::int(Width::W32, 3))
        .add(BvExpr::int(Width::W32, 7))
        .eq(BvExpr::int(Width::W32, 52));
    let goal = session.lower(&goal).expect("well-formed expression");

    match session.check(&[goal]) {
        SatResult::Sat(model) => {
            println!("sat, model:");
            for (var, value) in &model {
                println!("  {var} = {value}");
            }
            assert_eq!(model.get(&x), Some(&15));
            // Terms evaluate under any model; a comparison term is
            // 0 or 1 at its width.
            assert_eq!(session.eval(x_term, &model), 15);
            assert_eq!(session.eval(goal, &model), 1);
        }
        other => panic!("expected sat, got {other:?}"),
    }

    // Queries take a list of assertions, all of which must hold at
    // once. Adding x >= 100 contradicts the unique solution.
    let floor = BvExpr::bin(BinOp::SgeU, x_wide(), BvExpr::int(Width::W32, 100));
    let floor = session.lower(&floor).expect("well-formed expression");
    match session.check(&[goal, floor]) {
        SatResult::Unsat => println!("\nwith x >= 100: unsat"),
        other => panic!("expected unsat, got {other:?}"),
    }

    // Every query can be rendered as a standalone SMT-LIB script,
    // which is also what the external-solver backend ships out.
    println!("\nquery as SMT-LIB:");
    for line in session.render_smtlib(&[goal, floor]).lines() {
        println!("  {line}");
    }

    let stats = session.stats();
    println!(
        "\n{} queries ({} sat, {} unsat) in {:?}",
        stats.queries, stats.sat, stats.unsat, stats.solve_time
    );
}
