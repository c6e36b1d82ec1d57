//! Concolic execution engine for 32-bit RISC-V (RV32IM) binaries.
//!
//! The engine interprets machine code directly: each decoded
//! instruction denotes a short sequence of effect operations over a
//! width-annotated bit-vector expression language, and one interpreter
//! runs that sequence both concretely and symbolically at once. Branch
//! conditions that depend on symbolic input are recorded and later
//! negated to steer new runs down unexplored paths, using either a
//! built-in bit-blasting SAT backend or an external SMT solver.
//!
//! Layer map, bottom up:
//!
//! - [`expr`]: the expression language and its concrete evaluator
//! - [`isa`]: RV32IM decode/encode and per-instruction semantics
//! - [`solver`]: term interning, satisfiability checks, models
//! - [`machine`]: registers, byte-granular concolic memory, ELF loading
//! - [`engine`]: the concolic interpreter and hypercall interface
//! - [`explorer`]: execution tree, path conditions, exploration loop
//! - [`bench`]: path-count benchmark harness
//!
//! The `examples/` directory exercises each capability end to end;
//! the `rvsym` binary wraps the same entry points behind a CLI.

pub mod bench;
pub mod config;
pub mod engine;
pub mod explorer;
pub mod expr;
pub mod isa;
pub mod machine;
pub mod solver;
