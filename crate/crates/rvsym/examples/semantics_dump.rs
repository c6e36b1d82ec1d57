//! Print the effect sequence denoting each of a few instructions.
//!
//! Every decoded instruction maps to a short list of effect
//! operations over width-annotated bit-vector expressions: register
//! and memory reads bind numbered slots, computed expressions flow
//! into register writes, stores, and guarded program counter updates.
//! The interpreter executes these sequences; nothing else knows what
//! an `add` or a `beq` means.
//!
//! Run with: `cargo run --example semantics_dump`

use rvsym::isa::{decode, semantics_of};

fn main() {
    let words: &[u32] = &[
        0x00b5_0533, // add a0, a0, a1
        0x02b5_5533, // divu a0, a0, a1
        0x0045_2583, // lw a1, 4(a0)
        0xfea5_2e23, // sw a0, -4(a0)
        0x00b5_0463, // beq a0, a1, 8
        0x0005_05e7, // jalr a1, 0(a0)
        0x0100_00ef, // jal ra, 16
        0x0001_2537, // lui a0, 18
    ];

    for &w in words {
        let instr = decode(w).expect("word decodes");
        let sem = semantics_of(&instr);
        println!("{instr}");
        println!("  slots: {}", sem.slots);
        for line in sem.to_string().lines() {
            println!("  | {line}");
        }
        println!();
    }
}
