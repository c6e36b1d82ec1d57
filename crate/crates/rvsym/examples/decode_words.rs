//! Decode raw RV32IM instruction words and round-trip them through
//! the encoder.
//!
//! Run with: `cargo run --example decode_words`

use rvsym::isa::{decode, encode};

fn main() {
    // A cross-section of the encodings: U/J/I/B/S/R formats, the M
    // extension, and the system instructions.
    let words: &[u32] = &[
        0x0001_2537, // lui a0, 18
        0x0000_0517, // auipc a0, 0
        0x0100_00ef, // jal ra, 16
        0x0001_0067, // jalr zero, 0(sp)
        0x00b5_0463, // beq a0, a1, 8
        0xfea5_dce3, // bge a1, a0, -8
        0x0045_2583, // lw a1, 4(a0)
        0xfea5_2e23, // sw a0, -4(a0)
        0x7ff5_0513, // addi a0, a0, 2047
        0x4015_5513, // srai a0, a0, 1
        0x00b5_0533, // add a0, a0, a1
        0x02b5_4533, // div a0, a0, a1
        0x02b5_1533, // mulh a0, a0, a1
        0x0ff0_000f, // fence (canonical iorw, iorw word)
        0x0000_0073, // ecall
        0x0010_0073, // ebreak
    ];

    for &w in words {
        let instr = decode(w).expect("word decodes");
        let back = encode(&instr);
        assert_eq!(back, w, "encode(decode(w)) must reproduce w");
        println!("{w:08x}  {instr}");
    }

    // Words outside RV32IM are rejected, not guessed at. A clear low
    // bit pair marks a compressed encoding, which is out of scope.
    for &bad in &[0x0000_4501_u32, 0xffff_ffff_u32] {
        match decode(bad) {
            Ok(i) => println!("{bad:08x}  unexpectedly decoded: {i}"),
            Err(e) => println!("{bad:08x}  rejected: {e}"),
        }
    }
}
