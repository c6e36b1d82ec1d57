#!/usr/bin/env python3
"""Regenerate tests/data/decode_corpus.txt from assembler output.

Emits a few thousand RV32IM instructions in canonical syntax, assembles
them with clang's integrated assembler, and freezes `<hex word>\t<text>`
lines. Branches and JALs reference per-instruction labels because the
assembler rejects bare `. + offset` expressions; `-mno-relax` makes it
resolve those fixups at assembly time instead of leaving relocations.
"""

import random
import struct
import subprocess
import sys
import tempfile
from pathlib import Path

SEED = 0x52563332
ROUNDS = 26
CLANG = ["clang", "--target=riscv32", "-march=rv32im", "-mabi=ilp32", "-mno-relax"]
OUT = Path(__file__).resolve().parent.parent / "crates/rvsym/tests/data/decode_corpus.txt"

R_ALU = [
    "add", "sub", "sll", "slt", "sltu", "xor", "srl", "sra", "or", "and",
    "mul", "mulh", "mulhsu", "mulhu", "div", "divu", "rem", "remu",
]
I_ALU = ["addi", "slti", "sltiu", "xori", "ori", "andi"]
SHIFTS = ["slli", "srli", "srai"]
LOADS = ["lb", "lh", "lw", "lbu", "lhu"]
STORES = ["sb", "sh", "sw"]
BRANCHES = ["beq", "bne", "blt", "bge", "bltu", "bgeu"]
MNEMONICS = (
    ["lui", "auipc", "jal", "jalr", "fence", "ecall", "ebreak"]
    + BRANCHES + LOADS + STORES + I_ALU + SHIFTS + R_ALU
)


def gen_stream(rng):
    """Yield (index, mnemonic) covering every mnemonic ROUNDS times."""
    stream = MNEMONICS * ROUNDS
    rng.shuffle(stream)
    return stream


def render(rng, index, total, mnemonic):
    """Return (asm operand text, canonical text) for one instruction.

    Branch and JAL targets are picked as label indices; the canonical
    text shows the equivalent byte offset.
    """
    reg = lambda: rng.randrange(32)
    imm12 = lambda: rng.randrange(-2048, 2048)
    if mnemonic in ("lui", "auipc"):
        rd, imm = reg(), rng.randrange(1 << 20)
        return f"{mnemonic} x{rd}, {imm}", f"{mnemonic} x{rd}, {imm}"
    if mnemonic == "jal":
        rd, target = reg(), rng.randrange(total)
        return f"jal x{rd}, L{target}", f"jal x{rd}, {4 * (target - index)}"
    if mnemonic == "jalr":
        rd, rs1, imm = reg(), reg(), imm12()
        return f"jalr x{rd}, {imm}(x{rs1})", f"jalr x{rd}, {imm}(x{rs1})"
    if mnemonic in BRANCHES:
        rs1, rs2 = reg(), reg()
        lo, hi = max(0, index - 1000), min(total - 1, index + 1000)
        target = rng.randrange(lo, hi + 1)
        asm = f"{mnemonic} x{rs1}, x{rs2}, L{target}"
        return asm, f"{mnemonic} x{rs1}, x{rs2}, {4 * (target - index)}"
    if mnemonic in LOADS:
        rd, rs1, imm = reg(), reg(), imm12()
        return f"{mnemonic} x{rd}, {imm}(x{rs1})", f"{mnemonic} x{rd}, {imm}(x{rs1})"
    if mnemonic in STORES:
        rs2, rs1, imm = reg(), reg(), imm12()
        return f"{mnemonic} x{rs2}, {imm}(x{rs1})", f"{mnemonic} x{rs2}, {imm}(x{rs1})"
    if mnemonic in I_ALU:
        rd, rs1, imm = reg(), reg(), imm12()
        return f"{mnemonic} x{rd}, x{rs1}, {imm}", f"{mnemonic} x{rd}, x{rs1}, {imm}"
    if mnemonic in SHIFTS:
        rd, rs1, sh = reg(), reg(), rng.randrange(32)
        return f"{mnemonic} x{rd}, x{rs1}, {sh}", f"{mnemonic} x{rd}, x{rs1}, {sh}"
    if mnemonic in R_ALU:
        rd, rs1, rs2 = reg(), reg(), reg()
        return f"{mnemonic} x{rd}, x{rs1}, x{rs2}", f"{mnemonic} x{rd}, x{rs1}, x{rs2}"
    assert mnemonic in ("fence", "ecall", "ebreak")
    return mnemonic, mnemonic


def edge_cases(start, total):
    """Fixed extreme operands appended after the random stream."""
    cases = [
        ("addi x0, x0, 0", None),
        ("addi x31, x31, -2048", None),
        ("addi x1, x2, 2047", None),
        ("lui x0, 0", None),
        ("lui x31, 1048575", None),
        ("auipc x15, 524288", None),
        ("slli x1, x1, 0", None),
        ("srai x5, x6, 31", None),
        ("jalr x0, -2048(x31)", None),
        ("jalr x1, 2047(x0)", None),
        ("lw x1, -2048(x2)", None),
        ("sw x31, 2047(x1)", None),
        ("sltiu x3, x4, -1", None),
    ]
    out = [(asm, canon if canon else asm) for asm, canon in cases]
    # Branch displacement extremes need labels at exact distances.
    idx = start + len(out)
    out.append((f"beq x0, x0, L{idx - 1024}", f"beq x0, x0, {-4096}"))
    idx += 1
    out.append((f"jal x0, L0", f"jal x0, {-4 * idx}"))
    assert start + len(out) == total
    return out


def text_words(obj):
    """Pull the .text section out of a 32-bit little-endian ELF."""
    data = obj.read_bytes()
    assert data[:4] == b"\x7fELF" and data[4] == 1 and data[5] == 1
    shoff = struct.unpack_from("<I", data, 32)[0]
    shentsize, shnum, shstrndx = struct.unpack_from("<HHH", data, 46)
    headers = [
        struct.unpack_from("<IIIIIIIIII", data, shoff + i * shentsize)
        for i in range(shnum)
    ]
    stroff = headers[shstrndx][4]
    for name, typ, _flags, _addr, off, size, *_ in headers:
        end = data.index(b"\0", stroff + name)
        label = data[stroff + name : end].decode()
        if label.startswith(".rela"):
            raise SystemExit(f"unresolved relocations in {label}")
        if label == ".text":
            return list(struct.unpack_from(f"<{size // 4}I", data, off))
    raise SystemExit("no .text section")


def main():
    rng = random.Random(SEED)
    stream = gen_stream(rng)
    total = len(stream) + 15
    rows = [render(rng, i, total, m) for i, m in enumerate(stream)]
    rows += edge_cases(len(stream), total)

    asm = ".text\n" + "".join(
        f"L{i}:\n\t{body}\n" for i, (body, _) in enumerate(rows)
    )
    with tempfile.TemporaryDirectory() as tmp:
        src = Path(tmp, "corpus.s")
        obj = Path(tmp, "corpus.o")
        src.write_text(asm)
        subprocess.run(CLANG + ["-c", str(src), "-o", str(obj)], check=True)
        words = text_words(obj)

    if len(words) != len(rows):
        raise SystemExit(f"expected {len(rows)} words, assembler emitted {len(words)}")
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w") as fh:
        for word, (_, canon) in zip(words, rows):
            fh.write(f"{word:08x}\t{canon}\n")
    print(f"wrote {len(words)} instructions to {OUT}", file=sys.stderr)


if __name__ == "__main__":
    main()
