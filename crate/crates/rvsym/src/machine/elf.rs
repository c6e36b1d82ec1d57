//! Minimal ELF32 loader for statically linked RV32 executables.
//!
//! Accepts little-endian `ET_EXEC` images for machine `EM_RISCV`,
//! copies every `PT_LOAD` segment into memory and zero-fills the
//! region between file size and memory size (.bss). Anything else is
//! rejected with a descriptive error.

use thiserror::Error;

use super::{ConcolicByte, Memory};

const ELF_MAGIC: [u8; 4] = [0x7F, b'E', b'L', b'F'];
const ELFCLASS32: u8 = 1;
const ELFDATA2LSB: u8 = 1;
const ET_EXEC: u16 = 2;
const EM_RISCV: u16 = 243;
const PT_LOAD: u32 = 1;

#[derive(Error, Clone, Copy, PartialEq, Eq, Debug)]
pub enum ElfError {
    #[error("image too short for ELF header")]
    TooShort,
    #[error("bad ELF magic")]
    BadMagic,
    #[error("not a 32-bit ELF (class {0})")]
    NotClass32(u8),
    #[error("not little-endian (data encoding {0})")]
    NotLittleEndian(u8),
    #[error("not an executable (type {0})")]
    NotExecutable(u16),
    #[error("not a RISC-V image (machine {0})")]
    NotRiscV(u16),
    #[error("program header {index} reaches outside the image")]
    HeaderOutOfBounds { index: u16 },
    #[error("segment {index} file data reaches outside the image")]
    SegmentOutOfBounds { index: u16 },
    #[error("segment {index} file size exceeds its memory size")]
    SegmentSizeInverted { index: u16 },
    #[error("segments {first} and {second} overlap in memory")]
    OverlappingSegments { first: u16, second: u16 },
    #[error("no loadable segments")]
    NoLoadableSegments,
}

fn u16_at(image: &[u8], off: usize) -> u16 {
    u16::from_le_bytes([image[off], image[off + 1]])
}

fn u32_at(image: &[u8], off: usize) -> u32 {
    u32::from_le_bytes([image[off], image[off + 1], image[off + 2], image[off + 3]])
}

/// Load all `PT_LOAD` segments into `mem`; returns the entry point.
pub fn load(image: &[u8], mem: &mut Memory) -> Result<u32, ElfError> {
    if image.len() < 52 {
        return Err(ElfError::TooShort);
    }
    if image[0..4] != ELF_MAGIC {
        return Err(ElfError::BadMagic);
    }
    if image[4] != ELFCLASS32 {
        return Err(ElfError::NotClass32(image[4]));
    }
    if image[5] != ELFDATA2LSB {
        return Err(ElfError::NotLittleEndian(image[5]));
    }
    let e_type = u16_at(image, 16);
    if e_type != ET_EXEC {
        return Err(ElfError::NotExecutable(e_type));
    }
    let e_machine = u16_at(image, 18);
    if e_machine != EM_RISCV {
        return Err(ElfError::NotRiscV(e_machine));
    }
    let entry = u32_at(image, 24);
    let phoff = u32_at(image, 28) as usize;
    let phentsize = u16_at(image, 42) as usize;
    let phnum = u16_at(image, 44);

    let mut loaded: Vec<(u16, u32, u32)> = Vec::new(); // (index, start, len)
    for index in 0..phnum {
        let off = phoff + usize::from(index) * phentsize;
        if off + 32 > image.len() {
            return Err(ElfError::HeaderOutOfBounds { index });
        }
        let p_type = u32_at(image, off);
        if p_type != PT_LOAD {
            continue;
        }
        let p_offset = u32_at(image, off + 4) as usize;
        let p_vaddr = u32_at(image, off + 8);
        let p_filesz = u32_at(image, off + 16) as usize;
        let p_memsz = u32_at(image, off + 20);
        if p_filesz as u32 > p_memsz {
            return Err(ElfError::SegmentSizeInverted { index });
        }
        if p_offset + p_filesz > image.len() {
            return Err(ElfError::SegmentOutOfBounds { index });
        }
        if p_memsz == 0 {
            continue;
        }
        for &(other, start, len) in &loaded {
            let end = start.wrapping_add(len);
            let this_end = p_vaddr.wrapping_add(p_memsz);
            if p_vaddr < end && start < this_end {
                return Err(ElfError::OverlappingSegments { first: other, second: index });
            }
        }
        loaded.push((index, p_vaddr, p_memsz));
        for i in 0..p_memsz {
            let value = if (i as usize) < p_filesz {
                image[p_offset + i as usize]
            } else {
                0
            };
            mem.write_byte(p_vaddr.wrapping_add(i), ConcolicByte::concrete(value));
        }
    }
    if loaded.is_empty() {
        return Err(ElfError::NoLoadableSegments);
    }
    Ok(entry)
}


#[cfg(test)]
mod tests {
    use super::*;
    use testutil::make_elf;

    #[test]
    fn loads_segment_and_bss() {
        let image = make_elf(&[0x13, 0x00, 0x00, 0x00], 0x10000, 0x10000, 4);
        let mut mem = Memory::new();
        let entry = load(&image, &mut mem).unwrap();
        assert_eq!(entry, 0x10000);
        assert_eq!(mem.read_byte(0x10000).unwrap().concrete, 0x13);
        assert_eq!(mem.read_byte(0x10004).unwrap().concrete, 0, "bss zero-filled");
        assert_eq!(mem.mapped_bytes(), 8);
    }

    #[test]
    fn rejects_foreign_images() {
        let mut mem = Memory::new();
        assert_eq!(load(b"short", &mut mem), Err(ElfError::TooShort));

        let mut bad_magic = make_elf(&[0; 4], 0x10000, 0x10000, 0);
        bad_magic[0] = 0x7E;
        assert_eq!(load(&bad_magic, &mut mem), Err(ElfError::BadMagic));

        let mut class64 = make_elf(&[0; 4], 0x10000, 0x10000, 0);
        class64[4] = 2;
        assert_eq!(load(&class64, &mut mem), Err(ElfError::NotClass32(2)));

        let mut x86 = make_elf(&[0; 4], 0x10000, 0x10000, 0);
        x86[18..20].copy_from_slice(&3u16.to_le_bytes());
        assert_eq!(load(&x86, &mut mem), Err(ElfError::NotRiscV(3)));

        let mut dyn_obj = make_elf(&[0; 4], 0x10000, 0x10000, 0);
        dyn_obj[16..18].copy_from_slice(&3u16.to_le_bytes());
        assert_eq!(load(&dyn_obj, &mut mem), Err(ElfError::NotExecutable(3)));
    }

    #[test]
    fn rejects_truncated_segment() {
        let mut image = make_elf(&[1, 2, 3, 4, 5, 6, 7, 8], 0x10000, 0x10000, 0);
        image.truncate(image.len() - 4);
        let mut mem = Memory::new();
        assert_eq!(
            load(&image, &mut mem),
            Err(ElfError::SegmentOutOfBounds { index: 0 })
        );
    }
}
