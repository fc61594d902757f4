//! Basis blades of 3D conformal geometric algebra.
//!
//! A blade is identified by a generator mask: bit 0 is e1, bit 1 e2, bit 2
//! e3, bit 3 e0 and bit 4 e∞. The blade of a mask is the outer product of
//! its generators in that order, so `E1 | EINF` is e1∧e∞ and
//! `E0 | EINF` is e0∧e∞. Coefficient storage orders blades by grade and
//! lexicographically within a grade.

mod tables {
    include!(concat!(env!("OUT_DIR"), "/cga_tables.rs"));
}

pub(crate) use tables::*;

pub const COUNT: usize = 32;

pub const SCALAR: u8 = 0;
pub const E1: u8 = 1 << 0;
pub const E2: u8 = 1 << 1;
pub const E3: u8 = 1 << 2;
pub const E0: u8 = 1 << 3;
pub const EINF: u8 = 1 << 4;

/// Storage index of the blade with the given generator mask.
pub const fn index(mask: u8) -> usize {
    let mut i = 0;
    while i < COUNT {
        if BLADE_MASKS[i] == mask {
            return i;
        }
        i += 1;
    }
    panic!("blade mask out of range");
}

/// Generator mask of the blade stored at `index`.
pub const fn mask(index: usize) -> u8 {
    BLADE_MASKS[index]
}

pub const fn grade(index: usize) -> usize {
    BLADE_GRADES[index] as usize
}

/// Writes the conventional name of a blade, e.g. `e12`, `e3∞`, `e0∞`.
pub fn write_name(f: &mut impl core::fmt::Write, index: usize) -> core::fmt::Result {
    let m = mask(index);
    if m == 0 {
        return f.write_str("1");
    }
    f.write_str("e")?;
    for (bit, name) in ["1", "2", "3", "0", "∞"].iter().enumerate() {
        if m & (1 << bit) != 0 {
            f.write_str(name)?;
        }
    }
    Ok(())
}
