//! Word-level `MSB` and `PACK` primitives and their table-driven simulation.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest chunk width accepted by [`build_pack_tables`]; the pack table has `4^chunk_bits` entries.
pub const MAX_CHUNK_BITS: u32 = 12;

/// Isolates the most significant set bit of `x`.
pub fn msb(x: u64) -> Result<u64> {
    if x == 0 {
        return Err(Error::UndefinedOnZero);
    }
    Ok(1u64 << (63 - x.leading_zeros()))
}

/// Bit-by-bit reference for [`msb`].
pub fn msb_loop(x: u64) -> Result<u64> {
    if x == 0 {
        return Err(Error::UndefinedOnZero);
    }
    let mut bit = 1u64 << 63;
    while x & bit == 0 {
        bit >>= 1;
    }
    Ok(bit)
}

/// Gathers the bits of `x` selected by `mask` into the low bits of the result.
/// The highest selected position lands in the most significant output bit.
pub fn pack_loop(x: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    for pos in (0..64).rev() {
        if mask >> pos & 1 == 1 {
            out = (out << 1) | (x >> pos & 1);
        }
    }
    out
}

/// Lookup tables simulating `MSB` and `PACK` on `chunk_bits`-wide slices of a word.
#[derive(Debug, Clone)]
pub struct PackTables {
    chunk_bits: u32,
    // index (mask_chunk << chunk_bits) | x_chunk -> packed bits | count << 16
    pack: Vec<u32>,
    msb: Vec<u16>,
}

/// Builds both tables for the given chunk width.
pub fn build_pack_tables(chunk_bits: u32) -> Result<PackTables> {
    if chunk_bits == 0 || chunk_bits > MAX_CHUNK_BITS {
        return Err(Error::ChunkTooWide(chunk_bits));
    }
    let span = 1usize << chunk_bits;
    let mut pack = vec![0u32; span * span];
    for m in 0..span {
        let count = (m as u32).count_ones();
        for x in 0..span {
            let bits = pack_loop(x as u64, m as u64) as u32;
            pack[(m << chunk_bits) | x] = bits | (count << 16);
        }
    }
    let mut msb_table = vec![0u16; span];
    for (v, slot) in msb_table.iter_mut().enumerate().skip(1) {
        *slot = msb_loop(v as u64).unwrap() as u16;
    }
    Ok(PackTables { chunk_bits, pack, msb: msb_table })
}

impl PackTables {
    pub fn chunk_bits(&self) -> u32 {
        self.chunk_bits
    }

    /// Packed bits and selected-bit count for one chunk pair.
    pub fn pack_entry(&self, x: u64, mask: u64) -> (u64, u32) {
        let e = self.pack[((mask as usize) << self.chunk_bits) | x as usize];
        ((e & 0xffff) as u64, e >> 16)
    }

    pub fn msb_entry(&self, x: u64) -> u64 {
        self.msb[x as usize] as u64
    }

    pub fn pack(&self, x: u64, mask: u64) -> u64 {
        let c = self.chunk_bits;
        let low = (1u64 << c) - 1;
        let chunks = 64u32.div_ceil(c);
        let mut out = 0u64;
        for i in (0..chunks).rev() {
            let shift = i * c;
            let m = (mask >> shift) & low;
            if m == 0 {
                continue;
            }
            let (bits, count) = self.pack_entry((x >> shift) & low, m);
            out = (out << count) | bits;
        }
        out
    }

    pub fn msb(&self, x: u64) -> Result<u64> {
        if x == 0 {
            return Err(Error::UndefinedOnZero);
        }
        let c = self.chunk_bits;
        let low = (1u64 << c) - 1;
        let chunks = 64u32.div_ceil(c);
        for i in (0..chunks).rev() {
            let shift = i * c;
            let v = (x >> shift) & low;
            if v != 0 {
                return Ok(self.msb_entry(v) << shift);
            }
        }
        unreachable!()
    }
}

/// Shared 8-bit tables: a 64-bit word is packed as eight chunk pairs.
pub fn word_tables() -> &'static PackTables {
    static TABLES: OnceLock<PackTables> = OnceLock::new();
    TABLES.get_or_init(|| build_pack_tables(8).expect("8-bit chunks are within the cap"))
}
