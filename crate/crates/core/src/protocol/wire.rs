//! Byte layout of a message (little-endian throughout):
//!
//! ```text
//! "HSYN" | version u16 | flags u16 | u u64 | u_round_log u8 | sigma u64 | n u64 | k u64
//! top:   tag u8, then
//!          large: r u8 | a u128 | b u128 | P u64 | a2 u64 | b2 u64 | c2 u64
//!          small: q u64 | A u64 | a.hi a.lo b.hi b.lo c.hi c.lo (u64 each)
//! 3 × redundancy: symbol_bits u16 | chunk_bits u8 | chunk_count u16 | byte_len u32 | payload
//! crc32 u32 over everything before it
//! ```

use crate::error::{Error, Result};
use crate::field::{is_prime, Fq2Element, PrimeField, QuadExtField};
use crate::fks::{small_universe_prime, TopHash, TopHashDescriptor, Variant, MAX_KEYS};
use crate::hashing::families::{g1_output_bits, QuadExtPoly, ThreeWiseParams, TwoWiseParams};
use crate::protocol::{ArrayWidths, Message, ProblemParams};
use crate::rs::chunked::ChunkedRedundancy;
use crate::rs::codec::field_bits;
use crate::rs::gf2m::MAX_BITS;

pub const MAGIC: &[u8; 4] = b"HSYN";
pub const VERSION: u16 = 1;

const FLAG_SMALL: u16 = 1;
const FLAG_NO_BUDGET: u16 = 2;

const TAG_LARGE: u8 = 0;
const TAG_SMALL: u8 = 1;
const TAG_EMPTY: u8 = 2;

/// Bytes of magic, version and checksum.
pub const FRAME_BYTES: usize = 4 + 2 + 4;
/// Bytes of each redundancy block header.
pub const BLOCK_HEADER_BYTES: usize = 2 + 1 + 2 + 4;

pub fn serialize(msg: &Message) -> Vec<u8> {
    let p = &msg.params;
    let mut out = Vec::with_capacity(256);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let mut flags = 0u16;
    if p.variant == Variant::SmallUniverse {
        flags |= FLAG_SMALL;
    }
    if p.k == 0 {
        flags |= FLAG_NO_BUDGET;
    }
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&p.u.to_le_bytes());
    out.push(p.u_round_log as u8);
    out.extend_from_slice(&p.sigma.to_le_bytes());
    out.extend_from_slice(&p.n.to_le_bytes());
    out.extend_from_slice(&p.k.to_le_bytes());
    match &msg.top {
        TopHashDescriptor::Large { g1, g2 } => {
            out.push(TAG_LARGE);
            out.push(g1.universe_bits as u8);
            out.extend_from_slice(&g1.a.to_le_bytes());
            out.extend_from_slice(&g1.b.to_le_bytes());
            for v in [g2.p, g2.a, g2.b, g2.c] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        TopHashDescriptor::Small(poly) => {
            out.push(TAG_SMALL);
            out.extend_from_slice(&poly.field.modulus().to_le_bytes());
            out.extend_from_slice(&poly.field.nonresidue().to_le_bytes());
            for e in [poly.a, poly.b, poly.c] {
                out.extend_from_slice(&e.hi.to_le_bytes());
                out.extend_from_slice(&e.lo.to_le_bytes());
            }
        }
        TopHashDescriptor::Empty => out.push(TAG_EMPTY),
    }
    for red in [&msg.red_b, &msg.red_buckets, &msg.red_cells] {
        let payload = red.payload();
        out.extend_from_slice(&(red.symbol_bits as u16).to_le_bytes());
        out.push(red.chunk_bits as u8);
        out.extend_from_slice(&(red.chunk_count as u16).to_le_bytes());
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&payload);
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).ok_or(Error::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(Error::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.array()?))
    }
}

fn malformed(what: &str) -> Error {
    Error::Malformed(what.to_string())
}

fn read_top(r: &mut Reader, p: &ProblemParams) -> Result<TopHashDescriptor> {
    match r.u8()? {
        TAG_LARGE => {
            let universe_bits = r.u8()? as u32;
            let (a, b) = (r.u128()?, r.u128()?);
            let (prime, a2, b2, c2) = (r.u64()?, r.u64()?, r.u64()?, r.u64()?);
            if p.n == 0 || p.n > MAX_KEYS || p.variant != Variant::LargeUniverse {
                return Err(malformed("large-universe descriptor"));
            }
            if universe_bits != p.u_round_log {
                return Err(malformed("first-level universe width"));
            }
            let g1 = TwoWiseParams { a, b, universe_bits, out_bits: g1_output_bits(p.n) };
            let w = (2 * universe_bits).max(g1.out_bits).min(128);
            if a & 1 == 0 || (w < 128 && (a >> w != 0 || b >> w != 0)) {
                return Err(malformed("first-level multiplier"));
            }
            let s = g1.out_bits;
            if prime >> s != 1 || !is_prime(prime) || a2 >= prime || b2 >= prime || c2 >= prime {
                return Err(malformed("second-level polynomial"));
            }
            Ok(TopHashDescriptor::Large { g1, g2: ThreeWiseParams { p: prime, a: a2, b: b2, c: c2 } })
        }
        TAG_SMALL => {
            let (q, nonresidue) = (r.u64()?, r.u64()?);
            let mut coef = [Fq2Element::ZERO; 3];
            for c in coef.iter_mut() {
                *c = Fq2Element::new(r.u64()?, r.u64()?);
            }
            if p.n == 0 || p.variant != Variant::SmallUniverse || q != small_universe_prime(p.u_round_log)? {
                return Err(malformed("small-universe descriptor"));
            }
            let field = QuadExtField::with_nonresidue(PrimeField::new(q)?, nonresidue)
                .map_err(|_| malformed("extension field"))?;
            if coef.iter().any(|c| c.hi >= q || c.lo >= q) || coef[0].is_zero() {
                return Err(malformed("extension coefficients"));
            }
            Ok(TopHashDescriptor::Small(QuadExtPoly { field, a: coef[0], b: coef[1], c: coef[2] }))
        }
        TAG_EMPTY if p.n == 0 => Ok(TopHashDescriptor::Empty),
        _ => Err(malformed("descriptor tag")),
    }
}

// `min_len` bounds the coded array length from below; it is exact unless `exact` is false.
fn read_redundancy(r: &mut Reader, min_len: usize, exact: bool, symbol_bits: u32, k: u64) -> Result<ChunkedRedundancy> {
    let bits = r.u16()? as u32;
    let chunk_bits = r.u8()? as u32;
    let chunk_count = r.u16()? as u32;
    let byte_len = r.u32()? as usize;
    let payload = r.take(byte_len)?;
    let least = field_bits(min_len, k as usize);
    let width_ok = if exact { chunk_bits == least } else { (least..=MAX_BITS).contains(&chunk_bits) };
    if bits != symbol_bits || !width_ok {
        return Err(malformed("redundancy geometry"));
    }
    ChunkedRedundancy::from_payload(bits, chunk_bits, chunk_count, 2 * k as usize, payload)
}

pub fn deserialize(bytes: &[u8]) -> Result<Message> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4).map_err(|_| Error::BadMagic)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let flags = r.u16()?;
    let u = r.u64()?;
    let u_round_log = r.u8()? as u32;
    let sigma = r.u64()?;
    let n = r.u64()?;
    let k = r.u64()?;
    let params = ProblemParams::new(u, sigma, n, k).map_err(|_| malformed("parameters"))?;
    if u == 0 || sigma < 2 || params.u_round_log != u_round_log {
        return Err(malformed("parameters"));
    }
    let expected_flags =
        (u16::from(params.variant == Variant::SmallUniverse) * FLAG_SMALL) | (u16::from(k == 0) * FLAG_NO_BUDGET);
    if flags != expected_flags {
        return Err(malformed("flags"));
    }
    let top = read_top(&mut r, &params)?;
    let eval = TopHash::new(top.clone(), n)?;
    let widths = ArrayWidths::new(&params, &eval)?;
    let red_b = read_redundancy(&mut r, n as usize, true, widths.count_bits, k)?;
    let red_buckets = read_redundancy(&mut r, n as usize, true, widths.record_bits(), k)?;
    // The cell table size is only known once the bucket sizes are corrected.
    let red_cells = read_redundancy(&mut r, 4 * n as usize, n == 0, widths.cell_bits(), k)?;
    let crc = r.u32()?;
    if r.pos != bytes.len() {
        return Err(malformed("trailing bytes"));
    }
    if crc32fast::hash(&bytes[..bytes.len() - 4]) != crc {
        return Err(Error::ChecksumMismatch);
    }
    Ok(Message { params, top, red_b, red_buckets, red_cells })
}
