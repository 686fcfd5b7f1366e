//! Redundancy for arrays of wide symbols: each symbol is cut into field-width
//! chunks, and chunk `i` of every symbol forms stream `i`, coded independently.

use crate::error::{Error, Result};
use crate::rs::codec::RsCode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkedRedundancy {
    pub symbol_bits: u32,
    pub chunk_bits: u32,
    pub chunk_count: u32,
    /// `streams[i]` holds the `2k` check symbols of chunk stream `i`.
    pub streams: Vec<Vec<u32>>,
}

// A zero width yields no streams.
fn chunk_layout(len: usize, symbol_bits: u32, k: usize) -> Result<(RsCode, u32)> {
    if symbol_bits > 128 {
        return Err(Error::ParameterOverflow(format!("{symbol_bits}-bit symbols")));
    }
    let code = RsCode::new(len, k)?;
    let count = symbol_bits.div_ceil(code.bits());
    Ok((code, count))
}

fn slice(symbols: &[u128], shift: u32, bits: u32) -> Vec<u32> {
    let mask = (1u128 << bits) - 1;
    symbols.iter().map(|&v| if shift >= 128 { 0 } else { ((v >> shift) & mask) as u32 }).collect()
}

/// Redundancy for `symbols`, each below `2^symbol_bits`, tolerating `k` substitutions.
pub fn chunked_encode(symbols: &[u128], symbol_bits: u32, k: usize) -> Result<ChunkedRedundancy> {
    let (code, chunk_count) = chunk_layout(symbols.len(), symbol_bits, k)?;
    if symbol_bits < 128 && symbols.iter().any(|&v| v >> symbol_bits != 0) {
        return Err(Error::ValueOutOfRange);
    }
    let c = code.bits();
    let streams = (0..chunk_count).map(|i| code.encode(&slice(symbols, i * c, c))).collect::<Result<Vec<_>>>()?;
    Ok(ChunkedRedundancy { symbol_bits, chunk_bits: c, chunk_count, streams })
}

/// Restores the encoded array from a copy differing in at most `k` symbols.
pub fn chunked_correct(symbols: &[u128], red: &ChunkedRedundancy, k: usize) -> Result<Vec<u128>> {
    let (code, chunk_count) = chunk_layout(symbols.len(), red.symbol_bits, k)?;
    if code.bits() != red.chunk_bits || chunk_count != red.chunk_count {
        return Err(Error::Malformed("redundancy geometry".into()));
    }
    let c = code.bits();
    let sym_mask = if red.symbol_bits == 128 { u128::MAX } else { (1u128 << red.symbol_bits) - 1 };
    let mut out = vec![0u128; symbols.len()];
    for (i, stream) in red.streams.iter().enumerate() {
        let shift = i as u32 * c;
        let fixed = code.correct(&slice(symbols, shift, c), stream)?;
        for (o, v) in out.iter_mut().zip(fixed) {
            *o |= (v as u128) << shift;
        }
    }
    if out.iter().any(|&v| v & !sym_mask != 0) {
        return Err(Error::Uncorrectable);
    }
    Ok(out)
}

impl ChunkedRedundancy {
    /// Exact size of the check symbols: `chunk_count · 2k · chunk_bits`.
    pub fn bit_size(&self) -> u64 {
        self.streams.iter().map(|s| s.len() as u64).sum::<u64>() * self.chunk_bits as u64
    }

    fn stream_bytes(&self, check_len: usize) -> usize {
        (check_len * self.chunk_bits as usize).div_ceil(8)
    }

    /// Streams packed LSB-first at `chunk_bits` per symbol, each padded to a byte boundary.
    pub fn payload(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for stream in &self.streams {
            let mut acc = 0u64;
            let mut filled = 0u32;
            for &sym in stream {
                acc |= (sym as u64) << filled;
                filled += self.chunk_bits;
                while filled >= 8 {
                    out.push(acc as u8);
                    acc >>= 8;
                    filled -= 8;
                }
            }
            if filled > 0 {
                out.push(acc as u8);
            }
        }
        out
    }

    pub fn from_payload(
        symbol_bits: u32,
        chunk_bits: u32,
        chunk_count: u32,
        check_len: usize,
        bytes: &[u8],
    ) -> Result<Self> {
        if chunk_bits == 0 || chunk_bits > 24 {
            return Err(Error::Malformed(format!("chunk width {chunk_bits}")));
        }
        if chunk_count != symbol_bits.div_ceil(chunk_bits) {
            return Err(Error::Malformed("chunk count".into()));
        }
        let shell = ChunkedRedundancy { symbol_bits, chunk_bits, chunk_count, streams: Vec::new() };
        let per = shell.stream_bytes(check_len);
        if bytes.len() != per * chunk_count as usize {
            return Err(Error::Malformed("redundancy length".into()));
        }
        let mask = (1u64 << chunk_bits) - 1;
        let mut streams = Vec::with_capacity(chunk_count as usize);
        for chunk in bytes.chunks(per.max(1)).take(chunk_count as usize) {
            let mut syms = Vec::with_capacity(check_len);
            let mut acc = 0u64;
            let mut filled = 0u32;
            let mut it = chunk.iter();
            for _ in 0..check_len {
                while filled < chunk_bits {
                    acc |= (*it.next().ok_or(Error::Truncated)? as u64) << filled;
                    filled += 8;
                }
                syms.push((acc & mask) as u32);
                acc >>= chunk_bits;
                filled -= chunk_bits;
            }
            if acc != 0 {
                return Err(Error::Malformed("nonzero padding".into()));
            }
            streams.push(syms);
        }
        if per == 0 {
            streams = vec![Vec::new(); chunk_count as usize];
        }
        Ok(ChunkedRedundancy { streams, ..shell })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn narrow_symbols_use_one_stream() {
        let red = chunked_encode(&[1, 2, 3], 3, 1).unwrap();
        assert_eq!(red.chunk_count, 1);
        let plain = RsCode::new(3, 1).unwrap().encode(&[1, 2, 3]).unwrap();
        assert_eq!(red.streams[0], plain);
    }

    #[test]
    fn zero_array() {
        let red = chunked_encode(&[0; 12], 40, 3).unwrap();
        assert!(red.streams.iter().all(|s| s.iter().all(|&x| x == 0)));
        assert_eq!(red.bit_size(), red.chunk_count as u64 * 6 * red.chunk_bits as u64);
    }

    #[test]
    fn one_wide_symbol_corrupted() {
        let symbols: Vec<u128> = (0..8).map(|i| 0x1234 + i * 977).collect();
        let red = chunked_encode(&symbols, 16, 1).unwrap();
        assert_eq!(red.chunk_bits, 4);
        assert_eq!(red.chunk_count, 4);
        let mut bad = symbols.clone();
        bad[5] = 0xffff;
        assert_eq!(chunked_correct(&bad, &red, 1).unwrap(), symbols);
    }

    #[test]
    fn zero_width_has_no_streams() {
        let red = chunked_encode(&[0, 0], 0, 4).unwrap();
        assert_eq!(red.chunk_count, 0);
        assert_eq!(red.bit_size(), 0);
        assert_eq!(chunked_correct(&[0, 0], &red, 4).unwrap(), vec![0, 0]);
    }

    #[test]
    fn out_of_range() {
        assert_eq!(chunked_encode(&[8], 3, 1).unwrap_err(), Error::ValueOutOfRange);
    }

    #[test]
    fn random_substitutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..60 {
            let len = rng.gen_range(1..400);
            let k = [0, 1, len / 4, rng.gen_range(0..10)][rng.gen_range(0..4)];
            let bits = rng.gen_range(1..=128u32);
            let mask = if bits == 128 { u128::MAX } else { (1u128 << bits) - 1 };
            let symbols: Vec<u128> = (0..len).map(|_| rng.gen::<u128>() & mask).collect();
            let red = chunked_encode(&symbols, bits, k).unwrap();
            assert_eq!(red.bit_size(), red.chunk_count as u64 * 2 * k as u64 * red.chunk_bits as u64);
            let mut bad = symbols.clone();
            for p in rand::seq::index::sample(&mut rng, len, k.min(len)) {
                bad[p] = rng.gen::<u128>() & mask;
            }
            assert_eq!(chunked_correct(&bad, &red, k).unwrap(), symbols);
            let payload = red.payload();
            let back = ChunkedRedundancy::from_payload(bits, red.chunk_bits, red.chunk_count, 2 * k, &payload).unwrap();
            assert_eq!(back, red);
        }
    }

    #[test]
    fn too_many_errors_do_not_panic() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..200 {
            let symbols: Vec<u128> = (0..30).map(|_| rng.gen::<u64>() as u128).collect();
            let red = chunked_encode(&symbols, 64, 2).unwrap();
            let mut bad = symbols.clone();
            for p in rand::seq::index::sample(&mut rng, 30, 3) {
                bad[p] = rng.gen::<u64>() as u128;
            }
            let _ = chunked_correct(&bad, &red, 2);
        }
    }
}
