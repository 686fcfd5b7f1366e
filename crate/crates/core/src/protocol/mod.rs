//! Sender and receiver pipelines.
//!
//! The sender builds the digest and ships the top-level hash plus chunked RS
//! redundancy over the three arrays. The receiver rebuilds each array from its own
//! string and corrects it in turn: bucket sizes, then bucket hashes, then cells.

pub mod wire;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fks::{
    assign_buckets, build_fks, cell_offsets, extract_string, rebuild_bucket_hashes, rebuild_cells, select_variant,
    universe_log, BuildStats, Cell, CellLayout, FksDigest, SparseString, TopHash, TopHashDescriptor, Variant,
    DEFAULT_ALPHA,
};
use crate::hashing::bucket::{BucketHashDescriptor, BucketLayout};
use crate::rs::chunked::{chunked_correct, chunked_encode, ChunkedRedundancy};

pub use wire::{deserialize, serialize};

/// Largest accepted error budget.
pub const MAX_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemParams {
    pub u: u64,
    pub u_round_log: u32,
    pub sigma: u64,
    pub n: u64,
    pub k: u64,
    pub variant: Variant,
}

impl ProblemParams {
    pub fn new(u: u64, sigma: u64, n: u64, k: u64) -> Result<Self> {
        if k > MAX_BUDGET {
            return Err(Error::ParameterOverflow(format!("budget {k} exceeds {MAX_BUDGET}")));
        }
        if n > u {
            return Err(Error::InvalidInput(format!("{n} keys in a universe of {u}")));
        }
        let u_round_log = universe_log(u);
        Ok(ProblemParams { u, u_round_log, sigma, n, k, variant: select_variant(u_round_log, n) })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub params: ProblemParams,
    pub top: TopHashDescriptor,
    pub red_b: ChunkedRedundancy,
    pub red_buckets: ChunkedRedundancy,
    pub red_cells: ChunkedRedundancy,
}

/// Symbol widths of the three arrays for a given digest shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayWidths {
    pub count_bits: u32,
    pub bucket: BucketLayout,
    pub cell: CellLayout,
}

impl ArrayWidths {
    pub fn new(params: &ProblemParams, top: &TopHash) -> Result<Self> {
        let widths = if params.n == 0 {
            ArrayWidths {
                count_bits: 0,
                bucket: BucketLayout::new(0, 0),
                cell: CellLayout { key_bits: 0, value_bits: 0 },
            }
        } else {
            ArrayWidths {
                count_bits: top.count_bits(),
                bucket: BucketLayout::new(params.n, top.key_bits()),
                cell: CellLayout::for_digest(top, params.u_round_log, params.sigma),
            }
        };
        if widths.record_bits() > 128 || widths.cell_bits() > 128 {
            return Err(Error::ParameterOverflow("array symbols wider than 128 bits".into()));
        }
        Ok(widths)
    }

    pub fn record_bits(&self) -> u32 {
        if self.count_bits == 0 {
            0
        } else {
            self.bucket.record_bits()
        }
    }

    pub fn cell_bits(&self) -> u32 {
        if self.count_bits == 0 {
            0
        } else {
            self.cell.width()
        }
    }
}

/// Sender output together with its ground-truth digest.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub message: Message,
    pub digest: FksDigest,
    pub stats: BuildStats,
}

pub fn encode_with<R: Rng + ?Sized>(s: &SparseString, k: u64, alpha: u64, rng: &mut R) -> Result<Encoded> {
    let params = ProblemParams::new(s.u(), s.sigma(), s.n(), k)?;
    let (digest, stats) = build_fks(s, alpha, rng)?;
    let widths = ArrayWidths::new(&params, &digest.top)?;
    let b: Vec<u128> = digest.b.iter().map(|&x| x as u128).collect();
    let buckets = digest.buckets.iter().map(|d| widths.bucket.encode(d)).collect::<Result<Vec<_>>>()?;
    let cells: Vec<u128> = digest.cells.iter().map(|&c| widths.cell.encode(c)).collect();
    let k = k as usize;
    let message = Message {
        params,
        top: digest.top.descriptor().clone(),
        red_b: chunked_encode(&b, widths.count_bits, k)?,
        red_buckets: chunked_encode(&buckets, widths.record_bits(), k)?,
        red_cells: chunked_encode(&cells, widths.cell_bits(), k)?,
    };
    Ok(Encoded { message, digest, stats })
}

/// Builds the message for `s` with budget `k`; the seed only drives the sender's sampling.
pub fn sender_encode(s: &SparseString, k: u64, seed: u64) -> Result<Message> {
    Ok(encode_with(s, k, DEFAULT_ALPHA, &mut ChaCha8Rng::seed_from_u64(seed))?.message)
}

/// Receiver arrays before and after each correction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReceiverTrace {
    pub b_own: Vec<u64>,
    pub b: Vec<u64>,
    pub buckets_own: Vec<BucketHashDescriptor>,
    pub buckets: Vec<BucketHashDescriptor>,
    pub cells_own: Vec<Cell>,
    pub cells: Vec<Cell>,
}

fn corrupted(e: Error) -> Error {
    match e {
        Error::Malformed(_) | Error::InconsistentCell(_) | Error::InvalidInput(_) => Error::Uncorrectable,
        other => other,
    }
}

pub fn receiver_reconcile_traced(t: &SparseString, msg: &Message) -> Result<(SparseString, ReceiverTrace)> {
    let p = &msg.params;
    if t.u() != p.u || t.sigma() != p.sigma {
        return Err(Error::InvalidInput("receiver string has different (u, sigma)".into()));
    }
    let mut trace = ReceiverTrace::default();
    if p.n == 0 {
        return Ok((SparseString::empty(p.u, p.sigma)?, trace));
    }
    let k = p.k as usize;
    let top = TopHash::new(msg.top.clone(), p.n)?;
    let widths = ArrayWidths::new(p, &top)?;
    let contents = assign_buckets(t, &top)?;

    trace.b_own = contents.counts();
    let cap = (1u64 << widths.count_bits) - 1;
    let own: Vec<u128> = trace.b_own.iter().map(|&x| x.min(cap) as u128).collect();
    trace.b = chunked_correct(&own, &msg.red_b, k)?.into_iter().map(|x| x as u64).collect();
    if trace.b.iter().sum::<u64>() != p.n || trace.b.iter().any(|&x| x > top.max_bucket()) {
        return Err(Error::Uncorrectable);
    }

    trace.buckets_own = rebuild_bucket_hashes(&contents, &trace.b, &top);
    let own = trace.buckets_own.iter().map(|d| widths.bucket.encode(d)).collect::<Result<Vec<_>>>()?;
    let fixed = chunked_correct(&own, &msg.red_buckets, k)?;
    trace.buckets = fixed
        .iter()
        .zip(&trace.b)
        .map(|(&rec, &bi)| match widths.bucket.decode(rec, bi) {
            Ok(BucketHashDescriptor::Null) if bi == 0 => Ok(BucketHashDescriptor::Null),
            Ok(BucketHashDescriptor::Null | BucketHashDescriptor::Filler) => Err(Error::Uncorrectable),
            Ok(_) if bi == 0 => Err(Error::Uncorrectable),
            other => other.map_err(corrupted),
        })
        .collect::<Result<Vec<_>>>()?;

    let offsets = cell_offsets(&trace.b)?;
    trace.cells_own = rebuild_cells(&contents, &trace.b, &trace.buckets, &offsets, &top);
    let own: Vec<u128> = trace.cells_own.iter().map(|&c| widths.cell.encode(c)).collect();
    let fixed = chunked_correct(&own, &msg.red_cells, k)?;
    trace.cells = fixed
        .iter()
        .enumerate()
        .map(|(i, &sym)| widths.cell.decode(sym, i))
        .collect::<Result<Vec<_>>>()
        .map_err(corrupted)?;

    let s = extract_string(&trace.cells, &offsets, &top, p.u, p.sigma).map_err(corrupted)?;
    if s.n() != p.n {
        return Err(Error::Uncorrectable);
    }
    Ok((s, trace))
}

/// Recovers the sender's string from `t`, provided the two differ in at most `k` positions.
pub fn receiver_reconcile(t: &SparseString, msg: &Message) -> Result<SparseString> {
    receiver_reconcile_traced(t, msg).map(|(s, _)| s)
}

/// Bits of the parameter header.
pub const PARAMS_BITS: u64 = 16 + 64 + 8 + 64 + 64 + 64;

/// Bits of the top-level descriptor block.
pub fn top_bits(top: &TopHashDescriptor) -> u64 {
    8 + match top {
        TopHashDescriptor::Empty => 0,
        TopHashDescriptor::Large { .. } => 8 + 128 + 128 + 4 * 64,
        TopHashDescriptor::Small(_) => 8 * 64,
    }
}

/// Parameter header, top descriptor and the exact check-symbol bits of the three arrays.
/// Magic, version, checksum, redundancy block headers and byte padding are framing.
pub fn message_bit_size(msg: &Message) -> u64 {
    PARAMS_BITS + top_bits(&msg.top) + redundancy_bits(msg)
}

pub fn redundancy_bits(msg: &Message) -> u64 {
    msg.red_b.bit_size() + msg.red_buckets.bit_size() + msg.red_cells.bit_size()
}

/// Growth of the message per unit of `k` at the current field widths.
pub fn redundancy_slope(msg: &Message) -> u64 {
    [&msg.red_b, &msg.red_buckets, &msg.red_cells].iter().map(|r| r.chunk_count as u64 * 2 * r.chunk_bits as u64).sum()
}
