//! Two-level FKS digest over a sparse string.
//!
//! A top-level hash sends each position to one of `n` buckets together with a key image;
//! each bucket gets an injective hash into `4·b̂²` cells, and the cells hold the pairs.
//! The receiver repeats the same steps on its own string using the sender's corrected arrays.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{find_prime_in, next_prime, Fq2Element, QuadExtField, Reciprocal};
use crate::hashing::bucket::{build_bucket_hash, cell_count, eval_bucket_hash, BucketHashDescriptor};
use crate::hashing::families::{
    bit_length, build_g1, build_g2, build_g2_ext, ceil_log2, cube_sum, QuadExtPoly, ThreeWiseParams, TwoWiseParams,
};

pub const DEFAULT_ALPHA: u64 = 32;

/// Largest supported key count; the first-level prime must fit in 63 bits.
pub const MAX_KEYS: u64 = 1 << 30;

/// String of length `u` over `[sigma]`, stored as its nonzero `(position, value)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparseString {
    u: u64,
    sigma: u64,
    pairs: Vec<(u64, u64)>,
}

impl SparseString {
    pub fn new(u: u64, sigma: u64, mut pairs: Vec<(u64, u64)>) -> Result<Self> {
        if u == 0 {
            return Err(Error::InvalidInput("universe must be non-empty".into()));
        }
        if sigma < 2 {
            return Err(Error::InvalidInput("alphabet needs at least two symbols".into()));
        }
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(format!("position {} repeated", w[0].0)));
            }
        }
        for &(p, v) in &pairs {
            if p >= u {
                return Err(Error::InvalidInput(format!("position {p} outside [0, {u})")));
            }
            if v == 0 || v >= sigma {
                return Err(Error::InvalidInput(format!("value {v} at {p} outside [1, {sigma})")));
            }
        }
        Ok(SparseString { u, sigma, pairs })
    }

    pub fn empty(u: u64, sigma: u64) -> Result<Self> {
        Self::new(u, sigma, Vec::new())
    }

    pub fn u(&self) -> u64 {
        self.u
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    /// Pairs in ascending position order.
    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn n(&self) -> u64 {
        self.pairs.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn value_at(&self, pos: u64) -> u64 {
        match self.pairs.binary_search_by_key(&pos, |p| p.0) {
            Ok(i) => self.pairs[i].1,
            Err(_) => 0,
        }
    }

    /// Hamming distance between the dense views.
    pub fn distance(&self, other: &SparseString) -> u64 {
        let (a, b) = (&self.pairs, &other.pairs);
        let (mut i, mut j, mut d) = (0, 0, 0u64);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    d += 1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    d += 1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    d += u64::from(a[i].1 != b[j].1);
                    i += 1;
                    j += 1;
                }
            }
        }
        d + (a.len() - i + b.len() - j) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    LargeUniverse,
    SmallUniverse,
}

/// `log₂` of `u` rounded up to a power of two.
pub fn universe_log(u: u64) -> u32 {
    ceil_log2(u as u128)
}

/// Quotiented construction iff `u_round ≤ n^{3/2}`, i.e. `u_round² ≤ n³`.
pub fn select_variant(u_round_log: u32, n: u64) -> Variant {
    if n == 0 || 2 * u_round_log >= 128 {
        return Variant::LargeUniverse;
    }
    match (n as u128).checked_pow(3) {
        Some(n3) if (1u128 << (2 * u_round_log)) > n3 => Variant::LargeUniverse,
        _ => Variant::SmallUniverse,
    }
}

/// Prime `q` with `q² ≥ u_round` used by the quotiented construction.
pub fn small_universe_prime(u_round_log: u32) -> Result<u64> {
    let x = 1u128 << u_round_log;
    let root = (x - 1).isqrt() + 1;
    let root = u64::try_from(root).map_err(|_| Error::ParameterOverflow("universe".into()))?;
    next_prime(root.max(3))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopHashDescriptor {
    /// No keys: the digest is parameters only.
    Empty,
    Large {
        g1: TwoWiseParams,
        g2: ThreeWiseParams,
    },
    Small(QuadExtPoly),
}

/// Sampling rounds spent by the randomized top-level builders.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub g1_rounds: u32,
    pub g2_rounds: u32,
}

/// Samples a top-level hash for `keys` meeting both polynomial conditions.
pub fn build_top_hash<R: Rng + ?Sized>(
    keys: &[u64],
    u_round_log: u32,
    alpha: u64,
    rng: &mut R,
) -> Result<(TopHashDescriptor, BuildStats)> {
    let n = keys.len() as u64;
    if n == 0 {
        return Ok((TopHashDescriptor::Empty, BuildStats::default()));
    }
    if n > MAX_KEYS {
        return Err(Error::ParameterOverflow(format!("{n} keys exceed {MAX_KEYS}")));
    }
    match select_variant(u_round_log, n) {
        Variant::LargeUniverse => {
            let (g1, g1_rounds) = build_g1(keys, u_round_log, rng)?;
            let s = g1.out_bits;
            let p = find_prime_in(1u64 << s, (1u64 << (s + 1)) - 1, rng)?;
            let images: Vec<u64> = keys.iter().map(|&x| g1.eval(x)).collect();
            let (g2, g2_rounds) = build_g2(&images, p, n, alpha, rng)?;
            Ok((TopHashDescriptor::Large { g1, g2 }, BuildStats { g1_rounds, g2_rounds }))
        }
        Variant::SmallUniverse => {
            let field = QuadExtField::new(small_universe_prime(u_round_log)?)?;
            let (poly, g2_rounds) = build_g2_ext(keys, &field, n, alpha, rng)?;
            Ok((TopHashDescriptor::Small(poly), BuildStats { g1_rounds: 0, g2_rounds }))
        }
    }
}

/// Evaluator for a top-level descriptor over `n` buckets.
#[derive(Debug, Clone)]
pub struct TopHash {
    desc: TopHashDescriptor,
    n: u64,
    rn: Reciprocal,
    rn2: Reciprocal,
    minus_b_over_a: Fq2Element,
}

impl TopHash {
    pub fn new(desc: TopHashDescriptor, n: u64) -> Result<Self> {
        let mut minus_b_over_a = Fq2Element::ZERO;
        match &desc {
            TopHashDescriptor::Empty if n != 0 => return Err(Error::Malformed("empty descriptor with keys".into())),
            TopHashDescriptor::Large { .. } | TopHashDescriptor::Small(_) if n == 0 || n > MAX_KEYS => {
                return Err(Error::Malformed(format!("descriptor for {n} keys")))
            }
            TopHashDescriptor::Small(poly) => minus_b_over_a = poly.minus_b_over_a()?,
            _ => {}
        }
        let nn = n.max(1);
        Ok(TopHash { desc, n, rn: Reciprocal::new(nn), rn2: Reciprocal::new(nn * nn), minus_b_over_a })
    }

    pub fn descriptor(&self) -> &TopHashDescriptor {
        &self.desc
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn variant(&self) -> Variant {
        match self.desc {
            TopHashDescriptor::Small(_) => Variant::SmallUniverse,
            _ => Variant::LargeUniverse,
        }
    }

    /// Bucket index and in-bucket key image of position `x`.
    pub fn locate(&self, x: u64) -> Result<(usize, u64)> {
        match &self.desc {
            TopHashDescriptor::Empty => Err(Error::NullBucket),
            TopHashDescriptor::Large { g1, g2 } => {
                let v = g2.eval(g1.eval(x));
                Ok((self.rn.div_rem(v).1 as usize, self.rn2.div_rem(v).1))
            }
            TopHashDescriptor::Small(poly) => {
                let v = poly.eval(x)?;
                let (f2, bucket) = self.rn.div_rem_wide(v);
                let i = poly.root_index(x, self.minus_b_over_a)?;
                Ok((bucket as usize, (f2 as u64) << 1 | i as u64))
            }
        }
    }

    /// Position whose image in `bucket` is `image`; only the quotiented variant can invert.
    pub fn recover(&self, bucket: usize, image: u64) -> Result<u64> {
        let TopHashDescriptor::Small(poly) = &self.desc else {
            return Err(Error::InvalidInput("large-universe images are not invertible".into()));
        };
        let field = &poly.field;
        let v = (image >> 1) as u128 * self.n as u128 + bucket as u128;
        let target = field.from_int(v).map_err(|_| Error::InconsistentCell(bucket))?;
        let (x0, x1) = field.solve_quadratic(poly.a, poly.b, poly.c, target)?.ok_or(Error::InconsistentCell(bucket))?;
        let x = field.to_int(if image & 1 == 0 { x0 } else { x1 });
        u64::try_from(x).map_err(|_| Error::InconsistentCell(bucket))
    }

    /// Bits of a key image.
    pub fn key_bits(&self) -> u32 {
        match &self.desc {
            TopHashDescriptor::Empty => 0,
            TopHashDescriptor::Large { .. } => bit_length((self.n as u128).pow(2) - 1),
            TopHashDescriptor::Small(poly) => bit_length(2 * ((poly.field.order() - 1) / self.n as u128) + 1),
        }
    }

    /// Largest possible bucket size.
    pub fn max_bucket(&self) -> u64 {
        match &self.desc {
            TopHashDescriptor::Empty => 0,
            TopHashDescriptor::Large { .. } => self.n,
            TopHashDescriptor::Small(poly) => {
                let per = 2 * poly.field.order().div_ceil(self.n as u128);
                self.n.min(per.min(u64::MAX as u128) as u64)
            }
        }
    }

    /// Width of an entry of the bucket-size array.
    pub fn count_bits(&self) -> u32 {
        bit_length(self.max_bucket() as u128)
    }
}

/// Fixed-width cell record: presence bit, stored key, value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellLayout {
    pub key_bits: u32,
    pub value_bits: u32,
}

/// A cell holds the stored key (position, or key image when quotiented) and the value.
pub type Cell = Option<(u64, u64)>;

impl CellLayout {
    pub fn for_digest(top: &TopHash, u_round_log: u32, sigma: u64) -> Self {
        let key_bits = match top.variant() {
            Variant::LargeUniverse => u_round_log,
            Variant::SmallUniverse => top.key_bits(),
        };
        CellLayout { key_bits, value_bits: ceil_log2(sigma as u128) }
    }

    pub fn width(&self) -> u32 {
        1 + self.key_bits + self.value_bits
    }

    pub fn encode(&self, cell: Cell) -> u128 {
        match cell {
            None => 0,
            Some((key, value)) => 1 | (key as u128) << 1 | (value as u128) << (1 + self.key_bits),
        }
    }

    pub fn decode(&self, sym: u128, index: usize) -> Result<Cell> {
        if sym & 1 == 0 {
            return if sym == 0 { Ok(None) } else { Err(Error::InconsistentCell(index)) };
        }
        let key_mask = (1u128 << self.key_bits) - 1;
        let key = (sym >> 1) & key_mask;
        let value = sym >> (1 + self.key_bits);
        if value >> self.value_bits != 0 {
            return Err(Error::InconsistentCell(index));
        }
        Ok(Some((key as u64, value as u64)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub bucket: usize,
    pub image: u64,
    pub key: u64,
    pub value: u64,
}

/// Keys grouped by bucket, ascending by key image inside each bucket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketContents {
    pub entries: Vec<Entry>,
    /// `entries[starts[i]..starts[i + 1]]` is bucket `i`.
    pub starts: Vec<usize>,
}

impl BucketContents {
    pub fn bucket(&self, i: usize) -> &[Entry] {
        &self.entries[self.starts[i]..self.starts[i + 1]]
    }

    pub fn counts(&self) -> Vec<u64> {
        self.starts.windows(2).map(|w| (w[1] - w[0]) as u64).collect()
    }
}

pub fn assign_buckets(s: &SparseString, top: &TopHash) -> Result<BucketContents> {
    let n = top.n() as usize;
    let mut entries = Vec::with_capacity(s.pairs().len());
    if n > 0 {
        for &(key, value) in s.pairs() {
            let (bucket, image) = top.locate(key)?;
            entries.push(Entry { bucket, image, key, value });
        }
    }
    entries.sort_unstable_by_key(|e| (e.bucket, e.image, e.key));
    let mut starts = vec![0usize; n + 1];
    for e in &entries {
        starts[e.bucket + 1] += 1;
    }
    for i in 0..n {
        starts[i + 1] += starts[i];
    }
    Ok(BucketContents { entries, starts })
}

/// Prefix sums of the cell counts; `offsets[n]` is the table size.
pub fn cell_offsets(b: &[u64]) -> Result<Vec<u64>> {
    let mut offsets = Vec::with_capacity(b.len() + 1);
    let mut acc = 0u64;
    offsets.push(0);
    for &bi in b {
        if bi > MAX_KEYS {
            return Err(Error::ParameterOverflow(format!("bucket of {bi} keys")));
        }
        acc = acc
            .checked_add(cell_count(bi))
            .filter(|&t| t <= 1 << 40)
            .ok_or_else(|| Error::ParameterOverflow("cell table size".into()))?;
        offsets.push(acc);
    }
    Ok(offsets)
}

fn stored_key(top: &TopHash, e: &Entry) -> u64 {
    match top.variant() {
        Variant::LargeUniverse => e.key,
        Variant::SmallUniverse => e.image,
    }
}

/// The sender's three arrays plus the top hash.
#[derive(Debug, Clone)]
pub struct FksDigest {
    pub top: TopHash,
    pub b: Vec<u64>,
    pub buckets: Vec<BucketHashDescriptor>,
    pub offsets: Vec<u64>,
    pub cells: Vec<Cell>,
}

pub fn build_fks<R: Rng + ?Sized>(s: &SparseString, alpha: u64, rng: &mut R) -> Result<(FksDigest, BuildStats)> {
    let keys: Vec<u64> = s.pairs().iter().map(|p| p.0).collect();
    let (desc, stats) = build_top_hash(&keys, universe_log(s.u()), alpha, rng)?;
    let top = TopHash::new(desc, s.n())?;
    let contents = assign_buckets(s, &top)?;
    let b = contents.counts();
    debug_assert!(cube_sum(contents.entries.iter().map(|e| e.bucket), b.len()) <= alpha as u128 * s.n() as u128);
    let key_bits = top.key_bits();
    let buckets = (0..b.len())
        .map(|i| {
            let images: Vec<u64> = contents.bucket(i).iter().map(|e| e.image).collect();
            build_bucket_hash(&images, top.n(), key_bits)
        })
        .collect::<Result<Vec<_>>>()?;
    let offsets = cell_offsets(&b)?;
    let mut cells: Vec<Cell> = vec![None; offsets[b.len()] as usize];
    for e in &contents.entries {
        let idx = (offsets[e.bucket] + eval_bucket_hash(&buckets[e.bucket], e.image)?) as usize;
        if cells[idx].is_some() {
            return Err(Error::InconsistentCell(idx));
        }
        cells[idx] = Some((stored_key(&top, e), e.value));
    }
    Ok((FksDigest { top, b, buckets, offsets, cells }, stats))
}

/// Bucket hashes rebuilt from the receiver's own buckets wherever its count matches `b`.
pub fn rebuild_bucket_hashes(contents: &BucketContents, b: &[u64], top: &TopHash) -> Vec<BucketHashDescriptor> {
    let key_bits = top.key_bits();
    b.iter()
        .enumerate()
        .map(|(i, &bi)| {
            if bi == 0 {
                return BucketHashDescriptor::Null;
            }
            let own = contents.bucket(i);
            if own.len() as u64 != bi || own.windows(2).any(|w| w[0].image == w[1].image) {
                return BucketHashDescriptor::Filler;
            }
            let images: Vec<u64> = own.iter().map(|e| e.image).collect();
            build_bucket_hash(&images, top.n(), key_bits).unwrap_or(BucketHashDescriptor::Filler)
        })
        .collect()
}

/// The receiver's cell table in the sender's geometry; the smallest position wins a shared cell.
pub fn rebuild_cells(
    contents: &BucketContents,
    b: &[u64],
    buckets: &[BucketHashDescriptor],
    offsets: &[u64],
    top: &TopHash,
) -> Vec<Cell> {
    let total = *offsets.last().unwrap_or(&0) as usize;
    let mut cells: Vec<Cell> = vec![None; total];
    let mut owner = vec![u64::MAX; total];
    for e in &contents.entries {
        if b[e.bucket] == 0 {
            continue;
        }
        let Ok(slot) = eval_bucket_hash(&buckets[e.bucket], e.image) else { continue };
        if slot >= cell_count(b[e.bucket]) {
            continue;
        }
        let idx = (offsets[e.bucket] + slot) as usize;
        if e.key < owner[idx] {
            owner[idx] = e.key;
            cells[idx] = Some((stored_key(top, e), e.value));
        }
    }
    cells
}

/// Reads the pairs back out of a (corrected) cell table.
pub fn extract_string(cells: &[Cell], offsets: &[u64], top: &TopHash, u: u64, sigma: u64) -> Result<SparseString> {
    let mut pairs = Vec::new();
    for bucket in 0..offsets.len().saturating_sub(1) {
        let (lo, hi) = (offsets[bucket] as usize, offsets[bucket + 1] as usize);
        for (idx, cell) in cells.iter().enumerate().take(hi).skip(lo) {
            let Some((stored, value)) = *cell else { continue };
            let key = match top.variant() {
                Variant::LargeUniverse => stored,
                Variant::SmallUniverse => top.recover(bucket, stored)?,
            };
            if key >= u || value == 0 || value >= sigma {
                return Err(Error::InconsistentCell(idx));
            }
            pairs.push((key, value));
        }
    }
    SparseString::new(u, sigma, pairs).map_err(|_| Error::Uncorrectable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_string(rng: &mut impl Rng, u: u64, sigma: u64, n: usize) -> SparseString {
        let positions = rand::seq::index::sample(rng, u as usize, n);
        let pairs = positions.into_iter().map(|p| (p as u64, rng.gen_range(1..sigma))).collect();
        SparseString::new(u, sigma, pairs).unwrap()
    }

    fn check_structure(s: &SparseString, d: &FksDigest, alpha: u64) {
        let n = s.n();
        assert_eq!(d.b.iter().sum::<u64>(), n);
        assert!(d.b.iter().map(|&b| (b as u128).pow(3)).sum::<u128>() <= alpha as u128 * n as u128);
        for (i, (&bi, desc)) in d.b.iter().zip(&d.buckets).enumerate() {
            assert_eq!(bi == 0, *desc == BucketHashDescriptor::Null, "bucket {i}");
            assert_eq!(d.offsets[i + 1] - d.offsets[i], cell_count(bi));
        }
        assert_eq!(d.cells.len() as u64, d.offsets[d.b.len()]);
        assert!(d.cells.len() as u64 <= 162 * n.max(1));
        assert_eq!(d.cells.iter().filter(|c| c.is_some()).count() as u64, n);
        for (bucket, w) in d.offsets.windows(2).enumerate() {
            for idx in w[0]..w[1] {
                let Some((stored, _)) = d.cells[idx as usize] else { continue };
                let key = match d.top.variant() {
                    Variant::LargeUniverse => stored,
                    Variant::SmallUniverse => d.top.recover(bucket, stored).unwrap(),
                };
                let (bk, image) = d.top.locate(key).unwrap();
                assert_eq!(bk, bucket);
                assert_eq!(w[0] + eval_bucket_hash(&d.buckets[bucket], image).unwrap(), idx);
            }
        }
    }

    #[test]
    fn variant_threshold() {
        assert_eq!(select_variant(32, 1 << 10), Variant::LargeUniverse);
        assert_eq!(select_variant(20, 1 << 14), Variant::SmallUniverse);
        assert_eq!(select_variant(15, 1 << 10), Variant::SmallUniverse);
        assert_eq!(select_variant(16, 1 << 10), Variant::LargeUniverse);
        assert_eq!(select_variant(0, 1), Variant::SmallUniverse);
    }

    #[test]
    fn small_universe_prime_covers_universe() {
        for log in 0..50 {
            let q = small_universe_prime(log).unwrap();
            assert!((q as u128).pow(2) >= 1u128 << log);
            assert!(q >= 3);
        }
        assert_eq!(small_universe_prime(16).unwrap(), 257);
    }

    #[test]
    fn single_key() {
        let s = SparseString::new(1 << 16, 256, vec![(4321, 7)]).unwrap();
        let (d, _) = build_fks(&s, DEFAULT_ALPHA, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(d.b, vec![1]);
        assert_eq!(d.cells.len(), 4);
        check_structure(&s, &d, DEFAULT_ALPHA);
        let out = extract_string(&d.cells, &d.offsets, &d.top, s.u(), s.sigma()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn structure_both_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (u, n) in [(1u64 << 32, 4096usize), (1 << 16, 4096), (1 << 20, 1 << 14), (97, 97), (5, 1)] {
            let s = random_string(&mut rng, u, 1000, n);
            let (d, _) = build_fks(&s, DEFAULT_ALPHA, &mut rng).unwrap();
            assert_eq!(d.top.variant(), select_variant(universe_log(u), n as u64));
            check_structure(&s, &d, DEFAULT_ALPHA);
            let out = extract_string(&d.cells, &d.offsets, &d.top, u, 1000).unwrap();
            assert_eq!(out, s);
        }
    }

    #[test]
    fn quotiented_keys_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_string(&mut rng, 1 << 12, 4, 1000);
        let (d, _) = build_fks(&s, DEFAULT_ALPHA, &mut rng).unwrap();
        assert_eq!(d.top.variant(), Variant::SmallUniverse);
        for &(x, _) in s.pairs() {
            let (bucket, image) = d.top.locate(x).unwrap();
            assert_eq!(d.top.recover(bucket, image).unwrap(), x);
        }
    }

    #[test]
    fn empty_string() {
        let s = SparseString::empty(1000, 3).unwrap();
        let (d, stats) = build_fks(&s, DEFAULT_ALPHA, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(*d.top.descriptor(), TopHashDescriptor::Empty);
        assert_eq!(stats, BuildStats::default());
        assert!(d.b.is_empty() && d.cells.is_empty());
        let out = extract_string(&d.cells, &d.offsets, &d.top, 1000, 3).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn receiver_with_same_string_matches_sender() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for u in [1u64 << 16, 1 << 32] {
            let s = random_string(&mut rng, u, 50, 2000);
            let (d, _) = build_fks(&s, DEFAULT_ALPHA, &mut rng).unwrap();
            let contents = assign_buckets(&s, &d.top).unwrap();
            assert_eq!(contents.counts(), d.b);
            let rebuilt = rebuild_bucket_hashes(&contents, &d.b, &d.top);
            assert_eq!(rebuilt, d.buckets);
            let cells = rebuild_cells(&contents, &d.b, &d.buckets, &d.offsets, &d.top);
            assert_eq!(cells, d.cells);
        }
    }

    #[test]
    fn staged_mismatches_bounded_by_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for trial in 0..60 {
            let u = [1u64 << 10, 1 << 16, 1 << 40][trial % 3];
            let s = random_string(&mut rng, u.min(1 << 20), 8, 300);
            let s = SparseString::new(u, 8, s.pairs().to_vec()).unwrap();
            let mut pairs: Vec<(u64, u64)> = s.pairs().to_vec();
            let d = rng.gen_range(0..20usize);
            for _ in 0..d {
                match rng.gen_range(0..3) {
                    0 if !pairs.is_empty() => {
                        let i = rng.gen_range(0..pairs.len());
                        pairs.remove(i);
                    }
                    1 if !pairs.is_empty() => {
                        let i = rng.gen_range(0..pairs.len());
                        pairs[i].1 = pairs[i].1 % 7 + 1;
                    }
                    _ => {
                        let p = rng.gen_range(0..u);
                        if pairs.iter().all(|q| q.0 != p) {
                            pairs.push((p, 1));
                        }
                    }
                }
            }
            let t = SparseString::new(u, 8, pairs).unwrap();
            let dist = s.distance(&t) as usize;
            let (dg, _) = build_fks(&s, DEFAULT_ALPHA, &mut rng).unwrap();
            let contents = assign_buckets(&t, &dg.top).unwrap();
            let own = contents.counts();
            let b_diff = own.iter().zip(&dg.b).filter(|(x, y)| x != y).count();
            let bb = rebuild_bucket_hashes(&contents, &dg.b, &dg.top);
            let bb_diff = bb.iter().zip(&dg.buckets).filter(|(x, y)| x != y).count();
            let cells = rebuild_cells(&contents, &dg.b, &dg.buckets, &dg.offsets, &dg.top);
            let cell_diff = cells.iter().zip(&dg.cells).filter(|(x, y)| x != y).count();
            assert!(b_diff <= dist && bb_diff <= dist && cell_diff <= dist, "trial {trial}");
        }
    }

    #[test]
    fn distance_and_validation() {
        let a = SparseString::new(10, 4, vec![(1, 1), (3, 2), (5, 3)]).unwrap();
        let b = SparseString::new(10, 4, vec![(1, 1), (3, 3), (7, 1)]).unwrap();
        assert_eq!(a.distance(&b), 3);
        assert_eq!(a.distance(&a), 0);
        assert_eq!(a.value_at(3), 2);
        assert_eq!(a.value_at(4), 0);
        assert!(SparseString::new(10, 4, vec![(10, 1)]).is_err());
        assert!(SparseString::new(10, 4, vec![(1, 0)]).is_err());
        assert!(SparseString::new(10, 4, vec![(1, 4)]).is_err());
        assert!(SparseString::new(10, 4, vec![(1, 1), (1, 2)]).is_err());
    }
}
