//! Second-level bucket hashes and their fixed-width record encoding.

use crate::error::{Error, Result};
use crate::hashing::families::{build_bitselect, build_det_multshift, ceil_log2, BitSelectParams, DetMultShiftParams};

/// Per-bucket hash. `Filler` is what a receiver stores for buckets it cannot rebuild.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BucketHashDescriptor {
    Null,
    Filler,
    Large(DetMultShiftParams),
    Small { select: BitSelectParams, spread: DetMultShiftParams },
}

const TAG_FILLER: u128 = 0;
const TAG_LARGE: u128 = 1;
const TAG_SMALL: u128 = 2;
const TAG_NULL: u128 = 3;

/// `log n` as used for the large/small threshold: `⌈log₂ max(n, 2)⌉`.
pub fn log_n(n: u64) -> u32 {
    ceil_log2(n.max(2) as u128)
}

/// Bits of `b̂`, the power of two at or above `b`.
pub fn rounded_log(b: u64) -> u32 {
    ceil_log2(b.max(1) as u128)
}

/// Output bits of a bucket holding `b` keys: its cell range is `[4·b̂²] = [2^s]`.
pub fn cell_bits(b: u64) -> u32 {
    2 + 2 * rounded_log(b)
}

/// Number of cells reserved for a bucket of `b` keys (zero for an empty bucket).
pub fn cell_count(b: u64) -> u64 {
    if b == 0 {
        0
    } else {
        1u64 << cell_bits(b)
    }
}

pub fn is_large(b: u64, n: u64) -> bool {
    b > log_n(n) as u64
}

/// Builds the bucket hash for a set of distinct key images below `2^key_bits`.
pub fn build_bucket_hash(images: &[u64], n: u64, key_bits: u32) -> Result<BucketHashDescriptor> {
    if images.is_empty() {
        return Ok(BucketHashDescriptor::Null);
    }
    let b = images.len() as u64;
    let s = cell_bits(b);
    if is_large(b, n) {
        let r = key_bits.max(s);
        return Ok(BucketHashDescriptor::Large(build_det_multshift(images, r, s)?));
    }
    let select = build_bitselect(images)?;
    let packed: Vec<u64> = images.iter().map(|&x| select.eval(x)).collect();
    let spread = build_det_multshift(&packed, select.selected_bits().max(s), s)?;
    Ok(BucketHashDescriptor::Small { select, spread })
}

/// Cell index of `image` inside its bucket.
pub fn eval_bucket_hash(desc: &BucketHashDescriptor, image: u64) -> Result<u64> {
    match desc {
        BucketHashDescriptor::Null | BucketHashDescriptor::Filler => Err(Error::NullBucket),
        BucketHashDescriptor::Large(p) => Ok(p.eval(image)),
        BucketHashDescriptor::Small { select, spread } => Ok(spread.eval(select.eval(image))),
    }
}

/// Record geometry shared by sender and receiver for one digest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BucketLayout {
    pub n: u64,
    pub key_bits: u32,
}

impl BucketLayout {
    pub fn new(n: u64, key_bits: u32) -> Self {
        BucketLayout { n, key_bits }
    }

    fn large_body(&self) -> u32 {
        self.key_bits.max(2 + 2 * log_n(self.n))
    }

    fn small_multiplier_bits(&self) -> u32 {
        let ln = log_n(self.n);
        (ln - 1).max(2 + 2 * ceil_log2(ln as u128))
    }

    pub fn body_bits(&self) -> u32 {
        self.large_body().max(self.key_bits + self.small_multiplier_bits())
    }

    /// Width of one record: two tag bits plus the body.
    pub fn record_bits(&self) -> u32 {
        2 + self.body_bits()
    }

    pub fn encode(&self, desc: &BucketHashDescriptor) -> Result<u128> {
        let body_bits = self.body_bits();
        if self.record_bits() > 128 {
            return Err(Error::ParameterOverflow(format!("{}-bit bucket records", self.record_bits())));
        }
        let body = match desc {
            BucketHashDescriptor::Null => return Ok(low_mask(self.record_bits())),
            BucketHashDescriptor::Filler => return Ok(0),
            BucketHashDescriptor::Large(p) => (TAG_LARGE, p.a as u128),
            BucketHashDescriptor::Small { select, spread } => {
                (TAG_SMALL, select.mask as u128 | (spread.a as u128) << self.key_bits)
            }
        };
        debug_assert!(body.1 >> body_bits == 0);
        Ok(body.0 << body_bits | body.1)
    }

    /// Decodes a record; `b` is the bucket's key count, from which `r` and `s` are re-derived.
    pub fn decode(&self, record: u128, b: u64) -> Result<BucketHashDescriptor> {
        let body_bits = self.body_bits();
        if record >> self.record_bits() != 0 {
            return Err(Error::Malformed("bucket record too wide".into()));
        }
        let tag = record >> body_bits;
        let body = record & low_mask(body_bits);
        let s = cell_bits(b);
        match tag {
            TAG_NULL if body == low_mask(body_bits) => Ok(BucketHashDescriptor::Null),
            TAG_FILLER if body == 0 => Ok(BucketHashDescriptor::Filler),
            TAG_LARGE if b > 0 => {
                let r = self.key_bits.max(s);
                if body >> r != 0 || body & 1 == 0 {
                    return Err(Error::Malformed("large bucket multiplier".into()));
                }
                Ok(BucketHashDescriptor::Large(DetMultShiftParams { a: body as u64, r, s }))
            }
            TAG_SMALL if b > 0 => {
                let mask = (body & low_mask(self.key_bits)) as u64;
                let a = body >> self.key_bits;
                let r = mask.count_ones().max(s);
                if a >> r != 0 || a & 1 == 0 {
                    return Err(Error::Malformed("small bucket multiplier".into()));
                }
                Ok(BucketHashDescriptor::Small {
                    select: BitSelectParams { mask },
                    spread: DetMultShiftParams { a: a as u64, r, s },
                })
            }
            _ => Err(Error::Malformed("bucket record tag".into())),
        }
    }
}

fn low_mask(bits: u32) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::collection::btree_set;
    use proptest::prelude::*;

    fn distinct_cells(desc: &BucketHashDescriptor, images: &[u64]) -> usize {
        let mut cells: Vec<u64> = images.iter().map(|&x| eval_bucket_hash(desc, x).unwrap()).collect();
        cells.sort();
        cells.dedup();
        cells.len()
    }

    #[test]
    fn empty_is_null() {
        assert_eq!(build_bucket_hash(&[], 16, 8).unwrap(), BucketHashDescriptor::Null);
        assert_eq!(eval_bucket_hash(&BucketHashDescriptor::Null, 1), Err(Error::NullBucket));
    }

    #[test]
    fn single_key_lands_in_four_cells() {
        let d = build_bucket_hash(&[200], 16, 8).unwrap();
        assert!(eval_bucket_hash(&d, 200).unwrap() < 4);
        assert_eq!(cell_count(1), 4);
    }

    #[test]
    fn five_keys_take_the_large_path() {
        let images = [3u64, 99, 140, 201, 255];
        let d = build_bucket_hash(&images, 16, 8).unwrap();
        assert!(matches!(d, BucketHashDescriptor::Large(_)));
        assert_eq!(cell_count(5), 256);
        assert!(images.iter().all(|&x| eval_bucket_hash(&d, x).unwrap() < 256));
        assert_eq!(distinct_cells(&d, &images), 5);
    }

    #[test]
    fn geometry() {
        assert_eq!(cell_count(0), 0);
        assert_eq!(cell_count(2), 16);
        assert_eq!(cell_count(3), 64);
        assert_eq!(cell_count(4), 64);
        assert_eq!(log_n(1), 1);
        assert_eq!(log_n(16), 4);
        assert_eq!(log_n(17), 5);
    }

    #[test]
    fn records_round_trip() {
        let layout = BucketLayout::new(1024, 20);
        let sets: [&[u64]; 4] =
            [&[7], &[1, 2, 3], &[5, 500, 5000, 50000, 500000], &(0..40).map(|i| i * 977).collect::<Vec<_>>()];
        for images in sets {
            let d = build_bucket_hash(images, 1024, 20).unwrap();
            let rec = layout.encode(&d).unwrap();
            assert!(rec >> layout.record_bits() == 0);
            assert_eq!(layout.decode(rec, images.len() as u64).unwrap(), d);
        }
        let null = layout.encode(&BucketHashDescriptor::Null).unwrap();
        assert_eq!(null, (1u128 << layout.record_bits()) - 1);
        assert_eq!(layout.decode(null, 0).unwrap(), BucketHashDescriptor::Null);
        assert_eq!(layout.encode(&BucketHashDescriptor::Filler).unwrap(), 0);
        assert!(layout.decode(1u128 << layout.body_bits(), 3).is_err());
    }

    proptest! {
        #[test]
        fn bucket_hash_injective_and_deterministic(
            images in btree_set(0u64..(1 << 24), 1..40),
            n in prop::sample::select(vec![1u64, 2, 17, 256, 4096]),
        ) {
            let images: Vec<u64> = images.into_iter().collect();
            let d = build_bucket_hash(&images, n, 24).unwrap();
            let mut rev = images.clone();
            rev.reverse();
            prop_assert_eq!(build_bucket_hash(&rev, n, 24).unwrap(), d);
            prop_assert_eq!(distinct_cells(&d, &images), images.len());
            let cells = cell_count(images.len() as u64);
            prop_assert!(images.iter().all(|&x| eval_bucket_hash(&d, x).unwrap() < cells));
            let layout = BucketLayout::new(n, 24);
            let rec = layout.encode(&d).unwrap();
            prop_assert_eq!(layout.decode(rec, images.len() as u64).unwrap(), d);
        }
    }
}
