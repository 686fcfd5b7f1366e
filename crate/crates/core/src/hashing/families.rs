//! The four hash families used by the two-level scheme.
//!
//! Randomized builders ([`build_g1`], [`build_g2`], [`build_g2_ext`]) resample until
//! their conditions verify and report the number of rounds used. Deterministic builders
//! ([`build_det_multshift`], [`build_bitselect`]) are pure functions of the key set,
//! which is what lets a receiver rebuild the sender's bucket hashes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Fq2Element, QuadExtField, Reciprocal};
use crate::hashing::bits::{msb, word_tables};

/// `⌈log₂ x⌉`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

/// Number of bits needed to write `x`.
pub fn bit_length(x: u128) -> u32 {
    128 - x.leading_zeros()
}

/// Output width of the first-level reduction: `[2^s]` with `2^s >= 4n²`.
pub fn g1_output_bits(n: u64) -> u32 {
    2 * ceil_log2(n as u128) + 2
}

fn all_distinct(mut images: Vec<u64>) -> bool {
    images.sort_unstable();
    images.windows(2).all(|w| w[0] != w[1])
}

/// Multiply-add-shift map `x ↦ ((a·x + b) mod 2^w) div 2^(w−s)` with `a` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoWiseParams {
    pub a: u128,
    pub b: u128,
    /// Bits of the input universe.
    pub universe_bits: u32,
    /// Output bits.
    pub out_bits: u32,
}

impl TwoWiseParams {
    fn word_bits(&self) -> u32 {
        (2 * self.universe_bits).max(self.out_bits).min(128)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let w = self.word_bits();
        let mut v = self.a.wrapping_mul(x as u128).wrapping_add(self.b);
        if w < 128 {
            v &= (1u128 << w) - 1;
        }
        let shift = w - self.out_bits;
        if shift >= 128 {
            0
        } else {
            (v >> shift) as u64
        }
    }
}

/// First-level reduction of `keys ⊂ [2^universe_bits]` injectively into `[2^s]`, `2^s >= 4n²`.
/// Returns the parameters and the number of sampling rounds.
pub fn build_g1<R: Rng + ?Sized>(keys: &[u64], universe_bits: u32, rng: &mut R) -> Result<(TwoWiseParams, u32)> {
    if universe_bits > 64 {
        return Err(Error::ParameterOverflow(format!("universe of {universe_bits} bits")));
    }
    if !all_distinct(keys.to_vec()) {
        return Err(Error::InvalidInput("duplicate keys".into()));
    }
    let out_bits = g1_output_bits(keys.len() as u64);
    if out_bits > 64 {
        return Err(Error::ParameterOverflow(format!("{} keys", keys.len())));
    }
    let mut proto = TwoWiseParams { a: 1, b: 0, universe_bits, out_bits };
    let w = proto.word_bits();
    let wmask = if w == 128 { u128::MAX } else { (1u128 << w) - 1 };
    let mut rounds = 0;
    loop {
        rounds += 1;
        proto.a = (rng.gen::<u128>() & wmask) | 1;
        proto.b = rng.gen::<u128>() & wmask;
        if all_distinct(keys.iter().map(|&x| proto.eval(x)).collect()) {
            return Ok((proto, rounds));
        }
    }
}

/// Quadratic polynomial `f(x) = (a·x² + b·x + c) mod P` over a prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreeWiseParams {
    pub p: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl ThreeWiseParams {
    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p as u128;
        let x = x as u128 % p;
        let ax = (self.a as u128 * x + self.b as u128) % p;
        ((ax * x + self.c as u128) % p) as u64
    }
}

/// Cube sum of bucket sizes for the given bucket assignment.
pub fn cube_sum(buckets: impl Iterator<Item = usize>, n: usize) -> u128 {
    let mut sizes = vec![0u64; n.max(1)];
    for i in buckets {
        sizes[i] += 1;
    }
    sizes.iter().map(|&b| (b as u128).pow(3)).sum()
}

/// Checks both polynomial conditions: `f mod n²` injective on `keys` and
/// `Σ bᵢ³ <= alpha·n` for the buckets induced by `f mod n`.
pub fn check_g2_conditions(keys: &[u64], params: &ThreeWiseParams, n: u64, alpha: u64) -> bool {
    if n == 0 {
        return keys.is_empty();
    }
    let n2 = n as u128 * n as u128;
    let values: Vec<u64> = keys.iter().map(|&x| params.eval(x)).collect();
    let reduced: Vec<u64> = values.iter().map(|&v| (v as u128 % n2) as u64).collect();
    if !all_distinct(reduced) {
        return false;
    }
    let rn = Reciprocal::new(n);
    let cubes = cube_sum(values.iter().map(|&v| rn.div_rem(v).1 as usize), n as usize);
    cubes <= alpha as u128 * n as u128
}

/// Finds a polynomial over `F_p` meeting [`check_g2_conditions`] on `keys ⊂ [p]`.
pub fn build_g2<R: Rng + ?Sized>(
    keys: &[u64],
    p: u64,
    n: u64,
    alpha: u64,
    rng: &mut R,
) -> Result<(ThreeWiseParams, u32)> {
    if n == 0 || keys.is_empty() {
        return Ok((ThreeWiseParams { p, a: 0, b: 0, c: 0 }, 0));
    }
    if keys.iter().any(|&k| k >= p) || (n as u128 * n as u128) >= p as u128 {
        return Err(Error::InvalidInput("keys and n² must lie below the prime".into()));
    }
    if !all_distinct(keys.to_vec()) {
        return Err(Error::InvalidInput("duplicate keys".into()));
    }
    let mut rounds = 0;
    loop {
        rounds += 1;
        let params = ThreeWiseParams { p, a: rng.gen_range(0..p), b: rng.gen_range(0..p), c: rng.gen_range(0..p) };
        if check_g2_conditions(keys, &params, n, alpha) {
            return Ok((params, rounds));
        }
    }
}

/// Quadratic polynomial over `F_{q²}`; keys are embedded through the integer encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadExtPoly {
    pub field: QuadExtField,
    pub a: Fq2Element,
    pub b: Fq2Element,
    pub c: Fq2Element,
}

impl QuadExtPoly {
    pub fn eval_element(&self, x: Fq2Element) -> Fq2Element {
        let f = &self.field;
        f.add(f.mul(f.add(f.mul(self.a, x), self.b), x), self.c)
    }

    /// `f(x)` as an integer in `[q²]`.
    pub fn eval(&self, x: u64) -> Result<u128> {
        let e = self.field.from_int(x as u128)?;
        Ok(self.field.to_int(self.eval_element(e)))
    }

    /// Root selector: 0 when `x` is the smaller (by encoding) root of `f(X) = f(x)`, else 1.
    ///
    /// The other root is `−b/a − x`, so no square root is needed on this path.
    pub fn root_index(&self, x: u64, minus_b_over_a: Fq2Element) -> Result<u8> {
        let f = &self.field;
        let xe = f.from_int(x as u128)?;
        let other = f.sub(minus_b_over_a, xe);
        Ok(u8::from(f.to_int(other) < x as u128))
    }

    pub fn minus_b_over_a(&self) -> Result<Fq2Element> {
        let f = &self.field;
        Ok(f.mul(f.neg(self.b), f.inv(self.a)?))
    }
}

/// Conditions for the extension-field polynomial: `a != 0`, the pair
/// `(f(x), root_index(x))` injective on `keys`, and `Σ bᵢ³ <= alpha·n`.
pub fn check_g2_ext_conditions(keys: &[u64], poly: &QuadExtPoly, n: u64, alpha: u64) -> bool {
    if n == 0 {
        return keys.is_empty();
    }
    if poly.a.is_zero() {
        return false;
    }
    let Ok(mba) = poly.minus_b_over_a() else { return false };
    let mut tagged = Vec::with_capacity(keys.len());
    let mut buckets = Vec::with_capacity(keys.len());
    let rn = Reciprocal::new(n);
    for &x in keys {
        let (Ok(v), Ok(i)) = (poly.eval(x), poly.root_index(x, mba)) else {
            return false;
        };
        tagged.push((v, i));
        buckets.push(rn.div_rem_wide(v).1 as usize);
    }
    tagged.sort_unstable();
    if tagged.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    cube_sum(buckets.into_iter(), n as usize) <= alpha as u128 * n as u128
}

/// Finds a polynomial over `F_{q²}` meeting [`check_g2_ext_conditions`].
pub fn build_g2_ext<R: Rng + ?Sized>(
    keys: &[u64],
    field: &QuadExtField,
    n: u64,
    alpha: u64,
    rng: &mut R,
) -> Result<(QuadExtPoly, u32)> {
    let q = field.modulus();
    let order = field.order();
    if keys.iter().any(|&k| k as u128 >= order) {
        return Err(Error::InvalidInput("keys must lie below q²".into()));
    }
    if !all_distinct(keys.to_vec()) {
        return Err(Error::InvalidInput("duplicate keys".into()));
    }
    let sample = |rng: &mut R| Fq2Element::new(rng.gen_range(0..q), rng.gen_range(0..q));
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut a = sample(rng);
        while a.is_zero() {
            a = sample(rng);
        }
        let poly = QuadExtPoly { field: field.clone(), a, b: sample(rng), c: sample(rng) };
        if check_g2_ext_conditions(keys, &poly, n, alpha) {
            return Ok((poly, rounds));
        }
    }
}

/// Deterministic multiply-shift `x ↦ ((x·a) mod 2^r) div 2^(r−s)`, `a` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetMultShiftParams {
    pub a: u64,
    pub r: u32,
    pub s: u32,
}

impl DetMultShiftParams {
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        let mut v = x.wrapping_mul(self.a);
        if self.r < 64 {
            v &= (1u64 << self.r) - 1;
        }
        let shift = self.r - self.s;
        if shift >= 64 {
            0
        } else {
            v >> shift
        }
    }
}

// Per-pair data for the conditional-expectation search: x − y = 2^t · odd.
struct PairDiff {
    t: u32,
    odd: u64,
}

/// Scaled probability that the pair lands in the collision window
/// `a·(x−y) mod 2^r ∈ (−2^(r−s), 2^(r−s))` given the low `fixed` bits of `a`.
/// Every pair shares the denominator `2^(r−fixed)`.
fn bad_weight(d: &PairDiff, a_low: u64, fixed: u32, r: u32, s: u32) -> u128 {
    if d.t + s >= r {
        return 0;
    }
    let top = r - d.t; // v = a·odd mod 2^top
    let window = 1u128 << (r - s - d.t);
    let modulus = 1u128 << top;
    let v_low = (a_low as u128).wrapping_mul(d.odd as u128);
    if fixed >= top {
        let v = v_low & (modulus - 1);
        let bad = v < window || v > modulus - window;
        return if bad { 1u128 << (r - fixed) } else { 0 };
    }
    let step = 1u128 << fixed;
    let c = v_low & (step - 1);
    let count_in = |residue: u128| -> u128 {
        if step <= window {
            window / step
        } else {
            u128::from(residue < window)
        }
    };
    let low = count_in(c);
    let c_neg = (step - c) & (step - 1);
    let high = count_in(c_neg) - u128::from(c_neg == 0);
    (low + high) << d.t
}

// Conditional-expectation search over the bits of `a` on sorted distinct keys.
fn greedy_multiplier(sorted: &[u64], r: u32, s: u32) -> u64 {
    let rmask = if r == 64 { u64::MAX } else { (1u64 << r) - 1 };
    let mut pairs = Vec::with_capacity(sorted.len() * sorted.len().saturating_sub(1) / 2);
    for (i, &x) in sorted.iter().enumerate() {
        for &y in &sorted[i + 1..] {
            let z = y.wrapping_sub(x) & rmask;
            let t = z.trailing_zeros();
            pairs.push(PairDiff { t, odd: z >> t });
        }
    }
    let mut a = 1u64;
    if pairs.is_empty() {
        return a;
    }
    for bit in 1..r {
        let fixed = bit + 1;
        let with = a | (1u64 << bit);
        let (mut e0, mut e1) = (0u128, 0u128);
        for d in &pairs {
            e0 = e0.saturating_add(bad_weight(d, a, fixed, r, s));
            e1 = e1.saturating_add(bad_weight(d, with, fixed, r, s));
        }
        if e1 < e0 {
            a = with;
        }
    }
    a
}

/// Deterministically finds an odd multiplier making the map injective on `keys`.
///
/// Bits of `a` are fixed from the least significant upward; each bit takes the value
/// minimising the conditional expected number of pairs in the collision window
/// (ties go to 0). The unconditional expectation is below one when `|keys|² <= 2^s`,
/// so the final multiplier has no collisions.
pub fn build_det_multshift(keys: &[u64], r: u32, s: u32) -> Result<DetMultShiftParams> {
    if s > r || r > 64 {
        return Err(Error::InvalidInput(format!("need s <= r <= 64, got s={s}, r={r}")));
    }
    if r < 64 && keys.iter().any(|&k| k >> r != 0) {
        return Err(Error::InvalidInput("key exceeds 2^r".into()));
    }
    let m = keys.len() as u128;
    if m * m > 1u128 << s {
        return Err(Error::InvalidInput(format!("{m} keys exceed 2^(s/2) for s={s}")));
    }
    let mut sorted = keys.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("duplicate keys".into()));
    }
    let a = greedy_multiplier(&sorted, r, s);
    let params = DetMultShiftParams { a, r, s };
    if all_distinct(sorted.iter().map(|&x| params.eval(x)).collect()) {
        return Ok(params);
    }
    // Not reached while the expectation bound holds.
    let limit = if r >= 63 { u64::MAX } else { 1u64 << r };
    let mut cand = 1u64;
    while cand < limit {
        let p = DetMultShiftParams { a: cand, r, s };
        if all_distinct(sorted.iter().map(|&x| p.eval(x)).collect()) {
            return Ok(p);
        }
        cand += 2;
    }
    Err(Error::InvalidInput("no injective multiplier".into()))
}

/// Bit-selection hash: the bits of `x` at the positions set in `mask`, packed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitSelectParams {
    pub mask: u64,
}

impl BitSelectParams {
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        word_tables().pack(x, self.mask)
    }

    pub fn selected_bits(&self) -> u32 {
        self.mask.count_ones()
    }
}

/// Marks, for consecutive keys in ascending order, the highest bit where they differ.
pub fn build_bitselect(keys: &[u64]) -> Result<BitSelectParams> {
    let mut sorted = keys.to_vec();
    sorted.sort_unstable();
    let mut mask = 0u64;
    for w in sorted.windows(2) {
        let diff = w[0] ^ w[1];
        if diff == 0 {
            return Err(Error::InvalidInput("duplicate keys".into()));
        }
        mask |= msb(diff)?;
    }
    Ok(BitSelectParams { mask })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::collection::btree_set;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn logs() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(bit_length(0), 0);
        assert_eq!(bit_length(1024), 11);
    }

    #[test]
    fn g1_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (p, rounds) = build_g1(&[5], 16, &mut rng).unwrap();
        assert_eq!(rounds, 1);
        assert!(p.eval(5) < 4);
        let keys: Vec<u64> = (0..16).collect();
        let (p, _) = build_g1(&keys, 32, &mut rng).unwrap();
        assert_eq!(p.out_bits, 10);
        let mut imgs: Vec<u64> = keys.iter().map(|&k| p.eval(k)).collect();
        assert!(imgs.iter().all(|&v| v < 1024));
        imgs.sort();
        imgs.dedup();
        assert_eq!(imgs.len(), 16);
        assert!(build_g1(&[1, 1], 16, &mut rng).is_err());
    }

    #[test]
    fn g2_examples() {
        let p = ThreeWiseParams { p: 5, a: 1, b: 0, c: 0 };
        assert_eq!(p.eval(1), 1);
        assert_eq!(p.eval(2), 4);
        assert!(check_g2_conditions(&[1, 2], &p, 2, 32));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (p, _) = build_g2(&[3], 5, 1, 32, &mut rng).unwrap();
        assert!(check_g2_conditions(&[3], &p, 1, 32));
        let (_, rounds) = build_g2(&[], 5, 0, 32, &mut rng).unwrap();
        assert_eq!(rounds, 0);
    }

    #[test]
    fn g2_ext_root_index_matches_solver() {
        let field = QuadExtField::new(11).unwrap();
        let keys: Vec<u64> = (0..121).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (poly, _) = build_g2_ext(&keys, &field, 64, 32, &mut rng).unwrap();
        let mba = poly.minus_b_over_a().unwrap();
        for &x in &keys {
            let v = field.from_int(poly.eval(x).unwrap()).unwrap();
            let (x0, x1) = field.solve_quadratic(poly.a, poly.b, poly.c, v).unwrap().unwrap();
            let i = poly.root_index(x, mba).unwrap();
            let chosen = if i == 0 { x0 } else { x1 };
            assert_eq!(field.to_int(chosen), x as u128);
        }
    }

    #[test]
    fn det_multshift_examples() {
        let p = build_det_multshift(&[0, 1], 4, 2).unwrap();
        assert_ne!(p.eval(0), p.eval(1));
        let p = build_det_multshift(&[9], 8, 2).unwrap();
        assert_eq!((p.a, p.r, p.s), (1, 8, 2));
        let keys = [3u64, 77, 1000, 4095, 12];
        assert_eq!(build_det_multshift(&keys, 12, 6), build_det_multshift(&keys, 12, 6));
        assert!(build_det_multshift(&[1, 2, 3], 8, 2).is_err());
    }

    #[test]
    fn greedy_multiplier_alone_is_injective() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..300 {
            let m = rng.gen_range(2..40usize);
            let s = 2 * ceil_log2(m as u128);
            let r = rng.gen_range(s..=40);
            let mut keys: Vec<u64> = (0..m).map(|_| rng.gen_range(0..(1u64 << r))).collect();
            keys.sort();
            keys.dedup();
            let p = DetMultShiftParams { a: greedy_multiplier(&keys, r, s), r, s };
            assert!(all_distinct(keys.iter().map(|&k| p.eval(k)).collect()));
        }
    }

    #[test]
    fn bitselect_examples() {
        let p = build_bitselect(&[0b000, 0b011, 0b101]).unwrap();
        assert_eq!(p.mask, 0b110);
        let imgs: Vec<u64> = [0b000, 0b011, 0b101].iter().map(|&k| p.eval(k)).collect();
        assert_eq!(imgs, vec![0b00, 0b01, 0b10]);
        assert_eq!(build_bitselect(&[42]).unwrap().mask, 0);
        assert_eq!(build_bitselect(&[0, 1]).unwrap().mask, 1);
    }

    proptest! {
        #[test]
        fn bitselect_injective(keys in btree_set(any::<u64>(), 1..64)) {
            let keys: Vec<u64> = keys.into_iter().collect();
            let p = build_bitselect(&keys).unwrap();
            prop_assert!((p.selected_bits() as usize) < keys.len());
            let mut imgs: Vec<u64> = keys.iter().map(|&k| p.eval(k)).collect();
            prop_assert!(imgs.iter().all(|&v| v >> p.selected_bits() == 0));
            imgs.sort();
            imgs.dedup();
            prop_assert_eq!(imgs.len(), keys.len());
        }

        #[test]
        fn det_multshift_injective(keys in btree_set(0u64..(1 << 30), 1..48)) {
            let keys: Vec<u64> = keys.into_iter().collect();
            let s = 2 * ceil_log2(keys.len() as u128).max(1);
            let p = build_det_multshift(&keys, 30, s).unwrap();
            let mut imgs: Vec<u64> = keys.iter().map(|&k| p.eval(k)).collect();
            prop_assert!(imgs.iter().all(|&v| v < (1 << s)));
            imgs.sort();
            imgs.dedup();
            prop_assert_eq!(imgs.len(), keys.len());
        }
    }
}
