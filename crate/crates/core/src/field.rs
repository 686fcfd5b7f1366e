//! Prime fields `F_q` and their quadratic extensions `F_{q^2} = F_q[γ]/(γ² − A)`.
//!
//! The quadratic extension carries the small-universe top-level hash: keys are
//! embedded as `hi·γ + lo` with `hi = x div q`, `lo = x mod q`, and a stored
//! key is recovered by solving a quadratic equation over the extension.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

/// Fields below this modulus get precomputed inverse and square-root tables.
pub const TABLE_LIMIT: u64 = 1 << 20;

// Witness set that makes Miller-Rabin exact for every 64-bit input.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test valid on the whole `u64` range.
pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if x.is_multiple_of(p) {
            return x == p;
        }
    }
    let mut d = x - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_WITNESSES {
        let mut y = pow_mod(a, d, x);
        if y == 1 || y == x - 1 {
            continue;
        }
        for _ in 1..s {
            y = mul_mod(y, y, x);
            if y == x - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Las Vegas prime search: random probes in `[lo, hi]`, then an exhaustive scan
/// once the trial budget is spent. The result is always prime.
pub fn find_prime_in<R: Rng + ?Sized>(lo: u64, hi: u64, rng: &mut R) -> Result<u64> {
    if lo > hi {
        return Err(Error::NoPrimeFound { lo, hi });
    }
    let bits = 64 - hi.leading_zeros() as u64;
    let budget = 8 * (bits + 1);
    for _ in 0..budget {
        let candidate = rng.gen_range(lo..=hi);
        if is_prime(candidate) {
            return Ok(candidate);
        }
    }
    (lo..=hi).find(|&c| is_prime(c)).ok_or(Error::NoPrimeFound { lo, hi })
}

/// Smallest prime `>= x`.
pub fn next_prime(x: u64) -> Result<u64> {
    (x.max(2)..=u64::MAX).find(|&c| is_prime(c)).ok_or(Error::NoPrimeFound { lo: x, hi: u64::MAX })
}

/// Integer division by a fixed divisor through a precomputed 128-bit reciprocal.
///
/// For a 64-bit dividend, `floor(x · ceil(2^128 / d) / 2^128) = floor(x / d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reciprocal {
    divisor: u64,
    magic: u128,
}

impl Reciprocal {
    pub fn new(divisor: u64) -> Self {
        assert!(divisor > 0, "division by zero");
        let magic = if divisor == 1 {
            0
        } else {
            // ceil(2^128 / d) for every d >= 2
            (u128::MAX / divisor as u128) + 1
        };
        Reciprocal { divisor, magic }
    }

    #[inline]
    pub fn divisor(&self) -> u64 {
        self.divisor
    }

    #[inline]
    pub fn div_rem(&self, x: u64) -> (u64, u64) {
        if self.divisor == 1 {
            return (x, 0);
        }
        let hi = (self.magic >> 64) as u64;
        let lo = self.magic as u64;
        let x = x as u128;
        let q = ((hi as u128) * x + (((lo as u128) * x) >> 64)) >> 64;
        let q = q as u64;
        (q, (x as u64).wrapping_sub(q.wrapping_mul(self.divisor)))
    }

    /// Division of a 128-bit dividend; falls back to hardware division above 64 bits.
    #[inline]
    pub fn div_rem_wide(&self, x: u128) -> (u128, u64) {
        if x <= u64::MAX as u128 {
            let (q, r) = self.div_rem(x as u64);
            (q as u128, r)
        } else {
            (x / self.divisor as u128, (x % self.divisor as u128) as u64)
        }
    }
}

#[derive(Debug)]
struct FieldTables {
    inv: Vec<u32>,
    // Smallest square root, or u32::MAX for non-residues.
    sqrt: Vec<u32>,
}

const NO_ROOT: u32 = u32::MAX;

impl FieldTables {
    fn build(q: u64) -> Self {
        let n = q as usize;
        let mut inv = vec![0u32; n];
        if n > 1 {
            inv[1] = 1;
        }
        for i in 2..n {
            // i · (-(q div i) · inv[q mod i]) ≡ 1
            let t = (q - q / i as u64) * inv[n % i] as u64 % q;
            inv[i] = t as u32;
        }
        let mut sqrt = vec![NO_ROOT; n];
        for y in 0..=(q / 2) {
            let sq = (y * y % q) as usize;
            if sqrt[sq] == NO_ROOT {
                sqrt[sq] = y as u32;
            }
        }
        FieldTables { inv, sqrt }
    }
}

/// The prime field `F_q`. Elements are `u64` representatives in `[0, q)`.
#[derive(Debug, Clone)]
pub struct PrimeField {
    q: u64,
    recip: Reciprocal,
    tables: Option<Arc<FieldTables>>,
}

impl PartialEq for PrimeField {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
    }
}
impl Eq for PrimeField {}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let tables = (q < TABLE_LIMIT).then(|| Arc::new(FieldTables::build(q)));
        Ok(PrimeField { q, recip: Reciprocal::new(q), tables })
    }

    /// Same field without lookup tables, so the algorithmic paths can be exercised.
    pub fn without_tables(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(PrimeField { q, recip: Reciprocal::new(q), tables: None })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn reciprocal(&self) -> &Reciprocal {
        &self.recip
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        self.recip.div_rem(x).1
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        if s >= self.q as u128 {
            (s - self.q as u128) as u64
        } else {
            s as u64
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.q)
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.q)
    }

    pub fn inv(&self, x: u64) -> Result<u64> {
        if x == 0 {
            return Err(Error::ZeroInverse);
        }
        match &self.tables {
            Some(t) => Ok(t.inv[x as usize] as u64),
            None => Ok(self.inv_euclid(x)),
        }
    }

    fn inv_euclid(&self, x: u64) -> u64 {
        let (mut r0, mut r1) = (self.q as i128, x as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        t0.rem_euclid(self.q as i128) as u64
    }

    /// Euler's criterion; zero counts as a square.
    pub fn is_square(&self, x: u64) -> bool {
        x == 0 || self.q == 2 || self.pow(x, (self.q - 1) / 2) == 1
    }

    /// Both square roots `(r, q − r)` with `r <= q − r`, or `None` for a non-residue.
    pub fn sqrt(&self, x: u64) -> Option<(u64, u64)> {
        if x == 0 {
            return Some((0, 0));
        }
        let r = match &self.tables {
            Some(t) => match t.sqrt[x as usize] {
                NO_ROOT => return None,
                r => r as u64,
            },
            None => self.tonelli_shanks(x)?,
        };
        let other = self.neg(r);
        Some((r.min(other), r.max(other)))
    }

    fn tonelli_shanks(&self, x: u64) -> Option<u64> {
        let q = self.q;
        if q == 2 {
            return Some(x);
        }
        if !self.is_square(x) {
            return None;
        }
        if q % 4 == 3 {
            return Some(self.pow(x, (q + 1) / 4));
        }
        let mut s = 0;
        let mut odd = q - 1;
        while odd.is_multiple_of(2) {
            odd /= 2;
            s += 1;
        }
        let z = (2..q).find(|&z| !self.is_square(z))?;
        let mut m = s;
        let mut c = self.pow(z, odd);
        let mut t = self.pow(x, odd);
        let mut r = self.pow(x, odd.div_ceil(2));
        while t != 1 {
            let mut i = 0;
            let mut t2 = t;
            while t2 != 1 {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let b = self.pow(c, 1u64 << (m - i - 1));
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        Some(r)
    }
}

/// Smallest `A >= 2` with `A^((q−1)/2) ≡ −1 (mod q)`.
pub fn find_qnr(field: &PrimeField) -> Result<u64> {
    let q = field.modulus();
    if q == 2 {
        return Err(Error::ModulusNotOddPrime);
    }
    (2..q).find(|&a| field.pow(a, (q - 1) / 2) == q - 1).ok_or(Error::ModulusNotOddPrime)
}

/// Element `hi·γ + lo` of `F_{q^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fq2Element {
    pub hi: u64,
    pub lo: u64,
}

impl Fq2Element {
    pub const ZERO: Fq2Element = Fq2Element { hi: 0, lo: 0 };
    pub const ONE: Fq2Element = Fq2Element { hi: 0, lo: 1 };

    pub const fn new(hi: u64, lo: u64) -> Self {
        Fq2Element { hi, lo }
    }

    pub fn is_zero(&self) -> bool {
        self.hi == 0 && self.lo == 0
    }
}

/// `F_q[γ]/(γ² − A)` for a quadratic non-residue `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadExtField {
    base: PrimeField,
    nonresidue: u64,
}

impl QuadExtField {
    /// Builds the extension with the deterministic smallest non-residue.
    pub fn new(q: u64) -> Result<Self> {
        let base = PrimeField::new(q)?;
        let nonresidue = find_qnr(&base)?;
        Ok(QuadExtField { base, nonresidue })
    }

    pub fn with_nonresidue(base: PrimeField, nonresidue: u64) -> Result<Self> {
        let q = base.modulus();
        if q == 2 {
            return Err(Error::ModulusNotOddPrime);
        }
        if nonresidue >= q || base.is_square(nonresidue) {
            return Err(Error::NotNonResidue { value: nonresidue, q });
        }
        Ok(QuadExtField { base, nonresidue })
    }

    pub fn base(&self) -> &PrimeField {
        &self.base
    }

    pub fn modulus(&self) -> u64 {
        self.base.modulus()
    }

    pub fn nonresidue(&self) -> u64 {
        self.nonresidue
    }

    /// Number of elements, `q²`.
    pub fn order(&self) -> u128 {
        let q = self.modulus() as u128;
        q * q
    }

    pub fn from_int(&self, x: u128) -> Result<Fq2Element> {
        if x >= self.order() {
            return Err(Error::OutOfRange { value: x, bound: self.order() });
        }
        let (hi, lo) = self.base.reciprocal().div_rem_wide(x);
        Ok(Fq2Element { hi: hi as u64, lo })
    }

    pub fn to_int(&self, e: Fq2Element) -> u128 {
        e.hi as u128 * self.modulus() as u128 + e.lo as u128
    }

    pub fn add(&self, x: Fq2Element, y: Fq2Element) -> Fq2Element {
        let f = &self.base;
        Fq2Element { hi: f.add(x.hi, y.hi), lo: f.add(x.lo, y.lo) }
    }

    pub fn sub(&self, x: Fq2Element, y: Fq2Element) -> Fq2Element {
        let f = &self.base;
        Fq2Element { hi: f.sub(x.hi, y.hi), lo: f.sub(x.lo, y.lo) }
    }

    pub fn neg(&self, x: Fq2Element) -> Fq2Element {
        Fq2Element { hi: self.base.neg(x.hi), lo: self.base.neg(x.lo) }
    }

    pub fn mul(&self, x: Fq2Element, y: Fq2Element) -> Fq2Element {
        let f = &self.base;
        // (x1γ + x0)(y1γ + y0) = x1y1·A + x0y0 + (x1y0 + x0y1)γ
        let hh = f.mul(x.hi, y.hi);
        let lo = f.add(f.mul(hh, self.nonresidue), f.mul(x.lo, y.lo));
        let hi = f.add(f.mul(x.hi, y.lo), f.mul(x.lo, y.hi));
        Fq2Element { hi, lo }
    }

    pub fn square(&self, x: Fq2Element) -> Fq2Element {
        self.mul(x, x)
    }

    pub fn scale(&self, x: Fq2Element, c: u64) -> Fq2Element {
        Fq2Element { hi: self.base.mul(x.hi, c), lo: self.base.mul(x.lo, c) }
    }

    /// Norm down to the base field, `lo² − A·hi²`.
    pub fn norm(&self, x: Fq2Element) -> u64 {
        let f = &self.base;
        f.sub(f.mul(x.lo, x.lo), f.mul(self.nonresidue, f.mul(x.hi, x.hi)))
    }

    pub fn inv(&self, x: Fq2Element) -> Result<Fq2Element> {
        if x.is_zero() {
            return Err(Error::ZeroInverse);
        }
        // (x0 + x1γ)^{-1} = (x0 − x1γ) / N(x)
        let n_inv = self.base.inv(self.norm(x))?;
        Ok(Fq2Element { hi: self.base.mul(self.base.neg(x.hi), n_inv), lo: self.base.mul(x.lo, n_inv) })
    }

    /// Both square roots ordered by integer encoding, or `None` for a non-square.
    pub fn sqrt(&self, x: Fq2Element) -> Option<(Fq2Element, Fq2Element)> {
        let f = &self.base;
        let root = if x.hi == 0 {
            match f.sqrt(x.lo) {
                Some((r, _)) => Fq2Element { hi: 0, lo: r },
                None => {
                    // x0/A is a square because both x0 and A are non-squares.
                    let t = f.mul(x.lo, f.inv(self.nonresidue).ok()?);
                    let (r, _) = f.sqrt(t)?;
                    Fq2Element { hi: r, lo: 0 }
                }
            }
        } else {
            let (nr, _) = f.sqrt(self.norm(x))?;
            let half = f.inv(2).ok()?;
            // y0² = (x0 ± √N)/2; exactly one sign gives a square.
            let plus = f.mul(f.add(x.lo, nr), half);
            let minus = f.mul(f.sub(x.lo, nr), half);
            let (y0, _) = f.sqrt(plus).or_else(|| f.sqrt(minus))?;
            if y0 == 0 {
                return None;
            }
            let y1 = f.mul(x.hi, f.inv(f.mul(2, y0)).ok()?);
            Fq2Element { hi: y1, lo: y0 }
        };
        if self.square(root) != x {
            return None;
        }
        let other = self.neg(root);
        if self.to_int(root) <= self.to_int(other) {
            Some((root, other))
        } else {
            Some((other, root))
        }
    }

    /// Roots of `aX² + bX + c = v`, ordered by integer encoding.
    pub fn solve_quadratic(
        &self,
        a: Fq2Element,
        b: Fq2Element,
        c: Fq2Element,
        v: Fq2Element,
    ) -> Result<Option<(Fq2Element, Fq2Element)>> {
        if a.is_zero() {
            return Err(Error::LeadingCoefficientZero);
        }
        let c = self.sub(c, v);
        let disc = self.sub(self.square(b), self.scale(self.mul(a, c), 4));
        let Some((r, _)) = self.sqrt(disc) else {
            return Ok(None);
        };
        let denom = self.inv(self.scale(a, 2))?;
        let nb = self.neg(b);
        let x0 = self.mul(self.add(nb, r), denom);
        let x1 = self.mul(self.sub(nb, r), denom);
        if self.to_int(x0) <= self.to_int(x1) {
            Ok(Some((x0, x1)))
        } else {
            Ok(Some((x1, x0)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trial_division(x: u64) -> bool {
        x >= 2 && (2..).take_while(|d| d * d <= x).all(|d| !x.is_multiple_of(d))
    }

    #[test]
    fn primality_matches_trial_division() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(trial_division(1_000_003));
        assert!(is_prime(1_000_003));
        for x in 0..20_000u64 {
            assert_eq!(is_prime(x), trial_division(x), "x = {x}");
        }
        // Strong pseudoprimes to several small bases.
        for &x in &[3_215_031_751u64, 2_152_302_898_747, 3_474_749_660_383, 341_550_071_728_321] {
            assert!(!is_prime(x));
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(u64::MAX));
    }

    #[test]
    fn prime_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = find_prime_in(16, 31, &mut rng).unwrap();
            assert!([17, 19, 23, 29, 31].contains(&p));
        }
        assert_eq!(find_prime_in(2, 2, &mut rng).unwrap(), 2);
        assert_eq!(find_prime_in(24, 28, &mut rng), Err(Error::NoPrimeFound { lo: 24, hi: 28 }));
        assert_eq!(next_prime(257).unwrap(), 257);
        assert_eq!(next_prime(258).unwrap(), 263);
    }

    #[test]
    fn inverse_examples() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.inv(3).unwrap(), 5);
        assert_eq!(f7.inv(1).unwrap(), 1);
        assert_eq!(f7.inv(0), Err(Error::ZeroInverse));
        let f13 = PrimeField::new(13).unwrap();
        let scan = (1..13).find(|y| 5 * y % 13 == 1).unwrap();
        assert_eq!(scan, 8);
        assert_eq!(f13.inv(5).unwrap(), 8);
    }

    #[test]
    fn sqrt_examples() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.sqrt(2), Some((3, 4)));
        assert_eq!(f7.sqrt(0), Some((0, 0)));
        assert_eq!(f7.sqrt(3), None);
        let squares: Vec<u64> = (0..7).map(|y| y * y % 7).collect();
        for x in 0..7 {
            assert_eq!(f7.sqrt(x).is_some(), squares.contains(&x));
        }
    }

    #[test]
    fn qnr_examples() {
        assert_eq!(find_qnr(&PrimeField::new(7).unwrap()).unwrap(), 3);
        assert_eq!(find_qnr(&PrimeField::new(5).unwrap()).unwrap(), 2);
        assert_eq!(find_qnr(&PrimeField::new(3).unwrap()).unwrap(), 2);
        assert_eq!(find_qnr(&PrimeField::new(2).unwrap()), Err(Error::ModulusNotOddPrime));
        for q in [11u64, 13, 101, 65_521, 65_537, 1_000_003] {
            let f = PrimeField::new(q).unwrap();
            let a = find_qnr(&f).unwrap();
            assert_eq!(f.pow(a, (q - 1) / 2), q - 1);
        }
    }

    #[test]
    fn tables_agree_with_algorithms() {
        for q in [3u64, 5, 7, 13, 17, 97, 65_537] {
            let t = PrimeField::new(q).unwrap();
            let a = PrimeField::without_tables(q).unwrap();
            let step = (q / 5000).max(1);
            let mut x = 0;
            while x < q {
                assert_eq!(t.sqrt(x), a.sqrt(x), "q={q} x={x}");
                if x != 0 {
                    assert_eq!(t.inv(x), a.inv(x));
                }
                x += step;
            }
        }
    }

    #[test]
    fn fq2_examples() {
        let ext = QuadExtField::new(7).unwrap();
        assert_eq!(ext.nonresidue(), 3);
        let g = Fq2Element::new(1, 0);
        assert_eq!(ext.mul(g, g), Fq2Element::new(0, 3));
        assert_eq!(ext.inv(g).unwrap(), Fq2Element::new(5, 0));
        assert_eq!(ext.mul(g, Fq2Element::new(5, 0)), Fq2Element::ONE);
        let (r0, r1) = ext.sqrt(Fq2Element::new(0, 3)).unwrap();
        assert_eq!((r0, r1), (Fq2Element::new(1, 0), Fq2Element::new(6, 0)));
        assert_eq!(ext.inv(Fq2Element::ZERO), Err(Error::ZeroInverse));
    }

    #[test]
    fn quadratic_examples() {
        let ext = QuadExtField::new(7).unwrap();
        let e = |x: u128| ext.from_int(x).unwrap();
        let one = Fq2Element::ONE;
        let z = Fq2Element::ZERO;
        assert_eq!(ext.solve_quadratic(one, z, z, e(4)).unwrap(), Some((e(2), e(5))));
        assert_eq!(ext.solve_quadratic(one, z, z, z).unwrap(), Some((z, z)));
        // brute-force X² + X = 2 over all 49 elements
        let roots: Vec<u128> = (0..49)
            .filter(|&x| {
                let xe = e(x);
                ext.add(ext.square(xe), xe) == e(2)
            })
            .collect();
        assert_eq!(roots, vec![1, 5]);
        assert_eq!(ext.solve_quadratic(one, one, z, e(2)).unwrap(), Some((e(1), e(5))));
        assert_eq!(ext.solve_quadratic(z, one, z, z), Err(Error::LeadingCoefficientZero));
    }

    #[test]
    fn int_encoding() {
        let ext = QuadExtField::new(7).unwrap();
        assert_eq!(ext.from_int(0).unwrap(), Fq2Element::ZERO);
        assert_eq!(ext.from_int(23).unwrap(), Fq2Element::new(3, 2));
        assert_eq!(ext.to_int(Fq2Element::new(6, 6)), 48);
        assert_eq!(ext.from_int(49), Err(Error::OutOfRange { value: 49, bound: 49 }));
        for q in [3u64, 5, 7, 11, 13] {
            let ext = QuadExtField::new(q).unwrap();
            for x in 0..(q * q) as u128 {
                assert_eq!(ext.to_int(ext.from_int(x).unwrap()), x);
            }
        }
    }

    #[test]
    fn large_modulus_sqrt_uses_tonelli_shanks() {
        // q ≡ 1 mod 4 with a large two-adic part exercises the full loop.
        let q = 2_013_265_921u64; // 15·2^27 + 1
        let f = PrimeField::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let y = rng.gen_range(1..q);
            let x = f.mul(y, y);
            let (r0, r1) = f.sqrt(x).unwrap();
            assert_eq!(f.mul(r0, r0), x);
            assert_eq!(f.add(r0, r1), 0);
        }
    }

    proptest! {
        #[test]
        fn reciprocal_matches_division(d in 1u64.., x in any::<u64>()) {
            let r = Reciprocal::new(d);
            prop_assert_eq!(r.div_rem(x), (x / d, x % d));
        }

        #[test]
        fn reciprocal_small_divisors(d in 1u64..5000, x in any::<u64>()) {
            let r = Reciprocal::new(d);
            prop_assert_eq!(r.div_rem(x), (x / d, x % d));
        }

        #[test]
        fn fq2_axioms(qi in 0usize..5, a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let q = [3u64, 5, 7, 101, 65_521][qi];
            let ext = QuadExtField::new(q).unwrap();
            let n = ext.order();
            let (x, y, z) = (
                ext.from_int(a as u128 % n).unwrap(),
                ext.from_int(b as u128 % n).unwrap(),
                ext.from_int(c as u128 % n).unwrap(),
            );
            prop_assert_eq!(ext.mul(ext.mul(x, y), z), ext.mul(x, ext.mul(y, z)));
            prop_assert_eq!(ext.mul(x, y), ext.mul(y, x));
            prop_assert_eq!(ext.mul(x, ext.add(y, z)), ext.add(ext.mul(x, y), ext.mul(x, z)));
            prop_assert_eq!(ext.add(x, ext.neg(x)), Fq2Element::ZERO);
            if !x.is_zero() {
                prop_assert_eq!(ext.mul(x, ext.inv(x).unwrap()), Fq2Element::ONE);
            }
            let sq = ext.square(x);
            let (r0, r1) = ext.sqrt(sq).unwrap();
            prop_assert_eq!(ext.square(r0), sq);
            prop_assert_eq!(ext.square(r1), sq);
        }

        #[test]
        fn prime_field_roots(qi in 0usize..4, x in any::<u64>()) {
            let q = [101u64, 65_537, 1_048_583, 4_294_967_311][qi];
            let f = PrimeField::new(q).unwrap();
            let x = x % q;
            if let Some((r0, r1)) = f.sqrt(x) {
                prop_assert_eq!(f.mul(r0, r0), x);
                prop_assert_eq!(f.mul(r1, r1), x);
                prop_assert!(r0 <= r1);
            } else {
                prop_assert!(!f.is_square(x));
            }
            if x != 0 {
                prop_assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
            }
        }
    }
}
