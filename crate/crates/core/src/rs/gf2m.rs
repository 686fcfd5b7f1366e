//! GF(2^m) arithmetic through exp/log tables, 4 <= m <= 24.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MIN_BITS: u32 = 4;
pub const MAX_BITS: u32 = 24;

const PRIMITIVE: [u32; 25] = [
    0, 0, 0, 0, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B, 0x20009,
    0x40081, 0x80027, 0x100009, 0x200005, 0x400003, 0x800021, 0x1000087,
];

#[derive(Debug)]
pub struct Gf2m {
    m: u32,
    order: u32,
    // exp has 2·order entries so exp[log a + log b] needs no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

static FIELDS: [OnceLock<Gf2m>; 25] = [const { OnceLock::new() }; 25];

impl Gf2m {
    /// The cached field with `2^m` elements.
    pub fn get(m: u32) -> Result<&'static Gf2m> {
        if !(MIN_BITS..=MAX_BITS).contains(&m) {
            return Err(Error::ParameterOverflow(format!("GF(2^{m}) unsupported")));
        }
        Ok(FIELDS[m as usize].get_or_init(|| Gf2m::build(m)))
    }

    fn build(m: u32) -> Gf2m {
        let size = 1u32 << m;
        let order = size - 1;
        let poly = PRIMITIVE[m as usize];
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; size as usize];
        let mut x = 1u32;
        for i in 0..order {
            exp[i as usize] = x;
            assert!(i == 0 || x != 1, "polynomial for m={m} is not primitive");
            log[x as usize] = i;
            x <<= 1;
            if x & size != 0 {
                x ^= poly;
            }
        }
        assert_eq!(x, 1, "polynomial for m={m} is not primitive");
        let (lo, hi) = exp.split_at_mut(order as usize);
        hi.copy_from_slice(lo);
        Gf2m { m, order, exp, log }
    }

    pub fn bits(&self) -> u32 {
        self.m
    }

    /// Multiplicative order `2^m − 1`.
    pub fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    pub fn exp(&self, i: u32) -> u32 {
        self.exp[i as usize]
    }

    /// `α^e` for any exponent.
    #[inline]
    pub fn alpha_pow(&self, e: u64) -> u32 {
        self.exp[(e % self.order as u64) as usize]
    }

    /// Discrete log of a nonzero element.
    #[inline]
    pub fn log(&self, x: u32) -> u32 {
        debug_assert!(x != 0);
        self.log[x as usize]
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        debug_assert!(a != 0);
        self.exp[((self.order - self.log[a as usize]) % self.order) as usize]
    }

    #[inline]
    pub fn div(&self, a: u32, b: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.order - self.log[b as usize]) as usize]
        }
    }

    pub fn contains(&self, x: u32) -> bool {
        x >> self.m == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_log_round_trip() {
        for m in MIN_BITS..=20 {
            let f = Gf2m::get(m).unwrap();
            for x in 1..(1u32 << m) {
                assert_eq!(f.exp(f.log(x)), x);
            }
        }
    }

    #[test]
    fn multiplication_matches_carryless_reduction() {
        fn slow(a: u32, b: u32, m: u32) -> u32 {
            let mut prod = 0u64;
            for i in 0..m {
                if b >> i & 1 == 1 {
                    prod ^= (a as u64) << i;
                }
            }
            for i in (m..2 * m).rev() {
                if prod >> i & 1 == 1 {
                    prod ^= (PRIMITIVE[m as usize] as u64) << (i - m);
                }
            }
            prod as u32
        }
        for m in [4, 8, 12] {
            let f = Gf2m::get(m).unwrap();
            for a in (0..(1u32 << m)).step_by(3) {
                for b in (0..(1u32 << m)).step_by(5) {
                    assert_eq!(f.mul(a, b), slow(a, b, m));
                }
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                    assert_eq!(f.div(f.mul(a, 7), 7), a);
                }
            }
        }
    }

    #[test]
    fn unsupported_widths() {
        assert!(Gf2m::get(3).is_err());
        assert!(Gf2m::get(25).is_err());
    }
}
