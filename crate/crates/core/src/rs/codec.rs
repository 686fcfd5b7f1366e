//! Systematic Reed–Solomon code over GF(2^m) with `2k` check symbols.
//!
//! Codeword layout: check symbol `l` sits at degree `l`, data symbol `j` at degree `2k + j`.
//! The generator has roots `α^1 … α^2k`.

use crate::error::{Error, Result};
use crate::hashing::families::ceil_log2;
use crate::rs::gf2m::{Gf2m, MIN_BITS};
use crate::rs::roots::{chien_roots, trace_roots};

// Codewords up to this length use Chien search; longer ones use trace splitting.
const CHIEN_LIMIT: usize = 1 << 12;

#[derive(Debug, Clone)]
pub struct RsCode {
    gf: &'static Gf2m,
    len: usize,
    k: usize,
}

/// Field width for `len` data symbols and budget `k`.
pub fn field_bits(len: usize, k: usize) -> u32 {
    ceil_log2(len as u128 + 2 * k as u128 + 1).max(MIN_BITS)
}

impl RsCode {
    pub fn new(len: usize, k: usize) -> Result<Self> {
        let gf = Gf2m::get(field_bits(len, k))?;
        Ok(RsCode { gf, len, k })
    }

    pub fn field(&self) -> &'static Gf2m {
        self.gf
    }

    pub fn bits(&self) -> u32 {
        self.gf.bits()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn budget(&self) -> usize {
        self.k
    }

    pub fn check_len(&self) -> usize {
        2 * self.k
    }

    fn check_symbols(&self, data: &[u32]) -> Result<()> {
        if data.len() != self.len {
            return Err(Error::InvalidInput(format!("expected {} symbols, got {}", self.len, data.len())));
        }
        if data.iter().any(|&x| !self.gf.contains(x)) {
            return Err(Error::SymbolOutOfField);
        }
        Ok(())
    }

    /// Generator polynomial `Π (x − α^i)`, `i = 1..=2k`, low degree first.
    pub fn generator(&self) -> Vec<u32> {
        let gf = self.gf;
        let mut g = vec![1u32];
        for i in 1..=self.check_len() {
            let root = gf.alpha_pow(i as u64);
            let mut next = vec![0u32; g.len() + 1];
            for (j, &c) in g.iter().enumerate() {
                next[j + 1] ^= c;
                next[j] ^= gf.mul(c, root);
            }
            g = next;
        }
        g
    }

    /// Reference encoder: remainder of `data(x)·x^2k` modulo the generator, by LFSR division.
    pub fn encode_lfsr(&self, data: &[u32]) -> Result<Vec<u32>> {
        self.check_symbols(data)?;
        let nc = self.check_len();
        if nc == 0 {
            return Ok(Vec::new());
        }
        let gf = self.gf;
        let g = self.generator();
        let mut reg = vec![0u32; nc];
        for &d in data.iter().rev() {
            let fb = d ^ reg[nc - 1];
            for i in (1..nc).rev() {
                reg[i] = reg[i - 1] ^ gf.mul(fb, g[i]);
            }
            reg[0] = gf.mul(fb, g[0]);
        }
        Ok(reg)
    }

    /// Check symbols for `data`; the data itself is the systematic part.
    ///
    /// Computes the syndromes of the nonzero data symbols and solves for the check
    /// positions as known erasures, so the cost scales with the nonzero count.
    pub fn encode(&self, data: &[u32]) -> Result<Vec<u32>> {
        self.check_symbols(data)?;
        let nc = self.check_len();
        if nc == 0 {
            return Ok(Vec::new());
        }
        let mut syn = vec![0u32; nc];
        self.accumulate_syndromes(&mut syn, data, nc);
        if syn.iter().all(|&s| s == 0) {
            return Ok(vec![0; nc]);
        }
        let positions: Vec<usize> = (0..nc).collect();
        let locator = self.locator_from_positions(&positions);
        Ok(self.forney(&syn, &locator, &positions))
    }

    // syn[i] += Σ_j data[j]·α^((i+1)(offset+j)) over nonzero data[j].
    fn accumulate_syndromes(&self, syn: &mut [u32], data: &[u32], offset: usize) {
        let gf = self.gf;
        let order = gf.order();
        for (j, &d) in data.iter().enumerate() {
            if d == 0 {
                continue;
            }
            let step = ((offset + j) as u64 % order as u64) as u32;
            let mut e = gf.log(d) + step;
            if e >= order {
                e -= order;
            }
            for s in syn.iter_mut() {
                *s ^= gf.exp(e);
                e += step;
                if e >= order {
                    e -= order;
                }
            }
        }
    }

    fn locator_from_positions(&self, positions: &[usize]) -> Vec<u32> {
        let gf = self.gf;
        let mut lam = vec![1u32];
        for &p in positions {
            let x = gf.alpha_pow(p as u64);
            let mut next = lam.clone();
            next.push(0);
            for (i, &c) in lam.iter().enumerate() {
                next[i + 1] ^= gf.mul(c, x);
            }
            lam = next;
        }
        lam
    }

    // Error magnitudes at the given positions from syndromes and locator.
    fn forney(&self, syn: &[u32], locator: &[u32], positions: &[usize]) -> Vec<u32> {
        let gf = self.gf;
        let nc = syn.len();
        let mut omega = vec![0u32; nc];
        for (i, &s) in syn.iter().enumerate() {
            if s == 0 {
                continue;
            }
            for (j, &l) in locator.iter().enumerate() {
                if i + j >= nc {
                    break;
                }
                omega[i + j] ^= gf.mul(s, l);
            }
        }
        let eval = |poly: &[u32], x: u32| poly.iter().rev().fold(0u32, |acc, &c| gf.mul(acc, x) ^ c);
        let deriv: Vec<u32> =
            locator.iter().enumerate().skip(1).map(|(i, &c)| if i % 2 == 1 { c } else { 0 }).collect();
        positions
            .iter()
            .map(|&p| {
                let xinv = gf.inv(gf.alpha_pow(p as u64));
                gf.div(eval(&omega, xinv), eval(&deriv, xinv))
            })
            .collect()
    }

    fn berlekamp_massey(&self, syn: &[u32]) -> (Vec<u32>, usize) {
        let gf = self.gf;
        let mut c = vec![1u32];
        let mut b = vec![1u32];
        let mut l = 0usize;
        let mut shift = 1usize;
        let mut bd = 1u32;
        for n in 0..syn.len() {
            let mut d = syn[n];
            for i in 1..=l.min(c.len() - 1) {
                d ^= gf.mul(c[i], syn[n - i]);
            }
            if d == 0 {
                shift += 1;
                continue;
            }
            let coef = gf.div(d, bd);
            let t = c.clone();
            if c.len() < b.len() + shift {
                c.resize(b.len() + shift, 0);
            }
            for (i, &bi) in b.iter().enumerate() {
                c[i + shift] ^= gf.mul(coef, bi);
            }
            if 2 * l <= n {
                l = n + 1 - l;
                b = t;
                bd = d;
                shift = 1;
            } else {
                shift += 1;
            }
        }
        while c.len() > 1 && c.last() == Some(&0) {
            c.pop();
        }
        (c, l)
    }

    /// Error positions (codeword degrees) and magnitudes, or `Uncorrectable`.
    pub fn locate_errors(&self, data: &[u32], redundancy: &[u32]) -> Result<Vec<(usize, u32)>> {
        self.check_symbols(data)?;
        let nc = self.check_len();
        if redundancy.len() != nc {
            return Err(Error::InvalidInput(format!("expected {nc} check symbols")));
        }
        if redundancy.iter().any(|&x| !self.gf.contains(x)) {
            return Err(Error::SymbolOutOfField);
        }
        if nc == 0 {
            return Ok(Vec::new());
        }
        let mut syn = vec![0u32; nc];
        self.accumulate_syndromes(&mut syn, redundancy, 0);
        self.accumulate_syndromes(&mut syn, data, nc);
        if syn.iter().all(|&s| s == 0) {
            return Ok(Vec::new());
        }
        let (lam, l) = self.berlekamp_massey(&syn);
        if l > self.k || lam.len() - 1 != l {
            return Err(Error::Uncorrectable);
        }
        let total = self.len + nc;
        let gf = self.gf;
        // Roots of the locator are inverses of α^position.
        let positions: Vec<usize> = if total <= CHIEN_LIMIT {
            let mut rev = lam.clone();
            rev.reverse();
            chien_roots(gf, &rev, total).into_iter().map(|x| gf.log(x) as usize).collect()
        } else {
            let mut rev = lam.clone();
            rev.reverse();
            match trace_roots(gf, &rev) {
                Some(roots) => roots.into_iter().map(|x| gf.log(x) as usize).collect(),
                None => return Err(Error::Uncorrectable),
            }
        };
        if positions.len() != l || positions.iter().any(|&p| p >= total) {
            return Err(Error::Uncorrectable);
        }
        let magnitudes = self.forney(&syn, &lam, &positions);
        if magnitudes.contains(&0) {
            return Err(Error::Uncorrectable);
        }
        Ok(positions.into_iter().zip(magnitudes).collect())
    }

    /// Recovers the encoded data from a copy with at most `k` substituted symbols.
    pub fn correct(&self, data: &[u32], redundancy: &[u32]) -> Result<Vec<u32>> {
        let errors = self.locate_errors(data, redundancy)?;
        let nc = self.check_len();
        let mut out = data.to_vec();
        for (p, e) in errors {
            if p >= nc {
                out[p - nc] ^= e;
            }
        }
        Ok(out)
    }
}
