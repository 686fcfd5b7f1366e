//! Root finding for error locators: Chien search and Berlekamp trace splitting.

use crate::rs::gf2m::Gf2m;

/// Polynomial over GF(2^m), coefficients from low to high degree.
pub type Poly = Vec<u32>;

fn trim(p: &mut Poly) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn degree(p: &[u32]) -> usize {
    p.len().saturating_sub(1)
}

/// `a mod f` for monic `f`.
fn reduce(gf: &Gf2m, a: &mut Poly, f: &[u32]) {
    let d = degree(f);
    trim(a);
    while a.len() > d {
        let top = a.len() - 1;
        let c = a[top];
        if c != 0 {
            let lc = gf.log(c);
            let base = top - d;
            for (i, &fi) in f[..d].iter().enumerate() {
                if fi != 0 {
                    a[base + i] ^= gf.exp(lc + gf.log(fi));
                }
            }
        }
        a.pop();
        trim(a);
    }
}

fn square_mod(gf: &Gf2m, a: &[u32], f: &[u32]) -> Poly {
    let mut out = vec![0u32; 2 * a.len()];
    for (i, &c) in a.iter().enumerate() {
        out[2 * i] = gf.mul(c, c);
    }
    reduce(gf, &mut out, f);
    out
}

fn make_monic(gf: &Gf2m, p: &mut Poly) {
    trim(p);
    if let Some(&lead) = p.last() {
        if lead != 1 {
            let inv = gf.inv(lead);
            for c in p.iter_mut() {
                *c = gf.mul(*c, inv);
            }
        }
    }
}

fn gcd(gf: &Gf2m, a: &[u32], b: &[u32]) -> Poly {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        make_monic(gf, &mut y);
        reduce(gf, &mut x, &y);
        std::mem::swap(&mut x, &mut y);
    }
    make_monic(gf, &mut x);
    x
}

/// Exact quotient `a / g` for monic `g`.
fn div_exact(gf: &Gf2m, a: &[u32], g: &[u32]) -> Poly {
    let dg = degree(g);
    let mut rem = a.to_vec();
    trim(&mut rem);
    let mut q = vec![0u32; rem.len() - dg];
    while rem.len() > dg {
        let top = rem.len() - 1;
        let c = rem[top];
        q[top - dg] = c;
        if c != 0 {
            for (i, &gi) in g[..dg].iter().enumerate() {
                rem[top - dg + i] ^= gf.mul(c, gi);
            }
        }
        rem.pop();
    }
    q
}

/// Roots of `f` among `α^0 … α^(len−1)` by exhaustive evaluation, ascending in exponent.
/// `f` is given by its coefficients and evaluated at `α^p`.
pub fn chien_roots(gf: &Gf2m, f: &[u32], len: usize) -> Vec<u32> {
    let order = gf.order();
    let terms: Vec<(u32, u32)> = f
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(j, &c)| (gf.log(c), (j as u64 % order as u64) as u32))
        .collect();
    let mut cur: Vec<u32> = terms.iter().map(|t| t.0).collect();
    let mut roots = Vec::new();
    for p in 0..len {
        let mut acc = 0u32;
        for (c, &(_, step)) in cur.iter_mut().zip(&terms) {
            acc ^= gf.exp(*c);
            *c += step;
            if *c >= order {
                *c -= order;
            }
        }
        if acc == 0 {
            roots.push(gf.alpha_pow(p as u64));
        }
    }
    roots
}

/// All roots of `f` when it splits into distinct linear factors over the field, else `None`.
pub fn trace_roots(gf: &Gf2m, f: &[u32]) -> Option<Vec<u32>> {
    let mut f = f.to_vec();
    make_monic(gf, &mut f);
    let d = degree(&f);
    if f.is_empty() {
        return None;
    }
    if d == 0 {
        return Some(Vec::new());
    }
    // powers[j] = x^(2^j) mod f; x^(2^m) ≡ x exactly when f splits with distinct roots.
    let m = gf.bits();
    let mut powers = Vec::with_capacity(m as usize);
    let mut y: Poly = vec![0, 1];
    reduce(gf, &mut y, &f);
    for _ in 0..m {
        powers.push(y.clone());
        y = square_mod(gf, &y, &f);
    }
    let mut x: Poly = vec![0, 1];
    reduce(gf, &mut x, &f);
    if y != x {
        return None;
    }
    let mut roots = Vec::with_capacity(d);
    if !split(gf, f, powers, 0, &mut roots) {
        return None;
    }
    roots.sort_unstable();
    Some(roots)
}

fn split(gf: &Gf2m, f: Poly, powers: Vec<Poly>, basis: u32, out: &mut Vec<u32>) -> bool {
    match degree(&f) {
        0 => return true,
        1 => {
            out.push(f[0]);
            return true;
        }
        _ => {}
    }
    let m = gf.bits();
    for i in basis..m {
        // T(x) = Σ_j (α^i x)^(2^j) mod f
        let mut t = vec![0u32; degree(&f)];
        for (j, pj) in powers.iter().enumerate() {
            let beta = gf.alpha_pow((i as u64) << j);
            for (tc, &pc) in t.iter_mut().zip(pj) {
                *tc ^= gf.mul(beta, pc);
            }
        }
        let g = gcd(gf, &f, &t);
        let dg = degree(&g);
        if dg == 0 || dg == degree(&f) {
            continue;
        }
        let h = div_exact(gf, &f, &g);
        let reduce_all = |target: &Poly| -> Vec<Poly> {
            powers
                .iter()
                .map(|p| {
                    let mut r = p.clone();
                    reduce(gf, &mut r, target);
                    r
                })
                .collect()
        };
        let pg = reduce_all(&g);
        let mut h = h;
        make_monic(gf, &mut h);
        let ph = reduce_all(&h);
        return split(gf, g, pg, i + 1, out) && split(gf, h, ph, i + 1, out);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn from_roots(gf: &Gf2m, roots: &[u32]) -> Poly {
        let mut p = vec![1u32];
        for &r in roots {
            let mut next = vec![0u32; p.len() + 1];
            for (i, &c) in p.iter().enumerate() {
                next[i + 1] ^= c;
                next[i] ^= gf.mul(c, r);
            }
            p = next;
        }
        p
    }

    #[test]
    fn trace_matches_chien() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [4u32, 6, 9, 12] {
            let gf = Gf2m::get(m).unwrap();
            for _ in 0..40 {
                let count = rng.gen_range(1..12usize.min(gf.order() as usize));
                let mut roots: Vec<u32> = (0..count).map(|_| rng.gen_range(1..=gf.order())).collect();
                roots.sort();
                roots.dedup();
                let f = from_roots(gf, &roots);
                let mut chien = chien_roots(gf, &f, gf.order() as usize);
                chien.sort();
                assert_eq!(chien, roots);
                assert_eq!(trace_roots(gf, &f).unwrap(), roots);
            }
        }
    }

    #[test]
    fn non_splitting_polynomials_are_rejected() {
        let gf = Gf2m::get(4).unwrap();
        // x² + x + α has no root exactly when Tr(α) = 1; search for such an α.
        let alpha = (1..16u32).find(|&a| (0..16u32).all(|x| gf.mul(x, x) ^ x ^ a != 0)).unwrap();
        assert_eq!(trace_roots(gf, &[alpha, 1, 1]), None);
        let r = gf.exp(3);
        assert_eq!(trace_roots(gf, &from_roots(gf, &[r, r])), None);
    }

    #[test]
    fn large_field_many_roots() {
        let gf = Gf2m::get(20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut roots: Vec<u32> = (0..200).map(|_| rng.gen_range(1..=gf.order())).collect();
        roots.sort();
        roots.dedup();
        let f = from_roots(gf, &roots);
        assert_eq!(trace_roots(gf, &f).unwrap(), roots);
    }
}
