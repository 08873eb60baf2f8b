//! Dense polynomials over GF(2) stored as little-endian `u64` words.

use std::fmt;

/// 64x64 carry-less product as (low, high).
#[inline]
pub fn clmul64(a: u64, b: u64) -> (u64, u64) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("pclmulqdq") {
            // SAFETY: the feature was detected at runtime.
            #[allow(unsafe_code)]
            return unsafe { clmul64_pclmul(a, b) };
        }
    }
    clmul64_soft(a, b)
}

#[cfg(target_arch = "x86_64")]
#[allow(unsafe_code)]
#[target_feature(enable = "pclmulqdq", enable = "sse2")]
unsafe fn clmul64_pclmul(a: u64, b: u64) -> (u64, u64) {
    use std::arch::x86_64::*;
    let x = _mm_set_epi64x(0, a as i64);
    let y = _mm_set_epi64x(0, b as i64);
    let r = _mm_clmulepi64_si128(x, y, 0);
    let lo = _mm_cvtsi128_si64(r) as u64;
    let hi = _mm_cvtsi128_si64(_mm_unpackhi_epi64(r, r)) as u64;
    (lo, hi)
}

/// Portable carry-less multiply with a 4-bit window.
pub fn clmul64_soft(a: u64, b: u64) -> (u64, u64) {
    let mut table = [0u128; 16];
    let a = a as u128;
    for i in 1..16usize {
        table[i] = if i & 1 == 1 {
            table[i - 1] ^ a
        } else {
            table[i >> 1] << 1
        };
    }
    let mut acc = 0u128;
    for nib in (0..16).rev() {
        acc <<= 4;
        acc ^= table[((b >> (4 * nib)) & 0xf) as usize];
    }
    (acc as u64, (acc >> 64) as u64)
}

/// Schoolbook carry-less product of two word slices.
pub fn mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let (lo, hi) = clmul64(x, y);
            out[i + j] ^= lo;
            out[i + j + 1] ^= hi;
        }
    }
    out
}

#[inline]
fn spread32(x: u32) -> u64 {
    let mut x = x as u64;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    (x | (x << 1)) & 0x5555_5555_5555_5555
}

/// Squaring is linear over GF(2): interleave zero bits.
pub fn square(a: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(2 * a.len());
    for &w in a {
        out.push(spread32(w as u32));
        out.push(spread32((w >> 32) as u32));
    }
    out
}

pub fn degree(a: &[u64]) -> Option<usize> {
    a.iter()
        .enumerate()
        .rev()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| 64 * i + 63 - w.leading_zeros() as usize)
}

fn xor_shifted(acc: &mut Vec<u64>, src: &[u64], shift: usize) {
    let (ws, bs) = (shift / 64, shift % 64);
    let need = src.len() + ws + 1;
    if acc.len() < need {
        acc.resize(need, 0);
    }
    for (i, &w) in src.iter().enumerate() {
        if w == 0 {
            continue;
        }
        acc[i + ws] ^= w << bs;
        if bs != 0 {
            acc[i + ws + 1] ^= w >> (64 - bs);
        }
    }
}

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// Remainder of `a` modulo a nonzero `f`.
pub fn rem(a: &[u64], f: &[u64]) -> Vec<u64> {
    let df = degree(f).expect("division by zero polynomial");
    let mut r = a.to_vec();
    while let Some(dr) = degree(&r) {
        if dr < df {
            break;
        }
        // Subtract f shifted so its leading term cancels r's.
        let shift = dr - df;
        xor_shifted(&mut r, f, shift);
    }
    trim(&mut r);
    r
}

pub fn gcd(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while degree(&y).is_some() {
        let r = rem(&x, &y);
        x = y;
        y = r;
    }
    x
}

/// A sparse polynomial given by its nonzero exponents, highest first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    exps: Vec<usize>,
}

impl Polynomial {
    /// Builds a polynomial from exponents in any order; duplicates cancel.
    pub fn from_exponents(exps: &[usize]) -> Self {
        let mut v = exps.to_vec();
        v.sort_unstable_by(|a, b| b.cmp(a));
        let mut out: Vec<usize> = Vec::new();
        for e in v {
            if out.last() == Some(&e) {
                out.pop();
            } else {
                out.push(e);
            }
        }
        Polynomial { exps: out }
    }

    pub fn from_words(words: &[u64]) -> Self {
        let exps = (0..64 * words.len())
            .rev()
            .filter(|&i| (words[i / 64] >> (i % 64)) & 1 == 1)
            .collect();
        Polynomial { exps }
    }

    pub fn degree(&self) -> Option<usize> {
        self.exps.first().copied()
    }

    /// Nonzero exponents, highest first.
    pub fn exponents(&self) -> &[usize] {
        &self.exps
    }

    pub fn to_words(&self) -> Vec<u64> {
        let n = self.degree().map_or(0, |d| d / 64 + 1);
        let mut w = vec![0u64; n];
        for &e in &self.exps {
            w[e / 64] |= 1 << (e % 64);
        }
        w
    }

    /// Integer value for polynomials of degree below 128.
    pub fn to_u128(&self) -> Option<u128> {
        match self.degree() {
            Some(d) if d >= 128 => None,
            _ => Some(self.exps.iter().fold(0u128, |acc, &e| acc | (1u128 << e))),
        }
    }

    /// Rabin's test: `X^(2^n) = X mod f` and `gcd(X^(2^(n/p)) - X, f) = 1`
    /// for every prime `p` dividing `n`.
    pub fn is_irreducible(&self) -> bool {
        let n = match self.degree() {
            Some(n) if n >= 1 => n,
            _ => return false,
        };
        if n == 1 {
            return true;
        }
        // Constant term zero means X divides f.
        if *self.exps.last().unwrap() != 0 {
            return false;
        }
        let f = self.to_words();
        let reducer = Reducer::new(self);
        let checkpoints: Vec<usize> = prime_factors(n).into_iter().map(|p| n / p).collect();
        let x = vec![2u64];
        let mut h = x.clone();
        for i in 1..=n {
            h = reducer.reduce(&square(&h));
            if checkpoints.contains(&i) {
                let mut diff = h.clone();
                diff[0] ^= 2;
                let g = gcd(&f, &diff);
                if degree(&g) != Some(0) {
                    return false;
                }
            }
        }
        let mut diff = h;
        diff[0] ^= 2;
        degree(&diff).is_none()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .exps
            .iter()
            .map(|&e| match e {
                0 => "1".to_string(),
                1 => "X".to_string(),
                _ => format!("X^{e}"),
            })
            .collect();
        f.write_str(&terms.join("+"))
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

pub(crate) fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Reduction modulo a sparse polynomial of degree `ell`.
#[derive(Clone, Debug)]
pub struct Reducer {
    ell: usize,
    taps: Vec<usize>,
}

impl Reducer {
    pub fn new(f: &Polynomial) -> Self {
        let ell = f.degree().expect("nonzero modulus");
        Reducer {
            ell,
            taps: f.exponents()[1..].to_vec(),
        }
    }

    /// Reduces `a` to fewer than `ell` bits, returned in `ceil(ell/64)` words.
    pub fn reduce(&self, a: &[u64]) -> Vec<u64> {
        let ell = self.ell;
        let nw = ell.div_ceil(64);
        let mut cur = a.to_vec();
        loop {
            let Some(d) = degree(&cur) else { break };
            if d < ell {
                break;
            }
            // Split cur = low + X^ell * high, then high * X^ell = high * taps.
            let high = shr(&cur, ell);
            cur.truncate(nw.max(1));
            cur.resize(nw.max(1), 0);
            let r = ell % 64;
            if r != 0 {
                cur[nw - 1] &= (1u64 << r) - 1;
            }
            for &t in &self.taps {
                xor_shifted(&mut cur, &high, t);
            }
        }
        cur.resize(nw, 0);
        cur
    }
}

fn shr(a: &[u64], s: usize) -> Vec<u64> {
    let (ws, bs) = (s / 64, s % 64);
    if ws >= a.len() {
        return Vec::new();
    }
    let n = a.len() - ws;
    (0..n)
        .map(|i| {
            let lo = a[i + ws] >> bs;
            let hi = if bs != 0 && i + ws + 1 < a.len() {
                a[i + ws + 1] << (64 - bs)
            } else {
                0
            };
            lo | hi
        })
        .collect()
}
