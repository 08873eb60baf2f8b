//! Two-party distributed point functions with sketch-based verification.
//!
//! Keys follow the tree construction with one seed correction word and two
//! control-bit corrections per level, plus a final output correction. Leaves
//! are 128-bit values read as elements of GF(2^128); the selection bit is the
//! low bit.

mod malformed;
mod verify;

use std::sync::OnceLock;

use rand::Rng;

pub use malformed::MalformedKind;
pub use verify::{
    beaver_triple, sketch, sketch_coefficients, unit_terms, verify_pair, BeaverShare, Sketch,
    VerifyProof, Verdict,
};

use crate::error::{Error, Result};
use crate::prf::Prf;

/// Width of a leaf value in bits.
pub const OUTPUT_BITS: u16 = 128;
const KEY_VERSION: u8 = 1;

/// `f(x) = beta` if `x == alpha`, else zero, on `domain_bits`-bit inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointFunction {
    pub alpha: u64,
    pub beta: u128,
    pub domain_bits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorrectionWord {
    pub seed: u128,
    pub t_left: bool,
    pub t_right: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpfKey {
    pub party: u8,
    pub domain_bits: u8,
    pub seed: u128,
    pub cws: Vec<CorrectionWord>,
    pub cw_out: u128,
}

struct FixedPrg {
    left: Prf,
    right: Prf,
    convert: Prf,
}

fn prg() -> &'static FixedPrg {
    static P: OnceLock<FixedPrg> = OnceLock::new();
    P.get_or_init(|| FixedPrg {
        left: Prf::new(*b"dpf-prg-left-key"),
        right: Prf::new(*b"dpf-prg-rightkey"),
        convert: Prf::new(*b"dpf-prg-convert!"),
    })
}

/// Expands a seed into (left seed, left bit, right seed, right bit).
#[inline]
fn expand(s: u128) -> (u128, bool, u128, bool) {
    let p = prg();
    let l = p.left.block(s) ^ s;
    let r = p.right.block(s) ^ s;
    (l & !1, l & 1 == 1, r & !1, r & 1 == 1)
}

#[inline]
fn convert(s: u128) -> u128 {
    prg().convert.block(s) ^ s
}

/// Generates a key pair for `f`.
pub fn gen<R: Rng + ?Sized>(f: &PointFunction, rng: &mut R) -> Result<(DpfKey, DpfKey)> {
    if f.domain_bits > 63 {
        return Err(Error::Config("domain too large".into()));
    }
    if f.alpha >> f.domain_bits != 0 {
        return Err(Error::OutOfDomain {
            index: f.alpha,
            size: 1 << f.domain_bits,
        });
    }
    Ok(gen_unchecked(f, rng))
}

fn gen_unchecked<R: Rng + ?Sized>(f: &PointFunction, rng: &mut R) -> (DpfKey, DpfKey) {
    let n = f.domain_bits as usize;
    let root0 = rng.gen::<u128>() & !1;
    let root1 = rng.gen::<u128>() & !1;
    let (mut s0, mut s1) = (root0, root1);
    let (mut t0, mut t1) = (false, true);
    let mut cws = Vec::with_capacity(n);
    for i in 0..n {
        let bit = (f.alpha >> (n - 1 - i)) & 1 == 1;
        let (sl0, tl0, sr0, tr0) = expand(s0);
        let (sl1, tl1, sr1, tr1) = expand(s1);
        let s_cw = if bit { sl0 ^ sl1 } else { sr0 ^ sr1 };
        let tl_cw = tl0 ^ tl1 ^ bit ^ true;
        let tr_cw = tr0 ^ tr1 ^ bit;
        cws.push(CorrectionWord {
            seed: s_cw,
            t_left: tl_cw,
            t_right: tr_cw,
        });
        let (k0, kt0, k1, kt1, kcw) = if bit {
            (sr0, tr0, sr1, tr1, tr_cw)
        } else {
            (sl0, tl0, sl1, tl1, tl_cw)
        };
        s0 = if t0 { k0 ^ s_cw } else { k0 };
        s1 = if t1 { k1 ^ s_cw } else { k1 };
        t0 = kt0 ^ (t0 & kcw);
        t1 = kt1 ^ (t1 & kcw);
    }
    let cw_out = f.beta ^ convert(s0) ^ convert(s1);
    let k0 = DpfKey {
        party: 0,
        domain_bits: n as u8,
        seed: root0,
        cws: cws.clone(),
        cw_out,
    };
    let k1 = DpfKey {
        party: 1,
        domain_bits: n as u8,
        seed: root1,
        cws,
        cw_out,
    };
    (k0, k1)
}

impl DpfKey {
    pub fn domain_size(&self) -> u64 {
        1 << self.domain_bits
    }

    fn step(&self, level: usize, s: u128, t: bool) -> (u128, bool, u128, bool) {
        let (mut sl, mut tl, mut sr, mut tr) = expand(s);
        if t {
            let cw = &self.cws[level];
            sl ^= cw.seed;
            sr ^= cw.seed;
            tl ^= cw.t_left;
            tr ^= cw.t_right;
        }
        (sl, tl, sr, tr)
    }

    fn leaf(&self, s: u128, t: bool) -> u128 {
        let y = convert(s);
        if t {
            y ^ self.cw_out
        } else {
            y
        }
    }

    /// This key's share of `f(x)`.
    pub fn eval(&self, x: u64) -> Result<u128> {
        if x >= self.domain_size() {
            return Err(Error::OutOfDomain {
                index: x,
                size: self.domain_size(),
            });
        }
        let n = self.domain_bits as usize;
        let (mut s, mut t) = (self.seed, self.party == 1);
        for i in 0..n {
            let (sl, tl, sr, tr) = self.step(i, s, t);
            if (x >> (n - 1 - i)) & 1 == 1 {
                (s, t) = (sr, tr);
            } else {
                (s, t) = (sl, tl);
            }
        }
        Ok(self.leaf(s, t))
    }

    /// Shares of `f(x)` for every `x` in the domain, in order.
    pub fn eval_full(&self) -> Vec<u128> {
        let p = prg();
        let mut seeds = vec![self.seed];
        let mut bits = vec![self.party == 1];
        for cw in &self.cws {
            let l = p.left.blocks(&seeds);
            let r = p.right.blocks(&seeds);
            let mut ns = Vec::with_capacity(2 * seeds.len());
            let mut nb = Vec::with_capacity(2 * seeds.len());
            for i in 0..seeds.len() {
                let (mut sl, mut sr) = (l[i] ^ seeds[i], r[i] ^ seeds[i]);
                let (mut tl, mut tr) = (sl & 1 == 1, sr & 1 == 1);
                sl &= !1;
                sr &= !1;
                if bits[i] {
                    sl ^= cw.seed;
                    sr ^= cw.seed;
                    tl ^= cw.t_left;
                    tr ^= cw.t_right;
                }
                ns.push(sl);
                nb.push(tl);
                ns.push(sr);
                nb.push(tr);
            }
            seeds = ns;
            bits = nb;
        }
        let conv = p.convert.blocks(&seeds);
        conv.iter()
            .zip(&seeds)
            .zip(&bits)
            .map(|((&c, &s), &t)| {
                let y = c ^ s;
                if t {
                    y ^ self.cw_out
                } else {
                    y
                }
            })
            .collect()
    }

    /// Serialized size in bytes.
    pub fn byte_len(&self) -> usize {
        5 + 16 + 17 * self.cws.len() + 16
    }

    pub fn size_bits(&self) -> usize {
        8 * self.byte_len()
    }

    /// Version 1 layout: version, domain bits, output bits (u16), party,
    /// root seed, then per level a seed correction and a control byte, then
    /// the output correction. Integers are little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_len());
        out.push(KEY_VERSION);
        out.push(self.domain_bits);
        out.extend_from_slice(&OUTPUT_BITS.to_le_bytes());
        out.push(self.party);
        out.extend_from_slice(&self.seed.to_le_bytes());
        for cw in &self.cws {
            out.extend_from_slice(&cw.seed.to_le_bytes());
            out.push(cw.t_left as u8 | (cw.t_right as u8) << 1);
        }
        out.extend_from_slice(&self.cw_out.to_le_bytes());
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<DpfKey> {
        let bad = |m: &str| Error::MalformedKey(m.to_string());
        if b.len() < 5 + 32 {
            return Err(bad("too short"));
        }
        if b[0] != KEY_VERSION {
            return Err(bad("unknown version"));
        }
        let n = b[1] as usize;
        if n > 63 {
            return Err(bad("domain too large"));
        }
        if u16::from_le_bytes([b[2], b[3]]) != OUTPUT_BITS {
            return Err(bad("unsupported output width"));
        }
        let party = b[4];
        if party > 1 {
            return Err(bad("party bit"));
        }
        if b.len() != 5 + 16 + 17 * n + 16 {
            return Err(bad("length does not match domain"));
        }
        let u = |at: usize| u128::from_le_bytes(b[at..at + 16].try_into().unwrap());
        let seed = u(5);
        let mut cws = Vec::with_capacity(n);
        for i in 0..n {
            let at = 21 + 17 * i;
            let ctl = b[at + 16];
            if ctl > 3 {
                return Err(bad("control byte"));
            }
            cws.push(CorrectionWord {
                seed: u(at),
                t_left: ctl & 1 == 1,
                t_right: ctl & 2 == 2,
            });
        }
        Ok(DpfKey {
            party,
            domain_bits: n as u8,
            seed,
            cws,
            cw_out: u(21 + 17 * n),
        })
    }
}

/// Upper bound on key size: `4 * 128 * (domain_bits + 1) + 128` bits.
pub fn key_size_bound(domain_bits: usize) -> usize {
    4 * 128 * (domain_bits + 1) + OUTPUT_BITS as usize
}
