use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use super::bitvec::BitVec;
use super::poly::{self, Polynomial, Reducer};
use crate::error::{Error, Result};

/// Fields narrower than this are only useful for tests.
pub const STAT_SECURITY: usize = 40;

/// Deterministic search for an irreducible polynomial of degree `ell`.
///
/// Trinomials `X^ell + X^a + 1` come first in increasing `a`, then
/// pentanomials `X^ell + X^a + X^b + X^c + 1` with `(a, b, c)` minimal in
/// lexicographic order, then any odd-weight polynomial in increasing
/// integer order.
pub fn find_irreducible(ell: usize) -> Polynomial {
    assert!(ell >= 1, "degree must be positive");
    if ell == 1 {
        return Polynomial::from_exponents(&[1, 0]);
    }
    for a in 1..ell {
        let f = Polynomial::from_exponents(&[ell, a, 0]);
        if f.is_irreducible() {
            return f;
        }
    }
    for a in 3..ell {
        for b in 2..a {
            for c in 1..b {
                let f = Polynomial::from_exponents(&[ell, a, b, c, 0]);
                if f.is_irreducible() {
                    return f;
                }
            }
        }
    }
    assert!(ell < 128, "no sparse irreducible of degree {ell}");
    let mut low: u128 = 1;
    loop {
        if (low.count_ones() + 1) % 2 == 1 {
            let mut exps: Vec<usize> = (0..ell).filter(|i| (low >> i) & 1 == 1).collect();
            exps.push(ell);
            let f = Polynomial::from_exponents(&exps);
            if f.is_irreducible() {
                return f;
            }
        }
        low += 2;
    }
}

/// Arithmetic context for GF(2^ell) = GF(2)[X] / f(X).
pub struct FieldCtx {
    ell: usize,
    modulus: Polynomial,
    reducer: Reducer,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.ell == other.ell && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {}", self.ell, self.modulus)
    }
}

static CACHE: OnceLock<Mutex<HashMap<usize, Arc<FieldCtx>>>> = OnceLock::new();

impl FieldCtx {
    /// The context for `GF(2^ell)` using [`find_irreducible`]. Contexts are
    /// cached per width.
    pub fn new(ell: usize) -> Arc<FieldCtx> {
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(ctx) = cache.lock().unwrap().get(&ell) {
            return ctx.clone();
        }
        if ell < STAT_SECURITY && !cfg!(test) {
            log::warn!(
                "GF(2^{ell}) is below {STAT_SECURITY} bits; MAC checks in this field are not sound"
            );
        }
        let modulus = find_irreducible(ell);
        let ctx = Arc::new(FieldCtx {
            ell,
            reducer: Reducer::new(&modulus),
            modulus,
        });
        cache.lock().unwrap().insert(ell, ctx.clone());
        ctx
    }

    /// A context for an explicit modulus, which must be irreducible of degree `ell`.
    pub fn with_modulus(ell: usize, modulus: Polynomial) -> Result<FieldCtx> {
        if modulus.degree() != Some(ell) || !modulus.is_irreducible() {
            return Err(Error::Config(format!(
                "{modulus} is not an irreducible polynomial of degree {ell}"
            )));
        }
        Ok(FieldCtx {
            ell,
            reducer: Reducer::new(&modulus),
            modulus,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn modulus(&self) -> &Polynomial {
        &self.modulus
    }

    /// Product of two `ell`-bit elements.
    pub fn mul(&self, a: &BitVec, b: &BitVec) -> BitVec {
        debug_assert!(a.len() == self.ell && b.len() == self.ell);
        let prod = poly::mul(a.words(), b.words());
        BitVec::from_words(self.reducer.reduce(&prod), self.ell)
    }

    /// Chunk-wise product of two vectors of `len / ell` elements each.
    pub fn mul_many(&self, a: &BitVec, b: &BitVec) -> BitVec {
        assert_eq!(a.len(), b.len());
        assert_eq!(a.len() % self.ell, 0);
        let ell = self.ell;
        let mut out = BitVec::zeros(a.len());
        for j in 0..a.len() / ell {
            let p = self.mul(&a.slice(j * ell, ell), &b.slice(j * ell, ell));
            out.write_at(j * ell, &p);
        }
        out
    }

    /// Multiplies each `ell`-bit chunk of `a` by the single element `s`.
    pub fn scale_many(&self, a: &BitVec, s: &BitVec) -> BitVec {
        assert_eq!(a.len() % self.ell, 0);
        let ell = self.ell;
        let mut out = BitVec::zeros(a.len());
        for j in 0..a.len() / ell {
            let p = self.mul(&a.slice(j * ell, ell), s);
            out.write_at(j * ell, &p);
        }
        out
    }

    /// Multiplicative inverse via `a^(2^ell - 2)`; zero maps to zero.
    pub fn inv(&self, a: &BitVec) -> BitVec {
        let mut result = BitVec::from_u64(1, self.ell);
        let mut sq = a.clone();
        // 2^ell - 2 has bits 1..ell set.
        for _ in 1..self.ell {
            sq = self.mul(&sq, &sq);
            result = self.mul(&result, &sq);
        }
        result
    }

    pub fn zero(self: &Arc<Self>) -> GfElement {
        GfElement {
            ctx: self.clone(),
            bits: BitVec::zeros(self.ell),
        }
    }

    pub fn one(self: &Arc<Self>) -> GfElement {
        GfElement {
            ctx: self.clone(),
            bits: BitVec::from_u64(1, self.ell),
        }
    }

    pub fn element(self: &Arc<Self>, bits: BitVec) -> GfElement {
        GfElement::from_bits(self.clone(), bits)
    }
}

/// An element of GF(2^ell) tied to its context.
#[derive(Clone, Debug)]
pub struct GfElement {
    ctx: Arc<FieldCtx>,
    bits: BitVec,
}

impl GfElement {
    /// Reinterprets `bits` as a field element. Panics if the width is wrong.
    pub fn from_bits(ctx: Arc<FieldCtx>, bits: BitVec) -> Self {
        assert_eq!(bits.len(), ctx.ell, "element width must equal ell");
        GfElement { ctx, bits }
    }

    pub fn from_u64(ctx: Arc<FieldCtx>, v: u64) -> Self {
        let ell = ctx.ell;
        GfElement {
            ctx,
            bits: BitVec::from_u64(v, ell),
        }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn into_bits(self) -> BitVec {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits.is_zero()
    }

    fn same_ctx(&self, other: &GfElement) -> Result<()> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn add(&self, other: &GfElement) -> Result<GfElement> {
        self.same_ctx(other)?;
        Ok(GfElement {
            ctx: self.ctx.clone(),
            bits: &self.bits ^ &other.bits,
        })
    }

    pub fn mul(&self, other: &GfElement) -> Result<GfElement> {
        self.same_ctx(other)?;
        Ok(GfElement {
            ctx: self.ctx.clone(),
            bits: self.ctx.mul(&self.bits, &other.bits),
        })
    }

    pub fn inv(&self) -> GfElement {
        GfElement {
            ctx: self.ctx.clone(),
            bits: self.ctx.inv(&self.bits),
        }
    }
}

impl PartialEq for GfElement {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx && self.bits == other.bits
    }
}

impl Eq for GfElement {}

/// GF(2^128) on `u128` values, for hot loops that cannot afford allocation.
#[derive(Clone, Debug)]
pub struct Gf128 {
    taps: Vec<u32>,
}

impl Gf128 {
    pub fn new() -> Self {
        let f = FieldCtx::new(128);
        Gf128 {
            taps: f.modulus().exponents()[1..]
                .iter()
                .map(|&e| e as u32)
                .collect(),
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        let (a0, a1) = (a as u64, (a >> 64) as u64);
        let (b0, b1) = (b as u64, (b >> 64) as u64);
        let (l0, l1) = poly::clmul64(a0, b0);
        let (h0, h1) = poly::clmul64(a1, b1);
        let (m0, m1) = poly::clmul64(a0 ^ a1, b0 ^ b1);
        let (m0, m1) = (m0 ^ l0 ^ h0, m1 ^ l1 ^ h1);
        let mut lo = (l0 as u128) | (((l1 ^ m0) as u128) << 64);
        let mut hi = ((h0 ^ m1) as u128) | ((h1 as u128) << 64);
        while hi != 0 {
            let h = hi;
            hi = 0;
            for &t in &self.taps {
                lo ^= h << t;
                if t > 0 {
                    hi ^= h >> (128 - t);
                }
            }
        }
        lo
    }
}

impl Default for Gf128 {
    fn default() -> Self {
        Self::new()
    }
}
