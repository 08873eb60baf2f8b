use std::fmt;
use std::ops::{BitAnd, BitAndAssign, BitXor, BitXorAssign, Not};

use rand::Rng;

/// A fixed-length string of bits packed little-endian into 64-bit words.
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `len` in
/// the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec {
            words: vec![u64::MAX; words_for(len)],
            len,
        };
        v.mask_tail();
        v
    }

    pub fn from_u64(value: u64, len: usize) -> Self {
        let mut v = BitVec::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.mask_tail();
        }
        v
    }

    pub fn from_u128(value: u128, len: usize) -> Self {
        let mut v = BitVec::zeros(len);
        if !v.words.is_empty() {
            v.words[0] = value as u64;
        }
        if v.words.len() > 1 {
            v.words[1] = (value >> 64) as u64;
        }
        v.mask_tail();
        v
    }

    /// Takes ownership of `words`, resizing to fit `len` and clearing stray bits.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVec { words, len };
        v.mask_tail();
        v
    }

    /// Reads `len` bits from little-endian bytes. Missing bytes read as zero.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        let mut words = vec![0u64; words_for(len)];
        for (i, &b) in bytes.iter().take(len.div_ceil(8)).enumerate() {
            words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        let mut v = BitVec { words, len };
        v.mask_tail();
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.words[i / 64] |= 1 << (i % 64);
            }
        }
        v
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        let words = (0..words_for(len)).map(|_| rng.gen::<u64>()).collect();
        BitVec::from_words(words, len)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn into_words(self) -> Vec<u64> {
        self.words
    }

    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        let m = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The low 64 bits as an integer.
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn to_u128(&self) -> u128 {
        let lo = self.words.first().copied().unwrap_or(0) as u128;
        let hi = self.words.get(1).copied().unwrap_or(0) as u128;
        lo | (hi << 64)
    }

    /// Little-endian bytes, `ceil(len / 8)` of them.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push((self.words[i / 8] >> (8 * (i % 8))) as u8);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Reads 64 bits starting at bit `start`; bits past the end read as zero.
    #[inline]
    fn word_at(&self, start: usize) -> u64 {
        let w = start / 64;
        let s = start % 64;
        let lo = self.words.get(w).copied().unwrap_or(0);
        if s == 0 {
            lo
        } else {
            let hi = self.words.get(w + 1).copied().unwrap_or(0);
            (lo >> s) | (hi << (64 - s))
        }
    }

    /// Copies bits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(
            start + len <= self.len,
            "slice {start}+{len} beyond {}",
            self.len
        );
        let words = (0..words_for(len))
            .map(|j| self.word_at(start + 64 * j))
            .collect();
        BitVec::from_words(words, len)
    }

    /// Reads up to 64 bits at `start` as an integer.
    pub fn get_bits(&self, start: usize, len: usize) -> u64 {
        assert!(len <= 64 && start + len <= self.len);
        let w = self.word_at(start);
        if len == 64 {
            w
        } else {
            w & ((1u64 << len) - 1)
        }
    }

    /// Overwrites up to 64 bits at `start` with the low bits of `value`.
    pub fn set_bits(&mut self, start: usize, len: usize, value: u64) {
        assert!(len <= 64 && start + len <= self.len);
        for i in 0..len {
            self.set(start + i, (value >> i) & 1 == 1);
        }
    }

    fn combine_at(&mut self, start: usize, other: &BitVec, op: impl Fn(u64, u64) -> u64) {
        assert!(start + other.len <= self.len);
        for (j, &src) in other.words.iter().enumerate() {
            let nbits = (other.len - 64 * j).min(64);
            let mask = if nbits == 64 {
                u64::MAX
            } else {
                (1u64 << nbits) - 1
            };
            let p = start + 64 * j;
            let cur = self.word_at(p) & mask;
            let diff = (op(cur, src & mask) & mask) ^ cur;
            let (w, s) = (p / 64, p % 64);
            self.words[w] ^= diff << s;
            if s != 0 && diff >> (64 - s) != 0 {
                self.words[w + 1] ^= diff >> (64 - s);
            }
        }
    }

    /// Overwrites bits `start..start + other.len()` with `other`.
    pub fn write_at(&mut self, start: usize, other: &BitVec) {
        self.combine_at(start, other, |_, b| b);
    }

    /// XORs `other` into bits `start..start + other.len()`.
    pub fn xor_at(&mut self, start: usize, other: &BitVec) {
        self.combine_at(start, other, |a, b| a ^ b);
    }

    pub fn append(&mut self, other: &BitVec) {
        let start = self.len;
        self.len += other.len;
        self.words.resize(words_for(self.len), 0);
        self.write_at(start, other);
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a BitVec>>(parts: I) -> BitVec {
        let mut out = BitVec::zeros(0);
        for p in parts {
            out.append(p);
        }
        out
    }

    /// Repeats every bit `k` times: bit `j` becomes bits `j*k..(j+1)*k`.
    pub fn repeat_bits(&self, k: usize) -> BitVec {
        let mut out = BitVec::zeros(self.len * k);
        for j in 0..self.len {
            if self.get(j) {
                for i in 0..k {
                    out.set(j * k + i, true);
                }
            }
        }
        out
    }

    /// XOR of consecutive `k`-bit chunks. `len` must be a multiple of `k`.
    pub fn fold_xor(&self, k: usize) -> BitVec {
        assert!(k > 0 && self.len % k == 0);
        let mut out = BitVec::zeros(k);
        for j in 0..self.len / k {
            out.xor_at(0, &self.slice(j * k, k));
        }
        out
    }

    /// Bit `i` of the result is bit `idx[i]` of `self`.
    pub fn gather(&self, idx: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(idx.len());
        for (i, &j) in idx.iter().enumerate() {
            if self.get(j) {
                out.words[i / 64] |= 1 << (i % 64);
            }
        }
        out
    }

    /// Concatenation of `times` copies.
    pub fn tile(&self, times: usize) -> BitVec {
        let mut out = BitVec::zeros(self.len * times);
        for t in 0..times {
            out.write_at(t * self.len, self);
        }
        out
    }

    pub fn and_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[{}](", self.len)?;
        for w in self.words.iter().rev() {
            write!(f, "{w:016x}")?;
        }
        write!(f, ")")
    }
}

impl BitXor<&BitVec> for &BitVec {
    type Output = BitVec;
    fn bitxor(self, rhs: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl BitXor<BitVec> for BitVec {
    type Output = BitVec;
    fn bitxor(mut self, rhs: BitVec) -> BitVec {
        self.xor_assign(&rhs);
        self
    }
}

impl BitXor<&BitVec> for BitVec {
    type Output = BitVec;
    fn bitxor(mut self, rhs: &BitVec) -> BitVec {
        self.xor_assign(rhs);
        self
    }
}

impl BitAnd<&BitVec> for &BitVec {
    type Output = BitVec;
    fn bitand(self, rhs: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.and_assign(rhs);
        out
    }
}

impl BitXorAssign<&BitVec> for BitVec {
    fn bitxor_assign(&mut self, rhs: &BitVec) {
        self.xor_assign(rhs);
    }
}

impl BitAndAssign<&BitVec> for BitVec {
    fn bitand_assign(&mut self, rhs: &BitVec) {
        self.and_assign(rhs);
    }
}

impl Not for &BitVec {
    type Output = BitVec;
    fn not(self) -> BitVec {
        let words = self.words.iter().map(|w| !w).collect();
        BitVec::from_words(words, self.len)
    }
}
