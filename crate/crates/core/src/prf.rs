//! AES-128 based PRF in counter mode.

use aes::cipher::generic_array::GenericArray;
use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes128;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::gf2::BitVec;
use crate::transport::SessionId;

/// Domain separator so that different uses of one session never share PRF output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Rand = 1,
    Zero = 2,
    Expand = 3,
}

#[derive(Clone)]
pub struct Prf {
    cipher: Aes128,
    key: [u8; 16],
}

impl Prf {
    pub fn new(key: [u8; 16]) -> Self {
        Prf {
            cipher: Aes128::new(GenericArray::from_slice(&key)),
            key,
        }
    }

    pub fn key(&self) -> &[u8; 16] {
        &self.key
    }

    /// `len` pseudorandom bits bound to `(sid, purpose)`.
    pub fn expand(&self, sid: SessionId, purpose: Purpose, len: usize) -> BitVec {
        let mut prefix = [0u8; 9];
        prefix[..2].copy_from_slice(&sid.tag.id().to_le_bytes());
        prefix[2..8].copy_from_slice(&sid.counter.to_le_bytes()[..6]);
        prefix[8] = purpose as u8;
        self.stream(&prefix, len)
    }

    /// `len` pseudorandom bits from a free-form prefix of at most 9 bytes.
    pub fn stream(&self, prefix: &[u8], len: usize) -> BitVec {
        assert!(prefix.len() <= 9);
        let nblocks = len.div_ceil(128);
        let mut blocks: Vec<GenericArray<u8, _>> = (0..nblocks as u64)
            .map(|i| {
                let mut b = [0u8; 16];
                b[..prefix.len()].copy_from_slice(prefix);
                b[9..].copy_from_slice(&i.to_le_bytes()[..7]);
                GenericArray::from(b)
            })
            .collect();
        self.cipher.encrypt_blocks(&mut blocks);
        let mut words = Vec::with_capacity(2 * nblocks);
        for b in &blocks {
            words.push(u64::from_le_bytes(b[..8].try_into().unwrap()));
            words.push(u64::from_le_bytes(b[8..].try_into().unwrap()));
        }
        BitVec::from_words(words, len)
    }

    /// One AES block, as a 128-bit integer.
    pub fn block(&self, input: u128) -> u128 {
        let mut b = GenericArray::from(input.to_le_bytes());
        self.cipher.encrypt_block(&mut b);
        u128::from_le_bytes(b.into())
    }

    /// Many AES blocks at once.
    pub fn blocks(&self, inputs: &[u128]) -> Vec<u128> {
        let mut bs: Vec<_> = inputs
            .iter()
            .map(|x| GenericArray::from(x.to_le_bytes()))
            .collect();
        self.cipher.encrypt_blocks(&mut bs);
        bs.into_iter().map(|b| u128::from_le_bytes(b.into())).collect()
    }
}

/// A seeded RNG for public randomness derived from a jointly sampled seed.
pub fn seeded_rng(seed: &[u8; 16], domain: u8) -> ChaCha20Rng {
    let mut s = [0u8; 32];
    s[..16].copy_from_slice(seed);
    s[16] = domain;
    ChaCha20Rng::from_seed(s)
}
