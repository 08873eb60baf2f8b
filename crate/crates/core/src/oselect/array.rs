use crate::gf2::BitVec;
use crate::rss::RssShare;
use crate::transport::PartyId;

/// A shared array of fixed-width entries, stored flat for fast selection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RssArray {
    holder: PartyId,
    width: usize,
    len: usize,
    stride: usize,
    own: Vec<u64>,
    prev: Vec<u64>,
}

impl RssArray {
    /// Splits a packed share of `len * width` bits into entries.
    pub fn from_packed(share: &RssShare, width: usize) -> Self {
        assert!(width > 0 && share.width() % width == 0);
        let len = share.width() / width;
        let mut out = RssArray::zeros(share.holder, width, len);
        for j in 0..len {
            out.set(j, &share.slice(j * width, width));
        }
        out
    }

    pub fn zeros(holder: PartyId, width: usize, len: usize) -> Self {
        let stride = width.div_ceil(64);
        RssArray {
            holder,
            width,
            len,
            stride,
            own: vec![0; stride * len],
            prev: vec![0; stride * len],
        }
    }

    pub fn holder(&self) -> PartyId {
        self.holder
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn entry(&self, j: usize) -> RssShare {
        let r = j * self.stride..(j + 1) * self.stride;
        RssShare::new(
            self.holder,
            BitVec::from_words(self.own[r.clone()].to_vec(), self.width),
            BitVec::from_words(self.prev[r].to_vec(), self.width),
        )
    }

    pub fn set(&mut self, j: usize, v: &RssShare) {
        assert_eq!(v.width(), self.width);
        let r = j * self.stride..(j + 1) * self.stride;
        self.own[r.clone()].copy_from_slice(v.own.words());
        self.prev[r].copy_from_slice(v.prev.words());
    }

    /// All entries concatenated.
    pub fn packed(&self) -> RssShare {
        RssShare::concat(self.holder, (0..self.len).map(|j| self.entry(j)).collect::<Vec<_>>().iter())
    }

    /// Entry-wise concatenation `self[j] || other[j]`.
    pub fn zip(&self, other: &RssArray) -> RssArray {
        assert_eq!(self.len, other.len);
        let mut out = RssArray::zeros(self.holder, self.width + other.width, self.len);
        for j in 0..self.len {
            let mut e = self.entry(j);
            e.append(&other.entry(j));
            out.set(j, &e);
        }
        out
    }

    /// XOR of the entries of one half (`own` or `prev`) where `pick(j)` holds.
    pub(crate) fn xor_where(&self, own: bool, pick: impl Fn(usize) -> bool) -> Vec<u64> {
        let src = if own { &self.own } else { &self.prev };
        let mut acc = vec![0u64; self.stride];
        for j in 0..self.len {
            if pick(j) {
                for (a, w) in acc.iter_mut().zip(&src[j * self.stride..(j + 1) * self.stride]) {
                    *a ^= w;
                }
            }
        }
        acc
    }

    pub(crate) fn words_to_bits(&self, w: Vec<u64>) -> BitVec {
        BitVec::from_words(w, self.width)
    }
}
