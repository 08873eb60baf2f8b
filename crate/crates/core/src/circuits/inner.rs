use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::rss::{Party, RssShare};

/// Input-independent material for selecting features of one query.
///
/// `a` masks the whole feature vector once; level `l` has a mask `b_l` for
/// the selector and `c_l = xor_j a_j & b_lj`.
#[derive(Clone, Debug)]
pub struct FeatureBundle {
    pub n: usize,
    pub k: usize,
    pub a: RssShare,
    pub levels: VecDeque<(RssShare, RssShare)>,
}

/// Per-query state after the masked feature vector has been opened.
#[derive(Clone, Debug)]
pub struct FeatureSelector {
    n: usize,
    k: usize,
    e: BitVec,
    a: RssShare,
    levels: VecDeque<(RssShare, RssShare)>,
}

impl FeatureSelector {
    pub fn remaining(&self) -> usize {
        self.levels.len()
    }
}

impl Party {
    /// Preprocesses masks for selecting one `k`-bit word out of `n`,
    /// `levels` times against the same hidden vector.
    pub fn feature_bundle(&mut self, n: usize, k: usize, levels: usize) -> Result<FeatureBundle> {
        let a = self.rand_share(n * k)?;
        let bs = self.rand_share(n * levels)?;
        let prod = self.and_gate(&a.tile(levels), &bs.repeat_bits(k))?;
        let levels = (0..levels)
            .map(|l| {
                let b = bs.slice(l * n, n);
                let c = prod.slice(l * n * k, n * k).fold_xor(k);
                (b, c)
            })
            .collect();
        Ok(FeatureBundle { n, k, a, levels })
    }

    /// Opens `x ^ a` for the query's feature vector `x` of `n` words.
    pub fn open_features(&mut self, x: &RssShare, bundle: FeatureBundle) -> Result<FeatureSelector> {
        if x.width() != bundle.n * bundle.k {
            return Err(Error::Config(format!(
                "feature vector is {} bits, bundle expects {}",
                x.width(),
                bundle.n * bundle.k
            )));
        }
        let e = self.open(&x.xor(&bundle.a))?;
        Ok(FeatureSelector {
            n: bundle.n,
            k: bundle.k,
            e,
            a: bundle.a,
            levels: bundle.levels,
        })
    }

    /// `xor_j x_j & v_j` for a shared selector `v` of `n` bits. One opening
    /// of `n` bits, no AND gates.
    pub fn select_feature(&mut self, sel: &mut FeatureSelector, v: &RssShare) -> Result<RssShare> {
        let (n, k) = (sel.n, sel.k);
        assert_eq!(v.width(), n, "selector width");
        let (b, c) = sel
            .levels
            .pop_front()
            .ok_or_else(|| Error::Config("feature bundle exhausted".into()))?;
        let f = self.open(&v.xor(&b))?;
        let ff = f.repeat_bits(k);
        let public = (&sel.e & &ff).fold_xor(k);
        let eb = RssShare::new(
            self.id(),
            (&sel.e & &b.own.repeat_bits(k)).fold_xor(k),
            (&sel.e & &b.prev.repeat_bits(k)).fold_xor(k),
        );
        let fa = sel.a.and_public(&ff).fold_xor(k);
        Ok(c.xor(&eb).xor(&fa).xor_public(&public))
    }

    /// Inner product of `n` shared `k`-bit words with `n` shared bits.
    pub fn inner_product_bits(&mut self, x: &RssShare, v: &RssShare) -> Result<RssShare> {
        let n = v.width();
        if n == 0 || x.width() % n != 0 {
            return Err(Error::Config("operand shapes do not match".into()));
        }
        let k = x.width() / n;
        let bundle = self.feature_bundle(n, k, 1)?;
        self.verify_pending()?;
        let mut sel = self.open_features(x, bundle)?;
        self.select_feature(&mut sel, v)
    }
}
