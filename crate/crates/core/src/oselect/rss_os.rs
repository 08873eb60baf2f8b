use super::{index_bits, RssArray};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::harness::Site;
use crate::rss::{Party, RssShare};
use crate::transport::{Phase, Tag};

/// A shared random index and the shared unit vector at that index.
#[derive(Clone, Debug)]
pub struct RssOsToken {
    pub id: u64,
    pub rdx: RssShare,
    pub v: RssShare,
}

impl Party {
    /// `count` tokens for arrays of length `m`, built from equality tests.
    pub fn rss_os_preprocess(&mut self, m: usize, count: usize) -> Result<Vec<RssOsToken>> {
        let lm = index_bits(m)?;
        if count == 0 {
            return Ok(Vec::new());
        }
        let saved = self.phase();
        self.set_phase(Phase::OsPreprocess);
        let out = (|| {
            let ands = count * m * (lm - 1);
            let short = ands.saturating_sub(self.triples_available());
            self.generate_triples(short)?;
            let rdxs: Vec<RssShare> = (0..count)
                .map(|_| self.rand_share(lm))
                .collect::<Result<_>>()?;
            let vs = self.unit_vectors(&rdxs, m)?;
            self.verify_pending()?;
            Ok(rdxs
                .into_iter()
                .zip(vs)
                .map(|(rdx, v)| RssOsToken {
                    id: self.fresh_token_id(),
                    rdx,
                    v,
                })
                .collect())
        })();
        self.set_phase(saved);
        out
    }

    /// `arr[idx]`, opening only `idx ^ rdx` and resharing once.
    pub fn rss_os_select(&mut self, arr: &RssArray, idx: &RssShare, tok: &RssOsToken) -> Result<RssShare> {
        let m = arr.len();
        let lm = index_bits(m)?;
        if idx.width() != lm || tok.rdx.width() != lm || tok.v.width() != m {
            return Err(Error::Config("index, token and array sizes disagree".into()));
        }
        self.consume_token(tok.id)?;
        let delta = self.open_tagged(&tok.rdx.xor(idx), Tag::OsDelta)?.to_u64() as usize;
        // u[j] = v[j ^ delta] is the unit vector at idx.
        let u_own = |j: usize| tok.v.own.get(j ^ delta);
        let u_prev = |j: usize| tok.v.prev.get(j ^ delta);
        // (3,3) term: T_i u_i + T_(i-1) u_i + T_i u_(i-1)
        let a = arr.xor_where(true, u_own);
        let b = arr.xor_where(false, u_own);
        let c = arr.xor_where(true, u_prev);
        let t: Vec<u64> = a.iter().zip(&b).zip(&c).map(|((x, y), z)| x ^ y ^ z).collect();
        let t: BitVec = arr.words_to_bits(t);
        self.reshare_sum(t, Site::OsReshare)
    }
}
