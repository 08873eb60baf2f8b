use rand::seq::SliceRandom;

use super::Triple;
use crate::error::{AbortReason, Error, Result};
use crate::harness::Site;
use crate::prf::seeded_rng;
use crate::rss::{Party, RssShare};

impl Party {
    /// Produces `n` verified AND triples.
    ///
    /// Generates `n * B` candidates plus a third extra, shuffles them with
    /// a joint coin, opens the extra ones and checks them, then splits the
    /// rest into buckets of `B` and checks the first triple of each bucket
    /// against the others.
    pub fn triple_gen(&mut self, n: usize) -> Result<Triple> {
        let me = self.id();
        if n == 0 {
            let z = RssShare::zeros(me, 0);
            return Ok(Triple {
                a: z.clone(),
                b: z.clone(),
                c: z,
            });
        }
        let bucket = self.cfg.bucket.max(1);
        let main = n * bucket;
        let opened = main.div_ceil(3);
        let total = main + opened;
        let a = self.rand_share(total)?;
        let b = self.rand_share(total)?;
        let c = self.mul_bits_at(&a, &b, Site::TripleC)?;

        let seed = self.coin_seed()?;
        let mut perm: Vec<usize> = (0..total).collect();
        perm.shuffle(&mut seeded_rng(&seed, 1));

        let pick = |idx: &[usize]| Triple {
            a: gather(&a, idx),
            b: gather(&b, idx),
            c: gather(&c, idx),
        };

        let check = pick(&perm[..opened]);
        let v = self.open(&RssShare::concat(me, [&check.a, &check.b, &check.c]))?;
        let (va, vb, vc) = (
            v.slice(0, opened),
            v.slice(opened, opened),
            v.slice(2 * opened, opened),
        );
        if &va & &vb != vc {
            return Err(Error::Abort(AbortReason::TripleCheckFailed));
        }

        let body = &perm[opened..];
        let out_idx: Vec<usize> = (0..n).map(|j| body[j * bucket]).collect();
        let out = pick(&out_idx);
        if bucket > 1 {
            let sac_idx: Vec<usize> = (1..bucket)
                .flat_map(|t| (0..n).map(move |j| (j, t)))
                .map(|(j, t)| body[j * bucket + t])
                .collect();
            let sac = pick(&sac_idx);
            let reps = bucket - 1;
            self.sacrifice(&out.a.tile(reps), &out.b.tile(reps), &out.c.tile(reps), &sac)?;
        }
        Ok(out)
    }

    /// Checks `z = x & y` using a triple `t`, spending `t`.
    pub(crate) fn sacrifice(
        &mut self,
        x: &RssShare,
        y: &RssShare,
        z: &RssShare,
        t: &Triple,
    ) -> Result<()> {
        let w = x.width();
        if w == 0 {
            return Ok(());
        }
        let me = self.id();
        let ef = self.open(&RssShare::concat(me, [&x.xor(&t.a), &y.xor(&t.b)]))?;
        let (e, f) = (ef.slice(0, w), ef.slice(w, w));
        // z = ef ^ e.b ^ f.a ^ c when z = x & y.
        let check = z
            .xor(&t.c)
            .xor(&t.b.and_public(&e))
            .xor(&t.a.and_public(&f))
            .xor_public(&(&e & &f));
        self.assert_zero_bits(&check, AbortReason::SacrificeFailed)
    }

    /// Verified triples are added to this party's pool.
    pub fn generate_triples(&mut self, n: usize) -> Result<()> {
        let t = self.triple_gen(n)?;
        self.triples.push(&t);
        Ok(())
    }

    pub fn triples_available(&self) -> usize {
        self.triples.available()
    }

    /// Takes `n` triples from the pool, generating any shortfall now.
    pub(crate) fn take_triples(&mut self, n: usize) -> Result<Triple> {
        let short = n.saturating_sub(self.triples.available());
        if short > 0 {
            log::debug!("{}: generating {short} triples on demand", self.id());
            self.generate_triples(short)?;
        }
        Ok(self.triples.take(n).expect("pool was refilled"))
    }
}

fn gather(x: &RssShare, idx: &[usize]) -> RssShare {
    RssShare::new(x.holder, x.own.gather(idx), x.prev.gather(idx))
}
