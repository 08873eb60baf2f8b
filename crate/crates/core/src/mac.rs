//! Information-theoretic MACs over `GF(2^ell)` on shared values.
//!
//! A value `x` is authenticated by the sharing of `alpha * x` for a secret
//! shared key `alpha`. A batch of pairs is checked with one random linear
//! combination, masked so that nothing about the values is opened.

use std::sync::Arc;

use rand::Rng;

use crate::error::{AbortReason, Error, Result};
use crate::gf2::{BitVec, FieldCtx};
use crate::harness::Site;
use crate::prf::seeded_rng;
use crate::rss::{Party, RssShare};

/// A shared MAC key together with its field.
#[derive(Clone, Debug)]
pub struct MacKey {
    pub ctx: Arc<FieldCtx>,
    pub alpha: RssShare,
}

impl MacKey {
    pub fn ell(&self) -> usize {
        self.ctx.ell()
    }
}

/// A value and its tag, both shared; widths are equal multiples of `ell`.
#[derive(Clone, Debug)]
pub struct AuthPair {
    pub x: RssShare,
    pub sigma: RssShare,
}

/// `n` nonzero field elements drawn from a public seed, packed.
pub fn public_coefficients(ctx: &FieldCtx, seed: &[u8; 16], n: usize) -> BitVec {
    let ell = ctx.ell();
    let mut rng = seeded_rng(seed, 2);
    let mut out = BitVec::zeros(n * ell);
    for j in 0..n {
        out.write_at(j * ell, &random_nonzero(&mut rng, ell));
    }
    out
}

impl Party {
    /// A fresh random key in `GF(2^ell)`.
    pub fn mac_keygen(&mut self, ell: usize) -> Result<MacKey> {
        let ctx = FieldCtx::new(ell);
        let alpha = self.rand_share(ell)?;
        Ok(MacKey { ctx, alpha })
    }

    /// Tags every `ell`-bit chunk of `x`.
    pub fn mac_attach(&mut self, x: &RssShare, key: &MacKey) -> Result<RssShare> {
        if x.width() % key.ell() != 0 {
            return Err(Error::Config(format!(
                "{} bits is not a whole number of {}-bit elements",
                x.width(),
                key.ell()
            )));
        }
        self.mul_field_by(x, &key.alpha, &key.ctx, Site::MacAttach)
    }

    pub fn mac_attach_many(&mut self, xs: &[RssShare], key: &MacKey) -> Result<Vec<AuthPair>> {
        let packed = RssShare::concat(self.id(), xs);
        let sigma = self.mac_attach(&packed, key)?;
        let mut at = 0;
        Ok(xs
            .iter()
            .map(|x| {
                let s = sigma.slice(at, x.width());
                at += x.width();
                AuthPair {
                    x: x.clone(),
                    sigma: s,
                }
            })
            .collect())
    }

    /// Checks that `sigmas = alpha * xs` chunk-wise; aborts otherwise.
    ///
    /// A wrong tag on any chunk passes with probability about `2^-ell`.
    pub fn mac_check(&mut self, xs: &RssShare, sigmas: &RssShare, key: &MacKey) -> Result<()> {
        let ctx = &key.ctx;
        let ell = ctx.ell();
        if xs.width() != sigmas.width() || xs.width() % ell != 0 {
            return Err(Error::Config("values and tags do not line up".into()));
        }
        let n = xs.width() / ell;
        let r = self.rand_share(ell)?;
        let sigma_r = self.mul_field(&r, &key.alpha, ctx)?;
        let seed = self.coin_seed()?;
        let rho = public_coefficients(ctx, &seed, n);
        let lin = |s: &RssShare| {
            RssShare::new(
                s.holder,
                ctx.mul_many(&rho, &s.own).fold_xor(ell),
                ctx.mul_many(&rho, &s.prev).fold_xor(ell),
            )
        };
        let v = r.xor(&lin(xs));
        let w = sigma_r.xor(&lin(sigmas));
        let v_open = self.open(&v)?;
        let diff = w.xor(&key.alpha.scale(ctx, &v_open));
        if self.check_zero(&diff, ctx)? {
            Ok(())
        } else {
            Err(Error::Abort(AbortReason::MacCheckFailed))
        }
    }

    pub fn mac_check_pairs(&mut self, pairs: &[AuthPair], key: &MacKey) -> Result<()> {
        let xs = RssShare::concat(self.id(), pairs.iter().map(|p| &p.x));
        let ss = RssShare::concat(self.id(), pairs.iter().map(|p| &p.sigma));
        self.mac_check(&xs, &ss, key)
    }
}

pub fn random_nonzero<R: Rng + ?Sized>(rng: &mut R, ell: usize) -> BitVec {
    loop {
        let c = BitVec::random(rng, ell);
        if !c.is_zero() {
            return c;
        }
    }
}
