use sha2::{Digest, Sha256};

use super::{Party, RssShare, TwoShare};
use crate::error::{AbortReason, Error, Result};
use crate::gf2::{BitVec, FieldCtx};
use crate::harness::Site;
use crate::prf::Purpose;
use crate::transport::{PartyId, Tag};

impl Party {
    /// A fresh sharing of a uniformly random value, without interaction.
    pub fn rand_share(&mut self, width: usize) -> Result<RssShare> {
        let sid = self.session(Tag::Rand);
        let keys = self.keys()?;
        let own = keys.next.expand(sid, Purpose::Rand, width);
        let prev = keys.own.expand(sid, Purpose::Rand, width);
        Ok(RssShare::new(self.id(), own, prev))
    }

    /// This party's term of a (3,3) sharing of zero.
    pub fn zero_share(&mut self, width: usize) -> Result<BitVec> {
        let sid = self.session(Tag::Zero);
        let keys = self.keys()?;
        Ok(&keys.own.expand(sid, Purpose::Zero, width) ^ &keys.next.expand(sid, Purpose::Zero, width))
    }

    /// Opens `x` to everyone. Each party gets the missing share from both
    /// other parties and aborts if the copies differ.
    pub fn open(&mut self, x: &RssShare) -> Result<BitVec> {
        self.open_tagged(x, Tag::Open)
    }

    pub(crate) fn open_tagged(&mut self, x: &RssShare, tag: Tag) -> Result<BitVec> {
        let sid = self.session(tag);
        let w = x.width();
        if w == 0 {
            return Ok(BitVec::zeros(0));
        }
        let (me, next, prev) = (self.id(), self.id().next(), self.id().prev());
        debug_assert_eq!(x.holder, me);
        let mut to_prev = x.own.clone();
        self.tamper(Site::OpenShare, &mut to_prev);
        self.send_bits(prev, sid, &to_prev)?;
        self.send_bits(next, sid, &x.prev)?;
        let a = self.recv_bits(next, sid, w)?;
        let b = self.recv_bits(prev, sid, w)?;
        if a != b {
            return Err(Error::Abort(AbortReason::OpenMismatch));
        }
        Ok(&(&x.own ^ &x.prev) ^ &a)
    }

    /// A public uniformly random string.
    pub fn coin(&mut self, width: usize) -> Result<BitVec> {
        let r = self.rand_share(width)?;
        self.open(&r)
    }

    /// A public random 128-bit seed.
    pub fn coin_seed(&mut self) -> Result<[u8; 16]> {
        let c = self.coin(128)?;
        Ok(c.to_u128().to_le_bytes())
    }

    /// Reveals `x` to `to` only; the others learn nothing and get `None`.
    pub fn recon(&mut self, x: &RssShare, to: PartyId) -> Result<Option<BitVec>> {
        self.recon_tagged(x, to, Tag::Recon)
    }

    pub(crate) fn recon_tagged(
        &mut self,
        x: &RssShare,
        to: PartyId,
        tag: Tag,
    ) -> Result<Option<BitVec>> {
        let sid = self.session(tag);
        let w = x.width();
        if w == 0 {
            return Ok((self.id() == to).then(|| BitVec::zeros(0)));
        }
        let me = self.id();
        if me == to {
            let a = self.recv_bits(me.next(), sid, w)?;
            let b = self.recv_bits(me.prev(), sid, w)?;
            if a != b {
                return Err(Error::Abort(AbortReason::ReconMismatch));
            }
            Ok(Some(&(&x.own ^ &x.prev) ^ &a))
        } else {
            // Both helpers hold x_(to+1): P(to+1) as its own share, P(to+2) as prev.
            let mut m = if me == to.next() {
                x.own.clone()
            } else {
                x.prev.clone()
            };
            self.tamper(Site::ReconShare, &mut m);
            self.send_bits(to, sid, &m)?;
            Ok(None)
        }
    }

    /// Shares the dealer's private `value` of `width` bits. Non-dealers pass
    /// `None` and cross-check that they got the same masked value.
    pub fn share_input(
        &mut self,
        value: Option<&BitVec>,
        dealer: PartyId,
        width: usize,
    ) -> Result<RssShare> {
        let r = self.rand_share(width)?;
        let r_val = self.recon(&r, dealer)?;
        let sid = self.session(Tag::ShareDelta);
        let check = self.session(Tag::ShareCheck);
        let me = self.id();
        let delta = if me == dealer {
            let x = value.ok_or_else(|| Error::Config("dealer has no input".into()))?;
            if x.len() != width {
                return Err(Error::Config(format!(
                    "input is {} bits, expected {width}",
                    x.len()
                )));
            }
            let delta = x ^ r_val.as_ref().expect("dealer learns the mask");
            let mut to_prev = delta.clone();
            self.tamper(Site::ShareDelta, &mut to_prev);
            if width > 0 {
                self.send_bits(me.next(), sid, &delta)?;
                self.send_bits(me.prev(), sid, &to_prev)?;
            }
            delta
        } else {
            let delta = if width > 0 {
                self.recv_bits(dealer, sid, width)?
            } else {
                BitVec::zeros(0)
            };
            let other = if me.next() == dealer { me.prev() } else { me.next() };
            let digest = Sha256::digest(delta.to_bytes()).to_vec();
            self.send_bytes(other, check, digest.clone())?;
            let theirs = self.recv_bytes(other, check)?;
            if theirs != digest {
                return Err(Error::Abort(AbortReason::DeltaMismatch));
            }
            delta
        };
        Ok(r.xor_public(&delta))
    }

    fn mul_with(
        &mut self,
        x: &RssShare,
        y: &RssShare,
        site: Site,
        f: impl Fn(&BitVec, &BitVec) -> BitVec,
    ) -> Result<RssShare> {
        assert_eq!(x.width(), y.width(), "operand widths differ");
        let w = x.width();
        let sid = self.session(Tag::Mul);
        let mut z = f(&x.own, &y.own);
        z ^= &f(&x.prev, &y.own);
        z ^= &f(&x.own, &y.prev);
        z ^= &self.zero_share(w)?;
        if w == 0 {
            return Ok(RssShare::zeros(self.id(), 0));
        }
        self.tamper(site, &mut z);
        let (next, prev) = (self.id().next(), self.id().prev());
        self.send_bits(next, sid, &z)?;
        let zp = self.recv_bits(prev, sid, w)?;
        Ok(RssShare::new(self.id(), z, zp))
    }

    /// Bitwise AND of packed bits with a single round of resharing. Not
    /// verified: a corrupt party can add an error to the result.
    pub fn mul_bits(&mut self, x: &RssShare, y: &RssShare) -> Result<RssShare> {
        self.mul_with(x, y, Site::MulReshare, |a, b| a & b)
    }

    pub(crate) fn mul_bits_at(&mut self, x: &RssShare, y: &RssShare, site: Site) -> Result<RssShare> {
        self.mul_with(x, y, site, |a, b| a & b)
    }

    /// Chunk-wise product in `GF(2^ell)`. Not verified.
    pub fn mul_field(&mut self, x: &RssShare, y: &RssShare, ctx: &FieldCtx) -> Result<RssShare> {
        self.mul_with(x, y, Site::MulReshare, |a, b| ctx.mul_many(a, b))
    }

    /// Multiplies every `ell`-bit chunk of `xs` by the shared element `s`.
    pub(crate) fn mul_field_by(
        &mut self,
        xs: &RssShare,
        s: &RssShare,
        ctx: &FieldCtx,
        site: Site,
    ) -> Result<RssShare> {
        let w = xs.width();
        let sid = self.session(Tag::Mul);
        // x_i s_i + x_(i-1) s_i + x_i s_(i-1) = (x_i + x_(i-1)) s_i + x_i s_(i-1)
        let mut z = ctx.scale_many(&(&xs.own ^ &xs.prev), &s.own);
        z ^= &ctx.scale_many(&xs.own, &s.prev);
        z ^= &self.zero_share(w)?;
        if w == 0 {
            return Ok(RssShare::zeros(self.id(), 0));
        }
        self.tamper(site, &mut z);
        let (next, prev) = (self.id().next(), self.id().prev());
        self.send_bits(next, sid, &z)?;
        let zp = self.recv_bits(prev, sid, w)?;
        Ok(RssShare::new(self.id(), z, zp))
    }

    /// Whether the shared field element `x` is zero, by opening `x * r` for
    /// a random shared `r`. A nonzero `x` passes with probability `2^-ell`.
    pub fn check_zero(&mut self, x: &RssShare, ctx: &FieldCtx) -> Result<bool> {
        let r = self.rand_share(ctx.ell())?;
        let w = self.mul_field(x, &r, ctx)?;
        match self.open(&w) {
            Ok(v) => Ok(v.is_zero()),
            Err(Error::Abort(AbortReason::OpenMismatch)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Opens a vector of bits that must all be zero.
    pub(crate) fn assert_zero_bits(&mut self, w: &RssShare, reason: AbortReason) -> Result<()> {
        let v = self.open(w)?;
        if v.is_zero() {
            Ok(())
        } else {
            Err(Error::Abort(reason))
        }
    }

    /// Turns a (2,2) sharing between `P(d+1)` and `P(d+2)`, also known to the
    /// dealer `Pd` in both halves, into a replicated sharing, with no
    /// communication.
    ///
    /// Evaluator `b = 0` is `P(d+1)`, `b = 1` is `P(d+2)`; the dealer passes
    /// both halves.
    pub fn t2r(
        &self,
        dealer: PartyId,
        share: Option<&TwoShare>,
        dealer_halves: Option<(&BitVec, &BitVec)>,
        width: usize,
    ) -> Result<RssShare> {
        let me = self.id();
        let z = BitVec::zeros(width);
        if me == dealer {
            let (x0, x1) =
                dealer_halves.ok_or_else(|| Error::Config("dealer needs both halves".into()))?;
            Ok(RssShare::new(me, x0.clone(), x1.clone()))
        } else {
            let s = share.ok_or_else(|| Error::Config("evaluator needs its half".into()))?;
            if me == dealer.next() {
                Ok(RssShare::new(me, z, s.value.clone()))
            } else {
                Ok(RssShare::new(me, s.value.clone(), z))
            }
        }
    }
}
