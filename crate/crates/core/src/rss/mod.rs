//! (3,2) replicated secret sharing over bit strings and binary fields.
//!
//! A value `x = x0 ^ x1 ^ x2` is held so that party `Pi` knows `(xi, x(i-1))`.
//! Each share of `x` is therefore known to exactly two parties, and any two
//! parties together can reconstruct. Operations live on [`Party`], which runs
//! one party's side of every protocol.

mod party;
mod protocols;

use rand::Rng;

pub use party::{EngineConfig, Party, PrfKeyRing, VerifyMode};

use crate::error::{AbortReason, Error, Result};
use crate::gf2::{BitVec, FieldCtx};
use crate::transport::PartyId;

/// One party's view of a replicated sharing: its own share and its
/// predecessor's.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RssShare {
    pub holder: PartyId,
    pub own: BitVec,
    pub prev: BitVec,
}

impl RssShare {
    pub fn new(holder: PartyId, own: BitVec, prev: BitVec) -> Self {
        assert_eq!(own.len(), prev.len(), "share halves differ in width");
        RssShare { holder, own, prev }
    }

    pub fn zeros(holder: PartyId, width: usize) -> Self {
        RssShare::new(holder, BitVec::zeros(width), BitVec::zeros(width))
    }

    /// The trivial sharing `(0, 0, v)` of a public value.
    pub fn public(holder: PartyId, v: &BitVec) -> Self {
        let z = BitVec::zeros(v.len());
        match holder.index() {
            0 => RssShare::new(holder, z, v.clone()),
            1 => RssShare::new(holder, z.clone(), z),
            _ => RssShare::new(holder, v.clone(), z),
        }
    }

    pub fn width(&self) -> usize {
        self.own.len()
    }

    pub fn xor(&self, other: &RssShare) -> RssShare {
        debug_assert_eq!(self.holder, other.holder);
        RssShare::new(self.holder, &self.own ^ &other.own, &self.prev ^ &other.prev)
    }

    pub fn xor_assign(&mut self, other: &RssShare) {
        self.own ^= &other.own;
        self.prev ^= &other.prev;
    }

    /// Adds a public constant into share `x0`.
    pub fn xor_public(&self, c: &BitVec) -> RssShare {
        let mut out = self.clone();
        match self.holder.index() {
            0 => out.own ^= c,
            1 => out.prev ^= c,
            _ => {}
        }
        out
    }

    /// Bitwise AND with a public mask.
    pub fn and_public(&self, mask: &BitVec) -> RssShare {
        RssShare::new(self.holder, &self.own & mask, &self.prev & mask)
    }

    pub fn not(&self) -> RssShare {
        self.xor_public(&BitVec::ones(self.width()))
    }

    pub fn slice(&self, start: usize, len: usize) -> RssShare {
        RssShare::new(
            self.holder,
            self.own.slice(start, len),
            self.prev.slice(start, len),
        )
    }

    pub fn bit(&self, i: usize) -> RssShare {
        self.slice(i, 1)
    }

    pub fn append(&mut self, other: &RssShare) {
        self.own.append(&other.own);
        self.prev.append(&other.prev);
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a RssShare>>(holder: PartyId, parts: I) -> Self {
        let mut out = RssShare::zeros(holder, 0);
        for p in parts {
            out.append(p);
        }
        out
    }

    pub fn write_at(&mut self, start: usize, other: &RssShare) {
        self.own.write_at(start, &other.own);
        self.prev.write_at(start, &other.prev);
    }

    pub fn repeat_bits(&self, k: usize) -> RssShare {
        RssShare::new(self.holder, self.own.repeat_bits(k), self.prev.repeat_bits(k))
    }

    pub fn fold_xor(&self, k: usize) -> RssShare {
        RssShare::new(self.holder, self.own.fold_xor(k), self.prev.fold_xor(k))
    }

    pub fn tile(&self, times: usize) -> RssShare {
        RssShare::new(self.holder, self.own.tile(times), self.prev.tile(times))
    }

    /// Multiplies every `ell`-bit chunk by a public field element.
    pub fn scale(&self, ctx: &FieldCtx, c: &BitVec) -> RssShare {
        RssShare::new(
            self.holder,
            ctx.scale_many(&self.own, c),
            ctx.scale_many(&self.prev, c),
        )
    }

    /// Applies an additive error consistently, as if it were a public constant.
    pub fn with_error(&self, e: &BitVec) -> RssShare {
        self.xor_public(e)
    }
}

/// A (2,2) additive sharing between `holder` and `peer`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoShare {
    pub holder: PartyId,
    pub peer: PartyId,
    pub value: BitVec,
}

/// Splits `v` into the three parties' views of a fresh random sharing.
pub fn share_value<R: Rng + ?Sized>(v: &BitVec, rng: &mut R) -> [RssShare; 3] {
    let x0 = BitVec::random(rng, v.len());
    let x1 = BitVec::random(rng, v.len());
    let x2 = &(v ^ &x0) ^ &x1;
    let xs = [x0, x1, x2];
    PartyId::ALL.map(|p| {
        RssShare::new(
            p,
            xs[p.index()].clone(),
            xs[p.prev().index()].clone(),
        )
    })
}

/// Reconstructs from all three views, checking that they are consistent.
pub fn reveal(shares: &[RssShare; 3]) -> Result<BitVec> {
    for p in PartyId::ALL {
        if shares[p.index()].holder != p {
            return Err(Error::Config(format!("view {} is not held by {p}", p.index())));
        }
        if shares[p.next().index()].prev != shares[p.index()].own {
            return Err(Error::Abort(AbortReason::OpenMismatch));
        }
    }
    Ok(&(&shares[0].own ^ &shares[1].own) ^ &shares[2].own)
}
