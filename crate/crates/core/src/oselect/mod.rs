//! Oblivious selection of one entry from a shared array by a shared index.
//!
//! Two variants share the online shape (open a masked index, rotate a unit
//! vector, sum, reshare) and differ in how the preprocessed unit vector is
//! produced: by a circuit of equality tests, or by DPF keys from a rotating
//! dealer.

mod array;
mod dpf_os;
mod rss_os;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use array::RssArray;
pub use dpf_os::{DpfOsToken, DpfRole};
pub use rss_os::RssOsToken;

use crate::error::{Error, Result};
use crate::harness::Site;
use crate::rss::{Party, RssShare};
use crate::transport::{PartyId, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OsKind {
    #[serde(rename = "rss")]
    Rss,
    #[serde(rename = "dpf")]
    Dpf,
}

impl fmt::Display for OsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OsKind::Rss => "rss",
            OsKind::Dpf => "dpf",
        })
    }
}

impl FromStr for OsKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rss" | "rss-os" => Ok(OsKind::Rss),
            "dpf" | "dpf-os" => Ok(OsKind::Dpf),
            _ => Err(Error::Config(format!("unknown selection kind {s:?}"))),
        }
    }
}

/// `log2(m)` for a power of two `m >= 2`.
pub fn index_bits(m: usize) -> Result<usize> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::Config(format!(
            "array length {m} is not a power of two of at least 2"
        )));
    }
    Ok(m.trailing_zeros() as usize)
}

/// Preprocessed tokens for one array length.
pub struct OsPools {
    pub kind: OsKind,
    pub m: usize,
    rss: VecDeque<RssOsToken>,
    dpf: [VecDeque<DpfOsToken>; 3],
}

impl OsPools {
    pub fn new(kind: OsKind, m: usize) -> Self {
        OsPools {
            kind,
            m,
            rss: VecDeque::new(),
            dpf: Default::default(),
        }
    }

    /// Selections that can run before the pool is empty.
    pub fn available(&self) -> usize {
        match self.kind {
            OsKind::Rss => self.rss.len(),
            OsKind::Dpf => self.dpf.iter().map(|q| q.len()).min().unwrap_or(0),
        }
    }
}

impl Party {
    /// Tops the pool up to at least `count` selections.
    pub fn os_refill(&mut self, pools: &mut OsPools, count: usize) -> Result<()> {
        let need = count.saturating_sub(pools.available());
        if need == 0 {
            return Ok(());
        }
        match pools.kind {
            OsKind::Rss => {
                let toks = self.rss_os_preprocess(pools.m, need)?;
                pools.rss.extend(toks);
            }
            OsKind::Dpf => {
                for rot in 0..3 {
                    let dealer = PartyId::from_index(rot + 2);
                    let have = pools.dpf[rot].len();
                    let toks = self.dpf_os_preprocess(pools.m, dealer, count.saturating_sub(have))?;
                    pools.dpf[rot].extend(toks);
                }
            }
        }
        Ok(())
    }

    /// Selects `arr[idx]` with tokens from `pools`, refilling if empty.
    pub fn os_select(&mut self, pools: &mut OsPools, arr: &RssArray, idx: &RssShare) -> Result<RssShare> {
        if pools.available() == 0 {
            self.os_refill(pools, 1)?;
        }
        match pools.kind {
            OsKind::Rss => {
                let tok = pools.rss.pop_front().expect("refilled");
                self.rss_os_select(arr, idx, &tok)
            }
            OsKind::Dpf => {
                let toks = [0, 1, 2].map(|r| pools.dpf[r].pop_front().expect("refilled"));
                self.dpf_os_select(arr, idx, &toks)
            }
        }
    }

    /// Turns this party's term of a (3,3) sharing into a replicated share.
    pub(crate) fn reshare_sum(&mut self, mut t: crate::gf2::BitVec, site: Site) -> Result<RssShare> {
        let w = t.len();
        let sid = self.session(Tag::OsReshare);
        t ^= &self.zero_share(w)?;
        self.tamper(site, &mut t);
        let (next, prev) = (self.id().next(), self.id().prev());
        self.send_bits(next, sid, &t)?;
        let tp = self.recv_bits(prev, sid, w)?;
        Ok(RssShare::new(self.id(), t, tp))
    }
}
