//! Framed point-to-point channels between the three parties.
//!
//! Every message is a [`Frame`] carrying a [`SessionId`] so that a receiver
//! can match replies to protocol invocations. Frames have the same byte
//! layout whether they travel over in-process queues or TCP.

mod frame;
mod mem;
mod net;
mod stats;
mod tcp;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use frame::{Frame, HEADER_LEN};
pub use mem::{mem_links, Link, MemLink};
pub use net::{Direction, FrameMeta, Net};
pub use stats::{ChannelStats, Counters};
pub use tcp::{tcp_links, tcp_links_with_listener, TcpLink};

use crate::error::{Error, Result};

/// One of the three computing parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartyId(u8);

impl PartyId {
    pub const P0: PartyId = PartyId(0);
    pub const P1: PartyId = PartyId(1);
    pub const P2: PartyId = PartyId(2);
    pub const ALL: [PartyId; 3] = [PartyId(0), PartyId(1), PartyId(2)];

    pub fn new(i: usize) -> Result<Self> {
        if i < 3 {
            Ok(PartyId(i as u8))
        } else {
            Err(Error::Config(format!("party id {i} is not in 0..3")))
        }
    }

    /// Index modulo 3, for rotation arithmetic.
    pub fn from_index(i: usize) -> Self {
        PartyId((i % 3) as u8)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn next(self) -> Self {
        PartyId((self.0 + 1) % 3)
    }

    #[inline]
    pub fn prev(self) -> Self {
        PartyId((self.0 + 2) % 3)
    }

    /// `self + k` modulo 3.
    #[inline]
    pub fn offset(self, k: usize) -> Self {
        PartyId::from_index(self.index() + k)
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

/// Protocol kinds, used to tag sessions and to separate PRF domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u16)]
pub enum Tag {
    KeySetup = 1,
    Rand = 2,
    Zero = 3,
    Open = 4,
    Recon = 5,
    ShareDelta = 6,
    ShareCheck = 7,
    Mul = 8,
    OsDelta = 9,
    DeltaRecon = 10,
    OsReshare = 11,
    DpfKeys = 12,
    DpfCommit = 13,
    DpfReveal = 14,
    DpfBeaver = 15,
    DpfUnit = 16,
    ResultRecon = 17,
    Handshake = 18,
    Params = 19,
}

impl Tag {
    pub const ALL: [Tag; 19] = [
        Tag::KeySetup,
        Tag::Rand,
        Tag::Zero,
        Tag::Open,
        Tag::Recon,
        Tag::ShareDelta,
        Tag::ShareCheck,
        Tag::Mul,
        Tag::OsDelta,
        Tag::DeltaRecon,
        Tag::OsReshare,
        Tag::DpfKeys,
        Tag::DpfCommit,
        Tag::DpfReveal,
        Tag::DpfBeaver,
        Tag::DpfUnit,
        Tag::ResultRecon,
        Tag::Handshake,
        Tag::Params,
    ];

    pub fn id(self) -> u16 {
        self as u16
    }

    pub fn from_id(id: u16) -> Option<Tag> {
        Tag::ALL.iter().copied().find(|t| t.id() == id)
    }
}

/// A protocol invocation: its kind and a per-kind counter that advances
/// identically at every party.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SessionId {
    pub tag: Tag,
    pub counter: u64,
}

impl SessionId {
    pub fn new(tag: Tag, counter: u64) -> Self {
        SessionId { tag, counter }
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}#{}", self.tag, self.counter)
    }
}

/// Accounting bucket for communication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "setup")]
    Setup,
    #[serde(rename = "preprocess")]
    Preprocess,
    #[serde(rename = "os-preprocess")]
    OsPreprocess,
    #[serde(rename = "online")]
    Online,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::Setup,
        Phase::Preprocess,
        Phase::OsPreprocess,
        Phase::Online,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Phase::Setup => "setup",
            Phase::Preprocess => "preprocess",
            Phase::OsPreprocess => "os-preprocess",
            Phase::Online => "online",
        }
    }

    /// Input-independent work done ahead of a query.
    pub fn is_offline(self) -> bool {
        matches!(self, Phase::Preprocess | Phase::OsPreprocess)
    }

    pub fn parse(s: &str) -> Option<Phase> {
        Phase::ALL.iter().copied().find(|p| p.label() == s)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
