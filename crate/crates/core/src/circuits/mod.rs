//! Boolean circuits on replicated shares with verified AND gates.
//!
//! AND gates are computed with the semi-honest multiplication and then
//! checked against a multiplication triple that was itself verified by
//! cut-and-choose and bucketing. Gates can be checked right away or queued
//! and checked in one batch before any output is released.

mod gates;
mod inner;
mod triples;

pub use inner::{FeatureBundle, FeatureSelector};

use crate::rss::RssShare;
use crate::transport::PartyId;

/// A packed batch of shared triples with `c = a & b` bitwise.
#[derive(Clone, Debug)]
pub struct Triple {
    pub a: RssShare,
    pub b: RssShare,
    pub c: RssShare,
}

impl Triple {
    pub fn width(&self) -> usize {
        self.a.width()
    }

    pub fn slice(&self, start: usize, len: usize) -> Triple {
        Triple {
            a: self.a.slice(start, len),
            b: self.b.slice(start, len),
            c: self.c.slice(start, len),
        }
    }
}

/// Verified triples waiting to be consumed.
pub struct TriplePool {
    store: Triple,
    cursor: usize,
}

impl TriplePool {
    pub(crate) fn new(holder: PartyId) -> Self {
        TriplePool {
            store: Triple {
                a: RssShare::zeros(holder, 0),
                b: RssShare::zeros(holder, 0),
                c: RssShare::zeros(holder, 0),
            },
            cursor: 0,
        }
    }

    pub fn available(&self) -> usize {
        self.store.width() - self.cursor
    }

    pub(crate) fn push(&mut self, t: &Triple) {
        if self.cursor > 0 {
            let rest = self.store.slice(self.cursor, self.available());
            self.store = rest;
            self.cursor = 0;
        }
        self.store.a.append(&t.a);
        self.store.b.append(&t.b);
        self.store.c.append(&t.c);
    }

    pub(crate) fn take(&mut self, n: usize) -> Option<Triple> {
        if n > self.available() {
            return None;
        }
        let t = self.store.slice(self.cursor, n);
        self.cursor += n;
        Some(t)
    }
}

/// AND gates whose sacrifice check has not run yet.
pub(crate) struct PendingAnds {
    x: RssShare,
    y: RssShare,
    z: RssShare,
    t: Triple,
}

impl PendingAnds {
    pub(crate) fn new(holder: PartyId) -> Self {
        let z = || RssShare::zeros(holder, 0);
        PendingAnds {
            x: z(),
            y: z(),
            z: z(),
            t: Triple {
                a: z(),
                b: z(),
                c: z(),
            },
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.x.width()
    }

    fn push(&mut self, x: &RssShare, y: &RssShare, z: &RssShare, t: &Triple) {
        self.x.append(x);
        self.y.append(y);
        self.z.append(z);
        self.t.a.append(&t.a);
        self.t.b.append(&t.b);
        self.t.c.append(&t.c);
    }

    fn take(&mut self) -> PendingAnds {
        let holder = self.x.holder;
        std::mem::replace(self, PendingAnds::new(holder))
    }
}
