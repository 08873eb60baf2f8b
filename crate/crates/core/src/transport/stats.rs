use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PartyId, Phase};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub bytes: u64,
    pub frames: u64,
}

/// Traffic seen by one party, by phase and peer. Byte counts include the
/// frame header.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub sent: BTreeMap<Phase, [Counters; 3]>,
    pub received: BTreeMap<Phase, [Counters; 3]>,
    /// Number of times this party started sending after having received.
    pub rounds: u64,
}

impl ChannelStats {
    pub(crate) fn record_send(&mut self, phase: Phase, to: PartyId, bytes: usize) {
        let c = &mut self.sent.entry(phase).or_default()[to.index()];
        c.bytes += bytes as u64;
        c.frames += 1;
    }

    pub(crate) fn record_recv(&mut self, phase: Phase, from: PartyId, bytes: usize) {
        let c = &mut self.received.entry(phase).or_default()[from.index()];
        c.bytes += bytes as u64;
        c.frames += 1;
    }

    pub fn sent_bytes(&self, phase: Phase) -> u64 {
        self.sent
            .get(&phase)
            .map_or(0, |cs| cs.iter().map(|c| c.bytes).sum())
    }

    pub fn sent_frames(&self, phase: Phase) -> u64 {
        self.sent
            .get(&phase)
            .map_or(0, |cs| cs.iter().map(|c| c.frames).sum())
    }

    pub fn sent_to(&self, phase: Phase, to: PartyId) -> u64 {
        self.sent.get(&phase).map_or(0, |cs| cs[to.index()].bytes)
    }

    pub fn received_bytes(&self, phase: Phase) -> u64 {
        self.received
            .get(&phase)
            .map_or(0, |cs| cs.iter().map(|c| c.bytes).sum())
    }

    pub fn online_bytes(&self) -> u64 {
        self.sent_bytes(Phase::Online)
    }

    pub fn offline_bytes(&self) -> u64 {
        self.sent_bytes(Phase::Preprocess) + self.sent_bytes(Phase::OsPreprocess)
    }

    pub fn total_sent(&self) -> u64 {
        Phase::ALL.iter().map(|&p| self.sent_bytes(p)).sum()
    }

    /// Bytes sent per phase label.
    pub fn bytes_by_phase(&self) -> BTreeMap<&'static str, u64> {
        Phase::ALL
            .iter()
            .map(|&p| (p.label(), self.sent_bytes(p)))
            .collect()
    }

    /// Adds another party's counters into this one.
    pub fn merge(&mut self, other: &ChannelStats) {
        for (map, src) in [(&mut self.sent, &other.sent), (&mut self.received, &other.received)] {
            for (phase, cs) in src {
                let dst = map.entry(*phase).or_default();
                for (d, s) in dst.iter_mut().zip(cs) {
                    d.bytes += s.bytes;
                    d.frames += s.frames;
                }
            }
        }
        self.rounds = self.rounds.max(other.rounds);
    }
}
