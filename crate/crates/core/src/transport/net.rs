use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChannelStats, Frame, Link, PartyId, Phase, SessionId, HEADER_LEN};
use crate::error::{AbortReason, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Sent,
    Received,
}

/// Metadata of one frame, kept for transcript assertions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub direction: Direction,
    pub peer: PartyId,
    pub session: SessionId,
    pub phase: Phase,
    pub bytes: usize,
}

/// One party's view of the network: links to both peers plus accounting.
pub struct Net {
    id: PartyId,
    links: [Option<Box<dyn Link>>; 3],
    stash: [Vec<Frame>; 3],
    stats: ChannelStats,
    phase: Phase,
    transcript: Sha256,
    log: Vec<FrameMeta>,
    delay: Option<Duration>,
    crash_after: Option<u64>,
    frames_sent: u64,
    sending: bool,
}

impl Net {
    pub fn new(id: PartyId, links: [Option<Box<dyn Link>>; 3]) -> Self {
        Net {
            id,
            links,
            stash: Default::default(),
            stats: ChannelStats::default(),
            phase: Phase::Setup,
            transcript: Sha256::new(),
            log: Vec::new(),
            delay: None,
            crash_after: None,
            frames_sent: 0,
            sending: false,
        }
    }

    pub fn id(&self) -> PartyId {
        self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    /// Sleep this long before every send, to emulate link latency.
    pub fn set_delay(&mut self, delay: Option<Duration>) {
        self.delay = delay;
    }

    /// Fail every send after `n` frames, to emulate a crashed process.
    pub fn set_crash_after(&mut self, n: Option<u64>) {
        self.crash_after = n;
    }

    pub fn stats(&self) -> &ChannelStats {
        &self.stats
    }

    pub fn log(&self) -> &[FrameMeta] {
        &self.log
    }

    /// SHA-256 over every frame this party has sent, in order.
    pub fn transcript_digest(&self) -> [u8; 32] {
        self.transcript.clone().finalize().into()
    }

    fn link(&mut self, peer: PartyId) -> Result<&mut Box<dyn Link>> {
        if peer == self.id {
            return Err(Error::Transport("no link to self".into()));
        }
        self.links[peer.index()]
            .as_mut()
            .ok_or_else(|| Error::Transport(format!("no link to {peer}")))
    }

    pub fn send(&mut self, to: PartyId, session: SessionId, payload: Vec<u8>) -> Result<()> {
        if payload.is_empty() {
            return Err(Error::Transport("empty payload".into()));
        }
        if let Some(limit) = self.crash_after {
            if self.frames_sent >= limit {
                return Err(Error::Transport("crashed".into()));
            }
        }
        if let Some(d) = self.delay {
            std::thread::sleep(d);
        }
        let frame = Frame {
            session,
            sender: self.id,
            payload,
        };
        let bytes = frame.encode();
        let n = bytes.len();
        self.transcript.update([to.index() as u8]);
        self.transcript.update(&bytes);
        self.link(to)?
            .send(bytes)
            .map_err(|_| Error::Abort(AbortReason::PeerClosed))?;
        if !self.sending {
            self.stats.rounds += 1;
            self.sending = true;
        }
        self.frames_sent += 1;
        self.stats.record_send(self.phase, to, n);
        self.log.push(FrameMeta {
            direction: Direction::Sent,
            peer: to,
            session,
            phase: self.phase,
            bytes: n,
        });
        Ok(())
    }

    /// Receives the payload `from` sent for `session`.
    ///
    /// Frames for other protocol kinds are stashed until asked for; a frame of
    /// the same kind with a different counter is a session mismatch.
    pub fn recv(&mut self, from: PartyId, session: SessionId) -> Result<Vec<u8>> {
        self.sending = false;
        let stash = &mut self.stash[from.index()];
        if let Some(pos) = stash.iter().position(|f| f.session == session) {
            let f = stash.remove(pos);
            self.account_recv(from, &f);
            return Ok(f.payload);
        }
        loop {
            let bytes = self
                .link(from)?
                .recv()
                .map_err(|_| Error::Abort(AbortReason::PeerClosed))?;
            let f = Frame::decode(&bytes)?;
            if f.sender != from {
                return Err(Error::Transport(format!(
                    "frame from {} on link to {from}",
                    f.sender
                )));
            }
            if f.session == session {
                self.account_recv(from, &f);
                return Ok(f.payload);
            }
            if f.session.tag == session.tag {
                return Err(Error::SessionMismatch {
                    from,
                    expected: session,
                    got: f.session,
                });
            }
            self.stash[from.index()].push(f);
        }
    }

    fn account_recv(&mut self, from: PartyId, f: &Frame) {
        let n = HEADER_LEN + f.payload.len();
        self.stats.record_recv(self.phase, from, n);
        self.log.push(FrameMeta {
            direction: Direction::Received,
            peer: from,
            session: f.session,
            phase: self.phase,
            bytes: n,
        });
    }
}
