use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::circuits::{PendingAnds, TriplePool};
use crate::dpf::MalformedKind;
use crate::error::{AbortReason, Error, Result};
use crate::gf2::BitVec;
use crate::harness::{Adversary, Site};
use crate::prf::Prf;
use crate::transport::{ChannelStats, Net, PartyId, Phase, SessionId, Tag};

/// PRF keys after setup: party `Pi` holds `k_i` (shared with `P(i-1)`) and
/// `k_(i+1)` (shared with `P(i+1)`).
#[derive(Clone)]
pub struct PrfKeyRing {
    pub own: Prf,
    pub next: Prf,
}

/// When the sacrifice check of a verified AND runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Check each batch of gates as soon as it is computed.
    Immediate,
    /// Queue gates and check them together at the next flush.
    Deferred,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Bucket size for triple generation.
    pub bucket: usize,
    pub verify: VerifyMode,
    /// Domains at most this large get their unit vectors from the dealer
    /// directly instead of through DPF keys.
    pub dpf_direct_threshold: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            bucket: 3,
            verify: VerifyMode::Immediate,
            dpf_direct_threshold: 64,
        }
    }
}

/// One party's protocol engine.
///
/// All three parties call the same sequence of methods; session counters and
/// PRF inputs therefore line up without extra coordination.
pub struct Party {
    id: PartyId,
    net: Net,
    keys: Option<PrfKeyRing>,
    counters: HashMap<Tag, u64>,
    rng: ChaCha20Rng,
    adversary: Option<Adversary>,
    pub(crate) triples: TriplePool,
    pub(crate) pending: PendingAnds,
    pub(crate) cfg: EngineConfig,
    used_tokens: HashSet<u64>,
    next_token: u64,
}

impl Party {
    /// A party whose private randomness is derived from `(seed, id)`.
    pub fn new(id: PartyId, net: Net, seed: u64) -> Self {
        assert_eq!(net.id(), id, "network endpoint belongs to another party");
        let mut h = Sha256::new();
        h.update(b"party-rng");
        h.update(seed.to_le_bytes());
        h.update([id.index() as u8]);
        let s: [u8; 32] = h.finalize().into();
        Party {
            id,
            net,
            keys: None,
            counters: HashMap::new(),
            rng: ChaCha20Rng::from_seed(s),
            adversary: None,
            triples: TriplePool::new(id),
            pending: PendingAnds::new(id),
            cfg: EngineConfig::default(),
            used_tokens: HashSet::new(),
            next_token: 0,
        }
    }

    pub fn id(&self) -> PartyId {
        self.id
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn config_mut(&mut self) -> &mut EngineConfig {
        &mut self.cfg
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Net {
        &mut self.net
    }

    pub fn stats(&self) -> &ChannelStats {
        self.net.stats()
    }

    pub fn phase(&self) -> Phase {
        self.net.phase()
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.net.set_phase(phase);
    }

    /// Private randomness of this party.
    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }

    pub fn set_adversary(&mut self, adv: Option<Adversary>) {
        self.adversary = adv;
    }

    pub fn adversary(&self) -> Option<&Adversary> {
        self.adversary.as_ref()
    }

    /// Allocates the next session of kind `tag`.
    pub fn session(&mut self, tag: Tag) -> SessionId {
        let c = self.counters.entry(tag).or_insert(0);
        let sid = SessionId::new(tag, *c);
        *c += 1;
        sid
    }

    pub(crate) fn fresh_token_id(&mut self) -> u64 {
        self.next_token += 1;
        self.next_token
    }

    /// Records a preprocessed token as consumed.
    pub(crate) fn consume_token(&mut self, id: u64) -> Result<()> {
        if self.used_tokens.insert(id) {
            Ok(())
        } else {
            Err(Error::TokenReused(id))
        }
    }

    pub fn keys(&self) -> Result<&PrfKeyRing> {
        self.keys
            .as_ref()
            .ok_or_else(|| Error::Config("PRF keys not set up".into()))
    }

    /// Samples `k_i`, hands it to the predecessor and learns `k_(i+1)`.
    pub fn setup_keys(&mut self) -> Result<()> {
        let sid = self.session(Tag::KeySetup);
        let mine: [u8; 16] = self.rng.gen();
        self.net.send(self.id.prev(), sid, mine.to_vec())?;
        let theirs = self.net.recv(self.id.next(), sid)?;
        let theirs: [u8; 16] = theirs
            .try_into()
            .map_err(|_| Error::Abort(AbortReason::BadLength))?;
        self.keys = Some(PrfKeyRing {
            own: Prf::new(mine),
            next: Prf::new(theirs),
        });
        Ok(())
    }

    pub fn send_bits(&mut self, to: PartyId, sid: SessionId, v: &BitVec) -> Result<()> {
        self.net.send(to, sid, v.to_bytes())
    }

    pub fn recv_bits(&mut self, from: PartyId, sid: SessionId, len: usize) -> Result<BitVec> {
        let bytes = self.net.recv(from, sid)?;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Abort(AbortReason::BadLength));
        }
        Ok(BitVec::from_bytes(&bytes, len))
    }

    pub fn send_bytes(&mut self, to: PartyId, sid: SessionId, v: Vec<u8>) -> Result<()> {
        self.net.send(to, sid, v)
    }

    pub fn recv_bytes(&mut self, from: PartyId, sid: SessionId) -> Result<Vec<u8>> {
        self.net.recv(from, sid)
    }

    /// Applies the configured fault, if this is the targeted site occurrence.
    /// Returns whether it fired.
    pub(crate) fn tamper(&mut self, site: Site, payload: &mut BitVec) -> bool {
        let phase = self.phase();
        let Some(adv) = self.adversary.as_mut() else {
            return false;
        };
        match adv.hit(self.id, site, phase) {
            Some(e) => {
                let n = payload.len().min(64);
                if n > 0 {
                    let cur = payload.get_bits(0, n);
                    let mask = if n == 64 { u64::MAX } else { (1 << n) - 1 };
                    payload.set_bits(0, n, cur ^ (e & mask));
                }
                true
            }
            None => false,
        }
    }

    /// The malformation a corrupt dealer should apply to its next key pair.
    pub(crate) fn key_fault(&mut self) -> Option<MalformedKind> {
        let phase = self.phase();
        let adv = self.adversary.as_mut()?;
        adv.key_fault(self.id, phase)
    }
}
