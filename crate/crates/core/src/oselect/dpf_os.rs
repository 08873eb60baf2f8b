use rand::Rng;
use sha2::{Digest, Sha256};

use super::{index_bits, RssArray};
use crate::dpf::{
    beaver_triple, gen, sketch, sketch_coefficients, unit_terms, BeaverShare, DpfKey, PointFunction,
};
use crate::error::{AbortReason, Error, Result};
use crate::gf2::{BitVec, Gf128};
use crate::harness::Site;
use crate::rss::{Party, RssShare, TwoShare};
use crate::transport::{PartyId, Phase, Tag};

/// What one party holds for one selection in one dealer rotation.
#[derive(Clone, Debug)]
pub enum DpfRole {
    /// The dealer knows the random index in both halves.
    Dealer { rdx0: BitVec, rdx1: BitVec },
    /// Evaluator `b` holds its half of the index and of the unit vector.
    Evaluator { b: u8, rdx: BitVec, v: BitVec },
}

#[derive(Clone, Debug)]
pub struct DpfOsToken {
    pub id: u64,
    pub dealer: PartyId,
    pub role: DpfRole,
}

/// Evaluator `b` of dealer `d`: `P(d+1)` is 0, `P(d+2)` is 1.
fn evaluators(dealer: PartyId) -> [PartyId; 2] {
    [dealer.next(), dealer.prev()]
}

fn abort(r: AbortReason) -> Error {
    Error::Abort(r)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(abort(AbortReason::MalformedKey));
        }
        let (a, b) = self.buf.split_at(n);
        self.buf = b;
        Ok(a)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
}

fn u128s(v: &[u128]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn read_u128s(b: &[u8], n: usize) -> Result<Vec<u128>> {
    if b.len() != 16 * n {
        return Err(abort(AbortReason::BadLength));
    }
    Ok(b.chunks_exact(16)
        .map(|c| u128::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Evaluator-side material parsed from the dealer's message.
struct Dealt {
    rdx: u64,
    y: Vec<u128>,
    triple: BeaverShare,
}

impl Party {
    /// `count` tokens with `dealer` generating the unit vectors. Every party
    /// runs this with the same arguments.
    pub fn dpf_os_preprocess(
        &mut self,
        m: usize,
        dealer: PartyId,
        count: usize,
    ) -> Result<Vec<DpfOsToken>> {
        let lm = index_bits(m)?;
        if count == 0 {
            return Ok(Vec::new());
        }
        let saved = self.phase();
        self.set_phase(Phase::OsPreprocess);
        let out = self.dpf_os_batch(m, lm, dealer, count);
        self.set_phase(saved);
        out
    }

    fn dpf_os_batch(
        &mut self,
        m: usize,
        lm: usize,
        dealer: PartyId,
        count: usize,
    ) -> Result<Vec<DpfOsToken>> {
        let direct = m <= self.cfg.dpf_direct_threshold;
        let keys_sid = self.session(Tag::DpfKeys);
        let commit_sid = self.session(Tag::DpfCommit);
        let reveal_sid = self.session(Tag::DpfReveal);
        let beaver_sid = self.session(Tag::DpfBeaver);
        let proof_commit_sid = self.session(Tag::DpfCommit);
        let proof_reveal_sid = self.session(Tag::DpfReveal);
        let unit_sid = self.session(Tag::DpfUnit);
        let me = self.id();
        let ev = evaluators(dealer);
        let gf = Gf128::new();

        if me == dealer {
            let mut msgs = [Vec::new(), Vec::new()];
            let mut toks = Vec::with_capacity(count);
            for _ in 0..count {
                let rdx = self.rng().gen::<u64>() & (m as u64 - 1);
                let rdx0 = self.rng().gen::<u64>() & (m as u64 - 1);
                let rdx1 = rdx ^ rdx0;
                let mut sent1 = BitVec::from_u64(rdx1, lm);
                self.tamper(Site::RdxShare, &mut sent1);
                let f = PointFunction {
                    alpha: rdx,
                    beta: 1,
                    domain_bits: lm as u32,
                };
                let fault = self.key_fault();
                let (t0, t1) = beaver_triple(&gf, self.rng());
                if direct {
                    let v0 = BitVec::random(self.rng(), m);
                    let mut v1 = v0.clone();
                    v1.flip(rdx as usize);
                    if fault.is_some() {
                        v1.flip((rdx ^ 1) as usize);
                    }
                    msgs[0].extend(v0.to_bytes());
                    msgs[1].extend(v1.to_bytes());
                } else {
                    let (b0, b1) = match fault {
                        Some(kind) => kind.keys(&f, self.rng()),
                        None => {
                            let (k0, k1) = gen(&f, self.rng())?;
                            (k0.to_bytes(), k1.to_bytes())
                        }
                    };
                    for (msg, b) in msgs.iter_mut().zip([b0, b1]) {
                        msg.extend((b.len() as u32).to_le_bytes());
                        msg.extend(b);
                    }
                }
                for (msg, (r, t)) in msgs.iter_mut().zip([(rdx0, t0), (sent1.to_u64(), t1)]) {
                    msg.extend(r.to_le_bytes());
                    msg.extend(u128s(&[t.a, t.b, t.c]));
                }
                toks.push(DpfOsToken {
                    id: self.fresh_token_id(),
                    dealer,
                    role: DpfRole::Dealer {
                        rdx0: BitVec::from_u64(rdx0, lm),
                        rdx1: BitVec::from_u64(rdx1, lm),
                    },
                });
            }
            let [m0, m1] = msgs;
            self.send_bytes(ev[0], keys_sid, m0)?;
            self.send_bytes(ev[1], keys_sid, m1)?;
            return Ok(toks);
        }

        let b: u8 = if me == ev[0] { 0 } else { 1 };
        let other = ev[1 - b as usize];
        let msg = self.recv_bytes(dealer, keys_sid)?;
        let mut rd = Reader { buf: &msg };
        let mut dealt = Vec::with_capacity(count);
        for _ in 0..count {
            let y = if direct {
                let v = BitVec::from_bytes(rd.take(m.div_ceil(8))?, m);
                v.iter().map(u128::from).collect()
            } else {
                let len = rd.u32()? as usize;
                let key = DpfKey::from_bytes(rd.take(len)?)
                    .map_err(|_| abort(AbortReason::MalformedKey))?;
                if key.domain_bits as usize != lm || key.party != b {
                    return Err(abort(AbortReason::MalformedKey));
                }
                key.eval_full()
            };
            let rdx = rd.u64()?;
            if rdx >= m as u64 {
                return Err(abort(AbortReason::MalformedKey));
            }
            let triple = BeaverShare {
                a: rd.u128()?,
                b: rd.u128()?,
                c: rd.u128()?,
            };
            dealt.push(Dealt { rdx, y, triple });
        }
        if !rd.buf.is_empty() {
            return Err(abort(AbortReason::MalformedKey));
        }

        // Coefficient seed, fixed only after the keys are in hand.
        let mine: [u8; 16] = self.rng().gen();
        let theirs = self.commit_exchange(other, commit_sid, reveal_sid, &mine)?;
        let seed: [u8; 16] = std::array::from_fn(|i| mine[i] ^ theirs[i]);

        let sketches: Vec<_> = dealt
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let (r, s) = sketch_coefficients(&seed, i as u64, m);
                sketch(&gf, &d.y, &r, &s)
            })
            .collect();
        let masked: Vec<u128> = sketches
            .iter()
            .zip(&dealt)
            .flat_map(|(z, d)| {
                let (e, f) = z.masked(&d.triple);
                [e, f]
            })
            .collect();
        self.send_bytes(other, beaver_sid, u128s(&masked))?;
        let peer_masked = read_u128s(&self.recv_bytes(other, beaver_sid)?, 2 * count)?;
        let mut h = Sha256::new();
        for (i, (z, d)) in sketches.iter().zip(&dealt).enumerate() {
            let e = masked[2 * i] ^ peer_masked[2 * i];
            let f = masked[2 * i + 1] ^ peer_masked[2 * i + 1];
            h.update(z.proof(&gf, b, &d.triple, e, f).0);
        }
        let proof: [u8; 32] = h.finalize().into();
        let peer_proof = self.commit_exchange(other, proof_commit_sid, proof_reveal_sid, &proof)?;
        if peer_proof != proof {
            return Err(abort(AbortReason::VdpfReject));
        }

        let terms: Vec<u128> = dealt
            .iter()
            .flat_map(|d| {
                let (t, s) = unit_terms(&gf, &d.y, d.rdx);
                [t, s]
            })
            .collect();
        self.send_bytes(other, unit_sid, u128s(&terms))?;
        let peer_terms = read_u128s(&self.recv_bytes(other, unit_sid)?, 2 * count)?;
        for i in 0..count {
            if terms[2 * i] ^ peer_terms[2 * i] != 1 || terms[2 * i + 1] ^ peer_terms[2 * i + 1] != 0 {
                return Err(abort(AbortReason::UnitCheckReject));
            }
        }

        Ok(dealt
            .into_iter()
            .map(|d| DpfOsToken {
                id: self.fresh_token_id(),
                dealer,
                role: DpfRole::Evaluator {
                    b,
                    rdx: BitVec::from_u64(d.rdx, lm),
                    v: BitVec::from_bools(&d.y.iter().map(|y| y & 1 == 1).collect::<Vec<_>>()),
                },
            })
            .collect())
    }

    /// Commits to `value`, then opens it, towards one peer.
    fn commit_exchange<const N: usize>(
        &mut self,
        other: PartyId,
        commit_sid: crate::transport::SessionId,
        reveal_sid: crate::transport::SessionId,
        value: &[u8; N],
    ) -> Result<[u8; N]> {
        let nonce: [u8; 16] = self.rng().gen();
        let digest = |v: &[u8], n: &[u8]| -> Vec<u8> {
            let mut h = Sha256::new();
            h.update(v);
            h.update(n);
            h.finalize().to_vec()
        };
        self.send_bytes(other, commit_sid, digest(value, &nonce))?;
        let commitment = self.recv_bytes(other, commit_sid)?;
        let mut opening = value.to_vec();
        opening.extend(nonce);
        self.send_bytes(other, reveal_sid, opening)?;
        let opened = self.recv_bytes(other, reveal_sid)?;
        if opened.len() != N + 16 {
            return Err(abort(AbortReason::CommitmentMismatch));
        }
        let (v, n) = opened.split_at(N);
        if digest(v, n) != commitment {
            return Err(abort(AbortReason::CommitmentMismatch));
        }
        Ok(v.try_into().unwrap())
    }

    /// `arr[idx]` using one token from each dealer rotation.
    ///
    /// Rotation `r` selects the share component `x_r`, which `P(r)` and
    /// `P(r+1)` both hold; its dealer `P(r+2)` never learns the masked index.
    pub fn dpf_os_select(
        &mut self,
        arr: &RssArray,
        idx: &RssShare,
        toks: &[DpfOsToken; 3],
    ) -> Result<RssShare> {
        let m = arr.len();
        let lm = index_bits(m)?;
        if idx.width() != lm {
            return Err(Error::Config("index and array sizes disagree".into()));
        }
        let me = self.id();
        let mut acc = vec![0u64; arr.width().div_ceil(64)];
        for (rot, tok) in toks.iter().enumerate() {
            let dealer = PartyId::from_index(rot + 2);
            if tok.dealer != dealer {
                return Err(Error::Config(format!(
                    "token from dealer {} used in rotation {rot}",
                    tok.dealer
                )));
            }
            self.consume_token(tok.id)?;
            let rdx = match &tok.role {
                DpfRole::Dealer { rdx0, rdx1 } => self.t2r(dealer, None, Some((rdx0, rdx1)), lm)?,
                DpfRole::Evaluator { rdx, v, .. } => {
                    if rdx.len() != lm || v.len() != m {
                        return Err(Error::Config("token built for another array length".into()));
                    }
                    let half = TwoShare {
                        holder: me,
                        peer: if me == dealer.next() { dealer.prev() } else { dealer.next() },
                        value: rdx.clone(),
                    };
                    self.t2r(dealer, Some(&half), None, lm)?
                }
            };
            let masked = rdx.xor(idx);
            let [e0, e1] = evaluators(dealer);
            let d0 = self.recon_tagged(&masked, e0, Tag::DeltaRecon)?;
            let d1 = self.recon_tagged(&masked, e1, Tag::DeltaRecon)?;
            if let DpfRole::Evaluator { b, v, .. } = &tok.role {
                let delta = d0.or(d1).expect("evaluators learn the masked index").to_u64() as usize;
                // x_rot is P(rot)'s own share and P(rot+1)'s prev share.
                let part = arr.xor_where(*b == 0, |j| v.get(j ^ delta));
                for (a, p) in acc.iter_mut().zip(part) {
                    *a ^= p;
                }
            }
        }
        let t = arr.words_to_bits(acc);
        self.reshare_sum(t, Site::OsReshare)
    }
}
