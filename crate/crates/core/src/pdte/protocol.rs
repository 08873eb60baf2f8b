use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::tree::TreeArray;
use crate::circuits::FeatureBundle;
use crate::error::{Error, Result};
use crate::gf2::{BitVec, FieldCtx};
use crate::mac::MacKey;
use crate::oselect::{index_bits, OsKind, OsPools, RssArray};
use crate::rss::{Party, RssShare, VerifyMode};
use crate::transport::{PartyId, Phase, Tag};

/// Holds the tree.
pub const MODEL_OWNER: PartyId = PartyId::P0;
/// Holds the queries and learns the labels.
pub const FEATURE_OWNER: PartyId = PartyId::P1;

/// The public shape of a deployed tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeParams {
    pub k: usize,
    pub n: usize,
    /// Padded array length, a power of two.
    pub m: usize,
    pub d_pad: usize,
}

impl TreeParams {
    pub fn of(arr: &TreeArray) -> Self {
        TreeParams {
            k: arr.k,
            n: arr.n,
            m: arr.m(),
            d_pad: arr.d_pad,
        }
    }

    pub fn ell(&self) -> usize {
        4 * self.k + self.n
    }

    pub fn index_bits(&self) -> Result<usize> {
        index_bits(self.m)
    }

    fn check(&self) -> Result<()> {
        let lm = self.index_bits()?;
        if self.k == 0 || self.k > 64 || self.n == 0 || lm > self.k {
            return Err(Error::Config(format!(
                "unsupported shape k = {}, n = {}, m = {}",
                self.k, self.n, self.m
            )));
        }
        Ok(())
    }

    /// AND gates of one query's online phase.
    pub fn online_ands(&self) -> usize {
        let lm = self.index_bits().unwrap_or(0);
        self.d_pad * (2 * self.k - 1 + lm)
    }
}

/// One party's view of the shared tree and its MACs.
#[derive(Clone, Debug)]
pub struct SetupState {
    pub params: TreeParams,
    pub key: MacKey,
    /// Entry `j` is `T[j] || M[j]`.
    pub table: RssArray,
}

impl SetupState {
    pub fn holder(&self) -> PartyId {
        self.table.holder()
    }
}

/// Preprocessed material for queries against one tree.
pub struct PdteSession {
    pools: OsPools,
    bundles: VecDeque<FeatureBundle>,
    feature_owner: PartyId,
}

impl PdteSession {
    pub fn new(params: &TreeParams, kind: OsKind) -> Self {
        PdteSession {
            pools: OsPools::new(kind, params.m),
            bundles: VecDeque::new(),
            feature_owner: FEATURE_OWNER,
        }
    }

    /// Lets another party submit the queries of this session.
    pub fn with_feature_owner(mut self, p: PartyId) -> Self {
        self.feature_owner = p;
        self
    }

    pub fn feature_owner(&self) -> PartyId {
        self.feature_owner
    }

    pub fn kind(&self) -> OsKind {
        self.pools.kind
    }

    /// Queries that can run without further preprocessing.
    pub fn ready(&self, d_pad: usize) -> usize {
        let by_tokens = if d_pad == 0 {
            usize::MAX
        } else {
            self.pools.available() / d_pad
        };
        self.bundles.len().min(by_tokens)
    }
}

impl Party {
    /// Shares the model owner's padded tree and authenticates every node.
    pub fn pdte_setup(&mut self, params: &TreeParams, tree: Option<&TreeArray>) -> Result<SetupState> {
        params.check()?;
        let ell = params.ell();
        let packed = match (self.id() == MODEL_OWNER, tree) {
            (true, Some(t)) => {
                if TreeParams::of(t) != *params {
                    return Err(Error::Config("tree does not match the announced shape".into()));
                }
                t.validate()?;
                Some(t.packed())
            }
            (true, None) => return Err(Error::Config("model owner needs the tree".into())),
            (false, _) => None,
        };
        let saved = self.phase();
        self.set_phase(Phase::Setup);
        let out = (|| {
            let t = self.share_input(packed.as_ref(), MODEL_OWNER, params.m * ell)?;
            let key = self.mac_keygen(ell)?;
            let macs = self.mac_attach(&t, &key)?;
            self.mac_check(&t, &macs, &key)?;
            let table = RssArray::from_packed(&t, ell).zip(&RssArray::from_packed(&macs, ell));
            Ok(SetupState {
                params: *params,
                key,
                table,
            })
        })();
        self.set_phase(saved);
        out
    }

    /// Prepares material for `queries` more evaluations.
    pub fn pdte_preprocess(&mut self, state: &SetupState, session: &mut PdteSession, queries: usize) -> Result<()> {
        let p = state.params;
        let saved = self.phase();
        self.set_phase(Phase::Preprocess);
        let out = (|| {
            for _ in 0..queries {
                if p.d_pad > 0 {
                    let b = self.feature_bundle(p.n, p.k, p.d_pad)?;
                    session.bundles.push_back(b);
                } else {
                    session.bundles.push_back(FeatureBundle {
                        n: p.n,
                        k: p.k,
                        a: RssShare::zeros(self.id(), 0),
                        levels: VecDeque::new(),
                    });
                }
            }
            self.verify_pending()?;
            // Tokens first: their own preprocessing draws on the triple pool.
            let target = session.pools.available() + queries * p.d_pad;
            self.os_refill(&mut session.pools, target)?;
            let need = queries * p.online_ands();
            let short = need.saturating_sub(self.triples_available());
            if short > 0 {
                self.generate_triples(short)?;
            }
            Ok(())
        })();
        self.set_phase(saved);
        out
    }

    /// Evaluates one query. The feature owner passes its features and gets
    /// the label; the others pass `None` and get `None`.
    ///
    /// The label is only reconstructed after every AND gate and every
    /// selected node has been checked.
    pub fn pdte_eval(
        &mut self,
        state: &SetupState,
        session: &mut PdteSession,
        features: Option<&[u64]>,
    ) -> Result<Option<u64>> {
        let p = state.params;
        let (k, n, ell) = (p.k, p.n, p.ell());
        let lm = p.index_bits()?;
        if session.ready(p.d_pad) == 0 {
            self.pdte_preprocess(state, session, 1)?;
        }
        let fo = session.feature_owner;
        let input = match (self.id() == fo, features) {
            (true, Some(x)) => {
                if x.len() != n {
                    return Err(Error::Config(format!("{} features, expected {n}", x.len())));
                }
                let mut bits = BitVec::zeros(n * k);
                for (j, &v) in x.iter().enumerate() {
                    bits.set_bits(j * k, k, v);
                }
                Some(bits)
            }
            (true, None) => return Err(Error::Config("feature owner needs a query".into())),
            (false, _) => None,
        };
        let saved = self.phase();
        let saved_mode = self.cfg.verify;
        self.set_phase(Phase::Online);
        // Gate checks are batched and all run before the MAC check.
        self.cfg.verify = VerifyMode::Deferred;
        let out = (|| {
            let bundle = session.bundles.pop_front().expect("preprocessed");
            let x = self.share_input(input.as_ref(), fo, n * k)?;
            let mut sel = if p.d_pad > 0 {
                Some(self.open_features(&x, bundle)?)
            } else {
                None
            };
            let mut node = state.table.entry(0).slice(0, ell);
            let mut result = node.slice(3 * k + n, k);
            let mut checked_nodes = Vec::with_capacity(p.d_pad);
            let mut checked_macs = Vec::with_capacity(p.d_pad);
            for _ in 0..p.d_pad {
                let t = node.slice(0, k);
                let l = node.slice(k, lm);
                let r = node.slice(2 * k, lm);
                let v = node.slice(3 * k, n);
                let xv = self.select_feature(sel.as_mut().expect("d_pad > 0"), &v)?;
                let b = self.lt_compare(&xv, &t)?;
                let idx = self.mux_index(&b, &l, &r)?;
                let picked = self.os_select(&mut session.pools, &state.table, &idx)?;
                node = picked.slice(0, ell);
                checked_macs.push(picked.slice(ell, ell));
                checked_nodes.push(node.clone());
                result = node.slice(3 * k + n, k);
            }
            self.verify_pending()?;
            let xs = RssShare::concat(self.id(), &checked_nodes);
            let ms = RssShare::concat(self.id(), &checked_macs);
            self.mac_check(&xs, &ms, &state.key)?;
            let label = self.recon_tagged(&result, fo, Tag::ResultRecon)?;
            Ok(label.map(|b| b.to_u64()))
        })();
        self.cfg.verify = saved_mode;
        self.set_phase(saved);
        out
    }
}

const SHARE_MAGIC: &[u8; 4] = b"PDTS";
const SHARE_VERSION: u8 = 1;

impl SetupState {
    /// Header (magic, version, party, k, then n, m, d_pad, ell as u32 LE),
    /// then the table halves and the key halves.
    pub fn to_bytes(&self) -> Vec<u8> {
        let p = self.params;
        let mut out = SHARE_MAGIC.to_vec();
        out.extend([SHARE_VERSION, self.holder().index() as u8, p.k as u8]);
        for v in [p.n, p.m, p.d_pad, p.ell()] {
            out.extend((v as u32).to_le_bytes());
        }
        let packed = self.table.packed();
        for half in [&packed.own, &packed.prev, &self.key.alpha.own, &self.key.alpha.prev] {
            out.extend(half.to_bytes());
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Format {
            what: "shares",
            line: 0,
            msg: msg.into(),
        };
        if b.len() < 23 || &b[..4] != SHARE_MAGIC {
            return Err(bad("not a share file"));
        }
        if b[4] != SHARE_VERSION {
            return Err(bad("unsupported version"));
        }
        let holder = PartyId::new(b[5] as usize).map_err(|_| bad("bad party id"))?;
        let k = b[6] as usize;
        let word = |i: usize| u32::from_le_bytes(b[7 + 4 * i..11 + 4 * i].try_into().unwrap()) as usize;
        let params = TreeParams {
            k,
            n: word(0),
            m: word(1),
            d_pad: word(2),
        };
        let ell = word(3);
        if ell != params.ell() {
            return Err(bad("node width does not match k and n"));
        }
        params.check()?;
        let table_bits = params.m * 2 * ell;
        let tb = table_bits.div_ceil(8);
        let kb = ell.div_ceil(8);
        let body = &b[23..];
        if body.len() != 2 * tb + 2 * kb {
            return Err(bad("length does not match the header"));
        }
        let own = BitVec::from_bytes(&body[..tb], table_bits);
        let prev = BitVec::from_bytes(&body[tb..2 * tb], table_bits);
        let a_own = BitVec::from_bytes(&body[2 * tb..2 * tb + kb], ell);
        let a_prev = BitVec::from_bytes(&body[2 * tb + kb..], ell);
        Ok(SetupState {
            params,
            key: MacKey {
                ctx: FieldCtx::new(ell),
                alpha: RssShare::new(holder, a_own, a_prev),
            },
            table: RssArray::from_packed(&RssShare::new(holder, own, prev), 2 * ell),
        })
    }
}
