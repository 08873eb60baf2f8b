use std::path::Path;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::FaultSpec;
use crate::error::{Error, Result};
use crate::oselect::OsKind;
use crate::pdte::format::{array_from_bytes, parse_features, parse_tree};
use crate::pdte::{encode_tree, pad_tree, LogicalTree, TreeArray, FEATURE_OWNER};
use crate::rss::{EngineConfig, VerifyMode};
use crate::transport::PartyId;

/// A tree, a batch of queries and the run parameters.
///
/// Scenario files are `key = value` lines:
///
/// ```text
/// tree = wine.tree        # text model or packed array, relative to this file
/// features = wine.csv
/// os = dpf
/// seed = 7
/// d_pad = 6               # optional
/// fault = os-reshare:2:0x1:3   # optional
/// feature_owner = 1       # optional
/// verify = deferred       # optional
/// delay_ms = 0            # optional
/// ```
#[derive(Clone, Debug)]
pub struct Scenario {
    /// Padded tree.
    pub tree: TreeArray,
    pub queries: Vec<Vec<u64>>,
    pub os: OsKind,
    pub seed: u64,
    pub fault: Option<FaultSpec>,
    pub feature_owner: PartyId,
    pub engine: EngineConfig,
    pub delay: Option<Duration>,
}

impl Scenario {
    /// Pads `tree` if needed, with placement drawn from `seed`.
    pub fn new(tree: TreeArray, queries: Vec<Vec<u64>>, os: OsKind, seed: u64) -> Self {
        let tree = if tree.m().is_power_of_two() && tree.m() >= 2 {
            tree
        } else {
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x7061_6464);
            pad_tree(&tree, &mut rng)
        };
        Scenario {
            tree,
            queries,
            os,
            seed,
            fault: None,
            feature_owner: FEATURE_OWNER,
            engine: EngineConfig::default(),
            delay: None,
        }
    }

    /// A random tree of `m` nodes and depth `d`, with random queries.
    pub fn random(seed: u64, m: usize, d: usize, n: usize, k: usize, queries: usize, os: OsKind) -> Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let t = LogicalTree::random(&mut rng, m, d, n, k)?;
        let arr = encode_tree(&t, k, n)?;
        let kmask = if k >= 64 { u64::MAX } else { (1 << k) - 1 };
        let qs = (0..queries)
            .map(|_| (0..n).map(|_| rng.gen::<u64>() & kmask).collect())
            .collect();
        Ok(Scenario::new(arr, qs, os, seed))
    }

    pub fn with_fault(mut self, fault: FaultSpec) -> Self {
        self.fault = Some(fault);
        self
    }

    pub fn with_d_pad(mut self, d_pad: usize) -> Result<Self> {
        if d_pad < self.tree.depth {
            return Err(Error::Config(format!(
                "d_pad {d_pad} is below the depth {}",
                self.tree.depth
            )));
        }
        self.tree.d_pad = d_pad;
        Ok(self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Scenario::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses a scenario file; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::Format {
            what: "scenario",
            line,
            msg,
        };
        let mut kv = std::collections::BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(i + 1, "expected `key = value`".into()))?;
            kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
        }
        let get = |k: &str| kv.get(k).map(|(l, v)| (*l, v.as_str()));
        let need = |k: &str| get(k).ok_or_else(|| bad(0, format!("missing `{k}`")));

        let (_, tree_path) = need("tree")?;
        let tree = load_tree(&base.join(tree_path))?;
        let (_, feat_path) = need("features")?;
        let queries = parse_features(&std::fs::read_to_string(base.join(feat_path))?, tree.n, tree.k)?;
        let os: OsKind = get("os").map_or(Ok(OsKind::Dpf), |(_, v)| v.parse())?;
        let seed = match get("seed") {
            Some((l, v)) => v.parse().map_err(|_| bad(l, format!("bad seed `{v}`")))?,
            None => 0,
        };
        let mut sc = Scenario::new(tree, queries, os, seed);
        if let Some((l, v)) = get("d_pad") {
            let d = v.parse().map_err(|_| bad(l, format!("bad d_pad `{v}`")))?;
            sc = sc.with_d_pad(d)?;
        }
        if let Some((_, v)) = get("fault") {
            sc.fault = Some(v.parse()?);
        }
        if let Some((l, v)) = get("feature_owner") {
            let i: usize = v.parse().map_err(|_| bad(l, format!("bad party `{v}`")))?;
            sc.feature_owner = PartyId::new(i)?;
        }
        if let Some((l, v)) = get("verify") {
            sc.engine.verify = match v {
                "immediate" => VerifyMode::Immediate,
                "deferred" => VerifyMode::Deferred,
                _ => return Err(bad(l, format!("unknown verify mode `{v}`"))),
            };
        }
        if let Some((l, v)) = get("delay_ms") {
            let ms: u64 = v.parse().map_err(|_| bad(l, format!("bad delay `{v}`")))?;
            sc.delay = (ms > 0).then(|| Duration::from_millis(ms));
        }
        Ok(sc)
    }
}

/// Reads a text model or a packed array.
pub fn load_tree(path: &Path) -> Result<TreeArray> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"PDTA") {
        array_from_bytes(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::Format {
            what: "tree",
            line: 0,
            msg: "not UTF-8".into(),
        })?;
        parse_tree(&text)
    }
}
