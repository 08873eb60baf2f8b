//! Benchmark shapes and the measurement loop behind `pdte bench`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{first_error, simulate, Scenario, SimOptions};
use crate::oselect::OsKind;
use crate::pdte::{padded_size, PdteSession, TreeParams, MODEL_OWNER};
use crate::transport::{PartyId, Phase};

/// Tree shape: depth, features, nodes before padding, word size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub name: String,
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

/// Dataset shapes with their padded sizes: (name, d, n, m, m').
pub const DATASETS: [(&str, usize, usize, usize, usize); 7] = [
    ("wine", 5, 7, 23, 32),
    ("breast", 7, 12, 43, 64),
    ("digits", 15, 47, 337, 512),
    ("spambase", 17, 57, 171, 256),
    ("diabetes", 28, 10, 787, 1024),
    ("boston", 30, 13, 851, 1024),
    ("mnist", 20, 784, 4179, 8192),
];

/// Published online communication for the MNIST shape, in KB.
pub const MNIST_ONLINE_KB: f64 = 138.4;

impl Shape {
    /// A dataset shape with `k = 64`.
    pub fn preset(name: &str) -> Option<Shape> {
        DATASETS
            .iter()
            .find(|s| s.0.eq_ignore_ascii_case(name))
            .map(|&(name, d, n, m, _)| Shape {
                name: name.into(),
                d,
                n,
                m,
                k: 64,
            })
    }

    pub fn padded(&self) -> usize {
        padded_size(self.m)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={},n={},m={},k={}", self.d, self.n, self.m, self.k)
    }
}

/// A preset name, optionally with overrides (`mnist,k=16`), or a full
/// `d=..,n=..,m=..,k=..` list.
impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(',').map(str::trim).filter(|p| !p.is_empty());
        let first = parts.next().ok_or_else(|| Error::Config("empty shape".into()))?;
        let (mut shape, rest): (Shape, Vec<&str>) = match Shape::preset(first) {
            Some(p) => (p, parts.collect()),
            None => (
                Shape {
                    name: "custom".into(),
                    d: 0,
                    n: 0,
                    m: 0,
                    k: 64,
                },
                std::iter::once(first).chain(parts).collect(),
            ),
        };
        for kv in rest {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad shape field `{kv}`")))?;
            let v: usize = v
                .parse()
                .map_err(|_| Error::Config(format!("bad number in `{kv}`")))?;
            match k {
                "d" => shape.d = v,
                "n" => shape.n = v,
                "m" => shape.m = v,
                "k" => shape.k = v,
                _ => return Err(Error::Config(format!("unknown shape field `{k}`"))),
            }
        }
        if shape.n == 0 || shape.m == 0 {
            return Err(Error::Config(format!("incomplete shape `{s}`")));
        }
        Ok(shape)
    }
}

/// Column names of [`BenchRow::csv`]; scripts parse by these.
pub const BENCH_HEADER: &str =
    "shape,os,d,n,m,m_pad,k,d_pad,reps,setup_bytes,offline_bytes,online_bytes,online_kb,query_ms";

/// Mean costs per query; byte counts are summed over the three parties.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub shape: Shape,
    pub os: OsKind,
    pub m_pad: usize,
    pub d_pad: usize,
    pub reps: usize,
    pub setup_bytes: u64,
    pub offline_bytes: u64,
    pub online_bytes: u64,
    pub query_ms: f64,
}

impl BenchRow {
    pub fn online_kb(&self) -> f64 {
        self.online_bytes as f64 / 1000.0
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.1},{:.1}",
            self.shape.name,
            self.os,
            self.shape.d,
            self.shape.n,
            self.shape.m,
            self.m_pad,
            self.shape.k,
            self.d_pad,
            self.reps,
            self.setup_bytes,
            self.offline_bytes,
            self.online_bytes,
            self.online_kb(),
            self.query_ms
        )
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub os: OsKind,
    pub reps: usize,
    pub seed: u64,
    pub delay: Option<Duration>,
    /// Evaluation steps; the tree depth when `None`.
    pub d_pad: Option<usize>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            os: OsKind::Dpf,
            reps: 1,
            seed: 1,
            delay: None,
            d_pad: None,
        }
    }
}

/// Generates a random tree of the given shape and measures `reps` queries.
pub fn bench(shape: &Shape, opts: &BenchOptions) -> Result<BenchRow> {
    let reps = opts.reps.max(1);
    let mut sc = Scenario::random(opts.seed, shape.m, shape.d, shape.n, shape.k, reps, opts.os)?;
    if let Some(d) = opts.d_pad {
        sc = sc.with_d_pad(d)?;
    }
    let params = TreeParams::of(&sc.tree);
    let sim = SimOptions {
        seed: opts.seed,
        delay: opts.delay,
        ..Default::default()
    };
    let runs = simulate(&sim, |p| {
        let tree = (p.id() == MODEL_OWNER).then_some(&sc.tree);
        let state = p.pdte_setup(&params, tree)?;
        let mut session = PdteSession::new(&params, sc.os).with_feature_owner(sc.feature_owner);
        p.pdte_preprocess(&state, &mut session, reps)?;
        let start = Instant::now();
        for q in &sc.queries {
            let x = (p.id() == sc.feature_owner).then_some(q.as_slice());
            p.pdte_eval(&state, &mut session, x)?;
        }
        Ok(start.elapsed())
    });
    if let Some(e) = first_error(&runs) {
        return Err(Error::Config(format!("benchmark run failed: {e}")));
    }
    let sum = |ph: Phase| runs.iter().map(|r| r.stats.sent_bytes(ph)).sum::<u64>();
    let online = runs[PartyId::P1.index()].result.as_ref().expect("checked");
    Ok(BenchRow {
        shape: shape.clone(),
        os: opts.os,
        m_pad: params.m,
        d_pad: params.d_pad,
        reps,
        setup_bytes: sum(Phase::Setup),
        offline_bytes: (sum(Phase::Preprocess) + sum(Phase::OsPreprocess)) / reps as u64,
        online_bytes: sum(Phase::Online) / reps as u64,
        query_ms: online.as_secs_f64() * 1e3 / reps as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_parse() {
        let s: Shape = "mnist".parse().unwrap();
        assert_eq!((s.d, s.n, s.m, s.k), (20, 784, 4179, 64));
        let s: Shape = "wine,k=16".parse().unwrap();
        assert_eq!((s.n, s.k), (7, 16));
        let s: Shape = "d=16,n=16,m=63,k=16".parse().unwrap();
        assert_eq!(s.padded(), 64);
        assert!("d=3".parse::<Shape>().is_err());
    }
}
