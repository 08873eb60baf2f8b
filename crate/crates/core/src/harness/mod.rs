//! In-process three-party runs with optional fault injection.
//!
//! Each party runs on its own thread over in-memory links. All randomness is
//! derived from one seed, so a run's transcript is a function of the seed,
//! the scenario and the fault.

mod fault;
mod scenario;

use std::net::{SocketAddr, TcpListener};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use fault::{Adversary, FaultSpec, Site};
pub use scenario::{load_tree, Scenario};

use crate::error::{AbortReason, Error, Result};
use crate::pdte::{plaintext_dte, PdteSession, TreeParams, MODEL_OWNER};
use crate::rss::{EngineConfig, Party};
use crate::transport::{
    mem_links, tcp_links_with_listener, ChannelStats, Direction, FrameMeta, Link, Net, PartyId,
    Phase, Tag,
};

/// What one party ended with.
pub struct PartyRun<T> {
    pub id: PartyId,
    pub result: Result<T>,
    pub stats: ChannelStats,
    pub digest: [u8; 32],
    pub log: Vec<FrameMeta>,
    pub fired: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SimOptions {
    pub seed: u64,
    pub fault: Option<FaultSpec>,
    pub engine: EngineConfig,
    pub delay: Option<Duration>,
}

impl SimOptions {
    pub fn seeded(seed: u64) -> Self {
        SimOptions {
            seed,
            ..Default::default()
        }
    }
}

fn run_party<T>(
    id: PartyId,
    links: [Option<Box<dyn Link>>; 3],
    opts: &SimOptions,
    f: &(impl Fn(&mut Party) -> Result<T> + Sync),
) -> PartyRun<T> {
    let mut net = Net::new(id, links);
    net.set_delay(opts.delay);
    let mut p = Party::new(id, net, opts.seed);
    *p.config_mut() = opts.engine.clone();
    if let Some(spec) = opts.fault.filter(|s| s.party == id) {
        p.set_adversary(Some(Adversary::new(spec)));
    }
    let result = p.setup_keys().and_then(|_| f(&mut p));
    if let Err(e) = &result {
        log::debug!("{id} stopped: {e}");
    }
    PartyRun {
        id,
        result,
        stats: p.stats().clone(),
        digest: p.net().transcript_digest(),
        log: p.net().log().to_vec(),
        fired: p.adversary().is_some_and(|a| a.fired()),
    }
    // Dropping `p` closes the links, which unblocks peers after an abort.
}

/// Runs `f` on all three parties after PRF key setup.
pub fn simulate<T: Send>(
    opts: &SimOptions,
    f: impl Fn(&mut Party) -> Result<T> + Sync,
) -> [PartyRun<T>; 3] {
    let links = mem_links();
    run_with_links(links.map(Some), opts, &f)
}

fn run_with_links<T: Send>(
    links: [Option<[Option<Box<dyn Link>>; 3]>; 3],
    opts: &SimOptions,
    f: &(impl Fn(&mut Party) -> Result<T> + Sync),
) -> [PartyRun<T>; 3] {
    std::thread::scope(|s| {
        let handles: Vec<_> = links
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                let l = l.expect("links for every party");
                s.spawn(move || run_party(PartyId::from_index(i), l, opts, f))
            })
            .collect();
        let runs: Vec<PartyRun<T>> = handles
            .into_iter()
            .map(|h| h.join().expect("party thread panicked"))
            .collect();
        runs.try_into().unwrap_or_else(|_| unreachable!())
    })
}

/// Same as [`simulate`] over loopback TCP.
pub fn simulate_tcp<T: Send>(
    opts: &SimOptions,
    f: impl Fn(&mut Party) -> Result<T> + Sync,
) -> Result<[PartyRun<T>; 3]> {
    let l0 = TcpListener::bind("127.0.0.1:0")?;
    let l1 = TcpListener::bind("127.0.0.1:0")?;
    let unused: SocketAddr = "127.0.0.1:9".parse().unwrap();
    let peers = [l0.local_addr()?, l1.local_addr()?, unused];
    let listeners = [Some(l0), Some(l1), None];
    let timeout = Duration::from_secs(10);
    let links: Vec<Result<[Option<Box<dyn Link>>; 3]>> = std::thread::scope(|s| {
        let hs: Vec<_> = listeners
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                let peers = &peers;
                s.spawn(move || tcp_links_with_listener(PartyId::from_index(i), l, peers, timeout))
            })
            .collect();
        hs.into_iter().map(|h| h.join().expect("connect thread")).collect()
    });
    let mut ready = Vec::with_capacity(3);
    for l in links {
        ready.push(Some(l?));
    }
    let ready: [Option<[Option<Box<dyn Link>>; 3]>; 3] =
        ready.try_into().unwrap_or_else(|_| unreachable!());
    Ok(run_with_links(ready, opts, &f))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Completed,
    Aborted {
        /// Abort reason seen by an honest party, preferring a failed check
        /// over a closed connection.
        reason: String,
        party: usize,
        /// Phase of that party's last frame.
        phase: Option<Phase>,
    },
}

impl Outcome {
    pub fn is_abort(&self) -> bool {
        matches!(self, Outcome::Aborted { .. })
    }

    pub fn label(&self) -> String {
        match self {
            Outcome::Completed => "completed".into(),
            Outcome::Aborted { reason, .. } => format!("aborted({reason})"),
        }
    }
}

/// Summary of a scenario run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub outcome: Outcome,
    pub fault: Option<String>,
    /// Whether the injected fault was actually applied.
    pub fired: bool,
    /// Labels learned by the feature owner.
    pub labels: Vec<u64>,
    pub expected: Vec<u64>,
    /// Whether any honest party sent a share of a result.
    pub result_released: bool,
    pub digest: String,
    pub setup_bytes: u64,
    pub preprocess_bytes: u64,
    pub os_preprocess_bytes: u64,
    pub online_bytes: u64,
    pub wall_ms: f64,
    pub stats: Vec<ChannelStats>,
}

impl RunReport {
    pub fn correct(&self) -> bool {
        self.outcome == Outcome::Completed && self.labels == self.expected
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn hex(b: &[u8]) -> String {
    b.iter().map(|x| format!("{x:02x}")).collect()
}

/// Builds a report from the three runs.
fn report(runs: &[PartyRun<Vec<Option<u64>>>; 3], sc: &Scenario, wall: Duration) -> RunReport {
    let corrupt = sc.fault.map(|f| f.party);
    let honest = |r: &&PartyRun<_>| Some(r.id) != corrupt;
    // Prefer an honest party that detected something over one that only
    // saw a peer leave.
    let peer_closed = |r: &&PartyRun<_>| {
        r.result
            .as_ref()
            .err()
            .is_some_and(|e| e.abort_reason() == Some(AbortReason::PeerClosed))
    };
    let outcome = runs
        .iter()
        .filter(|r| honest(r) && !peer_closed(r))
        .chain(runs.iter().filter(|r| honest(r) && peer_closed(r)))
        .chain(runs.iter().filter(|r| !honest(r)))
        .find_map(|r| {
            r.result.as_ref().err().map(|e| Outcome::Aborted {
                reason: e
                    .abort_reason()
                    .map_or_else(|| e.to_string(), |a| a.label().to_string()),
                party: r.id.index(),
                phase: r.log.last().map(|m| m.phase),
            })
        })
        .unwrap_or(Outcome::Completed);
    let labels = match &runs[sc.feature_owner.index()].result {
        Ok(v) => v.iter().flatten().copied().collect(),
        Err(_) => Vec::new(),
    };
    let result_released = runs.iter().filter(honest).any(|r| {
        r.log
            .iter()
            .any(|m| m.direction == Direction::Sent && m.session.tag == Tag::ResultRecon)
    });
    let mut h = Sha256::new();
    for r in runs {
        h.update(r.digest);
    }
    let total = |ph: Phase| runs.iter().map(|r| r.stats.sent_bytes(ph)).sum();
    RunReport {
        outcome,
        fault: sc.fault.map(|f| f.to_string()),
        fired: runs.iter().any(|r| r.fired),
        labels,
        expected: sc.queries.iter().map(|q| plaintext_dte(&sc.tree, q)).collect(),
        result_released,
        digest: hex(&h.finalize()),
        setup_bytes: total(Phase::Setup),
        preprocess_bytes: total(Phase::Preprocess),
        os_preprocess_bytes: total(Phase::OsPreprocess),
        online_bytes: total(Phase::Online),
        wall_ms: wall.as_secs_f64() * 1e3,
        stats: runs.iter().map(|r| r.stats.clone()).collect(),
    }
}

/// The per-party program of a scenario: setup, preprocessing for every
/// query, then the queries in order.
fn scenario_program(sc: &Scenario) -> impl Fn(&mut Party) -> Result<Vec<Option<u64>>> + Sync + '_ {
    move |p: &mut Party| {
        let params = TreeParams::of(&sc.tree);
        let tree = (p.id() == MODEL_OWNER).then_some(&sc.tree);
        let state = p.pdte_setup(&params, tree)?;
        let mut session = PdteSession::new(&params, sc.os).with_feature_owner(sc.feature_owner);
        p.pdte_preprocess(&state, &mut session, sc.queries.len())?;
        let mut out = Vec::with_capacity(sc.queries.len());
        for q in &sc.queries {
            let x = (p.id() == sc.feature_owner).then_some(q.as_slice());
            out.push(p.pdte_eval(&state, &mut session, x)?);
        }
        Ok(out)
    }
}

fn options(sc: &Scenario) -> SimOptions {
    SimOptions {
        seed: sc.seed,
        fault: sc.fault,
        engine: sc.engine.clone(),
        delay: sc.delay,
    }
}

/// Runs a scenario in process. Aborts are part of the report, not errors.
pub fn run_three_parties(sc: &Scenario) -> RunReport {
    let start = Instant::now();
    let runs = simulate(&options(sc), scenario_program(sc));
    report(&runs, sc, start.elapsed())
}

/// Runs a scenario over loopback TCP.
pub fn run_three_parties_tcp(sc: &Scenario) -> Result<RunReport> {
    let start = Instant::now();
    let runs = simulate_tcp(&options(sc), scenario_program(sc))?;
    Ok(report(&runs, sc, start.elapsed()))
}

/// Error value used for every nonzero row of the fault matrix.
pub const CANONICAL_ERROR: u64 = 0x9e37_79b9_7f4a_7c15;

/// One row of the fault matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixRow {
    pub site: String,
    pub party: usize,
    pub error: u64,
    pub outcome: String,
    pub phase: Option<Phase>,
    pub fired: bool,
    pub result_released: bool,
    pub correct: bool,
}

pub const MATRIX_HEADER: &str = "site,party,error,outcome,phase,fired,result_released,correct";

impl MatrixRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{:#x},{},{},{},{},{}",
            self.site,
            self.party,
            self.error,
            self.outcome,
            self.phase.map_or("-", |p| p.label()),
            self.fired,
            self.result_released,
            self.correct
        )
    }
}

/// Every site applicable to the scenario's selection kind, times every
/// corrupt party, times a zero and a nonzero error. Input-sharing faults by
/// a party that owns no input are run with that party as the feature owner.
pub fn fault_matrix(sc: &Scenario) -> Vec<MatrixRow> {
    let mut rows = Vec::new();
    for site in Site::all() {
        if site.dpf_only() && sc.os != crate::oselect::OsKind::Dpf {
            continue;
        }
        for party in PartyId::ALL {
            for error in [CANONICAL_ERROR, 0] {
                let mut run = sc.clone();
                run.fault = Some(FaultSpec::new(site, party, error));
                if site == Site::ShareDelta && party != MODEL_OWNER {
                    run.feature_owner = party;
                }
                let r = run_three_parties(&run);
                rows.push(MatrixRow {
                    site: site.to_string(),
                    party: party.index(),
                    error,
                    outcome: r.outcome.label(),
                    phase: match &r.outcome {
                        Outcome::Aborted { phase, .. } => *phase,
                        Outcome::Completed => None,
                    },
                    fired: r.fired,
                    result_released: r.result_released,
                    correct: r.correct(),
                });
            }
        }
    }
    rows
}

pub fn matrix_csv(rows: &[MatrixRow]) -> String {
    let mut out = String::from(MATRIX_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

/// Convenience for tests: the first error among the three runs, if any.
pub fn first_error<T>(runs: &[PartyRun<T>; 3]) -> Option<&Error> {
    runs.iter().find_map(|r| r.result.as_ref().err())
}
