//! The `pdte` command line.
//!
//! `setup`, `eval` and `serve` run one party each and talk to the other two
//! processes over TCP. Before any protocol message the three processes swap
//! a hash of their parameters and refuse to continue on a mismatch.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::bench::{bench, BenchOptions, Shape, BENCH_HEADER};
use crate::error::{Error, Result};
use crate::harness::{fault_matrix, load_tree, matrix_csv, run_three_parties, Outcome, Scenario};
use crate::oselect::OsKind;
use crate::pdte::format::{array_to_bytes, parse_features};
use crate::pdte::{pad_tree, PdteSession, SetupState, TreeParams, FEATURE_OWNER, MODEL_OWNER};
use crate::rss::Party;
use crate::transport::{tcp_links, Net, PartyId, Tag};

/// Exit code for a protocol abort.
pub const EXIT_ABORT: i32 = 2;
/// Exit code for bad flags, files or mismatched parameters.
pub const EXIT_CONFIG: i32 = 3;

const CONNECT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Parser, Debug)]
#[command(name = "pdte", version, about = "Three-party private decision tree evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate and pad a tree model, write the packed array
    Encode {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for the placement of nodes in the padded array
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Share the model owner's tree and write this party's shares
    Setup {
        #[command(flatten)]
        net: NetArgs,
        /// Word size, checked against the other parties
        #[arg(long)]
        k: usize,
        /// Tree model or packed array (model owner only)
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Share file to write
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the feature owner's queries against stored shares
    Eval {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value = "dpf")]
        os: OsKind,
        /// Share file written by `setup`
        #[arg(long)]
        shares: PathBuf,
        /// Queries, one per line (feature owner only)
        #[arg(long)]
        features: Option<PathBuf>,
        /// Where the feature owner writes the labels
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Setup followed by query batches
    Serve {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "dpf")]
        os: OsKind,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Times the feature owner submits its batch
        #[arg(long, default_value_t = 1)]
        reps: usize,
    },
    /// Measure communication and time on random trees of a given shape
    Bench {
        /// Dataset name (wine, breast, digits, spambase, diabetes, boston,
        /// mnist), optionally with overrides, or `d=..,n=..,m=..,k=..`
        #[arg(long, default_value = "wine")]
        shape: Vec<String>,
        /// `rss`, `dpf` or `both`
        #[arg(long, default_value = "dpf")]
        os: String,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        delay_ms: u64,
        /// Evaluation steps; defaults to the tree depth
        #[arg(long)]
        d_pad: Option<usize>,
        /// CSV file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario file in process and print a JSON report
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        os: Option<OsKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every fault site against a scenario and print the CSV matrix
    Matrix {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct NetArgs {
    #[arg(long)]
    pub party: usize,
    /// Address to accept connections on (P0 and P1)
    #[arg(long)]
    pub listen: Option<SocketAddr>,
    #[arg(long)]
    pub peer0: Option<SocketAddr>,
    #[arg(long)]
    pub peer1: Option<SocketAddr>,
    #[arg(long)]
    pub peer2: Option<SocketAddr>,
    /// Seed for this party's randomness; drawn from the OS when absent
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub delay_ms: u64,
    /// Stop sending after this many frames, to test peer failure
    #[arg(long, hide = true)]
    pub crash_after: Option<u64>,
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            if code == EXIT_ABORT {
                eprintln!("pdte: abort: {e}");
            } else {
                eprintln!("pdte: error: {e}");
            }
            code
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_abort() {
        EXIT_ABORT
    } else {
        EXIT_CONFIG
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Encode { tree, out, seed } => cmd_encode(&tree, out.as_deref(), seed).map(|_| 0),
        Command::Setup { net, k, tree, out } => {
            let mut p = connect(&net)?;
            let state = reported(&mut p, |p| {
                handshake(p, &["setup", &k.to_string()])?;
                setup_phase(p, k, tree.as_deref())
            })?;
            fs::write(&out, state.to_bytes())?;
            eprintln!("P{}: wrote shares to {}", net.party, out.display());
            Ok(0)
        }
        Command::Eval {
            net,
            os,
            shares,
            features,
            out,
        } => {
            let state = SetupState::from_bytes(&fs::read(&shares)?)?;
            if state.holder().index() != net.party {
                return Err(Error::Config(format!(
                    "{} holds the shares of {}, not P{}",
                    shares.display(),
                    state.holder(),
                    net.party
                )));
            }
            let pr = state.params;
            let mut p = connect(&net)?;
            let fields = params_fields(&pr);
            let queries = read_queries(&p, features.as_deref(), &pr)?;
            let (_, labels) = reported(&mut p, |p| {
                handshake(p, &["eval", &os.to_string(), &fields])?;
                let mut session = PdteSession::new(&pr, os);
                eval_batch(p, &state, &mut session, queries.as_deref())
            })?;
            emit_labels(&labels, out.as_deref()).map(|_| 0)
        }
        Command::Serve {
            net,
            k,
            os,
            tree,
            features,
            out,
            reps,
        } => {
            let mut p = connect(&net)?;
            let labels = reported(&mut p, |p| {
                handshake(p, &["serve", &k.to_string(), &os.to_string()])?;
                let state = setup_phase(p, k, tree.as_deref())?;
                let queries = read_queries(p, features.as_deref(), &state.params)?;
                let mut session = PdteSession::new(&state.params, os);
                let mut labels = Vec::new();
                // The feature owner announces each batch; an empty one ends the loop.
                if let Some(qs) = queries.as_deref() {
                    for _ in 0..reps {
                        labels.extend(eval_batch(p, &state, &mut session, Some(qs))?.1);
                    }
                    announce(p, 0)?;
                } else {
                    while eval_batch(p, &state, &mut session, None)?.0 > 0 {}
                }
                Ok(labels)
            })?;
            emit_labels(&labels, out.as_deref()).map(|_| 0)
        }
        Command::Bench {
            shape,
            os,
            reps,
            seed,
            delay_ms,
            d_pad,
            out,
        } => {
            let kinds = match os.as_str() {
                "both" => vec![OsKind::Rss, OsKind::Dpf],
                s => vec![s.parse()?],
            };
            let mut csv = String::from(BENCH_HEADER);
            csv.push('\n');
            for s in &shape {
                let shape: Shape = s.parse()?;
                for &kind in &kinds {
                    let opts = BenchOptions {
                        os: kind,
                        reps,
                        seed,
                        delay: (delay_ms > 0).then(|| Duration::from_millis(delay_ms)),
                        d_pad,
                    };
                    let row = bench(&shape, &opts)?;
                    log::info!("{} {}: {:.1} KB online", shape.name, kind, row.online_kb());
                    csv.push_str(&row.csv());
                    csv.push('\n');
                }
            }
            write_or_print(&csv, out.as_deref()).map(|_| 0)
        }
        Command::Run { scenario, os, out } => {
            let mut sc = Scenario::load(&scenario)?;
            if let Some(os) = os {
                sc.os = os;
            }
            let report = run_three_parties(&sc);
            write_or_print(&(report.to_json() + "\n"), out.as_deref())?;
            match &report.outcome {
                Outcome::Completed => Ok(0),
                Outcome::Aborted { reason, party, phase } => {
                    eprintln!(
                        "pdte: abort: P{party} stopped with {reason} during {}",
                        phase.map_or("-", |p| p.label())
                    );
                    Ok(EXIT_ABORT)
                }
            }
        }
        Command::Matrix { scenario, out } => {
            let sc = Scenario::load(&scenario)?;
            let rows = fault_matrix(&sc);
            write_or_print(&matrix_csv(&rows), out.as_deref()).map(|_| 0)
        }
    }
}

fn cmd_encode(path: &Path, out: Option<&Path>, seed: u64) -> Result<()> {
    use rand::SeedableRng;
    let arr = load_tree(path)?;
    arr.validate()?;
    let m = arr.m();
    let padded = if m.is_power_of_two() && m >= 2 {
        arr.clone()
    } else {
        pad_tree(&arr, &mut rand_chacha::ChaCha20Rng::seed_from_u64(seed))
    };
    let pr = TreeParams::of(&padded);
    println!(
        "m = {m}, m' = {}, d = {}, d_pad = {}, k = {}, n = {}, ell = {}, ell_m = {}",
        pr.m,
        padded.depth,
        pr.d_pad,
        pr.k,
        pr.n,
        pr.ell(),
        pr.index_bits()?
    );
    if let Some(out) = out {
        fs::write(out, array_to_bytes(&padded))?;
    }
    Ok(())
}

fn connect(a: &NetArgs) -> Result<Party> {
    let id = PartyId::new(a.party).map_err(|_| Error::Config(format!("no party {}", a.party)))?;
    let unused: SocketAddr = "127.0.0.1:9".parse().expect("literal address");
    let mut peers = [unused; 3];
    for (j, p) in [a.peer0, a.peer1, a.peer2].into_iter().enumerate() {
        match p {
            Some(addr) => peers[j] = addr,
            None if j < id.index() => {
                return Err(Error::Config(format!("--peer{j} is required for P{}", a.party)))
            }
            None => {}
        }
    }
    let listen = match (a.listen, id.index()) {
        (Some(l), _) => l,
        (None, 2) => unused,
        (None, _) => return Err(Error::Config(format!("--listen is required for P{}", a.party))),
    };
    let links = tcp_links(id, listen, &peers, CONNECT_TIMEOUT)?;
    let mut net = Net::new(id, links);
    net.set_delay((a.delay_ms > 0).then(|| Duration::from_millis(a.delay_ms)));
    net.set_crash_after(a.crash_after);
    let seed = a.seed.unwrap_or_else(rand::random);
    Ok(Party::new(id, net, seed))
}

/// Swaps parameter hashes with both peers, then sets up the PRF keys.
fn handshake(p: &mut Party, fields: &[&str]) -> Result<()> {
    let mut h = Sha256::new();
    h.update(b"pdte-cli 1");
    for f in fields {
        h.update((f.len() as u32).to_le_bytes());
        h.update(f.as_bytes());
    }
    let mine = h.finalize().to_vec();
    let sid = p.session(Tag::Handshake);
    let (a, b) = (p.id().next(), p.id().prev());
    p.send_bytes(a, sid, mine.clone())?;
    p.send_bytes(b, sid, mine.clone())?;
    for peer in [a, b] {
        if p.recv_bytes(peer, sid)? != mine {
            return Err(Error::Config(format!(
                "parameter handshake failed: {peer} runs with different parameters"
            )));
        }
    }
    p.setup_keys()
}

fn params_fields(pr: &TreeParams) -> String {
    format!("k={},n={},m={},d_pad={}", pr.k, pr.n, pr.m, pr.d_pad)
}

/// The model owner announces the tree shape; everyone shares the tree.
fn setup_phase(p: &mut Party, k: usize, tree: Option<&Path>) -> Result<SetupState> {
    let sid = p.session(Tag::Params);
    let (arr, params) = if p.id() == MODEL_OWNER {
        let path = tree.ok_or_else(|| Error::Config("the model owner (P0) needs --tree".into()))?;
        let arr = load_tree(path)?;
        let arr = if arr.m().is_power_of_two() && arr.m() >= 2 {
            arr
        } else {
            use rand::SeedableRng;
            pad_tree(&arr, &mut rand_chacha::ChaCha20Rng::from_rng(p.rng()).expect("chacha seeds"))
        };
        if arr.k != k {
            return Err(Error::Config(format!("tree has k = {}, --k is {k}", arr.k)));
        }
        let pr = TreeParams::of(&arr);
        let msg: Vec<u8> = [pr.n, pr.m, pr.d_pad]
            .iter()
            .flat_map(|v| (*v as u32).to_le_bytes())
            .collect();
        for peer in [p.id().next(), p.id().prev()] {
            p.send_bytes(peer, sid, msg.clone())?;
        }
        (Some(arr), pr)
    } else {
        if tree.is_some() {
            log::warn!("--tree ignored: only P0 supplies the model");
        }
        let msg = p.recv_bytes(MODEL_OWNER, sid)?;
        if msg.len() != 12 {
            return Err(Error::Abort(crate::error::AbortReason::BadLength));
        }
        let w = |i: usize| u32::from_le_bytes(msg[4 * i..4 * i + 4].try_into().unwrap()) as usize;
        (
            None,
            TreeParams {
                k,
                n: w(0),
                m: w(1),
                d_pad: w(2),
            },
        )
    };
    p.pdte_setup(&params, arr.as_ref())
}

fn read_queries(p: &Party, features: Option<&Path>, pr: &TreeParams) -> Result<Option<Vec<Vec<u64>>>> {
    if p.id() != FEATURE_OWNER {
        if features.is_some() {
            log::warn!("--features ignored: only P1 submits queries");
        }
        return Ok(None);
    }
    let path = features.ok_or_else(|| Error::Config("the feature owner (P1) needs --features".into()))?;
    Ok(Some(parse_features(&fs::read_to_string(path)?, pr.n, pr.k)?))
}

fn announce(p: &mut Party, count: usize) -> Result<()> {
    let sid = p.session(Tag::Params);
    for peer in [p.id().next(), p.id().prev()] {
        p.send_bytes(peer, sid, (count as u32).to_le_bytes().to_vec())?;
    }
    Ok(())
}

/// One batch: the feature owner announces its size, everyone preprocesses
/// and evaluates. Returns the batch size and, at the feature owner, the labels.
fn eval_batch(
    p: &mut Party,
    state: &SetupState,
    session: &mut PdteSession,
    queries: Option<&[Vec<u64>]>,
) -> Result<(usize, Vec<u64>)> {
    let count = if p.id() == FEATURE_OWNER {
        let qs = queries.expect("feature owner has queries");
        announce(p, qs.len())?;
        qs.len()
    } else {
        let sid = p.session(Tag::Params);
        let msg = p.recv_bytes(FEATURE_OWNER, sid)?;
        let bytes: [u8; 4] = msg
            .try_into()
            .map_err(|_| Error::Abort(crate::error::AbortReason::BadLength))?;
        u32::from_le_bytes(bytes) as usize
    };
    if count == 0 {
        return Ok((0, Vec::new()));
    }
    p.pdte_preprocess(state, session, count)?;
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let x = queries.map(|q| q[i].as_slice());
        if let Some(l) = p.pdte_eval(state, session, x)? {
            labels.push(l);
        }
    }
    Ok((count, labels))
}

/// Runs `f`, naming the phase and the last session on an abort.
fn reported<T>(p: &mut Party, f: impl FnOnce(&mut Party) -> Result<T>) -> Result<T> {
    let out = f(p);
    if let Err(e) = &out {
        if e.is_abort() {
            let (phase, last) = match p.net().log().last() {
                Some(m) => (m.phase.label(), m.session.to_string()),
                None => ("-", "-".to_string()),
            };
            eprintln!("P{}: stopped during {phase} after session {last}", p.id().index());
        }
    }
    out
}

fn emit_labels(labels: &[u64], out: Option<&Path>) -> Result<()> {
    let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
    if let Some(out) = out {
        fs::write(out, &text)?;
    }
    print!("{text}");
    Ok(())
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
