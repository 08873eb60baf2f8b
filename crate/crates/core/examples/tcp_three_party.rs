//! The same scenario over loopback TCP and in memory give one transcript.

use pdte_core::harness::{run_three_parties, run_three_parties_tcp, Scenario};
use pdte_core::oselect::OsKind;

fn main() {
    let sc = Scenario::random(8, 31, 5, 6, 16, 3, OsKind::Rss).unwrap();
    let mem = run_three_parties(&sc);
    let tcp = match run_three_parties_tcp(&sc) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("tcp run failed: {e}");
            std::process::exit(1);
        }
    };
    println!("memory: {} {:?} {:.1} ms", mem.outcome.label(), mem.labels, mem.wall_ms);
    println!("tcp:    {} {:?} {:.1} ms", tcp.outcome.label(), tcp.labels, tcp.wall_ms);
    println!("same transcript digest: {}", mem.digest == tcp.digest);
    println!("online bytes: {}", tcp.online_bytes);
}
