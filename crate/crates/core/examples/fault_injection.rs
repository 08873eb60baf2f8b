//! Injects one corruption per site and prints how each run ends.

use pdte_core::harness::{fault_matrix, run_three_parties, FaultSpec, Scenario};
use pdte_core::oselect::OsKind;

fn main() {
    let sc = Scenario::random(7, 15, 3, 4, 12, 2, OsKind::Dpf).unwrap();
    let honest = run_three_parties(&sc);
    println!("honest: {} labels {:?}", honest.outcome.label(), honest.labels);

    for spec in ["os-reshare:2:0x1", "mul-reshare:0:0x1:5", "dpf-key-class(0):2:1", "share-delta:0:1"] {
        let f: FaultSpec = spec.parse().unwrap();
        let r = run_three_parties(&sc.clone().with_fault(f));
        println!("{spec:<22} fired = {:<5} {}", r.fired, r.outcome.label());
    }

    let rows = fault_matrix(&sc);
    let aborted = rows.iter().filter(|r| r.outcome.starts_with("aborted")).count();
    let wrong = rows.iter().filter(|r| !r.correct && !r.outcome.starts_with("aborted")).count();
    println!("matrix: {} rows, {aborted} aborted, {wrong} wrong labels", rows.len());
}
