//! Selecting a shared table entry at a shared index with both selection kinds.

use pdte_core::gf2::BitVec;
use pdte_core::harness::{first_error, simulate, SimOptions};
use pdte_core::oselect::{OsKind, OsPools, RssArray};
use pdte_core::transport::{PartyId, Phase};

fn main() {
    let words: Vec<u64> = (0..64).map(|j| j * j + 1).collect();
    let mut table = BitVec::zeros(0);
    for &w in &words {
        table.append(&BitVec::from_u64(w, 16));
    }
    for kind in [OsKind::Rss, OsKind::Dpf] {
        let runs = simulate(&SimOptions::seeded(4), |p| {
            let dealer = PartyId::P0;
            let t = p.share_input((p.id() == dealer).then_some(&table), dealer, table.len())?;
            let arr = RssArray::from_packed(&t, 16);
            let mut pools = OsPools::new(kind, words.len());
            p.set_phase(Phase::Preprocess);
            p.os_refill(&mut pools, 3)?;
            p.set_phase(Phase::Online);
            let mut out = Vec::new();
            for j in [7u64, 0, 63] {
                let v = BitVec::from_u64(j, 6);
                let idx = p.share_input((p.id() == dealer).then_some(&v), dealer, 6)?;
                let e = p.os_select(&mut pools, &arr, &idx)?;
                out.push(p.open(&e)?.to_u64());
            }
            Ok(out)
        });
        if let Some(e) = first_error(&runs) {
            eprintln!("{kind}: {e}");
            std::process::exit(1);
        }
        let online = runs[0].stats.online_bytes();
        println!("{kind}: selected {:?}, online bytes at P0: {online}", runs[0].result.as_ref().unwrap());
    }
}
