//! Replicated sharing among three in-process parties: input, XOR, AND, open.

use pdte_core::gf2::BitVec;
use pdte_core::harness::{first_error, simulate, SimOptions};
use pdte_core::transport::PartyId;

fn main() {
    let runs = simulate(&SimOptions::seeded(1), |p| {
        let a = BitVec::from_u64(0b1100, 4);
        let b = BitVec::from_u64(0b1010, 4);
        let x = p.share_input((p.id() == PartyId::P0).then_some(&a), PartyId::P0, 4)?;
        let y = p.share_input((p.id() == PartyId::P1).then_some(&b), PartyId::P1, 4)?;
        let xor = x.xor(&y);
        let and = p.and_verified(&x, &y)?;
        Ok((p.open(&xor)?.to_u64(), p.open(&and)?.to_u64()))
    });
    if let Some(e) = first_error(&runs) {
        eprintln!("failed: {e}");
        std::process::exit(1);
    }
    for r in &runs {
        let (xor, and) = r.result.as_ref().unwrap();
        println!("{}: xor = {xor:04b}, and = {and:04b}, sent {} bytes", r.id, r.stats.total_sent());
    }
}
