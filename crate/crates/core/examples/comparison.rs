//! Secure less-than and equality on shared 16-bit words.

use pdte_core::gf2::BitVec;
use pdte_core::harness::{first_error, simulate, SimOptions};
use pdte_core::transport::PartyId;

fn main() {
    let pairs = [(3u64, 9u64), (9, 3), (500, 500), (0, 65535)];
    let runs = simulate(&SimOptions::seeded(2), |p| {
        let mut out = Vec::new();
        for &(a, b) in &pairs {
            let (va, vb) = (BitVec::from_u64(a, 16), BitVec::from_u64(b, 16));
            let x = p.share_input((p.id() == PartyId::P0).then_some(&va), PartyId::P0, 16)?;
            let t = p.share_input((p.id() == PartyId::P0).then_some(&vb), PartyId::P0, 16)?;
            let lt = p.lt_compare(&x, &t)?;
            let eq = p.eq_test(&x, b)?;
            out.push((p.open(&lt)?.get(0), p.open(&eq)?.get(0)));
        }
        p.verify_pending()?;
        Ok(out)
    });
    if let Some(e) = first_error(&runs) {
        eprintln!("failed: {e}");
        std::process::exit(1);
    }
    let got = runs[0].result.as_ref().unwrap();
    for (&(a, b), &(lt, eq)) in pairs.iter().zip(got) {
        println!("{a:>5} < {b:<5} = {lt:<5}  {a:>5} == {b:<5} = {eq}");
    }
}
