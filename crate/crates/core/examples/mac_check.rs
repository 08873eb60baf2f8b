//! Tagging shared values with a shared MAC key and catching a tampered tag.

use pdte_core::gf2::BitVec;
use pdte_core::harness::{simulate, SimOptions};

fn main() {
    let runs = simulate(&SimOptions::seeded(5), |p| {
        let key = p.mac_keygen(40)?;
        let x = p.rand_share(40 * 8)?;
        let sigma = p.mac_attach(&x, &key)?;
        let honest = p.mac_check(&x, &sigma, &key).is_ok();
        let forged = sigma.xor_public(&BitVec::from_u64(1, 40 * 8));
        let caught = p.mac_check(&x, &forged, &key).is_err();
        Ok((honest, caught))
    });
    for r in &runs {
        match &r.result {
            Ok((honest, caught)) => println!("{}: honest tags pass = {honest}, forged tag caught = {caught}", r.id),
            Err(e) => println!("{}: {e}", r.id),
        }
    }
}
