use pdte_core::error::{AbortReason, Error, Result};
use pdte_core::gf2::{BitVec, FieldCtx};
use pdte_core::harness::{first_error, simulate, FaultSpec, PartyRun, SimOptions, Site};
use pdte_core::mac::{public_coefficients, MacKey};
use pdte_core::rss::Party;
use pdte_core::transport::PartyId;

fn ok<T: Clone>(runs: &[PartyRun<T>; 3]) -> [T; 3] {
    if let Some(e) = first_error(runs) {
        panic!("run failed: {e}");
    }
    [0, 1, 2].map(|i| runs[i].result.as_ref().unwrap().clone())
}

fn mac_failed<T>(runs: &[PartyRun<T>; 3]) -> bool {
    runs.iter().any(|r| {
        r.result.as_ref().err().and_then(|e| e.abort_reason()) == Some(AbortReason::MacCheckFailed)
    })
}

fn tag_and_check(p: &mut Party, ell: usize, chunks: usize) -> Result<MacKey> {
    let key = p.mac_keygen(ell)?;
    let x = p.rand_share(ell * chunks)?;
    let s = p.mac_attach(&x, &key)?;
    p.mac_check(&x, &s, &key)?;
    Ok(key)
}

#[test]
fn honest_tags_pass() {
    for (ell, chunks) in [(8, 1), (40, 17), (72, 100), (200, 3)] {
        let runs = simulate(&SimOptions::seeded(ell as u64), |p| tag_and_check(p, ell, chunks).map(|_| ()));
        ok(&runs);
    }
}

#[test]
fn tags_are_alpha_times_value() {
    let runs = simulate(&SimOptions::seeded(1), |p| {
        let key = p.mac_keygen(64)?;
        let x = p.rand_share(128)?;
        let s = p.mac_attach(&x, &key)?;
        Ok((p.open(&key.alpha)?, p.open(&x)?, p.open(&s)?))
    });
    let [(alpha, x, s), _, _] = ok(&runs);
    let ctx = FieldCtx::new(64);
    for j in 0..2 {
        assert_eq!(ctx.mul(&alpha, &x.slice(64 * j, 64)), s.slice(64 * j, 64));
    }
}

#[test]
fn pairs_check_together() {
    let runs = simulate(&SimOptions::seeded(2), |p| {
        let key = p.mac_keygen(16)?;
        let xs = [p.rand_share(16)?, p.rand_share(48)?, p.rand_share(32)?];
        let pairs = p.mac_attach_many(&xs, &key)?;
        assert_eq!(pairs.iter().map(|q| q.sigma.width()).collect::<Vec<_>>(), [16, 48, 32]);
        p.mac_check_pairs(&pairs, &key)
    });
    ok(&runs);
}

#[test]
fn empty_list_passes() {
    let runs = simulate(&SimOptions::seeded(3), |p| {
        let key = p.mac_keygen(16)?;
        p.mac_check_pairs(&[], &key)
    });
    ok(&runs);
}

#[test]
fn tags_are_linear() {
    // Tag(x) ^ Tag(y) checks against x ^ y with no interaction.
    let runs = simulate(&SimOptions::seeded(4), |p| {
        let key = p.mac_keygen(32)?;
        let x = p.rand_share(64)?;
        let y = p.rand_share(64)?;
        let sx = p.mac_attach(&x, &key)?;
        let sy = p.mac_attach(&y, &key)?;
        p.mac_check(&x.xor(&y), &sx.xor(&sy), &key)
    });
    ok(&runs);
}

#[test]
fn corrupt_attach_is_caught() {
    for party in PartyId::ALL {
        let opts = SimOptions {
            fault: Some(FaultSpec::new(Site::MacAttach, party, 1 << 5)),
            ..SimOptions::seeded(5)
        };
        let runs = simulate(&opts, |p| tag_and_check(p, 40, 10));
        assert!(mac_failed(&runs), "corrupt {party}");
    }
}

#[test]
fn shifted_value_is_caught() {
    let runs = simulate(&SimOptions::seeded(6), |p| {
        let key = p.mac_keygen(64)?;
        let x = p.rand_share(64 * 4)?;
        let s = p.mac_attach(&x, &key)?;
        let mut e = BitVec::zeros(64 * 4);
        e.set(130, true);
        p.mac_check(&x.xor_public(&e), &s, &key)
    });
    assert!(mac_failed(&runs));
}

#[test]
fn misaligned_inputs_are_refused() {
    let runs = simulate(&SimOptions::seeded(7), |p| {
        let key = p.mac_keygen(16)?;
        let x = p.rand_share(20)?;
        let bad_attach = matches!(p.mac_attach(&x, &key), Err(Error::Config(_)));
        let y = p.rand_share(32)?;
        let s = p.rand_share(16)?;
        let bad_check = matches!(p.mac_check(&y, &s, &key), Err(Error::Config(_)));
        Ok(bad_attach && bad_check)
    });
    assert_eq!(ok(&runs), [true; 3]);
}

#[test]
fn coefficients_are_nonzero_and_seeded() {
    let ctx = FieldCtx::new(8);
    let a = public_coefficients(&ctx, &[1; 16], 500);
    let b = public_coefficients(&ctx, &[1; 16], 500);
    let c = public_coefficients(&ctx, &[2; 16], 500);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!((0..500).all(|j| !a.slice(8 * j, 8).is_zero()));
}

#[test]
fn small_field_false_pass_rate() {
    // With ell = 8 a forged tag slips through about 2/256 of the time.
    let trials = 2000;
    let runs = simulate(&SimOptions::seeded(8), |p| {
        let mut passed = 0;
        let key = p.mac_keygen(8)?;
        for _ in 0..trials {
            let x = p.rand_share(8)?;
            let s = p.mac_attach(&x, &key)?;
            let forged = s.xor_public(&BitVec::from_u64(1, 8));
            match p.mac_check(&x, &forged, &key) {
                Ok(()) => passed += 1,
                Err(Error::Abort(AbortReason::MacCheckFailed)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(passed)
    });
    let passed = ok(&runs)[0];
    assert!(passed as f64 / trials as f64 <= 2.0 / 256.0 + 0.008, "{passed} of {trials}");
}
