use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pdte_core::error::AbortReason;
use pdte_core::gf2::{BitVec, FieldCtx};
use pdte_core::harness::{first_error, simulate, FaultSpec, PartyRun, SimOptions, Site};
use pdte_core::rss::{reveal, share_value, RssShare, TwoShare};
use pdte_core::transport::{Direction, PartyId, Tag};

fn ok<T: Clone>(runs: &[PartyRun<T>; 3]) -> [T; 3] {
    if let Some(e) = first_error(runs) {
        panic!("run failed: {e}");
    }
    [0, 1, 2].map(|i| runs[i].result.as_ref().unwrap().clone())
}

fn faulty(site: Site, party: PartyId, error: u64) -> SimOptions {
    SimOptions {
        seed: 11,
        fault: Some(FaultSpec::new(site, party, error)),
        ..Default::default()
    }
}

fn aborted_with<T>(runs: &[PartyRun<T>; 3], reason: AbortReason) -> bool {
    runs.iter()
        .any(|r| r.result.as_ref().err().and_then(|e| e.abort_reason()) == Some(reason.clone()))
}

#[test]
fn random_shares_are_consistent_and_fresh() {
    let runs = simulate(&SimOptions::seeded(1), |p| Ok((p.rand_share(64)?, p.rand_share(64)?)));
    let views = ok(&runs);
    let a = reveal(&views.clone().map(|v| v.0)).unwrap();
    let b = reveal(&views.map(|v| v.1)).unwrap();
    assert_ne!(a, b);
}

#[test]
fn random_values_are_balanced() {
    // 1000 samples of 64 bits: the count of ones is within 5 sigma of half.
    let runs = simulate(&SimOptions::seeded(2), |p| {
        let mut ones = 0usize;
        for _ in 0..1000 {
            let r = p.rand_share(64)?;
            ones += p.open(&r)?.count_ones();
        }
        Ok(ones)
    });
    let ones = ok(&runs)[0] as f64;
    let n = 64_000.0;
    let sigma = (n * 0.25f64).sqrt();
    assert!((ones - n / 2.0).abs() < 5.0 * sigma, "{ones} ones in {n} bits");
}

#[test]
fn zero_shares_cancel() {
    let runs = simulate(&SimOptions::seeded(3), |p| p.zero_share(200));
    let [a, b, c] = ok(&runs);
    assert!((&(&a ^ &b) ^ &c).is_zero());
    assert!(!a.is_zero());
}

#[test]
fn open_reveals_to_all() {
    let runs = simulate(&SimOptions::seeded(4), |p| {
        let x = p.share_input(Some(&BitVec::from_u64(0x2a, 8)).filter(|_| p.id() == PartyId::P0), PartyId::P0, 8)?;
        Ok(p.open(&x)?.to_u64())
    });
    assert_eq!(ok(&runs), [0x2a; 3]);
}

#[test]
fn public_constant_opens_to_itself() {
    let runs = simulate(&SimOptions::seeded(5), |p| {
        let c = RssShare::public(p.id(), &BitVec::from_u64(0xbeef, 16));
        Ok(p.open(&c)?.to_u64())
    });
    assert_eq!(ok(&runs), [0xbeef; 3]);
}

#[test]
fn tampered_open_aborts() {
    for party in PartyId::ALL {
        let runs = simulate(&faulty(Site::OpenShare, party, 1), |p| {
            let x = p.rand_share(32)?;
            p.open(&x)
        });
        assert!(aborted_with(&runs, AbortReason::OpenMismatch), "corrupt {party}");
    }
}

#[test]
fn recon_reaches_only_the_target() {
    let runs = simulate(&SimOptions::seeded(6), |p| {
        let x = p.rand_share(40)?;
        let got = p.recon(&x, PartyId::P2)?;
        Ok((got, x))
    });
    let views = ok(&runs);
    let x = reveal(&views.clone().map(|v| v.1)).unwrap();
    assert_eq!(views[2].0.as_ref(), Some(&x));
    assert!(views[0].0.is_none() && views[1].0.is_none());
    // The helpers receive nothing.
    for r in &runs[..2] {
        assert!(r
            .log
            .iter()
            .all(|m| m.direction == Direction::Sent || m.session.tag != Tag::Recon));
    }
}

#[test]
fn lying_helper_is_caught_by_the_target() {
    let runs = simulate(&faulty(Site::ReconShare, PartyId::P0, 4), |p| {
        let x = p.rand_share(40)?;
        p.recon(&x, PartyId::P2)
    });
    assert!(matches!(
        runs[2].result.as_ref().unwrap_err().abort_reason(),
        Some(AbortReason::ReconMismatch)
    ));
}

#[test]
fn input_sharing_round_trips() {
    for (dealer, v) in [(PartyId::P0, 0u64), (PartyId::P1, 77), (PartyId::P2, 0xffff)] {
        let runs = simulate(&SimOptions::seeded(7), |p| {
            let input = BitVec::from_u64(v, 16);
            let x = p.share_input((p.id() == dealer).then_some(&input), dealer, 16)?;
            Ok(p.open(&x)?.to_u64())
        });
        assert_eq!(ok(&runs), [v; 3]);
    }
}

#[test]
fn inconsistent_dealer_aborts() {
    for dealer in PartyId::ALL {
        let runs = simulate(&faulty(Site::ShareDelta, dealer, 1), |p| {
            let input = BitVec::from_u64(5, 16);
            p.share_input((p.id() == dealer).then_some(&input), dealer, 16)
        });
        assert!(aborted_with(&runs, AbortReason::DeltaMismatch), "dealer {dealer}");
    }
}

#[test]
fn bit_products() {
    let runs = simulate(&SimOptions::seeded(8), |p| {
        // Truth table in one packed multiplication.
        let x = RssShare::public(p.id(), &BitVec::from_u64(0b1100, 4));
        let y = RssShare::public(p.id(), &BitVec::from_u64(0b1010, 4));
        let z = p.mul_bits(&x, &y)?;
        Ok(p.open(&z)?.to_u64())
    });
    assert_eq!(ok(&runs), [0b1000; 3]);
}

#[test]
fn multiplication_error_is_additive() {
    let runs = simulate(&faulty(Site::MulReshare, PartyId::P1, 0b101), |p| {
        let x = p.rand_share(16)?;
        let y = p.rand_share(16)?;
        let z = p.mul_bits(&x, &y)?;
        let (x, y, z) = (p.open(&x)?, p.open(&y)?, p.open(&z)?);
        Ok((x.to_u64() & y.to_u64()) ^ z.to_u64())
    });
    assert_eq!(ok(&runs), [0b101; 3]);
}

#[test]
fn field_products_match_local_multiplication() {
    let ell = 72;
    let runs = simulate(&SimOptions::seeded(9), |p| {
        let ctx = FieldCtx::new(ell);
        let mut bad = 0;
        for _ in 0..1000 {
            let x = p.rand_share(ell)?;
            let y = p.rand_share(ell)?;
            let z = p.mul_field(&x, &y, &ctx)?;
            let (x, y, z) = (p.open(&x)?, p.open(&y)?, p.open(&z)?);
            if ctx.mul(&x, &y) != z {
                bad += 1;
            }
        }
        Ok(bad)
    });
    assert_eq!(ok(&runs), [0; 3]);
}

#[test]
fn check_zero_on_zero_and_nonzero() {
    let runs = simulate(&SimOptions::seeded(10), |p| {
        let ctx = FieldCtx::new(8);
        let zero = RssShare::zeros(p.id(), 8);
        let z = p.check_zero(&zero, &ctx)?;
        let mut false_pass = 0;
        for _ in 0..10_000 {
            let mut x = p.rand_share(8)?;
            // Force nonzero with a public offset when needed.
            let opened = p.open(&x)?;
            if opened.is_zero() {
                x = x.xor_public(&BitVec::from_u64(1, 8));
            }
            if p.check_zero(&x, &ctx)? {
                false_pass += 1;
            }
        }
        Ok((z, false_pass))
    });
    let [(z, fp), _, _] = ok(&runs);
    assert!(z);
    // At most 2/|F| in expectation; allow sampling noise.
    assert!(fp as f64 / 10_000.0 <= 2.0 / 256.0 + 0.005, "{fp} false passes");
}

#[test]
fn check_zero_fails_on_tampered_open() {
    let opts = SimOptions {
        fault: Some(FaultSpec::new(Site::OpenShare, PartyId::P0, 1)),
        ..SimOptions::seeded(12)
    };
    let runs = simulate(&opts, |p| {
        let ctx = FieldCtx::new(64);
        p.check_zero(&RssShare::zeros(p.id(), 64), &ctx)
    });
    // P0 lies to its predecessor, so P2 sees the disagreement.
    assert!(!*runs[2].result.as_ref().unwrap());
}

#[test]
fn two_to_three_conversion_is_silent() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let x0 = BitVec::random(&mut rng, 50);
    let x1 = BitVec::random(&mut rng, 50);
    let x = &x0 ^ &x1;
    for dealer in PartyId::ALL {
        let runs = simulate(&SimOptions::seeded(13), |p| {
            let before = p.stats().total_sent();
            let me = p.id();
            let half = if me == dealer.next() {
                Some(TwoShare { holder: me, peer: dealer.prev(), value: x0.clone() })
            } else if me == dealer.prev() {
                Some(TwoShare { holder: me, peer: dealer.next(), value: x1.clone() })
            } else {
                None
            };
            let s = p.t2r(dealer, half.as_ref(), (me == dealer).then_some((&x0, &x1)), 50)?;
            let sent = p.stats().total_sent() - before;
            Ok((s, sent))
        });
        let views = ok(&runs);
        assert!(views.iter().all(|v| v.1 == 0));
        assert_eq!(reveal(&views.map(|v| v.0)).unwrap(), x);
    }
}

#[derive(Clone, Debug)]
enum Op {
    Xor(usize, usize),
    And(usize, usize),
    Scale(usize, u64),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0usize..8, 0usize..8).prop_map(|(a, b)| Op::Xor(a, b)),
        (0usize..8, 0usize..8).prop_map(|(a, b)| Op::And(a, b)),
        (0usize..8, any::<u64>()).prop_map(|(a, c)| Op::Scale(a, c)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random circuits of depth 5 keep the sharing consistent and compute
    /// the same value as the plain circuit.
    #[test]
    fn circuits_keep_shares_consistent(inputs in proptest::collection::vec(any::<u64>(), 4),
                                       layers in proptest::collection::vec(proptest::collection::vec(op(), 1..4), 5)) {
        let mut rng = ChaCha20Rng::seed_from_u64(inputs[0]);
        let shared: Vec<[RssShare; 3]> = inputs.iter().map(|&v| share_value(&BitVec::from_u64(v, 64), &mut rng)).collect();
        let ctx = FieldCtx::new(64);
        let runs = simulate(&SimOptions::seeded(inputs[1]), |p| {
            let mut wires: Vec<RssShare> = shared.iter().map(|s| s[p.id().index()].clone()).collect();
            for layer in &layers {
                for o in layer {
                    let n = wires.len();
                    let w = match *o {
                        Op::Xor(a, b) => wires[a % n].xor(&wires[b % n]),
                        Op::And(a, b) => p.mul_bits(&wires[a % n], &wires[b % n])?,
                        Op::Scale(a, c) => wires[a % n].scale(&ctx, &BitVec::from_u64(c, 64)),
                    };
                    wires.push(w);
                }
            }
            Ok(wires)
        });
        let views = ok(&runs);
        let mut plain: Vec<u64> = inputs.clone();
        for layer in &layers {
            for o in layer {
                let n = plain.len();
                let v = match *o {
                    Op::Xor(a, b) => plain[a % n] ^ plain[b % n],
                    Op::And(a, b) => plain[a % n] & plain[b % n],
                    Op::Scale(a, c) => ctx.mul(&BitVec::from_u64(plain[a % n], 64), &BitVec::from_u64(c, 64)).to_u64(),
                };
                plain.push(v);
            }
        }
        for (j, want) in plain.iter().enumerate() {
            let w = [0, 1, 2].map(|i| views[i][j].clone());
            prop_assert_eq!(reveal(&w).unwrap().to_u64(), *want);
        }
    }
}
