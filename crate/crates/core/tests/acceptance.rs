//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and fails the test binary if any criterion fails.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use pdte_core::bench::{bench, BenchOptions, Shape, DATASETS, MNIST_ONLINE_KB};
use pdte_core::dpf::{gen, PointFunction};
use pdte_core::error::{AbortReason, Error};
use pdte_core::gf2::BitVec;
use pdte_core::harness::{fault_matrix, first_error, run_three_parties, simulate, Outcome, Scenario, SimOptions};
use pdte_core::oselect::OsKind;
use pdte_core::pdte::{encode_tree, pad_tree, padded_size, plaintext_dte, LogicalTree};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(2, |n| n.get()).clamp(1, 8)
}

/// 200 random trees, 10 queries each, both selection kinds, against the
/// logical tree walk and the array walk.
fn functional_correctness() -> Verdict {
    const TREES: usize = 200;
    let next = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::new());
    let largest = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers().div_ceil(3).max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= TREES {
                    break;
                }
                let mut rng = ChaCha20Rng::seed_from_u64(1000 + i as u64);
                let d = rng.gen_range(1..=12usize);
                let max_m = ((1usize << (d + 1)) - 1).min(1023);
                let m = 2 * rng.gen_range(d..=(max_m - 1) / 2) + 1;
                let n = rng.gen_range(1..=64usize);
                let tree = LogicalTree::random(&mut rng, m, d, n, 16).unwrap();
                let arr = encode_tree(&tree, 16, n).unwrap();
                let queries: Vec<Vec<u64>> = (0..10)
                    .map(|_| (0..n).map(|_| rng.gen::<u16>() as u64).collect())
                    .collect();
                let want: Vec<u64> = queries.iter().map(|q| tree.eval(q)).collect();
                for os in [OsKind::Rss, OsKind::Dpf] {
                    let sc = Scenario::new(arr.clone(), queries.clone(), os, i as u64);
                    largest.fetch_max(sc.tree.m(), Ordering::Relaxed);
                    let array_walk: Vec<u64> = queries.iter().map(|q| plaintext_dte(&sc.tree, q)).collect();
                    let r = run_three_parties(&sc);
                    if r.outcome != Outcome::Completed || r.labels != want || array_walk != want {
                        failures
                            .lock()
                            .unwrap()
                            .push(format!("tree {i} (m={m}, d={d}, n={n}) {os}: {}", r.outcome.label()));
                    }
                }
            });
        }
    });
    let f = failures.into_inner().unwrap();
    verdict(
        f.is_empty(),
        format!(
            "{TREES} trees x 10 queries x 2 kinds, largest m' = {}, {} failures{}",
            largest.load(Ordering::Relaxed),
            f.len(),
            f.first().map(|e| format!(", first: {e}")).unwrap_or_default()
        ),
    )
}

/// 1000 random point functions over domains 2^3..2^12.
fn dpf_correctness() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut bad = 0;
    let mut worst_ratio = 0f64;
    for _ in 0..1000 {
        let bits = rng.gen_range(3..=12u32);
        let f = PointFunction {
            alpha: rng.gen_range(0..1u64 << bits),
            beta: rng.gen(),
            domain_bits: bits,
        };
        let (k0, k1) = gen(&f, &mut rng).unwrap();
        let (y0, y1) = (k0.eval_full(), k1.eval_full());
        let ok = y0.len() == 1 << bits
            && y0
                .iter()
                .zip(&y1)
                .enumerate()
                .all(|(x, (a, b))| a ^ b == if x as u64 == f.alpha { f.beta } else { 0 });
        // c * kappa * (log m + 1) + output bits, with c = 4 and kappa = 128.
        let bound = 4 * 128 * (bits as usize + 1) + 128;
        let size = k0.size_bits().max(k1.size_bits());
        worst_ratio = worst_ratio.max(size as f64 / bound as f64);
        if !ok || size > bound {
            bad += 1;
        }
    }
    verdict(
        bad == 0,
        format!("1000 keys, {bad} wrong, largest key at {:.2} of the size bound", worst_ratio),
    )
}

/// Every site times every corrupt party, with a zero and a nonzero error.
fn detection_matrix() -> Verdict {
    let mut total = 0;
    let mut bad = Vec::new();
    let mut ell = 0;
    for os in [OsKind::Dpf, OsKind::Rss] {
        let sc = Scenario::random(5, 101, 7, 8, 16, 1, os).unwrap();
        ell = 4 * sc.tree.k + sc.tree.n;
        for row in fault_matrix(&sc) {
            total += 1;
            let ok = if row.error != 0 {
                row.outcome.starts_with("aborted") && !row.result_released && row.fired
            } else {
                row.outcome == "completed" && row.correct && row.fired
            };
            if !ok {
                bad.push(format!("{os} {}", row.csv()));
            }
        }
    }
    verdict(
        bad.is_empty() && ell >= 64,
        format!(
            "{total} rows at ell = {ell}, {} wrong{}",
            bad.len(),
            bad.first().map(|e| format!(", first: {e}")).unwrap_or_default()
        ),
    )
}

/// False-pass rate of the MAC check over an 8-bit field.
fn mac_soundness() -> Verdict {
    const TRIALS: u64 = 10_000;
    const ELL: usize = 8;
    let runs = simulate(&SimOptions::seeded(4), |p| {
        let key = p.mac_keygen(ELL)?;
        let mut passes = 0u64;
        for t in 0..TRIALS {
            // Same error at every party, so the corruption is consistent.
            let mut rng = ChaCha20Rng::seed_from_u64(t);
            let x = p.rand_share(4 * ELL)?;
            let sigma = p.mac_attach(&x, &key)?;
            let (ex, es) = loop {
                let ex = BitVec::random(&mut rng, 4 * ELL);
                let es = BitVec::random(&mut rng, 4 * ELL);
                if !(ex.is_zero() && es.is_zero()) {
                    break (ex, es);
                }
            };
            match p.mac_check(&x.xor_public(&ex), &sigma.xor_public(&es), &key) {
                Ok(()) => passes += 1,
                Err(Error::Abort(AbortReason::MacCheckFailed)) => {}
                Err(e) => return Err(e),
            }
        }
        // Sanity: an untouched pair passes.
        let y = p.rand_share(ELL)?;
        let sy = p.mac_attach(&y, &key)?;
        p.mac_check(&y, &sy, &key)?;
        Ok(passes)
    });
    if let Some(e) = first_error(&runs) {
        return verdict(false, format!("run failed: {e}"));
    }
    let passes = *runs[0].result.as_ref().unwrap();
    let rate = passes as f64 / TRIALS as f64;
    verdict(
        rate <= 0.02,
        format!("{passes} of {TRIALS} corrupted checks passed ({:.2}%)", rate * 100.0),
    )
}

/// Online bytes barely move from 2^6 to 2^13 entries with DPF tokens, while
/// RSS tokens cost far more offline.
fn sublinearity() -> Verdict {
    let shape = |m: usize| Shape {
        name: format!("m{m}"),
        d: 16,
        n: 16,
        m,
        k: 16,
    };
    let opts = |os| BenchOptions {
        os,
        reps: 2,
        seed: 5,
        delay: None,
        d_pad: Some(16),
    };
    let run = || -> pdte_core::error::Result<Verdict> {
        let small = bench(&shape(63), &opts(OsKind::Dpf))?;
        let big = bench(&shape(8191), &opts(OsKind::Dpf))?;
        let big_rss = bench(&shape(8191), &opts(OsKind::Rss))?;
        let growth = big.online_bytes as f64 / small.online_bytes as f64;
        let offline = big_rss.offline_bytes as f64 / big.offline_bytes as f64;
        Ok(verdict(
            small.m_pad == 64 && big.m_pad == 8192 && growth < 1.2 && offline >= 10.0,
            format!(
                "dpf online {} B at 2^6 vs {} B at 2^13 ({growth:.3}x); offline rss {} B vs dpf {} B at 2^13 ({offline:.1}x)",
                small.online_bytes, big.online_bytes, big_rss.offline_bytes, big.offline_bytes
            ),
        ))
    };
    run().unwrap_or_else(|e| verdict(false, format!("bench failed: {e}")))
}

/// The MNIST shape: online traffic near the published figure, and a
/// tractable wall time. Returns criteria 6 and 7.
fn mnist_shape() -> (Verdict, Verdict) {
    let sc = Scenario::random(9, 4179, 20, 784, 64, 1, OsKind::Dpf).unwrap();
    let start = Instant::now();
    let r = run_three_parties(&sc);
    let secs = start.elapsed().as_secs_f64();
    let kb = r.online_bytes as f64 / 1000.0;
    let ratio = kb / MNIST_ONLINE_KB;
    let shape_ok = sc.tree.m() == 8192 && sc.tree.d_pad == 20 && sc.tree.n == 784 && sc.tree.k == 64;
    (
        verdict(
            r.correct() && shape_ok && (0.25..=4.0).contains(&ratio),
            format!("online {kb:.1} KB vs {MNIST_ONLINE_KB} KB ({ratio:.2}x), label correct: {}", r.correct()),
        ),
        verdict(
            r.correct() && secs < 60.0,
            format!("setup, preprocessing and one query in {secs:.1} s"),
        ),
    )
}

/// Padding reproduces each dataset's (m, m') pair.
fn padding() -> Verdict {
    let mut bad = Vec::new();
    for (i, &(name, d, n, m, m_pad)) in DATASETS.iter().enumerate() {
        let mut rng = ChaCha20Rng::seed_from_u64(i as u64);
        let tree = LogicalTree::random(&mut rng, m, d, n, 16).unwrap();
        let arr = encode_tree(&tree, 16, n).unwrap();
        let padded = pad_tree(&arr, &mut rng);
        let x: Vec<u64> = (0..n).map(|_| rng.gen::<u16>() as u64).collect();
        if arr.m() != m
            || padded_size(m) != m_pad
            || padded.m() != m_pad
            || padded.depth != d
            || plaintext_dte(&padded, &x) != tree.eval(&x)
        {
            bad.push(format!("{name}: {m} -> {}", padded.m()));
        }
    }
    let pairs: Vec<String> = DATASETS.iter().map(|d| format!("{}->{}", d.3, d.4)).collect();
    verdict(bad.is_empty(), format!("{} ({} wrong)", pairs.join(", "), bad.len()))
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; ignore them.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut results: Vec<(usize, Verdict)> = Vec::new();
    let mut record = |n: usize, name: &str, v: Verdict, secs: f64| {
        println!(
            "{} criterion {n} {name}: {} [{secs:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((n, v));
    };
    let criteria: [(usize, &str, fn() -> Verdict); 5] = [
        (1, "functional-correctness", functional_correctness),
        (2, "dpf-correctness", dpf_correctness),
        (3, "detection-matrix", detection_matrix),
        (4, "mac-soundness", mac_soundness),
        (5, "sublinearity", sublinearity),
    ];
    for (n, name, f) in criteria {
        let t = Instant::now();
        let v = f();
        record(n, name, v, t.elapsed().as_secs_f64());
    }
    let t = Instant::now();
    let (c6, c7) = mnist_shape();
    let secs = t.elapsed().as_secs_f64();
    record(6, "mnist-communication", c6, secs);
    record(7, "mnist-runtime", c7, secs);
    let t = Instant::now();
    let v = padding();
    record(8, "padding", v, t.elapsed().as_secs_f64());
    drop(record);
    let failed: Vec<usize> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
