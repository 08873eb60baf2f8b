use std::path::Path;

use pdte_core::dpf::MalformedKind;
use pdte_core::harness::{
    fault_matrix, matrix_csv, run_three_parties, run_three_parties_tcp, FaultSpec, Outcome, Scenario, Site,
    CANONICAL_ERROR, MATRIX_HEADER,
};
use pdte_core::oselect::OsKind;
use pdte_core::rss::VerifyMode;
use pdte_core::transport::{PartyId, Phase};

fn small(os: OsKind) -> Scenario {
    Scenario::random(21, 11, 4, 3, 12, 2, os).unwrap()
}

fn reason(sc: &Scenario) -> Option<(String, Option<Phase>)> {
    match run_three_parties(sc).outcome {
        Outcome::Completed => None,
        Outcome::Aborted { reason, phase, .. } => Some((reason, phase)),
    }
}

#[test]
fn honest_runs_are_deterministic() {
    for os in [OsKind::Rss, OsKind::Dpf] {
        let a = run_three_parties(&small(os));
        let b = run_three_parties(&small(os));
        assert!(a.correct() && b.correct());
        assert_eq!(a.digest, b.digest);
        assert_eq!(a.online_bytes, b.online_bytes);
        let mut other = small(os);
        other.seed += 1;
        assert_ne!(run_three_parties(&other).digest, a.digest);
    }
}

#[test]
fn tcp_transcript_matches_in_process() {
    for os in [OsKind::Rss, OsKind::Dpf] {
        let sc = small(os);
        let mem = run_three_parties(&sc);
        let tcp = run_three_parties_tcp(&sc).unwrap();
        assert!(tcp.correct());
        assert_eq!(tcp.digest, mem.digest, "{os}");
        assert_eq!(tcp.stats, mem.stats, "{os}");
    }
}

#[test]
fn every_selection_step_is_covered_by_the_mac() {
    let sc = small(OsKind::Dpf);
    let steps = sc.tree.d_pad as u64 * sc.queries.len() as u64;
    for occ in 0..steps {
        let f = FaultSpec::new(Site::OsReshare, PartyId::P2, 1).at(occ);
        let r = run_three_parties(&sc.clone().with_fault(f));
        assert!(r.fired, "occurrence {occ}");
        assert!(!r.result_released || occ >= sc.tree.d_pad as u64, "occurrence {occ}");
        assert_eq!(r.outcome.label(), "aborted(mac-check-failed)", "occurrence {occ}");
        // Labels released before the faulty query are still right.
        assert_eq!(r.labels, r.expected[..r.labels.len()], "occurrence {occ}");
    }
}

#[test]
fn multiplication_faults_abort_wherever_they_land() {
    let sc = small(OsKind::Rss);
    for occ in [0, 1, 7, 40, 200, 1000] {
        let f = FaultSpec::new(Site::MulReshare, PartyId::P0, CANONICAL_ERROR).at(occ);
        let r = run_three_parties(&sc.clone().with_fault(f));
        if !r.fired {
            continue;
        }
        assert!(r.outcome.is_abort(), "occurrence {occ}: {:?}", r.outcome);
        assert_eq!(r.labels, r.expected[..r.labels.len()]);
    }
}

#[test]
fn online_faults_stop_before_any_result() {
    let sc = small(OsKind::Dpf);
    for site in [Site::MulReshare, Site::OsReshare, Site::OpenShare] {
        let f = FaultSpec::new(site, PartyId::P1, 1).in_phase(Phase::Online);
        let r = run_three_parties(&sc.clone().with_fault(f));
        assert!(r.fired && r.outcome.is_abort(), "{site}");
        assert!(!r.result_released, "{site}");
        assert!(r.labels.is_empty(), "{site}");
    }
}

#[test]
fn zero_error_faults_change_nothing() {
    let sc = small(OsKind::Dpf);
    let honest = run_three_parties(&sc);
    for site in [Site::MulReshare, Site::OsReshare, Site::MacAttach, Site::ReconShare] {
        let r = run_three_parties(&sc.clone().with_fault(FaultSpec::new(site, PartyId::P2, 0)));
        assert!(r.fired && r.correct(), "{site}");
        assert_eq!(r.digest, honest.digest, "{site}");
    }
}

#[test]
fn bad_keys_abort_during_token_preprocessing() {
    // m' = 128 is above the direct-vector threshold, so real keys are dealt.
    let sc = Scenario::random(24, 101, 7, 3, 12, 1, OsKind::Dpf).unwrap();
    assert!(sc.tree.m() > sc.engine.dpf_direct_threshold);
    for kind in MalformedKind::ALL {
        // P2 deals rotation 0.
        let f = FaultSpec::new(Site::DpfKey(kind), PartyId::P2, 1);
        let (why, phase) = reason(&sc.clone().with_fault(f)).unwrap_or_else(|| panic!("{kind:?} accepted"));
        assert_eq!(phase, Some(Phase::OsPreprocess), "{kind:?}: {why}");
        assert!(
            ["vdpf-reject", "unit-check-reject", "malformed-key"].contains(&why.as_str()),
            "{kind:?}: {why}"
        );
    }
}

#[test]
fn bad_direct_vectors_abort() {
    let sc = small(OsKind::Dpf);
    assert!(sc.tree.m() <= sc.engine.dpf_direct_threshold);
    let f = FaultSpec::new(Site::DpfKey(MalformedKind::ALL[0]), PartyId::P2, 1);
    let (why, phase) = reason(&sc.with_fault(f)).expect("abort");
    assert_eq!(phase, Some(Phase::OsPreprocess), "{why}");
    assert!(["vdpf-reject", "unit-check-reject"].contains(&why.as_str()), "{why}");
}

#[test]
fn wrong_index_half_is_caught() {
    let sc = small(OsKind::Dpf);
    let f = FaultSpec::new(Site::RdxShare, PartyId::P0, 1);
    let (why, phase) = reason(&sc.with_fault(f)).expect("abort");
    assert_eq!((why.as_str(), phase), ("unit-check-reject", Some(Phase::OsPreprocess)));
}

#[test]
fn inconsistent_inputs_are_caught() {
    let sc = small(OsKind::Rss);
    let f = FaultSpec::new(Site::ShareDelta, PartyId::P0, 1);
    let (why, phase) = reason(&sc.clone().with_fault(f)).expect("abort");
    assert_eq!((why.as_str(), phase), ("delta-mismatch", Some(Phase::Setup)));
    let mut sc = sc.with_fault(FaultSpec::new(Site::ShareDelta, PartyId::P1, 1));
    sc.feature_owner = PartyId::P1;
    let (why, phase) = reason(&sc).expect("abort");
    assert_eq!((why.as_str(), phase), ("delta-mismatch", Some(Phase::Online)));
}

#[test]
fn small_fault_matrix_never_yields_a_wrong_label() {
    let mut sc = Scenario::random(22, 5, 2, 2, 10, 1, OsKind::Dpf).unwrap();
    sc.engine.verify = VerifyMode::Immediate;
    let rows = fault_matrix(&sc);
    let sites = Site::all().len();
    assert_eq!(rows.len(), sites * 3 * 2);
    for r in &rows {
        if r.error == 0 {
            assert!(r.correct, "{}", r.csv());
        } else {
            assert!(r.outcome.starts_with("aborted") || r.correct, "{}", r.csv());
        }
    }
    let csv = matrix_csv(&rows);
    assert!(csv.starts_with(MATRIX_HEADER));
    assert_eq!(csv.lines().count(), rows.len() + 1);
}

#[test]
fn rss_matrix_skips_key_sites() {
    let sc = Scenario::random(23, 3, 1, 1, 8, 1, OsKind::Rss).unwrap();
    let rows = fault_matrix(&sc);
    assert!(rows.iter().all(|r| !r.site.starts_with("dpf-key") && r.site != "rdx-share"));
}

#[test]
fn fault_specs_parse() {
    let f: FaultSpec = "os-reshare:2:0x1:3".parse().unwrap();
    assert_eq!(f, FaultSpec::new(Site::OsReshare, PartyId::P2, 1).at(3));
    let f: FaultSpec = "dpf-key-class(4):1:1".parse().unwrap();
    assert_eq!(f.site, Site::DpfKey(MalformedKind::ALL[4]));
    for bad in ["", "nowhere:1:1", "mul-reshare:3:1", "mul-reshare:1:zz", "dpf-key-class(99):0:1"] {
        assert!(bad.parse::<FaultSpec>().is_err(), "{bad:?}");
    }
}

fn with_files(scn: &str) -> pdte_core::error::Result<Scenario> {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("t.tree"),
        "pdte-tree 1\nk 8\nn 2\n0 10 1 2 0 0\n1 0 0 0 -1 7\n2 0 0 0 -1 9\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("q.csv"), "5,0\n12,0\n").unwrap();
    Scenario::parse(scn, dir.path())
}

#[test]
fn scenario_files() {
    let sc = with_files("tree = t.tree\nfeatures = q.csv\nos = rss\nseed = 3\nd_pad = 2\nverify = deferred\n").unwrap();
    assert_eq!((sc.os, sc.seed, sc.tree.d_pad, sc.queries.len()), (OsKind::Rss, 3, 2, 2));
    assert_eq!(sc.engine.verify, VerifyMode::Deferred);
    let r = run_three_parties(&sc);
    assert_eq!(r.labels, vec![7, 9]);

    let sc = with_files("tree = t.tree\nfeatures = q.csv\nfault = mac-attach:0:0x5\nfeature_owner = 2\n").unwrap();
    assert_eq!(sc.os, OsKind::Dpf);
    assert_eq!(sc.feature_owner, PartyId::P2);
    assert!(sc.fault.is_some());

    for bad in [
        "features = q.csv\n",
        "tree = t.tree\nfeatures = q.csv\nseed = x\n",
        "tree = t.tree\nfeatures = q.csv\nverify = later\n",
        "tree = t.tree\nfeatures = q.csv\nd_pad = 0\n",
        "tree = t.tree\nfeatures = q.csv\nthis line has no equals sign\n",
        "tree = missing.tree\nfeatures = q.csv\n",
    ] {
        assert!(with_files(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn bundled_scenario_runs() {
    let sc = Scenario::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/example.scn")).unwrap();
    let r = run_three_parties(&sc);
    assert!(r.correct());
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["outcome"]["status"], "completed");
    assert_eq!(json["labels"], serde_json::json!([7, 3, 12, 7, 9]));
}
