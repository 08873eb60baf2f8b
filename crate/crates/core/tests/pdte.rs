use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use pdte_core::error::{Error, Result};
use pdte_core::harness::{first_error, run_three_parties, simulate, Outcome, PartyRun, Scenario, SimOptions};
use pdte_core::oselect::OsKind;
use pdte_core::pdte::format::{
    array_from_bytes, array_to_bytes, parse_features, parse_tree, write_features, write_tree,
};
use pdte_core::pdte::{
    encode_tree, pad_tree, padded_size, plaintext_dte, LogicalTree, PdteSession, SetupState, TreeArray,
    TreeNode, TreeParams, FEATURE_OWNER, MODEL_OWNER,
};
use pdte_core::transport::Phase;

const KINDS: [OsKind; 2] = [OsKind::Rss, OsKind::Dpf];

const THREE_NODES: &str = "pdte-tree 1\nk 8\nn 2\n0 10 1 2 0 0\n1 0 0 0 -1 7\n2 0 0 0 -1 9\n";

fn ok<T: Clone>(runs: &[PartyRun<T>; 3]) -> [T; 3] {
    if let Some(e) = first_error(runs) {
        panic!("run failed: {e}");
    }
    [0, 1, 2].map(|i| runs[i].result.as_ref().unwrap().clone())
}

fn labels(sc: &Scenario) -> Vec<u64> {
    let r = run_three_parties(sc);
    assert_eq!(r.outcome, Outcome::Completed);
    assert_eq!(r.labels, r.expected);
    r.labels
}

#[test]
fn small_random_tree_both_kinds() {
    for os in KINDS {
        let sc = Scenario::random(3, 23, 5, 7, 16, 4, os).unwrap();
        let r = run_three_parties(&sc);
        assert_eq!(r.outcome, Outcome::Completed, "{os}");
        assert_eq!(r.labels, r.expected, "{os}");
    }
}

#[test]
fn three_node_tree() {
    let arr = parse_tree(THREE_NODES).unwrap();
    for os in KINDS {
        let sc = Scenario::new(arr.clone(), vec![vec![5, 0], vec![12, 0], vec![10, 255]], os, 1);
        assert_eq!(labels(&sc), vec![7, 9, 9], "{os}");
    }
}

#[test]
fn example_files_give_their_labels() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let sc = Scenario::load(&dir.join("example.scn")).unwrap();
    assert_eq!(labels(&sc), vec![7, 3, 12, 7, 9]);
}

#[test]
fn single_leaf_tree() {
    let arr = encode_tree(&LogicalTree::Leaf { label: 42 }, 8, 3).unwrap();
    assert_eq!(arr.d_pad, 0);
    for os in KINDS {
        let sc = Scenario::new(arr.clone(), vec![vec![1, 2, 3]], os, 2);
        assert_eq!(sc.tree.m(), 2);
        assert_eq!(labels(&sc), vec![42], "{os}");
    }
}

#[test]
fn extra_steps_do_not_change_labels() {
    let base = Scenario::random(4, 15, 4, 3, 12, 6, OsKind::Dpf).unwrap();
    let want = labels(&base);
    for d_pad in [5, 8] {
        let sc = base.clone().with_d_pad(d_pad).unwrap();
        assert_eq!(labels(&sc), want, "d_pad {d_pad}");
    }
    assert!(base.clone().with_d_pad(3).is_err());
}

/// Bytes each party sends in each phase.
fn traffic(sc: &Scenario) -> Vec<[u64; 4]> {
    let r = run_three_parties(sc);
    assert!(r.correct());
    r.stats
        .iter()
        .map(|s| Phase::ALL.map(|ph| s.sent_bytes(ph)))
        .collect()
}

#[test]
fn traffic_does_not_depend_on_tree_depth() {
    // Same padded size and step count, different shapes and paths.
    for os in KINDS {
        let shallow = Scenario::random(5, 15, 3, 4, 16, 3, os).unwrap().with_d_pad(7).unwrap();
        let deep = Scenario::random(6, 15, 7, 4, 16, 3, os).unwrap();
        assert_eq!(shallow.tree.m(), deep.tree.m());
        assert_eq!(shallow.tree.d_pad, deep.tree.d_pad);
        assert_eq!(traffic(&shallow), traffic(&deep), "{os}");
    }
}

#[test]
fn traffic_does_not_depend_on_the_query() {
    let arr = parse_tree(THREE_NODES).unwrap();
    let left = Scenario::new(arr.clone(), vec![vec![0, 0]], OsKind::Dpf, 7);
    let right = Scenario::new(arr, vec![vec![200, 9]], OsKind::Dpf, 7);
    assert_eq!(traffic(&left), traffic(&right));
}

#[test]
fn setup_traffic_grows_linearly_with_the_array() {
    let setup = |m: usize| {
        let sc = Scenario::random(8, m - 1, 7, 4, 16, 1, OsKind::Dpf).unwrap();
        assert_eq!(sc.tree.m(), m);
        run_three_parties(&sc).setup_bytes as f64
    };
    let sizes = [16, 32, 64, 128];
    let bytes: Vec<f64> = sizes.iter().map(|&m| setup(m)).collect();
    // A fixed part for the key and its check, then a cost per node.
    let steps: Vec<f64> = bytes.windows(2).map(|w| w[1] - w[0]).collect();
    for w in steps.windows(2) {
        let ratio = w[1] / w[0];
        assert!((1.9..2.1).contains(&ratio), "{bytes:?}");
    }
}

#[test]
fn online_phase_uses_only_preprocessed_triples() {
    let sc = Scenario::random(9, 31, 5, 6, 16, 1, OsKind::Dpf).unwrap();
    let params = TreeParams::of(&sc.tree);
    let tree = &sc.tree;
    let query = &sc.queries[0];
    let runs = simulate(&SimOptions::seeded(9), |p| {
        let state = p.pdte_setup(&params, (p.id() == MODEL_OWNER).then_some(tree))?;
        let mut session = PdteSession::new(&params, OsKind::Dpf);
        p.pdte_preprocess(&state, &mut session, 1)?;
        let before = p.triples_available();
        let x = (p.id() == FEATURE_OWNER).then_some(query.as_slice());
        p.pdte_eval(&state, &mut session, x)?;
        Ok(before - p.triples_available())
    });
    assert_eq!(ok(&runs), [params.online_ands(); 3]);
}

#[test]
fn only_the_feature_owner_learns_the_label() {
    let sc = Scenario::random(10, 7, 2, 2, 8, 1, OsKind::Rss).unwrap();
    let params = TreeParams::of(&sc.tree);
    let (tree, query) = (&sc.tree, &sc.queries[0]);
    let runs = simulate(&SimOptions::seeded(10), |p| {
        let state = p.pdte_setup(&params, (p.id() == MODEL_OWNER).then_some(tree))?;
        let mut session = PdteSession::new(&params, OsKind::Rss);
        let x = (p.id() == FEATURE_OWNER).then_some(query.as_slice());
        p.pdte_eval(&state, &mut session, x)
    });
    let want = plaintext_dte(&sc.tree, query);
    assert_eq!(ok(&runs), [None, Some(want), None]);
}

#[test]
fn wrong_query_length_is_refused() {
    let sc = Scenario::random(11, 7, 2, 3, 8, 1, OsKind::Dpf).unwrap();
    let params = TreeParams::of(&sc.tree);
    let tree = &sc.tree;
    let runs = simulate(&SimOptions::seeded(11), |p| {
        let state = p.pdte_setup(&params, (p.id() == MODEL_OWNER).then_some(tree))?;
        let mut session = PdteSession::new(&params, OsKind::Dpf);
        p.pdte_preprocess(&state, &mut session, 1)?;
        if p.id() == FEATURE_OWNER {
            return Ok(matches!(p.pdte_eval(&state, &mut session, Some(&[1, 2])), Err(Error::Config(_))));
        }
        Ok(true)
    });
    assert!(runs[1].result.as_ref().unwrap());
}

#[test]
fn setup_rejects_a_mismatched_tree() {
    let sc = Scenario::random(12, 7, 2, 3, 8, 1, OsKind::Dpf).unwrap();
    let mut params = TreeParams::of(&sc.tree);
    params.d_pad += 1;
    let tree = &sc.tree;
    let runs = simulate(&SimOptions::seeded(12), |p| {
        let r = p.pdte_setup(&params, (p.id() == MODEL_OWNER).then_some(tree));
        Ok(matches!(r, Err(Error::Config(_))))
    });
    assert!(runs[0].result.as_ref().unwrap());
}

#[test]
fn share_files_round_trip() {
    let sc = Scenario::random(13, 7, 2, 3, 8, 2, OsKind::Dpf).unwrap();
    let params = TreeParams::of(&sc.tree);
    let (tree, queries) = (&sc.tree, &sc.queries);
    let runs = simulate(&SimOptions::seeded(13), |p| {
        let state = p.pdte_setup(&params, (p.id() == MODEL_OWNER).then_some(tree))?;
        let bytes = state.to_bytes();
        let back = SetupState::from_bytes(&bytes)?;
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.holder(), p.id());
        // The reloaded state still evaluates.
        let mut session = PdteSession::new(&params, OsKind::Dpf);
        let mut out = Vec::new();
        for q in queries {
            let x = (p.id() == FEATURE_OWNER).then_some(q.as_slice());
            out.push(p.pdte_eval(&back, &mut session, x)?);
        }
        Ok(out)
    });
    let want: Vec<Option<u64>> = queries.iter().map(|q| Some(plaintext_dte(tree, q))).collect();
    assert_eq!(ok(&runs)[1], want);
}

#[test]
fn share_file_errors() {
    assert!(SetupState::from_bytes(b"nope").is_err());
    let sc = Scenario::random(14, 3, 1, 1, 8, 1, OsKind::Dpf).unwrap();
    let params = TreeParams::of(&sc.tree);
    let tree = &sc.tree;
    let runs = simulate(&SimOptions::seeded(14), |p| {
        Ok(p.pdte_setup(&params, (p.id() == MODEL_OWNER).then_some(tree))?.to_bytes())
    });
    let mut b = ok(&runs)[0].clone();
    b.pop();
    assert!(matches!(SetupState::from_bytes(&b), Err(Error::Format { .. })));
}

#[test]
fn text_and_binary_formats_round_trip() {
    let (_, arr) = encoded(15, 21, 5);
    let bytes = array_to_bytes(&arr);
    assert_eq!(array_from_bytes(&bytes).unwrap(), arr);
    assert_eq!(parse_tree(&write_tree(&arr)).unwrap(), arr);
    // Padding slots are unreachable, so only the binary form carries them.
    let padded = pad_tree(&arr, &mut ChaCha20Rng::seed_from_u64(15));
    assert_eq!(array_from_bytes(&array_to_bytes(&padded)).unwrap(), padded);
    assert!(parse_tree(&write_tree(&padded)).is_err());
}

#[test]
fn feature_files() {
    let rows = vec![vec![1, 2, 3], vec![0, 65535, 9]];
    assert_eq!(parse_features(&write_features(&rows), 3, 16).unwrap(), rows);
    let text = "# comment\n1,2,3\n\n4, 5 ,6\n";
    assert_eq!(parse_features(text, 3, 8).unwrap().len(), 2);
    let e = parse_features("1,2\n", 3, 8).unwrap_err();
    assert!(matches!(e, Error::Format { line: 1, .. }), "{e}");
    let e = parse_features("1,2,3\n1,2,300\n", 3, 8).unwrap_err();
    assert!(matches!(e, Error::Format { line: 2, .. }), "{e}");
}

#[test]
fn tree_file_errors_point_at_the_node() {
    let cases = [
        ("pdte-tree 1\nk 8\nn 2\n0 10 1 2 5 0\n1 0 0 0 -1 7\n2 0 0 0 -1 9\n", "node 0: feature id 5"),
        ("pdte-tree 1\nk 8\nn 2\n0 10 1 3 0 0\n1 0 0 0 -1 7\n2 0 0 0 -1 9\n", "child 3"),
        ("pdte-tree 1\nk 8\nn 2\n0 10 1 1 0 0\n1 0 0 0 -1 7\n", "two parents"),
        ("pdte-tree 1\nk 8\nn 2\n0 0 0 0 -1 1\n1 0 0 0 -1 7\n", "node 1 is not reachable"),
        ("pdte-tree 1\nk 4\nn 2\n0 0 0 0 -1 99\n", "wider than 4 bits"),
        ("pdte-tree 2\n", "pdte-tree 1"),
        ("pdte-tree 1\nk 8\nn 2\nd_pad 0\n0 10 1 2 0 0\n1 0 0 0 -1 7\n2 0 0 0 -1 9\n", "d_pad 0"),
    ];
    for (text, want) in cases {
        let e = parse_tree(text).unwrap_err().to_string();
        assert!(e.contains(want), "{e:?} lacks {want:?}");
    }
}

#[test]
fn nodes_pack_in_field_order() {
    let nd = TreeNode {
        t: 0xa,
        l: 0x1,
        r: 0x2,
        feature: Some(1),
        c: 0x3,
    };
    let bits = nd.pack(4, 3);
    // t || l || r || v || c, low bits first within each field.
    assert_eq!(bits.len(), 4 * 4 + 3);
    assert_eq!(bits.get_bits(0, 4), 0xa);
    assert_eq!(bits.get_bits(4, 4), 0x1);
    assert_eq!(bits.get_bits(8, 4), 0x2);
    assert_eq!(bits.get_bits(12, 3), 0b010);
    assert_eq!(bits.get_bits(15, 4), 0x3);
    assert_eq!(TreeNode::unpack(&bits, 4, 3).unwrap(), nd);
}

#[test]
fn padded_sizes() {
    assert_eq!(padded_size(1), 2);
    assert_eq!(padded_size(2), 2);
    assert_eq!(padded_size(23), 32);
    assert_eq!(padded_size(4179), 8192);
}

fn encoded(seed: u64, m: usize, d: usize) -> (LogicalTree, TreeArray) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let t = LogicalTree::random(&mut rng, m, d, 5, 10).unwrap();
    let arr = encode_tree(&t, 10, 5).unwrap();
    (t, arr)
}

#[test]
fn padding_keeps_every_label() {
    let mut rng = ChaCha20Rng::seed_from_u64(16);
    let (t, arr) = encoded(16, 45, 9);
    let padded = pad_tree(&arr, &mut rng);
    assert_eq!(padded.m(), 64);
    padded.validate().unwrap();
    for _ in 0..1000 {
        let x: Vec<u64> = (0..5).map(|_| rng.gen::<u64>() & 0x3ff).collect();
        let want = t.eval(&x);
        assert_eq!(plaintext_dte(&arr, &x), want);
        assert_eq!(plaintext_dte(&padded, &x), want);
    }
}

#[test]
fn random_trees_have_the_requested_shape() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    for (m, d) in [(1, 0), (3, 1), (7, 2), (7, 3), (31, 4), (101, 12)] {
        let t = LogicalTree::random(&mut rng, m, d, 3, 8).unwrap();
        assert_eq!((t.size(), t.depth()), (m, d));
    }
    assert!(LogicalTree::random(&mut rng, 8, 3, 3, 8).is_err());
    assert!(LogicalTree::random(&mut rng, 9, 2, 3, 8).is_err());
    assert!(LogicalTree::random(&mut rng, 5, 3, 3, 8).is_err());
}

#[test]
fn undersized_index_width_is_refused() {
    // 4-bit child indices address at most 16 nodes.
    assert!(matches!(
        Scenario::random(18, 17, 4, 2, 4, 1, OsKind::Dpf),
        Err(Error::InvalidTree(_))
    ));
    // After padding, 9 nodes need 16 slots, which 4 bits still reach.
    assert!(Scenario::random(18, 9, 4, 2, 4, 1, OsKind::Dpf).is_ok());
}

fn run_direct(sc: &Scenario) -> Result<Vec<u64>> {
    let r = run_three_parties(sc);
    if r.correct() {
        Ok(r.labels)
    } else {
        Err(Error::Config(r.outcome.label()))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn secure_evaluation_matches_plaintext(seed: u64, depth in 1usize..5, extra in 0usize..4, rss: bool) {
        let m = 2 * (depth + extra.min((1 << depth) - 1 - depth)) + 1;
        let os = if rss { OsKind::Rss } else { OsKind::Dpf };
        let sc = Scenario::random(seed, m, depth, 3, 10, 2, os).unwrap();
        let got = run_direct(&sc).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let t = LogicalTree::random(&mut rng, m, depth, 3, 10).unwrap();
        let want: Vec<u64> = sc.queries.iter().map(|q| t.eval(q)).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn encoding_matches_direct_evaluation(seed: u64, depth in 0usize..8, x in proptest::collection::vec(0u64..1024, 5)) {
        let m = 2 * depth + 1;
        let (t, arr) = encoded(seed, m, depth);
        prop_assert_eq!(plaintext_dte(&arr, &x), t.eval(&x));
    }
}
