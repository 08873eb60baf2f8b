//! End to end: the model owner shares a tree, the feature owner queries it.

use std::path::Path;

use pdte_core::harness::{first_error, load_tree, simulate, SimOptions};
use pdte_core::oselect::OsKind;
use pdte_core::pdte::{pad_tree, PdteSession, TreeParams, FEATURE_OWNER, MODEL_OWNER};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let tree = load_tree(&data.join("example.tree")).unwrap();
    let tree = pad_tree(&tree, &mut ChaCha20Rng::seed_from_u64(6));
    let params = TreeParams::of(&tree);
    println!("m' = {}, depth = {}, n = {}, k = {}", tree.m(), params.d_pad, params.n, params.k);

    let queries = [vec![10u64, 0, 3], vec![50, 0, 9], vec![50, 9, 0]];
    let runs = simulate(&SimOptions::seeded(6), |p| {
        let state = p.pdte_setup(&params, (p.id() == MODEL_OWNER).then_some(&tree))?;
        let mut session = PdteSession::new(&params, OsKind::Dpf);
        p.pdte_preprocess(&state, &mut session, queries.len())?;
        let mut labels = Vec::new();
        for q in &queries {
            labels.push(p.pdte_eval(&state, &mut session, (p.id() == FEATURE_OWNER).then_some(q))?);
        }
        Ok(labels)
    });
    if let Some(e) = first_error(&runs) {
        eprintln!("aborted: {e}");
        std::process::exit(1);
    }
    for (q, label) in queries.iter().zip(runs[FEATURE_OWNER.index()].result.as_ref().unwrap()) {
        println!("{q:?} -> {}", label.unwrap());
    }
}
