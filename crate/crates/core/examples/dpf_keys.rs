//! Point-function keys: generation, evaluation and pair verification.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pdte_core::dpf::{gen, key_size_bound, verify_pair, MalformedKind, PointFunction};

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let f = PointFunction { alpha: 5, beta: 1, domain_bits: 4 };
    let (k0, k1) = gen(&f, &mut rng).unwrap();
    let (y0, y1) = (k0.eval_full(), k1.eval_full());
    let sum: Vec<u128> = y0.iter().zip(&y1).map(|(a, b)| a ^ b).collect();
    println!("combined outputs: {sum:?}");
    println!("key bytes {} (bound {})", k0.byte_len(), key_size_bound(4) / 8);

    // The evaluators hold shares of the index 5 = 3 ^ 6.
    let v = verify_pair(&k0.to_bytes(), &k1.to_bytes(), 3, 6, &mut rng).unwrap();
    println!("honest pair: {v:?}");
    let v = verify_pair(&k0.to_bytes(), &k1.to_bytes(), 3, 7, &mut rng).unwrap();
    println!("wrong index: {v:?}");
    for kind in MalformedKind::ALL {
        let (a, b) = kind.keys(&f, &mut rng);
        println!("{kind:?}: {:?}", verify_pair(&a, &b, 3, 6, &mut rng).unwrap());
    }
}
