use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{gen_unchecked, DpfKey, PointFunction};

/// Ways a corrupt dealer can break a key pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MalformedKind {
    SeedCwFirst,
    SeedCwMiddle,
    SeedCwLast,
    ControlCwLeft,
    ControlCwRight,
    OutputCw,
    Truncated,
    WrongBeta,
    ZeroBeta,
    AlphaBitFirst,
    AlphaBitLast,
    ReplacedRoot,
}

impl MalformedKind {
    pub const ALL: [MalformedKind; 12] = [
        MalformedKind::SeedCwFirst,
        MalformedKind::SeedCwMiddle,
        MalformedKind::SeedCwLast,
        MalformedKind::ControlCwLeft,
        MalformedKind::ControlCwRight,
        MalformedKind::OutputCw,
        MalformedKind::Truncated,
        MalformedKind::WrongBeta,
        MalformedKind::ZeroBeta,
        MalformedKind::AlphaBitFirst,
        MalformedKind::AlphaBitLast,
        MalformedKind::ReplacedRoot,
    ];

    pub fn index(self) -> usize {
        MalformedKind::ALL.iter().position(|&k| k == self).unwrap()
    }

    /// Serialized key pair for `f` broken in this way. The dealer still
    /// claims the pair encodes `f`.
    pub fn keys<R: Rng + ?Sized>(self, f: &PointFunction, rng: &mut R) -> (Vec<u8>, Vec<u8>) {
        let n = f.domain_bits as usize;
        let mut f2 = *f;
        match self {
            MalformedKind::WrongBeta => f2.beta = 3,
            MalformedKind::ZeroBeta => f2.beta = 0,
            MalformedKind::AlphaBitFirst if n > 0 => f2.alpha ^= 1 << (n - 1),
            MalformedKind::AlphaBitLast if n > 0 => f2.alpha ^= 1,
            _ => {}
        }
        let (k0, k1) = gen_unchecked(&f2, rng);
        let level = |which: usize| match which {
            0 => 0,
            1 => n / 2,
            _ => n.saturating_sub(1),
        };
        // Corrections only act where a key's control bit is set, so break
        // the key that uses them on the path to the point.
        let mut keys = [k0, k1];
        let user = |keys: &[DpfKey; 2], depth: usize| !path_bit(&keys[0], f2.alpha, depth) as usize;
        match self {
            MalformedKind::SeedCwFirst if n > 0 => {
                let (d, u) = (level(0), user(&keys, level(0)));
                keys[u].cws[d].seed ^= 1 << 64;
            }
            MalformedKind::SeedCwMiddle if n > 0 => {
                let (d, u) = (level(1), user(&keys, level(1)));
                keys[u].cws[d].seed ^= 1 << 9;
            }
            MalformedKind::SeedCwLast if n > 0 => {
                let (d, u) = (level(2), user(&keys, level(2)));
                keys[u].cws[d].seed ^= 1 << 127;
            }
            MalformedKind::ControlCwLeft if n > 0 => {
                let (d, u) = (level(1), user(&keys, level(1)));
                keys[u].cws[d].t_left ^= true;
            }
            MalformedKind::ControlCwRight if n > 0 => {
                let (d, u) = (level(2), user(&keys, level(2)));
                keys[u].cws[d].t_right ^= true;
            }
            MalformedKind::OutputCw => {
                let u = user(&keys, n);
                keys[u].cw_out ^= 1 << 70;
            }
            MalformedKind::ReplacedRoot => keys[1].seed = rng.gen::<u128>() & !1,
            _ => {}
        }
        let [k0, k1] = keys;
        let b0 = k0.to_bytes();
        let mut b1 = k1.to_bytes();
        if self == MalformedKind::Truncated {
            b1.truncate(b1.len() - 9);
        }
        (b0, b1)
    }
}

/// Control bit of key 0 at depth `depth` on the path to `alpha`. Key 1
/// holds the complement there.
fn path_bit(k0: &DpfKey, alpha: u64, depth: usize) -> bool {
    let n = k0.domain_bits as usize;
    let (mut s, mut t) = (k0.seed, false);
    for i in 0..depth {
        let (sl, tl, sr, tr) = k0.step(i, s, t);
        (s, t) = if (alpha >> (n - 1 - i)) & 1 == 1 { (sr, tr) } else { (sl, tl) };
    }
    t
}
