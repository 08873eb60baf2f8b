use rand::Rng;
use sha2::{Digest, Sha256};

use super::DpfKey;
use crate::error::Result;
use crate::gf2::Gf128;
use crate::prf::Prf;

/// Shares of `(sum r_j y_j, sum s_j y_j, sum r_j s_j y_j)` over GF(2^128).
///
/// For `y = beta * e_alpha` the shared values satisfy `z1 * z2 = beta * z3`,
/// so with `beta = 1` the pair passes iff `z1 * z2 - z3 = 0`. A vector of
/// weight two or more passes with probability about `2 / 2^128`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Sketch {
    pub z1: u128,
    pub z2: u128,
    pub z3: u128,
}

/// One evaluator's share of a multiplication triple over GF(2^128).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct BeaverShare {
    pub a: u128,
    pub b: u128,
    pub c: u128,
}

/// Digest an evaluator commits to after the sketch check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyProof(pub [u8; 32]);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    /// The sketch shows the shared vector is not a unit vector times one value.
    RejectSketch,
    /// Total weight is not one, or the point is not the shared index.
    RejectUnit,
    /// A key did not parse.
    RejectFormat,
}

/// Random coefficients `(r_j, s_j)` for key number `key_index`, from a
/// public seed that was fixed after the keys were dealt.
pub fn sketch_coefficients(seed: &[u8; 16], key_index: u64, m: usize) -> (Vec<u128>, Vec<u128>) {
    let prf = Prf::new(*seed);
    let base = (key_index as u128) << 64;
    let inputs: Vec<u128> = (0..2 * m as u128).map(|j| base | j).collect();
    let out = prf.blocks(&inputs);
    let r = out.iter().step_by(2).copied().collect();
    let s = out.iter().skip(1).step_by(2).copied().collect();
    (r, s)
}

pub fn sketch(gf: &Gf128, y: &[u128], r: &[u128], s: &[u128]) -> Sketch {
    let mut z = Sketch::default();
    for j in 0..y.len() {
        let ry = gf.mul(r[j], y[j]);
        z.z1 ^= ry;
        z.z2 ^= gf.mul(s[j], y[j]);
        z.z3 ^= gf.mul(s[j], ry);
    }
    z
}

/// Shares of `(sum_j y_j, rdx + sum_j j * y_j)`; an honest pair opens to `(1, 0)`.
///
/// The index `j` is read as a polynomial, so `sum_j j * y_j` splits into
/// `sum_q X^q * (xor of y_j over j with bit q set)`.
pub fn unit_terms(gf: &Gf128, y: &[u128], rdx_share: u64) -> (u128, u128) {
    let t = y.iter().fold(0u128, |a, &v| a ^ v);
    let bits = usize::BITS - y.len().saturating_sub(1).leading_zeros();
    let mut s = rdx_share as u128;
    for q in 0..bits {
        let acc = y
            .iter()
            .enumerate()
            .filter(|(j, _)| (j >> q) & 1 == 1)
            .fold(0u128, |a, (_, &v)| a ^ v);
        s ^= gf.mul(1u128 << q, acc);
    }
    (t, s)
}

pub fn beaver_triple<R: Rng + ?Sized>(gf: &Gf128, rng: &mut R) -> (BeaverShare, BeaverShare) {
    let (a, b) = (rng.gen::<u128>(), rng.gen::<u128>());
    let c = gf.mul(a, b);
    let s0 = BeaverShare {
        a: rng.gen(),
        b: rng.gen(),
        c: rng.gen(),
    };
    let s1 = BeaverShare {
        a: a ^ s0.a,
        b: b ^ s0.b,
        c: c ^ s0.c,
    };
    (s0, s1)
}

impl Sketch {
    /// Values to publish for the Beaver multiplication of `z1 * z2`.
    pub fn masked(&self, t: &BeaverShare) -> (u128, u128) {
        (self.z1 ^ t.a, self.z2 ^ t.b)
    }

    /// This evaluator's share of `z1 * z2 - z3`, hashed. Both proofs are
    /// equal iff the difference is zero.
    pub fn proof(&self, gf: &Gf128, b: u8, t: &BeaverShare, e: u128, f: u128) -> VerifyProof {
        let mut d = gf.mul(e, t.b) ^ gf.mul(f, t.a) ^ t.c ^ self.z3;
        if b == 0 {
            d ^= gf.mul(e, f);
        }
        VerifyProof(Sha256::digest(d.to_le_bytes()).into())
    }
}

/// Runs both evaluators' checks locally on a serialized key pair.
pub fn verify_pair<R: Rng + ?Sized>(
    k0: &[u8],
    k1: &[u8],
    rdx0: u64,
    rdx1: u64,
    rng: &mut R,
) -> Result<Verdict> {
    let (k0, k1) = match (DpfKey::from_bytes(k0), DpfKey::from_bytes(k1)) {
        (Ok(a), Ok(b)) if a.domain_bits == b.domain_bits => (a, b),
        _ => return Ok(Verdict::RejectFormat),
    };
    let gf = Gf128::new();
    let (y0, y1) = (k0.eval_full(), k1.eval_full());
    let seed: [u8; 16] = rng.gen();
    let (r, s) = sketch_coefficients(&seed, 0, y0.len());
    let (z0, z1) = (sketch(&gf, &y0, &r, &s), sketch(&gf, &y1, &r, &s));
    let (t0, t1) = beaver_triple(&gf, rng);
    let (e0, f0) = z0.masked(&t0);
    let (e1, f1) = z1.masked(&t1);
    let (e, f) = (e0 ^ e1, f0 ^ f1);
    if z0.proof(&gf, 0, &t0, e, f) != z1.proof(&gf, 1, &t1, e, f) {
        return Ok(Verdict::RejectSketch);
    }
    let (ta, sa) = unit_terms(&gf, &y0, rdx0);
    let (tb, sb) = unit_terms(&gf, &y1, rdx1);
    if ta ^ tb != 1 || sa ^ sb != 0 {
        return Ok(Verdict::RejectUnit);
    }
    Ok(Verdict::Accept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpf::{gen, MalformedKind, PointFunction};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn honest_pair_accepts() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for alpha in [0u64, 5, 127] {
            let f = PointFunction {
                alpha,
                beta: 1,
                domain_bits: 7,
            };
            let (k0, k1) = gen(&f, &mut rng).unwrap();
            let rdx0 = rng.gen::<u64>() & 127;
            let v = verify_pair(&k0.to_bytes(), &k1.to_bytes(), rdx0, rdx0 ^ alpha, &mut rng).unwrap();
            assert_eq!(v, Verdict::Accept);
        }
    }

    #[test]
    fn every_malformed_class_rejects() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for kind in MalformedKind::ALL {
            let f = PointFunction {
                alpha: 45,
                beta: 1,
                domain_bits: 7,
            };
            let (b0, b1) = kind.keys(&f, &mut rng);
            let v = verify_pair(&b0, &b1, 3, 3 ^ 45, &mut rng).unwrap();
            assert_ne!(v, Verdict::Accept, "{kind:?}");
        }
    }

    #[test]
    fn unit_terms_match_direct_sum() {
        let gf = Gf128::new();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let y: Vec<u128> = (0..37).map(|_| rng.gen()).collect();
        let (_, s) = unit_terms(&gf, &y, 0);
        let direct = y
            .iter()
            .enumerate()
            .fold(0u128, |a, (j, &v)| a ^ gf.mul(j as u128, v));
        assert_eq!(s, direct);
    }
}
