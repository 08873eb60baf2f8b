//! Arithmetic in GF(2^ℓ): irreducible moduli, products and inverses.

use pdte_core::gf2::{find_irreducible, BitVec, FieldCtx, Gf128};

fn main() {
    for ell in [8, 40, 64, 72] {
        let f = find_irreducible(ell);
        println!("ell = {ell:>3}: modulus exponents {:?}", f.exponents());
    }

    let ctx = FieldCtx::new(40);
    let a = ctx.element(BitVec::from_u64(0x12_3456_789a, 40));
    let b = ctx.element(BitVec::from_u64(0x0f_edcb_a987, 40));
    let ab = a.mul(&b).unwrap();
    let back = ab.mul(&b.inv()).unwrap();
    println!("a * b = {:#x}", ab.bits().to_u64());
    println!("(a * b) / b == a: {}", back == a);

    let gf = Gf128::new();
    let x = 0x0123_4567_89ab_cdef_0011_2233_4455_6677u128;
    println!("x * 1 in GF(2^128) == x: {}", gf.mul(x, 1) == x);
}
