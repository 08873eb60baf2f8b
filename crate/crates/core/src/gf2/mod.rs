//! Bit strings, polynomials over GF(2) and binary extension fields.

mod bitvec;
mod field;
pub mod poly;

pub use bitvec::BitVec;
pub use field::{find_irreducible, FieldCtx, Gf128, GfElement, STAT_SECURITY};
pub use poly::Polynomial;
