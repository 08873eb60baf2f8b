//! Three-party private decision tree evaluation with security against one
//! malicious party.
//!
//! A model owner secret-shares a decision tree among three servers using
//! replicated sharing over GF(2). A feature owner shares a query, the
//! servers walk the tree obliviously and only the feature owner learns the
//! label. Every multiplication is checked, every selected node carries an
//! information-theoretic MAC, and nothing is reconstructed until all checks
//! pass.
//!
//! Layers, bottom up:
//!
//! - [`gf2`]: bit vectors and GF(2^ℓ) arithmetic
//! - [`transport`]: framed, counted channels over memory or TCP
//! - [`rss`]: replicated shares and the per-party engine
//! - [`circuits`]: verified AND gates, comparison, feature selection
//! - [`dpf`]: distributed point functions with key verification
//! - [`oselect`]: oblivious selection from a shared array
//! - [`mac`]: MAC keys, attaching and batched checks
//! - [`pdte`]: tree encoding and the evaluation protocol
//! - [`harness`]: in-process runs, fault injection, the detection matrix
//!
//! ```
//! use pdte_core::harness::{run_three_parties, Scenario};
//! use pdte_core::oselect::OsKind;
//!
//! let sc = Scenario::random(1, 7, 2, 3, 8, 2, OsKind::Dpf).unwrap();
//! let report = run_three_parties(&sc);
//! assert!(report.correct());
//! ```

#![deny(unsafe_code)]

pub mod bench;
pub mod circuits;
pub mod cli;
pub mod dpf;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod mac;
pub mod oselect;
pub mod pdte;
pub mod prf;
pub mod rss;
pub mod transport;
