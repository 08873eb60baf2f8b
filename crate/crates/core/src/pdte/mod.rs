//! Private evaluation of a decision tree held by one party on features held
//! by another.
//!
//! The tree is stored as an array of packed nodes with the root at 0 and
//! leaves pointing to themselves, so a fixed number of steps from the root
//! always ends on the right leaf. Each step selects a feature, compares it
//! with the threshold, picks a child index and fetches that node obliviously.

pub mod format;
mod protocol;
mod tree;

pub use protocol::{PdteSession, SetupState, TreeParams, FEATURE_OWNER, MODEL_OWNER};
pub use tree::{encode_tree, pad_tree, padded_size, plaintext_dte, LogicalTree, TreeArray, TreeNode};
