use std::fmt;

use crate::transport::{PartyId, SessionId};

/// Why an honest party stopped the protocol.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AbortReason {
    /// The two copies of a share received during an opening disagree.
    OpenMismatch,
    /// The two copies of a share received during a reconstruction disagree.
    ReconMismatch,
    /// Non-dealers received different masked inputs from the dealer.
    DeltaMismatch,
    /// A verified AND gate failed its sacrifice check.
    SacrificeFailed,
    /// An opened triple in cut-and-choose was not a product.
    TripleCheckFailed,
    /// The aggregated MAC check did not open to zero.
    MacCheckFailed,
    /// The sketch proofs of a DPF key pair disagree.
    VdpfReject,
    /// A DPF key pair does not encode a unit vector at the shared index.
    UnitCheckReject,
    /// A DPF key could not be parsed.
    MalformedKey,
    /// A commitment did not match its opening.
    CommitmentMismatch,
    /// A peer sent a message of the wrong size.
    BadLength,
    /// A peer disconnected before the protocol finished.
    PeerClosed,
}

impl AbortReason {
    pub fn label(&self) -> &'static str {
        match self {
            AbortReason::OpenMismatch => "open-mismatch",
            AbortReason::ReconMismatch => "recon-mismatch",
            AbortReason::DeltaMismatch => "delta-mismatch",
            AbortReason::SacrificeFailed => "sacrifice-failed",
            AbortReason::TripleCheckFailed => "triple-check-failed",
            AbortReason::MacCheckFailed => "mac-check-failed",
            AbortReason::VdpfReject => "vdpf-reject",
            AbortReason::UnitCheckReject => "unit-check-reject",
            AbortReason::MalformedKey => "malformed-key",
            AbortReason::CommitmentMismatch => "commitment-mismatch",
            AbortReason::BadLength => "bad-length",
            AbortReason::PeerClosed => "peer-closed",
        }
    }
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("protocol abort: {0}")]
    Abort(AbortReason),
    #[error("session mismatch from {from}: expected {expected}, got {got}")]
    SessionMismatch {
        from: PartyId,
        expected: SessionId,
        got: SessionId,
    },
    #[error("transport: {0}")]
    Transport(String),
    #[error("field context mismatch")]
    ContextMismatch,
    #[error("index {index} outside domain of size {size}")]
    OutOfDomain { index: u64, size: u64 },
    #[error("malformed key: {0}")]
    MalformedKey(String),
    #[error("token {0} already used")]
    TokenReused(u64),
    #[error("{what} at line {line}: {msg}")]
    Format {
        what: &'static str,
        line: usize,
        msg: String,
    },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn abort(reason: AbortReason) -> Self {
        Error::Abort(reason)
    }

    /// The abort reason if this error ends a protocol run, including
    /// transport failures that look like a vanished peer.
    pub fn abort_reason(&self) -> Option<AbortReason> {
        match self {
            Error::Abort(r) => Some(r.clone()),
            Error::SessionMismatch { .. } | Error::Transport(_) => Some(AbortReason::PeerClosed),
            Error::MalformedKey(_) => Some(AbortReason::MalformedKey),
            _ => None,
        }
    }

    pub fn is_abort(&self) -> bool {
        self.abort_reason().is_some()
    }
}

pub type Result<T> = std::result::Result<T, Error>;
