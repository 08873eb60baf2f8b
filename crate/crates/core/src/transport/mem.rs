use crossbeam_channel::{bounded, Receiver, Sender};

use crate::error::{Error, Result};

/// A bidirectional byte-frame pipe to one peer.
pub trait Link: Send {
    fn send(&mut self, frame: Vec<u8>) -> Result<()>;
    fn recv(&mut self) -> Result<Vec<u8>>;
}

/// In-process link backed by bounded FIFO queues.
pub struct MemLink {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
}

const QUEUE_DEPTH: usize = 1 << 14;

impl Link for MemLink {
    fn send(&mut self, frame: Vec<u8>) -> Result<()> {
        self.tx
            .send(frame)
            .map_err(|_| Error::Transport("peer closed".into()))
    }

    fn recv(&mut self) -> Result<Vec<u8>> {
        self.rx
            .recv()
            .map_err(|_| Error::Transport("peer closed".into()))
    }
}

/// Full mesh between three in-process parties. Entry `[i][j]` is party i's
/// link to party j; the diagonal is empty.
pub fn mem_links() -> [[Option<Box<dyn Link>>; 3]; 3] {
    let mut out: [[Option<Box<dyn Link>>; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let (tx_ij, rx_ij) = bounded(QUEUE_DEPTH);
            let (tx_ji, rx_ji) = bounded(QUEUE_DEPTH);
            out[i][j] = Some(Box::new(MemLink {
                tx: tx_ij,
                rx: rx_ji,
            }));
            out[j][i] = Some(Box::new(MemLink {
                tx: tx_ji,
                rx: rx_ij,
            }));
        }
    }
    out
}
