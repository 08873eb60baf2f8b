use std::io::{BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::time::{Duration, Instant};

use super::{Frame, Link, PartyId, HEADER_LEN};
use crate::error::{Error, Result};

pub struct TcpLink {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl TcpLink {
    fn new(stream: TcpStream) -> Result<Self> {
        stream.set_nodelay(true)?;
        Ok(TcpLink {
            reader: BufReader::with_capacity(1 << 16, stream.try_clone()?),
            writer: stream,
        })
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Transport(format!("tcp: {e}"))
}

impl Link for TcpLink {
    fn send(&mut self, frame: Vec<u8>) -> Result<()> {
        self.writer.write_all(&frame).map_err(io_err)
    }

    fn recv(&mut self) -> Result<Vec<u8>> {
        let mut header = [0u8; HEADER_LEN];
        self.reader.read_exact(&mut header).map_err(io_err)?;
        let (len, _, _) = Frame::decode_header(&header)?;
        let mut out = vec![0u8; HEADER_LEN + len];
        out[..HEADER_LEN].copy_from_slice(&header);
        self.reader
            .read_exact(&mut out[HEADER_LEN..])
            .map_err(io_err)?;
        Ok(out)
    }
}

/// Establishes TCP links. Party `j` dials every party `i < j` and accepts
/// from every party above it, so the order is P0<-P1, P0<-P2, P1<-P2.
pub fn tcp_links(
    id: PartyId,
    listen: SocketAddr,
    peers: &[SocketAddr; 3],
    timeout: Duration,
) -> Result<[Option<Box<dyn Link>>; 3]> {
    let listener = if id.index() < 2 {
        Some(TcpListener::bind(listen).map_err(|e| {
            Error::Config(format!("cannot listen on {listen}: {e}"))
        })?)
    } else {
        None
    };
    tcp_links_with_listener(id, listener, peers, timeout)
}

/// Like [`tcp_links`] with a listener the caller already bound.
pub fn tcp_links_with_listener(
    id: PartyId,
    listener: Option<TcpListener>,
    peers: &[SocketAddr; 3],
    timeout: Duration,
) -> Result<[Option<Box<dyn Link>>; 3]> {
    let deadline = Instant::now() + timeout;
    let mut links: [Option<Box<dyn Link>>; 3] = Default::default();
    for j in 0..id.index() {
        let stream = loop {
            match TcpStream::connect_timeout(&peers[j], Duration::from_millis(500)) {
                Ok(s) => break s,
                Err(e) if Instant::now() < deadline => {
                    log::debug!("connect to P{j} failed: {e}, retrying");
                    std::thread::sleep(Duration::from_millis(50));
                }
                Err(e) => {
                    return Err(Error::Config(format!(
                        "cannot reach P{j} at {}: {e}",
                        peers[j]
                    )))
                }
            }
        };
        let mut stream = stream;
        stream.write_all(&[id.index() as u8]).map_err(io_err)?;
        links[j] = Some(Box::new(TcpLink::new(stream)?));
    }
    let expected = 2 - id.index();
    if expected > 0 {
        let listener =
            listener.ok_or_else(|| Error::Config(format!("{id} needs a listen address")))?;
        listener.set_nonblocking(true)?;
        let mut got = 0;
        while got < expected {
            match listener.accept() {
                Ok((mut stream, _)) => {
                    stream.set_nonblocking(false)?;
                    let mut who = [0u8; 1];
                    stream.read_exact(&mut who).map_err(io_err)?;
                    let peer = PartyId::new(who[0] as usize)
                        .map_err(|_| Error::Transport("bad hello".into()))?;
                    if peer.index() <= id.index() || links[peer.index()].is_some() {
                        return Err(Error::Transport(format!("unexpected hello from {peer}")));
                    }
                    links[peer.index()] = Some(Box::new(TcpLink::new(stream)?));
                    got += 1;
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    if Instant::now() >= deadline {
                        return Err(Error::Config(format!(
                            "{id} timed out waiting for peers"
                        )));
                    }
                    std::thread::sleep(Duration::from_millis(10));
                }
                Err(e) => return Err(io_err(e)),
            }
        }
    }
    Ok(links)
}
