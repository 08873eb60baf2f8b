use super::{PartyId, SessionId, Tag};
use crate::error::{Error, Result};

/// Header: payload length (u32), tag (u16), counter (u64), sender (u8), all little-endian.
pub const HEADER_LEN: usize = 15;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub session: SessionId,
    pub sender: PartyId,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.session.tag.id().to_le_bytes());
        out.extend_from_slice(&self.session.counter.to_le_bytes());
        out.push(self.sender.index() as u8);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses a header, returning the payload length, session and sender.
    pub fn decode_header(h: &[u8]) -> Result<(usize, SessionId, PartyId)> {
        if h.len() < HEADER_LEN {
            return Err(Error::Transport("short frame header".into()));
        }
        let len = u32::from_le_bytes(h[0..4].try_into().unwrap()) as usize;
        let tag_id = u16::from_le_bytes(h[4..6].try_into().unwrap());
        let tag = Tag::from_id(tag_id)
            .ok_or_else(|| Error::Transport(format!("unknown tag {tag_id}")))?;
        let counter = u64::from_le_bytes(h[6..14].try_into().unwrap());
        let sender = PartyId::new(h[14] as usize)
            .map_err(|_| Error::Transport(format!("bad sender {}", h[14])))?;
        Ok((len, SessionId::new(tag, counter), sender))
    }

    pub fn decode(bytes: &[u8]) -> Result<Frame> {
        let (len, session, sender) = Frame::decode_header(bytes)?;
        if bytes.len() != HEADER_LEN + len {
            return Err(Error::Transport(format!(
                "frame length {} does not match header {len}",
                bytes.len() - HEADER_LEN
            )));
        }
        Ok(Frame {
            session,
            sender,
            payload: bytes[HEADER_LEN..].to_vec(),
        })
    }
}
