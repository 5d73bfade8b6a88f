//! Length-prefixed binary framing.
//!
//! Frame: `[len: u32 LE][type: u8][payload: len bytes]`. All integers are
//! little-endian.
//!
//! QUERY payload: `u16 sum_count`, then per sum `u8 term_count` followed by
//! `term_count × (u16 message, u32 index)`. ANSWER payload: one byte per sum,
//! in query order. CONFIG_RESP: five `u32` fields `N, K, L, p, q`. ERROR: one
//! reason byte.

use std::io::{self, Read, Write};

use pirlab_core::model::Term;
use pirlab_core::{Query, SymbolSum};

use crate::{Error, Result};

/// Largest accepted payload.
pub const MAX_PAYLOAD: usize = 64 << 20;

pub const HEADER_LEN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameType {
    Query = 0x01,
    Answer = 0x02,
    ConfigReq = 0x03,
    ConfigResp = 0x04,
    Error = 0x7F,
}

impl FrameType {
    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0x01 => FrameType::Query,
            0x02 => FrameType::Answer,
            0x03 => FrameType::ConfigReq,
            0x04 => FrameType::ConfigResp,
            0x7F => FrameType::Error,
            _ => return None,
        })
    }
}

/// Reason byte carried by an ERROR frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ErrorCode {
    UnknownType = 0x01,
    Oversized = 0x02,
    Malformed = 0x03,
    OutOfRange = 0x04,
}

impl ErrorCode {
    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0x01 => ErrorCode::UnknownType,
            0x02 => ErrorCode::Oversized,
            0x03 => ErrorCode::Malformed,
            0x04 => ErrorCode::OutOfRange,
            _ => return None,
        })
    }

    pub fn describe(self) -> &'static str {
        match self {
            ErrorCode::UnknownType => "unknown frame type",
            ErrorCode::Oversized => "frame too large",
            ErrorCode::Malformed => "malformed payload",
            ErrorCode::OutOfRange => "query references a symbol outside the store",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub frame_type: FrameType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(frame_type: FrameType, payload: Vec<u8>) -> Self {
        Frame { frame_type, payload }
    }

    pub fn error(code: ErrorCode) -> Self {
        Frame::new(FrameType::Error, vec![code as u8])
    }

    /// Header plus payload.
    pub fn wire_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.payload.len() > MAX_PAYLOAD {
            return Err(Error::Encode(format!("payload of {} bytes exceeds 64 MiB", self.payload.len())));
        }
        let mut out = Vec::with_capacity(self.wire_len());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.push(self.frame_type as u8);
        out.extend_from_slice(&self.payload);
        Ok(out)
    }
}

pub fn write_frame<W: Write>(w: &mut W, frame: &Frame) -> Result<()> {
    let bytes = frame.to_bytes()?;
    w.write_all(&bytes).and_then(|_| w.flush()).map_err(|e| Error::io("writing frame", e))
}

/// Why a frame could not be read.
#[derive(Debug)]
pub enum ReadError {
    /// Stream ended cleanly before a new header.
    Closed,
    Io(io::Error),
    /// Declared length above [`MAX_PAYLOAD`]; the payload was not consumed.
    Oversized(u32),
    /// Payload consumed, type byte not recognized.
    UnknownType(u8),
}

impl std::fmt::Display for ReadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReadError::Closed => f.write_str("connection closed"),
            ReadError::Io(e) => write!(f, "{e}"),
            ReadError::Oversized(n) => write!(f, "declared payload of {n} bytes exceeds 64 MiB"),
            ReadError::UnknownType(t) => write!(f, "unknown frame type 0x{t:02X}"),
        }
    }
}

pub fn read_frame<R: Read>(r: &mut R) -> std::result::Result<Frame, ReadError> {
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        match r.read(&mut header[got..]) {
            Ok(0) if got == 0 => return Err(ReadError::Closed),
            Ok(0) => return Err(ReadError::Io(io::ErrorKind::UnexpectedEof.into())),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(ReadError::Io(e)),
        }
    }
    let len = u32::from_le_bytes(header[..4].try_into().unwrap());
    if len as usize > MAX_PAYLOAD {
        return Err(ReadError::Oversized(len));
    }
    let mut payload = vec![0u8; len as usize];
    r.read_exact(&mut payload).map_err(ReadError::Io)?;
    match FrameType::from_byte(header[4]) {
        Some(frame_type) => Ok(Frame { frame_type, payload }),
        None => Err(ReadError::UnknownType(header[4])),
    }
}

pub fn encode_query(query: &Query) -> Result<Vec<u8>> {
    let count = u16::try_from(query.len())
        .map_err(|_| Error::Encode(format!("{} sums exceed the u16 sum count", query.len())))?;
    let mut out = Vec::with_capacity(2 + query.len() + 6 * query.total_terms());
    out.extend_from_slice(&count.to_le_bytes());
    for sum in query.sums() {
        let terms = u8::try_from(sum.len())
            .map_err(|_| Error::Encode(format!("{} terms exceed the u8 term count", sum.len())))?;
        out.push(terms);
        for t in sum.terms() {
            let msg = u16::try_from(t.message)
                .map_err(|_| Error::Encode(format!("message id {} exceeds u16", t.message)))?;
            let idx = u32::try_from(t.index)
                .map_err(|_| Error::Encode(format!("symbol index {} exceeds u32", t.index)))?;
            out.extend_from_slice(&msg.to_le_bytes());
            out.extend_from_slice(&idx.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let s = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::Protocol(format!("payload truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode_query(payload: &[u8]) -> Result<Query> {
    let mut c = Cursor { buf: payload, pos: 0 };
    let count = c.u16()?;
    let mut sums = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let n = c.u8()?;
        let mut terms = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let message = c.u16()? as usize;
            let index = c.u32()? as usize;
            terms.push(Term::new(message, index));
        }
        sums.push(SymbolSum::new(terms).map_err(|e| Error::Protocol(e.to_string()))?);
    }
    if c.pos != payload.len() {
        return Err(Error::Protocol(format!("{} trailing bytes after query", payload.len() - c.pos)));
    }
    Ok(Query::new(sums))
}

/// Instance description returned for CONFIG_REQ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServerConfig {
    pub databases: u32,
    pub messages: u32,
    pub message_len: u32,
    pub cache_num: u32,
    pub cache_den: u32,
}

impl ServerConfig {
    pub fn for_params(params: &pirlab_core::SchemeParams) -> Result<Self> {
        let f = |v: usize, what: &str| u32::try_from(v).map_err(|_| Error::Encode(format!("{what} = {v} exceeds u32")));
        Ok(ServerConfig {
            databases: f(params.num_databases(), "N")?,
            messages: f(params.num_messages(), "K")?,
            message_len: f(params.message_len(), "L")?,
            cache_num: f(params.cache_numerator(), "p")?,
            cache_den: f(params.cache_denominator(), "q")?,
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        [self.databases, self.messages, self.message_len, self.cache_num, self.cache_den]
            .iter()
            .flat_map(|v| v.to_le_bytes())
            .collect()
    }

    pub fn decode(payload: &[u8]) -> Result<Self> {
        if payload.len() != 20 {
            return Err(Error::Protocol(format!("config payload of {} bytes, expected 20", payload.len())));
        }
        let mut c = Cursor { buf: payload, pos: 0 };
        Ok(ServerConfig {
            databases: c.u32()?,
            messages: c.u32()?,
            message_len: c.u32()?,
            cache_num: c.u32()?,
            cache_den: c.u32()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_sizes() {
        assert_eq!(encode_query(&Query::default()).unwrap(), vec![0, 0]);
        let q = Query::new(vec![SymbolSum::singleton(0, 3)]);
        let bytes = encode_query(&q).unwrap();
        assert_eq!(bytes, vec![1, 0, 1, 0, 0, 3, 0, 0, 0]);
        assert_eq!(decode_query(&bytes).unwrap(), q);
    }

    #[test]
    fn encoding_limits() {
        let big = Query::new(vec![SymbolSum::singleton(0, 0); 65_536]);
        assert!(matches!(encode_query(&big), Err(Error::Encode(_))));
        let wide = Query::new(vec![SymbolSum::singleton(70_000, 0)]);
        assert!(matches!(encode_query(&wide), Err(Error::Encode(_))));
        let far = Query::new(vec![SymbolSum::singleton(0, 1 << 33)]);
        assert!(matches!(encode_query(&far), Err(Error::Encode(_))));
        let terms = (0..256).map(|m| Term::new(m, 0)).collect();
        let long = Query::new(vec![SymbolSum::new(terms).unwrap()]);
        assert!(matches!(encode_query(&long), Err(Error::Encode(_))));
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(decode_query(&[]).is_err());
        assert!(decode_query(&[1, 0]).is_err());
        // zero-term sum
        assert!(decode_query(&[1, 0, 0]).is_err());
        // repeated message in one sum
        assert!(decode_query(&[1, 0, 2, 0, 0, 1, 0, 0, 0, 0, 0, 2, 0, 0, 0]).is_err());
        assert!(decode_query(&[0, 0, 9]).is_err());
    }

    #[test]
    fn frame_round_trip() {
        let f = Frame::new(FrameType::Answer, vec![1, 2, 3]);
        let bytes = f.to_bytes().unwrap();
        assert_eq!(bytes, vec![3, 0, 0, 0, 0x02, 1, 2, 3]);
        assert_eq!(read_frame(&mut bytes.as_slice()).unwrap(), f);
        assert!(matches!(read_frame(&mut &[][..]), Err(ReadError::Closed)));
        assert!(matches!(read_frame(&mut &[0, 0, 0, 0, 0x55][..]), Err(ReadError::UnknownType(0x55))));
        assert!(matches!(read_frame(&mut &[0, 0, 0, 8, 0x01][..]), Err(ReadError::Oversized(_))));
        assert!(matches!(read_frame(&mut &[3, 0, 0][..]), Err(ReadError::Io(_))));
    }

    #[test]
    fn config_round_trip() {
        let params = pirlab_core::SchemeParams::new(2, 3, 1, 2, 1).unwrap();
        let c = ServerConfig::for_params(&params).unwrap();
        assert_eq!((c.databases, c.messages, c.message_len, c.cache_num, c.cache_den), (2, 3, 16, 1, 2));
        let bytes = c.encode();
        assert_eq!(bytes.len(), 20);
        assert_eq!(ServerConfig::decode(&bytes).unwrap(), c);
        assert!(ServerConfig::decode(&bytes[..19]).is_err());
    }
}
