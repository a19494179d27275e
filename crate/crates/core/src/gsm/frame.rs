//! L2 frames and the simplified channel coding.
//!
//! A 23-byte L2 frame is `kind, length, info, padding`. Coding appends a
//! CRC-16 over those 23 bytes, zero-fills to 228 bits and repeats the block
//! once, giving 456 coded bits that travel in four 114-bit bursts. There is
//! no error correction: any bit error makes the frame undecodable.

use crc::{Crc, CRC_16_IBM_3740};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::{bits_to_bytes, bytes_to_bits};

pub const L2_BYTES: usize = 23;
pub const HEADER_BYTES: usize = 2;
pub const MAX_INFO_BYTES: usize = L2_BYTES - HEADER_BYTES;
pub const L2_BITS: usize = L2_BYTES * 8;
pub const CRC_BITS: usize = 16;
/// First zero-fill bit of each coded block.
pub const FILL_START: usize = L2_BITS + CRC_BITS;
pub const BLOCK_BITS: usize = 228;
pub const CODED_BITS: usize = 2 * BLOCK_BITS;
pub const PAD_BYTE: u8 = 0x2b;

const CRC16: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);

pub fn crc16(bytes: &[u8]) -> u16 {
    CRC16.checksum(bytes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    SystemInfo,
    AuthRequest,
    CipherModeCommand,
    CipherModeComplete,
    Assignment,
    Traffic,
}

impl MessageKind {
    pub fn tag(self) -> u8 {
        match self {
            MessageKind::SystemInfo => 1,
            MessageKind::AuthRequest => 2,
            MessageKind::CipherModeCommand => 3,
            MessageKind::CipherModeComplete => 4,
            MessageKind::Assignment => 5,
            MessageKind::Traffic => 6,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            1 => MessageKind::SystemInfo,
            2 => MessageKind::AuthRequest,
            3 => MessageKind::CipherModeCommand,
            4 => MessageKind::CipherModeComplete,
            5 => MessageKind::Assignment,
            6 => MessageKind::Traffic,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2Frame {
    pub kind: MessageKind,
    pub info: Vec<u8>,
    /// Filler up to 23 bytes. Empty until the frame is encoded.
    pub padding: Vec<u8>,
}

impl L2Frame {
    pub fn new(kind: MessageKind, info: impl Into<Vec<u8>>) -> Self {
        L2Frame {
            kind,
            info: info.into(),
            padding: Vec::new(),
        }
    }

    pub fn padding_len(&self) -> usize {
        MAX_INFO_BYTES.saturating_sub(self.info.len())
    }

    /// The 23 frame bytes.
    pub fn bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(L2_BYTES);
        out.push(self.kind.tag());
        out.push(self.info.len() as u8);
        out.extend_from_slice(&self.info);
        out.extend_from_slice(&self.padding);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("info of {0} bytes exceeds the {MAX_INFO_BYTES}-byte limit")]
    Oversize(usize),
    #[error("padding of {got} bytes given, {need} required")]
    PaddingLength { got: usize, need: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("expected {CODED_BITS} coded bits, got {0}")]
    Length(usize),
    #[error("repeated blocks differ")]
    RepeatMismatch,
    #[error("zero fill is not zero")]
    BadFill,
    #[error("CRC mismatch")]
    Crc,
    #[error("unknown message kind {0}")]
    UnknownKind(u8),
    #[error("length field {0} exceeds the frame")]
    BadLength(u8),
}

/// Encode with explicit padding bytes.
pub fn encode_frame_with_padding(
    frame: &L2Frame,
    padding: &[u8],
) -> Result<(L2Frame, Vec<bool>), FrameError> {
    if frame.info.len() > MAX_INFO_BYTES {
        return Err(FrameError::Oversize(frame.info.len()));
    }
    let need = frame.padding_len();
    if padding.len() != need {
        return Err(FrameError::PaddingLength {
            got: padding.len(),
            need,
        });
    }
    let mut padded = frame.clone();
    padded.padding = padding.to_vec();
    let bytes = padded.bytes();
    let crc = crc16(&bytes);
    let mut block = bytes_to_bits(&bytes);
    block.extend(bytes_to_bits(&crc.to_le_bytes()));
    block.resize(BLOCK_BITS, false);
    let mut coded = block.clone();
    coded.extend_from_slice(&block);
    Ok((padded, coded))
}

/// Encode `frame` into 456 coded bits. Padding is `0x2b` filler, or
/// uniformly random bytes when `random_padding` is set.
pub fn encode_frame(
    frame: &L2Frame,
    random_padding: bool,
    rng: &mut impl RngCore,
) -> Result<(L2Frame, Vec<bool>), FrameError> {
    if frame.info.len() > MAX_INFO_BYTES {
        return Err(FrameError::Oversize(frame.info.len()));
    }
    let mut padding = vec![PAD_BYTE; frame.padding_len()];
    if random_padding {
        rng.fill_bytes(&mut padding);
    }
    encode_frame_with_padding(frame, &padding)
}

/// Strict decode: both copies identical, zero fill intact, CRC valid.
pub fn decode_frame(coded: &[bool]) -> Result<L2Frame, DecodeError> {
    if coded.len() != CODED_BITS {
        return Err(DecodeError::Length(coded.len()));
    }
    let (a, b) = coded.split_at(BLOCK_BITS);
    if a != b {
        return Err(DecodeError::RepeatMismatch);
    }
    if a[FILL_START..].iter().any(|&x| x) {
        return Err(DecodeError::BadFill);
    }
    let bytes = bits_to_bytes(&a[..L2_BITS]);
    let crc = bits_to_bytes(&a[L2_BITS..FILL_START]);
    if crc16(&bytes) != u16::from_le_bytes([crc[0], crc[1]]) {
        return Err(DecodeError::Crc);
    }
    let kind = MessageKind::from_tag(bytes[0]).ok_or(DecodeError::UnknownKind(bytes[0]))?;
    let len = bytes[1] as usize;
    if len > MAX_INFO_BYTES {
        return Err(DecodeError::BadLength(bytes[1]));
    }
    Ok(L2Frame {
        kind,
        info: bytes[HEADER_BYTES..HEADER_BYTES + len].to_vec(),
        padding: bytes[HEADER_BYTES + len..].to_vec(),
    })
}
