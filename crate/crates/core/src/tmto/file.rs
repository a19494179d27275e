//! On-disk table format.
//!
//! All integers little-endian. A 64-byte header:
//!
//! | offset | size | field                                   |
//! |-------:|-----:|-----------------------------------------|
//! | 0      | 4    | magic `GTMT`                            |
//! | 4      | 4    | version (1)                             |
//! | 8      | 8    | table id                                |
//! | 16     | 4    | cipher preset (0 FULL, 1 TOY)           |
//! | 20     | 4    | sample width                            |
//! | 24     | 4    | colors                                  |
//! | 28     | 4    | distinguished point bits                |
//! | 32     | 8    | max steps per color                     |
//! | 40     | 8    | record count                            |
//! | 48     | 8    | seed                                    |
//! | 56     | 1    | search space (0 state, 1 weak key)      |
//! | 57     | 3    | weak-key frame number (24 bits)         |
//! | 60     | 4    | CRC-32 of bytes 0..60                   |
//!
//! followed by `count` records of `(end u64, start u64)`, strictly
//! ascending by `end`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crc::{Crc, CRC_32_ISO_HDLC};

use super::{ChainRecord, SearchSpace, TmtoParams, TmtoTable};
use crate::a51::Preset;

pub const MAGIC: [u8; 4] = *b"GTMT";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;
pub const RECORD_LEN: usize = 16;

const HEADER_CRC: Crc<u32> = Crc::<u32>::new(&CRC_32_ISO_HDLC);

#[derive(Debug, thiserror::Error)]
pub enum TableFileError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("file is truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("{0} unexpected bytes after the last record")]
    TrailingBytes(u64),
    #[error("bad magic number")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("records out of order at index {0}")]
    Unsorted(u64),
    #[error("record {0} lies outside the table domain")]
    BadRecord(u64),
}

impl TableFileError {
    /// Whether the error concerns the 64-byte header.
    pub fn is_header_error(&self) -> bool {
        matches!(
            self,
            TableFileError::BadMagic
                | TableFileError::UnsupportedVersion(_)
                | TableFileError::CorruptHeader(_)
        )
    }
}

fn encode_header(table: &TmtoTable) -> [u8; HEADER_LEN] {
    let p = &table.params;
    let mut h = [0u8; HEADER_LEN];
    h[0..4].copy_from_slice(&MAGIC);
    h[4..8].copy_from_slice(&VERSION.to_le_bytes());
    h[8..16].copy_from_slice(&p.table_id.to_le_bytes());
    h[16..20].copy_from_slice(&p.cipher.preset.tag().to_le_bytes());
    h[20..24].copy_from_slice(&p.sample_width.to_le_bytes());
    h[24..28].copy_from_slice(&p.colors.to_le_bytes());
    h[28..32].copy_from_slice(&p.dp_bits.to_le_bytes());
    h[32..40].copy_from_slice(&p.max_steps.to_le_bytes());
    h[40..48].copy_from_slice(&(table.records.len() as u64).to_le_bytes());
    h[48..56].copy_from_slice(&table.seed.to_le_bytes());
    h[56] = p.space.tag();
    if let SearchSpace::WeakKey { frame } = p.space {
        h[57..60].copy_from_slice(&frame.to_le_bytes()[..3]);
    }
    let crc = HEADER_CRC.checksum(&h[..60]);
    h[60..64].copy_from_slice(&crc.to_le_bytes());
    h
}

/// Serialize a table to bytes.
pub fn table_bytes(table: &TmtoTable) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * table.records.len());
    out.extend_from_slice(&encode_header(table));
    for r in &table.records {
        out.extend_from_slice(&r.end.to_le_bytes());
        out.extend_from_slice(&r.start.to_le_bytes());
    }
    out
}

pub fn write_table(table: &TmtoTable, path: &Path) -> Result<(), TableFileError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&table_bytes(table))?;
    w.flush()?;
    Ok(())
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

/// Parse a table from bytes, validating header, length and ordering.
pub fn parse_table(bytes: &[u8]) -> Result<TmtoTable, TableFileError> {
    if bytes.len() < HEADER_LEN {
        return Err(TableFileError::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let h = &bytes[..HEADER_LEN];
    if h[0..4] != MAGIC {
        return Err(TableFileError::BadMagic);
    }
    let version = u32_at(h, 4);
    if version != VERSION {
        return Err(TableFileError::UnsupportedVersion(version));
    }
    if HEADER_CRC.checksum(&h[..60]) != u32_at(h, 60) {
        return Err(TableFileError::CorruptHeader("checksum mismatch".into()));
    }
    let corrupt = |msg: String| TableFileError::CorruptHeader(msg);
    let preset_tag = u32_at(h, 16);
    let cipher = Preset::from_tag(preset_tag)
        .and_then(Preset::params)
        .ok_or_else(|| corrupt(format!("unknown cipher preset {preset_tag}")))?;
    let space = match h[56] {
        0 if h[57..60] == [0, 0, 0] => SearchSpace::State,
        1 => SearchSpace::WeakKey {
            frame: u32::from_le_bytes([h[57], h[58], h[59], 0]),
        },
        t => return Err(corrupt(format!("unknown search space {t}"))),
    };
    let params = TmtoParams::with_space(
        cipher,
        space,
        u32_at(h, 24),
        u32_at(h, 28),
        u64_at(h, 32),
        u64_at(h, 8),
    )
    .map_err(|e| corrupt(e.to_string()))?;
    let width = u32_at(h, 20);
    if width != params.sample_width {
        return Err(corrupt(format!(
            "sample width {width} does not match the cipher ({})",
            params.sample_width
        )));
    }
    let count = u64_at(h, 40);
    let seed = u64_at(h, 48);

    let body = (bytes.len() - HEADER_LEN) as u64;
    let expected = count
        .checked_mul(RECORD_LEN as u64)
        .ok_or_else(|| corrupt("record count overflows".into()))?;
    if body < expected {
        return Err(TableFileError::Truncated {
            expected: expected + HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    if body > expected {
        return Err(TableFileError::TrailingBytes(body - expected));
    }

    let mask = params.domain_mask();
    let mut records = Vec::with_capacity(count as usize);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(RECORD_LEN).enumerate() {
        let r = ChainRecord {
            end: u64_at(chunk, 0),
            start: u64_at(chunk, 8),
        };
        if r.end & !mask != 0 || r.start & !mask != 0 || !params.is_distinguished(r.end) {
            return Err(TableFileError::BadRecord(i as u64));
        }
        if let Some(prev) = records.last() {
            let prev: &ChainRecord = prev;
            if prev.end >= r.end {
                return Err(TableFileError::Unsorted(i as u64));
            }
        }
        records.push(r);
    }
    Ok(TmtoTable {
        params,
        seed,
        records,
    })
}

pub fn read_table(path: &Path) -> Result<TmtoTable, TableFileError> {
    parse_table(&fs::read(path)?)
}
