//! Text capture format.
//!
//! ```text
//! #gsmlab-capture version=1 cell=1 preset=TOY epoch_us=1600000000000000 crc=1a2b3c4d
//! 123456 0 D 2 0f3a...(29 hex digits) 1600000569604
//! ```
//!
//! Records are `frame slot direction arfcn payload timestamp_us`, in
//! capture order. The payload's first bit is the most significant bit of
//! the first hex digit; the final digit's two spare bits are zero. `crc` is
//! the CRC-32 of the header line up to the space before it. Ground truth,
//! when exported, sits beside the capture with a `.truth` extension.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crc::{Crc, CRC_32_ISO_HDLC};

use super::burst::{Burst, BURST_BITS};
use super::session::{CaptureHeader, CaptureLog, GroundTruth, Intercept};
use super::Direction;
use crate::a51::Preset;
use crate::bits::{bits_to_hex, hex_to_bits};

pub const CAPTURE_VERSION: u32 = 1;
const MAGIC: &str = "#gsmlab-capture";
const HEADER_CRC: Crc<u32> = Crc::<u32>::new(&CRC_32_ISO_HDLC);

#[derive(Debug, thiserror::Error)]
pub enum CaptureError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("capture is empty")]
    Empty,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("header checksum mismatch")]
    HeaderChecksum,
    #[error("unsupported capture version {0}")]
    UnsupportedVersion(u32),
    #[error("line {line}: {reason}")]
    Record { line: usize, reason: String },
    #[error("line {0}: record out of capture order")]
    Unsorted(usize),
    #[error("line {0}: duplicate burst")]
    Duplicate(usize),
    #[error("ground truth: {0}")]
    Truth(#[from] serde_json::Error),
}

impl CaptureError {
    pub fn is_header_error(&self) -> bool {
        matches!(
            self,
            CaptureError::BadHeader(_)
                | CaptureError::HeaderChecksum
                | CaptureError::UnsupportedVersion(_)
        )
    }
}

fn header_line(h: &CaptureHeader) -> String {
    let body = format!(
        "{MAGIC} version={} cell={} preset={} epoch_us={}",
        h.version, h.cell_id, h.preset, h.epoch_us
    );
    let crc = HEADER_CRC.checksum(body.as_bytes());
    format!("{body} crc={crc:08x}")
}

/// Serialize header and bursts.
pub fn capture_bytes(header: &CaptureHeader, bursts: &[Burst]) -> String {
    let mut out = header_line(header);
    out.push('\n');
    for b in bursts {
        writeln!(
            out,
            "{} {} {} {} {} {}",
            b.frame,
            b.slot,
            b.direction.letter(),
            b.arfcn,
            bits_to_hex(&b.payload),
            header.timestamp_us(b)
        )
        .unwrap();
    }
    out
}

/// Sidecar path for a capture: same base name, `.truth` extension.
pub fn truth_path(capture: &Path) -> PathBuf {
    capture.with_extension("truth")
}

/// Write the capture, and the truth sidecar when `with_truth` is set.
/// Without it, any stale sidecar is removed so the export is attacker-mode.
pub fn write_capture(log: &CaptureLog, path: &Path, with_truth: bool) -> Result<(), CaptureError> {
    fs::write(path, capture_bytes(&log.header, &log.bursts))?;
    let tp = truth_path(path);
    if with_truth {
        fs::write(&tp, serde_json::to_vec_pretty(&log.truth)?)?;
    } else if tp.exists() {
        fs::remove_file(&tp)?;
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<CaptureHeader, CaptureError> {
    let bad = |m: &str| CaptureError::BadHeader(m.to_string());
    let (body, crc) = line
        .rsplit_once(" crc=")
        .ok_or_else(|| bad("missing crc field"))?;
    let canonical = crc.len() == 8 && crc.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
    let crc = u32::from_str_radix(crc, 16)
        .ok()
        .filter(|_| canonical)
        .ok_or_else(|| bad("crc is not 8 lowercase hex digits"))?;
    if HEADER_CRC.checksum(body.as_bytes()) != crc {
        return Err(CaptureError::HeaderChecksum);
    }
    let mut fields = body.split(' ');
    if fields.next() != Some(MAGIC) {
        return Err(bad("not a gsmlab capture"));
    }
    let mut get = |key: &str| -> Result<String, CaptureError> {
        let f = fields
            .next()
            .ok_or_else(|| bad(&format!("missing {key}")))?;
        f.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| bad(&format!("expected {key}=")))
    };
    let version: u32 = get("version")?.parse().map_err(|_| bad("bad version"))?;
    if version != CAPTURE_VERSION {
        return Err(CaptureError::UnsupportedVersion(version));
    }
    let cell_id = get("cell")?.parse().map_err(|_| bad("bad cell id"))?;
    let preset: Preset = get("preset")?.parse().map_err(|e: String| bad(&e))?;
    if preset == Preset::Custom {
        return Err(bad("custom cipher parameters cannot be stored"));
    }
    let epoch_us = get("epoch_us")?.parse().map_err(|_| bad("bad epoch"))?;
    if fields.next().is_some() {
        return Err(bad("unexpected trailing field"));
    }
    Ok(CaptureHeader {
        version,
        cell_id,
        preset,
        epoch_us,
    })
}

fn parse_record(header: &CaptureHeader, line: &str) -> Result<Burst, String> {
    let f: Vec<&str> = line.split(' ').collect();
    if f.len() != 6 {
        return Err(format!("expected 6 fields, found {}", f.len()));
    }
    let frame: u32 = f[0].parse().map_err(|_| "bad frame number")?;
    let slot: u8 = f[1].parse().map_err(|_| "bad slot")?;
    if slot >= 8 {
        return Err("slot out of range".into());
    }
    let mut dir = f[2].chars();
    let direction = match (dir.next(), dir.next()) {
        (Some(c), None) => Direction::from_letter(c).ok_or("direction must be U or D")?,
        _ => return Err("direction must be U or D".into()),
    };
    let arfcn: u16 = f[3].parse().map_err(|_| "bad arfcn")?;
    let payload = hex_to_bits(f[4], BURST_BITS)
        .ok_or("payload must be 29 lowercase hex digits with zero spare bits")?;
    let ts: u64 = f[5].parse().map_err(|_| "bad timestamp")?;
    let burst = Burst {
        frame,
        slot,
        direction,
        arfcn,
        payload,
    };
    if ts != header.timestamp_us(&burst) {
        return Err("timestamp does not match frame and slot".into());
    }
    Ok(burst)
}

/// Parse capture text into the attacker's view.
pub fn parse_capture(text: &str) -> Result<Intercept, CaptureError> {
    let mut lines = text.lines();
    let header = parse_header(lines.next().ok_or(CaptureError::Empty)?)?;
    let mut bursts: Vec<Burst> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.is_empty() {
            continue;
        }
        let b = parse_record(&header, line).map_err(|reason| CaptureError::Record {
            line: lineno,
            reason,
        })?;
        if let Some(prev) = bursts.last() {
            if prev.order_key() > b.order_key() {
                return Err(CaptureError::Unsorted(lineno));
            }
        }
        if !seen.insert((b.frame, b.slot, b.direction, b.arfcn)) {
            return Err(CaptureError::Duplicate(lineno));
        }
        bursts.push(b);
    }
    Ok(Intercept::new(header, bursts))
}

/// Parse raw capture bytes. Text that is not UTF-8 is reported against the
/// header or the record it occurs in.
pub fn parse_capture_bytes(bytes: &[u8]) -> Result<Intercept, CaptureError> {
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .unwrap_or(bytes.len());
    if std::str::from_utf8(&bytes[..header_end]).is_err() {
        return Err(CaptureError::BadHeader("header is not text".into()));
    }
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_capture(text),
        Err(e) => {
            let line = 1 + bytes[..e.valid_up_to()]
                .iter()
                .filter(|&&b| b == b'\n')
                .count();
            Err(CaptureError::Record {
                line,
                reason: "record is not text".into(),
            })
        }
    }
}

pub fn read_capture(path: &Path) -> Result<Intercept, CaptureError> {
    parse_capture_bytes(&fs::read(path)?)
}

/// Read the ground-truth sidecar of a capture.
pub fn read_truth(capture: &Path) -> Result<GroundTruth, CaptureError> {
    Ok(serde_json::from_slice(&fs::read(truth_path(capture))?)?)
}
