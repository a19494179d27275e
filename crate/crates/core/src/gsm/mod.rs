//! Deterministic model of the GSM air interface as a passive listener
//! sees it.

mod auth;
mod burst;
mod capture;
mod cell;
mod cipher;
mod frame;
mod hopping;
mod session;

use serde::{Deserialize, Serialize};

pub use auth::{
    derive_session_key, recorded_challenge, replay_challenge, replay_session, ReplayError,
    ReplayWitness, Subscriber,
};
pub use burst::{Burst, BURST_BITS, SLOTS_PER_FRAME, SLOT_TENTHS_US};
pub use capture::{
    capture_bytes, parse_capture, parse_capture_bytes, read_capture, read_truth, truth_path,
    write_capture, CaptureError, CAPTURE_VERSION,
};
pub use cell::{AssignmentMode, CellConfig, CellError, CipherMode, SessionConfig};
pub use cipher::{apply_cipher, burst_keystream, cipher_frame_number, strong_keystream};
pub use frame::{
    crc16, decode_frame, encode_frame, encode_frame_with_padding, DecodeError, FrameError, L2Frame,
    MessageKind, BLOCK_BITS, CODED_BITS, CRC_BITS, FILL_START, HEADER_BYTES, L2_BITS, L2_BYTES,
    MAX_INFO_BYTES, PAD_BYTE,
};
pub use hopping::{hop_arfcn, hop_index, HopParams, HYPERFRAME};
pub use session::{
    assignment_bytes, control_blocks, corrupt, corrupt_counted, parse_assignment,
    parse_system_info, run_session, system_info_bytes, CaptureHeader, CaptureLog, Channel,
    CodedBlock, GroundTruth, Intercept, ScriptedMessage, BLOCK_FRAMES, CIPHER_MODE_COMPLETE_INFO,
    CONTROL_BLOCKS, CONTROL_SLOT, SACCH_PERIOD,
};

/// Link direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// Base station to mobile.
    Down,
    /// Mobile to base station.
    Up,
}

impl Direction {
    pub fn letter(self) -> char {
        match self {
            Direction::Down => 'D',
            Direction::Up => 'U',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'D' => Some(Direction::Down),
            'U' => Some(Direction::Up),
            _ => None,
        }
    }
}
