use sha2::{Digest, Sha256};

use super::burst::BURST_BITS;
use super::{CipherMode, Direction};
use crate::a51::{self, CipherParams, SessionKey, SetupError, HALF_KEYSTREAM_BITS};
use crate::bits::bytes_to_bits;

/// Frame number handed to the cipher for a TDMA frame.
pub fn cipher_frame_number(params: &CipherParams, tdma_frame: u32) -> u32 {
    (u64::from(tdma_frame) % params.frame_modulus()) as u32
}

/// 114-bit keystream of the opaque cipher.
pub fn strong_keystream(key: SessionKey, tdma_frame: u32, direction: Direction) -> Vec<bool> {
    let mut h = Sha256::new();
    h.update(b"gsmlab-strong");
    h.update(key.kc.to_le_bytes());
    h.update(tdma_frame.to_le_bytes());
    h.update([direction.letter() as u8]);
    let mut bits = bytes_to_bits(&h.finalize());
    bits.truncate(BURST_BITS);
    bits
}

/// Keystream for one burst, or `None` when `mode` does not encipher.
pub fn burst_keystream(
    mode: CipherMode,
    params: &CipherParams,
    key: SessionKey,
    tdma_frame: u32,
    direction: Direction,
) -> Result<Option<Vec<bool>>, SetupError> {
    Ok(match mode {
        CipherMode::None => None,
        CipherMode::A51 => {
            let mut ks =
                a51::frame_keystream(params, key, cipher_frame_number(params, tdma_frame))?;
            Some(match direction {
                Direction::Down => {
                    ks.truncate(HALF_KEYSTREAM_BITS);
                    ks
                }
                Direction::Up => ks.split_off(HALF_KEYSTREAM_BITS),
            })
        }
        CipherMode::StrongOpaque => Some(strong_keystream(key, tdma_frame, direction)),
    })
}

/// XOR one burst payload with its keystream. Applying it twice restores
/// the input.
pub fn apply_cipher(
    mode: CipherMode,
    params: &CipherParams,
    key: SessionKey,
    tdma_frame: u32,
    direction: Direction,
    payload: &mut [bool],
) -> Result<(), SetupError> {
    if let Some(ks) = burst_keystream(mode, params, key, tdma_frame, direction)? {
        crate::bits::xor_into(payload, &ks);
    }
    Ok(())
}
