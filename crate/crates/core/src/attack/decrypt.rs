use serde::Serialize;

use super::crack::decipher_block;
use super::extract::{survey, Survey};
use super::AttackError;
use crate::a51::SessionKey;
use crate::gsm::{
    decode_frame, parse_assignment, Channel, CipherMode, CodedBlock, Direction, HopParams,
    Intercept, MessageKind, ScriptedMessage, BLOCK_FRAMES,
};

/// Messages read back from a capture.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub messages: Vec<ScriptedMessage>,
    /// Enciphered blocks that deciphered to a valid frame.
    pub decrypted_frames: usize,
    /// Blocks that did not decode (bit errors or a wrong key).
    pub crc_failures: usize,
    /// Enciphered blocks left alone for lack of a key.
    pub undecrypted: usize,
    /// Traffic blocks with at least one burst absent from the capture.
    pub missing_blocks: usize,
    pub hop: Option<HopParams>,
}

fn read_block(
    t: &mut Transcript,
    block: &CodedBlock,
    channel: Channel,
    mode: CipherMode,
    key: Option<SessionKey>,
    params: &crate::a51::CipherParams,
) {
    if let Ok(l2) = decode_frame(&block.coded) {
        t.messages.push(ScriptedMessage {
            frame: block.frame,
            direction: block.direction,
            channel,
            l2,
            enciphered: false,
        });
        return;
    }
    let Some(key) = key.filter(|_| mode != CipherMode::None) else {
        if mode == CipherMode::None {
            t.crc_failures += 1;
        } else {
            t.undecrypted += 1;
        }
        return;
    };
    match decode_frame(&decipher_block(params, mode, key, block)) {
        Ok(l2) => {
            t.decrypted_frames += 1;
            t.messages.push(ScriptedMessage {
                frame: block.frame,
                direction: block.direction,
                channel,
                l2,
                enciphered: true,
            });
        }
        Err(_) => t.crc_failures += 1,
    }
}

/// Read the whole session: control blocks in the clear or deciphered with
/// `key`, then the traffic channel followed through its hopping sequence.
/// Hopping parameters come from the assignment, deciphered first when it
/// was sent after ciphering started.
pub fn dehop_decrypt(
    intercept: &Intercept,
    key: Option<SessionKey>,
) -> Result<Transcript, AttackError> {
    dehop_with_survey(intercept, &survey(intercept), key)
}

pub(crate) fn dehop_with_survey(
    intercept: &Intercept,
    s: &Survey,
    key: Option<SessionKey>,
) -> Result<Transcript, AttackError> {
    let params = intercept
        .header
        .preset
        .params()
        .ok_or(AttackError::UnknownPreset)?;
    let control_arfcn = s.control_arfcn.ok_or(AttackError::NoControlChannel)?;
    let mode = s.cipher.unwrap_or(CipherMode::A51);
    let mut t = Transcript::default();
    for (block, _) in &s.control {
        read_block(&mut t, block, Channel::Control, mode, key, &params);
    }
    t.hop = s.hop.clone().or_else(|| {
        t.messages
            .iter()
            .find(|m| m.l2.kind == MessageKind::Assignment)
            .and_then(|m| parse_assignment(&m.l2.info, &s.allocation, control_arfcn))
    });
    let (Some(hop), Some(start), Some(last)) =
        (t.hop.clone(), s.traffic_start(), intercept.last_frame())
    else {
        return Ok(t);
    };
    let mut frame = start;
    while frame <= last {
        let mut present = 0;
        for dir in [Direction::Down, Direction::Up] {
            match intercept.block(frame, hop.slot, dir, |f| hop.arfcn(f)) {
                Some(block) => {
                    present += 1;
                    read_block(&mut t, &block, Channel::Traffic, mode, key, &params);
                }
                None => t.missing_blocks += 1,
            }
        }
        if present == 0 {
            t.missing_blocks -= 2;
            break;
        }
        frame += BLOCK_FRAMES;
    }
    t.messages.sort_by_key(|m| (m.frame, m.direction));
    Ok(t)
}
