//! Scripted sessions, the capture log and channel errors.

use std::collections::HashMap;

use rand::distributions::{Bernoulli, Distribution};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::burst::{Burst, BURST_BITS};
use super::cell::{AssignmentMode, CellConfig, CellError, CipherMode, SessionConfig};
use super::cipher::apply_cipher;
use super::frame::{encode_frame, L2Frame, MessageKind, CODED_BITS};
use super::hopping::{HopParams, HYPERFRAME};
use super::Direction;
use crate::a51::{Preset, SessionKey};

/// Every `SACCH_PERIOD`-th downlink block on the traffic channel carries
/// system information instead of traffic.
pub const SACCH_PERIOD: u32 = 6;
pub const CONTROL_SLOT: u8 = 0;
/// TDMA frames per coded block.
pub const BLOCK_FRAMES: u32 = 4;
/// Blocks on the control channel before traffic starts.
pub const CONTROL_BLOCKS: u32 = 5;
/// Payload of the cipher mode complete message.
pub const CIPHER_MODE_COMPLETE_INFO: [u8; 2] = [0x06, 0x32];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Control,
    Traffic,
}

/// One L2 message of the session as the network and mobile sent it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedMessage {
    /// First TDMA frame of the block.
    pub frame: u32,
    pub direction: Direction,
    pub channel: Channel,
    pub l2: L2Frame,
    pub enciphered: bool,
}

/// Everything the simulator knows. Only used for scoring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub cell: CellConfig,
    pub preset: Preset,
    pub key: SessionKey,
    pub rand: [u8; 16],
    pub nonce: Option<[u8; 8]>,
    pub hop: HopParams,
    pub start_frame: u32,
    pub messages: Vec<ScriptedMessage>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptureHeader {
    pub version: u32,
    pub cell_id: u16,
    pub preset: Preset,
    /// Wall-clock time of frame 0, slot 0.
    pub epoch_us: u64,
}

impl CaptureHeader {
    /// Absolute timestamp of a burst, truncated to whole microseconds.
    pub fn timestamp_us(&self, burst: &Burst) -> u64 {
        self.epoch_us + burst.start_tenths_us() / 10
    }
}

/// A capture with its ground truth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaptureLog {
    pub header: CaptureHeader,
    /// Sorted by [`Burst::order_key`].
    pub bursts: Vec<Burst>,
    pub truth: GroundTruth,
}

impl CaptureLog {
    /// The attacker's view: bursts without ground truth.
    pub fn intercept(&self) -> Intercept {
        Intercept::new(self.header.clone(), self.bursts.clone())
    }
}

type BurstKey = (u32, u8, Direction, u16);

/// What a passive listener recorded: header and bursts, nothing else.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Intercept {
    pub header: CaptureHeader,
    pub bursts: Vec<Burst>,
    index: HashMap<BurstKey, usize>,
}

impl Intercept {
    pub fn new(header: CaptureHeader, bursts: Vec<Burst>) -> Self {
        let index = bursts
            .iter()
            .enumerate()
            .map(|(i, b)| ((b.frame, b.slot, b.direction, b.arfcn), i))
            .collect();
        Intercept {
            header,
            bursts,
            index,
        }
    }

    pub fn find(&self, frame: u32, slot: u8, direction: Direction, arfcn: u16) -> Option<&Burst> {
        self.index
            .get(&(frame, slot, direction, arfcn))
            .map(|&i| &self.bursts[i])
    }

    /// Reassemble the block starting at `frame` on `slot`, with `arfcn`
    /// giving the carrier per TDMA frame. `None` if a burst is missing.
    pub fn block(
        &self,
        frame: u32,
        slot: u8,
        direction: Direction,
        arfcn: impl Fn(u32) -> u16,
    ) -> Option<CodedBlock> {
        let mut coded = Vec::with_capacity(CODED_BITS);
        let mut arfcns = [0u16; BLOCK_FRAMES as usize];
        for i in 0..BLOCK_FRAMES {
            let f = frame + i;
            let a = arfcn(f);
            coded.extend_from_slice(&self.find(f, slot, direction, a)?.payload);
            arfcns[i as usize] = a;
        }
        Some(CodedBlock {
            frame,
            slot,
            direction,
            arfcns,
            coded,
        })
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.bursts.iter().map(|b| b.frame).max()
    }
}

/// Four bursts of one block, concatenated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedBlock {
    pub frame: u32,
    pub slot: u8,
    pub direction: Direction,
    pub arfcns: [u16; BLOCK_FRAMES as usize],
    /// 456 bits as captured (still enciphered if the block was).
    pub coded: Vec<bool>,
}

/// All complete blocks on the control slot of any carrier, in time order.
pub fn control_blocks(intercept: &Intercept) -> Vec<CodedBlock> {
    let mut seen = Vec::new();
    for b in &intercept.bursts {
        if b.slot == CONTROL_SLOT && b.frame % BLOCK_FRAMES == 0 {
            seen.push((b.frame, b.direction, b.arfcn));
        }
    }
    seen.into_iter()
        .filter_map(|(frame, dir, arfcn)| intercept.block(frame, CONTROL_SLOT, dir, |_| arfcn))
        .collect()
}

/// System information payload: cell id, lowest channel and a bitmap of the
/// cell allocation relative to it.
pub fn system_info_bytes(cell: &CellConfig) -> Vec<u8> {
    let base = *cell
        .arfcn_allocation
        .iter()
        .min()
        .expect("validated allocation");
    let mut bitmap = [0u8; 16];
    for &a in &cell.arfcn_allocation {
        let j = usize::from(a - base);
        bitmap[j / 8] |= 1 << (j % 8);
    }
    let mut info = Vec::with_capacity(20);
    info.extend_from_slice(&cell.cell_id.to_le_bytes());
    info.extend_from_slice(&base.to_le_bytes());
    info.extend_from_slice(&bitmap);
    info
}

/// Inverse of [`system_info_bytes`]: cell id and ascending allocation.
pub fn parse_system_info(info: &[u8]) -> Option<(u16, Vec<u16>)> {
    if info.len() != 20 {
        return None;
    }
    let cell_id = u16::from_le_bytes([info[0], info[1]]);
    let base = u16::from_le_bytes([info[2], info[3]]);
    let alloc = (0..128u16)
        .filter(|&j| info[4 + usize::from(j / 8)] >> (j % 8) & 1 == 1)
        .map(|j| base + j)
        .collect();
    Some((cell_id, alloc))
}

/// Assignment payload: slot, hsn, maio, hopping flag, mobile allocation
/// bitmap over the cell allocation.
pub fn assignment_bytes(hop: &HopParams, ma_bitmap: u64) -> Vec<u8> {
    let mut info = vec![hop.slot, hop.hsn, hop.maio, u8::from(hop.hopping)];
    info.extend_from_slice(&ma_bitmap.to_le_bytes());
    info
}

/// Recover hopping parameters from an assignment, given the cell
/// allocation and the control carrier.
pub fn parse_assignment(info: &[u8], cell_alloc: &[u16], control_arfcn: u16) -> Option<HopParams> {
    if info.len() != 12 || info[3] > 1 {
        return None;
    }
    let hopping = info[3] == 1;
    let ma = u64::from_le_bytes(info[4..12].try_into().unwrap());
    let allocation: Vec<u16> = if hopping {
        cell_alloc
            .iter()
            .enumerate()
            .filter(|&(i, _)| i < 64 && ma >> i & 1 == 1)
            .map(|(_, &a)| a)
            .collect()
    } else {
        vec![control_arfcn]
    };
    if allocation.is_empty() || usize::from(info[2]) >= allocation.len() {
        return None;
    }
    Some(HopParams {
        slot: info[0],
        hsn: info[1],
        maio: info[2],
        allocation,
        hopping,
    })
}

struct Transmission {
    frame: u32,
    slot: u8,
    direction: Direction,
    arfcns: [u16; BLOCK_FRAMES as usize],
    frame_l2: L2Frame,
    enciphered: bool,
    key: SessionKey,
    target: bool,
}

fn traffic_frame(rng: &mut impl RngCore) -> L2Frame {
    let len = rng.gen_range(8..=super::frame::MAX_INFO_BYTES);
    let mut info = vec![0u8; len];
    rng.fill_bytes(&mut info);
    L2Frame::new(MessageKind::Traffic, info)
}

fn block_arfcns(start: u32, f: impl Fn(u32) -> u16) -> [u16; BLOCK_FRAMES as usize] {
    std::array::from_fn(|i| f(start + i as u32))
}

/// Simulate one subscriber session on `cell`.
pub fn run_session(
    cell: &CellConfig,
    session: &SessionConfig,
    seed: u64,
) -> Result<CaptureLog, CellError> {
    session.validate(cell)?;
    let params = &session.cipher_params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let blocks = CONTROL_BLOCKS + session.traffic_blocks;
    let max_start_block = (HYPERFRAME / BLOCK_FRAMES).saturating_sub(blocks).max(1);
    let start_frame = rng.gen_range(0..max_start_block) * BLOCK_FRAMES;
    let epoch_us = 1_600_000_000_000_000 + rng.gen_range(0..1_000_000_000_000u64);
    let rand = session.rand.unwrap_or_else(|| rng.gen());
    let (key, nonce) = session
        .subscriber
        .respond(params, &rand, cell.weak_keys, &mut rng);
    let slot: u8 = rng.gen_range(1..8);

    let mut sorted_alloc = cell.arfcn_allocation.clone();
    sorted_alloc.sort_unstable();
    let hop = if cell.hopping_enabled {
        HopParams {
            hsn: cell.hsn,
            maio: cell.maio,
            slot,
            allocation: sorted_alloc.clone(),
            hopping: true,
        }
    } else {
        HopParams {
            hsn: 0,
            maio: 0,
            slot,
            allocation: vec![cell.control_arfcn],
            hopping: false,
        }
    };
    let ciphered = cell.cipher != CipherMode::None;
    let ma_bitmap = crate::a51::mask(hop.allocation.len() as u32);

    let si = L2Frame::new(MessageKind::SystemInfo, system_info_bytes(cell));
    let auth = L2Frame::new(MessageKind::AuthRequest, rand.to_vec());
    let cmd = L2Frame::new(MessageKind::CipherModeCommand, vec![cell.cipher.id()]);
    let cmc = L2Frame::new(
        MessageKind::CipherModeComplete,
        CIPHER_MODE_COMPLETE_INFO.to_vec(),
    );
    let assign = L2Frame::new(MessageKind::Assignment, assignment_bytes(&hop, ma_bitmap));

    let down = Direction::Down;
    let early = cell.assignment_mode == AssignmentMode::Early;
    let control: Vec<(Direction, L2Frame, bool)> = if early {
        vec![
            (down, si.clone(), false),
            (down, auth, false),
            (down, cmd, false),
            (Direction::Up, cmc, ciphered),
            (down, assign, ciphered),
        ]
    } else {
        vec![
            (down, si.clone(), false),
            (down, assign, false),
            (down, auth, false),
            (down, cmd, false),
            (Direction::Up, cmc, ciphered),
        ]
    };

    let mut plan: Vec<Transmission> = Vec::new();
    let control_arfcn = cell.control_arfcn;
    for (k, (direction, l2, enciphered)) in control.into_iter().enumerate() {
        let frame = start_frame + k as u32 * BLOCK_FRAMES;
        plan.push(Transmission {
            frame,
            slot: CONTROL_SLOT,
            direction,
            arfcns: [control_arfcn; BLOCK_FRAMES as usize],
            frame_l2: l2,
            enciphered,
            key,
            target: true,
        });
    }

    let traffic_start = start_frame + CONTROL_BLOCKS * BLOCK_FRAMES;
    let decoy_users: Vec<(HopParams, SessionKey)> = (1..=session.decoys)
        .map(|d| {
            let mut h = hop.clone();
            if hop.hopping {
                h.maio = ((u32::from(hop.maio) + u32::from(d)) % hop.allocation.len() as u32) as u8;
            } else {
                h.slot = (1..8u8)
                    .filter(|&s| s != slot)
                    .nth(usize::from(d) - 1)
                    .unwrap();
            }
            let kc = rng.gen::<u64>() & params.key_mask();
            (h, SessionKey::new(kc))
        })
        .collect();

    for j in 0..session.traffic_blocks {
        let frame = traffic_start + j * BLOCK_FRAMES;
        let arfcns = block_arfcns(frame, |f| hop.arfcn(f));
        let down_l2 = if j % SACCH_PERIOD == SACCH_PERIOD - 1 {
            si.clone()
        } else {
            traffic_frame(&mut rng)
        };
        for (direction, l2) in [(down, down_l2), (Direction::Up, traffic_frame(&mut rng))] {
            plan.push(Transmission {
                frame,
                slot,
                direction,
                arfcns,
                frame_l2: l2,
                enciphered: ciphered,
                key,
                target: true,
            });
        }
        for (h, dkey) in &decoy_users {
            for direction in [down, Direction::Up] {
                plan.push(Transmission {
                    frame,
                    slot: h.slot,
                    direction,
                    arfcns: block_arfcns(frame, |f| h.arfcn(f)),
                    frame_l2: traffic_frame(&mut rng),
                    enciphered: ciphered,
                    key: *dkey,
                    target: false,
                });
            }
        }
    }

    let n_target = CONTROL_BLOCKS as usize + 2 * session.traffic_blocks as usize;
    let mut messages = Vec::with_capacity(n_target);
    let mut bursts = Vec::with_capacity(plan.len() * BLOCK_FRAMES as usize);
    for t in plan {
        let (padded, coded) =
            encode_frame(&t.frame_l2, cell.random_padding, &mut rng).expect("scripted info fits");
        for (b, chunk) in coded.chunks(BURST_BITS).enumerate() {
            let frame = t.frame + b as u32;
            let mut payload = chunk.to_vec();
            if t.enciphered {
                apply_cipher(cell.cipher, params, t.key, frame, t.direction, &mut payload)
                    .expect("key fits the cipher");
            }
            bursts.push(Burst {
                frame,
                slot: t.slot,
                direction: t.direction,
                arfcn: t.arfcns[b],
                payload,
            });
        }
        if t.target {
            messages.push(ScriptedMessage {
                frame: t.frame,
                direction: t.direction,
                channel: if t.slot == CONTROL_SLOT {
                    Channel::Control
                } else {
                    Channel::Traffic
                },
                l2: padded,
                enciphered: t.enciphered,
            });
        }
    }
    bursts.sort_by_key(Burst::order_key);
    messages.sort_by_key(|m| (m.frame, m.direction));
    debug_assert_eq!(messages.len(), n_target);

    let header = CaptureHeader {
        version: super::capture::CAPTURE_VERSION,
        cell_id: cell.cell_id,
        preset: params.preset,
        epoch_us,
    };
    Ok(CaptureLog {
        header,
        bursts,
        truth: GroundTruth {
            cell: cell.clone(),
            preset: params.preset,
            key,
            rand,
            nonce,
            hop,
            start_frame,
            messages,
        },
    })
}

/// Flip every payload bit independently with probability `ber`. Returns
/// the corrupted log and the number of flipped bits. Ground truth is left
/// alone.
pub fn corrupt_counted(log: &CaptureLog, ber: f64, seed: u64) -> (CaptureLog, u64) {
    assert!(
        (0.0..=1.0).contains(&ber),
        "bit error rate must lie in [0, 1]"
    );
    let dist = Bernoulli::new(ber).expect("valid probability");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = log.clone();
    let mut flips = 0;
    for b in &mut out.bursts {
        for bit in &mut b.payload {
            if dist.sample(&mut rng) {
                *bit ^= true;
                flips += 1;
            }
        }
    }
    (out, flips)
}

pub fn corrupt(log: &CaptureLog, ber: f64, seed: u64) -> CaptureLog {
    corrupt_counted(log, ber, seed).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::a51::CipherParams;
    use crate::gsm::frame::{decode_frame, PAD_BYTE};
    use std::collections::HashSet;

    fn toy_session() -> SessionConfig {
        SessionConfig::new(CipherParams::toy())
    }

    #[test]
    fn deterministic() {
        let cell = CellConfig::default();
        let a = run_session(&cell, &toy_session(), 5).unwrap();
        let b = run_session(&cell, &toy_session(), 5).unwrap();
        assert_eq!(a, b);
        let c = run_session(&cell, &toy_session(), 6).unwrap();
        assert_ne!(a.bursts, c.bursts);
    }

    #[test]
    fn bursts_are_sorted_and_unique() {
        for hopping in [true, false] {
            let cell = CellConfig {
                hopping_enabled: hopping,
                ..CellConfig::default()
            };
            let mut s = toy_session();
            s.decoys = if hopping { 7 } else { 6 };
            let log = run_session(&cell, &s, 11).unwrap();
            let keys: HashSet<_> = log
                .bursts
                .iter()
                .map(|b| (b.frame, b.slot, b.direction, b.arfcn))
                .collect();
            assert_eq!(keys.len(), log.bursts.len());
            assert!(log
                .bursts
                .windows(2)
                .all(|w| w[0].order_key() <= w[1].order_key()));
            assert!(log.bursts.iter().all(|b| b.payload.len() == BURST_BITS));
        }
    }

    #[test]
    fn cleartext_session_carries_coded_plaintext() {
        let cell = CellConfig {
            cipher: CipherMode::None,
            ..CellConfig::default()
        };
        let log = run_session(&cell, &toy_session(), 2).unwrap();
        let icpt = log.intercept();
        let hop = &log.truth.hop;
        for m in &log.truth.messages {
            let block = match m.channel {
                Channel::Control => icpt.block(m.frame, 0, m.direction, |_| cell.control_arfcn),
                Channel::Traffic => icpt.block(m.frame, hop.slot, m.direction, |f| hop.arfcn(f)),
            }
            .unwrap();
            assert_eq!(decode_frame(&block.coded).unwrap(), m.l2);
        }
    }

    #[test]
    fn early_assignment_is_only_enciphered() {
        let log = run_session(&CellConfig::default(), &toy_session(), 3).unwrap();
        let icpt = log.intercept();
        let clear: Vec<MessageKind> = control_blocks(&icpt)
            .iter()
            .filter_map(|b| decode_frame(&b.coded).ok())
            .map(|f| f.kind)
            .collect();
        assert_eq!(
            clear,
            vec![
                MessageKind::SystemInfo,
                MessageKind::AuthRequest,
                MessageKind::CipherModeCommand
            ]
        );
        let assign = log
            .truth
            .messages
            .iter()
            .find(|m| m.l2.kind == MessageKind::Assignment)
            .unwrap();
        assert!(assign.enciphered);
    }

    #[test]
    fn immediate_assignment_is_clear() {
        let cell = CellConfig {
            assignment_mode: AssignmentMode::Immediate,
            ..CellConfig::default()
        };
        let log = run_session(&cell, &toy_session(), 3).unwrap();
        let found = control_blocks(&log.intercept())
            .iter()
            .filter_map(|b| decode_frame(&b.coded).ok())
            .find(|f| f.kind == MessageKind::Assignment)
            .unwrap();
        let hop = parse_assignment(
            &found.info,
            &{
                let mut a = cell.arfcn_allocation.clone();
                a.sort_unstable();
                a
            },
            cell.control_arfcn,
        )
        .unwrap();
        assert_eq!(hop, log.truth.hop);
    }

    #[test]
    fn system_info_roundtrip() {
        let cell = CellConfig::default();
        let (id, alloc) = parse_system_info(&system_info_bytes(&cell)).unwrap();
        assert_eq!(id, cell.cell_id);
        let mut sorted = cell.arfcn_allocation.clone();
        sorted.sort_unstable();
        assert_eq!(alloc, sorted);
    }

    #[test]
    fn padding_census() {
        let log = run_session(&CellConfig::default(), &toy_session(), 9).unwrap();
        for m in &log.truth.messages {
            if m.l2.padding_len() > 0 {
                assert!(m.l2.padding.iter().all(|&b| b == PAD_BYTE));
            }
        }
        let cell = CellConfig {
            random_padding: true,
            ..CellConfig::default()
        };
        let mut s = toy_session();
        s.traffic_blocks = 200;
        let (mut pads, mut hits) = (0u64, 0u64);
        for seed in 0..10 {
            let log = run_session(&cell, &s, seed).unwrap();
            for m in &log.truth.messages {
                pads += m.l2.padding.len() as u64;
                hits += m.l2.padding.iter().filter(|&&b| b == PAD_BYTE).count() as u64;
            }
        }
        let mean = pads as f64 / 256.0;
        let sd = (pads as f64 * (1.0 / 256.0) * (255.0 / 256.0)).sqrt();
        assert!((hits as f64 - mean).abs() < 4.0 * sd, "{hits} of {pads}");
    }

    #[test]
    fn corruption_rates() {
        let log = run_session(&CellConfig::default(), &toy_session(), 1).unwrap();
        assert_eq!(corrupt(&log, 0.0, 1), log);
        let all = corrupt(&log, 1.0, 1);
        for (a, b) in all.bursts.iter().zip(&log.bursts) {
            assert!(a.payload.iter().zip(&b.payload).all(|(x, y)| x != y));
        }
        assert_eq!(all.truth, log.truth);
    }

    #[test]
    fn timestamps_follow_slot_grid() {
        let log = run_session(&CellConfig::default(), &toy_session(), 4).unwrap();
        for b in &log.bursts {
            let t = log.header.timestamp_us(b);
            let exact_tenths =
                log.header.epoch_us * 10 + (u64::from(b.frame) * 8 + u64::from(b.slot)) * 5769;
            assert!(t * 10 <= exact_tenths && exact_tenths < t * 10 + 10);
        }
    }

    #[test]
    fn weak_key_cells_zero_ten_bits() {
        let cell = CellConfig {
            weak_keys: true,
            ..CellConfig::default()
        };
        for seed in 0..20 {
            let log = run_session(&cell, &toy_session(), seed).unwrap();
            assert_eq!(log.truth.key.kc & 0x3ff, 0);
        }
    }
}
