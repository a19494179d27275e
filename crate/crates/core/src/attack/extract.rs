//! What the listener learns from the clear control channel, and the known
//! plaintext it can line up against enciphered bursts.

use serde::Serialize;

use crate::a51::CipherParams;
use crate::gsm::{
    cipher_frame_number, control_blocks, decode_frame, encode_frame_with_padding, parse_assignment,
    parse_system_info, CipherMode, CodedBlock, Direction, HopParams, Intercept, L2Frame,
    MessageKind, BLOCK_BITS, BLOCK_FRAMES, BURST_BITS, CIPHER_MODE_COMPLETE_INFO, CODED_BITS,
    CONTROL_BLOCKS, FILL_START, HEADER_BYTES, L2_BITS, PAD_BYTE, SACCH_PERIOD,
};
use crate::tmto::{KeystreamSample, SampleSource};

/// Facts read off cleartext control blocks.
#[derive(Clone, Debug, Default)]
pub struct Survey {
    pub control_arfcn: Option<u16>,
    /// First frame of the first system information block.
    pub first_frame: Option<u32>,
    pub cell_id: Option<u16>,
    /// Cell allocation, ascending.
    pub allocation: Vec<u16>,
    pub system_info: Option<L2Frame>,
    pub cipher: Option<CipherMode>,
    pub command_frame: Option<u32>,
    /// Hopping parameters, when the assignment was sent in the clear.
    pub hop: Option<HopParams>,
    /// Some cleartext frame carried padding other than 0x2b.
    pub random_padding: bool,
    /// Blocks on the control carrier with their clear decoding, if any.
    pub control: Vec<(CodedBlock, Option<L2Frame>)>,
}

impl Survey {
    /// First frame of the traffic channel, by the fixed script.
    pub fn traffic_start(&self) -> Option<u32> {
        self.first_frame.map(|f| f + CONTROL_BLOCKS * BLOCK_FRAMES)
    }

    /// The uplink block answering the cipher mode command.
    pub fn cipher_mode_complete(&self) -> Option<&CodedBlock> {
        let after = self.command_frame?;
        self.control
            .iter()
            .find(|(b, _)| b.frame > after && b.direction == Direction::Up)
            .map(|(b, _)| b)
    }

    /// Control blocks after the cipher mode command that did not decode in
    /// the clear.
    pub fn enciphered_control(&self) -> impl Iterator<Item = &CodedBlock> {
        let after = self.command_frame.unwrap_or(u32::MAX);
        self.control
            .iter()
            .filter(move |(b, l2)| b.frame > after && l2.is_none())
            .map(|(b, _)| b)
    }
}

pub fn survey(intercept: &Intercept) -> Survey {
    let decoded: Vec<(CodedBlock, Option<L2Frame>)> = control_blocks(intercept)
        .into_iter()
        .map(|b| {
            let l2 = decode_frame(&b.coded).ok();
            (b, l2)
        })
        .collect();
    let mut s = Survey::default();
    let Some((si_block, si)) = decoded.iter().find_map(|(b, l2)| {
        l2.as_ref()
            .filter(|f| f.kind == MessageKind::SystemInfo)
            .and_then(|f| parse_system_info(&f.info).map(|p| (b, (f.clone(), p))))
    }) else {
        return s;
    };
    let (arfcn, first) = (si_block.arfcns[0], si_block.frame);
    let (si_frame, (cell_id, allocation)) = si;
    s.control_arfcn = Some(arfcn);
    s.first_frame = Some(first);
    s.cell_id = Some(cell_id);
    s.allocation = allocation;
    s.system_info = Some(si_frame);
    s.control = decoded
        .into_iter()
        .filter(|(b, _)| b.arfcns[0] == arfcn && b.frame >= first)
        .collect();
    for (b, l2) in &s.control {
        let Some(f) = l2 else { continue };
        if f.padding.iter().any(|&p| p != PAD_BYTE) {
            s.random_padding = true;
        }
        match f.kind {
            MessageKind::CipherModeCommand if s.command_frame.is_none() => {
                s.cipher = f.info.first().and_then(|&id| CipherMode::from_id(id));
                s.command_frame = Some(b.frame);
            }
            MessageKind::Assignment if s.hop.is_none() => {
                s.hop = parse_assignment(&f.info, &s.allocation, arfcn);
            }
            _ => {}
        }
    }
    s
}

/// Known coded bits of one block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaintextGuess {
    /// First TDMA frame of the block.
    pub frame: u32,
    pub direction: Direction,
    pub slot: u8,
    pub arfcns: [u16; BLOCK_FRAMES as usize],
    /// `(position, value)` within the 456 coded bits.
    pub known: Vec<(u16, bool)>,
    pub source: SampleSource,
}

/// Split the coded form of `l2` into bits that are known from the message
/// content and bits that are known only because padding is predictable.
fn known_bits(l2: &L2Frame, random_padding: bool) -> (Vec<(u16, bool)>, Vec<(u16, bool)>) {
    let pad = vec![PAD_BYTE; l2.padding_len()];
    let (_, coded) = encode_frame_with_padding(l2, &pad).expect("known message fits");
    let content_end = (HEADER_BYTES + l2.info.len()) * 8;
    let has_padding = l2.padding_len() > 0;
    let mut content = Vec::new();
    let mut padding = Vec::new();
    for (i, &bit) in coded.iter().enumerate() {
        let p = i % BLOCK_BITS;
        let entry = (i as u16, bit);
        if p < content_end || p >= FILL_START || (!has_padding && p >= L2_BITS) {
            content.push(entry);
        } else if !random_padding {
            padding.push(entry);
        }
    }
    (content, padding)
}

fn guesses_for(
    block: &CodedBlock,
    l2: &L2Frame,
    random_padding: bool,
    source: SampleSource,
) -> Vec<PlaintextGuess> {
    let (content, padding) = known_bits(l2, random_padding);
    let mk = |known, source| PlaintextGuess {
        frame: block.frame,
        direction: block.direction,
        slot: block.slot,
        arfcns: block.arfcns,
        known,
        source,
    };
    let mut out = vec![mk(content, source)];
    if !padding.is_empty() {
        out.push(mk(padding, SampleSource::Padding));
    }
    out
}

/// Known plaintext for enciphered blocks of the session: the cipher mode
/// complete message at its fixed place in the script, and system
/// information on the traffic channel when the hopping parameters were
/// sent in the clear.
pub fn extract_known_plaintext(intercept: &Intercept) -> Vec<PlaintextGuess> {
    let s = survey(intercept);
    let mut out = Vec::new();
    if let Some(block) = s.cipher_mode_complete() {
        let cmc = L2Frame::new(
            MessageKind::CipherModeComplete,
            CIPHER_MODE_COMPLETE_INFO.to_vec(),
        );
        out.extend(guesses_for(
            block,
            &cmc,
            s.random_padding,
            SampleSource::ProtocolScript,
        ));
    }
    if let (Some(hop), Some(si), Some(start), Some(last)) = (
        &s.hop,
        &s.system_info,
        s.traffic_start(),
        intercept.last_frame(),
    ) {
        let si = L2Frame::new(MessageKind::SystemInfo, si.info.clone());
        let mut j = 0;
        while start + j * BLOCK_FRAMES <= last {
            let frame = start + j * BLOCK_FRAMES;
            if j % SACCH_PERIOD == SACCH_PERIOD - 1 {
                if let Some(block) =
                    intercept.block(frame, hop.slot, Direction::Down, |f| hop.arfcn(f))
                {
                    out.extend(guesses_for(
                        &block,
                        &si,
                        s.random_padding,
                        SampleSource::SystemInfo,
                    ));
                }
            }
            j += 1;
        }
    }
    out.sort_by_key(|g| (g.frame, g.direction));
    out
}

/// Total known coded bits across guesses, by source.
pub fn known_bit_count(guesses: &[PlaintextGuess], source: SampleSource) -> usize {
    guesses
        .iter()
        .filter(|g| g.source == source)
        .map(|g| g.known.len())
        .sum()
}

/// XOR known plaintext onto captured bursts and cut every window of
/// `params.state_bits()` consecutive known bits inside one burst into a
/// sample. A window touching a padding-derived bit is tagged as padding.
pub fn derive_samples(
    intercept: &Intercept,
    guesses: &[PlaintextGuess],
    params: &CipherParams,
) -> Vec<KeystreamSample> {
    let width = params.state_bits() as usize;
    let mut blocks: Vec<(u32, Direction, u8, [u16; 4])> = guesses
        .iter()
        .map(|g| (g.frame, g.direction, g.slot, g.arfcns))
        .collect();
    blocks.sort();
    blocks.dedup();

    let mut out = Vec::new();
    for (frame, direction, slot, arfcns) in blocks {
        let mut known: Vec<Option<bool>> = vec![None; CODED_BITS];
        let mut source: Vec<Option<SampleSource>> = vec![None; CODED_BITS];
        for g in guesses.iter().filter(|g| {
            g.frame == frame && g.direction == direction && g.slot == slot && g.arfcns == arfcns
        }) {
            for &(pos, bit) in &g.known {
                known[pos as usize] = Some(bit);
                source[pos as usize] = Some(g.source);
            }
        }
        for (i, &arfcn) in arfcns.iter().enumerate() {
            let f = frame + i as u32;
            let Some(burst) = intercept.find(f, slot, direction, arfcn) else {
                continue;
            };
            let base = i * BURST_BITS;
            let ks: Vec<Option<bool>> = (0..BURST_BITS)
                .map(|j| known[base + j].map(|p| p ^ burst.payload[j]))
                .collect();
            let srcs = &source[base..base + BURST_BITS];
            let mut run = 0usize;
            for end in 0..BURST_BITS {
                run = if ks[end].is_some() { run + 1 } else { 0 };
                if run < width {
                    continue;
                }
                let start = end + 1 - width;
                let bits = ks[start..=end]
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (k, b)| acc | (u64::from(b.unwrap()) << k));
                let window = &srcs[start..=end];
                let tag = if window.contains(&Some(SampleSource::Padding)) {
                    SampleSource::Padding
                } else {
                    window[0].unwrap()
                };
                out.push(KeystreamSample {
                    bits,
                    frame: cipher_frame_number(params, f),
                    tdma_frame: f,
                    offset: start as u32,
                    direction,
                    source: tag,
                });
            }
        }
    }
    out
}
