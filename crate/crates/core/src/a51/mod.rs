//! A5/1 stream cipher with parameterized register geometry.
//!
//! Three linear feedback shift registers are stepped under majority rule:
//! a register moves only when its clock bit agrees with the majority of the
//! three clock bits. One keystream bit is the XOR of the three output bits,
//! sampled after clocking.
//!
//! All integers are LSB-first: bit 0 of the key is loaded first, bit 0 of a
//! register is the cell that receives the feedback.

mod load;
mod params;
mod rollback;

use arrayvec::ArrayVec;

pub use load::LoadInverse;
pub use params::{CipherParams, ParamsError, Preset, RegisterSpec};
pub use rollback::{recover_key, KeyRecovery, RecoverError, DEFAULT_NODE_BUDGET};

/// Number of keystream bits generated per TDMA frame (downlink then uplink).
pub const FRAME_KEYSTREAM_BITS: usize = 228;
/// Keystream bits per direction.
pub const HALF_KEYSTREAM_BITS: usize = 114;

/// Mask of the low key bits that the weak key generator zeroes.
pub const WEAK_KEY_MASK: u64 = 0x3ff;

/// Internal state of the three registers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CipherState {
    pub regs: [u64; 3],
}

impl CipherState {
    pub const ZERO: CipherState = CipherState { regs: [0; 3] };

    pub fn new(r1: u64, r2: u64, r3: u64) -> Self {
        CipherState { regs: [r1, r2, r3] }
    }

    /// Concatenate the registers into one integer, R1 in the low bits.
    pub fn pack(&self, params: &CipherParams) -> u64 {
        let [a, b, _] = params.registers.map(|r| r.len);
        self.regs[0] | (self.regs[1] << a) | (self.regs[2] << (a + b))
    }

    pub fn unpack(params: &CipherParams, packed: u64) -> Self {
        let [a, b, _] = params.registers.map(|r| r.len);
        CipherState {
            regs: [
                packed & params.registers[0].mask(),
                (packed >> a) & params.registers[1].mask(),
                (packed >> (a + b)) & params.registers[2].mask(),
            ],
        }
    }

    pub fn is_valid(&self, params: &CipherParams) -> bool {
        self.regs
            .iter()
            .zip(params.registers.iter())
            .all(|(r, spec)| r & !spec.mask() == 0)
    }
}

pub(crate) fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// A session key `Kc`.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub struct SessionKey {
    pub kc: u64,
    pub weak: bool,
}

impl SessionKey {
    pub fn new(kc: u64) -> Self {
        SessionKey { kc, weak: false }
    }

    /// Key with its ten low bits cleared, as produced by the weakened key
    /// generator.
    pub fn weakened(kc: u64) -> Self {
        SessionKey {
            kc: weaken(kc),
            weak: true,
        }
    }
}

pub fn weaken(kc: u64) -> u64 {
    kc & !WEAK_KEY_MASK
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetupError {
    #[error("frame number {frame} does not fit in {bits} bits")]
    FrameOutOfRange { frame: u32, bits: u32 },
    #[error("key {kc:#x} does not fit in {bits} bits")]
    KeyOutOfRange { kc: u64, bits: u32 },
}

#[inline]
fn step(reg: u64, spec: &RegisterSpec) -> u64 {
    let fb = (reg & spec.taps).count_ones() as u64 & 1;
    ((reg << 1) | fb) & spec.mask()
}

#[inline]
fn output(params: &CipherParams, state: &CipherState) -> bool {
    let mut bit = 0;
    for (r, spec) in state.regs.iter().zip(params.registers.iter()) {
        bit ^= (r >> spec.output_bit) & 1;
    }
    bit == 1
}

/// Which registers the majority rule steps from `state`, as a 3-bit mask.
#[inline]
pub fn clocked_registers(params: &CipherParams, state: &CipherState) -> u8 {
    let r = &params.registers;
    let b0 = (state.regs[0] >> r[0].clock_bit) & 1;
    let b1 = (state.regs[1] >> r[1].clock_bit) & 1;
    let b2 = (state.regs[2] >> r[2].clock_bit) & 1;
    let maj = (b0 & b1) | (b0 & b2) | (b1 & b2);
    (u8::from(b0 == maj)) | (u8::from(b1 == maj) << 1) | (u8::from(b2 == maj) << 2)
}

#[inline]
fn majority_step(params: &CipherParams, state: &mut CipherState) {
    let moved = clocked_registers(params, state);
    for i in 0..3 {
        // branch-free select: the moved pattern is unpredictable
        let keep = u64::from(moved >> i & 1).wrapping_sub(1);
        let r = state.regs[i];
        state.regs[i] = (r & keep) | (step(r, &params.registers[i]) & !keep);
    }
}

/// Step every register once and XOR `bit` into the freshly shifted-in cell.
fn load_bit(params: &CipherParams, state: &mut CipherState, bit: u64) {
    for (r, spec) in state.regs.iter_mut().zip(params.registers.iter()) {
        *r = step(*r, spec) ^ bit;
    }
}

/// Load phase only: key bits then frame bits with regular clocking.
pub(crate) fn load(params: &CipherParams, kc: u64, frame: u32) -> CipherState {
    let mut state = CipherState::ZERO;
    for i in 0..params.key_bits {
        load_bit(params, &mut state, (kc >> i) & 1);
    }
    for i in 0..params.frame_bits {
        load_bit(params, &mut state, u64::from(frame >> i) & 1);
    }
    state
}

/// Run key and frame setup, returning the state from which keystream starts.
pub fn key_setup(
    params: &CipherParams,
    key: SessionKey,
    frame: u32,
) -> Result<CipherState, SetupError> {
    if params.frame_bits < 32 && frame >> params.frame_bits != 0 {
        return Err(SetupError::FrameOutOfRange {
            frame,
            bits: params.frame_bits,
        });
    }
    if key.kc & !mask(params.key_bits) != 0 {
        return Err(SetupError::KeyOutOfRange {
            kc: key.kc,
            bits: params.key_bits,
        });
    }
    let mut state = load(params, key.kc, frame);
    for _ in 0..params.mix_clocks {
        majority_step(params, &mut state);
    }
    Ok(state)
}

/// One majority clock. The output bit is read from the new state.
pub fn clock_forward(params: &CipherParams, state: &CipherState) -> (CipherState, bool) {
    let mut next = *state;
    majority_step(params, &mut next);
    let bit = output(params, &next);
    (next, bit)
}

/// Advance `n` clocks, discarding output.
pub fn advance(params: &CipherParams, state: &CipherState, n: usize) -> CipherState {
    let mut s = *state;
    for _ in 0..n {
        majority_step(params, &mut s);
    }
    s
}

/// `n` keystream bits starting from `state`, one entry per bit.
pub fn keystream(params: &CipherParams, state: &CipherState, n: usize) -> Vec<bool> {
    let mut s = *state;
    (0..n)
        .map(|_| {
            majority_step(params, &mut s);
            output(params, &s)
        })
        .collect()
}

/// Up to 64 keystream bits packed LSB-first: bit `i` is the `i`-th output.
#[inline]
pub fn keystream_word(params: &CipherParams, state: &CipherState, n: u32) -> u64 {
    debug_assert!(n <= 64);
    let mut s = *state;
    let mut word = 0u64;
    for i in 0..n {
        majority_step(params, &mut s);
        word |= u64::from(output(params, &s)) << i;
    }
    word
}

/// The 228 keystream bits for one frame: downlink half then uplink half.
pub fn frame_keystream(
    params: &CipherParams,
    key: SessionKey,
    frame: u32,
) -> Result<Vec<bool>, SetupError> {
    let state = key_setup(params, key, frame)?;
    Ok(keystream(params, &state, FRAME_KEYSTREAM_BITS))
}

/// Every state that one forward clock maps onto `state`. Empty when
/// `state` has no predecessor.
pub fn clock_backward(params: &CipherParams, state: &CipherState) -> ArrayVec<CipherState, 4> {
    let mut out = ArrayVec::new();
    for moved in [0b111u8, 0b011, 0b101, 0b110] {
        let mut prev = *state;
        for i in 0..3 {
            if moved & (1 << i) != 0 {
                prev.regs[i] = unstep(state.regs[i], &params.registers[i]);
            }
        }
        if clocked_registers(params, &prev) == moved {
            out.push(prev);
        }
    }
    out
}

/// Inverse of a single register step. Relies on the top cell being a tap.
#[inline]
fn unstep(reg: u64, spec: &RegisterSpec) -> u64 {
    let shifted = reg >> 1;
    let top = (reg & 1) ^ ((shifted & spec.taps).count_ones() as u64 & 1);
    shifted | (top << (spec.len - 1))
}
