//! Time-memory trade-off tables mapping keystream windows back to cipher
//! states.
//!
//! A chain walks the state space by reading `sample_width` keystream bits
//! from the current point and using them, XORed with a per-color round
//! constant, as the next point. Each chain runs through every color in turn;
//! within one color it keeps stepping until it reaches a distinguished point
//! (low `dp_bits` zero) or gives up after `max_steps`. Only the start and the
//! final distinguished point are stored.

mod build;
mod coverage;
mod file;
mod lookup;

use serde::Serialize;

use crate::a51::{self, key_setup, CipherParams, CipherState, SessionKey};
use crate::gsm::Direction;

pub use build::{build_table, build_table_with_threads, generate_chain, start_point, GenStats};
pub use coverage::{
    coverage_measure, covered_points, exact_coverage, exhaustive_table_set, Coverage,
};
pub use file::{
    parse_table, read_table, table_bytes, write_table, TableFileError, HEADER_LEN, MAGIC,
    RECORD_LEN, VERSION,
};
pub use lookup::{lookup, lookup_table, LookupStats};

/// Multiplier for round constants and start-point generation.
pub const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Key bits cleared by the weak key generator.
pub const WEAK_KEY_ZERO_BITS: u32 = 10;

/// What a chain point represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchSpace {
    /// A packed cipher state.
    State,
    /// The effective bits of a weak key, set up with a fixed frame number.
    /// Lookups only apply to the first downlink window of that frame.
    WeakKey { frame: u32 },
}

impl SearchSpace {
    pub fn tag(&self) -> u8 {
        match self {
            SearchSpace::State => 0,
            SearchSpace::WeakKey { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TmtoParamsError {
    #[error("at least one color is required")]
    NoColors,
    #[error("distinguished point mask of {dp_bits} bits must be narrower than {width}")]
    DpTooWide { dp_bits: u32, width: u32 },
    #[error("max_steps_per_color must be at least 1")]
    ZeroSteps,
    #[error("round constants {0} and {1} coincide")]
    DuplicateRoundConstant(usize, usize),
    #[error("weak-key space needs more than {WEAK_KEY_ZERO_BITS} key bits")]
    KeyTooNarrow,
    #[error("frame {0} out of range for the cipher")]
    FrameOutOfRange(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TmtoParams {
    #[serde(skip)]
    pub cipher: CipherParams,
    pub space: SearchSpace,
    /// Keystream bits read per chain step; equals the cipher state width.
    pub sample_width: u32,
    pub colors: u32,
    pub dp_bits: u32,
    pub max_steps: u64,
    pub round_constants: Vec<u64>,
    pub table_id: u64,
}

impl TmtoParams {
    pub fn new(
        cipher: CipherParams,
        colors: u32,
        dp_bits: u32,
        max_steps: u64,
        table_id: u64,
    ) -> Result<Self, TmtoParamsError> {
        Self::with_space(
            cipher,
            SearchSpace::State,
            colors,
            dp_bits,
            max_steps,
            table_id,
        )
    }

    pub fn with_space(
        cipher: CipherParams,
        space: SearchSpace,
        colors: u32,
        dp_bits: u32,
        max_steps: u64,
        table_id: u64,
    ) -> Result<Self, TmtoParamsError> {
        let sample_width = cipher.state_bits();
        if colors == 0 {
            return Err(TmtoParamsError::NoColors);
        }
        if max_steps == 0 {
            return Err(TmtoParamsError::ZeroSteps);
        }
        if let SearchSpace::WeakKey { frame } = space {
            if cipher.key_bits <= WEAK_KEY_ZERO_BITS {
                return Err(TmtoParamsError::KeyTooNarrow);
            }
            if u64::from(frame) >= cipher.frame_modulus() {
                return Err(TmtoParamsError::FrameOutOfRange(frame));
            }
        }
        let domain = domain_bits(&cipher, space);
        if dp_bits >= sample_width || dp_bits >= domain {
            return Err(TmtoParamsError::DpTooWide {
                dp_bits,
                width: sample_width.min(domain),
            });
        }
        let dmask = a51::mask(domain);
        let round_constants: Vec<u64> = (0..colors)
            .map(|c| (u64::from(c) + 1).wrapping_mul(GOLDEN) & a51::mask(sample_width))
            .collect();
        for i in 0..round_constants.len() {
            for j in 0..i {
                if round_constants[i] & dmask == round_constants[j] & dmask {
                    return Err(TmtoParamsError::DuplicateRoundConstant(j, i));
                }
            }
        }
        Ok(TmtoParams {
            cipher,
            space,
            sample_width,
            colors,
            dp_bits,
            max_steps,
            round_constants,
            table_id,
        })
    }

    /// Width of a chain point in bits.
    pub fn domain_bits(&self) -> u32 {
        domain_bits(&self.cipher, self.space)
    }

    pub fn domain_mask(&self) -> u64 {
        a51::mask(self.domain_bits())
    }

    #[inline]
    pub fn is_distinguished(&self, value: u64) -> bool {
        value & a51::mask(self.dp_bits) == 0
    }

    /// The cipher state a chain point stands for.
    #[inline]
    pub fn point_state(&self, point: u64) -> CipherState {
        match self.space {
            SearchSpace::State => CipherState::unpack(&self.cipher, point),
            SearchSpace::WeakKey { frame } => {
                let key = SessionKey::new(point << WEAK_KEY_ZERO_BITS);
                key_setup(&self.cipher, key, frame).expect("weak-key domain fits the cipher")
            }
        }
    }

    /// Keystream window produced by a chain point.
    #[inline]
    pub fn point_keystream(&self, point: u64) -> u64 {
        a51::keystream_word(&self.cipher, &self.point_state(point), self.sample_width)
    }

    /// Map a keystream window to the chain point that follows it under
    /// `color`.
    #[inline]
    pub fn reduce(&self, keystream: u64, color: u32) -> u64 {
        (keystream ^ self.round_constants[color as usize]) & self.domain_mask()
    }

    /// The chain step function for one color.
    #[inline]
    pub fn f_color(&self, point: u64, color: u32) -> u64 {
        self.reduce(self.point_keystream(point), color)
    }

    /// Whether a table built with these parameters can answer `sample`.
    pub fn accepts(&self, sample: &KeystreamSample) -> bool {
        match self.space {
            SearchSpace::State => true,
            SearchSpace::WeakKey { frame } => {
                sample.frame == frame && sample.absolute_offset() == 0
            }
        }
    }
}

fn domain_bits(cipher: &CipherParams, space: SearchSpace) -> u32 {
    match space {
        SearchSpace::State => cipher.state_bits(),
        SearchSpace::WeakKey { .. } => cipher.key_bits - WEAK_KEY_ZERO_BITS,
    }
}

/// A stored chain: its start and its final distinguished point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ChainRecord {
    pub start: u64,
    pub end: u64,
}

/// An immutable, lookup-ready table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmtoTable {
    pub params: TmtoParams,
    pub seed: u64,
    /// Sorted ascending by `end`; ends are unique.
    pub records: Vec<ChainRecord>,
}

impl TmtoTable {
    pub fn find_end(&self, end: u64) -> Option<&ChainRecord> {
        self.records
            .binary_search_by_key(&end, |r| r.end)
            .ok()
            .map(|i| &self.records[i])
    }
}

/// Where the known plaintext behind a sample came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    Padding,
    SystemInfo,
    ProtocolScript,
}

/// A window of recovered keystream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KeystreamSample {
    /// Keystream bits, LSB = first bit of the window.
    pub bits: u64,
    /// Frame number given to the cipher.
    pub frame: u32,
    /// TDMA frame the window was captured in.
    pub tdma_frame: u32,
    /// Bit position of the window inside its direction's 114-bit half.
    pub offset: u32,
    pub direction: Direction,
    pub source: SampleSource,
}

impl KeystreamSample {
    /// Number of keystream bits generated after setup before this window.
    pub fn absolute_offset(&self) -> usize {
        let half = match self.direction {
            Direction::Down => 0,
            Direction::Up => a51::HALF_KEYSTREAM_BITS,
        };
        half + self.offset as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_params() -> TmtoParams {
        TmtoParams::new(CipherParams::toy(), 4, 6, 1 << 10, 0).unwrap()
    }

    #[test]
    fn f_color_is_deterministic_and_offset_by_constants() {
        let p = toy_params();
        for x in [0u64, 1, 0x123456, 0xffffff] {
            assert_eq!(p.f_color(x, 2), p.f_color(x, 2));
            assert_eq!(
                p.f_color(x, 0) ^ p.f_color(x, 3),
                p.round_constants[0] ^ p.round_constants[3]
            );
        }
    }

    #[test]
    fn round_constants_follow_golden_multiplier() {
        let p = toy_params();
        assert_eq!(p.round_constants[0], GOLDEN & 0xff_ffff);
        assert_eq!(p.round_constants[1], GOLDEN.wrapping_mul(2) & 0xff_ffff);
        let full = TmtoParams::new(CipherParams::full(), 8, 10, 1 << 12, 1).unwrap();
        assert_eq!(full.round_constants[2], GOLDEN.wrapping_mul(3));
    }

    #[test]
    fn invalid_parameters() {
        let toy = CipherParams::toy();
        assert_eq!(
            TmtoParams::new(toy.clone(), 0, 6, 10, 0),
            Err(TmtoParamsError::NoColors)
        );
        assert_eq!(
            TmtoParams::new(toy.clone(), 4, 24, 10, 0),
            Err(TmtoParamsError::DpTooWide {
                dp_bits: 24,
                width: 24
            })
        );
        assert_eq!(
            TmtoParams::new(toy.clone(), 4, 6, 0, 0),
            Err(TmtoParamsError::ZeroSteps)
        );
        assert!(
            TmtoParams::with_space(toy, SearchSpace::WeakKey { frame: 300 }, 1, 2, 10, 0).is_err()
        );
    }

    #[test]
    fn weak_space_points_are_weak_keys() {
        let p = TmtoParams::with_space(
            CipherParams::toy(),
            SearchSpace::WeakKey { frame: 9 },
            2,
            3,
            64,
            0,
        )
        .unwrap();
        assert_eq!(p.domain_bits(), 14);
        let s = p.point_state(0x2a5);
        let expected = key_setup(&p.cipher, SessionKey::new(0x2a5 << 10), 9).unwrap();
        assert_eq!(s, expected);
    }
}
