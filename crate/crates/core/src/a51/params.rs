use super::mask;

/// Geometry of one shift register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RegisterSpec {
    pub len: u32,
    /// Feedback taps as a bit mask over the register cells.
    pub taps: u64,
    pub clock_bit: u32,
    pub output_bit: u32,
}

impl RegisterSpec {
    #[inline]
    pub fn mask(&self) -> u64 {
        mask(self.len)
    }

    pub fn tap_indices(&self) -> Vec<u32> {
        (0..self.len).filter(|i| self.taps >> i & 1 == 1).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Full,
    Toy,
    Custom,
}

impl Preset {
    /// Tag used in table files.
    pub fn tag(self) -> u32 {
        match self {
            Preset::Full => 0,
            Preset::Toy => 1,
            Preset::Custom => u32::MAX,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(Preset::Full),
            1 => Some(Preset::Toy),
            _ => None,
        }
    }

    pub fn params(self) -> Option<CipherParams> {
        match self {
            Preset::Full => Some(CipherParams::full()),
            Preset::Toy => Some(CipherParams::toy()),
            Preset::Custom => None,
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Preset::Full),
            "toy" => Ok(Preset::Toy),
            other => Err(format!("unknown preset `{other}` (expected full or toy)")),
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Preset::Full => "FULL",
            Preset::Toy => "TOY",
            Preset::Custom => "CUSTOM",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamsError {
    #[error("register {0} has zero length")]
    EmptyRegister(usize),
    #[error("state width {0} exceeds 64 bits")]
    StateTooWide(u32),
    #[error("register {reg}: bit index {index} outside a {len}-bit register")]
    IndexOutOfRange { reg: usize, index: u32, len: u32 },
    #[error("register {0}: the top cell must be a feedback tap")]
    TopCellNotTapped(usize),
    #[error("key width {0} exceeds 64 bits")]
    KeyTooWide(u32),
    #[error("frame width {0} exceeds 32 bits")]
    FrameTooWide(u32),
}

/// Register geometry and setup schedule of an A5/1-style cipher.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CipherParams {
    pub preset: Preset,
    pub registers: [RegisterSpec; 3],
    pub mix_clocks: u32,
    pub key_bits: u32,
    pub frame_bits: u32,
}

impl CipherParams {
    /// Build and validate a custom geometry. `taps[i]` lists cell indices.
    pub fn new(
        lengths: [u32; 3],
        taps: [&[u32]; 3],
        clock_bits: [u32; 3],
        output_bits: [u32; 3],
        mix_clocks: u32,
        key_bits: u32,
        frame_bits: u32,
    ) -> Result<Self, ParamsError> {
        let mut registers = [RegisterSpec {
            len: 0,
            taps: 0,
            clock_bit: 0,
            output_bit: 0,
        }; 3];
        for i in 0..3 {
            let len = lengths[i];
            if len == 0 {
                return Err(ParamsError::EmptyRegister(i));
            }
            let check = |index: u32| {
                if index < len {
                    Ok(index)
                } else {
                    Err(ParamsError::IndexOutOfRange { reg: i, index, len })
                }
            };
            let mut mask = 0u64;
            for &t in taps[i] {
                mask |= 1u64 << check(t)?;
            }
            registers[i] = RegisterSpec {
                len,
                taps: mask,
                clock_bit: check(clock_bits[i])?,
                output_bit: check(output_bits[i])?,
            };
            if mask >> (len - 1) & 1 == 0 {
                return Err(ParamsError::TopCellNotTapped(i));
            }
        }
        let width: u32 = lengths.iter().sum();
        if width > 64 {
            return Err(ParamsError::StateTooWide(width));
        }
        if key_bits > 64 {
            return Err(ParamsError::KeyTooWide(key_bits));
        }
        if frame_bits > 32 {
            return Err(ParamsError::FrameTooWide(frame_bits));
        }
        Ok(CipherParams {
            preset: Preset::Custom,
            registers,
            mix_clocks,
            key_bits,
            frame_bits,
        })
    }

    /// The deployed cipher geometry: 19/22/23-bit registers.
    pub fn full() -> Self {
        let mut p = Self::new(
            [19, 22, 23],
            [&[13, 16, 17, 18], &[20, 21], &[7, 20, 21, 22]],
            [8, 10, 10],
            [18, 21, 22],
            100,
            64,
            22,
        )
        .expect("full preset is valid");
        p.preset = Preset::Full;
        p
    }

    /// A 24-bit miniature small enough for exhaustive experiments.
    pub fn toy() -> Self {
        let mut p = Self::new(
            [7, 8, 9],
            [&[5, 6], &[6, 7], &[4, 8]],
            [3, 4, 4],
            [6, 7, 8],
            24,
            24,
            8,
        )
        .expect("toy preset is valid");
        p.preset = Preset::Toy;
        p
    }

    /// Same geometry with a different number of setup mixing clocks.
    pub fn with_mix_clocks(mut self, mix_clocks: u32) -> Self {
        self.mix_clocks = mix_clocks;
        self.preset = Preset::Custom;
        self
    }

    pub fn state_bits(&self) -> u32 {
        self.registers.iter().map(|r| r.len).sum()
    }

    pub fn state_mask(&self) -> u64 {
        mask(self.state_bits())
    }

    pub fn key_mask(&self) -> u64 {
        mask(self.key_bits)
    }

    pub fn frame_modulus(&self) -> u64 {
        1u64 << self.frame_bits
    }
}
