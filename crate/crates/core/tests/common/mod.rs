//! Reference implementations used only by tests.
//!
//! The cipher here is written directly from the textbook description of
//! A5/1: three shift registers held as arrays of cells, cell 0 receiving the
//! feedback, shifted one cell towards the top on every step. It shares no
//! code with the library.

#![allow(dead_code)]

pub struct RegSpec {
    pub len: usize,
    pub taps: &'static [usize],
    pub clock: usize,
}

pub struct Geometry {
    pub regs: [RegSpec; 3],
    pub key_bits: usize,
    pub frame_bits: usize,
    pub mix: usize,
}

pub const FULL: Geometry = Geometry {
    regs: [
        RegSpec {
            len: 19,
            taps: &[13, 16, 17, 18],
            clock: 8,
        },
        RegSpec {
            len: 22,
            taps: &[20, 21],
            clock: 10,
        },
        RegSpec {
            len: 23,
            taps: &[7, 20, 21, 22],
            clock: 10,
        },
    ],
    key_bits: 64,
    frame_bits: 22,
    mix: 100,
};

pub const TOY: Geometry = Geometry {
    regs: [
        RegSpec {
            len: 7,
            taps: &[5, 6],
            clock: 3,
        },
        RegSpec {
            len: 8,
            taps: &[6, 7],
            clock: 4,
        },
        RegSpec {
            len: 9,
            taps: &[4, 8],
            clock: 4,
        },
    ],
    key_bits: 24,
    frame_bits: 8,
    mix: 24,
};

pub struct Oracle<'a> {
    pub g: &'a Geometry,
    pub cells: [Vec<u8>; 3],
}

impl<'a> Oracle<'a> {
    pub fn zero(g: &'a Geometry) -> Self {
        Oracle {
            g,
            cells: [
                vec![0; g.regs[0].len],
                vec![0; g.regs[1].len],
                vec![0; g.regs[2].len],
            ],
        }
    }

    /// Registers taken from a packed integer: R1 in the low bits, then R2,
    /// then R3; bit i of each register is cell i.
    pub fn from_packed(g: &'a Geometry, packed: u64) -> Self {
        let mut o = Self::zero(g);
        let mut pos = 0;
        for r in 0..3 {
            for i in 0..g.regs[r].len {
                o.cells[r][i] = ((packed >> (pos + i)) & 1) as u8;
            }
            pos += g.regs[r].len;
        }
        o
    }

    pub fn packed(&self) -> u64 {
        let mut out = 0u64;
        let mut pos = 0;
        for r in 0..3 {
            for (i, &c) in self.cells[r].iter().enumerate() {
                out |= u64::from(c) << (pos + i);
            }
            pos += self.g.regs[r].len;
        }
        out
    }

    fn shift(&mut self, r: usize, input: u8) {
        let spec = &self.g.regs[r];
        let mut fb = 0;
        for &t in spec.taps {
            fb ^= self.cells[r][t];
        }
        let cells = &mut self.cells[r];
        for i in (1..spec.len).rev() {
            cells[i] = cells[i - 1];
        }
        cells[0] = fb ^ input;
    }

    fn clock_majority(&mut self) {
        let c: Vec<u8> = (0..3)
            .map(|r| self.cells[r][self.g.regs[r].clock])
            .collect();
        let maj = if c[0] + c[1] + c[2] >= 2 { 1 } else { 0 };
        for r in 0..3 {
            if c[r] == maj {
                self.shift(r, 0);
            }
        }
    }

    fn out(&self) -> u8 {
        (0..3)
            .map(|r| self.cells[r][self.g.regs[r].len - 1])
            .fold(0, |a, b| a ^ b)
    }

    pub fn setup(g: &'a Geometry, kc: u64, frame: u32) -> Self {
        let mut o = Self::zero(g);
        for i in 0..g.key_bits {
            let bit = ((kc >> i) & 1) as u8;
            for r in 0..3 {
                o.shift(r, bit);
            }
        }
        for i in 0..g.frame_bits {
            let bit = ((frame >> i) & 1) as u8;
            for r in 0..3 {
                o.shift(r, bit);
            }
        }
        for _ in 0..g.mix {
            o.clock_majority();
        }
        o
    }

    pub fn run(&mut self, n: usize) -> Vec<bool> {
        (0..n)
            .map(|_| {
                self.clock_majority();
                self.out() == 1
            })
            .collect()
    }
}

/// 228 keystream bits of one frame.
pub fn frame_keystream(g: &Geometry, kc: u64, frame: u32) -> Vec<bool> {
    Oracle::setup(g, kc, frame).run(228)
}

/// `n` keystream bits from a packed state, packed LSB-first.
pub fn keystream_word(g: &Geometry, packed: u64, n: usize) -> u64 {
    Oracle::from_packed(g, packed)
        .run(n)
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
}

pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Chain geometry for the reference walker over the TOY state space.
pub struct ChainGeometry {
    pub colors: u32,
    pub dp_bits: u32,
    pub max_steps: u64,
}

pub fn round_constant(color: u32) -> u64 {
    (u64::from(color) + 1).wrapping_mul(GOLDEN) & 0xff_ffff
}

pub fn toy_step(x: u64, color: u32) -> u64 {
    keystream_word(&TOY, x, 24) ^ round_constant(color)
}

/// Walk a TOY chain step by step. `None` when a color overflows.
pub fn toy_chain_end(c: &ChainGeometry, start: u64) -> Option<u64> {
    let mut x = start;
    for color in 0..c.colors {
        let mut n = 0;
        loop {
            x = toy_step(x, color);
            n += 1;
            if x % (1 << c.dp_bits) == 0 {
                break;
            }
            if n == c.max_steps {
                return None;
            }
        }
    }
    Some(x)
}

/// Counter-mode start point, mirrored from the table format description.
pub fn start_point(seed: u64, table_id: u64, index: u64, bits: u32) -> u64 {
    let mut z = seed
        .wrapping_add(table_id.wrapping_mul(GOLDEN).rotate_left(29))
        .wrapping_add((index + 1).wrapping_mul(GOLDEN));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    (z ^ (z >> 31)) & ((1 << bits) - 1)
}

/// Pack a bit sequence MSB-first into bytes, as published vectors are.
pub fn msb_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |a, (i, &b)| a | (u8::from(b) << (7 - i)))
        })
        .collect()
}
