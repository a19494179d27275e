//! Frequency hopping sequence generation.

use serde::{Deserialize, Serialize};

use super::CellConfig;

/// TDMA frames per hyperframe.
pub const HYPERFRAME: u32 = 26 * 51 * 2048;

/// Pseudo-random permutation table indexed by `(hsn ^ t1r) + t3`.
const RN_TABLE: [u8; 114] = [
    48, 98, 63, 1, 36, 95, 78, 102, 94, 73, 0, 64, 25, 81, 76, 59, 124, 23, 104, 100, 101, 47, 118,
    85, 18, 56, 96, 86, 54, 2, 80, 34, 127, 13, 6, 89, 57, 103, 12, 74, 55, 111, 75, 38, 109, 71,
    112, 29, 11, 88, 87, 19, 3, 68, 110, 26, 33, 31, 8, 45, 82, 58, 40, 107, 32, 5, 106, 92, 62,
    67, 77, 108, 122, 37, 60, 66, 121, 42, 51, 126, 117, 114, 4, 90, 43, 52, 53, 113, 120, 72, 16,
    49, 7, 79, 119, 61, 22, 84, 9, 97, 91, 15, 21, 24, 46, 39, 93, 105, 65, 70, 125, 99, 17, 123,
];

/// Parameters a mobile needs to follow a hopping channel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopParams {
    pub hsn: u8,
    pub maio: u8,
    pub slot: u8,
    /// Mobile allocation, ascending.
    pub allocation: Vec<u16>,
    pub hopping: bool,
}

impl HopParams {
    pub fn arfcn(&self, frame: u32) -> u16 {
        if self.hopping {
            self.allocation[hop_index(self.hsn, self.maio, frame, self.allocation.len())]
        } else {
            self.allocation[self.maio as usize % self.allocation.len()]
        }
    }
}

/// Index into a mobile allocation of `n` channels for TDMA frame `frame`.
///
/// `hsn == 0` gives cyclic hopping, `(frame + maio) mod n`. Other sequence
/// numbers select a pseudo-random sequence derived from the frame's
/// position in the 26- and 51-frame multiframes.
pub fn hop_index(hsn: u8, maio: u8, frame: u32, n: usize) -> usize {
    assert!(n > 0 && n <= 64, "allocation size must be 1..=64");
    let maio = maio as usize;
    if hsn == 0 {
        return (frame as usize + maio) % n;
    }
    let t1 = (frame / (26 * 51)) as usize;
    let t2 = (frame % 26) as usize;
    let t3 = (frame % 51) as usize;
    let t1r = t1 % 64;
    let m = t2 + RN_TABLE[((hsn as usize) ^ t1r) + t3] as usize;
    // smallest power of two covering n
    let nbin = usize::BITS - n.leading_zeros();
    let m_prime = m % (1 << nbin);
    let t_prime = t3 % (1 << nbin);
    let s = if m_prime < n {
        m_prime
    } else {
        (m_prime + t_prime) % n
    };
    (s + maio) % n
}

/// Channel used by the cell's hopping channel in `frame`. The allocation
/// is indexed in ascending channel order.
pub fn hop_arfcn(config: &CellConfig, frame: u32) -> u16 {
    let mut alloc = config.arfcn_allocation.clone();
    alloc.sort_unstable();
    alloc[hop_index(config.hsn, config.maio, frame, alloc.len())]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_law() {
        let seq: Vec<usize> = (0..8).map(|f| hop_index(0, 0, f, 4)).collect();
        assert_eq!(seq, vec![0, 1, 2, 3, 0, 1, 2, 3]);
        for n in 1..=64 {
            for maio in 0..n as u8 {
                for f in [0u32, 1, 77, 1325, HYPERFRAME - 1] {
                    assert_eq!(hop_index(0, maio, f, n), (f as usize + maio as usize) % n);
                }
            }
        }
    }

    #[test]
    fn single_channel_is_constant() {
        assert!((0..500).all(|f| hop_index(37, 0, f, 1) == 0));
    }

    #[test]
    fn distinct_maio_never_collide() {
        for hsn in [1u8, 21, 63] {
            for f in 0..2000 {
                let a = hop_index(hsn, 0, f, 8);
                let b = hop_index(hsn, 3, f, 8);
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn rn_table_is_injective() {
        let mut seen = [false; 128];
        for &v in RN_TABLE.iter() {
            assert!(!seen[v as usize]);
            seen[v as usize] = true;
        }
    }
}
