use serde::{Deserialize, Serialize};

use super::Direction;

pub const SLOTS_PER_FRAME: u32 = 8;
/// Slot duration, 576.9 µs, in tenths of a microsecond.
pub const SLOT_TENTHS_US: u64 = 5769;
/// Payload bits per burst.
pub const BURST_BITS: usize = 114;

/// One time slot's transmission on one carrier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Burst {
    pub frame: u32,
    pub slot: u8,
    pub direction: Direction,
    pub arfcn: u16,
    pub payload: Vec<bool>,
}

impl Burst {
    /// Start time relative to frame 0, slot 0, in tenths of a microsecond.
    pub fn start_tenths_us(&self) -> u64 {
        (u64::from(self.frame) * u64::from(SLOTS_PER_FRAME) + u64::from(self.slot)) * SLOT_TENTHS_US
    }

    pub fn start_time_us(&self) -> f64 {
        self.start_tenths_us() as f64 / 10.0
    }

    /// Capture order: time, then direction, then carrier.
    pub fn order_key(&self) -> (u64, Direction, u16) {
        (self.start_tenths_us(), self.direction, self.arfcn)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burst(frame: u32, slot: u8) -> Burst {
        Burst {
            frame,
            slot,
            direction: Direction::Down,
            arfcn: 1,
            payload: vec![false; BURST_BITS],
        }
    }

    #[test]
    fn consecutive_slots_are_one_slot_apart() {
        for f in [0u32, 1, 999, 2_715_647] {
            for s in 0..7u8 {
                let d = burst(f, s + 1).start_tenths_us() - burst(f, s).start_tenths_us();
                assert_eq!(d, SLOT_TENTHS_US);
            }
            let wrap = burst(f + 1, 0).start_tenths_us() - burst(f, 7).start_tenths_us();
            assert_eq!(wrap, SLOT_TENTHS_US);
        }
    }

    #[test]
    fn frame_duration() {
        assert_eq!(burst(1, 0).start_time_us(), 8.0 * 576.9);
        assert!((burst(3, 5).start_time_us() - (3.0 * 8.0 * 576.9 + 5.0 * 576.9)).abs() < 1e-6);
    }
}
