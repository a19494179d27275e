mod common;

use gsmlab::a51::CipherParams;
use gsmlab::gsm::{
    cipher_frame_number, corrupt_counted, encode_frame, hop_index, run_session, AssignmentMode,
    CellConfig, Channel, Direction, SessionConfig, BURST_BITS,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Upper 95% point of the chi-squared distribution with 7 degrees of
/// freedom.
const CHI2_7_95: f64 = 14.067;

#[test]
fn hopping_is_uniform_over_eight_channels() {
    let mut counts = [0u64; 8];
    let frames = 100_000u32;
    for f in 0..frames {
        counts[hop_index(21, 0, f, 8)] += 1;
    }
    let e = f64::from(frames) / 8.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    assert!(chi2 < CHI2_7_95, "chi2 = {chi2}, counts {counts:?}");
}

proptest! {
    #[test]
    fn hop_index_stays_in_allocation(hsn in 0u8..64, n in 1usize..=64, maio_seed: u8, frame: u32) {
        let maio = (usize::from(maio_seed) % n) as u8;
        prop_assert!(hop_index(hsn, maio, frame, n) < n);
    }

    #[test]
    fn cyclic_law(n in 1usize..=64, maio_seed: u8, frame in 0u32..2_715_648) {
        let maio = (usize::from(maio_seed) % n) as u8;
        prop_assert_eq!(hop_index(0, maio, frame, n), (frame as usize + usize::from(maio)) % n);
    }
}

/// Known coded plaintext XORed with the captured payload is the reference
/// keystream for the target's key and frame.
#[test]
fn ciphertext_minus_plaintext_is_oracle_keystream() {
    let cell = CellConfig::default();
    let session = SessionConfig::new(CipherParams::full());
    let log = run_session(&cell, &session, 21).unwrap();
    let i = log.intercept();
    let hop = &log.truth.hop;
    let mut checked = 0;
    for m in log.truth.messages.iter().filter(|m| m.enciphered) {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, coded) = encode_frame(&m.l2, false, &mut rng).unwrap();
        for b in 0..4u32 {
            let frame = m.frame + b;
            let (slot, arfcn) = match m.channel {
                Channel::Control => (0, cell.control_arfcn),
                Channel::Traffic => (hop.slot, hop.arfcn(frame)),
            };
            let burst = i.find(frame, slot, m.direction, arfcn).unwrap();
            let ks = common::frame_keystream(
                &common::FULL,
                log.truth.key.kc,
                cipher_frame_number(&session.cipher_params, frame),
            );
            let half = match m.direction {
                Direction::Down => &ks[..114],
                Direction::Up => &ks[114..],
            };
            let chunk = &coded[b as usize * BURST_BITS..(b as usize + 1) * BURST_BITS];
            for k in 0..BURST_BITS {
                assert_eq!(burst.payload[k], chunk[k] ^ half[k]);
            }
            checked += 1;
        }
    }
    assert!(checked >= 4 * 26);
}

#[test]
fn flip_count_is_binomial() {
    let cell = CellConfig {
        assignment_mode: AssignmentMode::Immediate,
        ..CellConfig::default()
    };
    let mut session = SessionConfig::new(CipherParams::toy());
    session.traffic_blocks = 40;
    let log = run_session(&cell, &session, 3).unwrap();
    let bits = (log.bursts.len() * BURST_BITS) as f64;
    let ber = 1e-3;
    let (_, flips) = corrupt_counted(&log, ber, 17);
    let mean = bits * ber;
    let sd = (bits * ber * (1.0 - ber)).sqrt();
    assert!(bits >= 1e5);
    assert!(
        (flips as f64 - mean).abs() <= 3.0 * sd,
        "{flips} flips, mean {mean}"
    );
}
