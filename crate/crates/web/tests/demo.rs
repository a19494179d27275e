use gsmlab::a51::{frame_keystream, CipherParams, SessionKey};
use gsmlab::gsm::{hop_arfcn, CellConfig};
use gsmlab_web::{a51_trace, coverage_curve, hopping_sequence, MAX_TRACE_BITS};

#[test]
fn cyclic_hopping_walks_the_sorted_allocation() {
    let seq = hopping_sequence(0, 1, &[30, 10, 20], 0, 6).unwrap();
    assert_eq!(seq, [20, 30, 10, 20, 30, 10]);
}

#[test]
fn hopping_matches_the_cell_model() {
    let cell = CellConfig {
        arfcn_allocation: vec![10, 14, 19, 23, 27, 31, 35, 40],
        hsn: 21,
        maio: 3,
        ..CellConfig::default()
    };
    let start = 2_000_000;
    let seq = hopping_sequence(cell.hsn, cell.maio, &cell.arfcn_allocation, start, 500).unwrap();
    for (i, &a) in seq.iter().enumerate() {
        assert_eq!(a, hop_arfcn(&cell, start + i as u32));
    }
}

#[test]
fn hopping_rejects_bad_parameters() {
    assert!(hopping_sequence(0, 0, &[], 0, 1).is_err());
    assert!(hopping_sequence(64, 0, &[1, 2], 0, 1).is_err());
    assert!(hopping_sequence(0, 2, &[1, 2], 0, 1).is_err());
    assert!(hopping_sequence(0, 0, &[1, 1], 0, 1).is_err());
}

#[test]
fn trace_keystream_is_the_published_vector() {
    let kc = u64::from_le_bytes([0x12, 0x23, 0x45, 0x67, 0x89, 0xab, 0xcd, 0xef]);
    let t = a51_trace("full", &format!("{kc:016x}"), 0x134, 32).unwrap();
    let expected: String = [0x53u8, 0x4e, 0xaa, 0x58]
        .iter()
        .map(|b| format!("{b:08b}"))
        .collect();
    assert_eq!(t.keystream, expected);
    assert_eq!(t.lengths, [19, 22, 23]);
}

#[test]
fn trace_steps_follow_the_majority_rule() {
    let toy = CipherParams::toy();
    let t = a51_trace("toy", "a5a5a5", 77, 200).unwrap();
    let ks = frame_keystream(&toy, SessionKey::new(0xa5a5a5), 77).unwrap();
    let bits: String = ks[..200]
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    assert_eq!(t.keystream, bits);
    let mut prev = t.setup;
    for s in &t.steps {
        assert!(s.clocked.count_ones() >= 2);
        for r in 0..3 {
            if s.clocked >> r & 1 == 0 {
                assert_eq!(s.regs[r], prev[r], "an unclocked register held still");
            }
        }
        prev = s.regs;
    }
}

#[test]
fn trace_rejects_bad_input() {
    assert!(a51_trace("nope", "1", 0, 8).is_err());
    assert!(a51_trace("toy", "zz", 0, 8).is_err());
    assert!(a51_trace("toy", "1", 1 << 8, 8).is_err());
    assert!(a51_trace("toy", "1", 0, MAX_TRACE_BITS + 1).is_err());
}

#[test]
fn coverage_curve_grows_with_the_set() {
    let curve = coverage_curve(16, 0, 1, 2, &[256, 4096]).unwrap();
    assert_eq!(curve.len(), 2);
    for p in &curve {
        assert!(p.coverage > 0.0 && p.coverage < 1.0);
        assert!(p.stored as u64 <= 2 * p.chains_per_table);
    }
    assert!(curve[1].coverage > 4.0 * curve[0].coverage);
    assert!(coverage_curve(16, 0, 1, 0, &[1]).is_err());
    assert!(coverage_curve(16, 0, 1, 1, &[0]).is_err());
}
