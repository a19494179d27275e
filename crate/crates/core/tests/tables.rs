mod common;

use std::collections::BTreeSet;

use gsmlab::a51::{keystream_word, CipherParams};
use gsmlab::gsm::Direction;
use gsmlab::tmto::{
    build_table, build_table_with_threads, coverage_measure, exact_coverage, generate_chain,
    lookup, table_bytes, KeystreamSample, SampleSource, TmtoParams, TmtoTable,
};
use proptest::prelude::*;

use common::ChainGeometry;

const GEOMETRY: ChainGeometry = ChainGeometry {
    colors: 4,
    dp_bits: 6,
    max_steps: 1 << 10,
};

fn toy_params(table_id: u64) -> TmtoParams {
    TmtoParams::new(CipherParams::toy(), 4, 6, 1 << 10, table_id).unwrap()
}

fn sample(bits: u64) -> KeystreamSample {
    KeystreamSample {
        bits,
        frame: 0,
        tdma_frame: 0,
        offset: 0,
        direction: Direction::Down,
        source: SampleSource::Padding,
    }
}

#[test]
fn f_color_of_unit_state() {
    let p = toy_params(0);
    let expected = common::toy_step(0x000001, 0);
    assert_eq!(p.f_color(0x000001, 0), expected);
    // The lone set bit of R1 reaches its clock cell and R1 stalls there,
    // so the 24 keystream bits are zero and only the round constant remains.
    assert_eq!(expected, 0x4a_7c15);
    assert_eq!(p.f_color(0x123456, 2), common::toy_step(0x123456, 2));
}

#[test]
fn chain_end_matches_reference_walker() {
    let p = toy_params(0);
    let (record, _) = generate_chain(&p, 0x123456);
    assert_eq!(
        record.map(|r| r.end),
        common::toy_chain_end(&GEOMETRY, 0x123456)
    );
    assert!(record.is_some());
}

#[test]
fn merge_fraction_matches_reference_walker() {
    let p = toy_params(3);
    let seed = 11;
    let chains = 1u64 << 12;
    let (table, stats) = build_table(&p, chains, seed);

    let mut ends = BTreeSet::new();
    let mut finished = 0u64;
    for i in 0..chains {
        let start = common::start_point(seed, 3, i, 24);
        if let Some(end) = common::toy_chain_end(&GEOMETRY, start) {
            finished += 1;
            ends.insert(end);
        }
    }
    let reference = (finished - ends.len() as u64) as f64 / finished as f64;
    let measured = stats.merge_fraction();
    assert!(
        (measured - reference).abs() <= 0.2 * reference,
        "measured {measured}, reference {reference}"
    );
    assert_eq!(table.records.len(), ends.len());
    assert_eq!(stats.requested - stats.overflowed, finished);
}

#[test]
fn every_record_regenerates() {
    let p = toy_params(1);
    let (table, _) = build_table(&p, 1 << 12, 5);
    assert!(table.records.windows(2).all(|w| w[0].end < w[1].end));
    for r in &table.records {
        assert!(p.is_distinguished(r.end));
        assert_eq!(generate_chain(&p, r.start).0, Some(*r));
    }
}

#[test]
fn build_is_independent_of_thread_count() {
    let p = toy_params(2);
    let (a, _) = build_table_with_threads(&p, 3000, 9, 1);
    let (b, _) = build_table_with_threads(&p, 3000, 9, 3);
    assert_eq!(table_bytes(&a), table_bytes(&b));
}

#[test]
fn monte_carlo_agrees_with_enumeration() {
    let tables: Vec<TmtoTable> = (0..2)
        .map(|i| build_table(&toy_params(i), 1 << 12, 1).0)
        .collect();
    let exact = exact_coverage(&tables).unwrap();
    let mc = coverage_measure(&tables, 4000, 77);
    assert!(mc.contains(exact.fraction), "{exact:?} {mc:?}");
}

/// Points on stored chains, with the color each was produced under.
fn chain_points(p: &TmtoParams, start: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut x = start;
    for c in 0..p.colors {
        loop {
            out.push((x, c));
            x = p.f_color(x, c);
            if p.is_distinguished(x) {
                break;
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planted_points_are_recovered(pick in any::<prop::sample::Index>(), point in any::<prop::sample::Index>()) {
        let p = toy_params(4);
        let (table, _) = build_table(&p, 256, 21);
        let record = table.records[pick.index(table.records.len())];
        let points = chain_points(&p, record.start);
        let (x, _) = points[point.index(points.len())];
        let state = p.point_state(x);
        let found = lookup(std::slice::from_ref(&table), &sample(p.point_keystream(x)));
        prop_assert!(found.contains(&state));
    }

    #[test]
    fn lookup_results_are_verified(bits in 0u64..(1 << 24)) {
        let p = toy_params(5);
        let (table, _) = build_table(&p, 256, 4);
        for s in lookup(std::slice::from_ref(&table), &sample(bits)) {
            prop_assert_eq!(keystream_word(&p.cipher, &s, 24), bits);
        }
    }

    #[test]
    fn flipped_sample_never_returns_planted_state(
        pick in any::<prop::sample::Index>(),
        point in any::<prop::sample::Index>(),
        bit in 0u32..24,
    ) {
        let p = toy_params(6);
        let (table, _) = build_table(&p, 256, 8);
        let record = table.records[pick.index(table.records.len())];
        let points = chain_points(&p, record.start);
        let (x, _) = points[point.index(points.len())];
        let found = lookup(std::slice::from_ref(&table), &sample(p.point_keystream(x) ^ (1 << bit)));
        prop_assert!(!found.contains(&p.point_state(x)));
    }
}
