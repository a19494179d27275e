use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::a51::{keystream_word, CipherState};
use crate::gsm::Direction;
use crate::stats::Proportion;

use super::{
    lookup, ChainRecord, KeystreamSample, SampleSource, SearchSpace, TmtoParams, TmtoTable,
};

/// Domains larger than this are not enumerated exhaustively.
const MAX_EXACT_DOMAIN_BITS: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coverage {
    pub covered: u64,
    pub domain: u64,
    pub fraction: f64,
}

/// Bitmap of every chain input point of every stored chain, over the whole
/// domain. `None` when the domain is too large or the set is empty.
pub fn covered_points(tables: &[TmtoTable]) -> Option<Vec<u64>> {
    let params = &tables.first()?.params;
    let bits = params.domain_bits();
    if bits > MAX_EXACT_DOMAIN_BITS {
        return None;
    }
    let words = ((1u64 << bits) as usize).div_ceil(64);
    let partials: Vec<Vec<u64>> = tables
        .par_iter()
        .map(|t| {
            assert_eq!(t.params.domain_bits(), bits, "mixed table domains");
            t.records
                .par_chunks(1024)
                .fold(
                    || vec![0u64; words],
                    |mut map, chunk| {
                        for r in chunk {
                            mark_chain(&t.params, r.start, &mut map);
                        }
                        map
                    },
                )
                .reduce(|| vec![0u64; words], or_maps)
        })
        .collect();
    Some(partials.into_iter().fold(vec![0u64; words], or_maps))
}

fn or_maps(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x |= y;
    }
    a
}

fn mark_chain(params: &TmtoParams, start: u64, map: &mut [u64]) {
    let mut x = start;
    for c in 0..params.colors {
        let mut n = 0;
        loop {
            map[(x >> 6) as usize] |= 1 << (x & 63);
            x = params.f_color(x, c);
            n += 1;
            if params.is_distinguished(x) || n >= params.max_steps {
                break;
            }
        }
    }
}

/// Fraction of the domain lying on stored chains, by exhaustive enumeration.
pub fn exact_coverage(tables: &[TmtoTable]) -> Option<Coverage> {
    let map = covered_points(tables)?;
    let domain = 1u64 << tables[0].params.domain_bits();
    let covered: u64 = map.iter().map(|w| u64::from(w.count_ones())).sum();
    Some(Coverage {
        covered,
        domain,
        fraction: covered as f64 / domain as f64,
    })
}

fn trial_point(params: &TmtoParams, seed: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.gen::<u64>() & params.domain_mask()
}

/// Monte-Carlo coverage: draw uniform domain points, compute their keystream
/// and count how often lookup returns the drawn state.
pub fn coverage_measure(tables: &[TmtoTable], trials: u64, seed: u64) -> Proportion {
    let Some(first) = tables.first() else {
        return Proportion::wilson(0, trials);
    };
    let params = &first.params;
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let point = trial_point(params, seed, t);
            let state: CipherState = params.point_state(point);
            let frame = match params.space {
                SearchSpace::State => 0,
                SearchSpace::WeakKey { frame } => frame,
            };
            let sample = KeystreamSample {
                bits: keystream_word(&params.cipher, &state, params.sample_width),
                frame,
                tdma_frame: 0,
                offset: 0,
                direction: Direction::Down,
                source: SampleSource::Padding,
            };
            lookup(tables, &sample).contains(&state)
        })
        .count() as u64;
    Proportion::wilson(hits, trials)
}

/// Chains of one step from every point, spread over as many tables as
/// needed to keep ends unique within each table. Covers the whole domain;
/// only practical for small geometries.
pub fn exhaustive_table_set(p: &TmtoParams) -> Vec<TmtoTable> {
    let mut records: Vec<ChainRecord> = (0..1u64 << p.domain_bits())
        .map(|s| ChainRecord {
            start: s,
            end: p.f_color(s, 0),
        })
        .collect();
    records.sort_by_key(|r| (r.end, r.start));
    let mut tables: Vec<Vec<ChainRecord>> = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let mut j = i;
        while j < records.len() && records[j].end == records[i].end {
            if tables.len() <= j - i {
                tables.push(Vec::new());
            }
            tables[j - i].push(records[j]);
            j += 1;
        }
        i = j;
    }
    tables
        .into_iter()
        .map(|records| TmtoTable {
            params: p.clone(),
            seed: 0,
            records,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::a51::CipherParams;

    #[test]
    fn empty_set_has_zero_coverage() {
        assert_eq!(coverage_measure(&[], 100, 1).hits, 0);
        assert!(exact_coverage(&[]).is_none());
    }

    #[test]
    fn exhaustive_table_set_covers_everything() {
        let small = CipherParams::new(
            [5, 6, 7],
            [&[3, 4], &[4, 5], &[5, 6]],
            [2, 3, 3],
            [4, 5, 6],
            8,
            18,
            4,
        )
        .unwrap();
        let p = TmtoParams::new(small, 1, 0, 1, 0).unwrap();
        let tables = exhaustive_table_set(&p);
        let cov = exact_coverage(&tables).unwrap();
        assert_eq!(cov.covered, cov.domain);
        let measured = coverage_measure(&tables, 500, 3);
        assert_eq!(measured.hits, 500);
    }
}
