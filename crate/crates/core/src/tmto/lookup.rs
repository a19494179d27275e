use crate::a51::CipherState;

use super::{KeystreamSample, TmtoParams, TmtoTable};

/// Work done by a lookup.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LookupStats {
    /// Stored ends that matched a walk.
    pub end_hits: u64,
    /// Matched chains whose regeneration did not contain the sample.
    pub false_alarms: u64,
    pub steps: u64,
}

/// Continue a chain from `value`, which was just produced under `color`,
/// to its final distinguished point.
fn walk_to_end(params: &TmtoParams, mut value: u64, color: u32, steps: &mut u64) -> Option<u64> {
    let mut n = 0u64;
    while !params.is_distinguished(value) {
        if n >= params.max_steps {
            *steps += n;
            return None;
        }
        value = params.f_color(value, color);
        n += 1;
    }
    for c in color + 1..params.colors {
        let mut m = 0u64;
        loop {
            value = params.f_color(value, c);
            m += 1;
            if params.is_distinguished(value) {
                break;
            }
            if m >= params.max_steps {
                *steps += n + m;
                return None;
            }
        }
        n += m;
    }
    *steps += n;
    Some(value)
}

/// Regenerate a chain and collect every point at `color` whose keystream
/// equals `bits`.
fn regenerate(
    params: &TmtoParams,
    start: u64,
    color: u32,
    bits: u64,
    found: &mut Vec<CipherState>,
    steps: &mut u64,
) {
    let mut x = start;
    for c in 0..=color {
        let mut n = 0u64;
        loop {
            let ks = params.point_keystream(x);
            n += 1;
            let next = params.reduce(ks, c);
            if c == color && ks == bits {
                found.push(params.point_state(x));
            }
            x = next;
            if params.is_distinguished(x) || n >= params.max_steps {
                break;
            }
        }
        *steps += n;
    }
}

/// Look a sample up in one table. Every returned state is verified to
/// produce `sample.bits`.
pub fn lookup_table(
    table: &TmtoTable,
    sample: &KeystreamSample,
    stats: &mut LookupStats,
) -> Vec<CipherState> {
    let params = &table.params;
    let mut found = Vec::new();
    if !params.accepts(sample) {
        return found;
    }
    let bits = sample.bits & crate::a51::mask(params.sample_width);
    for color in (0..params.colors).rev() {
        let value = params.reduce(bits, color);
        let Some(end) = walk_to_end(params, value, color, &mut stats.steps) else {
            continue;
        };
        let Some(record) = table.find_end(end) else {
            continue;
        };
        stats.end_hits += 1;
        let before = found.len();
        regenerate(
            params,
            record.start,
            color,
            bits,
            &mut found,
            &mut stats.steps,
        );
        if found.len() == before {
            stats.false_alarms += 1;
        }
    }
    found
}

/// Look a sample up in every table, returning the verified states sorted
/// and without duplicates.
pub fn lookup(tables: &[TmtoTable], sample: &KeystreamSample) -> Vec<CipherState> {
    let mut stats = LookupStats::default();
    let mut found: Vec<CipherState> = tables
        .iter()
        .flat_map(|t| lookup_table(t, sample, &mut stats))
        .collect();
    found.sort();
    found.dedup();
    found
}
