use std::time::Duration;

#[cfg(not(target_arch = "wasm32"))]
use std::time::Instant;
#[cfg(target_arch = "wasm32")]
use web_time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{ChainRecord, TmtoParams, TmtoTable, GOLDEN};

/// Counts from one table build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GenStats {
    pub requested: u64,
    pub kept: u64,
    /// Chains dropped because another chain reached the same end.
    pub merged: u64,
    /// Chains abandoned because a color segment hit `max_steps`.
    pub overflowed: u64,
    /// Chain step evaluations performed.
    pub steps: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl GenStats {
    pub fn merge_fraction(&self) -> f64 {
        let finished = self.requested - self.overflowed;
        if finished == 0 {
            0.0
        } else {
            self.merged as f64 / finished as f64
        }
    }

    pub fn chains_per_second(&self) -> f64 {
        self.requested as f64 / self.elapsed.as_secs_f64().max(1e-9)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-mode start point `index` of table `params.table_id`.
pub fn start_point(params: &TmtoParams, seed: u64, index: u64) -> u64 {
    let z = seed
        .wrapping_add(params.table_id.wrapping_mul(GOLDEN).rotate_left(29))
        .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN));
    splitmix(z) & params.domain_mask()
}

/// Walk one chain from `start`. `None` means a color segment overflowed.
/// The second value is the number of step evaluations.
pub fn generate_chain(params: &TmtoParams, start: u64) -> (Option<ChainRecord>, u64) {
    let mut x = start;
    let mut total = 0u64;
    for color in 0..params.colors {
        let mut steps = 0u64;
        loop {
            x = params.f_color(x, color);
            steps += 1;
            if params.is_distinguished(x) {
                break;
            }
            if steps >= params.max_steps {
                return (None, total + steps);
            }
        }
        total += steps;
    }
    (Some(ChainRecord { start, end: x }), total)
}

/// Build a table on the global thread pool.
pub fn build_table(params: &TmtoParams, chain_count: u64, seed: u64) -> (TmtoTable, GenStats) {
    let began = Instant::now();
    let chains: Vec<(Option<ChainRecord>, u64)> = (0..chain_count)
        .into_par_iter()
        .map(|i| generate_chain(params, start_point(params, seed, i)))
        .collect();

    let mut stats = GenStats {
        requested: chain_count,
        ..GenStats::default()
    };
    let mut records = Vec::with_capacity(chains.len());
    for (chain, steps) in chains {
        stats.steps += steps;
        match chain {
            Some(r) => records.push(r),
            None => stats.overflowed += 1,
        }
    }
    let finished = records.len() as u64;
    records.par_sort_unstable_by_key(|r| (r.end, r.start));
    records.dedup_by_key(|r| r.end);
    stats.kept = records.len() as u64;
    stats.merged = finished - stats.kept;
    stats.elapsed = began.elapsed();
    (
        TmtoTable {
            params: params.clone(),
            seed,
            records,
        },
        stats,
    )
}

/// Build a table on a dedicated pool of `threads` workers. The result does
/// not depend on the thread count.
pub fn build_table_with_threads(
    params: &TmtoParams,
    chain_count: u64,
    seed: u64,
    threads: usize,
) -> (TmtoTable, GenStats) {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| build_table(params, chain_count, seed))
}
