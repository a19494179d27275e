//! The passive attacker: known plaintext, keystream samples, table lookup,
//! key recovery, dehopping and decryption.
//!
//! Every function here takes an [`Intercept`], which holds only what a
//! listener records. Ground truth never reaches this module.

mod crack;
mod decrypt;
mod extract;

use serde::Serialize;

use crate::a51::{CipherParams, SessionKey};
use crate::gsm::{
    replay_session, AssignmentMode, CellConfig, CipherMode, Intercept, ReplayError, SessionConfig,
    Subscriber,
};
use crate::tmto::{SampleSource, TmtoTable};

pub use crack::{
    attributable_blocks, crack_session, decipher_block, key_decodes, CrackBudget, CrackResult,
    CrackStatus,
};
pub use decrypt::{dehop_decrypt, Transcript};
pub use extract::{
    derive_samples, extract_known_plaintext, known_bit_count, survey, PlaintextGuess, Survey,
};

pub const REPORT_SCHEMA: &str = "gsmlab.attack.v1";
pub const REPLAY_SCHEMA: &str = "gsmlab.replay.v1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AttackError {
    #[error("capture uses custom cipher parameters")]
    UnknownPreset,
    #[error("tables are for the {tables} cipher but the capture uses {capture}")]
    PresetMismatch { tables: String, capture: String },
    #[error("no readable control channel in the capture")]
    NoControlChannel,
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    KeyFound,
    NotCovered,
    BudgetExhausted,
    /// The session was never enciphered.
    Cleartext,
    /// The session uses a cipher the tables do not attack.
    UnsupportedCipher,
}

/// Result of the full pipeline on one capture.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackReport {
    pub schema: &'static str,
    pub cell_id: Option<u16>,
    pub preset: String,
    pub outcome: Outcome,
    pub cipher: Option<CipherMode>,
    pub random_padding_detected: bool,
    pub samples_available: usize,
    pub padding_samples: usize,
    pub samples_tried: usize,
    pub winning_sample: Option<usize>,
    /// `Kc` as hex, when recovered.
    pub key_found: Option<String>,
    pub verification_frame: Option<u32>,
    pub lookup_latency_s: f64,
    pub decrypted_frames: usize,
    pub crc_failures: usize,
    pub missing_blocks: usize,
    pub transcript: Transcript,
    pub notes: Vec<String>,
}

impl AttackReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn key_hex(params: &CipherParams, key: SessionKey) -> String {
    let digits = params.key_bits.div_ceil(4) as usize;
    format!("{:0digits$x}", key.kc)
}

/// Run the whole attack on one capture and return the key as well as the
/// report.
pub fn eavesdrop(
    intercept: &Intercept,
    tables: &[TmtoTable],
    budget: CrackBudget,
) -> Result<(Option<SessionKey>, AttackReport), AttackError> {
    let params = intercept
        .header
        .preset
        .params()
        .ok_or(AttackError::UnknownPreset)?;
    let s = survey(intercept);
    if s.control_arfcn.is_none() {
        return Err(AttackError::NoControlChannel);
    }
    let guesses = extract_known_plaintext(intercept);
    let samples = derive_samples(intercept, &guesses, &params);
    let padding_samples = samples
        .iter()
        .filter(|x| x.source == SampleSource::Padding)
        .count();
    let mut notes = Vec::new();
    let mut report = AttackReport {
        schema: REPORT_SCHEMA,
        cell_id: s.cell_id,
        preset: intercept.header.preset.to_string(),
        outcome: Outcome::NotCovered,
        cipher: s.cipher,
        random_padding_detected: s.random_padding,
        samples_available: samples.len(),
        padding_samples,
        samples_tried: 0,
        winning_sample: None,
        key_found: None,
        verification_frame: None,
        lookup_latency_s: 0.0,
        decrypted_frames: 0,
        crc_failures: 0,
        missing_blocks: 0,
        transcript: Transcript::default(),
        notes: Vec::new(),
    };

    let key = match s.cipher {
        Some(CipherMode::None) => {
            report.outcome = Outcome::Cleartext;
            None
        }
        Some(CipherMode::StrongOpaque) => {
            report.outcome = Outcome::UnsupportedCipher;
            notes.push(
                "session uses a cipher without a trade-off table; \
                 a challenge replay can recover the reused key"
                    .to_string(),
            );
            None
        }
        _ => {
            if tables.is_empty() {
                notes.push("no tables loaded".to_string());
            }
            if samples.is_empty() {
                notes.push("no keystream samples could be derived".to_string());
            }
            let r = crack_session(intercept, &s, &samples, tables, budget)?;
            report.outcome = match r.status {
                CrackStatus::KeyFound => Outcome::KeyFound,
                CrackStatus::NotCovered => Outcome::NotCovered,
                CrackStatus::BudgetExhausted => Outcome::BudgetExhausted,
            };
            report.samples_tried = r.samples_tried;
            report.winning_sample = r.winning_sample;
            report.verification_frame = r.verification_frame;
            report.lookup_latency_s = r.lookup_latency_s;
            if r.recovery_budget_hits > 0 {
                notes.push(format!(
                    "{} candidate states exceeded the backward-search budget",
                    r.recovery_budget_hits
                ));
            }
            r.key
        }
    };
    report.key_found = key.map(|k| key_hex(&params, k));
    let transcript = decrypt::dehop_with_survey(intercept, &s, key)?;
    report.decrypted_frames = transcript.decrypted_frames;
    report.crc_failures = transcript.crc_failures;
    report.missing_blocks = transcript.missing_blocks;
    report.transcript = transcript;
    report.notes = notes;
    Ok((key, report))
}

/// Result of the challenge replay downgrade.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayReport {
    pub schema: &'static str,
    pub rand: String,
    /// Outcome of cracking the replayed weak-cipher session.
    pub rerun: AttackReport,
    pub key_found: Option<String>,
    /// Deciphered original session.
    pub transcript: Transcript,
    /// Every enciphered block of the original session deciphered cleanly.
    pub recovered: bool,
}

/// Replay the challenge recorded in `intercept` to the subscriber over a
/// cell that only offers A5/1, crack the resulting session, and use the
/// key on the original capture. When the subscriber derives the same key
/// for the same challenge, the original cipher choice offers no protection.
pub fn downgrade_replay_demo(
    intercept: &Intercept,
    sim: &Subscriber,
    weak_keys: bool,
    tables: &[TmtoTable],
    budget: CrackBudget,
    seed: u64,
) -> Result<ReplayReport, AttackError> {
    let params = intercept
        .header
        .preset
        .params()
        .ok_or(AttackError::UnknownPreset)?;
    let rand = crate::gsm::recorded_challenge(intercept).ok_or(ReplayError::NoChallenge)?;
    // The replaying cell is the attacker's own, so its assignment is sent
    // in the clear and its system information is known on the traffic
    // channel too.
    let cell = CellConfig {
        cell_id: intercept.header.cell_id,
        cipher: CipherMode::A51,
        hopping_enabled: false,
        assignment_mode: AssignmentMode::Immediate,
        weak_keys,
        ..CellConfig::default()
    };
    let mut session = SessionConfig::new(params.clone());
    session.traffic_blocks = 2 * crate::gsm::SACCH_PERIOD;
    session.decoys = 0;
    session.subscriber = sim.clone();
    let rerun_log = replay_session(intercept, &cell, &session, seed)?;
    let (key, rerun) = eavesdrop(&rerun_log.intercept(), tables, budget)?;
    let transcript = dehop_decrypt(intercept, key)?;
    let recovered = key.is_some()
        && transcript.decrypted_frames > 0
        && transcript.crc_failures == 0
        && transcript.undecrypted == 0;
    Ok(ReplayReport {
        schema: REPLAY_SCHEMA,
        rand: rand.iter().map(|b| format!("{b:02x}")).collect(),
        key_found: key.map(|k| key_hex(&params, k)),
        rerun,
        transcript,
        recovered,
    })
}
