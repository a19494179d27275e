//! Session key derivation and challenge replay.
//!
//! The SIM's key generator is modelled as a truncated hash of the secret and
//! the challenge. A hardened subscriber also mixes in a nonce drawn per run,
//! so replaying an old challenge yields a different key.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cell::{CellConfig, CellError, SessionConfig};
use super::frame::{decode_frame, MessageKind};
use super::session::{control_blocks, run_session, CaptureLog, Intercept};
use crate::a51::{CipherParams, SessionKey};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subscriber {
    pub secret: [u8; 16],
    pub hardened: bool,
}

impl Default for Subscriber {
    fn default() -> Self {
        Subscriber {
            secret: *b"gsmlab-subscribr",
            hardened: false,
        }
    }
}

impl Subscriber {
    /// The SIM's answer to a challenge: the session key and, for a hardened
    /// SIM, the nonce it mixed in.
    pub fn respond(
        &self,
        params: &CipherParams,
        rand: &[u8; 16],
        weak: bool,
        rng: &mut impl RngCore,
    ) -> (SessionKey, Option<[u8; 8]>) {
        let nonce = self.hardened.then(|| {
            let mut n = [0u8; 8];
            rng.fill_bytes(&mut n);
            n
        });
        let key = derive_session_key(params, &self.secret, rand, nonce.as_ref(), weak);
        (key, nonce)
    }
}

/// `Kc = trunc(SHA-256("gsmlab-kc" | secret | rand [| nonce]))`, with the
/// ten low bits cleared in weak mode.
pub fn derive_session_key(
    params: &CipherParams,
    secret: &[u8; 16],
    rand: &[u8; 16],
    nonce: Option<&[u8; 8]>,
    weak: bool,
) -> SessionKey {
    let mut h = Sha256::new();
    h.update(b"gsmlab-kc");
    h.update(secret);
    h.update(rand);
    if let Some(n) = nonce {
        h.update(n);
    }
    let digest = h.finalize();
    let kc = u64::from_le_bytes(digest[..8].try_into().unwrap()) & params.key_mask();
    if weak {
        SessionKey::weakened(kc)
    } else {
        SessionKey::new(kc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("no readable authentication request in the capture")]
    NoChallenge,
    #[error("replayed session: {0}")]
    Session(#[from] CellError),
}

/// Outcome of replaying a recorded challenge to the subscriber.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayWitness {
    pub rand: [u8; 16],
    /// Key the subscriber computes for the replayed challenge.
    pub replayed_key: SessionKey,
}

/// Find the authentication request in a capture.
pub fn recorded_challenge(intercept: &Intercept) -> Option<[u8; 16]> {
    control_blocks(intercept)
        .into_iter()
        .filter_map(|b| decode_frame(&b.coded).ok())
        .find(|f| f.kind == MessageKind::AuthRequest && f.info.len() == 16)
        .map(|f| f.info[..].try_into().unwrap())
}

/// Send the recorded challenge to the subscriber again and report the key
/// it derives. `rng` drives a hardened SIM's nonce.
pub fn replay_challenge(
    intercept: &Intercept,
    sim: &Subscriber,
    params: &CipherParams,
    weak: bool,
    rng: &mut impl RngCore,
) -> Result<ReplayWitness, ReplayError> {
    let rand = recorded_challenge(intercept).ok_or(ReplayError::NoChallenge)?;
    let (replayed_key, _) = sim.respond(params, &rand, weak, rng);
    Ok(ReplayWitness { rand, replayed_key })
}

/// Run a new session on `cell` in which the subscriber of `session` answers
/// the challenge recorded in `intercept`.
pub fn replay_session(
    intercept: &Intercept,
    cell: &CellConfig,
    session: &SessionConfig,
    seed: u64,
) -> Result<CaptureLog, ReplayError> {
    let rand = recorded_challenge(intercept).ok_or(ReplayError::NoChallenge)?;
    let session = SessionConfig {
        rand: Some(rand),
        ..session.clone()
    };
    Ok(run_session(cell, &session, seed)?)
}
