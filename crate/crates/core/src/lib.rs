//! A laboratory for passive GSM eavesdropping experiments.
//!
//! The crate is split along the attacker's pipeline:
//!
//! * [`a51`]: the A5/1 cipher, including backward clocking and recovery of
//!   the session key from an internal state.
//! * [`tmto`]: time-memory trade-off tables mixing rainbow colors with
//!   distinguished points, their file format and lookup.
//! * [`gsm`]: a deterministic model of the air interface: sessions, L2
//!   framing with padding, burst segmentation, frequency hopping, capture.
//! * [`attack`]: known-plaintext extraction, keystream samples, cracking,
//!   dehopping and decryption, and the challenge replay downgrade.
//! * [`config`]: the flat `key=value` scenario format used by the CLI.

pub mod a51;
pub mod attack;
pub mod bits;
pub mod config;
pub mod gsm;
pub mod stats;
pub mod tmto;
