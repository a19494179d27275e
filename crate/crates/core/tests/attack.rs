use gsmlab::a51::{advance, key_setup, CipherParams, SessionKey};
use gsmlab::attack::{
    crack_session, dehop_decrypt, derive_samples, downgrade_replay_demo, eavesdrop,
    extract_known_plaintext, known_bit_count, survey, CrackBudget, CrackStatus, Outcome,
    PlaintextGuess,
};
use gsmlab::gsm::{
    corrupt, read_capture, run_session, write_capture, AssignmentMode, CaptureLog, CellConfig,
    Channel, CipherMode, Direction, SessionConfig, Subscriber,
};
use gsmlab::tmto::{generate_chain, SampleSource, TmtoParams, TmtoTable};

fn toy_session() -> SessionConfig {
    SessionConfig::new(CipherParams::toy())
}

fn simulate(cell: &CellConfig, seed: u64) -> CaptureLog {
    run_session(cell, &toy_session(), seed).unwrap()
}

/// A table whose chains start on the states that produce the first
/// downlink and uplink windows of every frame under `key`, so any session
/// with that key is covered.
fn planted_tables(key: SessionKey) -> Vec<TmtoTable> {
    let cipher = CipherParams::toy();
    let params = TmtoParams::new(cipher.clone(), 4, 6, 1 << 10, 0).unwrap();
    let mut records = Vec::new();
    for frame in 0..256 {
        let s0 = key_setup(&cipher, key, frame).unwrap();
        for offset in [0, 114] {
            let start = advance(&cipher, &s0, offset).pack(&cipher);
            records.extend(generate_chain(&params, start).0);
        }
    }
    records.sort_by_key(|r| (r.end, r.start));
    records.dedup_by_key(|r| r.end);
    vec![TmtoTable {
        params,
        seed: 0,
        records,
    }]
}

#[test]
fn without_tables_nothing_is_covered() {
    let log = simulate(&CellConfig::default(), 1);
    let (key, report) = eavesdrop(&log.intercept(), &[], CrackBudget::default()).unwrap();
    assert_eq!(key, None);
    assert_eq!(report.outcome, Outcome::NotCovered);
    assert!(report.samples_available > 0);
    assert!(report.notes.iter().any(|n| n.contains("no tables")));
}

#[test]
fn planted_session_is_cracked() {
    let log = simulate(&CellConfig::default(), 2);
    let tables = planted_tables(log.truth.key);
    let (key, report) = eavesdrop(&log.intercept(), &tables, CrackBudget::default()).unwrap();
    assert_eq!(key, Some(log.truth.key));
    assert_eq!(report.outcome, Outcome::KeyFound);
    assert_eq!(report.winning_sample, Some(0));
    assert_eq!(report.transcript.messages, log.truth.messages);
    assert_eq!(report.crc_failures, 0);
    assert_eq!(report.missing_blocks, 0);
    assert_eq!(report.transcript.hop.as_ref(), Some(&log.truth.hop));
}

#[test]
fn weak_key_session_cracks_directly() {
    let cell = CellConfig {
        weak_keys: true,
        ..CellConfig::default()
    };
    let log = simulate(&cell, 3);
    assert_eq!(log.truth.key.kc & 0x3ff, 0);
    let tables = planted_tables(log.truth.key);
    let (key, _) = eavesdrop(&log.intercept(), &tables, CrackBudget::default()).unwrap();
    assert_eq!(key.map(|k| k.kc), Some(log.truth.key.kc));
}

#[test]
fn sample_budget_is_reported() {
    let log = simulate(&CellConfig::default(), 4);
    let other = SessionKey::new(log.truth.key.kc ^ 1);
    let budget = CrackBudget {
        max_samples: Some(5),
        ..CrackBudget::default()
    };
    let (key, report) = eavesdrop(&log.intercept(), &planted_tables(other), budget).unwrap();
    assert_eq!(key, None);
    assert_eq!(report.outcome, Outcome::BudgetExhausted);
    assert_eq!(report.samples_tried, 5);
}

#[test]
fn fully_known_full_bursts_give_51_samples_each() {
    let cell = CellConfig::default();
    let log = run_session(&cell, &SessionConfig::new(CipherParams::full()), 5).unwrap();
    let intercept = log.intercept();
    let guesses = extract_known_plaintext(&intercept);
    assert!(guesses.iter().all(|g| g.direction == Direction::Up));
    let samples = derive_samples(&intercept, &guesses, &CipherParams::full());
    assert_eq!(samples.len(), 4 * 51);
    for s in &samples {
        let state = advance(
            &CipherParams::full(),
            &key_setup(&CipherParams::full(), log.truth.key, s.frame).unwrap(),
            s.absolute_offset(),
        );
        let ks = gsmlab::a51::keystream_word(&CipherParams::full(), &state, 64);
        assert_eq!(ks, s.bits);
    }
}

#[test]
fn short_runs_give_no_samples() {
    let cell = CellConfig::default();
    let params = CipherParams::full();
    let log = run_session(&cell, &SessionConfig::new(params.clone()), 6).unwrap();
    let intercept = log.intercept();
    let guesses = extract_known_plaintext(&intercept);
    let all: Vec<(u16, bool)> = guesses
        .iter()
        .flat_map(|g| g.known.iter().copied())
        .collect();
    let truncated = |n: u16| PlaintextGuess {
        known: all.iter().copied().filter(|&(p, _)| p < n).collect(),
        ..guesses[0].clone()
    };
    let mut g = truncated(63);
    g.source = SampleSource::ProtocolScript;
    assert_eq!(derive_samples(&intercept, &[g], &params).len(), 0);
    assert_eq!(
        derive_samples(&intercept, &[truncated(64)], &params).len(),
        1
    );
}

#[test]
fn cipher_mode_complete_census() {
    let log = simulate(&CellConfig::default(), 7);
    let guesses = extract_known_plaintext(&log.intercept());
    let cmc: usize = guesses.iter().map(|g| g.known.len()).sum();
    assert_eq!(cmc, 456);
    assert!(known_bit_count(&guesses, SampleSource::Padding) >= 144);
}

#[test]
fn random_padding_removes_padding_samples() {
    for seed in 0..10 {
        let base = CellConfig {
            assignment_mode: AssignmentMode::Immediate,
            ..CellConfig::default()
        };
        let padded = CellConfig {
            random_padding: true,
            ..base.clone()
        };
        let count = |cell: &CellConfig| {
            let i = simulate(cell, seed).intercept();
            let samples = derive_samples(&i, &extract_known_plaintext(&i), &CipherParams::toy());
            let padding = samples
                .iter()
                .filter(|s| s.source == SampleSource::Padding)
                .count();
            (samples.len(), padding)
        };
        let (n_base, pad_base) = count(&base);
        let (n_rand, pad_rand) = count(&padded);
        assert_eq!(pad_rand, 0);
        assert!(pad_base > 0);
        assert!(n_rand > 0 && n_rand < n_base);
        let i = simulate(&padded, seed).intercept();
        assert!(survey(&i).random_padding);
        let guesses = extract_known_plaintext(&i);
        assert_eq!(known_bit_count(&guesses, SampleSource::Padding), 0);
        assert!(known_bit_count(&guesses, SampleSource::SystemInfo) > 0);
    }
}

#[test]
fn cleartext_guesses_match_payloads() {
    let cell = CellConfig {
        cipher: CipherMode::None,
        assignment_mode: AssignmentMode::Immediate,
        ..CellConfig::default()
    };
    let log = simulate(&cell, 8);
    let i = log.intercept();
    let guesses = extract_known_plaintext(&i);
    assert!(guesses.len() >= 3);
    for g in &guesses {
        for &(pos, bit) in &g.known {
            let b = usize::from(pos) / 114;
            let burst = i
                .find(g.frame + b as u32, g.slot, g.direction, g.arfcns[b])
                .unwrap();
            assert_eq!(burst.payload[usize::from(pos) % 114], bit);
        }
    }
    let (_, report) = eavesdrop(&i, &[], CrackBudget::default()).unwrap();
    assert_eq!(report.outcome, Outcome::Cleartext);
    assert_eq!(report.transcript.messages, log.truth.messages);
}

#[test]
fn attacker_mode_file_gives_same_result() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.cap");
    let log = simulate(&CellConfig::default(), 9);
    write_capture(&log, &path, false).unwrap();
    assert!(!gsmlab::gsm::truth_path(&path).exists());
    let tables = planted_tables(log.truth.key);
    let from_file = eavesdrop(
        &read_capture(&path).unwrap(),
        &tables,
        CrackBudget::default(),
    );
    let in_memory = eavesdrop(&log.intercept(), &tables, CrackBudget::default());
    let (a, mut ra) = from_file.unwrap();
    let (b, mut rb) = in_memory.unwrap();
    ra.lookup_latency_s = 0.0;
    rb.lookup_latency_s = 0.0;
    assert_eq!(a, b);
    assert_eq!(ra, rb);
}

#[test]
fn non_hopping_session_reads_one_channel() {
    let cell = CellConfig {
        hopping_enabled: false,
        ..CellConfig::default()
    };
    let log = simulate(&cell, 10);
    assert!(log.bursts.iter().all(|b| b.arfcn == cell.control_arfcn));
    let t = dehop_decrypt(&log.intercept(), Some(log.truth.key)).unwrap();
    assert_eq!(t.messages, log.truth.messages);
    let tables = planted_tables(log.truth.key);
    let (key, _) = eavesdrop(&log.intercept(), &tables, CrackBudget::default()).unwrap();
    assert_eq!(key, Some(log.truth.key));
}

#[test]
fn recovered_frames_follow_the_binomial_law() {
    let ber = 1e-4;
    let sessions = 60u64;
    let (mut ok, mut total) = (0u64, 0u64);
    for seed in 0..sessions {
        let log = simulate(&CellConfig::default(), 100 + seed);
        let noisy = corrupt(&log, ber, seed);
        let Ok(t) = dehop_decrypt(&noisy.intercept(), Some(log.truth.key)) else {
            continue;
        };
        if t.hop.is_none() {
            continue;
        }
        total += 2 * u64::from(toy_session().traffic_blocks);
        ok += t
            .messages
            .iter()
            .filter(|m| m.channel == Channel::Traffic)
            .count() as u64;
    }
    let p = (1.0 - ber).powi(456);
    let n = total as f64;
    let sigma = (p * (1.0 - p) / n).sqrt();
    let rate = ok as f64 / n;
    assert!(total >= 1000);
    assert!(
        (rate - p).abs() <= 4.0 * sigma,
        "rate {rate}, expected {p} ± {sigma}"
    );
}

#[test]
fn corrupted_only_sample_never_gives_a_wrong_key() {
    let log = simulate(&CellConfig::default(), 11);
    let i = log.intercept();
    let s = survey(&i);
    let samples = derive_samples(&i, &extract_known_plaintext(&i), &CipherParams::toy());
    let tables = planted_tables(log.truth.key);
    let all = crack_session(&i, &s, &samples, &tables, CrackBudget::default()).unwrap();
    let w = all.winning_sample.unwrap();
    let r = crack_session(&i, &s, &samples[w..=w], &tables, CrackBudget::default()).unwrap();
    assert_eq!(r.key, Some(log.truth.key));
    for bit in 0..24 {
        let mut one = samples[w];
        one.bits ^= 1 << bit;
        let r = crack_session(&i, &s, &[one], &tables, CrackBudget::default()).unwrap();
        assert!(r.key.is_none() || r.key == Some(log.truth.key), "bit {bit}");
        assert_ne!(r.status, CrackStatus::BudgetExhausted);
    }
}

#[test]
fn replay_recovers_strong_cipher_session() {
    let cell = CellConfig {
        cipher: CipherMode::StrongOpaque,
        ..CellConfig::default()
    };
    let log = simulate(&cell, 12);
    let i = log.intercept();
    let (_, direct) = eavesdrop(&i, &[], CrackBudget::default()).unwrap();
    assert_eq!(direct.outcome, Outcome::UnsupportedCipher);
    assert!(direct.transcript.undecrypted > 0);

    let tables = planted_tables(log.truth.key);
    let sim = Subscriber::default();
    let r = downgrade_replay_demo(&i, &sim, false, &tables, CrackBudget::default(), 99).unwrap();
    assert!(r.recovered);
    assert_eq!(r.transcript.messages, log.truth.messages);
    assert!(r.rerun.samples_available > 400);
}

#[test]
fn replay_fails_against_fresh_keys() {
    let cell = CellConfig {
        cipher: CipherMode::StrongOpaque,
        ..CellConfig::default()
    };
    let sim = Subscriber {
        hardened: true,
        ..Subscriber::default()
    };
    let session = SessionConfig {
        subscriber: sim.clone(),
        ..toy_session()
    };
    let log = run_session(&cell, &session, 13).unwrap();
    let tables = planted_tables(log.truth.key);
    let r = downgrade_replay_demo(
        &log.intercept(),
        &sim,
        false,
        &tables,
        CrackBudget::default(),
        99,
    )
    .unwrap();
    assert!(!r.recovered);
    assert_ne!(
        r.key_found.as_deref(),
        Some(format!("{:06x}", log.truth.key.kc).as_str())
    );
}
