use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use gsmlab::a51::{CipherParams, SessionKey};
use gsmlab::attack::{
    derive_samples, downgrade_replay_demo, eavesdrop, extract_known_plaintext, key_hex,
    known_bit_count, survey, AttackError, CrackBudget, Outcome, Transcript,
};
use gsmlab::config::LabConfig;
use gsmlab::gsm::{
    corrupt_counted, read_capture, run_session, truth_path, write_capture, CaptureError,
    CipherMode, Intercept, ReplayError,
};
use gsmlab::tmto::{
    build_table, coverage_measure, exact_coverage, read_table, write_table, SampleSource,
    SearchSpace, TmtoTable,
};
use serde::Serialize;
use serde_json::json;

use crate::{BudgetArgs, CliError, ConfigArgs, Status, TableDirArg};

pub const TABLE_EXTENSION: &str = "gtl";

fn emit(value: &impl Serialize) {
    emit_line(&serde_json::to_string(value).expect("report serializes"));
}

/// Print one report line. A closed stdout (e.g. `| head`) is not an error.
pub fn emit_line(line: &str) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{line}").and_then(|_| out.flush());
}

/// The configuration file with `--set` overrides replacing its keys.
pub fn load_config(args: &ConfigArgs) -> Result<LabConfig, CliError> {
    let text = match &args.config {
        Some(p) => {
            fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => String::new(),
    };
    let mut overrides = Vec::new();
    for o in &args.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{o}`")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let key_of = |line: &str| {
        let content = line.split('#').next().unwrap_or("");
        content.split_once('=').map(|(k, _)| k.trim().to_string())
    };
    let mut merged: Vec<String> = text
        .lines()
        .map(|l| match key_of(l) {
            Some(k) if overrides.iter().any(|(o, _)| *o == k) => String::new(),
            _ => l.to_string(),
        })
        .collect();
    merged.extend(overrides.iter().map(|(k, v)| format!("{k} = {v}")));
    LabConfig::parse(&merged.join("\n")).map_err(|e| CliError::Config(e.to_string()))
}

fn table_dir(arg: &TableDirArg) -> Result<PathBuf, CliError> {
    arg.tables_dir.clone().ok_or_else(|| {
        CliError::Config("no table directory: pass --tables-dir or set GTL_TABLE_DIR".into())
    })
}

pub fn load_tables(dir: &Path) -> Result<Vec<(PathBuf, TmtoTable)>, CliError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("table directory {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == TABLE_EXTENSION))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let t =
                read_table(&p).map_err(|e| CliError::Corrupt(format!("{}: {e}", p.display())))?;
            Ok((p, t))
        })
        .collect()
}

fn load_capture(path: &Path) -> Result<Intercept, CliError> {
    read_capture(path).map_err(|e| match e {
        CaptureError::Io(ref io) if io.kind() == io::ErrorKind::NotFound => {
            CliError::Config(format!("{}: {e}", path.display()))
        }
        CaptureError::Io(_) => CliError::Other(format!("{}: {e}", path.display())),
        _ => CliError::Corrupt(format!("{}: {e}", path.display())),
    })
}

fn attack_error(e: AttackError) -> CliError {
    match e {
        AttackError::PresetMismatch { .. } => CliError::Config(e.to_string()),
        AttackError::Replay(ReplayError::Session(_)) => CliError::Config(e.to_string()),
        _ => CliError::Corrupt(e.to_string()),
    }
}

fn space_name(space: SearchSpace) -> String {
    match space {
        SearchSpace::State => "state".into(),
        SearchSpace::WeakKey { frame } => format!("weak_key(frame={frame})"),
    }
}

pub fn gen_tables(
    args: &ConfigArgs,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<Status, CliError> {
    let mut cfg = load_config(args)?;
    if let Some(s) = seed {
        cfg.tables.table_seed = s;
    }
    let out_dir = out_dir.ok_or_else(|| {
        CliError::Config("no output directory: pass --out-dir or set GTL_TABLE_DIR".into())
    })?;
    let cipher = cfg.scenario.cipher_params();
    if cipher == CipherParams::full() {
        eprintln!("note: FULL-preset tables are far beyond desk scale; expect negligible coverage");
    }
    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Other(format!("{}: {e}", out_dir.display())))?;
    let t = &cfg.tables;
    for i in 0..t.tables {
        let params = t
            .params(&cipher, i)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let (table, stats) = build_table(&params, t.chains_per_table, t.table_seed);
        let path = out_dir.join(format!("table-{i:02}.{TABLE_EXTENSION}"));
        write_table(&table, &path)
            .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
        emit(&json!({
            "schema": "gsmlab.gen-tables.v1",
            "path": path,
            "table_id": i,
            "preset": cipher.preset.to_string(),
            "search_space": space_name(t.search_space),
            "colors": t.colors,
            "dp_bits": t.dp_bits,
            "max_steps_per_color": t.max_steps_per_color,
            "seed": t.table_seed,
            "requested": stats.requested,
            "kept": stats.kept,
            "merged": stats.merged,
            "overflowed": stats.overflowed,
            "merge_fraction": stats.merge_fraction(),
            "chains_per_second": stats.chains_per_second(),
            "elapsed_s": stats.elapsed.as_secs_f64(),
        }));
    }
    Ok(Status::Done)
}

pub fn table_stats(
    arg: &TableDirArg,
    trials: u64,
    seed: u64,
    exact: bool,
) -> Result<Status, CliError> {
    let dir = table_dir(arg)?;
    let loaded = load_tables(&dir)?;
    if loaded.is_empty() {
        return Err(CliError::Config(format!(
            "no .{TABLE_EXTENSION} files in {}",
            dir.display()
        )));
    }
    for (path, t) in &loaded {
        emit(&json!({
            "schema": "gsmlab.table-stats.v1",
            "path": path,
            "table_id": t.params.table_id,
            "preset": t.params.cipher.preset.to_string(),
            "search_space": space_name(t.params.space),
            "colors": t.params.colors,
            "dp_bits": t.params.dp_bits,
            "max_steps_per_color": t.params.max_steps,
            "seed": t.seed,
            "records": t.records.len(),
        }));
    }
    let tables: Vec<TmtoTable> = loaded.into_iter().map(|(_, t)| t).collect();
    if tables.iter().any(|t| {
        t.params.cipher != tables[0].params.cipher || t.params.space != tables[0].params.space
    }) {
        return Err(CliError::Config(
            "tables mix ciphers or search spaces".into(),
        ));
    }
    let mc = (trials > 0).then(|| coverage_measure(&tables, trials, seed));
    let ex = if exact { exact_coverage(&tables) } else { None };
    emit(&json!({
        "schema": "gsmlab.table-set.v1",
        "tables": tables.len(),
        "records": tables.iter().map(|t| t.records.len()).sum::<usize>(),
        "coverage": mc,
        "exact_coverage": ex,
        "exact_requested": exact,
    }));
    Ok(Status::Done)
}

pub fn simulate(
    args: &ConfigArgs,
    out: &Path,
    seed: Option<u64>,
    no_truth: bool,
) -> Result<Status, CliError> {
    let mut cfg = load_config(args)?;
    if let Some(s) = seed {
        cfg.scenario.seed = s;
    }
    let sc = &cfg.scenario;
    let log = run_session(&sc.cell, &sc.session(), sc.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let (log, flips) = if sc.ber > 0.0 {
        corrupt_counted(&log, sc.ber, sc.seed.wrapping_add(0x5eed))
    } else {
        (log, 0)
    };
    write_capture(&log, out, !no_truth)
        .map_err(|e| CliError::Other(format!("{}: {e}", out.display())))?;
    let bits = log.bursts.len() as u64 * 114;
    emit(&json!({
        "schema": "gsmlab.simulate.v1",
        "capture": out,
        "truth": (!no_truth).then(|| truth_path(out)),
        "preset": log.header.preset.to_string(),
        "cipher": sc.cell.cipher,
        "hopping": sc.cell.hopping_enabled,
        "bursts": log.bursts.len(),
        "first_frame": log.bursts.first().map(|b| b.frame),
        "last_frame": log.bursts.last().map(|b| b.frame),
        "ber": sc.ber,
        "bit_flips": flips,
        "expected_flips": bits as f64 * sc.ber,
    }));
    Ok(Status::Done)
}

pub fn extract(path: &Path, list: bool) -> Result<Status, CliError> {
    let intercept = load_capture(path)?;
    let params = intercept
        .header
        .preset
        .params()
        .ok_or_else(|| CliError::Corrupt("capture has no cipher preset".into()))?;
    let s = survey(&intercept);
    let guesses = extract_known_plaintext(&intercept);
    let samples = derive_samples(&intercept, &guesses, &params);
    let count = |src| samples.iter().filter(|x| x.source == src).count();
    emit(&json!({
        "schema": "gsmlab.extract.v1",
        "cell_id": s.cell_id,
        "control_arfcn": s.control_arfcn,
        "cipher": s.cipher,
        "random_padding_detected": s.random_padding,
        "hop_known": s.hop.is_some(),
        "guessed_blocks": guesses.len(),
        "known_bits": {
            "padding": known_bit_count(&guesses, SampleSource::Padding),
            "system_info": known_bit_count(&guesses, SampleSource::SystemInfo),
            "protocol_script": known_bit_count(&guesses, SampleSource::ProtocolScript),
        },
        "samples": {
            "total": samples.len(),
            "padding": count(SampleSource::Padding),
            "system_info": count(SampleSource::SystemInfo),
            "protocol_script": count(SampleSource::ProtocolScript),
        },
    }));
    if list {
        for (i, x) in samples.iter().enumerate() {
            emit(&json!({
                "schema": "gsmlab.sample.v1",
                "index": i,
                "bits": format!("{:0w$x}", x.bits, w = params.state_bits().div_ceil(4) as usize),
                "frame": x.frame,
                "tdma_frame": x.tdma_frame,
                "offset": x.offset,
                "direction": x.direction,
                "source": x.source,
            }));
        }
    }
    Ok(Status::Done)
}

fn budget(b: BudgetArgs) -> CrackBudget {
    CrackBudget {
        max_samples: b.max_samples,
        node_budget: b.node_budget,
    }
}

fn tables_only(arg: &TableDirArg) -> Result<Vec<TmtoTable>, CliError> {
    Ok(load_tables(&table_dir(arg)?)?
        .into_iter()
        .map(|(_, t)| t)
        .collect())
}

pub fn crack(
    path: &Path,
    tables: &TableDirArg,
    b: BudgetArgs,
    replay: bool,
    config: &ConfigArgs,
    seed: u64,
) -> Result<Status, CliError> {
    let intercept = load_capture(path)?;
    let tables = tables_only(tables)?;
    let (_, report) = eavesdrop(&intercept, &tables, budget(b)).map_err(attack_error)?;
    if report.outcome == Outcome::UnsupportedCipher && replay {
        return replay_with(&intercept, &tables, b, config, seed);
    }
    emit_line(&report.to_json_line());
    Ok(match report.outcome {
        Outcome::KeyFound | Outcome::Cleartext => Status::Done,
        Outcome::NotCovered | Outcome::BudgetExhausted | Outcome::UnsupportedCipher => {
            Status::NotRecovered
        }
    })
}

pub fn replay_demo(
    path: &Path,
    tables: &TableDirArg,
    b: BudgetArgs,
    config: &ConfigArgs,
    seed: u64,
) -> Result<Status, CliError> {
    let intercept = load_capture(path)?;
    let tables = tables_only(tables)?;
    replay_with(&intercept, &tables, b, config, seed)
}

fn replay_with(
    intercept: &Intercept,
    tables: &[TmtoTable],
    b: BudgetArgs,
    config: &ConfigArgs,
    seed: u64,
) -> Result<Status, CliError> {
    let cfg = load_config(config)?;
    let sc = &cfg.scenario;
    let r = downgrade_replay_demo(
        intercept,
        &sc.subscriber,
        sc.cell.weak_keys,
        tables,
        budget(b),
        seed,
    )
    .map_err(attack_error)?;
    emit(&r);
    Ok(if r.recovered {
        Status::Done
    } else {
        Status::NotRecovered
    })
}

#[derive(Serialize)]
struct DecryptReport {
    schema: &'static str,
    key: String,
    #[serde(flatten)]
    transcript: Transcript,
}

pub fn decrypt(path: &Path, key: &str) -> Result<Status, CliError> {
    let intercept = load_capture(path)?;
    let params = intercept
        .header
        .preset
        .params()
        .ok_or_else(|| CliError::Corrupt("capture has no cipher preset".into()))?;
    let digits = key.trim_start_matches("0x");
    let kc = u64::from_str_radix(digits, 16)
        .map_err(|_| CliError::Config(format!("key `{key}` is not hex")))?;
    if kc & !params.key_mask() != 0 {
        return Err(CliError::Config(format!(
            "key `{key}` is wider than {} bits",
            params.key_bits
        )));
    }
    let key = SessionKey::new(kc);
    let transcript = gsmlab::attack::dehop_decrypt(&intercept, Some(key)).map_err(attack_error)?;
    if survey(&intercept).cipher == Some(CipherMode::StrongOpaque) {
        eprintln!("note: the session uses the strong cipher; the key is applied through it");
    }
    emit(&DecryptReport {
        schema: "gsmlab.transcript.v1",
        key: key_hex(&params, key),
        transcript,
    });
    Ok(Status::Done)
}
