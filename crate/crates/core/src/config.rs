//! Scenario and table-set configuration.
//!
//! Flat `key = value` lines; `#` starts a comment; keys are lowercase snake
//! case and may appear once. Every key is optional. [`LabConfig::render`]
//! prints all keys with their current values, which for
//! `LabConfig::default()` documents the defaults.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::a51::{CipherParams, Preset};
use crate::gsm::{AssignmentMode, CellConfig, CipherMode, SessionConfig, Subscriber};
use crate::tmto::{build_table, GenStats, SearchSpace, TmtoParams, TmtoParamsError, TmtoTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// A simulated session and the channel it is captured over.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub preset: Preset,
    pub seed: u64,
    pub cell: CellConfig,
    pub traffic_blocks: u32,
    pub decoys: u8,
    pub ber: f64,
    pub subscriber: Subscriber,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            preset: Preset::Toy,
            seed: 1,
            cell: CellConfig::default(),
            traffic_blocks: 12,
            decoys: 3,
            ber: 0.0,
            subscriber: Subscriber::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn cipher_params(&self) -> CipherParams {
        self.preset
            .params()
            .expect("presets other than custom have parameters")
    }

    pub fn session(&self) -> SessionConfig {
        SessionConfig {
            traffic_blocks: self.traffic_blocks,
            decoys: self.decoys,
            subscriber: self.subscriber.clone(),
            ..SessionConfig::new(self.cipher_params())
        }
    }
}

/// Geometry of a set of trade-off tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSetConfig {
    pub colors: u32,
    pub dp_bits: u32,
    pub max_steps_per_color: u64,
    pub chains_per_table: u64,
    pub tables: u32,
    pub table_seed: u64,
    pub search_space: SearchSpace,
}

impl Default for TableSetConfig {
    fn default() -> Self {
        TableSetConfig {
            colors: 4,
            dp_bits: 6,
            max_steps_per_color: 1 << 10,
            chains_per_table: 1 << 16,
            tables: 4,
            table_seed: 1,
            search_space: SearchSpace::State,
        }
    }
}

impl TableSetConfig {
    /// Parameters of table `index` of the set.
    pub fn params(&self, cipher: &CipherParams, index: u32) -> Result<TmtoParams, TmtoParamsError> {
        TmtoParams::with_space(
            cipher.clone(),
            self.search_space,
            self.colors,
            self.dp_bits,
            self.max_steps_per_color,
            u64::from(index),
        )
    }

    /// Build every table of the set on the global thread pool.
    pub fn build(
        &self,
        cipher: &CipherParams,
    ) -> Result<(Vec<TmtoTable>, Vec<GenStats>), TmtoParamsError> {
        let mut tables = Vec::with_capacity(self.tables as usize);
        let mut stats = Vec::with_capacity(self.tables as usize);
        for i in 0..self.tables {
            let (t, s) = build_table(
                &self.params(cipher, i)?,
                self.chains_per_table,
                self.table_seed,
            );
            tables.push(t);
            stats.push(s);
        }
        Ok((tables, stats))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabConfig {
    pub scenario: ScenarioConfig,
    pub tables: TableSetConfig,
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("`{v}` is not a valid number"))
}

fn parse_list(v: &str) -> Result<Vec<u16>, String> {
    v.split(',').map(|x| parse_num(x.trim())).collect()
}

fn parse_secret(v: &str) -> Result<[u8; 16], String> {
    if v.len() != 32 || !v.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err("expected 32 hex digits".into());
    }
    let mut out = [0u8; 16];
    for (i, o) in out.iter_mut().enumerate() {
        *o = u8::from_str_radix(&v[2 * i..2 * i + 2], 16).unwrap();
    }
    Ok(out)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl LabConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = LabConfig::default();
        let mut seen = std::collections::HashSet::new();
        let mut weak_frame: Option<u32> = None;
        let mut space_weak = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or(ConfigError::Syntax { line })?;
            if key.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.into(),
                });
            }
            let bad = |reason: String| ConfigError::BadValue {
                line,
                key: key.into(),
                reason,
            };
            let s = &mut cfg.scenario;
            let t = &mut cfg.tables;
            match key {
                "preset" => {
                    s.preset = match value {
                        "toy" => Preset::Toy,
                        "full" => Preset::Full,
                        _ => return Err(bad("expected toy or full".into())),
                    }
                }
                "seed" => s.seed = parse_num(value).map_err(bad)?,
                "cell_id" => s.cell.cell_id = parse_num(value).map_err(bad)?,
                "arfcn_allocation" => s.cell.arfcn_allocation = parse_list(value).map_err(bad)?,
                "hsn" => s.cell.hsn = parse_num(value).map_err(bad)?,
                "maio" => s.cell.maio = parse_num(value).map_err(bad)?,
                "hopping_enabled" => s.cell.hopping_enabled = parse_bool(value).map_err(bad)?,
                "assignment_mode" => {
                    s.cell.assignment_mode = AssignmentMode::from_str(value).map_err(bad)?
                }
                "cipher" => s.cell.cipher = CipherMode::from_str(value).map_err(bad)?,
                "random_padding" => s.cell.random_padding = parse_bool(value).map_err(bad)?,
                "weak_keys" => s.cell.weak_keys = parse_bool(value).map_err(bad)?,
                "control_arfcn" => s.cell.control_arfcn = parse_num(value).map_err(bad)?,
                "traffic_blocks" => s.traffic_blocks = parse_num(value).map_err(bad)?,
                "decoys" => s.decoys = parse_num(value).map_err(bad)?,
                "ber" => {
                    let ber: f64 = parse_num(value).map_err(bad)?;
                    if !(0.0..=1.0).contains(&ber) {
                        return Err(bad("must lie in [0, 1]".into()));
                    }
                    s.ber = ber;
                }
                "subscriber_secret" => s.subscriber.secret = parse_secret(value).map_err(bad)?,
                "hardened_subscriber" => s.subscriber.hardened = parse_bool(value).map_err(bad)?,
                "colors" => t.colors = parse_num(value).map_err(bad)?,
                "dp_bits" => t.dp_bits = parse_num(value).map_err(bad)?,
                "max_steps_per_color" => t.max_steps_per_color = parse_num(value).map_err(bad)?,
                "chains_per_table" => t.chains_per_table = parse_num(value).map_err(bad)?,
                "tables" => t.tables = parse_num(value).map_err(bad)?,
                "table_seed" => t.table_seed = parse_num(value).map_err(bad)?,
                "search_space" => {
                    space_weak = match value {
                        "state" => false,
                        "weak_key" => true,
                        _ => return Err(bad("expected state or weak_key".into())),
                    }
                }
                "weak_key_frame" => weak_frame = Some(parse_num(value).map_err(bad)?),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.into(),
                    })
                }
            }
        }
        cfg.tables.search_space = if space_weak {
            SearchSpace::WeakKey {
                frame: weak_frame.unwrap_or(0),
            }
        } else {
            SearchSpace::State
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        let s = &self.scenario;
        s.session().validate(&s.cell).map_err(|e| invalid(&e))?;
        if self.tables.chains_per_table == 0 {
            return Err(ConfigError::Invalid(
                "chains_per_table must be at least 1".into(),
            ));
        }
        if self.tables.tables == 0 {
            return Err(ConfigError::Invalid("tables must be at least 1".into()));
        }
        self.tables
            .params(&s.cipher_params(), 0)
            .map_err(|e| invalid(&e))?;
        Ok(())
    }

    /// Every key with its value, in the file format.
    pub fn render(&self) -> String {
        let s = &self.scenario;
        let c = &s.cell;
        let t = &self.tables;
        let mut o = String::new();
        let b = |x: bool| if x { "true" } else { "false" };
        let alloc: Vec<String> = c.arfcn_allocation.iter().map(u16::to_string).collect();
        let mode = match c.assignment_mode {
            AssignmentMode::Early => "early",
            AssignmentMode::Immediate => "immediate",
        };
        let cipher = match c.cipher {
            CipherMode::None => "none",
            CipherMode::A51 => "a51",
            CipherMode::StrongOpaque => "strong_opaque",
        };
        let (space, frame) = match t.search_space {
            SearchSpace::State => ("state", 0),
            SearchSpace::WeakKey { frame } => ("weak_key", frame),
        };
        o.push_str("# scenario\n");
        writeln!(o, "preset = {}", s.preset.to_string().to_lowercase()).unwrap();
        writeln!(o, "seed = {}", s.seed).unwrap();
        writeln!(o, "cell_id = {}", c.cell_id).unwrap();
        writeln!(o, "arfcn_allocation = {}", alloc.join(",")).unwrap();
        writeln!(o, "hsn = {}", c.hsn).unwrap();
        writeln!(o, "maio = {}", c.maio).unwrap();
        writeln!(o, "hopping_enabled = {}", b(c.hopping_enabled)).unwrap();
        writeln!(o, "assignment_mode = {mode}").unwrap();
        writeln!(o, "cipher = {cipher}").unwrap();
        writeln!(o, "random_padding = {}", b(c.random_padding)).unwrap();
        writeln!(o, "weak_keys = {}", b(c.weak_keys)).unwrap();
        writeln!(o, "control_arfcn = {}", c.control_arfcn).unwrap();
        writeln!(o, "traffic_blocks = {}", s.traffic_blocks).unwrap();
        writeln!(o, "decoys = {}", s.decoys).unwrap();
        writeln!(o, "ber = {}", s.ber).unwrap();
        writeln!(o, "subscriber_secret = {}", hex(&s.subscriber.secret)).unwrap();
        writeln!(o, "hardened_subscriber = {}", b(s.subscriber.hardened)).unwrap();
        o.push_str("\n# tables\n");
        writeln!(o, "colors = {}", t.colors).unwrap();
        writeln!(o, "dp_bits = {}", t.dp_bits).unwrap();
        writeln!(o, "max_steps_per_color = {}", t.max_steps_per_color).unwrap();
        writeln!(o, "chains_per_table = {}", t.chains_per_table).unwrap();
        writeln!(o, "tables = {}", t.tables).unwrap();
        writeln!(o, "table_seed = {}", t.table_seed).unwrap();
        writeln!(o, "search_space = {space}").unwrap();
        writeln!(o, "weak_key_frame = {frame}").unwrap();
        o
    }
}
