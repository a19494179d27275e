//! Browser demo. Each operation has a plain Rust form, tested natively,
//! and a `wasm_bindgen` wrapper that hands JSON text to the page.

use gsmlab::a51::{clock_forward, clocked_registers, key_setup, CipherParams, Preset, SessionKey};
use gsmlab::gsm::hop_index;
use gsmlab::tmto::{build_table, exact_coverage, TmtoParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps a single page call under a couple of seconds.
pub const MAX_TRACE_BITS: u32 = 1024;
pub const MAX_HOP_FRAMES: u32 = 1 << 16;
pub const MAX_CURVE_CHAINS: u64 = 1 << 15;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("{0}")]
    Input(String),
}

fn input(msg: impl Into<String>) -> DemoError {
    DemoError::Input(msg.into())
}

/// Channels used by frames `start..start + count` of a hopping channel.
pub fn hopping_sequence(
    hsn: u8,
    maio: u8,
    allocation: &[u16],
    start: u32,
    count: u32,
) -> Result<Vec<u16>, DemoError> {
    if allocation.is_empty() || allocation.len() > 64 {
        return Err(input("allocation needs 1 to 64 channels"));
    }
    if hsn > 63 {
        return Err(input("hsn must be 0..=63"));
    }
    if usize::from(maio) >= allocation.len() {
        return Err(input("maio must index the allocation"));
    }
    if count > MAX_HOP_FRAMES {
        return Err(input(format!("at most {MAX_HOP_FRAMES} frames")));
    }
    let mut alloc = allocation.to_vec();
    alloc.sort_unstable();
    alloc.dedup();
    if alloc.len() != allocation.len() {
        return Err(input("allocation repeats a channel"));
    }
    Ok((0..count)
        .map(|i| alloc[hop_index(hsn, maio, start.wrapping_add(i), alloc.len())])
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ClockStep {
    pub regs: [u64; 3],
    /// Bit `i` set when register `i` stepped into this state.
    pub clocked: u8,
    pub bit: u8,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    pub preset: String,
    pub lengths: [u32; 3],
    pub clock_bits: [u32; 3],
    pub output_bits: [u32; 3],
    /// State after key and frame setup.
    pub setup: [u64; 3],
    pub steps: Vec<ClockStep>,
    pub keystream: String,
}

/// Register contents clock by clock while `bits` keystream bits are made.
pub fn a51_trace(preset: &str, key_hex: &str, frame: u32, bits: u32) -> Result<Trace, DemoError> {
    let preset: Preset = preset.parse().map_err(input)?;
    let params = preset.params().ok_or_else(|| input("no such preset"))?;
    if bits > MAX_TRACE_BITS {
        return Err(input(format!("at most {MAX_TRACE_BITS} bits")));
    }
    let kc = u64::from_str_radix(key_hex.trim().trim_start_matches("0x"), 16)
        .map_err(|_| input("key is not hex"))?;
    let mut state =
        key_setup(&params, SessionKey::new(kc), frame).map_err(|e| input(e.to_string()))?;
    let setup = state.regs;
    let mut steps = Vec::with_capacity(bits as usize);
    for _ in 0..bits {
        let clocked = clocked_registers(&params, &state);
        let (next, bit) = clock_forward(&params, &state);
        state = next;
        steps.push(ClockStep {
            regs: state.regs,
            clocked,
            bit: u8::from(bit),
        });
    }
    let r = &params.registers;
    Ok(Trace {
        preset: preset.to_string(),
        lengths: r.map(|x| x.len),
        clock_bits: r.map(|x| x.clock_bit),
        output_bits: r.map(|x| x.output_bit),
        setup,
        keystream: steps.iter().map(|s| char::from(b'0' + s.bit)).collect(),
        steps,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub chains_per_table: u64,
    pub stored: usize,
    pub coverage: f64,
}

/// Exact coverage of TOY table sets of growing size.
pub fn coverage_curve(
    colors: u32,
    dp_bits: u32,
    max_steps: u64,
    tables: u32,
    chain_counts: &[u64],
) -> Result<Vec<CurvePoint>, DemoError> {
    let cipher = CipherParams::toy();
    if tables == 0 || tables > 8 {
        return Err(input("tables must be 1..=8"));
    }
    let mut out = Vec::new();
    for &n in chain_counts {
        if n == 0 || n > MAX_CURVE_CHAINS {
            return Err(input(format!(
                "chain counts must be 1..={MAX_CURVE_CHAINS}"
            )));
        }
        let set = (0..u64::from(tables))
            .map(|id| {
                let p = TmtoParams::new(cipher.clone(), colors, dp_bits, max_steps, id)
                    .map_err(|e| input(e.to_string()))?;
                Ok(build_table(&p, n, 1).0)
            })
            .collect::<Result<Vec<_>, DemoError>>()?;
        let cov = exact_coverage(&set).ok_or_else(|| input("domain too large"))?;
        out.push(CurvePoint {
            chains_per_table: n,
            stored: set.iter().map(|t| t.records.len()).sum(),
            coverage: cov.fraction,
        });
    }
    Ok(out)
}

fn js<T: Serialize>(r: Result<T, DemoError>) -> Result<String, JsError> {
    r.map(|v| serde_json::to_string(&v).expect("serializes"))
        .map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = hoppingSequence)]
pub fn hopping_sequence_js(
    hsn: u8,
    maio: u8,
    allocation: Vec<u16>,
    start: u32,
    count: u32,
) -> Result<Vec<u16>, JsError> {
    hopping_sequence(hsn, maio, &allocation, start, count).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = a51Trace)]
pub fn a51_trace_js(preset: &str, key_hex: &str, frame: u32, bits: u32) -> Result<String, JsError> {
    js(a51_trace(preset, key_hex, frame, bits))
}

#[wasm_bindgen(js_name = coverageCurve)]
pub fn coverage_curve_js(
    colors: u32,
    dp_bits: u32,
    max_steps: u32,
    tables: u32,
    chain_counts: Vec<u32>,
) -> Result<String, JsError> {
    let counts: Vec<u64> = chain_counts.into_iter().map(u64::from).collect();
    js(coverage_curve(
        colors,
        dp_bits,
        u64::from(max_steps),
        tables,
        &counts,
    ))
}
