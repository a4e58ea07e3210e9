//! Report and transcript documents, and the hex/bit-string conversions the
//! message flags use.
//!
//! Report field names are a stable interface. Everything outside `meta` is a
//! pure function of the configuration and seed, so two runs with the same
//! flags produce identical documents up to the `meta` object.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Result};
use serde::Serialize;
use serde_json::json;

use qsdc_core::protocol::{Bits, Transcript};
use qsdc_core::SimulationReport;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Decode a hex message into bits, four per digit, most significant first.
pub fn hex_to_bits(hex: &str) -> Result<Bits> {
    let mut bits = Vec::with_capacity(hex.len() * 4);
    for c in hex.chars() {
        let Some(v) = c.to_digit(16) else {
            bail!("invalid hex digit {c:?} in message");
        };
        for k in (0..4).rev() {
            bits.push(((v >> k) & 1) as u8);
        }
    }
    Ok(Bits::new(bits).expect("bits are 0/1"))
}

/// Encode bits as lowercase hex, padding the final nibble with zeros. The
/// exact bit length travels alongside in `message_len_bits`.
pub fn bits_to_hex(bits: &Bits) -> String {
    bits.as_slice()
        .chunks(4)
        .map(|chunk| {
            let mut v = 0u32;
            for k in 0..4 {
                v = (v << 1) | u32::from(chunk.get(k).copied().unwrap_or(0));
            }
            char::from_digit(v, 16).expect("nibble in range")
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ParamsDoc {
    pub pairs: usize,
    pub hadamard_fraction: f64,
    pub check_fraction: f64,
    pub threshold: f64,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct AttackDoc {
    pub kind: String,
    pub attack_probability: f64,
}

/// The deterministic body of a session report.
#[derive(Debug, Serialize)]
pub struct ReportDoc {
    pub params: ParamsDoc,
    pub attack: AttackDoc,
    pub check_error_rate: f64,
    pub ci95: [f64; 2],
    pub detected: bool,
    pub recovered_message_hex: Option<String>,
    pub message_len_bits: usize,
    pub message_bit_error_rate: Option<f64>,
    pub eve_mi_bits: f64,
    pub throughput: f64,
    pub check_error_rate_hadamard: Option<f64>,
    pub check_error_rate_no_hadamard: Option<f64>,
    pub oracle_tv_distances: BTreeMap<String, f64>,
}

impl ReportDoc {
    pub fn from_report(report: &SimulationReport) -> Self {
        ReportDoc {
            params: ParamsDoc {
                pairs: report.params.n_pairs,
                hadamard_fraction: report.params.hadamard_fraction,
                check_fraction: report.params.check_fraction,
                threshold: report.params.abort_threshold,
                seed: report.params.master_seed,
            },
            attack: AttackDoc {
                kind: report.attack.kind().to_string(),
                attack_probability: report.attack_probability,
            },
            check_error_rate: report.check_error_rate,
            ci95: [report.ci95.0, report.ci95.1],
            detected: report.detected,
            recovered_message_hex: report.recovered_message.as_ref().map(bits_to_hex),
            message_len_bits: report.params.message.len(),
            message_bit_error_rate: report.message_bit_error_rate,
            eve_mi_bits: report.eve_mi_bits,
            throughput: report.throughput,
            check_error_rate_hadamard: report.check_error_rate_hadamard,
            check_error_rate_no_hadamard: report.check_error_rate_no_hadamard,
            oracle_tv_distances: report.oracle_tv_distances.clone(),
        }
    }
}

/// Run metadata, excluded from determinism comparisons.
#[derive(Debug, Serialize)]
pub struct MetaDoc {
    pub generated_unix_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes_per_second: Option<f64>,
    pub version: &'static str,
}

impl MetaDoc {
    pub fn now(episodes_per_second: Option<f64>) -> Self {
        MetaDoc {
            generated_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            episodes_per_second,
            version: VERSION,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    #[serde(flatten)]
    pub report: ReportDoc,
    pub meta: MetaDoc,
}

#[derive(Debug, Serialize)]
pub struct OracleCellDoc {
    pub attack: String,
    pub alice_bit: u8,
    pub hadamard: bool,
    pub variables: Vec<String>,
    pub table: BTreeMap<String, f64>,
    pub exact_check_error_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_distance: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct OracleDocument {
    pub cells: Vec<OracleCellDoc>,
    pub meta: MetaDoc,
}

#[derive(Debug, Serialize)]
pub struct SweepDocument {
    pub grid: Vec<f64>,
    pub reports: Vec<ReportDoc>,
    pub meta: MetaDoc,
}

/// Transcript as line-delimited JSON: one announcement per line with fields
/// `step`, `actor`, `payload`.
pub fn transcript_lines(transcript: &Transcript) -> Vec<String> {
    use qsdc_core::TranscriptEntry as E;
    transcript
        .entries()
        .iter()
        .map(|entry| {
            let payload = match entry {
                E::BobHadamardPositions(p) => json!({
                    "type": "hadamard_positions",
                    "positions": p,
                }),
                E::AliceCheckPositions(p) => json!({
                    "type": "check_positions",
                    "positions": p,
                }),
                E::BobCheckResults(r) => json!({
                    "type": "check_results",
                    "results": r,
                }),
                E::AliceAbortDecision { abort, error_rate } => json!({
                    "type": "abort_decision",
                    "abort": abort,
                    "error_rate": error_rate,
                }),
                E::AliceMessageResults(r) => json!({
                    "type": "message_results",
                    "results": r,
                }),
            };
            serde_json::to_string(&json!({
                "step": entry.step(),
                "actor": entry.actor(),
                "payload": payload,
            }))
            .expect("transcript entries serialize")
        })
        .collect()
}
