//! Result assembly and serialization. CSV carries only the data section
//! (bit-identical across runs of the same config); wall-clock timing lives
//! in the JSON diagnostics block.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crossres::analysis::{CompareRun, FidelityRecord, RunDiagnostics, SweepRow};
use crossres::interaction::ResonanceReport;

use crate::config::RawConfig;

pub const CSV_HEADER: &str =
    "time,state_fidelity,operator_fidelity,leakage,rwa_ratio_g,rwa_ratio_delta";

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn record_fields(r: &FidelityRecord) -> String {
    format!(
        "{},{},{},{},{},{}",
        r.time, r.state_fidelity, r.operator_fidelity, r.leakage, r.rwa_ratio_g, r.rwa_ratio_delta
    )
}

pub fn records_csv(records: &[FidelityRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&record_fields(r));
        out.push('\n');
    }
    out
}

pub fn sweep_csv(parameter: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{parameter},{CSV_HEADER}\n");
    for row in rows {
        out.push_str(&format!("{},{}\n", row.value, record_fields(row.run.final_record())));
    }
    out
}

#[derive(Serialize)]
pub struct ConfigEcho<'a> {
    pub sha256: String,
    pub file: &'a RawConfig,
}

#[derive(Serialize)]
pub struct JsonDiagnostics<'a> {
    #[serde(flatten)]
    pub run: &'a RunDiagnostics,
    pub wall_seconds: f64,
}

#[derive(Serialize)]
pub struct SimulateResult<'a> {
    pub config: ConfigEcho<'a>,
    pub resonance: &'a ResonanceReport,
    pub records: &'a [FidelityRecord],
    pub scaling: Option<()>,
    pub diagnostics: JsonDiagnostics<'a>,
}

#[derive(Serialize)]
pub struct SweepRowJson<'a> {
    pub value: f64,
    pub records: &'a [FidelityRecord],
    pub diagnostics: &'a RunDiagnostics,
}

#[derive(Serialize)]
pub struct SweepResult<'a> {
    pub config: ConfigEcho<'a>,
    pub resonance: &'a ResonanceReport,
    pub parameter: &'a str,
    pub rows: Vec<SweepRowJson<'a>>,
    pub wall_seconds: f64,
}

pub fn simulate_json(
    raw: &RawConfig,
    config_text: &str,
    resonance: &ResonanceReport,
    run: &CompareRun,
    wall_seconds: f64,
) -> String {
    let result = SimulateResult {
        config: ConfigEcho { sha256: sha256_hex(config_text), file: raw },
        resonance,
        records: &run.records,
        scaling: None,
        diagnostics: JsonDiagnostics { run: &run.diagnostics, wall_seconds },
    };
    serde_json::to_string_pretty(&result).expect("result serialization cannot fail")
}

pub fn sweep_json(
    raw: &RawConfig,
    config_text: &str,
    resonance: &ResonanceReport,
    parameter: &str,
    rows: &[SweepRow],
    wall_seconds: f64,
) -> String {
    let result = SweepResult {
        config: ConfigEcho { sha256: sha256_hex(config_text), file: raw },
        resonance,
        parameter,
        rows: rows
            .iter()
            .map(|r| SweepRowJson {
                value: r.value,
                records: &r.run.records,
                diagnostics: &r.run.diagnostics,
            })
            .collect(),
        wall_seconds,
    };
    serde_json::to_string_pretty(&result).expect("result serialization cannot fail")
}
