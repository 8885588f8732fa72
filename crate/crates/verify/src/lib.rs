//! Standalone verifier for e2ev elections.
//!
//! Reads a manifest file and a board file, runs the checks documented in
//! [`e2ev_format::report`] and returns the canonical report. The only
//! project dependency is `e2ev-format`; all arithmetic, proof equations and
//! decoding rules are implemented here on `BigUint`, so this crate can be
//! audited, built and run without the rest of the toolkit.

mod checks;
pub mod group;

use e2ev_format::report::ReportDoc;

/// Verifies an election from the raw bytes of its published files.
pub fn verify_election(manifest_file: &[u8], board: &[u8], receipt: Option<&[u8]>) -> ReportDoc {
    checks::run(manifest_file, board, receipt)
}

/// The report as written to `report.json`: compact JSON and a newline.
pub fn report_bytes(report: &ReportDoc) -> Vec<u8> {
    let mut out = serde_json::to_vec(report).expect("report serializes");
    out.push(b'\n');
    out
}
