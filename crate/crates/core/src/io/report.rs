use std::io::Write;

use super::IoError;
use crate::verify::VerificationReport;

pub const REPORT_HEADER: [&str; 6] = [
    "check",
    "measured",
    "bound",
    "tolerance",
    "pass",
    "context-hash",
];

/// Writes reports as CSV with a header row.
pub fn write_reports<W: Write>(out: W, reports: &[VerificationReport]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record([
            r.check.clone(),
            format!("{:e}", r.measured),
            format!("{:e}", r.bound),
            format!("{:e}", r.tolerance),
            r.pass.to_string(),
            r.context.hash(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
