use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use elastica::SolveTrace;

use crate::error::CliError;

pub const HEADER: &str = "iter,energy,rel_err,tau,time_ms";

/// One row per completed outer iteration. Energies and relative errors are
/// written with 15 significant digits.
pub fn render(trace: &SolveTrace, timing: bool) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in &trace.records {
        let time = if timing { r.wall_time_ms } else { 0.0 };
        writeln!(
            out,
            "{},{:.14e},{:.14e},{},{:.3}",
            r.k, r.energy, r.rel_err, r.step_tau, time
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn write(path: &Path, trace: &SolveTrace, timing: bool) -> Result<(), CliError> {
    std::fs::write(path, render(trace, timing))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `trace.csv` becomes `trace.r.csv`, `trace.g.csv`, `trace.b.csv`.
pub fn channel_path(path: &Path, channel: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{channel}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{channel}"),
    };
    path.with_file_name(name)
}
