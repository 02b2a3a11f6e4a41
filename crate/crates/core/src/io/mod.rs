//! File formats: TREC qrels/run/groups inputs, desired distributions, the
//! JSON dataset bundle, reports, and the synthetic generator.

mod bundle;
mod report;
mod synth;
mod trec;

use std::path::Path;

use crate::error::{Error, Result};

pub use bundle::{assemble, DatasetBundle, Provenance};
pub use report::{
    real, write_correlations, write_groups, write_qrels, write_report, write_run, CorrelationRow, ReportFormat, ReportRow, CORRELATION_HEADER,
    REPORT_HEADER,
};
pub use synth::{generate_synthetic, group_name, SynthSpec};
pub use trec::{parse_desired, parse_groups, parse_qrels, parse_run, Qrels, Run, RunEntry, TopicQrels};

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn load_bundle(path: &Path) -> Result<DatasetBundle> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::parse(path.display().to_string(), 1, "invalid UTF-8"))?;
    DatasetBundle::from_json(&text)
}
